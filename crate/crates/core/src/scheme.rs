//! The abstract order-by-order scheme.
//!
//! A problem is described by a [`FilteredProblem`]: filtered source and target
//! spaces, the operator between them, principal symbol maps at each level, the
//! transport maps `T^j` between the symbol spaces with their inverses, and a
//! splitting of each symbol map. The engine only moves values through these
//! maps; element representations belong to the instantiation.
//!
//! [`solve_to_order`] builds the terms `u_j`, [`asymptotic_sum`] combines them
//! with growing cutoff scales, and [`solve`] adds the optional correction by a
//! residual solver.

use std::fmt::Debug;

use crate::error::SchemeError;

/// Vector-space operations on instantiation-owned values.
pub trait Linear: Clone {
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

impl<S: crate::scalar::Scalar> Linear for S {
    fn add(&self, other: &Self) -> Self {
        crate::scalar::Ring::add(self, other)
    }
    fn neg(&self) -> Self {
        crate::scalar::Ring::neg(self)
    }
}

pub trait FilteredProblem {
    type Element: Linear + Debug;
    type Target: Linear + Debug;
    type Symbol: Clone + Debug;
    type TargetSymbol: Linear + Debug;

    /// Deepest supported filtration level.
    fn levels(&self) -> usize;
    fn zero_element(&self) -> Self::Element;
    fn apply(&self, u: &Self::Element) -> Self::Target;
    fn symbol_of(&self, j: usize, u: &Self::Element) -> Self::Symbol;
    fn target_symbol_of(&self, j: usize, g: &Self::Target) -> Self::TargetSymbol;
    /// The forward map `T^j`.
    fn transport(&self, j: usize, s: &Self::Symbol) -> Self::TargetSymbol;
    /// The inverse of `T^j`.
    fn transport_solve(&self, j: usize, s: &Self::TargetSymbol) -> Result<Self::Symbol, SchemeError>;
    /// The splitting `tau^j`: an element at level `j` with principal symbol `s`.
    fn extend(&self, j: usize, s: &Self::Symbol) -> Self::Element;
    fn level_norm(&self, j: usize, u: &Self::Element) -> f64;
    fn target_level_norm(&self, j: usize, g: &Self::Target) -> f64;

    /// Leading term supplied directly, for problems where `T^0` is not
    /// invertible (homogeneous equations with a prescribed normalization).
    fn seed(&self, _f: &Self::Target) -> Option<Self::Element> {
        None
    }

    /// `chi(c) u`: the cutoff family of the summation step.
    fn cutoff_apply(&self, _scale: f64, u: &Self::Element) -> Self::Element {
        u.clone()
    }

    /// Solves `L v = g` for residual-class `g`, when available.
    fn residual_solve(&self, _g: &Self::Target) -> Option<Result<Self::Element, SchemeError>> {
        None
    }
}

#[derive(Clone, Debug)]
pub struct ExpansionTerm<E> {
    pub level: usize,
    pub element: E,
    /// Seminorms at levels `0..=level`.
    pub level_norms: Vec<f64>,
}

/// Constructs `u_0, ..., u_{J-1}` and returns them with the residual
/// `L(u_0 + ... + u_{J-1}) - f`.
pub fn solve_to_order<P: FilteredProblem>(
    problem: &P,
    f: &P::Target,
    order: usize,
) -> Result<(Vec<ExpansionTerm<P::Element>>, P::Target), SchemeError> {
    if order > problem.levels() {
        return Err(SchemeError::LevelOverflow { requested: order, levels: problem.levels() });
    }
    let mut terms = Vec::with_capacity(order);
    let mut partial = problem.zero_element();
    for j in 0..order {
        let u = if j == 0 {
            match problem.seed(f) {
                Some(u) => u,
                None => {
                    let s = problem.transport_solve(0, &problem.target_symbol_of(0, f))?;
                    problem.extend(0, &s)
                }
            }
        } else {
            let g = problem.apply(&partial).sub(f);
            let s = problem.transport_solve(j, &problem.target_symbol_of(j, &g).neg())?;
            problem.extend(j, &s)
        };
        partial = partial.add(&u);
        let level_norms = (0..=j).map(|l| problem.level_norm(l, &u)).collect();
        terms.push(ExpansionTerm { level: j, element: u, level_norms });
    }
    let residual = problem.apply(&partial).sub(f);
    Ok((terms, residual))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CutoffSchedule {
    pub cutoffs: Vec<f64>,
    budgets: Vec<f64>,
}

impl CutoffSchedule {
    /// Default budgets `2^{-j}`.
    pub fn new(cutoffs: Vec<f64>) -> Self {
        let budgets = (0..cutoffs.len()).map(default_budget).collect();
        CutoffSchedule { cutoffs, budgets }
    }

    pub fn with_budgets(cutoffs: Vec<f64>, budgets: Vec<f64>) -> Self {
        CutoffSchedule { cutoffs, budgets }
    }

    pub fn budget(&self, j: usize) -> f64 {
        self.budgets.get(j).copied().unwrap_or_else(|| default_budget(j))
    }

    pub fn is_monotone(&self) -> bool {
        self.cutoffs.iter().all(|&c| c >= 1.0) && self.cutoffs.windows(2).all(|w| w[0] <= w[1])
    }
}

fn default_budget(j: usize) -> f64 {
    0.5f64.powi(j as i32)
}

#[derive(Clone, Copy, Debug)]
pub struct SumOptions {
    /// Largest cutoff scale tried before giving up.
    pub max_scale: f64,
}

impl Default for SumOptions {
    fn default() -> Self {
        SumOptions { max_scale: 2f64.powi(60) }
    }
}

/// Measured tail control of an asymptotic sum.
#[derive(Clone, Debug, PartialEq)]
pub struct TailReport {
    /// `level_norm(j-1, chi(c_j) u_j)` for `j >= 1` (entry 0 is 0).
    pub term_norms: Vec<f64>,
    /// `(J, level_norm(J-1, sum_{j>=J} chi(c_j) u_j), sum_{j>=J} budget(j))` for `J >= 1`.
    pub tails: Vec<(usize, f64, f64)>,
}

impl TailReport {
    pub fn certified(&self) -> bool {
        self.tails.iter().all(|&(_, norm, bound)| norm <= bound)
    }
}

/// Sums `chi(c_j) u_j`. Without a schedule each `c_j` is the smallest power of
/// two, starting from `max(1, c_{j-1})`, with
/// `level_norm(j-1, chi(c_j) u_j) <= budget(j)`.
pub fn asymptotic_sum<E, C, N>(
    terms: &[ExpansionTerm<E>],
    zero: E,
    cutoff_apply: C,
    level_norm: N,
    schedule: Option<CutoffSchedule>,
    opts: SumOptions,
) -> Result<(E, CutoffSchedule, TailReport), SchemeError>
where
    E: Linear,
    C: Fn(f64, &E) -> E,
    N: Fn(usize, &E) -> f64,
{
    let scaled_terms: Vec<E>;
    let schedule = match schedule {
        Some(s) => {
            if s.cutoffs.len() < terms.len() || !s.is_monotone() {
                return Err(SchemeError::BadSchedule { given: s.cutoffs.len(), needed: terms.len() });
            }
            scaled_terms = terms.iter().zip(&s.cutoffs).map(|(t, &c)| cutoff_apply(c, &t.element)).collect();
            s
        }
        None => {
            let mut cutoffs = Vec::with_capacity(terms.len());
            let mut scaled = Vec::with_capacity(terms.len());
            let mut c: f64 = 1.0;
            for (j, term) in terms.iter().enumerate() {
                let mut v = cutoff_apply(c, &term.element);
                if j > 0 {
                    let budget = default_budget(j);
                    loop {
                        let norm = level_norm(j - 1, &v);
                        if norm <= budget {
                            break;
                        }
                        if c * 2.0 > opts.max_scale {
                            return Err(SchemeError::BudgetUnreachable { level: j, scale: c, norm, budget });
                        }
                        c *= 2.0;
                        v = cutoff_apply(c, &term.element);
                    }
                }
                cutoffs.push(c);
                scaled.push(v);
            }
            scaled_terms = scaled;
            CutoffSchedule::new(cutoffs)
        }
    };

    let n = scaled_terms.len();
    let mut term_norms = vec![0.0; n];
    for (j, v) in scaled_terms.iter().enumerate().skip(1) {
        term_norms[j] = level_norm(j - 1, v);
    }
    // suffix sums give every tail
    let mut suffix = vec![zero.clone(); n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1].add(&scaled_terms[j]);
    }
    let mut tails = Vec::new();
    let mut bound = 0.0;
    let mut bounds = vec![0.0; n + 1];
    for j in (1..n).rev() {
        bound += schedule.budget(j);
        bounds[j] = bound;
    }
    for big_j in 1..n {
        tails.push((big_j, level_norm(big_j - 1, &suffix[big_j]), bounds[big_j]));
    }
    let total = suffix.swap_remove(0);
    Ok((total, schedule, TailReport { term_norms, tails }))
}

/// Result of [`solve`].
#[derive(Clone, Debug)]
pub struct Solution<E> {
    pub element: E,
    pub terms: Vec<ExpansionTerm<E>>,
    pub schedule: CutoffSchedule,
    pub tail: TailReport,
    /// `(l, target_level_norm(l, L u - f))` for `l = 0..=J`.
    pub residual_norms: Vec<(usize, f64)>,
    /// Whether the residual solver was applied.
    pub corrected: bool,
}

/// Terms, asymptotic summation and (when available) the residual correction.
pub fn solve<P: FilteredProblem>(
    problem: &P,
    f: &P::Target,
    order: usize,
    schedule: Option<CutoffSchedule>,
    opts: SumOptions,
) -> Result<Solution<P::Element>, SchemeError> {
    let (terms, _) = solve_to_order(problem, f, order)?;
    let (mut element, schedule, tail) = asymptotic_sum(
        &terms,
        problem.zero_element(),
        |c, u| problem.cutoff_apply(c, u),
        |j, u| problem.level_norm(j, u),
        schedule,
        opts,
    )?;
    let mut corrected = false;
    let defect = problem.apply(&element).sub(f);
    if let Some(v) = problem.residual_solve(&defect.neg()) {
        element = element.add(&v?);
        corrected = true;
    }
    let residual = problem.apply(&element).sub(f);
    let residual_norms = (0..=order).map(|l| (l, problem.target_level_norm(l, &residual))).collect();
    Ok(Solution { element, terms, schedule, tail, residual_norms, corrected })
}

/// The induced splitting `s~ -> L tau^j (T^j)^{-1} s~` of the target symbol map.
pub fn induced_splitting<P: FilteredProblem>(
    problem: &P,
    j: usize,
) -> impl Fn(&P::TargetSymbol) -> Result<P::Target, SchemeError> + '_ {
    move |s| {
        let sym = problem.transport_solve(j, s)?;
        Ok(problem.apply(&problem.extend(j, &sym)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Multiplication by a formal power series `p(x)` with `p(0) != 0`; level `j`
    /// is the coefficient of `x^j`.
    #[derive(Clone, Debug, PartialEq)]
    struct Series(Vec<f64>);

    impl Linear for Series {
        fn add(&self, o: &Self) -> Self {
            let n = self.0.len().max(o.0.len());
            Series((0..n).map(|i| self.0.get(i).unwrap_or(&0.0) + o.0.get(i).unwrap_or(&0.0)).collect())
        }
        fn neg(&self) -> Self {
            Series(self.0.iter().map(|v| -v).collect())
        }
    }

    impl Linear for f64 {
        fn add(&self, o: &Self) -> Self {
            self + o
        }
        fn neg(&self) -> Self {
            -self
        }
    }

    struct Mult {
        p: Vec<f64>,
        depth: usize,
    }

    impl FilteredProblem for Mult {
        type Element = Series;
        type Target = Series;
        type Symbol = f64;
        type TargetSymbol = f64;
        fn levels(&self) -> usize {
            self.depth
        }
        fn zero_element(&self) -> Series {
            Series(vec![0.0; self.depth])
        }
        fn apply(&self, u: &Series) -> Series {
            let mut out = vec![0.0; self.depth];
            for (i, a) in self.p.iter().enumerate() {
                for (j, b) in u.0.iter().enumerate() {
                    if i + j < self.depth {
                        out[i + j] += a * b;
                    }
                }
            }
            Series(out)
        }
        fn symbol_of(&self, j: usize, u: &Series) -> f64 {
            u.0.get(j).copied().unwrap_or(0.0)
        }
        fn target_symbol_of(&self, j: usize, g: &Series) -> f64 {
            g.0.get(j).copied().unwrap_or(0.0)
        }
        fn transport(&self, _j: usize, s: &f64) -> f64 {
            self.p[0] * s
        }
        fn transport_solve(&self, j: usize, s: &f64) -> Result<f64, SchemeError> {
            if self.p[0] == 0.0 {
                return Err(SchemeError::Transport { level: j, reason: "p(0) = 0".into() });
            }
            Ok(s / self.p[0])
        }
        fn extend(&self, j: usize, s: &f64) -> Series {
            let mut v = vec![0.0; self.depth];
            v[j] = *s;
            Series(v)
        }
        fn level_norm(&self, j: usize, u: &Series) -> f64 {
            if u.0.iter().take(j).any(|&c| c != 0.0) {
                f64::INFINITY
            } else {
                u.0.iter().skip(j).fold(0.0, |m, c| m + c.abs())
            }
        }
        fn target_level_norm(&self, j: usize, g: &Series) -> f64 {
            self.level_norm(j, g)
        }
    }

    #[test]
    fn inverts_power_series() {
        // 1 / (1 - x) = 1 + x + x^2 + ...
        let problem = Mult { p: vec![1.0, -1.0], depth: 6 };
        let f = problem.extend(0, &1.0);
        let (terms, residual) = solve_to_order(&problem, &f, 5).unwrap();
        for (j, t) in terms.iter().enumerate() {
            assert_eq!(problem.symbol_of(j, &t.element), 1.0);
        }
        for l in 0..5 {
            assert_eq!(problem.target_symbol_of(l, &residual), 0.0);
        }
        assert_eq!(problem.target_symbol_of(5, &residual), -1.0);
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let problem = Mult { p: vec![2.0, 3.0], depth: 4 };
        let f = problem.zero_element();
        let sol = solve(&problem, &f, 4, None, SumOptions::default()).unwrap();
        assert!(sol.element.0.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn level_overflow_and_transport_failure() {
        let problem = Mult { p: vec![1.0], depth: 3 };
        let f = problem.zero_element();
        assert!(matches!(solve_to_order(&problem, &f, 4), Err(SchemeError::LevelOverflow { .. })));
        let singular = Mult { p: vec![0.0, 1.0], depth: 3 };
        let f = singular.extend(0, &1.0);
        assert!(matches!(solve_to_order(&singular, &f, 2), Err(SchemeError::Transport { level: 0, .. })));
    }

    #[test]
    fn induced_splitting_recovers_symbol() {
        let problem = Mult { p: vec![2.0, 5.0, -1.0], depth: 5 };
        for j in 0..4 {
            let split = induced_splitting(&problem, j);
            let g = split(&3.5).unwrap();
            assert_eq!(problem.target_symbol_of(j, &g), 3.5);
        }
    }

    #[test]
    fn schedule_validation() {
        let terms = vec![ExpansionTerm { level: 0, element: 1.0, level_norms: vec![1.0] }; 3];
        let bad = CutoffSchedule::new(vec![1.0, 4.0, 2.0]);
        assert!(asymptotic_sum(&terms, 0.0, |_, u| *u, |_, u| u.abs(), Some(bad), SumOptions::default()).is_err());
        let unreachable = asymptotic_sum(&terms, 0.0, |_, u| *u, |_, u| u.abs(), None, SumOptions::default());
        assert!(matches!(unreachable, Err(SchemeError::BudgetUnreachable { level: 1, .. })));
    }
}
