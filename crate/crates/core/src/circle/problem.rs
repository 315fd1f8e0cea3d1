//! Right parametrices as a filtered problem.
//!
//! Source elements are symbols of order `-m`, level `j` meaning that components
//! `0..j` vanish. Targets are symbols of order 0, and `L` is left composition
//! with `p`. The symbol maps read off component `j`, and `T^j` is
//! multiplication by the principal symbol `p_m`.

use num_rational::Rational64;

use super::{compose_symbols, principal_inverse, sup_norm, CircleSymbol, TrigRational};
use crate::error::{CircleError, SchemeError};
use crate::scalar::Ring;
use crate::scheme::{solve_to_order, FilteredProblem, Linear};
use crate::symbol::DirPair;

/// Samples used for the sup norms in `x`.
const NORM_POINTS: usize = 128;

impl<R: Ring> Linear for DirPair<R> {
    fn add(&self, other: &Self) -> Self {
        DirPair::add(self, other)
    }
    fn neg(&self) -> Self {
        DirPair::neg(self)
    }
}

impl Linear for CircleSymbol {
    fn add(&self, other: &Self) -> Self {
        CircleSymbol::add(self, other).expect("filtered spaces share one order")
    }
    fn neg(&self) -> Self {
        CircleSymbol::neg(self)
    }
}

/// A symbol with an excision scale per component (1 when never cut off).
#[derive(Clone, Debug, PartialEq)]
pub struct CircleElement {
    pub symbol: CircleSymbol,
    pub scales: Vec<f64>,
}

impl CircleElement {
    pub fn new(symbol: CircleSymbol) -> Self {
        let scales = vec![1.0; symbol.depth()];
        CircleElement { symbol, scales }
    }

    fn scale(&self, j: usize) -> f64 {
        self.scales.get(j).copied().unwrap_or(1.0)
    }
}

impl Linear for CircleElement {
    /// Components add; a shared component keeps the larger scale.
    fn add(&self, other: &Self) -> Self {
        let symbol = Linear::add(&self.symbol, &other.symbol);
        let scales = (0..symbol.depth()).map(|j| self.scale(j).max(other.scale(j))).collect();
        CircleElement { symbol, scales }
    }
    fn neg(&self) -> Self {
        CircleElement { symbol: self.symbol.neg(), scales: self.scales.clone() }
    }
}

/// `max_{k >= l} sup_x |u_k| * s_k^{l-k}`; infinite when a component below `l` is nonzero.
///
/// The level-`l` seminorm of `u` is `sup |u(x, xi)| |xi|^{m+l}` over the excised
/// region `|xi| >= s_k`, where component `k` behaves like `|xi|^{l-k}`.
fn weighted_norm(symbol: &CircleSymbol, scale: impl Fn(usize) -> f64, level: usize) -> f64 {
    let mut norm: f64 = 0.0;
    for (k, c) in symbol.components().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        if k < level {
            return f64::INFINITY;
        }
        let s = scale(k).max(1.0);
        norm = norm.max(sup_norm(c, NORM_POINTS) * s.powi(level as i32 - k as i32));
    }
    norm
}

pub struct CircleProblem {
    p: CircleSymbol,
    levels: usize,
    principal_inv: DirPair<TrigRational>,
}

impl CircleProblem {
    pub fn new(p: CircleSymbol, levels: usize) -> Result<Self, CircleError> {
        let principal_inv = principal_inverse(&p)?;
        Ok(CircleProblem { p, levels, principal_inv })
    }

    pub fn symbol(&self) -> &CircleSymbol {
        &self.p
    }

    fn source_order(&self) -> Rational64 {
        -self.p.order()
    }
}

impl FilteredProblem for CircleProblem {
    type Element = CircleElement;
    type Target = CircleSymbol;
    type Symbol = DirPair<TrigRational>;
    type TargetSymbol = DirPair<TrigRational>;

    fn levels(&self) -> usize {
        self.levels
    }

    fn zero_element(&self) -> CircleElement {
        CircleElement::new(CircleSymbol::zero(self.source_order(), 0))
    }

    fn apply(&self, u: &CircleElement) -> CircleSymbol {
        compose_symbols(&self.p, &u.symbol, self.levels + 1).expect("levels within the composition depth")
    }

    fn symbol_of(&self, j: usize, u: &CircleElement) -> DirPair<TrigRational> {
        u.symbol.component(j)
    }

    fn target_symbol_of(&self, j: usize, g: &CircleSymbol) -> DirPair<TrigRational> {
        g.component(j)
    }

    fn transport(&self, _j: usize, s: &DirPair<TrigRational>) -> DirPair<TrigRational> {
        self.p.component(0).mul(s)
    }

    fn transport_solve(&self, _j: usize, s: &DirPair<TrigRational>) -> Result<DirPair<TrigRational>, SchemeError> {
        Ok(self.principal_inv.mul(s))
    }

    fn extend(&self, j: usize, s: &DirPair<TrigRational>) -> CircleElement {
        let mut symbol = CircleSymbol::zero(self.source_order(), j + 1);
        symbol.set_component(j, s.clone());
        CircleElement::new(symbol)
    }

    fn level_norm(&self, j: usize, u: &CircleElement) -> f64 {
        weighted_norm(&u.symbol, |k| u.scale(k), j)
    }

    fn target_level_norm(&self, j: usize, g: &CircleSymbol) -> f64 {
        weighted_norm(g, |_| 1.0, j)
    }

    fn cutoff_apply(&self, scale: f64, u: &CircleElement) -> CircleElement {
        let scales = (0..u.symbol.depth()).map(|k| u.scale(k).max(scale)).collect();
        CircleElement { symbol: u.symbol.clone(), scales }
    }
}

/// Right parametrix with `depth` components, built by the order-by-order scheme.
pub fn parametrix(p: &CircleSymbol, depth: usize) -> Result<CircleSymbol, CircleError> {
    let problem = CircleProblem::new(p.clone(), depth)?;
    let (terms, _) = solve_to_order(&problem, &CircleSymbol::identity(), depth)?;
    let mut q = CircleSymbol::zero(-p.order(), depth);
    for term in &terms {
        q.set_component(term.level, term.element.symbol.component(term.level));
    }
    Ok(q)
}
