//! Asymptotic fundamental systems of half-line operators
//! `L = D_t^m + sum_r a_r(t) D_t^{m-r}` with `D_t = -i d/dt` and classical
//! coefficients `a_r` of degree `r l*` and step `l* + 1`.
//!
//! Solutions have the form `e^{i mu T} c(t)` with `T = t^{l*+1}/(l*+1)` and a
//! classical amplitude `c(t) = t^Delta (c_0 + c_1 t^{-(l*+1)} + ...)`.

mod problem;

pub use problem::{Atom, OdeElement, OdeProblem, OdeTarget, NormGrid, ResidualConfig};

use num_complex::Complex64;
use num_rational::Rational64;

use crate::error::OdeError;
use crate::numerics::{dopri5, pack, polynomial_roots, unpack, OdeOptions};
use crate::scalar::{ratio_f64, rational_approx, Scalar};
use crate::symbol::{phg_add, phg_mul, DirPair, ExcisionCutoff, PolyhomExpansion};

/// The derivative convention: `D_t = D_SIGN * i * d/dt`.
pub const D_SIGN: f64 = -1.0;

#[derive(Clone, Debug, PartialEq)]
pub struct HalfLineOperator<C: Scalar> {
    m: usize,
    lstar: Rational64,
    coeffs: Vec<PolyhomExpansion<C>>,
}

impl<C: Scalar> HalfLineOperator<C> {
    /// `coeffs[r-1]` is the expansion of `a_r` (anchor `r l*`, step `l* + 1`).
    pub fn new(m: usize, lstar: Rational64, coeffs: Vec<PolyhomExpansion<C>>) -> Result<Self, OdeError> {
        if m == 0 {
            return Err(OdeError::InvalidOperator("order must be positive".into()));
        }
        if lstar <= Rational64::from_integer(-1) {
            return Err(OdeError::InvalidOperator("l* must exceed -1".into()));
        }
        if coeffs.len() != m {
            return Err(OdeError::InvalidOperator(format!("expected {m} coefficients, got {}", coeffs.len())));
        }
        let step = lstar + 1;
        for (idx, a) in coeffs.iter().enumerate() {
            let r = idx as i64 + 1;
            let anchor = C::from_ratio(lstar * r);
            let consistent = if C::EXACT { a.anchor() == &anchor } else { a.anchor().sub(&anchor).near_zero(1e-12) };
            if !consistent || a.step() != step {
                return Err(OdeError::InvalidOperator(format!(
                    "a_{r} must have anchor {} and step {}",
                    anchor.render(),
                    crate::scalar::render_ratio(step)
                )));
            }
        }
        Ok(HalfLineOperator { m, lstar, coeffs })
    }

    /// Builds the operator from the table `a_{r,k}` (`table[r-1][k]`).
    pub fn from_table(m: usize, lstar: Rational64, table: &[Vec<C>]) -> Result<Self, OdeError> {
        if table.len() != m {
            return Err(OdeError::InvalidOperator(format!("expected {m} coefficient rows, got {}", table.len())));
        }
        let step = lstar + 1;
        let coeffs = table
            .iter()
            .enumerate()
            .map(|(idx, row)| {
                let terms = row.iter().map(|c| DirPair::new(c.clone(), C::zero())).collect();
                PolyhomExpansion::new(C::from_ratio(lstar * (idx as i64 + 1)), step, terms).map_err(OdeError::from)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(m, lstar, coeffs)
    }

    pub fn order(&self) -> usize {
        self.m
    }

    pub fn lstar(&self) -> Rational64 {
        self.lstar
    }

    /// Grading step `l* + 1`.
    pub fn step(&self) -> Rational64 {
        self.lstar + 1
    }

    pub fn coefficient(&self, r: usize) -> &PolyhomExpansion<C> {
        &self.coeffs[r - 1]
    }

    /// `a_{r,k}`, zero beyond the stored table.
    pub fn a(&self, r: usize, k: usize) -> C {
        self.coeffs[r - 1].term(k).map(|t| t.plus.clone()).unwrap_or_else(C::zero)
    }

    fn max_terms(&self) -> usize {
        self.coeffs.iter().map(|c| c.depth()).max().unwrap_or(0).max(1)
    }

    pub fn to_float(&self) -> HalfLineOperator<Complex64> {
        HalfLineOperator { m: self.m, lstar: self.lstar, coeffs: self.coeffs.iter().map(|c| c.to_float()).collect() }
    }

    /// Value of the realized coefficient `a_r(t)` (excision scale 1).
    pub fn coefficient_value(&self, r: usize, t: f64) -> Complex64 {
        let a = &self.coeffs[r - 1];
        a.realize(&ExcisionCutoff::default(), t, a.depth()).unwrap_or_default()
    }
}

/// Ascending-power polynomial evaluation.
pub fn poly_eval<C: Scalar>(coeffs: &[C], x: &C) -> C {
    coeffs.iter().rev().fold(C::zero(), |acc, c| acc.mul(x).add(c))
}

pub fn poly_derivative<C: Scalar>(coeffs: &[C]) -> Vec<C> {
    coeffs.iter().enumerate().skip(1).map(|(k, c)| c.mul(&C::from_i64(k as i64))).collect()
}

#[derive(Clone, Debug)]
pub struct RootInfo {
    pub value: Complex64,
    /// Exact rational value when the root is rational and verified exactly.
    pub exact: Option<Rational64>,
    pub simple: bool,
    pub residual: f64,
    pub derivative: f64,
}

impl RootInfo {
    pub fn is_real(&self) -> bool {
        self.value.im.abs() <= 1e-9 * self.value.norm().max(1.0)
    }
}

#[derive(Clone, Debug)]
pub struct CharData<C: Scalar> {
    /// `l0` in ascending powers (monic, degree m).
    pub l0: Vec<C>,
    /// `l1` in ascending powers (degree < m).
    pub l1: Vec<C>,
    pub roots: Vec<RootInfo>,
}

/// `l0(tau) = tau^m + sum a_{r0} tau^{m-r}`, `l1(tau) = sum a_{r1} tau^{m-r}` and the roots of `l0`.
pub fn char_data<C: Scalar>(op: &HalfLineOperator<C>) -> Result<CharData<C>, OdeError> {
    let (l0, l1) = char_data_polys(op);
    let numeric: Vec<Complex64> = l0.iter().map(|c| c.to_c64()).collect();
    let found = polynomial_roots(&numeric).map_err(OdeError::RootFinding)?;
    let dl0 = poly_derivative(&l0);
    let scale = numeric.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let mut roots = Vec::with_capacity(op.m);
    for z in found {
        let (p, dp) = crate::numerics::horner(&numeric, z);
        let mut exact = None;
        if C::EXACT && z.im.abs() <= 1e-9 * z.norm().max(1.0) {
            if let Some(q) = rational_approx(z.re, 1_000_000) {
                if poly_eval(&l0, &C::from_ratio(q)).is_zero() {
                    exact = Some(q);
                }
            }
        }
        let derivative = match exact {
            Some(q) => poly_eval(&dl0, &C::from_ratio(q)).to_c64().norm(),
            None => dp.norm(),
        };
        let residual = if exact.is_some() { 0.0 } else { p.norm() };
        if residual > 1e-6 * scale {
            return Err(OdeError::RootFinding(format!("root {z} has residual {residual:e}")));
        }
        roots.push(RootInfo {
            value: exact.map(|q| Complex64::new(ratio_f64(q), 0.0)).unwrap_or(z),
            exact,
            simple: derivative > 1e-8 * scale,
            residual,
            derivative,
        });
    }
    roots.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    Ok(CharData { l0, l1, roots })
}

/// `Delta = -(l* mu l0''(mu)/2 + i l1(mu)) / l0'(mu)` at a simple root `mu`.
pub fn delta_exponent<C: Scalar>(op: &HalfLineOperator<C>, mu: &C) -> Result<C, OdeError> {
    let data = char_data_polys(op);
    let (l0, l1) = (&data.0, &data.1);
    let value = poly_eval(l0, mu);
    let scale = l0.iter().map(|c| c.to_c64().norm()).fold(1.0, f64::max);
    if !value.near_zero(1e-9 * scale) {
        return Err(OdeError::NotRoot(mu.to_c64().re));
    }
    let d1 = poly_derivative(l0);
    let d2 = poly_derivative(&d1);
    let l0p = poly_eval(&d1, mu);
    if l0p.near_zero(1e-8 * scale) {
        return Err(OdeError::MultipleRoot { root: mu.to_c64().re, derivative: l0p.to_c64().norm() });
    }
    let half = C::from_ratio(Rational64::new(1, 2));
    let curvature = C::from_ratio(op.lstar).mul(mu).mul(&poly_eval(&d2, mu)).mul(&half);
    let numerator = curvature.add(&C::imag_unit().mul(&poly_eval(l1, mu)));
    Ok(numerator.neg().div(&l0p).expect("nonzero derivative"))
}

fn char_data_polys<C: Scalar>(op: &HalfLineOperator<C>) -> (Vec<C>, Vec<C>) {
    let m = op.m;
    let mut l0 = vec![C::zero(); m + 1];
    let mut l1 = vec![C::zero(); m];
    l0[m] = C::one();
    for r in 1..=m {
        l0[m - r] = op.a(r, 0);
        l1[m - r] = op.a(r, 1);
    }
    (l0, l1)
}

/// One application of `D_t` to `e^{i mu T} sum_j c_j t^{A - j s}`, returning the
/// amplitude of the result (anchor `A + l*`):
/// `d_j = mu c_j + ((A - (j-1) s) / i) c_{j-1}`. With `grow` the exact image
/// (one more term) is returned, otherwise the depth is kept.
pub fn apply_dt<C: Scalar>(e: &PolyhomExpansion<C>, mu: &C, lstar: Rational64, grow: bool) -> PolyhomExpansion<C> {
    let depth = e.depth() + usize::from(grow);
    let inv_i = C::imag_unit().neg();
    let mut out = PolyhomExpansion::zero(e.anchor().add(&C::from_ratio(lstar)), e.step(), depth);
    for j in 0..depth {
        let mut t = e.term(j).map(|c| c.scale(mu)).unwrap_or_else(DirPair::zero);
        if j >= 1 {
            if let Some(prev) = e.term(j - 1) {
                let factor = e.degree(j - 1).mul(&inv_i);
                t = t.add(&prev.scale(&factor));
            }
        }
        out.set_term(j, t);
    }
    out
}

/// Exact amplitude of `L(e^{i mu T} t^delta)`: anchor `delta + m l*`, every
/// term of the (finite) image.
pub fn conjugate_image<C: Scalar>(op: &HalfLineOperator<C>, mu: &C, delta: &C) -> PolyhomExpansion<C> {
    let s = op.step();
    let full = op.m + op.max_terms();
    let mut powers = Vec::with_capacity(op.m + 1);
    powers.push(PolyhomExpansion::monomial(delta.clone(), s, DirPair::new(C::one(), C::zero()), 1));
    for k in 1..=op.m {
        let next = apply_dt(&powers[k - 1], mu, op.lstar, true);
        powers.push(next);
    }
    let mut total = powers[op.m].padded(full);
    for r in 1..=op.m {
        let term = phg_mul(&op.coeffs[r - 1].padded(full), &powers[op.m - r].padded(full), full)
            .expect("operator coefficients share the grading step");
        total = phg_add(&total, &term).expect("images share the anchor delta + m l*");
    }
    total
}

/// Coefficients `e_0..e_N` of `L(e^{i mu T} t^delta) = e^{i mu T} sum_k e_k t^{delta + m l* - k(l*+1)}`.
pub fn conjugate_expand<C: Scalar>(op: &HalfLineOperator<C>, mu: &C, delta: &C, n: usize) -> Vec<C> {
    let image = conjugate_image(op, mu, delta);
    (0..=n).map(|k| image.term(k).map(|t| t.plus.clone()).unwrap_or_else(C::zero)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FundSolution<C: Scalar> {
    pub mu: C,
    pub delta: C,
    /// `c(t)`: anchor `delta`, step `l* + 1`, `c_0 = 1`.
    pub amplitude: PolyhomExpansion<C>,
}

impl<C: Scalar> FundSolution<C> {
    pub fn coefficients(&self) -> Vec<C> {
        self.amplitude.terms().iter().map(|t| t.plus.clone()).collect()
    }
}

/// `c_0 = 1`, `c_j = -e_{j+1}(defect) / (i j (l*+1) l0'(mu))`, where the defect is
/// the image of the partial sum `sum_{i<j} c_i t^{Delta - i s}`.
pub fn build_fundamental<C: Scalar>(op: &HalfLineOperator<C>, mu: &C, order: usize) -> Result<FundSolution<C>, OdeError> {
    let delta = delta_exponent(op, mu)?;
    let s = op.step();
    let order = order.max(1);
    let l0p = poly_eval(&poly_derivative(&char_data_polys(op).0), mu);
    let images: Vec<Vec<C>> = (0..order)
        .map(|i| {
            let d = delta.sub(&C::from_ratio(s * Rational64::from_integer(i as i64)));
            conjugate_expand(op, mu, &d, order + 1)
        })
        .collect();
    let mut c = vec![C::one()];
    for j in 1..order {
        let defect = (0..j).fold(C::zero(), |acc, i| acc.add(&c[i].mul(&images[i][j + 1 - i])));
        let divisor = C::imag_unit().mul(&C::from_ratio(s * Rational64::from_integer(j as i64))).mul(&l0p);
        c.push(defect.neg().div(&divisor).expect("simple root"));
    }
    let terms = c.into_iter().map(|v| DirPair::new(v, C::zero())).collect();
    let amplitude = PolyhomExpansion::new(delta.clone(), s, terms)?;
    Ok(FundSolution { mu: mu.clone(), delta, amplitude })
}

/// One branch per root, in increasing root order. Requires `m` simple real roots;
/// exact fields additionally require rational roots.
pub fn fundamental_system<C: Scalar>(op: &HalfLineOperator<C>, order: usize) -> Result<Vec<FundSolution<C>>, OdeError> {
    let data = char_data(op)?;
    for root in &data.roots {
        if !root.is_real() {
            return Err(OdeError::ComplexRoot(root.value));
        }
        if !root.simple {
            return Err(OdeError::MultipleRoot { root: root.value.re, derivative: root.derivative });
        }
    }
    data.roots
        .iter()
        .map(|root| {
            let mu = match (C::EXACT, root.exact) {
                (true, Some(q)) => C::from_ratio(q),
                (true, None) => {
                    return Err(OdeError::RootFinding(format!(
                        "root {} is not rational; use floating-point coefficients",
                        root.value.re
                    )))
                }
                (false, _) => C::from_c64(Complex64::new(root.value.re, 0.0)),
            };
            build_fundamental(op, &mu, order)
        })
        .collect()
}

/// `T = t^{l*+1} / (l*+1)`.
pub fn phase_variable(lstar: Rational64, t: f64) -> f64 {
    let s = ratio_f64(lstar + 1);
    t.powf(s) / s
}

/// `e^{i mu T} * realize(c, t, J)` with excision at `cutoff`.
pub fn evaluate_solution<C: Scalar>(
    sol: &FundSolution<C>,
    op: &HalfLineOperator<C>,
    t: f64,
    order: usize,
    cutoff: &ExcisionCutoff,
) -> Result<Complex64, OdeError> {
    if t < cutoff.scale {
        return Err(OdeError::BelowExcision { t, scale: cutoff.scale });
    }
    if order > sol.amplitude.depth() {
        return Err(OdeError::Depth { requested: order, available: sol.amplitude.depth() });
    }
    let amp = sol.amplitude.realize(cutoff, t, order)?;
    let phase = Complex64::new(0.0, sol.mu.to_c64().re * phase_variable(op.lstar, t)).exp();
    Ok(phase * amp)
}

/// Values of `d^k/dt^k u` for `k < count` at `t`, where
/// `u = e^{i mu T} sum_{j<J} c_j t^{Delta - j s}` (no excision).
pub fn series_derivatives<C: Scalar>(
    sol: &FundSolution<C>,
    op: &HalfLineOperator<C>,
    t: f64,
    order: usize,
    count: usize,
) -> Vec<Complex64> {
    let amp = sol.amplitude.truncated(order).to_float();
    let mu = sol.mu.to_c64();
    let phase = Complex64::new(0.0, mu.re * phase_variable(op.lstar, t)).exp();
    let mut current = amp;
    let mut out = Vec::with_capacity(count);
    // d/dt = i D_t
    let mut factor = Complex64::new(1.0, 0.0);
    for k in 0..count {
        if k > 0 {
            current = apply_dt(&current, &mu, op.lstar, true);
            factor *= Complex64::new(0.0, -D_SIGN);
        }
        out.push(factor * phase * current.sum_terms(crate::symbol::Dir::Plus, t, current.depth()));
    }
    out
}

/// Value of the exact image `L u` of the truncated series at `t` (no excision).
pub fn series_residual<C: Scalar>(sol: &FundSolution<C>, op: &HalfLineOperator<C>, t: f64, order: usize) -> Complex64 {
    let mu = sol.mu.clone();
    let s = op.step();
    let phase = Complex64::new(0.0, mu.to_c64().re * phase_variable(op.lstar, t)).exp();
    let coeffs = sol.coefficients();
    let mut total = Complex64::new(0.0, 0.0);
    for (j, c) in coeffs.iter().take(order).enumerate() {
        let d = sol.delta.sub(&C::from_ratio(s * Rational64::from_integer(j as i64)));
        let image = conjugate_image(op, &mu, &d).to_float();
        total += c.to_c64() * image.sum_terms(crate::symbol::Dir::Plus, t, image.depth());
    }
    phase * total
}

/// Numerical solution of `L w = 0`: `state0 = (w, w', ..., w^{(m-1)})` at `t0`;
/// returns the state at each output time.
pub fn integrate<C: Scalar>(
    op: &HalfLineOperator<C>,
    t0: f64,
    state0: &[Complex64],
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<Vec<Vec<Complex64>>, OdeError> {
    let m = op.m;
    if state0.len() != m {
        return Err(OdeError::Integration(format!("state must have {m} components")));
    }
    let fop = op.to_float();
    let minus_i = Complex64::new(0.0, D_SIGN);
    // w^{(m)} = -(1/(-i)^m) sum_r a_r (-i)^{m-r} w^{(m-r)}
    let inv_lead = minus_i.powi(m as i32).inv();
    let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
        let w = unpack(y);
        let mut top = Complex64::new(0.0, 0.0);
        for r in 1..=m {
            top += fop.coefficient_value(r, t) * minus_i.powi((m - r) as i32) * w[m - r];
        }
        let top = -top * inv_lead;
        let mut d = Vec::with_capacity(op.m);
        d.extend_from_slice(&w[1..]);
        d.push(top);
        dy.copy_from_slice(&pack(&d));
    };
    let (states, _) = dopri5(rhs, t0, &pack(state0), outputs, opts).map_err(OdeError::Integration)?;
    Ok(states.iter().map(|s| unpack(s)).collect())
}

/// Wronskian determinant of the solutions at `t` from their derivative vectors.
pub fn wronskian(states: &[Vec<Complex64>]) -> Complex64 {
    let m = states.len();
    let mat = nalgebra::DMatrix::from_fn(m, m, |i, j| states[j][i]);
    mat.determinant()
}
