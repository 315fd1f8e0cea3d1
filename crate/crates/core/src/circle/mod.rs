//! Classical pseudodifferential symbols on the circle.
//!
//! A symbol of order `m` is a finite sum of homogeneous components
//! `p_{m-j}(x, xi)`, each stored as one exact trigonometric rational function of
//! `x` per frequency direction: `p_{m-j}(x, xi) = a_dir(x) |xi|^{m-j}`.
//! Components beyond the stored ones are zero.

mod problem;
mod quantize;
mod trig;

pub use problem::{parametrix, CircleElement, CircleProblem};
pub use quantize::{quantize_apply, remainder_probe, DecayTable, QuantizedAction};
pub use trig::{TrigPoly, TrigRational};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero as _;

use crate::error::CircleError;
use crate::scalar::{falling, QComplex, Ring, Scalar};
use crate::symbol::{Dir, DirPair};

/// Largest supported number of components in a composition.
pub const MAX_DEPTH: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct CircleSymbol {
    order: Rational64,
    components: Vec<DirPair<TrigRational>>,
}

impl CircleSymbol {
    pub fn new(order: Rational64, components: Vec<DirPair<TrigRational>>) -> Self {
        CircleSymbol { order, components }
    }

    pub fn zero(order: Rational64, depth: usize) -> Self {
        CircleSymbol { order, components: vec![DirPair::zero(); depth] }
    }

    /// The identity operator: order 0, component 1.
    pub fn identity() -> Self {
        CircleSymbol { order: Rational64::zero(), components: vec![DirPair::even(TrigRational::one())] }
    }

    /// `a(x) |xi|^m`.
    pub fn abs_power(m: Rational64, a: TrigPoly) -> Self {
        CircleSymbol { order: m, components: vec![DirPair::even(a.into())] }
    }

    /// `a(x) (i xi)^d`.
    pub fn xi_power(d: u32, a: TrigPoly) -> Self {
        let i = QComplex::imag_unit();
        let plus = crate::scalar::powi(&i, d);
        let minus = crate::scalar::powi(&i.neg(), d);
        CircleSymbol {
            order: Rational64::from_integer(d as i64),
            components: vec![DirPair::new(a.scale(&plus).into(), a.scale(&minus).into())],
        }
    }

    pub fn order(&self) -> Rational64 {
        self.order
    }

    pub fn depth(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[DirPair<TrigRational>] {
        &self.components
    }

    /// Component `j` (degree `order - j`); zero beyond the stored depth.
    pub fn component(&self, j: usize) -> DirPair<TrigRational> {
        self.components.get(j).cloned().unwrap_or_else(DirPair::zero)
    }

    pub fn degree(&self, j: usize) -> Rational64 {
        self.order - Rational64::from_integer(j as i64)
    }

    pub fn set_component(&mut self, j: usize, value: DirPair<TrigRational>) {
        if self.components.len() <= j {
            self.components.resize(j + 1, DirPair::zero());
        }
        self.components[j] = value;
    }

    pub fn truncated(&self, depth: usize) -> Self {
        let mut out = self.clone();
        out.components.truncate(depth);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// Index of the first nonzero component.
    pub fn leading_index(&self) -> Option<usize> {
        self.components.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self, CircleError> {
        if self.order != other.order {
            return Err(CircleError::InvalidSymbol(format!(
                "orders {} and {} differ",
                self.order, other.order
            )));
        }
        let n = self.depth().max(other.depth());
        Ok(CircleSymbol { order: self.order, components: (0..n).map(|j| self.component(j).add(&other.component(j))).collect() })
    }

    pub fn neg(&self) -> Self {
        CircleSymbol { order: self.order, components: self.components.iter().map(|c| c.neg()).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self, CircleError> {
        self.add(&other.neg())
    }

    /// Whether component `j` is the polynomial `a(x) xi^d` (nonnegative integer
    /// degree `d` with `a_- = (-1)^d a_+`); such components need no excision.
    pub fn is_polynomial_component(&self, j: usize) -> bool {
        let d = self.degree(j);
        if !d.is_integer() || d < Rational64::zero() {
            return false;
        }
        let c = self.component(j);
        let sign = if d.to_integer() % 2 == 0 { QComplex::one() } else { QComplex::one().neg() };
        c.minus == c.plus.scale(&sign)
    }

    /// Value of the excised, truncated symbol at `(x, xi)`.
    pub fn eval(&self, x: f64, xi: f64, excision: &crate::symbol::ExcisionCutoff) -> Complex64 {
        let r = xi.abs();
        let dir = Dir::of(xi);
        (0..self.depth())
            .map(|j| {
                let d = crate::scalar::ratio_f64(self.degree(j));
                let chi = if self.is_polynomial_component(j) { 1.0 } else { excision.eval(r) };
                if chi == 0.0 || (r == 0.0 && d <= 0.0) {
                    return Complex64::new(0.0, 0.0);
                }
                chi * r.powf(d) * self.components[j].get(dir).eval(x)
            })
            .sum()
    }
}

/// `d^k/dxi^k` of `a_dir |xi|^d` is `d (d-1) ... (d-k+1) (dir sign)^k a_dir |xi|^{d-k}`.
fn xi_derivative(c: &DirPair<TrigRational>, d: Rational64, k: u32) -> DirPair<TrigRational> {
    let f = falling(d, k);
    if f.is_zero() {
        return DirPair::zero();
    }
    let plus = QComplex::from_ratio(f);
    let minus = if k % 2 == 0 { plus.clone() } else { plus.neg() };
    c.scale_dirs(&plus, &minus)
}

fn factorial(k: u32) -> Rational64 {
    (1..=k as i64).fold(Rational64::from_integer(1), |acc, i| acc * i)
}

/// Lazily extended table of `D_x^k` of each component.
struct DxTable {
    table: Vec<Vec<DirPair<TrigRational>>>,
}

impl DxTable {
    fn new(symbol: &CircleSymbol) -> Self {
        DxTable { table: (0..symbol.depth()).map(|j| vec![symbol.component(j)]).collect() }
    }

    fn get(&mut self, j: usize, k: usize) -> DirPair<TrigRational> {
        if j >= self.table.len() {
            return DirPair::zero();
        }
        let row = &mut self.table[j];
        while row.len() <= k {
            let last = row.last().expect("row starts with the component");
            let next = DirPair::new(last.plus.dx(), last.minus.dx());
            row.push(next);
        }
        row[k].clone()
    }
}

/// Sum over `a + b + k = n` of `(1/k!) d_xi^k p_a D_x^k q_b`, optionally skipping `b = n`.
fn composition_component(
    p: &CircleSymbol,
    q_dx: &mut DxTable,
    n: usize,
    skip_top: bool,
) -> DirPair<TrigRational> {
    let mut total = DirPair::zero();
    for a in 0..=n.min(p.depth().saturating_sub(1)) {
        let pa = p.component(a);
        if pa.is_zero() {
            continue;
        }
        for k in 0..=(n - a) {
            let b = n - a - k;
            if skip_top && b == n {
                continue;
            }
            let dp = xi_derivative(&pa, p.degree(a), k as u32);
            if dp.is_zero() {
                continue;
            }
            let dq = q_dx.get(b, k);
            if dq.is_zero() {
                continue;
            }
            let w = QComplex::from_ratio(factorial(k as u32).recip());
            total = total.add(&dp.mul(&dq).scale(&w));
        }
    }
    total
}

/// Components `0..depth` of the symbol of `P Q`.
pub fn compose_symbols(p: &CircleSymbol, q: &CircleSymbol, depth: usize) -> Result<CircleSymbol, CircleError> {
    if depth > MAX_DEPTH {
        return Err(CircleError::DepthOverflow { requested: depth, available: MAX_DEPTH });
    }
    let mut table = DxTable::new(q);
    let components = (0..depth).map(|n| composition_component(p, &mut table, n, false)).collect();
    Ok(CircleSymbol { order: p.order + q.order, components })
}

/// Result of [`is_elliptic`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ellipticity {
    pub elliptic: bool,
    /// `min_{x, dir} |p_m(x, dir)|`.
    pub margin: f64,
    pub x: f64,
    pub dir: Dir,
}

const ELLIPTIC_SAMPLES: usize = 4096;

/// Samples the principal symbol on a uniform grid and refines the smallest
/// values by golden-section search.
pub fn is_elliptic(p: &CircleSymbol) -> Ellipticity {
    let principal = p.component(0);
    let h = std::f64::consts::TAU / ELLIPTIC_SAMPLES as f64;
    let mut best = Ellipticity { elliptic: false, margin: f64::INFINITY, x: 0.0, dir: Dir::Plus };
    for dir in Dir::BOTH {
        let f = principal.get(dir);
        let g = |x: f64| f.eval(x).norm();
        let vals: Vec<f64> = (0..ELLIPTIC_SAMPLES).map(|i| g(i as f64 * h)).collect();
        for i in 0..ELLIPTIC_SAMPLES {
            let prev = vals[(i + ELLIPTIC_SAMPLES - 1) % ELLIPTIC_SAMPLES];
            let next = vals[(i + 1) % ELLIPTIC_SAMPLES];
            if vals[i] > prev || vals[i] > next {
                continue;
            }
            let (x, v) = golden_min(&g, (i as f64 - 1.0) * h, (i as f64 + 1.0) * h, vals[i], i as f64 * h);
            if v < best.margin {
                best = Ellipticity { elliptic: false, margin: v, x: x.rem_euclid(std::f64::consts::TAU), dir };
            }
        }
    }
    best.elliptic = best.margin > 1e-12;
    best
}

fn golden_min(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, v0: f64, x0: f64) -> (f64, f64) {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..80 {
        if gc < gd {
            b = d;
            d = c;
            gd = gc;
            c = b - r * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + r * (b - a);
            gd = g(d);
        }
    }
    let (x, v) = if gc < gd { (c, gc) } else { (d, gd) };
    if v < v0 {
        (x, v)
    } else {
        (x0, v0)
    }
}

fn principal_inverse(p: &CircleSymbol) -> Result<DirPair<TrigRational>, CircleError> {
    let e = is_elliptic(p);
    if !e.elliptic {
        return Err(CircleError::NotElliptic { x: e.x, margin: e.margin });
    }
    let c = p.component(0);
    let inv = |r: &TrigRational| r.inv().ok_or_else(|| CircleError::InvalidSymbol("principal symbol vanishes identically".into()));
    Ok(DirPair::new(inv(&c.plus)?, inv(&c.minus)?))
}

/// Right parametrix by the direct recursion
/// `q_j = -p_m^{-1} sum_{a+b+k=j, b<j} (1/k!) d_xi^k p_a D_x^k q_b`.
pub fn parametrix_direct(p: &CircleSymbol, depth: usize) -> Result<CircleSymbol, CircleError> {
    if depth > MAX_DEPTH {
        return Err(CircleError::DepthOverflow { requested: depth, available: MAX_DEPTH });
    }
    let inv = principal_inverse(p)?;
    let mut q = CircleSymbol { order: -p.order, components: Vec::with_capacity(depth) };
    for j in 0..depth {
        let qj = if j == 0 {
            inv.clone()
        } else {
            let mut table = DxTable::new(&q);
            composition_component(p, &mut table, j, true).mul(&inv).neg()
        };
        q.components.push(qj);
    }
    Ok(q)
}

/// `sup_x |a(x)|` over both directions on a uniform grid of `points` samples.
pub fn sup_norm(c: &DirPair<TrigRational>, points: usize) -> f64 {
    if c.is_zero() {
        return 0.0;
    }
    let h = std::f64::consts::TAU / points as f64;
    Dir::BOTH
        .iter()
        .flat_map(|&dir| (0..points).map(move |i| c.get(dir).eval(i as f64 * h).norm()))
        .fold(0.0, f64::max)
}
