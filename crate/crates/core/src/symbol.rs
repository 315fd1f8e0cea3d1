//! Graded (polyhomogeneous) expansions.
//!
//! An expansion stores homogeneous terms of degrees `anchor - j * step`,
//! `j = 0, 1, ...`, each with one coefficient per direction of the one-dimensional
//! variable (`+` for positive, `-` for negative arguments). The stored depth is
//! the number of known terms; everything below the last stored degree is unknown,
//! so sums are truncated to the common known range.

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::SymbolError;
use crate::scalar::{parse_ratio, render_ratio, Ring, Scalar};

/// Coefficients of a homogeneous term on the two directions.
#[derive(Clone, Debug, PartialEq)]
pub struct DirPair<R> {
    pub plus: R,
    pub minus: R,
}

impl<R: Ring> DirPair<R> {
    pub fn new(plus: R, minus: R) -> Self {
        DirPair { plus, minus }
    }

    pub fn even(value: R) -> Self {
        DirPair { plus: value.clone(), minus: value }
    }

    pub fn zero() -> Self {
        Self::even(R::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.plus.is_zero() && self.minus.is_zero()
    }

    pub fn add(&self, other: &Self) -> Self {
        DirPair { plus: self.plus.add(&other.plus), minus: self.minus.add(&other.minus) }
    }

    pub fn neg(&self) -> Self {
        DirPair { plus: self.plus.neg(), minus: self.minus.neg() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        DirPair { plus: self.plus.mul(&other.plus), minus: self.minus.mul(&other.minus) }
    }

    pub fn scale(&self, factor: &R::Scalar) -> Self {
        DirPair { plus: self.plus.scale(factor), minus: self.minus.scale(factor) }
    }

    /// Multiplies the `+` and `-` coefficients by separate scalars.
    pub fn scale_dirs(&self, plus: &R::Scalar, minus: &R::Scalar) -> Self {
        DirPair { plus: self.plus.scale(plus), minus: self.minus.scale(minus) }
    }

    pub fn swap(&self) -> Self {
        DirPair { plus: self.minus.clone(), minus: self.plus.clone() }
    }

    pub fn map<T>(&self, f: impl Fn(&R) -> T) -> DirPair<T> {
        DirPair { plus: f(&self.plus), minus: f(&self.minus) }
    }

    pub fn get(&self, dir: Dir) -> &R {
        match dir {
            Dir::Plus => &self.plus,
            Dir::Minus => &self.minus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    Plus,
    Minus,
}

impl Dir {
    pub const BOTH: [Dir; 2] = [Dir::Plus, Dir::Minus];

    pub fn sign(self) -> i64 {
        match self {
            Dir::Plus => 1,
            Dir::Minus => -1,
        }
    }

    pub fn of(value: f64) -> Dir {
        if value >= 0.0 {
            Dir::Plus
        } else {
            Dir::Minus
        }
    }
}

/// Truncated classical expansion with degrees `anchor - j * step`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyhomExpansion<R: Ring> {
    anchor: R::Scalar,
    step: Rational64,
    terms: Vec<DirPair<R>>,
}

impl<R: Ring> PolyhomExpansion<R> {
    pub fn new(anchor: R::Scalar, step: Rational64, terms: Vec<DirPair<R>>) -> Result<Self, SymbolError> {
        if step <= Rational64::from_integer(0) {
            return Err(SymbolError::NonPositiveStep);
        }
        Ok(PolyhomExpansion { anchor, step, terms })
    }

    pub fn zero(anchor: R::Scalar, step: Rational64, depth: usize) -> Self {
        PolyhomExpansion { anchor, step, terms: vec![DirPair::zero(); depth] }
    }

    /// `coeff * |s|^degree` known through `depth` terms.
    pub fn monomial(degree: R::Scalar, step: Rational64, coeff: DirPair<R>, depth: usize) -> Self {
        let mut terms = vec![DirPair::zero(); depth.max(1)];
        terms[0] = coeff;
        PolyhomExpansion { anchor: degree, step, terms }
    }

    pub fn anchor(&self) -> &R::Scalar {
        &self.anchor
    }

    pub fn step(&self) -> Rational64 {
        self.step
    }

    pub fn depth(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[DirPair<R>] {
        &self.terms
    }

    pub fn term(&self, j: usize) -> Option<&DirPair<R>> {
        self.terms.get(j)
    }

    pub fn degree(&self, j: usize) -> R::Scalar {
        let shift = R::Scalar::from_ratio(self.step * Rational64::from_integer(j as i64));
        self.anchor.sub(&shift)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(DirPair::is_zero)
    }

    pub fn set_term(&mut self, j: usize, coeff: DirPair<R>) {
        if j >= self.terms.len() {
            self.terms.resize(j + 1, DirPair::zero());
        }
        self.terms[j] = coeff;
    }

    pub fn truncated(&self, depth: usize) -> Self {
        let mut out = self.clone();
        out.terms.truncate(depth);
        out
    }

    /// Extends a finite (exact) expansion with zero terms up to `depth`.
    pub fn padded(&self, depth: usize) -> Self {
        let mut out = self.clone();
        if out.terms.len() < depth {
            out.terms.resize(depth, DirPair::zero());
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.map_terms(|t| t.neg())
    }

    pub fn scale(&self, factor: &R::Scalar) -> Self {
        self.map_terms(|t| t.scale(factor))
    }

    pub fn map_terms(&self, f: impl Fn(&DirPair<R>) -> DirPair<R>) -> Self {
        PolyhomExpansion { anchor: self.anchor.clone(), step: self.step, terms: self.terms.iter().map(f).collect() }
    }

    /// Same terms with a new anchor (used when grading is tracked externally).
    pub fn with_anchor(&self, anchor: R::Scalar) -> Self {
        PolyhomExpansion { anchor, step: self.step, terms: self.terms.clone() }
    }

    /// Index offset `k` with `other.anchor = self.anchor - k * step`.
    pub fn offset_to(&self, other: &Self) -> Result<i64, SymbolError> {
        if self.step != other.step {
            return Err(SymbolError::Incommensurable(format!(
                "steps {} and {} differ",
                render_ratio(self.step),
                render_ratio(other.step)
            )));
        }
        self.anchor.sub(&other.anchor).integer_steps(self.step).ok_or_else(|| {
            SymbolError::Incommensurable(format!(
                "anchors {} and {} are not an integer number of steps apart",
                self.anchor.render(),
                other.anchor.render()
            ))
        })
    }
}

/// Termwise sum aligned by degree, truncated to the common known range.
pub fn phg_add<R: Ring>(a: &PolyhomExpansion<R>, b: &PolyhomExpansion<R>) -> Result<PolyhomExpansion<R>, SymbolError> {
    let offset = a.offset_to(b)?;
    let (hi, lo, k) = if offset >= 0 { (a, b, offset as usize) } else { (b, a, (-offset) as usize) };
    // hi is known through index hi.len - 1, lo through k + lo.len - 1 in hi's indexing
    let depth = hi.terms.len().min(k + lo.terms.len());
    let terms = (0..depth)
        .map(|j| {
            let t = hi.terms[j].clone();
            if j >= k {
                t.add(&lo.terms[j - k])
            } else {
                t
            }
        })
        .collect();
    Ok(PolyhomExpansion { anchor: hi.anchor.clone(), step: hi.step, terms })
}

pub fn phg_sub<R: Ring>(a: &PolyhomExpansion<R>, b: &PolyhomExpansion<R>) -> Result<PolyhomExpansion<R>, SymbolError> {
    phg_add(a, &b.neg())
}

/// Cauchy product by degree; the result depth is at most the smaller input depth.
pub fn phg_mul<R: Ring>(
    a: &PolyhomExpansion<R>,
    b: &PolyhomExpansion<R>,
    depth: usize,
) -> Result<PolyhomExpansion<R>, SymbolError> {
    if a.step != b.step {
        return Err(SymbolError::Incommensurable(format!(
            "steps {} and {} differ",
            render_ratio(a.step),
            render_ratio(b.step)
        )));
    }
    let depth = depth.min(a.terms.len()).min(b.terms.len());
    let terms = (0..depth)
        .map(|k| {
            (0..=k).fold(DirPair::zero(), |acc: DirPair<R>, i| {
                let (x, y) = (&a.terms[i], &b.terms[k - i]);
                if x.is_zero() || y.is_zero() {
                    acc
                } else {
                    acc.add(&x.mul(y))
                }
            })
        })
        .collect();
    Ok(PolyhomExpansion { anchor: a.anchor.add(&b.anchor), step: a.step, terms })
}

/// Swaps the direction coefficients (realizes `s -> -s` on homogeneous terms).
pub fn dir_reflect<R: Ring>(a: &PolyhomExpansion<R>) -> PolyhomExpansion<R> {
    a.map_terms(DirPair::swap)
}

/// Smooth excision function: 0 on `[0, scale]`, 1 on `[2 scale, inf)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcisionCutoff {
    pub scale: f64,
}

impl Default for ExcisionCutoff {
    fn default() -> Self {
        ExcisionCutoff { scale: 1.0 }
    }
}

impl ExcisionCutoff {
    pub fn new(scale: f64) -> Self {
        assert!(scale >= 1.0 && scale.is_finite(), "excision scale must be >= 1");
        ExcisionCutoff { scale }
    }

    /// The fixed profile `f(x-1) / (f(x-1) + f(2-x))` with `f(y) = exp(-1/y)`.
    pub fn profile(x: f64) -> f64 {
        fn f(y: f64) -> f64 {
            if y <= 0.0 {
                0.0
            } else {
                (-1.0 / y).exp()
            }
        }
        if x <= 1.0 {
            return 0.0;
        }
        if x >= 2.0 {
            return 1.0;
        }
        let a = f(x - 1.0);
        a / (a + f(2.0 - x))
    }

    pub fn eval(&self, point: f64) -> f64 {
        Self::profile(point.abs() / self.scale)
    }
}

/// `point^degree` for a complex degree and positive point.
pub fn real_pow(point: f64, degree: Complex64) -> Complex64 {
    (degree * point.ln()).exp()
}

impl<S: Scalar> PolyhomExpansion<S> {
    /// `profile(|point| / scale) * sum_{j < depth} coeff_j(dir) |point|^{deg_j}`.
    pub fn realize(&self, cutoff: &ExcisionCutoff, point: f64, depth: usize) -> Result<Complex64, SymbolError> {
        if !(point > 0.0) {
            return Err(SymbolError::NonPositivePoint(point));
        }
        self.realize_dir(Dir::Plus, cutoff, point, depth)
    }

    /// Realization on one direction at `|s| = radius`.
    pub fn realize_dir(&self, dir: Dir, cutoff: &ExcisionCutoff, radius: f64, depth: usize) -> Result<Complex64, SymbolError> {
        if !(radius > 0.0) {
            return Err(SymbolError::NonPositivePoint(radius));
        }
        if depth > self.terms.len() {
            return Err(SymbolError::DepthExceeded { requested: depth, available: self.terms.len() });
        }
        let chi = cutoff.eval(radius);
        if chi == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(chi * self.sum_terms(dir, radius, depth))
    }

    /// Uncut truncated sum.
    pub fn sum_terms(&self, dir: Dir, radius: f64, depth: usize) -> Complex64 {
        let anchor = self.anchor.to_c64();
        let step = crate::scalar::ratio_f64(self.step);
        let lr = radius.ln();
        self.terms
            .iter()
            .take(depth)
            .enumerate()
            .filter(|(_, t)| !t.get(dir).is_zero())
            .map(|(j, t)| t.get(dir).to_c64() * ((anchor - step * j as f64) * lr).exp())
            .sum()
    }

    pub fn to_record(&self) -> ExpansionRecord {
        ExpansionRecord {
            anchor: self.anchor.render(),
            step: render_ratio(self.step),
            terms: self
                .terms
                .iter()
                .enumerate()
                .map(|(j, t)| TermRecord { degree: self.degree(j).render(), plus: t.plus.render(), minus: t.minus.render() })
                .collect(),
        }
    }

    pub fn from_record(record: &ExpansionRecord) -> Result<Self, SymbolError> {
        let anchor = S::parse(&record.anchor)?;
        let step = parse_ratio(&record.step)?;
        let mut out = PolyhomExpansion::new(anchor, step, Vec::new())?;
        for (j, term) in record.terms.iter().enumerate() {
            let degree = S::parse(&term.degree)?;
            let expected = out.degree(j);
            let consistent = if S::EXACT { degree == expected } else { degree.sub(&expected).near_zero(1e-12) };
            if !consistent {
                return Err(SymbolError::Incommensurable(format!(
                    "term {j} has degree {} but the grading requires {}",
                    term.degree,
                    expected.render()
                )));
            }
            out.terms.push(DirPair { plus: S::parse(&term.plus)?, minus: S::parse(&term.minus)? });
        }
        Ok(out)
    }

    pub fn to_float(&self) -> PolyhomExpansion<Complex64> {
        PolyhomExpansion {
            anchor: self.anchor.to_c64(),
            step: self.step,
            terms: self.terms.iter().map(|t| t.map(|c| c.to_c64())).collect(),
        }
    }
}

/// Structured text form of a scalar expansion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionRecord {
    pub anchor: String,
    pub step: String,
    pub terms: Vec<TermRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub degree: String,
    pub plus: String,
    pub minus: String,
}
