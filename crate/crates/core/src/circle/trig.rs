//! Exact trigonometric polynomials and rational functions on the circle.
//!
//! A [`TrigPoly`] is a Laurent polynomial in `z = e^{ix}` with exact complex
//! rational coefficients. A [`TrigRational`] is a quotient whose denominator is
//! kept as a product of normalized factors (lowest power `z^0`, leading
//! coefficient 1), so sums only multiply in the factors they do not share.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::scalar::{qc_ratio, QComplex, Ring, Scalar};

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct TrigPoly {
    coeffs: BTreeMap<i64, QComplex>,
}

impl fmt::Debug for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl TrigPoly {
    pub fn from_coeffs(coeffs: impl IntoIterator<Item = (i64, QComplex)>) -> Self {
        let mut out = TrigPoly::default();
        for (n, c) in coeffs {
            out.add_term(n, &c);
        }
        out
    }

    pub fn constant(c: QComplex) -> Self {
        Self::from_coeffs([(0, c)])
    }

    pub fn monomial(n: i64, c: QComplex) -> Self {
        Self::from_coeffs([(n, c)])
    }

    /// `sin x = (z - z^{-1}) / (2i)`.
    pub fn sin() -> Self {
        let h = num_rational::Rational64::new(1, 2);
        let zero = num_rational::Rational64::from_integer(0);
        Self::from_coeffs([(1, qc_ratio(zero, -h)), (-1, qc_ratio(zero, h))])
    }

    /// `cos x = (z + z^{-1}) / 2`.
    pub fn cos() -> Self {
        let h = QComplex::from_ratio(num_rational::Rational64::new(1, 2));
        Self::from_coeffs([(1, h.clone()), (-1, h)])
    }

    fn add_term(&mut self, n: i64, c: &QComplex) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(n).or_insert_with(QComplex::zero);
        *entry = Ring::add(entry, c);
        if entry.is_zero() {
            self.coeffs.remove(&n);
        }
    }

    pub fn coeffs(&self) -> &BTreeMap<i64, QComplex> {
        &self.coeffs
    }

    pub fn coefficient(&self, n: i64) -> QComplex {
        self.coeffs.get(&n).cloned().unwrap_or_else(QComplex::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_monomial(&self) -> bool {
        self.coeffs.len() == 1
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (n, c) in &other.coeffs {
            out.add_term(*n, c);
        }
        out
    }

    pub fn neg(&self) -> Self {
        TrigPoly { coeffs: self.coeffs.iter().map(|(n, c)| (*n, Ring::neg(c))).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = TrigPoly::default();
        for (n, a) in &self.coeffs {
            for (k, b) in &other.coeffs {
                out.add_term(n + k, &Ring::mul(a, b));
            }
        }
        out
    }

    pub fn scale(&self, c: &QComplex) -> Self {
        if c.is_zero() {
            return TrigPoly::default();
        }
        TrigPoly { coeffs: self.coeffs.iter().map(|(n, a)| (*n, Ring::mul(a, c))).collect() }
    }

    pub fn shift(&self, k: i64) -> Self {
        TrigPoly { coeffs: self.coeffs.iter().map(|(n, a)| (n + k, a.clone())).collect() }
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(TrigPoly::constant(QComplex::one()), |acc, _| acc.mul(self))
    }

    /// `D_x = -i d/dx`: multiplies the coefficient of `z^n` by `n`.
    pub fn dx(&self) -> Self {
        let mut out = TrigPoly::default();
        for (n, c) in &self.coeffs {
            out.add_term(*n, &Ring::mul(c, &QComplex::from_i64(*n)));
        }
        out
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        self.coeffs.iter().map(|(n, c)| c.to_c64() * Complex64::from_polar(1.0, *n as f64 * x)).sum()
    }

    fn lowest(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    fn highest(&self) -> Option<(i64, &QComplex)> {
        self.coeffs.iter().next_back().map(|(n, c)| (*n, c))
    }

    /// `self = unit * z^shift * factor` with `factor` normalized; `None` for zero.
    fn normalize(&self) -> Option<(QComplex, i64, TrigPoly)> {
        let low = self.lowest()?;
        let (_, lead) = self.highest()?;
        let unit = lead.clone();
        let inv = Scalar::inv(&unit)?;
        Some((unit, low, self.shift(-low).scale(&inv)))
    }

    /// Exact quotient by a normalized factor, if it divides.
    fn div_exact(&self, factor: &TrigPoly) -> Option<TrigPoly> {
        let (fdeg, flead) = factor.highest()?;
        if self.is_zero() {
            return Some(TrigPoly::default());
        }
        let mut rem = self.clone();
        let mut quot = TrigPoly::default();
        let low = rem.lowest().unwrap_or(0);
        while let Some((rdeg, rlead)) = rem.highest() {
            if rdeg - fdeg < low {
                return None;
            }
            let c = Ring::mul(rlead, &Scalar::inv(flead)?);
            let term = TrigPoly::monomial(rdeg - fdeg, c);
            rem = rem.sub(&factor.mul(&term));
            quot = quot.add(&term);
        }
        Some(quot)
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.coeffs
            .iter()
            .map(|(n, c)| match n {
                0 => format!("({})", c.render()),
                _ => format!("({}) e^({}ix)", c.render(), n),
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// `num / prod_i den_i^{k_i}` with normalized, distinct factors `den_i`.
#[derive(Clone)]
pub struct TrigRational {
    num: TrigPoly,
    den: Vec<(Arc<TrigPoly>, u32)>,
}

impl fmt::Debug for TrigRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl PartialEq for TrigRational {
    fn eq(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }
}

impl From<TrigPoly> for TrigRational {
    fn from(num: TrigPoly) -> Self {
        TrigRational { num, den: Vec::new() }
    }
}

impl TrigRational {
    pub fn constant(c: QComplex) -> Self {
        TrigPoly::constant(c).into()
    }

    pub fn numerator(&self) -> &TrigPoly {
        &self.num
    }

    pub fn denominator(&self) -> TrigPoly {
        self.den.iter().fold(TrigPoly::constant(QComplex::one()), |acc, (f, k)| acc.mul(&f.pow(*k)))
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_empty()
    }

    fn power_of(&self, factor: &TrigPoly) -> u32 {
        self.den.iter().find(|(f, _)| f.as_ref() == factor).map(|(_, k)| *k).unwrap_or(0)
    }

    fn merged_den(&self, other: &Self, combine: impl Fn(u32, u32) -> u32) -> Vec<(Arc<TrigPoly>, u32)> {
        let mut out = self.den.clone();
        for (f, k) in &other.den {
            match out.iter_mut().find(|(g, _)| g == f) {
                Some(entry) => entry.1 = combine(entry.1, *k),
                None => out.push((f.clone(), combine(0, *k))),
            }
        }
        out
    }

    /// Numerator rewritten over a larger denominator.
    fn lift(&self, den: &[(Arc<TrigPoly>, u32)]) -> TrigPoly {
        den.iter().fold(self.num.clone(), |acc, (f, k)| acc.mul(&f.pow(k - self.power_of(f))))
    }

    /// Cancels denominator factors that divide the numerator.
    fn reduced(mut self) -> Self {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        for entry in &mut self.den {
            while entry.1 > 0 {
                match self.num.div_exact(&entry.0) {
                    Some(q) => {
                        self.num = q;
                        entry.1 -= 1;
                    }
                    None => break,
                }
            }
        }
        self.den.retain(|(_, k)| *k > 0);
        self
    }

    pub fn inv(&self) -> Option<Self> {
        let (unit, shift, factor) = self.num.normalize()?;
        let scale = Scalar::inv(&unit)?;
        let num = self.denominator().shift(-shift).scale(&scale);
        let den = if factor.is_monomial() { Vec::new() } else { vec![(Arc::new(factor), 1)] };
        Some(TrigRational { num, den }.reduced())
    }

    pub fn div(&self, other: &Self) -> Option<Self> {
        Some(Ring::mul(self, &other.inv()?))
    }

    /// `D_x = -i d/dx` by the quotient rule.
    pub fn dx(&self) -> Self {
        if self.den.is_empty() {
            return self.num.dx().into();
        }
        let prod: TrigPoly = self.den.iter().fold(TrigPoly::constant(QComplex::one()), |acc, (f, _)| acc.mul(f));
        let mut num = self.num.dx().mul(&prod);
        for (i, (f, k)) in self.den.iter().enumerate() {
            let others = self
                .den
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != i)
                .fold(TrigPoly::constant(QComplex::from_i64(*k as i64)), |acc, (_, (g, _))| acc.mul(g));
            num = num.sub(&self.num.mul(&f.dx()).mul(&others));
        }
        let den = self.den.iter().map(|(f, k)| (f.clone(), k + 1)).collect();
        TrigRational { num, den }.reduced()
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        let d: Complex64 = self.den.iter().map(|(f, k)| f.eval(x).powi(*k as i32)).product();
        self.num.eval(x) / d
    }

    pub fn render(&self) -> String {
        if self.den.is_empty() {
            return self.num.render();
        }
        let den = self.den.iter().map(|(f, k)| format!("[{}]^{}", f.render(), k)).collect::<Vec<_>>().join(" ");
        format!("[{}] / {}", self.num.render(), den)
    }
}

impl Ring for TrigRational {
    type Scalar = QComplex;

    fn zero() -> Self {
        TrigPoly::default().into()
    }
    fn one() -> Self {
        TrigRational::constant(QComplex::one())
    }
    fn add(&self, other: &Self) -> Self {
        if other.num.is_zero() {
            return self.clone();
        }
        if self.num.is_zero() {
            return other.clone();
        }
        let den = self.merged_den(other, u32::max);
        let num = self.lift(&den).add(&other.lift(&den));
        TrigRational { num, den }.reduced()
    }
    fn neg(&self) -> Self {
        TrigRational { num: self.num.neg(), den: self.den.clone() }
    }
    fn mul(&self, other: &Self) -> Self {
        if self.num.is_zero() || other.num.is_zero() {
            return Self::zero();
        }
        let den = self.merged_den(other, |a, b| a + b);
        TrigRational { num: self.num.mul(&other.num), den }.reduced()
    }
    fn scale(&self, factor: &QComplex) -> Self {
        TrigRational { num: self.num.scale(factor), den: self.den.clone() }.reduced()
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn c(n: i64) -> QComplex {
        QComplex::from_i64(n)
    }

    fn two_plus_sin() -> TrigPoly {
        TrigPoly::constant(c(2)).add(&TrigPoly::sin())
    }

    #[test]
    fn sin_cos_values() {
        let x = 0.7f64;
        assert!((TrigPoly::sin().eval(x).re - x.sin()).abs() < 1e-15);
        assert!((TrigPoly::cos().eval(x).re - x.cos()).abs() < 1e-15);
        // sin^2 + cos^2 = 1 exactly
        let one = TrigPoly::sin().pow(2).add(&TrigPoly::cos().pow(2));
        assert_eq!(one, TrigPoly::constant(c(1)));
    }

    #[test]
    fn dx_of_sin_is_minus_i_cos() {
        let d = TrigPoly::sin().dx();
        assert_eq!(d, TrigPoly::cos().scale(&QComplex::imag_unit().neg()));
    }

    #[test]
    fn inverse_and_quotient_rule() {
        let p: TrigRational = two_plus_sin().into();
        let q = p.inv().unwrap();
        assert_eq!(Ring::mul(&p, &q), TrigRational::one());
        // D_x (1/p) = -(D_x p) / p^2
        let lhs = q.dx();
        let rhs = Ring::mul(&TrigRational::from(two_plus_sin().dx()), &Ring::mul(&q, &q)).neg();
        assert_eq!(lhs, rhs);
        let x = 1.3f64;
        let expect = -Complex64::new(0.0, -1.0) * x.cos() / (2.0 + x.sin()).powi(2);
        assert!((lhs.eval(x) - expect).norm() < 1e-14);
    }

    #[test]
    fn sums_cancel_common_factors() {
        let q = TrigRational::from(two_plus_sin()).inv().unwrap();
        let s = Ring::mul(&q, &TrigRational::from(TrigPoly::sin()));
        // sin/(2+sin) + 2/(2+sin) = 1
        let total = Ring::add(&s, &q.scale(&c(2)));
        assert!(total.is_polynomial());
        assert_eq!(total, TrigRational::one());
    }

    #[test]
    fn monomial_inverse_stays_polynomial() {
        let p = TrigRational::from(TrigPoly::monomial(3, qc_ratio(Rational64::new(1, 2), Rational64::from_integer(0))));
        let inv = p.inv().unwrap();
        assert!(inv.is_polynomial());
        assert_eq!(inv.numerator(), &TrigPoly::monomial(-3, c(2)));
        assert!(TrigRational::zero().inv().is_none());
    }
}
