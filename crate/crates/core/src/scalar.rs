//! Coefficient rings for graded expansions.
//!
//! Two scalar fields are supported: exact complex rationals ([`QComplex`]) and
//! double-precision complex numbers ([`Complex64`]). Both implement [`Scalar`],
//! so the expansion arithmetic and the recursions built on top of it run
//! unchanged in either representation. [`Scalar::EXACT`] is the representation
//! flag; identities are compared with `==` when it is set and with a tolerance
//! otherwise.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{One as _, Signed as _, ToPrimitive, Zero as _};

use crate::error::ParseError;

/// Exact complex rational number.
pub type QComplex = Complex<BigRational>;

/// A commutative ring of expansion coefficients over a scalar field.
pub trait Ring: Clone + Debug + PartialEq + Send + Sync {
    type Scalar: Scalar;

    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn scale(&self, factor: &Self::Scalar) -> Self;
    fn is_zero(&self) -> bool;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
}

/// A scalar field: exact or floating complex numbers.
pub trait Scalar: Ring<Scalar = Self> {
    /// `true` for exact arithmetic.
    const EXACT: bool;

    fn from_ratio(r: Rational64) -> Self;
    fn from_big(r: &BigRational) -> Self;
    fn from_c64(z: Complex64) -> Self;
    fn imag_unit() -> Self;
    fn inv(&self) -> Option<Self>;
    fn to_c64(&self) -> Complex64;
    fn parse(text: &str) -> Result<Self, ParseError>;
    fn render(&self) -> String;

    /// Returns `k` when `self = k * step` for an integer `k`.
    fn integer_steps(&self, step: Rational64) -> Option<i64>;

    fn from_i64(n: i64) -> Self {
        Self::from_ratio(Rational64::from_integer(n))
    }

    fn div(&self, other: &Self) -> Option<Self> {
        other.inv().map(|inv| self.mul(&inv))
    }

    /// Exact zero test for exact fields, `|z| <= tol` otherwise.
    fn near_zero(&self, tol: f64) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.to_c64().norm() <= tol
        }
    }

    /// Real part, when the value is real.
    fn real_value(&self) -> Option<f64> {
        let z = self.to_c64();
        if Self::EXACT {
            (z.im == 0.0 && self.mul(&Self::imag_unit()).to_c64().re == 0.0).then_some(z.re)
        } else {
            Some(z.re)
        }
    }
}

pub fn big(r: Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn qc(re: BigRational, im: BigRational) -> QComplex {
    Complex::new(re, im)
}

/// Exact complex number from small integer fractions.
pub fn qc_ratio(re: Rational64, im: Rational64) -> QComplex {
    Complex::new(big(re), big(im))
}

fn big_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator overflow f64 individually; scale down first
        let n = r.numer().bits() as i64;
        let d = r.denom().bits() as i64;
        let shift = (n.max(d) - 1000).max(0) as usize;
        let num = (r.numer() >> shift).to_f64().unwrap_or(0.0);
        let den = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
        num / den
    })
}

impl Ring for QComplex {
    type Scalar = QComplex;

    fn zero() -> Self {
        Complex::new(BigRational::zero(), BigRational::zero())
    }
    fn one() -> Self {
        Complex::new(BigRational::one(), BigRational::zero())
    }
    fn add(&self, other: &Self) -> Self {
        Complex::new(&self.re + &other.re, &self.im + &other.im)
    }
    fn neg(&self) -> Self {
        Complex::new(-&self.re, -&self.im)
    }
    fn mul(&self, other: &Self) -> Self {
        Complex::new(
            &self.re * &other.re - &self.im * &other.im,
            &self.re * &other.im + &self.im * &other.re,
        )
    }
    fn scale(&self, factor: &Self) -> Self {
        Ring::mul(self, factor)
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

impl Scalar for QComplex {
    const EXACT: bool = true;

    fn from_ratio(r: Rational64) -> Self {
        Complex::new(big(r), BigRational::zero())
    }
    fn from_big(r: &BigRational) -> Self {
        Complex::new(r.clone(), BigRational::zero())
    }
    fn from_c64(z: Complex64) -> Self {
        let re = BigRational::from_float(z.re).unwrap_or_else(BigRational::zero);
        let im = BigRational::from_float(z.im).unwrap_or_else(BigRational::zero);
        Complex::new(re, im)
    }
    fn imag_unit() -> Self {
        Complex::new(BigRational::zero(), BigRational::one())
    }
    fn inv(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(Complex::new(&self.re / &norm, -&self.im / &norm))
    }
    fn to_c64(&self) -> Complex64 {
        Complex64::new(big_to_f64(&self.re), big_to_f64(&self.im))
    }
    fn parse(text: &str) -> Result<Self, ParseError> {
        let (re, im) = split_complex(text)?;
        let re = re.map(parse_rational).transpose()?.unwrap_or_else(BigRational::zero);
        let im = im.map(parse_rational).transpose()?.unwrap_or_else(BigRational::zero);
        Ok(Complex::new(re, im))
    }
    fn render(&self) -> String {
        render_parts(&render_rational(&self.re), &render_rational(&self.im), self.re.is_zero(), self.im.is_zero(), self.im.is_negative())
    }
    fn integer_steps(&self, step: Rational64) -> Option<i64> {
        if !self.im.is_zero() {
            return None;
        }
        let q = &self.re / big(step);
        q.is_integer().then(|| q.to_integer().to_i64()).flatten()
    }
    fn real_value(&self) -> Option<f64> {
        self.im.is_zero().then(|| big_to_f64(&self.re))
    }
}

impl Ring for Complex64 {
    type Scalar = Complex64;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn add(&self, other: &Self) -> Self {
        *self + *other
    }
    fn neg(&self) -> Self {
        -*self
    }
    fn mul(&self, other: &Self) -> Self {
        *self * *other
    }
    fn scale(&self, factor: &Self) -> Self {
        *self * *factor
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl Scalar for Complex64 {
    const EXACT: bool = false;

    fn from_ratio(r: Rational64) -> Self {
        Complex64::new(*r.numer() as f64 / *r.denom() as f64, 0.0)
    }
    fn from_big(r: &BigRational) -> Self {
        Complex64::new(big_to_f64(r), 0.0)
    }
    fn from_c64(z: Complex64) -> Self {
        z
    }
    fn imag_unit() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn inv(&self) -> Option<Self> {
        (!Ring::is_zero(self)).then(|| 1.0 / *self)
    }
    fn to_c64(&self) -> Complex64 {
        *self
    }
    fn parse(text: &str) -> Result<Self, ParseError> {
        let (re, im) = split_complex(text)?;
        let re = re.map(parse_real).transpose()?.unwrap_or(0.0);
        let im = im.map(parse_real).transpose()?.unwrap_or(0.0);
        Ok(Complex64::new(re, im))
    }
    fn render(&self) -> String {
        render_parts(&format!("{}", self.re), &format!("{}", self.im), self.re == 0.0, self.im == 0.0, self.im < 0.0)
    }
    fn integer_steps(&self, step: Rational64) -> Option<i64> {
        if self.im.abs() > 1e-9 {
            return None;
        }
        let q = self.re / (*step.numer() as f64 / *step.denom() as f64);
        let k = q.round();
        ((q - k).abs() <= 1e-9).then_some(k as i64)
    }
}

fn render_parts(re: &str, im: &str, re_zero: bool, im_zero: bool, im_negative: bool) -> String {
    match (re_zero, im_zero) {
        (_, true) => re.to_string(),
        (true, false) => format!("{im}i"),
        (false, false) if im_negative => format!("{re}{im}i"),
        (false, false) => format!("{re}+{im}i"),
    }
}

fn render_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Splits `a+bi`-style text into optional real and imaginary parts. The
/// imaginary part is returned without the trailing `i`; a bare sign stands for 1.
fn split_complex(text: &str) -> Result<(Option<&str>, Option<&str>), ParseError> {
    let s = text.trim();
    if s.is_empty() {
        return Err(ParseError::Number(text.to_string()));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok((Some(s), None));
    };
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let c = bytes[idx];
        if (c == b'+' || c == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
            split = Some(idx);
            break;
        }
    }
    let (re, im) = match split {
        Some(idx) => (Some(&body[..idx]), &body[idx..]),
        None => (None, body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other.strip_prefix('+').unwrap_or(other),
    };
    Ok((re, Some(im)))
}

/// Parses `p/q`, integers and decimal/scientific literals exactly.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseError> {
    let s = text.trim();
    let err = || ParseError::Number(text.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| err())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Ok(n) = BigInt::from_str(s) {
        return Ok(BigRational::from_integer(n));
    }
    // decimal literal: mantissa[.fraction][e exponent]
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| err())?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).map_err(|_| err())?);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    for _ in 0..scale.unsigned_abs() {
        value = if scale > 0 { value * &ten } else { value / &ten };
    }
    Ok(if negative { -value } else { value })
}

fn parse_real(text: &str) -> Result<f64, ParseError> {
    let s = text.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| ParseError::Number(text.to_string()))?;
        let d: f64 = den.trim().parse().map_err(|_| ParseError::Number(text.to_string()))?;
        return Ok(n / d);
    }
    s.parse().map_err(|_| ParseError::Number(text.to_string()))
}

/// Parses a real rational such as `1/2`, `-3` or `1.5` into a small fraction.
pub fn parse_ratio(text: &str) -> Result<Rational64, ParseError> {
    let r = parse_rational(text)?;
    match (r.numer().to_i64(), r.denom().to_i64()) {
        (Some(n), Some(d)) => Ok(Rational64::new(n, d)),
        _ => Err(ParseError::Number(text.to_string())),
    }
}

pub fn render_ratio(r: Rational64) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn ratio_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Best rational approximation with denominator at most `max_den`
/// (continued fractions). Used to promote polished roots to exact values.
pub fn rational_approx(x: f64, max_den: i64) -> Option<Rational64> {
    if !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut value = x;
    for _ in 0..64 {
        let a = value.floor();
        if a.abs() > 1e15 {
            break;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = value - a as f64;
        if frac.abs() < 1e-14 {
            break;
        }
        value = 1.0 / frac;
    }
    (k1 != 0).then(|| Rational64::new(h1, k1))
}

/// Integer power of a scalar.
pub fn powi<S: Scalar>(base: &S, exp: u32) -> S {
    let mut acc = S::one();
    for _ in 0..exp {
        acc = acc.mul(base);
    }
    acc
}

/// Falling factorial `d (d-1) ... (d-k+1)` for a rational `d`.
pub fn falling(d: Rational64, k: u32) -> Rational64 {
    (0..k).fold(Rational64::one(), |acc, i| acc * (d - Rational64::from_integer(i as i64)))
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_complex_forms() {
        let z = QComplex::parse("1/2-3/4i").unwrap();
        assert_eq!(z, qc_ratio(Rational64::new(1, 2), Rational64::new(-3, 4)));
        assert_eq!(QComplex::parse("i").unwrap(), QComplex::imag_unit());
        assert_eq!(QComplex::parse("-i").unwrap(), QComplex::imag_unit().neg());
        assert_eq!(QComplex::parse("-2").unwrap(), QComplex::from_i64(-2));
        assert_eq!(QComplex::parse("0.25").unwrap(), QComplex::from_ratio(Rational64::new(1, 4)));
        assert_eq!(QComplex::parse("1e-2+2i").unwrap(), qc_ratio(Rational64::new(1, 100), Rational64::from_integer(2)));
        assert!(QComplex::parse("1/0").is_err());
        assert!(QComplex::parse("abc").is_err());
    }

    #[test]
    fn render_round_trips() {
        for text in ["0", "3", "-7/3", "1/2+5i", "-1/3-2/7i", "4i"] {
            let z = QComplex::parse(text).unwrap();
            assert_eq!(QComplex::parse(&z.render()).unwrap(), z, "{text}");
        }
        let w = Complex64::new(0.125, -2.5);
        assert_eq!(Complex64::parse(&w.render()).unwrap(), w);
        let e = Complex64::new(1e-20, 3e15);
        assert_eq!(Complex64::parse(&e.render()).unwrap(), e);
    }

    #[test]
    fn integer_steps_detects_grading_offsets() {
        let step = Rational64::new(3, 2);
        assert_eq!(QComplex::from_ratio(Rational64::new(-9, 2)).integer_steps(step), Some(-3));
        assert_eq!(QComplex::from_ratio(Rational64::new(1, 2)).integer_steps(step), None);
        assert_eq!(QComplex::imag_unit().integer_steps(step), None);
        assert_eq!(Complex64::new(4.5, 0.0).integer_steps(step), Some(3));
    }

    #[test]
    fn continued_fraction_recovers_small_fractions() {
        assert_eq!(rational_approx(-0.75, 1000), Some(Rational64::new(-3, 4)));
        assert_eq!(rational_approx(2.0, 10), Some(Rational64::from_integer(2)));
        assert_eq!(rational_approx(1.0 / 3.0, 10), Some(Rational64::new(1, 3)));
    }
}
