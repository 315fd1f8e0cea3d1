//! Left quantization on a uniform periodic grid.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::CircleSymbol;
use crate::error::CircleError;
use crate::numerics::fit_slope;
use crate::scalar::ratio_f64;
use crate::symbol::{Dir, ExcisionCutoff};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizedAction {
    pub grid_size: usize,
    /// Largest retained `|k|`.
    pub freq_cut: usize,
    pub excision: ExcisionCutoff,
}

impl QuantizedAction {
    pub fn new(grid_size: usize, freq_cut: usize, excision: ExcisionCutoff) -> Result<Self, CircleError> {
        let action = QuantizedAction { grid_size, freq_cut, excision };
        action.validate()?;
        Ok(action)
    }

    pub fn validate(&self) -> Result<(), CircleError> {
        if !self.grid_size.is_power_of_two() || 2 * self.freq_cut >= self.grid_size {
            return Err(CircleError::Aliasing { grid_size: self.grid_size, freq_cut: self.freq_cut });
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let h = std::f64::consts::TAU / self.grid_size as f64;
        (0..self.grid_size).map(|j| j as f64 * h).collect()
    }

    fn frequency(&self, idx: usize) -> i64 {
        if idx < self.grid_size / 2 {
            idx as i64
        } else {
            idx as i64 - self.grid_size as i64
        }
    }
}

/// `(Op(p) u)(x_j) = sum_k p(x_j, k) u^(k) e^{i k x_j}` with `u^` the discrete
/// Fourier coefficients and `p` the excised, truncated symbol. Each component
/// and direction is one inverse transform followed by multiplication with its
/// coefficient function.
pub fn quantize_apply(p: &CircleSymbol, samples: &[Complex64], action: &QuantizedAction) -> Result<Vec<Complex64>, CircleError> {
    action.validate()?;
    let n = action.grid_size;
    if samples.len() != n {
        return Err(CircleError::GridMismatch { expected: n, got: samples.len() });
    }
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut spectrum = samples.to_vec();
    forward.process(&mut spectrum);
    let xs = action.points();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let norm = 1.0 / n as f64;
    for j in 0..p.depth() {
        let component = &p.components()[j];
        if component.is_zero() {
            continue;
        }
        let d = ratio_f64(p.degree(j));
        let polynomial = p.is_polynomial_component(j);
        for dir in Dir::BOTH {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            let mut any = false;
            for (idx, slot) in buf.iter_mut().enumerate() {
                let k = action.frequency(idx);
                let r = k.unsigned_abs() as f64;
                let weight = if k.unsigned_abs() as usize > action.freq_cut {
                    0.0
                } else if k == 0 {
                    if polynomial && d == 0.0 && dir == Dir::Plus {
                        1.0
                    } else {
                        0.0
                    }
                } else if Dir::of(k as f64) != dir {
                    0.0
                } else if polynomial {
                    r.powf(d)
                } else {
                    action.excision.eval(r) * r.powf(d)
                };
                if weight != 0.0 {
                    *slot = spectrum[idx] * weight * norm;
                    any = true;
                }
            }
            if !any {
                continue;
            }
            inverse.process(&mut buf);
            let coeff = component.get(dir);
            for ((o, v), &x) in out.iter_mut().zip(&buf).zip(&xs) {
                *o += coeff.eval(x) * v;
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayRow {
    pub k: i64,
    pub norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayTable {
    pub rows: Vec<DecayRow>,
    /// Least-squares slope of `log norm` against `log |k|` over the nonzero rows.
    pub slope: f64,
}

/// `sup_j |(Op(p) Op(q_J) - I) e^{ikx}|(x_j)` per probe frequency, with `q`
/// truncated to `depth` components.
pub fn remainder_probe(
    p: &CircleSymbol,
    q: &CircleSymbol,
    depth: usize,
    frequencies: &[i64],
    action: &QuantizedAction,
) -> Result<DecayTable, CircleError> {
    if depth > q.depth() {
        return Err(CircleError::DepthOverflow { requested: depth, available: q.depth() });
    }
    let q = q.truncated(depth);
    let xs = action.points();
    let mut rows = Vec::with_capacity(frequencies.len());
    for &k in frequencies {
        let u: Vec<Complex64> = xs.iter().map(|&x| Complex64::from_polar(1.0, k as f64 * x)).collect();
        let v = quantize_apply(&q, &u, action)?;
        let w = quantize_apply(p, &v, action)?;
        let norm = w.iter().zip(&u).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        rows.push(DecayRow { k, norm });
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.norm > 0.0 && r.k != 0).map(|r| ((r.k.unsigned_abs() as f64).ln(), r.norm.ln())).unzip();
    let slope = if lx.len() >= 2 { fit_slope(&lx, &ly) } else { f64::NAN };
    Ok(DecayTable { rows, slope })
}
