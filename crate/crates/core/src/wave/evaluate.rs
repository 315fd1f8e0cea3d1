//! Pointwise evaluation of conormal solutions by radial oscillatory quadrature,
//! and jumps across the light cone.
//!
//! For `n = 1`, `u(t, x) = (1/2pi) sum_{branch, sigma} int_0^inf
//! e^{i r (sigma x +- C(t))} chi(r/s) sum_j alpha_j r^{mu_bar - j} dr`.
//! Each radial integral is split into Filon panels over the excision ramp
//! `[s, 2s]`, geometric panels up to `R >= far / |omega|`, and the asymptotic
//! tail `-e^{i omega R} sum_k (-1)^k f^(k)(R) / (i omega)^{k+1}`.

use num_complex::Complex64;
use serde::Serialize;

use super::conormal::ConormalSolution;
use super::light_cone;
use super::norm;
use crate::error::WaveError;
use crate::numerics::FilonPanel;
use crate::symbol::{Dir, ExcisionCutoff};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureConfig {
    pub excision: ExcisionCutoff,
    /// Legendre points per Filon panel.
    pub panel_points: usize,
    /// Panels over the excision ramp.
    pub ramp_panels: usize,
    /// Panels per doubling interval.
    pub octave_panels: usize,
    /// The tail starts at `far / |omega|`.
    pub far: f64,
    pub tail_terms: usize,
    /// Largest accepted final tail term, relative to the integral.
    pub tail_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            excision: ExcisionCutoff::default(),
            panel_points: 16,
            ramp_panels: 32,
            octave_panels: 4,
            far: 40.0,
            tail_terms: 12,
            tail_tolerance: 1e-9,
        }
    }
}

/// `int_0^inf e^{i omega r} chi(r/s) sum_p coeff_p r^p dr`.
fn radial_integral(omega: f64, terms: &[(f64, Complex64)], cfg: &QuadratureConfig, panel: &FilonPanel) -> Result<Complex64, WaveError> {
    if terms.iter().all(|(_, c)| *c == Complex64::new(0.0, 0.0)) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    if omega.abs() < 1e-12 {
        return Err(WaveError::Quadrature(format!("stationary radial phase (omega = {omega:e})")));
    }
    let f = |r: f64| -> Complex64 { terms.iter().map(|(p, c)| c * r.powf(*p)).sum() };
    let s = cfg.excision.scale;
    let mut total = Complex64::new(0.0, 0.0);
    let h = s / cfg.ramp_panels as f64;
    for k in 0..cfg.ramp_panels {
        let (a, b) = (s + k as f64 * h, s + (k + 1) as f64 * h);
        total += panel.integrate(a, b, omega, |r| f(r) * cfg.excision.eval(r));
    }
    let far = (cfg.far / omega.abs()).max(2.0 * s);
    let ratio = 2f64.powf(1.0 / cfg.octave_panels as f64);
    let mut a = 2.0 * s;
    while a < far {
        let b = a * ratio;
        total += panel.integrate(a, b, omega, f);
        a = b;
    }
    let iw = Complex64::new(0.0, omega);
    let mut tail = Complex64::new(0.0, 0.0);
    let mut last = Complex64::new(0.0, 0.0);
    let mut denom = iw;
    for k in 0..cfg.tail_terms {
        // f^(k)(a) for the power sum
        let dk: Complex64 = terms
            .iter()
            .map(|(p, c)| {
                let falling: f64 = (0..k).map(|i| p - i as f64).product();
                c * falling * a.powf(p - k as f64)
            })
            .sum();
        last = dk / denom * if k % 2 == 0 { 1.0 } else { -1.0 };
        tail += last;
        denom *= iw;
    }
    total -= Complex64::from_polar(1.0, omega * a) * tail;
    if last.norm() > cfg.tail_tolerance * total.norm().max(1e-3) {
        return Err(WaveError::Quadrature(format!("asymptotic tail not converged at R = {a} (last term {:e})", last.norm())));
    }
    Ok(total)
}

/// `u(t, x)` modulo the smooth excision discrepancy.
pub fn evaluate_solution(sol: &ConormalSolution, t: f64, x: &[f64], cfg: &QuadratureConfig) -> Result<Complex64, WaveError> {
    let op = &sol.op;
    if !(t > 0.0) {
        return Err(WaveError::InvalidInput(format!("evaluation time must be positive, got {t}")));
    }
    op.check_time(t)?;
    if x.len() != op.dim {
        return Err(WaveError::InvalidInput(format!("point must have {} components", op.dim)));
    }
    let big_c = op.speed.cumulative(t).ok_or_else(|| WaveError::Unsupported("evaluation needs a speed independent of x".into()))?;
    let coeffs = sol.coefficients_at(t)?;
    let mu_bar = *sol.mu_bar.numer() as f64 / *sol.mu_bar.denom() as f64;
    let panel = FilonPanel::new(cfg.panel_points);
    match op.dim {
        1 => {
            let mut total = Complex64::new(0.0, 0.0);
            for branch in Dir::BOTH {
                let b = if branch == Dir::Plus { 0 } else { 1 };
                for (d, dir) in sol.fan.dirs.iter().enumerate() {
                    let omega = dir[0] * x[0] + branch.sign() as f64 * big_c;
                    let terms: Vec<(f64, Complex64)> =
                        coeffs[b][d].iter().enumerate().map(|(j, a)| (mu_bar - j as f64, *a)).collect();
                    total += radial_integral(omega, &terms, cfg, &panel)?;
                }
            }
            Ok(total / std::f64::consts::TAU)
        }
        3 => {
            if !matches!(op.speed, super::Speed::Constant(_)) {
                return Err(WaveError::Unsupported("n = 3 evaluation needs a constant speed".into()));
            }
            for b in 0..2 {
                let first = &coeffs[b][0];
                if coeffs[b].iter().any(|row| row.iter().zip(first).any(|(a, c)| (a - c).norm() > 1e-14 * (1.0 + c.norm()))) {
                    return Err(WaveError::Unsupported("n = 3 evaluation needs radially symmetric amplitudes".into()));
                }
            }
            let r = norm(x);
            if r < 1e-12 {
                return Err(WaveError::Unsupported("n = 3 evaluation at the origin".into()));
            }
            // (1 / (2 pi^2 r)) int rho sin(r rho) e^{+- i C rho} a(rho) d rho
            let mut total = Complex64::new(0.0, 0.0);
            for branch in Dir::BOTH {
                let b = if branch == Dir::Plus { 0 } else { 1 };
                for side in [1.0, -1.0] {
                    let omega = side * r + branch.sign() as f64 * big_c;
                    let factor = Complex64::new(0.0, -0.5 * side);
                    let terms: Vec<(f64, Complex64)> =
                        coeffs[b][0].iter().enumerate().map(|(j, a)| (mu_bar - j as f64 + 1.0, a * factor)).collect();
                    total += radial_integral(omega, &terms, cfg, &panel)?;
                }
            }
            Ok(total / (2.0 * std::f64::consts::PI.powi(2) * r))
        }
        n => Err(WaveError::Unsupported(format!("pointwise evaluation for n = {n}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JumpEstimate {
    pub t: f64,
    pub cone_point: Vec<f64>,
    pub offsets: Vec<f64>,
    /// `u(x + eps nu) - u(x - eps nu)` per offset, `nu` the outward normal.
    pub differences: Vec<Complex64>,
    /// Last row of the Richardson table.
    pub extrapolants: Vec<Complex64>,
    pub jump: Complex64,
    pub uncertainty: f64,
}

/// Richardson limit of `u(out) - u(in)` across the cone, assuming an odd
/// expansion in the offset and a halving offset schedule.
pub fn jump_across_cone(
    sol: &ConormalSolution,
    t: f64,
    offsets: &[f64],
    cfg: &QuadratureConfig,
) -> Result<JumpEstimate, WaveError> {
    if offsets.len() < 2 || offsets.windows(2).any(|w| (w[1] - 0.5 * w[0]).abs() > 1e-12 * w[0]) || offsets[0] <= 0.0 {
        return Err(WaveError::InvalidInput("offsets must be a positive halving sequence of length >= 2".into()));
    }
    let cone = light_cone(&sol.op, t, 1)?;
    // the fan direction -e_1 maps to the cone point on the positive first axis
    let idx = cone.directions.iter().position(|d| d[0] < 0.0 && d[1..].iter().all(|v| v.abs() < 1e-12));
    let point = match idx {
        Some(i) => cone.points[i].clone(),
        None => {
            let mut p = vec![0.0; sol.op.dim];
            p[0] = cone.radii[0];
            p
        }
    };
    let normal: Vec<f64> = point.iter().map(|v| v / norm(&point)).collect();
    let mut differences = Vec::with_capacity(offsets.len());
    for &eps in offsets {
        let out: Vec<f64> = point.iter().zip(&normal).map(|(p, n)| p + eps * n).collect();
        let inn: Vec<f64> = point.iter().zip(&normal).map(|(p, n)| p - eps * n).collect();
        differences.push(evaluate_solution(sol, t, &out, cfg)? - evaluate_solution(sol, t, &inn, cfg)?);
    }
    let mut row = vec![differences[0]];
    for k in 1..differences.len() {
        let mut next = vec![differences[k]];
        for m in 1..=k {
            let w = 2f64.powi(2 * m as i32 - 1);
            next.push((next[m - 1] * w - row[m - 1]) / (w - 1.0));
        }
        row = next;
    }
    let jump = *row.last().expect("nonempty");
    let uncertainty = (jump - row[row.len() - 2]).norm();
    if !(uncertainty <= 1e-4 * jump.norm().max(1.0)) {
        return Err(WaveError::Extrapolation(format!("successive extrapolants differ by {uncertainty:e}")));
    }
    Ok(JumpEstimate { t, cone_point: point, offsets: offsets.to_vec(), differences, extrapolants: row, jump, uncertainty })
}
