//! Second-order strictly hyperbolic equations `P = D_t^2 + p_1 D_t + p_2` of
//! wave type, `P = D_t^2 + c^2 Delta_x`: characteristic roots, bicharacteristics,
//! eikonal phases, WKB amplitudes and conormal solutions.
//!
//! Conventions: `D_t = -i d/dt`, `Delta_x = sum d^2/dx_k^2`,
//! `u(x) = int e^{i x.xi} u^(xi) dxi / (2 pi)^n`. Branch `+` carries the root
//! `mu^+ = c |xi|`; directions reuse [`Dir`].

use serde::{Deserialize, Serialize};

use crate::error::WaveError;
use crate::numerics::linspace;
use crate::symbol::Dir;

mod amplitude;
mod conormal;
mod eikonal;
mod evaluate;
mod rays;

pub use amplitude::{cauchy_init, transport_along_ray, transport_solve, vandermonde_init};
pub use conormal::{
    build_conormal, build_green, check_parity, AmplitudeExpansion, CauchyData, ConormalSolution, Convention,
    ParityReport,
};
pub use eikonal::{ray_phase, solve_eikonal, PhasePoint, PhaseRepr, PhaseSolution};
pub use evaluate::{evaluate_solution, jump_across_cone, JumpEstimate, QuadratureConfig};
pub use rays::{direction_fan, flow, light_cone, trace_bicharacteristic, DirectionFan, Flow, LightCone, Ray, RaySample, RayStats};

/// `coeff * t^t_pow * prod x_k^x_pows[k]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub t_pow: u32,
    pub x_pows: Vec<u32>,
}

impl Monomial {
    fn eval_with(&self, t: f64, x: &[f64], dt: u32, dx: &[u32]) -> f64 {
        fn part(base: f64, pow: u32, d: u32) -> f64 {
            if d > pow {
                return 0.0;
            }
            let mut factor = 1.0;
            for i in 0..d {
                factor *= (pow - i) as f64;
            }
            factor * base.powi((pow - d) as i32)
        }
        let mut v = self.coeff * part(t, self.t_pow, dt);
        for (k, &p) in self.x_pows.iter().enumerate() {
            v *= part(x[k], p, dx.get(k).copied().unwrap_or(0));
        }
        v
    }
}

/// Sound speed of the wave family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Speed {
    Constant(f64),
    /// `c(t) = sum_k coeffs[k] t^k`.
    TimePoly(Vec<f64>),
    /// Sum of monomials in `(t, x)`.
    SpaceTime(Vec<Monomial>),
}

impl Speed {
    pub fn is_time_only(&self) -> bool {
        !matches!(self, Speed::SpaceTime(_))
    }

    fn derivative(&self, t: f64, x: &[f64], dt: u32, dx: &[u32]) -> f64 {
        match self {
            Speed::Constant(c) => {
                if dt == 0 && dx.iter().all(|&d| d == 0) {
                    *c
                } else {
                    0.0
                }
            }
            Speed::TimePoly(cs) => {
                if dx.iter().any(|&d| d > 0) {
                    return 0.0;
                }
                cs.iter()
                    .enumerate()
                    .map(|(k, &a)| Monomial { coeff: a, t_pow: k as u32, x_pows: vec![] }.eval_with(t, &[], dt, &[]))
                    .sum()
            }
            Speed::SpaceTime(ms) => ms.iter().map(|m| m.eval_with(t, x, dt, dx)).sum(),
        }
    }

    pub fn value(&self, t: f64, x: &[f64]) -> f64 {
        self.derivative(t, x, 0, &[])
    }

    pub fn dt(&self, t: f64, x: &[f64]) -> f64 {
        self.derivative(t, x, 1, &[])
    }

    pub fn grad(&self, t: f64, x: &[f64]) -> Vec<f64> {
        (0..x.len())
            .map(|k| {
                let mut d = vec![0; x.len()];
                d[k] = 1;
                self.derivative(t, x, 0, &d)
            })
            .collect()
    }

    pub fn hessian(&self, t: f64, x: &[f64]) -> Vec<Vec<f64>> {
        let n = x.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        let mut d = vec![0; n];
                        d[i] += 1;
                        d[k] += 1;
                        self.derivative(t, x, 0, &d)
                    })
                    .collect()
            })
            .collect()
    }

    /// `C(t) = int_0^t c` for speeds independent of `x`.
    pub fn cumulative(&self, t: f64) -> Option<f64> {
        match self {
            Speed::Constant(c) => Some(c * t),
            Speed::TimePoly(cs) => Some(cs.iter().enumerate().map(|(k, a)| a * t.powi(k as i32 + 1) / (k + 1) as f64).sum()),
            Speed::SpaceTime(_) => None,
        }
    }

    /// Taylor coefficients of `c(t0 + h)` in `h` for speeds independent of `x`.
    pub fn time_taylor(&self, t0: f64, terms: usize) -> Option<Vec<f64>> {
        let cs = match self {
            Speed::Constant(c) => vec![*c],
            Speed::TimePoly(cs) => cs.clone(),
            Speed::SpaceTime(_) => return None,
        };
        let mut out = vec![0.0; terms];
        for (r, slot) in out.iter_mut().enumerate() {
            let mut binom = 1.0;
            for (k, &a) in cs.iter().enumerate().skip(r) {
                if k > r {
                    binom = binom * k as f64 / (k - r) as f64;
                }
                *slot += a * binom * t0.powi((k - r) as i32);
            }
        }
        Some(out)
    }
}

/// `P = D_t^2 + c(t, x)^2 Delta_x` on `[0, T] x R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicOp2 {
    pub dim: usize,
    pub speed: Speed,
    pub horizon: f64,
    /// Sampled lower bound with `-q_2 >= kappa |xi|^2`.
    pub kappa: f64,
}

/// Lower bound enforced on sampled speeds.
const SPEED_FLOOR: f64 = 1.0 - 1e-9;

impl HyperbolicOp2 {
    pub fn new(dim: usize, speed: Speed, horizon: f64) -> Result<Self, WaveError> {
        if dim == 0 {
            return Err(WaveError::InvalidInput("dimension must be positive".into()));
        }
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(WaveError::InvalidInput(format!("horizon must be positive, got {horizon}")));
        }
        if let Speed::SpaceTime(ms) = &speed {
            if let Some(m) = ms.iter().find(|m| m.x_pows.len() != dim) {
                return Err(WaveError::InvalidInput(format!("monomial {m:?} does not have {dim} space exponents")));
            }
        }
        if let Speed::TimePoly(cs) = &speed {
            if cs.is_empty() {
                return Err(WaveError::InvalidInput("empty speed polynomial".into()));
            }
        }
        let mut op = HyperbolicOp2 { dim, speed, horizon, kappa: 0.0 };
        let mut kappa = f64::INFINITY;
        for (t, x) in op.sample_points() {
            let c = op.speed.value(t, &x);
            if !(c >= SPEED_FLOOR) {
                return Err(WaveError::Hyperbolicity { t, x });
            }
            kappa = kappa.min(c * c);
        }
        op.kappa = kappa;
        Ok(op)
    }

    /// Sample grid in `[0, T] x [-L, L]^n` used for the structural checks.
    pub fn sample_points(&self) -> Vec<(f64, Vec<f64>)> {
        let ts = linspace(0.0, self.horizon, 17);
        if self.speed.is_time_only() {
            return ts.into_iter().map(|t| (t, vec![0.0; self.dim])).collect();
        }
        let reach = 1.0 + 2.0 * self.horizon * self.speed.value(0.0, &vec![0.0; self.dim]);
        let per_axis = if self.dim <= 2 { 9 } else { 5 };
        let axis = linspace(-reach, reach, per_axis);
        let mut xs: Vec<Vec<f64>> = vec![vec![]];
        for _ in 0..self.dim {
            xs = xs.into_iter().flat_map(|p| axis.iter().map(move |&a| [p.clone(), vec![a]].concat())).collect();
        }
        ts.iter().flat_map(|&t| xs.iter().map(move |x| (t, x.clone()))).collect()
    }

    pub fn q1(&self, _t: f64, _x: &[f64], _xi: &[f64]) -> f64 {
        0.0
    }

    pub fn q2(&self, t: f64, x: &[f64], xi: &[f64]) -> f64 {
        let c = self.speed.value(t, x);
        -c * c * norm(xi).powi(2)
    }

    pub fn check_time(&self, t: f64) -> Result<(), WaveError> {
        if !(0.0..=self.horizon * (1.0 + 1e-12)).contains(&t) {
            return Err(WaveError::InvalidInput(format!("time {t} outside [0, {}]", self.horizon)));
        }
        Ok(())
    }
}

/// `mu^+-(t, x, xi) = -q1/2 +- sqrt(q1^2 - 4 q2)/2` with derivatives for the wave family.
#[derive(Clone, Debug, PartialEq)]
pub struct CharRoots {
    pub op: HyperbolicOp2,
    /// Sampled lower bound for `|mu^+ - mu^-| / |xi|`.
    pub gap: f64,
}

pub fn char_roots(op: &HyperbolicOp2) -> Result<CharRoots, WaveError> {
    let mut gap = f64::INFINITY;
    let mut unit = vec![0.0; op.dim];
    unit[0] = 1.0;
    for (t, x) in op.sample_points() {
        let q1 = op.q1(t, &x, &unit);
        let disc = q1 * q1 - 4.0 * op.q2(t, &x, &unit);
        if !(disc > 0.0) {
            return Err(WaveError::Hyperbolicity { t, x });
        }
        gap = gap.min(disc.sqrt());
    }
    Ok(CharRoots { op: op.clone(), gap })
}

impl CharRoots {
    pub fn mu(&self, branch: Dir, t: f64, x: &[f64], xi: &[f64]) -> f64 {
        let q1 = self.op.q1(t, x, xi);
        let disc = q1 * q1 - 4.0 * self.op.q2(t, x, xi);
        -0.5 * q1 + branch.sign() as f64 * 0.5 * disc.max(0.0).sqrt()
    }

    /// `d mu / d xi = +- c xi / |xi|`.
    pub fn mu_xi(&self, branch: Dir, t: f64, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let s = branch.sign() as f64 * self.op.speed.value(t, x) / norm(xi);
        xi.iter().map(|v| s * v).collect()
    }

    /// `d mu / d x = +- |xi| grad c`.
    pub fn mu_x(&self, branch: Dir, t: f64, x: &[f64], xi: &[f64]) -> Vec<f64> {
        let s = branch.sign() as f64 * norm(xi);
        self.op.speed.grad(t, x).into_iter().map(|g| s * g).collect()
    }

    pub fn mu_t(&self, branch: Dir, t: f64, x: &[f64], xi: &[f64]) -> f64 {
        branch.sign() as f64 * self.op.speed.dt(t, x) * norm(xi)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests;
