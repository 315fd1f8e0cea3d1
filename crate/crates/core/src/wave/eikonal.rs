//! Eikonal phases `d_t phi = mu(t, x, grad phi)`, `phi(0) = x.xi`.
//!
//! Along a ray from `(x0, xi)` the phase is constant (`mu` is homogeneous of
//! degree 1), so `phi(t, x, xi) = x0.xi` where `X(t; x0, xi) = x`. Its
//! gradient is `(dX/dx0)^{-T} xi` and `d_t phi = xi.(dX/dx0)^{-1} mu_xi`.

use nalgebra::DVector;
use serde::Serialize;

use super::rays::{direction_fan, flow_with, Flow};
use super::{char_roots, dot, norm, CharRoots, HyperbolicOp2};
use crate::error::WaveError;
use crate::numerics::linspace;
use crate::symbol::Dir;

/// `det(dX/dx0)` below this marks a caustic.
const CAUSTIC_DET: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PhaseRepr {
    /// `x.xi +- C(t) |xi|`.
    Closed,
    /// Ray inversion with Newton's method on `x0`.
    Rays,
}

#[derive(Clone, Debug)]
pub struct PhaseSolution {
    pub branch: Dir,
    pub repr: PhaseRepr,
    roots: CharRoots,
}

/// Value, gradient and time derivative of a phase at one point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhasePoint {
    pub value: f64,
    pub grad: Vec<f64>,
    pub dt: f64,
    /// `d_t phi - mu(t, x, grad phi)`.
    pub eikonal_residual: f64,
}

/// Closed form for speeds independent of `x`, rays otherwise.
pub fn solve_eikonal(op: &HyperbolicOp2, branch: Dir, grid: &[f64]) -> Result<PhaseSolution, WaveError> {
    if op.speed.is_time_only() {
        for &t in grid {
            op.check_time(t)?;
        }
        return Ok(PhaseSolution { branch, repr: PhaseRepr::Closed, roots: char_roots(op)? });
    }
    ray_phase(op, branch, grid)
}

/// Ray-built phase regardless of the speed family, after the caustic guard
/// on a grid of seeds and directions.
pub fn ray_phase(op: &HyperbolicOp2, branch: Dir, grid: &[f64]) -> Result<PhaseSolution, WaveError> {
    let roots = char_roots(op)?;
    for &t in grid {
        op.check_time(t)?;
    }
    let mut grid: Vec<f64> = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    if !grid.is_empty() {
        let fan = direction_fan(op.dim, if op.dim == 1 { 1 } else { 4 })?;
        let seeds = seed_box(op.dim, if op.speed.is_time_only() { 1 } else { 5 });
        for dir in &fan.dirs {
            for x0 in &seeds {
                for f in flow_with(&roots, x0, dir, branch, &grid)? {
                    if f.dx_dx0.determinant() <= CAUSTIC_DET {
                        return Err(WaveError::Caustic { time: f.t });
                    }
                }
            }
        }
    }
    Ok(PhaseSolution { branch, repr: PhaseRepr::Rays, roots })
}

fn seed_box(dim: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let axis = if per_axis == 1 { vec![0.0] } else { linspace(-1.0, 1.0, per_axis) };
    let mut xs: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..dim {
        xs = xs.into_iter().flat_map(|p| axis.iter().map(move |&a| [p.clone(), vec![a]].concat())).collect();
    }
    xs
}

impl PhaseSolution {
    pub fn op(&self) -> &HyperbolicOp2 {
        &self.roots.op
    }

    pub fn eval(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<f64, WaveError> {
        Ok(self.point(t, x, xi)?.value)
    }

    pub fn point(&self, t: f64, x: &[f64], xi: &[f64]) -> Result<PhasePoint, WaveError> {
        let op = &self.roots.op;
        op.check_time(t)?;
        if x.len() != op.dim || xi.len() != op.dim {
            return Err(WaveError::InvalidInput(format!("points must have {} components", op.dim)));
        }
        let r = norm(xi);
        if r == 0.0 {
            return Ok(PhasePoint { value: 0.0, grad: vec![0.0; op.dim], dt: 0.0, eikonal_residual: 0.0 });
        }
        let s = self.branch.sign() as f64;
        match self.repr {
            PhaseRepr::Closed => {
                let big_c = op.speed.cumulative(t).expect("closed phases need a speed independent of x");
                let value = dot(x, xi) + s * big_c * r;
                let dt = s * op.speed.value(t, x) * r;
                let residual = dt - self.roots.mu(self.branch, t, x, xi);
                Ok(PhasePoint { value, grad: xi.to_vec(), dt, eikonal_residual: residual })
            }
            PhaseRepr::Rays => {
                let omega: Vec<f64> = xi.iter().map(|v| v / r).collect();
                let (x0, f) = self.invert(t, x, &omega)?;
                let jac = f.dx_dx0.clone();
                let lu = jac.clone().lu();
                let w = DVector::from_column_slice(&omega);
                let grad_unit = jac.transpose().lu().solve(&w).ok_or(WaveError::Caustic { time: t })?;
                let grad: Vec<f64> = grad_unit.iter().map(|v| v * r).collect();
                let mu_xi = DVector::from_vec(self.roots.mu_xi(self.branch, t, x, &grad));
                let dx0_dt = lu.solve(&mu_xi).ok_or(WaveError::Caustic { time: t })?;
                let dt = dot(xi, dx0_dt.as_slice());
                let residual = dt - self.roots.mu(self.branch, t, x, &grad);
                Ok(PhasePoint { value: r * dot(&x0, &omega), grad, dt, eikonal_residual: residual })
            }
        }
    }

    /// Seed `x0` with `X(t; x0, omega) = x`.
    fn invert(&self, t: f64, x: &[f64], omega: &[f64]) -> Result<(Vec<f64>, Flow), WaveError> {
        let op = &self.roots.op;
        let s = self.branch.sign() as f64;
        let c0 = op.speed.value(0.0, x);
        let mut x0: Vec<f64> = x.iter().zip(omega).map(|(a, w)| a + s * c0 * t * w).collect();
        let scale = 1.0 + norm(x);
        for _ in 0..50 {
            let f = flow_with(&self.roots, &x0, omega, self.branch, &[t])?.pop().expect("one output");
            if f.dx_dx0.determinant() <= CAUSTIC_DET {
                return Err(WaveError::Caustic { time: t });
            }
            let res = DVector::from_iterator(x.len(), f.x.iter().zip(x).map(|(a, b)| a - b));
            if res.norm() <= 1e-14 * scale {
                return Ok((x0, f));
            }
            let step: DVector<f64> = f.dx_dx0.clone().lu().solve(&res).ok_or(WaveError::Caustic { time: t })?;
            for (a, d) in x0.iter_mut().zip(step.iter()) {
                *a -= d;
            }
            if step.norm() <= 1e-15 * scale {
                let f = flow_with(&self.roots, &x0, omega, self.branch, &[t])?.pop().expect("one output");
                return Ok((x0, f));
            }
        }
        Err(WaveError::Integrator(format!("ray inversion at t = {t}, x = {x:?} did not converge")))
    }
}
