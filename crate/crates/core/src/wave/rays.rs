//! Null bicharacteristics `x' = -mu_xi, xi' = mu_x`, their variational
//! equations, direction fans and light-cone cross-sections.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{char_roots, norm, CharRoots, HyperbolicOp2};
use crate::error::WaveError;
use crate::numerics::{dopri5, OdeOptions};
use crate::symbol::Dir;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RaySample {
    pub t: f64,
    pub x: Vec<f64>,
    pub tau: f64,
    pub xi: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RayStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// `max |tau - mu(t, x, xi)|` with `tau` integrated from `tau' = mu_t`.
    pub tau_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ray {
    pub branch: Dir,
    pub x0: Vec<f64>,
    pub xi0: Vec<f64>,
    pub samples: Vec<RaySample>,
    pub stats: RayStats,
}

fn ray_options() -> OdeOptions {
    OdeOptions { rtol: 1e-13, atol: 1e-15, ..OdeOptions::default() }
}

fn check_grid(op: &HyperbolicOp2, grid: &[f64]) -> Result<(), WaveError> {
    for &t in grid {
        op.check_time(t)?;
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(WaveError::InvalidInput("time grid must be nondecreasing".into()));
    }
    Ok(())
}

/// Right-hand side of the Hamilton system, the `tau` equation and (when
/// `variational`) the linearization with respect to `x0`.
pub(crate) fn hamilton_rhs(roots: &CharRoots, branch: Dir, variational: bool, t: f64, y: &[f64], out: &mut [f64]) {
    let n = roots.op.dim;
    let (x, xi) = (&y[..n], &y[n..2 * n]);
    let speed = &roots.op.speed;
    let s = branch.sign() as f64;
    let r = norm(xi);
    if r == 0.0 {
        out.iter_mut().for_each(|v| *v = f64::NAN);
        return;
    }
    let c = speed.value(t, x);
    let g = speed.grad(t, x);
    for i in 0..n {
        out[i] = -s * c * xi[i] / r;
        out[n + i] = s * r * g[i];
    }
    out[2 * n] = roots.mu_t(branch, t, x, xi);
    if !variational {
        return;
    }
    let w: Vec<f64> = xi.iter().map(|v| v / r).collect();
    let hess = speed.hessian(t, x);
    let base = 2 * n + 1;
    let jx = |i: usize, k: usize| y[base + i * n + k];
    let jxi = |i: usize, k: usize| y[base + n * n + i * n + k];
    for k in 0..n {
        let wdx: f64 = (0..n).map(|l| w[l] * jxi(l, k)).sum();
        let gdx: f64 = (0..n).map(|l| g[l] * jx(l, k)).sum();
        for i in 0..n {
            // -mu_xx_i dx - mu_xixi dxi
            let dxi_perp = jxi(i, k) - w[i] * wdx;
            out[base + i * n + k] = -s * w[i] * gdx - s * c * dxi_perp / r;
            let hdx: f64 = (0..n).map(|l| hess[i][l] * jx(l, k)).sum();
            out[base + n * n + i * n + k] = s * r * hdx + s * g[i] * wdx;
        }
    }
}

fn integrate(
    roots: &CharRoots,
    branch: Dir,
    variational: bool,
    y0: Vec<f64>,
    grid: &[f64],
) -> Result<(Vec<Vec<f64>>, RayStats), WaveError> {
    let mut states = Vec::with_capacity(grid.len());
    let outputs: Vec<f64> = grid.iter().copied().filter(|&t| t > 0.0).collect();
    states.extend(grid.iter().take_while(|&&t| t <= 0.0).map(|_| y0.clone()));
    let mut stats = RayStats::default();
    if !outputs.is_empty() {
        let (ys, ode) = dopri5(|t, y, out| hamilton_rhs(roots, branch, variational, t, y, out), 0.0, &y0, &outputs, &ray_options())
            .map_err(WaveError::Integrator)?;
        stats.accepted = ode.accepted;
        stats.rejected = ode.rejected;
        stats.evaluations = ode.evaluations;
        states.extend(ys);
    }
    let n = roots.op.dim;
    for (state, &t) in states.iter().zip(grid) {
        if state.iter().any(|v| !v.is_finite()) || norm(&state[n..2 * n]) <= 1e-12 * norm(&y0[n..2 * n]) {
            return Err(WaveError::VanishingFrequency(t));
        }
    }
    Ok((states, stats))
}

fn seed_state(x0: &[f64], xi0: &[f64], roots: &CharRoots, branch: Dir, variational: bool) -> Vec<f64> {
    let n = x0.len();
    let mut y = [x0, xi0].concat();
    y.push(roots.mu(branch, 0.0, x0, xi0));
    if variational {
        let mut eye = vec![0.0; n * n];
        for i in 0..n {
            eye[i * n + i] = 1.0;
        }
        y.extend(eye);
        y.extend(vec![0.0; n * n]);
    }
    y
}

fn check_seed(op: &HyperbolicOp2, x0: &[f64], xi0: &[f64]) -> Result<(), WaveError> {
    if x0.len() != op.dim || xi0.len() != op.dim {
        return Err(WaveError::InvalidInput(format!("seed must have {} components", op.dim)));
    }
    if norm(xi0) == 0.0 {
        return Err(WaveError::VanishingFrequency(0.0));
    }
    Ok(())
}

/// The bicharacteristic of `branch` through `(x0, xi0)` sampled on `grid`.
pub fn trace_bicharacteristic(
    op: &HyperbolicOp2,
    x0: &[f64],
    xi0: &[f64],
    branch: Dir,
    grid: &[f64],
) -> Result<Ray, WaveError> {
    check_seed(op, x0, xi0)?;
    check_grid(op, grid)?;
    let roots = char_roots(op)?;
    let n = op.dim;
    let (states, mut stats) = integrate(&roots, branch, false, seed_state(x0, xi0, &roots, branch, false), grid)?;
    let mut samples = Vec::with_capacity(grid.len());
    for (y, &t) in states.iter().zip(grid) {
        let (x, xi) = (y[..n].to_vec(), y[n..2 * n].to_vec());
        let tau = roots.mu(branch, t, &x, &xi);
        stats.tau_residual = stats.tau_residual.max((tau - y[2 * n]).abs());
        samples.push(RaySample { t, x, tau, xi });
    }
    Ok(Ray { branch, x0: x0.to_vec(), xi0: xi0.to_vec(), samples, stats })
}

/// Ray end point with the Jacobians `dX/dx0` and `dXi/dx0`.
#[derive(Clone, Debug)]
pub struct Flow {
    pub t: f64,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub dx_dx0: DMatrix<f64>,
    pub dxi_dx0: DMatrix<f64>,
}

/// Flows `(x0, xi0)` along the bicharacteristic with its variational equations.
pub fn flow(op: &HyperbolicOp2, x0: &[f64], xi0: &[f64], branch: Dir, grid: &[f64]) -> Result<Vec<Flow>, WaveError> {
    check_seed(op, x0, xi0)?;
    check_grid(op, grid)?;
    let roots = char_roots(op)?;
    flow_with(&roots, x0, xi0, branch, grid)
}

pub(crate) fn flow_with(roots: &CharRoots, x0: &[f64], xi0: &[f64], branch: Dir, grid: &[f64]) -> Result<Vec<Flow>, WaveError> {
    let n = roots.op.dim;
    let (states, _) = integrate(roots, branch, true, seed_state(x0, xi0, roots, branch, true), grid)?;
    let base = 2 * n + 1;
    Ok(states
        .iter()
        .zip(grid)
        .map(|(y, &t)| Flow {
            t,
            x: y[..n].to_vec(),
            xi: y[n..2 * n].to_vec(),
            dx_dx0: DMatrix::from_row_slice(n, n, &y[base..base + n * n]),
            dxi_dx0: DMatrix::from_row_slice(n, n, &y[base + n * n..base + 2 * n * n]),
        })
        .collect())
}

/// Unit directions closed under `omega -> -omega`: the first half followed by
/// their antipodes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectionFan {
    pub dirs: Vec<Vec<f64>>,
}

impl DirectionFan {
    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn antipode(&self, i: usize) -> usize {
        let half = self.dirs.len() / 2;
        (i + half) % self.dirs.len()
    }

    /// Index of the fan direction closest to `xi / |xi|` (must agree to 1e-9).
    pub fn find(&self, xi: &[f64]) -> Option<usize> {
        let r = norm(xi);
        self.dirs.iter().position(|d| d.iter().zip(xi).all(|(a, b)| (a - b / r).abs() < 1e-9))
    }
}

/// `half` directions and their antipodes: `+-1` for `n = 1`, equally spaced
/// angles for `n = 2`, a Fibonacci lattice for `n = 3`.
pub fn direction_fan(dim: usize, half: usize) -> Result<DirectionFan, WaveError> {
    let half = half.max(1);
    let first: Vec<Vec<f64>> = match dim {
        1 => vec![vec![1.0]],
        2 => (0..half)
            .map(|k| {
                let a = std::f64::consts::PI * (k as f64 + 0.5) / half as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        3 => {
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..half)
                .map(|k| {
                    // upper hemisphere only, so antipodes never coincide with lattice points
                    let z = (k as f64 + 0.5) / half as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * k as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
        _ => return Err(WaveError::Unsupported(format!("direction fans for n = {dim}"))),
    };
    let mut dirs = first.clone();
    dirs.extend(first.iter().map(|d| d.iter().map(|v| -v).collect()));
    Ok(DirectionFan { dirs })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LightCone {
    pub t: f64,
    pub directions: Vec<Vec<f64>>,
    pub points: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
    /// `min |x_i - x_j| / |omega_i - omega_j|` over pairs.
    pub min_stretch: f64,
    pub injective: bool,
}

/// Cross-section `{x^+(t; 0, omega)}` of the light cone with vertex 0.
pub fn light_cone(op: &HyperbolicOp2, t: f64, fan_half: usize) -> Result<LightCone, WaveError> {
    if !(t > 0.0) {
        return Err(WaveError::InvalidInput(format!("cone time must be positive, got {t}")));
    }
    let fan = direction_fan(op.dim, fan_half)?;
    let origin = vec![0.0; op.dim];
    let mut points = Vec::with_capacity(fan.len());
    for dir in &fan.dirs {
        let ray = trace_bicharacteristic(op, &origin, dir, Dir::Plus, &[t])?;
        points.push(ray.samples[0].x.clone());
    }
    let radii: Vec<f64> = points.iter().map(|p| norm(p)).collect();
    let mut min_stretch = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let dx: Vec<f64> = points[i].iter().zip(&points[j]).map(|(a, b)| a - b).collect();
            let dw: Vec<f64> = fan.dirs[i].iter().zip(&fan.dirs[j]).map(|(a, b)| a - b).collect();
            min_stretch = min_stretch.min(norm(&dx) / norm(&dw));
        }
    }
    let injective = min_stretch > 1e-6 * t;
    Ok(LightCone { t, directions: fan.dirs, points, radii, min_stretch, injective })
}
