//! Amplitude initialization and WKB transport.
//!
//! Substituting `e^{i phi} a` into `P = -d_t^2 + c^2 Delta` with
//! `phi = x.xi +- C(t)|xi|` and collecting the order below the eikonal one gives,
//! for `a_j = alpha_j(t) |xi|^{mu_bar - j}`,
//!
//! `alpha_j' = -(c'/2c) alpha_j +- (i/2c) alpha_{j-1}''`.
//!
//! The right-hand side at time `t` is computed from Taylor jets: the jet of
//! `alpha_0` follows from its value, that of `alpha_1` from its value and the
//! jet of `alpha_0`, and so on.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::rays::hamilton_rhs;
use super::{char_roots, dot, norm, HyperbolicOp2, Speed};
use crate::error::WaveError;
use crate::numerics::{dopri5, pack, unpack, OdeOptions};
use crate::symbol::Dir;

/// Solves `sum_h mu_h^p a_h = data_p`, `p = 0..m-1`.
pub fn vandermonde_init(roots: &[Complex64], data: &[Complex64]) -> Result<Vec<Complex64>, WaveError> {
    let m = roots.len();
    if data.len() != m {
        return Err(WaveError::InvalidInput(format!("{m} roots but {} data symbols", data.len())));
    }
    let size = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    for i in 0..m {
        for k in i + 1..m {
            if (roots[i] - roots[k]).norm() <= 1e-12 * size {
                return Err(WaveError::RootCollision);
            }
        }
    }
    let v = DMatrix::from_fn(m, m, |p, h| roots[h].powu(p as u32));
    let rhs = DVector::from_column_slice(data);
    let lu = v.clone().lu();
    let mut a = lu.solve(&rhs).ok_or(WaveError::RootCollision)?;
    // one step of iterative refinement
    let residual = &rhs - &v * &a;
    if let Some(da) = lu.solve(&residual) {
        a += da;
    }
    Ok(a.iter().copied().collect())
}

/// `a^+ + a^- = b`, `mu^+ a^+ + mu^- a^- = c`.
pub fn cauchy_init(
    mu_plus: Complex64,
    mu_minus: Complex64,
    b: Complex64,
    c: Complex64,
) -> Result<(Complex64, Complex64), WaveError> {
    let a = vandermonde_init(&[mu_plus, mu_minus], &[b, c])?;
    Ok((a[0], a[1]))
}

/// Taylor coefficients at a fixed time of `-c'/(2c)` and `+-i/(2c)`.
pub(crate) struct TimeJets {
    k: Vec<f64>,
    g: Vec<Complex64>,
}

pub(crate) fn time_jets(speed: &Speed, t: f64, terms: usize, branch: Dir) -> Option<TimeJets> {
    let c = speed.time_taylor(t, terms + 1)?;
    let mut inv = vec![0.0; terms];
    inv[0] = 1.0 / c[0];
    for r in 1..terms {
        let acc: f64 = (1..=r).map(|q| c[q] * inv[r - q]).sum();
        inv[r] = -acc / c[0];
    }
    let k = (0..terms)
        .map(|r| -0.5 * (0..=r).map(|q| (q + 1) as f64 * c[q + 1] * inv[r - q]).sum::<f64>())
        .collect();
    let half_i = Complex64::new(0.0, 0.5 * branch.sign() as f64);
    let g = inv.iter().map(|v| half_i * v).collect();
    Some(TimeJets { k, g })
}

/// Jets of `alpha_0 .. alpha_{J-1}` from their values; order `j` gets `2(J - j)` terms.
pub(crate) fn amplitude_jets(jets: &TimeJets, values: &[Complex64]) -> Vec<Vec<Complex64>> {
    let depth = values.len();
    let n = 2 * depth;
    let mut out: Vec<Vec<Complex64>> = Vec::with_capacity(depth);
    for (j, &v) in values.iter().enumerate() {
        let len = n - 2 * j;
        let mut a = vec![Complex64::new(0.0, 0.0); len];
        a[0] = v;
        for r in 0..len - 1 {
            let mut acc = Complex64::new(0.0, 0.0);
            for q in 0..=r {
                acc += a[r - q] * jets.k[q];
                if j > 0 {
                    let i = r - q + 2;
                    acc += jets.g[q] * out[j - 1][i] * (i * (i - 1)) as f64;
                }
            }
            a[r + 1] = acc / (r + 1) as f64;
        }
        out.push(a);
    }
    out
}

/// `alpha_j'(t)` for all orders.
pub(crate) fn transport_rates(speed: &Speed, branch: Dir, t: f64, values: &[Complex64]) -> Vec<Complex64> {
    if values.is_empty() {
        return Vec::new();
    }
    let jets = time_jets(speed, t, 2 * values.len(), branch).expect("time-only speed");
    amplitude_jets(&jets, values).iter().map(|a| a[1]).collect()
}

/// Transports the per-direction coefficients `alpha_0 .. alpha_{J-1}` of
/// `branch` from their values at `t = 0`; returns `[time][order]`.
pub fn transport_solve(
    op: &HyperbolicOp2,
    branch: Dir,
    inits: &[Complex64],
    grid: &[f64],
) -> Result<Vec<Vec<Complex64>>, WaveError> {
    if !op.speed.is_time_only() {
        return Err(WaveError::Unsupported("full-depth transport needs a speed independent of x".into()));
    }
    for &t in grid {
        op.check_time(t)?;
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(WaveError::InvalidInput("time grid must be nondecreasing".into()));
    }
    let mut out: Vec<Vec<Complex64>> = grid.iter().take_while(|&&t| t <= 0.0).map(|_| inits.to_vec()).collect();
    let outputs: Vec<f64> = grid.iter().copied().filter(|&t| t > 0.0).collect();
    if outputs.is_empty() || inits.is_empty() {
        out.resize(grid.len(), inits.to_vec());
        return Ok(out);
    }
    let speed = op.speed.clone();
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let rates = transport_rates(&speed, branch, t, &unpack(y));
        dy.copy_from_slice(&pack(&rates));
    };
    let opts = OdeOptions { rtol: 1e-13, atol: 1e-16, ..OdeOptions::default() };
    let (ys, _) = dopri5(rhs, 0.0, &pack(inits), &outputs, &opts).map_err(WaveError::Integrator)?;
    out.extend(ys.iter().map(|y| unpack(y)));
    Ok(out)
}

/// Order-0 transport along one ray for any speed:
/// `da/dt = -(phi_tt - c^2 Delta phi) / (2 phi_t) a` with `phi(0) = x.xi0`.
pub fn transport_along_ray(
    op: &HyperbolicOp2,
    branch: Dir,
    x0: &[f64],
    xi0: &[f64],
    a0: Complex64,
    grid: &[f64],
) -> Result<Vec<Complex64>, WaveError> {
    let roots = char_roots(op)?;
    let n = op.dim;
    if x0.len() != n || xi0.len() != n || norm(xi0) == 0.0 {
        return Err(WaveError::InvalidInput("seed must be a point and a nonzero covector in R^n".into()));
    }
    for &t in grid {
        op.check_time(t)?;
    }
    let base = 2 * n + 1;
    let size = base + 2 * n * n;
    let mut y0 = [x0, xi0].concat();
    y0.push(roots.mu(branch, 0.0, x0, xi0));
    for i in 0..n {
        for k in 0..n {
            y0.push(if i == k { 1.0 } else { 0.0 });
        }
    }
    y0.extend(vec![0.0; n * n]);
    // log of |a| / |a0|
    y0.push(0.0);
    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        hamilton_rhs(&roots, branch, true, t, &y[..size], &mut dy[..size]);
        let (x, xi) = (&y[..n], &y[n..2 * n]);
        let jx = DMatrix::from_row_slice(n, n, &y[base..base + n * n]);
        let jxi = DMatrix::from_row_slice(n, n, &y[base + n * n..size]);
        let Some(inv) = jx.try_inverse() else {
            dy[size] = f64::NAN;
            return;
        };
        let h = jxi * inv;
        let c = op.speed.value(t, x);
        let mu_xi = roots.mu_xi(branch, t, x, xi);
        let mu_x = roots.mu_x(branch, t, x, xi);
        let h_mu = &h * DVector::from_column_slice(&mu_xi);
        let inner: Vec<f64> = mu_x.iter().zip(h_mu.iter()).map(|(a, b)| a + b).collect();
        let phi_tt = roots.mu_t(branch, t, x, xi) + dot(&mu_xi, &inner);
        let phi_t = roots.mu(branch, t, x, xi);
        dy[size] = -(phi_tt - c * c * h.trace()) / (2.0 * phi_t);
    };
    let outputs: Vec<f64> = grid.iter().copied().filter(|&t| t > 0.0).collect();
    let mut out: Vec<Complex64> = grid.iter().take_while(|&&t| t <= 0.0).map(|_| a0).collect();
    if !outputs.is_empty() {
        let opts = OdeOptions { rtol: 1e-12, atol: 1e-14, ..OdeOptions::default() };
        let (ys, _) = dopri5(rhs, 0.0, &y0, &outputs, &opts).map_err(WaveError::Integrator)?;
        for (y, &t) in ys.iter().zip(&outputs) {
            if !y[size].is_finite() {
                return Err(WaveError::Caustic { time: t });
            }
            out.push(a0 * y[size].exp());
        }
    }
    Ok(out)
}
