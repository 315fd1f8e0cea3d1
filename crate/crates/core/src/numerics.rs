//! Numerical building blocks: adaptive Dormand–Prince integration, finite
//! difference weights, Gauss–Legendre rules, Filon-type oscillatory panels and
//! polynomial roots.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Tolerances and limits for [`dopri5`].
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-12, atol: 1e-14, max_steps: 500_000, initial_step: None }
    }
}

#[derive(Clone, Debug, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

fn axpy(out: &mut [f64], y: &[f64], h: f64, ks: &[(&[f64], f64)]) {
    for i in 0..out.len() {
        let mut acc = 0.0;
        for (k, a) in ks {
            acc += a * k[i];
        }
        out[i] = y[i] + h * acc;
    }
}

/// Integrates `y' = f(t, y)` from `t0` and returns the state at each of
/// `outputs` (monotone in the direction of integration). Steps are clipped so
/// that every output time is hit exactly; no interpolation is involved.
pub fn dopri5<F>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    outputs: &[f64],
    opts: &OdeOptions,
) -> Result<(Vec<Vec<f64>>, OdeStats), String>
where
    F: FnMut(f64, &[f64], &mut [f64]),
{
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut results = Vec::with_capacity(outputs.len());
    let Some(&last) = outputs.last() else {
        return Ok((results, stats));
    };
    let dir = if last >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    f(t, &y, &mut k1);
    stats.evaluations += 1;

    let span = (last - t0).abs();
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let rms = |v: &[f64]| {
            let s: f64 = v.iter().zip(&y).map(|(a, yi)| (a / (opts.atol + opts.rtol * yi.abs())).powi(2)).sum();
            (s / n.max(1) as f64).sqrt()
        };
        let (d0, d1) = (rms(&y), rms(&k1));
        let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        guess.min(span.max(1e-12))
    });
    let mut err_prev: f64 = 1e-4;

    for &target in outputs {
        if (target - t) * dir < 0.0 {
            return Err(format!("output time {target} is behind the integration front {t}"));
        }
        while (target - t) * dir > 0.0 {
            if stats.accepted + stats.rejected >= opts.max_steps {
                return Err(format!("step limit reached at t = {t}"));
            }
            let remaining = (target - t).abs();
            let hit = h >= remaining * (1.0 - 1e-12);
            let hs = if hit { remaining } else { h };
            let step = hs * dir;
            axpy(&mut tmp, &y, step, &[(&k1, A21)]);
            f(t + C2 * step, &tmp, &mut k2);
            axpy(&mut tmp, &y, step, &[(&k1, A31), (&k2, A32)]);
            f(t + C3 * step, &tmp, &mut k3);
            axpy(&mut tmp, &y, step, &[(&k1, A41), (&k2, A42), (&k3, A43)]);
            f(t + C4 * step, &tmp, &mut k4);
            axpy(&mut tmp, &y, step, &[(&k1, A51), (&k2, A52), (&k3, A53), (&k4, A54)]);
            f(t + C5 * step, &tmp, &mut k5);
            axpy(&mut tmp, &y, step, &[(&k1, A61), (&k2, A62), (&k3, A63), (&k4, A64), (&k5, A65)]);
            f(t + step, &tmp, &mut k6);
            axpy(&mut y_new, &y, step, &[(&k1, B1), (&k3, B3), (&k4, B4), (&k5, B5), (&k6, B6)]);
            let t_new = if hit { target } else { t + step };
            f(t_new, &y_new, &mut k7);
            stats.evaluations += 6;

            let mut err = 0.0;
            for i in 0..n {
                let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / n.max(1) as f64).sqrt();
            if !err.is_finite() {
                return Err(format!("non-finite state near t = {t}"));
            }
            if err <= 1.0 {
                stats.accepted += 1;
                t = t_new;
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                // PI controller
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                err_prev = err.max(1e-4);
                let grown = hs * fac.clamp(0.2, 5.0);
                h = if hit { h.max(grown) } else { grown };
            } else {
                stats.rejected += 1;
                h = hs * (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            }
            if h < 1e-15 * t.abs().max(span).max(1e-300) {
                return Err(format!("step size underflow at t = {t}"));
            }
        }
        results.push(y.clone());
    }
    Ok((results, stats))
}

/// Packs complex values as interleaved real/imaginary parts.
pub fn pack(values: &[Complex64]) -> Vec<f64> {
    values.iter().flat_map(|z| [z.re, z.im]).collect()
}

pub fn unpack(values: &[f64]) -> Vec<Complex64> {
    values.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Fornberg weights for the `order`-th derivative at `x0` from nodes `xs`.
pub fn fornberg_weights(x0: f64, xs: &[f64], order: usize) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Legendre polynomials `P_0..P_{n-1}` at `x`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let (mut p0, mut p1) = (1.0, x);
    for k in 0..n {
        match k {
            0 => out.push(1.0),
            1 => out.push(x),
            _ => {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
                out.push(p2);
            }
        }
    }
    out
}

/// Spherical Bessel functions `j_0..j_{n-1}` at `w` by Miller's downward
/// recurrence, normalized with `sum (2k+1) j_k^2 = 1`.
pub fn spherical_bessel(n: usize, w: f64) -> Vec<f64> {
    let aw = w.abs();
    if aw < 1e-8 {
        let mut out = vec![0.0; n];
        if n > 0 {
            out[0] = 1.0 - w * w / 6.0;
        }
        if n > 1 {
            out[1] = w / 3.0;
        }
        return out;
    }
    let start = n + (aw as usize) + 40 + (aw.sqrt() as usize) * 4;
    let mut vals = vec![0.0; start + 2];
    vals[start + 1] = 0.0;
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = (2 * k + 1) as f64 / aw * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let peak = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let norm: f64 = vals.iter().take(start + 1).enumerate().map(|(k, v)| (2 * k + 1) as f64 * (v / peak).powi(2)).sum();
    let mut scale = 1.0 / (norm.sqrt() * peak);
    // the sign of the normalized sequence is fixed by j_0 = sin(w)/w
    let j0 = aw.sin() / aw;
    let j1 = aw.sin() / (aw * aw) - aw.cos() / aw;
    let reference = if j0.abs() > j1.abs() { j0 * vals[0] } else { j1 * vals[1] };
    if reference < 0.0 {
        scale = -scale;
    }
    (0..n)
        .map(|k| {
            let v = vals[k] * scale;
            // j_k is odd for odd k
            if w < 0.0 && k % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .collect()
}

/// Filon-type rule on one panel: `int_a^b e^{i omega r} f(r) dr` with `f`
/// expanded in Legendre polynomials and the oscillatory moments
/// `int_{-1}^{1} e^{i w x} P_k(x) dx = 2 i^k j_k(w)` taken exactly.
pub struct FilonPanel {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    legendre: Vec<Vec<f64>>,
}

impl FilonPanel {
    pub fn new(points: usize) -> Self {
        let (nodes, weights) = gauss_legendre(points);
        let legendre = nodes.iter().map(|&x| legendre_values(points, x)).collect();
        FilonPanel { nodes, weights, legendre }
    }

    pub fn integrate(&self, a: f64, b: f64, omega: f64, f: impl Fn(f64) -> Complex64) -> Complex64 {
        let n = self.nodes.len();
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let values: Vec<Complex64> = self.nodes.iter().map(|&x| f(mid + half * x)).collect();
        let w = omega * half;
        let bessel = spherical_bessel(n, w);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut ik = Complex64::new(1.0, 0.0);
        for k in 0..n {
            let mut coef = Complex64::new(0.0, 0.0);
            for i in 0..n {
                coef += values[i] * (self.weights[i] * self.legendre[i][k]);
            }
            coef *= (2 * k + 1) as f64 / 2.0;
            acc += coef * ik * (2.0 * bessel[k]);
            ik *= Complex64::new(0.0, 1.0);
        }
        acc * half * Complex64::new(0.0, omega * mid).exp()
    }
}

/// Roots of `sum_k coeffs[k] z^k` (highest coefficient nonzero) from the
/// companion matrix eigenvalues, polished by Newton iteration.
pub fn polynomial_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>, String> {
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    if lead.norm() == 0.0 {
        return Err("leading coefficient vanishes".into());
    }
    let mut companion = DMatrix::<Complex64>::zeros(deg, deg);
    for i in 1..deg {
        companion[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        companion[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let eig = companion
        .clone()
        .try_schur(1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| "companion eigenvalue iteration did not converge".to_string())?;
    let mut roots: Vec<Complex64> = eig.iter().copied().collect();
    for r in roots.iter_mut() {
        for _ in 0..50 {
            let (p, dp) = horner(coeffs, *r);
            if dp.norm() == 0.0 {
                break;
            }
            let step = p / dp;
            *r -= step;
            if step.norm() <= 1e-16 * r.norm().max(1.0) {
                break;
            }
        }
    }
    Ok(roots)
}

/// Value and derivative of a polynomial by Horner's rule.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Uniform grid of `n >= 2` points on `[a, b]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Geometric grid of `n >= 2` points on `[a, b]`, `0 < a < b`.
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    linspace(la, lb, n).into_iter().map(f64::exp).collect()
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
