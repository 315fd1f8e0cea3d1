use num_complex::Complex64;
use num_rational::Rational64;

use super::*;
use crate::numerics::{gauss_legendre, linspace};

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

fn linear_speed(dim: usize) -> HyperbolicOp2 {
    HyperbolicOp2::new(dim, Speed::TimePoly(vec![1.0, 0.5]), 2.0).unwrap()
}

fn constant(dim: usize, c: f64) -> HyperbolicOp2 {
    HyperbolicOp2::new(dim, Speed::Constant(c), 2.0).unwrap()
}

#[test]
fn roots_and_reflection() {
    let roots = char_roots(&linear_speed(2)).unwrap();
    let (x, xi) = ([0.3, -1.0], [3.0, 4.0]);
    assert!((roots.mu(Dir::Plus, 1.0, &x, &xi) - 1.5 * 5.0).abs() < 1e-14);
    assert_eq!(roots.mu(Dir::Plus, 1.0, &x, &[-3.0, -4.0]), -roots.mu(Dir::Minus, 1.0, &x, &xi));
    assert!((roots.gap - 2.0).abs() < 1e-14);
    let flat = char_roots(&constant(1, 1.0)).unwrap();
    assert_eq!(flat.mu(Dir::Minus, 0.7, &[2.0], &[-3.0]), -3.0);
}

#[test]
fn slow_speeds_are_rejected() {
    let err = HyperbolicOp2::new(1, Speed::TimePoly(vec![1.0, -1.0]), 1.0).unwrap_err();
    assert!(matches!(err, WaveError::Hyperbolicity { .. }));
    let bad = Speed::SpaceTime(vec![Monomial { coeff: 1.0, t_pow: 0, x_pows: vec![0] }]);
    assert!(HyperbolicOp2::new(2, bad, 1.0).is_err());
}

#[test]
fn speed_taylor_matches_polynomial() {
    let s = Speed::TimePoly(vec![1.0, 0.5, -0.25, 0.125]);
    let t0 = 0.7;
    let jet = s.time_taylor(t0, 5).unwrap();
    for h in [0.1, -0.3] {
        let direct = s.value(t0 + h, &[]);
        let series: f64 = jet.iter().enumerate().map(|(r, a)| a * h.powi(r as i32)).sum();
        assert!((direct - series).abs() < 1e-14);
    }
    assert!((s.cumulative(2.0).unwrap() - (2.0 + 1.0 - 2.0 / 3.0 + 0.5)).abs() < 1e-14);
}

#[test]
fn rays_for_linear_speed() {
    let op = linear_speed(2);
    let grid = linspace(0.0, 2.0, 9);
    let xi0 = [3.0, -4.0];
    for branch in Dir::BOTH {
        let ray = trace_bicharacteristic(&op, &[0.5, 0.25], &xi0, branch, &grid).unwrap();
        assert!(ray.stats.tau_residual < 1e-11);
        for s in &ray.samples {
            let big_c = s.t + s.t * s.t / 4.0;
            let expect = [0.5 - branch.sign() as f64 * big_c * 0.6, 0.25 + branch.sign() as f64 * big_c * 0.8];
            assert!((s.x[0] - expect[0]).abs() < 1e-11 && (s.x[1] - expect[1]).abs() < 1e-11);
            assert_eq!(s.xi, xi0.to_vec());
        }
    }
}

#[test]
fn ray_reflection_symmetry() {
    let m = |coeff, x_pows: Vec<u32>| Monomial { coeff, t_pow: 0, x_pows };
    let speed = Speed::SpaceTime(vec![m(1.0, vec![0, 0]), m(0.1, vec![2, 0]), m(0.05, vec![0, 2])]);
    let op = HyperbolicOp2::new(2, speed, 1.0).unwrap();
    let grid = linspace(0.0, 1.0, 5);
    let a = trace_bicharacteristic(&op, &[0.2, -0.1], &[1.0, 2.0], Dir::Plus, &grid).unwrap();
    let b = trace_bicharacteristic(&op, &[0.2, -0.1], &[-1.0, -2.0], Dir::Minus, &grid).unwrap();
    for (p, q) in a.samples.iter().zip(&b.samples) {
        assert!(p.x.iter().zip(&q.x).all(|(u, v)| (u - v).abs() < 1e-11));
    }
    assert!(a.stats.tau_residual < 1e-10);
}

#[test]
fn ray_errors() {
    let op = constant(1, 1.0);
    assert!(matches!(trace_bicharacteristic(&op, &[0.0], &[0.0], Dir::Plus, &[1.0]), Err(WaveError::VanishingFrequency(_))));
    assert!(trace_bicharacteristic(&op, &[0.0], &[1.0], Dir::Plus, &[3.0]).is_err());
}

#[test]
fn closed_and_ray_phases_agree() {
    let op = linear_speed(2);
    let grid = linspace(0.0, 2.0, 5);
    for branch in Dir::BOTH {
        let closed = solve_eikonal(&op, branch, &grid).unwrap();
        assert_eq!(closed.repr, PhaseRepr::Closed);
        let rays = ray_phase(&op, branch, &grid).unwrap();
        for &t in &[0.0, 0.5, 1.3, 2.0] {
            for (x, xi) in [([0.3, -0.2], [1.0, 0.5]), ([-1.0, 2.0], [-2.0, 0.1])] {
                let exact = x[0] * xi[0] + x[1] * xi[1] + branch.sign() as f64 * (t + t * t / 4.0) * norm(&xi);
                assert!((closed.eval(t, &x, &xi).unwrap() - exact).abs() < 1e-14);
                let p = rays.point(t, &x, &xi).unwrap();
                assert!((p.value - exact).abs() < 1e-8, "{} vs {exact}", p.value);
                assert!(p.eikonal_residual.abs() < 1e-8);
                let doubled = rays.eval(t, &x, &[2.0 * xi[0], 2.0 * xi[1]]).unwrap();
                assert!((doubled - 2.0 * p.value).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn space_time_phase_is_consistent() {
    let m = |coeff, x_pows: Vec<u32>| Monomial { coeff, t_pow: 0, x_pows };
    let speed = Speed::SpaceTime(vec![m(1.0, vec![0, 0]), m(0.1, vec![2, 0]), m(0.1, vec![1, 1]), m(0.1, vec![0, 2])]);
    let op = HyperbolicOp2::new(2, speed, 0.5).unwrap();
    let phase = solve_eikonal(&op, Dir::Plus, &[0.25, 0.5]).unwrap();
    assert_eq!(phase.repr, PhaseRepr::Rays);
    let xi = [0.6, 0.8];
    assert!((phase.eval(0.0, &[0.4, 0.1], &xi).unwrap() - (0.24 + 0.08)).abs() < 1e-14);
    for (t, x) in [(0.25, [0.1, 0.2]), (0.5, [-0.4, 0.3])] {
        let p = phase.point(t, &x, &xi).unwrap();
        assert!(p.eikonal_residual.abs() < 1e-8);
        // gradient by central differences of the phase itself
        let h = 1e-4;
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (phase.eval(t, &xp, &xi).unwrap() - phase.eval(t, &xm, &xi).unwrap()) / (2.0 * h);
            assert!((fd - p.grad[k]).abs() < 1e-7);
        }
    }
}

#[test]
fn focusing_speed_hits_a_caustic() {
    let m = |coeff, x_pows: Vec<u32>| Monomial { coeff, t_pow: 0, x_pows };
    let speed = Speed::SpaceTime(vec![m(1.0, vec![0, 0]), m(0.5, vec![0, 2])]);
    let long = HyperbolicOp2::new(2, speed.clone(), 3.0).unwrap();
    let grid = linspace(0.0, 3.0, 31);
    match solve_eikonal(&long, Dir::Plus, &grid) {
        Err(WaveError::Caustic { time }) => assert!(time > 0.5 && time <= 3.0, "{time}"),
        other => panic!("expected a caustic, got {other:?}"),
    }
    let short = HyperbolicOp2::new(2, speed, 0.3).unwrap();
    assert!(solve_eikonal(&short, Dir::Plus, &linspace(0.0, 0.3, 4)).is_ok());
}

#[test]
fn light_cone_radii() {
    let cone = light_cone(&constant(3, 1.0), 1.0, 24).unwrap();
    assert_eq!(cone.points.len(), 48);
    assert!(cone.radii.iter().all(|r| (r - 1.0).abs() < 1e-10));
    assert!(cone.injective);
    let cone = light_cone(&linear_speed(1), 1.0, 1).unwrap();
    assert!(cone.radii.iter().all(|r| (r - 1.25).abs() < 1e-10));
    assert!((cone.points[1][0] - 1.25).abs() < 1e-10);
}

#[test]
fn vandermonde_solves() {
    let (mp, mm) = (Complex64::new(2.0, 0.0), Complex64::new(-2.0, 0.0));
    let (b, c) = (Complex64::new(0.3, -1.0), Complex64::new(1.5, 0.25));
    let a = vandermonde_init(&[mp, mm], &[b, c]).unwrap();
    assert!((a[0] - (c - mm * b) / (mp - mm)).norm() < 1e-15);
    assert!((a[1] - (c - mp * b) / (mm - mp)).norm() < 1e-15);
    assert_eq!(vandermonde_init(&[mp], &[b]).unwrap(), vec![b]);
    let roots: Vec<Complex64> = [1.0, 2.0, 3.0].iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let amps = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.0), Complex64::new(0.0, 3.0)];
    let data: Vec<Complex64> = (0..3).map(|p| roots.iter().zip(&amps).map(|(r, a)| r.powu(p) * a).sum()).collect();
    let back = vandermonde_init(&roots, &data).unwrap();
    assert!(back.iter().zip(&amps).all(|(a, b)| (a - b).norm() < 1e-12));
    assert!(matches!(vandermonde_init(&[mp, mp], &[b, c]), Err(WaveError::RootCollision)));
}

#[test]
fn cauchy_init_examples() {
    let c0 = 1.5;
    let (mp, mm) = (Complex64::new(c0, 0.0), Complex64::new(-c0, 0.0));
    let (ap, am) = cauchy_init(mp, mm, Complex64::new(0.0, 0.0), i()).unwrap();
    assert!((ap - i() / (mp - mm)).norm() < 1e-15 && (am + ap).norm() < 1e-15);
    let (ap, am) = cauchy_init(mp, mm, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap();
    assert!((ap + mm / (mp - mm)).norm() < 1e-15 && (am - mp / (mp - mm)).norm() < 1e-15);
}

#[test]
fn leading_transport_conserves_wkb_energy() {
    let op = linear_speed(1);
    let grid = linspace(0.0, 2.0, 21);
    let a0 = Complex64::new(0.7, -0.2);
    for branch in Dir::BOTH {
        let table = transport_solve(&op, branch, &[a0], &grid).unwrap();
        for (row, &t) in table.iter().zip(&grid) {
            assert!((row[0] * (1.0 + t / 2.0).sqrt() - a0).norm() < 1e-10);
        }
    }
    let flat = transport_solve(&constant(1, 1.0), Dir::Plus, &[a0, a0], &grid).unwrap();
    assert!(flat.iter().all(|row| row.iter().all(|v| (v - a0).norm() < 1e-15)));
}

/// Order 1 for `c = 1 + t/2` against an RK4 solve with the closed-form source
/// `alpha_0'' = (3/16) A (1 + t/2)^{-5/2}`.
#[test]
fn first_order_transport_matches_direct_solve() {
    let op = linear_speed(1);
    let (a, b) = (Complex64::new(0.0, 0.5), Complex64::new(0.2, 0.1));
    for branch in Dir::BOTH {
        let s = branch.sign() as f64;
        let rhs = |t: f64, y: Complex64| {
            let c = 1.0 + t / 2.0;
            -0.25 / c * y + Complex64::new(0.0, s * 0.5 / c) * a * (3.0 / 16.0) * c.powf(-2.5)
        };
        let steps = 4000;
        let h = 2.0 / steps as f64;
        let mut y = b;
        for k in 0..steps {
            let t = k as f64 * h;
            let k1 = rhs(t, y);
            let k2 = rhs(t + h / 2.0, y + k1 * (h / 2.0));
            let k3 = rhs(t + h / 2.0, y + k2 * (h / 2.0));
            let k4 = rhs(t + h, y + k3 * h);
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        }
        let table = transport_solve(&op, branch, &[a, b], &[2.0]).unwrap();
        assert!((table[0][1] - y).norm() < 1e-11, "{} vs {y}", table[0][1]);
    }
}

#[test]
fn transport_along_ray_reduces_to_closed_form() {
    let op = linear_speed(2);
    let grid = linspace(0.0, 2.0, 5);
    let a = transport_along_ray(&op, Dir::Minus, &[0.1, 0.2], &[1.0, 1.0], Complex64::new(2.0, 0.0), &grid).unwrap();
    for (v, &t) in a.iter().zip(&grid) {
        assert!((v.re - 2.0 / (1.0 + t / 2.0).sqrt()).abs() < 1e-10);
    }
}

/// Space-dependent speed: the transport rate against finite differences of the
/// ray-built phase, integrated along the ray by Gauss-Legendre.
#[test]
fn transport_along_ray_matches_phase_differences() {
    let m = |coeff, x_pows: Vec<u32>| Monomial { coeff, t_pow: 0, x_pows };
    let speed = Speed::SpaceTime(vec![m(1.0, vec![0]), m(0.2, vec![2])]);
    let op = HyperbolicOp2::new(1, speed, 0.8).unwrap();
    let (x0, xi0) = ([0.3], [1.0]);
    let t_end = 0.8;
    let a = transport_along_ray(&op, Dir::Plus, &x0, &xi0, Complex64::new(1.0, 0.0), &[t_end]).unwrap();
    let phase = ray_phase(&op, Dir::Plus, &[t_end]).unwrap();
    let (nodes, weights) = gauss_legendre(12);
    let times: Vec<f64> = nodes.iter().map(|u| 0.5 * t_end * (u + 1.0)).collect();
    let mut sorted = times.clone();
    sorted.sort_by(f64::total_cmp);
    let ray = trace_bicharacteristic(&op, &x0, &xi0, Dir::Plus, &sorted).unwrap();
    let h = 1e-3;
    let mut integral = 0.0;
    for (&t, &w) in times.iter().zip(&weights) {
        let x = ray.samples.iter().find(|s| s.t == t).unwrap().x.clone();
        let p = phase.point(t, &x, &xi0).unwrap();
        let phi_tt = (phase.point(t + h, &x, &xi0).unwrap().dt - phase.point(t - h, &x, &xi0).unwrap().dt) / (2.0 * h);
        let phi_xx = (phase.point(t, &[x[0] + h], &xi0).unwrap().grad[0] - phase.point(t, &[x[0] - h], &xi0).unwrap().grad[0]) / (2.0 * h);
        let c = op.speed.value(t, &x);
        integral += 0.5 * t_end * w * (-(phi_tt - c * c * phi_xx) / (2.0 * p.dt));
    }
    assert!((a[0].re.ln() - integral).abs() < 1e-6, "{} vs {integral}", a[0].re.ln());
}

fn green(op: &HyperbolicOp2, depth: usize) -> ConormalSolution {
    build_green(op, depth, 1, &linspace(0.0, op.horizon, 21)).unwrap()
}

#[test]
fn green_leading_amplitudes() {
    for c in [1.0, 2.0] {
        let sol = green(&constant(1, c), 3);
        for d in 0..2 {
            let p = sol.amplitude(Dir::Plus).values[0][d][10];
            let m = sol.amplitude(Dir::Minus).values[0][d][10];
            assert!((p - i() / (2.0 * c)).norm() < 1e-15 && (m + i() / (2.0 * c)).norm() < 1e-15);
            assert!(sol.amplitude(Dir::Plus).values[1][d].iter().all(|v| v.norm() < 1e-15));
        }
        let report = check_parity(&sol, 3).unwrap();
        assert!(report.defects.iter().all(|&d| d == 0.0));
    }
}

#[test]
fn green_parity_for_linear_speed() {
    let sol = green(&linear_speed(1), 4);
    let report = check_parity(&sol, 4).unwrap();
    assert!(report.max_defect() <= 1e-10, "{report:?}");
    // the first correction does not vanish, so a sign flip is visible
    assert!(sol.amplitude(Dir::Plus).values[1][0].iter().any(|v| v.norm() > 1e-3));
    let mut broken = sol.clone();
    broken.negate_amplitude(Dir::Minus, 1);
    let report = check_parity(&broken, 4).unwrap();
    assert!((report.defects[1] - 2.0).abs() < 1e-12);
    assert!(report.defects[0] <= 1e-10);
}

#[test]
fn green_in_three_dimensions() {
    let op = linear_speed(3);
    let sol = green(&op, 3);
    assert_eq!(sol.fan.len(), 2);
    assert!(check_parity(&sol, 3).unwrap().max_defect() <= 1e-10);
    let deg = sol.amplitude(Dir::Plus);
    let xi = [0.0, 0.0, 1.0];
    let v1 = deg.eval(2, 0, 7, &xi);
    let v2 = deg.eval(2, 0, 7, &[0.0, 0.0, 2.5]);
    assert!((v2 - v1 * 2.5f64.powi(-3)).norm() <= 1e-12 * v1.norm());
}

#[test]
fn parity_flags_broken_data() {
    let op = constant(1, 1.0);
    let fan = direction_fan(1, 1).unwrap();
    let grid = [0.0, 1.0];
    let even = CauchyData::from_fn(2, &fan, |j, _| (Complex64::new(if j == 0 { 1.0 } else { 0.0 }, 0.0), Complex64::new(0.0, 0.0)));
    let sol = build_conormal(&op, Rational64::from_integer(0), even, fan.clone(), &grid).unwrap();
    assert!(check_parity(&sol, 2).unwrap().max_defect() < 1e-15);
    let odd = CauchyData::from_fn(2, &fan, |j, w| (Complex64::new(if j == 0 { w[0] } else { 0.0 }, 0.0), Complex64::new(0.0, 0.0)));
    let sol = build_conormal(&op, Rational64::from_integer(0), odd, fan.clone(), &grid).unwrap();
    assert!(check_parity(&sol, 2).unwrap().defects[0] >= 1.0);
    let data = CauchyData::zero(1, 2);
    let sol = build_conormal(&op, Rational64::new(1, 2), data, fan, &grid).unwrap();
    assert!(matches!(check_parity(&sol, 1), Err(WaveError::NonIntegerAnchor(_))));
}

#[test]
fn unsupported_configurations() {
    assert!(matches!(build_green(&constant(2, 1.0), 2, 2, &[0.0]), Err(WaveError::EvenDimension(2))));
    let m = Monomial { coeff: 1.0, t_pow: 0, x_pows: vec![0] };
    let op = HyperbolicOp2::new(1, Speed::SpaceTime(vec![m]), 1.0).unwrap();
    assert!(matches!(build_green(&op, 2, 1, &[0.0]), Err(WaveError::Unsupported(_))));
    assert!(matches!(transport_solve(&op, Dir::Plus, &[i()], &[0.5]), Err(WaveError::Unsupported(_))));
}

/// Excised `n = 1` Green's function: the d'Alembert solution minus the part of
/// its spectrum removed by the excision, `int (1 - chi) sin(ct|xi|)/(c|xi|) e^{ix xi} dxi/2pi`.
fn excised_dalembert(c: f64, t: f64, x: f64, cfg: &QuadratureConfig) -> f64 {
    let (nodes, weights) = gauss_legendre(40);
    let top = 2.0 * cfg.excision.scale;
    let mut low = 0.0;
    for panel in 0..16 {
        let (a, b) = (top * panel as f64 / 16.0, top * (panel + 1) as f64 / 16.0);
        for (u, w) in nodes.iter().zip(&weights) {
            let r = 0.5 * (a + b) + 0.5 * (b - a) * u;
            let g = if r == 0.0 { t } else { (c * t * r).sin() / (c * r) };
            low += 0.5 * (b - a) * w * (1.0 - cfg.excision.eval(r)) * g * (x * r).cos();
        }
    }
    let inside = if x.abs() < c * t { -0.5 / c } else { 0.0 };
    inside + low / std::f64::consts::PI
}

#[test]
fn evaluation_matches_excised_dalembert() {
    let cfg = QuadratureConfig::default();
    for c in [1.0, 2.0] {
        let sol = green(&constant(1, c), 2);
        for x in [0.3, 1.7, -2.6, 4.5] {
            let u = evaluate_solution(&sol, 1.0, &[x], &cfg).unwrap();
            let expect = excised_dalembert(c, 1.0, x, &cfg);
            assert!((u.re - expect).abs() < 1e-7 && u.im.abs() < 1e-9, "c = {c}, x = {x}: {u} vs {expect}");
        }
    }
}

#[test]
fn evaluation_is_linear() {
    let op = linear_speed(1);
    let fan = direction_fan(1, 1).unwrap();
    let grid = [0.0, 1.0];
    let data = |k: f64| CauchyData::from_fn(2, &fan, |j, _| (Complex64::new(0.0, 0.0), i() * k * (j + 1) as f64));
    let one = build_conormal(&op, Rational64::from_integer(-1), data(1.0), fan.clone(), &grid).unwrap();
    let two = build_conormal(&op, Rational64::from_integer(-1), data(2.0), fan.clone(), &grid).unwrap();
    let cfg = QuadratureConfig::default();
    let (u1, u2) = (evaluate_solution(&one, 1.0, &[0.4], &cfg).unwrap(), evaluate_solution(&two, 1.0, &[0.4], &cfg).unwrap());
    assert!((u2 - u1 * 2.0).norm() < 1e-12);
    let zero = build_conormal(&op, Rational64::from_integer(-1), CauchyData::zero(2, 2), fan, &grid).unwrap();
    assert_eq!(evaluate_solution(&zero, 1.0, &[0.4], &cfg).unwrap(), Complex64::new(0.0, 0.0));
}

#[test]
fn dalembert_jumps() {
    let cfg = QuadratureConfig::default();
    let offsets = [0.2, 0.1, 0.05, 0.025];
    for c in [1.0, 2.0] {
        let est = jump_across_cone(&green(&constant(1, c), 4), 1.0, &offsets, &cfg).unwrap();
        assert!((est.cone_point[0] - c).abs() < 1e-12);
        assert!((est.jump.re - 0.5 / c).abs() < 1e-3 && est.jump.im.abs() < 1e-6, "{est:?}");
    }
}

#[test]
fn continuous_solution_has_no_jump() {
    let op = constant(1, 1.0);
    let fan = direction_fan(1, 1).unwrap();
    let data = CauchyData::from_fn(1, &fan, |_, _| (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
    let sol = build_conormal(&op, Rational64::from_integer(-2), data, fan, &[0.0, 1.0]).unwrap();
    let est = jump_across_cone(&sol, 1.0, &[0.2, 0.1, 0.05, 0.025], &QuadratureConfig::default()).unwrap();
    assert!(est.jump.norm() < 1e-4, "{est:?}");
}

/// `n = 3`: the Green's function vanishes off the cone, so the excised value is
/// minus its low-frequency part, `(1/(2 pi^2 r c)) int (1 - chi) sin(r rho) sin(ct rho) d rho`.
#[test]
fn radial_evaluation_in_three_dimensions() {
    let c = 1.0;
    let sol = green(&constant(3, c), 2);
    let cfg = QuadratureConfig::default();
    let (nodes, weights) = gauss_legendre(40);
    for r in [0.4, 1.6, 3.0] {
        let mut low = 0.0;
        for (u, w) in nodes.iter().zip(&weights) {
            let rho = 1.0 + u;
            low += w * (1.0 - cfg.excision.eval(rho)) * (r * rho).sin() * (c * rho).sin();
        }
        let expect = low / (2.0 * std::f64::consts::PI.powi(2) * r * c);
        let u = evaluate_solution(&sol, 1.0, &[0.0, r, 0.0], &cfg).unwrap();
        assert!((u.re - expect).abs() < 1e-7 && u.im.abs() < 1e-9, "r = {r}: {u} vs {expect}");
    }
}
