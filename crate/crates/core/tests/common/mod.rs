//! Property suites shared by the proptest target and the acceptance runner.

#![allow(dead_code)]

use num_complex::Complex64;
use num_rational::Rational64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

use symscheme::numerics::linspace;
use symscheme::scalar::qc_ratio;
use symscheme::symbol::phg_sub;
use symscheme::wave::{
    build_conormal, check_parity, char_roots, direction_fan, ray_phase, solve_eikonal, vandermonde_init, CauchyData,
    HyperbolicOp2, Speed,
};
use symscheme::{dir_reflect, phg_add, phg_mul, Dir, DirPair, PolyhomExpansion, QComplex, Ring, Scalar};

pub fn runner(cases: u32) -> TestRunner {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn rational() -> impl Strategy<Value = QComplex> {
    (-9i64..=9, 1i64..=5, -4i64..=4).prop_map(|(n, d, im)| qc_ratio(Rational64::new(n, d), Rational64::new(im, 3)))
}

/// Expansions with step 1, depth 3 and anchor in `{-2, -3/2, ..., 2}`.
fn expansion_with_anchor(anchor: Rational64) -> impl Strategy<Value = PolyhomExpansion<QComplex>> {
    proptest::collection::vec((rational(), rational()), 3).prop_map(move |terms| {
        let terms = terms.into_iter().map(|(a, b)| DirPair::new(a, b)).collect();
        PolyhomExpansion::new(QComplex::from_ratio(anchor), Rational64::from_integer(1), terms).unwrap()
    })
}

fn anchor() -> impl Strategy<Value = Rational64> {
    (-4i64..=4).prop_map(|k| Rational64::new(k, 2))
}

fn expansion() -> impl Strategy<Value = PolyhomExpansion<QComplex>> {
    anchor().prop_flat_map(expansion_with_anchor)
}

fn assert_zero(e: &PolyhomExpansion<QComplex>) -> Result<(), TestCaseError> {
    prop_assert!(e.is_zero(), "{:?}", e);
    Ok(())
}

/// Commutativity, associativity, distributivity, additive inverses and
/// compatibility of reflection with products, in exact arithmetic.
pub fn graded_algebra_laws(cases: u32) -> Result<(), String> {
    let strategy = (expansion(), expansion(), expansion(), 0i64..=2).prop_flat_map(|(a, b, c, k)| {
        // d sits an integer number of steps below b so that b + d is defined
        let twice = (b.anchor().real_value().unwrap() * 2.0).round() as i64;
        (Just(a), Just(b), Just(c), expansion_with_anchor(Rational64::new(twice - 2 * k, 2)))
    });
    runner(cases)
        .run(&strategy, |(a, b, c, d)| {
            let depth = 3;
            let ab = phg_mul(&a, &b, depth).unwrap();
            let ba = phg_mul(&b, &a, depth).unwrap();
            prop_assert_eq!(&ab, &ba);
            let left = phg_mul(&ab, &c, depth).unwrap();
            let right = phg_mul(&a, &phg_mul(&b, &c, depth).unwrap(), depth).unwrap();
            prop_assert_eq!(left, right);
            let bd = phg_add(&b, &d).unwrap();
            let db = phg_add(&d, &b).unwrap();
            prop_assert_eq!(&bd, &db);
            let lhs = phg_mul(&a, &bd, depth).unwrap();
            let rhs = phg_add(&phg_mul(&a, &b, depth).unwrap(), &phg_mul(&a, &d, depth).unwrap()).unwrap();
            assert_zero(&phg_sub(&lhs, &rhs).unwrap())?;
            let assoc_l = phg_add(&phg_add(&b, &d).unwrap(), &b).unwrap();
            let assoc_r = phg_add(&b, &phg_add(&d, &b).unwrap()).unwrap();
            prop_assert_eq!(assoc_l, assoc_r);
            assert_zero(&phg_add(&a, &a.neg()).unwrap())?;
            prop_assert_eq!(dir_reflect(&ab), phg_mul(&dir_reflect(&a), &dir_reflect(&b), depth).unwrap());
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `sum_h mu_h^p a_h` reproduces the data to `1e-12` relative for `m <= 5`.
pub fn vandermonde_recomposition(cases: u32) -> Result<(), String> {
    let strategy = (1usize..=5).prop_flat_map(|m| {
        (
            proptest::collection::vec((-0.3f64..0.3, -0.3f64..0.3), m),
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m),
            0.5f64..3.0,
        )
    });
    runner(cases)
        .run(&strategy, |(jitter, amps, scale)| {
            let m = jitter.len();
            let roots: Vec<Complex64> = jitter
                .iter()
                .enumerate()
                .map(|(h, (re, im))| Complex64::new(scale * (h as f64 - (m as f64 - 1.0) / 2.0 + re), scale * im))
                .collect();
            let amps: Vec<Complex64> = amps.iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
            let data: Vec<Complex64> =
                (0..m).map(|p| roots.iter().zip(&amps).map(|(r, a)| r.powu(p as u32) * a).sum()).collect();
            let solved = vandermonde_init(&roots, &data).map_err(|e| TestCaseError::fail(e.to_string()))?;
            for p in 0..m {
                let back: Complex64 = roots.iter().zip(&solved).map(|(r, a)| r.powu(p as u32) * a).sum();
                let size = roots.iter().zip(&solved).map(|(r, a)| (r.powu(p as u32) * a).norm()).sum::<f64>().max(1e-300);
                prop_assert!((back - data[p]).norm() <= 1e-12 * size, "p = {}: {} vs {}", p, back, data[p]);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

fn time_speed() -> impl Strategy<Value = Speed> {
    (0.0f64..1.0, 0.0f64..0.5).prop_map(|(a, b)| Speed::TimePoly(vec![1.0, a, b]))
}

/// Degree bookkeeping: expansions, roots, phases and amplitudes scale with the
/// stated homogeneity in `xi`.
pub fn homogeneity(cases: u32) -> Result<(), String> {
    let strategy = (expansion(), time_speed(), 0.1f64..10.0, 0.2f64..5.0, -2.0f64..2.0, -3i64..=1, 0.0f64..1.0);
    runner(cases)
        .run(&strategy, |(e, speed, lambda, r, x, mu_bar, t)| {
            for j in 0..3 {
                let mut single = PolyhomExpansion::zero(e.anchor().clone(), e.step(), 3);
                single.set_term(j, e.terms()[j].clone());
                let deg = single.degree(j).to_c64().re;
                for dir in Dir::BOTH {
                    let base = single.sum_terms(dir, r, 3);
                    let scaled = single.sum_terms(dir, lambda * r, 3);
                    prop_assert!((scaled - base * lambda.powf(deg)).norm() <= 1e-12 * scaled.norm().max(1e-300));
                }
            }
            let op = HyperbolicOp2::new(1, speed, 1.0).unwrap();
            let roots = char_roots(&op).unwrap();
            let xi = [r];
            let big = [lambda * r];
            for branch in Dir::BOTH {
                let m1 = roots.mu(branch, t, &[x], &xi);
                prop_assert!((roots.mu(branch, t, &[x], &big) - lambda * m1).abs() <= 1e-12 * (lambda * m1).abs());
                let phase = solve_eikonal(&op, branch, &[t]).unwrap();
                let p1 = phase.eval(t, &[x], &xi).unwrap();
                let p2 = phase.eval(t, &[x], &big).unwrap();
                prop_assert!((p2 - lambda * p1).abs() <= 1e-12 * (1.0 + (lambda * p1).abs()));
            }
            let fan = direction_fan(1, 1).unwrap();
            let data = CauchyData::from_fn(3, &fan, |j, w| (Complex64::new(w[0], j as f64), Complex64::new(1.0, -w[0])));
            let sol = build_conormal(&op, Rational64::from_integer(mu_bar), data, fan, &[t]).unwrap();
            for branch in Dir::BOTH {
                let a = sol.amplitude(branch);
                for j in 0..3 {
                    let v1 = a.eval(j, 0, 0, &xi);
                    let v2 = a.eval(j, 0, 0, &big);
                    let expect = v1 * lambda.powf((mu_bar - j as i64) as f64);
                    prop_assert!((v2 - expect).norm() <= 1e-12 * expect.norm().max(1e-300));
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// `dir_reflect` is an involution, and data with the transmission symmetry
/// produce amplitudes whose parity defects stay below `1e-10` for all times.
pub fn parity_involution(cases: u32) -> Result<(), String> {
    let coeffs = proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 4);
    let strategy = (expansion(), time_speed(), -3i64..=1, 1usize..=4, coeffs);
    runner(cases)
        .run(&strategy, |(e, speed, mu_bar, depth, coeffs)| {
            prop_assert_eq!(dir_reflect(&dir_reflect(&e)), e.clone());
            let op = HyperbolicOp2::new(1, speed, 1.5).unwrap();
            let fan = direction_fan(1, 1).unwrap();
            // g0_j(-w) = (-1)^{mu_bar - j} g0_j(w), g1_j with the opposite sign
            let data = CauchyData::from_fn(depth, &fan, |j, w| {
                let (a, b, c, d) = coeffs[j];
                let s = if (mu_bar - j as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                let g0 = Complex64::new(a, b) * if w[0] > 0.0 { 1.0 } else { s };
                let g1 = Complex64::new(c, d) * if w[0] > 0.0 { 1.0 } else { -s };
                (g0, g1)
            });
            let sol = build_conormal(&op, Rational64::from_integer(mu_bar), data, fan, &linspace(0.0, 1.5, 7)).unwrap();
            let report = check_parity(&sol, depth).unwrap();
            prop_assert!(report.max_defect() <= 1e-10, "{:?}", report);
            Ok(())
        })
        .map_err(|e| e.to_string())
}

/// Ray-built phases for speeds independent of `x` agree with the closed form.
pub fn ray_phase_matches_closed_form(speed: Speed, dim: usize, samples: &[(f64, Vec<f64>, Vec<f64>)]) -> Result<f64, String> {
    let op = HyperbolicOp2::new(dim, speed, 2.0).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for branch in Dir::BOTH {
        let grid: Vec<f64> = samples.iter().map(|s| s.0).collect();
        let rays = ray_phase(&op, branch, &grid).map_err(|e| e.to_string())?;
        let closed = solve_eikonal(&op, branch, &grid).map_err(|e| e.to_string())?;
        for (t, x, xi) in samples {
            let a = rays.eval(*t, x, xi).map_err(|e| e.to_string())?;
            let b = closed.eval(*t, x, xi).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).abs());
        }
    }
    Ok(worst)
}

pub fn q(n: i64, d: i64) -> QComplex {
    QComplex::from_ratio(Rational64::new(n, d))
}

pub fn is_zero(x: &QComplex) -> bool {
    Ring::is_zero(x)
}
