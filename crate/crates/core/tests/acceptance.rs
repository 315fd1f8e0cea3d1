//! Acceptance runner: one PASS/FAIL line per criterion, nonzero exit on failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{graded_algebra_laws, homogeneity, parity_involution, q, vandermonde_recomposition};
use symscheme::circle::{
    compose_symbols, parametrix, parametrix_direct, remainder_probe, CircleProblem, CircleSymbol, QuantizedAction,
    TrigPoly, TrigRational,
};
use symscheme::numerics::{linspace, OdeOptions};
use symscheme::ode::{build_fundamental, conjugate_expand, integrate, series_derivatives, HalfLineOperator, NormGrid, OdeProblem};
use symscheme::scalar::{powi, qc_ratio};
use symscheme::scheme::{asymptotic_sum, solve_to_order, ExpansionTerm, SumOptions};
use symscheme::wave::{
    build_green, check_parity, jump_across_cone, light_cone, ray_phase, HyperbolicOp2, QuadratureConfig, Speed,
};
use symscheme::{Dir, DirPair, ExcisionCutoff, QComplex, Ring, Scalar};

type Outcome = Result<String, String>;

fn random_q(rng: &mut ChaCha8Rng) -> QComplex {
    let re = Rational64::new(rng.gen_range(-12..=12), rng.gen_range(1..=6));
    let im = Rational64::new(rng.gen_range(-6..=6), rng.gen_range(1..=4));
    qc_ratio(re, im)
}

fn int(n: i64) -> QComplex {
    QComplex::from_i64(n)
}

/// `l_k(tau) = [k = 0] tau^m + sum_r a_{r,k} tau^{m-r}` and its derivatives.
fn char_poly(op: &HalfLineOperator<QComplex>, k: usize, tau: &QComplex, deriv: u32) -> QComplex {
    let m = op.order();
    let mut total = QComplex::zero();
    let mut add = |coeff: QComplex, power: usize| {
        if (power as u32) < deriv {
            return;
        }
        let falling = (0..deriv).fold(1i64, |acc, i| acc * (power as i64 - i as i64));
        let term = coeff.mul(&int(falling)).mul(&powi(tau, power as u32 - deriv));
        total = total.add(&term);
    };
    if k == 0 {
        add(QComplex::one(), m);
    }
    for r in 1..=m {
        add(op.a(r, k), m - r);
    }
    total
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let lstars = [Rational64::new(0, 1), Rational64::new(1, 2), Rational64::new(1, 1), Rational64::new(3, 2)];
    for case in 0..50 {
        let m = rng.gen_range(1..=4usize);
        let lstar = lstars[rng.gen_range(0..4)];
        let table: Vec<Vec<QComplex>> = (0..m).map(|_| (0..3).map(|_| random_q(&mut rng)).collect()).collect();
        let op = HalfLineOperator::from_table(m, lstar, &table).map_err(|e| e.to_string())?;
        let mu = random_q(&mut rng);
        let delta = random_q(&mut rng);
        let e = conjugate_expand(&op, &mu, &delta, 2);
        let e0 = char_poly(&op, 0, &mu, 0);
        // -i [delta l0'(mu) + l* mu l0''(mu) / 2 + i l1(mu)]
        let half_lstar = QComplex::from_ratio(lstar / 2);
        let inner = delta
            .mul(&char_poly(&op, 0, &mu, 1))
            .add(&half_lstar.mul(&mu).mul(&char_poly(&op, 0, &mu, 2)))
            .add(&QComplex::imag_unit().mul(&char_poly(&op, 1, &mu, 0)));
        let e1 = QComplex::imag_unit().neg().mul(&inner);
        if e[0] != e0 || e[1] != e1 {
            return Err(format!("case {case}: m = {m}, l* = {lstar}: got ({}, {}), expected ({}, {})", e[0].render(), e[1].render(), e0.render(), e1.render()));
        }
    }
    Ok("50 operators, e0 and e1 exact".into())
}

fn airy() -> HalfLineOperator<QComplex> {
    HalfLineOperator::from_table(2, Rational64::new(1, 2), &[vec![q(0, 1)], vec![q(-1, 1)]]).unwrap()
}

fn criterion_2() -> Outcome {
    let op = airy();
    let sol = build_fundamental(&op, &q(1, 1), 6).map_err(|e| e.to_string())?;
    if sol.delta != q(-1, 4) {
        return Err(format!("Delta = {}", sol.delta.render()));
    }
    let data = series_derivatives(&sol, &op, 100.0, 6, 2);
    let outputs: Vec<f64> = linspace(100.0, 20.0, 81);
    let states = integrate(&op, 100.0, &data, &outputs, &OdeOptions::default()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (t, state) in outputs.iter().zip(&states) {
        let series = series_derivatives(&sol, &op, *t, 6, 1)[0];
        worst = worst.max((state[0] - series).norm() / series.norm());
    }
    if worst <= 1e-6 {
        Ok(format!("max relative error {worst:.2e} on [20, 100]"))
    } else {
        Err(format!("max relative error {worst:.2e} > 1e-6"))
    }
}

fn transport_symbol() -> CircleSymbol {
    CircleSymbol::xi_power(1, TrigPoly::constant(int(2)).add(&TrigPoly::sin()))
}

fn criterion_3() -> Outcome {
    let p = transport_symbol();
    let qs = parametrix(&p, 4).map_err(|e| e.to_string())?;
    let out = compose_symbols(&p, &qs, 4).map_err(|e| e.to_string())?;
    if out.component(0) != DirPair::even(TrigRational::one()) || (1..4).any(|j| !out.component(j).is_zero()) {
        return Err("p # q differs from 1 through order -3".into());
    }
    let action = QuantizedAction::new(1024, 511, ExcisionCutoff::new(1.0)).map_err(|e| e.to_string())?;
    let table = remainder_probe(&p, &qs, 4, &[16, 32, 64, 128, 256], &action).map_err(|e| e.to_string())?;
    if table.slope <= -3.7 {
        Ok(format!("exact through order -3, remainder slope {:.3}", table.slope))
    } else {
        Err(format!("remainder slope {:.3} > -3.7", table.slope))
    }
}

fn linear_speed(dim: usize) -> Result<HyperbolicOp2, String> {
    HyperbolicOp2::new(dim, Speed::TimePoly(vec![1.0, 0.5]), 2.0).map_err(|e| e.to_string())
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for dim in [1usize, 3] {
        let op = linear_speed(dim)?;
        let times = [0.25, 0.5, 1.0, 1.5];
        for branch in Dir::BOTH {
            let phase = ray_phase(&op, branch, &times).map_err(|e| e.to_string())?;
            for &t in &times {
                for _ in 0..4 {
                    let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let xi: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
                    let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let dot: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
                    let expect = dot + branch.sign() as f64 * (t + t * t / 4.0) * r;
                    let got = phase.eval(t, &x, &xi).map_err(|e| e.to_string())?;
                    worst = worst.max((got - expect).abs());
                }
            }
        }
    }
    let mut radius_err: f64 = 0.0;
    for dim in [1usize, 3] {
        let cone = light_cone(&linear_speed(dim)?, 1.0, 8).map_err(|e| e.to_string())?;
        radius_err = cone.radii.iter().fold(radius_err, |acc, r| acc.max((r - 1.25).abs()));
    }
    if worst <= 1e-8 && radius_err <= 1e-8 {
        Ok(format!("phase error {worst:.2e}, cone radius error {radius_err:.2e}"))
    } else {
        Err(format!("phase error {worst:.2e}, cone radius error {radius_err:.2e} (limit 1e-8)"))
    }
}

fn criterion_5() -> Outcome {
    let op = linear_speed(1)?;
    let mut sol = build_green(&op, 4, 1, &linspace(0.0, 2.0, 41)).map_err(|e| e.to_string())?;
    let report = check_parity(&sol, 4).map_err(|e| e.to_string())?;
    if report.max_defect() > 1e-10 {
        return Err(format!("defects {:?} exceed 1e-10", report.defects));
    }
    sol.negate_amplitude(Dir::Minus, 1);
    let broken = check_parity(&sol, 4).map_err(|e| e.to_string())?;
    if broken.defects[1] >= 1.0 {
        Ok(format!("max d_j = {:.2e}, corrupted d_1 = {:.3}", report.max_defect(), broken.defects[1]))
    } else {
        Err(format!("corrupted amplitude gives d_1 = {:.3} < 1", broken.defects[1]))
    }
}

fn criterion_6() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut parts = Vec::new();
    for c in [1.0, 2.0] {
        let op = HyperbolicOp2::new(1, Speed::Constant(c), 2.0).map_err(|e| e.to_string())?;
        let sol = build_green(&op, 4, 1, &linspace(0.0, 2.0, 21)).map_err(|e| e.to_string())?;
        let est = jump_across_cone(&sol, 1.0, &[0.2, 0.1, 0.05, 0.025], &cfg).map_err(|e| e.to_string())?;
        let expect = 0.5 / c;
        let err = (est.jump - Complex64::new(expect, 0.0)).norm();
        if err > 1e-3 {
            return Err(format!("c = {c}: jump {} vs {expect}", est.jump));
        }
        parts.push(format!("c = {c}: {:.6}", est.jump.re));
    }
    Ok(parts.join(", "))
}

fn criterion_7() -> Outcome {
    let op = airy();
    let problem = OdeProblem::new(op.clone(), q(1, 1), 6, NormGrid::default(), None).map_err(|e| e.to_string())?;
    let (terms, _) = solve_to_order(&problem, &problem.zero_target(), 6).map_err(|e| e.to_string())?;
    let direct = build_fundamental(&op, &q(1, 1), 6).map_err(|e| e.to_string())?.coefficients();
    for (j, term) in terms.iter().enumerate() {
        if term.element.coefficient(j) != direct[j] {
            return Err(format!("ODE coefficient {j} differs"));
        }
    }
    let p = transport_symbol();
    let problem = CircleProblem::new(p.clone(), 4).map_err(|e| e.to_string())?;
    let (terms, _) = solve_to_order(&problem, &CircleSymbol::identity(), 4).map_err(|e| e.to_string())?;
    let direct = parametrix_direct(&p, 4).map_err(|e| e.to_string())?;
    for (j, term) in terms.iter().enumerate() {
        if term.element.symbol.component(j) != direct.component(j) {
            return Err(format!("parametrix component {j} differs"));
        }
    }
    if parametrix(&p, 4).map_err(|e| e.to_string())? != direct {
        return Err("parametrix differs from parametrix_direct".into());
    }
    Ok("ODE coefficients c_0..c_5 and parametrix q_0..q_3 identical".into())
}

/// Terms `(j, A_j, c)` with `level_norm(l) = sum_{j > l} A_j c^{l - j}`.
#[derive(Clone, Debug)]
struct Synthetic(Vec<(usize, f64, f64)>);

impl symscheme::scheme::Linear for Synthetic {
    fn add(&self, other: &Self) -> Self {
        Synthetic([self.0.clone(), other.0.clone()].concat())
    }
    fn neg(&self) -> Self {
        Synthetic(self.0.iter().map(|&(j, a, c)| (j, -a, c)).collect())
    }
}

fn synthetic_norm(l: usize, u: &Synthetic) -> f64 {
    u.0.iter().filter(|(j, _, _)| *j > l).map(|&(j, a, c)| a * c.powi(l as i32 - j as i32)).sum::<f64>().abs()
}

fn criterion_8() -> Outcome {
    let terms: Vec<ExpansionTerm<Synthetic>> = (0..12)
        .map(|j| ExpansionTerm { level: j, element: Synthetic(vec![(j, 10f64.powi(j as i32), 1.0)]), level_norms: vec![] })
        .collect();
    let cutoff = |c: f64, u: &Synthetic| Synthetic(u.0.iter().map(|&(j, a, _)| (j, a, c)).collect());
    let (_, schedule, report) =
        asymptotic_sum(&terms, Synthetic(vec![]), cutoff, synthetic_norm, None, SumOptions::default()).map_err(|e| e.to_string())?;
    for &(big_j, norm, _) in &report.tails {
        if big_j <= 8 && norm > 2f64.powi(1 - big_j as i32) {
            return Err(format!("tail at J = {big_j} is {norm:e} > 2^{}", 1 - big_j as i32));
        }
    }
    if !report.certified() {
        return Err("tail report not certified".into());
    }
    Ok(format!("tails certified for J <= 8, cutoffs up to {}", schedule.cutoffs.last().copied().unwrap_or(1.0)))
}

fn criterion_9() -> Outcome {
    graded_algebra_laws(200).map_err(|e| format!("graded algebra: {e}"))?;
    vandermonde_recomposition(200).map_err(|e| format!("Vandermonde: {e}"))?;
    homogeneity(200).map_err(|e| format!("homogeneity: {e}"))?;
    parity_involution(200).map_err(|e| format!("parity: {e}"))?;
    Ok("4 suites x 200 cases".into())
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome, Option<Duration>); 9] = [
        (1, criterion_1, Some(Duration::from_secs(5))),
        (2, criterion_2, Some(Duration::from_secs(10))),
        (3, criterion_3, Some(Duration::from_secs(30))),
        (4, criterion_4, None),
        (5, criterion_5, None),
        (6, criterion_6, Some(Duration::from_secs(60))),
        (7, criterion_7, None),
        (8, criterion_8, None),
        (9, criterion_9, None),
    ];
    let mut failed = 0;
    for (n, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(msg), Some(limit)) if elapsed > limit => Err(format!("{msg}; runtime {elapsed:.2?} exceeds {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(msg) => println!("criterion {n}: PASS ({msg}; {elapsed:.2?})"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n}: FAIL ({msg}; {elapsed:.2?})");
            }
        }
    }
    println!("acceptance: {} of 9 passed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
