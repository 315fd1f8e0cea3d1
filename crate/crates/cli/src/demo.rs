//! `scheme-demo`: the generic engine over one instantiation, with residuals by
//! number of terms and level.

use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symscheme::circle::{CircleProblem, CircleSymbol};
use symscheme::ode::{build_fundamental, char_data, HalfLineOperator, NormGrid, OdeProblem};
use symscheme::scalar::{qc_ratio, render_ratio};
use symscheme::scheme::{solve_to_order, FilteredProblem};
use symscheme::{QComplex, Ring, Scalar};

use crate::config::{DemoSpec, Instantiation, RunConfig};
use crate::error::CliError;
use crate::ode::{check_roots, parse_operator};
use crate::output::{summary, Cell, Table};
use crate::parametrix::parse_symbol;
use crate::Report;

/// Rows `(J, l, symbol zero, norm)` of `L(u_0 + ... + u_{J-1}) - f` for
/// `J, l = 0..=order`; returns the table and the number of rows with `l < J`
/// whose symbol is not exactly zero.
fn residual_table<P: FilteredProblem>(
    problem: &P,
    f: &P::Target,
    order: usize,
    zero: impl Fn(&P::TargetSymbol) -> bool,
) -> Result<(Table, usize), CliError> {
    let mut table = Table::new("residual", &["terms", "level", "symbol_zero", "norm"]);
    let mut bad = 0;
    for big_j in 0..=order {
        let (_, residual) = solve_to_order(problem, f, big_j)?;
        for l in 0..=order {
            let z = zero(&problem.target_symbol_of(l, &residual));
            if l < big_j && !z {
                bad += 1;
            }
            table.push(vec![Cell::from(big_j), Cell::from(l), Cell::from(z), Cell::from(problem.target_level_norm(l, &residual))]);
        }
    }
    Ok((table, bad))
}

fn grid(spec: &DemoSpec) -> NormGrid {
    NormGrid { t_min: spec.norm_grid.t_min, t_max: spec.norm_grid.t_max, points: spec.norm_grid.points }
}

fn ode_demo(cfg: &RunConfig, spec: &DemoSpec) -> Result<(Table, usize, Vec<String>), CliError> {
    let op = parse_operator(cfg.ode.as_ref().expect("validated"))?;
    let mu = match &spec.root {
        Some(s) => QComplex::parse(s).map_err(|e| CliError::Config(format!("scheme_demo.root: {e}")))?,
        None => {
            if !check_roots(&op)? {
                return Err(CliError::Config("the operator has irrational roots; the demo needs exact arithmetic".into()));
            }
            let data = char_data(&op)?;
            let best = data.roots.iter().filter_map(|r| r.exact).max().expect("at least one root");
            QComplex::from_ratio(best)
        }
    };
    let problem = OdeProblem::new(op, mu.clone(), cfg.order.max(1), grid(spec), None)?;
    let (table, bad) = residual_table(&problem, &problem.zero_target(), cfg.order, |s| Ring::is_zero(s))?;
    let lines = vec![format!("root {}, Delta = {}", mu.render(), problem.delta().render())];
    Ok((table, bad, lines))
}

fn circle_demo(cfg: &RunConfig) -> Result<(Table, usize, Vec<String>), CliError> {
    let p = parse_symbol(cfg.parametrix.as_ref().expect("validated"))?;
    let problem = CircleProblem::new(p, cfg.order.max(1))?;
    let (table, bad) = residual_table(&problem, &CircleSymbol::identity(), cfg.order, |s| s.is_zero())?;
    Ok((table, bad, vec![]))
}

fn random_ratio(rng: &mut ChaCha8Rng) -> Rational64 {
    Rational64::new(rng.gen_range(-8..=8), rng.gen_range(1..=4))
}

/// Random operators `l0(tau) = prod (tau - rho_i)` with distinct rational roots,
/// checked against the direct recursion at every root.
fn sweep(cfg: &RunConfig, spec: &DemoSpec) -> Result<(Table, usize, Vec<String>), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let lstars = [Rational64::new(0, 1), Rational64::new(1, 2), Rational64::new(1, 1), Rational64::new(3, 2)];
    let order = cfg.order.max(1);
    let mut table = Table::new("sweep", &["case", "m", "lstar", "root", "delta", "coefficients_match", "residual_zero"]);
    let mut bad = 0;
    for case in 0..spec.cases {
        let m = rng.gen_range(1..=4usize);
        let lstar = lstars[rng.gen_range(0..lstars.len())];
        let mut roots: Vec<Rational64> = Vec::with_capacity(m);
        while roots.len() < m {
            let r = Rational64::new(rng.gen_range(-8..=8), 2);
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
        // ascending coefficients of prod (tau - rho)
        let mut poly = vec![QComplex::one()];
        for r in &roots {
            let mut next = vec![QComplex::zero(); poly.len() + 1];
            for (k, c) in poly.iter().enumerate() {
                next[k + 1] = next[k + 1].add(c);
                next[k] = next[k].sub(&c.mul(&QComplex::from_ratio(*r)));
            }
            poly = next;
        }
        let table_rows: Vec<Vec<QComplex>> = (1..=m)
            .map(|r| {
                let mut row = vec![poly[m - r].clone()];
                for _ in 0..2 {
                    row.push(qc_ratio(random_ratio(&mut rng), random_ratio(&mut rng)));
                }
                row
            })
            .collect();
        let op = HalfLineOperator::from_table(m, lstar, &table_rows)?;
        for r in &roots {
            let mu = QComplex::from_ratio(*r);
            let problem = OdeProblem::new(op.clone(), mu.clone(), order, NormGrid::default(), None)?;
            let (terms, residual) = solve_to_order(&problem, &problem.zero_target(), order)?;
            let direct = build_fundamental(&op, &mu, order)?.coefficients();
            let matched = terms.iter().enumerate().all(|(j, t)| t.element.coefficient(j) == direct[j]);
            let zero = residual.formal.iter().take(order + 1).all(|c| Ring::is_zero(c));
            if !(matched && zero) {
                bad += 1;
            }
            table.push(vec![
                Cell::from(case),
                Cell::from(m),
                Cell::Text(render_ratio(lstar)),
                Cell::Text(render_ratio(*r)),
                Cell::Text(problem.delta().render()),
                Cell::from(matched),
                Cell::from(zero),
            ]);
        }
    }
    let lines = vec![format!("{} operators, {} roots", spec.cases, table.rows.len())];
    Ok((table, bad, lines))
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = cfg.scheme_demo.as_ref().expect("validated");
    let (table, bad, lines) = match spec.instantiation {
        Instantiation::Ode => ode_demo(cfg, spec)?,
        Instantiation::Circle => circle_demo(cfg)?,
        Instantiation::OdeSweep => sweep(cfg, spec)?,
    };
    let mut report = Report::default();
    report.lines = lines;
    report.lines.push(format!("rows: {}, inexact rows: {bad}", table.rows.len()));
    let name = match spec.instantiation {
        Instantiation::Ode => "ode",
        Instantiation::Circle => "circle",
        Instantiation::OdeSweep => "ode-sweep",
    };
    report.tables = vec![
        table,
        summary(&[("instantiation", Cell::from(name)), ("order", Cell::from(cfg.order)), ("inexact_rows", Cell::from(bad))]),
    ];
    if bad > 0 {
        report.failure = Some(format!("{bad} rows are not exact"));
    }
    Ok(report)
}
