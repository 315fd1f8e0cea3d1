//! `ode`: fundamental systems of half-line operators and their validation.

use num_complex::Complex64;
use symscheme::numerics::OdeOptions;
use symscheme::ode::{char_data, fundamental_system, integrate, series_derivatives, series_residual, HalfLineOperator};
use symscheme::scalar::parse_ratio;
use symscheme::{QComplex, Scalar};

use crate::config::{OdeSpec, RunConfig};
use crate::error::CliError;
use crate::output::{summary, Cell, Table};
use crate::Report;

pub fn parse_operator(spec: &OdeSpec) -> Result<HalfLineOperator<QComplex>, CliError> {
    let lstar = parse_ratio(&spec.lstar).map_err(|e| CliError::Config(format!("ode.lstar: {e}")))?;
    let table = spec
        .coefficients
        .iter()
        .enumerate()
        .map(|(r, row)| {
            row.iter()
                .enumerate()
                .map(|(k, s)| QComplex::parse(s).map_err(|e| CliError::Config(format!("ode.coefficients[{r}][{k}]: {e}"))))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(HalfLineOperator::from_table(spec.m, lstar, &table)?)
}

/// Real simple roots of `l0`; the operator is exact when every root is rational.
pub fn check_roots(op: &HalfLineOperator<QComplex>) -> Result<bool, CliError> {
    let data = char_data(op)?;
    for root in &data.roots {
        if !root.is_real() {
            return Err(CliError::Hypothesis(format!("root {} of l0 is not real", root.value)));
        }
        if !root.simple {
            return Err(CliError::Hypothesis(format!("root {} of l0 is not simple", root.value.re)));
        }
    }
    Ok(data.roots.iter().all(|r| r.exact.is_some()))
}

fn split(z: Complex64) -> [Cell; 2] {
    [Cell::Float(z.re), Cell::Float(z.im)]
}

fn tables<C: Scalar>(op: &HalfLineOperator<C>, spec: &OdeSpec, order: usize) -> Result<(Table, Table, f64), CliError> {
    let system = fundamental_system(op, order)?;
    let mut columns: Vec<String> = vec!["root".into(), "delta_re".into(), "delta_im".into()];
    for j in 0..order {
        columns.push(format!("c{j}_re"));
        columns.push(format!("c{j}_im"));
    }
    let mut fund = Table::with_columns("fundamental", columns);
    let mut val = Table::new(
        "validation",
        &["root", "t", "series_re", "series_im", "integrated_re", "integrated_im", "relative_error", "residual"],
    );
    let v = &spec.validation;
    let mut worst: f64 = 0.0;
    let mut times = v.times.clone();
    times.sort_by(|a, b| b.total_cmp(a));
    for sol in &system {
        let mu = sol.mu.to_c64().re;
        let mut row = vec![Cell::Float(mu)];
        row.extend(split(sol.delta.to_c64()));
        for c in sol.coefficients() {
            row.extend(split(c.to_c64()));
        }
        fund.push(row);
        let data = series_derivatives(sol, op, v.anchor, order, op.order());
        let states = integrate(op, v.anchor, &data, &times, &OdeOptions::default())?;
        for (t, state) in times.iter().zip(&states) {
            let series = series_derivatives(sol, op, *t, order, 1)[0];
            let rel = (state[0] - series).norm() / series.norm();
            worst = worst.max(rel);
            let residual = series_residual(sol, op, *t, order).norm();
            let mut row = vec![Cell::Float(mu), Cell::Float(*t)];
            row.extend(split(series));
            row.extend(split(state[0]));
            row.push(Cell::Float(rel));
            row.push(Cell::Float(residual));
            val.push(row);
        }
    }
    Ok((fund, val, worst))
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = cfg.ode.as_ref().expect("validated");
    let op = parse_operator(spec)?;
    let exact = check_roots(&op)?;
    let (fund, val, worst) = if exact { tables(&op, spec, cfg.order)? } else { tables(&op.to_float(), spec, cfg.order)? };
    let tol = spec.validation.tolerance;
    let mut report = Report::default();
    report.lines.push(format!("roots: {}", fund.rows.len()));
    report.lines.push(format!("arithmetic: {}", if exact { "exact" } else { "floating" }));
    report.lines.push(format!("max relative deviation: {worst:e} (tolerance {tol:e})"));
    let sum = summary(&[
        ("order", Cell::from(cfg.order)),
        ("roots", Cell::from(fund.rows.len())),
        ("exact", Cell::from(exact)),
        ("max_relative_error", Cell::from(worst)),
        ("tolerance", Cell::from(tol)),
    ]);
    report.tables = vec![fund, val, sum];
    if !(worst <= tol) {
        report.failure = Some(format!("series and integration differ by {worst:e} > {tol:e}"));
    }
    Ok(report)
}
