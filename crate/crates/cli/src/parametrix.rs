//! `parametrix`: right parametrices on the circle, recomposition defects and
//! quantized remainder decay.

use num_rational::Rational64;
use symscheme::circle::{
    compose_symbols, is_elliptic, parametrix, remainder_probe, sup_norm, CircleSymbol, QuantizedAction, TrigPoly, TrigRational,
};
use symscheme::scalar::{parse_ratio, render_ratio};
use symscheme::{DirPair, ExcisionCutoff, QComplex, Scalar};

use crate::config::{ParametrixSpec, RunConfig, TrigSpec};
use crate::error::CliError;
use crate::output::{summary, Cell, Table};
use crate::Report;

fn trig(spec: &TrigSpec, field: &str) -> Result<TrigPoly, CliError> {
    let coeffs = spec
        .iter()
        .map(|(k, c)| QComplex::parse(c).map(|v| (*k, v)).map_err(|e| CliError::Config(format!("{field}: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TrigPoly::from_coeffs(coeffs))
}

pub fn parse_symbol(spec: &ParametrixSpec) -> Result<CircleSymbol, CliError> {
    let order = parse_ratio(&spec.symbol_order).map_err(|e| CliError::Config(format!("parametrix.symbol_order: {e}")))?;
    let components = spec
        .components
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let plus = trig(&c.plus, &format!("parametrix.components[{j}].plus"))?;
            let minus = match &c.minus {
                Some(m) => trig(m, &format!("parametrix.components[{j}].minus"))?,
                None => plus.clone(),
            };
            Ok(DirPair::new(TrigRational::from(plus), TrigRational::from(minus)))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(CircleSymbol::new(order, components))
}

/// Components `0..=depth` of `p # q - 1`, with the count of leading exact zeros.
pub fn defect_table(p: &CircleSymbol, q: &CircleSymbol, depth: usize) -> Result<(Table, usize), CliError> {
    let defect = compose_symbols(p, q, depth + 1)?.sub(&CircleSymbol::identity())?;
    let mut table = Table::new("defect", &["j", "degree", "exact_zero", "sup_norm"]);
    let mut zeros = 0;
    let mut leading = true;
    for j in 0..=depth {
        let c = defect.component(j);
        let zero = c.is_zero();
        if leading && zero {
            zeros += 1;
        } else {
            leading = false;
        }
        let degree = defect.order() - Rational64::from_integer(j as i64);
        table.push(vec![Cell::from(j), Cell::Text(render_ratio(degree)), Cell::from(zero), Cell::from(sup_norm(&c, 256))]);
    }
    Ok((table, zeros))
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = cfg.parametrix.as_ref().expect("validated");
    let p = parse_symbol(spec)?;
    let ell = is_elliptic(&p);
    if !ell.elliptic {
        return Err(CliError::Hypothesis(format!(
            "symbol is not elliptic: principal part vanishes at x = {:.12} (direction {:?}, |p_m| = {:e})",
            ell.x, ell.dir, ell.margin
        )));
    }
    let depth = cfg.order;
    let q = parametrix(&p, depth)?;
    let mut comps = Table::new("parametrix", &["j", "degree", "plus", "minus"]);
    for j in 0..depth {
        let c = q.component(j);
        comps.push(vec![
            Cell::from(j),
            Cell::Text(render_ratio(q.degree(j))),
            Cell::Text(c.plus.render()),
            Cell::Text(c.minus.render()),
        ]);
    }
    let (defect, zeros) = defect_table(&p, &q, depth)?;
    let probe = &spec.probe;
    let action = QuantizedAction::new(probe.grid_size, probe.freq_cut, ExcisionCutoff::new(probe.excision))?;
    let decay = remainder_probe(&p, &q, depth, &probe.frequencies, &action)?;
    let mut dtable = Table::new("decay", &["k", "norm"]);
    for row in &decay.rows {
        dtable.push(vec![Cell::from(row.k), Cell::from(row.norm)]);
    }
    let mut report = Report::default();
    report.lines.push(format!("ellipticity margin: {:e}", ell.margin));
    report.lines.push(format!("exact zero defect components: {zeros} of {}", depth + 1));
    report.lines.push(format!("remainder slope: {:.6}", decay.slope));
    report.tables = vec![
        comps,
        defect,
        dtable,
        summary(&[
            ("order", Cell::from(depth)),
            ("ellipticity_margin", Cell::from(ell.margin)),
            ("exact_zero_components", Cell::from(zeros)),
            ("slope", Cell::from(decay.slope)),
        ]),
    ];
    if zeros < depth {
        report.failure = Some(format!("recomposition defect is nonzero at order -{zeros}"));
    } else if let Some(max) = probe.max_slope {
        if !(decay.slope <= max) {
            report.failure = Some(format!("remainder slope {:.4} exceeds {max}", decay.slope));
        }
    }
    Ok(report)
}
