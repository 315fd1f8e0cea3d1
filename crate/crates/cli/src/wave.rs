//! `wave`: rays, phases, amplitudes, parity and jumps for `D_t^2 - c^2 |D_x|^2`.

use num_complex::Complex64;
use num_rational::Rational64;
use symscheme::numerics::linspace;
use symscheme::scalar::parse_ratio;
use symscheme::wave::{
    build_conormal, build_green, check_parity, direction_fan, jump_across_cone, light_cone, solve_eikonal,
    trace_bicharacteristic, CauchyData, ConormalSolution, HyperbolicOp2, Monomial, QuadratureConfig, Speed,
};
use symscheme::{Dir, Scalar};

use crate::config::{RunConfig, SpeedSpec, Variant, WaveSpec};
use crate::error::CliError;
use crate::output::{summary, Cell, Table};
use crate::Report;

pub fn speed(spec: &SpeedSpec) -> Speed {
    match spec {
        SpeedSpec::Constant { value } => Speed::Constant(*value),
        SpeedSpec::TimePoly { coeffs } => Speed::TimePoly(coeffs.clone()),
        SpeedSpec::SpaceTime { monomials } => Speed::SpaceTime(
            monomials.iter().map(|m| Monomial { coeff: m.coeff, t_pow: m.t_pow, x_pows: m.x_pows.clone() }).collect(),
        ),
    }
}

fn branch_name(b: Dir) -> &'static str {
    match b {
        Dir::Plus => "+",
        Dir::Minus => "-",
    }
}

fn vector_columns(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn floats(v: &[f64]) -> Vec<Cell> {
    v.iter().map(|x| Cell::Float(*x)).collect()
}

fn complex(text: &str, field: &str) -> Result<Complex64, CliError> {
    Complex64::parse(text).map_err(|e| CliError::Config(format!("{field}: {e}")))
}

fn ray_table(op: &HyperbolicOp2, spec: &WaveSpec, grid: &[f64]) -> Result<Table, CliError> {
    let n = op.dim;
    let (x0, xi0) = match &spec.rays {
        Some(r) => (r.x0.clone(), r.xi0.clone()),
        None => {
            let mut e1 = vec![0.0; n];
            e1[0] = 1.0;
            (vec![0.0; n], e1)
        }
    };
    let mut columns = vec!["branch".to_string(), "t".to_string()];
    columns.extend(vector_columns("x", n));
    columns.extend(vector_columns("xi", n));
    columns.push("tau".into());
    let mut table = Table::with_columns("rays", columns);
    for branch in Dir::BOTH {
        let ray = trace_bicharacteristic(op, &x0, &xi0, branch, grid)?;
        for s in &ray.samples {
            let mut row = vec![Cell::from(branch_name(branch)), Cell::Float(s.t)];
            row.extend(floats(&s.x));
            row.extend(floats(&s.xi));
            row.push(Cell::Float(s.tau));
            table.push(row);
        }
    }
    Ok(table)
}

fn phase_table(op: &HyperbolicOp2, spec: &WaveSpec) -> Result<Table, CliError> {
    let n = op.dim;
    let points: Vec<(f64, Vec<f64>, Vec<f64>)> = if spec.phase_points.is_empty() {
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        [0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|f| f * op.horizon)
            .flat_map(|t| [-0.5, 0.0, 0.5].map(|a| (t, e1.iter().map(|v| a * v).collect(), e1.clone())))
            .collect()
    } else {
        spec.phase_points.iter().map(|p| (p.t, p.x.clone(), p.xi.clone())).collect()
    };
    let grid: Vec<f64> = points.iter().map(|p| p.0).collect();
    let mut columns = vec!["branch".to_string(), "t".to_string()];
    columns.extend(vector_columns("x", n));
    columns.extend(vector_columns("xi", n));
    columns.extend(["phase", "dt_phase", "eikonal_residual"].map(String::from));
    let mut table = Table::with_columns("phase", columns);
    for branch in Dir::BOTH {
        let phase = solve_eikonal(op, branch, &grid)?;
        for (t, x, xi) in &points {
            let p = phase.point(*t, x, xi)?;
            let mut row = vec![Cell::from(branch_name(branch)), Cell::Float(*t)];
            row.extend(floats(x));
            row.extend(floats(xi));
            row.extend([Cell::Float(p.value), Cell::Float(p.dt), Cell::Float(p.eikonal_residual)]);
            table.push(row);
        }
    }
    Ok(table)
}

fn cone_table(op: &HyperbolicOp2, t: f64, fan_half: usize) -> Result<(Table, bool, f64), CliError> {
    let cone = light_cone(op, t, fan_half)?;
    let n = op.dim;
    let mut columns = vector_columns("omega", n);
    columns.extend(vector_columns("x", n));
    columns.push("radius".into());
    let mut table = Table::with_columns("cone", columns);
    for ((d, p), r) in cone.directions.iter().zip(&cone.points).zip(&cone.radii) {
        let mut row = floats(d);
        row.extend(floats(p));
        row.push(Cell::Float(*r));
        table.push(row);
    }
    Ok((table, cone.injective, cone.min_stretch))
}

fn build(op: &HyperbolicOp2, spec: &WaveSpec, depth: usize, fan_half: usize, grid: &[f64]) -> Result<ConormalSolution, CliError> {
    match spec.variant {
        Variant::Green => Ok(build_green(op, depth, fan_half, grid)?),
        Variant::Cauchy => {
            let fan = direction_fan(op.dim, fan_half)?;
            let mu_bar = match &spec.mu_bar {
                Some(s) => parse_ratio(s).map_err(|e| CliError::Config(format!("wave.mu_bar: {e}")))?,
                None => Rational64::from_integer(0),
            };
            let mut data = CauchyData::zero(depth, fan.len());
            let half = fan.len() / 2;
            for (j, d) in spec.data.iter().take(depth).enumerate() {
                let g0 = complex(&d.g0, &format!("wave.data[{j}].g0"))?;
                let g1 = complex(&d.g1, &format!("wave.data[{j}].g1"))?;
                let g0a = d.g0_antipodal.as_deref().map(|s| complex(s, &format!("wave.data[{j}].g0_antipodal"))).transpose()?.unwrap_or(g0);
                let g1a = d.g1_antipodal.as_deref().map(|s| complex(s, &format!("wave.data[{j}].g1_antipodal"))).transpose()?.unwrap_or(g1);
                for k in 0..fan.len() {
                    let anti = k >= half;
                    data.g0[j][k] = if anti { g0a } else { g0 };
                    data.g1[j][k] = if anti { g1a } else { g1 };
                }
            }
            Ok(build_conormal(op, mu_bar, data, fan, grid)?)
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = cfg.wave.as_ref().expect("validated");
    let op = HyperbolicOp2::new(spec.dim, speed(&spec.speed), spec.horizon)?;
    let n = op.dim;
    let grid = match &spec.times {
        Some(t) => t.clone(),
        None => linspace(0.0, spec.horizon, 21),
    };
    let fan_half = spec.fan_half.unwrap_or(if n == 1 { 1 } else { 8 });
    let mut report = Report::default();
    let rays = ray_table(&op, spec, &grid)?;
    let phase = phase_table(&op, spec)?;
    let cone_t = spec.jump.as_ref().map(|j| j.t).unwrap_or(spec.horizon);
    let (cone, injective, stretch) = cone_table(&op, cone_t, fan_half)?;
    report.lines.push(format!("light cone at t = {cone_t}: injective = {injective}, min stretch = {stretch:e}"));
    let mut entries = vec![
        ("dim", Cell::from(n)),
        ("cone_time", Cell::from(cone_t)),
        ("cone_injective", Cell::from(injective)),
        ("cone_min_stretch", Cell::from(stretch)),
    ];
    report.tables = vec![rays, phase, cone];

    if !op.speed.is_time_only() {
        if spec.jump.is_some() || spec.parity_tolerance.is_some() {
            return Err(CliError::Hypothesis(
                "amplitudes, parity and jumps need a speed independent of x; only rays and phases are available".into(),
            ));
        }
        report.lines.push("amplitudes skipped: speed depends on x".into());
        report.tables.push(summary(&entries));
        return Ok(report);
    }

    let depth = cfg.order;
    let sol = build(&op, spec, depth, fan_half, &grid)?;
    let mut amp = Table::new("amplitude", &["branch", "direction", "j", "degree", "t", "re", "im"]);
    for branch in Dir::BOTH {
        let a = sol.amplitude(branch);
        for j in 0..depth {
            for d in 0..sol.fan.len() {
                for (k, t) in a.times.iter().enumerate() {
                    let v = a.values[j][d][k];
                    amp.push(vec![
                        Cell::from(branch_name(branch)),
                        Cell::from(d),
                        Cell::from(j),
                        Cell::from(a.degree(j)),
                        Cell::Float(*t),
                        Cell::Float(v.re),
                        Cell::Float(v.im),
                    ]);
                }
            }
        }
    }
    report.tables.push(amp);

    if sol.mu_bar.is_integer() {
        let parity = check_parity(&sol, depth)?;
        let mut table = Table::new("parity", &["j", "defect"]);
        for (j, d) in parity.defects.iter().enumerate() {
            table.push(vec![Cell::from(j), Cell::from(*d)]);
        }
        report.tables.push(table);
        let tol = spec.parity_tolerance.or(if spec.variant == Variant::Green { Some(1e-10) } else { None });
        report.lines.push(format!("max parity defect: {:e}", parity.max_defect()));
        entries.push(("max_parity_defect", Cell::from(parity.max_defect())));
        if let Some(tol) = tol {
            if !(parity.max_defect() <= tol) {
                report.failure = Some(format!("parity defect {:e} exceeds {tol:e}", parity.max_defect()));
            }
        }
    } else {
        report.lines.push(format!("parity skipped: anchor {} is not an integer", sol.mu_bar));
    }

    if let Some(js) = &spec.jump {
        let est = jump_across_cone(&sol, js.t, &js.offsets, &QuadratureConfig::default())?;
        let mut table = Table::new("jump", &["offset", "difference_re", "difference_im", "extrapolant_re", "extrapolant_im"]);
        for (k, (eps, d)) in est.offsets.iter().zip(&est.differences).enumerate() {
            let e = est.extrapolants.get(k).copied().unwrap_or_default();
            table.push(vec![Cell::Float(*eps), Cell::Float(d.re), Cell::Float(d.im), Cell::Float(e.re), Cell::Float(e.im)]);
        }
        report.tables.push(table);
        report.lines.push(format!("jump at t = {}: {} (uncertainty {:e})", js.t, est.jump, est.uncertainty));
        entries.push(("jump_re", Cell::from(est.jump.re)));
        entries.push(("jump_im", Cell::from(est.jump.im)));
        entries.push(("jump_uncertainty", Cell::from(est.uncertainty)));
        if let Some(expected) = js.expected {
            let err = (est.jump - Complex64::new(expected, 0.0)).norm();
            if err > js.tolerance && report.failure.is_none() {
                report.failure = Some(format!("jump {} differs from {expected} by {err:e}", est.jump));
            }
        }
    }
    report.tables.push(summary(&entries));
    Ok(report)
}
