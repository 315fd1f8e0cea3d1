//! Conormal solutions `u = sum_+- int e^{i phi^+-} a^+- dxi` of the Cauchy
//! problem `P u = 0`, `u(0) = g0`, `D_t u(0) = g1`, and the parity check for the
//! transmission property.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::Serialize;

use super::amplitude::{amplitude_jets, cauchy_init, time_jets, transport_solve};
use super::eikonal::{solve_eikonal, PhaseSolution};
use super::rays::{direction_fan, DirectionFan};
use super::{norm, HyperbolicOp2};
use crate::error::WaveError;
use crate::symbol::Dir;

/// Normalization carried by every solution: `D_t = -i d/dt`,
/// `dxi = (2 pi)^{-n} dxi`, and `g1 = i delta` has `g1^ = i`. Under it the
/// `n = 1` Green's function is `-(1/2c) 1{|x| < ct}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Convention {
    DAlembert,
}

/// Homogeneous components of the Cauchy data per fan direction: `g0[j]` has
/// degree `mu_bar - j`, `g1[j]` degree `mu_bar - j + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CauchyData {
    pub g0: Vec<Vec<Complex64>>,
    pub g1: Vec<Vec<Complex64>>,
}

impl CauchyData {
    pub fn zero(depth: usize, directions: usize) -> Self {
        let z = vec![vec![Complex64::new(0.0, 0.0); directions]; depth];
        CauchyData { g0: z.clone(), g1: z }
    }

    /// Components from `f(j, omega) = (g0_j(omega), g1_j(omega))`.
    pub fn from_fn(depth: usize, fan: &DirectionFan, f: impl Fn(usize, &[f64]) -> (Complex64, Complex64)) -> Self {
        let mut data = CauchyData::zero(depth, fan.len());
        for j in 0..depth {
            for (d, omega) in fan.dirs.iter().enumerate() {
                let (a, b) = f(j, omega);
                data.g0[j][d] = a;
                data.g1[j][d] = b;
            }
        }
        data
    }
}

/// `a_j(t, xi) = values[j][dir][time] |xi|^{mu_bar - j}` on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AmplitudeExpansion {
    pub branch: Dir,
    pub mu_bar: Rational64,
    pub times: Vec<f64>,
    pub values: Vec<Vec<Vec<Complex64>>>,
}

impl AmplitudeExpansion {
    pub fn depth(&self) -> usize {
        self.values.len()
    }

    pub fn degree(&self, j: usize) -> f64 {
        let d = self.mu_bar - Rational64::from_integer(j as i64);
        *d.numer() as f64 / *d.denom() as f64
    }

    /// `a_j(times[k], xi)` for `xi` along fan direction `dir`.
    pub fn eval(&self, j: usize, dir: usize, k: usize, xi: &[f64]) -> Complex64 {
        self.values[j][dir][k] * norm(xi).powf(self.degree(j))
    }
}

#[derive(Clone, Debug)]
pub struct ConormalSolution {
    pub op: HyperbolicOp2,
    pub fan: DirectionFan,
    pub mu_bar: Rational64,
    pub depth: usize,
    pub data: CauchyData,
    pub convention: Convention,
    pub phases: [PhaseSolution; 2],
    pub amplitudes: [AmplitudeExpansion; 2],
    /// `[branch][dir][order]` coefficients at `t = 0`.
    inits: [Vec<Vec<Complex64>>; 2],
}

fn branch_index(branch: Dir) -> usize {
    match branch {
        Dir::Plus => 0,
        Dir::Minus => 1,
    }
}

impl ConormalSolution {
    pub fn phase(&self, branch: Dir) -> &PhaseSolution {
        &self.phases[branch_index(branch)]
    }

    pub fn amplitude(&self, branch: Dir) -> &AmplitudeExpansion {
        &self.amplitudes[branch_index(branch)]
    }

    pub fn initial_coefficients(&self, branch: Dir) -> &[Vec<Complex64>] {
        &self.inits[branch_index(branch)]
    }

    /// Coefficients `[branch][dir][order]` at an arbitrary time.
    pub fn coefficients_at(&self, t: f64) -> Result<[Vec<Vec<Complex64>>; 2], WaveError> {
        let mut out: [Vec<Vec<Complex64>>; 2] = [Vec::new(), Vec::new()];
        for branch in Dir::BOTH {
            let b = branch_index(branch);
            for init in &self.inits[b] {
                out[b].push(transport_solve(&self.op, branch, init, &[t])?.pop().expect("one output"));
            }
        }
        Ok(out)
    }

    /// Negates one order of one branch, tables and initial values alike.
    pub fn negate_amplitude(&mut self, branch: Dir, order: usize) {
        let b = branch_index(branch);
        for dir in self.amplitudes[b].values[order].iter_mut() {
            dir.iter_mut().for_each(|v| *v = -*v);
        }
        for init in self.inits[b].iter_mut() {
            init[order] = -init[order];
        }
    }
}

/// Assembles the two-branch solution to depth `J` for data anchored at `mu_bar`.
///
/// At order `j` the `t = 0` pair solves `alpha^+ + alpha^- = g0_j` and
/// `c(0)(alpha^+ - alpha^-) = g1_j + i (alpha^+'_{j-1} + alpha^-'_{j-1})(0)`.
pub fn build_conormal(
    op: &HyperbolicOp2,
    mu_bar: Rational64,
    data: CauchyData,
    fan: DirectionFan,
    grid: &[f64],
) -> Result<ConormalSolution, WaveError> {
    if op.dim % 2 == 0 {
        return Err(WaveError::EvenDimension(op.dim));
    }
    if !op.speed.is_time_only() {
        return Err(WaveError::Unsupported("conormal solutions need a speed independent of x".into()));
    }
    let depth = data.g0.len();
    if depth == 0 || data.g1.len() != depth {
        return Err(WaveError::InvalidInput("data must have the same positive depth for g0 and g1".into()));
    }
    if data.g0.iter().chain(&data.g1).any(|row| row.len() != fan.len()) {
        return Err(WaveError::InvalidInput(format!("data rows must have {} directions", fan.len())));
    }
    if fan.dirs.iter().any(|d| d.len() != op.dim) {
        return Err(WaveError::InvalidInput("fan directions do not match the dimension".into()));
    }
    let zero = vec![0.0; op.dim];
    let c0 = op.speed.value(0.0, &zero);
    let mu = (Complex64::new(c0, 0.0), Complex64::new(-c0, 0.0));
    let jets = [time_jets(&op.speed, 0.0, 2 * depth, Dir::Plus), time_jets(&op.speed, 0.0, 2 * depth, Dir::Minus)];
    let mut inits: [Vec<Vec<Complex64>>; 2] = [vec![Vec::with_capacity(depth); fan.len()], vec![Vec::with_capacity(depth); fan.len()]];
    for d in 0..fan.len() {
        for j in 0..depth {
            let mut rhs = data.g1[j][d];
            if j > 0 {
                for b in 0..2 {
                    let jet = jets[b].as_ref().expect("time-only speed");
                    let rates = amplitude_jets(jet, &inits[b][d]);
                    rhs += Complex64::new(0.0, 1.0) * rates[j - 1][1];
                }
            }
            let (ap, am) = cauchy_init(mu.0, mu.1, data.g0[j][d], rhs)?;
            inits[0][d].push(ap);
            inits[1][d].push(am);
        }
    }
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut amplitudes = Vec::with_capacity(2);
    for branch in Dir::BOTH {
        let b = branch_index(branch);
        let mut values = vec![vec![Vec::with_capacity(grid.len()); fan.len()]; depth];
        for d in 0..fan.len() {
            let table = transport_solve(op, branch, &inits[b][d], &grid)?;
            for row in table {
                for (j, v) in row.into_iter().enumerate() {
                    values[j][d].push(v);
                }
            }
        }
        amplitudes.push(AmplitudeExpansion { branch, mu_bar, times: grid.clone(), values });
    }
    let minus = amplitudes.pop().expect("two branches");
    let plus = amplitudes.pop().expect("two branches");
    Ok(ConormalSolution {
        op: op.clone(),
        fan,
        mu_bar,
        depth,
        data,
        convention: Convention::DAlembert,
        phases: [solve_eikonal(op, Dir::Plus, &grid)?, solve_eikonal(op, Dir::Minus, &grid)?],
        amplitudes: [plus, minus],
        inits,
    })
}

/// Green's function data `g0 = 0`, `g1 = i delta` anchored at `mu_bar = -1`.
pub fn build_green(op: &HyperbolicOp2, depth: usize, fan_half: usize, grid: &[f64]) -> Result<ConormalSolution, WaveError> {
    if depth == 0 {
        return Err(WaveError::InvalidInput("depth must be positive".into()));
    }
    let fan = direction_fan(op.dim, fan_half)?;
    let data = CauchyData::from_fn(depth, &fan, |j, _| {
        let g1 = if j == 0 { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, 0.0) };
        (Complex64::new(0.0, 0.0), g1)
    });
    build_conormal(op, -Rational64::one(), data, fan, grid)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParityReport {
    pub mu_bar: i64,
    /// `d_j = max |a^-_j(t, -xi) - (-1)^{mu_bar - j} a^+_j(t, xi)| / max |a^+_j|`.
    pub defects: Vec<f64>,
}

impl ParityReport {
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().copied().fold(0.0, f64::max)
    }
}

pub fn check_parity(sol: &ConormalSolution, depth: usize) -> Result<ParityReport, WaveError> {
    if !sol.mu_bar.is_integer() {
        return Err(WaveError::NonIntegerAnchor(sol.mu_bar.to_string()));
    }
    if depth > sol.depth {
        return Err(WaveError::InvalidInput(format!("depth {depth} exceeds the solution depth {}", sol.depth)));
    }
    let mu_bar = sol.mu_bar.to_integer();
    let (plus, minus) = (&sol.amplitudes[0], &sol.amplitudes[1]);
    let mut defects = Vec::with_capacity(depth);
    for j in 0..depth {
        let sign = if (mu_bar - j as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let peak = |a: &AmplitudeExpansion| a.values[j].iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
        let mut scale = peak(plus);
        if scale.is_zero() {
            scale = peak(minus);
        }
        let mut worst: f64 = 0.0;
        for d in 0..sol.fan.len() {
            let e = sol.fan.antipode(d);
            for (a_minus, a_plus) in minus.values[j][e].iter().zip(&plus.values[j][d]) {
                worst = worst.max((a_minus - a_plus * sign).norm());
            }
        }
        defects.push(if scale.is_zero() { 0.0 } else { worst / scale });
    }
    Ok(ParityReport { mu_bar, defects })
}
