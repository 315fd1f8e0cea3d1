//! The half-line ODE as a filtered problem.
//!
//! Level `j` of the source is spanned by `e^{i mu T} t^{Delta - j s}`; level `j` of
//! the target by `e^{i mu T} t^{Delta + m l* - (j+1) s}`. The symbol maps read
//! off these coefficients, and `T^j` is multiplication by `i j s l0'(mu)`. Since
//! `T^0 = 0`, the leading term is seeded with `c_0 = 1`.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;

use super::{apply_dt, conjugate_image, delta_exponent, phase_variable, poly_derivative, poly_eval, HalfLineOperator, D_SIGN};
use crate::error::{OdeError, SchemeError};
use crate::numerics::{fornberg_weights, geomspace, OdeOptions};
use crate::scalar::{ratio_f64, Scalar};
use crate::scheme::{FilteredProblem, Linear};
use crate::symbol::{Dir, DirPair, ExcisionCutoff, PolyhomExpansion};

/// Geometric sample grid for the weighted sup seminorms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for NormGrid {
    fn default() -> Self {
        NormGrid { t_min: 1.0, t_max: 1000.0, points: 160 }
    }
}

/// Backward integration of `L w = 0` from `t_hi` down to the grid start.
#[derive(Clone, Copy, Debug)]
pub struct ResidualConfig {
    pub t_hi: f64,
    pub opts: OdeOptions,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom<C> {
    pub level: usize,
    pub coeff: C,
    /// Excision scale; `None` for the bare power.
    pub scale: Option<f64>,
}

/// Numerical solution `w` of `L w = 0` on `[t_lo, t_hi]`, stored through its
/// data at `t_hi`; the correction is `w + base` on the window and 0 above it.
#[derive(Debug)]
pub struct Correction {
    t_lo: f64,
    t_hi: f64,
    state_hi: Vec<Complex64>,
    base: Vec<Atom<Complex64>>,
}

#[derive(Clone, Debug)]
pub struct OdeElement<C> {
    pub atoms: Vec<Atom<C>>,
    corrections: Vec<(f64, Arc<Correction>)>,
}

impl<C: Scalar> OdeElement<C> {
    pub fn atom(level: usize, coeff: C) -> Self {
        OdeElement { atoms: vec![Atom { level, coeff, scale: None }], corrections: Vec::new() }
    }

    pub fn zero() -> Self {
        OdeElement { atoms: Vec::new(), corrections: Vec::new() }
    }

    pub fn has_correction(&self) -> bool {
        !self.corrections.is_empty()
    }

    /// Sum of the coefficients at `level` (cutoffs do not change symbols).
    pub fn coefficient(&self, level: usize) -> C {
        self.atoms.iter().filter(|a| a.level == level).fold(C::zero(), |acc, a| acc.add(&a.coeff))
    }

    fn max_scale(&self) -> f64 {
        self.atoms.iter().filter_map(|a| a.scale).fold(1.0, f64::max)
    }
}

impl<C: Scalar> Linear for OdeElement<C> {
    fn add(&self, other: &Self) -> Self {
        let mut atoms: Vec<Atom<C>> = self.atoms.clone();
        for a in &other.atoms {
            match atoms.iter_mut().find(|b| b.level == a.level && b.scale.map(f64::to_bits) == a.scale.map(f64::to_bits)) {
                Some(b) => b.coeff = b.coeff.add(&a.coeff),
                None => atoms.push(a.clone()),
            }
        }
        atoms.retain(|a| !a.coeff.is_zero());
        atoms.sort_by(|a, b| a.level.cmp(&b.level).then(a.scale.unwrap_or(0.0).total_cmp(&b.scale.unwrap_or(0.0))));
        let mut corrections = self.corrections.clone();
        corrections.extend(other.corrections.iter().cloned());
        OdeElement { atoms, corrections }
    }

    fn neg(&self) -> Self {
        OdeElement {
            atoms: self.atoms.iter().map(|a| Atom { level: a.level, coeff: a.coeff.neg(), scale: a.scale }).collect(),
            corrections: self.corrections.iter().map(|(s, c)| (-s, c.clone())).collect(),
        }
    }
}

/// `L` applied to `lifted`: its formal coefficients by target level (index 0 is
/// the degree `Delta + m l*`) and the element itself for numerical realization.
#[derive(Clone, Debug)]
pub struct OdeTarget<C> {
    pub formal: Vec<C>,
    lifted: OdeElement<C>,
}

impl<C: Scalar> Linear for OdeTarget<C> {
    fn add(&self, other: &Self) -> Self {
        OdeTarget {
            formal: self.formal.iter().zip(&other.formal).map(|(a, b)| a.add(b)).collect(),
            lifted: self.lifted.add(&other.lifted),
        }
    }

    fn neg(&self) -> Self {
        OdeTarget { formal: self.formal.iter().map(|a| a.neg()).collect(), lifted: self.lifted.neg() }
    }
}

pub struct OdeProblem<C: Scalar> {
    op: HalfLineOperator<C>,
    fop: HalfLineOperator<Complex64>,
    mu: C,
    delta: C,
    levels: usize,
    transport_factor: C,
    images: Vec<PolyhomExpansion<C>>,
    float_images: Vec<PolyhomExpansion<Complex64>>,
    /// `D_t^k` of the unit atom at each level, `k <= m`.
    dpowers: Vec<Vec<PolyhomExpansion<Complex64>>>,
    grid: Vec<f64>,
    t_min: f64,
    residual: Option<ResidualConfig>,
}

impl<C: Scalar> OdeProblem<C> {
    pub fn new(
        op: HalfLineOperator<C>,
        mu: C,
        levels: usize,
        grid: NormGrid,
        residual: Option<ResidualConfig>,
    ) -> Result<Self, OdeError> {
        let delta = delta_exponent(&op, &mu)?;
        let s = op.step();
        let (l0, _) = super::char_data_polys(&op);
        let l0p = poly_eval(&poly_derivative(&l0), &mu);
        let transport_factor = C::imag_unit().mul(&C::from_ratio(s)).mul(&l0p);
        let mu_f = mu.to_c64();
        let mut images = Vec::with_capacity(levels);
        let mut dpowers = Vec::with_capacity(levels);
        for i in 0..levels {
            let d = delta.sub(&C::from_ratio(s * Rational64::from_integer(i as i64)));
            images.push(conjugate_image(&op, &mu, &d));
            let mut pw = vec![PolyhomExpansion::monomial(d.to_c64(), s, DirPair::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)), 1)];
            for k in 1..=op.order() {
                let next = apply_dt(&pw[k - 1], &mu_f, op.lstar(), true);
                pw.push(next);
            }
            dpowers.push(pw);
        }
        let float_images = images.iter().map(|e| e.to_float()).collect();
        if !(grid.t_min >= 1.0 && grid.t_max > grid.t_min && grid.points >= 2) {
            return Err(OdeError::InvalidOperator("norm grid must satisfy 1 <= t_min < t_max with >= 2 points".into()));
        }
        Ok(OdeProblem {
            fop: op.to_float(),
            op,
            mu,
            delta,
            levels,
            transport_factor,
            images,
            float_images,
            dpowers,
            grid: geomspace(grid.t_min, grid.t_max, grid.points),
            t_min: grid.t_min,
            residual,
        })
    }

    pub fn delta(&self) -> &C {
        &self.delta
    }

    pub fn mu(&self) -> &C {
        &self.mu
    }

    pub fn zero_target(&self) -> OdeTarget<C> {
        OdeTarget { formal: vec![C::zero(); self.levels + 2], lifted: OdeElement::zero() }
    }

    fn phase(&self, t: f64) -> Complex64 {
        Complex64::new(0.0, self.mu.to_c64().re * phase_variable(self.op.lstar(), t)).exp()
    }

    fn atom_derivative(&self, atom: &Atom<Complex64>, t: f64, k: usize) -> Complex64 {
        let factor = Complex64::new(0.0, -D_SIGN).powi(k as i32);
        let e = &self.dpowers[atom.level][k];
        factor * self.phase(t) * atom.coeff * e.sum_terms(Dir::Plus, t, e.depth())
    }

    fn atoms_value(&self, atoms: &[Atom<C>], t: f64) -> Complex64 {
        let phase = self.phase(t);
        atoms
            .iter()
            .map(|a| {
                let chi = a.scale.map(|c| ExcisionCutoff::profile(t / c)).unwrap_or(1.0);
                if chi == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                let e = &self.dpowers[a.level][0];
                chi * phase * a.coeff.to_c64() * e.sum_terms(Dir::Plus, t, 1)
            })
            .sum()
    }

    fn correction_values(&self, corr: &Correction, times: &[f64]) -> Result<Vec<Complex64>, SchemeError> {
        let mut order: Vec<usize> = (0..times.len()).filter(|&i| times[i] <= corr.t_hi).collect();
        order.sort_by(|&a, &b| times[b].total_cmp(&times[a]));
        let mut out = vec![Complex64::new(0.0, 0.0); times.len()];
        if let Some(&lowest) = order.last() {
            if times[lowest] < corr.t_lo - 1e-12 {
                return Err(SchemeError::Evaluation(format!(
                    "t = {} lies below the correction window [{}, {}]",
                    times[lowest], corr.t_lo, corr.t_hi
                )));
            }
        }
        let outputs: Vec<f64> = order.iter().map(|&i| times[i]).collect();
        let opts = self.residual.map(|r| r.opts).unwrap_or_default();
        let states = super::integrate(&self.fop, corr.t_hi, &corr.state_hi, &outputs, &opts)
            .map_err(|e| SchemeError::Evaluation(e.to_string()))?;
        for (idx, state) in order.iter().zip(states) {
            let t = times[*idx];
            let base: Complex64 = corr.base.iter().map(|a| {
                let chi = a.scale.map(|c| ExcisionCutoff::profile(t / c)).unwrap_or(1.0);
                chi * self.atom_derivative(a, t, 0)
            }).sum();
            out[*idx] = state[0] + base;
        }
        Ok(out)
    }

    /// Realized values `u(t)` at the given times.
    pub fn values(&self, u: &OdeElement<C>, times: &[f64]) -> Result<Vec<Complex64>, SchemeError> {
        let mut out: Vec<Complex64> = times.iter().map(|&t| self.atoms_value(&u.atoms, t)).collect();
        for (sign, corr) in &u.corrections {
            for (o, v) in out.iter_mut().zip(self.correction_values(corr, times)?) {
                *o += *sign * v;
            }
        }
        Ok(out)
    }

    fn fd_step(&self, t: f64) -> f64 {
        let omega = self.mu.to_c64().norm() * t.powf(ratio_f64(self.op.lstar()));
        (0.05 / omega.max(1.0)).min(0.02 * t)
    }

    /// `(L u)(t)`: exact image where no cutoff or correction is active, eighth
    /// order central differences otherwise.
    pub fn apply_numeric(&self, u: &OdeElement<C>, times: &[f64]) -> Result<Vec<Complex64>, SchemeError> {
        let m = self.op.order();
        let exact_from = 2.0 * u.max_scale();
        let mut out = vec![Complex64::new(0.0, 0.0); times.len()];
        let mut fd_points = Vec::new();
        let mut fd_index = Vec::new();
        for (i, &t) in times.iter().enumerate() {
            if !u.has_correction() && t >= exact_from {
                let phase = self.phase(t);
                out[i] = u
                    .atoms
                    .iter()
                    .map(|a| {
                        let img = &self.float_images[a.level];
                        a.coeff.to_c64() * phase * img.sum_terms(Dir::Plus, t, img.depth())
                    })
                    .sum();
            } else {
                let h = self.fd_step(t);
                fd_index.push(i);
                for k in -4i32..=4 {
                    fd_points.push(t + h * k as f64);
                }
            }
        }
        if fd_index.is_empty() {
            return Ok(out);
        }
        let vals = self.values(u, &fd_points)?;
        let offsets: Vec<f64> = (-4i32..=4).map(|k| k as f64).collect();
        let weights: Vec<Vec<f64>> = (0..=m).map(|k| fornberg_weights(0.0, &offsets, k)).collect();
        let minus_i = Complex64::new(0.0, D_SIGN);
        for (n, &i) in fd_index.iter().enumerate() {
            let t = times[i];
            let h = self.fd_step(t);
            let v = &vals[9 * n..9 * n + 9];
            let deriv = |k: usize| -> Complex64 {
                let s: Complex64 = v.iter().zip(&weights[k]).map(|(a, w)| a * *w).sum();
                s / h.powi(k as i32)
            };
            let mut total = minus_i.powi(m as i32) * deriv(m);
            for r in 1..=m {
                total += self.fop.coefficient_value(r, t) * minus_i.powi((m - r) as i32) * deriv(m - r);
            }
            out[i] = total;
        }
        Ok(out)
    }

    fn norm_times(&self) -> Vec<f64> {
        self.grid.iter().copied().filter(|&t| t - 4.0 * self.fd_step(t) >= self.t_min).collect()
    }

    fn formal_of(&self, u: &OdeElement<C>) -> Vec<C> {
        let n = self.levels + 2;
        let mut formal = vec![C::zero(); n];
        for a in &u.atoms {
            for (k, term) in self.images[a.level].terms().iter().enumerate() {
                if a.level + k < n {
                    formal[a.level + k] = formal[a.level + k].add(&term.plus.mul(&a.coeff));
                }
            }
        }
        formal
    }
}

impl<C: Scalar> FilteredProblem for OdeProblem<C> {
    type Element = OdeElement<C>;
    type Target = OdeTarget<C>;
    type Symbol = C;
    type TargetSymbol = C;

    fn levels(&self) -> usize {
        self.levels
    }

    fn zero_element(&self) -> OdeElement<C> {
        OdeElement::zero()
    }

    fn apply(&self, u: &OdeElement<C>) -> OdeTarget<C> {
        OdeTarget { formal: self.formal_of(u), lifted: u.clone() }
    }

    fn symbol_of(&self, j: usize, u: &OdeElement<C>) -> C {
        u.coefficient(j)
    }

    fn target_symbol_of(&self, j: usize, g: &OdeTarget<C>) -> C {
        g.formal.get(j + 1).cloned().unwrap_or_else(C::zero)
    }

    fn transport(&self, j: usize, s: &C) -> C {
        self.transport_factor.mul(&C::from_i64(j as i64)).mul(s)
    }

    fn transport_solve(&self, j: usize, s: &C) -> Result<C, SchemeError> {
        if j == 0 {
            return Err(SchemeError::Transport {
                level: 0,
                reason: "T^0 vanishes at a root of l0; the leading coefficient is fixed by normalization".into(),
            });
        }
        let factor = self.transport_factor.mul(&C::from_i64(j as i64));
        s.div(&factor).ok_or_else(|| SchemeError::Transport { level: j, reason: "l0'(mu) = 0".into() })
    }

    fn extend(&self, j: usize, s: &C) -> OdeElement<C> {
        OdeElement::atom(j, s.clone())
    }

    fn level_norm(&self, j: usize, u: &OdeElement<C>) -> f64 {
        let weight = -self.delta.to_c64().re + ratio_f64(self.op.step()) * j as f64;
        match self.values(u, &self.grid) {
            Ok(vals) => self.grid.iter().zip(vals).map(|(t, v)| v.norm() * t.powf(weight)).fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        }
    }

    fn target_level_norm(&self, j: usize, g: &OdeTarget<C>) -> f64 {
        let s = ratio_f64(self.op.step());
        let anchor = self.delta.to_c64().re + ratio_f64(self.op.lstar()) * self.op.order() as f64;
        let weight = -anchor + s * (j + 1) as f64;
        let times = self.norm_times();
        match self.apply_numeric(&g.lifted, &times) {
            Ok(vals) => times.iter().zip(vals).map(|(t, v)| v.norm() * t.powf(weight)).fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        }
    }

    fn seed(&self, _f: &OdeTarget<C>) -> Option<OdeElement<C>> {
        Some(OdeElement::atom(0, C::one()))
    }

    fn cutoff_apply(&self, scale: f64, u: &OdeElement<C>) -> OdeElement<C> {
        let mut out = u.clone();
        for a in &mut out.atoms {
            a.scale = Some(a.scale.map_or(scale, |c| c.max(scale)));
        }
        out
    }

    fn residual_solve(&self, g: &OdeTarget<C>) -> Option<Result<OdeElement<C>, SchemeError>> {
        let cfg = self.residual?;
        Some((|| {
            let lifted = &g.lifted;
            if lifted.has_correction() {
                return Err(SchemeError::ResidualSolve("target already contains a numerical correction".into()));
            }
            let consistent = self.formal_of(lifted).iter().zip(&g.formal).all(|(a, b)| a.sub(b).near_zero(1e-12));
            if !consistent {
                return Err(SchemeError::ResidualSolve("only the homogeneous equation is supported".into()));
            }
            if cfg.t_hi < 2.0 * lifted.max_scale() || cfg.t_hi <= self.t_min {
                return Err(SchemeError::ResidualSolve(format!(
                    "anchor point {} must lie beyond the cutoff region and the grid start",
                    cfg.t_hi
                )));
            }
            // u = -lifted; w matches u at t_hi
            let base: Vec<Atom<Complex64>> =
                lifted.atoms.iter().map(|a| Atom { level: a.level, coeff: a.coeff.to_c64(), scale: a.scale }).collect();
            let state_hi = (0..self.op.order())
                .map(|k| -base.iter().map(|a| self.atom_derivative(a, cfg.t_hi, k)).sum::<Complex64>())
                .collect();
            let corr = Correction { t_lo: self.t_min, t_hi: cfg.t_hi, state_hi, base };
            Ok(OdeElement { atoms: Vec::new(), corrections: vec![(1.0, Arc::new(corr))] })
        })())
    }
}
