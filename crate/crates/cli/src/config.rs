//! TOML run configuration with one section per subcommand.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::output::Format;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Ode,
    Parametrix,
    Wave,
    SchemeDemo,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Ode => "ode",
            Subcommand::Parametrix => "parametrix",
            Subcommand::Wave => "wave",
            Subcommand::SchemeDemo => "scheme-demo",
        }
    }
}

fn default_order() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcommand: Option<Subcommand>,
    /// Depth `J`.
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode: Option<OdeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parametrix: Option<ParametrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wave: Option<WaveSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme_demo: Option<DemoSpec>,
}

/// `L = D_t^m + sum_r a_r(t) D_t^{m-r}` with `a_r ~ sum_k a_{r,k} t^{r l* - k(l*+1)}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OdeSpec {
    pub m: usize,
    /// Rational string such as `"1/2"`.
    pub lstar: String,
    /// `coefficients[r-1][k] = a_{r,k}` as exact complex strings (`"1/2-3i"`).
    pub coefficients: Vec<Vec<String>>,
    #[serde(default)]
    pub validation: Validation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Validation {
    /// Series data are imposed here and integrated downward.
    pub anchor: f64,
    pub times: Vec<f64>,
    /// Largest accepted relative deviation between series and integration.
    pub tolerance: f64,
}

impl Default for Validation {
    fn default() -> Self {
        Validation { anchor: 100.0, times: vec![20.0, 40.0, 60.0, 80.0], tolerance: 1e-6 }
    }
}

/// Fourier coefficients `(k, c_k)` of a trigonometric polynomial.
pub type TrigSpec = Vec<(i64, String)>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    /// Coefficient of `|xi|^{m-j}` for `xi > 0`.
    pub plus: TrigSpec,
    /// For `xi < 0`; defaults to `plus`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minus: Option<TrigSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParametrixSpec {
    /// Symbol order `m` as a rational string.
    pub symbol_order: String,
    pub components: Vec<ComponentSpec>,
    #[serde(default)]
    pub probe: Probe,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probe {
    pub frequencies: Vec<i64>,
    pub grid_size: usize,
    pub freq_cut: usize,
    pub excision: f64,
    /// Fails the run when the fitted remainder slope exceeds this value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_slope: Option<f64>,
}

impl Default for Probe {
    fn default() -> Self {
        Probe { frequencies: vec![16, 32, 64, 128, 256], grid_size: 1024, freq_cut: 511, excision: 1.0, max_slope: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// `g0 = 0`, `g1 = i delta`.
    Green,
    /// Data from the `data` table.
    Cauchy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub coeff: f64,
    pub t_pow: u32,
    pub x_pows: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpeedSpec {
    Constant { value: f64 },
    /// `c(t) = sum_k coeffs[k] t^k`.
    TimePoly { coeffs: Vec<f64> },
    SpaceTime { monomials: Vec<MonomialSpec> },
}

/// Order-`j` data: `g0` of degree `mu_bar - j`, `g1` of degree `mu_bar - j + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    pub g0: String,
    pub g1: String,
    /// Values on the antipodal half of the fan; default to `g0`, `g1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g0_antipodal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g1_antipodal: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySpec {
    pub x0: Vec<f64>,
    pub xi0: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhasePointSpec {
    pub t: f64,
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec {
    pub t: f64,
    #[serde(default = "default_offsets")]
    pub offsets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(default = "default_jump_tolerance")]
    pub tolerance: f64,
}

fn default_offsets() -> Vec<f64> {
    vec![0.2, 0.1, 0.05, 0.025]
}

fn default_jump_tolerance() -> f64 {
    1e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSpec {
    pub dim: usize,
    pub variant: Variant,
    pub speed: SpeedSpec,
    pub horizon: f64,
    /// Amplitude time grid; defaults to 21 points on `[0, horizon]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    /// Directions per half fan; defaults to 1 for `n = 1` and 8 otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fan_half: Option<usize>,
    /// Anchor degree for Cauchy data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_bar: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub data: Vec<DataSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rays: Option<RaySpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phase_points: Vec<PhasePointSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jump: Option<JumpSpec>,
    /// Fails the run when a parity defect exceeds this; Green runs default to `1e-10`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity_tolerance: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Instantiation {
    /// The `[ode]` operator at one root.
    Ode,
    /// The `[parametrix]` symbol.
    Circle,
    /// Random exact operators with prescribed rational roots, drawn from `seed`.
    OdeSweep,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormGridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for NormGridSpec {
    fn default() -> Self {
        NormGridSpec { t_min: 10.0, t_max: 1000.0, points: 60 }
    }
}

fn default_cases() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemoSpec {
    pub instantiation: Instantiation,
    /// Root of `l0` for the ODE instantiation; defaults to the largest real root.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    #[serde(default)]
    pub norm_grid: NormGridSpec,
    #[serde(default = "default_cases")]
    pub cases: usize,
}

impl RunConfig {
    /// Minimal configuration for a subcommand whose sections come from elsewhere.
    pub fn empty() -> Self {
        RunConfig {
            subcommand: None,
            order: default_order(),
            format: Format::Csv,
            out: None,
            seed: 0,
            ode: None,
            parametrix: None,
            wave: None,
            scheme_demo: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Schema checks that do not need the numerical layer.
    pub fn validate(&self, sub: Subcommand) -> Result<(), CliError> {
        if let Some(s) = self.subcommand {
            if s != sub {
                return Err(CliError::Config(format!("config is for `{}`, not `{}`", s.name(), sub.name())));
            }
        }
        let need = |present: bool, section: &str| {
            if present {
                Ok(())
            } else {
                Err(CliError::Config(format!("missing [{section}] section")))
            }
        };
        match sub {
            Subcommand::Ode => {
                need(self.ode.is_some(), "ode")?;
                self.require_order()?;
            }
            Subcommand::Parametrix => {
                need(self.parametrix.is_some(), "parametrix")?;
                self.require_order()?;
            }
            Subcommand::Wave => {
                need(self.wave.is_some(), "wave")?;
                self.require_order()?;
            }
            Subcommand::SchemeDemo => {
                let demo = self.scheme_demo.as_ref().ok_or_else(|| CliError::Config("missing [scheme_demo] section".into()))?;
                match demo.instantiation {
                    Instantiation::Ode => need(self.ode.is_some(), "ode")?,
                    Instantiation::Circle => need(self.parametrix.is_some(), "parametrix")?,
                    Instantiation::OdeSweep => {
                        if demo.cases == 0 {
                            return Err(CliError::Config("scheme_demo.cases must be positive".into()));
                        }
                    }
                }
            }
        }
        if let Some(ode) = &self.ode {
            let v = &ode.validation;
            if v.times.is_empty() || !(v.anchor > 0.0) || v.times.iter().any(|t| !(*t > 0.0)) {
                return Err(CliError::Config("ode.validation needs a positive anchor and a nonempty list of positive times".into()));
            }
        }
        if let Some(p) = &self.parametrix {
            if p.components.is_empty() {
                return Err(CliError::Config("parametrix.components must be nonempty".into()));
            }
            if p.probe.frequencies.is_empty() {
                return Err(CliError::Config("parametrix.probe.frequencies must be nonempty".into()));
            }
        }
        if let Some(w) = &self.wave {
            if matches!(&w.times, Some(t) if t.is_empty()) {
                return Err(CliError::Config("wave.times must be nonempty".into()));
            }
            if w.variant == Variant::Cauchy && w.data.is_empty() {
                return Err(CliError::Config("wave.data is required for the cauchy variant".into()));
            }
        }
        Ok(())
    }

    fn require_order(&self) -> Result<(), CliError> {
        if self.order == 0 {
            return Err(CliError::Config("order J must be at least 1".into()));
        }
        Ok(())
    }
}
