//! TOML run configuration. Every section is optional; missing keys take the
//! defaults listed in `docs/config.md`. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use onetangle::analysis::{TimeMode, DEFAULT_TIME_STEPS};
use onetangle::ensemble::{EnsembleSpec, SpeciesSpec};
use onetangle::evolution::{EvolutionKind, EvolutionSpec};
use onetangle::model::{NcVariant, NucleusParams, Quadrupole};
use onetangle::spin_algebra::Spin;
use onetangle::sweep::Axis;
use serde::Deserialize;

use crate::CliError;

/// An angle given in radians or as text such as `"pi/3"`, `"-pi/4"`,
/// `"2pi/3"` or `"0.25 pi"`.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(try_from = "AngleRepr")]
pub struct Angle(pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum AngleRepr {
    Radians(f64),
    Text(String),
}

impl TryFrom<AngleRepr> for Angle {
    type Error = String;

    fn try_from(r: AngleRepr) -> Result<Self, String> {
        match r {
            AngleRepr::Radians(v) => Ok(Angle(v)),
            AngleRepr::Text(s) => parse_angle(&s).map(Angle),
        }
    }
}

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read angle {text:?}; use radians or forms like \"pi/3\"");
    let Some(pos) = s.find("pi") else {
        return s.parse::<f64>().map_err(|_| bad());
    };
    let (coef, rest) = (&s[..pos], &s[pos + 2..]);
    let coef = match coef.trim_end_matches('*') {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let div = match rest {
        "" => 1.0,
        r => r.strip_prefix('/').and_then(|d| d.parse::<f64>().ok()).ok_or_else(bad)?,
    };
    if div == 0.0 {
        return Err(bad());
    }
    Ok(coef * PI / div)
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub variant: NcVariant,
    pub nucleus: NucleusSection,
    pub time: Option<TimeGrid>,
    pub evolution: Option<EvolutionSection>,
    pub ensemble: EnsembleSection,
    pub sweep: SweepSection,
    pub resonances: ResonanceSection,
    pub oracle: OracleSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// A single nucleus; defaults are a spin-3/2 gallium-71 nucleus at 1 T.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NucleusSection {
    /// Nuclear spin quantum number (1.5, 4.5, ...).
    pub spin: f64,
    /// MHz
    pub nu_larmor: f64,
    /// MHz
    pub a: f64,
    /// MHz
    pub a_nc: f64,
    /// MHz; mutually exclusive with `omega_q`.
    pub delta_q: Option<f64>,
    /// MHz; `Delta_Q` then follows from the strain angle.
    pub omega_q: Option<f64>,
    pub theta: Angle,
    pub species: String,
    pub nu_electron: Option<f64>,
}

impl Default for NucleusSection {
    fn default() -> Self {
        Self {
            spin: 1.5,
            nu_larmor: 12.98,
            a: 0.23,
            a_nc: 0.056,
            delta_q: None,
            omega_q: None,
            theta: Angle(PI / 3.0),
            species: "Ga71".into(),
            nu_electron: None,
        }
    }
}

impl NucleusSection {
    pub fn params(&self) -> Result<NucleusParams, CliError> {
        let quadrupole = match (self.delta_q, self.omega_q) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "nucleus: give either delta_q or omega_q, not both".into(),
                ))
            }
            (None, Some(omega_q)) => Quadrupole::Strain { omega_q },
            (dq, None) => Quadrupole::Direct {
                delta_q: dq.unwrap_or(0.034),
            },
        };
        let p = NucleusParams {
            spin: Spin::new(self.spin).map_err(|e| CliError::Config(format!("nucleus.spin: {e}")))?,
            nu_larmor: self.nu_larmor,
            a: self.a,
            a_nc: self.a_nc,
            quadrupole,
            theta: self.theta.0,
            species: self.species.clone(),
            nu_electron: self.nu_electron,
        };
        p.validate().map_err(|e| CliError::Config(format!("nucleus: {e}")))?;
        for w in p.hierarchy_warnings() {
            log::warn!("{w}");
        }
        Ok(p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
    List,
}

/// Evolution times in us.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGrid {
    pub spacing: Spacing,
    pub start: f64,
    pub end: f64,
    pub n: usize,
    pub values: Vec<f64>,
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self::linear(0.0, 10.0, 1001)
    }
}

impl TimeGrid {
    pub fn linear(start: f64, end: f64, n: usize) -> Self {
        Self {
            spacing: Spacing::Linear,
            start,
            end,
            n,
            values: Vec::new(),
        }
    }

    pub fn log(start: f64, end: f64, n: usize) -> Self {
        Self {
            spacing: Spacing::Log,
            ..Self::linear(start, end, n)
        }
    }

    pub fn times(&self) -> Result<Vec<f64>, CliError> {
        let axis = match self.spacing {
            Spacing::Linear => Axis::linspace("t_us", self.start, self.end, self.n),
            Spacing::Log => {
                if !(self.start > 0.0 && self.end > 0.0) {
                    return Err(CliError::Config("time: log spacing needs start, end > 0".into()));
                }
                Axis::logspace("t_us", self.start, self.end, self.n)
            }
            Spacing::List => Axis::new("t_us", self.values.clone()),
        };
        if axis.values.iter().any(|&t| !(t.is_finite() && t >= 0.0)) {
            return Err(CliError::Config("time: every time must be finite and >= 0".into()));
        }
        axis.validate().map_err(|e| CliError::Config(format!("time: {e}")))?;
        Ok(axis.values)
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub kind: EvolutionKind,
    #[serde(default = "one")]
    pub n_iterations: u32,
}

fn one() -> u32 {
    1
}

impl EvolutionSection {
    /// Spec with a placeholder duration; callers set the time per point.
    pub fn spec(&self) -> Result<EvolutionSpec, CliError> {
        let spec = EvolutionSpec {
            kind: self.kind,
            n_iterations: self.n_iterations,
            duration: 0.0,
        };
        spec.validate().map_err(|e| CliError::Config(format!("evolution: {e}")))?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    Gallium,
    Mixed,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeciesSection {
    pub label: String,
    pub j: f64,
    /// MHz/T
    pub nu_per_tesla: f64,
    pub fraction: f64,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub preset: Preset,
    pub radius_max: Option<f64>,
    pub dr: Option<f64>,
    pub sigma: Option<f64>,
    pub a_scale: Option<f64>,
    pub wq_scale: Option<f64>,
    pub theta: Option<Angle>,
    pub a_nc: Option<f64>,
    pub b_field: Option<f64>,
    pub n_target: Option<u64>,
    pub species: Option<Vec<SpeciesSection>>,
    /// Ensemble table to load instead of generating one.
    pub input: Option<PathBuf>,
    pub omega_sweep: OmegaSweep,
}

impl EnsembleSection {
    pub fn spec(&self, seed: u64) -> Result<EnsembleSpec, CliError> {
        let base = match self.preset {
            Preset::Gallium => EnsembleSpec::default(),
            Preset::Mixed => EnsembleSpec::mixed_gallium_indium(),
        };
        let species_mix = match &self.species {
            None => base.species_mix.clone(),
            Some(list) => list
                .iter()
                .map(|s| {
                    Ok(SpeciesSpec {
                        label: s.label.clone(),
                        spin: Spin::new(s.j)
                            .map_err(|e| CliError::Config(format!("ensemble.species.j: {e}")))?,
                        nu_per_tesla: s.nu_per_tesla,
                        fraction: s.fraction,
                    })
                })
                .collect::<Result<_, CliError>>()?,
        };
        let spec = EnsembleSpec {
            radius_max: self.radius_max.unwrap_or(base.radius_max),
            dr: self.dr.unwrap_or(base.dr),
            sigma: self.sigma.unwrap_or(base.sigma),
            a_scale: self.a_scale.unwrap_or(base.a_scale),
            wq_scale: self.wq_scale.unwrap_or(base.wq_scale),
            theta: self.theta.map_or(base.theta, |a| a.0),
            a_nc: self.a_nc.unwrap_or(base.a_nc),
            species_mix,
            b_field: self.b_field.unwrap_or(base.b_field),
            n_target: self.n_target.unwrap_or(base.n_target),
            seed,
        };
        spec.validate().map_err(|e| CliError::Config(format!("ensemble: {e}")))?;
        Ok(spec)
    }
}

/// Dephasing time against the Larmor frequency of the first species.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OmegaSweep {
    /// MHz
    pub start: f64,
    /// MHz
    pub end: f64,
    /// MHz
    pub step: f64,
    pub n_target: u64,
}

impl Default for OmegaSweep {
    fn default() -> Self {
        Self {
            start: 5.67,
            end: 13.2,
            step: 0.096,
            n_target: 272,
        }
    }
}

impl OmegaSweep {
    pub fn frequencies(&self) -> Result<Vec<f64>, CliError> {
        if !(self.step > 0.0 && self.end >= self.start) {
            return Err(CliError::Config("ensemble.omega_sweep needs step > 0 and end >= start".into()));
        }
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize + 1;
        Ok((0..n).map(|k| self.start + self.step * k as f64).collect())
    }
}

/// Grid over `|a|/nu` (x) and `Delta_Q/nu` (y). The nucleus section is the
/// template; its `a` only contributes a sign.
#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
    /// Fixed total duration in us.
    pub fixed_t: Option<f64>,
    /// Maximize over `(0, t_max]` instead.
    pub t_max: Option<f64>,
    pub steps: usize,
    /// Full-Hamiltonian eigenvalues for the gap map.
    pub full_gap: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            x_min: 0.0,
            x_max: 4.0,
            nx: 200,
            y_min: 0.0,
            y_max: 1.2,
            ny: 200,
            fixed_t: None,
            t_max: None,
            steps: DEFAULT_TIME_STEPS,
            full_gap: false,
        }
    }
}

impl SweepSection {
    pub fn time_mode(&self) -> Result<TimeMode, CliError> {
        match (self.fixed_t, self.t_max) {
            (Some(_), Some(_)) => Err(CliError::Config("sweep: give fixed_t or t_max, not both".into())),
            (None, Some(t_max)) => Ok(TimeMode::MaxOverGrid {
                t_max,
                steps: self.steps,
            }),
            (t, None) => Ok(TimeMode::FixedT(t.unwrap_or(23.4))),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResonanceSection {
    /// MHz; defaults to the nucleus coupling.
    pub a: Option<f64>,
    pub k_max: u32,
}

impl Default for ResonanceSection {
    fn default() -> Self {
        Self { a: None, k_max: 10 }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    /// Nuclear dimensions next to the electron.
    pub nuclei: Vec<usize>,
    pub instances: usize,
    pub tolerance: f64,
    /// Random instances also checked by Monte Carlo.
    pub mc_instances: usize,
    pub mc_samples: usize,
    pub pedersen_pairs: usize,
    pub pedersen_samples: usize,
    /// Acceptance margin in standard errors.
    pub sigmas: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            nuclei: vec![4],
            instances: 50,
            tolerance: 1e-10,
            mc_instances: 2,
            mc_samples: 20_000,
            pedersen_pairs: 5,
            pedersen_samples: 20_000,
            sigmas: 3.0,
        }
    }
}
