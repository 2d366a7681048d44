//! JSON scenario documents, presets, orchestration and result emission.
//!
//! A scenario is `{particle, surface, numerics, mode}` plus an optional
//! `sweep` block. SI units are spelled out in the key names; surface charge
//! densities are given in elementary charges per m².

mod output;
mod run;
pub mod validate;

use serde::{Deserialize, Deserializer, Serialize};

use crate::channels::DEFAULT_MAX_CHANNELS;
use crate::constants::ELEMENTARY_CHARGE;
use crate::error::{Error, Result};
use crate::potentials::{DopingProfile, ParticleParams, SurfaceConfig, DEFAULT_ELL_MAX};
use crate::propagator::PropagatorConfig;
use crate::analysis::DEFAULT_Z_SAMPLES;

pub use output::{to_csv, to_json, OrderRow};
pub use run::{run_scenario, sweep, BadlandsSummary, ResultRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Specular,
    DiffractCoupled,
    DiffractSudden,
    Badlands,
    Sweep,
    Validate,
}

/// Particle given either by a preset name or explicitly. Explicit fields
/// override the preset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticleSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass_kg: Option<f64>,
    /// C m²/V
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub polarizability_si: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_mps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_rad: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_rad: Option<f64>,
}

impl ParticleSpec {
    pub fn preset(name: &str) -> Self {
        Self { preset: Some(name.to_string()), ..Self::default() }
    }

    pub fn resolve(&self) -> Result<ParticleParams> {
        let base = match self.preset.as_deref() {
            None => None,
            Some("helium") => Some(ParticleParams::helium(300.0, 1e-3, 0.0)),
            Some(other) => return Err(Error::Config(format!("particle.preset: unknown preset {other:?} (known: helium)"))),
        };
        let need = |v: Option<f64>, from: Option<f64>, key: &str| {
            v.or(from).ok_or_else(|| Error::Config(format!("particle.{key} is required without a preset")))
        };
        let p = ParticleParams {
            mass: need(self.mass_kg, base.map(|b| b.mass), "mass_kg")?,
            polarizability: need(self.polarizability_si, base.map(|b| b.polarizability), "polarizability_si")?,
            speed: need(self.speed_mps, base.map(|b| b.speed), "speed_mps")?,
            theta: need(self.theta_rad, base.map(|b| b.theta), "theta_rad")?,
            phi: self.phi_rad.or(base.map(|b| b.phi)).unwrap_or(0.0),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn explicit(p: &ParticleParams) -> Self {
        Self {
            preset: None,
            mass_kg: Some(p.mass),
            polarizability_si: Some(p.polarizability),
            speed_mps: Some(p.speed),
            theta_rad: Some(p.theta),
            phi_rad: Some(p.phi),
        }
    }
}

fn particle_or_name<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<ParticleSpec, D::Error> {
    use serde::de::Error as _;
    let v = serde_json::Value::deserialize(d)?;
    match v {
        serde_json::Value::String(name) => Ok(ParticleSpec::preset(&name)),
        other => serde_json::from_value(other).map_err(|e| D::Error::custom(format!("particle: {e}"))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProfileSpec {
    Harmonic,
    Stripe { f: f64 },
    Gaussian { epsilon_m: f64 },
    FourierTable { sigma_ell_e_per_m2: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    #[serde(default = "default_d_x")]
    pub d_x_m: f64,
    #[serde(default = "default_d_z")]
    pub d_z_m: f64,
    #[serde(default)]
    pub sigma_m_e_per_m2: f64,
    #[serde(default = "default_profile")]
    pub profile: ProfileSpec,
    #[serde(default = "yes")]
    pub casimir_polder: bool,
}

fn default_d_x() -> f64 {
    500e-9
}
fn default_d_z() -> f64 {
    40e-6
}
fn default_profile() -> ProfileSpec {
    ProfileSpec::Harmonic
}
fn yes() -> bool {
    true
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        Self { d_x_m: default_d_x(), d_z_m: default_d_z(), sigma_m_e_per_m2: 0.0, profile: ProfileSpec::Harmonic, casimir_polder: true }
    }
}

impl SurfaceSpec {
    pub fn resolve(&self) -> Result<SurfaceConfig> {
        let profile = match &self.profile {
            ProfileSpec::Harmonic => DopingProfile::Harmonic,
            ProfileSpec::Stripe { f } => DopingProfile::Stripe { f: *f },
            ProfileSpec::Gaussian { epsilon_m } => DopingProfile::Gaussian { epsilon: *epsilon_m },
            ProfileSpec::FourierTable { sigma_ell_e_per_m2 } => DopingProfile::FourierTable {
                sigma_ell: sigma_ell_e_per_m2.iter().map(|s| s * ELEMENTARY_CHARGE).collect(),
            },
        };
        let s = SurfaceConfig {
            d_x: self.d_x_m,
            d_z: self.d_z_m,
            sigma_m: self.sigma_m_e_per_m2 * ELEMENTARY_CHARGE,
            profile,
            casimir_polder: self.casimir_polder,
        };
        s.validate()?;
        Ok(s)
    }
}

/// Propagator settings plus the knobs of the diffraction paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsSpec {
    pub y_start_m: f64,
    pub y_end_m: f64,
    pub steps: usize,
    pub sectors: usize,
    pub auto_bounds: bool,
    pub richardson_check: bool,
    pub badlands_tol: f64,
    pub coupling_tol: f64,
    pub z_samples: usize,
    pub n_closed_extra: usize,
    pub ell_max: usize,
    pub max_channels: usize,
}

impl Default for NumericsSpec {
    fn default() -> Self {
        Self::from_propagator(&PropagatorConfig::default())
    }
}

impl NumericsSpec {
    pub fn from_propagator(c: &PropagatorConfig) -> Self {
        Self {
            y_start_m: c.y_start_m,
            y_end_m: c.y_end_m,
            steps: c.steps,
            sectors: c.sectors,
            auto_bounds: c.auto_bounds,
            richardson_check: c.richardson_check,
            badlands_tol: c.badlands_tol,
            coupling_tol: c.coupling_tol,
            z_samples: DEFAULT_Z_SAMPLES,
            n_closed_extra: 0,
            ell_max: DEFAULT_ELL_MAX,
            max_channels: DEFAULT_MAX_CHANNELS,
        }
    }

    pub fn propagator(&self) -> PropagatorConfig {
        PropagatorConfig {
            y_start_m: self.y_start_m,
            y_end_m: self.y_end_m,
            steps: self.steps,
            sectors: self.sectors,
            auto_bounds: self.auto_bounds,
            richardson_check: self.richardson_check,
            badlands_tol: self.badlands_tol,
            coupling_tol: self.coupling_tol,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.propagator().validate()?;
        if self.z_samples < 3 {
            return Err(Error::Config(format!("numerics: z_samples = {} must be >= 3", self.z_samples)));
        }
        if self.ell_max == 0 {
            return Err(Error::Config("numerics: ell_max must be >= 1".into()));
        }
        if self.max_channels == 0 {
            return Err(Error::Config("numerics: max_channels must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Speed,
    Theta,
    SigmaM,
    DX,
    DZ,
    F,
    Epsilon,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Speed => "speed_mps",
            SweepAxis::Theta => "theta_rad",
            SweepAxis::SigmaM => "sigma_m_e_per_m2",
            SweepAxis::DX => "d_x_m",
            SweepAxis::DZ => "d_z_m",
            SweepAxis::F => "f",
            SweepAxis::Epsilon => "epsilon_m",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    /// Mode solved at every point.
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(deserialize_with = "particle_or_name")]
    pub particle: ParticleSpec,
    #[serde(default)]
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub numerics: NumericsSpec,
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

/// A validated scenario with SI parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub particle: ParticleParams,
    pub surface: SurfaceConfig,
    pub numerics: NumericsSpec,
    pub mode: Mode,
    pub sweep: Option<SweepSpec>,
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Named scenario: `helium` (flat CP reflection), `fig2a` (stripe grating)
    /// or `fig2b` (gaussian grating).
    pub fn preset(name: &str) -> Result<Self> {
        let coupled_numerics = NumericsSpec { steps: 2048, ..NumericsSpec::default() };
        let grating = |sigma: f64, profile: ProfileSpec| SurfaceSpec {
            d_x_m: 500e-9,
            d_z_m: 40e-6,
            sigma_m_e_per_m2: sigma,
            profile,
            casimir_polder: true,
        };
        let cfg = match name {
            "helium" => Self {
                particle: ParticleSpec::preset("helium"),
                surface: SurfaceSpec::default(),
                numerics: NumericsSpec::default(),
                mode: Mode::Specular,
                sweep: None,
            },
            "fig2a" => Self {
                particle: ParticleSpec::preset("helium"),
                surface: grating(1e16, ProfileSpec::Stripe { f: 0.5 }),
                numerics: coupled_numerics,
                mode: Mode::DiffractCoupled,
                sweep: None,
            },
            "fig2b" => Self {
                particle: ParticleSpec::preset("helium"),
                surface: grating(1e15, ProfileSpec::Gaussian { epsilon_m: 4e-6 }),
                numerics: coupled_numerics,
                mode: Mode::DiffractCoupled,
                sweep: None,
            },
            other => return Err(Error::Config(format!("unknown preset {other:?} (known: helium, fig2a, fig2b)"))),
        };
        Ok(cfg)
    }

    /// Checks every field and converts to SI parameters.
    pub fn resolve(&self) -> Result<Scenario> {
        let particle = self.particle.resolve()?;
        let surface = self.surface.resolve()?;
        self.numerics.validate()?;
        match (&self.mode, &self.sweep) {
            (Mode::Sweep, None) => return Err(Error::Config("mode sweep needs a sweep block".into())),
            (Mode::Sweep, Some(sw)) => {
                if matches!(sw.mode, Mode::Sweep | Mode::Validate) {
                    return Err(Error::Config("sweep.mode must be a single-point mode".into()));
                }
                if sw.values.is_empty() || sw.values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Config("sweep.values must be a non-empty list of finite numbers".into()));
                }
            }
            (_, Some(_)) => return Err(Error::Config("a sweep block is only allowed with mode sweep".into())),
            _ => {}
        }
        Ok(Scenario { particle, surface, numerics: self.numerics.clone(), mode: self.mode, sweep: self.sweep.clone() })
    }

    /// The same scenario with the particle written out explicitly.
    pub fn resolved(&self) -> Result<Self> {
        let s = self.resolve()?;
        Ok(Self { particle: ParticleSpec::explicit(&s.particle), ..self.clone() })
    }

    /// Copy with the sweep parameter set to `value`.
    pub fn with_axis_value(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let mut c = self.clone();
        match axis {
            SweepAxis::Speed => c.particle.speed_mps = Some(value),
            SweepAxis::Theta => c.particle.theta_rad = Some(value),
            SweepAxis::SigmaM => c.surface.sigma_m_e_per_m2 = value,
            SweepAxis::DX => c.surface.d_x_m = value,
            SweepAxis::DZ => c.surface.d_z_m = value,
            SweepAxis::F => match &mut c.surface.profile {
                ProfileSpec::Stripe { f } => *f = value,
                _ => return Err(Error::Config("sweep axis f needs a stripe profile".into())),
            },
            SweepAxis::Epsilon => match &mut c.surface.profile {
                ProfileSpec::Gaussian { epsilon_m } => *epsilon_m = value,
                _ => return Err(Error::Config("sweep axis epsilon needs a gaussian profile".into())),
            },
        }
        Ok(c)
    }
}

/// Particle with the shipped helium constants, for callers that prefer SI
/// structs over documents.
pub fn helium_preset() -> ParticleParams {
    ParticleParams::helium(300.0, 1e-3, 0.0)
}
