use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{beam_kinematics, build_channels, ChannelSet, DEFAULT_MAX_CHANNELS};
use crate::error::{Error, Result};
use crate::potentials::{DiffractionAxis, ParticleParams, PotentialTable, ReducedUnits, SurfaceConfig, DEFAULT_ELL_MAX};
use crate::propagator::{solve, PropagatorConfig, ReflectionResult};

pub const DEFAULT_Z_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternMethod {
    CoupledChannel,
    Sudden,
    AnalyticStripe,
}

/// Diffraction probabilities per order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffractionPattern {
    pub orders: Vec<i64>,
    pub r_n: Vec<Complex<f64>>,
    #[serde(rename = "R_n")]
    pub big_r_n: Vec<f64>,
    #[serde(rename = "R_total")]
    pub r_total: f64,
    pub method: PatternMethod,
    /// (1/a_z)∫|r(z)|²dz on the sample grid (sudden path only).
    pub mean_reflectivity: Option<f64>,
    pub warnings: Vec<String>,
}

impl DiffractionPattern {
    pub fn probability(&self, n: i64) -> Option<f64> {
        self.orders.iter().position(|&m| m == n).map(|i| self.big_r_n[i])
    }

    pub fn from_reflection(r: &ReflectionResult) -> Self {
        Self {
            orders: r.orders.clone(),
            r_n: r.r_n.clone(),
            big_r_n: r.big_r_n.clone(),
            r_total: r.r_total,
            method: PatternMethod::CoupledChannel,
            mean_reflectivity: None,
            warnings: r.diagnostics.warnings.clone(),
        }
    }
}

/// Trapezoidal estimate of rₙ = (1/a_z)∫r(z)e^{−inq_z z}dz from samples on a
/// uniform grid covering one period.
pub fn grating_fourier(r_z: &[Complex<f64>], z: &[f64], q: f64, orders: &[i64]) -> Vec<Complex<f64>> {
    let inv_n = 1.0 / r_z.len() as f64;
    orders
        .iter()
        .map(|&n| {
            r_z.iter()
                .zip(z)
                .map(|(r, &zz)| r * Complex::from_polar(1.0, -(n as f64) * q * zz))
                .sum::<Complex<f64>>()
                * inv_n
        })
        .collect()
}

/// Midpoint sample positions of one grating period centred on z = 0.
pub fn grating_samples(d_z: f64, z_samples: usize) -> Vec<f64> {
    (0..z_samples).map(|j| ((j as f64 + 0.5) / z_samples as f64 - 0.5) * d_z).collect()
}

/// Diffraction along the grating with the grating coordinate treated
/// parametrically: r(z) is the single-channel reflection amplitude of the
/// local specular potential with σ₁ → σₘΔ(z), and
/// rₙ = (1/a_z)∫r(z)e^{−inq_z z}dz by the trapezoidal rule on `z_samples`
/// midpoint samples.
pub fn sudden_solve(
    particle: &ParticleParams,
    surface: &SurfaceConfig,
    z_samples: usize,
    config: &PropagatorConfig,
) -> Result<DiffractionPattern> {
    particle.validate()?;
    surface.validate()?;
    config.validate()?;
    if surface.axis() != DiffractionAxis::Z {
        return Err(Error::Config("the sudden path needs a grating profile (stripe or gaussian)".into()));
    }
    if z_samples < 3 {
        return Err(Error::Config(format!("z_samples = {z_samples} must be >= 3")));
    }
    let mut warnings = Vec::new();
    let beam = beam_kinematics(particle);
    let k0 = -beam.k_y;
    let q = surface.q_z();
    let sudden = 2.0 * PI / (surface.d_z * k0);
    if sudden > 0.1 {
        warnings.push(format!("2π/(d_z k₀) = {sudden:.3} is not small; the sudden approximation is doubtful"));
    }
    if let Some(w) = surface.period_ratio_warning() {
        warnings.push(w);
    }
    let open = build_channels(beam, DiffractionAxis::Z, q, 0, DEFAULT_MAX_CHANNELS)?;
    if !open.excluded().is_empty() {
        warnings.push(format!("near-threshold orders excluded: {:?}", open.excluded()));
    }
    let n_max = ((z_samples - 1) / 2) as i64;
    let orders: Vec<i64> = open.orders().iter().copied().filter(|n| n.abs() <= n_max).collect();

    let d = surface.d_z;
    let z = grating_samples(d, z_samples);
    let deltas: Vec<f64> = z.iter().map(|&zz| surface.delta(zz)).collect();
    let mut unique: BTreeMap<u64, f64> = BTreeMap::new();
    for &dl in &deltas {
        unique.insert(dl.to_bits(), dl);
    }

    let units = ReducedUnits::for_surface(particle, surface);
    let single = ChannelSet::single(beam);
    let amplitudes: Vec<(u64, Result<Complex<f64>>)> = unique
        .into_par_iter()
        .map(|(key, dl)| {
            let r = if dl == 0.0 && !surface.casimir_polder {
                Ok(Complex::new(0.0, 0.0))
            } else {
                let table = PotentialTable::<f64>::specular(particle, surface, units, dl, DEFAULT_ELL_MAX);
                solve(&single, &table, config).map(|res| res.r_n[0])
            };
            (key, r)
        })
        .collect();
    let mut lookup = BTreeMap::new();
    for (key, r) in amplitudes {
        lookup.insert(key, r?);
    }
    let r_z: Vec<Complex<f64>> = deltas.iter().map(|dl| lookup[&dl.to_bits()]).collect();

    let inv_n = 1.0 / z_samples as f64;
    let r_n = grating_fourier(&r_z, &z, q, &orders);
    let big_r_n: Vec<f64> = r_n.iter().map(|c| c.norm_sqr()).collect();
    let r_total = big_r_n.iter().sum();
    let mean = r_z.iter().map(|r| r.norm_sqr()).sum::<f64>() * inv_n;
    Ok(DiffractionPattern {
        orders,
        r_n,
        big_r_n,
        r_total,
        method: PatternMethod::Sudden,
        mean_reflectivity: Some(mean),
        warnings,
    })
}
