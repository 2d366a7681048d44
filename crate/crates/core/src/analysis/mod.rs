//! Closed-form oracles, badlands diagnostics and the sudden approximation.

mod sudden;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channels::{beam_kinematics, default_units, ChannelSet};
use crate::constants::{fine_structure, ELEMENTARY_CHARGE, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::potentials::{ParticleParams, PotentialTable};
use crate::propagator::{solve, PropagatorConfig, ReflectionResult};
use crate::scalar::{sinc, Real};

pub use sudden::{grating_fourier, grating_samples, sudden_solve, DiffractionPattern, PatternMethod, DEFAULT_Z_SAMPLES};

/// Badlands function of the specular channel in reduced units,
/// B = |5Q′²/(16Q³) − Q″/(4Q²)| with Q = p²/ħ² = k² − Ṽ₀(y).
///
/// This is the same quantity as ħ²|(3/4)p′²/p⁴ − p″/(2p³)| written in terms of
/// Q, which avoids differentiating a square root.
pub fn badlands_reduced<T: Real>(table: &PotentialTable<T>, k_sq: T, y: T) -> T {
    let [v, v1, v2] = table.specular_derivatives(y);
    let q = k_sq - v;
    let q1 = -v1;
    let q2 = -v2;
    (T::lit(5.0) * q1 * q1 / (T::lit(16.0) * q * q * q) - q2 / (T::lit(4.0) * q * q)).abs()
}

/// Badlands function at distance `y_m` (m) for normal wavenumber `k0` (1/m).
pub fn badlands<T: Real>(y_m: f64, k0: f64, table: &PotentialTable<T>) -> Result<f64> {
    if table.has_cp() && !(y_m > 0.0) {
        return Err(Error::Domain(format!("badlands evaluated at y = {y_m:e} m")));
    }
    let u = table.units();
    let k = u.wavenumber::<T>(k0);
    Ok(badlands_reduced(table, k * k, u.length(y_m)).as_f64())
}

/// Sampled badlands function with its numerically located maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadlandsProfile {
    /// m
    pub y: Vec<f64>,
    pub b: Vec<f64>,
    /// m
    pub y_max: f64,
    pub b_max: f64,
}

/// Maximum of `f` on [a, b] by golden-section search, to relative tolerance
/// `rel_tol` in the abscissa. Assumes `f` is unimodal on the bracket.
pub fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..500 {
        if (b - a).abs() <= rel_tol * 0.5 * (a.abs() + b.abs()) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Samples B(y) on a logarithmic grid over [y_lo, y_hi] (m) and refines the
/// global maximum by golden-section search around the best sample.
pub fn badlands_profile<T: Real>(
    table: &PotentialTable<T>,
    k0: f64,
    y_lo: f64,
    y_hi: f64,
    samples: usize,
) -> Result<BadlandsProfile> {
    if !(y_lo > 0.0 && y_hi > y_lo) || samples < 3 {
        return Err(Error::Config("badlands profile needs 0 < y_lo < y_hi and at least 3 samples".into()));
    }
    let y: Vec<f64> = (0..samples).map(|i| y_lo * (y_hi / y_lo).powf(i as f64 / (samples - 1) as f64)).collect();
    let b = y.iter().map(|&yy| badlands(yy, k0, table)).collect::<Result<Vec<_>>>()?;
    let best = (0..samples).fold(0, |m, i| if b[i] > b[m] { i } else { m });
    let lo = y[best.saturating_sub(1)];
    let hi = y[(best + 1).min(samples - 1)];
    let (y_max, b_max) = golden_section_max(|yy| badlands(yy, k0, table).unwrap_or(0.0), lo, hi, 1e-4);
    Ok(BadlandsProfile { y, b, y_max, b_max })
}

/// Integration bounds (reduced) where the specular badlands function is below
/// `tol`.
///
/// With the CP tail, the inner bound is the inner crossing B = tol, moved
/// further in until the electrostatic terms are below `coupling_tol` times the
/// CP potential. The outer bound starts at max(10 y_CP, 10/λ) for the slowest
/// exponential rate λ and grows until B < tol and the whole potential is
/// below tol·k₀², so that the plane-wave matching ignores nothing larger.
/// Without CP the potential is finite at the surface and the
/// inner bound may be at or behind y = 0.
pub fn auto_bounds<T: Real>(table: &PotentialTable<T>, k0_sq: T, tol: f64, coupling_tol: f64) -> Result<(T, T)> {
    let bad = |y: T| badlands_reduced(table, k0_sq, y).as_f64();
    let min_rate = table
        .terms(0)
        .iter()
        .map(|t| t.rate.as_f64())
        .chain((1..=table.max_order()).flat_map(|d| table.terms(d as i64).iter().map(|t| t.rate.as_f64())))
        .fold(f64::INFINITY, f64::min);
    let units = table.units();
    let k0 = k0_sq.as_f64().sqrt();

    let (inner, base) = if table.has_cp() {
        let cp = table.cp().as_f64();
        let y_cp = cp.powf(0.25) / k0.sqrt();
        let mut y = y_cp;
        let mut n = 0;
        while bad(T::lit(y)) >= tol {
            y *= 0.8;
            n += 1;
            if n > 400 {
                return Err(Error::BadlandsStart { y_start_m: units.length * y, value: bad(T::lit(y)), threshold: tol });
            }
        }
        // Log-bisection for the crossing.
        let (mut lo, mut hi) = (y, y / 0.8);
        if hi < y_cp {
            for _ in 0..60 {
                let mid = (lo * hi).sqrt();
                if bad(T::lit(mid)) < tol {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
        }
        let mut y = lo;
        for _ in 0..400 {
            let el = table.electrostatic_row_bound(T::lit(y)).as_f64();
            if el <= coupling_tol * cp / y.powi(4) {
                break;
            }
            y *= 0.95;
        }
        let rate_base = if min_rate.is_finite() { 10.0 / min_rate } else { 0.0 };
        (y, (10.0 * y_cp).max(rate_base))
    } else {
        if !min_rate.is_finite() {
            return Err(Error::Config("potential table is empty: nothing to integrate".into()));
        }
        // Walk inward from the surface until B < tol, or outward while it
        // stays below, then bisect the crossing.
        let step = 0.25 / min_rate;
        let mut y = 0.0;
        let mut n = 0;
        let (lo, hi) = if bad(T::lit(y)) < tol {
            while bad(T::lit(y + step)) < tol && n < 400 {
                y += step;
                n += 1;
            }
            (y, y + step)
        } else {
            while bad(T::lit(y)) >= tol {
                y -= step;
                n += 1;
                if n > 400 {
                    return Err(Error::BadlandsStart { y_start_m: units.length * y, value: bad(T::lit(y)), threshold: tol });
                }
            }
            (y, y + step)
        };
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if bad(T::lit(mid)) < tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo, 10.0 / min_rate)
    };

    let mut y = base.max(inner * 2.0).max(inner + 1e-12);
    let mut n = 0;
    loop {
        let yt = T::lit(y);
        let v = table.electrostatic_row_bound(yt).as_f64() + table.cp().as_f64() / y.powi(4);
        let b = bad(yt);
        if b < tol && v <= tol * k0 * k0 {
            break;
        }
        y *= 1.25;
        n += 1;
        if n > 400 {
            return Err(Error::BadlandsEnd { y_end_m: units.length * y, value: b, threshold: tol });
        }
    }
    Ok((T::lit(inner), T::lit(y)))
}

/// CP reflection distance y_CP = (v₀ sin θ)^{−1/2} (3ħcα / (16π²ε₀ m))^{1/4}, m.
///
/// Depends on the particle only through α/m and v₀ sin θ. It coincides with
/// √(b_CP/k₀), the location of the CP badlands maximum.
pub fn y_cp(particle: &ParticleParams) -> f64 {
    let v = particle.speed * particle.theta.sin();
    let inner = 3.0 * HBAR * SPEED_OF_LIGHT * particle.polarizability / (16.0 * PI * PI * EPSILON_0 * particle.mass);
    inner.powf(0.25) / v.sqrt()
}

/// Location of the electrostatically dominated badlands maximum,
/// y_el = (dₓ/4π) ln[64π³α_f σ₁² y_CP⁴ / (3(5 − √21) e₀²)], m.
///
/// `None` when the logarithm's argument is ≤ 1: no such maximum exists.
pub fn y_el(particle: &ParticleParams, sigma_1: f64, d_x: f64) -> Option<f64> {
    let ycp = y_cp(particle);
    let s = sigma_1 / ELEMENTARY_CHARGE;
    let arg = 64.0 * PI.powi(3) * fine_structure() / (3.0 * (5.0 - 21f64.sqrt())) * s * s * ycp.powi(4);
    (arg > 1.0).then(|| d_x / (4.0 * PI) * arg.ln())
}

/// Reflectivity of a pure exponential well, e^{−k₀dₓ}.
pub fn exponential_well_reflectivity(k0: f64, d_x: f64) -> f64 {
    (-k0 * d_x).exp()
}

/// Diffraction intensity of an ideal stripe grating,
/// Rₙ = R_CP (1 − f)² sinc²[n(1 − f)π].
pub fn stripe_analytic(n: i64, f: f64, r_cp: f64) -> f64 {
    let o = 1.0 - f;
    let s = sinc(n as f64 * o * PI);
    r_cp * o * o * s * s
}

/// Reflection from the bare retarded CP tail, single specular channel.
pub fn flat_cp_solve(particle: &ParticleParams, config: &PropagatorConfig) -> Result<ReflectionResult> {
    particle.validate()?;
    if particle.polarizability == 0.0 {
        return Err(Error::Config("flat CP reflection needs a polarizable particle".into()));
    }
    let units = default_units(particle, None);
    let table = PotentialTable::<f64>::flat(particle, units);
    let channels = ChannelSet::single(beam_kinematics(particle));
    solve(&channels, &table, config)
}

/// R_CP = |r_CP|² of the flat surface.
pub fn flat_cp_reflectivity(particle: &ParticleParams, config: &PropagatorConfig) -> Result<f64> {
    Ok(flat_cp_solve(particle, config)?.r_total)
}

#[cfg(test)]
mod tests;
