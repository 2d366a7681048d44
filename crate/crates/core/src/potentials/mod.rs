//! Casimir-Polder and electrostatic interaction potentials of a periodically
//! doped surface, and their Fourier components.
//!
//! Functions in this module take SI inputs. [`PotentialTable`] holds the same
//! potentials converted to reduced units for the solvers.

mod table;

pub use table::{ExpTerm, PotentialTable, ReducedUnits};

use std::f64::consts::PI;

use crate::constants::{self, ELEMENTARY_CHARGE, EPSILON_0, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};
use crate::scalar::{sinc, Real};

/// Default number of Fourier terms kept for tabulated doping profiles.
pub const DEFAULT_ELL_MAX: usize = 64;

/// Incoming particle: mass, polarizability and beam geometry (SI units).
///
/// `theta` is measured from the surface plane, `phi` is the azimuth with
/// respect to the short doping period direction x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleParams {
    /// kg
    pub mass: f64,
    /// C m²/V
    pub polarizability: f64,
    /// m/s
    pub speed: f64,
    /// rad
    pub theta: f64,
    /// rad
    pub phi: f64,
}

impl ParticleParams {
    pub fn new(mass: f64, polarizability: f64, speed: f64, theta: f64, phi: f64) -> Result<Self> {
        let p = Self { mass, polarizability, speed, theta, phi };
        p.validate()?;
        Ok(p)
    }

    /// Helium-4 with the shipped mass and polarizability.
    pub fn helium(speed: f64, theta: f64, phi: f64) -> Self {
        Self {
            mass: constants::HELIUM_MASS,
            polarizability: constants::polarizability_from_volume(constants::HELIUM_POLARIZABILITY_VOLUME),
            speed,
            theta,
            phi,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(format!("particle: {msg}")));
        if !(self.mass.is_finite() && self.mass > 0.0) {
            return bad("mass must be > 0");
        }
        if !(self.polarizability.is_finite() && self.polarizability >= 0.0) {
            return bad("polarizability must be >= 0");
        }
        if !(self.speed.is_finite() && self.speed > 0.0) {
            return bad("speed must be > 0");
        }
        if !(self.theta > 0.0 && self.theta <= PI / 2.0) {
            return bad("theta must lie in (0, pi/2]");
        }
        if !(self.phi >= 0.0 && self.phi < 2.0 * PI) {
            return bad("phi must lie in [0, 2pi)");
        }
        Ok(())
    }

    pub fn c4(&self) -> f64 {
        c4_coefficient(self)
    }

    /// Characteristic length of the retarded CP tail, √(2mC₄)/ħ.
    pub fn b_cp(&self) -> f64 {
        (2.0 * self.mass * self.c4()).sqrt() / HBAR
    }

    /// Total wavenumber m v₀ / ħ.
    pub fn wavenumber(&self) -> f64 {
        self.mass * self.speed / HBAR
    }

    /// Normal wavenumber k₀ = k sin θ.
    pub fn normal_wavenumber(&self) -> f64 {
        self.wavenumber() * self.theta.sin()
    }
}

/// Shape of the doping.
///
/// `Harmonic` and `FourierTable` describe the short-period profile along x and
/// produce x-diffraction. `Stripe` and `Gaussian` describe the slow modulation
/// Δ(z) of the first x-Fourier coefficient, σ₁(z) = σₘ Δ(z), and produce
/// diffraction along the grating direction z.
#[derive(Debug, Clone, PartialEq)]
pub enum DopingProfile {
    /// σ(x) = σₘ cos(κₓ x).
    Harmonic,
    /// Rectangular bars of width f·d_z centred on z = n d_z.
    Stripe { f: f64 },
    /// Gaussian bars of standard width `epsilon` (m) centred on z = n d_z.
    Gaussian { epsilon: f64 },
    /// Explicit Fourier coefficients σ_ℓ (C/m²) for ℓ = 1, 2, ...
    /// σ₀ is zero by construction (neutral surface).
    FourierTable { sigma_ell: Vec<f64> },
}

/// Direction along which the potential couples diffraction orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffractionAxis {
    X,
    Z,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceConfig {
    /// Short doping period, m.
    pub d_x: f64,
    /// Grating period, m. The grating period a_z is taken equal to d_z.
    pub d_z: f64,
    /// Doping amplitude σₘ, C/m².
    pub sigma_m: f64,
    pub profile: DopingProfile,
    /// Include the retarded Casimir-Polder tail. Switching it off leaves the
    /// bare electrostatic (exponential) potential.
    pub casimir_polder: bool,
}

impl SurfaceConfig {
    pub fn new(d_x: f64, d_z: f64, sigma_m: f64, profile: DopingProfile) -> Result<Self> {
        let s = Self { d_x, d_z, sigma_m, profile, casimir_polder: true };
        s.validate()?;
        Ok(s)
    }

    /// An undoped surface: CP reflection only.
    pub fn flat() -> Self {
        Self { d_x: 500e-9, d_z: 40e-6, sigma_m: 0.0, profile: DopingProfile::Harmonic, casimir_polder: true }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(format!("surface: {msg}")));
        if !(self.d_x.is_finite() && self.d_x > 0.0) {
            return bad("d_x must be > 0".into());
        }
        if !(self.d_z.is_finite() && self.d_z > 0.0) {
            return bad("d_z must be > 0".into());
        }
        if !(self.sigma_m.is_finite() && self.sigma_m >= 0.0) {
            return bad("sigma_m must be >= 0".into());
        }
        match &self.profile {
            DopingProfile::Harmonic => {}
            DopingProfile::Stripe { f } => {
                if !(*f >= 0.0 && *f < 1.0) {
                    return bad(format!("stripe fraction f = {f} outside [0, 1)"));
                }
            }
            DopingProfile::Gaussian { epsilon } => {
                if !(*epsilon > 0.0 && *epsilon < self.d_z / 4.0) {
                    return bad(format!(
                        "gaussian width epsilon = {epsilon:e} m must lie in (0, d_z/4); neighbouring bars overlap"
                    ));
                }
            }
            DopingProfile::FourierTable { sigma_ell } => {
                if sigma_ell.is_empty() {
                    return bad("fourier table needs at least sigma_1".into());
                }
                if sigma_ell.iter().any(|s| !s.is_finite()) {
                    return bad("fourier table entries must be finite".into());
                }
            }
        }
        Ok(())
    }

    pub fn kappa_x(&self) -> f64 {
        2.0 * PI / self.d_x
    }

    pub fn q_z(&self) -> f64 {
        2.0 * PI / self.d_z
    }

    pub fn axis(&self) -> DiffractionAxis {
        match self.profile {
            DopingProfile::Harmonic | DopingProfile::FourierTable { .. } => DiffractionAxis::X,
            DopingProfile::Stripe { .. } | DopingProfile::Gaussian { .. } => DiffractionAxis::Z,
        }
    }

    /// Grating wavevector of the diffraction axis.
    pub fn grating_wavevector(&self) -> f64 {
        match self.axis() {
            DiffractionAxis::X => self.kappa_x(),
            DiffractionAxis::Z => self.q_z(),
        }
    }

    /// Warning when the two doping periods are not well separated.
    pub fn period_ratio_warning(&self) -> Option<String> {
        let ratio = self.d_x / self.d_z;
        (ratio >= 0.1).then(|| format!("d_x/d_z = {ratio:.3} is not small; the asymptotic specular potential is unreliable"))
    }

    /// x-Fourier coefficients σ_ℓ (ℓ = 1..) at full modulation, truncated at `ell_max`.
    pub fn x_coefficients(&self, ell_max: usize) -> Vec<f64> {
        match &self.profile {
            DopingProfile::Harmonic => vec![self.sigma_m / 2.0],
            DopingProfile::Stripe { .. } | DopingProfile::Gaussian { .. } => vec![self.sigma_m],
            DopingProfile::FourierTable { sigma_ell } => sigma_ell.iter().take(ell_max.max(1)).copied().collect(),
        }
    }

    /// Modulation Δ(z) of the first Fourier coefficient along the grating.
    pub fn delta(&self, z: f64) -> f64 {
        let d = self.d_z;
        match &self.profile {
            DopingProfile::Stripe { f } => {
                let zr = z - d * (z / d).round();
                if zr.abs() < f * d / 2.0 {
                    1.0
                } else {
                    0.0
                }
            }
            DopingProfile::Gaussian { epsilon } => {
                let centre = (z / d).round();
                (-3..=3)
                    .map(|k| {
                        let s = z - (centre + k as f64) * d;
                        (-(s * s) / (2.0 * epsilon * epsilon)).exp()
                    })
                    .sum()
            }
            DopingProfile::Harmonic | DopingProfile::FourierTable { .. } => 1.0,
        }
    }

    /// Fourier coefficient (1/a_z)∫Δ²(z) e^{-inq_z z} dz in closed form.
    pub fn delta_sq_fourier(&self, n: i64) -> f64 {
        match &self.profile {
            DopingProfile::Stripe { f } => f * sinc(n as f64 * f * PI),
            DopingProfile::Gaussian { epsilon } => {
                let x = n as f64 * epsilon * PI / self.d_z;
                epsilon * PI.sqrt() / self.d_z * (-x * x).exp()
            }
            DopingProfile::Harmonic | DopingProfile::FourierTable { .. } => {
                if n == 0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// C₄ = 3ħcα / (32π²ε₀) of the retarded CP tail, J m⁴.
pub fn c4_coefficient(particle: &ParticleParams) -> f64 {
    3.0 * HBAR * SPEED_OF_LIGHT * particle.polarizability / (32.0 * PI * PI * EPSILON_0)
}

/// Retarded Casimir-Polder potential −C₄/y⁴.
pub fn cp_potential<T: Real>(y: T, c4: T) -> Result<T> {
    if !(y > T::zero()) {
        return Err(Error::Domain(format!("CP potential evaluated at y = {y} <= 0")));
    }
    let y2 = y * y;
    Ok(-c4 / (y2 * y2))
}

/// Asymptotic electric field (Eₓ, E_y) above a doping profile with
/// x-Fourier coefficients `sigma_ell` (σ₁, σ₂, ...).
pub fn surface_field<T: Real>(x: T, y: T, sigma_ell: &[T], kappa_x: T) -> Result<[T; 2]> {
    if !(y > T::zero()) {
        return Err(Error::Domain(format!("field evaluated at y = {y} <= 0")));
    }
    let inv_eps0 = T::lit(1.0 / EPSILON_0);
    let mut field = [T::zero(); 2];
    for (i, &s) in sigma_ell.iter().enumerate() {
        let nk = T::lit((i + 1) as f64) * kappa_x;
        let amp = s * (-nk * y).exp() * inv_eps0;
        field[0] = field[0] + amp * (nk * x).sin();
        field[1] = field[1] + amp * (nk * x).cos();
    }
    Ok(field)
}

/// n-th Fourier component of the interaction potential for an x-profile with
/// coefficients `sigma_ell` (σ₁ .. σ_ℓmax), J. For n = 0 the CP term −C₄/y⁴
/// is included.
pub fn electro_fourier<T: Real>(sigma_ell: &[T], alpha: T, kappa_x: T, n: i64, y: T, c4: T) -> Result<T> {
    if sigma_ell.is_empty() {
        return Err(Error::Config("Fourier truncation ell_max must be >= 1".into()));
    }
    if !(y > T::zero()) {
        return Err(Error::Domain(format!("potential evaluated at y = {y} <= 0")));
    }
    let d = n.unsigned_abs() as usize;
    let pref = alpha / T::lit(2.0 * EPSILON_0 * EPSILON_0);
    let mut sum = T::zero();
    for ell in 1..=sigma_ell.len() {
        if ell + d > sigma_ell.len() {
            break;
        }
        let rate = T::lit((2 * ell + d) as f64) * kappa_x;
        sum = sum + sigma_ell[ell - 1] * sigma_ell[ell + d - 1] * (-rate * y).exp();
    }
    let electro = -pref * sum;
    if n == 0 {
        Ok(electro + cp_potential(y, c4)?)
    } else {
        Ok(electro)
    }
}

/// Coupling potential V_n(y) for rectangular doping stripes of opening fraction `f`.
pub fn stripe_coupling<T: Real>(n: i64, y: T, f: T, sigma_m: T, kappa_x: T, alpha: T) -> Result<T> {
    if !(f >= T::zero() && f < T::one()) {
        return Err(Error::Config(format!("stripe fraction f = {f} outside [0, 1)")));
    }
    if !(y > T::zero()) {
        return Err(Error::Domain(format!("potential evaluated at y = {y} <= 0")));
    }
    let field = sigma_m * (-kappa_x * y).exp() / T::lit(EPSILON_0);
    Ok(-alpha * f / T::lit(2.0) * field * field * sinc(T::lit(n as f64) * f * T::PI()))
}

/// Coupling potential V_n(y) for Gaussian doping bars of width `epsilon`.
pub fn gaussian_coupling<T: Real>(n: i64, y: T, epsilon: T, d_z: T, sigma_m: T, kappa_x: T, alpha: T) -> Result<T> {
    if !(epsilon > T::zero() && epsilon < d_z / T::lit(4.0)) {
        return Err(Error::Config(format!(
            "gaussian width {epsilon} must lie in (0, d_z/4): neighbouring bars overlap"
        )));
    }
    if !(y > T::zero()) {
        return Err(Error::Domain(format!("potential evaluated at y = {y} <= 0")));
    }
    let field = sigma_m * (-kappa_x * y).exp() / T::lit(EPSILON_0);
    let x = T::lit(n as f64) * epsilon * T::PI() / d_z;
    Ok(-alpha * epsilon * T::PI().sqrt() / (T::lit(2.0) * d_z) * field * field * (-x * x).exp())
}

/// Smallest σ₁ (C/m²) for which an electrostatically dominated region exists
/// between the inner and outer CP regions at doping period `d_x`.
pub fn intermediate_region_threshold(d_x: f64) -> f64 {
    let e = std::f64::consts::E;
    let rhs = e * ELEMENTARY_CHARGE.sqrt() * (3.0 * PI).powf(0.25) / (2.0 * (4.0 * constants::fine_structure()).powf(0.25));
    (rhs / d_x).powi(2)
}

/// Whether the specular potential has an electrostatically dominated region.
pub fn intermediate_region_exists(sigma_1: f64, d_x: f64) -> bool {
    sigma_1 > 0.0 && sigma_1 > intermediate_region_threshold(d_x)
}
