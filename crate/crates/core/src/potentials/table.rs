use crate::constants::{EPSILON_0, HBAR};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{DiffractionAxis, ParticleParams, SurfaceConfig};

/// Length and energy scales of the reduced problem.
///
/// With length unit L the energy unit is ħ²/(2mL²), so the radial equation
/// reads ψ'' + (k² − V)ψ = 0 with k and V both dimensionless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedUnits {
    /// m
    pub length: f64,
    /// J
    pub energy: f64,
    /// kg
    pub mass: f64,
}

impl ReducedUnits {
    pub fn new(mass: f64, length: f64) -> Self {
        Self { length, energy: HBAR * HBAR / (2.0 * mass * length * length), mass }
    }

    /// Length unit 1/κₓ of a doped surface.
    pub fn for_surface(particle: &ParticleParams, surface: &SurfaceConfig) -> Self {
        Self::new(particle.mass, 1.0 / surface.kappa_x())
    }

    pub fn length<T: Real>(&self, y_m: f64) -> T {
        T::lit(y_m / self.length)
    }

    pub fn length_si<T: Real>(&self, y: T) -> f64 {
        y.as_f64() * self.length
    }

    pub fn wavenumber<T: Real>(&self, k_per_m: f64) -> T {
        T::lit(k_per_m * self.length)
    }

    pub fn wavenumber_si<T: Real>(&self, k: T) -> f64 {
        k.as_f64() / self.length
    }

    pub fn energy_si<T: Real>(&self, v: T) -> f64 {
        v.as_f64() * self.energy
    }
}

/// One term −a·e^{−λy} of a Fourier component (reduced units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpTerm<T> {
    pub amplitude: T,
    pub rate: T,
}

/// Fourier components V_n(y) of the interaction potential in reduced units.
///
/// Component n is −cp/y⁴·δ_{n0} − Σ a e^{−λy}, with the exponential terms
/// stored per |n| (the profiles are even, so V_n = V_{−n}).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable<T> {
    units: ReducedUnits,
    c4: f64,
    kappa_x: f64,
    cp: T,
    orders: Vec<Vec<ExpTerm<T>>>,
}

impl<T: Real> PotentialTable<T> {
    /// Assembles a table from reduced pieces. `orders[d]` holds the terms of V_{±d}.
    pub fn from_parts(units: ReducedUnits, c4: f64, kappa_x: f64, cp: T, mut orders: Vec<Vec<ExpTerm<T>>>) -> Self {
        if orders.is_empty() {
            orders.push(Vec::new());
        }
        Self { units, c4, kappa_x, cp, orders }
    }

    /// Flat undoped surface: CP tail only.
    pub fn flat(particle: &ParticleParams, units: ReducedUnits) -> Self {
        let c4 = particle.c4();
        Self::from_parts(units, c4, 0.0, T::lit(cp_reduced(particle.mass, c4, units.length)), Vec::new())
    }

    /// Pure exponential well −depth·e^{−rate·y}, no CP (reduced inputs).
    pub fn exponential(units: ReducedUnits, depth: T, rate: T) -> Self {
        Self::from_parts(units, 0.0, 0.0, T::zero(), vec![vec![ExpTerm { amplitude: depth, rate }]])
    }

    /// x-specular potential with the first-order charge scaled by `delta`,
    /// i.e. σ_ℓ → Δ·σ_ℓ. Used for the isolated specular channel and for the
    /// parametric (sudden) treatment of the grating coordinate.
    pub fn specular(
        particle: &ParticleParams,
        surface: &SurfaceConfig,
        units: ReducedUnits,
        delta: f64,
        ell_max: usize,
    ) -> Self {
        let pref = particle.polarizability / (2.0 * EPSILON_0 * EPSILON_0) / units.energy;
        let kl = surface.kappa_x() * units.length;
        let terms = surface
            .x_coefficients(ell_max)
            .iter()
            .enumerate()
            .filter(|(_, s)| **s != 0.0 && delta != 0.0)
            .map(|(i, s)| ExpTerm {
                amplitude: T::lit(pref * (s * delta).powi(2)),
                rate: T::lit(2.0 * (i + 1) as f64 * kl),
            })
            .collect();
        let c4 = particle.c4();
        let cp = if surface.casimir_polder { cp_reduced(particle.mass, c4, units.length) } else { 0.0 };
        Self::from_parts(units, c4, surface.kappa_x(), T::lit(cp), vec![terms])
    }

    /// All Fourier components up to |n| = `max_order` along the surface's
    /// diffraction axis.
    pub fn coupled(
        particle: &ParticleParams,
        surface: &SurfaceConfig,
        units: ReducedUnits,
        max_order: usize,
        ell_max: usize,
    ) -> Result<Self> {
        surface.validate()?;
        if ell_max < 1 {
            return Err(Error::Config("Fourier truncation ell_max must be >= 1".into()));
        }
        let pref = particle.polarizability / (2.0 * EPSILON_0 * EPSILON_0) / units.energy;
        let kl = surface.kappa_x() * units.length;
        let mut orders = Vec::with_capacity(max_order + 1);
        match surface.axis() {
            DiffractionAxis::Z => {
                let amp = pref * surface.sigma_m * surface.sigma_m;
                for d in 0..=max_order {
                    let c = surface.delta_sq_fourier(d as i64);
                    let terms = if amp == 0.0 || c == 0.0 {
                        Vec::new()
                    } else {
                        vec![ExpTerm { amplitude: T::lit(amp * c), rate: T::lit(2.0 * kl) }]
                    };
                    orders.push(terms);
                }
            }
            DiffractionAxis::X => {
                let sigma = surface.x_coefficients(ell_max);
                for d in 0..=max_order {
                    let terms = (1..=sigma.len())
                        .filter(|ell| ell + d <= sigma.len())
                        .map(|ell| (ell, sigma[ell - 1] * sigma[ell + d - 1]))
                        .filter(|(_, s)| *s != 0.0)
                        .map(|(ell, s)| ExpTerm {
                            amplitude: T::lit(pref * s),
                            rate: T::lit((2 * ell + d) as f64 * kl),
                        })
                        .collect();
                    orders.push(terms);
                }
            }
        }
        let c4 = particle.c4();
        let cp = if surface.casimir_polder { cp_reduced(particle.mass, c4, units.length) } else { 0.0 };
        Ok(Self::from_parts(units, c4, surface.kappa_x(), T::lit(cp), orders))
    }

    pub fn units(&self) -> ReducedUnits {
        self.units
    }

    /// C₄ in J m⁴.
    pub fn c4(&self) -> f64 {
        self.c4
    }

    pub fn kappa_x(&self) -> f64 {
        self.kappa_x
    }

    /// Reduced CP strength: Ṽ_CP = −cp/y⁴, cp = (b_CP/L)².
    pub fn cp(&self) -> T {
        self.cp
    }

    pub fn has_cp(&self) -> bool {
        self.cp > T::zero()
    }

    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn terms(&self, n: i64) -> &[ExpTerm<T>] {
        self.orders.get(n.unsigned_abs() as usize).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Electrostatic part of Ṽ_n(y).
    pub fn electrostatic(&self, n: i64, y: T) -> T {
        self.terms(n).iter().fold(T::zero(), |acc, t| acc - t.amplitude * (-t.rate * y).exp())
    }

    /// Reduced Ṽ_n(y), including the CP tail for n = 0.
    pub fn order_potential(&self, n: i64, y: T) -> T {
        let el = self.electrostatic(n, y);
        if n == 0 && self.has_cp() {
            let y2 = y * y;
            el - self.cp / (y2 * y2)
        } else {
            el
        }
    }

    /// Ṽ₀ and its first two derivatives.
    pub fn specular_derivatives(&self, y: T) -> [T; 3] {
        let mut out = [T::zero(); 3];
        for t in self.terms(0) {
            let e = t.amplitude * (-t.rate * y).exp();
            out[0] = out[0] - e;
            out[1] = out[1] + t.rate * e;
            out[2] = out[2] - t.rate * t.rate * e;
        }
        if self.has_cp() {
            let y2 = y * y;
            let y4 = y2 * y2;
            out[0] = out[0] - self.cp / y4;
            out[1] = out[1] + T::lit(4.0) * self.cp / (y4 * y);
            out[2] = out[2] - T::lit(20.0) * self.cp / (y4 * y2);
        }
        out
    }

    /// Σ_d |Ṽ^el_d(y)| over −max_order..=max_order, a bound on the
    /// electrostatic row sums of the potential matrix.
    pub fn electrostatic_row_bound(&self, y: T) -> T {
        let mut sum = self.electrostatic(0, y).abs();
        for d in 1..self.orders.len() {
            sum = sum + T::lit(2.0) * self.electrostatic(d as i64, y).abs();
        }
        sum
    }

    /// V_n at a physical distance, J.
    pub fn potential_si(&self, n: i64, y_m: f64) -> f64 {
        self.units.energy_si(self.order_potential(n, self.units.length::<T>(y_m)))
    }

    /// Copy keeping only the specular component.
    pub fn specular_only(&self) -> Self {
        Self::from_parts(self.units, self.c4, self.kappa_x, self.cp, vec![self.orders[0].clone()])
    }

    /// Copy truncated or padded to `max_order` components.
    pub fn with_max_order(&self, max_order: usize) -> Self {
        let mut orders = self.orders.clone();
        orders.resize(max_order + 1, Vec::new());
        Self::from_parts(self.units, self.c4, self.kappa_x, self.cp, orders)
    }
}

fn cp_reduced(mass: f64, c4: f64, length: f64) -> f64 {
    2.0 * mass * c4 / (HBAR * HBAR * length * length)
}
