//! Physical constants (CODATA 2018) and particle presets.
//!
//! Every SI value used by the crate comes from this table so results are
//! reproducible bit for bit.

use std::f64::consts::PI;

/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// Fine-structure constant derived from the table above.
pub fn fine_structure() -> f64 {
    ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * PI * EPSILON_0 * HBAR * SPEED_OF_LIGHT)
}

/// Helium-4 atomic mass, kg.
pub const HELIUM_MASS: f64 = 6.646_473_1e-27;
/// Helium static polarizability volume α/(4πε₀), m³.
pub const HELIUM_POLARIZABILITY_VOLUME: f64 = 0.2050e-30;

/// Converts a polarizability volume (m³) into SI polarizability (C m²/V).
pub fn polarizability_from_volume(volume_m3: f64) -> f64 {
    4.0 * PI * EPSILON_0 * volume_m3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fine_structure_matches_codata() {
        assert!((1.0 / fine_structure() - 137.035_999_084).abs() < 1e-6);
    }
}
