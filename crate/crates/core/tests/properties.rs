use std::f64::consts::PI;

use proptest::prelude::*;
use qreflect::analysis::{auto_bounds, badlands_reduced, sudden_solve};
use qreflect::channels::{beam_kinematics, build_channels, PotentialMatrixEvaluator};
use qreflect::constants::{ELEMENTARY_CHARGE, EPSILON_0};
use qreflect::potentials::{
    cp_potential, electro_fourier, surface_field, DiffractionAxis, ParticleParams, PotentialTable, ReducedUnits,
    SurfaceConfig,
};
use qreflect::{DopingProfile, PropagatorConfig};

fn helium(theta: f64, phi: f64) -> ParticleParams {
    ParticleParams::helium(300.0, theta, phi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fourier_components_rebuild_the_potential(
        sig in prop::collection::vec(-1e16..1e16f64, 1..5),
        x in 0.0..500e-9f64,
        y in 20e-9..400e-9f64,
    ) {
        let p = helium(1e-3, 0.0);
        let kappa = 2.0 * PI / 500e-9;
        let sigma: Vec<f64> = sig.iter().map(|s| s * ELEMENTARY_CHARGE).collect();
        let [ex, ey] = surface_field(x, y, &sigma, kappa).unwrap();
        let direct = -p.polarizability / 2.0 * (ex * ex + ey * ey) + cp_potential(y, p.c4()).unwrap();
        let mut sum = electro_fourier(&sigma, p.polarizability, kappa, 0, y, p.c4()).unwrap();
        for n in 1..sigma.len() as i64 {
            sum += 2.0 * electro_fourier(&sigma, p.polarizability, kappa, n, y, p.c4()).unwrap() * (n as f64 * kappa * x).cos();
        }
        prop_assert!((sum - direct).abs() <= 1e-10 * direct.abs());
    }

    #[test]
    fn specular_potential_lies_below_cp(sigma in 0.0..1e17f64, y in 1e-9..2e-6f64) {
        let p = helium(1e-3, 0.0);
        let s = vec![sigma * ELEMENTARY_CHARGE / 2.0];
        let v0 = electro_fourier(&s, p.polarizability, 2.0 * PI / 500e-9, 0, y, p.c4()).unwrap();
        let vcp = cp_potential(y, p.c4()).unwrap();
        prop_assert!(v0 <= vcp && vcp < 0.0);
        prop_assert_eq!(electro_fourier(&s, p.polarizability, 2.0 * PI / 500e-9, 1, y, p.c4()).unwrap(), 0.0);
    }

    #[test]
    fn open_orders_conserve_energy(theta in 1e-4..1.2f64, phi in 0.0..6.28f64, dz in 5e-6..1e-4f64, z_axis in any::<bool>()) {
        let p = helium(theta, phi);
        let beam = beam_kinematics(&p);
        prop_assert!((-beam.k_y - beam.k * theta.sin()).abs() <= 1e-12 * beam.k);
        let axis = if z_axis { DiffractionAxis::Z } else { DiffractionAxis::X };
        let q = if z_axis { 2.0 * PI / dz } else { 2.0 * PI / 500e-9 };
        let Ok(ch) = build_channels(beam, axis, q, 2, 4096) else { return Ok(()) };
        for (i, &n) in ch.orders().iter().enumerate() {
            let (kx, kz) = if z_axis { (beam.k_x, beam.k_z + n as f64 * q) } else { (beam.k_x + n as f64 * q, beam.k_z) };
            let total = ch.k_sq()[i] + kx * kx + kz * kz;
            prop_assert!((total / (beam.k * beam.k) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn coupling_matrix_is_symmetric(
        f in 0.05..0.95f64,
        gaussian in any::<bool>(),
        sigma in 1e14..1e17f64,
        y_nm in 2.0..2000.0f64,
    ) {
        let p = helium(1e-3, 0.0);
        let profile = if gaussian { DopingProfile::Gaussian { epsilon: f * 4e-6 } } else { DopingProfile::Stripe { f } };
        let s = SurfaceConfig::new(500e-9, 16e-6, sigma * ELEMENTARY_CHARGE, profile).unwrap();
        let beam = beam_kinematics(&p);
        let ch = build_channels(beam, DiffractionAxis::Z, s.q_z(), 3, 1024).unwrap();
        let units = ReducedUnits::for_surface(&p, &s);
        let table = PotentialTable::<f64>::coupled(&p, &s, units, ch.max_order_difference(), 64).unwrap();
        let ev = PotentialMatrixEvaluator::new(&ch, &table);
        let u = ev.matrix_at(y_nm * 1e-9).unwrap();
        for i in 0..ev.dim() {
            for j in 0..i {
                prop_assert_eq!(u[(i, j)], u[(j, i)]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reflection_never_exceeds_unit_flux(
        theta in 2e-4..2e-3f64,
        sigma in 0.0..3e16f64,
        f in 0.1..0.9f64,
        gaussian in any::<bool>(),
        cp in any::<bool>(),
    ) {
        let p = helium(theta, 0.0);
        let profile = if gaussian { DopingProfile::Gaussian { epsilon: f * 1e-6 } } else { DopingProfile::Stripe { f } };
        let mut s = SurfaceConfig::new(500e-9, 4e-6, sigma * ELEMENTARY_CHARGE, profile).unwrap();
        s.casimir_polder = cp || sigma < 1e14;
        let beam = beam_kinematics(&p);
        let ch = build_channels(beam, DiffractionAxis::Z, s.q_z(), 0, 1024).unwrap();
        let units = ReducedUnits::for_surface(&p, &s);
        let table = PotentialTable::<f64>::coupled(&p, &s, units, ch.max_order_difference(), 64).unwrap();
        let cfg = PropagatorConfig { steps: 4096, sectors: 64, ..PropagatorConfig::default() };
        let r = qreflect::propagator::solve(&ch, &table, &cfg).unwrap();
        prop_assert!(r.diagnostics.warnings.iter().all(|w| !w.contains("coarse")), "{:?}", r.diagnostics.warnings);
        prop_assert!(r.r_total <= 1.0 + 1e-8, "R = {}", r.r_total);
        let pat = sudden_solve(&p, &s, 64, &cfg).unwrap();
        prop_assert!(pat.r_total <= 1.0 + 1e-8);
    }

    #[test]
    fn auto_bounds_sit_in_wkb_region(theta in 1e-4..1e-2f64, sigma in 0.0..1e17f64) {
        let p = helium(theta, 0.0);
        let s = SurfaceConfig::new(500e-9, 40e-6, sigma * ELEMENTARY_CHARGE, DopingProfile::Harmonic).unwrap();
        let units = ReducedUnits::for_surface(&p, &s);
        let table = PotentialTable::<f64>::specular(&p, &s, units, 1.0, 64);
        let k = units.wavenumber::<f64>(p.normal_wavenumber());
        let (lo, hi) = auto_bounds(&table, k * k, 1e-6, 1e-4).unwrap();
        prop_assert!(lo > 0.0 && lo < hi);
        prop_assert!(badlands_reduced(&table, k * k, lo) < 1e-6);
        prop_assert!(badlands_reduced(&table, k * k, hi) < 1e-6);
    }
}

#[test]
fn electrostatic_prefactor_uses_vacuum_permittivity() {
    // Single harmonic: V₁ = −α σ₁² e^{−3κy} / (2ε₀²) at d = 1 with two terms.
    let p = helium(1e-3, 0.0);
    let kappa = 2.0 * PI / 500e-9;
    let s = [1e-3, 2e-3];
    let y = 100e-9;
    let v1 = electro_fourier(&s, p.polarizability, kappa, 1, y, p.c4()).unwrap();
    let expected = -p.polarizability / (2.0 * EPSILON_0 * EPSILON_0) * s[0] * s[1] * (-3.0 * kappa * y).exp();
    assert!((v1 / expected - 1.0).abs() < 1e-14);
}
