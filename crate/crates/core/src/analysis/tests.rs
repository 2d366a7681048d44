use super::*;
use crate::constants::ELEMENTARY_CHARGE;
use crate::potentials::{DopingProfile, ReducedUnits, SurfaceConfig};

fn helium() -> ParticleParams {
    ParticleParams::helium(300.0, 1e-3, 0.0)
}

fn cp_table(p: &ParticleParams) -> PotentialTable<f64> {
    PotentialTable::flat(p, ReducedUnits::new(p.mass, 1.0 / p.normal_wavenumber()))
}

#[test]
fn badlands_vanishes_without_potential() {
    let t = PotentialTable::<f64>::from_parts(ReducedUnits::new(1e-26, 1e-7), 0.0, 0.0, 0.0, Vec::new());
    assert_eq!(badlands(3e-8, 1e7, &t).unwrap(), 0.0);
}

#[test]
fn cp_badlands_closed_form() {
    // In units of y_CP: B = 5s⁶ / ((1 + s⁴)³ k₀b_CP).
    let p = helium();
    let t = cp_table(&p);
    let k0 = p.normal_wavenumber();
    let kb = k0 * p.b_cp();
    let ycp = y_cp(&p);
    for s in [0.05_f64, 0.3, 1.0, 2.5, 12.0] {
        let exact = 5.0 * s.powi(6) / ((1.0 + s.powi(4)).powi(3) * kb);
        let b = badlands(s * ycp, k0, &t).unwrap();
        assert!((b / exact - 1.0).abs() < 1e-9, "s={s}: {b:e} vs {exact:e}");
    }
    // Vanishes like y⁶ towards the surface.
    let r = badlands(0.005 * ycp, k0, &t).unwrap() / badlands(0.01 * ycp, k0, &t).unwrap();
    assert!((r * 64.0 - 1.0).abs() < 1e-6);
    assert!(badlands(0.0, k0, &t).is_err());
}

#[test]
fn badlands_maximum_sits_at_y_cp() {
    let p = helium();
    let prof = badlands_profile(&cp_table(&p), p.normal_wavenumber(), 1e-9, 1e-6, 200).unwrap();
    let ycp = y_cp(&p);
    assert!((prof.y_max / ycp - 1.0).abs() < 1e-3, "{} {}", prof.y_max, ycp);
    assert!(prof.b.iter().all(|&b| b >= 0.0));
    assert!(prof.b_max >= prof.b.iter().cloned().fold(0.0, f64::max));
}

#[test]
fn golden_section_on_parabola() {
    let (x, fx) = golden_section_max(|x| -(x - 2.0) * (x - 2.0) + 3.0, 0.5, 5.0, 1e-8);
    assert!((x - 2.0).abs() < 1e-7 && (fx - 3.0).abs() < 1e-12);
}

#[test]
fn y_cp_scaling() {
    let p = helium();
    // Equals √(b_CP/k₀).
    assert!((y_cp(&p) / (p.b_cp() / p.normal_wavenumber()).sqrt() - 1.0).abs() < 1e-12);
    let mut q = p;
    q.speed *= 4.0;
    assert!((y_cp(&q) / y_cp(&p) - 0.5).abs() < 1e-12);
    let mut q = p;
    q.mass *= 2.0;
    q.polarizability *= 2.0;
    assert!((y_cp(&q) / y_cp(&p) - 1.0).abs() < 1e-12);
}

#[test]
fn y_el_behaviour() {
    let p = helium();
    let s1 = 1e16 * ELEMENTARY_CHARGE;
    assert!(y_el(&p, 0.0, 500e-9).is_none());
    let a = y_el(&p, s1, 500e-9).unwrap();
    let b = y_el(&p, s1, 1000e-9).unwrap();
    // The logarithm does not involve dₓ, so y_el is linear in it.
    assert!((b / a - 2.0).abs() < 1e-12);
    assert!(y_el(&p, 2.0 * s1, 500e-9).unwrap() > a);
    assert!(a > 500e-9 / (4.0 * PI));
}

#[test]
fn exponential_well_values() {
    assert_eq!(exponential_well_reflectivity(0.0, 5e-7), 1.0);
    assert!((exponential_well_reflectivity(2f64.ln(), 1.0) - 0.5).abs() < 1e-15);
    let p = helium();
    let k0 = p.normal_wavenumber();
    assert!((k0 * 500e-9 - 9.453_797_102_925_808).abs() < 1e-12);
    let r = exponential_well_reflectivity(k0, 500e-9);
    assert!((r / 7.839_133_944_866_133e-5 - 1.0).abs() < 1e-12);
}

#[test]
fn stripe_analytic_values_and_sum_rule() {
    assert!((stripe_analytic(0, 0.5, 0.8) - 0.2).abs() < 1e-15);
    assert!(stripe_analytic(2, 0.5, 0.8).abs() < 1e-32);
    assert!((stripe_analytic(1, 0.5, 1.0) - 1.0 / (PI * PI)).abs() < 1e-15);
    // The partial sums approach (1 − f)R_CP from below with tail R_CP/(π²N).
    for f in [0.25, 0.5, 0.75] {
        let partial = |n_max: i64| (-n_max..=n_max).map(|n| stripe_analytic(n, f, 0.3)).sum::<f64>();
        let total = (1.0 - f) * 0.3;
        let tail = total - partial(10_000);
        assert!((tail / (0.3 / (PI * PI * 1e4)) - 1.0).abs() < 0.05, "f={f} {tail:e}");
        assert!((total - partial(100_000)).abs() < 1e-6);
    }
}

#[test]
fn auto_bounds_respect_badlands_tolerance() {
    let p = helium();
    let s = SurfaceConfig::new(500e-9, 40e-6, 1e16 * ELEMENTARY_CHARGE, DopingProfile::Stripe { f: 0.5 }).unwrap();
    let u = ReducedUnits::for_surface(&p, &s);
    let k0 = u.wavenumber::<f64>(p.normal_wavenumber());
    let tables = [
        PotentialTable::<f64>::specular(&p, &s, u, 1.0, 64),
        PotentialTable::<f64>::specular(&p, &s, u, 0.0, 64),
        PotentialTable::<f64>::exponential(u, 700.0, 2.0),
    ];
    for t in &tables {
        let (a, b) = auto_bounds(t, k0 * k0, 1e-6, 1e-4).unwrap();
        assert!(a < b);
        assert!(badlands_reduced(t, k0 * k0, a) < 1e-6);
        assert!(badlands_reduced(t, k0 * k0, b) < 1e-6);
    }
    // The electrostatic terms push the start well inside the CP crossing.
    let (a_doped, _) = auto_bounds(&tables[0], k0 * k0, 1e-6, 1e-4).unwrap();
    let (a_flat, _) = auto_bounds(&tables[1], k0 * k0, 1e-6, 1e-4).unwrap();
    assert!(a_doped < a_flat);
}

#[test]
fn flat_cp_depends_on_k0_b_only() {
    // k₀b_CP ∝ m^{3/2} α^{1/2} v₀ sin θ; keep it fixed while changing m and α.
    let p = helium();
    let mut q = p;
    q.mass *= 3.0;
    q.polarizability *= 1.0 / 3.0;
    q.speed *= 1.0 / 3.0;
    assert!((q.normal_wavenumber() * q.b_cp() / (p.normal_wavenumber() * p.b_cp()) - 1.0).abs() < 1e-12);
    let cfg = PropagatorConfig::default();
    let a = flat_cp_reflectivity(&p, &cfg).unwrap();
    let b = flat_cp_reflectivity(&q, &cfg).unwrap();
    assert!((a / b - 1.0).abs() < 1e-8, "{a} {b}");
}

#[test]
fn flat_cp_decreases_with_k0() {
    let cfg = PropagatorConfig::default();
    let mut last = 1.0;
    for theta in [1e-4, 2e-4, 5e-4, 1e-3] {
        let r = flat_cp_reflectivity(&ParticleParams::helium(300.0, theta, 0.0), &cfg).unwrap();
        assert!(r < last && r > 0.0);
        last = r;
    }
}

#[test]
fn sudden_without_doping_is_specular_cp() {
    let p = helium();
    let s = SurfaceConfig::new(500e-9, 40e-6, 0.0, DopingProfile::Stripe { f: 0.5 }).unwrap();
    let cfg = PropagatorConfig::default();
    let pat = sudden_solve(&p, &s, 64, &cfg).unwrap();
    let u = ReducedUnits::for_surface(&p, &s);
    let t = PotentialTable::<f64>::specular(&p, &s, u, 0.0, 64);
    let r_cp = solve(&ChannelSet::single(beam_kinematics(&p)), &t, &cfg).unwrap().r_n[0];
    assert!((pat.r_n[pat.orders.iter().position(|&n| n == 0).unwrap()] - r_cp).norm() < 1e-14);
    for (n, r) in pat.orders.iter().zip(&pat.r_n) {
        if *n != 0 {
            assert!(r.norm() < 1e-14);
        }
    }
}

#[test]
fn sudden_parseval() {
    let p = helium();
    let s = SurfaceConfig::new(500e-9, 40e-6, 1e16 * ELEMENTARY_CHARGE, DopingProfile::Stripe { f: 0.5 }).unwrap();
    let cfg = PropagatorConfig::default();
    // Every alias of the 15-point transform is an open order: equality.
    let pat = sudden_solve(&p, &s, 15, &cfg).unwrap();
    assert_eq!(pat.orders.len(), 15);
    let mean = pat.mean_reflectivity.unwrap();
    assert!((pat.r_total - mean).abs() < 1e-14 * mean);
    let big = sudden_solve(&p, &s, 256, &cfg).unwrap();
    assert!(big.r_total <= big.mean_reflectivity.unwrap() * (1.0 + 1e-12));
}

#[test]
fn ideal_grating_quadrature_matches_closed_form() {
    let d = 40e-6;
    let q = 2.0 * PI / d;
    let r_cp = num_complex::Complex::from_polar(0.4, 0.7);
    for f in [0.25, 0.5] {
        let s = SurfaceConfig::new(500e-9, d, 1.0, DopingProfile::Stripe { f }).unwrap();
        let z = grating_samples(d, 4096);
        let r_z: Vec<_> = z.iter().map(|&zz| r_cp * (1.0 - s.delta(zz))).collect();
        let orders: Vec<i64> = (-7..=7).collect();
        let r_n = grating_fourier(&r_z, &z, q, &orders);
        for (n, r) in orders.iter().zip(&r_n) {
            let exact = stripe_analytic(*n, f, r_cp.norm_sqr());
            assert!((r.norm_sqr() - exact).abs() < 1e-5 * r_cp.norm_sqr(), "f={f} n={n}");
        }
    }
}

#[test]
fn sudden_rejects_x_profiles() {
    let s = SurfaceConfig::new(500e-9, 40e-6, 1e-3, DopingProfile::Harmonic).unwrap();
    assert!(sudden_solve(&helium(), &s, 64, &PropagatorConfig::default()).is_err());
}
