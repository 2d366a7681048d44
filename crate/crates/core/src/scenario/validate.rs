//! Desk-scale self check: closed-form oracles, grid convergence order,
//! flux bound and mirror symmetry.

use serde::{Deserialize, Serialize};

use super::{run_scenario, Mode, ProfileSpec, ScenarioConfig};
use crate::analysis::{auto_bounds, exponential_well_reflectivity, flat_cp_reflectivity, stripe_analytic, sudden_solve};
use crate::channels::{BeamKinematics, ChannelSet};
use crate::constants::HELIUM_MASS;
use crate::error::Result;
use crate::potentials::{PotentialTable, ReducedUnits};
use crate::propagator::{solve, PropagatorConfig};

/// Period of the exponential-well oracle, m.
pub const EXP_WELL_PERIOD: f64 = 500e-9;
/// Well depth in units of ħ²κₓ²/2m.
pub const EXP_WELL_DEPTH: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateOptions {
    /// Finest-but-three grid of the convergence-order check.
    pub order_base_steps: usize,
    /// Also solve the bundled coupled-channel presets (slow).
    pub full: bool,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { order_base_steps: 1 << 21, full: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub limit: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ValidationReport {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s += &format!(
                "{} {:<20} measured {:.6e} limit {:.6e}  {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.limit,
                c.detail
            );
        }
        s
    }
}

/// Single channel and table of the helium exponential well −W e^{−2κₓy}
/// at normal wavenumber k₀ = k0_dx / dₓ.
pub fn exponential_well_case(k0_dx: f64) -> (ChannelSet, PotentialTable<f64>, f64) {
    let kappa = 2.0 * std::f64::consts::PI / EXP_WELL_PERIOD;
    let units = ReducedUnits::new(HELIUM_MASS, 1.0 / kappa);
    let k0 = k0_dx / EXP_WELL_PERIOD;
    let beam = BeamKinematics { k: k0, k_x: 0.0, k_y: -k0, k_z: 0.0 };
    (ChannelSet::single(beam), PotentialTable::exponential(units, EXP_WELL_DEPTH, 2.0), k0)
}

/// Numerical and closed-form reflectivity of the exponential well.
pub fn exponential_well_point(k0_dx: f64, config: &PropagatorConfig) -> Result<(f64, f64)> {
    let (ch, table, k0) = exponential_well_case(k0_dx);
    let r = solve(&ch, &table, config)?;
    Ok((r.r_total, exponential_well_reflectivity(k0, EXP_WELL_PERIOD)))
}

/// `n` log-spaced values of k₀dₓ over [lo, hi].
pub fn log_points(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1).max(1) as f64)).collect()
}

/// Relative errors of the exponential well on one equidistant grid with
/// M = base, 2·base, 4·base, ... (`grids` entries).
///
/// The inner bound sits where the badlands function is 3·10⁻¹⁰ so that the
/// WKB start error stays below the discretisation error of the finest grid;
/// the outer bound where it is 10⁻¹².
pub fn convergence_errors(k0_dx: f64, base_steps: usize, grids: usize) -> Result<Vec<f64>> {
    let (ch, table, k0) = exponential_well_case(k0_dx);
    let units = table.units();
    let kr = units.wavenumber::<f64>(k0);
    let (y0, _) = auto_bounds(&table, kr * kr, 3e-10, 1e-4)?;
    let (_, y1) = auto_bounds(&table, kr * kr, 1e-12, 1e-4)?;
    let exact = exponential_well_reflectivity(k0, EXP_WELL_PERIOD);
    (0..grids)
        .map(|i| {
            let cfg = PropagatorConfig {
                badlands_tol: 0.5,
                ..PropagatorConfig::equidistant(units.length_si(y0), units.length_si(y1), base_steps << i)
            };
            Ok((solve(&ch, &table, &cfg)?.r_total - exact).abs() / exact)
        })
        .collect()
}

/// Error reduction factors of successive grid halvings.
pub fn convergence_ratios(k0_dx: f64, base_steps: usize, halvings: usize) -> Result<Vec<f64>> {
    let e = convergence_errors(k0_dx, base_steps, halvings + 1)?;
    Ok(e.windows(2).map(|w| w[0] / w[1]).collect())
}

/// Reduced grating used for the symmetry and flux checks: 23 open orders.
fn small_grating(profile: ProfileSpec, sigma: f64) -> ScenarioConfig {
    let mut c = ScenarioConfig::preset("fig2a").expect("preset");
    c.surface.d_z_m = 4e-6;
    c.surface.sigma_m_e_per_m2 = sigma;
    c.surface.profile = profile;
    c.numerics.steps = 1024;
    c
}

fn check(name: &str, passed: bool, measured: f64, limit: f64, detail: String) -> Check {
    Check { name: name.into(), passed, measured, limit, detail }
}

fn failed(name: &str, e: impl std::fmt::Display) -> Check {
    check(name, false, f64::NAN, f64::NAN, format!("error: {e}"))
}

fn exp_check() -> Check {
    let cfg = PropagatorConfig::default();
    let mut worst: f64 = 0.0;
    for kd in log_points(0.1, 10.0, 20) {
        match exponential_well_point(kd, &cfg) {
            Ok((r, exact)) => worst = worst.max((r / exact - 1.0).abs()),
            Err(e) => return failed("exponential-well", e),
        }
    }
    check("exponential-well", worst <= 1e-3, worst, 1e-3, "max relative error over 20 points, k0 dx in [0.1, 10]".into())
}

fn order_check(base: usize) -> Check {
    match convergence_ratios(1.0, base, 3) {
        Ok(r) => {
            let ok = r.iter().all(|x| (12.0..=20.0).contains(x));
            let worst = r.iter().copied().fold(16.0_f64, |w, x| if (x - 16.0).abs() > (w - 16.0).abs() { x } else { w });
            check("convergence-order", ok, worst, 16.0, format!("error ratios {r:.2?} for M = {base} x 1,2,4,8; expected each in [12, 20]"))
        }
        Err(e) => failed("convergence-order", e),
    }
}

fn stripe_check() -> Check {
    let name = "stripe-sudden";
    let run = || -> Result<Check> {
        let sc = ScenarioConfig::preset("fig2a")?.resolve()?;
        let cfg = PropagatorConfig::default();
        let r_cp = flat_cp_reflectivity(&sc.particle, &cfg)?;
        let pat = sudden_solve(&sc.particle, &sc.surface, 256, &cfg)?;
        let mut worst: f64 = 0.0;
        for n in [-3, -1, 0, 1, 3] {
            let a = stripe_analytic(n, 0.5, r_cp);
            worst = worst.max((pat.probability(n).unwrap_or(0.0) / a - 1.0).abs());
        }
        let r0 = pat.probability(0).unwrap_or(0.0);
        let r2 = pat.probability(2).unwrap_or(0.0).max(pat.probability(-2).unwrap_or(0.0));
        let ok = worst <= 0.25 && r2 < 1e-2 * r0;
        Ok(check(name, ok, worst, 0.25, format!("max relative deviation from the ideal grating for |n| in {{0,1,3}}; R2/R0 = {:.2e}", r2 / r0)))
    };
    run().unwrap_or_else(|e| failed(name, e))
}

fn bundled() -> Vec<(String, ScenarioConfig)> {
    let mut out = Vec::new();
    out.push(("helium".to_string(), ScenarioConfig::preset("helium").expect("preset")));
    for name in ["fig2a", "fig2b"] {
        let mut c = ScenarioConfig::preset(name).expect("preset");
        c.mode = Mode::DiffractSudden;
        out.push((format!("{name}-sudden"), c));
    }
    out.push(("small-stripe".into(), small_grating(ProfileSpec::Stripe { f: 0.5 }, 1e16)));
    out.push(("small-gaussian".into(), small_grating(ProfileSpec::Gaussian { epsilon_m: 4e-7 }, 1e15)));
    out
}

fn flux_and_symmetry(full: bool) -> Vec<Check> {
    let mut scenarios = bundled();
    if full {
        for name in ["fig2a", "fig2b"] {
            scenarios.push((name.to_string(), ScenarioConfig::preset(name).expect("preset")));
        }
    }
    let mut total: f64 = 0.0;
    let mut asym: f64 = 0.0;
    let mut errors = Vec::new();
    for (name, c) in &scenarios {
        match run_scenario(c) {
            Ok(rec) => {
                total = total.max(rec.r_total.unwrap_or(0.0));
                if c.mode == Mode::DiffractCoupled {
                    for row in &rec.table {
                        let mirror = rec.probability(-row.n).unwrap_or(0.0);
                        asym = asym.max((row.big_r_n - mirror).abs());
                    }
                }
            }
            Err(e) => errors.push(format!("{name}: {e}")),
        }
    }
    let names: Vec<&str> = scenarios.iter().map(|(n, _)| n.as_str()).collect();
    let err = if errors.is_empty() { String::new() } else { format!("; errors: {}", errors.join("; ")) };
    vec![
        check(
            "unitarity",
            errors.is_empty() && total <= 1.0 + 1e-8,
            total,
            1.0 + 1e-8,
            format!("largest total reflectivity over {names:?}{err}"),
        ),
        check(
            "mirror-symmetry",
            errors.is_empty() && asym <= 1e-9,
            asym,
            1e-9,
            "max |R_n - R_-n| of the coupled-channel gratings".into(),
        ),
    ]
}

/// Runs every check. The report passes when all checks pass.
pub fn run(opts: &ValidateOptions) -> ValidationReport {
    let mut checks = vec![exp_check(), order_check(opts.order_base_steps), stripe_check()];
    checks.extend(flux_and_symmetry(opts.full));
    let passed = checks.iter().all(|c| c.passed);
    ValidationReport { checks, passed }
}
