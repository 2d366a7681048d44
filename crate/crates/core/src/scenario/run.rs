use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::output::OrderRow;
use super::validate::{self, ValidateOptions, ValidationReport};
use super::{Mode, Scenario, ScenarioConfig, SweepAxis};
use crate::analysis::{auto_bounds, badlands_profile, sudden_solve, y_cp, y_el, PatternMethod};
use crate::channels::{beam_kinematics, build_channels, default_units, ChannelSet};
use crate::error::{Error, Result};
use crate::potentials::{PotentialTable, ReducedUnits};
use crate::propagator::{solve, Diagnostics};

const BADLANDS_SAMPLES: usize = 400;

/// Badlands function of the specular channel with its characteristic
/// distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadlandsSummary {
    /// Closed-form CP reflection distance, m.
    pub y_cp_m: Option<f64>,
    /// Closed-form electrostatic maximum, m.
    pub y_el_m: Option<f64>,
    /// Numerical maximum, m.
    pub y_max_m: f64,
    pub b_max: f64,
    /// Range where B stays below the configured tolerance, m.
    pub y_start_m: f64,
    pub y_end_m: f64,
    pub y_m: Vec<f64>,
    pub b: Vec<f64>,
}

/// Outcome of one scenario or sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    /// The scenario that was solved, particle written out.
    pub config: ScenarioConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<PatternMethod>,
    pub table: Vec<OrderRow>,
    #[serde(rename = "R_total")]
    pub r_total: Option<f64>,
    pub diagnostics: Option<Diagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub badlands: Option<BadlandsSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub validation: Option<ValidationReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<ResultRecord>,
    pub warnings: Vec<String>,
    pub error: Option<String>,
}

impl ResultRecord {
    fn empty(config: ScenarioConfig) -> Self {
        Self {
            config,
            sweep_value: None,
            method: None,
            table: Vec::new(),
            r_total: None,
            diagnostics: None,
            badlands: None,
            validation: None,
            points: Vec::new(),
            warnings: Vec::new(),
            error: None,
        }
    }

    pub fn from_validation(config: ScenarioConfig, report: ValidationReport) -> Self {
        let mut rec = Self::empty(config);
        rec.validation = Some(report);
        rec
    }

    pub fn probability(&self, n: i64) -> Option<f64> {
        self.table.iter().find(|r| r.n == n).map(|r| r.big_r_n)
    }

    /// False when a validation report failed or any sweep point errored.
    pub fn succeeded(&self) -> bool {
        self.error.is_none()
            && self.validation.as_ref().map_or(true, |v| v.passed)
            && self.points.iter().all(|p| p.succeeded())
    }
}

/// Solves a scenario in the requested mode. Invalid documents fail before
/// any solve.
pub fn run_scenario(config: &ScenarioConfig) -> Result<ResultRecord> {
    let sc = config.resolve()?;
    let echo = config.resolved()?;
    match sc.mode {
        Mode::Sweep => {
            let sw = sc.sweep.as_ref().expect("checked by resolve");
            sweep(config, sw.axis, &sw.values)
        }
        Mode::Validate => {
            Ok(ResultRecord::from_validation(echo, validate::run(&ValidateOptions::default())))
        }
        mode => solve_point(&sc, mode, echo),
    }
}

/// Runs the point mode of `config.sweep` (or `config.mode`) at every value.
/// Points are independent; a failing point keeps its slot with the error
/// message filled in.
pub fn sweep(config: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<ResultRecord> {
    let mode = match (&config.mode, &config.sweep) {
        (Mode::Sweep, Some(sw)) => sw.mode,
        (Mode::Sweep, None) => return Err(Error::Config("mode sweep needs a sweep block".into())),
        (m, _) => *m,
    };
    if matches!(mode, Mode::Sweep | Mode::Validate) {
        return Err(Error::Config("sweep.mode must be a single-point mode".into()));
    }
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("sweep values must be a non-empty list of finite numbers".into()));
    }
    let base = ScenarioConfig { mode, sweep: None, ..config.clone() };
    // Axis/profile mismatches are document errors, not point failures.
    base.with_axis_value(axis, values[0])?;
    base.numerics.validate()?;

    let points: Vec<ResultRecord> = values
        .par_iter()
        .map(|&v| {
            let point = base.with_axis_value(axis, v).expect("axis checked");
            let mut rec = match point.resolve().and_then(|sc| solve_point(&sc, mode, point.resolved()?)) {
                Ok(r) => r,
                Err(e) => {
                    let mut r = ResultRecord::empty(point);
                    r.error = Some(e.to_string());
                    r
                }
            };
            rec.sweep_value = Some(v);
            rec
        })
        .collect();

    let mut rec = ResultRecord::empty(config.clone());
    rec.warnings = points
        .iter()
        .filter_map(|p| p.error.as_ref().map(|e| format!("{} = {:e}: {e}", axis.name(), p.sweep_value.unwrap_or(f64::NAN))))
        .collect();
    rec.points = points;
    Ok(rec)
}

fn specular_table(sc: &Scenario) -> Result<PotentialTable<f64>> {
    let (p, s) = (&sc.particle, &sc.surface);
    if s.sigma_m == 0.0 && s.casimir_polder {
        return Ok(PotentialTable::flat(p, default_units(p, None)));
    }
    PotentialTable::coupled(p, s, ReducedUnits::for_surface(p, s), 0, sc.numerics.ell_max)
}

fn rows(channels: &ChannelSet, orders: &[i64], r_n: &[Complex<f64>]) -> Vec<OrderRow> {
    orders
        .iter()
        .zip(r_n)
        .map(|(&n, r)| {
            let i = channels.index_of(n).expect("order is a channel");
            OrderRow::new(n, channels.k_n(i).re, *r)
        })
        .collect()
}

fn solve_point(sc: &Scenario, mode: Mode, echo: ScenarioConfig) -> Result<ResultRecord> {
    let cfg = sc.numerics.propagator();
    let p = &sc.particle;
    let s = &sc.surface;
    let beam = beam_kinematics(p);
    let mut rec = ResultRecord::empty(echo);
    match mode {
        Mode::Specular => {
            let table = specular_table(sc)?;
            let ch = ChannelSet::single(beam);
            let res = solve(&ch, &table, &cfg)?;
            rec.table = rows(&ch, &res.orders, &res.r_n);
            rec.method = Some(PatternMethod::CoupledChannel);
            rec.warnings = res.diagnostics.warnings.clone();
            rec.diagnostics = Some(res.diagnostics);
        }
        Mode::DiffractCoupled => {
            let ch = build_channels(beam, s.axis(), s.grating_wavevector(), sc.numerics.n_closed_extra, sc.numerics.max_channels)?;
            let units = ReducedUnits::for_surface(p, s);
            let table = PotentialTable::<f64>::coupled(p, s, units, ch.max_order_difference(), sc.numerics.ell_max)?;
            let res = solve(&ch, &table, &cfg)?;
            rec.table = rows(&ch, &res.orders, &res.r_n);
            rec.method = Some(PatternMethod::CoupledChannel);
            rec.warnings = res.diagnostics.warnings.clone();
            if let Some(w) = s.period_ratio_warning() {
                rec.warnings.push(w);
            }
            rec.diagnostics = Some(res.diagnostics);
        }
        Mode::DiffractSudden => {
            let pat = sudden_solve(p, s, sc.numerics.z_samples, &cfg)?;
            let ch = build_channels(beam, s.axis(), s.grating_wavevector(), 0, sc.numerics.max_channels)?;
            rec.table = rows(&ch, &pat.orders, &pat.r_n);
            rec.method = Some(PatternMethod::Sudden);
            rec.warnings = pat.warnings;
        }
        Mode::Badlands => {
            let table = specular_table(sc)?;
            let k0 = p.normal_wavenumber();
            let units = table.units();
            let k = units.wavenumber::<f64>(k0);
            let (lo, hi) = auto_bounds(&table, k * k, cfg.badlands_tol, cfg.coupling_tol)?;
            let (y_lo, y_hi) = (units.length_si(lo), units.length_si(hi));
            // Without CP the inner bound may sit behind the surface.
            let y_lo = if y_lo > 0.0 { y_lo } else { 1e-3 * y_hi };
            let prof = badlands_profile(&table, k0, y_lo, y_hi, BADLANDS_SAMPLES)?;
            let sigma_1 = s.x_coefficients(1).first().copied().unwrap_or(0.0);
            rec.badlands = Some(BadlandsSummary {
                y_cp_m: (s.casimir_polder && p.polarizability > 0.0).then(|| y_cp(p)),
                y_el_m: (sigma_1 > 0.0).then(|| y_el(p, sigma_1, s.d_x)).flatten(),
                y_max_m: prof.y_max,
                b_max: prof.b_max,
                y_start_m: units.length_si(lo),
                y_end_m: y_hi,
                y_m: prof.y,
                b: prof.b,
            });
            return Ok(rec);
        }
        Mode::Sweep | Mode::Validate => unreachable!("handled by run_scenario"),
    }
    rec.r_total = Some(rec.table.iter().map(|r| r.big_r_n).sum());
    Ok(rec)
}
