//! Johnson's log-derivative propagator and asymptotic matching.
//!
//! Everything here works in the reduced units of the potential table.

mod grid;
mod kernel;

use faer::Mat;
use log::debug;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::analysis::{auto_bounds, badlands_reduced};
use crate::channels::{ChannelSet, PotentialMatrixEvaluator};
use crate::error::{Error, Result};
use crate::potentials::PotentialTable;
use crate::scalar::Real;

pub use grid::{max_step_phase, plan_sectors};
pub use kernel::{johnson_propagate, johnson_sector};

/// Phase advance per step above which a solve is flagged as under-resolved.
pub const MAX_STEP_PHASE: f64 = 0.5;

/// Grid and boundary settings of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagatorConfig {
    /// Inner boundary, m. Ignored when `auto_bounds` is set.
    pub y_start_m: f64,
    /// Outer boundary, m. Ignored when `auto_bounds` is set.
    pub y_end_m: f64,
    /// Total number of steps M (even, divisible by 2·sectors).
    pub steps: usize,
    /// Number of sectors of equal WKB phase. Each sector runs the
    /// equidistant recurrence with steps/sectors points; 1 gives a single
    /// equidistant grid.
    pub sectors: usize,
    pub auto_bounds: bool,
    /// Repeat the solve with 2M steps and report the difference.
    pub richardson_check: bool,
    /// Badlands threshold at both boundaries.
    pub badlands_tol: f64,
    /// Near the surface, the electrostatic terms must be below this fraction
    /// of the CP potential before the diagonal WKB start is used.
    pub coupling_tol: f64,
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self {
            y_start_m: 0.0,
            y_end_m: 0.0,
            steps: 8192,
            sectors: 64,
            auto_bounds: true,
            richardson_check: false,
            badlands_tol: 1e-6,
            coupling_tol: 1e-4,
        }
    }
}

impl PropagatorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(format!("numerics: {m}")));
        if self.steps < 4 || self.steps % 2 != 0 {
            return bad(format!("steps = {} must be even and >= 4", self.steps));
        }
        if self.sectors == 0 || self.steps % (2 * self.sectors) != 0 {
            return bad(format!("steps = {} must be a multiple of 2*sectors = {}", self.steps, 2 * self.sectors));
        }
        if !(self.badlands_tol > 0.0 && self.badlands_tol < 1.0) {
            return bad("badlands_tol must lie in (0, 1)".into());
        }
        if !(self.coupling_tol > 0.0 && self.coupling_tol < 1.0) {
            return bad("coupling_tol must lie in (0, 1)".into());
        }
        if !self.auto_bounds {
            if !(self.y_start_m.is_finite() && self.y_end_m.is_finite() && self.y_start_m < self.y_end_m) {
                return bad(format!(
                    "need y_start < y_end, got {:e} m and {:e} m",
                    self.y_start_m, self.y_end_m
                ));
            }
        }
        Ok(())
    }

    /// Explicit bounds in metres on a single equidistant grid.
    pub fn equidistant(y_start_m: f64, y_end_m: f64, steps: usize) -> Self {
        Self { y_start_m, y_end_m, steps, sectors: 1, auto_bounds: false, ..Self::default() }
    }

    pub fn steps_per_sector(&self) -> usize {
        self.steps / self.sectors
    }
}

/// Log-derivative matrix Z = Ψ′Ψ⁻¹ (or an intermediate Yₘ) at position y.
#[derive(Debug, Clone)]
pub struct LogDerivativeState<T: Real> {
    pub z: Mat<Complex<T>>,
    pub y: T,
}

impl<T: Real> LogDerivativeState<T> {
    pub fn dim(&self) -> usize {
        self.z.nrows()
    }

    pub fn is_finite(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| self.z[(i, j)].re.is_finite() && self.z[(i, j)].im.is_finite()))
    }
}

/// WKB local momentum √(kₙ² − Ṽ₀(y)) and its derivative.
///
/// Ṽ₀ is the specular component of the table: the CP tail plus the
/// x-averaged electrostatic part. For a CP-only table this is exactly the CP
/// momentum. The principal branch is taken when the radicand is negative.
pub fn wkb_local_momentum<T: Real>(table: &PotentialTable<T>, k_sq: T, y: T) -> (Complex<T>, Complex<T>) {
    let [v, v1, _] = table.specular_derivatives(y);
    let p = Complex::new(k_sq - v, T::zero()).sqrt();
    let dp = Complex::new(-v1, T::zero()) / (p * T::lit(2.0));
    (p, dp)
}

/// Largest badlands value over the channels at y.
pub fn channel_badlands<T: Real>(ev: &PotentialMatrixEvaluator<'_, T>, y: T) -> T {
    ev.k_sq().iter().fold(T::zero(), |acc, &ks| {
        let b = badlands_reduced(ev.table(), ks, y);
        if b.is_nan() || b > acc {
            b
        } else {
            acc
        }
    })
}

/// Diagonal WKB start Zₙₙ = −i pₙ − pₙ′/(2pₙ).
pub fn wkb_init<T: Real>(ev: &PotentialMatrixEvaluator<'_, T>, y_start: T, badlands_tol: f64) -> Result<LogDerivativeState<T>> {
    let table = ev.table();
    if table.has_cp() && y_start <= T::zero() {
        return Err(Error::Domain(format!(
            "y_start = {:e} m must be > 0 with the CP potential",
            table.units().length_si(y_start)
        )));
    }
    let b = channel_badlands(ev, y_start);
    if !(b.as_f64() < badlands_tol) {
        return Err(Error::BadlandsStart {
            y_start_m: table.units().length_si(y_start),
            value: b.as_f64(),
            threshold: badlands_tol,
        });
    }
    let n = ev.dim();
    let mut z = Mat::<Complex<T>>::zeros(n, n);
    let i = Complex::new(T::zero(), T::one());
    for (k, &ks) in ev.k_sq().iter().enumerate() {
        let (p, dp) = wkb_local_momentum(table, ks, y_start);
        z[(k, k)] = -(i * p) - dp / (p * T::lit(2.0));
    }
    Ok(LogDerivativeState { z, y: y_start })
}

/// Reflection coefficients rₙ = R_{n0} for the open orders, from
/// R = e^{−iKy}(iK − Z)⁻¹(iK + Z)e^{−iKy}.
///
/// K carries every channel, closed ones with kₙ = +i|kₙ|, so that the outgoing
/// closed waves decay; only open rows of the column of the specular
/// incidence are returned.
pub fn extract_reflection<T: Real>(state: &LogDerivativeState<T>, channels: &ChannelSet, k_sq: &[T]) -> Result<Vec<Complex<T>>> {
    use faer::linalg::solvers::Solve;
    let n = state.dim();
    let inc = channels.index_of(0).ok_or(Error::NoOpenChannels)?;
    let i = Complex::new(T::zero(), T::one());
    let k: Vec<Complex<T>> = k_sq.iter().map(|&ks| Complex::new(ks, T::zero()).sqrt()).collect();
    let mut a = Mat::<Complex<T>>::zeros(n, n);
    for c in 0..n {
        for r in 0..n {
            a[(r, c)] = -state.z[(r, c)];
        }
        a[(c, c)] = a[(c, c)] + i * k[c];
    }
    // Right-hand side: column `inc` of (iK + Z).
    let mut rhs = Mat::<Complex<T>>::zeros(n, 1);
    for r in 0..n {
        rhs[(r, 0)] = state.z[(r, inc)];
    }
    rhs[(inc, 0)] = rhs[(inc, 0)] + i * k[inc];
    let lu = a.partial_piv_lu();
    if !kernel::lu_is_regular(lu.U()) {
        return Err(Error::Matching);
    }
    lu.solve_in_place(rhs.as_mut());
    let y = state.y;
    let phase_in = (-(i * k[inc] * y)).exp();
    let mut r = Vec::new();
    for c in channels.open_indices() {
        let v = (-(i * k[c] * y)).exp() * rhs[(c, 0)] * phase_in;
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Matching);
        }
        r.push(v);
    }
    Ok(r)
}

/// Convergence and boundary diagnostics of a solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub sectors: usize,
    pub channels: usize,
    pub open_channels: usize,
    pub y_start_m: f64,
    pub y_end_m: f64,
    pub badlands_start: f64,
    pub badlands_end: f64,
    /// max |Rₙ(2M) − Rₙ(M)| when the Richardson check ran.
    pub richardson_error: Option<f64>,
    pub warnings: Vec<String>,
}

/// Reflection amplitudes of the open orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionResult {
    pub orders: Vec<i64>,
    /// kₙ, 1/m.
    pub k_n: Vec<f64>,
    pub r_n: Vec<Complex<f64>>,
    /// |rₙ|²
    #[serde(rename = "R_n")]
    pub big_r_n: Vec<f64>,
    #[serde(rename = "R_total")]
    pub r_total: f64,
    pub diagnostics: Diagnostics,
}

impl ReflectionResult {
    pub fn probability(&self, n: i64) -> Option<f64> {
        self.orders.iter().position(|&m| m == n).map(|i| self.big_r_n[i])
    }

    pub fn amplitude(&self, n: i64) -> Option<Complex<f64>> {
        self.orders.iter().position(|&m| m == n).map(|i| self.r_n[i])
    }
}

/// Reduced integration bounds for a solve.
pub fn resolve_bounds<T: Real>(ev: &PotentialMatrixEvaluator<'_, T>, config: &PropagatorConfig) -> Result<(T, T)> {
    let units = ev.table().units();
    if config.auto_bounds {
        let k0_sq = ev.channels().index_of(0).map(|i| ev.k_sq()[i]).ok_or(Error::NoOpenChannels)?;
        let (mut lo, hi) = auto_bounds(ev.table(), k0_sq, config.badlands_tol, config.coupling_tol)?;
        // The bound is set by the specular channel; orders with smaller kₙ²
        // can still be marginally above the threshold there.
        for _ in 0..400 {
            if channel_badlands(ev, lo).as_f64() < config.badlands_tol {
                break;
            }
            lo = if ev.table().has_cp() { lo * T::lit(0.95) } else { lo - T::lit(0.05) };
        }
        Ok((lo, hi))
    } else {
        Ok((units.length(config.y_start_m), units.length(config.y_end_m)))
    }
}

fn solve_once<T: Real>(
    ev: &PotentialMatrixEvaluator<'_, T>,
    y_start: T,
    y_end: T,
    steps: usize,
    sectors: usize,
    badlands_tol: f64,
) -> Result<Vec<Complex<T>>> {
    let k_max = ev.k_sq().iter().copied().fold(T::zero(), T::max);
    let breaks = plan_sectors(ev.table(), k_max, y_start, y_end, sectors);
    let state = wkb_init(ev, y_start, badlands_tol)?;
    let state = johnson_propagate(state, &breaks, steps / sectors, ev)?;
    extract_reflection(&state, ev.channels(), ev.k_sq())
}

/// Full pipeline: bounds, WKB start, propagation, matching.
pub fn solve<T: Real>(channels: &ChannelSet, table: &PotentialTable<T>, config: &PropagatorConfig) -> Result<ReflectionResult> {
    config.validate()?;
    let ev = PotentialMatrixEvaluator::new(channels, table);
    let units = table.units();
    let (y_start, y_end) = resolve_bounds(&ev, config)?;
    if !(y_start < y_end) {
        return Err(Error::Config(format!(
            "integration range [{:e}, {:e}] m is empty",
            units.length_si(y_start),
            units.length_si(y_end)
        )));
    }
    let k0_sq = channels.index_of(0).map(|i| ev.k_sq()[i]).ok_or(Error::NoOpenChannels)?;
    let b_end = badlands_reduced(table, k0_sq, y_end).as_f64();
    if !(b_end < config.badlands_tol) {
        return Err(Error::BadlandsEnd { y_end_m: units.length_si(y_end), value: b_end, threshold: config.badlands_tol });
    }
    let b_start = channel_badlands(&ev, y_start).as_f64();
    debug!(
        "solve: {} channels, y in [{:e}, {:e}] m, M = {}",
        channels.len(),
        units.length_si(y_start),
        units.length_si(y_end),
        config.steps
    );

    let mut steps = config.steps;
    let mut r = solve_once(&ev, y_start, y_end, steps, config.sectors, config.badlands_tol)?;
    let mut richardson_error = None;
    if config.richardson_check {
        steps *= 2;
        let fine = solve_once(&ev, y_start, y_end, steps, config.sectors, config.badlands_tol)?;
        let err = r.iter().zip(&fine).map(|(a, b)| (a.norm_sqr() - b.norm_sqr()).abs().as_f64()).fold(0.0, f64::max);
        richardson_error = Some(err);
        r = fine;
    }

    let open = channels.open_indices();
    let orders: Vec<i64> = open.iter().map(|&i| channels.orders()[i]).collect();
    let k_n: Vec<f64> = open.iter().map(|&i| channels.k_n(i).re).collect();
    let r_n: Vec<Complex<f64>> = r.iter().map(|c| Complex::new(c.re.as_f64(), c.im.as_f64())).collect();
    let big_r_n: Vec<f64> = r_n.iter().map(|c| c.norm_sqr()).collect();
    let r_total = big_r_n.iter().sum();
    let mut warnings = Vec::new();
    let k_max = ev.k_sq().iter().copied().fold(T::zero(), T::max);
    let breaks = plan_sectors(table, k_max, y_start, y_end, config.sectors);
    let phase = max_step_phase(table, k_max, &breaks, steps / config.sectors);
    if phase > MAX_STEP_PHASE {
        warnings.push(format!(
            "coarse grid: {phase:.2} rad of phase per step (limit {MAX_STEP_PHASE}); increase steps"
        ));
    }
    if !channels.excluded().is_empty() {
        warnings.push(format!("near-threshold orders excluded: {:?}", channels.excluded()));
    }
    Ok(ReflectionResult {
        orders,
        k_n,
        r_n,
        big_r_n,
        r_total,
        diagnostics: Diagnostics {
            steps,
            sectors: config.sectors,
            channels: channels.len(),
            open_channels: open.len(),
            y_start_m: units.length_si(y_start),
            y_end_m: units.length_si(y_end),
            badlands_start: b_start,
            badlands_end: b_end,
            richardson_error,
            warnings,
        },
    })
}
