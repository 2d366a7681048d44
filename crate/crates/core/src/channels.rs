//! Diffraction channels and the coupled-channel potential matrix.

use faer::Mat;
use log::debug;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::potentials::{DiffractionAxis, ParticleParams, PotentialTable, ReducedUnits};
use crate::scalar::Real;

/// Relative tolerance below which |kₙ²|/k² counts as threshold.
pub const OPEN_TOLERANCE: f64 = 1e-8;

/// Upper limit on the channel count unless overridden.
pub const DEFAULT_MAX_CHANNELS: usize = 1024;

/// Incident wavevector, 1/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamKinematics {
    pub k: f64,
    pub k_x: f64,
    pub k_y: f64,
    pub k_z: f64,
}

pub fn beam_kinematics(particle: &ParticleParams) -> BeamKinematics {
    let k = particle.wavenumber();
    let (st, ct) = particle.theta.sin_cos();
    let (sp, cp) = particle.phi.sin_cos();
    BeamKinematics { k, k_x: k * ct * cp, k_y: -k * st, k_z: k * ct * sp }
}

impl BeamKinematics {
    /// In-plane component along the diffraction axis.
    pub fn along(&self, axis: DiffractionAxis) -> f64 {
        match axis {
            DiffractionAxis::X => self.k_x,
            DiffractionAxis::Z => self.k_z,
        }
    }

    /// kₙ² for order n, written so that k_y² is never recovered by cancellation.
    pub fn k_sq(&self, axis: DiffractionAxis, q: f64, n: i64) -> f64 {
        let nq = n as f64 * q;
        self.k_y * self.k_y - nq * (2.0 * self.along(axis) + nq)
    }
}

/// Diffraction orders retained in a coupled-channel solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    orders: Vec<i64>,
    k_sq: Vec<f64>,
    q: f64,
    axis: DiffractionAxis,
    beam: BeamKinematics,
    excluded: Vec<i64>,
}

/// Builds the channel set: every open order plus `n_closed_extra` closed
/// orders on each side. Orders within `OPEN_TOLERANCE·k²` of threshold are
/// dropped with a warning.
pub fn build_channels(
    beam: BeamKinematics,
    axis: DiffractionAxis,
    q: f64,
    n_closed_extra: usize,
    max_channels: usize,
) -> Result<ChannelSet> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::Config(format!("grating wavevector q = {q:e} must be > 0")));
    }
    let eps = OPEN_TOLERANCE * beam.k * beam.k;
    let kp = beam.along(axis);
    // Roots of kₙ² = 0 in n.
    let disc = (kp * kp + beam.k_y * beam.k_y).sqrt();
    let lo = ((-kp - disc) / q).floor() as i64 - 1;
    let hi = ((-kp + disc) / q).ceil() as i64 + 1;
    let span = (hi - lo) as usize;
    if span > max_channels + 2 * n_closed_extra + 4 {
        return Err(Error::Config(format!(
            "about {span} open diffraction orders exceed the channel limit {max_channels}"
        )));
    }

    let mut excluded = Vec::new();
    let mut open = Vec::new();
    for n in lo..=hi {
        let ks = beam.k_sq(axis, q, n);
        if ks.abs() < eps {
            excluded.push(n);
        } else if ks > 0.0 {
            open.push(n);
        }
    }
    let (Some(&n_min), Some(&n_max)) = (open.first(), open.last()) else {
        return Err(Error::NoOpenChannels);
    };
    for n in &excluded {
        debug!("order {n} lies within {OPEN_TOLERANCE:e}·k² of threshold and is excluded");
    }

    let mut orders = open;
    let closed_side = |start: i64, step: i64, excluded: &mut Vec<i64>| {
        let mut out = Vec::with_capacity(n_closed_extra);
        let mut n = start;
        while out.len() < n_closed_extra {
            n += step;
            if beam.k_sq(axis, q, n).abs() < eps {
                if !excluded.contains(&n) {
                    debug!("order {n} lies within {OPEN_TOLERANCE:e}·k² of threshold and is excluded");
                    excluded.push(n);
                }
                continue;
            }
            out.push(n);
        }
        out
    };
    let below = closed_side(n_min, -1, &mut excluded);
    let above = closed_side(n_max, 1, &mut excluded);
    orders.extend(below);
    orders.extend(above);
    orders.sort_unstable();
    excluded.sort_unstable();
    if orders.len() > max_channels {
        return Err(Error::Config(format!(
            "{} channels exceed the channel limit {max_channels}",
            orders.len()
        )));
    }
    let k_sq = orders.iter().map(|&n| beam.k_sq(axis, q, n)).collect();
    Ok(ChannelSet { orders, k_sq, q, axis, beam, excluded })
}

impl ChannelSet {
    /// The specular channel alone.
    pub fn single(beam: BeamKinematics) -> Self {
        Self {
            orders: vec![0],
            k_sq: vec![beam.k_y * beam.k_y],
            q: 1.0,
            axis: DiffractionAxis::Z,
            beam,
            excluded: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn orders(&self) -> &[i64] {
        &self.orders
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn axis(&self) -> DiffractionAxis {
        self.axis
    }

    pub fn beam(&self) -> BeamKinematics {
        self.beam
    }

    /// Orders dropped as too close to threshold.
    pub fn excluded(&self) -> &[i64] {
        &self.excluded
    }

    /// kₙ², 1/m².
    pub fn k_sq(&self) -> &[f64] {
        &self.k_sq
    }

    pub fn is_open(&self, i: usize) -> bool {
        self.k_sq[i] > 0.0
    }

    pub fn open_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_open(i)).collect()
    }

    pub fn index_of(&self, n: i64) -> Option<usize> {
        self.orders.binary_search(&n).ok()
    }

    /// kₙ in 1/m: real for open orders, +i√|kₙ²| for closed ones.
    pub fn k_n(&self, i: usize) -> Complex<f64> {
        let ks = self.k_sq[i];
        if ks > 0.0 {
            Complex::new(ks.sqrt(), 0.0)
        } else {
            Complex::new(0.0, (-ks).sqrt())
        }
    }

    /// Largest |n − m| in the set.
    pub fn max_order_difference(&self) -> usize {
        match (self.orders.first(), self.orders.last()) {
            (Some(a), Some(b)) => (b - a) as usize,
            _ => 0,
        }
    }
}

/// Assembles U(y) = diag(kₙ²) − Ṽ_{n−m}(y) in reduced units.
///
/// The matrix is real: the potential is real and kₙ² is real for open and
/// closed orders alike.
#[derive(Debug, Clone)]
pub struct PotentialMatrixEvaluator<'a, T> {
    channels: &'a ChannelSet,
    table: &'a PotentialTable<T>,
    k_sq: Vec<T>,
    orders: Vec<i64>,
    coupled: bool,
}

impl<'a, T: Real> PotentialMatrixEvaluator<'a, T> {
    pub fn new(channels: &'a ChannelSet, table: &'a PotentialTable<T>) -> Self {
        let units = table.units();
        let l2 = units.length * units.length;
        let k_sq = channels.k_sq().iter().map(|ks| T::lit(ks * l2)).collect();
        let coupled = channels.len() > 1 && (1..=channels.max_order_difference()).any(|d| !table.terms(d as i64).is_empty());
        Self {
            channels,
            table,
            k_sq,
            orders: channels.orders().to_vec(),
            coupled,
        }
    }

    pub fn channels(&self) -> &ChannelSet {
        self.channels
    }

    pub fn table(&self) -> &PotentialTable<T> {
        self.table
    }

    pub fn dim(&self) -> usize {
        self.k_sq.len()
    }

    /// Reduced kₙ².
    pub fn k_sq(&self) -> &[T] {
        &self.k_sq
    }

    /// False when U(y) is diagonal for every y.
    pub fn is_coupled(&self) -> bool {
        self.coupled
    }

    fn check(&self, y: T) -> Result<()> {
        if !y.is_finite() || (self.table.has_cp() && y <= T::zero()) {
            return Err(Error::Domain(format!(
                "potential matrix evaluated at y = {:e} m",
                self.table.units().length_si(y)
            )));
        }
        Ok(())
    }

    /// Diagonal of U(y).
    pub fn diagonal(&self, y: T, out: &mut [T]) -> Result<()> {
        self.check(y)?;
        let v0 = self.table.order_potential(0, y);
        for (o, ks) in out.iter_mut().zip(&self.k_sq) {
            *o = *ks - v0;
        }
        Ok(())
    }

    /// Fills `out` with U(y).
    pub fn fill(&self, y: T, out: &mut Mat<T>) -> Result<()> {
        self.check(y)?;
        let n = self.dim();
        if out.nrows() != n || out.ncols() != n {
            *out = Mat::zeros(n, n);
        }
        let span = self.channels.max_order_difference();
        let mut v = Vec::with_capacity(span + 1);
        v.push(self.table.order_potential(0, y));
        if self.coupled {
            v.extend((1..=span).map(|d| self.table.order_potential(d as i64, y)));
        } else {
            v.resize(span + 1, T::zero());
        }
        for j in 0..n {
            for i in 0..n {
                let d = (self.orders[i] - self.orders[j]).unsigned_abs() as usize;
                let mut u = -v[d];
                if i == j {
                    u = u + self.k_sq[i];
                }
                out[(i, j)] = u;
            }
        }
        Ok(())
    }

    /// U(y) as a fresh matrix, y in metres.
    pub fn matrix_at(&self, y_m: f64) -> Result<Mat<T>> {
        let mut m = Mat::zeros(self.dim(), self.dim());
        self.fill(self.table.units().length(y_m), &mut m)?;
        Ok(m)
    }
}

/// Reduced units of a channel set: lengths in 1/κₓ when a surface period is
/// available, otherwise in 1/k₀.
pub fn default_units(particle: &ParticleParams, kappa_x: Option<f64>) -> ReducedUnits {
    let k0 = particle.normal_wavenumber();
    ReducedUnits::new(particle.mass, 1.0 / kappa_x.unwrap_or(k0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::ELEMENTARY_CHARGE;
    use crate::potentials::{DopingProfile, SurfaceConfig};

    fn fig2a() -> (ParticleParams, SurfaceConfig) {
        let p = ParticleParams::helium(300.0, 1e-3, 0.0);
        let s = SurfaceConfig::new(500e-9, 40e-6, 1e16 * ELEMENTARY_CHARGE, DopingProfile::Stripe { f: 0.5 }).unwrap();
        (p, s)
    }

    #[test]
    fn normal_incidence() {
        let b = beam_kinematics(&ParticleParams::helium(300.0, std::f64::consts::FRAC_PI_2, 0.0));
        assert!(b.k_x.abs() < 1e-6 * b.k && b.k_z == 0.0);
        assert_eq!(b.k_y, -b.k);
    }

    #[test]
    fn helium_wavenumber_regression() {
        let b = beam_kinematics(&ParticleParams::helium(300.0, 1e-3, 0.0));
        // m v₀ / ħ with the frozen constants.
        assert!((b.k / 1.890_759_735_711_768_7e10 - 1.0).abs() < 1e-14, "{:.17e}", b.k);
        assert_eq!(b.k_z, 0.0);
        let norm = b.k_x * b.k_x + b.k_y * b.k_y + b.k_z * b.k_z;
        assert!((norm / (b.k * b.k) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn only_specular_when_q_exceeds_k() {
        let b = beam_kinematics(&ParticleParams::helium(300.0, std::f64::consts::FRAC_PI_2, 0.0));
        let c = build_channels(b, DiffractionAxis::Z, 2.0 * b.k, 0, 16).unwrap();
        assert_eq!(c.orders(), &[0]);
    }

    #[test]
    fn fig2_open_orders_match_brute_force() {
        let (p, s) = fig2a();
        let b = beam_kinematics(&p);
        let q = s.q_z();
        let c = build_channels(b, DiffractionAxis::Z, q, 0, DEFAULT_MAX_CHANNELS).unwrap();
        let brute = (-1_000_000i64..=1_000_000)
            .filter(|&n| {
                let nq = n as f64 * q;
                b.k * b.k - b.k_x * b.k_x - nq * nq > 0.0
            })
            .count();
        // Orders ±120 sit within 10⁻⁸k² of threshold and are dropped.
        assert_eq!(c.excluded(), &[-120, 120]);
        assert_eq!(c.len() + c.excluded().len(), brute);
        assert_eq!(brute, 241);
        for (i, &n) in c.orders().iter().enumerate() {
            let j = c.index_of(-n).unwrap();
            assert_eq!(c.k_sq()[i], c.k_sq()[j]);
        }
    }

    #[test]
    fn closed_extras_are_imaginary_and_open_orders_contiguous() {
        let (p, s) = fig2a();
        let b = beam_kinematics(&p);
        let c = build_channels(b, DiffractionAxis::Z, s.q_z(), 3, DEFAULT_MAX_CHANNELS).unwrap();
        assert_eq!(c.len(), 245);
        let open: Vec<i64> = c.open_indices().iter().map(|&i| c.orders()[i]).collect();
        assert!(open.windows(2).all(|w| w[1] == w[0] + 1));
        let last = c.len() - 1;
        assert!(!c.is_open(last) && c.k_n(last).im > 0.0 && c.k_n(last).re == 0.0);
        assert_eq!(c.open_indices().len(), 239);
        assert!(!c.orders().contains(&120) && c.orders().contains(&123));
    }

    #[test]
    fn x_diffraction_channel_limit() {
        let b = beam_kinematics(&ParticleParams::helium(300.0, 1e-3, 0.0));
        let q = 2.0 * std::f64::consts::PI / 500e-9;
        assert!(matches!(build_channels(b, DiffractionAxis::X, q, 0, 64), Err(Error::Config(_))));
    }

    #[test]
    fn near_threshold_order_is_excluded() {
        // Choose q so that order 1 sits exactly on threshold.
        let b = BeamKinematics { k: 1.0, k_x: 0.0, k_y: -0.6, k_z: 0.8 };
        let c = build_channels(b, DiffractionAxis::Z, 0.2, 0, 64).unwrap();
        assert!(c.excluded().contains(&1));
        assert!(!c.orders().contains(&1));
    }

    #[test]
    fn stripe_matrix_band_pattern() {
        let (p, s) = fig2a();
        let b = beam_kinematics(&p);
        let c = build_channels(b, DiffractionAxis::Z, s.q_z(), 0, DEFAULT_MAX_CHANNELS).unwrap();
        let units = ReducedUnits::for_surface(&p, &s);
        let t = PotentialTable::<f64>::coupled(&p, &s, units, c.max_order_difference(), 64).unwrap();
        let ev = PotentialMatrixEvaluator::new(&c, &t);
        let u = ev.matrix_at(40e-9).unwrap();
        let u00 = u[(0, 1)].abs();
        for i in 0..c.len() {
            for j in 0..c.len() {
                assert_eq!(u[(i, j)], u[(j, i)]);
                let d = (i as i64 - j as i64).abs();
                if d != 0 && d % 2 == 0 {
                    assert!(u[(i, j)].abs() <= 1e-15 * u00, "d={d}");
                } else if d % 2 == 1 {
                    // sinc(dπ/2) alternates in sign over odd d.
                    let sign = if d % 4 == 1 { 1.0 } else { -1.0 };
                    assert!(u[(i, j)] * sign > 0.0);
                }
            }
        }
    }

    #[test]
    fn matrix_tends_to_kinetic_diagonal() {
        // Electrostatic part alone: 10⁻¹⁰ relative at y = 50/κₓ.
        let (p, mut s) = fig2a();
        s.casimir_polder = false;
        let b = beam_kinematics(&p);
        let c = build_channels(b, DiffractionAxis::Z, s.q_z(), 2, DEFAULT_MAX_CHANNELS).unwrap();
        let units = ReducedUnits::for_surface(&p, &s);
        let t = PotentialTable::<f64>::coupled(&p, &s, units, c.max_order_difference(), 64).unwrap();
        let ev = PotentialMatrixEvaluator::new(&c, &t);
        let mut u = Mat::zeros(0, 0);
        ev.fill(50.0, &mut u).unwrap();
        for i in 0..c.len() {
            let ks = ev.k_sq()[i];
            assert!(((u[(i, i)] - ks) / ks).abs() < 1e-10);
        }
        assert!(ev.fill(0.0, &mut u).is_ok());

        // With the CP tail the approach is algebraic, ∝ y⁻⁴.
        s.casimir_polder = true;
        let t = PotentialTable::<f64>::coupled(&p, &s, units, c.max_order_difference(), 64).unwrap();
        let ev = PotentialMatrixEvaluator::new(&c, &t);
        let i0 = c.index_of(0).unwrap();
        let dev = |y: f64| {
            let mut u = Mat::zeros(0, 0);
            ev.fill(y, &mut u).unwrap();
            (u[(i0, i0)] - ev.k_sq()[i0]) / ev.k_sq()[i0]
        };
        assert!((dev(50.0) / dev(100.0) - 16.0).abs() < 1e-6);
        assert!(ev.fill(0.0, &mut u).is_err());
    }

    #[test]
    fn single_channel_cp_entry() {
        let p = ParticleParams::helium(300.0, 1e-3, 0.0);
        let units = ReducedUnits::new(p.mass, 1e-7);
        let t = PotentialTable::<f64>::flat(&p, units);
        let c = ChannelSet::single(beam_kinematics(&p));
        let ev = PotentialMatrixEvaluator::new(&c, &t);
        let y = 2e-8;
        let u = ev.matrix_at(y).unwrap();
        let k0 = p.normal_wavenumber();
        let hbar = crate::constants::HBAR;
        let expected = (k0 * k0 + 2.0 * p.mass * p.c4() / (hbar * hbar * y.powi(4))) * 1e-14;
        assert!((u[(0, 0)] / expected - 1.0).abs() < 1e-12);
    }
}
