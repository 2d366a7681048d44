use crate::potentials::PotentialTable;
use crate::scalar::Real;

const FINE_POINTS: usize = 8192;

/// Local phase density used to place sector boundaries: the fastest local
/// wavenumber, plus 1/y where the CP tail makes the WKB scale shrink, plus a
/// unit floor so that slowly varying regions still receive sectors.
fn phase_density<T: Real>(table: &PotentialTable<T>, k_max_sq: T, y: T) -> T {
    let v = table.order_potential(0, y);
    let mut w = (k_max_sq - v).max(T::zero()).sqrt() + T::one();
    if table.has_cp() {
        w = w + y.recip();
    }
    w
}

/// Splits [y_start, y_end] into `sectors` pieces of equal accumulated phase.
///
/// Returns the `sectors + 1` boundaries. Each sector is later propagated on
/// its own equidistant grid.
pub fn plan_sectors<T: Real>(table: &PotentialTable<T>, k_max_sq: T, y_start: T, y_end: T, sectors: usize) -> Vec<T> {
    let sectors = sectors.max(1);
    if sectors == 1 {
        return vec![y_start, y_end];
    }
    let a = y_start.as_f64();
    let b = y_end.as_f64();
    let geometric = a > 0.0;
    let ys: Vec<f64> = (0..=FINE_POINTS)
        .map(|i| {
            let t = i as f64 / FINE_POINTS as f64;
            if geometric {
                a * (b / a).powf(t)
            } else {
                a + (b - a) * t
            }
        })
        .collect();
    let w: Vec<f64> = ys.iter().map(|&y| phase_density(table, k_max_sq, T::lit(y)).as_f64()).collect();
    let mut cum = vec![0.0; ys.len()];
    for i in 1..ys.len() {
        cum[i] = cum[i - 1] + 0.5 * (w[i] + w[i - 1]) * (ys[i] - ys[i - 1]);
    }
    let total = cum[ys.len() - 1];
    let mut out = Vec::with_capacity(sectors + 1);
    out.push(y_start);
    let mut j = 1;
    for s in 1..sectors {
        let target = total * s as f64 / sectors as f64;
        while cum[j] < target {
            j += 1;
        }
        let t = (target - cum[j - 1]) / (cum[j] - cum[j - 1]);
        out.push(T::lit(ys[j - 1] + t * (ys[j] - ys[j - 1])));
    }
    out.push(y_end);
    out
}

/// Largest phase advance h·p of a single step, with p the fastest local
/// wavenumber √(k_max² − Ṽ₀) sampled at both ends of every sector.
pub fn max_step_phase<T: Real>(table: &PotentialTable<T>, k_max_sq: T, breaks: &[T], steps_per_sector: usize) -> f64 {
    breaks
        .windows(2)
        .map(|w| {
            let h = (w[1] - w[0]).as_f64() / steps_per_sector as f64;
            let p = |y: T| (k_max_sq - table.order_potential(0, y)).max(T::zero()).sqrt().as_f64();
            h * p(w[0]).max(p(w[1]))
        })
        .fold(0.0, f64::max)
}
