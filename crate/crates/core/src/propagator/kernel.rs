use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use num_complex::Complex;

use super::LogDerivativeState;
use crate::channels::PotentialMatrixEvaluator;
use crate::error::{Error, Result};
use crate::scalar::Real;

fn pivots_regular<T: Real>(n: usize, abs: impl Fn(usize) -> T) -> bool {
    let mut lo = T::infinity();
    let mut hi = T::zero();
    for i in 0..n {
        let a = abs(i);
        if !a.is_finite() {
            return false;
        }
        lo = lo.min(a);
        hi = hi.max(a);
    }
    n == 0 || lo > hi * T::epsilon()
}

/// False when the LU factor has a zero or non-finite pivot.
pub(crate) fn lu_is_regular<T: Real>(u: MatRef<'_, Complex<T>>) -> bool {
    pivots_regular(u.nrows(), |i| u[(i, i)].norm())
}

fn real_lu_is_regular<T: Real>(u: MatRef<'_, T>) -> bool {
    pivots_regular(u.nrows(), |i| u[(i, i)].abs())
}

/// Quadrature weight of the potential term at grid point m of M.
fn weight<T: Real>(m: usize, steps: usize) -> T {
    if m == steps {
        T::one()
    } else if m % 2 == 1 {
        T::lit(4.0)
    } else {
        T::lit(2.0)
    }
}

/// Propagates Z across the sector [a, b] with `steps` equidistant steps:
///
/// Y₀ = Z(a) − (h/3)U₀,
/// Yₘ₊₁ = (I + hYₘ)⁻¹Yₘ − (h/3)wₘ₊₁ Ũₘ₊₁,
///
/// where Ũ = (I + (h²/6)U)⁻¹U with weight 4 at odd points, Ũ = U with weight 2
/// at even points and weight 1 at the last point. Returns Z(b) = Y_M.
pub fn johnson_sector<T: Real>(
    state: LogDerivativeState<T>,
    b: T,
    steps: usize,
    ev: &PotentialMatrixEvaluator<'_, T>,
    step_offset: usize,
) -> Result<LogDerivativeState<T>> {
    if steps < 2 || steps % 2 != 0 {
        return Err(Error::Config(format!("sector step count {steps} must be even and >= 2")));
    }
    if state.dim() == 1 || !ev.is_coupled() {
        diagonal_sector(state, b, steps, ev, step_offset)
    } else {
        dense_sector(state, b, steps, ev, step_offset)
    }
}

/// Runs every sector in turn; `breaks` are the sector boundaries.
pub fn johnson_propagate<T: Real>(
    mut state: LogDerivativeState<T>,
    breaks: &[T],
    steps_per_sector: usize,
    ev: &PotentialMatrixEvaluator<'_, T>,
) -> Result<LogDerivativeState<T>> {
    for (s, w) in breaks.windows(2).enumerate() {
        state.y = w[0];
        state = johnson_sector(state, w[1], steps_per_sector, ev, s * steps_per_sector)?;
    }
    Ok(state)
}

fn fail<T: Real>(ev: &PotentialMatrixEvaluator<'_, T>, step: usize, y: T, reason: &'static str) -> Error {
    Error::Propagation { step, y: ev.table().units().length_si(y), reason }
}

pub(crate) fn dense_sector<T: Real>(
    state: LogDerivativeState<T>,
    b: T,
    steps: usize,
    ev: &PotentialMatrixEvaluator<'_, T>,
    step_offset: usize,
) -> Result<LogDerivativeState<T>> {
    let n = state.dim();
    let a = state.y;
    let h = (b - a) / T::lit(steps as f64);
    let third = h / T::lit(3.0);
    let h2_6 = h * h / T::lit(6.0);
    let mut u = Mat::<T>::zeros(n, n);
    let mut y = state.z;

    ev.fill(a, &mut u)?;
    for j in 0..n {
        for i in 0..n {
            y[(i, j)].re = y[(i, j)].re - third * u[(i, j)];
        }
    }

    let mut lhs = Mat::<Complex<T>>::zeros(n, n);
    let mut lhs_real = Mat::<T>::zeros(n, n);
    for m in 1..=steps {
        let ym = a + h * T::lit(m as f64);
        // (I + hY)⁻¹ Y
        for j in 0..n {
            for i in 0..n {
                lhs[(i, j)] = y[(i, j)] * h;
            }
            lhs[(j, j)].re = lhs[(j, j)].re + T::one();
        }
        let lu = lhs.partial_piv_lu();
        if !lu_is_regular(lu.U()) {
            return Err(fail(ev, step_offset + m, ym, "I + h·Y is singular"));
        }
        lu.solve_in_place(y.as_mut());

        ev.fill(ym, &mut u)?;
        let w = third * weight::<T>(m, steps);
        if m % 2 == 1 {
            for j in 0..n {
                for i in 0..n {
                    lhs_real[(i, j)] = u[(i, j)] * h2_6;
                }
                lhs_real[(j, j)] = lhs_real[(j, j)] + T::one();
            }
            let lu = lhs_real.partial_piv_lu();
            if !real_lu_is_regular(lu.U()) {
                return Err(fail(ev, step_offset + m, ym, "I + (h²/6)·U is singular"));
            }
            lu.solve_in_place(u.as_mut());
        }
        let mut finite = true;
        for j in 0..n {
            for i in 0..n {
                let v = y[(i, j)].re - w * u[(i, j)];
                y[(i, j)].re = v;
                finite &= v.is_finite() && y[(i, j)].im.is_finite();
            }
        }
        if !finite {
            return Err(fail(ev, step_offset + m, ym, "non-finite log-derivative"));
        }
    }
    Ok(LogDerivativeState { z: y, y: b })
}

pub(crate) fn diagonal_sector<T: Real>(
    state: LogDerivativeState<T>,
    b: T,
    steps: usize,
    ev: &PotentialMatrixEvaluator<'_, T>,
    step_offset: usize,
) -> Result<LogDerivativeState<T>> {
    let n = state.dim();
    let a = state.y;
    let h = (b - a) / T::lit(steps as f64);
    let third = h / T::lit(3.0);
    let h2_6 = h * h / T::lit(6.0);
    let mut u = vec![T::zero(); n];
    let mut y: Vec<Complex<T>> = (0..n).map(|i| state.z[(i, i)]).collect();

    ev.diagonal(a, &mut u)?;
    for (yi, ui) in y.iter_mut().zip(&u) {
        yi.re = yi.re - third * *ui;
    }
    for m in 1..=steps {
        let ym = a + h * T::lit(m as f64);
        ev.diagonal(ym, &mut u)?;
        let w = third * weight::<T>(m, steps);
        for (yi, &ui) in y.iter_mut().zip(&u) {
            let den = *yi * h + T::one();
            if den.norm() == T::zero() {
                return Err(fail(ev, step_offset + m, ym, "I + h·Y is singular"));
            }
            let mut ut = ui;
            if m % 2 == 1 {
                let d = T::one() + h2_6 * ui;
                if d == T::zero() {
                    return Err(fail(ev, step_offset + m, ym, "I + (h²/6)·U is singular"));
                }
                ut = ui / d;
            }
            *yi = *yi / den;
            yi.re = yi.re - w * ut;
            if !(yi.re.is_finite() && yi.im.is_finite()) {
                return Err(fail(ev, step_offset + m, ym, "non-finite log-derivative"));
            }
        }
    }
    let mut z = Mat::<Complex<T>>::zeros(n, n);
    for (i, yi) in y.into_iter().enumerate() {
        z[(i, i)] = yi;
    }
    Ok(LogDerivativeState { z, y: b })
}
