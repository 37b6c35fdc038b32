//! Bracketing root finders for monotone functions.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]` for a function with `f(lo) <= 0 <= f(hi)`
/// (or the reverse). Runs until the bracket is narrower than `xtol`
/// or `max_iter` halvings have been performed. Returns the midpoint.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: u32) -> Result<f64> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo}, {hi}]: f(lo)={flo:e}, f(hi)={fhi:e}"
        )));
    }
    let rising = flo < 0.0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bisection that stops when `|f| <= ftol` rather than on bracket width.
/// Returns `(root, bracket_width)`.
pub fn bisect_to_ftol<F: Fn(f64) -> f64>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    ftol: f64,
    max_iter: u32,
) -> Result<(f64, f64)> {
    let flo = f(lo);
    let fhi = f(hi);
    if flo.abs() <= ftol {
        return Ok((lo, hi - lo));
    }
    if fhi.abs() <= ftol {
        return Ok((hi, hi - lo));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Numerical(format!(
            "no sign change on [{lo}, {hi}]: f(lo)={flo:e}, f(hi)={fhi:e}"
        )));
    }
    let rising = flo < 0.0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm.abs() <= ftol {
            return Ok((mid, hi - lo));
        }
        if (fm < 0.0) == rising {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi), hi - lo))
}

/// Expand `hi` geometrically from `init_hi` until `f` changes sign
/// relative to `f(lo)`, capped at `max_hi`.
pub fn expand_upper<F: Fn(f64) -> f64>(f: F, lo: f64, init_hi: f64, max_hi: f64) -> Result<f64> {
    let s = f(lo).signum();
    let mut hi = init_hi;
    while hi <= max_hi {
        if f(hi).signum() != s {
            return Ok(hi);
        }
        hi *= 4.0;
    }
    Err(Error::Numerical(format!(
        "no sign change found while expanding to {max_hi:e}"
    )))
}
