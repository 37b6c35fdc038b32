//! Adaptive Gauss–Kronrod quadrature (7/15 rule with interval bisection).
//!
//! Improper endpoints are handled through explicit substitutions: the
//! probability interval `(0,1)` is stretched onto an exponential scale
//! near each endpoint, the bulk is integrated adaptively, and the part
//! beyond the floating-point horizon is estimated from a fitted tail
//! model (shifted power law near 0, exponential near 1). A tail that
//! does not decay is reported as a divergent integral (`+∞`).

use crate::error::{Error, Result};
use crate::num::roots;

/// Kronrod abscissae for the 15-point rule on [-1, 1].
const XGK: [f64; 15] = [
    -0.9914553711208126,
    -0.9491079123427585,
    -0.8648644233597691,
    -0.7415311855993944,
    -0.5860872354676911,
    -0.4058451513773972,
    -0.2077849550078985,
    0.0,
    0.2077849550078985,
    0.4058451513773972,
    0.5860872354676911,
    0.7415311855993944,
    0.8648644233597691,
    0.9491079123427585,
    0.9914553711208126,
];

const WGK: [f64; 15] = [
    0.022935322010529224,
    0.06309209262997856,
    0.10479001032225018,
    0.14065325971552592,
    0.1690047266392679,
    0.1903505780647854,
    0.20443294007529889,
    0.20948214108472782,
    0.20443294007529889,
    0.1903505780647854,
    0.1690047266392679,
    0.14065325971552592,
    0.10479001032225018,
    0.06309209262997856,
    0.022935322010529224,
];

/// Weights of the embedded 7-point Gauss rule (odd-indexed abscissae).
const WG: [f64; 7] = [
    0.1294849661688697,
    0.27970539148927664,
    0.3818300505051189,
    0.4179591836734694,
    0.3818300505051189,
    0.27970539148927664,
    0.1294849661688697,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let v = f(center + half * x);
        kronrod += wk * v;
        if i % 2 == 1 {
            gauss += WG[i / 2] * v;
        }
    }
    let integral = kronrod * half;
    let err = ((kronrod - gauss) * half).abs();
    (integral, err)
}

/// Integrate `f` over `[a, b]` to a tolerance relative to a crude
/// magnitude estimate, for integrands whose scale is not known upfront.
pub fn integrate_rel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> Result<f64> {
    let n = 32;
    let mut peak = 0.0f64;
    for i in 0..=n {
        let v = f(a + (b - a) * i as f64 / n as f64).abs();
        if v.is_finite() {
            peak = peak.max(v);
        }
    }
    let tol = (rel * peak * (b - a).abs()).max(1e-300);
    integrate(f, a, b, tol)
}

/// Integrate `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("integrate requires finite endpoints".into()));
    }
    // Stack of (a, b, estimate, error, depth) intervals still above
    // tolerance.
    let (est, err) = gk15(&f, a, b);
    let mut stack = vec![(a, b, est, err, 0u32)];
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evals = 1usize;
    while let Some((lo, hi, est, err, depth)) = stack.pop() {
        // Per-interval budget proportional to length.
        let budget = tol * (hi - lo).abs() / (b - a).abs();
        if err <= budget.max(1e-16 * est.abs()) || depth >= 45 || evals > 300_000 {
            total += est;
            total_err += err;
            continue;
        }
        evals += 2;
        let mid = 0.5 * (lo + hi);
        let (el, erl) = gk15(&f, lo, mid);
        let (er, errr) = gk15(&f, mid, hi);
        stack.push((lo, mid, el, erl, depth + 1));
        stack.push((mid, hi, er, errr, depth + 1));
    }
    if !total.is_finite() {
        return Err(Error::Numerical("quadrature produced a non-finite value".into()));
    }
    if total_err > 1e4 * tol.max(1e-16 * total.abs()) {
        return Err(Error::Numerical(format!(
            "quadrature failed to converge on [{a}, {b}] (err ~ {total_err:e})"
        )));
    }
    Ok(total)
}

/// Outcome of a tail-model fit past the integration horizon.
enum Tail {
    Value(f64),
    Divergent,
}

/// Estimate `∫_{s3}^∞ g(v) dv` by fitting `g ~ C(v+a)^{-β}` through
/// samples at `s1 < s2 < s3`. Exact when `g` lies in that family; a
/// non-decaying or sign-changing tail is reported divergent.
fn power_tail<G: Fn(f64) -> f64>(g: &G, s1: f64, s2: f64, s3: f64) -> Tail {
    let (g1, g2, g3) = (g(s1), g(s2), g(s3));
    if !(g1.is_finite() && g2.is_finite() && g3.is_finite()) {
        return Tail::Divergent;
    }
    if g3.abs() < 1e-17 {
        return Tail::Value(0.0);
    }
    let sgn = g3.signum();
    if g1.signum() != sgn || g2.signum() != sgn {
        return Tail::Divergent;
    }
    let (w1, w2, w3) = (g1.abs(), g2.abs(), g3.abs());
    if w3 >= w2 || w2 >= w1 {
        return Tail::Divergent;
    }
    let mismatch = |a: f64| {
        (w1 / w2).ln() / ((s2 + a) / (s1 + a)).ln() - (w2 / w3).ln() / ((s3 + a) / (s2 + a)).ln()
    };
    let lo = -0.99 * s1;
    let hi = 1e7;
    let a = if mismatch(lo).signum() != mismatch(hi).signum() {
        roots::bisect(mismatch, lo, hi, 1e-9 * s3, 200).unwrap_or(0.0)
    } else {
        0.0
    };
    let beta = (w2 / w3).ln() / ((s3 + a) / (s2 + a)).ln();
    if !beta.is_finite() || beta <= 1.02 {
        return Tail::Divergent;
    }
    Tail::Value(sgn * w3 * (s3 + a) / (beta - 1.0))
}

/// Estimate `∫_{s3}^∞ g(v) dv` by fitting `g ~ C e^{-λv}` through
/// samples at `s1 < s3`. Exact for exponential tails (power-law
/// quantile blow-ups at 1); `λ` below a safety floor is reported
/// divergent.
fn exp_tail<G: Fn(f64) -> f64>(g: &G, s1: f64, s3: f64) -> Tail {
    let (g1, g3) = (g(s1), g(s3));
    if !(g1.is_finite() && g3.is_finite()) {
        return Tail::Divergent;
    }
    if g3.abs() < 1e-17 {
        return Tail::Value(0.0);
    }
    if g1.signum() != g3.signum() || g3.abs() >= g1.abs() {
        return Tail::Divergent;
    }
    let lambda = (g1.abs() / g3.abs()).ln() / (s3 - s1);
    if lambda < 0.05 {
        return Tail::Divergent;
    }
    Tail::Value(g3 / lambda)
}

/// Deepest reachable point of the `u = e^{-v}` substitution before the
/// argument underflows.
const V_FLOOR: f64 = 700.0;
/// Deepest reachable point of the `u = 1 − e^{-v}` substitution before
/// `1 − u` is swamped by rounding.
const V_CEIL: f64 = 36.0;

/// Integrate a quantile-style function `h` over the probability interval
/// `(a, b) ⊆ (0, 1)`, tolerating integrable blow-ups at either endpoint.
/// Returns `+∞` when the integral appears divergent.
pub fn integrate_quantile<F: Fn(f64) -> f64>(h: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a > b {
        return Err(Error::Domain(format!(
            "quantile integral needs 0 <= a <= b <= 1, got ({a}, {b})"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    // Split at fixed interior points; the middle piece is integrated
    // directly and each end piece through its substitution.
    let lo_cut = a.max(0.25).min(b);
    let hi_cut = b.min(0.75).max(lo_cut);
    let mut total = 0.0;
    if a < lo_cut {
        // u = e^{-v}: ∫ h(u) du = ∫ h(e^{-v}) e^{-v} dv.
        let g = |v: f64| h((-v).exp()) * (-v).exp();
        let v_lo = (1.0 / lo_cut).ln();
        if a > 0.0 {
            let v_hi = (1.0 / a).ln();
            if v_hi > V_FLOOR {
                return Err(Error::Domain(format!(
                    "lower endpoint {a:e} is below the evaluation floor"
                )));
            }
            total += integrate(&g, v_lo, v_hi, tol)?;
        } else {
            let s1 = 343f64.max(v_lo + 1.0);
            let s3 = V_FLOOR;
            if s1 >= s3 - 1.0 {
                return Err(Error::Domain(format!(
                    "upper limit {lo_cut:e} of the open-endpoint piece is too deep"
                )));
            }
            match power_tail(&g, s1, 0.5 * (s1 + s3), s3) {
                Tail::Divergent => return Ok(f64::INFINITY),
                Tail::Value(rem) => total += rem + integrate(&g, v_lo, s3, tol)?,
            }
        }
    }
    if lo_cut < hi_cut {
        total += integrate(&h, lo_cut, hi_cut, tol)?;
    }
    if hi_cut < b {
        // u = 1 - e^{-v}.
        let g = |v: f64| h(1.0 - (-v).exp()) * (-v).exp();
        let v_lo = -(1.0 - hi_cut).ln();
        if b < 1.0 {
            let v_hi = -(1.0 - b).ln();
            total += integrate(&g, v_lo, v_hi, tol)?;
        } else {
            match exp_tail(&g, 28.0, V_CEIL) {
                Tail::Divergent => return Ok(f64::INFINITY),
                Tail::Value(rem) => total += rem + integrate(&g, v_lo, V_CEIL, tol)?,
            }
        }
    }
    Ok(total)
}
