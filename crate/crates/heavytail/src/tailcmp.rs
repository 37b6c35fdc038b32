//! Tail and quantile comparison under convex majorization.
//!
//! Given `E φ(X) ≤ E φ(Y)` for non-decreasing convex `φ`, everything a
//! one-dimensional tail bound can say about `X` is encoded in functionals
//! of the law of `Y`. This module computes those functionals: the optimal
//! hinge witness, the conditional tail bound and its sharpness witness,
//! quantile envelopes (direct, `ω`-weighted, and Gaussian-form), the
//! factor-`R` tail bound with its regularity conditions I–VI, and the
//! conditional-expectation coarsening that shows the quantile comparison
//! cannot be improved to a pointwise one.

use std::collections::BTreeMap;

use rand::Rng;
use serde::Serialize;

use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::num::quad;
use crate::num::roots;

/// The hinge `φ_{t,a}(x) = max{0, a(x−t)+1}`: convex, non-decreasing on
/// `[t, ∞)`, with `φ_{t,a}(t) = 1`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvexWitness {
    pub t: f64,
    pub a: f64,
}

impl ConvexWitness {
    pub fn eval(&self, x: f64) -> f64 {
        (self.a * (x - self.t) + 1.0).max(0.0)
    }
}

/// `P{Y > s}` for any law (continuous, discrete, or mixed).
pub fn survival(d: &Dist, s: f64) -> f64 {
    1.0 - d.cdf(s)
}

/// `E[Y · 1_{Y > s}]`, exact for atomic parts.
pub fn upper_mean(d: &Dist, s: f64) -> Result<f64> {
    match d {
        Dist::Atoms(atoms) => Ok(atoms.iter().filter(|a| a.x > s).map(|a| a.x * a.mass).sum()),
        Dist::PointMass { c } => Ok(if *c > s { *c } else { 0.0 }),
        Dist::Winsorized { base, atom, mass, .. } => {
            if s >= *atom {
                Ok(0.0)
            } else {
                let f = base.cdf(s).min(1.0 - mass);
                Ok(base.quantile_integral(f, 1.0 - mass)? + atom * mass)
            }
        }
        _ => d.quantile_integral(d.cdf(s), 1.0),
    }
}

/// `E f(Y)` via the quantile representation, exact for atomic parts.
pub fn expect_fn<F: Fn(f64) -> f64>(d: &Dist, f: F) -> Result<f64> {
    match d {
        Dist::Atoms(atoms) => Ok(atoms.iter().map(|a| f(a.x) * a.mass).sum()),
        Dist::PointMass { c } => Ok(f(*c)),
        Dist::Winsorized { base, atom, mass, .. } => {
            let body = quad::integrate_quantile(|u| f(base.quantile(u).unwrap()), 0.0, 1.0 - mass, 1e-11)?;
            Ok(body + mass * f(*atom))
        }
        _ => quad::integrate_quantile(|u| f(d.quantile(u).unwrap()), 0.0, 1.0, 1e-11),
    }
}

/// A majorization pair: `dominated` is claimed to satisfy
/// `E φ(dominated) ≤ E φ(dominating)` for all non-decreasing convex `φ`.
#[derive(Clone, Debug)]
pub struct MajorizationPair {
    pub dominated: Dist,
    pub dominating: Dist,
}

impl MajorizationPair {
    /// Check `E max{0, Y} < ∞` for the dominating law.
    pub fn validate(&self) -> Result<()> {
        let m = upper_mean(&self.dominating, 0.0)?;
        if !m.is_finite() {
            return Err(Error::Precondition(
                "dominating law has non-integrable positive part".into(),
            ));
        }
        Ok(())
    }

    /// Worst margin `E φ(X) − E φ(Y)` over `n` random non-decreasing
    /// convex test functions (positive means a violation).
    pub fn worst_margin<R: Rng>(&self, n: usize, rng: &mut R) -> Result<f64> {
        let mut worst = f64::NEG_INFINITY;
        for _ in 0..n {
            let phi = ConvexMix::random_nondecreasing(rng, -5.0, 5.0);
            let ex = expect_fn(&self.dominated, |x| phi.eval(x))?;
            let ey = expect_fn(&self.dominating, |x| phi.eval(x))?;
            worst = worst.max(ex - ey);
        }
        Ok(worst)
    }
}

/// A random convex test function: mixture of at most 8 hinges with
/// non-negative weights, an optional quadratic term, and an affine part.
#[derive(Clone, Debug)]
pub struct ConvexMix {
    /// `(weight ≥ 0, slope, anchor)` triples for `w·max{0, s(x−t)+1}`.
    pub hinges: Vec<(f64, f64, f64)>,
    pub quad_weight: f64,
    pub lin: f64,
    pub constant: f64,
}

impl ConvexMix {
    pub fn eval(&self, x: f64) -> f64 {
        let mut v = self.constant + self.lin * x + self.quad_weight * x * x;
        for &(w, s, t) in &self.hinges {
            v += w * (s * (x - t) + 1.0).max(0.0);
        }
        v
    }

    /// Non-decreasing convex: hinge slopes and the linear part are
    /// non-negative, no quadratic term.
    pub fn random_nondecreasing<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> ConvexMix {
        let k = rng.random_range(1..=8);
        let hinges = (0..k)
            .map(|_| {
                (
                    rng.random_range(0.0..2.0),
                    rng.random_range(0.0..3.0),
                    rng.random_range(lo..hi),
                )
            })
            .collect();
        ConvexMix {
            hinges,
            quad_weight: 0.0,
            lin: rng.random_range(0.0..1.0),
            constant: rng.random_range(-1.0..1.0),
        }
    }

    /// General convex: hinge slopes of either sign plus a quadratic term.
    pub fn random_convex<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> ConvexMix {
        let k = rng.random_range(1..=8);
        let hinges = (0..k)
            .map(|_| {
                (
                    rng.random_range(0.0..2.0),
                    rng.random_range(-3.0..3.0),
                    rng.random_range(lo..hi),
                )
            })
            .collect();
        ConvexMix {
            hinges,
            quad_weight: rng.random_range(0.0..0.5),
            lin: rng.random_range(-1.0..1.0),
            constant: rng.random_range(-1.0..1.0),
        }
    }
}

/// Solution of the optimal-witness equation: the slope `a`, the
/// certified minimum `P{Y > t − 1/a}` of `E φ(Y)/φ(t)` over the witness
/// class, and the width of the final root bracket (non-zero when the
/// root equation has a flat stretch).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct WitnessSolution {
    pub a: f64,
    pub minimum: f64,
    pub bracket_width: f64,
}

/// Find the hinge slope `a` solving `∫_{t−1/a}^∞ (x−t) dμ = 0`; the
/// minimum of `E φ_{t,a}(Y)/φ_{t,a}(t)` over slopes is then
/// `P{Y > t − 1/a}`. Requires a non-atomic `μ` with `t > E Y` and
/// `μ((t,∞)) > 0`; the smallest bracketed root is returned.
pub fn optimal_linear_witness(mu: &Dist, t: f64) -> Result<WitnessSolution> {
    if mu.is_atomic() {
        return Err(Error::Unsupported(format!(
            "optimal witness requires a non-atomic law, got {}",
            mu.name()
        )));
    }
    let abs = mu.mean_abs()?;
    if !abs.is_finite() {
        return Err(Error::Precondition("law is not integrable".into()));
    }
    let mean = mu.mean()?;
    if t <= mean {
        return Err(Error::Precondition(format!(
            "witness anchor must exceed the mean: t = {t}, E Y = {mean}"
        )));
    }
    if survival(mu, t) <= 0.0 {
        return Err(Error::Precondition(format!("no mass above t = {t}")));
    }
    // g(a) = ∫_{t−1/a}^∞ (x−t) dμ, increasing in a: from E Y − t < 0 at
    // a → 0 to ∫_t^∞ (x−t) dμ > 0 at a → ∞.
    let g = |a: f64| -> f64 {
        let s = t - 1.0 / a;
        let f = mu.cdf(s);
        mu.quantile_integral(f, 1.0).unwrap() - t * (1.0 - f)
    };
    let lo = 1e-8;
    let hi = roots::expand_upper(&g, lo, 1.0, 1e8)?;
    let ftol = 1e-10 * (1.0 + abs);
    let (a, bracket_width) = roots::bisect_to_ftol(&g, lo, hi, ftol, 200)?;
    Ok(WitnessSolution {
        a,
        minimum: survival(mu, t - 1.0 / a),
        bracket_width,
    })
}

/// Result of the conditional tail bound.
#[derive(Clone, Copy, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailCertificate {
    /// `P{Y > s} = 0`: any majorized `X` satisfies `X ≤ s` a.s.
    AlmostSure { bound: f64 },
    /// `P{X ≥ threshold} ≤ prob` for every majorized `X`.
    Bound { threshold: f64, prob: f64 },
}

/// The conditional tail bound: with `t = E[Y·1_{(s,∞)}] / P{Y > s}`,
/// every majorized `X` satisfies `P{X ≥ t} ≤ P{Y > s}`.
pub fn conditional_tail_bound(y: &Dist, s: f64) -> Result<TailCertificate> {
    let pos = upper_mean(y, 0.0)?;
    if !pos.is_finite() {
        return Err(Error::Precondition(
            "positive part of the law is not integrable".into(),
        ));
    }
    let p = survival(y, s);
    if p <= 0.0 {
        return Ok(TailCertificate::AlmostSure { bound: s });
    }
    Ok(TailCertificate::Bound {
        threshold: upper_mean(y, s)? / p,
        prob: p,
    })
}

/// The law saturating the conditional tail bound: `Y` with its upper
/// tail `{Y ≥ s}` collapsed to a single atom at `E(Y : Y ≥ s)`.
pub fn sharpness_witness(y: &Dist, s: f64) -> Result<Dist> {
    if y.is_atomic() {
        return Err(Error::Unsupported(format!(
            "sharpness witness requires a non-atomic law, got {}",
            y.name()
        )));
    }
    let abs = y.mean_abs()?;
    if !abs.is_finite() {
        return Err(Error::Precondition("law is not integrable".into()));
    }
    // Continuous law: P{Y ≥ s} = P{Y > s}.
    let mass = survival(y, s);
    if mass <= 0.0 {
        return Err(Error::Precondition(format!("no mass at or above s = {s}")));
    }
    if mass >= 1.0 {
        // s below the essential infimum: Jensen collapses Y to its mean.
        return Ok(Dist::PointMass { c: y.mean()? });
    }
    let atom = upper_mean(y, s)? / mass;
    Ok(Dist::Winsorized {
        base: Box::new(y.clone()),
        cut: s,
        atom,
        mass,
    })
}

/// A one-number envelope value with a divergence flag.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnvelopeValue {
    pub value: f64,
    pub divergent: bool,
}

/// The maximal-quantile envelope `(1/(1−x)) ∫_x^1 H_Y(u) du`: an upper
/// bound on `H_X(x)` for every majorized `X`.
pub fn quantile_envelope(y: &Dist, x: f64) -> Result<EnvelopeValue> {
    if !(0.0 < x && x < 1.0) {
        return Err(Error::Domain(format!("need x in (0,1), got {x}")));
    }
    let integral = y.quantile_integral(x, 1.0)?;
    Ok(EnvelopeValue {
        value: integral / (1.0 - x),
        divergent: integral.is_infinite(),
    })
}

/// An envelope bound with attached grid-check warnings.
#[derive(Clone, Debug, Serialize)]
pub struct CheckedBound {
    pub value: f64,
    pub warnings: Vec<String>,
}

/// `ω`-weighted envelope: if `H(1−δ(1−x)) ≤ ω(δ)H(x)` then
/// `H_X(x) ≤ H(x)·∫_0^1 ω(u) du`. The hypothesis is spot-checked on a
/// `(δ, x)` grid; failures are attached as warnings, a non-integrable
/// `ω` is an error.
pub fn omega_envelope<H, W>(h: H, omega: W, x: f64) -> Result<CheckedBound>
where
    H: Fn(f64) -> f64,
    W: Fn(f64) -> f64,
{
    if !(0.0 < x && x < 1.0) {
        return Err(Error::Domain(format!("need x in (0,1), got {x}")));
    }
    let mass = quad::integrate_quantile(&omega, 0.0, 1.0, 1e-10)?;
    if !mass.is_finite() {
        return Err(Error::Precondition("ω is not integrable on (0,1)".into()));
    }
    let mut warnings = Vec::new();
    for i in 1..=20 {
        let delta = (i as f64 / 21.0).powi(3);
        for &xx in &[x, 0.5, 0.9, 0.99] {
            let lhs = h(1.0 - delta * (1.0 - xx));
            let rhs = omega(delta) * h(xx);
            if lhs > rhs * (1.0 + 1e-9) {
                warnings.push(format!(
                    "hypothesis fails at (δ={delta:.4}, x={xx}): {lhs:.6e} > {rhs:.6e}"
                ));
            }
        }
    }
    Ok(CheckedBound {
        value: h(x) * mass,
        warnings,
    })
}

/// A Gaussian-form transfer bound.
#[derive(Clone, Debug, Serialize)]
pub struct TransferBound {
    pub threshold: f64,
    pub prob: f64,
    pub warnings: Vec<String>,
}

/// If `Q(t)e^{−t²/(2p)} ≤ T·Q(s)e^{−s²/(2p)}` for `0 < s < t` and
/// `P{Y > Q(t)} < γe^{−t²/2}`, then every majorized `X` satisfies
/// `P{X > pT/(p−1)·Q(t)} ≤ γe^{−t²/2}`. The growth condition is
/// spot-checked on an `s`-grid.
pub fn gaussian_transfer<Q: Fn(f64) -> f64>(
    q: Q,
    p: f64,
    t_cap: f64,
    gamma: f64,
    t: f64,
) -> Result<TransferBound> {
    if p <= 1.0 {
        return Err(Error::Precondition(format!("need p > 1, got {p}")));
    }
    if t_cap < 1.0 || gamma < 1.0 {
        return Err(Error::Precondition(format!(
            "need T ≥ 1 and γ ≥ 1, got T = {t_cap}, γ = {gamma}"
        )));
    }
    if t <= 0.0 {
        return Err(Error::Precondition(format!("need t > 0, got {t}")));
    }
    let mut warnings = Vec::new();
    let ref_val = q(t) * (-t * t / (2.0 * p)).exp();
    for i in 1..=40 {
        let s = t * i as f64 / 41.0;
        let rhs = t_cap * q(s) * (-s * s / (2.0 * p)).exp();
        if ref_val > rhs * (1.0 + 1e-9) {
            warnings.push(format!(
                "growth condition fails at s = {s:.4}: {ref_val:.6e} > {rhs:.6e}"
            ));
        }
    }
    Ok(TransferBound {
        threshold: p * t_cap / (p - 1.0) * q(t),
        prob: gamma * (-t * t / 2.0).exp(),
        warnings,
    })
}

/// One cell of a coarsened law: an interval of `(0,1)` with its Lebesgue
/// mass and the conditional mean of the coarsened function over it.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Cell {
    pub lo: f64,
    pub hi: f64,
    pub mass: f64,
    pub mean: f64,
}

/// A coarsened law `X = E(Y | 𝒯)` as a weighted sample.
#[derive(Clone, Debug, Serialize)]
pub struct CoarsenedLaw {
    pub cells: Vec<Cell>,
}

impl CoarsenedLaw {
    /// Mass-weighted mean; equals `E Y` exactly (up to quadrature of the
    /// per-cell integrals) by construction.
    pub fn mean(&self) -> f64 {
        self.cells.iter().map(|c| c.mass * c.mean).sum()
    }

    /// The law of `X` as a finite atom list.
    pub fn to_dist(&self) -> Dist {
        let mut atoms: Vec<crate::dist::Atom> = self
            .cells
            .iter()
            .map(|c| crate::dist::Atom {
                x: c.mean,
                mass: c.mass,
            })
            .collect();
        atoms.sort_by(|a, b| a.x.partial_cmp(&b.x).unwrap());
        Dist::Atoms(atoms)
    }
}

/// Condition `Y` (a function on `(0,1)` under Lebesgue measure) on the
/// partition `E_n = [e^{−n²}, e^{−(n−1)²})`, `n = 1..cut_count`, plus
/// the remainder cell `(0, e^{−cut_count²})`. The output is the
/// conditional expectation, which is majorized by `Y` via Jensen.
pub fn coarsen<Y: Fn(f64) -> f64>(y: Y, cut_count: usize) -> Result<CoarsenedLaw> {
    if cut_count == 0 {
        return Err(Error::Precondition("need at least one cell".into()));
    }
    let mut cells = Vec::with_capacity(cut_count + 1);
    let mut push_cell = |lo: f64, hi: f64| -> Result<()> {
        let integral = quad::integrate_quantile(&y, lo, hi, 1e-12)?;
        if !integral.is_finite() {
            return Err(Error::Precondition(format!(
                "Y is not integrable over ({lo:e}, {hi:e})"
            )));
        }
        let mass = hi - lo;
        cells.push(Cell {
            lo,
            hi,
            mass,
            mean: integral / mass,
        });
        Ok(())
    };
    for n in 1..=cut_count {
        let lo = (-((n * n) as f64)).exp();
        let hi = (-(((n - 1) * (n - 1)) as f64)).exp();
        push_cell(lo, hi)?;
    }
    let rem_hi = (-((cut_count * cut_count) as f64)).exp();
    if rem_hi > 0.0 {
        push_cell(0.0, rem_hi)?;
    }
    Ok(CoarsenedLaw { cells })
}

/// The function whose coarsening has an unboundedly worse quantile:
/// `Y(x) = x^{−1} (log(e/x))^{−2}` on `(0,1)`.
pub fn coarsening_example(x: f64) -> f64 {
    let l = (std::f64::consts::E / x).ln();
    1.0 / (x * l * l)
}

/// The factor-`R` tail certificate.
#[derive(Clone, Debug, Serialize)]
pub struct RatioTailBound {
    /// `t = (1/x) ∫_0^x H_Y*(u) du`.
    pub threshold: f64,
    pub factor: f64,
    pub x: f64,
    /// `H_Y*(x/R)`, verified to be ≥ threshold.
    pub envelope_at_x_over_r: f64,
    /// `R · P{Y ≥ t}` (the certified bound on `P{X > t}`).
    pub prob_ge: f64,
    /// `R · P{Y > t}` (the strict-tail variant; differs at atoms of `Y`).
    pub prob_gt: f64,
    pub warnings: Vec<String>,
}

/// The smallest `R > 1` satisfying `T ≤ (R−1)/2 · R^{−1/p}`.
pub fn minimal_admissible_r(p: f64, t_cap: f64) -> Result<f64> {
    if p <= 1.0 || t_cap < 1.0 {
        return Err(Error::Precondition(format!(
            "need p > 1 and T ≥ 1, got p = {p}, T = {t_cap}"
        )));
    }
    let g = |r: f64| (r - 1.0) / 2.0 * r.powf(-1.0 / p) - t_cap;
    let hi = roots::expand_upper(&g, 1.0 + 1e-12, 8.0, 1e12)?;
    roots::bisect(g, 1.0 + 1e-12, hi, 1e-12 * hi, 200)
}

/// Certify `P{X > t} ≤ R·P{Y ≥ t}` at `t = (1/x)∫_0^x H_Y*(u)du` for
/// every majorized `X`, given a convex quantile and the deviation
/// regularity `(p, T)` with `T ≤ (R−1)/2·R^{−1/p}`.
pub fn ratio_tail_bound(y: &Dist, x: f64, r: f64, p: f64, t_cap: f64) -> Result<RatioTailBound> {
    if !(0.0 < x && x < 1.0) {
        return Err(Error::Domain(format!("need x in (0,1), got {x}")));
    }
    if r <= 1.0 {
        return Err(Error::Precondition(format!("need R > 1, got {r}")));
    }
    if !y.mean_abs()?.is_finite() {
        return Err(Error::Precondition("law is not integrable".into()));
    }
    let admissible = (r - 1.0) / 2.0 * r.powf(-1.0 / p);
    if t_cap > admissible {
        let min_r = minimal_admissible_r(p, t_cap)?;
        return Err(Error::Precondition(format!(
            "T = {t_cap} exceeds (R−1)/2·R^(−1/p) = {admissible:.6}; minimal admissible R = {min_r:.6}"
        )));
    }
    // Convexity of H* on the probed range (0, x] by second differences.
    let star = |u: f64| y.quantile(1.0 - u).unwrap();
    let probe_lo = (x / (2.0 * r)).max(1e-6);
    let scale = star(probe_lo).abs().max(star(x).abs()).max(1.0);
    for i in 1..60 {
        let u = probe_lo + (x - probe_lo) * i as f64 / 60.0;
        let h = 1e-4 * u;
        let d2 = star(u - h) - 2.0 * star(u) + star(u + h);
        if d2 < -1e-7 * scale {
            return Err(Error::Precondition(format!(
                "quantile is strictly concave near u = {u:.4} (second difference {d2:.3e})"
            )));
        }
    }
    let t = y.quantile_integral(1.0 - x, 1.0)? / x;
    if !t.is_finite() {
        return Err(Error::Precondition("upper-tail integral diverges".into()));
    }
    let envelope = star(x / r);
    if envelope < t * (1.0 - 1e-9) - 1e-12 {
        return Err(Error::Numerical(format!(
            "envelope condition fails: H*(x/R) = {envelope:.6e} < t = {t:.6e}"
        )));
    }
    // Spot-check the (p,T) deviation regularity of H* near the tail.
    let mut warnings = Vec::new();
    for i in 1..=6 {
        let delta = 0.9f64.powi(i * i);
        for j in 1..=6 {
            let xx = 0.5f64.powi(j);
            let yy = xx / 2.0;
            let lhs = (star(delta * xx) - star(delta * yy)).abs();
            let rhs = t_cap * delta.powf(-1.0 / p) * (star(xx) - star(yy)).abs();
            if lhs > rhs * (1.0 + 1e-9) {
                warnings.push(format!(
                    "deviation regularity fails at (δ={delta:.4}, x={xx:.4}, y={yy:.4}): {lhs:.4e} > {rhs:.4e}"
                ));
            }
        }
    }
    Ok(RatioTailBound {
        threshold: t,
        factor: r,
        x,
        envelope_at_x_over_r: envelope,
        prob_ge: (r * (1.0 - y.cdf(t) + atom_mass_at(y, t))).min(1.0),
        prob_gt: (r * survival(y, t)).min(1.0),
        warnings,
    })
}

fn atom_mass_at(d: &Dist, t: f64) -> f64 {
    match d {
        Dist::Atoms(atoms) => atoms
            .iter()
            .filter(|a| (a.x - t).abs() < 1e-12)
            .map(|a| a.mass)
            .sum(),
        Dist::PointMass { c } => {
            if (c - t).abs() < 1e-12 {
                1.0
            } else {
                0.0
            }
        }
        Dist::Winsorized { atom, mass, .. } => {
            if (atom - t).abs() < 1e-12 {
                *mass
            } else {
                0.0
            }
        }
        _ => 0.0,
    }
}

/// Status of one regularity condition on its grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CondStatus {
    Pass,
    Fail,
    Untestable,
}

/// Worst grid point of a condition: the evaluation point and the margin
/// `rhs − lhs` (negative means violated there).
#[derive(Clone, Debug, Serialize)]
pub struct WorstPoint {
    pub point: Vec<f64>,
    pub margin: f64,
}

/// Grid-based evaluation of the regularity conditions I–VI.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub p: f64,
    pub t_cap: f64,
    pub holds: BTreeMap<String, CondStatus>,
    pub witnesses: BTreeMap<String, Option<WorstPoint>>,
    /// Grid points where a premise of the implication chain passes but
    /// its consequent fails — numerical-resolution incidents, since the
    /// chain I⇔II⇒III⇔IV⇔V⇒VI holds exactly.
    pub incidents: Vec<String>,
}

/// Grid sizes for [`regularity_report`].
#[derive(Clone, Copy, Debug)]
pub struct RegularityGrids {
    /// Points per axis.
    pub n: usize,
    /// Upper end of the `t`-axis for the coarse-Lipschitz condition.
    pub t_max: f64,
}

impl Default for RegularityGrids {
    fn default() -> Self {
        RegularityGrids { n: 24, t_max: 5.0 }
    }
}

/// Evaluate conditions I–VI for the law `Y` with parameters `(p, T)`.
/// Conditions needing a density are marked untestable when none exists;
/// derivatives are taken by central differences.
pub fn regularity_report(y: &Dist, p: f64, t_cap: f64, grids: RegularityGrids) -> Result<RegularityReport> {
    if p <= 1.0 || t_cap < 1.0 {
        return Err(Error::Precondition(format!(
            "need p > 1 and T ≥ 1, got p = {p}, T = {t_cap}"
        )));
    }
    let n = grids.n.max(4);
    let hq = |u: f64| y.quantile(u).unwrap();
    // H' by central differences with a step shrinking near the endpoints.
    let dq = |u: f64| {
        let h = 1e-6 * u.min(1.0 - u).min(0.1);
        (hq(u + h) - hq(u - h)) / (2.0 * h)
    };
    let ddq = |u: f64| {
        let h = 1e-4 * u.min(1.0 - u).min(0.1);
        (hq(u + h) - 2.0 * hq(u) + hq(u - h)) / (h * h)
    };
    let has_density = y.density(hq(0.5)).is_some();

    let mut holds = BTreeMap::new();
    let mut witnesses = BTreeMap::new();
    let mut record = |label: &str, status: CondStatus, worst: Option<WorstPoint>| {
        holds.insert(label.to_string(), status);
        witnesses.insert(label.to_string(), worst);
    };

    // A condition passes when the minimum margin rhs − lhs over the grid
    // stays above a small resolution tolerance.
    let classify = |worst: &Option<WorstPoint>, tol: f64| match worst {
        Some(w) if w.margin < -tol => CondStatus::Fail,
        Some(_) => CondStatus::Pass,
        None => CondStatus::Untestable,
    };

    // I: d/dx [(1−G(x))/G'(x)] ≤ 1/p on the interior of the support.
    let cond1 = if has_density {
        let mut worst: Option<WorstPoint> = None;
        for i in 1..n {
            let u = 0.02 + 0.96 * i as f64 / n as f64;
            let x = hq(u);
            let h = 1e-5 * (1.0 + x.abs());
            let ratio = |x: f64| (1.0 - y.cdf(x)) / y.density(x).unwrap();
            let deriv = (ratio(x + h) - ratio(x - h)) / (2.0 * h);
            let margin = 1.0 / p - deriv;
            if worst.as_ref().map_or(true, |w| margin < w.margin) {
                worst = Some(WorstPoint {
                    point: vec![x],
                    margin,
                });
            }
        }
        worst
    } else {
        None
    };
    record("I", classify(&cond1, 1e-4), cond1);

    // II: H''(t)/H'(t) ≤ (1+1/p)(1−t)^{−1} on (0,1).
    let cond2 = {
        let mut worst: Option<WorstPoint> = None;
        for i in 1..n {
            let t = 0.02 + 0.96 * i as f64 / n as f64;
            let margin = (1.0 + 1.0 / p) / (1.0 - t) - ddq(t) / dq(t);
            if worst.as_ref().map_or(true, |w| margin < w.margin) {
                worst = Some(WorstPoint {
                    point: vec![t],
                    margin,
                });
            }
        }
        worst
    };
    record("II", classify(&cond2, 1e-3), cond2);

    // III: q(t) = ln H'(1−e^{−t}) satisfies
    // q(t+s) ≤ q(t) + (1+1/p)s + ln T for all s, t > 0.
    let cond3 = {
        let q_fn = |t: f64| dq(1.0 - (-t).exp()).ln();
        let mut worst: Option<WorstPoint> = None;
        for i in 1..n {
            let t = grids.t_max * i as f64 / n as f64;
            for j in 1..n {
                let s = grids.t_max * j as f64 / n as f64;
                let margin = q_fn(t) + (1.0 + 1.0 / p) * s + t_cap.ln() - q_fn(t + s);
                if worst.as_ref().map_or(true, |w| margin < w.margin) {
                    worst = Some(WorstPoint {
                        point: vec![t, s],
                        margin,
                    });
                }
            }
        }
        worst
    };
    record("III", classify(&cond3, 1e-4), cond3);

    // IV: H'(1−δ(1−x)) ≤ T δ^{−1−1/p} H'(x) for δ, x in (0,1).
    let cond4 = {
        let mut worst: Option<WorstPoint> = None;
        for i in 1..n {
            let delta = i as f64 / n as f64;
            for j in 1..n {
                let x = j as f64 / n as f64;
                let lhs = dq(1.0 - delta * (1.0 - x));
                let rhs = t_cap * delta.powf(-1.0 - 1.0 / p) * dq(x);
                // Relative margin so laws of different scales compare.
                let margin = (rhs - lhs) / rhs.abs().max(1e-300);
                if worst.as_ref().map_or(true, |w| margin < w.margin) {
                    worst = Some(WorstPoint {
                        point: vec![delta, x],
                        margin,
                    });
                }
            }
        }
        worst
    };
    record("IV", classify(&cond4, 1e-6), cond4);

    // V: G'(t)/(1−G(t))^{1+1/p} ≥ T^{−1} G'(s)/(1−G(s))^{1+1/p}, s < t.
    let cond5 = if has_density {
        let rate = |u: f64| {
            let x = hq(u);
            y.density(x).unwrap() / (1.0 - y.cdf(x)).powf(1.0 + 1.0 / p)
        };
        let mut worst: Option<WorstPoint> = None;
        for i in 1..n {
            let us = 0.02 + 0.96 * i as f64 / n as f64;
            for j in (i + 1)..n {
                let ut = 0.02 + 0.96 * j as f64 / n as f64;
                let lhs = rate(us) / t_cap;
                let rhs = rate(ut);
                let margin = (rhs - lhs) / rhs.abs().max(1e-300);
                if worst.as_ref().map_or(true, |w| margin < w.margin) {
                    worst = Some(WorstPoint {
                        point: vec![hq(us), hq(ut)],
                        margin,
                    });
                }
            }
        }
        worst
    } else {
        None
    };
    record("V", classify(&cond5, 1e-6), cond5);

    // VI: |H*(δx) − H*(δy)| ≤ T δ^{−1/p} |H*(x) − H*(y)|, with the grid
    // pushed log-uniformly toward 0 to stress the right-hand tail.
    let cond6 = {
        let star = |u: f64| hq(1.0 - u);
        let mut worst: Option<WorstPoint> = None;
        for i in 1..n {
            let delta = (-(6.0 * i as f64 / n as f64)).exp();
            for j in 1..n {
                let x = (-(8.0 * j as f64 / n as f64)).exp();
                let yv = x / 3.0;
                let lhs = (star(delta * x) - star(delta * yv)).abs();
                let rhs = t_cap * delta.powf(-1.0 / p) * (star(x) - star(yv)).abs();
                let margin = (rhs - lhs) / rhs.abs().max(1e-300);
                if worst.as_ref().map_or(true, |w| margin < w.margin) {
                    worst = Some(WorstPoint {
                        point: vec![delta, x, yv],
                        margin,
                    });
                }
            }
        }
        worst
    };
    record("VI", classify(&cond6, 1e-6), cond6);

    // Cross-check the implication chain I⇔II⇒III⇔IV⇔V⇒VI.
    let mut incidents = Vec::new();
    let chain = [
        ("I", "II"),
        ("II", "I"),
        ("II", "III"),
        ("III", "IV"),
        ("IV", "III"),
        ("IV", "V"),
        ("V", "IV"),
        ("V", "VI"),
    ];
    for (a, b) in chain {
        if holds[a] == CondStatus::Pass && holds[b] == CondStatus::Fail {
            incidents.push(format!(
                "premise {a} passes but consequent {b} fails on the grid (numerical resolution)"
            ));
        }
    }
    Ok(RegularityReport {
        p,
        t_cap,
        holds,
        witnesses,
        incidents,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn witness_uniform() {
        let w = optimal_linear_witness(&Dist::Uniform, 0.75).unwrap();
        assert!((w.a - 4.0).abs() < 1e-4, "a = {}", w.a);
        assert!((w.minimum - 0.5).abs() < 1e-6, "min = {}", w.minimum);
    }

    #[test]
    fn witness_exponential() {
        let w = optimal_linear_witness(&Dist::Exponential, 2.0).unwrap();
        assert!((w.a - 1.0).abs() < 1e-4, "a = {}", w.a);
        assert!((w.minimum - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn witness_preconditions() {
        // t below the mean
        assert!(matches!(
            optimal_linear_witness(&Dist::Uniform, 0.4),
            Err(Error::Precondition(_))
        ));
        // atomic law
        let atoms = Dist::Atoms(vec![crate::dist::Atom { x: 0.0, mass: 1.0 }]);
        assert!(matches!(
            optimal_linear_witness(&atoms, 0.5),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn witness_is_global_minimum() {
        // Brute force over a dense slope grid: no witness does better
        // than the reported minimum.
        for (law, t) in [(Dist::Uniform, 0.75), (Dist::Exponential, 2.0)] {
            let w = optimal_linear_witness(&law, t).unwrap();
            let mut best = f64::INFINITY;
            for i in 0..200 {
                let a = 10f64.powf(-2.0 + 4.0 * i as f64 / 199.0);
                let phi = ConvexWitness { t, a };
                let v = expect_fn(&law, |x| phi.eval(x)).unwrap();
                best = best.min(v);
            }
            assert!(
                best >= w.minimum - 1e-6,
                "{}: grid min {best} < reported {}",
                law.name(),
                w.minimum
            );
            assert!(best <= w.minimum + 1e-3, "reported minimum not attained");
        }
    }

    #[test]
    fn witness_lower_bounds_random_hinge_mixes() {
        // E φ(Y)/φ(t) ≥ minimum for random non-negative non-decreasing
        // convex φ with φ(t) > 0.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (law, t) = (Dist::Exponential, 2.0);
        let w = optimal_linear_witness(&law, t).unwrap();
        let mut tried = 0;
        while tried < 100 {
            let mut phi = ConvexMix::random_nondecreasing(&mut rng, -2.0, 6.0);
            phi.constant = phi.constant.abs();
            let at_t = phi.eval(t);
            if at_t < 1e-6 {
                continue;
            }
            tried += 1;
            let v = expect_fn(&law, |x| phi.eval(x)).unwrap() / at_t;
            assert!(v >= w.minimum - 1e-9, "ratio {v} below minimum {}", w.minimum);
        }
    }

    #[test]
    fn conditional_bound_examples() {
        match conditional_tail_bound(&Dist::Uniform, 0.5).unwrap() {
            TailCertificate::Bound { threshold, prob } => {
                assert!((threshold - 0.75).abs() < 1e-9);
                assert!((prob - 0.5).abs() < 1e-12);
            }
            _ => panic!("expected a bound"),
        }
        match conditional_tail_bound(&Dist::Exponential, 1.0).unwrap() {
            TailCertificate::Bound { threshold, prob } => {
                assert!((threshold - 2.0).abs() < 1e-8, "threshold = {threshold}");
                assert!((prob - (-1.0f64).exp()).abs() < 1e-12);
            }
            _ => panic!("expected a bound"),
        }
        // s at the essential sup: the almost-sure branch
        match conditional_tail_bound(&Dist::Uniform, 1.0).unwrap() {
            TailCertificate::AlmostSure { bound } => assert_eq!(bound, 1.0),
            _ => panic!("expected the almost-sure branch"),
        }
    }

    #[test]
    fn sharpness_witness_examples() {
        // uniform, s = 0.5: uniform on [0, 0.5) plus an atom 0.5 at 0.75
        let x = sharpness_witness(&Dist::Uniform, 0.5).unwrap();
        match &x {
            Dist::Winsorized { cut, atom, mass, .. } => {
                assert_eq!(*cut, 0.5);
                assert!((atom - 0.75).abs() < 1e-9);
                assert!((mass - 0.5).abs() < 1e-12);
            }
            other => panic!("unexpected law {other:?}"),
        }
        assert!((x.quantile(0.3).unwrap() - 0.3).abs() < 1e-12);
        assert!((x.quantile(0.8).unwrap() - 0.75).abs() < 1e-9);
        // exponential, s = 1: atom e^{−1} at 2
        let x = sharpness_witness(&Dist::Exponential, 1.0).unwrap();
        match &x {
            Dist::Winsorized { atom, mass, .. } => {
                assert!((atom - 2.0).abs() < 1e-8);
                assert!((mass - (-1.0f64).exp()).abs() < 1e-12);
            }
            other => panic!("unexpected law {other:?}"),
        }
        // s below the essential inf: Jensen collapse to the mean
        let x = sharpness_witness(&Dist::Uniform, -3.0).unwrap();
        assert_eq!(x, Dist::PointMass { c: 0.5 });
    }

    #[test]
    fn sharpness_witness_is_majorized() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (law, s) in [(Dist::Uniform, 0.5), (Dist::Exponential, 1.0)] {
            let x = sharpness_witness(&law, s).unwrap();
            // random non-decreasing convex plus genuinely convex mixes
            for k in 0..100 {
                let phi = if k % 2 == 0 {
                    ConvexMix::random_nondecreasing(&mut rng, -2.0, 6.0)
                } else {
                    ConvexMix::random_convex(&mut rng, -2.0, 6.0)
                };
                let ex = expect_fn(&x, |v| phi.eval(v)).unwrap();
                let ey = expect_fn(&law, |v| phi.eval(v)).unwrap();
                assert!(ex <= ey + 1e-9, "{}: Eφ(X) = {ex} > Eφ(Y) = {ey}", law.name());
            }
            // equality of the saturated tail probabilities:
            // P{X ≥ E(Y : Y ≥ s)} = P{Y ≥ s}
            if let Dist::Winsorized { atom, mass, .. } = &x {
                assert!((survival(&x, atom - 1e-9) - mass).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn quantile_envelope_examples() {
        for x in [0.1, 0.5, 0.9] {
            let e = quantile_envelope(&Dist::Uniform, x).unwrap();
            assert!((e.value - (1.0 + x) / 2.0).abs() < 1e-8);
            assert!(!e.divergent);
            let e = quantile_envelope(&Dist::Exponential, x).unwrap();
            assert!((e.value - (1.0 - (1.0 - x).ln())).abs() < 1e-7, "{}", e.value);
            let e = quantile_envelope(&Dist::PointMass { c: 3.0 }, x).unwrap();
            assert!((e.value - 3.0).abs() < 1e-12);
        }
        // non-integrable upper tail → +∞ with the flag set
        let e = quantile_envelope(&Dist::Pareto { q: 1.0 }, 0.5).unwrap();
        assert!(e.divergent && e.value.is_infinite());
    }

    #[test]
    fn envelope_matches_conditional_bound() {
        // At x = F(s) the conditional-bound threshold and the quantile
        // envelope agree for continuous strictly increasing laws.
        for (law, s) in [
            (Dist::Exponential, 1.0),
            (Dist::Exponential, 0.2),
            (Dist::Uniform, 0.5),
            (Dist::Pareto { q: 3.0 }, 2.0),
        ] {
            let x = law.cdf(s);
            let env = quantile_envelope(&law, x).unwrap().value;
            match conditional_tail_bound(&law, s).unwrap() {
                TailCertificate::Bound { threshold, .. } => {
                    assert!(
                        (threshold - env).abs() < 1e-7 * env.abs().max(1.0),
                        "{} at s={s}: {threshold} vs {env}",
                        law.name()
                    );
                }
                _ => panic!("expected a bound"),
            }
        }
    }

    #[test]
    fn omega_envelope_examples() {
        // H ≡ 1, ω ≡ 2 → bound 2
        let b = omega_envelope(|_| 1.0, |_| 2.0, 0.5).unwrap();
        assert!((b.value - 2.0).abs() < 1e-9);
        assert!(b.warnings.is_empty());
        // power pair: hypothesis holds with equality, ∫ δ^{−1/2} = 2
        let p = 2.0;
        let h = move |x: f64| (1.0 - x).powf(-1.0 / p);
        let w = move |d: f64| d.powf(-1.0 / p);
        let b = omega_envelope(h, w, 0.75).unwrap();
        assert!((b.value - 2.0 * 0.25f64.powf(-0.5)).abs() < 1e-7, "{}", b.value);
        assert!(b.warnings.is_empty(), "{:?}", b.warnings);
        // non-integrable ω
        assert!(matches!(
            omega_envelope(|_| 1.0, |d: f64| 1.0 / d, 0.5),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn gaussian_transfer_examples() {
        // constant Q: threshold pT/(p−1), prob γ e^{−t²/2}
        let b = gaussian_transfer(|_| 1.0, 2.0, 1.0, 1.0, 2.0).unwrap();
        assert!((b.threshold - 2.0).abs() < 1e-12);
        assert!((b.prob - (-2.0f64).exp()).abs() < 1e-12);
        assert!(b.warnings.is_empty());
        // Q(t) = e^{t²/(2p)}: the growth condition holds with equality
        let p = 2.0;
        let b = gaussian_transfer(move |t: f64| (t * t / (2.0 * p)).exp(), p, 1.0, 1.0, 1.5).unwrap();
        assert!(b.warnings.is_empty(), "{:?}", b.warnings);
        assert!((b.threshold - 2.0 * (1.5f64 * 1.5 / 4.0).exp()).abs() < 1e-9);
        // Q growing faster than e^{t²/(2p)} violates the condition
        let b = gaussian_transfer(|t: f64| (t * t).exp(), 2.0, 1.0, 1.0, 3.0).unwrap();
        assert!(!b.warnings.is_empty());
    }

    #[test]
    fn transfer_threshold_decreases_to_limit() {
        // with constant Q, pT/(p−1)·Q → T·Q from above as p grows
        let mut prev = f64::INFINITY;
        for p in [2.0, 4.0, 8.0, 16.0] {
            let b = gaussian_transfer(|_| 3.0, p, 1.5, 1.0, 1.0).unwrap();
            assert!(b.threshold < prev);
            assert!(b.threshold > 1.5 * 3.0);
            prev = b.threshold;
        }
        assert!((prev - 1.5 * 3.0) < 0.5);
    }

    #[test]
    fn coarsen_single_cell() {
        // one cell: a single atom at E Y
        let c = coarsen(|x| x * x, 1).unwrap();
        // cells: [e^{−1}, 1) and the remainder (0, e^{−1})
        assert_eq!(c.cells.len(), 2);
        assert!((c.mean() - 1.0 / 3.0).abs() < 1e-10);
        let one = coarsen(|x| x * x, 1).unwrap().to_dist();
        if let Dist::Atoms(atoms) = one {
            assert_eq!(atoms.len(), 2);
        } else {
            panic!();
        }
    }

    #[test]
    fn coarsen_example_cell_means() {
        // For Y(x) = x^{−1}(log(e/x))^{−2}, the integral over
        // [e^{−n²}, e^{−(n−1)²}) is 1/(1+(n−1)²) − 1/(1+n²) exactly.
        let n_cells = 8;
        let c = coarsen(coarsening_example, n_cells).unwrap();
        for n in 1..=n_cells {
            let want = 1.0 / (1.0 + ((n - 1) * (n - 1)) as f64) - 1.0 / (1.0 + (n * n) as f64);
            let got = c.cells[n - 1].mass * c.cells[n - 1].mean;
            assert!(
                (got - want).abs() < 1e-10,
                "cell {n}: integral {got} vs closed form {want}"
            );
        }
        // total mean: ∫_0^1 Y = 1
        assert!((c.mean() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coarsen_ratio_grows() {
        // Evaluating X and Y slightly left of each cell's right endpoint
        // (in x-space): the ratio X/Y grows without bound.
        let c = coarsen(coarsening_example, 8).unwrap();
        let mut prev = 0.0;
        for n in 3..=8 {
            let cell = &c.cells[n - 1];
            let probe = cell.hi * (1.0 - 1e-3);
            let ratio = cell.mean / coarsening_example(probe);
            assert!(ratio > prev, "cell {n}: ratio {ratio} not increasing");
            prev = ratio;
        }
        assert!(prev > 5.0, "final ratio {prev} too small");
    }

    #[test]
    fn coarsen_is_majorized() {
        // Jensen: E φ(X) ≤ E φ(Y) for convex φ, with X the coarsening.
        let c = coarsen(coarsening_example, 6).unwrap();
        let x = c.to_dist();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..50 {
            let mut phi = ConvexMix::random_convex(&mut rng, 0.0, 3.0);
            // E Y² diverges for this Y; keep the test functions of
            // linear growth so both expectations are finite.
            phi.quad_weight = 0.0;
            let ex = expect_fn(&x, |v| phi.eval(v)).unwrap();
            let ey = quad::integrate_quantile(|u| phi.eval(coarsening_example(u)), 0.0, 1.0, 1e-10)
                .unwrap();
            assert!(ex <= ey + 1e-7, "Eφ(X) = {ex} > Eφ(Y) = {ey}");
        }
    }

    #[test]
    fn minimal_r_closed_form() {
        // T = 1, p = 2: (R−1)/2 = R^{1/2} gives R = 3 + 2√2
        let r = minimal_admissible_r(2.0, 1.0).unwrap();
        assert!((r - (3.0 + 2.0 * 2f64.sqrt())).abs() < 1e-6, "r = {r}");
    }

    #[test]
    fn ratio_bound_exponential() {
        let b = ratio_tail_bound(&Dist::Exponential, 0.1, 6.0, 2.0, 1.0).unwrap();
        let want = 1.0 - 0.1f64.ln();
        assert!((b.threshold - want).abs() < 1e-7, "t = {}", b.threshold);
        assert_eq!(b.factor, 6.0);
        assert!(b.envelope_at_x_over_r >= b.threshold);
        assert!(b.warnings.is_empty(), "{:?}", b.warnings);
        // the certificate: R·P{Y ≥ t}
        assert!((b.prob_ge - 6.0 * (-want).exp()).abs() < 1e-9);
    }

    #[test]
    fn ratio_bound_constraint() {
        // R = 2 is inadmissible at (p, T) = (2, 1); error names the
        // minimal admissible R.
        match ratio_tail_bound(&Dist::Exponential, 0.1, 2.0, 2.0, 1.0) {
            Err(Error::Precondition(msg)) => assert!(msg.contains("5.8284"), "{msg}"),
            other => panic!("expected precondition error, got {other:?}"),
        }
    }

    #[test]
    fn ratio_bound_convexity() {
        // uniform: H*(x) = 1 − x has vanishing second differences —
        // boundary case accepted
        assert!(ratio_tail_bound(&Dist::Uniform, 0.1, 6.0, 2.0, 1.0).is_ok());
        // two-sided law with strictly concave quantile stretch: refused
        let res = ratio_tail_bound(&Dist::Weibull2 { q: 1.0 }, 0.9, 6.0, 2.0, 1.0);
        assert!(matches!(res, Err(Error::Precondition(_))), "{res:?}");
    }

    #[test]
    fn ratio_bound_empirical() {
        // Monte Carlo check of P{X > t} ≤ R·P{Y ≥ t} with X the
        // sharpness witness of the exponential law.
        let y = Dist::Exponential;
        let b = ratio_tail_bound(&y, 0.1, 6.0, 2.0, 1.0).unwrap();
        let x = sharpness_witness(&y, b.threshold - 0.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 200_000;
        let hits = (0..n).filter(|_| x.sample(&mut rng) > b.threshold).count();
        let p_emp = hits as f64 / n as f64;
        let se = (p_emp * (1.0 - p_emp) / n as f64).sqrt();
        assert!(
            p_emp <= b.prob_ge + 3.0 * se,
            "empirical {p_emp} exceeds certificate {}",
            b.prob_ge
        );
    }

    #[test]
    fn regularity_exponential() {
        // exponential: V holds with T = 1 for every p, and the whole
        // chain is consistent
        for p in [1.5, 3.0, 10.0] {
            let r = regularity_report(&Dist::Exponential, p, 1.0, RegularityGrids::default()).unwrap();
            assert_eq!(r.holds["V"], CondStatus::Pass, "p = {p}: {:?}", r.witnesses["V"]);
            assert_eq!(r.holds["II"], CondStatus::Pass);
            assert_eq!(r.holds["VI"], CondStatus::Pass);
            assert!(r.incidents.is_empty(), "{:?}", r.incidents);
        }
    }

    #[test]
    fn regularity_uniform() {
        let r = regularity_report(&Dist::Uniform, 2.0, 1.0, RegularityGrids::default()).unwrap();
        assert_eq!(r.holds["V"], CondStatus::Pass, "{:?}", r.witnesses["V"]);
        assert!(r.incidents.is_empty(), "{:?}", r.incidents);
    }

    #[test]
    fn regularity_normal_is_consistent() {
        // no claimed outcome for the normal law; the implication chain
        // must still be consistent on the grid
        for p in [2.0, 50.0] {
            let r = regularity_report(&Dist::Normal, p, 1.0, RegularityGrids::default()).unwrap();
            assert!(r.incidents.is_empty(), "p = {p}: {:?}", r.incidents);
            for label in ["I", "II", "III", "IV", "V", "VI"] {
                assert_ne!(r.holds[label], CondStatus::Untestable, "{label}");
            }
        }
    }

    #[test]
    fn regularity_untestable_without_density() {
        let c = coarsen(coarsening_example, 3).unwrap().to_dist();
        let r = regularity_report(&c, 2.0, 1.0, RegularityGrids::default()).unwrap();
        assert_eq!(r.holds["I"], CondStatus::Untestable);
        assert_eq!(r.holds["V"], CondStatus::Untestable);
    }
}
