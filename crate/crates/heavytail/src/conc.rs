//! Concentration bounds for functions of independent heavy-tailed
//! coordinates.
//!
//! The route: write `X = T(Z)` with `T` the coordinatewise quantile
//! transport of a standard Gaussian vector, bound `|∇(f∘T)(Z)|` through
//! the marginals' local Lipschitz constants, and feed the result into
//! the Gaussian convexity inequality
//! `E φ(ψ(Z*)−ψ(Z)) ≤ E φ((π/2)|∇ψ(Z)|Z′)`. This module houses the
//! numeric checker for that inequality, the transport-gradient
//! evaluator, the linear Weibull deviation bound and both nonlinear
//! theorem forms (Weibull and power tails), plus the published
//! comparison curves they are benchmarked against.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::dist::{self, LipMode, TransportMap};
use crate::error::{Error, Result};
use crate::harness::Registry;
use crate::lornorm::{self, LorentzParams, PrimalMode};

type DynF = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type DynGrad = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A function of n real variables with its gradient (exact when known,
/// central finite differences otherwise).
#[derive(Clone)]
pub struct FunctionOracle {
    pub name: String,
    f: DynF,
    grad: Option<DynGrad>,
    pub linear_coeffs: Option<Vec<f64>>,
}

impl FunctionOracle {
    pub fn linear(a: Vec<f64>) -> Self {
        let coeffs = a.clone();
        let gc = a.clone();
        FunctionOracle {
            name: "linear".into(),
            f: Arc::new(move |x| x.iter().zip(&a).map(|(u, v)| u * v).sum()),
            grad: Some(Arc::new(move |_| gc.clone())),
            linear_coeffs: Some(coeffs),
        }
    }

    pub fn l2norm() -> Self {
        FunctionOracle {
            name: "l2norm".into(),
            f: Arc::new(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()),
            grad: Some(Arc::new(|x| {
                let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if n == 0.0 {
                    vec![0.0; x.len()]
                } else {
                    x.iter().map(|v| v / n).collect()
                }
            })),
            linear_coeffs: None,
        }
    }

    /// Smooth proxy of `max_i x_i`: `β^{−1} log Σ e^{βx_i}`.
    pub fn softmax(beta: f64) -> Self {
        let b2 = beta;
        FunctionOracle {
            name: format!("softmax(beta={beta})"),
            f: Arc::new(move |x| {
                let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                m + (x.iter().map(|v| ((v - m) * beta).exp()).sum::<f64>()).ln() / beta
            }),
            grad: Some(Arc::new(move |x| {
                let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let w: Vec<f64> = x.iter().map(|v| ((v - m) * b2).exp()).collect();
                let s: f64 = w.iter().sum();
                w.iter().map(|v| v / s).collect()
            })),
            linear_coeffs: None,
        }
    }

    pub fn custom(name: &str, f: DynF, grad: Option<DynGrad>) -> Self {
        FunctionOracle {
            name: name.into(),
            f,
            grad,
            linear_coeffs: None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    pub fn has_exact_grad(&self) -> bool {
        self.grad.is_some()
    }

    /// Exact gradient when available, otherwise central differences
    /// with step `1e−5·(1+|x|_∞)`.
    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        if let Some(g) = &self.grad {
            return g(x);
        }
        let h = 1e-5 * (1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let mut out = Vec::with_capacity(x.len());
        let mut probe = x.to_vec();
        for i in 0..x.len() {
            probe[i] = x[i] + h;
            let up = (self.f)(&probe);
            probe[i] = x[i] - h;
            let dn = (self.f)(&probe);
            probe[i] = x[i];
            out.push((up - dn) / (2.0 * h));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LipEntry {
    /// `sup_x |∇f(x)|_s`
    pub lip: f64,
    /// `(Σ_i sup_x |∂f/∂x_i|^s)^{1/s}` — always at least `lip`
    pub lip_sharp: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LipMethod {
    ExactLinear,
    SampledSup,
}

/// Lipschitz quantities per exponent s (`f64::INFINITY` keys the
/// max-norm entry).
#[derive(Clone, Debug, Serialize)]
pub struct LipProfile {
    pub entries: Vec<(f64, LipEntry)>,
    pub method: LipMethod,
}

impl LipProfile {
    pub fn get(&self, s: f64) -> Option<LipEntry> {
        self.entries
            .iter()
            .find(|(e, _)| (e.is_infinite() && s.is_infinite()) || (*e - s).abs() < 1e-12)
            .map(|(_, v)| *v)
    }
}

fn vec_norm_s(v: &[f64], s: f64) -> f64 {
    if s.is_infinite() {
        v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    } else {
        v.iter().map(|x| x.abs().powf(s)).sum::<f64>().powf(1.0 / s)
    }
}

/// Estimate `Lip_s` and `Lip_s^♯` for the requested exponents.
///
/// Linear functions are exact. Otherwise the sup is sampled over
/// Gaussian probes at several scales plus local refinement around the
/// best point, and is therefore a lower bound on the true supremum.
pub fn lip_profile(
    oracle: &FunctionOracle,
    s_list: &[f64],
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<LipProfile> {
    if s_list.iter().any(|&s| s < 1.0) {
        return Err(Error::Domain("Lipschitz exponents need s ≥ 1".into()));
    }
    if let Some(a) = &oracle.linear_coeffs {
        let entries = s_list
            .iter()
            .map(|&s| {
                let v = vec_norm_s(a, s);
                (s, LipEntry { lip: v, lip_sharp: v })
            })
            .collect();
        return Ok(LipProfile {
            entries,
            method: LipMethod::ExactLinear,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scales = [0.3, 1.0, 3.0, 10.0];
    let mut coord_sup = vec![0.0f64; n];
    let mut sup_s = vec![0.0f64; s_list.len()];
    let mut best: (f64, Vec<f64>) = (f64::NEG_INFINITY, vec![0.0; n]);
    let probe = |x: &[f64],
                     rng_grad: &FunctionOracle,
                     coord_sup: &mut [f64],
                     sup_s: &mut [f64],
                     best: &mut (f64, Vec<f64>)| {
        let g = rng_grad.gradient(x);
        for (c, gi) in coord_sup.iter_mut().zip(&g) {
            *c = c.max(gi.abs());
        }
        let l2 = vec_norm_s(&g, 2.0);
        if l2 > best.0 {
            *best = (l2, x.to_vec());
        }
        for (acc, &s) in sup_s.iter_mut().zip(s_list) {
            *acc = acc.max(vec_norm_s(&g, s));
        }
    };
    // axis-aligned probes catch per-coordinate sups that random
    // directions miss (e.g. |x|₂ needs one coordinate to dominate)
    for &scale in &scales {
        for i in 0..n {
            for sign in [scale, -scale] {
                let mut x = vec![0.0; n];
                x[i] = sign;
                probe(&x, oracle, &mut coord_sup, &mut sup_s, &mut best);
            }
        }
    }
    for i in 0..samples {
        let scale = scales[i % scales.len()];
        let x: Vec<f64> = (0..n)
            .map(|_| scale * rng.sample::<f64, _>(StandardNormal))
            .collect();
        probe(&x, oracle, &mut coord_sup, &mut sup_s, &mut best);
    }
    // local refinement around the strongest gradient seen
    let center = best.1.clone();
    let width = 0.1 * (1.0 + vec_norm_s(&center, f64::INFINITY));
    for _ in 0..1_000 {
        let x: Vec<f64> = center
            .iter()
            .map(|&c| c + width * rng.sample::<f64, _>(StandardNormal))
            .collect();
        probe(&x, oracle, &mut coord_sup, &mut sup_s, &mut best);
    }
    let entries = s_list
        .iter()
        .zip(&sup_s)
        .map(|(&s, &lip)| {
            let sharp = vec_norm_s(&coord_sup, s);
            (
                s,
                LipEntry {
                    lip: lip.min(sharp),
                    lip_sharp: sharp,
                },
            )
        })
        .collect();
    Ok(LipProfile {
        entries,
        method: LipMethod::SampledSup,
    })
}

/// Monte Carlo check of the Gaussian convexity inequality.
#[derive(Clone, Debug, Serialize)]
pub struct PisierCheck {
    pub lhs: f64,
    pub lhs_se: f64,
    pub rhs: f64,
    pub rhs_se: f64,
    /// trials dropped because either side was non-finite
    pub excluded: usize,
    pub trials: usize,
    pub ok: bool,
    pub warnings: Vec<String>,
}

pub fn pisier_check(
    psi: &FunctionOracle,
    phi: &(dyn Fn(f64) -> f64 + Sync),
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<PisierCheck> {
    if n == 0 || trials < 100 {
        return Err(Error::Domain(format!(
            "need n ≥ 1 and ≥ 100 trials, got n = {n}, trials = {trials}"
        )));
    }
    // convexity spot check: midpoint inequality on random pairs
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    for _ in 0..200 {
        let u = rng.random_range(-8.0..8.0);
        let v = rng.random_range(-8.0..8.0);
        let mid = phi(0.5 * (u + v));
        let avg = 0.5 * (phi(u) + phi(v));
        let scale = 1.0 + mid.abs() + avg.abs();
        if mid > avg + 1e-9 * scale {
            return Err(Error::Precondition(format!(
                "phi fails the midpoint convexity test at ({u}, {v})"
            )));
        }
    }
    let mut warnings = Vec::new();
    if !psi.has_exact_grad() {
        warnings.push("gradient by finite differences; smoothness not verified".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut lsum = 0.0;
    let mut lsq = 0.0;
    let mut rsum = 0.0;
    let mut rsq = 0.0;
    let mut kept = 0usize;
    let mut excluded = 0usize;
    let half_pi = std::f64::consts::FRAC_PI_2;
    for _ in 0..trials {
        let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let zstar: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let zprime: f64 = rng.sample(StandardNormal);
        let l = phi(psi.eval(&zstar) - psi.eval(&z));
        let g = vec_norm_s(&psi.gradient(&z), 2.0);
        let r = phi(half_pi * g * zprime);
        if l.is_finite() && r.is_finite() {
            lsum += l;
            lsq += l * l;
            rsum += r;
            rsq += r * r;
            kept += 1;
        } else {
            excluded += 1;
        }
    }
    if kept < 2 {
        return Err(Error::Numerical("all Pisier-check samples non-finite".into()));
    }
    let kf = kept as f64;
    let lhs = lsum / kf;
    let rhs = rsum / kf;
    let lhs_se = ((lsq / kf - lhs * lhs).max(0.0) / kf).sqrt();
    let rhs_se = ((rsq / kf - rhs * rhs).max(0.0) / kf).sqrt();
    Ok(PisierCheck {
        lhs,
        lhs_se,
        rhs,
        rhs_se,
        excluded,
        trials,
        ok: lhs <= rhs + 3.0 * (lhs_se + rhs_se),
        warnings,
    })
}

/// `|∇(f∘T)(z)| = (Σ f_i(Tz)²·Lip(F_i^{−1}∘Φ, z_i)²)^{1/2}`.
#[derive(Clone, Debug, Serialize)]
pub struct TransportGradient {
    pub value: f64,
    /// coordinates where an infinite local Lipschitz constant was hit
    pub flagged: Vec<usize>,
}

pub fn transport_gradient(
    f: &FunctionOracle,
    map: &TransportMap,
    z: &[f64],
) -> Result<TransportGradient> {
    let x = map.apply(z)?;
    let g = f.gradient(&x);
    let mut sum = 0.0f64;
    let mut flagged = Vec::new();
    for (i, (&gi, law)) in g.iter().zip(&map.marginals).enumerate() {
        if gi == 0.0 {
            continue;
        }
        let lip = dist::local_lip_quantile(law, z[i], LipMode::GaussComposed)?;
        if lip.is_infinite() {
            flagged.push(i);
            sum = f64::INFINITY;
        } else if sum.is_finite() {
            sum += gi * gi * lip * lip;
        }
    }
    Ok(TransportGradient {
        value: sum.sqrt(),
        flagged,
    })
}

/// `2exp(−c_q·min{(t/|a|₂)², (t/|a|_∞)^q})` for a weighted sum of
/// centered coordinates with `exp(−t^q)`-type tails.
pub fn linear_weibull_bound(a: &[f64], t: f64, q: f64, reg: &Registry) -> Result<f64> {
    if a.iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("weight vector must be non-zero".into()));
    }
    if !(t > 0.0) || !(0.0 < q && q <= 1.0) {
        return Err(Error::Domain(format!("need t > 0 and q in (0,1], got t = {t}, q = {q}")));
    }
    let c = reg.get("c_q_weibull")?;
    let l2 = vec_norm_s(a, 2.0);
    let linf = vec_norm_s(a, f64::INFINITY);
    Ok(2.0 * (-c * ((t / l2).powi(2)).min((t / linf).powf(q))).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WeibullForm {
    /// linear-sharp form through `Lip₂^♯`, `Lip_∞^♯`
    Sharp,
    /// robust form through `Lip₂`, `Lip_∞` with the log-n factor
    Robust,
}

/// A deviation threshold with its failure probability:
/// `P{|f(X) − M f(X)| > threshold} ≤ prob`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundPoint {
    pub threshold: f64,
    pub prob: f64,
}

pub fn weibull_theorem_bound(
    lip: &LipProfile,
    t: f64,
    q: f64,
    n: usize,
    form: WeibullForm,
    reg: &Registry,
) -> Result<BoundPoint> {
    if !(t > 0.0) || !(0.0 < q && q < 1.0) {
        return Err(Error::Domain(format!("need t > 0 and q in (0,1), got t = {t}, q = {q}")));
    }
    let two = lip
        .get(2.0)
        .ok_or_else(|| Error::Precondition("profile is missing s = 2".into()))?;
    let inf = lip
        .get(f64::INFINITY)
        .ok_or_else(|| Error::Precondition("profile is missing s = ∞".into()))?;
    match form {
        WeibullForm::Sharp => {
            let c = reg.get("c_q_weibull")?;
            let prob =
                2.0 * (-c * ((t / two.lip_sharp).powi(2)).min((t / inf.lip_sharp).powf(q))).exp();
            Ok(BoundPoint { threshold: t, prob })
        }
        WeibullForm::Robust => {
            let cq = reg.get("C_q_weibull")?;
            let logf = (std::f64::consts::E + n as f64 * t.powf(2.0 - 4.0 / q))
                .ln()
                .powf(1.0 / q - 0.5);
            let threshold = cq * logf * (t * two.lip + t.powf(2.0 / q) * inf.lip);
            Ok(BoundPoint {
                threshold,
                prob: 2.0 * (-t * t / 2.0).exp(),
            })
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum PowerForm<'a> {
    /// interpolation-norm form: needs the vector `(sup_x |∂f/∂x_i|)_i`
    Lorentz { f_sharp: &'a [f64] },
    /// `Lip_p` form for `2q/(q−2) < p < ∞`
    LipschitzP { lip_p: f64, p: f64 },
}

pub fn power_theorem_bound(
    form: PowerForm,
    t: f64,
    q: f64,
    n: usize,
    reg: &Registry,
) -> Result<BoundPoint> {
    if !(t > 0.0) || !(q > 2.0) {
        return Err(Error::Domain(format!("need t > 0 and q > 2, got t = {t}, q = {q}")));
    }
    let prob = reg.get("C_power_prob")? * (-t * t / 2.0).exp();
    match form {
        PowerForm::Lorentz { f_sharp } => {
            if f_sharp.len() != n {
                return Err(Error::Domain(format!(
                    "coordinate-sup vector has length {} but n = {n}",
                    f_sharp.len()
                )));
            }
            let r = (reg.get("C_poly_r")? * t * t * (t * t / q).exp()).max(1.0);
            let sq: Vec<f64> = f_sharp.iter().map(|v| v * v).collect();
            let params = LorentzParams::new(r, q / 2.0, n)?;
            // the surrogate over-estimates the norm (factor ≤ 16), which
            // only makes the threshold more conservative
            let mode = if n <= 12 {
                PrimalMode::ExactSmallN
            } else {
                PrimalMode::Approx
            };
            let norm = lornorm::primal_norm(&sq, &params, mode)?.value;
            Ok(BoundPoint {
                threshold: reg.get("C_poly")? * t * norm.sqrt(),
                prob,
            })
        }
        PowerForm::LipschitzP { lip_p, p } => {
            if !(p > 2.0 * q / (q - 2.0)) || !p.is_finite() {
                return Err(Error::Precondition(format!(
                    "need 2q/(q−2) < p < ∞, got p = {p} at q = {q}"
                )));
            }
            let nf = n as f64;
            let threshold = reg.get("C_pq_poly")?
                * lip_p
                * (nf.powf(0.5 - 1.0 / p) * t + nf.powf(1.0 / q) * t * t * (t * t / (2.0 * q)).exp());
            Ok(BoundPoint { threshold, prob })
        }
    }
}

/// A comparison threshold with an optional boundary note.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonPoint {
    pub threshold: f64,
    pub prob: f64,
    pub note: Option<String>,
}

/// Weak-Poincaré comparison curve for Weibull-type product laws:
/// threshold `C_q(t²(log n)^{−1+1/q} + t^{2/q})·Lip₂` at probability
/// `2e^{−t²/2}`. Degenerate at n = 1, where the log-n term is dropped.
pub fn bacatro_weibull(t: f64, q: f64, n: usize, lip2: f64, reg: &Registry) -> Result<ComparisonPoint> {
    if !(t > 0.0) || !(0.0 < q && q < 1.0) || n == 0 {
        return Err(Error::Domain(format!(
            "need t > 0, q in (0,1), n ≥ 1, got t = {t}, q = {q}, n = {n}"
        )));
    }
    let cq = reg.get("C_bacatro")?;
    let (poly, note) = if n == 1 {
        (
            0.0,
            Some("n = 1: the (log n)^{-1+1/q} factor degenerates; only the t^{2/q} term is kept".to_string()),
        )
    } else {
        ((n as f64).ln().powf(-1.0 + 1.0 / q) * t * t, None)
    };
    Ok(ComparisonPoint {
        threshold: cq * (poly + t.powf(2.0 / q)) * lip2,
        prob: 2.0 * (-t * t / 2.0).exp(),
        note,
    })
}

/// Power-law comparison curve: deviation probability `C(α)(log t/t)^α`
/// at threshold `t·n^{1/α}`, valid for `t ≥ t₀(α)`.
pub fn bacatro_power(alpha: f64, t: f64, n: usize, reg: &Registry) -> Result<ComparisonPoint> {
    if !(alpha > 0.0) {
        return Err(Error::Domain(format!("need α > 0, got {alpha}")));
    }
    let t0 = reg.get("t0_alpha")?;
    if t < t0 {
        return Err(Error::Precondition(format!(
            "comparison curve needs t ≥ t₀ = {t0}, got {t}"
        )));
    }
    Ok(ComparisonPoint {
        threshold: t * (n as f64).powf(1.0 / alpha),
        prob: reg.get("C_alpha_scale")? * (t.ln() / t).powf(alpha),
        note: None,
    })
}

/// Non-uniform Berry–Esseen error at point x for a normalized i.i.d.
/// sum: `C_r(1+|x|)^{−r}(n^{−1/2}E|X₁|³ + n^{−(r−2)/2}E|X₁|^r)`.
pub fn berry_esseen(r: f64, n: usize, x: f64, m3: f64, mr: f64, reg: &Registry) -> Result<f64> {
    if r < 3.0 {
        return Err(Error::Domain(format!("need r ≥ 3, got {r}")));
    }
    if n == 0 {
        return Err(Error::Domain("need n ≥ 1".into()));
    }
    let nf = n as f64;
    Ok(reg.get("C_berry_esseen")?
        * (1.0 + x.abs()).powf(-r)
        * (nf.powf(-0.5) * m3 + nf.powf(-(r - 2.0) / 2.0) * mr))
}

/// A bound evaluated on a t-grid, with the constants that produced it.
#[derive(Clone, Debug, Serialize)]
pub struct BoundCurve {
    pub formula_id: String,
    pub t_grid: Vec<f64>,
    pub thresholds: Vec<f64>,
    pub probs: Vec<f64>,
    pub constants_used: BTreeMap<String, f64>,
}

impl BoundCurve {
    /// Evaluate `point_fn` over the grid, checking that probabilities
    /// are non-increasing in t. (Thresholds need not be monotone: the
    /// robust Weibull form's log factor decreases in t and can beat the
    /// polynomial part near zero.)
    pub fn from_fn(
        formula_id: &str,
        t_grid: &[f64],
        constants_used: BTreeMap<String, f64>,
        mut point_fn: impl FnMut(f64) -> Result<BoundPoint>,
    ) -> Result<BoundCurve> {
        let mut thresholds = Vec::with_capacity(t_grid.len());
        let mut probs = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            let p = point_fn(t)?;
            if p.threshold < 0.0 || p.prob < 0.0 {
                return Err(Error::Numerical(format!(
                    "negative bound at t = {t}: {p:?}"
                )));
            }
            if let Some(&last_pr) = probs.last() {
                if p.prob > last_pr + 1e-12 {
                    return Err(Error::Numerical(format!(
                        "bound probabilities not monotone at t = {t}"
                    )));
                }
            }
            thresholds.push(p.threshold);
            probs.push(p.prob);
        }
        Ok(BoundCurve {
            formula_id: formula_id.into(),
            t_grid: t_grid.to_vec(),
            thresholds,
            probs,
            constants_used,
        })
    }
}
