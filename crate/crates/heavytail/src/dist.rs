//! Scalar laws, quantile functions, local Lipschitz constants of the
//! quantile map, and the coordinatewise Gaussian transport map.
//!
//! Every law is exposed through its CDF, its generalized inverse
//! (non-decreasing and left-continuous on (0,1)), an optional density,
//! and an inverse-transform sampler. All types are immutable after
//! construction; samplers take an explicit RNG so parallel Monte Carlo
//! can use independent seed-derived streams.

use rand::Rng;
use rand_distr::Open01;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::num::gauss::{phi_cdf, phi_inv, phi_pdf};
use crate::num::quad;
use crate::num::roots;

/// An atom of a discrete law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
}

/// A scalar probability law.
///
/// The built-in catalogue covers the laws the bound formulas are stated
/// for: the standard normal, uniform(0,1), exponential(1), a two-sided
/// Weibull-type law with survival `exp(-t^q)` for `|X|`, the Pareto-type
/// law with survival `min{1, x^-q}` on `[1, ∞)`, and the symmetrized
/// Pareto law with density proportional to `(1+|x|)^{-1-α}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Dist {
    Normal,
    Uniform,
    Exponential,
    /// Symmetric law with `P{|X| > t} = exp(-t^q)`, `0 < q <= 1`.
    Weibull2 { q: f64 },
    /// Survival `min{1, x^-q}` on `[1, ∞)`; quantile `(1-s)^{-1/q}`.
    Pareto { q: f64 },
    /// Density `(α/2)(1+|x|)^{-1-α}`.
    SymPareto { alpha: f64 },
    PointMass { c: f64 },
    /// Finite discrete law; atoms sorted by position, masses summing to 1.
    Atoms(Vec<Atom>),
    /// `base` censored above `cut`: values `>= cut` are replaced by the
    /// single atom `atom` carrying `mass = P{base >= cut}`.
    Winsorized {
        base: Box<Dist>,
        cut: f64,
        atom: f64,
        mass: f64,
    },
    /// The law with quantile `((1-t)/2)^{-2/q} ln(2/(1-t))` used by the
    /// Poisson-process norm estimator.
    PoissonU { q: f64 },
}

impl Dist {
    /// Parse a CLI distribution specification string, e.g. `"normal"`,
    /// `"pareto:q=3"`, `"weibull2:q=0.5"`, `"sympareto:alpha=3"`.
    pub fn parse(spec: &str) -> Result<Dist> {
        let (name, args) = match spec.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (spec, None),
        };
        let param = |key: &str| -> Result<f64> {
            let args = args.ok_or_else(|| {
                Error::Config(format!("law '{name}' requires parameter {key}"))
            })?;
            for kv in args.split(',') {
                if let Some((k, v)) = kv.split_once('=') {
                    if k == key {
                        return v.parse::<f64>().map_err(|e| {
                            Error::Config(format!("bad value for {key} in '{spec}': {e}"))
                        });
                    }
                }
            }
            Err(Error::Config(format!("law '{name}' requires parameter {key}")))
        };
        match name {
            "normal" => Ok(Dist::Normal),
            "uniform" => Ok(Dist::Uniform),
            "exponential" | "exp" => Ok(Dist::Exponential),
            "weibull2" => {
                let q = param("q")?;
                if !(0.0 < q && q <= 1.0) {
                    return Err(Error::Config(format!("weibull2 needs 0 < q <= 1, got {q}")));
                }
                Ok(Dist::Weibull2 { q })
            }
            "pareto" => {
                let q = param("q")?;
                if q <= 0.0 {
                    return Err(Error::Config(format!("pareto needs q > 0, got {q}")));
                }
                Ok(Dist::Pareto { q })
            }
            "sympareto" => {
                let alpha = param("alpha")?;
                if alpha <= 0.0 {
                    return Err(Error::Config(format!("sympareto needs alpha > 0, got {alpha}")));
                }
                Ok(Dist::SymPareto { alpha })
            }
            "pointmass" => Ok(Dist::PointMass { c: param("c")? }),
            _ => Err(Error::Config(format!("unknown law '{spec}'"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Dist::Normal => "normal".into(),
            Dist::Uniform => "uniform".into(),
            Dist::Exponential => "exponential".into(),
            Dist::Weibull2 { q } => format!("weibull2:q={q}"),
            Dist::Pareto { q } => format!("pareto:q={q}"),
            Dist::SymPareto { alpha } => format!("sympareto:alpha={alpha}"),
            Dist::PointMass { c } => format!("pointmass:c={c}"),
            Dist::Atoms(a) => format!("atoms[{}]", a.len()),
            Dist::Winsorized { base, cut, .. } => format!("winsorized({}, cut={cut})", base.name()),
            Dist::PoissonU { q } => format!("poisson-u:q={q}"),
        }
    }

    /// F(t) = P{X <= t}.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Dist::Normal => phi_cdf(t),
            Dist::Uniform => t.clamp(0.0, 1.0),
            Dist::Exponential => {
                if t <= 0.0 {
                    0.0
                } else {
                    1.0 - (-t).exp()
                }
            }
            Dist::Weibull2 { q } => {
                if t >= 0.0 {
                    1.0 - 0.5 * (-t.powf(*q)).exp()
                } else {
                    0.5 * (-(-t).powf(*q)).exp()
                }
            }
            Dist::Pareto { q } => {
                if t < 1.0 {
                    0.0
                } else {
                    1.0 - t.powf(-q)
                }
            }
            Dist::SymPareto { alpha } => {
                if t >= 0.0 {
                    1.0 - 0.5 * (1.0 + t).powf(-alpha)
                } else {
                    0.5 * (1.0 - t).powf(-alpha)
                }
            }
            Dist::PointMass { c } => {
                if t >= *c {
                    1.0
                } else {
                    0.0
                }
            }
            Dist::Atoms(atoms) => {
                let mut acc = 0.0;
                for a in atoms {
                    if a.x <= t {
                        acc += a.mass;
                    } else {
                        break;
                    }
                }
                acc.min(1.0)
            }
            Dist::Winsorized { base, atom, mass, .. } => {
                if t >= *atom {
                    1.0
                } else {
                    base.cdf(t).min(1.0 - mass)
                }
            }
            Dist::PoissonU { .. } => {
                // Numerically invert the (strictly increasing) quantile.
                let min = self.quantile(1e-15).unwrap();
                if t <= min {
                    return 0.0;
                }
                let f = |s: f64| self.quantile(s).unwrap() - t;
                if f(1.0 - 1e-15) <= 0.0 {
                    return 1.0;
                }
                roots::bisect(f, 1e-15, 1.0 - 1e-15, 1e-14, 200).unwrap_or(1.0)
            }
        }
    }

    /// The quantile function `F^{-1}(s) = inf{t : F(t) >= s}` on (0,1).
    pub fn quantile(&self, s: f64) -> Result<f64> {
        if !(0.0 < s && s < 1.0) {
            return Err(Error::Domain(format!("quantile needs s in (0,1), got {s}")));
        }
        Ok(match self {
            Dist::Normal => phi_inv(s),
            Dist::Uniform => s,
            Dist::Exponential => -(1.0 - s).ln(),
            Dist::Weibull2 { q } => {
                if s >= 0.5 {
                    (-(2.0 * (1.0 - s)).ln()).max(0.0).powf(1.0 / q)
                } else {
                    -(-(2.0 * s).ln()).max(0.0).powf(1.0 / q)
                }
            }
            Dist::Pareto { q } => (1.0 - s).powf(-1.0 / q),
            Dist::SymPareto { alpha } => {
                if s >= 0.5 {
                    (2.0 * (1.0 - s)).powf(-1.0 / alpha) - 1.0
                } else {
                    1.0 - (2.0 * s).powf(-1.0 / alpha)
                }
            }
            Dist::PointMass { c } => *c,
            Dist::Atoms(atoms) => {
                let mut acc = 0.0;
                for a in atoms {
                    acc += a.mass;
                    // Left continuity: at a cumulative boundary the
                    // generalized inverse takes the lower atom.
                    if acc >= s - 1e-15 {
                        return Ok(a.x);
                    }
                }
                atoms.last().map(|a| a.x).unwrap_or(f64::NAN)
            }
            Dist::Winsorized { base, atom, mass, .. } => {
                if s <= 1.0 - mass {
                    base.quantile(s)?
                } else {
                    *atom
                }
            }
            Dist::PoissonU { q } => {
                let h = (1.0 - s) / 2.0;
                h.powf(-2.0 / q) * (1.0 / h).ln()
            }
        })
    }

    /// `H*(x) = quantile(1 - x)`, the non-increasing tail quantile.
    pub fn quantile_star(&self, x: f64) -> Result<f64> {
        self.quantile(1.0 - x)
    }

    /// Density where one exists in closed form; `None` otherwise
    /// (operations requiring a density must then fail loudly).
    pub fn density(&self, t: f64) -> Option<f64> {
        match self {
            Dist::Normal => Some(phi_pdf(t)),
            Dist::Uniform => Some(if (0.0..=1.0).contains(&t) { 1.0 } else { 0.0 }),
            Dist::Exponential => Some(if t >= 0.0 { (-t).exp() } else { 0.0 }),
            Dist::Weibull2 { q } => {
                if t == 0.0 {
                    // |t|^{q-1} blows up at 0 for q < 1.
                    Some(if *q < 1.0 { f64::INFINITY } else { 0.5 })
                } else {
                    let a = t.abs();
                    Some(0.5 * q * a.powf(q - 1.0) * (-a.powf(*q)).exp())
                }
            }
            Dist::Pareto { q } => Some(if t < 1.0 { 0.0 } else { q * t.powf(-q - 1.0) }),
            Dist::SymPareto { alpha } => Some(0.5 * alpha * (1.0 + t.abs()).powf(-1.0 - alpha)),
            Dist::PointMass { .. } | Dist::Atoms(_) | Dist::Winsorized { .. } | Dist::PoissonU { .. } => None,
        }
    }

    /// Inverse-transform sampler; distributionally equal to `quantile(U)`.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.quantile(u).expect("Open01 yields u in (0,1)")
    }

    /// ∫_a^b H(u) du via adaptive quadrature on the quantile
    /// representation; `+∞` when divergent.
    pub fn quantile_integral(&self, a: f64, b: f64) -> Result<f64> {
        match self {
            // Closed forms where they are trivial and exact.
            Dist::Uniform => Ok(0.5 * (b * b - a * a)),
            Dist::PointMass { c } => Ok(c * (b - a)),
            _ => quad::integrate_quantile(|u| self.quantile(u).unwrap(), a, b, 1e-10),
        }
    }

    /// E X = ∫_0^1 H(u) du (±∞ when the law is not integrable).
    pub fn mean(&self) -> Result<f64> {
        match self {
            Dist::Normal | Dist::Weibull2 { .. } | Dist::SymPareto { .. } => Ok(0.0),
            Dist::Uniform => Ok(0.5),
            Dist::Exponential => Ok(1.0),
            Dist::Pareto { q } => Ok(if *q > 1.0 { q / (q - 1.0) } else { f64::INFINITY }),
            Dist::PointMass { c } => Ok(*c),
            Dist::Atoms(atoms) => Ok(atoms.iter().map(|a| a.x * a.mass).sum()),
            Dist::Winsorized { base, atom, mass, .. } => {
                Ok(base.quantile_integral(0.0, 1.0 - mass)? + atom * mass)
            }
            Dist::PoissonU { .. } => self.quantile_integral(0.0, 1.0),
        }
    }

    /// E|X| via the quantile representation.
    pub fn mean_abs(&self) -> Result<f64> {
        match self {
            Dist::Uniform => Ok(0.5),
            Dist::Exponential => Ok(1.0),
            Dist::PointMass { c } => Ok(c.abs()),
            Dist::Atoms(atoms) => Ok(atoms.iter().map(|a| a.x.abs() * a.mass).sum()),
            _ => quad::integrate_quantile(|u| self.quantile(u).unwrap().abs(), 0.0, 1.0, 1e-10),
        }
    }

    /// E|X|^r, `+∞` when divergent.
    pub fn abs_moment(&self, r: f64) -> Result<f64> {
        match self {
            Dist::Pareto { q } => Ok(if r < *q { q / (q - r) } else { f64::INFINITY }),
            Dist::SymPareto { alpha } => {
                if r >= *alpha {
                    return Ok(f64::INFINITY);
                }
                quad::integrate_quantile(|u| self.quantile(u).unwrap().abs().powf(r), 0.0, 1.0, 1e-9)
            }
            _ => quad::integrate_quantile(|u| self.quantile(u).unwrap().abs().powf(r), 0.0, 1.0, 1e-9),
        }
    }

    /// Whether the law has atoms (relevant preconditions reject these).
    pub fn is_atomic(&self) -> bool {
        matches!(
            self,
            Dist::PointMass { .. } | Dist::Atoms(_) | Dist::Winsorized { .. }
        )
    }
}

/// Evaluation mode for [`local_lip_quantile`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LipMode {
    /// `Lip(F^{-1}, s)` at a probability `s` in (0,1).
    Plain,
    /// `Lip(F^{-1}∘Φ, t)` at a real `t`.
    GaussComposed,
}

/// `quantile_eval` with the domain check; thin named wrapper over
/// [`Dist::quantile`].
pub fn quantile_eval(dist: &Dist, s: f64) -> Result<f64> {
    dist.quantile(s)
}

/// Local Lipschitz constant of the quantile map.
///
/// Plain mode returns `1 / h(F^{-1}(s))`; Gauss-composed mode returns
/// `φ(t) / h(F^{-1}(Φ(t)))`. A vanishing density gives `+∞` (the
/// convention `a/0 = ∞`).
pub fn local_lip_quantile(dist: &Dist, at: f64, mode: LipMode) -> Result<f64> {
    let (num, point) = match mode {
        LipMode::Plain => {
            if !(0.0 < at && at < 1.0) {
                return Err(Error::Domain(format!("plain mode needs s in (0,1), got {at}")));
            }
            (1.0, dist.quantile(at)?)
        }
        LipMode::GaussComposed => {
            let s = phi_cdf(at);
            (phi_pdf(at), dist.quantile(s)?)
        }
    };
    let h = dist
        .density(point)
        .ok_or_else(|| Error::Unsupported(format!("law {} has no density", dist.name())))?;
    if h == 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(num / h)
    }
}

/// Tail regime for [`check_tail_condition`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailRegime {
    /// `Lip(F^{-1}∘Φ, s) <= (1+|s|)^{-1+2/q}` on the real line, `0<q<1`.
    Weibull { q: f64 },
    /// `Lip(F^{-1}, s) <= min{s, 1-s}^{-1-1/q}` on (0,1), `2<q<∞`.
    Power { q: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct TailGridPoint {
    pub s: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TailConditionReport {
    pub law: String,
    pub regime: String,
    pub q: f64,
    pub grid: Vec<TailGridPoint>,
    pub pass: bool,
}

/// Evaluate the Lipschitz tail condition of the chosen regime on a grid
/// of evaluation points, reporting the per-point margin.
pub fn check_tail_condition(dist: &Dist, regime: TailRegime, grid: &[f64]) -> Result<TailConditionReport> {
    let (regime_name, q) = match regime {
        TailRegime::Weibull { q } => {
            if !(0.0 < q && q < 1.0) {
                return Err(Error::Precondition(format!("weibull regime needs 0<q<1, got {q}")));
            }
            ("weibull", q)
        }
        TailRegime::Power { q } => {
            if !(2.0 < q && q.is_finite()) {
                return Err(Error::Precondition(format!("power regime needs 2<q<∞, got {q}")));
            }
            ("power", q)
        }
    };
    let mut points = Vec::with_capacity(grid.len());
    let mut pass = true;
    for &s in grid {
        let (lhs, rhs) = match regime {
            TailRegime::Weibull { q } => (
                local_lip_quantile(dist, s, LipMode::GaussComposed)?,
                (1.0 + s.abs()).powf(-1.0 + 2.0 / q),
            ),
            TailRegime::Power { q } => (
                local_lip_quantile(dist, s, LipMode::Plain)?,
                s.min(1.0 - s).powf(-1.0 - 1.0 / q),
            ),
        };
        let ok = lhs <= rhs;
        pass &= ok;
        points.push(TailGridPoint { s, lhs, rhs, ok });
    }
    Ok(TailConditionReport {
        law: dist.name(),
        regime: regime_name.to_string(),
        q,
        grid: points,
        pass,
    })
}

/// The product transport map `T(x) = (F_i^{-1}(Φ(x_i)))_i` pushing the
/// standard normal product measure onto the product of the marginals.
#[derive(Clone, Debug)]
pub struct TransportMap {
    pub marginals: Vec<Dist>,
}

impl TransportMap {
    pub fn new(marginals: Vec<Dist>) -> Self {
        TransportMap { marginals }
    }

    /// n identical marginals.
    pub fn iid(law: Dist, n: usize) -> Self {
        TransportMap {
            marginals: vec![law; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    /// `transport_apply`: evaluate the map coordinatewise.
    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.marginals.len() {
            return Err(Error::Domain(format!(
                "dimension mismatch: map has {} marginals, input has {}",
                self.marginals.len(),
                z.len()
            )));
        }
        z.iter()
            .zip(&self.marginals)
            .map(|(&zi, law)| law.quantile(phi_cdf(zi)))
            .collect()
    }
}

/// `min{f^{-1}(s), g^{-1}(s)}`: inverts `max{f, g}` for continuous
/// strictly increasing `f, g` vanishing at 0.
pub fn min_of_inverses(f_inv: impl Fn(f64) -> f64, g_inv: impl Fn(f64) -> f64, s: f64) -> f64 {
    f_inv(s).min(g_inv(s))
}
