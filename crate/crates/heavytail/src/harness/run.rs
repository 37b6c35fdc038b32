//! Experiment orchestration: config parsing, theorem-vs-simulation
//! verification runs, and JSON/CSV report emission.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::conc::{
    self, linear_weibull_bound, lip_profile, power_theorem_bound, weibull_theorem_bound,
    FunctionOracle, PowerForm, WeibullForm,
};
use crate::dist::Dist;
use crate::error::{Error, Result};
use crate::harness::fit::{fit_constant, ConstantFit, FIT_HI, FIT_LO};
use crate::harness::mc::{mc_deviations, DeviationSample};
use crate::harness::Registry;

/// One verification run, parsed from a flat `key = value` config file.
/// Unknown keys are rejected so typos fail loudly.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentConfig {
    pub theorem: String,
    pub law: String,
    pub f: String,
    pub n: usize,
    pub q: f64,
    /// only for the lipschitz-p power form
    pub p: Option<f64>,
    pub trials: usize,
    pub t_grid: Vec<f64>,
    pub seed: u64,
    /// JSON object of registry overrides
    pub overrides: Option<String>,
    pub json_out: Option<PathBuf>,
    pub csv_out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn from_kv(text: &str) -> Result<ExperimentConfig> {
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take = |k: &str| map.remove(k);
        let req = |o: Option<String>, k: &str| {
            o.ok_or_else(|| Error::Config(format!("missing config key '{k}'")))
        };
        let cfg = ExperimentConfig {
            theorem: req(take("theorem"), "theorem")?,
            law: req(take("law"), "law")?,
            f: take("f").unwrap_or_else(|| "flat".into()),
            n: req(take("n"), "n")?
                .parse()
                .map_err(|e| Error::Config(format!("n: {e}")))?,
            q: req(take("q"), "q")?
                .parse()
                .map_err(|e| Error::Config(format!("q: {e}")))?,
            p: take("p")
                .map(|s| s.parse().map_err(|e| Error::Config(format!("p: {e}"))))
                .transpose()?,
            trials: req(take("trials"), "trials")?
                .parse()
                .map_err(|e| Error::Config(format!("trials: {e}")))?,
            t_grid: parse_grid(&req(take("t_grid"), "t_grid")?)?,
            seed: req(take("seed"), "seed")?
                .parse()
                .map_err(|e| Error::Config(format!("seed: {e}")))?,
            overrides: take("overrides"),
            json_out: take("json_out").map(PathBuf::from),
            csv_out: take("csv_out").map(PathBuf::from),
        };
        if let Some(k) = map.keys().next() {
            return Err(Error::Config(format!("unknown config key '{k}'")));
        }
        Ok(cfg)
    }
}

/// Comma-separated reals, or `lin:<start>:<stop>:<count>`.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if let Some(rest) = s.strip_prefix("lin:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config("grid spec: lin:<start>:<stop>:<count>".into()));
        }
        let a: f64 = parts[0].parse().map_err(|e| Error::Config(format!("{e}")))?;
        let b: f64 = parts[1].parse().map_err(|e| Error::Config(format!("{e}")))?;
        let k: usize = parts[2].parse().map_err(|e| Error::Config(format!("{e}")))?;
        if k < 2 || !(b > a) {
            return Err(Error::Config("grid needs stop > start and count ≥ 2".into()));
        }
        return Ok((0..k)
            .map(|i| a + (b - a) * i as f64 / (k - 1) as f64)
            .collect());
    }
    s.split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|e| Error::Config(format!("grid value '{v}': {e}")))
        })
        .collect()
}

/// Build a function from a spec string: `flat` (n^{−1/2}Σxᵢ), `sum`,
/// `l2norm`, `softmax:beta=<b>`, or `linear:<path>` (one coefficient
/// per line).
pub fn build_oracle(spec: &str, n: usize) -> Result<FunctionOracle> {
    if spec == "flat" {
        return Ok(FunctionOracle::linear(vec![1.0 / (n as f64).sqrt(); n]));
    }
    if spec == "sum" {
        return Ok(FunctionOracle::linear(vec![1.0; n]));
    }
    if spec == "l2norm" {
        return Ok(FunctionOracle::l2norm());
    }
    if let Some(rest) = spec.strip_prefix("softmax:beta=") {
        let beta: f64 = rest
            .parse()
            .map_err(|e| Error::Config(format!("softmax beta: {e}")))?;
        if !(beta > 0.0) {
            return Err(Error::Config("softmax needs beta > 0".into()));
        }
        return Ok(FunctionOracle::softmax(beta));
    }
    if let Some(path) = spec.strip_prefix("linear:") {
        let text = std::fs::read_to_string(path)?;
        let coeffs = read_vector(&text)?;
        if coeffs.len() != n {
            return Err(Error::Config(format!(
                "coefficient file has {} entries but n = {n}",
                coeffs.len()
            )));
        }
        return Ok(FunctionOracle::linear(coeffs));
    }
    Err(Error::Config(format!(
        "unknown function spec '{spec}' (flat | sum | l2norm | softmax:beta=<b> | linear:<path>)"
    )))
}

/// One real per line; blank lines and `#` comments allowed.
pub fn read_vector(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap().trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            l.parse()
                .map_err(|e| Error::Config(format!("vector entry '{l}': {e}")))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct GridRow {
    pub t: f64,
    pub threshold: f64,
    pub bound_prob: f64,
    pub empirical_prob: f64,
    pub ci: (f64, f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundReport {
    pub theorem: String,
    pub config: ExperimentConfig,
    pub median: f64,
    pub excluded: usize,
    /// registry snapshot of the constants the formulas consumed
    pub constants: BTreeMap<String, f64>,
    pub grid: Vec<GridRow>,
    pub fitted_constant: Option<ConstantFit>,
    pub pass: bool,
}

/// Minimal threshold scale making the empirical Wilson upper limit at
/// `scale·threshold(t)` fall below `prob(t)` at every grid point.
fn fit_threshold_scale(
    name: &str,
    sample: &DeviationSample,
    thresholds: &[f64],
    probs: &[f64],
) -> Result<ConstantFit> {
    let dominates = |scale: f64| {
        thresholds
            .iter()
            .zip(probs)
            .all(|(&th, &pr)| sample.point(scale * th).ci.1 <= pr.min(1.0) || pr >= 1.0)
    };
    if thresholds.iter().all(|&th| sample.exceed_count(FIT_LO * th) == 0) {
        return Ok(ConstantFit {
            name: name.into(),
            value: FIT_LO,
            direction: crate::harness::fit::FitDirection::Increasing,
            degenerate: true,
        });
    }
    if !dominates(FIT_HI) {
        return Err(Error::FitFailure(format!(
            "no threshold scale for '{name}' in [{FIT_LO}, {FIT_HI}] dominates the sample"
        )));
    }
    let (mut good, mut bad) = (FIT_HI, FIT_LO);
    if dominates(bad) {
        good = bad;
    } else {
        for _ in 0..80 {
            let mid = ((good.ln() + bad.ln()) * 0.5).exp();
            if dominates(mid) {
                good = mid;
            } else {
                bad = mid;
            }
        }
    }
    Ok(ConstantFit {
        name: name.into(),
        value: good,
        direction: crate::harness::fit::FitDirection::Increasing,
        degenerate: false,
    })
}

pub fn run_experiment(cfg: &ExperimentConfig, base: &Registry) -> Result<BoundReport> {
    let mut reg = base.clone();
    if let Some(ov) = &cfg.overrides {
        reg.apply_overrides(ov)?;
    }
    let law = Dist::parse(&cfg.law)?;
    let laws = vec![law; cfg.n];
    let f = build_oracle(&cfg.f, cfg.n)?;
    let mut s_list = vec![2.0, f64::INFINITY];
    if let Some(p) = cfg.p {
        s_list.push(p);
    }
    let profile = lip_profile(&f, &s_list, cfg.n, 4_000, cfg.seed ^ 0xa11ce)?;

    // bound side: per grid t, a threshold and a probability
    let mut constants = BTreeMap::new();
    let mut snap = |names: &[&str]| -> Result<()> {
        for name in names {
            constants.insert(name.to_string(), reg.get(name)?);
        }
        Ok(())
    };
    let mut thresholds = Vec::with_capacity(cfg.t_grid.len());
    let mut bound_probs = Vec::with_capacity(cfg.t_grid.len());
    for &t in &cfg.t_grid {
        let pt = match cfg.theorem.as_str() {
            "linear-weibull" => {
                let a = f.linear_coeffs.as_ref().ok_or_else(|| {
                    Error::Precondition("linear-weibull needs a linear function".into())
                })?;
                conc::BoundPoint {
                    threshold: t,
                    prob: linear_weibull_bound(a, t, cfg.q, &reg)?,
                }
            }
            "weibull-sharp" => weibull_theorem_bound(&profile, t, cfg.q, cfg.n, WeibullForm::Sharp, &reg)?,
            "weibull-robust" => {
                weibull_theorem_bound(&profile, t, cfg.q, cfg.n, WeibullForm::Robust, &reg)?
            }
            "power-lorentz" => {
                let a = f.linear_coeffs.as_ref().ok_or_else(|| {
                    Error::Unsupported(
                        "the interpolation-norm form needs per-coordinate sups; only linear \
                         functions are wired up here"
                            .into(),
                    )
                })?;
                let fs: Vec<f64> = a.iter().map(|v| v.abs()).collect();
                power_theorem_bound(PowerForm::Lorentz { f_sharp: &fs }, t, cfg.q, cfg.n, &reg)?
            }
            "power-lipp" => {
                let p = cfg
                    .p
                    .ok_or_else(|| Error::Config("power-lipp needs p".into()))?;
                let lip_p = profile
                    .get(p)
                    .ok_or_else(|| Error::Precondition(format!("profile is missing s = {p}")))?
                    .lip;
                power_theorem_bound(PowerForm::LipschitzP { lip_p, p }, t, cfg.q, cfg.n, &reg)?
            }
            other => {
                return Err(Error::Config(format!(
                    "unknown theorem '{other}' (linear-weibull | weibull-sharp | weibull-robust \
                     | power-lorentz | power-lipp)"
                )))
            }
        };
        thresholds.push(pt.threshold);
        bound_probs.push(pt.prob);
    }
    match cfg.theorem.as_str() {
        "linear-weibull" | "weibull-sharp" => snap(&["c_q_weibull"])?,
        "weibull-robust" => snap(&["C_q_weibull"])?,
        "power-lorentz" => snap(&["C_poly", "C_poly_r", "C_power_prob"])?,
        "power-lipp" => snap(&["C_pq_poly", "C_power_prob"])?,
        _ => unreachable!(),
    }

    // empirical side at the bound thresholds
    let sample = mc_deviations(&f, &laws, cfg.trials, cfg.seed)?;
    let grid: Vec<GridRow> = cfg
        .t_grid
        .iter()
        .zip(thresholds.iter().zip(&bound_probs))
        .map(|(&t, (&th, &bp))| {
            let pt = sample.point(th);
            GridRow {
                t,
                threshold: th,
                bound_prob: bp,
                empirical_prob: pt.prob,
                ci: pt.ci,
            }
        })
        .collect();
    let pass = grid
        .iter()
        .all(|r| r.bound_prob >= 1.0 || r.empirical_prob <= r.bound_prob);

    // refit the theorem's lead constant against this sample
    let fitted = match cfg.theorem.as_str() {
        "linear-weibull" | "weibull-sharp" => {
            let two = profile.get(2.0).unwrap();
            let inf = profile.get(f64::INFINITY).unwrap();
            let q = cfg.q;
            let curve = sample.curve(&cfg.t_grid);
            Some(fit_constant(
                "c_q_weibull",
                |c, t| {
                    Ok(2.0
                        * (-c * ((t / two.lip_sharp).powi(2)).min((t / inf.lip_sharp).powf(q)))
                            .exp())
                },
                &curve,
            )?)
        }
        "weibull-robust" => {
            let base_c = reg.get("C_q_weibull")?;
            let base: Vec<f64> = thresholds.iter().map(|&th| th / base_c).collect();
            Some(fit_threshold_scale("C_q_weibull", &sample, &base, &bound_probs)?)
        }
        "power-lorentz" => {
            let base_c = reg.get("C_poly")?;
            let base: Vec<f64> = thresholds.iter().map(|&th| th / base_c).collect();
            Some(fit_threshold_scale("C_poly", &sample, &base, &bound_probs)?)
        }
        "power-lipp" => {
            let base_c = reg.get("C_pq_poly")?;
            let base: Vec<f64> = thresholds.iter().map(|&th| th / base_c).collect();
            Some(fit_threshold_scale("C_pq_poly", &sample, &base, &bound_probs)?)
        }
        _ => None,
    };

    let report = BoundReport {
        theorem: cfg.theorem.clone(),
        config: cfg.clone(),
        median: sample.median,
        excluded: sample.excluded,
        constants,
        grid,
        fitted_constant: fitted,
        pass,
    };
    if let Some(path) = &cfg.json_out {
        write_json(path, &report)?;
    }
    if let Some(path) = &cfg.csv_out {
        let header = ["t", "threshold", "bound_prob", "empirical_prob", "ci_lo", "ci_hi"];
        let rows: Vec<Vec<String>> = report
            .grid
            .iter()
            .map(|r| {
                vec![
                    fmt_f64(r.t),
                    fmt_f64(r.threshold),
                    fmt_f64(r.bound_prob),
                    fmt_f64(r.empirical_prob),
                    fmt_f64(r.ci.0),
                    fmt_f64(r.ci.1),
                ]
            })
            .collect();
        write_csv(path, &header, &rows)?;
    }
    Ok(report)
}

pub fn fmt_f64(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s)?;
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') || s.contains('\r') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// RFC 4180: CRLF line endings, quoting only where needed.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut out = String::new();
    out.push_str(&header.iter().map(|h| csv_field(h)).collect::<Vec<_>>().join(","));
    out.push_str("\r\n");
    for row in rows {
        out.push_str(&row.iter().map(|f| csv_field(f)).collect::<Vec<_>>().join(","));
        out.push_str("\r\n");
    }
    std::fs::write(path, out)?;
    Ok(())
}
