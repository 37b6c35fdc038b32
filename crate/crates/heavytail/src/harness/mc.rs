//! Seeded Monte Carlo engine: empirical survival curves about the
//! median, with Wilson intervals.
//!
//! Reproducibility contract: every trial draws from its own RNG stream
//! derived from (seed, pass, trial index), so the sample set is
//! identical regardless of worker count or reduction order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::conc::FunctionOracle;
use crate::dist::Dist;
use crate::error::{Error, Result};

const MEDIAN_PASS: u64 = 0x10_0000_0000;
const TAIL_PASS: u64 = 0x20_0000_0000;

/// 95% Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    assert!(trials > 0);
    let z = 1.959963984540054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct SurvivalPoint {
    pub t: f64,
    pub count: u64,
    pub prob: f64,
    pub ci: (f64, f64),
}

/// Empirical curve `t ↦ P{|f(X) − median| > t}` with the median frozen
/// from an independent first pass.
#[derive(Clone, Debug, Serialize)]
pub struct SurvivalCurve {
    pub median: f64,
    pub trials: usize,
    /// non-finite f values dropped, summed over both passes
    pub excluded: usize,
    pub points: Vec<SurvivalPoint>,
}

fn draw_f(
    f: &FunctionOracle,
    laws: &[Dist],
    seed: u64,
    pass: u64,
    trial: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(pass | trial);
    let x: Vec<f64> = laws.iter().map(|d| d.sample(&mut rng)).collect();
    f.eval(&x)
}

/// The raw two-pass sample behind a survival curve: the frozen median
/// and the sorted deviations `|f(X) − median|` from an independent
/// second pass. Lets callers evaluate the empirical curve at arbitrary
/// thresholds (needed when fitting a threshold-scale constant).
#[derive(Clone, Debug)]
pub struct DeviationSample {
    pub median: f64,
    pub trials: usize,
    pub excluded: usize,
    /// sorted ascending
    pub deviations: Vec<f64>,
}

impl DeviationSample {
    pub fn exceed_count(&self, t: f64) -> u64 {
        (self.deviations.len() - self.deviations.partition_point(|&d| d <= t)) as u64
    }

    pub fn point(&self, t: f64) -> SurvivalPoint {
        let kept = self.deviations.len() as u64;
        let count = self.exceed_count(t);
        SurvivalPoint {
            t,
            count,
            prob: count as f64 / kept as f64,
            ci: wilson_interval(count, kept),
        }
    }

    pub fn curve(&self, t_grid: &[f64]) -> SurvivalCurve {
        SurvivalCurve {
            median: self.median,
            trials: self.trials,
            excluded: self.excluded,
            points: t_grid.iter().map(|&t| self.point(t)).collect(),
        }
    }
}

pub fn mc_deviations(
    f: &FunctionOracle,
    laws: &[Dist],
    trials: usize,
    seed: u64,
) -> Result<DeviationSample> {
    if trials < 1_000 {
        return Err(Error::Precondition(format!(
            "need at least 1e3 trials, got {trials}"
        )));
    }
    if laws.is_empty() {
        return Err(Error::Domain("empty law vector".into()));
    }
    // pass 1: freeze the median
    let mut vals: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| draw_f(f, laws, seed, MEDIAN_PASS, i))
        .collect();
    let before = vals.len();
    vals.retain(|v| v.is_finite());
    let mut excluded = before - vals.len();
    if vals.is_empty() {
        return Err(Error::Numerical("all median-pass samples non-finite".into()));
    }
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = vals[vals.len() / 2];

    // pass 2: deviations about the frozen median, fresh stream branch
    let mut deviations: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| (draw_f(f, laws, seed, TAIL_PASS, i) - median).abs())
        .collect();
    let before = deviations.len();
    deviations.retain(|v| v.is_finite());
    excluded += before - deviations.len();
    if deviations.is_empty() {
        return Err(Error::Numerical("all tail-pass samples non-finite".into()));
    }
    deviations.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(DeviationSample {
        median,
        trials,
        excluded,
        deviations,
    })
}

pub fn mc_survival(
    f: &FunctionOracle,
    laws: &[Dist],
    t_grid: &[f64],
    trials: usize,
    seed: u64,
) -> Result<SurvivalCurve> {
    if t_grid.is_empty() {
        return Err(Error::Domain("empty t-grid".into()));
    }
    if t_grid.iter().any(|&t| !t.is_finite() || t < 0.0) {
        return Err(Error::Domain("t-grid must be finite and nonnegative".into()));
    }
    Ok(mc_deviations(f, laws, trials, seed)?.curve(t_grid))
}
