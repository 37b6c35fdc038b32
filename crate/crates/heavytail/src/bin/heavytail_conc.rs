//! Command-line front end: theorem verification runs, tail-comparison
//! certificates, order-statistic envelopes, norm evaluation, constant
//! fitting, and config-file driven experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use heavytail_conc::dist::Dist;
use heavytail_conc::error::{Error, Result};
use heavytail_conc::harness::fit::stability_ratio;
use heavytail_conc::harness::run::{
    fmt_f64, parse_grid, read_vector, run_experiment, write_csv, write_json, ExperimentConfig,
};
use heavytail_conc::harness::Registry;
use heavytail_conc::lornorm::{dual_norm, primal_norm, LorentzParams, PrimalMode};
use heavytail_conc::ostats::{
    hstar_of, order_stat_envelope, renyi_sample, trimmed_sum_bound, TrimBranch,
};
use heavytail_conc::tailcmp::{
    conditional_tail_bound, optimal_linear_witness, quantile_envelope, ratio_tail_bound,
};

#[derive(Parser)]
#[command(name = "heavytail-conc", version, about = "Concentration bounds for heavy-tailed product measures")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Verify a theorem bound against Monte Carlo simulation
    Verify(VerifyArgs),
    /// Tail-comparison certificates under convex majorization
    TailCompare(TailCompareArgs),
    /// Order-statistic envelopes, with optional trimmed-sum bound
    OrderStats(OrderStatsArgs),
    /// Evaluate the interpolation norm and its dual
    Norms(NormsArgs),
    /// Fit a theorem's lead constant across dimensions
    FitConstants(FitConstantsArgs),
    /// Run an experiment described by a key = value config file
    Run(RunArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// linear-weibull | weibull-sharp | weibull-robust | power-lorentz | power-lipp
    #[arg(long)]
    theorem: String,
    /// marginal law, e.g. weibull2:q=0.5 or sympareto:alpha=4
    #[arg(long)]
    law: String,
    /// flat | sum | l2norm | softmax:beta=<b> | linear:<path>
    #[arg(long, default_value = "flat")]
    f: String,
    #[arg(long)]
    n: usize,
    /// tail exponent handed to the bound formula
    #[arg(long)]
    q: f64,
    /// exponent for the lipschitz-p form
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    /// comma-separated values or lin:<start>:<stop>:<count>
    #[arg(long, default_value = "lin:0.5:4:8")]
    t_grid: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// JSON object of registry overrides
    #[arg(long)]
    overrides: Option<String>,
    #[arg(long)]
    json_out: Option<PathBuf>,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct TailCompareArgs {
    #[arg(long)]
    law: String,
    /// anchor for the optimal-witness certificate
    #[arg(long)]
    t: Option<f64>,
    /// cut level for the conditional tail bound
    #[arg(long)]
    s: Option<f64>,
    /// quantile level for the envelope / ratio certificates
    #[arg(long)]
    x: Option<f64>,
    /// tail-expansion factor R > 1 for the ratio certificate
    #[arg(long = "R")]
    r_factor: Option<f64>,
    /// deviation-regularity exponent p
    #[arg(long)]
    p: Option<f64>,
    /// deviation-regularity scale T
    #[arg(long = "T")]
    t_cap: Option<f64>,
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct OrderStatsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// quadrature | substituted | fast-growth: also evaluate the
    /// trimmed-sum bound for --law with this branch
    #[arg(long)]
    branch: Option<String>,
    /// law for the trimmed-sum bound
    #[arg(long, default_value = "pareto:q=3")]
    law: String,
    /// lower trim index for the trimmed-sum bound
    #[arg(long, default_value_t = 0)]
    j: usize,
    /// upper trim index (defaults to n−1)
    #[arg(long)]
    k: Option<usize>,
    /// growth exponent for the fast-growth branch
    #[arg(long, default_value_t = 3.0)]
    p: f64,
    #[arg(long)]
    json_out: Option<PathBuf>,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct NormsArgs {
    #[arg(long)]
    r: f64,
    #[arg(long)]
    q: f64,
    /// comma-separated reals, or @<path> to a file with one real per line
    #[arg(long)]
    vector: String,
    /// exact-lp | approx | auto
    #[arg(long, default_value = "auto")]
    mode: String,
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct FitConstantsArgs {
    #[arg(long)]
    theorem: String,
    #[arg(long)]
    law: String,
    #[arg(long, default_value = "flat")]
    f: String,
    #[arg(long)]
    q: f64,
    #[arg(long)]
    p: Option<f64>,
    /// comma-separated dimensions, e.g. 64,256,1024
    #[arg(long, default_value = "64,256,1024")]
    n_list: String,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value = "lin:0.5:4:8")]
    t_grid: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    json_out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// override the config's seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json_out: Option<PathBuf>,
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

fn emit<T: Serialize>(value: &T, json_out: &Option<PathBuf>) -> Result<()> {
    match json_out {
        Some(path) => write_json(path, value),
        None => {
            println!("{}", serde_json::to_string_pretty(value)?);
            Ok(())
        }
    }
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let cfg = ExperimentConfig {
        theorem: a.theorem,
        law: a.law,
        f: a.f,
        n: a.n,
        q: a.q,
        p: a.p,
        trials: a.trials,
        t_grid: parse_grid(&a.t_grid)?,
        seed: a.seed,
        overrides: a.overrides,
        json_out: a.json_out,
        csv_out: a.csv_out,
    };
    let report = run_experiment(&cfg, &Registry::default())?;
    for row in &report.grid {
        println!(
            "t = {:<8} threshold = {:<12} bound = {:<12} empirical = {:<12} ci = [{}, {}]",
            fmt_f64(row.t),
            fmt_f64(row.threshold),
            fmt_f64(row.bound_prob),
            fmt_f64(row.empirical_prob),
            fmt_f64(row.ci.0),
            fmt_f64(row.ci.1)
        );
    }
    if let Some(fit) = &report.fitted_constant {
        println!("fitted {} = {}{}", fit.name, fit.value, if fit.degenerate { " (degenerate)" } else { "" });
    }
    println!("verdict: {}", if report.pass { "pass" } else { "FAIL" });
    if cfg.json_out.is_none() {
        // the summary above is the human output; nothing more to print
    }
    Ok(report.pass)
}

fn cmd_tail_compare(a: TailCompareArgs) -> Result<()> {
    let law = Dist::parse(&a.law)?;
    let mut ops = Vec::new();
    if let Some(t) = a.t {
        let w = optimal_linear_witness(&law, t)?;
        ops.push(json!({
            "operation": "optimal-linear-witness",
            "inputs": {"law": a.law, "t": t},
            "certificate": {"threshold": t, "prob": w.minimum},
            "checks": [{"name": "slope", "pass": w.a > 0.0, "worst_point": w.bracket_width}],
        }));
    }
    if let Some(s) = a.s {
        let c = conditional_tail_bound(&law, s)?;
        ops.push(json!({
            "operation": "conditional-tail-bound",
            "inputs": {"law": a.law, "s": s},
            "certificate": c,
            "checks": [],
        }));
    }
    if let Some(x) = a.x {
        let e = quantile_envelope(&law, x)?;
        ops.push(json!({
            "operation": "quantile-envelope",
            "inputs": {"law": a.law, "x": x},
            "certificate": {"threshold": e.value, "divergent": e.divergent},
            "checks": [],
        }));
        if let (Some(r), Some(p), Some(t_cap)) = (a.r_factor, a.p, a.t_cap) {
            let b = ratio_tail_bound(&law, x, r, p, t_cap)?;
            let checks: Vec<_> = b
                .warnings
                .iter()
                .map(|w| json!({"name": "regularity", "pass": false, "worst_point": w}))
                .collect();
            ops.push(json!({
                "operation": "ratio-tail-bound",
                "inputs": {"law": a.law, "x": x, "R": r, "p": p, "T": t_cap},
                "certificate": {"threshold": b.threshold, "prob": b.prob_gt, "factor": b.factor},
                "checks": checks,
            }));
        }
    }
    if ops.is_empty() {
        return Err(Error::Config(
            "nothing to do: pass --t, --s, or --x (with --R/--p/--T for the ratio bound)".into(),
        ));
    }
    emit(&ops, &a.json_out)
}

fn cmd_order_stats(a: OrderStatsArgs) -> Result<()> {
    let reg = Registry::default();
    let env = order_stat_envelope(a.n, a.t, &reg)?;
    // empirical per-k maxima of uniform order statistics
    let mut emp_max = vec![0.0f64; a.n];
    for trial in 0..a.trials as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        rng.set_stream(trial);
        let sample = renyi_sample(a.n, &mut rng);
        for (m, v) in emp_max.iter_mut().zip(&sample) {
            *m = m.max(*v);
        }
    }
    let trimmed = match a.branch.as_deref() {
        None => None,
        Some(name) => {
            let branch = match name {
                "quadrature" => TrimBranch::Quadrature,
                "substituted" => TrimBranch::Substituted,
                "fast-growth" => TrimBranch::FastGrowth { p: a.p, t_cap: 1.0 },
                other => {
                    return Err(Error::Config(format!(
                        "unknown branch '{other}' (quadrature | substituted | fast-growth)"
                    )))
                }
            };
            let law = Dist::parse(&a.law)?;
            let k = a.k.unwrap_or(a.n - 1);
            let hstar = hstar_of(&law);
            let bound =
                trimmed_sum_bound(&hstar, a.n, a.j, k, a.t.max(2.0), branch, &reg)?;
            drop(hstar);
            Some(bound)
        }
    };
    if let Some(path) = &a.csv_out {
        let header = ["k", "top", "bottom", "renyi", "empirical_max"];
        let rows: Vec<Vec<String>> = env
            .per_k
            .iter()
            .map(|pk| {
                vec![
                    pk.k.to_string(),
                    fmt_f64(pk.top),
                    fmt_f64(pk.bottom),
                    fmt_f64(pk.renyi),
                    fmt_f64(emp_max[pk.k - 1]),
                ]
            })
            .collect();
        write_csv(path, &header, &rows)?;
    }
    let report = json!({
        "n": a.n,
        "t": a.t,
        "trials": a.trials,
        "prob_top_bottom": env.prob_top_bottom,
        "prob_renyi": env.prob_renyi,
        "per_k": env.per_k,
        "empirical_max": emp_max,
        "trimmed_sum": trimmed,
    });
    emit(&report, &a.json_out)
}

fn cmd_norms(a: NormsArgs) -> Result<()> {
    let x = if let Some(path) = a.vector.strip_prefix('@') {
        read_vector(&std::fs::read_to_string(path)?)?
    } else {
        a.vector
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|e| Error::Config(format!("vector entry '{v}': {e}")))
            })
            .collect::<Result<Vec<f64>>>()?
    };
    let params = LorentzParams::new(a.r, a.q, x.len())?;
    let mode = match a.mode.as_str() {
        "exact-lp" => PrimalMode::ExactSmallN,
        "approx" => PrimalMode::Approx,
        "auto" => {
            if x.len() <= 12 {
                PrimalMode::ExactSmallN
            } else {
                PrimalMode::Approx
            }
        }
        other => return Err(Error::Config(format!("unknown mode '{other}' (exact-lp | approx | auto)"))),
    };
    let primal = primal_norm(&x, &params, mode)?;
    let dual = dual_norm(&x, &params)?;
    let report = json!({
        "r": a.r,
        "q": a.q,
        "n": x.len(),
        "primal": primal,
        "dual": dual,
    });
    emit(&report, &a.json_out)
}

fn cmd_fit_constants(a: FitConstantsArgs) -> Result<()> {
    let n_list: Vec<usize> = a
        .n_list
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|e| Error::Config(format!("n '{v}': {e}")))
        })
        .collect::<Result<Vec<usize>>>()?;
    let reg = Registry::default();
    let mut cells = Vec::new();
    let mut values = Vec::new();
    for &n in &n_list {
        let cfg = ExperimentConfig {
            theorem: a.theorem.clone(),
            law: a.law.clone(),
            f: a.f.clone(),
            n,
            q: a.q,
            p: a.p,
            trials: a.trials,
            t_grid: parse_grid(&a.t_grid)?,
            seed: a.seed,
            overrides: None,
            json_out: None,
            csv_out: None,
        };
        let report = run_experiment(&cfg, &reg)?;
        let fit = report
            .fitted_constant
            .ok_or_else(|| Error::FitFailure("run produced no fitted constant".into()))?;
        println!("n = {n}: fitted {} = {}{}", fit.name, fit.value, if fit.degenerate { " (degenerate)" } else { "" });
        if !fit.degenerate {
            values.push(fit.value);
        }
        cells.push(json!({"n": n, "law": a.law, "f": a.f, "fit": fit}));
    }
    let stability = if values.len() >= 2 {
        Some(stability_ratio(&values)?)
    } else {
        None
    };
    if let Some(s) = stability {
        println!("stability ratio = {s}");
    }
    let report = json!({
        "theorem": a.theorem,
        "cells": cells,
        "stability_ratio": stability,
    });
    emit(&report, &a.json_out)
}

fn cmd_run(a: RunArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&a.config)?;
    let mut cfg = ExperimentConfig::from_kv(&text)?;
    if let Some(seed) = a.seed {
        cfg.seed = seed;
    }
    if a.json_out.is_some() {
        cfg.json_out = a.json_out;
    }
    if a.csv_out.is_some() {
        cfg.csv_out = a.csv_out;
    }
    let report = run_experiment(&cfg, &Registry::default())?;
    if cfg.json_out.is_none() {
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<bool> = match cli.cmd {
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::TailCompare(a) => cmd_tail_compare(a).map(|()| true),
        Cmd::OrderStats(a) => cmd_order_stats(a).map(|()| true),
        Cmd::Norms(a) => cmd_norms(a).map(|()| true),
        Cmd::FitConstants(a) => cmd_fit_constants(a).map(|()| true),
        Cmd::Run(a) => cmd_run(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            let failure = json!({"error": e.to_string()});
            eprintln!("{}", serde_json::to_string_pretty(&failure).unwrap());
            ExitCode::from(2)
        }
    }
}
