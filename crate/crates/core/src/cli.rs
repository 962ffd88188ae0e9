//! Command-line front end.
//!
//! Every subcommand prints its result on stdout. Failures print one JSON object on
//! stderr and map to exit code 1 (bad input, vacuous bound, ...) or 2 (numeric
//! instability).

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bounds::{
    epsilon_bound, gamma_gumbel, gamma_upper, gamma_upper_with, quantile_bound_shepard,
    tail_probability, validity_threshold, BoundParams, GammaOptions, TailKind, ALPHA_DIFF,
};
use crate::cross_validation::{loo_cv_fast, loo_cv_naive};
use crate::error::{invalid, Error, Result};
use crate::experiment::{
    estimate_event_probability, run_experiment, ExperimentConfig, GammaSource, TestFunctionSpec,
};
use crate::io::{self, EventRow, Manifest};
use crate::kernels::KernelFamily;
use crate::shepard::{SampleSet, ShepardModel, TestFunction, UndefinedPolicy};
use crate::torus::{sample_uniform, NodeSet};

#[derive(Debug, Parser)]
#[command(
    name = "shepard-cv",
    version,
    about = "Shepard's model on the unit torus: cross-validation, risk and bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Leave-one-out cross-validation score
    Cv(CvArgs),
    /// Quadrature risk and sup error against the test function
    Risk(RiskArgs),
    /// Mesh norm and leave-one-out mesh norms of a node set
    Meshnorm(MeshArgs),
    /// Failure probability of the mesh-norm event
    Gamma(GammaArgs),
    /// Tail bounds, epsilon radii and the quantile bound
    Bound(BoundArgs),
    /// Monte Carlo experiment writing records.csv and aggregates.csv
    Experiment(ExperimentArgs),
    /// CSV inputs and manifest for a figure
    Figure(FigureArgs),
}

/// Flags shared by everything that builds a sample set.
#[derive(Debug, Args)]
struct SampleArgs {
    /// JSON experiment config supplying defaults for the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV of `x,y` samples (an optional header line is skipped) instead of random nodes
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// sine | sine_analytic | constant
    #[arg(long)]
    function: Option<String>,
    /// Level of the constant function
    #[arg(long)]
    value: Option<f64>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    sup_norm: Option<f64>,
    #[arg(long)]
    kernel: Option<String>,
    /// error | nearest_node
    #[arg(long)]
    policy: Option<UndefinedPolicy>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CvMethod {
    Fast,
    Naive,
}

#[derive(Debug, Args)]
struct CvArgs {
    #[command(flatten)]
    sample: SampleArgs,
    #[arg(long)]
    h: f64,
    #[arg(long, value_enum, default_value = "fast")]
    method: CvMethod,
}

#[derive(Debug, Args)]
struct RiskArgs {
    #[command(flatten)]
    sample: SampleArgs,
    #[arg(long)]
    h: f64,
    /// Quadrature points (default 10 n)
    #[arg(long)]
    grid_size: Option<usize>,
}

#[derive(Debug, Args)]
struct MeshArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// File with one node per line (extra comma-separated columns are ignored)
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also report membership in the good set for this h
    #[arg(long)]
    h: Option<f64>,
}

#[derive(Debug, Args)]
struct GammaArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    h: f64,
    /// sum | gumbel | mc
    #[arg(long = "gamma-source", alias = "method")]
    gamma_source: Option<GammaSource>,
    /// Monte Carlo trials for `mc`
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Precision cap for the exact sum
    #[arg(long)]
    max_bits: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundKind {
    Risk,
    Cv,
    Diff,
    Epsilon,
    Quantile,
}

#[derive(Debug, Args)]
struct BoundArgs {
    #[arg(long, value_enum)]
    kind: BoundKind,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    sup_norm: Option<f64>,
    /// Defaults to the exact-sum upper bound for (n, h)
    #[arg(long)]
    gamma: Option<f64>,
    /// Deviation for the tail bounds
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    c2: Option<f64>,
    #[arg(long)]
    m: Option<f64>,
    /// Use the single-constant forms of the tail bounds
    #[arg(long)]
    single_constant: bool,
    #[arg(long, default_value_t = ALPHA_DIFF)]
    alpha: f64,
    #[arg(long)]
    p_fail: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

/// Overrides applied on top of an experiment config.
#[derive(Debug, Args)]
struct ExperimentFlags {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the laptop-sized preset instead of the full protocol
    #[arg(long)]
    desk: bool,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated list of h values
    #[arg(long, value_delimiter = ',')]
    h_grid: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    value: Option<f64>,
    #[arg(long)]
    lipschitz: Option<f64>,
    #[arg(long)]
    sup_norm: Option<f64>,
    /// sum | gumbel | mc
    #[arg(long)]
    gamma_source: Option<GammaSource>,
    #[arg(long)]
    p_fail: Option<f64>,
    #[arg(long)]
    policy: Option<UndefinedPolicy>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[command(flatten)]
    flags: ExperimentFlags,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// 3 (mesh-norm event curve) or 4 (experiment panels)
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["3", "4"]))]
    which: String,
    #[command(flatten)]
    flags: ExperimentFlags,
}

fn base_config(path: Option<&Path>, desk: bool) -> Result<ExperimentConfig> {
    match path {
        Some(p) => io::load_config(p),
        None if desk => Ok(ExperimentConfig::desk()),
        None => Ok(ExperimentConfig::default()),
    }
}

impl ExperimentFlags {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut cfg = base_config(self.config.as_deref(), self.desk)?;
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = &self.h_grid {
            cfg.h_grid = v.clone();
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if self.grid_size.is_some() {
            cfg.grid_size = self.grid_size;
        }
        if let Some(v) = &self.kernel {
            cfg.kernel = v.clone();
        }
        override_function(
            &mut cfg.test_function,
            self.function.as_ref(),
            self.value,
            self.lipschitz,
            self.sup_norm,
        );
        if let Some(v) = self.gamma_source {
            cfg.gamma_source = v;
        }
        if let Some(v) = self.p_fail {
            cfg.p_fail = v;
        }
        if let Some(v) = self.policy {
            cfg.policy = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn override_function(
    spec: &mut TestFunctionSpec,
    preset: Option<&String>,
    value: Option<f64>,
    lipschitz: Option<f64>,
    sup_norm: Option<f64>,
) {
    if let Some(p) = preset {
        *spec = TestFunctionSpec {
            preset: p.clone(),
            ..Default::default()
        };
    }
    spec.value = value.or(spec.value);
    spec.lipschitz = lipschitz.or(spec.lipschitz);
    spec.sup_norm = sup_norm.or(spec.sup_norm);
}

/// Everything needed to build one sample set and model.
struct Setup {
    samples: SampleSet,
    f: TestFunction,
    kernel_name: String,
    policy: UndefinedPolicy,
    grid_size: Option<usize>,
}

fn read_pairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line.split(',').map(str::trim);
        let x = cols.next().unwrap_or("").parse::<f64>();
        let y = cols.next().map(str::parse::<f64>);
        match (x, y) {
            (Ok(x), Some(Ok(y))) => {
                xs.push(x);
                ys.push(y);
            }
            (Ok(x), None) => {
                xs.push(x);
                ys.push(f64::NAN);
            }
            _ if i == 0 => {}
            _ => {
                return Err(Error::Parse(format!(
                    "{}: bad line {}: '{line}'",
                    path.display(),
                    i + 1
                )))
            }
        }
    }
    Ok((xs, ys))
}

impl SampleArgs {
    fn setup(&self) -> Result<Setup> {
        let cfg = base_config(self.config.as_deref(), false)?;
        let mut spec = cfg.test_function.clone();
        override_function(
            &mut spec,
            self.function.as_ref(),
            self.value,
            self.lipschitz,
            self.sup_norm,
        );
        let f = spec.build()?;
        let samples = match &self.input {
            Some(path) => {
                let (xs, ys) = read_pairs(path)?;
                if ys.iter().any(|y| y.is_nan()) {
                    return Err(Error::Parse(format!(
                        "{}: every line needs x,y",
                        path.display()
                    )));
                }
                SampleSet::new(&xs, &ys)?
            }
            None => {
                let n = self.n.unwrap_or(cfg.n);
                SampleSet::from_function(sample_uniform(self.seed.unwrap_or(cfg.seed), n)?, &f)
            }
        };
        Ok(Setup {
            samples,
            f,
            kernel_name: self.kernel.clone().unwrap_or(cfg.kernel),
            policy: self.policy.unwrap_or(cfg.policy),
            grid_size: cfg.grid_size,
        })
    }
}

/// First six significant digits (truncated, not rounded), trailing zeros removed.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // shortest round-trip digits in scientific form, e.g. "2.6012294878831477e-1"
    let sci = format!("{:e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let mut digits: String = mantissa.chars().filter(|c| *c != '.').take(6).collect();
    while digits.len() < 6 {
        digits.push('0');
    }
    let body = if exp < 0 {
        format!("0.{}{digits}", "0".repeat((-exp - 1) as usize))
    } else if exp as usize + 1 >= digits.len() {
        format!("{digits}{}", "0".repeat(exp as usize + 1 - digits.len()))
    } else {
        let (int, frac) = digits.split_at(exp as usize + 1);
        format!("{int}.{frac}")
    };
    let body = if body.contains('.') {
        body.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        body
    };
    if x < 0.0 {
        format!("-{body}")
    } else {
        body
    }
}

fn print_json(out: &mut dyn Write, v: &serde_json::Value) -> Result<()> {
    writeln!(out, "{v}")?;
    Ok(())
}

fn cmd_cv(a: &CvArgs, out: &mut dyn Write) -> Result<()> {
    let s = a.sample.setup()?;
    let kernel = KernelFamily::by_name(&s.kernel_name, a.h)?;
    let res = match a.method {
        CvMethod::Fast => loo_cv_fast(&s.samples, &kernel, s.policy)?,
        CvMethod::Naive => loo_cv_naive(&s.samples, &kernel, s.policy)?,
    };
    print_json(
        out,
        &json!({ "n": s.samples.len(), "h": a.h, "score": res.score, "skipped": res.skipped }),
    )
}

fn cmd_risk(a: &RiskArgs, out: &mut dyn Write) -> Result<()> {
    let s = a.sample.setup()?;
    let n = s.samples.len();
    let grid = a
        .grid_size
        .or(s.grid_size)
        .unwrap_or_else(|| crate::shepard::default_grid_size(n));
    let kernel = KernelFamily::by_name(&s.kernel_name, a.h)?;
    let model = ShepardModel::fit(s.samples, kernel, s.policy)?;
    let risk = model.risk_estimate(&s.f, grid)?;
    let sup = model.sup_error(&s.f, grid)?;
    print_json(
        out,
        &json!({ "n": n, "h": a.h, "grid_size": grid, "risk": risk, "sup_error": sup }),
    )
}

fn cmd_meshnorm(a: &MeshArgs, out: &mut dyn Write) -> Result<()> {
    let nodes = match &a.input {
        Some(path) => NodeSet::new(&read_pairs(path)?.0)?,
        None => {
            let cfg = base_config(a.config.as_deref(), false)?;
            sample_uniform(a.seed.unwrap_or(cfg.seed), a.n.unwrap_or(cfg.n))?
        }
    };
    let mut v = json!({ "n": nodes.len(), "mesh_norm": nodes.mesh_norm() });
    if nodes.len() >= 2 {
        v["max_loo_mesh_norm"] = json!(nodes.max_loo_mesh_norm()?);
    }
    if let Some(h) = a.h {
        v["h"] = json!(h);
        v["in_xi"] = json!(nodes.xi_membership(h)?);
    }
    print_json(out, &v)
}

fn cmd_gamma(a: &GammaArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => Some(io::load_config(p)?),
        None => None,
    };
    let n =
        a.n.or(cfg.as_ref().map(|c| c.n as u64))
            .ok_or_else(|| invalid("--n is required (or a config with n)"))?;
    let source = a
        .gamma_source
        .or(cfg.as_ref().map(|c| c.gamma_source))
        .unwrap_or(GammaSource::ExactSum);
    let value = match source {
        GammaSource::ExactSum => match a.max_bits {
            Some(bits) => {
                gamma_upper_with(
                    n,
                    a.h,
                    GammaOptions {
                        max_precision_bits: bits,
                    },
                )?
                .value
            }
            None => gamma_upper(n, a.h)?.value,
        },
        GammaSource::Gumbel => gamma_gumbel(n, a.h)?.value,
        GammaSource::MonteCarlo => {
            let trials = a.trials.or(cfg.as_ref().map(|c| c.trials)).unwrap_or(1000);
            let seed = a.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0);
            estimate_event_probability(n as usize, &[a.h], trials, seed)?[0].1
        }
    };
    writeln!(out, "{}", format_sig6(value))?;
    Ok(())
}

fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = match &a.config {
        Some(p) => Some(io::load_config(p)?),
        None => None,
    };
    let n =
        a.n.or(cfg.as_ref().map(|c| c.n as u64))
            .ok_or_else(|| invalid("--n is required (or a config with n)"))?;
    let mut spec = cfg
        .as_ref()
        .map(|c| c.test_function.clone())
        .unwrap_or_default();
    override_function(
        &mut spec,
        a.function.as_ref(),
        None,
        a.lipschitz,
        a.sup_norm,
    );
    let f = spec.build()?;
    let gamma = match a.gamma {
        Some(g) => g,
        None => gamma_upper(n, a.h)?.value,
    };
    let p_fail = a.p_fail.or(cfg.as_ref().map(|c| c.p_fail)).unwrap_or(0.1);
    let mut params = BoundParams::shepard(n, a.h, f.lipschitz(), f.sup_norm(), gamma)?;
    if let Some(c2) = a.c2 {
        params = params.with_c2(c2)?;
    }
    if let Some(m) = a.m {
        params = params.with_m(m)?;
    }
    let two = !a.single_constant;
    let v = match a.kind {
        BoundKind::Risk | BoundKind::Cv | BoundKind::Diff => {
            let kind = match a.kind {
                BoundKind::Risk => TailKind::Risk,
                BoundKind::Cv => TailKind::Cv,
                _ => TailKind::Diff,
            };
            let eps = a
                .eps
                .ok_or_else(|| invalid("--eps is required for tail bounds"))?;
            json!({
                "kind": format!("{kind:?}").to_lowercase(),
                "eps": eps,
                "gamma": gamma,
                "threshold": validity_threshold(kind, &params, two),
                "probability": tail_probability(kind, eps, &params, two)?,
            })
        }
        BoundKind::Epsilon => json!({
            "kind": "epsilon",
            "alpha": a.alpha,
            "gamma": gamma,
            "p_fail": p_fail,
            "eps": epsilon_bound(a.alpha, f.lipschitz(), a.h, n, gamma, p_fail)?,
        }),
        BoundKind::Quantile => {
            let delta = a
                .delta
                .ok_or_else(|| invalid("--delta is required for the quantile bound"))?;
            json!({
                "kind": "quantile",
                "gamma": gamma,
                "delta": delta,
                "bound": quantile_bound_shepard(&params, delta)?,
            })
        }
    };
    print_json(out, &v)
}

fn cmd_experiment(a: &ExperimentArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.flags.config()?;
    fs::create_dir_all(&a.flags.out)?;
    let (records, rows) = run_experiment(&cfg)?;
    let rec_path = a.flags.out.join("records.csv");
    let agg_path = a.flags.out.join("aggregates.csv");
    io::write_records_csv(&records, &rec_path)?;
    io::write_aggregates_csv(&rows, &agg_path)?;
    print_json(
        out,
        &json!({ "records": rec_path.display().to_string(), "aggregates": agg_path.display().to_string() }),
    )
}

/// Mesh-norm event curve with both analytic curves, as plotted in the event figure.
pub fn event_rows(cfg: &ExperimentConfig) -> Result<Vec<EventRow>> {
    let n = cfg.n as u64;
    estimate_event_probability(cfg.n, &cfg.h_grid, cfg.trials, cfg.seed)?
        .into_iter()
        .map(|(h, empirical)| {
            let upper = match gamma_upper(n, h) {
                Ok(g) => g.value,
                Err(Error::NumericInstability { estimate, .. }) => estimate,
                Err(e) => return Err(e),
            };
            Ok(EventRow {
                h,
                empirical,
                gamma_upper: upper,
                gamma_gumbel: gamma_gumbel(n, h)?.value,
            })
        })
        .collect()
}

fn cmd_figure(a: &FigureArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.flags.config()?;
    let dir = &a.flags.out;
    fs::create_dir_all(dir)?;
    let mut files = BTreeMap::new();
    let which = if a.which == "3" {
        io::write_events_csv(&event_rows(&cfg)?, dir.join("fig3_event.csv"))?;
        files.insert("event".to_string(), "fig3_event.csv".to_string());
        "fig3"
    } else {
        let (records, rows) = run_experiment(&cfg)?;
        io::write_records_csv(&records, dir.join("fig4_records.csv"))?;
        io::write_aggregates_csv(&rows, dir.join("fig4_aggregates.csv"))?;
        files.insert("records".to_string(), "fig4_records.csv".to_string());
        files.insert("aggregates".to_string(), "fig4_aggregates.csv".to_string());
        "fig4"
    };
    let manifest_path = dir.join(format!("{which}_manifest.json"));
    io::write_manifest(
        &Manifest {
            which: which.into(),
            files,
            config: cfg,
        },
        &manifest_path,
    )?;
    print_json(
        out,
        &json!({ "manifest": manifest_path.display().to_string() }),
    )
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Cv(a) => cmd_cv(a, out),
        Command::Risk(a) => cmd_risk(a, out),
        Command::Meshnorm(a) => cmd_meshnorm(a, out),
        Command::Gamma(a) => cmd_gamma(a, out),
        Command::Bound(a) => cmd_bound(a, out),
        Command::Experiment(a) => cmd_experiment(a, out),
        Command::Figure(a) => cmd_figure(a, out),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NumericInstability { .. } => 2,
        _ => 1,
    }
}

pub fn error_json(e: &Error) -> serde_json::Value {
    let mut v = json!({ "error": e.kind(), "message": e.to_string() });
    match e {
        Error::NumericInstability { max_bits, estimate } => {
            v["max_bits"] = json!(max_bits);
            v["estimate"] = json!(estimate);
        }
        Error::IsolatedNode { index } => v["index"] = json!(index),
        Error::UncoveredPoint { x } => v["x"] = json!(x),
        _ => {}
    }
    v
}

/// Parses `argv` (program name first) and runs the subcommand, writing to the given
/// streams. Returns the process exit code.
pub fn run_with(argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let v = json!({ "error": "usage", "message": e.to_string().trim_end() });
            let _ = writeln!(err, "{v}");
            return 1;
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", error_json(&e));
            exit_code(&e)
        }
    }
}

/// [`run_with`] on the process's stdout and stderr.
pub fn parse_and_dispatch(argv: &[String]) -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let argv: Vec<String> = std::iter::once("shepard-cv")
            .chain(args.iter().copied())
            .map(String::from)
            .collect();
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_with(&argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.26012294878), "0.260122");
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(1.0), "1");
        assert_eq!(format_sig6(0.9999996), "0.999999");
        assert_eq!(format_sig6(1.5e-8), "0.000000015");
        assert_eq!(format_sig6(123456.7), "123456");
        assert_eq!(format_sig6(12345678.0), "12345600");
        assert_eq!(format_sig6(-2.5), "-2.5");
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(
            run(&["gamma", "--n", "10", "--h", "1.5"]),
            (0, "0.260122\n".into(), String::new())
        );
        assert_eq!(run(&["gamma", "--n", "10", "--h", "0.5"]).1, "0\n");
    }

    #[test]
    fn instability_exits_2() {
        let (code, _, err) = run(&["gamma", "--n", "10000", "--h", "2500", "--max-bits", "128"]);
        assert_eq!(code, 2);
        let v: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "numeric_instability");
    }

    #[test]
    fn validation_errors_exit_1() {
        assert_eq!(run(&["gamma", "--n", "10", "--h", "-1"]).0, 1);
        assert_eq!(
            run(&["gamma", "--n", "10", "--h", "1", "--bogus", "3"]).0,
            1
        );
        assert_eq!(run(&["cv", "--n", "10"]).0, 1);
        let (code, _, err) = run(&[
            "bound", "--kind", "risk", "--n", "100", "--h", "10", "--gamma", "0.5", "--eps", "0",
        ]);
        assert_eq!(code, 1);
        assert!(err.contains("validity_violation"));
    }
}
