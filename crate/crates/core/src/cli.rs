//! Command-line front end: `thresholds`, `solve`, `sweep` and `verify`.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{LambdaChoice, RunConfig};
use crate::energy::residual_p;
use crate::error::{Error, Result};
use crate::grid::{read_field, write_field, Field};
use crate::solver::{find_multiple, lambda_sweep, sweep_lambdas, NormSample};
use crate::thresholds::{estimate_sobolev_constants, LowerBoundConstants, Thresholds};
use crate::truncation::ProblemParams;
use crate::verify::{
    check_decay, check_integrability, check_negative_level, check_ratio_bound, check_recovery,
    CheckResult,
};

#[derive(Debug, Parser)]
#[command(
    name = "curvcrit",
    version,
    about = "Truncated mean-curvature problems with critical growth"
)]
pub struct Cli {
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one configuration key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the constants and thresholds as one CSV row.
    Thresholds(GridArgs),
    /// Search for multiple sign pairs of solutions.
    Solve(SolveArgs),
    /// Follow the ground state over decreasing λ.
    Sweep(SweepArgs),
    /// Check the output of `solve` or `sweep`.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Interior points per axis.
    #[arg(long)]
    pub n: Option<usize>,
    /// λ, or `auto` for λ*/4.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Dimension of the largest seed subspace.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// First λ, or `auto` for λ*/4.
    #[arg(long = "lambda-max")]
    pub lambda_max: Option<String>,
    #[arg(long)]
    pub factor: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Directory written by `solve` or `sweep`.
    #[arg(long = "in")]
    pub input: PathBuf,
}

/// Process exit status.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::LambdaOutOfRange { .. } | Error::Parse { .. } => 2,
        _ => 1,
    }
}

fn apply(cfg: &mut RunConfig, key: &str, value: Option<impl ToString>) -> Result<()> {
    match value {
        Some(v) => cfg.set(key, &v.to_string()),
        None => Ok(()),
    }
}

fn apply_path(cfg: &mut RunConfig, out: &Option<PathBuf>) {
    if let Some(o) = out {
        cfg.out = o.clone();
    }
}

/// Base configuration from `--config` and `--set`.
pub fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::parse(&fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    for kv in &cli.overrides {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config {
            key: kv.clone(),
            message: "expected KEY=VALUE".into(),
        })?;
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

/// Runs a parsed command line; returns the exit status.
pub fn run(cli: Cli) -> Result<i32> {
    let mut cfg = load_config(&cli)?;
    match cli.command {
        Command::Thresholds(a) => {
            apply(&mut cfg, "n", a.n)?;
            apply(&mut cfg, "lambda", a.lambda)?;
            apply_path(&mut cfg, &a.out);
            let (_, th) = prepare(&cfg, cfg.lambda)?;
            let row = thresholds_csv(&cfg, &th)?;
            print!("{row}");
            if a.out.is_some() {
                fs::create_dir_all(&cfg.out)?;
                fs::write(cfg.out.join("thresholds.csv"), row)?;
            }
            Ok(0)
        }
        Command::Solve(a) => {
            apply(&mut cfg, "n", a.grid.n)?;
            apply(&mut cfg, "lambda", a.grid.lambda)?;
            apply(&mut cfg, "k", a.k)?;
            apply(&mut cfg, "tol", a.tol)?;
            apply_path(&mut cfg, &a.grid.out);
            solve(cfg)
        }
        Command::Sweep(a) => {
            apply(&mut cfg, "n", a.n)?;
            apply(&mut cfg, "lambda_max", a.lambda_max)?;
            apply(&mut cfg, "factor", a.factor)?;
            apply(&mut cfg, "steps", a.steps)?;
            apply_path(&mut cfg, &a.out);
            sweep(cfg)
        }
        Command::Verify(a) => verify_dir(&a.input),
    }
}

/// Sobolev constants on the working grid and thresholds at the chosen λ,
/// which must lie in `(0, λ*)`.
pub fn prepare(cfg: &RunConfig, lambda: LambdaChoice) -> Result<(ProblemParams, Thresholds)> {
    let base = cfg.params(0.0)?;
    let sobolev = estimate_sobolev_constants(&base.domain, cfg.q, &cfg.sobolev_options())?;
    let k = LowerBoundConstants::new(&base, sobolev);
    let th0 = Thresholds::compute(&k, 0.0, cfg.r, base.domain.measure())?;
    let lambda = lambda.resolve(th0.lambda_star);
    if !(lambda > 0.0 && lambda < th0.lambda_star) {
        return Err(Error::LambdaOutOfRange {
            lambda,
            lambda_star: th0.lambda_star,
        });
    }
    Ok((base.with_lambda(lambda), th0.at_lambda(lambda)?))
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

const THRESHOLD_COLUMNS: [&str; 14] = [
    "N",
    "q",
    "r",
    "delta",
    "K0",
    "S",
    "Sq",
    "lambda",
    "R0",
    "R1",
    "tau1",
    "tau2",
    "lambda_star",
    "ps_bound",
];

fn thresholds_csv(cfg: &RunConfig, th: &Thresholds) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(THRESHOLD_COLUMNS)?;
    let mut row = vec![cfg.dim.to_string()];
    row.extend(
        [
            cfg.q,
            cfg.r,
            cfg.delta,
            th.constants.k0,
            th.s,
            th.sq,
            th.lambda,
            th.r0,
            th.r1,
            th.tau1,
            th.tau2,
            th.lambda_star,
            th.ps_bound,
        ]
        .map(fmt),
    );
    w.write_record(&row)?;
    Ok(
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
            .expect("ascii csv"),
    )
}

fn write_common(cfg: &RunConfig, th: &Thresholds) -> Result<()> {
    fs::create_dir_all(&cfg.out)?;
    let mut resolved = cfg.clone();
    resolved.lambda = LambdaChoice::Value(th.lambda);
    fs::write(cfg.out.join("config.txt"), resolved.to_text())?;
    fs::write(cfg.out.join("thresholds.csv"), thresholds_csv(cfg, th)?)?;
    Ok(())
}

fn save_field(path: &Path, u: &Field) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_field(&mut w, u)?;
    w.flush()?;
    Ok(())
}

fn solve(cfg: RunConfig) -> Result<i32> {
    let (p, th) = prepare(&cfg, cfg.lambda)?;
    write_common(&cfg, &th)?;
    let set = find_multiple(cfg.k, &p, &th, &cfg.solver_options())?;
    let mut w = csv::Writer::from_path(cfg.out.join("solutions.csv"))?;
    w.write_record([
        "index",
        "lambda",
        "level",
        "I",
        "norm_sq",
        "phi",
        "residual",
        "residual_p",
        "linf",
        "supgrad",
        "iterations",
        "file",
    ])?;
    for (i, rec) in set.records.iter().enumerate() {
        let file = format!("solution_{i}.field");
        save_field(&cfg.out.join(&file), &rec.u)?;
        let r = &rec.report;
        let mut row = vec![i.to_string()];
        row.extend(
            [
                rec.lambda,
                rec.level,
                r.i,
                r.norm_sq,
                r.phi,
                r.residual_norm,
                residual_p(&rec.u, &p),
                rec.u.linf_norm(),
                rec.u.sup_grad(),
            ]
            .map(fmt),
        );
        row.push(rec.iterations.to_string());
        row.push(file);
        w.write_record(&row)?;
    }
    w.flush()?;
    for (i, e) in &set.failures {
        eprintln!("seed {i}: {e}");
    }
    eprintln!(
        "{} sign pair(s) written to {}",
        set.records.len(),
        cfg.out.display()
    );
    Ok(0)
}

const SWEEP_COLUMNS: [&str; 8] = [
    "lambda", "h1", "linf", "supgrad", "ratio", "J", "residual", "R0",
];

fn sweep(cfg: RunConfig) -> Result<i32> {
    let (p, th) = prepare(&cfg, cfg.lambda_max)?;
    write_common(&cfg, &th)?;
    let lambdas = sweep_lambdas(th.lambda, cfg.factor, cfg.steps);
    let points = lambda_sweep(&lambdas, &p, &th, &cfg.solver_options());
    let mut w = csv::Writer::from_path(cfg.out.join("sweep.csv"))?;
    w.write_record(SWEEP_COLUMNS)?;
    let mut failed = false;
    for (j, pt) in points.iter().enumerate() {
        match &pt.outcome {
            Ok(rec) => {
                save_field(&cfg.out.join(format!("sweep_{j}.field")), &rec.u)?;
                let s = NormSample::of(rec, pt.thresholds.r0);
                w.write_record(
                    [
                        pt.lambda,
                        s.h1,
                        s.linf,
                        s.supgrad,
                        s.ratio(),
                        rec.level,
                        rec.report.residual_norm,
                        s.r0,
                    ]
                    .map(fmt),
                )?;
            }
            Err(e) => {
                failed = true;
                eprintln!("lambda {}: {e}", pt.lambda);
                let mut row = vec![fmt(pt.lambda)];
                row.extend(std::iter::repeat_n("NaN".to_string(), 6));
                row.push(fmt(pt.thresholds.r0));
                w.write_record(&row)?;
            }
        }
    }
    w.flush()?;
    Ok(if failed { 1 } else { 0 })
}

fn load_field(path: &Path) -> Result<Field> {
    read_field(BufReader::new(File::open(path)?))
}

fn parse_num(s: &str, line: usize) -> Result<f64> {
    s.parse().map_err(|e| Error::Parse {
        line,
        message: format!("`{s}`: {e}"),
    })
}

struct VerifyRow {
    source: String,
    lambda: f64,
    check: CheckResult,
}

/// Re-derives the thresholds of a run directory and writes `verify.csv`.
pub fn verify_dir(dir: &Path) -> Result<i32> {
    let cfg = RunConfig::parse(&fs::read_to_string(dir.join("config.txt"))?)?;
    let lambda = match cfg.lambda {
        LambdaChoice::Value(v) => v,
        LambdaChoice::Auto => {
            return Err(Error::Config {
                key: "lambda".into(),
                message: "run directory must record λ".into(),
            })
        }
    };
    let (p, th) = prepare(&cfg, LambdaChoice::Value(lambda))?;
    let mut rows = Vec::new();

    let solutions = dir.join("solutions.csv");
    if solutions.exists() {
        let mut r = csv::Reader::from_path(&solutions)?;
        let headers = r.headers()?.clone();
        let file_col = headers
            .iter()
            .position(|h| h == "file")
            .ok_or(Error::Parse {
                line: 1,
                message: "no file column".into(),
            })?;
        for rec in r.records() {
            let rec = rec?;
            let u = load_field(&dir.join(&rec[file_col]))?;
            let source = rec[file_col].to_string();
            rows.push(VerifyRow {
                source: source.clone(),
                lambda,
                check: negative_level_or_fail(&u, &p, &th),
            });
            rows.push(VerifyRow {
                source,
                lambda,
                check: check_recovery(&u, &p, cfg.tol),
            });
        }
    }

    let sweep = dir.join("sweep.csv");
    if sweep.exists() {
        let mut r = csv::Reader::from_path(&sweep)?;
        let mut samples = Vec::new();
        let mut fields = Vec::new();
        for (j, rec) in r.records().enumerate() {
            let rec = rec?;
            let lambda_j = parse_num(&rec[0], j + 2)?;
            let file = format!("sweep_{j}.field");
            let path = dir.join(&file);
            let pj = p.with_lambda(lambda_j);
            let thj = th.at_lambda(lambda_j)?;
            if !path.exists() {
                rows.push(VerifyRow {
                    source: file,
                    lambda: lambda_j,
                    check: CheckResult {
                        name: "descent",
                        passed: false,
                        measured: vec![],
                        detail: "no solution".into(),
                    },
                });
                continue;
            }
            let u = load_field(&path)?;
            rows.push(VerifyRow {
                source: file.clone(),
                lambda: lambda_j,
                check: negative_level_or_fail(&u, &pj, &thj),
            });
            rows.push(VerifyRow {
                source: file,
                lambda: lambda_j,
                check: check_recovery(&u, &pj, cfg.tol),
            });
            samples.push(NormSample {
                lambda: lambda_j,
                h1: u.h1_norm_sq().sqrt(),
                linf: u.linf_norm(),
                supgrad: u.sup_grad(),
                r0: thj.r0,
            });
            fields.push(u);
        }
        let last = samples.last().map_or(lambda, |s| s.lambda);
        for check in [check_ratio_bound(&samples), check_decay(&samples)] {
            let check = check.unwrap_or_else(|e| CheckResult {
                name: "sweep",
                passed: false,
                measured: vec![],
                detail: e.to_string(),
            });
            rows.push(VerifyRow {
                source: "sweep.csv".into(),
                lambda: last,
                check,
            });
        }
        if !fields.is_empty() {
            let refs: Vec<&Field> = fields.iter().collect();
            rows.push(VerifyRow {
                source: "sweep.csv".into(),
                lambda: last,
                check: check_integrability(&refs)?,
            });
        }
        // largest λ below which every record recovers the untruncated problem
        let mut hat = f64::NAN;
        for row in rows
            .iter()
            .rev()
            .filter(|r| r.check.name == "recovery" && r.source.starts_with("sweep_"))
        {
            if !row.check.passed {
                break;
            }
            hat = row.lambda;
        }
        rows.push(VerifyRow {
            source: "sweep.csv".into(),
            lambda: hat,
            check: CheckResult {
                name: "recovery_threshold",
                passed: true,
                measured: vec![("lambda_hat", hat)],
                detail: String::new(),
            },
        });
    }

    let mut w = csv::Writer::from_path(dir.join("verify.csv"))?;
    w.write_record(["check", "source", "lambda", "passed", "measured", "detail"])?;
    let mut all = true;
    for row in &rows {
        all &= row.check.passed;
        let measured: Vec<String> = row
            .check
            .measured
            .iter()
            .map(|(k, v)| format!("{k}={}", fmt(*v)))
            .collect();
        w.write_record([
            row.check.name.to_string(),
            row.source.clone(),
            fmt(row.lambda),
            row.check.passed.to_string(),
            measured.join(";"),
            row.check.detail.clone(),
        ])?;
    }
    w.flush()?;
    eprintln!(
        "{} checks, {}",
        rows.len(),
        if all { "all passed" } else { "some failed" }
    );
    Ok(if all { 0 } else { 1 })
}

fn negative_level_or_fail(u: &Field, p: &ProblemParams, th: &Thresholds) -> CheckResult {
    check_negative_level(u, p, th).unwrap_or_else(|e| CheckResult {
        name: "negative_level",
        passed: false,
        measured: vec![],
        detail: e.to_string(),
    })
}
