//! Command implementations. Each returns the text for stdout and an exit
//! status; `main` only parses arguments and prints.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use abfactor::bounds::{
    fixed_null_factor, maxmin_bayes_factor_bound, welch_t_binomial, SampleBoundResult,
};
use abfactor::divergences::{binary_entropy, cross_entropy, js_divergence, kl_divergence};
use abfactor::oracle::{self, GridSpec, RegionReport};
use abfactor::{Error as ModelError, ExperimentData, Proportion};
use thiserror::Error;

use crate::format::{ceil_trials, fmt_real};

pub const BATCH_INPUT_HEADER: &str = "experiment_id,r,k1,k2";
pub const BATCH_OUTPUT_HEADER: &str =
    "experiment_id,theta1,theta2,js,t_welch,maxmin_bound,welch_bound";
pub const FIGURE_HEADER: &str = "p,p_uplifted,bayesian_r,frequentist_r";
pub const REGION_HEADER: &str = "t1,t2,lhs,rhs,holds";

/// Default `abs_log_gap` threshold for `verify theorem`.
pub const DEFAULT_THEOREM_TOLERANCE: f64 = 1e-6;
/// Environment variable overriding [`DEFAULT_THEOREM_TOLERANCE`]; `--tolerance` wins over it.
pub const TOLERANCE_ENV: &str = "ABFACTOR_VERIFY_TOLERANCE";
pub const DEFAULT_THEOREM_RESOLUTION: usize = 999;
pub const DEFAULT_REGION_RESOLUTION: usize = 99;
pub const DEFAULT_CONVEXITY_SAMPLES: usize = 10_000;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Model(#[from] ModelError),

    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        EXIT_USAGE
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// What a command prints and how the process exits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub status: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            stdout,
            status: EXIT_OK,
        }
    }
}

pub fn proportion(name: &str, value: f64) -> CliResult<Proportion> {
    Proportion::new(value)
        .map_err(|_| CliError::Usage(format!("{name} must lie in [0, 1], got {value}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Entropy,
    Cross,
    Kl,
    Js,
}

pub fn divergence(measure: Measure, p1: f64, p2: Option<f64>) -> CliResult<Outcome> {
    let p1 = proportion("p1", p1)?;
    let second = || -> CliResult<Proportion> {
        let p2 = p2.ok_or_else(|| CliError::Usage("this measure needs --p2".into()))?;
        proportion("p2", p2)
    };
    let value = match measure {
        Measure::Entropy => binary_entropy(p1),
        Measure::Cross => cross_entropy(p1, second()?),
        Measure::Kl => kl_divergence(p1, second()?),
        Measure::Js => js_divergence(p1, second()?),
    };
    Ok(Outcome::ok(format!("{}\n", fmt_real(value))))
}

/// Welch statistic and `exp(-t^2/2)` for reporting. Data with both rates on
/// the boundary has zero variance: equal rates report `t = 0`, opposite
/// rates report `t = +-inf` and a zero bound.
pub fn welch_for_report(r: u64, t1: Proportion, t2: Proportion) -> (f64, f64) {
    match welch_t_binomial(r, t1, t2) {
        Ok(t) => (t, (-0.5 * t * t).exp()),
        Err(_) if t1 == t2 => (0.0, 1.0),
        Err(_) => {
            let t = if t1 > t2 {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            };
            (t, 0.0)
        }
    }
}

struct BoundRow {
    theta1: Proportion,
    theta2: Proportion,
    js: f64,
    t_welch: f64,
    maxmin_bound: f64,
    welch_bound: f64,
}

fn bound_row(data: &ExperimentData) -> BoundRow {
    let (theta1, theta2) = (data.theta1(), data.theta2());
    let (t_welch, welch_bound) = welch_for_report(data.trials(), theta1, theta2);
    BoundRow {
        theta1,
        theta2,
        js: js_divergence(theta1, theta2),
        t_welch,
        maxmin_bound: maxmin_bayes_factor_bound(data.trials(), theta1, theta2),
        welch_bound,
    }
}

fn experiment(r: u64, k1: u64, k2: u64) -> CliResult<ExperimentData> {
    ExperimentData::new(r, k1, k2).map_err(|_| {
        CliError::Usage(format!(
            "need r >= 1 and k1, k2 <= r; got r={r} k1={k1} k2={k2}"
        ))
    })
}

pub fn bound(r: u64, k1: u64, k2: u64, x0: Option<f64>) -> CliResult<Outcome> {
    let data = experiment(r, k1, k2)?;
    let x0 = x0.map(|v| proportion("x0", v)).transpose()?;
    let row = bound_row(&data);
    let mut out = String::new();
    let mut kv = |k: &str, v: f64| writeln!(out, "{k}={}", fmt_real(v)).unwrap();
    kv("theta1", row.theta1.get());
    kv("theta2", row.theta2.get());
    kv("js", row.js);
    kv("t_welch", row.t_welch);
    kv("maxmin_bound", row.maxmin_bound);
    kv("welch_bound", row.welch_bound);
    if let Some(x0) = x0 {
        kv("x0", x0.get());
        kv(
            "fixed_null_factor",
            fixed_null_factor(r, row.theta1, row.theta2, x0),
        );
    }
    Ok(Outcome::ok(out))
}

/// One parsed input row of a batch file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentRecord {
    pub experiment_id: String,
    pub data: ExperimentData,
}

/// Parses a batch input file. Errors name the first bad line (1-based,
/// header is line 1).
pub fn parse_batch(input: &str) -> CliResult<Vec<ExperimentRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(h) => h.map_err(|e| malformed(1, e.to_string()))?,
        None => {
            return Err(malformed(
                1,
                format!("missing header `{BATCH_INPUT_HEADER}`"),
            ))
        }
    };
    if header.iter().collect::<Vec<_>>().join(",") != BATCH_INPUT_HEADER {
        return Err(malformed(
            1,
            format!("expected header `{BATCH_INPUT_HEADER}`"),
        ));
    }

    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 4 {
            return Err(malformed(
                line,
                format!("expected 4 fields, found {}", rec.len()),
            ));
        }
        let id = &rec[0];
        if id.is_empty() {
            return Err(malformed(line, "empty experiment_id".into()));
        }
        if !seen.insert(id.to_string()) {
            return Err(malformed(line, format!("duplicate experiment_id `{id}`")));
        }
        let count = |idx: usize, name: &str| -> CliResult<u64> {
            rec[idx].parse::<u64>().map_err(|_| {
                malformed(
                    line,
                    format!("{name} `{}` is not a nonnegative integer", &rec[idx]),
                )
            })
        };
        let (r, k1, k2) = (count(1, "r")?, count(2, "k1")?, count(3, "k2")?);
        let data = ExperimentData::new(r, k1, k2).map_err(|_| {
            malformed(
                line,
                format!("need r >= 1 and k1, k2 <= r; got r={r} k1={k1} k2={k2}"),
            )
        })?;
        out.push(ExperimentRecord {
            experiment_id: id.to_string(),
            data,
        });
    }
    Ok(out)
}

fn malformed(line: u64, message: String) -> CliError {
    CliError::Malformed { line, message }
}

/// Renders the batch output CSV for already-validated records.
pub fn render_batch(records: &[ExperimentRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(BATCH_OUTPUT_HEADER);
    out.push('\n');
    for rec in records {
        let row = bound_row(&rec.data);
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            rec.experiment_id,
            fmt_real(row.theta1.get()),
            fmt_real(row.theta2.get()),
            fmt_real(row.js),
            fmt_real(row.t_welch),
            fmt_real(row.maxmin_bound),
            fmt_real(row.welch_bound),
        )
        .unwrap();
    }
    out
}

// Only touches `path` once the full contents are known; a failed write
// leaves no partial file behind.
fn write_output(path: &Path, contents: &str) -> CliResult<()> {
    if let Err(e) = fs::write(path, contents) {
        let _ = fs::remove_file(path);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

pub fn batch(input: &Path, output: &Path) -> CliResult<Outcome> {
    let text = fs::read_to_string(input).map_err(|e| CliError::io(input, e))?;
    let records = match parse_batch(&text) {
        Ok(r) => r,
        Err(e) => {
            if output.exists() && output != input {
                let _ = fs::remove_file(output);
            }
            return Err(e);
        }
    };
    write_output(output, &render_batch(&records))?;
    Ok(Outcome::ok(format!("rows={}\n", records.len())))
}

fn uplifted(p: f64, uplift: f64) -> CliResult<(Proportion, Proportion)> {
    if !(p > 0.0 && p < 1.0) {
        return Err(CliError::Usage(format!(
            "baseline rate {p} must lie in (0, 1)"
        )));
    }
    let q = p * (1.0 + uplift);
    if !(q > 0.0 && q < 1.0) {
        return Err(CliError::Usage(format!(
            "uplifted rate {p} * (1 + {uplift}) = {q} leaves (0, 1)"
        )));
    }
    if uplift == 0.0 {
        return Err(CliError::Usage("uplift must be nonzero".into()));
    }
    Ok((proportion("p", p)?, proportion("p_uplifted", q)?))
}

pub fn samplesize(p: f64, uplift: f64, multiplier: f64) -> CliResult<Outcome> {
    let (base, lifted) = uplifted(p, uplift)?;
    let res = SampleBoundResult::new(base, lifted, multiplier)?;
    let mut out = String::new();
    writeln!(out, "p={}", fmt_real(base.get())).unwrap();
    writeln!(out, "p_uplifted={}", fmt_real(lifted.get())).unwrap();
    writeln!(out, "multiplier={}", fmt_real(multiplier)).unwrap();
    writeln!(out, "bayesian_r={}", ceil_trials(res.bayesian_r)).unwrap();
    writeln!(out, "frequentist_r={}", ceil_trials(res.frequentist_r)).unwrap();
    writeln!(out, "bayesian_r_raw={}", fmt_real(res.bayesian_r)).unwrap();
    writeln!(out, "frequentist_r_raw={}", fmt_real(res.frequentist_r)).unwrap();
    Ok(Outcome::ok(out))
}

/// One row of the sample-size sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub p: Proportion,
    pub p_uplifted: Proportion,
    pub bayesian_r: f64,
    pub frequentist_r: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub p_start: f64,
    pub p_end: f64,
    pub steps: usize,
    pub uplift: f64,
    pub multiplier: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            p_start: 0.01,
            p_end: 0.5,
            steps: 50,
            uplift: 0.1,
            multiplier: abfactor::bounds::DEFAULT_MULTIPLIER,
        }
    }
}

pub fn sweep(sweep_spec: &SweepSpec) -> CliResult<Vec<SweepRow>> {
    if sweep_spec.steps == 0 {
        return Err(CliError::Usage("steps must be positive".into()));
    }
    (0..sweep_spec.steps)
        .map(|i| {
            let p = if i == 0 {
                sweep_spec.p_start
            } else if i + 1 == sweep_spec.steps {
                sweep_spec.p_end
            } else {
                sweep_spec.p_start
                    + (sweep_spec.p_end - sweep_spec.p_start) * i as f64
                        / (sweep_spec.steps - 1) as f64
            };
            let (base, lifted) = uplifted(p, sweep_spec.uplift)?;
            let res = SampleBoundResult::new(base, lifted, sweep_spec.multiplier)?;
            Ok(SweepRow {
                p: base,
                p_uplifted: lifted,
                bayesian_r: res.bayesian_r,
                frequentist_r: res.frequentist_r,
            })
        })
        .collect()
}

pub fn render_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(FIGURE_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_real(row.p.get()),
            fmt_real(row.p_uplifted.get()),
            fmt_real(row.bayesian_r),
            fmt_real(row.frequentist_r)
        )
        .unwrap();
    }
    out
}

pub fn figure(sweep_spec: &SweepSpec, output: &Path) -> CliResult<Outcome> {
    let rows = sweep(sweep_spec)?;
    write_output(output, &render_sweep(&rows))?;
    Ok(Outcome::ok(format!("rows={}\n", rows.len())))
}

/// Tolerance from the flag, else the environment, else the default.
pub fn resolve_tolerance(flag: Option<f64>, env: Option<&str>) -> CliResult<f64> {
    let tol = match (flag, env) {
        (Some(t), _) => t,
        (None, Some(s)) => s
            .trim()
            .parse::<f64>()
            .map_err(|_| CliError::Usage(format!("{TOLERANCE_ENV}=`{s}` is not a number")))?,
        (None, None) => DEFAULT_THEOREM_TOLERANCE,
    };
    if tol.is_nan() || tol < 0.0 {
        return Err(CliError::Usage(format!(
            "tolerance must be nonnegative, got {tol}"
        )));
    }
    Ok(tol)
}

pub fn verify_theorem(
    r: u64,
    k1: u64,
    k2: u64,
    resolution: usize,
    tolerance: f64,
) -> CliResult<Outcome> {
    let data = experiment(r, k1, k2)?;
    let grid = GridSpec::unit(resolution)?;
    let mut out = String::new();
    let result = match oracle::grid_maxmin(&data, &grid) {
        Ok(res) => res,
        Err(e @ ModelError::NotConverged { .. }) => {
            writeln!(out, "status=not_converged").unwrap();
            writeln!(out, "error={e}").unwrap();
            return Ok(Outcome {
                stdout: out,
                status: EXIT_VERIFICATION_FAILED,
            });
        }
        Err(e) => return Err(e.into()),
    };
    let passed = result.abs_log_gap <= tolerance;
    let mut kv = |k: &str, v: f64| writeln!(out, "{k}={}", fmt_real(v)).unwrap();
    kv("best_null", result.best_null.p.get());
    kv("best_alt_p", result.best_alt.p.get());
    kv("best_alt_q", result.best_alt.q.get());
    kv("factor", result.factor);
    kv("closed_form", result.closed_form);
    kv("log_factor", result.log_factor);
    kv("log_closed_form", result.log_closed_form);
    kv("abs_log_gap", result.abs_log_gap);
    kv("tolerance", tolerance);
    writeln!(out, "status={}", if passed { "pass" } else { "fail" }).unwrap();
    Ok(Outcome {
        stdout: out,
        status: if passed {
            EXIT_OK
        } else {
            EXIT_VERIFICATION_FAILED
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    KlQuadratic,
    JsWelch,
}

pub fn render_region(report: &RegionReport) -> String {
    let mut out = String::with_capacity(48 * (report.rows.len() + 1));
    out.push_str(REGION_HEADER);
    out.push('\n');
    for row in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_real(row.t1.get()),
            fmt_real(row.t2.get()),
            fmt_real(row.lhs),
            fmt_real(row.rhs),
            row.holds
        )
        .unwrap();
    }
    out
}

/// Region maps report violations; they are findings, so the exit status is 0.
pub fn verify_region(region: Region, resolution: usize, output: &Path) -> CliResult<Outcome> {
    let grid = GridSpec::interior(resolution)?;
    let report = match region {
        Region::KlQuadratic => oracle::map_kl_quadratic_region(&grid)?,
        Region::JsWelch => oracle::map_js_welch_region(&grid)?,
    };
    write_output(output, &render_region(&report))?;
    Ok(Outcome::ok(format!(
        "total={} violations={}\n",
        report.total, report.violations
    )))
}

pub fn verify_convexity(samples: usize, seed: u64) -> CliResult<Outcome> {
    if samples == 0 {
        return Err(CliError::Usage("samples must be positive".into()));
    }
    let passed = oracle::verify_convexity(samples, seed);
    Ok(Outcome {
        stdout: format!(
            "samples={samples} seed={seed} status={}\n",
            if passed { "pass" } else { "fail" }
        ),
        status: if passed {
            EXIT_OK
        } else {
            EXIT_VERIFICATION_FAILED
        },
    })
}
