use std::path::PathBuf;
use std::process::ExitCode;

use abfactor::oracle::DEFAULT_SEED;
use abfactor_cli::commands::{
    self, Measure, Region, SweepSpec, DEFAULT_CONVEXITY_SAMPLES, DEFAULT_REGION_RESOLUTION,
    DEFAULT_THEOREM_RESOLUTION, EXIT_USAGE, TOLERANCE_ENV,
};
use abfactor_cli::{CliError, Outcome};
use clap::{Parser, Subcommand, ValueEnum};

/// Bayes-factor bounds and sample sizes for binomial A/B tests.
///
/// Exit status: 0 on success, 1 when a verification fails, 2 on usage or
/// input errors.
#[derive(Debug, Parser)]
#[command(name = "abfactor", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeasureArg {
    Entropy,
    Cross,
    Kl,
    Js,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print an entropy or divergence in nats.
    Divergence {
        #[arg(long, value_enum)]
        measure: MeasureArg,
        #[arg(long)]
        p1: f64,
        /// Ignored for `entropy`.
        #[arg(long)]
        p2: Option<f64>,
    },
    /// Report rates, JS, Welch t and both Bayes-factor bounds for one experiment.
    Bound {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        k1: u64,
        #[arg(long)]
        k2: u64,
        /// Also report the factor for the point null p = q = x0.
        #[arg(long)]
        x0: Option<f64>,
    },
    /// Process a CSV of experiments (`experiment_id,r,k1,k2`).
    Batch {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Bayesian and frequentist trials per group for a relative uplift.
    Samplesize {
        #[arg(long)]
        p: f64,
        #[arg(long, allow_negative_numbers = true)]
        uplift: f64,
        #[arg(long, default_value_t = abfactor::bounds::DEFAULT_MULTIPLIER)]
        multiplier: f64,
    },
    /// Write both sample-size curves over a sweep of baseline rates.
    Figure {
        #[arg(long, default_value_t = 0.01)]
        p_start: f64,
        #[arg(long, default_value_t = 0.5)]
        p_end: f64,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        uplift: f64,
        #[arg(long, default_value_t = abfactor::bounds::DEFAULT_MULTIPLIER)]
        multiplier: f64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Numerical verification runs.
    Verify {
        #[command(subcommand)]
        check: Verify,
    },
}

#[derive(Debug, Subcommand)]
enum Verify {
    /// Grid search over equal-rate nulls versus the closed form exp(-2r JS).
    Theorem {
        #[arg(long)]
        r: u64,
        #[arg(long)]
        k1: u64,
        #[arg(long)]
        k2: u64,
        #[arg(long, default_value_t = DEFAULT_THEOREM_RESOLUTION)]
        resolution: usize,
        /// Maximum allowed |ln factor - ln closed form|. Defaults to
        /// $ABFACTOR_VERIFY_TOLERANCE, then 1e-6.
        #[arg(long)]
        tolerance: Option<f64>,
    },
    /// Map where KL(t, p) >= (t - p)^2 / (2 t (1 - t)) holds.
    RegionKl {
        #[arg(long, default_value_t = DEFAULT_REGION_RESOLUTION)]
        resolution: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Map where JS(t1, t2) >= t_Welch^2 / (4r) holds.
    RegionJs {
        #[arg(long, default_value_t = DEFAULT_REGION_RESOLUTION)]
        resolution: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Randomized convexity check of the cross-entropy in its second argument.
    Convexity {
        #[arg(long, default_value_t = DEFAULT_CONVEXITY_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Divergence { measure, p1, p2 } => {
            let measure = match measure {
                MeasureArg::Entropy => Measure::Entropy,
                MeasureArg::Cross => Measure::Cross,
                MeasureArg::Kl => Measure::Kl,
                MeasureArg::Js => Measure::Js,
            };
            commands::divergence(measure, p1, p2)
        }
        Command::Bound { r, k1, k2, x0 } => commands::bound(r, k1, k2, x0),
        Command::Batch { input, output } => commands::batch(&input, &output),
        Command::Samplesize {
            p,
            uplift,
            multiplier,
        } => commands::samplesize(p, uplift, multiplier),
        Command::Figure {
            p_start,
            p_end,
            steps,
            uplift,
            multiplier,
            output,
        } => commands::figure(
            &SweepSpec {
                p_start,
                p_end,
                steps,
                uplift,
                multiplier,
            },
            &output,
        ),
        Command::Verify { check } => match check {
            Verify::Theorem {
                r,
                k1,
                k2,
                resolution,
                tolerance,
            } => {
                let env = std::env::var(TOLERANCE_ENV).ok();
                let tolerance = commands::resolve_tolerance(tolerance, env.as_deref())?;
                commands::verify_theorem(r, k1, k2, resolution, tolerance)
            }
            Verify::RegionKl { resolution, output } => {
                commands::verify_region(Region::KlQuadratic, resolution, &output)
            }
            Verify::RegionJs { resolution, output } => {
                commands::verify_region(Region::JsWelch, resolution, &output)
            }
            Verify::Convexity { samples, seed } => commands::verify_convexity(samples, seed),
        },
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
