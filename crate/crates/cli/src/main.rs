use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use softsvd::diagnostics::{csv_header, TraceBuilder};
use softsvd::fixedpoint::{self, ScalarIteration};
use softsvd::solver::{rrss_run_observed, SignPolicy, SolverConfig, SEED_OFFSET_SIGNS};
use softsvd_cli::experiment::{policy_label, run_experiment, ExperimentConfig, InputSource};
use softsvd_cli::gen::{self, GeneratorSpec};
use softsvd_cli::{density_warning, mm};

#[derive(Parser)]
#[command(name = "softsvd", version, about = "Rank-restricted soft SVD solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Factor one matrix and print a short report.
    Solve(SolveArgs),
    /// Run several solver variants from a key=value config file.
    Experiment {
        /// Config file path.
        #[arg(long)]
        config: PathBuf,
    },
    /// Print the orbit of the scalar sign-aligned iteration.
    Fixedpoint {
        /// Singular value of the scalar problem.
        #[arg(long)]
        s: f64,
        /// Shrinkage strength.
        #[arg(long)]
        lambda: f64,
        /// Starting point.
        #[arg(long)]
        s0: f64,
        /// Number of steps to print.
        #[arg(long, default_value_t = 50)]
        iters: usize,
    },
    /// Write a generated matrix to a Matrix Market file.
    Gen {
        /// Generator spec, e.g. `lowrank:500x500:r=10:noise=10.0:seed=1`.
        #[arg(long)]
        spec: String,
        /// Output path.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SolveArgs {
    /// Matrix Market input file.
    #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
    input: Option<PathBuf>,
    /// Generator spec instead of a file.
    #[arg(long)]
    gen: Option<String>,
    #[arg(long)]
    rank: usize,
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iters: usize,
    /// Master seed; initialization and sign seeds derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// One of `colsum`, `raw`, `random`, or `fixed:<pattern>` with a `+`/`-`
    /// per column.
    #[arg(long, default_value = "colsum")]
    sign_policy: String,
    /// Write a per-iteration trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

/// An error paired with the exit code it should produce: 64 for bad
/// invocations, 1 for everything else.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn usage(error: anyhow::Error) -> Self {
        Failure { code: 64, error }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 1, error }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Solve(args) => solve(args),
        Command::Experiment { config } => {
            let cfg = ExperimentConfig::from_file(&config)?;
            let outcome = run_experiment(&cfg)?;
            for s in &outcome.summaries {
                let oracle = outcome
                    .oracle_cost
                    .map_or_else(|| "NA".to_string(), |c| c.to_string());
                println!(
                    "{} converged={} iterations={} final_cost={} oracle_cost={oracle}",
                    s.algorithm, s.converged, s.iterations, s.final_cost
                );
            }
            Ok(outcome.exit_code() as u8)
        }
        Command::Fixedpoint { s, lambda, s0, iters } => {
            fixedpoint_report(s, lambda, s0, iters)?;
            Ok(0)
        }
        Command::Gen { spec, out } => {
            let spec: GeneratorSpec =
                spec.parse().map_err(Failure::usage)?;
            let x = spec.generate();
            mm::write_matrix_market(&out, &x)?;
            println!("wrote {} ({}x{}, {} entries)", out.display(), x.nrows(), x.ncols(), x.nnz());
            Ok(0)
        }
    }
}

fn parse_sign_policy(s: &str, rank: usize, seed: u64) -> Result<SignPolicy> {
    match s {
        "colsum" => Ok(SignPolicy::ColumnSum),
        "raw" => Ok(SignPolicy::Raw),
        "random" => Ok(SignPolicy::Random(seed.wrapping_add(SEED_OFFSET_SIGNS))),
        other => {
            let pattern = other.strip_prefix("fixed:").ok_or_else(|| {
                anyhow!("unknown sign policy `{other}` (colsum, raw, random, fixed:<pattern>)")
            })?;
            let signs = pattern
                .parse()
                .map_err(|e| anyhow!("bad fixed sign pattern `{pattern}`: {e}"))?;
            let policy = SignPolicy::Fixed(signs);
            if let SignPolicy::Fixed(w) = &policy {
                if w.dim() != rank {
                    return Err(anyhow!(
                        "fixed sign pattern has {} columns but rank is {rank}",
                        w.dim()
                    ));
                }
            }
            Ok(policy)
        }
    }
}

fn solve(args: SolveArgs) -> Result<u8, Failure> {
    let sign_policy =
        parse_sign_policy(&args.sign_policy, args.rank, args.seed).map_err(Failure::usage)?;
    let source = match (&args.input, &args.gen) {
        (Some(path), None) => InputSource::File(path.clone()),
        (None, Some(spec)) => InputSource::Generator(
            gen::parse_with_master_seed(spec, args.seed).map_err(Failure::usage)?,
        ),
        _ => unreachable!("clap enforces exactly one of --input/--gen"),
    };
    let x = source.load()?;
    if let Some(warning) = density_warning(&x) {
        eprintln!("warning: {warning}");
    }

    let cfg = SolverConfig {
        rank: args.rank,
        lambda: args.lambda,
        tol: args.tol,
        max_iters: args.max_iters,
        seed: args.seed,
        sign_policy,
        trace_enabled: args.trace.is_some(),
    };
    cfg.validate(x.nrows(), x.ncols()).map_err(|e| Failure::usage(e.into()))?;

    let mut tracer = TraceBuilder::new(&x, cfg.lambda, cfg.rank);
    let observer = args.trace.is_some().then_some(&mut tracer);
    let solution = rrss_run_observed(&x, &cfg, None, observer).map_err(anyhow::Error::from)?;

    if let Some(path) = &args.trace {
        let mut out = format!(
            "# algorithm=rrss r={} lambda={} tol={:e} max_iters={} seed={} policy={}\n",
            cfg.rank,
            cfg.lambda,
            cfg.tol,
            cfg.max_iters,
            cfg.seed,
            policy_label(&cfg.sign_policy)
        );
        out.push_str(&csv_header(cfg.rank));
        out.push('\n');
        for record in tracer.records() {
            out.push_str(&record.to_csv_row());
            out.push('\n');
        }
        std::fs::write(path, out)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::from)?;
    }

    println!("status {}", if solution.converged { "converged" } else { "max-iters" });
    println!("iterations {}", solution.iters);
    println!("final_cost {}", solution.final_cost);
    println!("effective_rank {}", solution.effective_rank());
    let d_sq: Vec<String> =
        solution.d_squared.diag().iter().map(|d| d.to_string()).collect();
    println!("d_sq {}", d_sq.join(" "));

    if solution.converged {
        Ok(0)
    } else {
        eprintln!("did not converge within {} iterations", cfg.max_iters);
        Ok(2)
    }
}

fn fixedpoint_report(s: f64, lambda: f64, s0: f64, iters: usize) -> Result<()> {
    let it = ScalarIteration::new(s, lambda)?;
    let report = fixedpoint::fixed_points(&it);
    println!("# s={s} lambda={lambda} s0={s0} iters={iters}");
    for (name, fp) in [("zero", &report.at_zero), ("gap", &report.at_gap)] {
        println!(
            "# fixed point at {name}: w={} derivative={} {}",
            fp.value,
            fp.derivative,
            if fp.stable { "stable" } else { "unstable" }
        );
    }
    for (k, w) in fixedpoint::iterate(&it, s0, iters)?.iter().enumerate() {
        println!("{k} {w}");
    }
    Ok(())
}
