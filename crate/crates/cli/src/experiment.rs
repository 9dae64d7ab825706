//! Experiment orchestration: one input matrix, several solver variants run
//! with shared parameters, per-algorithm CSV traces, a run summary, and
//! optional SVG convergence plots.
//!
//! Configs are flat `key=value` text files. `#` starts a comment. Required
//! keys: `input`, `rank`, `lambda`, `algorithms`, `output_dir`. Optional:
//! `tol` (1e-9), `max_iters` (1000), `seed` (0), `emit_svg` (false),
//! `oracle` (true). `input` is a generator spec when it starts with
//! `gaussian:` or `lowrank:`, otherwise a Matrix Market file path.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use softsvd::diagnostics::{self, csv_header, SpectralReference, TraceBuilder, TraceRecord};
use softsvd::linalg::SparseMatrix;
use softsvd::solver::{
    als_run_observed, rrss_run_observed, SignPolicy, SolverConfig, SEED_OFFSET_SIGNS,
};

use crate::density_warning;
use crate::gen;
use crate::mm;
use crate::svg::{log_line_chart, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Als,
    RrssRaw,
    RrssRandom,
    RrssColsum,
}

impl Algorithm {
    /// Stable lowercase name used in config files, file names, and CSVs.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Als => "als",
            Algorithm::RrssRaw => "rrss_raw",
            Algorithm::RrssRandom => "rrss_random",
            Algorithm::RrssColsum => "rrss_colsum",
        }
    }
}

impl FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "als" => Ok(Algorithm::Als),
            "rrss_raw" => Ok(Algorithm::RrssRaw),
            "rrss_random" => Ok(Algorithm::RrssRandom),
            "rrss_colsum" => Ok(Algorithm::RrssColsum),
            other => Err(anyhow!(
                "unknown algorithm `{other}` (expected als, rrss_raw, rrss_random, rrss_colsum)"
            )),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    File(PathBuf),
    Generator(gen::GeneratorSpec),
}

impl InputSource {
    /// Generator specs are recognized by their kind prefix; anything else is
    /// a file path. A spec without `seed=` inherits the master seed.
    pub fn parse(value: &str, master_seed: u64) -> Result<InputSource> {
        if value.starts_with("gaussian:") || value.starts_with("lowrank:") {
            Ok(InputSource::Generator(gen::parse_with_master_seed(value, master_seed)?))
        } else {
            Ok(InputSource::File(PathBuf::from(value)))
        }
    }

    pub fn load(&self) -> Result<SparseMatrix<f64>> {
        match self {
            InputSource::File(path) => mm::read_matrix_market(path),
            InputSource::Generator(spec) => Ok(spec.generate()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub input: InputSource,
    pub rank: usize,
    pub lambda: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub output_dir: PathBuf,
    pub emit_svg: bool,
    pub oracle: bool,
}

impl ExperimentConfig {
    pub fn from_key_values(text: &str) -> Result<ExperimentConfig> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected `key=value`, got `{line}`", idx + 1))?;
            let key = key.trim();
            let value = value.trim();
            if pairs.iter().any(|(k, _)| k == key) {
                bail!("line {}: duplicate key `{key}`", idx + 1);
            }
            pairs.push((key.to_string(), value.to_string()));
        }

        let mut take = |key: &str| {
            pairs
                .iter()
                .position(|(k, _)| k == key)
                .map(|i| pairs.remove(i).1)
        };
        fn parsed<T: FromStr>(key: &str, value: Option<String>) -> Result<Option<T>> {
            value
                .map(|v| v.parse().map_err(|_| anyhow!("bad value for `{key}`: `{v}`")))
                .transpose()
        }

        let input_raw = take("input").ok_or_else(|| anyhow!("missing required key `input`"))?;
        let rank = parsed("rank", take("rank"))?
            .ok_or_else(|| anyhow!("missing required key `rank`"))?;
        let lambda = parsed("lambda", take("lambda"))?
            .ok_or_else(|| anyhow!("missing required key `lambda`"))?;
        let algorithms_raw =
            take("algorithms").ok_or_else(|| anyhow!("missing required key `algorithms`"))?;
        let output_dir = take("output_dir")
            .map(PathBuf::from)
            .ok_or_else(|| anyhow!("missing required key `output_dir`"))?;
        let tol = parsed("tol", take("tol"))?.unwrap_or(1e-9);
        let max_iters = parsed("max_iters", take("max_iters"))?.unwrap_or(1000);
        let seed = parsed("seed", take("seed"))?.unwrap_or(0);
        let emit_svg = parsed("emit_svg", take("emit_svg"))?.unwrap_or(false);
        let oracle = parsed("oracle", take("oracle"))?.unwrap_or(true);
        if let Some((key, _)) = pairs.first() {
            bail!("unknown key `{key}`");
        }

        let mut algorithms = Vec::new();
        for name in algorithms_raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let algo: Algorithm = name.parse()?;
            if algorithms.contains(&algo) {
                bail!("algorithm `{algo}` listed twice");
            }
            algorithms.push(algo);
        }
        if algorithms.is_empty() {
            bail!("`algorithms` must select at least one algorithm");
        }

        Ok(ExperimentConfig {
            input: InputSource::parse(&input_raw, seed)?,
            rank,
            lambda,
            tol,
            max_iters,
            seed,
            algorithms,
            output_dir,
            emit_svg,
            oracle,
        })
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_key_values(&text).with_context(|| format!("parsing {}", path.display()))
    }

    fn solver_config(&self, algorithm: Algorithm) -> SolverConfig<f64> {
        let sign_policy = match algorithm {
            Algorithm::Als | Algorithm::RrssColsum => SignPolicy::ColumnSum,
            Algorithm::RrssRaw => SignPolicy::Raw,
            Algorithm::RrssRandom => {
                SignPolicy::Random(self.seed.wrapping_add(SEED_OFFSET_SIGNS))
            }
        };
        SolverConfig {
            rank: self.rank,
            lambda: self.lambda,
            tol: self.tol,
            max_iters: self.max_iters,
            seed: self.seed,
            sign_policy,
            trace_enabled: true,
        }
    }
}

/// Human-readable policy tag for provenance comments.
pub fn policy_label(policy: &SignPolicy) -> String {
    match policy {
        SignPolicy::ColumnSum => "colsum".to_string(),
        SignPolicy::Raw => "raw".to_string(),
        SignPolicy::Random(seed) => format!("random:{seed}"),
        SignPolicy::Fixed(w) => format!("fixed:{w}"),
        SignPolicy::FixedPair(w_tilde, w) => format!("fixed-pair:{w_tilde}/{w}"),
    }
}

#[derive(Debug, Clone)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    pub final_cost: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub summaries: Vec<AlgorithmSummary>,
    pub oracle_cost: Option<f64>,
    pub output_dir: PathBuf,
}

impl ExperimentOutcome {
    pub fn all_converged(&self) -> bool {
        self.summaries.iter().all(|s| s.converged)
    }

    /// 0 when every run converged, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_converged() {
            0
        } else {
            2
        }
    }
}

fn provenance_comment(label: &str, cfg: &SolverConfig<f64>) -> String {
    format!(
        "# algorithm={label} r={} lambda={} tol={:e} max_iters={} seed={} policy={}",
        cfg.rank,
        cfg.lambda,
        cfg.tol,
        cfg.max_iters,
        cfg.seed,
        policy_label(&cfg.sign_policy)
    )
}

fn write_trace(
    path: &Path,
    label: &str,
    cfg: &SolverConfig<f64>,
    records: &[TraceRecord<f64>],
) -> Result<()> {
    let mut out = String::new();
    out.push_str(&provenance_comment(label, cfg));
    out.push('\n');
    out.push_str(&csv_header(cfg.rank));
    out.push('\n');
    for record in records {
        out.push_str(&record.to_csv_row());
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

fn cost_series(
    label: &str,
    records: &[TraceRecord<f64>],
    oracle: Option<f64>,
) -> Vec<Series> {
    let mut series = vec![Series::new(
        format!("{label} cost"),
        records.iter().map(|r| (r.iter as f64, r.cost_rrss)).collect(),
    )];
    if let Some(oracle) = oracle {
        series.push(Series::new(
            "excess over oracle",
            records.iter().map(|r| (r.iter as f64, r.cost_rrss - oracle)).collect(),
        ));
    }
    series
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let x = cfg.input.load()?;
    if let Some(warning) = density_warning(&x) {
        eprintln!("warning: {warning}");
    }
    fs::create_dir_all(&cfg.output_dir)
        .with_context(|| format!("creating {}", cfg.output_dir.display()))?;

    let reference = if cfg.oracle {
        Some(SpectralReference::from_dense(&x.to_dense())?)
    } else {
        None
    };
    let oracle_cost = reference
        .as_ref()
        .map(|r| diagnostics::oracle_cost(r, cfg.rank, cfg.lambda))
        .transpose()?;

    let mut summaries = Vec::new();
    let mut subspace_series = Vec::new();
    for &algorithm in &cfg.algorithms {
        let solver_cfg = cfg.solver_config(algorithm);
        let mut tracer = TraceBuilder::new(&x, cfg.lambda, cfg.rank);
        if let Some(reference) = &reference {
            tracer = tracer.with_reference(reference)?;
        }
        let solution = match algorithm {
            Algorithm::Als => als_run_observed(&x, &solver_cfg, Some(&mut tracer))?,
            _ => rrss_run_observed(&x, &solver_cfg, None, Some(&mut tracer))?,
        };

        let label = algorithm.label();
        let records = tracer.into_records();
        write_trace(
            &cfg.output_dir.join(format!("{label}_trace.csv")),
            label,
            &solver_cfg,
            &records,
        )?;
        if cfg.emit_svg {
            let chart = log_line_chart(
                &format!("{label} convergence"),
                "iteration",
                "objective",
                &cost_series(label, &records, oracle_cost),
            );
            let path = cfg.output_dir.join(format!("{label}_cost.svg"));
            fs::write(&path, chart).with_context(|| format!("writing {}", path.display()))?;
            for (tag, pick) in [
                ("U", &(|r: &TraceRecord<f64>| r.subspace_err_u) as &dyn Fn(_) -> _),
                ("V", &|r: &TraceRecord<f64>| r.subspace_err_v),
            ] {
                let points: Vec<(f64, f64)> = records
                    .iter()
                    .filter_map(|r| pick(r).map(|e| (r.iter as f64, e)))
                    .collect();
                if !points.is_empty() {
                    subspace_series.push(Series::new(format!("{label} {tag}"), points));
                }
            }
        }

        summaries.push(AlgorithmSummary {
            algorithm,
            final_cost: solution.final_cost,
            iterations: solution.iters,
            converged: solution.converged,
        });
    }

    let mut summary_csv = String::from("algorithm,final_cost,oracle_cost,iterations,converged\n");
    for s in &summaries {
        let oracle = oracle_cost.map_or_else(|| "NA".to_string(), |c| c.to_string());
        summary_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            s.algorithm, s.final_cost, oracle, s.iterations, s.converged
        ));
    }
    let summary_path = cfg.output_dir.join("summary.csv");
    fs::write(&summary_path, summary_csv)
        .with_context(|| format!("writing {}", summary_path.display()))?;

    if cfg.emit_svg && !subspace_series.is_empty() {
        let chart = log_line_chart(
            "subspace alignment error",
            "iteration",
            "max leakage",
            &subspace_series,
        );
        let path = cfg.output_dir.join("subspace.svg");
        fs::write(&path, chart).with_context(|| format!("writing {}", path.display()))?;
    }

    Ok(ExperimentOutcome { summaries, oracle_cost, output_dir: cfg.output_dir.clone() })
}
