//! Experiment orchestration: strict TOML configs, deterministic multi-run
//! execution, and stable on-disk results for downstream plotting.
//!
//! Every run writes into `<out>/<benchmark>/<variant>/run-<k>/`:
//! `steps.jsonl` (one record per training step plus a final record),
//! `summary.json` (the run outcome and the exact config that produced it),
//! `checkpoint.bin` (final policy parameters), and `metadata.json`. Result
//! files contain no timestamps or host information — those live only in
//! `metadata.json` — so reruns with the same config and seed are
//! byte-identical. `trace` derives plot-ready CSVs from `steps.jsonl`.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use symreg_core::bench::{self, Benchmark, Cell, ExperimentSpec, Variant};
use symreg_core::checkpoint;
use symreg_core::priors::{LengthBounds, SoftLengthConfig};
use symreg_core::trainer::{RunResult, StepReport, TrainConfig, TrainError};

/// Errors carry the process exit code: misconfiguration is 2, filesystem
/// trouble is 3, anything else 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Config(c) => CliError::Config(c.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn io_ctx(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// One experiment as written by hand: names, run plan, and optional
/// overrides on top of the variant's baseline hyperparameters. Parsing is
/// strict — unknown keys anywhere are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub variant: Variant,
    pub benchmarks: Vec<String>,
    #[serde(default = "default_n_runs")]
    pub n_runs: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainOverrides>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soft_length: Option<SoftLengthToml>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_bounds: Option<BoundsToml>,
}

fn default_n_runs() -> u32 {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

fn default_workers() -> usize {
    1
}

/// Per-field training overrides; anything left out keeps the variant's value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainOverrides {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learning_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy_weight: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entropy_decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equal_type_prior: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub no_nested_trig: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SoftLengthToml {
    pub target_length: usize,
    pub variance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsToml {
    pub min: usize,
    pub max: usize,
}

/// Reads and strictly parses a config file, applying `--set` overrides.
pub fn load_config(path: &Path, sets: &[String]) -> Result<ExperimentConfig, CliError> {
    let text = fs::read_to_string(path).map_err(io_ctx(path))?;
    parse_config(&text, sets)
}

/// Strict parse of config text plus dotted-path overrides.
pub fn parse_config(text: &str, sets: &[String]) -> Result<ExperimentConfig, CliError> {
    let mut doc: toml::Value =
        text.parse().map_err(|e| CliError::Config(format!("config parse: {e}")))?;
    for set in sets {
        apply_set(&mut doc, set)?;
    }
    doc.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
}

/// Applies one `KEY=VALUE` override, where KEY is a dotted path into the
/// config (`train.batch_size=500`). The value is parsed as TOML; bare
/// words that aren't valid TOML fall back to strings, so
/// `--set variant=SE` works unquoted.
pub fn apply_set(doc: &mut toml::Value, spec: &str) -> Result<(), CliError> {
    let bad = |msg: String| CliError::Config(msg);
    let (path, raw) =
        spec.split_once('=').ok_or_else(|| bad(format!("--set {spec:?}: expected KEY=VALUE")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(bad(format!("--set {spec:?}: empty key segment")));
    }

    let raw = raw.trim();
    let parsed: toml::Value = format!("v = {raw}")
        .parse()
        .or_else(|_| {
            let escaped = raw.replace('\\', "\\\\").replace('"', "\\\"");
            format!("v = \"{escaped}\"").parse()
        })
        .map_err(|e| bad(format!("--set {spec:?}: bad value: {e}")))?;
    let value = parsed.get("v").expect("scratch key exists").clone();

    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| bad(format!("--set {spec:?}: {key} is not a table")))?;
        node =
            table.entry(key.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let last = keys[keys.len() - 1];
    node.as_table_mut()
        .ok_or_else(|| bad(format!("--set {spec:?}: parent of {last} is not a table")))?
        .insert(last.to_string(), value);
    Ok(())
}

/// A config with names resolved and every default applied.
#[derive(Clone, Debug)]
pub struct ResolvedExperiment {
    pub variant: Variant,
    pub benchmarks: Vec<Benchmark>,
    pub n_runs: u32,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: usize,
    pub train: TrainConfig,
}

pub fn resolve(config: &ExperimentConfig) -> Result<ResolvedExperiment, CliError> {
    let bad = |msg: &str| CliError::Config(msg.to_string());
    if config.benchmarks.is_empty() {
        return Err(bad("benchmarks must not be empty"));
    }
    let mut seen = Vec::new();
    let benchmarks: Vec<Benchmark> = config
        .benchmarks
        .iter()
        .map(|name| {
            let b = bench::benchmark(name)
                .ok_or_else(|| CliError::Config(format!("unknown benchmark {name:?}")))?;
            if seen.contains(&b.name) {
                return Err(CliError::Config(format!("benchmark {name:?} listed twice")));
            }
            seen.push(b.name.clone());
            Ok(b)
        })
        .collect::<Result<_, _>>()?;
    if config.n_runs == 0 {
        return Err(bad("n_runs must be positive"));
    }
    if config.workers == 0 {
        return Err(bad("workers must be positive"));
    }

    let mut train = config.variant.train_config();
    if let Some(t) = &config.train {
        if let Some(v) = t.learning_rate {
            train.learning_rate = v;
        }
        if let Some(v) = t.batch_size {
            train.batch_size = v;
        }
        if let Some(v) = t.risk_factor {
            train.risk_factor = v;
        }
        if let Some(v) = t.entropy_weight {
            train.entropy_weight = v;
        }
        if let Some(v) = t.entropy_decay {
            train.entropy_decay = v;
        }
        if let Some(v) = t.max_steps {
            train.max_steps = v;
        }
        if let Some(v) = t.hidden_size {
            train.hidden_size = v;
        }
        if let Some(v) = t.equal_type_prior {
            train.equal_type_prior = v;
        }
        if let Some(v) = t.no_nested_trig {
            train.no_nested_trig = v;
        }
    }
    if let Some(sl) = &config.soft_length {
        train.soft_length =
            Some(SoftLengthConfig { target_length: sl.target_length, variance: sl.variance });
    }
    if let Some(b) = &config.length_bounds {
        train.length_bounds = LengthBounds { min: b.min, max: b.max };
    }
    train.validate().map_err(|e| CliError::Config(e.to_string()))?;

    Ok(ResolvedExperiment {
        variant: config.variant,
        benchmarks,
        n_runs: config.n_runs,
        seed: config.seed,
        out: config.out.clone(),
        workers: config.workers,
        train,
    })
}

#[derive(Serialize)]
struct StepLine<'a> {
    step: &'a StepReport,
}

#[derive(Serialize)]
struct FinalLine<'a> {
    r#final: &'a RunResult,
}

/// Everything needed to reproduce and interpret one run, without reading
/// any other file. Deterministic: no clocks, no host info.
#[derive(Serialize)]
struct RunSummary<'a> {
    benchmark: &'a str,
    variant: &'a str,
    run: u32,
    seed: u64,
    config: TrainConfig,
    result: &'a RunResult,
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    benchmark: &'a str,
    variant: &'a str,
    run: u32,
    seed: u64,
    started_unix: u64,
    duration_seconds: f64,
    os: &'static str,
    arch: &'static str,
    version: &'static str,
}

fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes =
        serde_json::to_vec_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))?;
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(io_ctx(path))
}

fn execute_cell(spec: &ExperimentSpec, cell: &Cell, out: &Path) -> Result<RunResult, CliError> {
    let bench = &spec.benchmarks[cell.benchmark_pos];
    let run = cell.run_index + 1;
    let dir = out.join(&bench.name).join(spec.variant.name()).join(format!("run-{run}"));
    fs::create_dir_all(&dir).map_err(io_ctx(&dir))?;
    let started_unix =
        SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let timer = Instant::now();

    let steps_path = dir.join("steps.jsonl");
    let mut steps = BufWriter::new(fs::File::create(&steps_path).map_err(io_ctx(&steps_path))?);
    let mut sink_err: Option<io::Error> = None;
    let mut reports: Vec<StepReport> = Vec::new();
    let (result, params) = spec.run_cell(cell, |report| {
        if sink_err.is_none() {
            let write = serde_json::to_writer(&mut steps, &StepLine { step: report })
                .map_err(io::Error::from)
                .and_then(|()| steps.write_all(b"\n"));
            if let Err(e) = write {
                sink_err = Some(e);
            }
        }
        reports.push(report.clone());
    })?;
    if let Some(e) = sink_err {
        return Err(io_ctx(&steps_path)(e));
    }
    serde_json::to_writer(&mut steps, &FinalLine { r#final: &result })
        .map_err(io::Error::from)
        .and_then(|()| steps.write_all(b"\n"))
        .and_then(|()| steps.flush())
        .map_err(io_ctx(&steps_path))?;
    write_trace_csvs(&dir, &reports)?;

    write_json_pretty(
        &dir.join("summary.json"),
        &RunSummary {
            benchmark: &bench.name,
            variant: spec.variant.name(),
            run,
            seed: cell.seed,
            config: TrainConfig { seed: cell.seed, ..spec.config.clone() },
            result: &result,
        },
    )?;

    let ckpt_path = dir.join("checkpoint.bin");
    fs::write(&ckpt_path, checkpoint::encode(&params)).map_err(io_ctx(&ckpt_path))?;

    write_json_pretty(
        &dir.join("metadata.json"),
        &RunMetadata {
            benchmark: &bench.name,
            variant: spec.variant.name(),
            run,
            seed: cell.seed,
            started_unix,
            duration_seconds: timer.elapsed().as_secs_f64(),
            os: std::env::consts::OS,
            arch: std::env::consts::ARCH,
            version: env!("CARGO_PKG_VERSION"),
        },
    )
    .map(|()| result)
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

/// Executes the whole experiment, writes all run artifacts plus
/// `<out>/experiment.json`, and prints one summary line per benchmark.
pub fn cmd_run(resolved: &ResolvedExperiment) -> Result<(), CliError> {
    let spec = ExperimentSpec {
        variant: resolved.variant,
        benchmarks: resolved.benchmarks.clone(),
        n_runs: resolved.n_runs,
        base_seed: resolved.seed,
        config: resolved.train.clone(),
    };
    fs::create_dir_all(&resolved.out).map_err(io_ctx(&resolved.out))?;

    let cells = spec.cells();
    let pool = build_pool(resolved.workers)?;
    let outcomes: Result<Vec<(Cell, RunResult)>, CliError> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| execute_cell(&spec, cell, &resolved.out).map(|r| (cell.clone(), r)))
            .collect()
    });
    let result = spec.assemble(outcomes?);

    write_json_pretty(&resolved.out.join("experiment.json"), &result)?;

    for b in &result.benchmarks {
        let n = b.runs.len();
        let recovered = (b.aggregate.recovery_rate * n as f64).round() as usize;
        println!(
            "{:<12} {:<7} recovery {recovered}/{n} ({:.1}%)  mean steps {:.1}  mean length {:.1}",
            b.benchmark,
            result.variant.name(),
            b.aggregate.recovery_rate * 100.0,
            b.aggregate.mean_steps,
            b.aggregate.mean_best_length,
        );
    }
    Ok(())
}

/// Writes a run's tidy CSVs: `entropy-trace.csv` with one row per step per
/// traced position, and `length-hist.csv` with one row per length bin per
/// step. Returns the (entropy, histogram) row counts.
fn write_trace_csvs(dir: &Path, reports: &[StepReport]) -> Result<(usize, usize), CliError> {
    let entropy_path = dir.join("entropy-trace.csv");
    let mut w = BufWriter::new(fs::File::create(&entropy_path).map_err(io_ctx(&entropy_path))?);
    let mut entropy_rows = 0usize;
    (|| -> io::Result<()> {
        writeln!(w, "step,position,entropy")?;
        for r in reports {
            for (i, h) in r.position_entropy.iter().enumerate() {
                match h {
                    Some(v) => writeln!(w, "{},{},{v}", r.step, i + 1)?,
                    None => writeln!(w, "{},{},", r.step, i + 1)?,
                }
                entropy_rows += 1;
            }
        }
        w.flush()
    })()
    .map_err(io_ctx(&entropy_path))?;

    let hist_path = dir.join("length-hist.csv");
    let mut w = BufWriter::new(fs::File::create(&hist_path).map_err(io_ctx(&hist_path))?);
    let mut hist_rows = 0usize;
    (|| -> io::Result<()> {
        writeln!(w, "step,length,count")?;
        for r in reports {
            for (bin, count) in r.length_histogram.iter().enumerate() {
                writeln!(w, "{},{},{count}", r.step, bin + 1)?;
                hist_rows += 1;
            }
        }
        w.flush()
    })()
    .map_err(io_ctx(&hist_path))?;

    Ok((entropy_rows, hist_rows))
}

/// Rebuilds a run directory's CSVs from its `steps.jsonl` (the `run`
/// command writes them as part of each run; this rederives them, e.g.
/// after the originals were deleted).
pub fn cmd_trace(dir: &Path) -> Result<(), CliError> {
    let steps_path = dir.join("steps.jsonl");
    let text = fs::read_to_string(&steps_path).map_err(io_ctx(&steps_path))?;

    let mut reports: Vec<StepReport> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| CliError::Io(format!("{}:{}: {e}", steps_path.display(), idx + 1)))?;
        if let Some(step) = record.get("step") {
            let report = serde_json::from_value(step.clone())
                .map_err(|e| CliError::Io(format!("{}:{}: {e}", steps_path.display(), idx + 1)))?;
            reports.push(report);
        }
    }
    if reports.is_empty() {
        return Err(CliError::Io(format!("{}: no step records", steps_path.display())));
    }

    let (entropy_rows, hist_rows) = write_trace_csvs(dir, &reports)?;
    println!(
        "wrote {entropy_rows} entropy rows and {hist_rows} histogram rows for {} steps in {}",
        reports.len(),
        dir.display(),
    );
    Ok(())
}

/// One hyperparameter configuration's aggregate outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub entropy_weight: f64,
    pub entropy_decay: f64,
    pub recovery_rate: f64,
    pub mean_steps: f64,
    pub mean_best_length: f64,
}

/// Best row: highest recovery rate, then fewest mean steps, then smallest
/// entropy weight. Any remaining tie keeps the earliest row, which in grid
/// order means the smallest decay.
pub fn pick_best(rows: &[GridRow]) -> usize {
    assert!(!rows.is_empty(), "empty grid");
    (0..rows.len())
        .min_by(|&a, &b| {
            rows[b]
                .recovery_rate
                .total_cmp(&rows[a].recovery_rate)
                .then(rows[a].mean_steps.total_cmp(&rows[b].mean_steps))
                .then(rows[a].entropy_weight.total_cmp(&rows[b].entropy_weight))
        })
        .expect("non-empty")
}

#[derive(Serialize)]
struct GridReport<'a> {
    variant: &'a str,
    benchmark: &'a str,
    n_runs: u32,
    seed: u64,
    rows: &'a [GridRow],
    best: usize,
}

/// Sweeps the variant's hyperparameter grid on one benchmark, printing a
/// row per configuration and persisting the table plus the winner.
pub fn cmd_grid(
    variant_name: &str,
    benchmark_name: &str,
    runs: u32,
    seed: u64,
    out: &Path,
    workers: usize,
    sets: &[String],
) -> Result<(), CliError> {
    let variant = Variant::parse(variant_name)
        .ok_or_else(|| CliError::Config(format!("unknown variant {variant_name:?}")))?;

    // Route through the same strict config machinery so --set overrides
    // (e.g. train.max_steps) behave exactly as they do for `run`.
    let mut table = toml::map::Map::new();
    table.insert("variant".into(), toml::Value::String(variant.name().into()));
    table.insert(
        "benchmarks".into(),
        toml::Value::Array(vec![toml::Value::String(benchmark_name.into())]),
    );
    table.insert("n_runs".into(), toml::Value::Integer(runs as i64));
    let mut doc = toml::Value::Table(table);
    for set in sets {
        apply_set(&mut doc, set)?;
    }
    let config: ExperimentConfig =
        doc.try_into().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    let resolved = resolve(&config)?;

    fs::create_dir_all(out).map_err(io_ctx(out))?;
    let grid = bench::hyperparameter_grid(variant);
    let pool = build_pool(workers)?;
    let rows: Result<Vec<GridRow>, CliError> = pool.install(|| {
        grid.par_iter()
            .map(|point| {
                let spec = ExperimentSpec {
                    variant,
                    benchmarks: resolved.benchmarks.clone(),
                    n_runs: resolved.n_runs,
                    base_seed: seed,
                    config: TrainConfig {
                        entropy_weight: point.entropy_weight,
                        entropy_decay: point.entropy_decay,
                        ..resolved.train.clone()
                    },
                };
                let result = spec.run()?;
                Ok(GridRow {
                    entropy_weight: point.entropy_weight,
                    entropy_decay: point.entropy_decay,
                    recovery_rate: result.overall.recovery_rate,
                    mean_steps: result.overall.mean_steps,
                    mean_best_length: result.overall.mean_best_length,
                })
            })
            .collect()
    });
    let rows = rows?;
    let best = pick_best(&rows);

    println!("  weight   decay  recovery  mean steps  mean length");
    for (i, row) in rows.iter().enumerate() {
        let marker = if i == best { " <- best" } else { "" };
        println!(
            "{:>8} {:>7}  {:>7.1}%  {:>10.1}  {:>11.2}{marker}",
            row.entropy_weight,
            row.entropy_decay,
            row.recovery_rate * 100.0,
            row.mean_steps,
            row.mean_best_length,
        );
    }

    let report_path = out.join(format!("grid-{}-{}.json", variant.name(), benchmark_name));
    write_json_pretty(
        &report_path,
        &GridReport {
            variant: variant.name(),
            benchmark: benchmark_name,
            n_runs: resolved.n_runs,
            seed,
            rows: &rows,
            best,
        },
    )
}
