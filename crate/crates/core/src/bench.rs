//! The Nguyen benchmark suite and multi-run ablation experiments.
//!
//! Benchmark definitions follow the standard suite of Uy et al. (2011),
//! "Semantically-based crossover in genetic programming", GPEM 12(2):
//! twenty training points per problem, drawn uniformly from U\[−1,1\] for
//! problems 1–6, U\[0,2\] for 7, U\[0,4\] for 8, and U\[0,1\]² for the
//! two-variable problems 9–12. Each dataset is generated from a fixed
//! per-benchmark seed, so "the" Nguyen-5 dataset is identical across
//! runs, machines, and experiments.
//!
//! The library has no constant tokens, so ground truths spell constants
//! out of variables (`cos(x−x)` for 1); recovery is decided numerically,
//! making the particular spelling immaterial. Nguyen-11's `x^y` is
//! expressed as `exp(y·log(x))` since there is no power token.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::eval::{evaluate, Dataset, Inputs};
use crate::expr::TokenSequence;
use crate::gradient::EntropyMode;
use crate::library::{Library, TokenKind};
use crate::policy::PolicyParams;
use crate::priors::SoftLengthConfig;
use crate::rng;
use crate::trainer::{RecoveryTarget, RunResult, StepReport, TrainConfig, TrainError, Trainer};

/// One symbolic-regression problem: ground truth, library, and data spec.
#[derive(Clone, Debug)]
pub struct Benchmark {
    pub name: String,
    /// Stable identifier used in seed derivation; suite problems use
    /// their suite number.
    pub index: u32,
    pub library: Library,
    pub truth: TokenSequence,
    /// Per-variable training domain.
    pub domain: Vec<(f64, f64)>,
    pub train_points: usize,
}

impl Benchmark {
    /// The benchmark's training data, regenerated from its fixed seed.
    /// Panics if the ground truth is non-finite somewhere on the drawn
    /// points, which the suite definitions never are.
    pub fn dataset(&self) -> Dataset {
        let mut rng = rng::dataset_seed(self.index as u64).rng();
        let inputs = Inputs::sample_uniform(self.train_points, &self.domain, &mut rng);
        let values = evaluate(&self.truth, &inputs, &self.library).expect("truth is complete");
        let targets: Vec<f64> =
            values.into_iter().map(|v| v.expect("ground truth finite on its own domain")).collect();
        Dataset::new(inputs, targets).expect("generated dataset is valid")
    }

    pub fn recovery_target(&self) -> RecoveryTarget {
        RecoveryTarget { truth: self.truth.clone(), domain: self.domain.clone() }
    }
}

fn seq(lib: &Library, names: &[&str]) -> TokenSequence {
    TokenSequence::new(lib.ids_of(names).expect("benchmark tokens exist in library"))
}

/// The twelve standard benchmarks.
pub fn nguyen_suite() -> Vec<Benchmark> {
    let one_var = Library::standard(1);
    let two_var = Library::standard(2);
    let with_sqrt = Library::new([
        TokenKind::Add,
        TokenKind::Sub,
        TokenKind::Mul,
        TokenKind::Div,
        TokenKind::Sin,
        TokenKind::Cos,
        TokenKind::Exp,
        TokenKind::Log,
        TokenKind::Sqrt,
        TokenKind::Var(0),
    ])
    .expect("sqrt library is valid");

    // Power chains x^k as left-nested products; constants via cos(x−x)=1.
    let x4 = ["*", "*", "*", "x1", "x1", "x1", "x1"];
    let x3 = ["*", "*", "x1", "x1", "x1"];
    let x2 = ["*", "x1", "x1"];

    let mut suite = Vec::with_capacity(12);
    let mut push = |index: u32, library: &Library, tokens: Vec<&str>, domain: Vec<(f64, f64)>| {
        suite.push(Benchmark {
            name: alloc::format!("Nguyen-{index}"),
            index,
            library: library.clone(),
            truth: seq(library, &tokens),
            domain,
            train_points: 20,
        });
    };

    // 1: x³ + x² + x
    let mut t = vec!["+", "+"];
    t.extend(x3);
    t.extend(x2);
    t.push("x1");
    push(1, &one_var, t, vec![(-1.0, 1.0)]);

    // 2: x⁴ + x³ + x² + x
    let mut t = vec!["+", "+", "+"];
    t.extend(x4);
    t.extend(x3);
    t.extend(x2);
    t.push("x1");
    push(2, &one_var, t, vec![(-1.0, 1.0)]);

    // 3: x⁵ + x⁴ + x³ + x² + x
    let mut t = vec!["+", "+", "+", "+"];
    t.extend(["*", "*", "*", "*", "x1", "x1", "x1", "x1", "x1"]);
    t.extend(x4);
    t.extend(x3);
    t.extend(x2);
    t.push("x1");
    push(3, &one_var, t, vec![(-1.0, 1.0)]);

    // 4: x⁶ + x⁵ + x⁴ + x³ + x² + x
    let mut t = vec!["+", "+", "+", "+", "+"];
    t.extend(["*", "*", "*", "*", "*", "x1", "x1", "x1", "x1", "x1", "x1"]);
    t.extend(["*", "*", "*", "*", "x1", "x1", "x1", "x1", "x1"]);
    t.extend(x4);
    t.extend(x3);
    t.extend(x2);
    t.push("x1");
    push(4, &one_var, t, vec![(-1.0, 1.0)]);

    // 5: sin(x²)·cos(x) − 1
    push(
        5,
        &one_var,
        vec!["-", "*", "sin", "*", "x1", "x1", "cos", "x1", "cos", "-", "x1", "x1"],
        vec![(-1.0, 1.0)],
    );

    // 6: sin(x) + sin(x + x²)
    push(6, &one_var, vec!["+", "sin", "x1", "sin", "+", "x1", "*", "x1", "x1"], vec![(-1.0, 1.0)]);

    // 7: log(x+1) + log(x²+1)
    push(
        7,
        &one_var,
        vec![
            "+", "log", "+", "x1", "cos", "-", "x1", "x1", "log", "+", "*", "x1", "x1", "cos", "-",
            "x1", "x1",
        ],
        vec![(0.0, 2.0)],
    );

    // 8: √x
    push(8, &with_sqrt, vec!["sqrt", "x1"], vec![(0.0, 4.0)]);

    // 9: sin(x) + sin(y²)
    push(9, &two_var, vec!["+", "sin", "x1", "sin", "*", "x2", "x2"], vec![(0.0, 1.0), (0.0, 1.0)]);

    // 10: 2·sin(x)·cos(y), written as a sum of two identical products
    push(
        10,
        &two_var,
        vec!["+", "*", "sin", "x1", "cos", "x2", "*", "sin", "x1", "cos", "x2"],
        vec![(0.0, 1.0), (0.0, 1.0)],
    );

    // 11: x^y = exp(y·log(x))
    push(11, &two_var, vec!["exp", "*", "x2", "log", "x1"], vec![(0.0, 1.0), (0.0, 1.0)]);

    // 12: x⁴ − x³ + y²/2 − y, with 2 spelled cos(y−y)+cos(y−y)
    let mut t = vec!["-", "+", "-"];
    t.extend(x4);
    t.extend(x3);
    t.extend(["/", "*", "x2", "x2", "+", "cos", "-", "x2", "x2", "cos", "-", "x2", "x2"]);
    t.push("x2");
    push(12, &two_var, t, vec![(0.0, 1.0), (0.0, 1.0)]);

    suite
}

/// Looks a suite benchmark up by name, case-insensitively.
pub fn benchmark(name: &str) -> Option<Benchmark> {
    nguyen_suite().into_iter().find(|b| b.name.eq_ignore_ascii_case(name))
}

/// The four ablation arms: which entropy regularizer, and whether the
/// soft length prior is active. Hyperparameters are each arm's grid optimum.
#[derive(
    Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize,
)]
pub enum Variant {
    #[serde(rename = "SE")]
    Se,
    #[serde(rename = "HE")]
    He,
    #[serde(rename = "SLP")]
    Slp,
    #[serde(rename = "SLP+HE")]
    SlpHe,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Se, Variant::He, Variant::Slp, Variant::SlpHe];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Se => "SE",
            Variant::He => "HE",
            Variant::Slp => "SLP",
            Variant::SlpHe => "SLP+HE",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name().eq_ignore_ascii_case(s))
    }

    /// Baseline training configuration of this arm.
    pub fn train_config(self) -> TrainConfig {
        let base = TrainConfig::default();
        match self {
            Variant::Se => TrainConfig {
                entropy_mode: EntropyMode::Standard,
                entropy_weight: 0.005,
                entropy_decay: 1.0,
                soft_length: None,
                ..base
            },
            Variant::He => TrainConfig {
                entropy_mode: EntropyMode::Hierarchical,
                entropy_weight: 0.02,
                entropy_decay: 0.85,
                soft_length: None,
                ..base
            },
            Variant::Slp => TrainConfig {
                entropy_mode: EntropyMode::Standard,
                entropy_weight: 0.005,
                entropy_decay: 1.0,
                soft_length: Some(SoftLengthConfig::default()),
                ..base
            },
            Variant::SlpHe => TrainConfig {
                entropy_mode: EntropyMode::Hierarchical,
                entropy_weight: 0.03,
                entropy_decay: 0.7,
                soft_length: Some(SoftLengthConfig::default()),
                ..base
            },
        }
    }
}

impl core::fmt::Display for Variant {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.name())
    }
}

/// Search grid: entropy weights for every arm; decay factors only for the
/// hierarchical arms.
pub fn hyperparameter_grid(variant: Variant) -> Vec<TrainConfig> {
    const WEIGHTS: [f64; 5] = [0.001, 0.005, 0.01, 0.02, 0.03];
    const DECAYS: [f64; 5] = [0.7, 0.75, 0.8, 0.85, 0.9];
    let base = variant.train_config();
    let mut configs = Vec::new();
    match variant {
        Variant::Se | Variant::Slp => {
            for &w in &WEIGHTS {
                configs.push(TrainConfig { entropy_weight: w, ..base.clone() });
            }
        }
        Variant::He | Variant::SlpHe => {
            for &w in &WEIGHTS {
                for &d in &DECAYS {
                    configs.push(TrainConfig {
                        entropy_weight: w,
                        entropy_decay: d,
                        ..base.clone()
                    });
                }
            }
        }
    }
    configs
}

/// Table-style aggregate over a set of runs.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Aggregate {
    pub recovery_rate: f64,
    pub mean_steps: f64,
    pub mean_best_length: f64,
}

/// Aggregates per-run results; exactly recomputable from stored records.
pub fn aggregate(results: &[RunResult]) -> Aggregate {
    assert!(!results.is_empty(), "aggregate of zero runs");
    let n = results.len() as f64;
    Aggregate {
        recovery_rate: results.iter().filter(|r| r.recovered).count() as f64 / n,
        mean_steps: results.iter().map(|r| r.steps_to_solve as f64).sum::<f64>() / n,
        mean_best_length: results.iter().map(|r| r.best_length() as f64).sum::<f64>() / n,
    }
}

/// Results of one benchmark within an experiment. Carries the dataset
/// parameters (domain and point count) so persisted results state exactly
/// which data the runs trained on.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BenchmarkResult {
    pub benchmark: String,
    pub domain: Vec<(f64, f64)>,
    pub train_points: usize,
    pub runs: Vec<RunResult>,
    pub aggregate: Aggregate,
}

/// Results of one variant over a benchmark selection.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ExperimentResult {
    pub variant: Variant,
    pub benchmarks: Vec<BenchmarkResult>,
    pub overall: Aggregate,
}

/// One (benchmark, run) unit of an experiment, with its derived seed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub benchmark_pos: usize,
    pub run_index: u32,
    pub seed: u64,
}

/// A fully specified experiment: variant, benchmarks, and run plan.
/// `config` starts from the variant's defaults; its `seed` field is
/// ignored in favor of per-cell derived seeds, which depend on the
/// benchmark's stable suite index (not its position in the selection), so
/// a run reproduces identically whether executed alone or in a sweep.
#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub variant: Variant,
    pub benchmarks: Vec<Benchmark>,
    pub n_runs: u32,
    pub base_seed: u64,
    pub config: TrainConfig,
}

impl ExperimentSpec {
    pub fn new(variant: Variant, benchmarks: Vec<Benchmark>, n_runs: u32, base_seed: u64) -> Self {
        let config = variant.train_config();
        Self { variant, benchmarks, n_runs, base_seed, config }
    }

    /// All units of work, in deterministic order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::with_capacity(self.benchmarks.len() * self.n_runs as usize);
        for (pos, bench) in self.benchmarks.iter().enumerate() {
            for run_index in 0..self.n_runs {
                cells.push(Cell {
                    benchmark_pos: pos,
                    run_index,
                    seed: rng::cell_seed(self.base_seed, bench.index, run_index),
                });
            }
        }
        cells
    }

    /// Executes one cell, streaming step reports into `sink`; returns the
    /// run outcome and the final policy parameters (for checkpointing).
    pub fn run_cell<F: FnMut(&StepReport)>(
        &self,
        cell: &Cell,
        sink: F,
    ) -> Result<(RunResult, PolicyParams), TrainError> {
        let bench = &self.benchmarks[cell.benchmark_pos];
        let config = TrainConfig { seed: cell.seed, ..self.config.clone() };
        let mut trainer = Trainer::new(config, bench.library.clone(), bench.dataset())?;
        let result = trainer.run(Some(&bench.recovery_target()), sink)?;
        let params = trainer.params().clone();
        Ok((result, params))
    }

    /// Groups per-cell outcomes (in `cells()` order) into the final result.
    pub fn assemble(&self, outcomes: Vec<(Cell, RunResult)>) -> ExperimentResult {
        let mut per_bench: Vec<Vec<RunResult>> = vec![Vec::new(); self.benchmarks.len()];
        let mut ordered = outcomes;
        ordered.sort_by_key(|(c, _)| (c.benchmark_pos, c.run_index));
        for (cell, result) in ordered {
            per_bench[cell.benchmark_pos].push(result);
        }
        let benchmarks: Vec<BenchmarkResult> = per_bench
            .into_iter()
            .zip(&self.benchmarks)
            .map(|(runs, bench)| BenchmarkResult {
                benchmark: bench.name.clone(),
                domain: bench.domain.clone(),
                train_points: bench.train_points,
                aggregate: aggregate(&runs),
                runs,
            })
            .collect();
        let all: Vec<RunResult> = benchmarks.iter().flat_map(|b| b.runs.iter().cloned()).collect();
        ExperimentResult { variant: self.variant, overall: aggregate(&all), benchmarks }
    }

    /// Runs every cell serially (no sinks) and assembles the result.
    pub fn run(&self) -> Result<ExperimentResult, TrainError> {
        let mut outcomes = Vec::new();
        for cell in self.cells() {
            let (result, _) = self.run_cell(&cell, |_| {})?;
            outcomes.push((cell, result));
        }
        Ok(self.assemble(outcomes))
    }
}

/// Convenience wrapper: run `variant` over `benchmarks` with `n_runs`
/// seeds per benchmark at the arm's baseline hyperparameters.
pub fn run_experiment(
    variant: Variant,
    benchmarks: Vec<Benchmark>,
    n_runs: u32,
    base_seed: u64,
) -> Result<ExperimentResult, TrainError> {
    ExperimentSpec::new(variant, benchmarks, n_runs, base_seed).run()
}

/// Accumulates step reports of one run for figure-style traces.
#[derive(Clone, Debug, Default)]
pub struct TraceCollector {
    pub reports: Vec<StepReport>,
}

impl TraceCollector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, report: &StepReport) {
        self.reports.push(report.clone());
    }

    /// Length histogram of the very first sampled batch (the untrained
    /// policy), if any step ran.
    pub fn initial_length_histogram(&self) -> Option<&[u32]> {
        self.reports.first().map(|r| r.length_histogram.as_slice())
    }

    /// Mean entropy trace of one 1-based position across steps.
    pub fn position_entropy_trace(&self, position: usize) -> Vec<Option<f64>> {
        self.reports.iter().map(|r| r.position_entropy[position - 1]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::reward;
    use crate::expr::to_infix;
    use crate::priors::LengthBounds;

    #[test]
    fn suite_has_twelve_complete_benchmarks() {
        let suite = nguyen_suite();
        assert_eq!(suite.len(), 12);
        for (i, bench) in suite.iter().enumerate() {
            assert_eq!(bench.index as usize, i + 1);
            assert_eq!(bench.name, alloc::format!("Nguyen-{}", i + 1));
            assert!(bench.truth.is_complete(&bench.library), "{} incomplete", bench.name);
            assert_eq!(bench.domain.len(), bench.library.num_vars());
        }
    }

    #[test]
    fn truths_evaluate_to_known_values() {
        let suite = nguyen_suite();
        let at = |b: &Benchmark, point: &[f64]| {
            let inputs = Inputs::new(1, point.len(), point.to_vec()).unwrap();
            evaluate(&b.truth, &inputs, &b.library).unwrap()[0].unwrap()
        };
        assert!((at(&suite[0], &[1.0]) - 3.0).abs() < 1e-12); // 1+1+1
        assert!((at(&suite[1], &[1.0]) - 4.0).abs() < 1e-12);
        assert!((at(&suite[2], &[1.0]) - 5.0).abs() < 1e-12);
        assert!((at(&suite[3], &[1.0]) - 6.0).abs() < 1e-12);
        assert!((at(&suite[4], &[0.0]) - -1.0).abs() < 1e-12); // sin(0)cos(0) − 1
        assert!((at(&suite[5], &[0.0]) - 0.0).abs() < 1e-12);
        assert!((at(&suite[6], &[0.0]) - 0.0).abs() < 1e-12); // log(1)+log(1)
        assert!((at(&suite[7], &[4.0]) - 2.0).abs() < 1e-12); // √4
        let s9 = at(&suite[8], &[0.5, 1.0]);
        assert!((s9 - (0.5f64.sin() + 1.0f64.sin())).abs() < 1e-12);
        let s10 = at(&suite[9], &[0.5, 0.25]);
        assert!((s10 - 2.0 * 0.5f64.sin() * 0.25f64.cos()).abs() < 1e-12);
        let s11 = at(&suite[10], &[0.3, 2.5]);
        assert!((s11 - 0.3f64.powf(2.5)).abs() < 1e-12); // x^y
        let s12 = at(&suite[11], &[1.0, 1.0]);
        assert!((s12 - -0.5).abs() < 1e-12); // 1 − 1 + 1/2 − 1
    }

    #[test]
    fn datasets_are_fixed_sized_in_domain_and_deterministic() {
        for bench in nguyen_suite() {
            let a = bench.dataset();
            let b = bench.dataset();
            assert_eq!(a, b, "{} dataset not reproducible", bench.name);
            assert_eq!(a.inputs().rows(), 20);
            for r in 0..a.inputs().rows() {
                for (v, (lo, hi)) in a.inputs().row(r).iter().zip(&bench.domain) {
                    assert!(v >= lo && v < hi, "{} point out of domain", bench.name);
                }
            }
        }
    }

    #[test]
    fn truths_score_perfectly_and_self_recover() {
        for bench in nguyen_suite() {
            let data = bench.dataset();
            let r = reward(&bench.truth, &data, &bench.library).unwrap();
            assert_eq!(r, 1.0, "{} truth reward {r}", bench.name);
            assert!(
                crate::eval::recovery_check(
                    &bench.truth,
                    &bench.truth,
                    &bench.library,
                    &bench.domain
                ),
                "{} truth fails self-recovery",
                bench.name
            );
            // Renders without panicking; useful for reports.
            assert!(!to_infix(&bench.truth, &bench.library).unwrap().is_empty());
        }
    }

    #[test]
    fn variant_parsing_and_configs() {
        for v in Variant::ALL {
            assert_eq!(Variant::parse(v.name()), Some(v));
            assert_eq!(Variant::parse(&v.name().to_ascii_lowercase()), Some(v));
        }
        assert_eq!(Variant::parse("nope"), None);

        let se = Variant::Se.train_config();
        assert_eq!(se.entropy_mode, EntropyMode::Standard);
        assert_eq!(se.entropy_weight, 0.005);
        assert!(se.soft_length.is_none());

        let he = Variant::He.train_config();
        assert_eq!(he.entropy_mode, EntropyMode::Hierarchical);
        assert_eq!((he.entropy_weight, he.entropy_decay), (0.02, 0.85));

        let slp = Variant::Slp.train_config();
        assert_eq!(slp.soft_length, Some(SoftLengthConfig { target_length: 10, variance: 5.0 }));

        let both = Variant::SlpHe.train_config();
        assert_eq!((both.entropy_weight, both.entropy_decay), (0.03, 0.7));
        assert!(both.soft_length.is_some());
        assert!(Variant::ALL.iter().all(|v| v.train_config().equal_type_prior));
    }

    #[test]
    fn grids_have_documented_shapes_and_contain_optima() {
        assert_eq!(hyperparameter_grid(Variant::Se).len(), 5);
        assert_eq!(hyperparameter_grid(Variant::Slp).len(), 5);
        assert_eq!(hyperparameter_grid(Variant::He).len(), 25);
        assert_eq!(hyperparameter_grid(Variant::SlpHe).len(), 25);
        assert!(hyperparameter_grid(Variant::He)
            .iter()
            .any(|c| c.entropy_weight == 0.02 && c.entropy_decay == 0.85));
        assert!(hyperparameter_grid(Variant::SlpHe)
            .iter()
            .any(|c| c.entropy_weight == 0.03 && c.entropy_decay == 0.7));
    }

    #[test]
    fn cell_seeds_are_distinct_and_position_independent() {
        let suite = nguyen_suite();
        let spec = ExperimentSpec::new(Variant::Se, suite.clone(), 3, 99);
        let cells = spec.cells();
        let mut seeds: Vec<u64> = cells.iter().map(|c| c.seed).collect();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), cells.len());

        // Selecting a subset keeps each benchmark's seeds.
        let solo = ExperimentSpec::new(Variant::Se, vec![suite[4].clone()], 3, 99);
        let solo_seeds: Vec<u64> = solo.cells().iter().map(|c| c.seed).collect();
        let from_full: Vec<u64> =
            cells.iter().filter(|c| c.benchmark_pos == 4).map(|c| c.seed).collect();
        assert_eq!(solo_seeds, from_full);
    }

    #[test]
    fn trivial_benchmark_reaches_full_recovery() {
        let lib = Library::new([TokenKind::Add, TokenKind::Var(0)]).unwrap();
        let truth = TokenSequence::new(vec![lib.id_of(TokenKind::Var(0)).unwrap()]);
        let bench = Benchmark {
            name: String::from("identity"),
            index: 1000,
            library: lib,
            truth,
            domain: vec![(-1.0, 1.0)],
            train_points: 20,
        };
        let mut spec = ExperimentSpec::new(Variant::Se, vec![bench], 1, 5);
        spec.config.batch_size = 30;
        spec.config.max_steps = 30;
        spec.config.hidden_size = 4;
        spec.config.length_bounds = LengthBounds { min: 1, max: 8 };
        let result = spec.run().unwrap();
        assert_eq!(result.overall.recovery_rate, 1.0);
        assert_eq!(result.benchmarks.len(), 1);
        assert!(result.benchmarks[0].aggregate.mean_steps <= 30.0);
    }

    #[test]
    fn aggregates_recompute_from_runs() {
        let runs = vec![
            RunResult { recovered: true, steps_to_solve: 10, best: None },
            RunResult { recovered: false, steps_to_solve: 50, best: None },
        ];
        let agg = aggregate(&runs);
        assert_eq!(agg.recovery_rate, 0.5);
        assert_eq!(agg.mean_steps, 30.0);
        assert_eq!(agg.mean_best_length, 0.0);
    }

    #[test]
    fn trace_collector_extracts_figures() {
        let report = StepReport {
            step: 1,
            best_reward: 0.5,
            baseline: 0.4,
            position_entropy: vec![Some(2.0), Some(1.9), None, None, None, None],
            length_histogram: vec![0, 3, 7],
            kept: 2,
            best_expression: String::from("x1"),
        };
        let mut collector = TraceCollector::new();
        collector.record(&report);
        assert_eq!(collector.initial_length_histogram(), Some(&[0u32, 3, 7][..]));
        assert_eq!(collector.position_entropy_trace(1), vec![Some(2.0)]);
        assert_eq!(collector.position_entropy_trace(3), vec![None]);
    }
}
