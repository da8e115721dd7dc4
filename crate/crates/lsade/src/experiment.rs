//! Replicated experiment runner: seeded independent runs, an optional worker
//! pool, per-run convergence CSVs, and a JSON summary with the fully resolved
//! configuration.

use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::BoxBounds;
use crate::optimizer::{self, ComponentCounts, LsadeConfig, RunTrace, VariantTriplet};
use crate::problems::{BenchmarkProblem, SubprocessEvaluator};
use crate::{Error, Result};

/// Caps the worker pool regardless of the experiment's `threads` setting.
pub const THREADS_ENV: &str = "LSADE_THREADS";

/// What each run optimizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ObjectiveSpec {
    /// One of the built-in benchmark functions.
    Builtin { problem: BenchmarkProblem },
    /// External evaluator command speaking the line protocol; each run gets
    /// its own process.
    External { command: String, bounds: BoxBounds },
}

impl ObjectiveSpec {
    pub fn bounds(&self) -> &BoxBounds {
        match self {
            ObjectiveSpec::Builtin { problem } => problem.bounds(),
            ObjectiveSpec::External { bounds, .. } => bounds,
        }
    }

    /// Short name for logs and file paths.
    pub fn label(&self) -> String {
        match self {
            ObjectiveSpec::Builtin { problem } => problem.kind().to_string(),
            ObjectiveSpec::External { .. } => "external".into(),
        }
    }
}

/// How the components are driven across a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunRule {
    /// Follow the schedule in the run configuration.
    Schedule,
    /// Force components constantly on or off; all-off degenerates to uniform
    /// random search over the whole budget.
    Ablation(VariantTriplet),
}

/// One replicated experiment: `runs` independent optimizations of the same
/// objective, run `i` seeded with `base_seed + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub objective: ObjectiveSpec,
    pub rule: RunRule,
    pub runs: usize,
    pub base_seed: u64,
    /// Fully resolved per-run settings; the seed field is overwritten per
    /// run with the derived seed.
    pub config: LsadeConfig,
    /// Worker pool size; default is the machine's parallelism. The
    /// `LSADE_THREADS` environment variable caps the result either way.
    pub threads: Option<usize>,
    /// Destination for `run_<seed>.csv` files and `summary.json`; nothing is
    /// persisted when unset.
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    /// A spec with conventional run settings derived from the objective's
    /// bounds. Callers adjust the public fields afterwards.
    pub fn new(objective: ObjectiveSpec, rule: RunRule, runs: usize, base_seed: u64) -> Self {
        let config = LsadeConfig::for_bounds(objective.bounds().clone(), base_seed);
        Self {
            objective,
            rule,
            runs,
            base_seed,
            config,
            threads: None,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::invalid("an experiment needs at least one run"));
        }
        if self.config.bounds != *self.objective.bounds() {
            return Err(Error::invalid(
                "run configuration bounds differ from the objective's bounds",
            ));
        }
        self.config.validate()
    }
}

/// Per-run outcome, persisted inside the summary JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub final_f: f64,
    pub final_x: Vec<f64>,
    pub nfe: usize,
    pub component_counts: ComponentCounts,
    pub wall_time: f64,
}

/// Order statistics over the runs' final objective values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub best: f64,
    pub mean: f64,
    pub worst: f64,
    /// Sample standard deviation (n − 1 denominator); 0 for a single run.
    pub std: f64,
    pub mean_wall_time: f64,
}

/// Everything `run_experiment` produces, mirrored into `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub spec: ExperimentSpec,
    pub summary: SummaryStats,
    pub runs: Vec<RunRecord>,
}

/// Min/mean/max and sample standard deviation over final values, plus the
/// mean wall time. Errors on empty or mismatched inputs.
pub fn summarize(values: &[f64], times: &[f64]) -> Result<SummaryStats> {
    if values.is_empty() {
        return Err(Error::invalid("summarize needs at least one value"));
    }
    if values.len() != times.len() {
        return Err(Error::invalid(format!(
            "got {} values but {} wall times",
            values.len(),
            times.len()
        )));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let worst = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let std = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Ok(SummaryStats {
        best,
        mean,
        worst,
        std,
        mean_wall_time: times.iter().sum::<f64>() / n,
    })
}

/// Runs the whole experiment: all seeds, optional parallelism, persistence,
/// and the final summary. Output problems are caught before any run starts.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    spec.validate()?;
    if let Some(dir) = &spec.out_dir {
        prepare_out_dir(dir)?;
    }

    let traces = run_all(spec)?;

    let records: Vec<RunRecord> = traces
        .iter()
        .enumerate()
        .map(|(i, t)| RunRecord {
            seed: spec.base_seed + i as u64,
            final_f: t.final_best.f,
            final_x: t.final_best.x.clone(),
            nfe: t.nfe,
            component_counts: t.component_counts,
            wall_time: t.wall_time,
        })
        .collect();
    let values: Vec<f64> = records.iter().map(|r| r.final_f).collect();
    let times: Vec<f64> = records.iter().map(|r| r.wall_time).collect();
    let report = ExperimentReport {
        spec: spec.clone(),
        summary: summarize(&values, &times)?,
        runs: records,
    };

    if let Some(dir) = &spec.out_dir {
        for (trace, record) in traces.iter().zip(&report.runs) {
            write_run_csv(&dir.join(format!("run_{}.csv", record.seed)), trace)?;
        }
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::invalid(format!("summary serialization: {e}")))?;
        fs::write(dir.join("summary.json"), json + "\n")?;
    }
    Ok(report)
}

/// All runs, ordered by run index regardless of completion order.
fn run_all(spec: &ExperimentSpec) -> Result<Vec<RunTrace>> {
    let workers = effective_threads(spec.threads);
    if workers <= 1 || spec.runs <= 1 {
        return (0..spec.runs).map(|i| run_one(spec, i)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    pool.install(|| (0..spec.runs).into_par_iter().map(|i| run_one(spec, i)).collect())
}

fn run_one(spec: &ExperimentSpec, index: usize) -> Result<RunTrace> {
    let mut cfg = spec.config.clone();
    cfg.seed = spec.base_seed + index as u64;
    let dispatch = |objective: &mut dyn FnMut(&[f64]) -> Result<f64>| match spec.rule {
        RunRule::Schedule => optimizer::run_lsade(objective, &cfg),
        RunRule::Ablation(v) => optimizer::run_variant(objective, &cfg, v),
    };
    match &spec.objective {
        ObjectiveSpec::Builtin { problem } => dispatch(&mut |x| Ok(problem.value(x))),
        ObjectiveSpec::External { command, .. } => {
            let mut eval = SubprocessEvaluator::spawn(command)?;
            dispatch(&mut |x| eval.eval(x))
        }
    }
}

/// Requested size, defaulted to the machine's parallelism and capped by the
/// `LSADE_THREADS` environment variable; always at least 1.
fn effective_threads(requested: Option<usize>) -> usize {
    let mut n = requested.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(NonZeroUsize::get)
            .unwrap_or(1)
    });
    if let Some(cap) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&cap| cap >= 1)
    {
        n = n.min(cap);
    }
    n.max(1)
}

/// Creates the output directory and proves it is writable.
fn prepare_out_dir(dir: &Path) -> Result<()> {
    let check = |e: std::io::Error| {
        Error::invalid(format!("output directory {} is not usable: {e}", dir.display()))
    };
    fs::create_dir_all(dir).map_err(check)?;
    let probe = dir.join(".write_probe");
    fs::write(&probe, b"ok").map_err(check)?;
    fs::remove_file(&probe).map_err(check)?;
    Ok(())
}

fn write_run_csv(path: &Path, trace: &RunTrace) -> Result<()> {
    let mut out = String::with_capacity(16 * (trace.history.len() + 1));
    out.push_str("nfe,best_f\n");
    for (nfe, best) in &trace.history {
        out.push_str(&format!("{nfe},{best}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a convergence CSV written by [`run_experiment`] back into `(nfe,
/// best_f)` rows.
pub fn read_run_csv(path: &Path) -> Result<Vec<(usize, f64)>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("nfe,best_f") => {}
        other => {
            return Err(Error::invalid(format!(
                "{}: expected 'nfe,best_f' header, got {other:?}",
                path.display()
            )))
        }
    }
    lines
        .map(|line| {
            let bad = || Error::invalid(format!("{}: bad row '{line}'", path.display()));
            let (nfe, best) = line.split_once(',').ok_or_else(bad)?;
            Ok((
                nfe.parse().map_err(|_| bad())?,
                best.parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::ProblemKind;
    use crate::schedule::SchedulePolicy;

    fn tiny_spec(runs: usize, seed: u64) -> ExperimentSpec {
        let problem = BenchmarkProblem::new(ProblemKind::Ellipsoid, 2).unwrap();
        let mut spec = ExperimentSpec::new(
            ObjectiveSpec::Builtin { problem },
            RunRule::Schedule,
            runs,
            seed,
        );
        spec.config.nfe_max = 60;
        spec.config.initial_points = 20;
        spec.config.policy = SchedulePolicy::static_periods(1, 1, 1).unwrap();
        spec
    }

    #[test]
    fn summarize_matches_hand_arithmetic() {
        let s = summarize(&[1.0, 2.0, 3.0], &[0.1, 0.1, 0.1]).unwrap();
        assert_eq!(s.best, 1.0);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.worst, 3.0);
        assert_eq!(s.std, 1.0);
        assert!((s.mean_wall_time - 0.1).abs() < 1e-15);
    }

    #[test]
    fn summarize_handles_singletons_and_rejects_empties() {
        let s = summarize(&[4.5], &[2.0]).unwrap();
        assert_eq!((s.best, s.mean, s.worst, s.std), (4.5, 4.5, 4.5, 0.0));
        assert!(summarize(&[], &[]).is_err());
        assert!(summarize(&[1.0], &[]).is_err());
    }

    #[test]
    fn summarize_orders_extremes() {
        let s = summarize(&[0.021, 0.0039], &[1.0, 1.0]).unwrap();
        assert_eq!(s.best, 0.0039);
        assert_eq!(s.worst, 0.021);
        assert!(s.best <= s.mean && s.mean <= s.worst);
    }

    #[test]
    fn experiment_persists_ordered_runs_and_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = tiny_spec(3, 40);
        spec.out_dir = Some(dir.path().to_path_buf());
        let report = run_experiment(&spec).unwrap();

        assert_eq!(report.runs.len(), 3);
        let seeds: Vec<u64> = report.runs.iter().map(|r| r.seed).collect();
        assert_eq!(seeds, vec![40, 41, 42]);
        assert!(report.summary.best <= report.summary.mean);
        assert!(report.summary.mean <= report.summary.worst);

        assert!(dir.path().join("summary.json").is_file());
        for seed in seeds {
            let rows = read_run_csv(&dir.path().join(format!("run_{seed}.csv"))).unwrap();
            assert_eq!(rows.len(), 60);
            for pair in rows.windows(2) {
                assert!(pair[1].0 > pair[0].0, "nfe must strictly increase");
                assert!(pair[1].1 <= pair[0].1, "best-so-far must not regress");
            }
        }
    }

    #[test]
    fn summary_is_recomputable_from_the_csvs() {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = tiny_spec(3, 7);
        spec.out_dir = Some(dir.path().to_path_buf());
        let report = run_experiment(&spec).unwrap();

        let finals: Vec<f64> = report
            .runs
            .iter()
            .map(|r| {
                let rows =
                    read_run_csv(&dir.path().join(format!("run_{}.csv", r.seed))).unwrap();
                rows.last().unwrap().1
            })
            .collect();
        let times: Vec<f64> = report.runs.iter().map(|r| r.wall_time).collect();
        let recomputed = summarize(&finals, &times).unwrap();
        assert_eq!(recomputed.best, report.summary.best);
        assert_eq!(recomputed.mean, report.summary.mean);
        assert_eq!(recomputed.worst, report.summary.worst);
        assert_eq!(recomputed.std, report.summary.std);
    }

    #[test]
    fn identical_specs_produce_identical_artifacts_modulo_wall_time() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let mut spec_a = tiny_spec(2, 11);
        spec_a.out_dir = Some(dir_a.path().to_path_buf());
        let mut spec_b = tiny_spec(2, 11);
        spec_b.out_dir = Some(dir_b.path().to_path_buf());
        spec_b.threads = Some(2);

        run_experiment(&spec_a).unwrap();
        run_experiment(&spec_b).unwrap();

        for seed in [11, 12] {
            let a = fs::read(dir_a.path().join(format!("run_{seed}.csv"))).unwrap();
            let b = fs::read(dir_b.path().join(format!("run_{seed}.csv"))).unwrap();
            assert_eq!(a, b, "per-run CSVs must be byte-identical");
        }

        let scrub = |path: &Path| -> serde_json::Value {
            let mut v: serde_json::Value =
                serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
            fn strip(v: &mut serde_json::Value) {
                match v {
                    serde_json::Value::Object(map) => {
                        map.remove("wall_time");
                        map.remove("mean_wall_time");
                        map.remove("out_dir");
                        map.remove("threads");
                        map.values_mut().for_each(strip);
                    }
                    serde_json::Value::Array(items) => items.iter_mut().for_each(strip),
                    _ => {}
                }
            }
            strip(&mut v);
            v
        };
        assert_eq!(
            scrub(&dir_a.path().join("summary.json")),
            scrub(&dir_b.path().join("summary.json"))
        );
    }

    #[test]
    fn unusable_output_directory_fails_fast() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("blocker");
        fs::write(&blocker, b"file, not dir").unwrap();
        let mut spec = tiny_spec(1, 0);
        spec.out_dir = Some(blocker.join("sub"));
        let err = run_experiment(&spec).unwrap_err();
        assert!(err.to_string().contains("not usable"), "{err}");
    }

    #[test]
    fn external_objective_runs_through_the_line_protocol() {
        // Sum of coordinates, minimized at the lower corner.
        let bounds = BoxBounds::uniform(0.0, 1.0, 2).unwrap();
        let mut spec = ExperimentSpec::new(
            ObjectiveSpec::External {
                command: crate::problems::SUM_EVALUATOR.into(),
                bounds,
            },
            RunRule::Schedule,
            1,
            5,
        );
        spec.config.nfe_max = 25;
        spec.config.initial_points = 15;
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.runs[0].nfe, 25);
        let probe = report.runs[0].final_f;
        assert!((0.0..=2.0).contains(&probe));
    }

    #[test]
    fn thread_cap_environment_variable_wins() {
        std::env::set_var(THREADS_ENV, "1");
        assert_eq!(effective_threads(Some(8)), 1);
        std::env::remove_var(THREADS_ENV);
        assert_eq!(effective_threads(Some(8)), 8);
        assert!(effective_threads(None) >= 1);
    }

    #[test]
    fn ablation_rule_is_dispatched() {
        let mut spec = tiny_spec(1, 3);
        spec.rule = RunRule::Ablation(VariantTriplet::new(false, false, false));
        let report = run_experiment(&spec).unwrap();
        assert_eq!(report.runs[0].component_counts.as_tuple(), (0, 0, 0));
        assert_eq!(report.runs[0].nfe, 60);
    }
}
