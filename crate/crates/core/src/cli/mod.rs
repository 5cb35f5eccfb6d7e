//! Experiment runner behind the `moo-rank` binary.
//!
//! A run reads one JSON config, validates it completely, computes every
//! result in memory and only then writes files, so a failed run leaves the
//! output directory untouched.

mod config;
mod output;

use std::cmp::Ordering;
use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use serde_json::{json, Value};

pub use config::{ConstraintSpec, ExperimentConfig, Mode, ProblemKind, ScalingMode, SyntheticSpec};
pub use output::{
    emit_plot_data, front_csv, history_csv, interval_labels, read_front, write_artifacts, Artifact, LoadedFront,
};

use crate::algorithms::{run_do_nsga2, run_grid_search, GridParams, HypermutationConfig, RunParams, RunResult};
use crate::error::{Error, Result};
use crate::metrics::{
    average_hypervolume, confidence_uncertainty, hypervolume_2d, recovery_generations, IntervalSet, ScalingParams,
};
use crate::operators::OperatorParams;
use crate::problems::{zdt1_problem, DynamicSchedule, ProblemSpec};
use crate::surrogate::{
    generate_synthetic, load_dataset, objective_scaling, step_problems, write_dataset, ArticleSurrogate, Dataset,
};
use crate::types::{canonicalize, ObjectiveSense, Solution};

/// Share of the pre-transition hypervolume that counts as recovered.
pub const RECOVERY_FRACTION: f64 = 0.95;
/// Generations after a transition within which recovery is reported.
pub const RECOVERY_WINDOW: usize = 200;

#[derive(Debug, Clone, clap::Parser)]
#[command(name = "moo-rank", version, about = "Constrained, dynamic multi-objective optimization experiments")]
pub struct Cli {
    #[arg(value_enum)]
    pub mode: Mode,
    /// JSON experiment configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// 2 for configuration problems, 1 for everything else.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config { .. } => 2,
        _ => 1,
    }
}

pub fn main_with(cli: Cli) -> ExitCode {
    match execute(&cli) {
        Ok(dir) => {
            println!("{} results written to {}", cli.mode.name(), dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("moo-rank: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// Loads and validates the config, applies flag overrides, runs the mode
/// and writes its artifacts. Returns the output directory.
pub fn execute(cli: &Cli) -> Result<PathBuf> {
    let mut config = ExperimentConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        config.output_dir = dir.clone();
    }
    let artifacts = run_experiment(cli.mode, &config)?;
    write_artifacts(&config.output_dir, &artifacts)?;
    Ok(config.output_dir)
}

/// Runs `mode` and returns the files it produces, without touching disk.
pub fn run_experiment(mode: Mode, config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    config.validate(mode)?;
    match mode {
        Mode::Optimize | Mode::Dynamic => optimize(mode, config),
        Mode::GridSearch => grid_search(config),
        Mode::Compare => compare(config),
        Mode::Metrics => metrics(config),
        Mode::GenerateData => generate_data(config),
    }
}

struct Setup {
    schedule: DynamicSchedule,
    /// Fixed scaling for the per-generation hypervolume trace.
    trace_scaling: Option<ScalingParams>,
    provenance: Option<String>,
}

fn load_data(config: &ExperimentConfig, mode: Mode) -> Result<Dataset> {
    match (config.problem, &config.dataset_path) {
        (Some(ProblemKind::ArticleSurrogate), Some(path)) => {
            load_dataset(File::open(path)?, path.display().to_string())
        }
        _ => Ok(generate_synthetic(config.synthetic.seed, &config.synthetic_sizes(mode))),
    }
}

fn with_constraints(problem: ProblemSpec, config: &ExperimentConfig) -> Result<ProblemSpec> {
    let constraints = config
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| {
            problem
                .threshold_constraint(&c.objective, c.op, c.threshold, c.scale)
                .map_err(|e| Error::config(format!("constraints[{i}]"), e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(problem.with_constraints(constraints))
}

fn setup(config: &ExperimentConfig, mode: Mode) -> Result<Setup> {
    let kind = config.problem.expect("validated");
    if kind == ProblemKind::Zdt1 {
        let problem = with_constraints(zdt1_problem(config.n)?, config)?;
        return Ok(Setup {
            schedule: DynamicSchedule::fixed(problem),
            trace_scaling: None,
            provenance: None,
        });
    }
    let data = load_data(config, mode)?;
    let trace_scaling = Some(objective_scaling(&data));
    let provenance = Some(data.provenance.clone());
    if mode != Mode::Dynamic {
        let model = ArticleSurrogate::fit(&data, config.knn_k)?;
        let problem = with_constraints(model.problem()?, config)?;
        return Ok(Setup {
            schedule: DynamicSchedule::fixed(problem),
            trace_scaling,
            provenance,
        });
    }

    let available = data.time_steps();
    if available.len() < 2 {
        return Err(Error::config("dataset_path", "dynamic mode needs a dataset with at least two time steps"));
    }
    let order = config.schedule.clone().unwrap_or_else(|| available.clone());
    if let Some(missing) = order.iter().find(|s| !available.contains(s)) {
        return Err(Error::config("schedule", format!("time step {missing} is not in the dataset")));
    }
    let subset = Dataset::new(
        data.rows
            .iter()
            .filter(|r| r.time_step.is_some_and(|t| order.contains(&t)))
            .copied()
            .collect(),
        data.provenance.clone(),
    );
    let mut ascending = order.clone();
    ascending.sort_unstable();
    let mut problems: Vec<Option<ProblemSpec>> = step_problems(&subset, config.knn_k)?.into_iter().map(Some).collect();
    let steps = order
        .iter()
        .map(|s| {
            let idx = ascending.binary_search(s).expect("step present");
            let problem = problems[idx].take().expect("steps are distinct");
            Ok((config.generations, with_constraints(problem, config)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Setup {
        schedule: DynamicSchedule::new(steps)?,
        trace_scaling,
        provenance,
    })
}

fn run_params(config: &ExperimentConfig, setup: &Setup) -> RunParams {
    RunParams {
        population_size: config.population_size,
        generations: config.generations * setup.schedule.len(),
        operators: OperatorParams {
            p_c: config.p_c,
            eta_c: config.eta_c,
            p_m: config.mutation_probability(),
            eta_m: config.eta_m,
        },
        hypermutation: HypermutationConfig {
            boosted_p_m: config.boosted_p_m,
            epoch: config.epoch,
        },
        seed: config.seed,
        change_tol: config.change_tol,
        reference: config.reference.clone(),
        trace_scaling: setup.trace_scaling.clone(),
        parallel: config.parallel,
    }
}

fn compare_objectives(a: &Solution, b: &Solution) -> Ordering {
    a.objectives
        .iter()
        .zip(b.objectives.iter())
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// The front as written to disk: optionally feasible-only, ordered by the
/// minimization-sense objectives.
fn reported(front: &[Solution], config: &ExperimentConfig) -> Vec<Solution> {
    let mut out: Vec<Solution> = front
        .iter()
        .filter(|s| !config.feasible_only || s.is_feasible())
        .cloned()
        .collect();
    out.sort_by(compare_objectives);
    out
}

struct FrontMetrics {
    total_solutions: usize,
    hypervolume: f64,
    average_hypervolume: f64,
    confidence_uncertainty: Option<f64>,
}

impl FrontMetrics {
    fn to_json(&self) -> Value {
        json!({
            "total_solutions": self.total_solutions,
            "hypervolume": self.hypervolume,
            "average_hypervolume": self.average_hypervolume,
            "confidence_uncertainty": self.confidence_uncertainty,
        })
    }
}

fn score(
    canonical: &[Vec<f64>],
    intervals: Option<Vec<Vec<(f64, f64)>>>,
    scaling: Option<&ScalingParams>,
    reference: &[f64],
) -> Result<FrontMetrics> {
    if canonical.is_empty() {
        return Ok(FrontMetrics {
            total_solutions: 0,
            hypervolume: 0.0,
            average_hypervolume: 0.0,
            confidence_uncertainty: None,
        });
    }
    let points = match scaling {
        Some(s) => s.apply_all(canonical),
        None => canonical.to_vec(),
    };
    let cu = match intervals {
        Some(bounds) => Some(confidence_uncertainty(&IntervalSet { bounds })?.mean),
        None => None,
    };
    Ok(FrontMetrics {
        total_solutions: canonical.len(),
        hypervolume: hypervolume_2d(&points, reference)?.value,
        average_hypervolume: average_hypervolume(&points, reference)?,
        confidence_uncertainty: cu,
    })
}

fn canonical_of(front: &[Solution]) -> Vec<Vec<f64>> {
    front.iter().map(|s| s.objectives.to_vec()).collect()
}

fn intervals_of(problem: &ProblemSpec, front: &[Solution]) -> Result<Option<Vec<Vec<(f64, f64)>>>> {
    if !problem.has_intervals() {
        return Ok(None);
    }
    front
        .iter()
        .map(|s| problem.intervals(&s.design).expect("problem has intervals"))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn fit_scaling(config: &ExperimentConfig, fronts: &[&[Solution]]) -> Result<Option<ScalingParams>> {
    let all: Vec<Vec<f64>> = fronts.iter().flat_map(|f| canonical_of(f)).collect();
    match config.resolved_scaling() {
        ScalingMode::Fit if !all.is_empty() => ScalingParams::fit(&all).map(Some),
        _ => Ok(None),
    }
}

fn summary_bytes(value: &Value) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn header(mode: Mode, config: &ExperimentConfig, setup: Option<&Setup>) -> Value {
    json!({
        "mode": mode.name(),
        "problem": config.problem,
        "seed": config.seed,
        "dataset": setup.and_then(|s| s.provenance.clone()),
        "reference": config.reference,
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn echo(config: &ExperimentConfig) -> Value {
    let mut resolved = config.clone();
    resolved.p_m = Some(config.mutation_probability());
    serde_json::to_value(resolved).expect("config serializes")
}

fn recovery_report(result: &RunResult, schedule: &DynamicSchedule) -> Value {
    let trace: Vec<f64> = result.history.iter().map(|r| r.hypervolume).collect();
    schedule
        .transitions()
        .into_iter()
        .filter(|&t| t > 0 && t < trace.len())
        .map(|t| {
            json!({
                "generation": t,
                "before": trace[t - 1],
                "after": trace[t],
                "recovered_after": recovery_generations(&trace, t, RECOVERY_FRACTION, RECOVERY_WINDOW),
            })
        })
        .collect()
}

fn nsga_artifacts(result: &RunResult, front: &[Solution], setup: &Setup, config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let last = setup.schedule.step(setup.schedule.len() - 1);
    let mut out = vec![
        Artifact::new("pareto_front.csv", front_csv(last, front)?),
        Artifact::new("history.csv", history_csv(&result.history)?),
    ];
    out.extend(emit_plot_data(result, &setup.schedule, |f| reported(f, config))?);
    Ok(out)
}

fn optimize(mode: Mode, config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let setup = setup(config, mode)?;
    let result = run_do_nsga2(&setup.schedule, &run_params(config, &setup))?;
    let front = reported(&result.final_pareto, config);
    let last = setup.schedule.step(setup.schedule.len() - 1);
    let scaling = fit_scaling(config, &[&front])?;
    let metrics = score(&canonical_of(&front), intervals_of(last, &front)?, scaling.as_ref(), &config.reference)?;

    let mut summary = merge(header(mode, config, Some(&setup)), metrics.to_json());
    summary = merge(
        summary,
        json!({
            "feasible": result.feasible,
            "scaling": scaling,
            "generations_run": result.history.len(),
            "initial_best_violation": result.initial_best_violation,
            "wall_time_s": result.wall_time,
        }),
    );
    if mode == Mode::Dynamic {
        summary = merge(summary, json!({ "transitions": recovery_report(&result, &setup.schedule) }));
    }
    summary = merge(summary, json!({ "config": echo(config) }));

    let mut artifacts = nsga_artifacts(&result, &front, &setup, config)?;
    artifacts.push(Artifact::new("summary.json", summary_bytes(&summary)?));
    Ok(artifacts)
}

fn grid_params(config: &ExperimentConfig) -> GridParams {
    GridParams {
        inc: config.inc,
        cap: config.grid_cap as u128,
    }
}

struct GridRun {
    front: Vec<Solution>,
    evaluations: usize,
    feasible: bool,
    wall_time: f64,
}

fn run_grid(config: &ExperimentConfig, problem: &ProblemSpec) -> Result<GridRun> {
    let started = Instant::now();
    let result = run_grid_search(&problem.bounds, problem, &grid_params(config))?;
    Ok(GridRun {
        front: reported(&result.pareto, config),
        evaluations: result.evaluations,
        feasible: result.feasible,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

fn grid_search(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let setup = setup(config, Mode::GridSearch)?;
    let problem = setup.schedule.step(0);
    let grid = run_grid(config, problem)?;
    let scaling = fit_scaling(config, &[&grid.front])?;
    let metrics = score(&canonical_of(&grid.front), intervals_of(problem, &grid.front)?, scaling.as_ref(), &config.reference)?;
    let summary = merge(
        merge(header(Mode::GridSearch, config, Some(&setup)), metrics.to_json()),
        json!({
            "feasible": grid.feasible,
            "scaling": scaling,
            "evaluations": grid.evaluations,
            "wall_time_s": grid.wall_time,
            "config": echo(config),
        }),
    );
    Ok(vec![
        Artifact::new("pareto_front.csv", front_csv(problem, &grid.front)?),
        Artifact::new("history.csv", history_csv(&[])?),
        Artifact::new("summary.json", summary_bytes(&summary)?),
    ])
}

fn compare(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let setup = setup(config, Mode::Compare)?;
    let problem = setup.schedule.step(0);
    let result = run_do_nsga2(&setup.schedule, &run_params(config, &setup))?;
    let nsga_front = reported(&result.final_pareto, config);
    let grid = run_grid(config, problem)?;

    let scaling = fit_scaling(config, &[&nsga_front, &grid.front])?;
    let nsga = score(&canonical_of(&nsga_front), intervals_of(problem, &nsga_front)?, scaling.as_ref(), &config.reference)?;
    let base = score(&canonical_of(&grid.front), intervals_of(problem, &grid.front)?, scaling.as_ref(), &config.reference)?;
    let summary = merge(
        header(Mode::Compare, config, Some(&setup)),
        json!({
            "scaling": scaling,
            "do_nsga2": merge(nsga.to_json(), json!({
                "feasible": result.feasible,
                "generations_run": result.history.len(),
                "wall_time_s": result.wall_time,
            })),
            "grid_search": merge(base.to_json(), json!({
                "feasible": grid.feasible,
                "evaluations": grid.evaluations,
                "wall_time_s": grid.wall_time,
            })),
            "config": echo(config),
        }),
    );
    let mut artifacts = nsga_artifacts(&result, &nsga_front, &setup, config)?;
    artifacts.push(Artifact::new("grid_front.csv", front_csv(problem, &grid.front)?));
    artifacts.push(Artifact::new("summary.json", summary_bytes(&summary)?));
    Ok(artifacts)
}

/// Objective column labels and senses of each problem kind, as written by
/// the other modes.
fn front_columns(kind: ProblemKind) -> (Vec<String>, Vec<ObjectiveSense>) {
    match kind {
        ProblemKind::Zdt1 => (vec!["f1".into(), "f2".into()], vec![ObjectiveSense::Minimize; 2]),
        _ => (
            kind.objective_names().iter().map(|n| format!("log10_{n}")).collect(),
            vec![ObjectiveSense::Maximize; 2],
        ),
    }
}

fn metrics(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let path = config.front_path.as_ref().expect("validated");
    let (labels, senses) = front_columns(config.problem.expect("validated"));
    let loaded = read_front(path, &labels)?;
    let canonical = loaded
        .objectives
        .iter()
        .map(|raw| canonicalize(raw, &senses).map(|c| c.into_inner()))
        .collect::<Result<Vec<_>>>()?;
    let scaling = match config.resolved_scaling() {
        ScalingMode::Fit if !canonical.is_empty() => Some(ScalingParams::fit(&canonical)?),
        _ => None,
    };
    let metrics = score(&canonical, loaded.intervals, scaling.as_ref(), &config.reference)?;
    let summary = merge(
        merge(header(Mode::Metrics, config, None), metrics.to_json()),
        json!({
            "front_path": path,
            "scaling": scaling,
            "config": echo(config),
        }),
    );
    Ok(vec![Artifact::new("summary.json", summary_bytes(&summary)?)])
}

fn generate_data(config: &ExperimentConfig) -> Result<Vec<Artifact>> {
    let sizes = config.synthetic.sizes.clone().unwrap_or_else(|| crate::surrogate::DYNAMIC_SIZES.to_vec());
    let data = generate_synthetic(config.synthetic.seed, &sizes);
    let mut bytes = Vec::new();
    write_dataset(&data, &mut bytes)?;
    let summary = json!({
        "mode": Mode::GenerateData.name(),
        "rows": data.len(),
        "sizes": sizes,
        "provenance": data.provenance,
    });
    Ok(vec![
        Artifact::new("dataset.csv", bytes),
        Artifact::new("summary.json", summary_bytes(&summary)?),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zdt1_config(extra: &str) -> ExperimentConfig {
        let text = format!(
            r#"{{"problem": "zdt1", "n": 4, "population_size": 20, "generations": 15, "inc": 50 {extra}}}"#
        );
        ExperimentConfig::from_json(&text).unwrap()
    }

    fn artifact<'a>(artifacts: &'a [Artifact], name: &str) -> &'a Artifact {
        artifacts.iter().find(|a| a.name == name).unwrap_or_else(|| panic!("missing {name}"))
    }

    fn summary(artifacts: &[Artifact]) -> Value {
        serde_json::from_slice(&artifact(artifacts, "summary.json").bytes).unwrap()
    }

    #[test]
    fn optimize_produces_all_files() {
        let out = run_experiment(Mode::Optimize, &zdt1_config("")).unwrap();
        let names: Vec<&str> = out.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(
            names,
            ["pareto_front.csv", "history.csv", "front_step_1.csv", "hv_per_generation.csv", "summary.json"]
        );
        let s = summary(&out);
        assert_eq!(s["mode"], "optimize");
        assert_eq!(s["config"]["p_m"], 0.25);
        assert!(s["hypervolume"].as_f64().unwrap() > 0.0);
        assert!(s["confidence_uncertainty"].is_null());
        let history = String::from_utf8(artifact(&out, "history.csv").bytes.clone()).unwrap();
        assert_eq!(history.lines().count(), 16);
    }

    #[test]
    fn grid_search_counts_evaluations() {
        let out = run_experiment(Mode::GridSearch, &zdt1_config("")).unwrap();
        assert_eq!(summary(&out)["evaluations"], 81);
        let history = String::from_utf8(artifact(&out, "history.csv").bytes.clone()).unwrap();
        assert_eq!(history.lines().count(), 1);
    }

    #[test]
    fn compare_reports_both_algorithms() {
        let out = run_experiment(Mode::Compare, &zdt1_config(r#", "scaling": "fit""#)).unwrap();
        let s = summary(&out);
        for key in ["do_nsga2", "grid_search"] {
            assert!(s[key]["total_solutions"].as_u64().unwrap() > 0);
            assert!(s[key]["hypervolume"].as_f64().unwrap() > 0.0);
        }
        assert!(s["scaling"]["min"].is_array());
        assert!(out.iter().any(|a| a.name == "grid_front.csv"));
    }

    #[test]
    fn feasible_only_can_empty_the_front() {
        let c = zdt1_config(
            r#", "feasible_only": true, "constraints": [{"objective": "f1", "op": ">", "threshold": 5}]"#,
        );
        let out = run_experiment(Mode::Optimize, &c).unwrap();
        let front = String::from_utf8(artifact(&out, "pareto_front.csv").bytes.clone()).unwrap();
        assert_eq!(front, "x1,x2,x3,x4,f1,f2,violation,feasible\n");
        let s = summary(&out);
        assert_eq!(s["total_solutions"], 0);
        assert_eq!(s["feasible"], false);
    }

    #[test]
    fn dynamic_synthetic_writes_one_front_per_step() {
        let c = ExperimentConfig::from_json(
            r#"{"problem": "article-synthetic", "population_size": 12, "generations": 6,
                "synthetic": {"seed": 3, "sizes": [300, 300, 300]}, "knn_k": 3}"#,
        )
        .unwrap();
        let out = run_experiment(Mode::Dynamic, &c).unwrap();
        for step in 1..=3 {
            artifact(&out, &format!("front_step_{step}.csv"));
        }
        let s = summary(&out);
        assert_eq!(s["generations_run"], 18);
        let transitions: Vec<u64> =
            s["transitions"].as_array().unwrap().iter().map(|t| t["generation"].as_u64().unwrap()).collect();
        assert_eq!(transitions, vec![6, 12]);
        assert!(s["confidence_uncertainty"].is_number());
    }

    #[test]
    fn schedule_reorders_steps() {
        let c = ExperimentConfig::from_json(
            r#"{"problem": "article-synthetic", "population_size": 8, "generations": 2, "schedule": [3, 1],
                "synthetic": {"seed": 3, "sizes": [200, 200, 200]}, "knn_k": 2}"#,
        )
        .unwrap();
        let out = run_experiment(Mode::Dynamic, &c).unwrap();
        assert_eq!(summary(&out)["generations_run"], 4);

        let missing = ExperimentConfig { schedule: Some(vec![4]), ..c.clone() };
        match run_experiment(Mode::Dynamic, &missing) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "schedule"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn metrics_mode_matches_optimize_summary() {
        let dir = tempfile::tempdir().unwrap();
        let c = zdt1_config("");
        let out = run_experiment(Mode::Optimize, &c).unwrap();
        write_artifacts(dir.path(), &out).unwrap();
        let m = ExperimentConfig {
            front_path: Some(dir.path().join("pareto_front.csv")),
            ..c
        };
        let recomputed = summary(&run_experiment(Mode::Metrics, &m).unwrap());
        let original = summary(&out);
        let a = original["hypervolume"].as_f64().unwrap();
        let b = recomputed["hypervolume"].as_f64().unwrap();
        assert!((a - b).abs() <= 1e-9);
        assert_eq!(original["total_solutions"], recomputed["total_solutions"]);
    }

    #[test]
    fn generate_data_round_trips() {
        let c = ExperimentConfig::from_json(r#"{"synthetic": {"seed": 1, "sizes": [50, 60]}}"#).unwrap();
        let out = run_experiment(Mode::GenerateData, &c).unwrap();
        let data = load_dataset(&artifact(&out, "dataset.csv").bytes[..], "mem").unwrap();
        assert_eq!(data.len(), 110);
        assert_eq!(data.time_steps(), vec![1, 2]);
    }
}
