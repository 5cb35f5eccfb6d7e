use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algorithms::{GridParams, DEFAULT_GRID_CAP};
use crate::error::{Error, Result};
use crate::problems::{Comparison, ValueScale};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Optimize,
    GridSearch,
    Compare,
    Dynamic,
    Metrics,
    /// Writes the synthetic article dataset as CSV.
    GenerateData,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Optimize => "optimize",
            Mode::GridSearch => "grid-search",
            Mode::Compare => "compare",
            Mode::Dynamic => "dynamic",
            Mode::Metrics => "metrics",
            Mode::GenerateData => "generate-data",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Zdt1,
    /// KNN surrogate fitted on the CSV at `dataset_path`.
    ArticleSurrogate,
    /// KNN surrogate fitted on generated synthetic data.
    ArticleSynthetic,
}

impl ProblemKind {
    pub fn objective_names(self) -> [&'static str; 2] {
        match self {
            ProblemKind::Zdt1 => ["f1", "f2"],
            _ => crate::surrogate::OBJECTIVE_NAMES,
        }
    }

    pub fn is_article(self) -> bool {
        self != ProblemKind::Zdt1
    }
}

/// How summary hypervolumes are scaled before measuring against the
/// reference point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalingMode {
    /// `none` for ZDT1, `fit` for the article problems.
    #[default]
    Auto,
    /// Min-max scale fitted on the reported front (jointly on both fronts in
    /// compare mode).
    Fit,
    /// Raw minimization-sense objectives.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub objective: String,
    pub op: Comparison,
    pub threshold: f64,
    #[serde(default)]
    pub scale: ValueScale,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub seed: u64,
    /// Rows per time step. Defaults to the static size, or the four dynamic
    /// sizes in dynamic mode.
    pub sizes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Optional; when present it must agree with the mode on the command line.
    pub mode: Option<Mode>,
    pub problem: Option<ProblemKind>,
    /// ZDT1 dimension.
    pub n: usize,
    pub dataset_path: Option<PathBuf>,
    pub synthetic: SyntheticSpec,
    pub knn_k: usize,
    pub constraints: Vec<ConstraintSpec>,
    pub population_size: usize,
    /// Generations per run; in dynamic mode, generations per time step.
    pub generations: usize,
    pub p_c: f64,
    pub eta_c: f64,
    /// Defaults to `1/n`.
    pub p_m: Option<f64>,
    pub eta_m: f64,
    pub boosted_p_m: f64,
    pub epoch: usize,
    pub change_tol: f64,
    pub seed: u64,
    pub inc: f64,
    pub grid_cap: u64,
    pub reference: Vec<f64>,
    pub scaling: ScalingMode,
    /// Time steps to run in dynamic mode, in order. Defaults to every step in
    /// the dataset.
    pub schedule: Option<Vec<u8>>,
    /// Front CSV to score in metrics mode.
    pub front_path: Option<PathBuf>,
    /// Drop infeasible members from the reported front.
    pub feasible_only: bool,
    pub parallel: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: None,
            problem: None,
            n: 30,
            dataset_path: None,
            synthetic: SyntheticSpec::default(),
            knn_k: 10,
            constraints: Vec::new(),
            population_size: 500,
            generations: 500,
            p_c: 0.9,
            eta_c: 15.0,
            p_m: None,
            eta_m: 1.0,
            boosted_p_m: 1.0,
            epoch: 10,
            change_tol: 1e-9,
            seed: 0,
            inc: 10.0,
            grid_cap: DEFAULT_GRID_CAP as u64,
            reference: vec![2.0, 2.0],
            scaling: ScalingMode::Auto,
            schedule: None,
            front_path: None,
            feasible_only: false,
            parallel: true,
            output_dir: PathBuf::from("results"),
        }
    }
}

fn field(name: impl Into<String>, message: impl Into<String>) -> Error {
    Error::config(name, message)
}

fn check_probability(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(field(name, format!("{value} is not a probability in [0, 1]")))
    }
}

fn check_non_negative(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(field(name, format!("{value} must be finite and non-negative")))
    }
}

impl ExperimentConfig {
    /// Parses a JSON document. Errors name the offending field path.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let path = if path == "." { "<root>".to_string() } else { path };
            Error::config(path, e.into_inner().to_string())
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Number of design variables of the configured problem.
    pub fn dimension(&self) -> usize {
        match self.problem {
            Some(ProblemKind::Zdt1) => self.n,
            _ => crate::surrogate::DESIGN_NAMES.len(),
        }
    }

    pub fn mutation_probability(&self) -> f64 {
        self.p_m.unwrap_or(1.0 / self.dimension() as f64)
    }

    /// Synthetic row counts for `mode`.
    pub fn synthetic_sizes(&self, mode: Mode) -> Vec<usize> {
        use crate::surrogate::{DYNAMIC_SIZES, STATIC_SIZE};
        match &self.synthetic.sizes {
            Some(sizes) => sizes.clone(),
            None if mode == Mode::Dynamic => DYNAMIC_SIZES.to_vec(),
            None => vec![STATIC_SIZE],
        }
    }

    pub fn resolved_scaling(&self) -> ScalingMode {
        match (self.scaling, self.problem) {
            (ScalingMode::Auto, Some(ProblemKind::Zdt1)) => ScalingMode::None,
            (ScalingMode::Auto, _) => ScalingMode::Fit,
            (explicit, _) => explicit,
        }
    }

    /// Checks every field `mode` depends on.
    pub fn validate(&self, mode: Mode) -> Result<()> {
        if let Some(declared) = self.mode {
            if declared != mode {
                return Err(field(
                    "mode",
                    format!("config declares `{}` but `{}` was requested", declared.name(), mode.name()),
                ));
            }
        }
        if mode == Mode::GenerateData {
            return self.validate_synthetic(mode);
        }
        let problem = self.problem.ok_or_else(|| field("problem", "required in this mode"))?;

        match problem {
            ProblemKind::Zdt1 if self.n < 2 => return Err(field("n", "ZDT1 needs at least two variables")),
            ProblemKind::Zdt1 if mode == Mode::Dynamic => {
                return Err(field("problem", "dynamic mode needs an article problem with time steps"));
            }
            ProblemKind::ArticleSurrogate if self.dataset_path.is_none() && mode != Mode::Metrics => {
                return Err(field("dataset_path", "required for article-surrogate"));
            }
            ProblemKind::ArticleSynthetic => self.validate_synthetic(mode)?,
            _ => {}
        }
        if self.knn_k == 0 {
            return Err(field("knn_k", "must be at least 1"));
        }

        let names = problem.objective_names();
        for (i, c) in self.constraints.iter().enumerate() {
            if !names.contains(&c.objective.as_str()) {
                return Err(field(
                    format!("constraints[{i}].objective"),
                    format!("unknown objective `{}`; expected one of {names:?}", c.objective),
                ));
            }
            if !c.threshold.is_finite() {
                return Err(field(format!("constraints[{i}].threshold"), "must be finite"));
            }
        }

        if self.reference.len() != 2 || self.reference.iter().any(|r| !r.is_finite()) {
            return Err(field("reference", "must be two finite numbers"));
        }

        match mode {
            Mode::Optimize | Mode::Dynamic | Mode::Compare => self.validate_run()?,
            _ => {}
        }
        if matches!(mode, Mode::GridSearch | Mode::Compare) {
            let grid = GridParams {
                inc: self.inc,
                cap: self.grid_cap as u128,
            };
            let v = grid.points_per_variable().map_err(|e| field("inc", e.to_string()))?;
            let size = (v as u128).checked_pow(self.dimension() as u32).unwrap_or(u128::MAX);
            if size > grid.cap {
                return Err(field("inc", format!("grid of {size} candidates exceeds grid_cap {}", grid.cap)));
            }
        }
        if mode == Mode::Dynamic {
            if let Some(schedule) = &self.schedule {
                let distinct: BTreeSet<u8> = schedule.iter().copied().collect();
                if schedule.is_empty() || distinct.len() != schedule.len() {
                    return Err(field("schedule", "must list distinct time steps"));
                }
                if let Some(bad) = schedule.iter().find(|s| !(1..=4).contains(*s)) {
                    return Err(field("schedule", format!("time step {bad} is outside 1..=4")));
                }
            }
        }
        if mode == Mode::Metrics && self.front_path.is_none() {
            return Err(field("front_path", "required in metrics mode"));
        }
        Ok(())
    }

    fn validate_run(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(field("population_size", "must be at least 2"));
        }
        if self.generations == 0 {
            return Err(field("generations", "must be at least 1"));
        }
        check_probability("p_c", self.p_c)?;
        check_non_negative("eta_c", self.eta_c)?;
        if let Some(p_m) = self.p_m {
            check_probability("p_m", p_m)?;
        }
        check_non_negative("eta_m", self.eta_m)?;
        check_probability("boosted_p_m", self.boosted_p_m)?;
        check_non_negative("change_tol", self.change_tol)
    }

    fn validate_synthetic(&self, mode: Mode) -> Result<()> {
        let sizes = self.synthetic_sizes(mode);
        if sizes.is_empty() || sizes.len() > 4 {
            return Err(field("synthetic.sizes", "must list one to four row counts"));
        }
        if sizes.contains(&0) {
            return Err(field("synthetic.sizes", "row counts must be positive"));
        }
        if mode == Mode::Dynamic && sizes.len() < 2 {
            return Err(field("synthetic.sizes", "dynamic mode needs at least two time steps"));
        }
        Ok(())
    }
}
