//! Data-driven objective model for the article-ranking problem.
//!
//! Designs are the four activity signals and objectives are clicks and
//! dwell time, all mapped through `ln(x + 1e-5)`. A KNN regressor predicts
//! both objectives and supplies 90% bounds from neighbor dispersion.

mod dataset;
mod knn;
mod synthetic;

use std::f64::consts::LN_10;
use std::sync::Arc;

pub use dataset::{load_dataset, write_dataset, Dataset, Record, COLUMNS};
pub use knn::{percentile, KnnSurrogate, Prediction};
pub use synthetic::{generate_synthetic, DYNAMIC_SIZES, STATIC_SIZE};

use crate::error::{Error, Result};
use crate::metrics::ScalingParams;
use crate::problems::{DynamicSchedule, ProblemSpec, ValueScale};
use crate::types::ObjectiveSense;

pub const DESIGN_NAMES: [&str; 4] = ["freshness", "views", "likes", "comments"];
pub const OBJECTIVE_NAMES: [&str; 2] = ["clicks", "dwell_ms"];

/// The shifted-log feature transform applied to every column.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FeatureSpace;

impl FeatureSpace {
    pub const SMOOTHING: f64 = 1e-5;

    pub fn forward(x: f64) -> f64 {
        (x + Self::SMOOTHING).ln()
    }

    pub fn inverse(y: f64) -> f64 {
        y.exp() - Self::SMOOTHING
    }
}

/// Design rows `(freshness, views, likes, comments)` and objective rows
/// `(clicks, dwell_ms)`, both in feature space.
pub fn derive_log_features(d: &Dataset) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    d.rows
        .iter()
        .map(|r| {
            (
                r.design().iter().map(|&x| FeatureSpace::forward(x)).collect(),
                r.objectives().iter().map(|&x| FeatureSpace::forward(x)).collect(),
            )
        })
        .unzip()
}

/// Per-variable `[min, max]` of the design features.
pub fn feature_bounds(designs: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let dim = designs.first().map_or(0, Vec::len);
    (0..dim)
        .map(|j| {
            designs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), row| {
                (lo.min(row[j]), hi.max(row[j]))
            })
        })
        .collect()
}

/// Fit quality of a surrogate on held-out rows, per objective.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct FitReport {
    pub r2: Vec<f64>,
    pub mse: Vec<f64>,
}

/// A KNN model over one dataset, with the design bounds it was trained on.
#[derive(Debug, Clone)]
pub struct ArticleSurrogate {
    pub model: Arc<KnnSurrogate>,
    pub bounds: Vec<(f64, f64)>,
}

impl ArticleSurrogate {
    pub fn fit(d: &Dataset, k: usize) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let (designs, objectives) = derive_log_features(d);
        let targets = (0..2).map(|j| objectives.iter().map(|o| o[j]).collect()).collect();
        let model = KnnSurrogate::build(&designs, targets, k)?;
        Ok(Self {
            model: Arc::new(model),
            bounds: feature_bounds(&designs),
        })
    }

    /// Predicted `log10` clicks and dwell time with their 90% bounds.
    pub fn predict_log10(&self, design: &[f64]) -> Result<Vec<Prediction>> {
        Ok(self
            .model
            .predict(design)?
            .into_iter()
            .map(|p| Prediction {
                mean: p.mean / LN_10,
                lo90: p.lo90 / LN_10,
                hi90: p.hi90 / LN_10,
            })
            .collect())
    }

    /// R² and MSE of the feature-space predictions on `held_out`.
    pub fn evaluate(&self, held_out: &Dataset) -> Result<FitReport> {
        let (designs, objectives) = derive_log_features(held_out);
        if designs.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut r2 = Vec::new();
        let mut mse = Vec::new();
        let preds: Vec<Vec<Prediction>> = designs.iter().map(|x| self.model.predict(x)).collect::<Result<_>>()?;
        for j in 0..self.model.n_targets() {
            let actual: Vec<f64> = objectives.iter().map(|o| o[j]).collect();
            let mean = actual.iter().sum::<f64>() / actual.len() as f64;
            let sse: f64 = actual.iter().zip(&preds).map(|(a, p)| (a - p[j].mean).powi(2)).sum();
            let sst: f64 = actual.iter().map(|a| (a - mean).powi(2)).sum();
            mse.push(sse / actual.len() as f64);
            r2.push(if sst > 0.0 { 1.0 - sse / sst } else { 0.0 });
        }
        Ok(FitReport { r2, mse })
    }

    /// Maximize predicted `log10` clicks and dwell time over the observed
    /// design box.
    pub fn problem(&self) -> Result<ProblemSpec> {
        let predict = self.clone();
        let intervals = self.clone();
        let problem = ProblemSpec::new(self.bounds.clone(), vec![ObjectiveSense::Maximize; 2], move |x| {
            Ok(predict.predict_log10(x)?.iter().map(|p| p.mean).collect())
        })?
        .with_names(
            DESIGN_NAMES.iter().map(|s| s.to_string()).collect(),
            OBJECTIVE_NAMES.iter().map(|s| s.to_string()).collect(),
        )
        .with_objective_scales(vec![ValueScale::Log10; 2])
        .with_intervals(move |x| Ok(intervals.predict_log10(x)?.iter().map(|p| (p.lo90, p.hi90)).collect()));
        Ok(problem)
    }
}

/// Minimization-sense range of the observed `log10` targets, for measuring
/// hypervolume on a fixed scale across generations and time steps.
pub fn objective_scaling(d: &Dataset) -> ScalingParams {
    let (_, targets) = derive_log_features(d);
    let mut min = vec![f64::INFINITY; OBJECTIVE_NAMES.len()];
    let mut max = vec![f64::NEG_INFINITY; OBJECTIVE_NAMES.len()];
    for t in &targets {
        for (j, &y) in t.iter().enumerate() {
            let v = -y / LN_10;
            min[j] = min[j].min(v);
            max[j] = max[j].max(v);
        }
    }
    ScalingParams { min, max }
}

/// Shared design box over several datasets, so every time step of a
/// schedule searches the same space.
pub fn union_bounds(parts: &[&ArticleSurrogate]) -> Vec<(f64, f64)> {
    let mut bounds = parts[0].bounds.clone();
    for p in &parts[1..] {
        for (b, o) in bounds.iter_mut().zip(&p.bounds) {
            b.0 = b.0.min(o.0);
            b.1 = b.1.max(o.1);
        }
    }
    bounds
}

/// One surrogate problem per time step, in ascending step order, all
/// searching the union of the steps' design boxes.
pub fn step_problems(d: &Dataset, k: usize) -> Result<Vec<ProblemSpec>> {
    let steps = d.time_steps();
    if steps.is_empty() {
        return Err(Error::contract("dataset has no time_step values for a dynamic schedule"));
    }
    let mut models = Vec::new();
    for s in steps {
        models.push(ArticleSurrogate::fit(&d.for_time_step(s), k)?);
    }
    let refs: Vec<&ArticleSurrogate> = models.iter().collect();
    let bounds = union_bounds(&refs);
    models
        .into_iter()
        .map(|mut m| {
            m.bounds = bounds.clone();
            m.problem()
        })
        .collect()
}

/// One surrogate per time step, each active for `generations_per_step`.
pub fn dynamic_schedule(d: &Dataset, k: usize, generations_per_step: usize) -> Result<DynamicSchedule> {
    let problems = step_problems(d, k)?;
    DynamicSchedule::new(problems.into_iter().map(|p| (generations_per_step, p)).collect())
}
