//! Quality indicators for solution sets: min-max scaling, hypervolume
//! (exact sweep and Monte-Carlo), average hypervolume and Confidence
//! Uncertainty.

use std::cmp::Ordering;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Reference point used after min-max scaling.
pub const SCALED_REFERENCE: [f64; 2] = [2.0, 2.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalingParams {
    pub fn fit<T: AsRef<[f64]>>(points: &[T]) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::contract("cannot fit scaling on an empty set"))?
            .as_ref();
        let mut min = first.to_vec();
        let mut max = first.to_vec();
        for p in points {
            let p = p.as_ref();
            if p.len() != min.len() {
                return Err(Error::contract("points have inconsistent dimension"));
            }
            for (j, &v) in p.iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        Ok(Self { min, max })
    }

    /// Maps each coordinate to `(y - min) / (max - min)`; a constant
    /// coordinate maps to 0.
    pub fn apply(&self, point: &[f64]) -> Vec<f64> {
        point
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&y, (&lo, &hi))| if hi > lo { (y - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }

    pub fn apply_all<T: AsRef<[f64]>>(&self, points: &[T]) -> Vec<Vec<f64>> {
        points.iter().map(|p| self.apply(p.as_ref())).collect()
    }
}

pub fn min_max_scale<T: AsRef<[f64]>>(points: &[T]) -> Result<(Vec<Vec<f64>>, ScalingParams)> {
    let params = ScalingParams::fit(points)?;
    Ok((params.apply_all(points), params))
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypervolumeResult {
    pub value: f64,
    pub reference: Vec<f64>,
    pub scaled: bool,
}

/// Exact two-objective hypervolume by sorting on the first objective and
/// sweeping. Points that do not strictly dominate the reference add
/// nothing.
pub fn hypervolume_2d<T: AsRef<[f64]>>(points: &[T], reference: &[f64]) -> Result<HypervolumeResult> {
    if reference.len() != 2 {
        return Err(Error::contract(format!(
            "two-objective hypervolume needs a 2-d reference, got {}",
            reference.len()
        )));
    }
    let mut pts: Vec<[f64; 2]> = Vec::with_capacity(points.len());
    for p in points {
        let p = p.as_ref();
        if p.len() != 2 {
            return Err(Error::contract(format!("point has {} objectives, expected 2", p.len())));
        }
        if p[0] < reference[0] && p[1] < reference[1] {
            pts.push([p[0], p[1]]);
        }
    }
    pts.sort_by(|a, b| {
        a[0].partial_cmp(&b[0])
            .unwrap_or(Ordering::Equal)
            .then(a[1].partial_cmp(&b[1]).unwrap_or(Ordering::Equal))
    });
    let mut value = 0.0;
    let mut ceiling = reference[1];
    for p in pts {
        if p[1] < ceiling {
            value += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    Ok(HypervolumeResult {
        value,
        reference: reference.to_vec(),
        scaled: false,
    })
}

/// Min-max scales the points with `params` and measures them against the
/// `[2, 2]` reference.
pub fn scaled_hypervolume<T: AsRef<[f64]>>(points: &[T], params: &ScalingParams) -> Result<HypervolumeResult> {
    let scaled = params.apply_all(points);
    let mut hv = hypervolume_2d(&scaled, &SCALED_REFERENCE)?;
    hv.scaled = true;
    Ok(hv)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte-Carlo hypervolume over the box spanned by the ideal point and the
/// reference. Works for any number of objectives.
pub fn hypervolume_mc<T: AsRef<[f64]>>(
    points: &[T],
    reference: &[f64],
    samples: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::contract("Monte-Carlo hypervolume needs at least one sample"));
    }
    let m = reference.len();
    let pts: Vec<&[f64]> = points
        .iter()
        .map(AsRef::as_ref)
        .filter(|p| p.len() == m && p.iter().zip(reference).all(|(a, r)| a < r))
        .collect();
    if pts.is_empty() {
        return Ok(MonteCarloEstimate { value: 0.0, std_error: 0.0 });
    }
    let mut ideal = reference.to_vec();
    for p in &pts {
        for j in 0..m {
            ideal[j] = ideal[j].min(p[j]);
        }
    }
    let volume: f64 = ideal.iter().zip(reference).map(|(lo, hi)| hi - lo).product();
    if volume <= 0.0 {
        return Ok(MonteCarloEstimate { value: 0.0, std_error: 0.0 });
    }

    let mut rng = RandomSource::new(seed);
    let mut sample = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..samples {
        for j in 0..m {
            let u: f64 = rng.inner().random();
            sample[j] = ideal[j] + u * (reference[j] - ideal[j]);
        }
        if pts.iter().any(|p| p.iter().zip(&sample).all(|(a, s)| a <= s)) {
            hits += 1;
        }
    }
    let frac = hits as f64 / samples as f64;
    Ok(MonteCarloEstimate {
        value: frac * volume,
        std_error: volume * (frac * (1.0 - frac) / samples as f64).sqrt(),
    })
}

/// Mean of the single-point box volumes `Π (ref_j - p_j)`, each factor
/// clamped at zero.
pub fn average_hypervolume<T: AsRef<[f64]>>(points: &[T], reference: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::contract("average hypervolume of an empty set"));
    }
    let mut total = 0.0;
    for p in points {
        let p = p.as_ref();
        if p.len() != reference.len() {
            return Err(Error::contract("point and reference differ in dimension"));
        }
        total += p.iter().zip(reference).map(|(a, r)| (r - a).max(0.0)).product::<f64>();
    }
    Ok(total / points.len() as f64)
}

/// Generations after `transition` until the trace first reaches `fraction`
/// of its value just before the transition, looking at most `window`
/// generations ahead. `None` when it does not recover in time.
pub fn recovery_generations(trace: &[f64], transition: usize, fraction: f64, window: usize) -> Option<usize> {
    if transition == 0 || transition >= trace.len() {
        return None;
    }
    let target = fraction * trace[transition - 1];
    let end = trace.len().min(transition + window + 1);
    (transition..end).find(|&g| trace[g] >= target).map(|g| g - transition)
}

/// Per-solution, per-objective `(lo90, hi90)` bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    pub bounds: Vec<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfidenceUncertainty {
    pub per_solution: Vec<f64>,
    pub mean: f64,
}

/// Confidence Uncertainty: interval widths are min-max normalized across the
/// set per objective, a solution's CU is the product of its normalized
/// widths, and the set value is their mean.
pub fn confidence_uncertainty(intervals: &IntervalSet) -> Result<ConfidenceUncertainty> {
    let first = intervals
        .bounds
        .first()
        .ok_or_else(|| Error::contract("confidence uncertainty of an empty set"))?;
    let m = first.len();
    let mut widths = Vec::with_capacity(intervals.bounds.len());
    for row in &intervals.bounds {
        if row.len() != m {
            return Err(Error::contract("interval rows differ in objective count"));
        }
        if let Some((lo, hi)) = row.iter().find(|(lo, hi)| !(lo <= hi)) {
            return Err(Error::contract(format!("interval [{lo}, {hi}] is inverted")));
        }
        widths.push(row.iter().map(|(lo, hi)| hi - lo).collect::<Vec<f64>>());
    }
    let (normalized, _) = min_max_scale(&widths)?;
    let per_solution: Vec<f64> = normalized.iter().map(|w| w.iter().product()).collect();
    let mean = per_solution.iter().sum::<f64>() / per_solution.len() as f64;
    Ok(ConfidenceUncertainty { per_solution, mean })
}
