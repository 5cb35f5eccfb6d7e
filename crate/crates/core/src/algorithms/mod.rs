//! The optimizers: the dynamic, constrained NSGA-II variant and the
//! exhaustive grid-search baseline.

mod grid;
mod nsga2;

use std::cmp::Ordering;

use rayon::prelude::*;

pub use grid::{grid_values, run_grid_search, GridParams, GridResult, DEFAULT_GRID_CAP};
pub use nsga2::{run_do_nsga2, GenerationRecord, HypermutationConfig, RunParams, RunResult, StepFront};

use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::types::{DesignVector, Solution};

/// Keeps at most `k` solutions: whole fronts in rank order, then the
/// overflowing front's members with the largest crowding distance. Ties go
/// to the lower index. Survivors keep their input order.
pub fn environmental_selection(merged: Vec<Solution>, k: usize) -> Result<Vec<Solution>> {
    if merged.len() <= k {
        return Ok(merged);
    }
    let mut keys = Vec::with_capacity(merged.len());
    for (i, s) in merged.iter().enumerate() {
        match (s.rank(), s.crowding()) {
            (Some(r), Some(c)) => keys.push((r, c, i)),
            _ => return Err(Error::contract("environmental selection needs sorted solutions")),
        }
    }
    keys.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal))
            .then(a.2.cmp(&b.2))
    });
    let mut keep = vec![false; merged.len()];
    for &(_, _, i) in keys.iter().take(k) {
        keep[i] = true;
    }
    Ok(merged
        .into_iter()
        .zip(keep)
        .filter_map(|(s, keep)| keep.then_some(s))
        .collect())
}

/// Evaluates designs, optionally in parallel; output order matches input.
pub(crate) fn evaluate_all(problem: &ProblemSpec, designs: Vec<DesignVector>, parallel: bool) -> Result<Vec<Solution>> {
    let eval = |d: DesignVector| {
        let copy = d.to_vec();
        problem.evaluate(d).map_err(|e| (copy, e))
    };
    let results: std::result::Result<Vec<Solution>, (Vec<f64>, Error)> = if parallel {
        designs.into_par_iter().map(eval).collect()
    } else {
        designs.into_iter().map(eval).collect()
    };
    results.map_err(|(design, e)| Error::Evaluation {
        generation: 0,
        design,
        source: Box::new(e),
    })
}

pub(crate) fn with_generation(err: Error, generation: usize) -> Error {
    match err {
        Error::Evaluation { design, source, .. } => Error::Evaluation { generation, design, source },
        other => other,
    }
}
