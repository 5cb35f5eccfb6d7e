use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pareto::non_dominated_front;
use crate::problems::ProblemSpec;
use crate::types::{DesignVector, Solution};

pub const DEFAULT_GRID_CAP: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridParams {
    /// Step between grid values, as a percentage of each variable's range.
    pub inc: f64,
    /// Largest candidate count the search will enumerate.
    pub cap: u128,
}

impl GridParams {
    pub fn new(inc: f64) -> Self {
        Self {
            inc,
            cap: DEFAULT_GRID_CAP,
        }
    }

    /// Values per variable: `floor(100 / inc) + 1`.
    pub fn points_per_variable(&self) -> Result<usize> {
        if !(self.inc > 0.0 && self.inc <= 100.0) {
            return Err(Error::contract(format!("increment {}% must lie in (0, 100]", self.inc)));
        }
        // The epsilon keeps exact divisors such as 100/10 from flooring low.
        Ok((100.0 / self.inc + 1e-9).floor() as usize + 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub pareto: Vec<Solution>,
    /// Number of candidates evaluated.
    pub evaluations: usize,
    /// False when no candidate satisfied the constraints and `pareto` is
    /// the non-dominated set of all (infeasible) candidates.
    pub feasible: bool,
}

/// `v` evenly spaced values from `lo` to `hi`, both ends included.
pub fn grid_values(lo: f64, hi: f64, v: usize) -> Vec<f64> {
    if v == 1 {
        return vec![lo];
    }
    (0..v)
        .map(|i| if i + 1 == v { hi } else { lo + (hi - lo) * i as f64 / (v - 1) as f64 })
        .collect()
}

/// Exhaustive search over the Cartesian product of per-variable grids
/// between the observed data bounds. Feasible candidates are filtered to
/// their non-dominated set.
pub fn run_grid_search(data_bounds: &[(f64, f64)], problem: &ProblemSpec, grid: &GridParams) -> Result<GridResult> {
    if data_bounds.len() != problem.n() {
        return Err(Error::contract(format!(
            "{} data bounds for a {}-variable problem",
            data_bounds.len(),
            problem.n()
        )));
    }
    if let Some((lo, hi)) = data_bounds.iter().find(|(lo, hi)| !(lo.is_finite() && hi.is_finite() && lo <= hi)) {
        return Err(Error::contract(format!("invalid data bounds [{lo}, {hi}]")));
    }
    let v = grid.points_per_variable()?;
    let size = (v as u128)
        .checked_pow(problem.n() as u32)
        .unwrap_or(u128::MAX);
    if size > grid.cap {
        return Err(Error::GridTooLarge { size, cap: grid.cap });
    }
    let total = size as usize;
    let values: Vec<Vec<f64>> = data_bounds.iter().map(|&(lo, hi)| grid_values(lo, hi, v)).collect();

    let candidate = |mut index: usize| -> DesignVector {
        let mut x = vec![0.0; values.len()];
        for (slot, vals) in x.iter_mut().zip(&values).rev() {
            *slot = vals[index % v];
            index /= v;
        }
        x.into()
    };
    let evaluated: Vec<Solution> = (0..total)
        .into_par_iter()
        .map(|i| problem.evaluate(candidate(i)))
        .collect::<Result<_>>()?;

    let feasible: Vec<&Solution> = evaluated.iter().filter(|s| s.is_feasible()).collect();
    let any_feasible = !feasible.is_empty();
    let pool: Vec<&Solution> = if any_feasible { feasible } else { evaluated.iter().collect() };
    let objs: Vec<&[f64]> = pool.iter().map(|s| s.objectives.as_slice()).collect();
    let pareto = non_dominated_front(&objs)?.into_iter().map(|i| pool[i].clone()).collect();
    Ok(GridResult {
        pareto,
        evaluations: total,
        feasible: any_feasible,
    })
}
