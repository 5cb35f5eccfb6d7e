//! Variation and selection operators.
//!
//! Draw order within one breeding step is fixed: the two tournament draws
//! for each parent, then the crossover coin, then one variate per variable
//! for SBX (only when the coin succeeds), then for each child a mutation
//! coin per variable followed by that variable's variate when it mutates.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::rng::UniformSource;
use crate::types::{DesignVector, ObjectiveVector, Solution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    /// Crossover probability.
    pub p_c: f64,
    /// SBX distribution index.
    pub eta_c: f64,
    /// Per-variable mutation probability.
    pub p_m: f64,
    /// Polynomial mutation distribution index.
    pub eta_m: f64,
}

impl OperatorParams {
    /// Defaults used throughout the experiments: `P_c = 0.9`, `eta_c = 15`,
    /// `P_m = 1/n`, `eta_m = 1`.
    pub fn for_dimension(n: usize) -> Self {
        Self {
            p_c: 0.9,
            eta_c: 15.0,
            p_m: 1.0 / n.max(1) as f64,
            eta_m: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_c", self.p_c), ("p_m", self.p_m)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::contract(format!("{name} = {p} is not a probability")));
            }
        }
        for (name, eta) in [("eta_c", self.eta_c), ("eta_m", self.eta_m)] {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::contract(format!("{name} = {eta} must be positive and finite")));
            }
        }
        Ok(())
    }

    pub fn with_mutation_probability(self, p_m: f64) -> Self {
        Self { p_m, ..self }
    }
}

fn check_in_bounds(x: &[f64], bounds: &[(f64, f64)], what: &str) -> Result<()> {
    if x.len() != bounds.len() {
        return Err(Error::contract(format!(
            "{what} has {} variables but bounds cover {}",
            x.len(),
            bounds.len()
        )));
    }
    for (i, (&v, &(lo, hi))) in x.iter().zip(bounds).enumerate() {
        if !(v >= lo && v <= hi) {
            return Err(Error::contract(format!(
                "{what} variable {i} = {v} lies outside [{lo}, {hi}]"
            )));
        }
    }
    Ok(())
}

/// Spread factor of SBX for a variate `u`.
pub fn sbx_beta(u: f64, eta_c: f64) -> f64 {
    let exp = 1.0 / (eta_c + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(exp)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(exp)
    }
}

/// Unclamped SBX children of one variable.
pub fn sbx_pair(x1: f64, x2: f64, u: f64, eta_c: f64) -> (f64, f64) {
    let beta = sbx_beta(u, eta_c);
    (
        0.5 * ((1.0 + beta) * x1 + (1.0 - beta) * x2),
        0.5 * ((1.0 - beta) * x1 + (1.0 + beta) * x2),
    )
}

/// Simulated binary crossover. With probability `1 - P_c` the parents are
/// returned unchanged; otherwise every variable is recombined with its own
/// variate and the children are clamped into the bounds.
pub fn sbx_crossover(
    p1: &DesignVector,
    p2: &DesignVector,
    params: &OperatorParams,
    bounds: &[(f64, f64)],
    rng: &mut impl UniformSource,
) -> Result<(DesignVector, DesignVector)> {
    check_in_bounds(p1, bounds, "first parent")?;
    check_in_bounds(p2, bounds, "second parent")?;
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    if rng.next_uniform() >= params.p_c {
        return Ok((c1.into(), c2.into()));
    }
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        let u = rng.next_uniform();
        let (a, b) = sbx_pair(p1[i], p2[i], u, params.eta_c);
        c1[i] = a.clamp(lo, hi);
        c2[i] = b.clamp(lo, hi);
    }
    Ok((c1.into(), c2.into()))
}

/// Polynomial mutation of one variable for a given variate `u`, clamped to
/// `[lo, hi]`. A frozen variable (`lo == hi`) is returned as is.
pub fn mutate_value(x: f64, lo: f64, hi: f64, u: f64, eta_m: f64) -> f64 {
    let span = hi - lo;
    if span <= 0.0 {
        return x;
    }
    let delta1 = (x - lo) / span;
    let delta2 = (hi - x) / span;
    let power = eta_m + 1.0;
    let delta_q = if u <= 0.5 {
        let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - delta1).powf(power);
        val.powf(1.0 / power) - 1.0
    } else {
        let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - delta2).powf(power);
        1.0 - val.powf(1.0 / power)
    };
    (x + delta_q * span).clamp(lo, hi)
}

/// Highly-disruptive polynomial mutation: each variable mutates
/// independently with probability `params.p_m`.
pub fn polynomial_mutation(
    x: &DesignVector,
    params: &OperatorParams,
    bounds: &[(f64, f64)],
    rng: &mut impl UniformSource,
) -> Result<DesignVector> {
    check_in_bounds(x, bounds, "mutation input")?;
    let mut out = x.to_vec();
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        if rng.next_uniform() < params.p_m {
            let u = rng.next_uniform();
            out[i] = mutate_value(out[i], lo, hi, u, params.eta_m);
        }
    }
    Ok(out.into())
}

/// Constraint-dominance comparison of two sorted solutions. `Less` means
/// `a` is preferred.
pub fn constraint_dominance_order(a: &Solution, b: &Solution) -> Ordering {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => return Ordering::Less,
        (false, true) => return Ordering::Greater,
        (false, false) => {
            return a.violation.partial_cmp(&b.violation).unwrap_or(Ordering::Equal);
        }
        (true, true) => {}
    }
    let rank_a = a.rank().unwrap_or(usize::MAX);
    let rank_b = b.rank().unwrap_or(usize::MAX);
    rank_a.cmp(&rank_b).then_with(|| {
        let ca = a.crowding().unwrap_or(0.0);
        let cb = b.crowding().unwrap_or(0.0);
        cb.partial_cmp(&ca).unwrap_or(Ordering::Equal)
    })
}

/// Winner of a binary tournament between `first` and `second`; a full tie
/// goes to `first`.
pub fn tournament_winner(pop: &[Solution], first: usize, second: usize) -> usize {
    match constraint_dominance_order(&pop[first], &pop[second]) {
        Ordering::Greater => second,
        _ => first,
    }
}

/// Constraint-dominance binary tournament over two distinct, uniformly
/// drawn members.
pub fn constrained_tournament_select(pop: &[Solution], rng: &mut impl UniformSource) -> Result<usize> {
    if pop.len() < 2 {
        return Err(Error::contract(format!(
            "tournament needs at least two solutions, got {}",
            pop.len()
        )));
    }
    let first = rng.next_index(pop.len());
    let mut second = rng.next_index(pop.len() - 1);
    if second >= first {
        second += 1;
    }
    Ok(tournament_winner(pop, first, second))
}

/// True when any objective component moved by more than `tol`.
pub fn detect_change(prev: &[ObjectiveVector], reevaluated: &[ObjectiveVector], tol: f64) -> Result<bool> {
    if prev.len() != reevaluated.len() {
        return Err(Error::contract(format!(
            "change detection got {} previous and {} re-evaluated vectors",
            prev.len(),
            reevaluated.len()
        )));
    }
    let mut changed = false;
    for (a, b) in prev.iter().zip(reevaluated) {
        if a.len() != b.len() {
            return Err(Error::contract("objective dimension changed between evaluations"));
        }
        changed |= a.iter().zip(b.iter()).any(|(x, y)| !((x - y).abs() <= tol));
    }
    Ok(changed)
}

/// Mutation-probability controller that boosts `P_m` for `epoch`
/// generations after a detected change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypermutationState {
    pub base_p_m: f64,
    pub boosted_p_m: f64,
    pub epoch: usize,
    pub remaining: usize,
}

impl HypermutationState {
    pub fn new(base_p_m: f64, boosted_p_m: f64, epoch: usize) -> Self {
        Self {
            base_p_m,
            boosted_p_m,
            epoch,
            remaining: 0,
        }
    }

    pub fn effective_p_m(&self) -> f64 {
        if self.remaining > 0 {
            self.boosted_p_m
        } else {
            self.base_p_m
        }
    }
}

pub fn hypermutation_tick(state: HypermutationState, changed: bool) -> (HypermutationState, f64) {
    let remaining = if changed {
        state.epoch
    } else {
        state.remaining.saturating_sub(1)
    };
    let next = HypermutationState { remaining, ..state };
    (next, next.effective_p_m())
}
