use std::time::Instant;

use crate::error::{Error, Result};
use crate::metrics::{hypervolume_2d, ScalingParams};
use crate::operators::{
    constrained_tournament_select, detect_change, hypermutation_tick, polynomial_mutation, sbx_crossover,
    HypermutationState, OperatorParams,
};
use crate::pareto::{constrained_sort, non_dominated_front};
use crate::problems::DynamicSchedule;
use crate::rng::{RandomSource, UniformSource};
use crate::types::{DesignVector, ObjectiveVector, Solution};

use super::{environmental_selection, evaluate_all, with_generation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypermutationConfig {
    /// Mutation probability while a boost is active.
    pub boosted_p_m: f64,
    /// Generations a boost lasts.
    pub epoch: usize,
}

impl Default for HypermutationConfig {
    fn default() -> Self {
        Self {
            boosted_p_m: 1.0,
            epoch: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunParams {
    pub population_size: usize,
    pub generations: usize,
    pub operators: OperatorParams,
    pub hypermutation: HypermutationConfig,
    pub seed: u64,
    /// Absolute tolerance for objective change detection.
    pub change_tol: f64,
    /// Reference point for the per-generation hypervolume trace.
    pub reference: Vec<f64>,
    /// Fixed scaling applied before measuring the trace; `None` measures
    /// raw minimization-sense objectives.
    pub trace_scaling: Option<ScalingParams>,
    pub parallel: bool,
}

impl RunParams {
    /// Paper-default settings for an `n`-variable problem: `K = 500`,
    /// `E = 500`, SBX `0.9/15`, mutation `1/n` with index 1.
    pub fn for_dimension(n: usize) -> Self {
        Self {
            population_size: 500,
            generations: 500,
            operators: OperatorParams::for_dimension(n),
            hypermutation: HypermutationConfig::default(),
            seed: 0,
            change_tol: 1e-9,
            reference: vec![2.0, 2.0],
            trace_scaling: None,
            parallel: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::contract("population size must be at least 2"));
        }
        if self.generations == 0 {
            return Err(Error::contract("at least one generation is required"));
        }
        if !(self.change_tol >= 0.0) {
            return Err(Error::contract("change tolerance must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.hypermutation.boosted_p_m) {
            return Err(Error::contract("boosted mutation probability must lie in [0, 1]"));
        }
        self.operators.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Schedule step active in this generation.
    pub step: usize,
    pub hypervolume: f64,
    pub effective_p_m: f64,
    pub feasible_count: usize,
    pub front0_size: usize,
    /// Smallest constraint violation in the population.
    pub best_violation: f64,
    pub change_detected: bool,
}

/// First front at the end of one schedule step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFront {
    pub step: usize,
    pub generation: usize,
    pub solutions: Vec<Solution>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    /// Non-dominated set of the final population, feasible members only
    /// whenever any exist.
    pub final_pareto: Vec<Solution>,
    /// False when no feasible solution was found and `final_pareto` is a
    /// best-effort set of least-violating solutions.
    pub feasible: bool,
    pub history: Vec<GenerationRecord>,
    pub step_fronts: Vec<StepFront>,
    /// Smallest violation among the random initial solutions.
    pub initial_best_violation: f64,
    pub wall_time: f64,
}

fn random_design(bounds: &[(f64, f64)], rng: &mut impl UniformSource) -> DesignVector {
    bounds
        .iter()
        .map(|&(lo, hi)| (lo + rng.next_uniform() * (hi - lo)).clamp(lo, hi))
        .collect::<Vec<_>>()
        .into()
}

fn breed(
    pop: &[Solution],
    count: usize,
    params: &OperatorParams,
    bounds: &[(f64, f64)],
    rng: &mut impl UniformSource,
) -> Result<Vec<DesignVector>> {
    let mut children = Vec::with_capacity(count + 1);
    while children.len() < count {
        let a = constrained_tournament_select(pop, rng)?;
        let b = constrained_tournament_select(pop, rng)?;
        let (c1, c2) = sbx_crossover(&pop[a].design, &pop[b].design, params, bounds, rng)?;
        children.push(polynomial_mutation(&c1, params, bounds, rng)?);
        let c2 = polynomial_mutation(&c2, params, bounds, rng)?;
        if children.len() < count {
            children.push(c2);
        }
    }
    Ok(children)
}

/// Rank-0 members of a sorted population, reduced to their non-dominated
/// subset (relevant when only infeasible solutions exist).
fn first_front(pop: &[Solution]) -> Result<Vec<Solution>> {
    let rank0: Vec<&Solution> = pop.iter().filter(|s| s.rank() == Some(0)).collect();
    if rank0.is_empty() {
        return Ok(Vec::new());
    }
    let objs: Vec<&[f64]> = rank0.iter().map(|s| s.objectives.as_slice()).collect();
    Ok(non_dominated_front(&objs)?.into_iter().map(|i| rank0[i].clone()).collect())
}

fn trace_hypervolume(front: &[Solution], params: &RunParams) -> Result<f64> {
    if front.is_empty() || front[0].objectives.len() != 2 || params.reference.len() != 2 {
        return Ok(f64::NAN);
    }
    let points: Vec<Vec<f64>> = match &params.trace_scaling {
        Some(scaling) => front.iter().map(|s| scaling.apply(&s.objectives)).collect(),
        None => front.iter().map(|s| s.objectives.to_vec()).collect(),
    };
    Ok(hypervolume_2d(&points, &params.reference)?.value)
}

/// Runs the dynamic, constrained NSGA-II loop over `schedule`.
///
/// Every generation re-evaluates the survivors against the problem active
/// at that generation, boosts mutation when their objectives moved, merges
/// them with the pending children, ranks the union with constraint
/// dominance, truncates back to `K`, and breeds `K` new children.
pub fn run_do_nsga2(schedule: &DynamicSchedule, params: &RunParams) -> Result<RunResult> {
    params.validate()?;
    let started = Instant::now();
    let k = params.population_size;
    let bounds = schedule.step(0).bounds.clone();
    let mut rng = RandomSource::new(params.seed);

    let initial: Vec<DesignVector> = (0..k).map(|_| random_design(&bounds, &mut rng)).collect();
    let mut population = evaluate_all(schedule.step(0), initial, params.parallel).map_err(|e| with_generation(e, 0))?;
    let initial_best_violation = population.iter().map(|s| s.violation).fold(f64::INFINITY, f64::min);
    constrained_sort(&mut population)?;
    let mut children = breed(&population, k, &params.operators, &bounds, &mut rng)?;

    let mut hyper = HypermutationState::new(
        params.operators.p_m,
        params.hypermutation.boosted_p_m,
        params.hypermutation.epoch,
    );
    let mut history = Vec::with_capacity(params.generations);
    let mut step_fronts = Vec::new();

    for generation in 0..params.generations {
        let step = schedule.step_index(generation);
        let problem = schedule.step(step);

        let previous: Vec<ObjectiveVector> = population.iter().map(|s| s.objectives.clone()).collect();
        let designs: Vec<DesignVector> = population.iter().map(|s| s.design.clone()).collect();
        let survivors =
            evaluate_all(problem, designs, params.parallel).map_err(|e| with_generation(e, generation))?;
        let current: Vec<ObjectiveVector> = survivors.iter().map(|s| s.objectives.clone()).collect();
        let changed = detect_change(&previous, &current, params.change_tol)?;
        let (next_state, effective_p_m) = hypermutation_tick(hyper, changed);
        hyper = next_state;

        let offspring =
            evaluate_all(problem, std::mem::take(&mut children), params.parallel).map_err(|e| with_generation(e, generation))?;
        let mut merged = survivors;
        merged.extend(offspring);
        constrained_sort(&mut merged)?;
        population = environmental_selection(merged, k)?;
        // Re-rank the survivors so tournament crowding reflects the new set.
        constrained_sort(&mut population)?;

        let front = first_front(&population)?;
        history.push(GenerationRecord {
            generation,
            step,
            hypervolume: trace_hypervolume(&front, params)?,
            effective_p_m,
            feasible_count: population.iter().filter(|s| s.is_feasible()).count(),
            front0_size: front.len(),
            best_violation: population.iter().map(|s| s.violation).fold(f64::INFINITY, f64::min),
            change_detected: changed,
        });

        let last_of_step = generation + 1 == params.generations || schedule.step_index(generation + 1) != step;
        if last_of_step {
            step_fronts.push(StepFront { step, generation, solutions: front });
        }

        if generation + 1 < params.generations {
            let operators = params.operators.with_mutation_probability(effective_p_m);
            children = breed(&population, k, &operators, &bounds, &mut rng)?;
        }
    }

    let final_pareto = first_front(&population)?;
    let feasible = final_pareto.iter().all(Solution::is_feasible);
    Ok(RunResult {
        final_pareto,
        feasible,
        history,
        step_fronts,
        initial_best_violation,
        wall_time: started.elapsed().as_secs_f64(),
    })
}
