//! Dominance, non-dominated sorting and crowding distance.
//!
//! Everything here works on minimization-sense objective vectors.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::types::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dominance {
    ADominatesB,
    BDominatesA,
    NonDominated,
}

/// Pareto dominance between two minimization-sense vectors. Identical
/// vectors are mutually non-dominated.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<Dominance> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "cannot compare objective vectors of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    Ok(dominance_unchecked(a, b))
}

#[inline]
pub(crate) fn dominance_unchecked(a: &[f64], b: &[f64]) -> Dominance {
    let mut a_better = false;
    let mut b_better = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            a_better = true;
        } else if y < x {
            b_better = true;
        }
        if a_better && b_better {
            return Dominance::NonDominated;
        }
    }
    match (a_better, b_better) {
        (true, false) => Dominance::ADominatesB,
        (false, true) => Dominance::BDominatesA,
        _ => Dominance::NonDominated,
    }
}

/// Result of non-dominated sorting: fronts of input indices, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrontPartition {
    pub fronts: Vec<Vec<usize>>,
}

impl FrontPartition {
    /// Rank of every input index.
    pub fn ranks(&self) -> Vec<usize> {
        let len = self.fronts.iter().map(Vec::len).sum();
        let mut ranks = vec![0; len];
        for (rank, front) in self.fronts.iter().enumerate() {
            for &i in front {
                ranks[i] = rank;
            }
        }
        ranks
    }

    pub fn first(&self) -> &[usize] {
        self.fronts.first().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn check_uniform<T: AsRef<[f64]>>(objectives: &[T]) -> Result<usize> {
    let first = objectives
        .first()
        .ok_or_else(|| Error::contract("cannot sort an empty population"))?;
    let m = first.as_ref().len();
    if let Some(bad) = objectives.iter().position(|o| o.as_ref().len() != m) {
        return Err(Error::contract(format!(
            "objective vector {bad} has length {} but expected {m}",
            objectives[bad].as_ref().len()
        )));
    }
    Ok(m)
}

/// Fast non-dominated sort, O(mK²). Indices within each front keep input
/// order.
pub fn fast_non_dominated_sort<T: AsRef<[f64]>>(objectives: &[T]) -> Result<FrontPartition> {
    check_uniform(objectives)?;
    let n = objectives.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut domination_count = vec![0usize; n];

    for i in 0..n {
        for j in (i + 1)..n {
            match dominance_unchecked(objectives[i].as_ref(), objectives[j].as_ref()) {
                Dominance::ADominatesB => {
                    dominated_by_me[i].push(j);
                    domination_count[j] += 1;
                }
                Dominance::BDominatesA => {
                    dominated_by_me[j].push(i);
                    domination_count[i] += 1;
                }
                Dominance::NonDominated => {}
            }
        }
    }

    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| domination_count[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by_me[i] {
                domination_count[j] -= 1;
                if domination_count[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    Ok(FrontPartition { fronts })
}

/// Indices of the non-dominated members, ascending. Equivalent to the first
/// front of [`fast_non_dominated_sort`] but runs in `O(N log N + N·F)` for a
/// front of size `F`, which suits large exhaustive candidate sets.
pub fn non_dominated_front<T: AsRef<[f64]>>(objectives: &[T]) -> Result<Vec<usize>> {
    check_uniform(objectives)?;
    let mut order: Vec<usize> = (0..objectives.len()).collect();
    // Lexicographic order: a point can only be dominated by points before it.
    order.sort_by(|&a, &b| {
        let (x, y) = (objectives[a].as_ref(), objectives[b].as_ref());
        x.iter()
            .zip(y)
            .map(|(p, q)| p.partial_cmp(q).unwrap_or(Ordering::Equal))
            .find(|o| *o != Ordering::Equal)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        let p = objectives[i].as_ref();
        let dominated = front
            .iter()
            .any(|&j| dominance_unchecked(objectives[j].as_ref(), p) == Dominance::ADominatesB);
        if !dominated {
            front.push(i);
        }
    }
    front.sort_unstable();
    Ok(front)
}

/// Crowding distance of each member of a front, returned in input order.
///
/// Boundary members on any objective get `+inf`. An objective whose values
/// are all equal contributes nothing to interior members.
pub fn crowding_distance<T: AsRef<[f64]>>(front: &[T]) -> Vec<f64> {
    let n = front.len();
    if n == 0 {
        return Vec::new();
    }
    let m = front[0].as_ref().len();
    let mut distance = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();

    for j in 0..m {
        order.sort_by(|&a, &b| {
            front[a].as_ref()[j]
                .partial_cmp(&front[b].as_ref()[j])
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        let lo = front[order[0]].as_ref()[j];
        let hi = front[order[n - 1]].as_ref()[j];
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        let span = hi - lo;
        if span <= 0.0 {
            continue;
        }
        for w in order.windows(3) {
            let gap = front[w[2]].as_ref()[j] - front[w[0]].as_ref()[j];
            distance[w[1]] += gap / span;
        }
    }
    distance
}

/// Constraint-aware ranking of a population.
///
/// Feasible solutions are sorted by Pareto dominance and always rank ahead
/// of infeasible ones. Infeasible solutions follow, one front per distinct
/// violation level in ascending order. Rank and crowding are written into
/// each solution and the partition is returned.
pub fn constrained_sort(population: &mut [Solution]) -> Result<FrontPartition> {
    if population.is_empty() {
        return Err(Error::contract("cannot sort an empty population"));
    }
    let feasible: Vec<usize> = (0..population.len())
        .filter(|&i| population[i].is_feasible())
        .collect();
    let mut infeasible: Vec<usize> = (0..population.len())
        .filter(|&i| !population[i].is_feasible())
        .collect();

    let mut fronts: Vec<Vec<usize>> = Vec::new();
    if !feasible.is_empty() {
        let objs: Vec<&[f64]> = feasible.iter().map(|&i| population[i].objectives.as_slice()).collect();
        let part = fast_non_dominated_sort(&objs)?;
        for front in part.fronts {
            fronts.push(front.into_iter().map(|k| feasible[k]).collect());
        }
    }

    infeasible.sort_by(|&a, &b| {
        population[a]
            .violation
            .partial_cmp(&population[b].violation)
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut start = 0;
    while start < infeasible.len() {
        let level = population[infeasible[start]].violation;
        let mut end = start + 1;
        while end < infeasible.len() && population[infeasible[end]].violation == level {
            end += 1;
        }
        let mut group = infeasible[start..end].to_vec();
        group.sort_unstable();
        fronts.push(group);
        start = end;
    }

    for (rank, front) in fronts.iter().enumerate() {
        let objs: Vec<&[f64]> = front.iter().map(|&i| population[i].objectives.as_slice()).collect();
        let dist = crowding_distance(&objs);
        for (&i, d) in front.iter().zip(dist) {
            population[i].set_sort_data(rank, d);
        }
    }
    Ok(FrontPartition { fronts })
}
