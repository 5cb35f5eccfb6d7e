//! Problem definitions: constrained objectives, time-varying schedules,
//! the article score and the ZDT1 benchmark.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{canonicalize, DesignVector, ObjectiveSense, ObjectiveVector, Solution};

/// Default tolerance under which an equality residual counts as satisfied.
pub const DEFAULT_EQUALITY_TOL: f64 = 1e-6;

pub type ObjectiveFn = dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync;
/// Per-objective `(lo90, hi90)` interval bounds for a design.
pub type IntervalFn = dyn Fn(&[f64]) -> Result<Vec<(f64, f64)>> + Send + Sync;
/// Constraint expression over `(raw objectives, design)`.
pub type ConstraintFn = dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `g(x) >= 0`
    Inequality,
    /// `h(x) = 0`
    Equality,
}

#[derive(Clone)]
pub struct Constraint {
    pub kind: ConstraintKind,
    pub label: String,
    expression: Arc<ConstraintFn>,
}

impl Constraint {
    pub fn new(
        kind: ConstraintKind,
        label: impl Into<String>,
        expression: impl Fn(&[f64], &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            kind,
            label: label.into(),
            expression: Arc::new(expression),
        }
    }

    /// `objective[index] - threshold >= 0`
    pub fn objective_at_least(label: impl Into<String>, index: usize, threshold: f64) -> Self {
        Self::new(ConstraintKind::Inequality, label, move |obj, _| obj[index] - threshold)
    }

    pub fn value(&self, objectives: &[f64], design: &[f64]) -> f64 {
        (self.expression)(objectives, design)
    }
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Constraint")
            .field("kind", &self.kind)
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

/// Total violation of a constraint set and whether it is satisfied.
///
/// Inequalities contribute `max(0, -g)`. Equalities contribute `|h|` unless
/// the residual is within `equality_tol`, so a zero violation always means
/// feasible.
pub fn evaluate_constraints_with_tol(
    objectives: &[f64],
    design: &[f64],
    constraints: &[Constraint],
    equality_tol: f64,
) -> Result<(bool, f64)> {
    let mut violation = 0.0;
    for c in constraints {
        let v = c.value(objectives, design);
        if !v.is_finite() {
            return Err(Error::NonFiniteConstraint {
                label: c.label.clone(),
                value: v,
            });
        }
        violation += match c.kind {
            ConstraintKind::Inequality => (-v).max(0.0),
            ConstraintKind::Equality if v.abs() <= equality_tol => 0.0,
            ConstraintKind::Equality => v.abs(),
        };
    }
    Ok((violation == 0.0, violation))
}

pub fn evaluate_constraints(
    objectives: &[f64],
    design: &[f64],
    constraints: &[Constraint],
) -> Result<(bool, f64)> {
    evaluate_constraints_with_tol(objectives, design, constraints, DEFAULT_EQUALITY_TOL)
}

/// How a raw objective value represents the underlying quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueScale {
    #[default]
    Linear,
    Log10,
}

impl ValueScale {
    /// Re-expresses `value`, given on `self`'s scale, on scale `to`.
    pub fn convert(self, value: f64, to: ValueScale) -> f64 {
        match (self, to) {
            (a, b) if a == b => value,
            (ValueScale::Log10, ValueScale::Linear) => 10f64.powf(value),
            (ValueScale::Linear, ValueScale::Log10) => value.log10(),
            _ => unreachable!(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = ">")]
    Greater,
    #[serde(rename = ">=")]
    GreaterEq,
    #[serde(rename = "<")]
    Less,
    #[serde(rename = "<=")]
    LessEq,
    #[serde(rename = "==")]
    Equal,
}

/// A static constrained multi-objective problem.
#[derive(Clone)]
pub struct ProblemSpec {
    pub bounds: Vec<(f64, f64)>,
    pub senses: Vec<ObjectiveSense>,
    pub design_names: Vec<String>,
    pub objective_names: Vec<String>,
    pub objective_scales: Vec<ValueScale>,
    pub constraints: Vec<Constraint>,
    pub equality_tol: f64,
    objective_fn: Arc<ObjectiveFn>,
    interval_fn: Option<Arc<IntervalFn>>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("bounds", &self.bounds)
            .field("senses", &self.senses)
            .field("objective_names", &self.objective_names)
            .field("constraints", &self.constraints)
            .finish_non_exhaustive()
    }
}

impl ProblemSpec {
    pub fn new(
        bounds: Vec<(f64, f64)>,
        senses: Vec<ObjectiveSense>,
        objective_fn: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::contract("a problem needs at least one design variable"));
        }
        if senses.is_empty() {
            return Err(Error::contract("a problem needs at least one objective"));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::contract(format!("invalid bounds [{lo}, {hi}] for variable {i}")));
            }
        }
        let design_names = (1..=bounds.len()).map(|i| format!("x{i}")).collect();
        let objective_names = (1..=senses.len()).map(|i| format!("f{i}")).collect();
        let objective_scales = vec![ValueScale::Linear; senses.len()];
        Ok(Self {
            bounds,
            senses,
            design_names,
            objective_scales,
            objective_names,
            constraints: Vec::new(),
            equality_tol: DEFAULT_EQUALITY_TOL,
            objective_fn: Arc::new(objective_fn),
            interval_fn: None,
        })
    }

    pub fn with_names(mut self, design: Vec<String>, objectives: Vec<String>) -> Self {
        assert_eq!(design.len(), self.n());
        assert_eq!(objectives.len(), self.m());
        self.design_names = design;
        self.objective_names = objectives;
        self
    }

    pub fn with_objective_scales(mut self, scales: Vec<ValueScale>) -> Self {
        assert_eq!(scales.len(), self.m());
        self.objective_scales = scales;
        self
    }

    /// Column label of objective `j` as written to result files.
    pub fn objective_label(&self, j: usize) -> String {
        match self.objective_scales[j] {
            ValueScale::Linear => self.objective_names[j].clone(),
            ValueScale::Log10 => format!("log10_{}", self.objective_names[j]),
        }
    }

    /// Builds `objective <op> threshold`, with the objective expressed on
    /// `scale`. Strict and non-strict comparisons are treated alike: the
    /// boundary is feasible.
    pub fn threshold_constraint(
        &self,
        objective: &str,
        op: Comparison,
        threshold: f64,
        scale: ValueScale,
    ) -> Result<Constraint> {
        let index = self
            .objective_names
            .iter()
            .position(|n| n == objective)
            .ok_or_else(|| Error::contract(format!("unknown objective `{objective}`")))?;
        if !threshold.is_finite() {
            return Err(Error::contract("constraint threshold must be finite"));
        }
        let native = self.objective_scales[index];
        let label = format!(
            "{}{objective} {} {threshold}",
            if scale == ValueScale::Log10 { "log10 " } else { "" },
            match op {
                Comparison::Greater => ">",
                Comparison::GreaterEq => ">=",
                Comparison::Less => "<",
                Comparison::LessEq => "<=",
                Comparison::Equal => "==",
            }
        );
        let value = move |obj: &[f64]| native.convert(obj[index], scale);
        Ok(match op {
            Comparison::Greater | Comparison::GreaterEq => {
                Constraint::new(ConstraintKind::Inequality, label, move |o, _| value(o) - threshold)
            }
            Comparison::Less | Comparison::LessEq => {
                Constraint::new(ConstraintKind::Inequality, label, move |o, _| threshold - value(o))
            }
            Comparison::Equal => Constraint::new(ConstraintKind::Equality, label, move |o, _| value(o) - threshold),
        })
    }

    pub fn with_constraints(mut self, constraints: Vec<Constraint>) -> Self {
        self.constraints = constraints;
        self
    }

    pub fn with_intervals(
        mut self,
        interval_fn: impl Fn(&[f64]) -> Result<Vec<(f64, f64)>> + Send + Sync + 'static,
    ) -> Self {
        self.interval_fn = Some(Arc::new(interval_fn));
        self
    }

    pub fn n(&self) -> usize {
        self.bounds.len()
    }

    pub fn m(&self) -> usize {
        self.senses.len()
    }

    pub fn has_intervals(&self) -> bool {
        self.interval_fn.is_some()
    }

    /// Raw objective values as the problem reports them (user sense).
    pub fn raw_objectives(&self, design: &[f64]) -> Result<Vec<f64>> {
        if design.len() != self.n() {
            return Err(Error::contract(format!(
                "design has {} variables, problem expects {}",
                design.len(),
                self.n()
            )));
        }
        let raw = (self.objective_fn)(design)?;
        if raw.len() != self.m() {
            return Err(Error::Objective(format!(
                "objective function returned {} values, expected {}",
                raw.len(),
                self.m()
            )));
        }
        if let Some(bad) = raw.iter().find(|v| !v.is_finite()) {
            return Err(Error::Objective(format!("objective function returned {bad}")));
        }
        Ok(raw)
    }

    /// Interval bounds for each objective, in raw (user) units.
    pub fn intervals(&self, design: &[f64]) -> Option<Result<Vec<(f64, f64)>>> {
        self.interval_fn.as_ref().map(|f| f(design))
    }

    pub fn evaluate(&self, design: DesignVector) -> Result<Solution> {
        let raw = self.raw_objectives(&design)?;
        let canonical = canonicalize(&raw, &self.senses)?;
        let (_, violation) = evaluate_constraints_with_tol(&raw, &design, &self.constraints, self.equality_tol)?;
        Ok(Solution::new(design, ObjectiveVector::new(raw), canonical, violation))
    }
}

/// Sequence of problems over generations. All steps share design bounds and
/// objective senses.
#[derive(Debug, Clone)]
pub struct DynamicSchedule {
    steps: Vec<(usize, Arc<ProblemSpec>)>,
}

impl DynamicSchedule {
    pub fn new(steps: Vec<(usize, ProblemSpec)>) -> Result<Self> {
        let first = steps
            .first()
            .ok_or_else(|| Error::contract("a schedule needs at least one step"))?;
        let (bounds, senses) = (first.1.bounds.clone(), first.1.senses.clone());
        for (i, (duration, p)) in steps.iter().enumerate() {
            if *duration == 0 {
                return Err(Error::contract(format!("step {i} has zero duration")));
            }
            if p.bounds != bounds || p.senses != senses {
                return Err(Error::contract(format!(
                    "step {i} changes design bounds or objective senses"
                )));
            }
        }
        Ok(Self {
            steps: steps.into_iter().map(|(d, p)| (d, Arc::new(p))).collect(),
        })
    }

    /// A single problem that never changes.
    pub fn fixed(problem: ProblemSpec) -> Self {
        Self {
            steps: vec![(usize::MAX, Arc::new(problem))],
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Step index active at `generation`; the last step persists forever.
    pub fn step_index(&self, generation: usize) -> usize {
        let mut end = 0usize;
        for (i, (duration, _)) in self.steps.iter().enumerate() {
            end = end.saturating_add(*duration);
            if generation < end {
                return i;
            }
        }
        self.steps.len() - 1
    }

    pub fn step(&self, index: usize) -> &Arc<ProblemSpec> {
        &self.steps[index].1
    }

    /// First generation of every step.
    pub fn transitions(&self) -> Vec<usize> {
        let mut start = 0usize;
        let mut out = Vec::with_capacity(self.steps.len());
        for (duration, _) in &self.steps {
            out.push(start);
            start = start.saturating_add(*duration);
        }
        out
    }
}

pub fn problem_at(schedule: &DynamicSchedule, generation: usize) -> &Arc<ProblemSpec> {
    schedule.step(schedule.step_index(generation))
}

/// Article activity signals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivitySignal {
    /// Hours behind the newest article.
    pub freshness: f64,
    pub views: f64,
    pub likes: f64,
    pub comments: f64,
}

/// Linear article score `α·freshness + β·views + γ·likes + φ·comments`.
pub fn article_score(weights: [f64; 4], activity: &ActivitySignal) -> Result<f64> {
    let signals = [activity.freshness, activity.views, activity.likes, activity.comments];
    if weights.iter().chain(&signals).any(|v| !v.is_finite()) {
        return Err(Error::contract("article score inputs must be finite"));
    }
    Ok(weights.iter().zip(&signals).map(|(w, s)| w * s).sum())
}

/// ZDT1, minimization. The true front is `f2 = 1 - sqrt(f1)` for `f1` in
/// `[0, 1]`.
pub fn zdt1(x: &[f64]) -> Result<Vec<f64>> {
    if x.len() < 2 {
        return Err(Error::contract("zdt1 needs at least two variables"));
    }
    if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::contract(format!("zdt1 input {v} lies outside [0, 1]")));
    }
    let f1 = x[0];
    let tail: f64 = x[1..].iter().sum();
    let g = 1.0 + 9.0 * tail / (x.len() - 1) as f64;
    Ok(vec![f1, g * (1.0 - (f1 / g).sqrt())])
}

pub fn zdt1_problem(n: usize) -> Result<ProblemSpec> {
    if n < 2 {
        return Err(Error::contract("zdt1 needs at least two variables"));
    }
    ProblemSpec::new(vec![(0.0, 1.0); n], vec![ObjectiveSense::Minimize; 2], zdt1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn article_score_examples() {
        let a = ActivitySignal { freshness: 5.0, views: 3.0, likes: 2.0, comments: 1.0 };
        assert_eq!(article_score([1.0, 0.0, 0.0, 0.0], &a).unwrap(), 5.0);
        assert_eq!(article_score([0.0; 4], &a).unwrap(), 0.0);
        let b = ActivitySignal { freshness: 2.0, views: 10.0, likes: 5.0, comments: 1.0 };
        let s = article_score([0.5, 0.2, 0.2, 0.1], &b).unwrap();
        assert!((s - 4.1).abs() < 1e-12);
        let bad = ActivitySignal { freshness: f64::NAN, ..b };
        assert!(article_score([1.0; 4], &bad).is_err());
    }

    #[test]
    fn constraint_examples() {
        let c = vec![Constraint::objective_at_least("log10 clicks >= 6.25", 0, 6.25)];
        assert_eq!(evaluate_constraints(&[6.5], &[], &c).unwrap(), (true, 0.0));
        let (ok, v) = evaluate_constraints(&[6.0], &[], &c).unwrap();
        assert!(!ok);
        assert!((v - 0.25).abs() < 1e-12);
        assert_eq!(evaluate_constraints(&[1.0], &[], &[]).unwrap(), (true, 0.0));
        // boundary equality counts as feasible
        assert_eq!(evaluate_constraints(&[6.25], &[], &c).unwrap(), (true, 0.0));
    }

    #[test]
    fn equality_constraints_use_tolerance() {
        let c = vec![Constraint::new(ConstraintKind::Equality, "sum", |_, x| x[0] + x[1] - 1.0)];
        assert_eq!(evaluate_constraints(&[], &[0.5, 0.5 + 1e-9], &c).unwrap(), (true, 0.0));
        let (ok, v) = evaluate_constraints(&[], &[0.5, 0.7], &c).unwrap();
        assert!(!ok && (v - 0.2).abs() < 1e-12);
    }

    #[test]
    fn non_finite_constraint_names_label() {
        let c = vec![Constraint::new(ConstraintKind::Inequality, "broken", |_, _| f64::NAN)];
        match evaluate_constraints(&[], &[], &c) {
            Err(Error::NonFiniteConstraint { label, .. }) => assert_eq!(label, "broken"),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn tagged(tag: f64) -> ProblemSpec {
        ProblemSpec::new(vec![(0.0, 1.0)], vec![ObjectiveSense::Minimize; 2], move |_| Ok(vec![tag, tag]))
            .unwrap()
    }

    fn tag_of(p: &ProblemSpec) -> f64 {
        p.raw_objectives(&[0.0]).unwrap()[0]
    }

    #[test]
    fn problem_at_examples() {
        let s = DynamicSchedule::new((1..=4).map(|t| (500, tagged(t as f64))).collect()).unwrap();
        assert_eq!(tag_of(problem_at(&s, 0)), 1.0);
        assert_eq!(tag_of(problem_at(&s, 499)), 1.0);
        assert_eq!(tag_of(problem_at(&s, 500)), 2.0);
        assert_eq!(tag_of(problem_at(&s, 1999)), 4.0);
        assert_eq!(tag_of(problem_at(&s, 10_000)), 4.0);
        assert_eq!(s.transitions(), vec![0, 500, 1000, 1500]);
    }

    #[test]
    fn schedule_rejects_mismatched_steps() {
        let other = ProblemSpec::new(vec![(0.0, 2.0)], vec![ObjectiveSense::Minimize; 2], |_| Ok(vec![0.0, 0.0]))
            .unwrap();
        assert!(DynamicSchedule::new(vec![(10, tagged(1.0)), (10, other)]).is_err());
        assert!(DynamicSchedule::new(vec![(0, tagged(1.0))]).is_err());
        assert!(DynamicSchedule::new(vec![]).is_err());
    }

    #[test]
    fn zdt1_examples() {
        assert_eq!(zdt1(&[0.0; 5]).unwrap(), vec![0.0, 1.0]);
        assert_eq!(zdt1(&[1.0, 0.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        let f = zdt1(&[0.25, 0.5, 0.5]).unwrap();
        let g = 1.0 + 9.0 * (1.0 / 2.0);
        assert_eq!(g, 5.5);
        assert_eq!(f[0], 0.25);
        assert!((f[1] - 5.5 * (1.0 - (0.25f64 / 5.5).sqrt())).abs() < 1e-15);
        assert!(zdt1(&[1.5, 0.0]).is_err());
        assert!(zdt1(&[0.5]).is_err());
    }

    #[test]
    fn evaluate_canonicalizes_and_scores_violation() {
        let p = ProblemSpec::new(vec![(0.0, 1.0)], vec![ObjectiveSense::Maximize, ObjectiveSense::Minimize], |x| {
            Ok(vec![x[0], 1.0 - x[0]])
        })
        .unwrap()
        .with_constraints(vec![Constraint::objective_at_least("f1 >= 0.5", 0, 0.5)]);
        let s = p.evaluate(vec![0.25].into()).unwrap();
        assert_eq!(s.raw_objectives.as_slice(), &[0.25, 0.75]);
        assert_eq!(s.objectives.as_slice(), &[-0.25, 0.75]);
        assert!((s.violation - 0.25).abs() < 1e-12);
        assert!(!s.is_feasible());
    }

    #[test]
    fn threshold_constraints_convert_scales() {
        let p = ProblemSpec::new(vec![(0.0, 1.0)], vec![ObjectiveSense::Maximize; 2], |x| Ok(vec![x[0], 1.0]))
            .unwrap()
            .with_names(vec!["w".into()], vec!["clicks".into(), "dwell_ms".into()])
            .with_objective_scales(vec![ValueScale::Log10; 2]);
        let c = p.threshold_constraint("clicks", Comparison::Greater, 6.25, ValueScale::Log10).unwrap();
        assert_eq!(c.value(&[6.5, 0.0], &[]), 0.25);
        let lin = p.threshold_constraint("clicks", Comparison::GreaterEq, 1000.0, ValueScale::Linear).unwrap();
        assert!((lin.value(&[3.0, 0.0], &[])).abs() < 1e-9);
        let below = p.threshold_constraint("dwell_ms", Comparison::Less, 2.0, ValueScale::Log10).unwrap();
        assert_eq!(below.value(&[0.0, 1.5], &[]), 0.5);
        assert!(p.threshold_constraint("views", Comparison::Less, 2.0, ValueScale::Log10).is_err());
        assert_eq!(p.objective_label(0), "log10_clicks");
    }

    proptest! {
        #[test]
        fn zdt1_front_membership(f1 in 0.0f64..=1.0, n in 2usize..30) {
            let mut x = vec![0.0; n];
            x[0] = f1;
            let f = zdt1(&x).unwrap();
            prop_assert_eq!(f[1], 1.0 - f1.sqrt());
        }

        #[test]
        fn score_is_linear(
            w in prop::array::uniform4(-5.0f64..5.0),
            a in prop::array::uniform4(0.0f64..100.0),
            b in prop::array::uniform4(0.0f64..100.0),
            lambda in -3.0f64..3.0,
        ) {
            let sig = |v: [f64; 4]| ActivitySignal { freshness: v[0], views: v[1], likes: v[2], comments: v[3] };
            let sum = [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
            let lhs = article_score(w, &sig(sum)).unwrap();
            let rhs = article_score(w, &sig(a)).unwrap() + article_score(w, &sig(b)).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
            let scaled = article_score(w.map(|x| x * lambda), &sig(a)).unwrap();
            let expected = lambda * article_score(w, &sig(a)).unwrap();
            prop_assert!((scaled - expected).abs() < 1e-9 * (1.0 + expected.abs()));
        }

        #[test]
        fn violation_zero_iff_feasible(g in -10.0f64..10.0) {
            let c = vec![Constraint::new(ConstraintKind::Inequality, "g", move |_, _| g)];
            let (ok, v) = evaluate_constraints(&[], &[], &c).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert_eq!(ok, v == 0.0);
            prop_assert_eq!(ok, g >= 0.0);
        }

        #[test]
        fn problem_at_is_piecewise_constant(durations in prop::collection::vec(1usize..50, 1..6), g in 0usize..400) {
            let steps = durations.iter().enumerate().map(|(i, &d)| (d, tagged(i as f64))).collect();
            let s = DynamicSchedule::new(steps).unwrap();
            let idx = s.step_index(g);
            let start: usize = durations[..idx].iter().sum();
            prop_assert!(g >= start);
            prop_assert!(idx == durations.len() - 1 || g < start + durations[idx]);
            prop_assert_eq!(tag_of(problem_at(&s, g)), idx as f64);
        }
    }
}
