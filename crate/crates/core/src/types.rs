//! Value types shared across the optimizer, and the sign convention that
//! maps user-facing objectives onto internal minimization.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point in design space.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DesignVector(Vec<f64>);

/// A point in objective space. Inside the optimizer this is always in
/// minimization sense.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObjectiveVector(Vec<f64>);

macro_rules! vector_newtype {
    ($name:ident) => {
        impl $name {
            pub fn new(values: Vec<f64>) -> Self {
                Self(values)
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<f64> {
                self.0
            }

            pub fn is_finite(&self) -> bool {
                self.0.iter().all(|v| v.is_finite())
            }
        }

        impl Deref for $name {
            type Target = [f64];

            fn deref(&self) -> &[f64] {
                &self.0
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(values: Vec<f64>) -> Self {
                Self(values)
            }
        }

        impl From<&[f64]> for $name {
            fn from(values: &[f64]) -> Self {
                Self(values.to_vec())
            }
        }
    };
}

vector_newtype!(DesignVector);
vector_newtype!(ObjectiveVector);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveSense {
    Minimize,
    Maximize,
}

impl ObjectiveSense {
    fn apply(self, value: f64) -> f64 {
        match self {
            ObjectiveSense::Minimize => value,
            ObjectiveSense::Maximize => -value,
        }
    }
}

/// Maps a raw objective vector into minimization sense by negating every
/// maximized component. The mapping is its own inverse.
pub fn canonicalize(raw: &[f64], senses: &[ObjectiveSense]) -> Result<ObjectiveVector> {
    if raw.len() != senses.len() {
        return Err(Error::contract(format!(
            "objective vector has {} components but {} senses were given",
            raw.len(),
            senses.len()
        )));
    }
    Ok(raw
        .iter()
        .zip(senses)
        .map(|(&v, s)| s.apply(v))
        .collect::<Vec<_>>()
        .into())
}

/// A candidate solution together with its evaluation and the bookkeeping
/// written by the latest sort pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub design: DesignVector,
    /// Minimization-sense objectives.
    pub objectives: ObjectiveVector,
    /// Objectives as the problem reported them, before canonicalization.
    pub raw_objectives: ObjectiveVector,
    /// Total constraint violation; zero exactly when feasible.
    pub violation: f64,
    rank: Option<usize>,
    crowding: Option<f64>,
}

impl Solution {
    pub fn new(
        design: DesignVector,
        raw_objectives: ObjectiveVector,
        objectives: ObjectiveVector,
        violation: f64,
    ) -> Self {
        Self {
            design,
            objectives,
            raw_objectives,
            violation,
            rank: None,
            crowding: None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }

    /// Pareto rank from the most recent sort, if one has run.
    pub fn rank(&self) -> Option<usize> {
        self.rank
    }

    /// Crowding distance from the most recent sort, if one has run.
    pub fn crowding(&self) -> Option<f64> {
        self.crowding
    }

    pub fn set_sort_data(&mut self, rank: usize, crowding: f64) {
        self.rank = Some(rank);
        self.crowding = Some(crowding);
    }

    /// Drops rank and crowding, e.g. after the objectives were re-evaluated.
    pub fn clear_sort_data(&mut self) {
        self.rank = None;
        self.crowding = None;
    }
}
