use std::fs;
use std::path::Path;

use crate::algorithms::{GenerationRecord, RunResult};
use crate::error::{Error, Result};
use crate::problems::{DynamicSchedule, ProblemSpec};
use crate::types::Solution;

/// A result file held in memory until the whole experiment has succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self { name: name.into(), bytes }
    }
}

/// Writes every artifact into `dir`, creating it if needed.
pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    fs::create_dir_all(dir)?;
    for a in artifacts {
        fs::write(dir.join(&a.name), &a.bytes)?;
    }
    Ok(())
}

fn csv_bytes(header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

pub fn interval_labels(label: &str) -> (String, String) {
    (format!("{label}_lo90"), format!("{label}_hi90"))
}

/// Front members as CSV: design columns, raw objective columns, 90% bounds
/// when the problem provides them, total violation and feasibility.
pub fn front_csv(problem: &ProblemSpec, front: &[Solution]) -> Result<Vec<u8>> {
    let mut header: Vec<String> = problem.design_names.clone();
    let labels: Vec<String> = (0..problem.m()).map(|j| problem.objective_label(j)).collect();
    header.extend(labels.iter().cloned());
    if problem.has_intervals() {
        for label in &labels {
            let (lo, hi) = interval_labels(label);
            header.push(lo);
            header.push(hi);
        }
    }
    header.push("violation".into());
    header.push("feasible".into());

    let mut rows = Vec::with_capacity(front.len());
    for s in front {
        let mut row: Vec<String> = s.design.iter().map(f64::to_string).collect();
        row.extend(s.raw_objectives.iter().map(f64::to_string));
        if let Some(bounds) = problem.intervals(&s.design) {
            for (lo, hi) in bounds? {
                row.push(lo.to_string());
                row.push(hi.to_string());
            }
        }
        row.push(s.violation.to_string());
        row.push(s.is_feasible().to_string());
        rows.push(row);
    }
    csv_bytes(header, rows)
}

pub fn history_csv(history: &[GenerationRecord]) -> Result<Vec<u8>> {
    let header = [
        "generation",
        "step",
        "hypervolume",
        "effective_p_m",
        "feasible_count",
        "front0_size",
        "best_violation",
        "change_detected",
    ];
    let rows = history
        .iter()
        .map(|r| {
            vec![
                r.generation.to_string(),
                (r.step + 1).to_string(),
                r.hypervolume.to_string(),
                r.effective_p_m.to_string(),
                r.feasible_count.to_string(),
                r.front0_size.to_string(),
                r.best_violation.to_string(),
                r.change_detected.to_string(),
            ]
        })
        .collect();
    csv_bytes(header.iter().map(|s| s.to_string()).collect(), rows)
}

/// Plot inputs: one front file per schedule step and the hypervolume trace.
pub fn emit_plot_data(
    result: &RunResult,
    schedule: &DynamicSchedule,
    filter: impl Fn(&[Solution]) -> Vec<Solution>,
) -> Result<Vec<Artifact>> {
    let mut out = Vec::new();
    for sf in &result.step_fronts {
        let front = filter(&sf.solutions);
        out.push(Artifact::new(
            format!("front_step_{}.csv", sf.step + 1),
            front_csv(schedule.step(sf.step), &front)?,
        ));
    }
    let rows = result
        .history
        .iter()
        .map(|r| vec![r.generation.to_string(), (r.step + 1).to_string(), r.hypervolume.to_string()])
        .collect();
    out.push(Artifact::new(
        "hv_per_generation.csv",
        csv_bytes(vec!["generation".into(), "step".into(), "hypervolume".into()], rows)?,
    ));
    Ok(out)
}

/// A front file read back for scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedFront {
    /// Raw objective values, one row per solution.
    pub objectives: Vec<Vec<f64>>,
    /// Per-solution `(lo90, hi90)` pairs, when the file carries them.
    pub intervals: Option<Vec<Vec<(f64, f64)>>>,
}

/// Reads the objective (and interval) columns named by `labels` from a
/// front CSV.
pub fn read_front(path: &Path, labels: &[String]) -> Result<LoadedFront> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    let column = |name: &str| header.iter().position(|h| h == name);
    let objective_cols: Vec<usize> = labels
        .iter()
        .map(|l| column(l).ok_or_else(|| Error::MissingColumn(l.clone())))
        .collect::<Result<_>>()?;
    let interval_cols: Option<Vec<(usize, usize)>> = labels
        .iter()
        .map(|l| {
            let (lo, hi) = interval_labels(l);
            Some((column(&lo)?, column(&hi)?))
        })
        .collect();

    let parse = |record: &csv::StringRecord, col: usize| -> Result<f64> {
        let text = &record[col];
        text.parse::<f64>()
            .map_err(|_| Error::contract(format!("`{text}` in column `{}` is not a number", &header[col])))
    };
    let mut objectives = Vec::new();
    let mut intervals = interval_cols.as_ref().map(|_| Vec::new());
    for record in reader.records() {
        let record = record?;
        objectives.push(objective_cols.iter().map(|&c| parse(&record, c)).collect::<Result<Vec<_>>>()?);
        if let (Some(cols), Some(rows)) = (&interval_cols, intervals.as_mut()) {
            rows.push(
                cols.iter()
                    .map(|&(lo, hi)| Ok((parse(&record, lo)?, parse(&record, hi)?)))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
    }
    Ok(LoadedFront { objectives, intervals })
}
