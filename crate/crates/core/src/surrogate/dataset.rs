use std::io::{Read, Write};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::RandomSource;

pub const COLUMNS: [&str; 7] = [
    "freshness",
    "views",
    "likes",
    "comments",
    "clicks",
    "dwell_ms",
    "time_step",
];
const REQUIRED: usize = 6;

/// One article observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    /// Hours behind the newest article.
    pub freshness: f64,
    pub views: f64,
    pub likes: f64,
    pub comments: f64,
    pub clicks: f64,
    pub dwell_ms: f64,
    /// Time-of-day bucket, 1 through 4.
    pub time_step: Option<u8>,
}

impl Record {
    pub fn design(&self) -> [f64; 4] {
        [self.freshness, self.views, self.likes, self.comments]
    }

    pub fn objectives(&self) -> [f64; 2] {
        [self.clicks, self.dwell_ms]
    }

    fn is_valid(&self) -> bool {
        let values = [
            self.freshness,
            self.views,
            self.likes,
            self.comments,
            self.clicks,
            self.dwell_ms,
        ];
        values.iter().all(|v| v.is_finite() && *v >= 0.0)
            && self.time_step.is_none_or(|t| (1..=4).contains(&t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub rows: Vec<Record>,
    pub provenance: String,
    /// Rows rejected during ingestion.
    pub dropped: usize,
}

impl Dataset {
    pub fn new(rows: Vec<Record>, provenance: impl Into<String>) -> Self {
        Self {
            rows,
            provenance: provenance.into(),
            dropped: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct time steps present, ascending.
    pub fn time_steps(&self) -> Vec<u8> {
        let mut steps: Vec<u8> = self.rows.iter().filter_map(|r| r.time_step).collect();
        steps.sort_unstable();
        steps.dedup();
        steps
    }

    pub fn for_time_step(&self, step: u8) -> Dataset {
        Dataset {
            rows: self.rows.iter().filter(|r| r.time_step == Some(step)).copied().collect(),
            provenance: format!("{} [time step {step}]", self.provenance),
            dropped: 0,
        }
    }

    /// Shuffles with `seed` and splits into train/test/validation parts of
    /// the given fractions (the remainder goes to validation).
    pub fn split(&self, seed: u64, train: f64, test: f64) -> (Dataset, Dataset, Dataset) {
        let mut rows = self.rows.clone();
        let mut rng = RandomSource::new(seed);
        rows.shuffle(rng.inner());
        let n_train = ((rows.len() as f64) * train).round() as usize;
        let n_test = (((rows.len() as f64) * test).round() as usize).min(rows.len() - n_train);
        let validation = rows.split_off(n_train + n_test);
        let test_rows = rows.split_off(n_train);
        let part = |rows, name: &str| Dataset {
            rows,
            provenance: format!("{} [{name}]", self.provenance),
            dropped: 0,
        };
        (part(rows, "train"), part(test_rows, "test"), part(validation, "validation"))
    }
}

fn parse_field(field: Option<&str>) -> Option<f64> {
    field?.trim().parse::<f64>().ok()
}

/// Reads the comma-separated article schema. Rows that fail to parse or
/// break the record invariants are dropped and counted.
pub fn load_dataset(source: impl Read, provenance: impl Into<String>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::EmptyDataset);
    }
    let mut index = [None; 7];
    for (slot, name) in index.iter_mut().zip(COLUMNS) {
        *slot = headers.iter().position(|h| h == name);
    }
    if let Some(missing) = (0..REQUIRED).find(|&i| index[i].is_none()) {
        return Err(Error::MissingColumn(COLUMNS[missing].to_string()));
    }

    let mut rows = Vec::new();
    let mut dropped = 0;
    for record in reader.records() {
        let Ok(record) = record else {
            dropped += 1;
            continue;
        };
        let get = |i: usize| parse_field(index[i].and_then(|c| record.get(c)));
        let values: Option<Vec<f64>> = (0..REQUIRED).map(get).collect();
        let time_step = match index[6].and_then(|c| record.get(c)).map(str::trim) {
            None | Some("") => Some(None),
            Some(s) => s.parse::<u8>().ok().map(Some),
        };
        let parsed = values.zip(time_step).map(|(v, time_step)| Record {
            freshness: v[0],
            views: v[1],
            likes: v[2],
            comments: v[3],
            clicks: v[4],
            dwell_ms: v[5],
            time_step,
        });
        match parsed {
            Some(r) if r.is_valid() => rows.push(r),
            _ => dropped += 1,
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Ok(Dataset {
        rows,
        provenance: provenance.into(),
        dropped,
    })
}

pub fn write_dataset(dataset: &Dataset, sink: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    writer.write_record(COLUMNS)?;
    for r in &dataset.rows {
        let step = r.time_step.map(|t| t.to_string()).unwrap_or_default();
        writer.write_record([
            r.freshness.to_string(),
            r.views.to_string(),
            r.likes.to_string(),
            r.comments.to_string(),
            r.clicks.to_string(),
            r.dwell_ms.to_string(),
            step,
        ])?;
    }
    writer.flush()?;
    Ok(())
}
