//! Synthetic article data with the same schema as the real exploration
//! data. Each time step has its own click and dwell-time response surface,
//! so the Pareto front moves between steps.

use rand_distr::{Distribution, Normal};

use crate::rng::{RandomSource, UniformSource};

use super::dataset::{Dataset, Record};

/// Row count of the static article dataset.
pub const STATIC_SIZE: usize = 28_922;
/// Row counts of the four time-of-day buckets.
pub const DYNAMIC_SIZES: [usize; 4] = [50_588, 51_284, 72_019, 72_705];

/// Sampling ranges of the design signals, log-uniform.
const RANGES: [(f64, f64); 4] = [(0.05, 168.0), (10.0, 2.0e6), (1.0, 5.0e4), (1.0, 1.0e4)];

/// Peak locations in the unit feature cube, per time step.
const CLICK_PEAKS: [[f64; 4]; 4] = [
    [0.15, 0.85, 0.75, 0.30],
    [0.70, 0.80, 0.20, 0.25],
    [0.80, 0.25, 0.80, 0.30],
    [0.25, 0.20, 0.30, 0.80],
];
const DWELL_PEAKS: [[f64; 4]; 4] = [
    [0.75, 0.35, 0.30, 0.85],
    [0.20, 0.20, 0.75, 0.80],
    [0.20, 0.75, 0.25, 0.80],
    [0.80, 0.80, 0.75, 0.20],
];
const WIDTH: f64 = 0.3;
const CLICKS_BASE: f64 = 2.5;
const CLICKS_PEAK: f64 = 4.3;
const DWELL_BASE: f64 = 3.5;
const DWELL_PEAK: f64 = 2.0;
const NOISE: f64 = 0.05;

fn bump(z: &[f64; 4], center: &[f64; 4]) -> f64 {
    let d2: f64 = z.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (2.0 * WIDTH * WIDTH)).exp()
}

fn sample_rows(rng: &mut RandomSource, count: usize, step: usize, time_step: Option<u8>, out: &mut Vec<Record>) {
    let noise = Normal::new(0.0, NOISE).expect("valid noise scale");
    for _ in 0..count {
        let mut z = [0.0; 4];
        let mut raw = [0.0; 4];
        for (j, &(lo, hi)) in RANGES.iter().enumerate() {
            z[j] = rng.next_uniform();
            let v = (lo.ln() + z[j] * (hi.ln() - lo.ln())).exp();
            // Freshness is continuous; the activity signals are counts.
            raw[j] = if j == 0 { v } else { v.round().max(1.0) };
        }
        let log_clicks = CLICKS_BASE + CLICKS_PEAK * bump(&z, &CLICK_PEAKS[step]) + noise.sample(rng.inner());
        let log_dwell = DWELL_BASE + DWELL_PEAK * bump(&z, &DWELL_PEAKS[step]) + noise.sample(rng.inner());
        out.push(Record {
            freshness: raw[0],
            views: raw[1],
            likes: raw[2],
            comments: raw[3],
            clicks: 10f64.powf(log_clicks).round(),
            dwell_ms: 10f64.powf(log_dwell).round(),
            time_step,
        });
    }
}

/// Deterministic synthetic dataset. A single size yields a static dataset
/// without time steps; several sizes yield one time step per entry (at most
/// four), each with its own response surface.
pub fn generate_synthetic(seed: u64, sizes: &[usize]) -> Dataset {
    assert!(
        !sizes.is_empty() && sizes.len() <= CLICK_PEAKS.len(),
        "between one and four time steps are supported"
    );
    let mut rng = RandomSource::new(seed);
    let mut rows = Vec::with_capacity(sizes.iter().sum());
    if let [count] = sizes {
        sample_rows(&mut rng, *count, 0, None, &mut rows);
    } else {
        for (step, &count) in sizes.iter().enumerate() {
            sample_rows(&mut rng, count, step, Some(step as u8 + 1), &mut rows);
        }
    }
    let provenance = format!("synthetic(seed={seed}, sizes={sizes:?})");
    Dataset::new(rows, provenance)
}
