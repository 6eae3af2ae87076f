use serde::Serialize;

use crate::model::ClassId;

/// Mean of a Monte-Carlo estimate and its standard error across iterations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    /// True when `value` lies within `k` standard errors of the mean.
    pub fn within_sigmas(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DelayStats {
    /// First attempt to success, counting the successful slot as one backoff.
    pub inclusive: Estimate,
    /// Retry waits only.
    pub exclusive: Estimate,
    pub resolved: u64,
    pub censored: u64,
    pub censored_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassStats {
    pub class_id: ClassId,
    pub attempts: u64,
    pub colliding: u64,
    /// Colliding attempts over attempts (pooled ratio).
    pub collision_rate: Estimate,
    /// Colliding requests per second.
    pub collision_density: Estimate,
    pub delay: Option<DelayStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellStats {
    /// Colliding requests per second; the mean is the sum of the class means.
    pub collision_density: Estimate,
    /// RAOs holding two or more requests, per second.
    pub collision_event_density: Estimate,
    pub collision_rate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimStats {
    pub iterations: u64,
    pub horizon_s: u32,
    pub per_class: Vec<ClassStats>,
    pub cell: CellStats,
}

impl SimStats {
    pub fn class(&self, id: ClassId) -> Option<&ClassStats> {
        self.per_class.iter().find(|c| c.class_id == id)
    }
}

/// Counts gathered by one iteration.
#[derive(Clone, Debug, Default)]
pub(crate) struct IterationTally {
    pub attempts: Vec<u64>,
    pub colliding: Vec<u64>,
    pub events: u64,
    pub resolved: Vec<u64>,
    /// Sum over resolved requests of the attempts they needed.
    pub attempts_to_success: Vec<u64>,
    pub censored: Vec<u64>,
}

impl IterationTally {
    pub fn new(classes: usize) -> Self {
        Self {
            attempts: vec![0; classes],
            colliding: vec![0; classes],
            events: 0,
            resolved: vec![0; classes],
            attempts_to_success: vec![0; classes],
            censored: vec![0; classes],
        }
    }
}

fn mean_estimate(values: impl Iterator<Item = f64> + Clone, scale: f64) -> Estimate {
    let n = values.clone().count();
    if n == 0 {
        return Estimate::default();
    }
    let mean = values.clone().sum::<f64>() / n as f64;
    let std_error = if n > 1 {
        let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
        (ss / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    Estimate { mean: mean * scale, std_error: std_error * scale }
}

/// Pooled ratio `Σy/Σx` with the usual linearized standard error.
fn ratio_estimate(pairs: &[(u64, u64)], scale: f64) -> Estimate {
    let n = pairs.len();
    let sx: u64 = pairs.iter().map(|p| p.0).sum();
    let sy: u64 = pairs.iter().map(|p| p.1).sum();
    if sx == 0 {
        return Estimate::default();
    }
    let r = sy as f64 / sx as f64;
    let std_error = if n > 1 {
        let xbar = sx as f64 / n as f64;
        let ss: f64 = pairs
            .iter()
            .map(|(x, y)| {
                let d = *y as f64 - r * *x as f64;
                d * d
            })
            .sum();
        (ss / (n - 1) as f64 / n as f64).sqrt() / xbar
    } else {
        0.0
    };
    Estimate { mean: r * scale, std_error: std_error * scale }
}

/// Folds per-iteration tallies (in iteration order) into summary statistics.
pub(crate) fn summarize(
    ids: &[ClassId],
    tallies: &[IterationTally],
    horizon_s: u32,
    backoffs: Option<&[f64]>,
) -> SimStats {
    let horizon = f64::from(horizon_s);
    let per_class: Vec<ClassStats> = ids
        .iter()
        .enumerate()
        .map(|(k, id)| {
            let pairs: Vec<(u64, u64)> = tallies.iter().map(|t| (t.attempts[k], t.colliding[k])).collect();
            let delay = backoffs.map(|b| {
                let resolved: u64 = tallies.iter().map(|t| t.resolved[k]).sum();
                let censored: u64 = tallies.iter().map(|t| t.censored[k]).sum();
                let tries: Vec<(u64, u64)> =
                    tallies.iter().map(|t| (t.resolved[k], t.attempts_to_success[k])).collect();
                let retries: Vec<(u64, u64)> = tallies
                    .iter()
                    .map(|t| (t.resolved[k], t.attempts_to_success[k] - t.resolved[k]))
                    .collect();
                let total = resolved + censored;
                DelayStats {
                    inclusive: ratio_estimate(&tries, b[k]),
                    exclusive: ratio_estimate(&retries, b[k]),
                    resolved,
                    censored,
                    censored_fraction: if total == 0 { 0.0 } else { censored as f64 / total as f64 },
                }
            });
            ClassStats {
                class_id: *id,
                attempts: pairs.iter().map(|p| p.0).sum(),
                colliding: pairs.iter().map(|p| p.1).sum(),
                collision_rate: ratio_estimate(&pairs, 1.0),
                collision_density: mean_estimate(pairs.iter().map(|p| p.1 as f64), 1.0 / horizon),
                delay,
            }
        })
        .collect();

    let totals: Vec<(u64, u64)> = tallies
        .iter()
        .map(|t| (t.attempts.iter().sum(), t.colliding.iter().sum()))
        .collect();
    let mut density = mean_estimate(totals.iter().map(|p| p.1 as f64), 1.0 / horizon);
    density.mean = per_class.iter().map(|c| c.collision_density.mean).sum();
    let cell = CellStats {
        collision_density: density,
        collision_event_density: mean_estimate(tallies.iter().map(|t| t.events as f64), 1.0 / horizon),
        collision_rate: ratio_estimate(&totals, 1.0),
    };
    SimStats { iterations: tallies.len() as u64, horizon_s, per_class, cell }
}
