use serde::Serialize;

use super::{run, Layout, SimConfig, SimError, SimStats};
use crate::analytics;
use crate::model::{AllocationPlan, ClassId, Scenario};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    /// RAOs given to the swept class; the other class gets the rest.
    pub swept_raos: u64,
    pub other_raos: u64,
    pub stats: SimStats,
    /// Closed-form colliding-request densities (swept, other).
    pub analytic_density: [f64; 2],
    pub analytic_total: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub swept_class: ClassId,
    pub other_class: ClassId,
    pub rows: Vec<SweepRow>,
    /// `swept_raos` of the row with the smallest simulated total density.
    pub empirical_argmin: u64,
    pub analytic_argmin: u64,
}

impl SweepTable {
    pub fn row(&self, swept_raos: u64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.swept_raos == swept_raos)
    }
}

/// Simulates a two-class dedicated scenario at each split `(l, L - l)` of the
/// RAO budget, alongside the closed-form densities.
pub fn sweep_dedication<T: Scalar>(
    scenario: &Scenario<T>,
    class_index: usize,
    l_values: &[u64],
    config: &SimConfig,
) -> Result<SweepTable, SimError> {
    if scenario.len() != 2 {
        return Err(SimError::Unsupported(format!(
            "sweeps need exactly two classes, scenario has {}",
            scenario.len()
        )));
    }
    if class_index > 1 {
        return Err(SimError::Unsupported(format!("class index {class_index} out of range")));
    }
    if l_values.is_empty() {
        return Err(SimError::InvalidConfig("no sweep points".into()));
    }
    let total = scenario.total_raos();
    let swept = &scenario.classes()[class_index];
    let other = &scenario.classes()[1 - class_index];

    let mut rows = Vec::with_capacity(l_values.len());
    for &l in l_values {
        if l == 0 || l >= total {
            return Err(SimError::InvalidConfig(format!("sweep point {l} outside [1, {}]", total - 1)));
        }
        let plan = AllocationPlan::from_pairs([(swept.id(), l), (other.id(), total - l)]);
        let stats = run(scenario, Layout::Dedicated(&plan), config)?;
        let metrics = analytics::full_dedication_rates(scenario, &plan)
            .map_err(|e| SimError::Unsupported(e.to_string()))?;
        let density = |id: ClassId| {
            metrics.iter().find(|m| m.class_id == id).expect("plan covers both").collision_density.as_f64()
        };
        let analytic_density = [density(swept.id()), density(other.id())];
        rows.push(SweepRow {
            swept_raos: l,
            other_raos: total - l,
            stats,
            analytic_total: analytic_density[0] + analytic_density[1],
            analytic_density,
        });
    }

    let argmin = |key: &dyn Fn(&SweepRow) -> f64| {
        rows.iter()
            .min_by(|a, b| key(a).partial_cmp(&key(b)).expect("finite densities"))
            .expect("non-empty")
            .swept_raos
    };
    let empirical_argmin = argmin(&|r| r.stats.cell.collision_density.mean);
    let analytic_argmin = argmin(&|r| r.analytic_total);
    Ok(SweepTable { swept_class: swept.id(), other_class: other.id(), rows, empirical_argmin, analytic_argmin })
}
