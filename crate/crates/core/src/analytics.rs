//! Closed-form collision and delay models.
//!
//! Every attempt is modelled as landing on a uniformly chosen RAO with the
//! other requests on that RAO Poisson-distributed, so a class whose requests
//! spread `x` requests per RAO collides with probability `1 - e^{-x}`.

use serde::Serialize;
use thiserror::Error;

use crate::model::{AllocationPlan, ClassId, DeviceClass, ModelError, Scenario, SharingTopology};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum AnalyticsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Closed-form metrics of one class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClassMetrics<T> {
    pub class_id: ClassId,
    pub ra_density: T,
    /// Per-attempt collision probability `p_i`.
    pub collision_rate: T,
    /// `1 - p_i`.
    pub success_rate: T,
    /// Colliding requests per second, `γ_i p_i`.
    pub collision_density: T,
    /// Mean inclusive access delay `T_i / (1 - p_i)`, seconds.
    pub mean_delay: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CellMetrics<T> {
    pub total_collision_density: T,
    /// Probability that at least one request in the cell collides within a second.
    pub collision_probability: T,
}

/// Mean access delay under a fixed backoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DelayEstimate<T> {
    /// Counts the slot of the successful attempt: `T / (1 - p)`.
    pub inclusive: T,
    /// Retry waits only: `T p / (1 - p)`.
    pub exclusive: T,
}

fn check_density<T: Scalar>(name: &str, v: T) -> Result<(), AnalyticsError> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(AnalyticsError::InvalidInput(format!("{name} must be positive and finite, got {v}")))
    }
}

/// `1 - e^{-γ/L}`, evaluated through `expm1`.
pub fn simple_collision_rate<T: Scalar>(ra_density: T, raos: T) -> Result<T, AnalyticsError> {
    check_density("RA density", ra_density)?;
    check_density("RAO count", raos)?;
    Ok(rate_unchecked(ra_density / raos))
}

#[inline]
fn rate_unchecked<T: Scalar>(load: T) -> T {
    -(-load).exp_m1()
}

fn metrics_from_rate<T: Scalar>(class: &DeviceClass<T>, collision_rate: T) -> ClassMetrics<T> {
    let success_rate = T::one() - collision_rate;
    ClassMetrics {
        class_id: class.id(),
        ra_density: class.ra_density(),
        collision_rate,
        success_rate,
        collision_density: class.ra_density() * collision_rate,
        mean_delay: class.backoff() / success_rate,
    }
}

/// Collision rate shared by every class when all RAOs serve all classes.
pub fn full_sharing_rate<T: Scalar>(scenario: &Scenario<T>) -> Result<T, AnalyticsError> {
    simple_collision_rate(scenario.total_density(), T::from_u64_lossy(scenario.total_raos()))
}

pub fn full_sharing_metrics<T: Scalar>(scenario: &Scenario<T>) -> Result<Vec<ClassMetrics<T>>, AnalyticsError> {
    let p = full_sharing_rate(scenario)?;
    Ok(scenario.classes().iter().map(|c| metrics_from_rate(c, p)).collect())
}

/// Metrics of one class owning `raos` dedicated RAOs.
pub fn dedicated_class_metrics<T: Scalar>(class: &DeviceClass<T>, raos: u64) -> Result<ClassMetrics<T>, AnalyticsError> {
    let l = T::from_u64_lossy(raos);
    let p = simple_collision_rate(class.ra_density(), l)?;
    let delay = mean_access_delay(class.ra_density(), l, class.backoff())?;
    Ok(ClassMetrics { mean_delay: delay.inclusive, ..metrics_from_rate(class, p) })
}

/// Per-class metrics under full dedication; each class only sees its own RAOs.
pub fn full_dedication_rates<T: Scalar>(
    scenario: &Scenario<T>,
    plan: &AllocationPlan,
) -> Result<Vec<ClassMetrics<T>>, AnalyticsError> {
    plan.check(scenario)?;
    scenario
        .classes()
        .iter()
        .map(|c| dedicated_class_metrics(c, plan.get(c.id()).expect("plan checked")))
        .collect()
}

/// Per-class metrics under partial dedication.
///
/// A class-`j` request lands on each of its `♯B_j` usable RAOs with equal
/// probability, so RAO `l` carries `Σ_{j∈A_l} γ_j/♯B_j` requests on average.
/// Class `i` averages the resulting collision rate over its usable set.
pub fn partial_dedication_rates<T: Scalar>(
    scenario: &Scenario<T>,
    topology: &SharingTopology,
) -> Result<Vec<ClassMetrics<T>>, AnalyticsError> {
    topology.check(scenario)?;
    topology.check_consistency()?;

    let per_rao: Vec<(ClassId, T)> = topology
        .usable_sets()
        .iter()
        .map(|(id, set)| {
            let class = scenario.class(*id).expect("topology checked");
            (*id, class.ra_density() / T::from_u64_lossy(set.len() as u64))
        })
        .collect();
    let load_of = |id: ClassId| per_rao.iter().find(|(c, _)| *c == id).expect("known class").1;

    // RAOs with identical sharer sets have identical load; evaluate each distinct
    // sharer set once.
    let mut regions: std::collections::BTreeMap<&[ClassId], u64> = Default::default();
    for l in 0..topology.total_raos() as u32 {
        let sharers = topology.sharers(l);
        if !sharers.is_empty() {
            *regions.entry(sharers).or_default() += 1;
        }
    }
    let region_rates: Vec<(&[ClassId], u64, T)> = regions
        .into_iter()
        .map(|(sharers, count)| {
            let load = sharers.iter().fold(T::zero(), |acc, id| acc + load_of(*id));
            (sharers, count, rate_unchecked(load))
        })
        .collect();

    scenario
        .classes()
        .iter()
        .map(|c| {
            let usable = topology.usable(c.id()).expect("topology checked").len() as u64;
            let sum = region_rates
                .iter()
                .filter(|(sharers, _, _)| sharers.contains(&c.id()))
                .fold(T::zero(), |acc, (_, count, p)| acc + T::from_u64_lossy(*count) * *p);
            Ok(metrics_from_rate(c, sum / T::from_u64_lossy(usable)))
        })
        .collect()
}

/// `Σ_i γ_i p_i`: expected colliding requests per second.
pub fn cell_collision_density<T: Scalar>(scenario: &Scenario<T>, plan: &AllocationPlan) -> Result<T, AnalyticsError> {
    Ok(full_dedication_rates(scenario, plan)?
        .iter()
        .fold(T::zero(), |acc, m| acc + m.collision_density))
}

/// `1 - Π_i (1 - p_i)^{γ_i}` under full dedication, with `p_i` from the
/// per-class model.
pub fn cell_collision_probability<T: Scalar>(
    scenario: &Scenario<T>,
    plan: &AllocationPlan,
) -> Result<T, AnalyticsError> {
    Ok(cell_metrics(&full_dedication_rates(scenario, plan)?).collision_probability)
}

/// `1 - exp(-Σ_i γ_i²/L_i)`; algebraically equal to [`cell_collision_probability`].
pub fn cell_collision_probability_exponent_form<T: Scalar>(
    scenario: &Scenario<T>,
    plan: &AllocationPlan,
) -> Result<T, AnalyticsError> {
    plan.check(scenario)?;
    let exponent = scenario.classes().iter().fold(T::zero(), |acc, c| {
        let g = c.ra_density();
        acc + g * g / T::from_u64_lossy(plan.get(c.id()).expect("plan checked"))
    });
    Ok(-(-exponent).exp_m1())
}

/// Cell totals from per-class metrics of any strategy.
pub fn cell_metrics<T: Scalar>(classes: &[ClassMetrics<T>]) -> CellMetrics<T> {
    let total_collision_density = classes.iter().fold(T::zero(), |acc, m| acc + m.collision_density);
    // Π q_i^{γ_i} in the log domain so large densities do not underflow.
    let log_clear = classes
        .iter()
        .fold(T::zero(), |acc, m| acc + m.ra_density * (-m.collision_rate).ln_1p());
    CellMetrics { total_collision_density, collision_probability: -log_clear.exp_m1() }
}

/// Mean access delay of a class with density `γ` on `L` dedicated RAOs and
/// backoff `T`: inclusive `T e^{γ/L}`, exclusive `T (e^{γ/L} - 1)`.
pub fn mean_access_delay<T: Scalar>(ra_density: T, raos: T, backoff: T) -> Result<DelayEstimate<T>, AnalyticsError> {
    check_density("RA density", ra_density)?;
    check_density("RAO count", raos)?;
    check_density("backoff", backoff)?;
    let load = ra_density / raos;
    Ok(DelayEstimate { inclusive: backoff * load.exp(), exclusive: backoff * load.exp_m1() })
}
