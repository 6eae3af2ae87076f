//! RAO allocation: proportional dedication, QoS reservations, Reserve-and-Divide,
//! and an exhaustive search used to check them.

use serde::Serialize;
use thiserror::Error;

use crate::analytics::{self, AnalyticsError, ClassMetrics};
use crate::model::{AllocationPlan, ClassId, ModelError, Scenario};
use crate::scalar::Scalar;

/// Default cap on the number of candidate plans [`brute_force_optimal`] visits.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 50_000_000;

#[derive(Debug, Error)]
pub enum AllocError {
    #[error("insufficient resources: {raos} RAOs cannot give {classes} classes one RAO each")]
    InsufficientResources { raos: u64, classes: usize },
    #[error("RACH resource overload: reserving {needed} RAOs for class {class_id} leaves {remaining} of {total}")]
    Overload { class_id: ClassId, needed: u64, remaining: i128, total: u64 },
    #[error("RACH resource overload: {residual} RAOs left after reservation cannot serve {normal_classes} normal classes")]
    ResidualOverload { residual: u64, normal_classes: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("enumeration of {candidates} plans exceeds the budget of {budget}")]
    BudgetExceeded { candidates: u128, budget: u64 },
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl AllocError {
    pub fn is_overload(&self) -> bool {
        matches!(self, AllocError::Overload { .. } | AllocError::ResidualOverload { .. })
    }
}

/// Splits `total` into integers proportional to `weights` by largest remainder,
/// with every share at least one. Ties on the remainder go to the earlier entry.
pub fn apportion<T: Scalar>(weights: &[T], total: u64) -> Result<Vec<u64>, AllocError> {
    let n = weights.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if total < n as u64 {
        return Err(AllocError::InsufficientResources { raos: total, classes: n });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > T::zero())) {
        return Err(AllocError::InvalidInput("weights must be positive and finite".into()));
    }
    let sum = weights.iter().fold(T::zero(), |acc, w| acc + *w);
    let budget = T::from_u64_lossy(total);
    let targets: Vec<T> = weights.iter().map(|w| budget * *w / sum).collect();

    let mut shares: Vec<u64> = targets
        .iter()
        .map(|t| t.floor().to_u64().unwrap_or(0).clamp(1, total))
        .collect();
    let remainder = |i: usize, shares: &[u64]| targets[i] - T::from_u64_lossy(shares[i]);

    let mut assigned: u64 = shares.iter().sum();
    while assigned < total {
        // largest remainder first, lower index on ties
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| remainder(b, &shares).partial_cmp(&remainder(a, &shares)).unwrap().then(a.cmp(&b)));
        for &i in order.iter().take((total - assigned) as usize) {
            shares[i] += 1;
        }
        assigned = shares.iter().sum();
    }
    while assigned > total {
        // the one-RAO floor over-committed: take back from the smallest remainders
        let mut order: Vec<usize> = (0..n).filter(|&i| shares[i] > 1).collect();
        order.sort_by(|&a, &b| remainder(a, &shares).partial_cmp(&remainder(b, &shares)).unwrap().then(b.cmp(&a)));
        for &i in order.iter().take((assigned - total) as usize) {
            shares[i] -= 1;
        }
        assigned = shares.iter().sum();
    }
    Ok(shares)
}

/// Dedicated plan with `L_i ∝ γ_i`, which equalizes `γ_i/L_i` across classes.
pub fn proportional_allocation<T: Scalar>(scenario: &Scenario<T>) -> Result<AllocationPlan, AllocError> {
    let weights: Vec<T> = scenario.classes().iter().map(|c| c.ra_density()).collect();
    let shares = apportion(&weights, scenario.total_raos())?;
    Ok(AllocationPlan::from_pairs(scenario.classes().iter().map(|c| c.id()).zip(shares)))
}

/// Smallest real `L` with `1 - e^{-γ/L} ≤ p̂`: `γ / -ln(1 - p̂)`.
pub fn collision_rate_bound<T: Scalar>(ra_density: T, max_rate: T) -> Result<T, AllocError> {
    if !(max_rate > T::zero() && max_rate < T::one()) {
        return Err(AllocError::InvalidInput(format!("collision-rate bound must lie in (0, 1), got {max_rate}")));
    }
    check_positive("RA density", ra_density)?;
    Ok(ra_density / -(-max_rate).ln_1p())
}

/// Smallest real `L` with `T e^{γ/L} ≤ D̄`: `γ / ln(D̄/T)`.
pub fn delay_bound<T: Scalar>(ra_density: T, backoff: T, max_delay: T) -> Result<T, AllocError> {
    check_positive("RA density", ra_density)?;
    check_positive("backoff", backoff)?;
    if !(max_delay.is_finite() && max_delay > backoff) {
        return Err(AllocError::InvalidInput(format!(
            "delay bound {max_delay} must exceed the backoff {backoff}"
        )));
    }
    Ok(ra_density / (max_delay / backoff).ln())
}

fn check_positive<T: Scalar>(name: &str, v: T) -> Result<(), AllocError> {
    if v.is_finite() && v > T::zero() {
        Ok(())
    } else {
        Err(AllocError::InvalidInput(format!("{name} must be positive and finite, got {v}")))
    }
}

fn integral_reservation<T: Scalar>(bound: T, ok: impl Fn(u64) -> bool) -> Result<u64, AllocError> {
    let mut l = bound
        .ceil()
        .to_u64()
        .ok_or_else(|| AllocError::InvalidInput(format!("reservation {bound} is not representable")))?
        .max(1);
    // ceil of a rounded quotient can land one short of the bound
    while !ok(l) {
        l += 1;
    }
    Ok(l)
}

/// Fewest dedicated RAOs keeping the collision rate at or below `max_rate`.
pub fn reserve_for_collision_rate<T: Scalar>(ra_density: T, max_rate: T) -> Result<u64, AllocError> {
    let bound = collision_rate_bound(ra_density, max_rate)?;
    integral_reservation(bound, |l| -(-ra_density / T::from_u64_lossy(l)).exp_m1() <= max_rate)
}

/// Fewest dedicated RAOs keeping the mean inclusive delay at or below `max_delay`.
pub fn reserve_for_delay<T: Scalar>(ra_density: T, backoff: T, max_delay: T) -> Result<u64, AllocError> {
    let bound = delay_bound(ra_density, backoff, max_delay)?;
    integral_reservation(bound, |l| backoff * (ra_density / T::from_u64_lossy(l)).exp() <= max_delay)
}

/// Reserve-and-Divide result.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AllocationOutcome<T> {
    pub plan: AllocationPlan,
    /// RAOs reserved for each special class, in processing order.
    pub reserved: Vec<(ClassId, u64)>,
    /// RAOs left after the reservations and before division.
    pub residual: u64,
    pub diagnostics: Vec<ClassMetrics<T>>,
}

/// Reserves QoS-sufficient RAOs for the special classes in order, then divides the
/// residual among the normal classes in proportion to their densities.
///
/// Special classes receive exactly their reservation. When every class is
/// special the residual stays unallocated.
pub fn reserve_and_divide<T: Scalar>(scenario: &Scenario<T>) -> Result<AllocationOutcome<T>, AllocError> {
    let total = scenario.total_raos();
    let mut remaining = i128::from(total);
    let mut plan = AllocationPlan::default();
    let mut reserved = Vec::new();

    for class in scenario.classes().iter().filter(|c| c.is_special()) {
        let qos = class
            .qos()
            .ok_or_else(|| AllocError::InvalidInput(format!("special class {} has no QoS target", class.id())))?;
        let max_rate = qos.collision_rate_bound(class.backoff());
        let needed = reserve_for_collision_rate(class.ra_density(), max_rate)?;
        remaining -= i128::from(needed);
        if remaining < 0 {
            return Err(AllocError::Overload { class_id: class.id(), needed, remaining, total });
        }
        plan.insert(class.id(), needed);
        reserved.push((class.id(), needed));
    }

    let residual = remaining as u64;
    let normal: Vec<_> = scenario.classes().iter().filter(|c| !c.is_special()).collect();
    if !normal.is_empty() {
        if residual < normal.len() as u64 {
            return Err(AllocError::ResidualOverload { residual, normal_classes: normal.len() });
        }
        let weights: Vec<T> = normal.iter().map(|c| c.ra_density()).collect();
        for (c, share) in normal.iter().zip(apportion(&weights, residual)?) {
            plan.insert(c.id(), share);
        }
    }

    let diagnostics = analytics::full_dedication_rates(scenario, &plan)?;
    Ok(AllocationOutcome { plan, reserved, residual, diagnostics })
}

/// What [`brute_force_optimal`] minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    /// `Σ γ_i (1 - e^{-γ_i/L_i})`.
    CollisionDensity,
    /// `Σ γ_i²/L_i`, the exponent of the cell collision probability.
    CellCollisionExponent,
}

impl Objective {
    fn evaluate<T: Scalar>(self, densities: &[T], shares: &[u64]) -> T {
        densities.iter().zip(shares).fold(T::zero(), |acc, (g, l)| {
            let l = T::from_u64_lossy(*l);
            acc + match self {
                Objective::CollisionDensity => *g * -(-*g / l).exp_m1(),
                Objective::CellCollisionExponent => *g * *g / l,
            }
        })
    }
}

fn binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return u128::MAX;
        }
    }
    acc
}

/// Exhaustive search over every dedicated plan that uses all RAOs, minimizing the
/// collision density. Ties keep the lexicographically smallest plan.
pub fn brute_force_optimal<T: Scalar>(scenario: &Scenario<T>) -> Result<AllocationPlan, AllocError> {
    brute_force_optimal_by(scenario, Objective::CollisionDensity, DEFAULT_ENUMERATION_BUDGET)
}

pub fn brute_force_optimal_by<T: Scalar>(
    scenario: &Scenario<T>,
    objective: Objective,
    budget: u64,
) -> Result<AllocationPlan, AllocError> {
    let n = scenario.len();
    let total = scenario.total_raos();
    if n == 0 || total < n as u64 {
        return Err(AllocError::InsufficientResources { raos: total, classes: n });
    }
    let candidates = binomial(total - 1, n as u64 - 1);
    if candidates > u128::from(budget) {
        return Err(AllocError::BudgetExceeded { candidates, budget });
    }
    let densities: Vec<T> = scenario.classes().iter().map(|c| c.ra_density()).collect();

    let mut shares = vec![1u64; n];
    let mut best: Option<(T, Vec<u64>)> = None;
    enumerate(&mut shares, 0, total, &mut |s| {
        let v = objective.evaluate(&densities, s);
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, s.to_vec()));
        }
    });
    let (_, shares) = best.expect("at least one plan exists");
    Ok(AllocationPlan::from_pairs(scenario.classes().iter().map(|c| c.id()).zip(shares)))
}

// Visits compositions of `remaining` into shares[pos..] (each ≥ 1) in
// lexicographic order.
fn enumerate(shares: &mut [u64], pos: usize, remaining: u64, visit: &mut impl FnMut(&[u64])) {
    let n = shares.len();
    if pos == n - 1 {
        shares[pos] = remaining;
        visit(shares);
        return;
    }
    let later = (n - pos - 1) as u64;
    for l in 1..=remaining - later {
        shares[pos] = l;
        enumerate(shares, pos + 1, remaining - l, visit);
    }
}
