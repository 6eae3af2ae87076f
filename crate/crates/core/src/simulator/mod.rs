//! Seeded Monte-Carlo simulation of slotted random access.
//!
//! Each simulated second is one frame of `L` RAO slots. A class draws its
//! request count for the frame, and every request picks a slot uniformly from
//! the slots the class may use. Every request in a slot holding two or more
//! requests collides.
//!
//! Randomness is drawn from one ChaCha stream per (iteration, class), keyed by
//! the master seed, so results do not depend on how iterations are scheduled
//! across worker threads. Slots are chosen as `floor(u · n)` from a single
//! uniform draw, which keeps streams aligned when only the slot counts change
//! (sweeps reuse the same random numbers at every point).

mod engine;
mod stats;
mod sweep;

use serde::Serialize;
use thiserror::Error;

use crate::model::{AllocationPlan, ClassId, ModelError, Scenario, SharingTopology, Strategy};
use crate::scalar::Scalar;

pub use stats::{CellStats, ClassStats, DelayStats, Estimate, SimStats};
pub use sweep::{sweep_dedication, SweepRow, SweepTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArrivalMode {
    /// Poisson request counts with mean `γ_i` per frame.
    PoissonAggregate,
    /// Each group coordinator attempts with probability `per_device_rate` per frame.
    PerDeviceBernoulli,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimConfig {
    pub iterations: u64,
    pub seed: u64,
    /// Simulated seconds (frames) per iteration.
    pub horizon_s: u32,
    pub arrival_mode: ArrivalMode,
    pub measure_delay: bool,
    /// Attempts after which an unresolved request is censored.
    pub max_attempts: u32,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            seed: 0,
            horizon_s: 1,
            arrival_mode: ArrivalMode::PoissonAggregate,
            measure_delay: false,
            max_attempts: 64,
            workers: None,
        }
    }
}

impl SimConfig {
    pub fn new(iterations: u64, seed: u64) -> Self {
        Self { iterations, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.iterations == 0 {
            return Err(SimError::InvalidConfig("iterations must be at least 1".into()));
        }
        if self.horizon_s == 0 {
            return Err(SimError::InvalidConfig("horizon must be at least one second".into()));
        }
        if self.max_attempts == 0 {
            return Err(SimError::InvalidConfig("max_attempts must be at least 1".into()));
        }
        if self.workers == Some(0) {
            return Err(SimError::InvalidConfig("workers must be at least 1".into()));
        }
        Ok(())
    }
}

/// How RAOs are exposed to the classes during a run.
#[derive(Clone, Copy, Debug)]
pub enum Layout<'a> {
    FullSharing,
    Dedicated(&'a AllocationPlan),
    Partial(&'a SharingTopology),
}

impl Layout<'_> {
    pub fn strategy(&self) -> Strategy {
        match self {
            Layout::FullSharing => Strategy::FullSharing,
            Layout::Dedicated(_) => Strategy::FullDedication,
            Layout::Partial(_) => Strategy::PartialDedication,
        }
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("class {0} has no population data, required for per-device arrivals")]
    MissingPopulation(ClassId),
    #[error("class {class_id}: per-frame attempt probability {probability} exceeds 1")]
    RateTooHigh { class_id: ClassId, probability: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Layout(#[from] ModelError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Simulates the scenario under the given layout and returns per-class and
/// cell statistics. With `measure_delay` set the layout must be dedicated and
/// the run is delegated to [`run_delay`].
pub fn run<T: Scalar>(scenario: &Scenario<T>, layout: Layout<'_>, config: &SimConfig) -> Result<SimStats, SimError> {
    config.validate()?;
    if config.measure_delay {
        return match layout {
            Layout::Dedicated(plan) => run_delay(scenario, plan, config),
            _ => Err(SimError::Unsupported("delay measurement requires full dedication".into())),
        };
    }
    let setup = engine::Setup::new(scenario, layout, config)?;
    with_pool(config, || engine::run_slotted(&setup, config))
}

/// Simulates retries with each class's backoff under full dedication and
/// measures the mean access delay.
///
/// Each class's RA density counts all attempts, retries included: fresh
/// requests arrive at `γ_i e^{-γ_i/L_i}` per second so that, once retries
/// build up, the channel carries `γ_i` attempts per second. A collided request
/// reattempts in the first frame that starts after its backoff has elapsed.
/// Only requests first sent after a warm-up and within the horizon are
/// tracked; traffic keeps flowing until all of them resolve or are censored.
pub fn run_delay<T: Scalar>(scenario: &Scenario<T>, plan: &AllocationPlan, config: &SimConfig) -> Result<SimStats, SimError> {
    config.validate()?;
    let setup = engine::Setup::new(scenario, Layout::Dedicated(plan), config)?;
    with_pool(config, || engine::run_retries(&setup, config))
}

/// Runs with the scenario's own strategy and its declared plan or topology.
/// Full dedication without `dedicated_raos` falls back to the proportional plan.
pub fn run_declared<T: Scalar>(scenario: &Scenario<T>, config: &SimConfig) -> Result<SimStats, SimError> {
    match scenario.strategy() {
        Strategy::FullSharing => run(scenario, Layout::FullSharing, config),
        Strategy::FullDedication => {
            let plan = match scenario.declared_plan() {
                Some(plan) => plan,
                None => crate::allocator::proportional_allocation(scenario)
                    .map_err(|e| SimError::Unsupported(e.to_string()))?,
            };
            run(scenario, Layout::Dedicated(&plan), config)
        }
        Strategy::PartialDedication => {
            let topo = scenario
                .declared_topology()
                .ok_or_else(|| SimError::Unsupported("partial dedication needs usable_raos on every class".into()))??;
            run(scenario, Layout::Partial(&topo), config)
        }
    }
}

fn with_pool<R: Send>(config: &SimConfig, f: impl FnOnce() -> R + Send) -> Result<R, SimError> {
    match config.workers {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SimError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
