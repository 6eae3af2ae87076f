//! Random-access channel (RACH) resource dedication for grouped random access.
//!
//! Device classes generate RA requests that compete for a fixed budget of
//! random-access opportunities (RAOs) per second. This crate provides:
//!
//! - [`model`]: device classes, scenarios and their TOML file format;
//! - [`analytics`]: closed-form collision rates, densities and delays under
//!   full sharing, full dedication and partial dedication;
//! - [`allocator`]: the proportional optimum, QoS reservations and
//!   Reserve-and-Divide, plus an exhaustive search to check them;
//! - [`simulator`]: a seeded Monte-Carlo slotted random-access engine.
//!
//! The closed-form code is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below fix it to `f64`, which is what the CLI uses.

pub mod allocator;
pub mod analytics;
pub mod model;
mod scalar;
pub mod simulator;

pub use scalar::Scalar;

pub use model::{AllocationPlan, ClassId, QosTarget as GenericQosTarget, RaoRange, SharingTopology, Strategy};

pub type DeviceClass = model::DeviceClass<f64>;
pub type ClassRecord = model::ClassRecord<f64>;
pub type QosTarget = model::QosTarget<f64>;
pub type Scenario = model::Scenario<f64>;
pub type ScenarioConfig = model::ScenarioConfig<f64>;
pub type ClassMetrics = analytics::ClassMetrics<f64>;
pub type CellMetrics = analytics::CellMetrics<f64>;
pub type DelayEstimate = analytics::DelayEstimate<f64>;
pub type AllocationOutcome = allocator::AllocationOutcome<f64>;

pub type Scenario32 = model::Scenario<f32>;
pub type ClassMetrics32 = analytics::ClassMetrics<f32>;
