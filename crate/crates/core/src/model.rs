//! Device classes, scenarios, and the two ways RAOs can be handed out to
//! classes: a dedicated [`AllocationPlan`] or a [`SharingTopology`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{rel_close, Scalar};

pub type ClassId = u32;

/// Relative slack tolerated between a stated `ra_density` and the one derived
/// from `population`, `per_device_rate` and `group_size`.
pub const DENSITY_AGREEMENT_REL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    FullSharing,
    FullDedication,
    PartialDedication,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::FullSharing => "full_sharing",
            Strategy::FullDedication => "full_dedication",
            Strategy::PartialDedication => "partial_dedication",
        })
    }
}

/// Per-class QoS bound. Written in scenario files as
/// `qos = { max_collision_rate = 0.02 }` or `qos = { max_mean_delay = 1.5 }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum QosTarget<T> {
    /// Upper bound on the per-attempt collision probability, in (0, 1).
    MaxCollisionRate(T),
    /// Upper bound on the mean inclusive access delay, seconds; must exceed the backoff.
    MaxMeanDelay(T),
}

impl<T: Scalar> QosTarget<T> {
    /// Collision-rate bound equivalent to this target for a class with the given
    /// backoff. A delay bound `D` maps to `1 - T/D`.
    pub fn collision_rate_bound(&self, backoff: T) -> T {
        match *self {
            QosTarget::MaxCollisionRate(p) => p,
            QosTarget::MaxMeanDelay(d) => T::one() - backoff / d,
        }
    }
}

/// Half-open range of RAO indices `[start, end)`; serialized as `[start, end]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(u32, u32)", into = "(u32, u32)")]
pub struct RaoRange {
    pub start: u32,
    pub end: u32,
}

impl RaoRange {
    pub fn new(start: u32, end: u32) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> u32 {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl From<(u32, u32)> for RaoRange {
    fn from((start, end): (u32, u32)) -> Self {
        Self { start, end }
    }
}

impl From<RaoRange> for (u32, u32) {
    fn from(r: RaoRange) -> Self {
        (r.start, r.end)
    }
}

fn default_group_size() -> u64 {
    1
}

fn is_one(v: &u64) -> bool {
    *v == 1
}

fn is_false(v: &bool) -> bool {
    !*v
}

/// One `[[classes]]` record of a scenario file, before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Deserialize<'de>"))]
pub struct ClassRecord<T> {
    pub id: ClassId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<u64>,
    /// Mean RA attempts per device per second.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_device_rate: Option<T>,
    #[serde(default = "default_group_size", skip_serializing_if = "is_one")]
    pub group_size: u64,
    /// Aggregate RA requests per second.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ra_density: Option<T>,
    /// Wait before a reattempt after a collision, seconds.
    pub backoff_s: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qos: Option<QosTarget<T>>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub special: bool,
    /// Fixed dedicated RAO count, used when no plan is given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dedicated_raos: Option<u64>,
    /// Usable RAO index ranges for partial dedication.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usable_raos: Option<Vec<RaoRange>>,
}

impl<T: Scalar> ClassRecord<T> {
    /// Record with a directly stated RA density.
    pub fn with_density(id: ClassId, ra_density: T, backoff_s: T) -> Self {
        Self {
            id,
            population: None,
            per_device_rate: None,
            group_size: 1,
            ra_density: Some(ra_density),
            backoff_s,
            qos: None,
            special: false,
            dedicated_raos: None,
            usable_raos: None,
        }
    }

    /// Record whose density is derived from its device population.
    pub fn with_population(
        id: ClassId,
        population: u64,
        per_device_rate: T,
        group_size: u64,
        backoff_s: T,
    ) -> Self {
        Self {
            id,
            population: Some(population),
            per_device_rate: Some(per_device_rate),
            group_size,
            ra_density: None,
            backoff_s,
            qos: None,
            special: false,
            dedicated_raos: None,
            usable_raos: None,
        }
    }

    pub fn special(mut self, qos: QosTarget<T>) -> Self {
        self.special = true;
        self.qos = Some(qos);
        self
    }

    pub fn dedicated(mut self, raos: u64) -> Self {
        self.dedicated_raos = Some(raos);
        self
    }

    pub fn usable(mut self, ranges: Vec<RaoRange>) -> Self {
        self.usable_raos = Some(ranges);
        self
    }
}

/// Scenario file contents, before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound(deserialize = "T: Deserialize<'de>"))]
pub struct ScenarioConfig<T> {
    /// RAOs available per second.
    pub total_raos: u64,
    pub strategy: Strategy,
    pub classes: Vec<ClassRecord<T>>,
}

/// A single violated invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub class_id: Option<ClassId>,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.class_id {
            Some(id) => write!(f, "class {id}: `{}` {}", self.field, self.message),
            None => write!(f, "`{}` {}", self.field, self.message),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ValidationError {
    pub issues: Vec<Issue>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario")?;
        for issue in &self.issues {
            write!(f, "\n  - {issue}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("scenario parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("scenario serialization error: {0}")]
    Serialize(#[from] toml::ser::Error),
    #[error("invalid allocation plan: {0}")]
    Plan(String),
    #[error("invalid sharing topology: {0}")]
    Topology(String),
    #[error("unknown class id {0}")]
    UnknownClass(ClassId),
    #[error("invalid input: {0}")]
    Input(String),
}

/// RA request density of a grouped population: one coordinator per group
/// (a partial final group still needs one) times the per-device attempt rate.
pub fn derive_ra_density<T: Scalar>(
    population: u64,
    per_device_rate: T,
    group_size: u64,
) -> Result<T, ModelError> {
    if population == 0 {
        return Err(ModelError::Input("population must be at least 1".into()));
    }
    if group_size == 0 {
        return Err(ModelError::Input("group_size must be at least 1".into()));
    }
    if !(per_device_rate.is_finite() && per_device_rate > T::zero()) {
        return Err(ModelError::Input("per_device_rate must be positive and finite".into()));
    }
    let coordinators = population.div_ceil(group_size);
    Ok(T::from_u64_lossy(coordinators) * per_device_rate)
}

/// A validated device class.
#[derive(Clone, Debug, PartialEq)]
pub struct DeviceClass<T> {
    id: ClassId,
    population: Option<u64>,
    per_device_rate: Option<T>,
    group_size: u64,
    ra_density: T,
    backoff: T,
    qos: Option<QosTarget<T>>,
    special: bool,
    dedicated_raos: Option<u64>,
    usable_raos: Option<Vec<RaoRange>>,
}

impl<T: Scalar> DeviceClass<T> {
    pub fn id(&self) -> ClassId {
        self.id
    }
    pub fn population(&self) -> Option<u64> {
        self.population
    }
    pub fn per_device_rate(&self) -> Option<T> {
        self.per_device_rate
    }
    pub fn group_size(&self) -> u64 {
        self.group_size
    }
    /// Number of devices that actually perform RA (group coordinators).
    pub fn accessors(&self) -> Option<u64> {
        self.population.map(|p| p.div_ceil(self.group_size))
    }
    pub fn ra_density(&self) -> T {
        self.ra_density
    }
    pub fn backoff(&self) -> T {
        self.backoff
    }
    pub fn qos(&self) -> Option<&QosTarget<T>> {
        self.qos.as_ref()
    }
    pub fn is_special(&self) -> bool {
        self.special
    }
    pub fn dedicated_raos(&self) -> Option<u64> {
        self.dedicated_raos
    }
    pub fn usable_raos(&self) -> Option<&[RaoRange]> {
        self.usable_raos.as_deref()
    }

    fn to_record(&self) -> ClassRecord<T> {
        ClassRecord {
            id: self.id,
            population: self.population,
            per_device_rate: self.per_device_rate,
            group_size: self.group_size,
            ra_density: Some(self.ra_density),
            backoff_s: self.backoff,
            qos: self.qos,
            special: self.special,
            dedicated_raos: self.dedicated_raos,
            usable_raos: self.usable_raos.clone(),
        }
    }
}

/// A validated scenario. Special classes come first (stable with respect to
/// file order); [`Scenario::file_order`] keeps the order they were written in.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario<T> {
    classes: Vec<DeviceClass<T>>,
    file_order: Vec<ClassId>,
    total_raos: u64,
    strategy: Strategy,
}

fn positive_finite<T: Scalar>(v: T) -> bool {
    v.is_finite() && v > T::zero()
}

fn validate_record<T: Scalar>(
    rec: &ClassRecord<T>,
    total_raos: u64,
    strategy: Strategy,
    issues: &mut Vec<Issue>,
) -> Option<DeviceClass<T>> {
    let start = issues.len();
    let mut issue = |field: &'static str, message: String| {
        issues.push(Issue { class_id: Some(rec.id), field, message });
    };

    if rec.group_size == 0 {
        issue("group_size", "must be at least 1".into());
    }
    if rec.population == Some(0) {
        issue("population", "must be at least 1".into());
    }
    if let Some(rate) = rec.per_device_rate {
        if !positive_finite(rate) {
            issue("per_device_rate", format!("must be positive and finite, got {rate}"));
        }
    }
    match (rec.population, rec.per_device_rate) {
        (Some(_), None) => issue("per_device_rate", "required when population is given".into()),
        (None, Some(_)) => issue("population", "required when per_device_rate is given".into()),
        _ => {}
    }
    if let Some(g) = rec.ra_density {
        if !positive_finite(g) {
            issue("ra_density", format!("must be positive and finite, got {g}"));
        }
    }
    if !positive_finite(rec.backoff_s) {
        issue("backoff_s", format!("must be positive and finite, got {}", rec.backoff_s));
    }

    let derived = match (rec.population, rec.per_device_rate) {
        (Some(p), Some(r)) if p > 0 && rec.group_size > 0 && positive_finite(r) => {
            derive_ra_density(p, r, rec.group_size).ok()
        }
        _ => None,
    };
    let ra_density = match (rec.ra_density, derived) {
        (Some(given), Some(d)) => {
            if positive_finite(given) && !rel_close(given, d, T::lit(DENSITY_AGREEMENT_REL)) {
                issue(
                    "ra_density",
                    format!("{given} disagrees with population-derived density {d}"),
                );
            }
            given
        }
        (Some(given), None) => given,
        (None, Some(d)) => d,
        (None, None) => {
            if rec.population.is_none() {
                issue("ra_density", "missing: give ra_density or population + per_device_rate".into());
            }
            T::zero()
        }
    };

    match rec.qos {
        Some(QosTarget::MaxCollisionRate(p)) => {
            if !(p > T::zero() && p < T::one()) {
                issue("qos.max_collision_rate", format!("must lie in (0, 1), got {p}"));
            }
        }
        Some(QosTarget::MaxMeanDelay(d)) => {
            if !(d.is_finite() && d > rec.backoff_s) {
                issue(
                    "qos.max_mean_delay",
                    format!("must exceed backoff_s = {}, got {d}", rec.backoff_s),
                );
            }
        }
        None => {
            if rec.special {
                issue("qos", "required for special classes".into());
            }
        }
    }

    if rec.dedicated_raos == Some(0) {
        issue("dedicated_raos", "must be at least 1".into());
    }
    match &rec.usable_raos {
        Some(ranges) => {
            if ranges.iter().all(RaoRange::is_empty) {
                issue("usable_raos", "must contain at least one RAO".into());
            }
            for r in ranges {
                if r.start > r.end || u64::from(r.end) > total_raos {
                    issue(
                        "usable_raos",
                        format!("range [{}, {}) outside [0, {total_raos})", r.start, r.end),
                    );
                }
            }
        }
        None => {
            if strategy == Strategy::PartialDedication {
                issue("usable_raos", "required under partial_dedication".into());
            }
        }
    }

    (issues.len() == start).then(|| DeviceClass {
        id: rec.id,
        population: rec.population,
        per_device_rate: rec.per_device_rate,
        group_size: rec.group_size,
        ra_density,
        backoff: rec.backoff_s,
        qos: rec.qos,
        special: rec.special,
        dedicated_raos: rec.dedicated_raos,
        usable_raos: rec.usable_raos.clone(),
    })
}

/// Checks every scenario invariant and returns the validated scenario, or all
/// violations at once.
pub fn validate_scenario<T: Scalar>(config: &ScenarioConfig<T>) -> Result<Scenario<T>, ValidationError> {
    let mut issues = Vec::new();
    if config.classes.is_empty() {
        issues.push(Issue { class_id: None, field: "classes", message: "at least one class is required".into() });
    }
    if config.total_raos == 0 {
        issues.push(Issue { class_id: None, field: "total_raos", message: "must be at least 1".into() });
    }
    if config.total_raos > u64::from(u32::MAX) {
        issues.push(Issue { class_id: None, field: "total_raos", message: format!("must not exceed {}", u32::MAX) });
    }
    let mut seen = BTreeSet::new();
    for rec in &config.classes {
        if !seen.insert(rec.id) {
            issues.push(Issue { class_id: Some(rec.id), field: "id", message: "duplicate class id".into() });
        }
    }
    let n = config.classes.len() as u64;
    if config.strategy == Strategy::FullDedication && config.total_raos < n {
        issues.push(Issue {
            class_id: None,
            field: "total_raos",
            message: format!("insufficient RAOs: {} for {n} dedicated classes", config.total_raos),
        });
    }

    let mut classes: Vec<DeviceClass<T>> = config
        .classes
        .iter()
        .filter_map(|rec| validate_record(rec, config.total_raos, config.strategy, &mut issues))
        .collect();

    if config.strategy == Strategy::FullDedication {
        let dedicated: Vec<u64> = config.classes.iter().filter_map(|c| c.dedicated_raos).collect();
        let sum: u64 = dedicated.iter().sum();
        if !dedicated.is_empty() && sum > config.total_raos {
            issues.push(Issue {
                class_id: None,
                field: "dedicated_raos",
                message: format!("sum {sum} exceeds total_raos {}", config.total_raos),
            });
        }
    }

    if !issues.is_empty() {
        return Err(ValidationError { issues });
    }
    let file_order = classes.iter().map(|c| c.id).collect();
    classes.sort_by_key(|c| !c.special);
    Ok(Scenario { classes, file_order, total_raos: config.total_raos, strategy: config.strategy })
}

impl<T: Scalar> Scenario<T> {
    pub fn from_config(config: &ScenarioConfig<T>) -> Result<Self, ValidationError> {
        validate_scenario(config)
    }

    pub fn parse_toml(text: &str) -> Result<Self, ModelError>
    where
        T: for<'de> Deserialize<'de>,
    {
        let config: ScenarioConfig<T> = toml::from_str(text)?;
        Ok(Self::from_config(&config)?)
    }

    pub fn to_toml(&self) -> Result<String, ModelError>
    where
        T: Serialize,
    {
        Ok(toml::to_string(&self.to_config())?)
    }

    /// Configuration that validates back to this scenario, classes in file order.
    pub fn to_config(&self) -> ScenarioConfig<T> {
        let classes = self
            .file_order
            .iter()
            .map(|id| self.class(*id).expect("file order lists known classes").to_record())
            .collect();
        ScenarioConfig { total_raos: self.total_raos, strategy: self.strategy, classes }
    }

    /// Classes in processing order: special classes first.
    pub fn classes(&self) -> &[DeviceClass<T>] {
        &self.classes
    }

    pub fn class(&self, id: ClassId) -> Option<&DeviceClass<T>> {
        self.classes.iter().find(|c| c.id == id)
    }

    pub fn index_of(&self, id: ClassId) -> Option<usize> {
        self.classes.iter().position(|c| c.id == id)
    }

    pub fn file_order(&self) -> &[ClassId] {
        &self.file_order
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn total_raos(&self) -> u64 {
        self.total_raos
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn special_count(&self) -> usize {
        self.classes.iter().filter(|c| c.special).count()
    }

    pub fn total_density(&self) -> T {
        self.classes.iter().fold(T::zero(), |acc, c| acc + c.ra_density)
    }

    pub fn has_qos(&self) -> bool {
        self.classes.iter().any(|c| c.qos.is_some())
    }

    /// Same classes under another strategy, revalidated.
    pub fn with_strategy(&self, strategy: Strategy) -> Result<Self, ValidationError> {
        let mut config = self.to_config();
        config.strategy = strategy;
        validate_scenario(&config)
    }

    /// Copy with one class's RA density replaced (its population data dropped).
    pub fn with_ra_density(&self, id: ClassId, ra_density: T) -> Result<Self, ModelError> {
        let mut config = self.to_config();
        let rec = config
            .classes
            .iter_mut()
            .find(|c| c.id == id)
            .ok_or(ModelError::UnknownClass(id))?;
        rec.ra_density = Some(ra_density);
        rec.population = None;
        rec.per_device_rate = None;
        Ok(validate_scenario(&config)?)
    }

    /// Plan assembled from the classes' `dedicated_raos`, if every class has one.
    pub fn declared_plan(&self) -> Option<AllocationPlan> {
        self.classes
            .iter()
            .map(|c| c.dedicated_raos.map(|l| (c.id, l)))
            .collect::<Option<BTreeMap<_, _>>>()
            .map(|raos| AllocationPlan { raos })
    }

    /// Topology assembled from the classes' `usable_raos`, if every class has them.
    pub fn declared_topology(&self) -> Option<Result<SharingTopology, ModelError>> {
        let sets = self
            .classes
            .iter()
            .map(|c| c.usable_raos.as_ref().map(|r| (c.id, r.clone())))
            .collect::<Option<Vec<_>>>()?;
        Some(SharingTopology::from_ranges(self.total_raos, sets))
    }
}

/// Dedicated RAOs per second for each class.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AllocationPlan {
    raos: BTreeMap<ClassId, u64>,
}

impl AllocationPlan {
    pub fn from_pairs<I: IntoIterator<Item = (ClassId, u64)>>(pairs: I) -> Self {
        Self { raos: pairs.into_iter().collect() }
    }

    /// Plan that lists counts in the scenario's processing order.
    pub fn for_scenario<T: Scalar>(scenario: &Scenario<T>, counts: &[u64]) -> Result<Self, ModelError> {
        if counts.len() != scenario.len() {
            return Err(ModelError::Plan(format!(
                "{} counts given for {} classes",
                counts.len(),
                scenario.len()
            )));
        }
        let plan = Self::from_pairs(scenario.classes().iter().map(|c| c.id()).zip(counts.iter().copied()));
        plan.check(scenario)?;
        Ok(plan)
    }

    pub fn get(&self, id: ClassId) -> Option<u64> {
        self.raos.get(&id).copied()
    }

    pub fn insert(&mut self, id: ClassId, raos: u64) {
        self.raos.insert(id, raos);
    }

    pub fn total(&self) -> u64 {
        self.raos.values().sum()
    }

    pub fn len(&self) -> usize {
        self.raos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raos.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassId, u64)> + '_ {
        self.raos.iter().map(|(k, v)| (*k, *v))
    }

    /// Counts in the scenario's processing order.
    pub fn counts_for<T: Scalar>(&self, scenario: &Scenario<T>) -> Result<Vec<u64>, ModelError> {
        scenario
            .classes()
            .iter()
            .map(|c| self.get(c.id()).ok_or_else(|| ModelError::Plan(format!("class {} missing", c.id()))))
            .collect()
    }

    /// Plan covers exactly the scenario's classes, every count is at least one,
    /// and the total fits the RAO budget.
    pub fn check<T: Scalar>(&self, scenario: &Scenario<T>) -> Result<(), ModelError> {
        for c in scenario.classes() {
            match self.get(c.id()) {
                None => return Err(ModelError::Plan(format!("class {} missing", c.id()))),
                Some(0) => return Err(ModelError::Plan(format!("class {} has zero RAOs", c.id()))),
                Some(_) => {}
            }
        }
        if let Some(extra) = self.raos.keys().find(|id| scenario.class(**id).is_none()) {
            return Err(ModelError::Plan(format!("class {extra} is not in the scenario")));
        }
        if self.total() > scenario.total_raos() {
            return Err(ModelError::Plan(format!(
                "{} RAOs allocated but only {} available",
                self.total(),
                scenario.total_raos()
            )));
        }
        Ok(())
    }
}

/// Usable-RAO sets per class (`B_i`) and, derived from them, the sharer set of
/// every RAO (`A_l`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharingTopology {
    total_raos: u32,
    usable: Vec<(ClassId, Vec<u32>)>,
    sharers: Vec<Vec<ClassId>>,
}

impl SharingTopology {
    pub fn new(total_raos: u64, usable: Vec<(ClassId, Vec<u32>)>) -> Result<Self, ModelError> {
        let total = u32::try_from(total_raos)
            .map_err(|_| ModelError::Topology(format!("total_raos {total_raos} too large")))?;
        let mut seen = BTreeSet::new();
        let mut sets = Vec::with_capacity(usable.len());
        for (id, mut set) in usable {
            if !seen.insert(id) {
                return Err(ModelError::Topology(format!("class {id} listed twice")));
            }
            set.sort_unstable();
            set.dedup();
            if set.is_empty() {
                return Err(ModelError::Topology(format!("class {id} has no usable RAO")));
            }
            if let Some(&bad) = set.iter().find(|&&l| l >= total) {
                return Err(ModelError::Topology(format!("class {id}: RAO {bad} outside [0, {total})")));
            }
            sets.push((id, set));
        }
        let mut sharers = vec![Vec::new(); total as usize];
        for (id, set) in &sets {
            for &l in set {
                sharers[l as usize].push(*id);
            }
        }
        let topo = Self { total_raos: total, usable: sets, sharers };
        topo.check_consistency()?;
        Ok(topo)
    }

    pub fn from_ranges(total_raos: u64, ranges: Vec<(ClassId, Vec<RaoRange>)>) -> Result<Self, ModelError> {
        let sets = ranges
            .into_iter()
            .map(|(id, rs)| (id, rs.iter().flat_map(|r| r.start..r.end).collect()))
            .collect();
        Self::new(total_raos, sets)
    }

    /// Every class may use every RAO.
    pub fn fully_shared<T: Scalar>(scenario: &Scenario<T>) -> Result<Self, ModelError> {
        let total = u32::try_from(scenario.total_raos())
            .map_err(|_| ModelError::Topology("total_raos too large".into()))?;
        Self::new(
            scenario.total_raos(),
            scenario.classes().iter().map(|c| (c.id(), (0..total).collect())).collect(),
        )
    }

    /// Disjoint contiguous blocks matching a dedicated plan, in processing order.
    pub fn disjoint_from_plan<T: Scalar>(scenario: &Scenario<T>, plan: &AllocationPlan) -> Result<Self, ModelError> {
        plan.check(scenario)?;
        let mut next = 0u32;
        let mut sets = Vec::with_capacity(scenario.len());
        for c in scenario.classes() {
            let n = plan.get(c.id()).expect("checked") as u32;
            sets.push((c.id(), (next..next + n).collect()));
            next += n;
        }
        Self::new(scenario.total_raos(), sets)
    }

    pub fn total_raos(&self) -> u64 {
        u64::from(self.total_raos)
    }

    pub fn usable(&self, id: ClassId) -> Option<&[u32]> {
        self.usable.iter().find(|(c, _)| *c == id).map(|(_, s)| s.as_slice())
    }

    pub fn usable_sets(&self) -> &[(ClassId, Vec<u32>)] {
        &self.usable
    }

    /// Classes allowed to use RAO `l`.
    pub fn sharers(&self, l: u32) -> &[ClassId] {
        &self.sharers[l as usize]
    }

    /// `i ∈ A_l ⇔ l ∈ B_i`, checked in both directions.
    pub fn check_consistency(&self) -> Result<(), ModelError> {
        for (id, set) in &self.usable {
            if set.is_empty() {
                return Err(ModelError::Topology(format!("class {id} has no usable RAO")));
            }
            for &l in set {
                if !self.sharers.get(l as usize).is_some_and(|s| s.contains(id)) {
                    return Err(ModelError::Topology(format!("RAO {l} does not list class {id}")));
                }
            }
        }
        for (l, ids) in self.sharers.iter().enumerate() {
            for id in ids {
                let ok = self.usable(*id).is_some_and(|s| s.binary_search(&(l as u32)).is_ok());
                if !ok {
                    return Err(ModelError::Topology(format!("class {id} does not list RAO {l}")));
                }
            }
        }
        Ok(())
    }

    /// Check the topology names exactly the scenario's classes and its RAO budget.
    pub fn check<T: Scalar>(&self, scenario: &Scenario<T>) -> Result<(), ModelError> {
        if self.total_raos() != scenario.total_raos() {
            return Err(ModelError::Topology(format!(
                "topology spans {} RAOs, scenario has {}",
                self.total_raos,
                scenario.total_raos()
            )));
        }
        for c in scenario.classes() {
            if self.usable(c.id()).is_none() {
                return Err(ModelError::Topology(format!("class {} has no usable set", c.id())));
            }
        }
        if self.usable.len() != scenario.len() {
            return Err(ModelError::Topology("topology lists classes outside the scenario".into()));
        }
        Ok(())
    }
}
