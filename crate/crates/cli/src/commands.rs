use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use rach_core::allocator::{self, brute_force_optimal, proportional_allocation, reserve_and_divide};
use rach_core::analytics::{cell_metrics, full_dedication_rates, full_sharing_metrics, partial_dedication_rates};
use rach_core::simulator::{self, sweep_dedication, ArrivalMode, Layout, SimConfig, SimStats};
use rach_core::{AllocationPlan, CellMetrics, ClassMetrics, Scenario, SharingTopology, Strategy};

use crate::error::CliError;
use crate::input::{load_scenario, parse_plan};
use crate::output::{self, fixed, Evaluated, CLASS_HEADER, SWEEP_HEADER};
use crate::report::RunReport;

/// A layout with everything needed to evaluate and simulate it.
#[derive(Clone, Debug)]
enum Resolved {
    Sharing,
    Dedicated { plan: AllocationPlan, source: &'static str },
    Partial(SharingTopology),
}

impl Resolved {
    fn from_scenario(scenario: &Scenario, plan: Option<&str>) -> Result<Self, CliError> {
        if let Some(spec) = plan {
            return Ok(Resolved::Dedicated { plan: parse_plan(spec, scenario)?, source: "command line" });
        }
        Ok(match scenario.strategy() {
            Strategy::FullSharing => Resolved::Sharing,
            Strategy::FullDedication => match scenario.declared_plan() {
                Some(plan) => {
                    plan.check(scenario)?;
                    Resolved::Dedicated { plan, source: "scenario file" }
                }
                None if scenario.special_count() > 0 => {
                    Resolved::Dedicated { plan: reserve_and_divide(scenario)?.plan, source: "reserve-and-divide" }
                }
                None => Resolved::Dedicated { plan: proportional_allocation(scenario)?, source: "proportional" },
            },
            Strategy::PartialDedication => Resolved::Partial(
                scenario
                    .declared_topology()
                    .ok_or_else(|| CliError::Validation("partial dedication needs usable_raos on every class".into()))??,
            ),
        })
    }

    fn strategy(&self) -> Strategy {
        self.layout().strategy()
    }

    fn source(&self) -> &'static str {
        match self {
            Resolved::Sharing => "scenario file",
            Resolved::Dedicated { source, .. } => source,
            Resolved::Partial(_) => "scenario file",
        }
    }

    fn layout(&self) -> Layout<'_> {
        match self {
            Resolved::Sharing => Layout::FullSharing,
            Resolved::Dedicated { plan, .. } => Layout::Dedicated(plan),
            Resolved::Partial(topo) => Layout::Partial(topo),
        }
    }

    /// RAOs each class can use, in processing order.
    fn raos(&self, scenario: &Scenario) -> Vec<u64> {
        scenario
            .classes()
            .iter()
            .map(|c| match self {
                Resolved::Sharing => scenario.total_raos(),
                Resolved::Dedicated { plan, .. } => plan.get(c.id()).unwrap_or(0),
                Resolved::Partial(topo) => topo.usable(c.id()).map_or(0, |s| s.len() as u64),
            })
            .collect()
    }

    fn analytic(&self, scenario: &Scenario) -> Result<Vec<ClassMetrics>, CliError> {
        Ok(match self {
            Resolved::Sharing => full_sharing_metrics(scenario)?,
            Resolved::Dedicated { plan, .. } => full_dedication_rates(scenario, plan)?,
            Resolved::Partial(topo) => partial_dedication_rates(scenario, topo)?,
        })
    }
}

#[derive(Serialize)]
struct ClassLine {
    class_id: u32,
    raos: u64,
    #[serde(flatten)]
    metrics: ClassMetrics,
    exclusive_delay: f64,
}

fn class_lines(scenario: &Scenario, raos: &[u64], metrics: &[ClassMetrics]) -> Vec<ClassLine> {
    scenario
        .classes()
        .iter()
        .zip(raos)
        .zip(metrics)
        .map(|((c, l), m)| ClassLine {
            class_id: c.id(),
            raos: *l,
            metrics: *m,
            exclusive_delay: m.mean_delay - c.backoff(),
        })
        .collect()
}

fn analytic_table(lines: &[ClassLine], cell: &CellMetrics) -> String {
    let rows: Vec<Vec<String>> = lines
        .iter()
        .map(|l| {
            vec![
                l.class_id.to_string(),
                l.raos.to_string(),
                fixed(l.metrics.ra_density),
                fixed(l.metrics.collision_rate),
                fixed(l.metrics.collision_density),
                fixed(l.metrics.mean_delay),
                fixed(l.exclusive_delay),
            ]
        })
        .collect();
    format!(
        "{}\ncell collision density {} Hz, cell collision probability {}",
        output::text_table(&["class", "L_i", "gamma", "p", "density_hz", "delay_s", "excl_delay_s"], &rows),
        fixed(cell.total_collision_density),
        fixed(cell.collision_probability),
    )
}

pub struct Emit {
    pub json: bool,
}

impl Emit {
    fn finish(&self, report: &RunReport, text: String) -> Result<(), CliError> {
        if self.json {
            println!("{}", serde_json::to_string_pretty(report)?);
        } else {
            println!("{}\n{text}", report.header());
        }
        Ok(())
    }
}

pub fn analyze(path: PathBuf, plan: Option<String>, emit: Emit) -> Result<(), CliError> {
    let (scenario, _) = load_scenario(&path)?;
    let resolved = Resolved::from_scenario(&scenario, plan.as_deref())?;
    let raos = resolved.raos(&scenario);
    let metrics = resolved.analytic(&scenario)?;
    let cell = cell_metrics(&metrics);
    let lines = class_lines(&scenario, &raos, &metrics);
    let text = format!(
        "strategy {} (layout from {})\n{}",
        resolved.strategy(),
        resolved.source(),
        analytic_table(&lines, &cell)
    );
    let results = json!({
        "strategy": resolved.strategy(),
        "layout_source": resolved.source(),
        "classes": lines,
        "cell": cell,
    });
    let report = RunReport::new("analyze", path.display().to_string(), &scenario, json!({ "plan": plan }), results)?;
    emit.finish(&report, text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Proportional,
    ReserveAndDivide,
    BruteForce,
}

pub fn optimize(path: PathBuf, method: Option<Method>, emit: Emit) -> Result<(), CliError> {
    let (scenario, _) = load_scenario(&path)?;
    let method = method.unwrap_or(if scenario.special_count() > 0 {
        Method::ReserveAndDivide
    } else {
        Method::Proportional
    });
    let (plan, reserved, residual) = match method {
        Method::Proportional => (proportional_allocation(&scenario)?, Vec::new(), None),
        Method::BruteForce => (brute_force_optimal(&scenario)?, Vec::new(), None),
        Method::ReserveAndDivide => {
            let out = reserve_and_divide(&scenario)?;
            (out.plan, out.reserved, Some(out.residual))
        }
    };
    let raos = plan.counts_for(&scenario)?;
    let metrics = full_dedication_rates(&scenario, &plan)?;
    let cell = cell_metrics(&metrics);
    let lines = class_lines(&scenario, &raos, &metrics);

    let mut text = String::new();
    for (id, l) in &reserved {
        text.push_str(&format!("reserved {l} RAOs for class {id}\n"));
    }
    if let Some(r) = residual {
        text.push_str(&format!("residual {r} RAOs\n"));
    }
    let order: Vec<String> =
        scenario.file_order().iter().map(|id| plan.get(*id).unwrap_or(0).to_string()).collect();
    text.push_str(&format!("plan (file order) {}\n", order.join(",")));
    text.push_str(&analytic_table(&lines, &cell));

    let results = json!({
        "plan": plan,
        "reserved": reserved,
        "residual": residual,
        "classes": lines,
        "cell": cell,
    });
    let report = RunReport::new("optimize", path.display().to_string(), &scenario, json!({ "method": method }), results)?;
    emit.finish(&report, text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Arrival {
    Poisson,
    Bernoulli,
}

#[derive(Clone, Debug, clap::Args)]
pub struct SimArgs {
    /// Monte-Carlo iterations.
    #[arg(long, default_value_t = 500)]
    pub iterations: u64,
    /// Master seed. A random seed is drawn and reported when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulated seconds per iteration.
    #[arg(long, default_value_t = 1)]
    pub horizon: u32,
    /// Poisson request counts per class, or one Bernoulli draw per device group.
    #[arg(long, value_enum, default_value_t = Arrival::Poisson)]
    pub arrival: Arrival,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    pub workers: Option<usize>,
}

impl SimArgs {
    fn config(&self) -> (SimConfig, bool) {
        let generated = self.seed.is_none();
        let seed = self.seed.unwrap_or_else(rand::random);
        let config = SimConfig {
            iterations: self.iterations,
            seed,
            horizon_s: self.horizon,
            arrival_mode: match self.arrival {
                Arrival::Poisson => ArrivalMode::PoissonAggregate,
                Arrival::Bernoulli => ArrivalMode::PerDeviceBernoulli,
            },
            workers: self.workers,
            ..SimConfig::default()
        };
        (config, generated)
    }
}

fn sim_parameters(config: &SimConfig, generated: bool) -> Value {
    json!({
        "iterations": config.iterations,
        "seed": config.seed,
        "seed_generated": generated,
        "horizon_s": config.horizon_s,
        "arrival_mode": config.arrival_mode,
        "measure_delay": config.measure_delay,
        "max_attempts": config.max_attempts,
        "workers": config.workers,
    })
}

fn seed_line(config: &SimConfig, generated: bool) -> String {
    format!(
        "seed {}{}, {} iterations x {} s",
        config.seed,
        if generated { " (generated)" } else { "" },
        config.iterations,
        config.horizon_s
    )
}

fn sim_table(rows: &[Vec<String>]) -> String {
    output::text_table(&CLASS_HEADER, rows)
}

pub struct SimulateOpts {
    pub plan: Option<String>,
    pub sim: SimArgs,
    pub delay: bool,
    pub max_attempts: u32,
    pub csv: Option<PathBuf>,
}

pub fn simulate(path: PathBuf, opts: SimulateOpts, emit: Emit) -> Result<(), CliError> {
    let (scenario, _) = load_scenario(&path)?;
    let resolved = Resolved::from_scenario(&scenario, opts.plan.as_deref())?;
    let (mut config, generated) = opts.sim.config();
    config.measure_delay = opts.delay;
    config.max_attempts = opts.max_attempts;

    let stats = simulator::run(&scenario, resolved.layout(), &config)?;
    let raos = resolved.raos(&scenario);
    let analytic = resolved.analytic(&scenario)?;
    let rows = output::class_rows(&Evaluated {
        raos: &raos,
        total_raos: scenario.total_raos(),
        analytic: &analytic,
        stats: &stats,
    });
    if let Some(csv) = &opts.csv {
        output::write_csv_file(csv, &CLASS_HEADER, &rows)?;
    }

    let text = format!(
        "strategy {} (layout from {})\n{}\n{}",
        resolved.strategy(),
        resolved.source(),
        seed_line(&config, generated),
        sim_table(&rows)
    );
    let mut parameters = sim_parameters(&config, generated);
    parameters["plan"] = json!(opts.plan);
    parameters["csv"] = json!(opts.csv.as_ref().map(|p| p.display().to_string()));
    let results = json!({
        "strategy": resolved.strategy(),
        "layout_source": resolved.source(),
        "raos": raos,
        "analytic": analytic,
        "analytic_cell": cell_metrics(&analytic),
        "stats": stats,
    });
    let report = RunReport::new("simulate", path.display().to_string(), &scenario, parameters, results)?;
    emit.finish(&report, text)
}

pub struct SweepOpts {
    pub class: Option<u32>,
    pub range: (u64, u64),
    pub step: u64,
    pub sim: SimArgs,
    pub csv: Option<PathBuf>,
}

pub fn sweep(path: PathBuf, opts: SweepOpts, emit: Emit) -> Result<(), CliError> {
    let (scenario, _) = load_scenario(&path)?;
    let id = opts.class.unwrap_or(scenario.file_order()[0]);
    let index = scenario
        .index_of(id)
        .ok_or_else(|| CliError::Validation(format!("scenario has no class {id}")))?;
    let (start, end) = opts.range;
    if opts.step == 0 || start > end {
        return Err(CliError::Validation("--range needs START <= END and --step at least 1".into()));
    }
    if start == 0 || end >= scenario.total_raos() {
        return Err(CliError::Validation(format!(
            "--range must lie within 1:{}",
            scenario.total_raos().saturating_sub(1)
        )));
    }
    let values: Vec<u64> = (start..=end).step_by(opts.step as usize).collect();
    let (config, generated) = opts.sim.config();
    let table = sweep_dedication(&scenario, index, &values, &config)?;

    let rows = output::sweep_rows(&table);
    if let Some(csv) = &opts.csv {
        output::write_csv_file(csv, &SWEEP_HEADER, &rows)?;
    }
    let text = format!(
        "sweeping class {} against class {}\n{}\n{}\nempirical minimum at L = {}, closed-form minimum at L = {}",
        table.swept_class,
        table.other_class,
        seed_line(&config, generated),
        output::text_table(&SWEEP_HEADER, &rows),
        table.empirical_argmin,
        table.analytic_argmin,
    );
    let mut parameters = sim_parameters(&config, generated);
    parameters["class"] = json!(id);
    parameters["range"] = json!([start, end]);
    parameters["step"] = json!(opts.step);
    let report = RunReport::new("sweep", path.display().to_string(), &scenario, parameters, json!(table))?;
    emit.finish(&report, text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompareStrategy {
    FullSharing,
    Proportional,
    ReserveAndDivide,
}

impl CompareStrategy {
    fn name(self) -> &'static str {
        match self {
            CompareStrategy::FullSharing => "full-sharing",
            CompareStrategy::Proportional => "proportional",
            CompareStrategy::ReserveAndDivide => "reserve-and-divide",
        }
    }

    fn resolve(self, scenario: &Scenario) -> Result<Resolved, CliError> {
        Ok(match self {
            CompareStrategy::FullSharing => Resolved::Sharing,
            CompareStrategy::Proportional => {
                Resolved::Dedicated { plan: proportional_allocation(scenario)?, source: "proportional" }
            }
            CompareStrategy::ReserveAndDivide => {
                if scenario.special_count() == 0 {
                    return Err(CliError::Validation(
                        "reserve-and-divide needs at least one special class with a QoS target".into(),
                    ));
                }
                Resolved::Dedicated { plan: allocator::reserve_and_divide(scenario)?.plan, source: "reserve-and-divide" }
            }
        })
    }
}

#[derive(Serialize)]
struct Compared {
    strategy: CompareStrategy,
    raos: Vec<u64>,
    analytic: Vec<ClassMetrics>,
    analytic_cell: CellMetrics,
    stats: SimStats,
}

pub fn compare(
    path: PathBuf,
    strategies: Option<Vec<CompareStrategy>>,
    sim: SimArgs,
    csv: Option<PathBuf>,
    emit: Emit,
) -> Result<(), CliError> {
    let (scenario, _) = load_scenario(&path)?;
    let strategies = strategies.unwrap_or_else(|| {
        let mut all = vec![CompareStrategy::FullSharing, CompareStrategy::Proportional];
        if scenario.special_count() > 0 {
            all.push(CompareStrategy::ReserveAndDivide);
        }
        all
    });
    let (config, generated) = sim.config();

    let mut compared = Vec::with_capacity(strategies.len());
    let mut all_rows = Vec::new();
    let mut text = seed_line(&config, generated);
    for s in strategies {
        let resolved = s.resolve(&scenario)?;
        let stats = simulator::run(&scenario, resolved.layout(), &config)?;
        let raos = resolved.raos(&scenario);
        let analytic = resolved.analytic(&scenario)?;
        let rows = output::class_rows(&Evaluated {
            raos: &raos,
            total_raos: scenario.total_raos(),
            analytic: &analytic,
            stats: &stats,
        });
        text.push_str(&format!("\n\n[{}]\n{}", s.name(), sim_table(&rows)));
        all_rows.extend(rows.into_iter().map(|mut r| {
            r.insert(0, s.name().to_string());
            r
        }));
        let analytic_cell = cell_metrics(&analytic);
        compared.push(Compared { strategy: s, raos, analytic, analytic_cell, stats });
    }
    if let Some(csv) = &csv {
        let header: Vec<&str> = std::iter::once("strategy").chain(CLASS_HEADER).collect();
        output::write_csv_file(csv, &header, &all_rows)?;
    }

    let mut parameters = sim_parameters(&config, generated);
    parameters["strategies"] = json!(compared.iter().map(|c| c.strategy).collect::<Vec<_>>());
    let report = RunReport::new("compare", path.display().to_string(), &scenario, parameters, json!(compared))?;
    emit.finish(&report, text)
}
