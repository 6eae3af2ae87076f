use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use super::stats::{summarize, IterationTally, SimStats};
use super::{ArrivalMode, Layout, SimConfig, SimError};
use crate::model::{ClassId, Scenario};
use crate::scalar::Scalar;

/// Streams per iteration reserved for classes.
const CLASS_STREAM_BITS: u32 = 20;

pub(crate) fn class_rng(seed: u64, iteration: u64, class_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((iteration << CLASS_STREAM_BITS) | class_index as u64);
    rng
}

#[derive(Clone, Debug)]
enum Slots<'a> {
    Range { start: u32, len: u32 },
    List(&'a [u32]),
}

impl Slots<'_> {
    fn len(&self) -> u32 {
        match self {
            Slots::Range { len, .. } => *len,
            Slots::List(s) => s.len() as u32,
        }
    }

    #[inline]
    fn pick(&self, u: f64) -> u32 {
        let n = self.len();
        let k = ((u * f64::from(n)) as u32).min(n - 1);
        match self {
            Slots::Range { start, .. } => start + k,
            Slots::List(s) => s[k as usize],
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Arrivals {
    Poisson(f64),
    Devices { accessors: u64, probability: f64 },
}

impl Arrivals {
    /// Arrival process thinned by `keep` (for fresh requests under retries).
    fn thinned(self, keep: f64) -> Self {
        match self {
            Arrivals::Poisson(mean) => Arrivals::Poisson(mean * keep),
            Arrivals::Devices { accessors, probability } => {
                Arrivals::Devices { accessors, probability: probability * keep }
            }
        }
    }

    fn sampler(self) -> Sampler {
        match self {
            Arrivals::Poisson(mean) if mean > 0.0 => Sampler::Poisson(Poisson::new(mean).expect("positive mean")),
            Arrivals::Poisson(_) => Sampler::None,
            Arrivals::Devices { accessors, probability } => {
                Sampler::Binomial(Binomial::new(accessors, probability).expect("probability in [0, 1]"))
            }
        }
    }
}

enum Sampler {
    Poisson(Poisson<f64>),
    Binomial(Binomial),
    None,
}

impl Sampler {
    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng) -> u64 {
        match self {
            Sampler::Poisson(d) => d.sample(rng) as u64,
            Sampler::Binomial(d) => d.sample(rng),
            Sampler::None => 0,
        }
    }
}

pub(crate) struct Setup<'a> {
    ids: Vec<ClassId>,
    densities: Vec<f64>,
    backoffs: Vec<f64>,
    arrivals: Vec<Arrivals>,
    slots: Vec<Slots<'a>>,
    total_raos: u32,
}

impl<'a> Setup<'a> {
    pub fn new<T: Scalar>(scenario: &Scenario<T>, layout: Layout<'a>, config: &SimConfig) -> Result<Self, SimError> {
        let total_raos = u32::try_from(scenario.total_raos())
            .map_err(|_| SimError::Unsupported("more than u32::MAX RAOs".into()))?;
        let mut slots = Vec::with_capacity(scenario.len());
        match layout {
            Layout::FullSharing => {
                slots.resize(scenario.len(), Slots::Range { start: 0, len: total_raos });
            }
            Layout::Dedicated(plan) => {
                plan.check(scenario)?;
                let mut start = 0u32;
                for c in scenario.classes() {
                    let len = plan.get(c.id()).expect("plan checked") as u32;
                    slots.push(Slots::Range { start, len });
                    start += len;
                }
            }
            Layout::Partial(topo) => {
                topo.check(scenario)?;
                for c in scenario.classes() {
                    slots.push(Slots::List(topo.usable(c.id()).expect("topology checked")));
                }
            }
        }

        let arrivals = scenario
            .classes()
            .iter()
            .map(|c| match config.arrival_mode {
                ArrivalMode::PoissonAggregate => Ok(Arrivals::Poisson(c.ra_density().as_f64())),
                ArrivalMode::PerDeviceBernoulli => {
                    let accessors = c.accessors().ok_or(SimError::MissingPopulation(c.id()))?;
                    let probability = c.per_device_rate().ok_or(SimError::MissingPopulation(c.id()))?.as_f64();
                    if probability > 1.0 {
                        return Err(SimError::RateTooHigh { class_id: c.id(), probability });
                    }
                    Ok(Arrivals::Devices { accessors, probability })
                }
            })
            .collect::<Result<_, _>>()?;

        Ok(Self {
            ids: scenario.classes().iter().map(|c| c.id()).collect(),
            densities: scenario.classes().iter().map(|c| c.ra_density().as_f64()).collect(),
            backoffs: scenario.classes().iter().map(|c| c.backoff().as_f64()).collect(),
            arrivals,
            slots,
            total_raos,
        })
    }
}

fn slotted_iteration(setup: &Setup<'_>, samplers: &[Sampler], config: &SimConfig, iteration: u64) -> IterationTally {
    let n = setup.ids.len();
    let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|k| class_rng(config.seed, iteration, k)).collect();
    let mut tally = IterationTally::new(n);
    let mut occupancy = vec![0u32; setup.total_raos as usize];
    let mut requests: Vec<(usize, u32)> = Vec::new();

    for _frame in 0..config.horizon_s {
        requests.clear();
        for (k, rng) in rngs.iter_mut().enumerate() {
            let count = samplers[k].draw(rng);
            for _ in 0..count {
                let slot = setup.slots[k].pick(rng.random::<f64>());
                occupancy[slot as usize] += 1;
                requests.push((k, slot));
            }
        }
        for &(k, slot) in &requests {
            tally.attempts[k] += 1;
            if occupancy[slot as usize] >= 2 {
                tally.colliding[k] += 1;
            }
        }
        for &(_, slot) in &requests {
            let occ = &mut occupancy[slot as usize];
            if *occ >= 2 {
                tally.events += 1;
            }
            *occ = 0;
        }
    }
    tally
}

pub(crate) fn run_slotted(setup: &Setup<'_>, config: &SimConfig) -> SimStats {
    let samplers: Vec<Sampler> = setup.arrivals.iter().map(|a| a.sampler()).collect();
    let tallies: Vec<IterationTally> = (0..config.iterations)
        .into_par_iter()
        .map(|it| slotted_iteration(setup, &samplers, config, it))
        .collect();
    summarize(&setup.ids, &tallies, config.horizon_s, None)
}

#[derive(Clone, Copy)]
struct Pending {
    failures: u32,
    tracked: bool,
}

struct RetryClass {
    sampler: Sampler,
    slots: u32,
    /// Frames between a collision and the reattempt.
    backoff_frames: u64,
    warmup_frames: u64,
}

fn retry_class(setup: &Setup<'_>, k: usize, config: &SimConfig) -> RetryClass {
    let slots = setup.slots[k].len();
    let load = setup.densities[k] / f64::from(slots);
    let p = -(-load).exp_m1();
    let backoff_frames = (setup.backoffs[k].ceil() as u64).max(1);
    // enough backoff rounds for the retry backlog to reach 1e-4 of steady state
    let rounds = if p > 0.0 { ((1e-4f64).ln() / p.ln()).ceil() } else { 1.0 };
    let rounds = (rounds as u64).clamp(1, u64::from(config.max_attempts));
    RetryClass {
        sampler: setup.arrivals[k].thinned((-load).exp()).sampler(),
        slots,
        backoff_frames,
        warmup_frames: rounds * backoff_frames,
    }
}

fn retry_iteration(classes: &[RetryClass], config: &SimConfig, iteration: u64) -> IterationTally {
    let mut tally = IterationTally::new(classes.len());
    for (k, class) in classes.iter().enumerate() {
        let mut rng = class_rng(config.seed, iteration, k);
        let ring = class.backoff_frames as usize + 1;
        let mut pending: Vec<Vec<Pending>> = vec![Vec::new(); ring];
        let mut occupancy = vec![0u32; class.slots as usize];
        let mut batch: Vec<(Pending, u32)> = Vec::new();
        let measured = class.warmup_frames..class.warmup_frames + u64::from(config.horizon_s);
        let mut outstanding = 0u64;

        let mut frame = 0u64;
        while frame < measured.end || outstanding > 0 {
            let queued = std::mem::take(&mut pending[(frame % ring as u64) as usize]);
            batch.clear();
            let tracked = measured.contains(&frame);
            let fresh = class.sampler.draw(&mut rng);
            let arrivals = queued
                .into_iter()
                .chain((0..fresh).map(|_| Pending { failures: 0, tracked }));
            for req in arrivals {
                if req.tracked && req.failures == 0 {
                    outstanding += 1;
                }
                let slot = Slots::Range { start: 0, len: class.slots }.pick(rng.random::<f64>());
                occupancy[slot as usize] += 1;
                batch.push((req, slot));
            }

            let counting = measured.contains(&frame);
            for &(_, slot) in &batch {
                if counting {
                    tally.attempts[k] += 1;
                    if occupancy[slot as usize] >= 2 {
                        tally.colliding[k] += 1;
                    }
                }
            }
            for &(mut req, slot) in &batch {
                let collided = occupancy[slot as usize] >= 2;
                if collided {
                    req.failures += 1;
                    if req.failures >= config.max_attempts {
                        if req.tracked {
                            tally.censored[k] += 1;
                            outstanding -= 1;
                        }
                    } else {
                        let at = ((frame + class.backoff_frames) % ring as u64) as usize;
                        pending[at].push(req);
                    }
                } else if req.tracked {
                    tally.resolved[k] += 1;
                    tally.attempts_to_success[k] += u64::from(req.failures) + 1;
                    outstanding -= 1;
                }
            }
            for &(_, slot) in &batch {
                let occ = &mut occupancy[slot as usize];
                if counting && *occ >= 2 {
                    tally.events += 1;
                }
                *occ = 0;
            }
            frame += 1;
        }
    }
    tally
}

pub(crate) fn run_retries(setup: &Setup<'_>, config: &SimConfig) -> SimStats {
    let classes: Vec<RetryClass> = (0..setup.ids.len()).map(|k| retry_class(setup, k, config)).collect();
    let tallies: Vec<IterationTally> = (0..config.iterations)
        .into_par_iter()
        .map(|it| retry_iteration(&classes, config, it))
        .collect();
    summarize(&setup.ids, &tallies, config.horizon_s, Some(&setup.backoffs))
}
