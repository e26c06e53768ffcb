//! Exact stochastic simulation of the invitation system Markov chain.
//!
//! Events are generated by the embedded-jump-chain method: one exponential
//! holding time from the total rate, then a category draw proportional to
//! the individual rates. This is distributionally exact for the chain and
//! does O(1) work per event.
//!
//! Two feedback schemes are implemented. The *stylized* scheme identifies
//! the pending-agent count with the control target and may remove pending
//! agents; its queue-level feedback acts through a dedicated event stream at
//! rate `epsilon * |queue_diff|`. The *actual* scheme maintains a real-valued
//! invitation target; invitations raise the pending count to the target and
//! pending agents are never removed.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Error;
use crate::params::ModelParams;
use crate::state::SimState;
use crate::trajectory::{Trajectory, TrajectoryKind};

/// Which invitation scheme drives the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Stylized,
    Actual,
}

/// Which queue value feeds the level term of a target update (actual scheme):
/// the queue length immediately before the triggering jump, or after it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum QueueLevelConvention {
    #[default]
    PreJump,
    PostJump,
}

/// Simulation run settings.
#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub horizon: f64,
    /// Output grid spacing; the state is held constant between events.
    pub sample_dt: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub initial: SimState,
    pub level_convention: QueueLevelConvention,
}

impl SimConfig {
    pub fn new(horizon: f64, sample_dt: f64, seed: u64, scheme: Scheme, initial: SimState) -> Self {
        SimConfig {
            horizon,
            sample_dt,
            seed,
            scheme,
            initial,
            level_convention: QueueLevelConvention::default(),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !self.horizon.is_finite() || self.horizon <= 0.0 {
            return Err(Error::NotPositive("horizon"));
        }
        if !self.sample_dt.is_finite() || self.sample_dt <= 0.0 {
            return Err(Error::NotPositive("sample_dt"));
        }
        if self.sample_dt > self.horizon {
            return Err(Error::ExceedsHorizon("sample_dt"));
        }
        self.initial.validate()?;
        match self.scheme {
            Scheme::Actual if self.initial.target.is_none() => Err(Error::MissingTarget),
            Scheme::Stylized if self.initial.target.is_some() => Err(Error::UnexpectedTarget),
            _ => Ok(()),
        }
    }
}

/// Instantaneous event rates at a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRates {
    /// Customer arrivals, `lambda * r`.
    pub arrival: f64,
    /// Invitation acceptances, `beta * pending`.
    pub acceptance: f64,
    /// Algorithm-triggered queue-feedback events, `epsilon * |queue_diff|`
    /// (stylized scheme only; zero under the actual scheme).
    pub nudge: f64,
    /// Service completions, `mu * in_service`.
    pub service: f64,
    /// Customer abandonments, `delta * customer_queue`.
    pub customer_abandon: f64,
    /// Agent abandonments, `theta * agent_queue`.
    pub agent_abandon: f64,
}

impl EventRates {
    pub fn for_state(s: &SimState, p: &ModelParams, scheme: Scheme) -> Self {
        EventRates {
            arrival: p.arrival_rate(),
            acceptance: p.beta * s.pending as f64,
            nudge: match scheme {
                Scheme::Stylized => p.epsilon * s.queue_diff.unsigned_abs() as f64,
                Scheme::Actual => 0.0,
            },
            service: p.mu * s.in_service as f64,
            customer_abandon: p.delta * s.customer_queue() as f64,
            agent_abandon: p.theta * s.agent_queue() as f64,
        }
    }

    pub fn total(&self) -> f64 {
        self.arrival
            + self.acceptance
            + self.nudge
            + self.service
            + self.customer_abandon
            + self.agent_abandon
    }

    fn as_array(&self) -> [f64; 6] {
        [
            self.arrival,
            self.acceptance,
            self.nudge,
            self.service,
            self.customer_abandon,
            self.agent_abandon,
        ]
    }
}

/// The event that fired at a step, with the service branch resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    Arrival,
    Acceptance,
    Nudge,
    ServiceReturn,
    ServiceLeave,
    CustomerAbandon,
    AgentAbandon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Category {
    Arrival,
    Acceptance,
    Nudge,
    Service,
    CustomerAbandon,
    AgentAbandon,
}

const CATEGORIES: [Category; 6] = [
    Category::Arrival,
    Category::Acceptance,
    Category::Nudge,
    Category::Service,
    Category::CustomerAbandon,
    Category::AgentAbandon,
];

/// One realization of the chain, advanced event by event.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: ModelParams,
    scheme: Scheme,
    level_convention: QueueLevelConvention,
    state: SimState,
    clock: f64,
    last_queue_change: f64,
    rng: ChaCha8Rng,
}

impl Simulation {
    pub fn new(
        params: ModelParams,
        scheme: Scheme,
        initial: SimState,
        seed: u64,
    ) -> Result<Self, Error> {
        Self::with_rng(params, scheme, initial, stream_rng(seed, 0))
    }

    /// Builds a simulation on an explicit RNG stream (used by replications).
    pub fn with_rng(
        params: ModelParams,
        scheme: Scheme,
        initial: SimState,
        rng: ChaCha8Rng,
    ) -> Result<Self, Error> {
        params.validate()?;
        initial.validate()?;
        match scheme {
            Scheme::Actual if initial.target.is_none() => return Err(Error::MissingTarget),
            Scheme::Stylized if initial.target.is_some() => return Err(Error::UnexpectedTarget),
            _ => {}
        }
        Ok(Simulation {
            params,
            scheme,
            level_convention: QueueLevelConvention::default(),
            state: initial,
            clock: 0.0,
            last_queue_change: 0.0,
            rng,
        })
    }

    pub fn set_level_convention(&mut self, convention: QueueLevelConvention) {
        self.level_convention = convention;
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn rates(&self) -> EventRates {
        EventRates::for_state(&self.state, &self.params, self.scheme)
    }

    /// Advances the clock to the next event, applies it, and checks the
    /// state invariants. Fails on an absorbing state (total rate zero).
    pub fn step(&mut self) -> Result<Event, Error> {
        let rates = self.rates();
        let total = rates.total();
        if total <= 0.0 {
            return Err(Error::AbsorbingState);
        }
        self.clock += exp_sample(&mut self.rng, total);
        let category = self.pick_category(&rates, total);
        let event = match self.scheme {
            Scheme::Stylized => self.apply_stylized(category),
            Scheme::Actual => self.apply_actual(category),
        };
        self.check_invariants()?;
        Ok(event)
    }

    fn pick_category(&mut self, rates: &EventRates, total: f64) -> Category {
        let mut u = self.rng.random::<f64>() * total;
        let array = rates.as_array();
        for (rate, category) in array.iter().zip(CATEGORIES) {
            if u < *rate {
                return category;
            }
            u -= rate;
        }
        // Floating-point edge: fall back to the last category with positive rate.
        *CATEGORIES
            .iter()
            .zip(array)
            .filter(|(_, rate)| *rate > 0.0)
            .map(|(category, _)| category)
            .next_back()
            .expect("total rate is positive")
    }

    fn gain_increment(&mut self) -> i64 {
        randomized_gain(self.params.gamma, &mut self.rng)
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.random::<f64>() < p
    }

    fn apply_stylized(&mut self, category: Category) -> Event {
        let y = self.state.queue_diff;
        match category {
            Category::Arrival => {
                if y > 0 {
                    self.state.in_service += 1;
                }
                self.state.queue_diff -= 1;
                self.state.pending += self.gain_increment();
                Event::Arrival
            }
            Category::Acceptance => {
                if y < 0 {
                    self.state.in_service += 1;
                }
                self.state.queue_diff += 1;
                let g = self.gain_increment();
                self.state.pending -= g.min(self.state.pending);
                Event::Acceptance
            }
            Category::Nudge => {
                if self.state.pending >= 1 {
                    self.state.pending -= y.signum();
                } else if y < 0 {
                    self.state.pending += 1;
                }
                Event::Nudge
            }
            Category::Service => {
                if self.coin(self.params.alpha) {
                    // Agent returns to the queue.
                    if y >= 0 {
                        self.state.in_service -= 1;
                    }
                    self.state.queue_diff += 1;
                    let g = self.gain_increment();
                    self.state.pending -= g.min(self.state.pending);
                    Event::ServiceReturn
                } else {
                    self.state.in_service -= 1;
                    Event::ServiceLeave
                }
            }
            Category::CustomerAbandon => {
                self.state.queue_diff += 1;
                let g = self.gain_increment();
                self.state.pending -= g.min(self.state.pending);
                Event::CustomerAbandon
            }
            Category::AgentAbandon => {
                self.state.queue_diff -= 1;
                self.state.pending += self.gain_increment();
                Event::AgentAbandon
            }
        }
    }

    fn apply_actual(&mut self, category: Category) -> Event {
        let y_pre = self.state.queue_diff;
        match category {
            Category::Arrival => {
                if y_pre > 0 {
                    self.state.in_service += 1;
                }
                self.state.queue_diff -= 1;
                self.update_target(-1, y_pre);
                Event::Arrival
            }
            Category::Acceptance => {
                if y_pre < 0 {
                    self.state.in_service += 1;
                }
                self.state.queue_diff += 1;
                // The accepting agent leaves the pending pool.
                self.state.pending -= 1;
                self.update_target(1, y_pre);
                Event::Acceptance
            }
            Category::Nudge => unreachable!("no nudge events under the actual scheme"),
            Category::Service => {
                if self.coin(self.params.alpha) {
                    if y_pre >= 0 {
                        self.state.in_service -= 1;
                    }
                    self.state.queue_diff += 1;
                    self.update_target(1, y_pre);
                    Event::ServiceReturn
                } else {
                    self.state.in_service -= 1;
                    Event::ServiceLeave
                }
            }
            Category::CustomerAbandon => {
                self.state.queue_diff += 1;
                self.update_target(1, y_pre);
                Event::CustomerAbandon
            }
            Category::AgentAbandon => {
                self.state.queue_diff -= 1;
                self.update_target(-1, y_pre);
                Event::AgentAbandon
            }
        }
    }

    /// Target update on a queue jump:
    /// `target <- max(0, target - gamma * dy - epsilon * level * dt)`,
    /// with `dt` the time since the previous queue change, followed by
    /// invitations up to the target.
    fn update_target(&mut self, dy: i64, y_pre: i64) {
        let dt = self.clock - self.last_queue_change;
        self.last_queue_change = self.clock;
        let level = match self.level_convention {
            QueueLevelConvention::PreJump => y_pre,
            QueueLevelConvention::PostJump => self.state.queue_diff,
        } as f64;
        let target = self
            .state
            .target
            .as_mut()
            .expect("actual scheme carries a target");
        *target =
            (*target - self.params.gamma * dy as f64 - self.params.epsilon * level * dt).max(0.0);
        if (self.state.pending as f64) < *target {
            self.state.pending = target.ceil() as i64;
        }
    }

    fn check_invariants(&self) -> Result<(), Error> {
        let s = &self.state;
        if s.pending < 0 {
            return Err(Error::InvariantViolation {
                what: "pending >= 0",
                t: self.clock,
            });
        }
        if s.in_service < 0 {
            return Err(Error::InvariantViolation {
                what: "in_service >= 0",
                t: self.clock,
            });
        }
        if let Some(target) = s.target {
            if target < 0.0 {
                return Err(Error::InvariantViolation {
                    what: "target >= 0",
                    t: self.clock,
                });
            }
            if (s.pending as f64) < target {
                return Err(Error::InvariantViolation {
                    what: "pending >= target",
                    t: self.clock,
                });
            }
        }
        Ok(())
    }
}

/// Raw integer trajectory sampled on a uniform grid, state held constant
/// between events.
#[derive(Debug, Clone)]
pub struct SimTrajectory {
    pub scheme: Scheme,
    pub sample_dt: f64,
    pub samples: Vec<SimState>,
}

impl SimTrajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Centered version of this trajectory.
    pub fn centered(&self, params: &ModelParams) -> Trajectory {
        Trajectory {
            kind: match self.scheme {
                Scheme::Stylized => TrajectoryKind::SimStylized,
                Scheme::Actual => TrajectoryKind::SimActual,
            },
            dt: self.sample_dt,
            states: self
                .samples
                .iter()
                .map(|s| s.to_centered(params))
                .collect(),
        }
    }

    /// Writes the raw CSV form, header `t,X,Y,Z,Xtarget`. Counts are emitted
    /// as integers; the target column is empty under the stylized scheme.
    pub fn write_csv<W: io::Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,X,Y,Z,Xtarget")?;
        for (i, s) in self.samples.iter().enumerate() {
            let t = i as f64 * self.sample_dt;
            match s.target {
                Some(target) => writeln!(
                    w,
                    "{},{},{},{},{}",
                    t, s.pending, s.queue_diff, s.in_service, target
                )?,
                None => writeln!(w, "{},{},{},{},", t, s.pending, s.queue_diff, s.in_service)?,
            }
        }
        Ok(())
    }
}

/// Runs one realization to the horizon, sampling on the `sample_dt` grid.
/// Deterministic given the seed; identical to replication index 0.
pub fn run(cfg: &SimConfig, params: &ModelParams) -> Result<SimTrajectory, Error> {
    run_stream(cfg, params, 0)
}

/// Runs `n` independent replications in parallel. Replication `k` draws from
/// the stream `k` of the seeded generator, so any prefix of the replication
/// set is reproducible regardless of thread scheduling.
pub fn run_replications(
    cfg: &SimConfig,
    params: &ModelParams,
    n: usize,
) -> Result<Vec<SimTrajectory>, Error> {
    (0..n)
        .into_par_iter()
        .map(|k| run_stream(cfg, params, k as u64))
        .collect()
}

fn run_stream(cfg: &SimConfig, params: &ModelParams, stream: u64) -> Result<SimTrajectory, Error> {
    cfg.validate()?;
    let mut sim = Simulation::with_rng(
        *params,
        cfg.scheme,
        cfg.initial,
        stream_rng(cfg.seed, stream),
    )?;
    sim.set_level_convention(cfg.level_convention);

    let grid_len = (cfg.horizon / cfg.sample_dt).round().max(1.0) as usize;
    let mut samples = Vec::with_capacity(grid_len + 1);
    samples.push(sim.state);
    let mut next_grid = 1usize;

    while next_grid <= grid_len {
        let rates = sim.rates();
        let total = rates.total();
        if total <= 0.0 {
            return Err(Error::AbsorbingState);
        }
        // Holding time first, category second: the same draw order as
        // step(), so a manual step() loop replays identical paths.
        let holding = exp_sample(&mut sim.rng, total);
        let t_event = sim.clock + holding;
        while next_grid <= grid_len && (next_grid as f64) * cfg.sample_dt < t_event {
            samples.push(sim.state);
            next_grid += 1;
        }
        if t_event > cfg.horizon {
            break;
        }
        sim.clock = t_event;
        let category = sim.pick_category(&rates, total);
        match sim.scheme {
            Scheme::Stylized => sim.apply_stylized(category),
            Scheme::Actual => sim.apply_actual(category),
        };
        sim.check_invariants()?;
    }
    while next_grid <= grid_len {
        samples.push(sim.state);
        next_grid += 1;
    }

    Ok(SimTrajectory {
        scheme: cfg.scheme,
        sample_dt: cfg.sample_dt,
        samples,
    })
}

/// Randomized gain increment with mean `gamma`: the integer part plus a
/// Bernoulli draw on the fractional part. Equals `gamma` exactly when
/// `gamma` is an integer; drawn independently at every gain-sized jump.
pub fn randomized_gain(gamma: f64, rng: &mut ChaCha8Rng) -> i64 {
    let base = gamma.floor();
    let frac = gamma - base;
    let extra = if frac > 0.0 && rng.random::<f64>() < frac {
        1
    } else {
        0
    };
    base as i64 + extra
}

/// Seeded generator for a replication stream: same seed, independent stream
/// per replication index.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn exp_sample(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}
