//! Event-driven sampling of the closed-swarm chain.
//!
//! The simulator works on the aggregated occupancy vector and draws each
//! event from the same rate functions the exact generator uses, so a run is
//! an exact sample path of that chain.

mod estimate;
mod transient;

pub use estimate::{estimate_throughput, student_t_quantile, ThroughputEstimate};
pub use transient::{
    departures_by, one_club_size, transient_time_to_leave_one_club, transient_time_to_one_club, TransientResult,
    TransientSample,
};

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Result, SwarmError};
use crate::markov::{transitions_into, Transition};
use crate::params::ModelParams;
use crate::state::{Slot, SwarmState};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// Every peer is a newcomer.
    AllEmpty,
    /// Every peer but one lacks only block 1; the remaining peer is empty.
    OneClub,
    Custom(SwarmState),
}

impl InitialCondition {
    pub fn state(&self, params: &ModelParams) -> Result<SwarmState> {
        let state = match self {
            InitialCondition::AllEmpty => SwarmState::all_empty(params.blocks, params.peers, params.seeds_enabled())?,
            InitialCondition::OneClub => SwarmState::one_club(params.blocks, params.peers, 1, params.seeds_enabled())?,
            InitialCondition::Custom(s) => s.clone(),
        };
        if state.blocks() != params.blocks || state.population() != params.peers {
            return Err(SwarmError::InvalidState(format!(
                "initial state has {} blocks and {} peers, scenario has {} and {}",
                state.blocks(),
                state.population(),
                params.blocks,
                params.peers
            )));
        }
        if state.seed_count().is_some() != params.seeds_enabled() {
            return Err(SwarmError::InvalidState("initial state seed slot does not match the linger rate".into()));
        }
        Ok(state)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: ModelParams,
    pub seed: u64,
    pub horizon: f64,
    /// Departures before this time are excluded from throughput estimates.
    pub warmup: f64,
    pub replications: usize,
    pub initial: InitialCondition,
}

impl SimConfig {
    pub fn new(params: ModelParams) -> Self {
        SimConfig {
            params,
            seed: 0,
            horizon: 1000.0,
            warmup: 100.0,
            replications: 10,
            initial: InitialCondition::AllEmpty,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.warmup >= 0.0 && self.horizon > self.warmup && self.horizon.is_finite()) {
            return Err(SwarmError::InvalidParams {
                field: "horizon",
                reason: format!(
                    "need a finite horizon > warmup >= 0 (horizon {}, warmup {})",
                    self.horizon, self.warmup
                ),
            });
        }
        if self.replications == 0 {
            return Err(SwarmError::InvalidParams { field: "replications", reason: "at least one replication".into() });
        }
        self.initial.state(&self.params).map(|_| ())
    }
}

/// Private random stream of one replication.
pub fn replication_rng(seed: u64, replication: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub from: Slot,
    pub to: Slot,
    pub departure: bool,
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Slot::Peer(s) => write!(f, "{s}"),
            Slot::Seed => f.write_str("seed"),
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.17e} {} -> {}", self.time, self.from, self.to)?;
        if self.departure {
            f.write_str(" departure")?;
        }
        Ok(())
    }
}

/// A single sample path.
pub struct Simulator {
    params: ModelParams,
    state: SwarmState,
    time: f64,
    departures: u64,
    events: u64,
    rng: ChaCha8Rng,
    buf: Vec<Transition>,
}

impl Simulator {
    pub fn new(params: ModelParams, state: SwarmState, rng: ChaCha8Rng) -> Self {
        Simulator { params, state, time: 0.0, departures: 0, events: 0, rng, buf: Vec::new() }
    }

    pub fn for_replication(config: &SimConfig, replication: u64) -> Result<Self> {
        config.validate()?;
        let state = config.initial.state(&config.params)?;
        Ok(Simulator::new(config.params.clone(), state, replication_rng(config.seed, replication)))
    }

    pub fn state(&self) -> &SwarmState {
        &self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn departures(&self) -> u64 {
        self.departures
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// Enabled transitions out of the current state.
    pub fn enabled(&mut self) -> &[Transition] {
        transitions_into(&self.state, &self.params, &mut self.buf);
        &self.buf
    }

    /// Advances to the next event if it happens no later than `until`.
    /// Otherwise the clock stops at `until` and `None` is returned.
    pub fn step(&mut self, until: f64) -> Option<Event> {
        transitions_into(&self.state, &self.params, &mut self.buf);
        let total: f64 = self.buf.iter().map(|t| t.rate).sum();
        if total <= 0.0 {
            self.time = self.time.max(until);
            return None;
        }
        let hold: f64 = self.rng.sample::<f64, _>(Exp1) / total;
        if self.time + hold > until {
            self.time = until;
            return None;
        }
        self.time += hold;
        let mut target = self.rng.random::<f64>() * total;
        let mut chosen = self.buf[self.buf.len() - 1];
        for t in &self.buf {
            if target < t.rate {
                chosen = *t;
                break;
            }
            target -= t.rate;
        }
        self.state.move_peer(chosen.from, chosen.to);
        self.events += 1;
        if chosen.departure {
            self.departures += 1;
        }
        Some(Event { time: self.time, from: chosen.from, to: chosen.to, departure: chosen.departure })
    }
}

/// Outcome of one replication run to the horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub replication: u64,
    pub departures: u64,
    pub departures_after_warmup: u64,
    pub events: u64,
    pub final_state: SwarmState,
}

impl RunSummary {
    pub fn throughput(&self, config: &SimConfig) -> f64 {
        self.departures_after_warmup as f64 / (config.horizon - config.warmup)
    }
}

fn run(config: &SimConfig, replication: u64, mut log: Option<&mut Vec<Event>>) -> Result<RunSummary> {
    let mut sim = Simulator::for_replication(config, replication)?;
    let mut after_warmup = 0;
    while let Some(event) = sim.step(config.horizon) {
        if event.departure && event.time > config.warmup {
            after_warmup += 1;
        }
        if let Some(log) = log.as_deref_mut() {
            log.push(event);
        }
    }
    Ok(RunSummary {
        replication,
        departures: sim.departures(),
        departures_after_warmup: after_warmup,
        events: sim.events(),
        final_state: sim.state().clone(),
    })
}

/// Runs one replication to the horizon.
pub fn simulate(config: &SimConfig, replication: u64) -> Result<RunSummary> {
    run(config, replication, None)
}

/// Runs one replication and records every event.
pub fn simulate_logged(config: &SimConfig, replication: u64) -> Result<(RunSummary, Vec<Event>)> {
    let mut log = Vec::new();
    let summary = run(config, replication, Some(&mut log))?;
    Ok((summary, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signature::Signature;

    #[test]
    fn population_is_conserved() {
        let params = ModelParams::new(3, 12).with_capacity(0.5).with_linger_rate(2.0);
        let config = SimConfig { horizon: 200.0, warmup: 0.0, ..SimConfig::new(params) };
        let mut sim = Simulator::for_replication(&config, 3).unwrap();
        while sim.step(config.horizon).is_some() {
            assert_eq!(sim.state().population(), 12);
        }
        assert!(sim.departures() > 0);
    }

    #[test]
    fn same_seed_same_path() {
        let config = SimConfig { seed: 42, horizon: 100.0, warmup: 0.0, ..SimConfig::new(ModelParams::new(3, 10)) };
        let render = |events: &[Event]| events.iter().map(|e| format!("{e}\n")).collect::<String>();
        let (_, a) = simulate_logged(&config, 0).unwrap();
        let (_, b) = simulate_logged(&config, 0).unwrap();
        let (_, c) = simulate_logged(&config, 1).unwrap();
        assert!(!a.is_empty());
        assert_eq!(render(&a), render(&b));
        assert_ne!(render(&a), render(&c));
    }

    #[test]
    fn config_validation() {
        let base = SimConfig::new(ModelParams::new(3, 5));
        assert!(base.validate().is_ok());
        assert!(SimConfig { horizon: 10.0, warmup: 10.0, ..base.clone() }.validate().is_err());
        assert!(SimConfig { replications: 0, ..base.clone() }.validate().is_err());
        let wrong = SwarmState::all_empty(3, 4, false).unwrap();
        assert!(SimConfig { initial: InitialCondition::Custom(wrong), ..base }.validate().is_err());
    }

    #[test]
    fn one_club_initial_state() {
        let s = InitialCondition::OneClub.state(&ModelParams::new(3, 15)).unwrap();
        assert_eq!(s.count(Signature::from_blocks([2, 3])), 14);
    }
}
