//! Time to enter and to leave the one-club.
//!
//! A peer is in the one-club when it lacks exactly one block and that block is
//! the current rarest (fewest replicas, lowest index on ties).

use rayon::prelude::*;

use super::{InitialCondition, SimConfig, Simulator};
use crate::error::{Result, SwarmError};
use crate::replica::ReplicaProfile;
use crate::signature::Signature;
use crate::state::SwarmState;

pub fn one_club_size(state: &SwarmState) -> u32 {
    let k = state.blocks();
    let rarest = ReplicaProfile::of(state).rarest();
    state.count(Signature::full(k).difference(Signature::from_blocks([rarest])))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientSample {
    /// Stopping time, or the horizon when censored.
    pub time: f64,
    pub censored: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientResult {
    pub samples: Vec<TransientSample>,
    pub grid: Vec<f64>,
    /// Empirical `P(stop ≤ t)` on `grid`; censored samples never count as
    /// stopped.
    pub cdf: Vec<f64>,
}

impl TransientResult {
    pub fn from_samples(samples: Vec<TransientSample>, grid: Vec<f64>) -> Self {
        let mut stopped: Vec<f64> = samples.iter().filter(|s| !s.censored).map(|s| s.time).collect();
        stopped.sort_by(f64::total_cmp);
        let n = samples.len().max(1) as f64;
        let cdf = grid.iter().map(|&t| stopped.partition_point(|&x| x <= t) as f64 / n).collect();
        TransientResult { samples, grid, cdf }
    }

    pub fn probability_by(&self, t: f64) -> f64 {
        let hits = self.samples.iter().filter(|s| !s.censored && s.time <= t).count();
        hits as f64 / self.samples.len().max(1) as f64
    }

    pub fn censored(&self) -> usize {
        self.samples.iter().filter(|s| s.censored).count()
    }
}

fn first_passage(config: &SimConfig, replication: u64, stop: impl Fn(&SwarmState) -> bool) -> Result<TransientSample> {
    let mut sim = Simulator::for_replication(config, replication)?;
    if stop(sim.state()) {
        return Ok(TransientSample { time: 0.0, censored: false });
    }
    while sim.step(config.horizon).is_some() {
        if stop(sim.state()) {
            return Ok(TransientSample { time: sim.time(), censored: false });
        }
    }
    Ok(TransientSample { time: config.horizon, censored: true })
}

fn run_all(config: &SimConfig, grid: Vec<f64>, stop: impl Fn(&SwarmState) -> bool + Sync) -> Result<TransientResult> {
    config.validate()?;
    let samples = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| first_passage(config, r, &stop))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransientResult::from_samples(samples, grid))
}

fn check_fraction(fraction: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(SwarmError::InvalidParams {
            field: "fraction",
            reason: format!("must lie in [0, 1], got {fraction}"),
        });
    }
    Ok(())
}

/// Time until at least `fraction · N` peers are in the one-club, starting
/// from an empty swarm.
pub fn transient_time_to_one_club(config: &SimConfig, fraction: f64, grid: Vec<f64>) -> Result<TransientResult> {
    check_fraction(fraction)?;
    if matches!(config.initial, InitialCondition::OneClub) {
        return Err(SwarmError::InvalidParams {
            field: "initial",
            reason: "entry time starts from an empty swarm".into(),
        });
    }
    let threshold = fraction * config.params.peers as f64;
    run_all(config, grid, |s| one_club_size(s) as f64 >= threshold)
}

/// Time until fewer than `fraction · N` peers remain in the one-club,
/// starting from the one-club state.
pub fn transient_time_to_leave_one_club(config: &SimConfig, fraction: f64, grid: Vec<f64>) -> Result<TransientResult> {
    check_fraction(fraction)?;
    if matches!(config.initial, InitialCondition::AllEmpty) {
        return Err(SwarmError::InvalidParams {
            field: "initial",
            reason: "exit time starts from the one-club".into(),
        });
    }
    let threshold = fraction * config.params.peers as f64;
    run_all(config, grid, |s| (one_club_size(s) as f64) < threshold)
}

/// Mean number of departures by time `t`, over the configured replications.
pub fn departures_by(config: &SimConfig, t: f64) -> Result<f64> {
    config.validate()?;
    let counts = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| {
            let mut sim = Simulator::for_replication(config, r)?;
            while sim.step(t).is_some() {}
            Ok(sim.departures() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(counts.iter().sum::<f64>() / counts.len() as f64)
}
