//! Approximate queueing network for the saturated swarm.
//!
//! The one-club is assumed infinite. Newcomers enter queue `F_0`; queues
//! `F_1..F_J` hold peers with `1..J` popular blocks. Each top queue is a
//! birth-death chain served by the one-club at `μ'` per peer and by the
//! publisher (most deprived first) when every lower queue is empty. Peers
//! served by the publisher get the rarest block and become gifted; gifted
//! peers pass through `M/M/∞` stages and serve the rarest block to the
//! one-club. The departure rate of the network feeds back as the arrival
//! rate until the two agree.

use crate::error::{Result, SwarmError};
use crate::params::ModelParams;

/// Stationary summary of one birth-death queue with arrival rate `arrival`
/// and service rate `n * base_service + bonus_service` in state `n >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueSolution {
    pub pi0: f64,
    pub mean_n: f64,
    pub arrival: f64,
    pub base_service: f64,
    pub bonus_service: f64,
    /// Levels kept after truncation.
    pub levels: usize,
}

impl QueueSolution {
    /// Long-run service completions; equals `arrival` at stationarity.
    pub fn departure_rate(&self) -> f64 {
        self.bonus_service * (1.0 - self.pi0) + self.mean_n * self.base_service
    }
}

const TAIL_MASS: f64 = 1e-12;
const MAX_LEVELS: usize = 1_000_000;

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

pub fn solve_birth_death(arrival: f64, per_peer: f64, bonus: f64) -> Result<QueueSolution> {
    if !(arrival >= 0.0 && per_peer >= 0.0 && bonus >= 0.0) || !(arrival + per_peer + bonus).is_finite() {
        return Err(SwarmError::DegenerateRates(format!(
            "birth-death rates must be finite and non-negative (arrival {arrival}, per-peer {per_peer}, bonus {bonus})"
        )));
    }
    let solution = |pi0, mean_n, levels| QueueSolution {
        pi0,
        mean_n,
        arrival,
        base_service: per_peer,
        bonus_service: bonus,
        levels,
    };
    if arrival == 0.0 {
        return Ok(solution(1.0, 0.0, 1));
    }
    if per_peer == 0.0 && arrival >= bonus {
        return Err(SwarmError::Unstable { arrival, service: bonus });
    }

    // unnormalized log-weights: w_n = Π_{i=1..n} arrival / (i per_peer + bonus)
    let mut log_w = vec![0.0f64];
    let mut log_total = 0.0f64;
    let mut n = 0usize;
    loop {
        let next_service = (n + 1) as f64 * per_peer + bonus;
        let ratio = arrival / next_service;
        if ratio < 1.0 {
            // service rates never decrease, so the tail is dominated by a geometric
            // series; bound its contribution to the mean, which also bounds its mass
            let tail = log_w[n] + (ratio / (1.0 - ratio)).ln() + ((n + 1) as f64 + 1.0 / (1.0 - ratio)).ln();
            if tail < log_total + TAIL_MASS.ln() {
                break;
            }
        }
        if n + 1 >= MAX_LEVELS {
            return Err(SwarmError::Unstable { arrival, service: next_service });
        }
        let lw = log_w[n] + ratio.ln();
        log_w.push(lw);
        log_total = log_add(log_total, lw);
        n += 1;
    }
    let mut pi0 = 0.0;
    let mut mean = 0.0;
    for (i, lw) in log_w.iter().enumerate() {
        let p = (lw - log_total).exp();
        if i == 0 {
            pi0 = p;
        }
        mean += i as f64 * p;
    }
    Ok(solution(pi0, mean, log_w.len()))
}

/// Rates at which the top queues feed the gifted stages (`gamma_r`) and the
/// next top queue (`gamma_p`).
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRates {
    pub gamma_r: Vec<f64>,
    pub gamma_p: Vec<f64>,
}

pub fn flow_rates(queues: &[QueueSolution], params: &ModelParams) -> FlowRates {
    let u = params.publisher_capacity;
    let mut idle_below = 1.0;
    let mut gamma_r = Vec::with_capacity(queues.len());
    let mut gamma_p = Vec::with_capacity(queues.len());
    for q in queues {
        gamma_r.push(u * idle_below * (1.0 - q.pi0));
        gamma_p.push(q.mean_n * params.endgame_rate);
        idle_below *= q.pi0;
    }
    FlowRates { gamma_r, gamma_p }
}

fn check_rates(params: &ModelParams) -> Result<()> {
    if params.blocks < 2 {
        return Err(SwarmError::InvalidParams {
            field: "blocks",
            reason: "the queueing model needs at least 2 blocks".into(),
        });
    }
    if params.endgame_rate.is_nan() || params.endgame_rate <= 0.0 {
        return Err(SwarmError::DegenerateRates(format!(
            "end-game rate must be positive, got {}",
            params.endgame_rate
        )));
    }
    Ok(())
}

/// Rate at which gifted peers serve the rarest block to the one-club.
///
/// `gamma_r[l]` is the gifting rate out of `F_l`, `l = 0..=J`.
pub fn psi(gamma_r: &[f64], params: &ModelParams) -> Result<f64> {
    check_rates(params)?;
    let k = params.blocks as f64;
    let (mu, mu_end) = (params.peer_rate, params.endgame_rate);
    Ok(gamma_r.iter().enumerate().map(|(l, g)| ((k - 2.0 - l as f64) * mu / mu_end + 1.0) * g).sum())
}

/// The same rate summed stage by stage: gifted stages `G..G+J-1` serve at
/// `μ`, and the aggregate stage `G+J+` mixes `μ` and `μ'` by the fraction of
/// its members that hold `K-1` blocks.
pub fn psi_by_stages(gamma_r: &[f64], params: &ModelParams) -> Result<f64> {
    check_rates(params)?;
    let k = params.blocks as f64;
    let (mu, mu_end) = (params.peer_rate, params.endgame_rate);
    let j = gamma_r.len().saturating_sub(1);
    let mut cumulative = 0.0;
    let mut staged = 0.0;
    for g in &gamma_r[..j] {
        cumulative += g;
        staged += mu * cumulative / mu_end;
    }
    let total: f64 = gamma_r.iter().sum();
    let last = ((k - (j as f64 + 2.0)) * mu + mu_end) / mu_end * total;
    Ok(staged + last)
}

/// Network departure rate: gifted departures, one-club service by gifted
/// peers, and publisher service to the one-club when every top queue is
/// empty.
pub fn total_departure(gamma_r: &[f64], psi: f64, pi0s: &[f64], params: &ModelParams) -> f64 {
    let idle: f64 = pi0s.iter().product();
    gamma_r.iter().sum::<f64>() + psi + params.publisher_capacity * idle
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOptions {
    /// Number of popular-block top queues beyond `F_0`.
    pub truncation: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Weight of the new departure rate in each update.
    pub damping: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions { truncation: 1, tolerance: 1e-8, max_iterations: 100_000, damping: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueueNetworkSolution {
    pub truncation: usize,
    pub queues: Vec<QueueSolution>,
    pub gamma_r: Vec<f64>,
    pub gamma_p: Vec<f64>,
    pub psi: f64,
    pub gamma0: f64,
    pub lambda_s: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// One pass through the network at newcomer arrival rate `arrival`.
pub fn evaluate_network(arrival: f64, truncation: usize, params: &ModelParams) -> Result<QueueNetworkSolution> {
    check_rates(params)?;
    let u = params.publisher_capacity;
    let mut queues = Vec::with_capacity(truncation + 1);
    let mut inflow = arrival;
    let mut idle_below = 1.0;
    for _ in 0..=truncation {
        let q = solve_birth_death(inflow, params.endgame_rate, u * idle_below)?;
        inflow = q.mean_n * params.endgame_rate;
        idle_below *= q.pi0;
        queues.push(q);
    }
    let FlowRates { gamma_r, gamma_p } = flow_rates(&queues, params);
    let psi = psi(&gamma_r, params)?;
    let pi0s: Vec<f64> = queues.iter().map(|q| q.pi0).collect();
    let gamma0 = total_departure(&gamma_r, psi, &pi0s, params);
    Ok(QueueNetworkSolution {
        truncation,
        queues,
        gamma_r,
        gamma_p,
        psi,
        gamma0,
        lambda_s: arrival,
        iterations: 0,
        converged: false,
    })
}

/// Iterates `λ ← (1-α) λ + α Γ(λ)` from `λ = U` until `|Γ(λ) - λ| ≤ tol · λ`.
pub fn fixed_point(params: &ModelParams, options: &FixedPointOptions) -> Result<QueueNetworkSolution> {
    params.validate()?;
    check_rates(params)?;
    if options.truncation > params.blocks - 2 {
        return Err(SwarmError::InvalidParams {
            field: "truncation",
            reason: format!("J = {} exceeds K - 2 = {}", options.truncation, params.blocks - 2),
        });
    }
    if !(options.damping > 0.0 && options.damping <= 1.0) {
        return Err(SwarmError::InvalidParams {
            field: "damping",
            reason: format!("must lie in (0, 1], got {}", options.damping),
        });
    }
    let mut lambda = params.publisher_capacity;
    let mut last_change = f64::INFINITY;
    for iteration in 1..=options.max_iterations {
        let mut sol = evaluate_network(lambda, options.truncation, params)?;
        last_change = (sol.gamma0 - lambda).abs() / lambda;
        if last_change <= options.tolerance {
            sol.iterations = iteration;
            sol.converged = true;
            return Ok(sol);
        }
        lambda = (1.0 - options.damping) * lambda + options.damping * sol.gamma0;
    }
    Err(SwarmError::NotConverged { iterations: options.max_iterations, last_change })
}

/// Fixed point with the default options, truncation capped at `K - 2`.
pub fn solve_network(params: &ModelParams) -> Result<QueueNetworkSolution> {
    let mut options = FixedPointOptions::default();
    options.truncation = options.truncation.min(params.blocks.saturating_sub(2));
    fixed_point(params, &options)
}

/// Throughput limit `((K-2) μ/μ' + 2) U` when the publisher always serves
/// newcomers.
pub fn throughput_bound(params: &ModelParams) -> Result<f64> {
    check_rates(params)?;
    let k = params.blocks as f64;
    Ok(((k - 2.0) * params.peer_rate / params.endgame_rate + 2.0) * params.publisher_capacity)
}
