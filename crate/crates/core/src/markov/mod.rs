//! Exact closed-system Markov model.

mod generator;
mod rates;
mod solver;

pub use generator::{build_chain, build_generator, ChainOptions, GeneratorMatrix, SwarmChain};
pub use rates::{departure_rate, peer_rate, publisher_rate, transitions, transitions_into, Transition};
pub use solver::{solve_stationary, solve_stationary_with, SolverMethod, SolverOptions, StationaryDistribution};

use crate::error::Result;
use crate::params::ModelParams;

/// Long-run departure rate: `Σ_σ π_σ · departures(σ)`.
pub fn throughput(pi: &StationaryDistribution, chain: &SwarmChain) -> f64 {
    pi.probabilities.iter().zip(&chain.departure_rates).map(|(p, d)| p * d).sum()
}

/// Exact throughput of one scenario on the lumped, reachable state space.
#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub throughput: f64,
    pub states: usize,
    pub residual: f64,
    pub iterations: usize,
    pub method: SolverMethod,
}

pub fn solve_exact(params: &ModelParams) -> Result<ExactSolution> {
    solve_exact_with(params, ChainOptions::default(), &SolverOptions::default())
}

pub fn solve_exact_with(params: &ModelParams, chain: ChainOptions, solver: &SolverOptions) -> Result<ExactSolution> {
    let chain = build_chain(params, chain)?;
    let pi = solve_stationary_with(&chain.generator, solver)?;
    Ok(ExactSolution {
        throughput: throughput(&pi, &chain),
        states: chain.states.len(),
        residual: pi.residual,
        iterations: pi.iterations,
        method: pi.method,
    })
}

/// Throughput as a function of population size.
#[derive(Debug, Clone)]
pub struct PopulationCurve {
    pub points: Vec<(u32, f64)>,
    /// Maximum throughput over the curve.
    pub peak: f64,
    pub peak_population: u32,
    /// Throughput at the largest population computed (plateau estimate).
    pub plateau: f64,
}

pub fn sweep_population(params: &ModelParams, populations: impl IntoIterator<Item = u32>) -> Result<PopulationCurve> {
    let mut points = Vec::new();
    for n in populations {
        let p = params.clone().with_peers(n);
        points.push((n, solve_exact(&p)?.throughput));
    }
    Ok(PopulationCurve::from_points(points))
}

impl PopulationCurve {
    pub fn from_points(mut points: Vec<(u32, f64)>) -> Self {
        points.sort_by_key(|&(n, _)| n);
        let (peak_population, peak) =
            points.iter().copied().fold((0, f64::NEG_INFINITY), |best, p| if p.1 > best.1 { p } else { best });
        let plateau = points.last().map_or(f64::NAN, |p| p.1);
        PopulationCurve { points, peak, peak_population, plateau }
    }
}
