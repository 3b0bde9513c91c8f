use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{simulate, SimConfig};
use crate::error::{Result, SwarmError};

/// Steady-state departure rate across independent replications.
#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputEstimate {
    pub mean: f64,
    /// Half-width of the 95% Student-t confidence interval.
    pub ci_halfwidth: f64,
    pub replications: usize,
    pub per_replication: Vec<f64>,
}

impl ThroughputEstimate {
    pub fn covers(&self, value: f64) -> bool {
        (self.mean - value).abs() <= self.ci_halfwidth
    }
}

/// Two-sided quantile `t_{1-α/2, df}`.
pub fn student_t_quantile(confidence: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("degrees of freedom must be positive");
    dist.inverse_cdf(0.5 + confidence / 2.0)
}

pub fn estimate_throughput(config: &SimConfig) -> Result<ThroughputEstimate> {
    config.validate()?;
    if config.replications < 2 {
        return Err(SwarmError::InvalidParams {
            field: "replications",
            reason: "a confidence interval needs at least 2 replications".into(),
        });
    }
    let per_replication = (0..config.replications as u64)
        .into_par_iter()
        .map(|r| simulate(config, r).map(|run| run.throughput(config)))
        .collect::<Result<Vec<f64>>>()?;
    let n = per_replication.len() as f64;
    let mean = per_replication.iter().sum::<f64>() / n;
    let var = per_replication.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let ci_halfwidth = student_t_quantile(0.95, n - 1.0) * (var / n).sqrt();
    Ok(ThroughputEstimate { mean, ci_halfwidth, replications: config.replications, per_replication })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::ModelParams;

    #[test]
    fn t_quantiles() {
        assert!((student_t_quantile(0.95, 1.0) - 12.7062).abs() < 1e-3);
        assert!((student_t_quantile(0.95, 29.0) - 2.0452).abs() < 1e-3);
    }

    #[test]
    fn single_block_swarm_departs_at_publisher_rate() {
        let config = SimConfig {
            horizon: 2000.0,
            warmup: 0.0,
            replications: 8,
            ..SimConfig::new(ModelParams::new(1, 4).with_capacity(1.0))
        };
        let est = estimate_throughput(&config).unwrap();
        assert!((est.mean - 1.0).abs() < 4.0 * est.ci_halfwidth.max(0.01));
        assert!(estimate_throughput(&SimConfig { replications: 1, ..config }).is_err());
    }
}
