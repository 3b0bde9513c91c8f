//! Evaluating an experiment at every sweep point.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde_json::{json, Value};
use swarm_throughput::markov::{solve_exact, PopulationCurve};
use swarm_throughput::queueing::{solve_network, throughput_bound};
use swarm_throughput::sim::{
    estimate_throughput, transient_time_to_leave_one_club, transient_time_to_one_club, TransientResult,
};
use swarm_throughput::{ModelParams, SwarmError};

use crate::config;
use crate::error::{is_numerical, ExpError, Result};
use crate::spec::{Axis, ExperimentSpec, Method, TransientEvent};
use crate::table::{Table, ThroughputRow, TransientRow};

pub const TOOLKIT: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq)]
pub enum PointValue {
    Throughput { throughput: f64, ci_halfwidth: Option<f64>, iterations: Option<usize>, residual: Option<f64> },
    Transient(TransientResult),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub index: usize,
    pub axis_value: Option<f64>,
    pub params: ModelParams,
    pub value: std::result::Result<PointValue, SwarmError>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub spec: ExperimentSpec,
    pub points: Vec<PointOutcome>,
    pub started: SystemTime,
    pub wall_clock: Duration,
}

fn evaluate(spec: &ExperimentSpec, params: &ModelParams) -> std::result::Result<PointValue, SwarmError> {
    match spec.method {
        Method::Markov => solve_exact(params).map(|s| PointValue::Throughput {
            throughput: s.throughput,
            ci_halfwidth: None,
            iterations: Some(s.iterations),
            residual: Some(s.residual),
        }),
        Method::Queueing => solve_network(params).map(|s| PointValue::Throughput {
            throughput: s.lambda_s,
            ci_halfwidth: None,
            iterations: Some(s.iterations),
            residual: Some((s.gamma0 - s.lambda_s).abs() / s.lambda_s),
        }),
        Method::Bound => throughput_bound(params).map(|b| PointValue::Throughput {
            throughput: b,
            ci_halfwidth: None,
            iterations: None,
            residual: None,
        }),
        Method::Simulate => estimate_throughput(&spec.sim_config(params.clone())).map(|e| PointValue::Throughput {
            throughput: e.mean,
            ci_halfwidth: Some(e.ci_halfwidth),
            iterations: None,
            residual: None,
        }),
        Method::Transient => {
            let t = spec.transient.as_ref().expect("validated transient settings");
            let config = spec.sim_config(params.clone());
            let grid = t.grid.points();
            match t.event {
                TransientEvent::Enter => transient_time_to_one_club(&config, t.fraction, grid),
                TransientEvent::Leave => transient_time_to_leave_one_club(&config, t.fraction, grid),
            }
            .map(PointValue::Transient)
        }
    }
}

/// Validates `spec` and evaluates every sweep point in parallel. Points that
/// fail are recorded and do not stop the run.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    spec.validate()?;
    let started = SystemTime::now();
    let clock = Instant::now();
    let points = spec
        .points()
        .into_par_iter()
        .enumerate()
        .map(|(index, (axis_value, params))| {
            let value = evaluate(spec, &params);
            PointOutcome { index, axis_value, params, value }
        })
        .collect();
    Ok(RunOutput { spec: spec.clone(), points, started, wall_clock: clock.elapsed() })
}

impl RunOutput {
    pub fn table(&self) -> Table {
        let spec = &self.spec;
        match &spec.transient {
            Some(t) if spec.method == Method::Transient => {
                let grid = t.grid.points();
                let rows = self
                    .points
                    .iter()
                    .flat_map(|p| {
                        let result = match &p.value {
                            Ok(PointValue::Transient(r)) => Some(r),
                            _ => None,
                        };
                        let censored = result.map(TransientResult::censored);
                        grid.iter().enumerate().map(move |(i, &time)| TransientRow {
                            params: p.params.clone(),
                            event: t.event,
                            fraction: t.fraction,
                            t: time,
                            cdf: result.map(|r| r.cdf[i]),
                            censored,
                            replications: spec.sim.replications,
                            seed: spec.sim.seed,
                        })
                    })
                    .collect();
                Table::Transient(rows)
            }
            _ => Table::Throughput(
                self.points
                    .iter()
                    .map(|p| {
                        let mut row = ThroughputRow {
                            method: spec.method,
                            params: p.params.clone(),
                            throughput: None,
                            ci_halfwidth: None,
                            iterations: None,
                            residual: None,
                            seed: (spec.method == Method::Simulate).then_some(spec.sim.seed),
                        };
                        if let Ok(PointValue::Throughput { throughput, ci_halfwidth, iterations, residual }) = &p.value
                        {
                            row.throughput = Some(*throughput);
                            row.ci_halfwidth = *ci_halfwidth;
                            row.iterations = *iterations;
                            row.residual = *residual;
                        }
                        row
                    })
                    .collect(),
            ),
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = (&PointOutcome, &SwarmError)> {
        self.points.iter().filter_map(|p| p.value.as_ref().err().map(|e| (p, e)))
    }

    /// 0 when every point succeeded, 3 when any point failed numerically,
    /// 2 otherwise.
    pub fn exit_code(&self) -> u8 {
        let mut code = 0;
        for (_, e) in self.failures() {
            code = code.max(if is_numerical(e) { 3 } else { 2 });
        }
        code
    }

    /// Peak and plateau of a throughput curve over the population.
    pub fn population_curve(&self) -> Option<PopulationCurve> {
        let sweep = self.spec.sweep.as_ref()?;
        if sweep.axis != Axis::Peers || !matches!(self.spec.method, Method::Markov | Method::Simulate) {
            return None;
        }
        let points: Vec<(u32, f64)> = self
            .points
            .iter()
            .filter_map(|p| match p.value {
                Ok(PointValue::Throughput { throughput, .. }) => Some((p.params.peers, throughput)),
                _ => None,
            })
            .collect();
        (!points.is_empty()).then(|| PopulationCurve::from_points(points))
    }

    pub fn manifest(&self) -> Value {
        let spec = &self.spec;
        let stochastic = spec.method.is_stochastic();
        let rows_per_point = match &spec.transient {
            Some(t) if spec.method == Method::Transient => t.grid.points().len(),
            _ => 1,
        };
        let points: Vec<Value> = self
            .points
            .iter()
            .map(|p| {
                let (status, error) = match &p.value {
                    Ok(_) => ("ok", Value::Null),
                    Err(e) => (if is_numerical(e) { "numerical_failure" } else { "error" }, json!(e.to_string())),
                };
                json!({
                    "index": p.index,
                    "axis_value": p.axis_value,
                    "rows": [p.index * rows_per_point, (p.index + 1) * rows_per_point],
                    "seed": stochastic.then_some(spec.sim.seed),
                    "replications": stochastic.then_some(spec.sim.replications),
                    "status": status,
                    "error": error,
                })
            })
            .collect();
        let curve = self
            .population_curve()
            .map(|c| json!({ "peak": c.peak, "peak_population": c.peak_population, "plateau_lambda_s": c.plateau }));
        let started = self.started.duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64());
        json!({
            "toolkit": TOOLKIT,
            "version": VERSION,
            "name": spec.name,
            "method": spec.method.as_str(),
            "config": config::render(spec),
            "seeds": if stochastic { vec![spec.sim.seed] } else { vec![] },
            "started_unix": started,
            "wall_clock_seconds": self.wall_clock.as_secs_f64(),
            "output": spec.output,
            "population_curve": curve,
            "points": points,
        })
    }

    /// Writes the CSV to `path` and the manifest next to it.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| ExpError::io(dir, e))?;
        }
        std::fs::write(path, self.table().to_csv_string()).map_err(|e| ExpError::io(path, e))?;
        let manifest_path = manifest_path(path);
        let text = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes");
        std::fs::write(&manifest_path, text + "\n").map_err(|e| ExpError::io(&manifest_path, e))?;
        Ok(manifest_path)
    }
}

/// `results/fig1.csv` -> `results/fig1.manifest.json`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

/// Recovers the experiment recorded in a manifest.
pub fn spec_from_manifest(text: &str) -> Result<ExperimentSpec> {
    let value: Value = serde_json::from_str(text).map_err(|e| ExpError::Manifest(e.to_string()))?;
    let config = value
        .get("config")
        .and_then(Value::as_str)
        .ok_or_else(|| ExpError::Manifest("missing `config` text".into()))?;
    config::parse(config)
}
