//! Experiment descriptions and their validation.

use std::fmt;
use std::str::FromStr;

use swarm_throughput::enumerate::{check_cap, DEFAULT_STATE_CAP};
use swarm_throughput::sim::{InitialCondition, SimConfig};
use swarm_throughput::ModelParams;

use crate::error::{ExpError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Exact stationary throughput of the Markov chain.
    Markov,
    /// Fixed point of the queueing approximation.
    Queueing,
    /// Steady-state throughput from simulation replications.
    Simulate,
    /// Closed-form large-population limit.
    Bound,
    /// First-passage time distribution of a one-club event, by simulation.
    Transient,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::Markov, Method::Queueing, Method::Simulate, Method::Bound, Method::Transient];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Markov => "markov",
            Method::Queueing => "queueing",
            Method::Simulate => "simulate",
            Method::Bound => "bound",
            Method::Transient => "transient",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(self, Method::Simulate | Method::Transient)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown method `{s}` (expected markov, queueing, simulate, bound or transient)"))
    }
}

/// Scenario parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    /// Peer population `N`.
    Peers,
    /// Block count `K`.
    Blocks,
    /// Publisher capacity `U`.
    Capacity,
    /// `1/μ'`; each point sets the end-game rate to `1/x`.
    MuPrimeInverse,
    /// Linger rate `γ`.
    Gamma,
}

impl Axis {
    pub const ALL: [Axis; 5] = [Axis::Peers, Axis::Blocks, Axis::Capacity, Axis::MuPrimeInverse, Axis::Gamma];

    pub fn as_str(self) -> &'static str {
        match self {
            Axis::Peers => "N",
            Axis::Blocks => "K",
            Axis::Capacity => "U",
            Axis::MuPrimeInverse => "mu_prime_inverse",
            Axis::Gamma => "gamma",
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Axis::Peers | Axis::Blocks)
    }

    pub fn apply(self, params: &ModelParams, value: f64) -> ModelParams {
        let mut p = params.clone();
        match self {
            Axis::Peers => p.peers = value as u32,
            Axis::Blocks => p.blocks = value as usize,
            Axis::Capacity => p.publisher_capacity = value,
            Axis::MuPrimeInverse => p.endgame_rate = 1.0 / value,
            Axis::Gamma => p.linger_rate = value,
        }
        p
    }

    /// Value of this axis in a scenario.
    pub fn value(self, params: &ModelParams) -> f64 {
        match self {
            Axis::Peers => params.peers as f64,
            Axis::Blocks => params.blocks as f64,
            Axis::Capacity => params.publisher_capacity,
            Axis::MuPrimeInverse => 1.0 / params.endgame_rate,
            Axis::Gamma => params.linger_rate,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Axis::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown axis `{s}` (expected N, K, U, mu_prime_inverse or gamma)"))
    }
}

/// Inclusive arithmetic range `from, from + step, ..., <= to`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Range {
    pub from: f64,
    pub to: f64,
    pub step: f64,
}

impl Range {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if !(self.from.is_finite() && self.to.is_finite() && self.step.is_finite()) {
            return Err("range bounds and step must be finite".into());
        }
        if self.step <= 0.0 {
            return Err(format!("step must be positive, got {}", self.step));
        }
        if self.from > self.to {
            return Err(format!("empty range {}..{}", self.from, self.to));
        }
        if (self.to - self.from) / self.step > 1e6 {
            return Err("more than a million points".into());
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let n = ((self.to - self.from) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.from + i as f64 * self.step).collect()
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.from, self.to, self.step)
    }
}

impl FromStr for Range {
    type Err = String;

    /// Parses `from:to:step`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [from, to, step] = parts.as_slice() else {
            return Err(format!("expected `from:to:step`, found `{s}`"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
        let range = Range { from: num(from)?, to: num(to)?, step: num(step)? };
        range.validate()?;
        Ok(range)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub axis: Axis,
    pub range: Range,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        self.range.points()
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        self.range.validate()?;
        if self.range.from <= 0.0 {
            return Err(format!("sweep values must be positive, got {}", self.range.from));
        }
        if self.axis.is_integer() && (self.range.from.fract() != 0.0 || self.range.step.fract() != 0.0) {
            return Err(format!("axis {} takes integer values", self.axis));
        }
        Ok(())
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.axis, self.range)
    }
}

impl FromStr for Sweep {
    type Err = String;

    /// Parses `axis:from:to:step`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (axis, range) = s.split_once(':').ok_or_else(|| format!("expected `axis:from:to:step`, found `{s}`"))?;
        let sweep = Sweep { axis: axis.parse()?, range: range.parse()? };
        sweep.validate()?;
        Ok(sweep)
    }
}

/// Simulation settings; ignored by the analytic methods.
#[derive(Debug, Clone, PartialEq)]
pub struct SimSettings {
    pub seed: u64,
    pub horizon: f64,
    pub warmup: f64,
    pub replications: usize,
    /// `None` picks all-empty, or the one-club state when measuring how long
    /// a one-club persists.
    pub initial: Option<InitialCondition>,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings { seed: 0, horizon: 1000.0, warmup: 100.0, replications: 10, initial: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransientEvent {
    /// Time until the one-club holds `fraction · N` peers, starting empty.
    Enter,
    /// Time until the one-club drops below `fraction · N`, starting in it.
    Leave,
}

impl TransientEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            TransientEvent::Enter => "enter",
            TransientEvent::Leave => "leave",
        }
    }
}

impl fmt::Display for TransientEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TransientEvent {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim().to_ascii_lowercase().as_str() {
            "enter" => Ok(TransientEvent::Enter),
            "leave" => Ok(TransientEvent::Leave),
            _ => Err(format!("unknown event `{s}` (expected enter or leave)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientSettings {
    pub event: TransientEvent,
    pub fraction: f64,
    /// Times at which the empirical CDF is reported.
    pub grid: Range,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub method: Method,
    pub params: ModelParams,
    pub sweep: Option<Sweep>,
    pub sim: SimSettings,
    pub transient: Option<TransientSettings>,
    pub output: Option<String>,
}

impl ExperimentSpec {
    pub fn new(method: Method, params: ModelParams) -> Self {
        ExperimentSpec {
            name: method.as_str().into(),
            method,
            params,
            sweep: None,
            sim: SimSettings::default(),
            transient: None,
            output: None,
        }
    }

    /// Scenario of every sweep point, with the axis value when sweeping.
    pub fn points(&self) -> Vec<(Option<f64>, ModelParams)> {
        match &self.sweep {
            None => vec![(None, self.params.clone())],
            Some(s) => s.points().into_iter().map(|x| (Some(x), s.axis.apply(&self.params, x))).collect(),
        }
    }

    pub fn initial_condition(&self) -> InitialCondition {
        match (&self.sim.initial, &self.transient) {
            (Some(i), _) => i.clone(),
            (None, Some(t)) if t.event == TransientEvent::Leave => InitialCondition::OneClub,
            _ => InitialCondition::AllEmpty,
        }
    }

    pub fn sim_config(&self, params: ModelParams) -> SimConfig {
        let warmup = if self.method == Method::Transient { 0.0 } else { self.sim.warmup };
        SimConfig {
            params,
            seed: self.sim.seed,
            horizon: self.sim.horizon,
            warmup,
            replications: self.sim.replications,
            initial: self.initial_condition(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() || self.name.contains(['\n', '#']) {
            return Err(ExpError::spec("name", "must be non-empty and on one line without `#`"));
        }
        if self.output.as_ref().is_some_and(|o| o.trim().is_empty() || o.contains(['\n', '#'])) {
            return Err(ExpError::spec("output", "must be non-empty and on one line without `#`"));
        }
        if let Some(sweep) = &self.sweep {
            sweep.validate().map_err(|m| ExpError::spec("sweep", m))?;
        }
        self.validate_method()?;
        for (value, params) in self.points() {
            let at = |m: String| match value {
                Some(v) => format!("{m} (at {} = {v})", self.sweep.as_ref().map_or("", |s| s.axis.as_str())),
                None => m,
            };
            params.validate().map_err(|e| match e {
                swarm_throughput::SwarmError::InvalidParams { field, reason } => ExpError::spec(field, at(reason)),
                other => ExpError::spec("params", at(other.to_string())),
            })?;
            match self.method {
                Method::Markov => {
                    check_cap(&params, DEFAULT_STATE_CAP).map_err(|e| ExpError::spec("sweep", at(e.to_string())))?;
                }
                Method::Queueing | Method::Bound => {
                    if params.blocks < 2 {
                        return Err(ExpError::spec("blocks", at("the queueing model needs at least 2 blocks".into())));
                    }
                    if params.endgame_rate <= 0.0 {
                        return Err(ExpError::spec("endgame_rate", at("must be positive".into())));
                    }
                }
                Method::Simulate | Method::Transient => {
                    self.sim_config(params).validate().map_err(|e| ExpError::spec("sim", at(e.to_string())))?;
                }
            }
        }
        Ok(())
    }

    fn validate_method(&self) -> Result<()> {
        let sim = &self.sim;
        if self.method.is_stochastic() {
            if !(sim.horizon.is_finite() && sim.horizon > 0.0) {
                return Err(ExpError::spec("horizon", format!("must be positive and finite, got {}", sim.horizon)));
            }
            if self.method == Method::Simulate && sim.replications < 2 {
                return Err(ExpError::spec("replications", "a confidence interval needs at least 2 replications"));
            }
        }
        match (self.method, &self.transient) {
            (Method::Transient, None) => {
                return Err(ExpError::spec("transient", "the transient method needs event settings"))
            }
            (Method::Transient, Some(t)) => {
                if !(t.fraction > 0.0 && t.fraction <= 1.0) {
                    return Err(ExpError::spec("fraction", format!("must lie in (0, 1], got {}", t.fraction)));
                }
                t.grid.validate().map_err(|m| ExpError::spec("grid", m))?;
                if t.grid.from < 0.0 || t.grid.to > sim.horizon {
                    return Err(ExpError::spec("grid", format!("times must lie in [0, horizon = {}]", sim.horizon)));
                }
                let initial = self.initial_condition();
                match t.event {
                    TransientEvent::Enter if initial == InitialCondition::OneClub => {
                        return Err(ExpError::spec("initial", "entry times must start outside the one-club"));
                    }
                    TransientEvent::Leave if initial == InitialCondition::AllEmpty => {
                        return Err(ExpError::spec("initial", "exit times must start inside the one-club"));
                    }
                    _ => {}
                }
            }
            (_, Some(_)) => {
                return Err(ExpError::spec("transient", "event settings only apply to the transient method"))
            }
            _ => {}
        }
        Ok(())
    }
}
