//! Flat `key = value` experiment files.
//!
//! ```text
//! # comments run to the end of the line
//! [experiment]
//! name = validation
//! method = markov
//!
//! [params]
//! blocks = 3
//! publisher_capacity = 0.5
//!
//! [sweep]
//! axis = N
//! from = 2
//! to = 30
//! step = 1
//! ```
//!
//! Sections are `experiment`, `params`, `sweep`, `sim` and `transient`. Each
//! may appear once and each key at most once. Missing parameters take the
//! library defaults; `endgame_rate` defaults to `peer_rate`.

use std::collections::HashMap;
use std::fmt::Write as _;

use swarm_throughput::sim::InitialCondition;
use swarm_throughput::{ModelParams, SwarmState};

use crate::error::{ExpError, Result};
use crate::spec::{ExperimentSpec, Method, Range, SimSettings, Sweep, TransientSettings};

const SECTIONS: [(&str, &[&str]); 5] = [
    ("experiment", &["name", "method", "output"]),
    (
        "params",
        &[
            "blocks",
            "peers",
            "publisher_capacity",
            "peer_rate",
            "endgame_rate",
            "publisher_policy",
            "peer_policy",
            "shield_newcomers",
            "linger_rate",
        ],
    ),
    ("sweep", &["axis", "from", "to", "step"]),
    ("sim", &["seed", "horizon", "warmup", "replications", "initial"]),
    ("transient", &["event", "fraction", "grid"]),
];

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

struct Document<'a> {
    headers: HashMap<&'static str, usize>,
    entries: HashMap<(&'static str, &'static str), Entry<'a>>,
}

impl<'a> Document<'a> {
    fn parse(text: &'a str) -> Result<Self> {
        let mut doc = Document { headers: HashMap::new(), entries: HashMap::new() };
        let mut section: Option<(&'static str, &'static [&'static str])> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| config_err(line, name, "section header must end with `]`"))?
                    .trim();
                let (known, keys) = SECTIONS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| config_err(line, name, "unknown section"))?;
                if doc.headers.insert(known, line).is_some() {
                    return Err(config_err(line, name, "section appears twice"));
                }
                section = Some((known, keys));
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| config_err(line, content, "expected `key = value`"))?;
            let key = key.trim();
            let (name, keys) = section.ok_or_else(|| config_err(line, key, "key outside of any section"))?;
            let known = keys
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| config_err(line, key, format!("unknown key in [{name}]")))?;
            let entry = Entry { line, value: value.trim() };
            if doc.entries.insert((name, known), entry).is_some() {
                return Err(config_err(line, key, "key given twice"));
            }
        }
        Ok(doc)
    }

    fn get(&self, section: &'static str, key: &'static str) -> Option<&Entry<'a>> {
        self.entries.get(&(section, key))
    }

    fn value<T>(
        &self,
        section: &'static str,
        key: &'static str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        self.get(section, key).map(|e| parse(e.value).map_err(|m| config_err(e.line, key, m))).transpose()
    }

    fn required<T>(
        &self,
        section: &'static str,
        key: &'static str,
        parse: impl Fn(&str) -> std::result::Result<T, String>,
    ) -> Result<T> {
        self.value(section, key, parse)?.ok_or_else(|| {
            let line = self.headers.get(section).copied().unwrap_or(1);
            config_err(line, key, format!("missing from [{section}]"))
        })
    }

    /// Line to blame for a validation error on `field`.
    fn line_of(&self, field: &str) -> usize {
        if let Some(&line) = self.headers.get(field) {
            return line;
        }
        let key_line = self.entries.iter().find(|((_, k), _)| *k == field).map(|(_, e)| e.line);
        key_line.or_else(|| self.headers.get("params").copied()).unwrap_or(1)
    }
}

fn config_err(line: usize, field: &str, message: impl Into<String>) -> ExpError {
    ExpError::Config { line, field: field.to_string(), message: message.into() }
}

fn number(s: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("`{s}` is not a number"))
}

fn integer<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse::<T>().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn boolean(s: &str) -> std::result::Result<bool, String> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

fn via<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    s.parse::<T>().map_err(|e| e.to_string())
}

pub fn parse_initial(s: &str) -> std::result::Result<InitialCondition, String> {
    match s.trim() {
        "all_empty" => Ok(InitialCondition::AllEmpty),
        "one_club" => Ok(InitialCondition::OneClub),
        other => other.parse::<SwarmState>().map(InitialCondition::Custom).map_err(|e| e.to_string()),
    }
}

pub fn render_initial(initial: &InitialCondition) -> String {
    match initial {
        InitialCondition::AllEmpty => "all_empty".into(),
        InitialCondition::OneClub => "one_club".into(),
        InitialCondition::Custom(s) => s.to_string(),
    }
}

/// Parses and validates an experiment file.
pub fn parse(text: &str) -> Result<ExperimentSpec> {
    let doc = Document::parse(text)?;
    let method: Method = doc.required("experiment", "method", via)?;
    let name = doc.value("experiment", "name", |s| Ok(s.to_string()))?.unwrap_or_else(|| method.as_str().into());
    let output = doc.value("experiment", "output", |s| Ok(s.to_string()))?;

    let d = ModelParams::default();
    let peer_rate = doc.value("params", "peer_rate", number)?.unwrap_or(d.peer_rate);
    let params = ModelParams {
        blocks: doc.value("params", "blocks", integer)?.unwrap_or(d.blocks),
        peers: doc.value("params", "peers", integer)?.unwrap_or(d.peers),
        publisher_capacity: doc.value("params", "publisher_capacity", number)?.unwrap_or(d.publisher_capacity),
        peer_rate,
        endgame_rate: doc.value("params", "endgame_rate", number)?.unwrap_or(peer_rate),
        publisher_policy: doc.value("params", "publisher_policy", via)?.unwrap_or(d.publisher_policy),
        peer_policy: doc.value("params", "peer_policy", via)?.unwrap_or(d.peer_policy),
        shield_newcomers: doc.value("params", "shield_newcomers", boolean)?.unwrap_or(d.shield_newcomers),
        linger_rate: doc.value("params", "linger_rate", number)?.unwrap_or(d.linger_rate),
    };

    let sweep = if doc.headers.contains_key("sweep") {
        let range = Range {
            from: doc.required("sweep", "from", number)?,
            to: doc.required("sweep", "to", number)?,
            step: doc.required("sweep", "step", number)?,
        };
        Some(Sweep { axis: doc.required("sweep", "axis", via)?, range })
    } else {
        None
    };

    let s = SimSettings::default();
    let sim = SimSettings {
        seed: doc.value("sim", "seed", integer)?.unwrap_or(s.seed),
        horizon: doc.value("sim", "horizon", number)?.unwrap_or(s.horizon),
        warmup: doc.value("sim", "warmup", number)?.unwrap_or(s.warmup),
        replications: doc.value("sim", "replications", integer)?.unwrap_or(s.replications),
        initial: doc.value("sim", "initial", parse_initial)?,
    };

    let transient = if doc.headers.contains_key("transient") {
        Some(TransientSettings {
            event: doc.required("transient", "event", via)?,
            fraction: doc.required("transient", "fraction", number)?,
            grid: doc.required("transient", "grid", via)?,
        })
    } else {
        None
    };

    let spec = ExperimentSpec { name, method, params, sweep, sim, transient, output };
    spec.validate().map_err(|e| match e {
        ExpError::Spec { field, message } => ExpError::Config { line: doc.line_of(&field), field, message },
        other => other,
    })?;
    Ok(spec)
}

/// Canonical text of a spec; `parse(&render(s)) == s` for every valid spec.
pub fn render(spec: &ExperimentSpec) -> String {
    let mut out = String::new();
    let p = &spec.params;
    let _ = writeln!(out, "[experiment]\nname = {}\nmethod = {}", spec.name, spec.method);
    if let Some(path) = &spec.output {
        let _ = writeln!(out, "output = {path}");
    }
    let _ = writeln!(
        out,
        "\n[params]\nblocks = {}\npeers = {}\npublisher_capacity = {}\npeer_rate = {}\nendgame_rate = {}\n\
         publisher_policy = {}\npeer_policy = {}\nshield_newcomers = {}\nlinger_rate = {}",
        p.blocks,
        p.peers,
        p.publisher_capacity,
        p.peer_rate,
        p.endgame_rate,
        p.publisher_policy,
        p.peer_policy,
        p.shield_newcomers,
        p.linger_rate,
    );
    if let Some(s) = &spec.sweep {
        let _ = writeln!(
            out,
            "\n[sweep]\naxis = {}\nfrom = {}\nto = {}\nstep = {}",
            s.axis, s.range.from, s.range.to, s.range.step
        );
    }
    let s = &spec.sim;
    let _ = writeln!(
        out,
        "\n[sim]\nseed = {}\nhorizon = {}\nwarmup = {}\nreplications = {}",
        s.seed, s.horizon, s.warmup, s.replications
    );
    if let Some(initial) = &s.initial {
        let _ = writeln!(out, "initial = {}", render_initial(initial));
    }
    if let Some(t) = &spec.transient {
        let _ = writeln!(out, "\n[transient]\nevent = {}\nfraction = {}\ngrid = {}", t.event, t.fraction, t.grid);
    }
    out
}
