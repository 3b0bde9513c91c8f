//! CSV tables produced by a run.
//!
//! Throughput tables have the columns
//!
//! ```text
//! method,K,N,U,mu,mu_prime,publisher_policy,peer_policy,shield,gamma,
//! throughput,ci_halfwidth,iterations,residual,seed
//! ```
//!
//! one row per sweep point. `ci_halfwidth` and `seed` are filled for
//! simulation only, `iterations` and `residual` for the exact and queueing
//! solvers. A failed point keeps its row with an empty `throughput`.
//!
//! Transient tables share the first ten columns, followed by
//! `event,fraction,t,cdf,censored,replications,seed`, one row per sweep point
//! and grid time. Floats are written with 12 significant digits.

use std::io::{Read, Write};

use swarm_throughput::{ModelParams, PeerPolicy, PublisherPolicy};

use crate::error::{ExpError, Result};
use crate::format::g12;
use crate::spec::{Method, TransientEvent};

pub const THROUGHPUT_HEADER: [&str; 15] = [
    "method",
    "K",
    "N",
    "U",
    "mu",
    "mu_prime",
    "publisher_policy",
    "peer_policy",
    "shield",
    "gamma",
    "throughput",
    "ci_halfwidth",
    "iterations",
    "residual",
    "seed",
];

pub const TRANSIENT_HEADER: [&str; 17] = [
    "method",
    "K",
    "N",
    "U",
    "mu",
    "mu_prime",
    "publisher_policy",
    "peer_policy",
    "shield",
    "gamma",
    "event",
    "fraction",
    "t",
    "cdf",
    "censored",
    "replications",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputRow {
    pub method: Method,
    pub params: ModelParams,
    pub throughput: Option<f64>,
    pub ci_halfwidth: Option<f64>,
    pub iterations: Option<usize>,
    pub residual: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientRow {
    pub params: ModelParams,
    pub event: TransientEvent,
    pub fraction: f64,
    pub t: f64,
    /// Empirical `P(T ≤ t)`.
    pub cdf: Option<f64>,
    /// Replications that never reached the event before the horizon.
    pub censored: Option<usize>,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Table {
    Throughput(Vec<ThroughputRow>),
    Transient(Vec<TransientRow>),
}

impl Table {
    pub fn len(&self) -> usize {
        match self {
            Table::Throughput(r) => r.len(),
            Table::Transient(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let res = match self {
            Table::Throughput(rows) => {
                w.write_record(THROUGHPUT_HEADER).and_then(|_| rows.iter().try_for_each(|r| w.write_record(r.fields())))
            }
            Table::Transient(rows) => {
                w.write_record(TRANSIENT_HEADER).and_then(|_| rows.iter().try_for_each(|r| w.write_record(r.fields())))
            }
        };
        res.and_then(|_| w.flush().map_err(Into::into)).map_err(csv_error)
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(g12).unwrap_or_default()
}

fn opt_int<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn scenario_fields(method: &str, p: &ModelParams) -> Vec<String> {
    vec![
        method.to_string(),
        p.blocks.to_string(),
        p.peers.to_string(),
        g12(p.publisher_capacity),
        g12(p.peer_rate),
        g12(p.endgame_rate),
        p.publisher_policy.to_string(),
        p.peer_policy.to_string(),
        p.shield_newcomers.to_string(),
        g12(p.linger_rate),
    ]
}

impl ThroughputRow {
    pub fn fields(&self) -> Vec<String> {
        let mut f = scenario_fields(self.method.as_str(), &self.params);
        f.extend([
            opt(self.throughput),
            opt(self.ci_halfwidth),
            opt_int(self.iterations),
            opt(self.residual),
            opt_int(self.seed),
        ]);
        f
    }
}

impl TransientRow {
    pub fn fields(&self) -> Vec<String> {
        let mut f = scenario_fields(Method::Transient.as_str(), &self.params);
        f.extend([
            self.event.to_string(),
            g12(self.fraction),
            g12(self.t),
            opt(self.cdf),
            opt_int(self.censored),
            self.replications.to_string(),
            self.seed.to_string(),
        ]);
        f
    }
}

fn csv_error(e: csv::Error) -> ExpError {
    let line = e.position().map_or(0, |p| p.line());
    ExpError::Csv { line, message: e.to_string() }
}

struct Fields<'a> {
    record: &'a csv::StringRecord,
    line: u64,
}

impl Fields<'_> {
    fn raw(&self, i: usize) -> &str {
        self.record.get(i).unwrap_or("")
    }

    fn err(&self, i: usize, what: &str) -> ExpError {
        ExpError::Csv {
            line: self.line,
            message: format!("column `{}`: `{}` is not {what}", THROUGHPUT_HEADER[i], self.raw(i)),
        }
    }

    fn parse<T: std::str::FromStr>(&self, i: usize, what: &str) -> Result<T> {
        self.raw(i).parse().map_err(|_| self.err(i, what))
    }

    fn optional<T: std::str::FromStr>(&self, i: usize, what: &str) -> Result<Option<T>> {
        if self.raw(i).is_empty() {
            Ok(None)
        } else {
            self.parse(i, what).map(Some)
        }
    }
}

/// Reads a throughput table written by [`Table::write_csv`].
pub fn read_throughput_csv<R: Read>(input: R) -> Result<Vec<ThroughputRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers().map_err(csv_error)?.clone();
    if header.iter().ne(THROUGHPUT_HEADER) {
        return Err(ExpError::Csv { line: 1, message: format!("expected header `{}`", THROUGHPUT_HEADER.join(",")) });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let f = Fields { line: record.position().map_or(0, |p| p.line()), record: &record };
        let method: Method = f.parse(0, "a method")?;
        let params = ModelParams {
            blocks: f.parse(1, "an integer")?,
            peers: f.parse(2, "an integer")?,
            publisher_capacity: f.parse(3, "a number")?,
            peer_rate: f.parse(4, "a number")?,
            endgame_rate: f.parse(5, "a number")?,
            publisher_policy: f.parse::<PublisherPolicy>(6, "a publisher policy")?,
            peer_policy: f.parse::<PeerPolicy>(7, "a peer policy")?,
            shield_newcomers: f.parse(8, "true or false")?,
            linger_rate: f.parse(9, "a number")?,
        };
        rows.push(ThroughputRow {
            method,
            params,
            throughput: f.optional(10, "a number")?,
            ci_halfwidth: f.optional(11, "a number")?,
            iterations: f.optional(12, "an integer")?,
            residual: f.optional(13, "a number")?,
            seed: f.optional(14, "an integer")?,
        });
    }
    Ok(rows)
}
