//! Joining two throughput curves on their sweep axis.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{ExpError, Result};
use crate::format::g12;
use crate::spec::{Axis, Method};
use crate::table::{Table, ThroughputRow};

pub const COMPARE_HEADER: [&str; 9] = [
    "axis",
    "method_a",
    "throughput_a",
    "ci_halfwidth_a",
    "method_b",
    "throughput_b",
    "ci_halfwidth_b",
    "abs_diff",
    "rel_error",
];

/// Throughput rows keyed by the value of one axis.
#[derive(Debug, Clone)]
pub struct Series {
    pub axis: Axis,
    pub rows: Vec<ThroughputRow>,
}

impl Series {
    pub fn new(axis: Axis, table: Table) -> Result<Self> {
        match table {
            Table::Throughput(rows) => Ok(Series { axis, rows }),
            Table::Transient(_) => Err(ExpError::spec("method", "transient tables cannot be compared")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub axis_value: f64,
    pub method_a: Method,
    pub throughput_a: Option<f64>,
    pub ci_halfwidth_a: Option<f64>,
    pub method_b: Method,
    pub throughput_b: Option<f64>,
    pub ci_halfwidth_b: Option<f64>,
    pub abs_diff: Option<f64>,
    /// `|a - b| / |b|`, with `b` taken as the reference.
    pub rel_error: Option<f64>,
}

/// Rows of `a` whose axis value also appears in `b`, in the order of `a`.
pub fn compare(a: &Series, b: &Series) -> Result<Vec<CompareRow>> {
    if a.axis != b.axis {
        return Err(ExpError::AxisMismatch { left: a.axis.to_string(), right: b.axis.to_string() });
    }
    let axis = a.axis;
    let index: HashMap<String, &ThroughputRow> = b.rows.iter().map(|r| (g12(axis.value(&r.params)), r)).collect();
    let rows = a
        .rows
        .iter()
        .filter_map(|ra| {
            let x = axis.value(&ra.params);
            let rb = index.get(&g12(x))?;
            let diff = ra.throughput.zip(rb.throughput).map(|(p, q)| (p - q).abs());
            let rel = diff.zip(rb.throughput).map(|(d, q)| if d == 0.0 { 0.0 } else { d / q.abs() });
            Some(CompareRow {
                axis_value: x,
                method_a: ra.method,
                throughput_a: ra.throughput,
                ci_halfwidth_a: ra.ci_halfwidth,
                method_b: rb.method,
                throughput_b: rb.throughput,
                ci_halfwidth_b: rb.ci_halfwidth,
                abs_diff: diff,
                rel_error: rel,
            })
        })
        .collect();
    Ok(rows)
}

pub fn write_compare_csv<W: Write>(rows: &[CompareRow], out: W) -> Result<()> {
    let opt = |x: Option<f64>| x.map(g12).unwrap_or_default();
    let mut w = csv::Writer::from_writer(out);
    let mut write = || -> csv::Result<()> {
        w.write_record(COMPARE_HEADER)?;
        for r in rows {
            w.write_record([
                g12(r.axis_value),
                r.method_a.to_string(),
                opt(r.throughput_a),
                opt(r.ci_halfwidth_a),
                r.method_b.to_string(),
                opt(r.throughput_b),
                opt(r.ci_halfwidth_b),
                opt(r.abs_diff),
                opt(r.rel_error),
            ])?;
        }
        w.flush()?;
        Ok(())
    };
    write().map_err(|e| ExpError::Csv { line: 0, message: e.to_string() })
}
