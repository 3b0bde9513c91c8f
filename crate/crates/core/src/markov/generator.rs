//! Sparse infinitesimal generator over enumerated swarm states.

use std::collections::HashMap;

use super::rates::{transitions_into, Transition};
use crate::enumerate::{check_cap, enumerate_lumped_states_capped, enumerate_states_capped, DEFAULT_STATE_CAP};
use crate::error::{Result, SwarmError};
use crate::lumping::lump_state;
use crate::params::ModelParams;
use crate::state::SwarmState;

/// Off-diagonal rates in compressed-row form; the diagonal is stored
/// explicitly as minus the row sum.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub(crate) row_start: Vec<usize>,
    pub(crate) cols: Vec<usize>,
    rates: Vec<f64>,
    diagonal: Vec<f64>,
}

impl GeneratorMatrix {
    /// Builds a generator from off-diagonal `(row, col, rate)` triples.
    /// Duplicate entries are summed; `row == col` entries are dropped.
    pub fn from_entries(dimension: usize, entries: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dimension];
        for (r, c, rate) in entries {
            if r >= dimension || c >= dimension {
                return Err(SwarmError::InvalidState(format!("entry ({r},{c}) outside dimension {dimension}")));
            }
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(SwarmError::InvalidState(format!(
                    "rate {rate} at ({r},{c}) is not a finite non-negative value"
                )));
            }
            if r != c && rate > 0.0 {
                rows[r].push((c, rate));
            }
        }
        Ok(Self::from_rows(rows))
    }

    fn from_rows(mut rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dimension = rows.len();
        let mut row_start = Vec::with_capacity(dimension + 1);
        let mut cols = Vec::new();
        let mut rates = Vec::new();
        let mut diagonal = Vec::with_capacity(dimension);
        row_start.push(0);
        for row in rows.iter_mut() {
            row.sort_by_key(|&(c, _)| c);
            let mut sum = 0.0;
            let mut i = 0;
            while i < row.len() {
                let (c, mut rate) = row[i];
                i += 1;
                while i < row.len() && row[i].0 == c {
                    rate += row[i].1;
                    i += 1;
                }
                cols.push(c);
                rates.push(rate);
                sum += rate;
            }
            diagonal.push(-sum);
            row_start.push(cols.len());
        }
        GeneratorMatrix { row_start, cols, rates, diagonal }
    }

    pub fn dimension(&self) -> usize {
        self.diagonal.len()
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Off-diagonal entries of `row` as `(col, rate)`.
    pub fn row(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_start[row]..self.row_start[row + 1];
        self.cols[span.clone()].iter().copied().zip(self.rates[span].iter().copied())
    }

    /// All off-diagonal entries as `(row, col, rate)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dimension()).flat_map(move |r| self.row(r).map(move |(c, q)| (r, c, q)))
    }

    /// Largest relative row-sum defect, `|Σ_j q_ij| / max(1, |q_ii|)`.
    pub fn max_row_sum_defect(&self) -> f64 {
        (0..self.dimension())
            .map(|r| {
                let off: f64 = self.row(r).map(|(_, q)| q).sum();
                (off + self.diagonal[r]).abs() / self.diagonal[r].abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }

    /// `x Q` for a row vector `x`.
    pub fn left_multiply(&self, x: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = x.iter().zip(&self.diagonal).map(|(a, d)| a * d).collect();
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for (c, q) in self.row(r) {
                y[c] += xr * q;
            }
        }
        y
    }

    /// Transposed adjacency (incoming entries per column).
    pub(crate) fn columns(&self) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
        let n = self.dimension();
        let mut count = vec![0usize; n + 1];
        for &c in &self.cols {
            count[c + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut rows = vec![0usize; self.cols.len()];
        let mut vals = vec![0.0; self.cols.len()];
        for r in 0..n {
            for (c, q) in self.row(r) {
                rows[fill[c]] = r;
                vals[fill[c]] = q;
                fill[c] += 1;
            }
        }
        (count, rows, vals)
    }

    /// Restriction to `keep` (indices into this matrix), renumbered in order.
    pub fn restrict(&self, keep: &[usize]) -> GeneratorMatrix {
        let mut index = vec![usize::MAX; self.dimension()];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        let rows = keep
            .iter()
            .map(|&old| self.row(old).filter(|&(c, _)| index[c] != usize::MAX).map(|(c, q)| (index[c], q)).collect())
            .collect();
        let mut m = Self::from_rows(rows);
        // keep the original exit rates so the restriction stays a sub-generator
        for (new, &old) in keep.iter().enumerate() {
            m.diagonal[new] = self.diagonal[old];
        }
        m
    }
}

/// How the state space of a chain is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainOptions {
    pub lumped: bool,
    /// Only states reachable from the all-newcomer state.
    pub reachable_only: bool,
    pub state_cap: u128,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions { lumped: true, reachable_only: true, state_cap: DEFAULT_STATE_CAP }
    }
}

/// A generator together with the states it is indexed by and the per-state
/// departure rates needed to compute throughput.
#[derive(Debug, Clone)]
pub struct SwarmChain {
    pub params: ModelParams,
    pub lumped: bool,
    pub states: Vec<SwarmState>,
    pub generator: GeneratorMatrix,
    /// Total departure rate out of each state, including departures that
    /// return to the same (lumped) state.
    pub departure_rates: Vec<f64>,
}

impl SwarmChain {
    pub fn index_of(&self, state: &SwarmState) -> Option<usize> {
        let key = if self.lumped { lump_state(state) } else { state.clone() };
        self.states.iter().position(|s| *s == key)
    }
}

pub fn build_generator(params: &ModelParams, lumped: bool) -> Result<SwarmChain> {
    build_chain(params, ChainOptions { lumped, ..ChainOptions::default() })
}

pub fn build_chain(params: &ModelParams, options: ChainOptions) -> Result<SwarmChain> {
    check_cap(params, options.state_cap)?;
    let canon = |s: SwarmState| if options.lumped { lump_state(&s) } else { s };

    let mut states: Vec<SwarmState>;
    let mut index: HashMap<SwarmState, usize> = HashMap::new();
    if options.reachable_only {
        let root = canon(SwarmState::all_empty(params.blocks, params.peers, params.seeds_enabled())?);
        index.insert(root.clone(), 0);
        states = vec![root];
    } else {
        states = if options.lumped {
            enumerate_lumped_states_capped(params, options.state_cap)?
        } else {
            enumerate_states_capped(params, options.state_cap)?
        };
        index.reserve(states.len());
        for (i, s) in states.iter().enumerate() {
            index.insert(s.clone(), i);
        }
    }

    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut departure_rates = Vec::new();
    let mut buf: Vec<Transition> = Vec::new();
    let mut next = 0;
    while next < states.len() {
        let state = states[next].clone();
        transitions_into(&state, params, &mut buf);
        let mut row = Vec::with_capacity(buf.len());
        let mut departures = 0.0;
        for t in &buf {
            if t.departure {
                departures += t.rate;
            }
            let target = canon(state.moved(t.from, t.to));
            let j = match index.get(&target) {
                Some(&j) => j,
                None => {
                    debug_assert!(options.reachable_only, "enumeration missed a successor");
                    let j = states.len();
                    index.insert(target.clone(), j);
                    states.push(target);
                    j
                }
            };
            if j != next {
                row.push((j, t.rate));
            }
        }
        rows.push(row);
        departure_rates.push(departures);
        next += 1;
    }

    Ok(SwarmChain {
        params: params.clone(),
        lumped: options.lumped,
        states,
        generator: GeneratorMatrix::from_rows(rows),
        departure_rates,
    })
}
