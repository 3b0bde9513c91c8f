//! Stationary distributions of finite generators.
//!
//! Small chains are solved with Grassmann–Taksar–Heyman elimination, which
//! uses no subtractions and needs no tolerance. Larger chains use
//! Gauss–Seidel sweeps on `πQ = 0`.

use super::generator::GeneratorMatrix;
use crate::error::{Result, SwarmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverMethod {
    Gth,
    GaussSeidel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Closed classes up to this size are solved densely with GTH.
    pub dense_limit: usize,
    /// Sweeps stop when the largest change relative to the largest
    /// probability falls below this.
    pub tolerance: f64,
    /// Required bound on `‖πQ‖∞` after convergence.
    pub residual_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { dense_limit: 4000, tolerance: 1e-12, residual_tolerance: 1e-10, max_iterations: 1_000_000 }
    }
}

#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pub probabilities: Vec<f64>,
    /// `‖πQ‖∞`.
    pub residual: f64,
    pub method: SolverMethod,
    /// Sweeps used by the iterative method; 0 for GTH.
    pub iterations: usize,
}

pub fn solve_stationary(q: &GeneratorMatrix) -> Result<StationaryDistribution> {
    solve_stationary_with(q, &SolverOptions::default())
}

pub fn solve_stationary_with(q: &GeneratorMatrix, options: &SolverOptions) -> Result<StationaryDistribution> {
    let n = q.dimension();
    if n == 0 {
        return Err(SwarmError::InvalidState("empty generator".into()));
    }
    let closed = closed_class(q)?;
    let (sub, restricted) = if closed.len() == n { (q.clone(), false) } else { (q.restrict(&closed), true) };

    let (local, method, iterations) = if sub.dimension() <= options.dense_limit {
        (gth(&sub)?, SolverMethod::Gth, 0)
    } else {
        let (p, it) = gauss_seidel(&sub, options)?;
        (p, SolverMethod::GaussSeidel, it)
    };

    let probabilities = if restricted {
        let mut full = vec![0.0; n];
        for (i, &s) in closed.iter().enumerate() {
            full[s] = local[i];
        }
        full
    } else {
        local
    };
    let residual = q.left_multiply(&probabilities).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if residual > options.residual_tolerance {
        return Err(SwarmError::NotConverged { iterations, last_change: residual });
    }
    Ok(StationaryDistribution { probabilities, residual, method, iterations })
}

/// Strongly connected components (iterative Tarjan). Returns the component
/// id of every state and the number of components.
fn strongly_connected(q: &GeneratorMatrix) -> (Vec<usize>, usize) {
    const UNSEEN: usize = usize::MAX;
    let n = q.dimension();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comp = vec![UNSEEN; n];
    let mut counter = 0;
    let mut components = 0;
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, q.row_start[root]));
        while let Some(&mut (u, ref mut pos)) = call.last_mut() {
            if *pos < q.row_start[u + 1] {
                let w = q.cols[*pos];
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, q.row_start[w]));
                } else if on_stack[w] {
                    low[u] = low[u].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[u]);
                }
                if low[u] == index[u] {
                    loop {
                        let w = stack.pop().expect("tarjan stack underflow");
                        on_stack[w] = false;
                        comp[w] = components;
                        if w == u {
                            break;
                        }
                    }
                    components += 1;
                }
            }
        }
    }
    (comp, components)
}

/// States of the unique closed communicating class, in index order.
fn closed_class(q: &GeneratorMatrix) -> Result<Vec<usize>> {
    let (comp, count) = strongly_connected(q);
    let mut leaks = vec![false; count];
    for (r, c, _) in q.entries() {
        if comp[r] != comp[c] {
            leaks[comp[r]] = true;
        }
    }
    let closed: Vec<usize> = (0..count).filter(|&c| !leaks[c]).collect();
    if closed.len() != 1 {
        return Err(SwarmError::ReducibleChain { classes: closed.len() });
    }
    Ok((0..q.dimension()).filter(|&s| comp[s] == closed[0]).collect())
}

/// Dense GTH elimination on an irreducible generator.
fn gth(q: &GeneratorMatrix) -> Result<Vec<f64>> {
    let n = q.dimension();
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let mut a = vec![0.0f64; n * n];
    for (r, c, v) in q.entries() {
        a[r * n + c] = v;
    }
    for k in (1..n).rev() {
        let (head, tail) = a.split_at_mut(k * n);
        let row_k = &tail[..k];
        let s: f64 = row_k.iter().sum();
        if s <= 0.0 {
            return Err(SwarmError::ReducibleChain { classes: 2 });
        }
        for i in 0..k {
            let row_i = &mut head[i * n..i * n + n];
            let f = row_i[k] / s;
            row_i[k] = f;
            if f != 0.0 {
                for (x, &y) in row_i[..k].iter_mut().zip(row_k) {
                    *x += f * y;
                }
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        let mut acc = 0.0;
        for i in 0..k {
            acc += pi[i] * a[i * n + k];
        }
        pi[k] = acc;
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|p| *p /= total);
    Ok(pi)
}

fn gauss_seidel(q: &GeneratorMatrix, options: &SolverOptions) -> Result<(Vec<f64>, usize)> {
    let n = q.dimension();
    let (col_start, rows, vals) = q.columns();
    let exit: Vec<f64> = q.diagonal().iter().map(|d| -d).collect();
    if exit.iter().any(|&e| e <= 0.0) {
        return Err(SwarmError::ReducibleChain { classes: 2 });
    }
    let mut pi = vec![1.0 / n as f64; n];
    let mut last_change = f64::INFINITY;
    for sweep in 1..=options.max_iterations {
        let mut change = 0.0f64;
        for j in 0..n {
            let mut inflow = 0.0;
            for idx in col_start[j]..col_start[j + 1] {
                inflow += pi[rows[idx]] * vals[idx];
            }
            let updated = inflow / exit[j];
            change = change.max((updated - pi[j]).abs());
            pi[j] = updated;
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        let scale = pi.iter().fold(0.0f64, |m, &p| m.max(p));
        last_change = change / total / scale;
        if last_change < options.tolerance {
            return Ok((pi, sweep));
        }
    }
    Err(SwarmError::NotConverged { iterations: options.max_iterations, last_change })
}
