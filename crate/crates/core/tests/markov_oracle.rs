//! Exact throughput against a from-scratch dense model of the same swarm.
//!
//! The oracle below rebuilds the chain directly from the rate definitions on
//! plain count vectors indexed by bitmask and solves `πQ = 0` by Gaussian
//! elimination. It shares no code with the library beyond `ModelParams`.

use swarm_throughput::markov::{build_chain, solve_exact, solve_exact_with, ChainOptions, SolverOptions};
use swarm_throughput::{ModelParams, PeerPolicy, PublisherPolicy};

fn popcount(m: usize) -> usize {
    m.count_ones() as usize
}

/// Outgoing `(target, rate, departure)` moves of one count vector.
fn moves(x: &[u32], p: &ModelParams) -> Vec<(Vec<u32>, f64, bool)> {
    let k = p.blocks;
    let full = (1usize << k) - 1;
    let n = p.peers as f64;
    let replicas: Vec<u32> = (0..k).map(|b| (0..full).filter(|m| m & (1 << b) != 0).map(|m| x[m]).sum()).collect();
    let min_card = (0..full).filter(|&m| x[m] > 0).map(popcount).min().unwrap();
    let deprived: f64 = (0..full).filter(|&m| x[m] > 0 && popcount(m) == min_card).map(|m| x[m] as f64).sum();
    let mut out = Vec::new();
    for c in 0..full {
        if x[c] == 0 {
            continue;
        }
        let missing: Vec<usize> = (0..k).filter(|b| c & (1 << b) == 0).collect();
        let rarest_count = missing.iter().map(|&b| replicas[b]).min().unwrap();
        let rarest: Vec<usize> = missing.iter().copied().filter(|&b| replicas[b] == rarest_count).collect();
        for &j in &missing {
            let mut rate = 0.0;
            // publisher
            let u = p.publisher_capacity;
            rate += match p.publisher_policy {
                PublisherPolicy::RpRub => u * x[c] as f64 / (n * missing.len() as f64),
                PublisherPolicy::RpRfb if rarest.contains(&j) => u * x[c] as f64 / (n * rarest.len() as f64),
                PublisherPolicy::MdpRfb if rarest.contains(&j) && popcount(c) == min_card => {
                    u * x[c] as f64 / (deprived * rarest.len() as f64)
                }
                _ => 0.0,
            };
            // peers
            if !(p.shield_newcomers && c == 0) {
                for s in 0..full {
                    if x[s] == 0 || s & (1 << j) == 0 {
                        continue;
                    }
                    let useful = popcount(s & !c);
                    let mu = if popcount(s) == k - 1 { p.endgame_rate } else { p.peer_rate };
                    let neighbors = match p.peer_policy {
                        PeerPolicy::RpRub => {
                            let hidden = if p.shield_newcomers { x[0] as f64 } else { 0.0 };
                            (n - 1.0 - hidden).max(1.0)
                        }
                        PeerPolicy::RupRub => (0..full)
                            .filter(|&m| s & !m != 0 && !(p.shield_newcomers && m == 0))
                            .map(|m| x[m] as f64)
                            .sum(),
                    };
                    rate += x[c] as f64 * mu * x[s] as f64 / (useful as f64 * neighbors);
                }
            }
            if rate > 0.0 {
                let mut y = x.to_vec();
                y[c] -= 1;
                let to = c | (1 << j);
                let departure = to == full;
                y[if departure { 0 } else { to }] += 1;
                out.push((y, rate, departure));
            }
        }
    }
    out
}

fn dense_stationary(q: &[Vec<f64>]) -> Vec<f64> {
    // solve Qᵀ π = 0 with the last equation replaced by Σ π = 1
    let n = q.len();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| q[j][i]).collect()).collect();
    let mut b = vec![0.0; n];
    a[n - 1] = vec![1.0; n];
    b[n - 1] = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs())).unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        for (row, target) in a.iter_mut().enumerate() {
            if row != col && target[col] != 0.0 {
                let f = target[col] / pivot_row[col];
                for (t, p) in target[col..].iter_mut().zip(&pivot_row[col..]) {
                    *t -= f * p;
                }
                b[row] -= f * b[col];
            }
        }
    }
    (0..n).map(|i| b[i] / a[i][i]).collect()
}

/// Throughput of the full (unlumped) state space, restricted to states
/// reachable from the all-newcomer state.
fn oracle_throughput(p: &ModelParams) -> f64 {
    let slots = (1usize << p.blocks) - 1;
    let mut start = vec![0; slots];
    start[0] = p.peers;
    let mut states = vec![start.clone()];
    let mut index = std::collections::HashMap::from([(start, 0usize)]);
    let mut edges = Vec::new();
    let mut i = 0;
    while i < states.len() {
        for (y, rate, dep) in moves(&states[i].clone(), p) {
            let j = *index.entry(y.clone()).or_insert_with(|| {
                states.push(y);
                states.len() - 1
            });
            edges.push((i, j, rate, dep));
        }
        i += 1;
    }
    let n = states.len();
    let mut q = vec![vec![0.0; n]; n];
    let mut dep_rate = vec![0.0; n];
    for &(i, j, rate, dep) in &edges {
        q[i][j] += rate;
        q[i][i] -= rate;
        if dep {
            dep_rate[i] += rate;
        }
    }
    let pi = dense_stationary(&q);
    pi.iter().zip(&dep_rate).map(|(a, b)| a * b).sum()
}

fn all_scenarios() -> Vec<ModelParams> {
    let mut out = Vec::new();
    for k in 1..=3 {
        for n in 1..=4 {
            for publisher in PublisherPolicy::ALL {
                for peer in PeerPolicy::ALL {
                    for shield in [false, true] {
                        out.push(
                            ModelParams::new(k, n)
                                .with_capacity(0.7)
                                .with_peer_rate(1.3)
                                .with_endgame_rate(0.4)
                                .with_policies(publisher, peer)
                                .with_shielding(shield),
                        );
                    }
                }
            }
        }
    }
    out
}

#[test]
fn exact_matches_dense_oracle() {
    for p in all_scenarios() {
        let expected = oracle_throughput(&p);
        for lumped in [false, true] {
            let options = ChainOptions { lumped, ..ChainOptions::default() };
            let got = solve_exact_with(&p, options, &SolverOptions::default()).unwrap().throughput;
            assert!((got - expected).abs() <= 1e-10 * expected.max(1.0), "{p:?} lumped={lumped}: {got} vs {expected}");
        }
    }
}

#[test]
fn two_blocks_two_peers_by_hand() {
    // RP/RUB everywhere, U = μ = 1. Up to relabeling the chain has four
    // states: A = both empty, B = one empty and one with a block, C = both
    // holding the same block, D = holding different blocks.
    //   A -> B at 1, B -> A at 1/2 (departure), B -> C at 5/4, B -> D at 1/4,
    //   C -> B at 1 (departure), D -> B at 3 (departure)
    // giving π = (6, 12, 15, 1) / 34 and throughput 12/17.
    let p = ModelParams::new(2, 2);
    assert_eq!(build_chain(&p, ChainOptions { lumped: false, ..ChainOptions::default() }).unwrap().states.len(), 6);
    assert_eq!(build_chain(&p, ChainOptions::default()).unwrap().states.len(), 4);
    assert!((solve_exact(&p).unwrap().throughput - 12.0 / 17.0).abs() < 1e-12);
    assert!((oracle_throughput(&p) - 12.0 / 17.0).abs() < 1e-12);
}

#[test]
fn iterative_solver_matches_dense_oracle() {
    let forced = SolverOptions { dense_limit: 0, ..SolverOptions::default() };
    for p in all_scenarios().into_iter().filter(|p| p.blocks == 3 && p.peers == 4) {
        let expected = oracle_throughput(&p);
        let got = solve_exact_with(&p, ChainOptions::default(), &forced).unwrap().throughput;
        assert!((got - expected).abs() <= 1e-9 * expected.max(1.0), "{p:?}: {got} vs {expected}");
    }
}
