//! Transition rates of the closed-swarm chain.
//!
//! These functions are the single source of rates for both the generator
//! builder and the simulator.

use crate::error::{Result, SwarmError};
use crate::params::{ModelParams, PeerPolicy, PublisherPolicy};
use crate::replica::ReplicaProfile;
use crate::signature::Signature;
use crate::state::{Slot, SwarmState};

/// One enabled move of a single peer between slots.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub from: Slot,
    pub to: Slot,
    pub rate: f64,
    /// The move ends with a peer leaving (and being replaced by a newcomer).
    pub departure: bool,
}

/// Per-state quantities shared by every rate evaluated on that state.
struct RateContext<'a> {
    state: &'a SwarmState,
    params: &'a ModelParams,
    replicas: ReplicaProfile,
    /// Minimum cardinality among occupied peer signatures, if any.
    most_deprived: Option<usize>,
    most_deprived_total: u32,
    /// Candidate recipient count per donor mask; the last entry is the seed.
    neighbors: Vec<f64>,
}

impl<'a> RateContext<'a> {
    fn new(state: &'a SwarmState, params: &'a ModelParams) -> Self {
        let replicas = ReplicaProfile::of(state);
        let mut most_deprived = None;
        let mut most_deprived_total = 0;
        for (sig, c) in state.occupied() {
            match most_deprived {
                Some(m) if sig.len() > m => {}
                Some(m) if sig.len() == m => most_deprived_total += c,
                _ => {
                    most_deprived = Some(sig.len());
                    most_deprived_total = c;
                }
            }
        }
        let mut ctx =
            RateContext { state, params, replicas, most_deprived, most_deprived_total, neighbors: Vec::new() };
        let full = Signature::full(params.blocks).mask() as usize;
        let mut neighbors = vec![0.0; full + 1];
        for (sig, _) in state.occupied() {
            neighbors[sig.mask() as usize] = ctx.neighbor_count(sig);
        }
        if state.seed_count().is_some_and(|s| s > 0) {
            neighbors[full] = ctx.neighbor_count(Signature::full(params.blocks));
        }
        ctx.neighbors = neighbors;
        ctx
    }

    fn k(&self) -> usize {
        self.params.blocks
    }

    /// Size of the candidate recipient set of one donor holding `donor`.
    fn neighbor_count(&self, donor: Signature) -> f64 {
        let n = self.state.population() as f64;
        let shielded = if self.params.shield_newcomers { self.state.count(Signature::EMPTY) as f64 } else { 0.0 };
        match self.params.peer_policy {
            PeerPolicy::RpRub => {
                let others = n - 1.0;
                if self.params.shield_newcomers && !donor.is_empty() {
                    (others - shielded).max(1.0)
                } else {
                    others
                }
            }
            PeerPolicy::RupRub => {
                // peers the donor can help; the donor itself never qualifies
                let mut helped = 0u32;
                for (sig, c) in self.state.occupied() {
                    if self.params.shield_newcomers && sig.is_empty() {
                        continue;
                    }
                    if !donor.difference(sig).is_empty() {
                        helped += c;
                    }
                }
                helped as f64
            }
        }
    }

    fn peer_rate(&self, c: Signature, j: usize) -> f64 {
        let sigma_c = self.state.count(c) as f64;
        if sigma_c == 0.0 || (self.params.shield_newcomers && c.is_empty()) {
            return 0.0;
        }
        let mut total = 0.0;
        for (s, sigma_s) in self.state.occupied() {
            let useful = s.difference(c);
            if !useful.contains(j) {
                continue;
            }
            let neighbors = self.neighbors[s.mask() as usize];
            if neighbors <= 0.0 {
                continue;
            }
            let mu = self.params.upload_rate(s.len());
            total += mu * sigma_s as f64 / (useful.len() as f64 * neighbors);
        }
        if let Some(seeds) = self.state.seed_count().filter(|&s| s > 0) {
            let full = Signature::full(self.k());
            let useful = full.difference(c);
            let neighbors = self.neighbors[full.mask() as usize];
            if neighbors > 0.0 {
                total += self.params.peer_rate * seeds as f64 / (useful.len() as f64 * neighbors);
            }
        }
        sigma_c * total
    }

    /// Useful blocks of `c` holding the fewest replicas.
    fn rarest_useful(&self, c: Signature) -> (u32, usize) {
        let mut min = u32::MAX;
        let mut size = 0;
        for j in c.missing(self.k()) {
            let r = self.replicas.get(j);
            if r < min {
                min = r;
                size = 1;
            } else if r == min {
                size += 1;
            }
        }
        (min, size)
    }

    fn publisher_rate(&self, c: Signature, j: usize) -> f64 {
        let sigma_c = self.state.count(c) as f64;
        if sigma_c == 0.0 {
            return 0.0;
        }
        let u = self.params.publisher_capacity;
        let n = self.state.population() as f64;
        let k = self.k();
        match self.params.publisher_policy {
            PublisherPolicy::RpRub => u * sigma_c / (n * (k - c.len()) as f64),
            PublisherPolicy::RpRfb => {
                let (min, size) = self.rarest_useful(c);
                if self.replicas.get(j) == min {
                    u * sigma_c / (n * size as f64)
                } else {
                    0.0
                }
            }
            PublisherPolicy::MdpRfb => {
                if self.most_deprived != Some(c.len()) {
                    return 0.0;
                }
                let (min, size) = self.rarest_useful(c);
                if self.replicas.get(j) == min {
                    u * sigma_c / (self.most_deprived_total as f64 * size as f64)
                } else {
                    0.0
                }
            }
        }
    }

    fn target(&self, c: Signature, j: usize) -> (Slot, bool) {
        if c.len() + 1 < self.k() {
            (Slot::Peer(c.with(j)), false)
        } else if self.params.seeds_enabled() {
            (Slot::Seed, false)
        } else {
            (Slot::Peer(Signature::EMPTY), true)
        }
    }
}

fn check_useful(c: Signature, j: usize, params: &ModelParams) -> Result<()> {
    if j == 0 || j > params.blocks || c.contains(j) || c == Signature::full(params.blocks) {
        return Err(SwarmError::InvalidTransition { signature: c.to_string(), block: j });
    }
    Ok(())
}

/// Aggregate rate at which peers with signature `c` receive block `j` from
/// other peers (and seeds).
pub fn peer_rate(c: Signature, j: usize, state: &SwarmState, params: &ModelParams) -> Result<f64> {
    check_useful(c, j, params)?;
    Ok(RateContext::new(state, params).peer_rate(c, j))
}

/// Aggregate rate at which peers with signature `c` receive block `j` from the
/// publisher.
pub fn publisher_rate(c: Signature, j: usize, state: &SwarmState, params: &ModelParams) -> Result<f64> {
    check_useful(c, j, params)?;
    Ok(RateContext::new(state, params).publisher_rate(c, j))
}

/// Appends every enabled transition out of `state` to `out` (cleared first).
///
/// Block acquisitions are listed per (signature, block) pair in mask then
/// block order, followed by the seed departure if any.
pub fn transitions_into(state: &SwarmState, params: &ModelParams, out: &mut Vec<Transition>) {
    out.clear();
    let ctx = RateContext::new(state, params);
    let k = params.blocks;
    for (c, _) in state.occupied() {
        for j in c.missing(k) {
            let rate = ctx.publisher_rate(c, j) + ctx.peer_rate(c, j);
            if rate > 0.0 {
                let (to, departure) = ctx.target(c, j);
                out.push(Transition { from: Slot::Peer(c), to, rate, departure });
            }
        }
    }
    if let Some(seeds) = state.seed_count().filter(|&s| s > 0) {
        out.push(Transition {
            from: Slot::Seed,
            to: Slot::Peer(Signature::EMPTY),
            rate: params.linger_rate * seeds as f64,
            departure: true,
        });
    }
}

pub fn transitions(state: &SwarmState, params: &ModelParams) -> Vec<Transition> {
    let mut out = Vec::new();
    transitions_into(state, params, &mut out);
    out
}

/// Total rate of departures out of `state`.
pub fn departure_rate(state: &SwarmState, params: &ModelParams) -> f64 {
    transitions(state, params).iter().filter(|t| t.departure).map(|t| t.rate).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sig(blocks: &[usize]) -> Signature {
        Signature::from_blocks(blocks.iter().copied())
    }

    #[test]
    fn no_donors_no_peer_rate() {
        let p = ModelParams::new(3, 4);
        let s: SwarmState = "k=3; {}=4".parse().unwrap();
        for j in 1..=3 {
            assert_eq!(peer_rate(Signature::EMPTY, j, &s, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn peer_rate_hand_value() {
        // sigma_empty * mu * sigma_{1} / (|{1}| * (N - 1)) = 1 * 1 * 1 / (1 * 1)
        let p = ModelParams::new(2, 2).with_peer_rate(1.0);
        let s: SwarmState = "k=2; {}=1; {1}=1".parse().unwrap();
        assert_relative_eq!(peer_rate(Signature::EMPTY, 1, &s, &p).unwrap(), 1.0);
        assert_eq!(peer_rate(Signature::EMPTY, 2, &s, &p).unwrap(), 0.0);

        let shielded = p.clone().with_shielding(true);
        assert_eq!(peer_rate(Signature::EMPTY, 1, &s, &shielded).unwrap(), 0.0);
    }

    #[test]
    fn peer_rate_uses_endgame_rate_for_k_minus_one_donors() {
        // K=3: donor {1,2} has K-1 blocks and uploads at mu'
        let p = ModelParams::new(3, 3).with_peer_rate(10.0).with_endgame_rate(1.0);
        let s: SwarmState = "k=3; {}=2; {1,2}=1".parse().unwrap();
        // 2 * 1 * 1 / (2 * 2)
        assert_relative_eq!(peer_rate(Signature::EMPTY, 1, &s, &p).unwrap(), 0.5);
        let s: SwarmState = "k=3; {}=2; {1}=1".parse().unwrap();
        // 2 * 10 * 1 / (1 * 2)
        assert_relative_eq!(peer_rate(Signature::EMPTY, 1, &s, &p).unwrap(), 10.0);
    }

    #[test]
    fn invalid_transition() {
        let p = ModelParams::new(3, 4);
        let s: SwarmState = "k=3; {1}=4".parse().unwrap();
        assert!(matches!(peer_rate(sig(&[1]), 1, &s, &p), Err(SwarmError::InvalidTransition { .. })));
        assert!(publisher_rate(sig(&[1]), 1, &s, &p).is_err());
        assert!(publisher_rate(sig(&[1]), 4, &s, &p).is_err());
    }

    #[test]
    fn publisher_random_useful() {
        let p = ModelParams::new(3, 4).with_capacity(1.5);
        let s: SwarmState = "k=3; {}=4".parse().unwrap();
        for j in 1..=3 {
            assert_relative_eq!(publisher_rate(Signature::EMPTY, j, &s, &p).unwrap(), 1.5 / 3.0);
        }
    }

    #[test]
    fn publisher_rarest_first() {
        // replicas (5,1): block 2 is the unique rarest useful block for {}
        let p = ModelParams::new(2, 7).with_policies(PublisherPolicy::RpRfb, PeerPolicy::RpRub);
        let s: SwarmState = "k=2; {}=1; {1}=5; {2}=1".parse().unwrap();
        assert_relative_eq!(publisher_rate(Signature::EMPTY, 2, &s, &p).unwrap(), 1.0 / 7.0);
        assert_eq!(publisher_rate(Signature::EMPTY, 1, &s, &p).unwrap(), 0.0);
    }

    #[test]
    fn publisher_most_deprived() {
        let p = ModelParams::new(3, 5).with_policies(PublisherPolicy::MdpRfb, PeerPolicy::RpRub);
        let s: SwarmState = "k=3; {}=2; {1}=3".parse().unwrap();
        assert_eq!(publisher_rate(sig(&[1]), 2, &s, &p).unwrap(), 0.0);
        // replicas (3,0,0): rarest useful for {} are blocks 2 and 3
        assert_relative_eq!(publisher_rate(Signature::EMPTY, 2, &s, &p).unwrap(), 0.5);
        assert_relative_eq!(publisher_rate(Signature::EMPTY, 3, &s, &p).unwrap(), 0.5);
        assert_eq!(publisher_rate(Signature::EMPTY, 1, &s, &p).unwrap(), 0.0);
    }

    #[test]
    fn completion_is_departure_without_seeds() {
        let p = ModelParams::new(2, 2);
        let s: SwarmState = "k=2; {1}=2".parse().unwrap();
        let ts = transitions(&s, &p);
        assert!(ts.iter().all(|t| t.departure && t.to == Slot::Peer(Signature::EMPTY)));
        assert_relative_eq!(departure_rate(&s, &p), 1.0);

        let seeded = p.with_linger_rate(2.0);
        let s: SwarmState = "k=2; {1}=1; seeds=1".parse().unwrap();
        let ts = transitions(&s, &seeded);
        assert!(ts.iter().any(|t| t.to == Slot::Seed && !t.departure));
        assert_relative_eq!(departure_rate(&s, &seeded), 2.0);
    }

    #[test]
    fn useful_peer_selection_narrows_neighbors() {
        // donor {1}; only the newcomer can use it, so it always serves the newcomer
        let p = ModelParams::new(3, 3).with_policies(PublisherPolicy::RpRub, PeerPolicy::RupRub);
        let s: SwarmState = "k=3; {}=1; {1}=1; {1,2}=1".parse().unwrap();
        // donors of block 1 to {}: {1} (helps 1 peer) and {1,2} (helps 2 peers, 2 useful blocks)
        let expected = 1.0 / (1.0 * 1.0) + 1.0 / (2.0 * 2.0);
        assert_relative_eq!(peer_rate(Signature::EMPTY, 1, &s, &p).unwrap(), expected);
    }
}
