//! Enumeration of the closed-system state space.

use crate::error::{Result, SwarmError};
use crate::lumping::is_canonical;
use crate::params::ModelParams;
use crate::state::SwarmState;

/// Default cap on the number of states a caller may enumerate.
pub const DEFAULT_STATE_CAP: u128 = 5_000_000;

/// `C(n, r)`, saturating at `u128::MAX`.
pub fn binomial(n: u128, r: u128) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Number of occupancy slots: `2^K - 1` signatures, plus one for seeds.
pub fn slot_count(params: &ModelParams) -> usize {
    let base = (1usize << params.blocks) - 1;
    base + usize::from(params.seeds_enabled())
}

/// Size of the unlumped state space: weak compositions of `N` over the slots.
pub fn state_count(params: &ModelParams) -> u128 {
    if params.blocks >= 64 {
        return u128::MAX;
    }
    let slots = slot_count(params) as u128;
    binomial(slots - 1 + params.peers as u128, params.peers as u128)
}

pub fn check_cap(params: &ModelParams, cap: u128) -> Result<u128> {
    params.validate()?;
    if params.blocks > crate::signature::MAX_BLOCKS {
        return Err(SwarmError::EnumerationLimitExceeded { count: u128::MAX, cap });
    }
    let count = state_count(params);
    if count > cap {
        return Err(SwarmError::EnumerationLimitExceeded { count, cap });
    }
    Ok(count)
}

/// Calls `visit` on every weak composition of `total` into `slots` parts,
/// in lexicographic order of the part vector.
fn for_each_composition(total: u32, slots: usize, mut visit: impl FnMut(&[u32])) {
    if slots == 0 {
        return;
    }
    let mut parts = vec![0u32; slots];
    parts[slots - 1] = total;
    loop {
        visit(&parts);
        // next composition in lexicographic order: find the rightmost
        // position before the last that can grow, taking from the tail.
        let last = slots - 1;
        if last == 0 || parts[0] == total {
            return;
        }
        let tail = parts[last];
        parts[last] = 0;
        let mut i = last - 1;
        if tail > 0 {
            parts[i] += 1;
            parts[last] = tail - 1;
            continue;
        }
        // tail empty: move to the rightmost non-zero position before last
        while parts[i] == 0 {
            i -= 1;
        }
        let v = parts[i];
        parts[i] = 0;
        parts[i - 1] += 1;
        parts[last] = v - 1;
    }
}

fn build_state(params: &ModelParams, parts: &[u32]) -> SwarmState {
    let peer_slots = (1usize << params.blocks) - 1;
    let seeds = params.seeds_enabled().then(|| parts[peer_slots]);
    SwarmState::from_parts(params.blocks, parts[..peer_slots].to_vec().into_boxed_slice(), seeds)
}

pub fn enumerate_states(params: &ModelParams) -> Result<Vec<SwarmState>> {
    enumerate_states_capped(params, DEFAULT_STATE_CAP)
}

pub fn enumerate_states_capped(params: &ModelParams, cap: u128) -> Result<Vec<SwarmState>> {
    let count = check_cap(params, cap)?;
    let mut out = Vec::with_capacity(count as usize);
    for_each_composition(params.peers, slot_count(params), |parts| out.push(build_state(params, parts)));
    Ok(out)
}

/// The image of [`enumerate_states`] under lumping, in the same order.
///
/// Every lumped state is canonical and every canonical state is its own
/// image, so the image is exactly the set of canonical states.
pub fn enumerate_lumped_states(params: &ModelParams) -> Result<Vec<SwarmState>> {
    enumerate_lumped_states_capped(params, DEFAULT_STATE_CAP)
}

pub fn enumerate_lumped_states_capped(params: &ModelParams, cap: u128) -> Result<Vec<SwarmState>> {
    check_cap(params, cap)?;
    let mut out = Vec::new();
    for_each_composition(params.peers, slot_count(params), |parts| {
        let s = build_state(params, parts);
        if is_canonical(&s) {
            out.push(s);
        }
    });
    Ok(out)
}

/// Counts both spaces without materializing them.
pub fn count_states(params: &ModelParams, cap: u128) -> Result<(usize, usize)> {
    check_cap(params, cap)?;
    let (mut all, mut lumped) = (0usize, 0usize);
    for_each_composition(params.peers, slot_count(params), |parts| {
        all += 1;
        if is_canonical(&build_state(params, parts)) {
            lumped += 1;
        }
    });
    Ok((all, lumped))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lumping::lump_state;
    use std::collections::BTreeSet;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 3), 10);
        assert_eq!(binomial(11, 5), 462);
        assert_eq!(binomial(26, 20), 230230);
        assert_eq!(binomial(3, 4), 0);
    }

    #[test]
    fn compositions_are_lexicographic_and_complete() {
        let mut seen = Vec::new();
        for_each_composition(3, 3, |p| seen.push(p.to_vec()));
        assert_eq!(seen.len(), 10);
        let mut sorted = seen.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(seen, sorted);
        assert!(seen.iter().all(|p| p.iter().sum::<u32>() == 3));

        let mut single = Vec::new();
        for_each_composition(4, 1, |p| single.push(p.to_vec()));
        assert_eq!(single, vec![vec![4]]);
    }

    #[test]
    fn state_counts() {
        assert_eq!(enumerate_states(&ModelParams::new(3, 5)).unwrap().len(), 462);
        assert_eq!(enumerate_states(&ModelParams::new(2, 3)).unwrap().len(), 10);
        let k1 = enumerate_states(&ModelParams::new(1, 4)).unwrap();
        assert_eq!(k1.len(), 1);
        assert_eq!(k1[0].counts(), &[4]);
    }

    #[test]
    fn lumped_counts() {
        assert_eq!(enumerate_lumped_states(&ModelParams::new(3, 5)).unwrap().len(), 127);
        for n in 1..6 {
            assert_eq!(enumerate_lumped_states(&ModelParams::new(1, n)).unwrap().len(), 1);
        }
    }

    #[test]
    fn lumped_space_is_image_of_lump_state() {
        for (k, n) in [(2, 4), (3, 4), (3, 6), (4, 3)] {
            let p = ModelParams::new(k, n);
            let image: BTreeSet<SwarmState> = enumerate_states(&p).unwrap().iter().map(lump_state).collect();
            let lumped = enumerate_lumped_states(&p).unwrap();
            assert_eq!(lumped.len(), image.len());
            assert_eq!(lumped.iter().cloned().collect::<BTreeSet<_>>(), image);
            let all = enumerate_states(&p).unwrap().len();
            if k == 1 {
                assert_eq!(lumped.len(), all);
            } else {
                assert!(lumped.len() < all);
            }
        }
    }

    #[test]
    fn seeds_add_a_slot() {
        let p = ModelParams::new(2, 3).with_linger_rate(1.0);
        let states = enumerate_states(&p).unwrap();
        assert_eq!(states.len() as u128, binomial(6, 3));
        assert!(states.iter().all(|s| s.population() == 3 && s.seed_count().is_some()));
    }

    #[test]
    fn cap_enforced() {
        let err = enumerate_states_capped(&ModelParams::new(3, 20), 1000).unwrap_err();
        assert!(matches!(err, SwarmError::EnumerationLimitExceeded { count: 230230, cap: 1000 }));
    }
}
