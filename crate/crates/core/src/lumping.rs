//! Canonical relabeling of blocks by replica count.
//!
//! Blocks are exchangeable under every supported policy, so relabeling them
//! maps a state to an equivalent one. The canonical representative orders
//! blocks by ascending replica count, ties broken by ascending original index.

use crate::replica::ReplicaProfile;
use crate::signature::Signature;
use crate::state::SwarmState;

/// `relabel[b]` is the new 0-based position of original 0-based block `b`.
pub fn canonical_relabeling(profile: &ReplicaProfile) -> Vec<usize> {
    let mut order: Vec<usize> = (0..profile.replicas.len()).collect();
    // stable: ties keep ascending index
    order.sort_by_key(|&b| profile.replicas[b]);
    let mut relabel = vec![0; order.len()];
    for (new, &old) in order.iter().enumerate() {
        relabel[old] = new;
    }
    relabel
}

pub fn relabel_signature(sig: Signature, relabel: &[usize]) -> Signature {
    let mut mask = 0u32;
    let mut m = sig.mask();
    while m != 0 {
        let b = m.trailing_zeros() as usize;
        mask |= 1 << relabel[b];
        m &= m - 1;
    }
    Signature::from_mask(mask)
}

pub fn lump_state(state: &SwarmState) -> SwarmState {
    let profile = ReplicaProfile::of(state);
    if profile.replicas.windows(2).all(|w| w[0] <= w[1]) {
        return state.clone();
    }
    let relabel = canonical_relabeling(&profile);
    let mut counts = vec![0u32; state.counts().len()].into_boxed_slice();
    for (sig, c) in state.occupied() {
        counts[relabel_signature(sig, &relabel).mask() as usize] = c;
    }
    SwarmState::from_parts(state.blocks(), counts, state.seed_count())
}

/// A state is canonical iff its replica counts are non-decreasing in block
/// index.
pub fn is_canonical(state: &SwarmState) -> bool {
    ReplicaProfile::of(state).replicas.windows(2).all(|w| w[0] <= w[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::replica::replica_profile;
    use proptest::prelude::*;

    #[test]
    fn worked_example() {
        // replicas (1,3,1): order 1,3,2 so 1->1, 3->2, 2->3
        let s: SwarmState = "k=3; {2}=3; {1,3}=1".parse().unwrap();
        let expected: SwarmState = "k=3; {3}=3; {1,2}=1".parse().unwrap();
        assert_eq!(lump_state(&s), expected);
    }

    #[test]
    fn equal_replicas_are_fixed() {
        let s: SwarmState = "k=3; {1}=2; {2}=2; {3}=2; {}=1".parse().unwrap();
        assert_eq!(lump_state(&s), s);
    }

    fn arb_state(k: usize, n: u32) -> impl Strategy<Value = SwarmState> {
        let slots = (1usize << k) - 1;
        proptest::collection::vec(0..slots, n as usize).prop_map(move |picks| {
            let mut counts = vec![0u32; slots];
            for p in picks {
                counts[p] += 1;
            }
            SwarmState::new(k, counts, None).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn idempotent(s in arb_state(3, 10)) {
            let once = lump_state(&s);
            prop_assert_eq!(lump_state(&once), once);
        }

        #[test]
        fn canonical_form_properties(s in arb_state(4, 12)) {
            let l = lump_state(&s);
            prop_assert_eq!(l.population(), s.population());
            prop_assert!(is_canonical(&l));

            let mut before = replica_profile(&s).replicas;
            let mut after = replica_profile(&l).replicas.clone();
            before.sort();
            after.sort();
            prop_assert_eq!(before, after);

            let cards = |st: &SwarmState| {
                let mut v = vec![0u32; st.blocks()];
                for (sig, c) in st.occupied() {
                    v[sig.len()] += c;
                }
                v
            };
            prop_assert_eq!(cards(&s), cards(&l));
        }
    }
}
