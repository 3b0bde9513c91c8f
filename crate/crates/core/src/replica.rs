use crate::state::SwarmState;

/// Number of peers holding each block. `replicas[j - 1]` is the count for
/// block `j`. The publisher's copy and lingering seeds are not counted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplicaProfile {
    pub replicas: Vec<u32>,
}

impl ReplicaProfile {
    pub fn of(state: &SwarmState) -> Self {
        let k = state.blocks();
        let mut replicas = vec![0u32; k];
        for (sig, count) in state.occupied() {
            for b in sig.blocks() {
                replicas[b - 1] += count;
            }
        }
        ReplicaProfile { replicas }
    }

    pub fn get(&self, block: usize) -> u32 {
        self.replicas[block - 1]
    }

    /// The lowest-indexed block with the fewest replicas.
    pub fn rarest(&self) -> usize {
        let mut best = 0;
        for (i, &r) in self.replicas.iter().enumerate() {
            if r < self.replicas[best] {
                best = i;
            }
        }
        best + 1
    }
}

pub fn replica_profile(state: &SwarmState) -> ReplicaProfile {
    ReplicaProfile::of(state)
}
