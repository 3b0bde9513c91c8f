//! Occupancy vectors: how many peers hold each signature.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SwarmError};
use crate::signature::{Signature, MAX_BLOCKS};

/// Where a peer sits in the occupancy vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Peer(Signature),
    /// A peer that holds the whole file and lingers as a seed.
    Seed,
}

/// Counts of peers per partial signature, plus an optional seed count.
///
/// `counts[mask]` is the number of peers with signature `mask`; the full file
/// is never a peer signature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SwarmState {
    blocks: u8,
    counts: Box<[u32]>,
    seeds: Option<u32>,
}

impl SwarmState {
    pub fn new(blocks: usize, counts: Vec<u32>, seeds: Option<u32>) -> Result<Self> {
        if blocks == 0 || blocks > MAX_BLOCKS {
            return Err(SwarmError::InvalidState(format!("block count {blocks} outside 1..={MAX_BLOCKS}")));
        }
        let slots = (1usize << blocks) - 1;
        if counts.len() != slots {
            return Err(SwarmError::InvalidState(format!(
                "expected {slots} signature counts for {blocks} blocks, got {}",
                counts.len()
            )));
        }
        let total = counts.iter().map(|&c| c as u64).sum::<u64>() + seeds.unwrap_or(0) as u64;
        if total > u32::MAX as u64 {
            return Err(SwarmError::InvalidState("population overflows u32".into()));
        }
        Ok(SwarmState { blocks: blocks as u8, counts: counts.into_boxed_slice(), seeds })
    }

    /// Every peer is a newcomer.
    pub fn all_empty(blocks: usize, peers: u32, seeds_enabled: bool) -> Result<Self> {
        let mut counts = vec![0; (1usize << blocks.min(MAX_BLOCKS + 1)) - 1];
        if let Some(c) = counts.first_mut() {
            *c = peers;
        }
        SwarmState::new(blocks, counts, seeds_enabled.then_some(0))
    }

    /// All peers but one hold every block except `missing`; the remaining peer
    /// is a newcomer.
    pub fn one_club(blocks: usize, peers: u32, missing: usize, seeds_enabled: bool) -> Result<Self> {
        if missing == 0 || missing > blocks {
            return Err(SwarmError::InvalidState(format!("missing block {missing} outside 1..={blocks}")));
        }
        if peers == 0 {
            return Err(SwarmError::InvalidState("one-club state needs at least one peer".into()));
        }
        let mut state = SwarmState::all_empty(blocks, 1, seeds_enabled)?;
        let club = Signature::full(blocks).difference(Signature::from_blocks([missing]));
        if club.is_empty() {
            state.counts[0] = peers;
        } else {
            state.counts[club.mask() as usize] = peers - 1;
        }
        Ok(state)
    }

    pub(crate) fn from_parts(blocks: usize, counts: Box<[u32]>, seeds: Option<u32>) -> Self {
        SwarmState { blocks: blocks as u8, counts, seeds }
    }

    pub fn blocks(&self) -> usize {
        self.blocks as usize
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn count(&self, signature: Signature) -> u32 {
        self.counts.get(signature.mask() as usize).copied().unwrap_or(0)
    }

    pub fn seed_count(&self) -> Option<u32> {
        self.seeds
    }

    pub fn slot_count(&self, slot: Slot) -> u32 {
        match slot {
            Slot::Peer(s) => self.count(s),
            Slot::Seed => self.seeds.unwrap_or(0),
        }
    }

    pub fn population(&self) -> u32 {
        self.counts.iter().sum::<u32>() + self.seeds.unwrap_or(0)
    }

    /// Signatures with at least one peer.
    pub fn occupied(&self) -> impl Iterator<Item = (Signature, u32)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(m, &c)| (Signature::from_mask(m as u32), c))
    }

    /// Moves one peer from `from` to `to`. Panics if `from` is empty.
    pub fn move_peer(&mut self, from: Slot, to: Slot) {
        match from {
            Slot::Peer(s) => self.counts[s.mask() as usize] -= 1,
            Slot::Seed => *self.seeds.as_mut().expect("seed slot disabled") -= 1,
        }
        match to {
            Slot::Peer(s) => self.counts[s.mask() as usize] += 1,
            Slot::Seed => *self.seeds.as_mut().expect("seed slot disabled") += 1,
        }
    }

    #[must_use]
    pub fn moved(&self, from: Slot, to: Slot) -> SwarmState {
        let mut next = self.clone();
        next.move_peer(from, to);
        next
    }
}

/// Text form: `k=3; {}=4; {1,2}=1; seeds=0`. Zero-count signatures may be
/// omitted; `seeds` is present only when the seed slot is enabled.
impl fmt::Display for SwarmState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={}", self.blocks)?;
        for (sig, c) in self.occupied() {
            write!(f, "; {sig}={c}")?;
        }
        if let Some(s) = self.seeds {
            write!(f, "; seeds={s}")?;
        }
        Ok(())
    }
}

impl FromStr for SwarmState {
    type Err = SwarmError;

    fn from_str(text: &str) -> Result<Self> {
        let bad = |msg: String| SwarmError::InvalidState(msg);
        let mut parts = text.split(';').map(str::trim).filter(|p| !p.is_empty());
        let head = parts.next().ok_or_else(|| bad("empty state".into()))?;
        let k: usize = head
            .strip_prefix("k=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad(format!("expected `k=<blocks>`, found `{head}`")))?;
        if k == 0 || k > MAX_BLOCKS {
            return Err(bad(format!("block count {k} outside 1..={MAX_BLOCKS}")));
        }
        let mut counts = vec![0u32; (1 << k) - 1];
        let mut seeds = None;
        for part in parts {
            let (key, value) =
                part.split_once('=').ok_or_else(|| bad(format!("expected `<signature>=<count>`, found `{part}`")))?;
            let value: u32 = value.trim().parse().map_err(|_| bad(format!("bad count in `{part}`")))?;
            let key = key.trim();
            if key == "seeds" {
                if seeds.replace(value).is_some() {
                    return Err(bad("seeds given twice".into()));
                }
                continue;
            }
            let inner = key
                .strip_prefix('{')
                .and_then(|k| k.strip_suffix('}'))
                .ok_or_else(|| bad(format!("signature must be written as `{{i,j,..}}`, found `{key}`")))?;
            let mut sig = Signature::EMPTY;
            for b in inner.split(',').map(str::trim).filter(|b| !b.is_empty()) {
                let b: usize = b.parse().map_err(|_| bad(format!("bad block index `{b}`")))?;
                if b == 0 || b > k {
                    return Err(bad(format!("block {b} outside 1..={k}")));
                }
                sig = sig.with(b);
            }
            if sig == Signature::full(k) {
                return Err(bad("the full file is not a peer signature; use `seeds=`".into()));
            }
            let slot = &mut counts[sig.mask() as usize];
            *slot = slot.checked_add(value).ok_or_else(|| bad("count overflow".into()))?;
        }
        SwarmState::new(k, counts, seeds)
    }
}
