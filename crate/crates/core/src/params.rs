//! Scenario parameters shared by the exact, approximate and simulated models.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SwarmError};

/// How the publisher picks a recipient and a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PublisherPolicy {
    /// Random peer, random useful block.
    RpRub,
    /// Random peer, rarest useful block.
    RpRfb,
    /// Most deprived peer, rarest useful block.
    MdpRfb,
}

/// How peers pick a recipient and a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PeerPolicy {
    /// Random peer, random useful block.
    RpRub,
    /// Random useful peer, random useful block. A donor only contacts peers it
    /// can help.
    RupRub,
}

impl PublisherPolicy {
    pub const ALL: [PublisherPolicy; 3] = [Self::RpRub, Self::RpRfb, Self::MdpRfb];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::RpRub => "RP_RUB",
            Self::RpRfb => "RP_RFB",
            Self::MdpRfb => "MDP_RFB",
        }
    }
}

impl PeerPolicy {
    pub const ALL: [PeerPolicy; 2] = [Self::RpRub, Self::RupRub];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::RpRub => "RP_RUB",
            Self::RupRub => "RUP_RUB",
        }
    }
}

fn normalize_policy_name(s: &str) -> String {
    s.trim()
        .chars()
        .map(|c| match c {
            '/' | '-' => '_',
            c => c.to_ascii_uppercase(),
        })
        .collect()
}

impl FromStr for PublisherPolicy {
    type Err = SwarmError;

    fn from_str(s: &str) -> Result<Self> {
        match normalize_policy_name(s).as_str() {
            "RP_RUB" => Ok(Self::RpRub),
            "RP_RFB" => Ok(Self::RpRfb),
            "MDP_RFB" => Ok(Self::MdpRfb),
            _ => Err(SwarmError::InvalidParams {
                field: "publisher_policy",
                reason: format!("unknown policy `{s}` (expected RP_RUB, RP_RFB or MDP_RFB)"),
            }),
        }
    }
}

impl FromStr for PeerPolicy {
    type Err = SwarmError;

    fn from_str(s: &str) -> Result<Self> {
        match normalize_policy_name(s).as_str() {
            "RP_RUB" => Ok(Self::RpRub),
            "RUP_RUB" => Ok(Self::RupRub),
            _ => Err(SwarmError::InvalidParams {
                field: "peer_policy",
                reason: format!("unknown policy `{s}` (expected RP_RUB or RUP_RUB)"),
            }),
        }
    }
}

impl fmt::Display for PublisherPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for PeerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One closed-swarm scenario.
///
/// Rates are in blocks per unit time. `linger_rate` is the rate at which a
/// peer that finished its download leaves; `f64::INFINITY` means completing
/// peers leave immediately and no seeds are modelled.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub blocks: usize,
    pub peers: u32,
    pub publisher_capacity: f64,
    pub peer_rate: f64,
    /// Upload rate of peers holding all blocks but one.
    pub endgame_rate: f64,
    pub publisher_policy: PublisherPolicy,
    pub peer_policy: PeerPolicy,
    pub shield_newcomers: bool,
    pub linger_rate: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            blocks: 3,
            peers: 10,
            publisher_capacity: 1.0,
            peer_rate: 1.0,
            endgame_rate: 1.0,
            publisher_policy: PublisherPolicy::RpRub,
            peer_policy: PeerPolicy::RpRub,
            shield_newcomers: false,
            linger_rate: f64::INFINITY,
        }
    }
}

impl ModelParams {
    pub fn new(blocks: usize, peers: u32) -> Self {
        ModelParams { blocks, peers, ..Default::default() }
    }

    pub fn with_capacity(mut self, publisher_capacity: f64) -> Self {
        self.publisher_capacity = publisher_capacity;
        self
    }

    /// Sets the regular upload rate and the end-game rate to the same value.
    pub fn with_peer_rate(mut self, rate: f64) -> Self {
        self.peer_rate = rate;
        self.endgame_rate = rate;
        self
    }

    pub fn with_endgame_rate(mut self, rate: f64) -> Self {
        self.endgame_rate = rate;
        self
    }

    pub fn with_policies(mut self, publisher: PublisherPolicy, peer: PeerPolicy) -> Self {
        self.publisher_policy = publisher;
        self.peer_policy = peer;
        self
    }

    pub fn with_shielding(mut self, shield: bool) -> Self {
        self.shield_newcomers = shield;
        self
    }

    pub fn with_linger_rate(mut self, gamma: f64) -> Self {
        self.linger_rate = gamma;
        self
    }

    pub fn with_peers(mut self, peers: u32) -> Self {
        self.peers = peers;
        self
    }

    pub fn seeds_enabled(&self) -> bool {
        self.linger_rate.is_finite()
    }

    /// Upload rate of a peer holding `held` blocks.
    pub fn upload_rate(&self, held: usize) -> f64 {
        if held + 1 == self.blocks {
            self.endgame_rate
        } else {
            self.peer_rate
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> SwarmError {
            SwarmError::InvalidParams { field, reason: reason.into() }
        }
        if self.blocks == 0 {
            return Err(bad("blocks", "at least one block is required"));
        }
        if self.peers == 0 {
            return Err(bad("peers", "population must be at least 1"));
        }
        if !(self.publisher_capacity > 0.0 && self.publisher_capacity.is_finite()) {
            return Err(bad(
                "publisher_capacity",
                format!("must be positive and finite, got {}", self.publisher_capacity),
            ));
        }
        if !(self.peer_rate >= 0.0 && self.peer_rate.is_finite()) {
            return Err(bad("peer_rate", format!("must be non-negative and finite, got {}", self.peer_rate)));
        }
        if !(self.endgame_rate >= 0.0 && self.endgame_rate.is_finite()) {
            return Err(bad("endgame_rate", format!("must be non-negative and finite, got {}", self.endgame_rate)));
        }
        if self.endgame_rate > self.peer_rate {
            return Err(bad(
                "endgame_rate",
                format!("end-game rate {} exceeds the peer rate {}", self.endgame_rate, self.peer_rate),
            ));
        }
        if self.linger_rate.is_nan() || self.linger_rate <= 0.0 {
            return Err(bad(
                "linger_rate",
                format!("must be positive (inf for immediate departure), got {}", self.linger_rate),
            ));
        }
        Ok(())
    }
}
