//! Throughput of closed peer-to-peer swarms.
//!
//! Three complementary models of a swarm that distributes a `K`-block file to
//! `N` peers with a publisher of capacity `U`:
//!
//! * [`markov`]: the exact continuous-time Markov chain over signature
//!   occupancy vectors, optionally lumped under block relabeling;
//! * [`queueing`]: an approximate queueing network whose fixed point estimates
//!   the large-population throughput;
//! * [`sim`]: event-driven sampling of the same chain for populations the exact
//!   solver cannot reach, plus transient one-club statistics.

pub mod enumerate;
pub mod error;
pub mod lumping;
pub mod markov;
pub mod params;
pub mod queueing;
pub mod replica;
pub mod signature;
pub mod sim;
pub mod state;

pub use enumerate::{enumerate_lumped_states, enumerate_states};
pub use error::{Result, SwarmError};
pub use lumping::lump_state;
pub use params::{ModelParams, PeerPolicy, PublisherPolicy};
pub use replica::{replica_profile, ReplicaProfile};
pub use signature::Signature;
pub use state::{Slot, SwarmState};
