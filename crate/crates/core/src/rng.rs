//! Keyed random streams.
//!
//! Every draw in a task instance comes from a ChaCha8 generator whose 256-bit
//! key is `seed (8 bytes LE) ++ domain tag (8 bytes LE) ++ 16 zero bytes`
//! and whose 64-bit stream number is the index inside that domain. Two
//! streams with the same `(seed, StreamId)` produce the same sequence on any
//! platform, and no stream depends on how many values another one consumed,
//! so timesteps can be generated in any order or in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Label of one independent stream inside a task instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamId {
    /// Fixed pattern graph `i` of a deterministic periodic task.
    Pattern(u64),
    /// Community structure `i` of a stochastic periodic task.
    Partition(u64),
    /// Everything drawn fresh at timestep `t`.
    Timestep(u64),
    /// Free-form label for tests and external callers.
    Custom { domain: u64, index: u64 },
}

impl StreamId {
    fn domain_and_index(self) -> (u64, u64) {
        match self {
            StreamId::Pattern(i) => (1, i),
            StreamId::Partition(i) => (2, i),
            StreamId::Timestep(t) => (3, t),
            // Offset keeps custom domains clear of the named ones.
            StreamId::Custom { domain, index } => (domain.wrapping_add(1 << 32), index),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub seed: u64,
    pub id: StreamId,
}

impl RngStream {
    pub fn new(seed: u64, id: StreamId) -> Self {
        RngStream { seed, id }
    }

    pub fn timestep(seed: u64, t: usize) -> Self {
        Self::new(seed, StreamId::Timestep(t as u64))
    }

    /// Fresh generator positioned at the start of the stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let (domain, index) = self.id.domain_and_index();
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(index);
        rng
    }
}
