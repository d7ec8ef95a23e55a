//! Seeded random streams.
//!
//! Every stochastic quantity in an experiment is drawn from a ChaCha stream
//! addressed by `(seed, purpose, index)`. Two runs with the same seed draw the
//! same numbers for the same purpose no matter which engine is running, which
//! is what makes agent and oracle traces comparable step by step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// What a stream is used for. The discriminant selects the ChaCha stream id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Drop = 1,
    Mobility = 2,
    Channel = 3,
    InitialBeams = 4,
    AgentInit = 5,
    Exploration = 6,
    Replay = 7,
}

pub fn stream(seed: u64, purpose: Purpose, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) ^ index);
    rng
}
