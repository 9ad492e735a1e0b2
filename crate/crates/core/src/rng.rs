//! Deterministic random streams.
//!
//! Every random decision in a run draws from a ChaCha8 stream keyed by
//! `(seed, round, slot)`, so results do not depend on scheduling or on which
//! thread executes a client.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Slot used for the server's client sampling.
pub const SERVER_SLOT: u64 = 0;
/// Round key used for draws that happen before the first round.
pub const SETUP_ROUND: u64 = u32::MAX as u64;

/// Stream for client `client` at `round`.
pub fn client_rng(seed: u64, client: usize, round: usize) -> ChaCha8Rng {
    stream(seed, round as u64, client as u64 + 1)
}

/// Stream for the server's sampling at `round`.
pub fn server_rng(seed: u64, round: usize) -> ChaCha8Rng {
    stream(seed, round as u64, SERVER_SLOT)
}

pub fn stream(seed: u64, round: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((round << 32) | (slot & 0xffff_ffff));
    rng
}
