//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha8 generator keyed by a
//! master seed and a replication index, with a separate stream per purpose.
//! Results therefore do not depend on thread scheduling or on how many draws
//! another purpose consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Latent = 1,
    Covariates = 2,
    Selection = 3,
    Split = 4,
    Optimizer = 5,
    Auxiliary = 6,
}

/// Generator for `(master, rep)` and the given purpose.
pub fn stream(master: u64, rep: u64, purpose: Purpose) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master.to_le_bytes());
    seed[8..16].copy_from_slice(&rep.to_le_bytes());
    seed[16..24].copy_from_slice(b"univinf\0");
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(purpose as u64);
    rng
}
