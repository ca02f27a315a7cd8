//! Named random sub-streams derived from a single user seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Consumers of randomness. Each gets an independent ChaCha key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Split,
    Init,
    Augment,
    Sampling,
    Profile,
}

impl Purpose {
    fn salt(self) -> u64 {
        match self {
            Purpose::Split => 0x5350_4c49_5400_0001,
            Purpose::Init => 0x494e_4954_0000_0002,
            Purpose::Augment => 0x4155_474d_0000_0003,
            Purpose::Sampling => 0x5341_4d50_0000_0004,
            Purpose::Profile => 0x5052_4f46_0000_0005,
        }
    }
}

/// Deterministic generator for `(seed, purpose, index)`. `index` selects the
/// ChaCha stream, e.g. the epoch number for triple sampling.
pub fn stream(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ purpose.salt());
    rng.set_stream(index);
    rng
}
