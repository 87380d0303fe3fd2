//! Counter-based random streams.
//!
//! Every random draw in a run comes from a stream keyed by
//! `(seed, purpose, trial index)`. A stream is a fresh xoshiro256++ generator
//! seeded from a mixed 64-bit key, so trial `n` sees the same numbers no
//! matter which worker evaluates it or in which order.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type TrialRng = Xoshiro256PlusPlus;

/// What a stream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Schedule = 1,
    Source = 2,
    LeftStation = 3,
    RightStation = 4,
    Joint = 5,
    RightClock = 6,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-run key material for all purposes.
#[derive(Debug, Clone, Copy)]
pub struct Streams {
    seed: u64,
}

impl Streams {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn key(&self, purpose: Purpose, trial: u64) -> u64 {
        let k = mix64(self.seed ^ mix64((purpose as u64).wrapping_mul(GOLDEN)));
        mix64(k ^ mix64(trial.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    #[inline]
    pub fn trial(&self, purpose: Purpose, trial: u64) -> TrialRng {
        TrialRng::seed_from_u64(self.key(purpose, trial))
    }
}
