//! Deterministic random-number streams for reproducible Monte Carlo runs.
//!
//! Every stochastic piece of a run draws from a [`SimRng`] obtained from a
//! [`RngFactory`] by stream id. Stream keys are derived by hashing
//! (master seed, stream id) through a SplitMix64 chain into a full ChaCha12
//! key, so streams are statistically independent, identical across
//! platforms, and independent of how work is scheduled across threads: a
//! sweep gives point `i`, setting `j` the stream id `i·4 + j` no matter how
//! many workers process the grid.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// The concrete RNG used by all samplers in the crate.
pub type SimRng = ChaCha12Rng;

/// Number of per-point streams a CHSH sweep consumes (one per setting).
pub const STREAMS_PER_SWEEP_POINT: u64 = 4;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives independent, reproducible RNG streams from one master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngFactory {
    master: u64,
}

impl RngFactory {
    pub fn new(master_seed: u64) -> RngFactory {
        RngFactory { master: master_seed }
    }

    /// The master seed this factory was built from.
    pub fn master_seed(&self) -> u64 {
        self.master
    }

    /// The RNG for one stream id; equal (seed, id) pairs always yield the
    /// same sequence.
    pub fn stream(&self, stream_id: u64) -> SimRng {
        // Scramble the id before folding it into the master so that
        // neighboring ids do not produce related key material.
        let mut id_state = stream_id;
        let scrambled = splitmix64(&mut id_state);
        let mut state = self.master ^ scrambled;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        ChaCha12Rng::from_seed(key)
    }

    /// Stream id for Monte Carlo draws of sweep point `point`, CHSH setting
    /// `setting` (0..4).
    pub fn sweep_stream(&self, point: usize, setting: usize) -> SimRng {
        debug_assert!(setting < STREAMS_PER_SWEEP_POINT as usize);
        self.stream(point as u64 * STREAMS_PER_SWEEP_POINT + setting as u64)
    }
}
