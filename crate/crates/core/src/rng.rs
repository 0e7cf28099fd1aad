//! Deterministic, splittable random-number streams for parallel Monte Carlo.
//!
//! Each trial owns an independent stream derived from `(seed, stream_id)`;
//! within a stream, `lane` carves out sub-streams for distinct purposes
//! (trajectory, bits, counts, ...). Identical `(seed, stream_id, lane)`
//! always reproduces the identical sample sequence, which is what makes
//! common-random-numbers coupling and thread-count-independent results work:
//! two estimators that ask for the same lane see the same draws no matter
//! how trials are scheduled.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Lane for relative-trajectory sampling (shared across CSI modes).
pub const LANE_TRAJECTORY: u64 = 0;
/// Lane for transmitted-bit sampling.
pub const LANE_BITS: u64 = 1;
/// Lane for received-count sampling (shared across CSI modes).
pub const LANE_COUNTS: u64 = 2;
/// Lane for particle positions in the Brownian simulator.
pub const LANE_PARTICLES: u64 = 3;

/// Handle identifying one trial's random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    /// Experiment-level seed.
    pub seed: u64,
    /// Trial index.
    pub stream_id: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RngStream { seed, stream_id }
    }

    /// Generator for the default lane.
    pub fn rng(&self) -> ChaCha8Rng {
        self.lane(LANE_TRAJECTORY)
    }

    /// Independent generator for a purpose-specific sub-stream.
    pub fn lane(&self, lane: u64) -> ChaCha8Rng {
        let mut state = SplitMix64::new(self.seed);
        state.absorb(self.stream_id);
        state.absorb(lane);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&state.next().to_le_bytes());
        }
        ChaCha8Rng::from_seed(key)
    }
}

/// SplitMix64 used purely as a seed-expansion mixer.
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    fn absorb(&mut self, value: u64) {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15).wrapping_add(self.next() ^ value);
    }

    fn next(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }
}

/// Run `trials` independent work items, possibly in parallel, and return
/// their results in trial order. Output is a pure function of the inputs:
/// scheduling and `threads` influence speed only.
pub fn run_trials<T, F>(trials: u64, threads: Option<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .expect("failed to build worker pool");
    pool.install(|| (0..trials).into_par_iter().map(&f).collect())
}
