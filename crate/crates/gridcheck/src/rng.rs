//! Named RNG substreams.
//!
//! Every stochastic subsystem draws from its own stream derived from the
//! config seed and a stream tag (`"gridlet-gen"`, `"fault/<id>"`,
//! `"scheduler"`). Adding draws in one subsystem therefore never perturbs
//! another, which keeps baseline/adaptive comparisons under the same seed
//! paired: identical workloads and identical per-resource fault traces.

use rand_chacha::ChaCha12Rng;
use rand_chacha::rand_core::SeedableRng;

pub const STREAM_GRIDLET_GEN: &str = "gridlet-gen";
pub const STREAM_SCHEDULER: &str = "scheduler";

/// Stream tag for one resource's fault arrivals.
pub fn fault_stream_tag(resource_index: u32) -> String {
    format!("fault/{resource_index}")
}

// FNV-1a, fixed here so stream derivation never depends on std's hasher.
fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive the ChaCha seed for substream `tag` of run seed `base`.
pub fn stream_seed(base: u64, tag: &str) -> [u8; 32] {
    let mut state = base ^ fnv1a(tag.as_bytes());
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    seed
}

/// RNG for substream `tag` of run seed `base`.
pub fn stream_rng(base: u64, tag: &str) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(stream_seed(base, tag))
}
