//! Deterministic random streams.
//!
//! Every replica of every study draws from its own ChaCha8 stream whose seed
//! is a SplitMix64-style mix of `(master_seed, replica_index, module_tag)`.
//! The derived seed depends only on these three numbers, so results do not
//! depend on how replicas are scheduled over threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Module tags keep the streams of different subsystems disjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    Noise = 0x6e6f_6973_6500_0001,
    Skorohod = 0x736b_6f72_6f00_0002,
    Spatial = 0x7370_6174_6900_0003,
    Temporal = 0x7465_6d70_6f00_0004,
    Stationarity = 0x7374_6174_6900_0005,
    Bootstrap = 0x626f_6f74_7300_0006,
    Moments = 0x6d6f_6d65_6e00_0007,
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64-bit seed for replica `replica` of subsystem `tag` under `master_seed`.
pub fn derive_seed(master_seed: u64, replica: u64, tag: StreamTag) -> u64 {
    let a = splitmix(master_seed ^ tag as u64);
    let b = splitmix(a ^ replica.wrapping_mul(GOLDEN));
    splitmix(b ^ (tag as u64).rotate_left(17))
}

pub fn stream(seed: u64) -> StreamRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn replica_stream(master_seed: u64, replica: u64, tag: StreamTag) -> StreamRng {
    stream(derive_seed(master_seed, replica, tag))
}
