//! Seed splitting.
//!
//! Every stochastic stage draws from a [`ChaCha8Rng`] whose seed is derived
//! from the master seed and a path of stream tags, e.g.
//! `derive(master, &[streams::RUN, run, streams::BAND, band])`. Derivation folds each tag
//! into the state with a SplitMix64 finalizer, so sibling streams are
//! decorrelated and a job's seed depends only on its key, never on the
//! order in which jobs are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags used by the pipeline.
pub mod streams {
    pub const NETWORK: u64 = 0x4e45_5457;
    pub const HETEROGENEITY: u64 = 0x4845_5445;
    pub const DRIVE: u64 = 0x4452_4956;
    pub const RECORDER: u64 = 0x5245_4344;
    pub const RUN: u64 = 0x5255_4e00;
    pub const BAND: u64 = 0x4241_4e44;
    pub const PERMUTATION: u64 = 0x5045_524d;
    pub const ENCODE: u64 = 0x454e_4344;
    pub const TRAIN: u64 = 0x5452_4149;
    pub const INIT: u64 = 0x494e_4954;
    pub const SHUFFLE: u64 = 0x5348_5546;
    pub const FOLD: u64 = 0x464f_4c44;
    pub const IMPORTANCE: u64 = 0x494d_504f;
    pub const SYNTH: u64 = 0x5359_4e54;
    pub const SUBJECT: u64 = 0x5355_424a;
    pub const CONDITION: u64 = 0x434f_4e44;
    pub const PRIOR: u64 = 0x5052_494f;
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derives a child seed from `master` and a path of stream tags.
pub fn derive(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &tag| splitmix64(acc ^ splitmix64(tag)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(master: u64, path: &[u64]) -> ChaCha8Rng {
    rng(derive(master, path))
}
