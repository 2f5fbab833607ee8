#![allow(dead_code)]

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use xychain::model::{custom_channel, fm_ground_channel, neel_channel};
use xychain::BranchPair;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random channel: between 1 and N-1 distinct sites from 2..=N.
pub fn random_channel(rng: &mut impl Rng, n: usize) -> BranchPair {
    let m = rng.random_range(1..n);
    let sites: Vec<usize> = sample(rng, n - 1, m).into_iter().map(|i| i + 2).collect();
    custom_channel(n, &sites).unwrap()
}

pub fn channels(rng: &mut impl Rng, n: usize, customs: usize) -> Vec<BranchPair> {
    let mut out = vec![fm_ground_channel(n).unwrap(), neel_channel(n).unwrap()];
    out.extend((0..customs).map(|_| random_channel(rng, n)));
    out
}
