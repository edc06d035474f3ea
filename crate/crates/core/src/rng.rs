//! Deterministic random streams.
//!
//! Every replicate, auxiliary run and reaction clock owns a [`Stream`]
//! derived from a parent by a label. Derivation is a pure function of
//! `(parent seed, label)`, so results never depend on how much randomness a
//! sibling consumed or on which worker thread ran it.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::scalar::Scalar;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A seeded ChaCha8 stream that can spawn independent child streams.
#[derive(Debug, Clone)]
pub struct Stream {
    seed: u64,
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Child stream identified by `label`. Does not advance `self`.
    pub fn derive(&self, label: u64) -> Stream {
        Stream::new(splitmix64(self.seed ^ splitmix64(label.wrapping_add(0xA076_1D64_78BD_642F))))
    }

    /// Stream for replicate `index` of an experiment seeded with `master_seed`.
    pub fn for_replicate(master_seed: u64, index: u64) -> Stream {
        Stream::new(master_seed).derive(index)
    }

    pub fn normal<S: Scalar>(&mut self) -> S {
        let z: f64 = self.rng.sample(StandardNormal);
        S::of(z)
    }

    /// Unit-rate exponential variate.
    pub fn exp1<S: Scalar>(&mut self) -> S {
        let e: f64 = self.rng.sample(Exp1);
        S::of(e)
    }

    /// Uniform variate on `[0, 1)`.
    pub fn uniform<S: Scalar>(&mut self) -> S {
        let u: f64 = self.rng.random();
        S::of(u)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        p >= 1.0 || self.rng.random::<f64>() < p
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
}
