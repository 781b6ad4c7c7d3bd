//! Seeded uniform randomness standing in for the detector clicks of a
//! physical measurement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Anything that yields uniform draws on `[0, 1)`.
///
/// Every stochastic operation in the crate consumes draws through this trait,
/// one draw per measurement, pull or drift sign, so that the number and order
/// of draws per step is part of each operation's contract.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

/// A reproducible stream of uniform draws.
///
/// Streams are ChaCha8 instances; the 64-bit seed selects the key and the
/// stream index selects one of the 2^64 independent ChaCha streams under that
/// key, so `(root, i)` and `(root, j)` never overlap.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self::derived(seed, 0)
    }

    /// Stream number `index` under `root_seed`.
    pub fn derived(root_seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(root_seed);
        rng.set_stream(index);
        Self {
            seed: root_seed,
            stream: index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream
    }
}

impl UniformSource for RandomStream {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl<S: UniformSource + ?Sized> UniformSource for &mut S {
    #[inline]
    fn next_uniform(&mut self) -> f64 {
        (**self).next_uniform()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RandomStream::new(99);
        let mut b = RandomStream::new(99);
        for _ in 0..1000 {
            assert_eq!(a.next_uniform().to_bits(), b.next_uniform().to_bits());
        }
    }

    #[test]
    fn derived_streams_differ() {
        let mut a = RandomStream::derived(7, 0);
        let mut b = RandomStream::derived(7, 1);
        let same = (0..1000)
            .filter(|_| a.next_uniform() == b.next_uniform())
            .count();
        assert_eq!(same, 0);
    }

    #[test]
    fn draws_are_in_unit_interval() {
        let mut s = RandomStream::new(3);
        for _ in 0..10_000 {
            let u = s.next_uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn cross_stream_bits_are_uncorrelated() {
        // Agreement rate of the leading bit of two sibling streams.
        let n = 100_000;
        let mut a = RandomStream::derived(11, 4);
        let mut b = RandomStream::derived(11, 5);
        let agree = (0..n)
            .filter(|_| (a.next_uniform() < 0.5) == (b.next_uniform() < 0.5))
            .count();
        let z = (2.0 * agree as f64 - n as f64) / (n as f64).sqrt();
        assert!(z.abs() < 3.29, "z = {z}");
    }
}
