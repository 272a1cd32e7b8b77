use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Replayable stream of random variates identified by `(seed, stream_id)`.
///
/// Backed by ChaCha8, which has a native 64-bit stream selector: distinct
/// stream ids under one seed index disjoint keystreams. [`RngStream::fork`]
/// derives child ids deterministically so that nested simulations
/// (replication, then session, then purpose) each get their own stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self { seed, stream_id, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream for `tag`, independent of how far `self` has advanced.
    pub fn fork(&self, tag: u64) -> RngStream {
        let id = splitmix64(splitmix64(self.stream_id) ^ tag.wrapping_add(0x6a09_e667_f3bc_c909));
        RngStream::new(self.seed, id)
    }

    /// Uniform variate strictly inside (0, 1).
    pub fn uniform(&mut self) -> f64 {
        // 53 random bits placed at bin centres: smallest value 2^-54, largest 1 - 2^-54
        let bits = self.rng.next_u64() >> 11;
        (bits as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform integer in `lo..=hi`.
    pub fn uniform_int(&mut self, lo: u32, hi: u32) -> u32 {
        self.rng.random_range(lo..=hi)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn golden_first_draw() {
        let mut s = RngStream::new(42, 0);
        let first = s.uniform();
        assert_eq!(first.to_bits(), GOLDEN_SEED42_FIRST.to_bits(), "got {first:e}");
    }

    // Frozen from the first implementation; changing the generator breaks replay.
    const GOLDEN_SEED42_FIRST: f64 = 0.681_896_192_306_671_5;

    #[test]
    fn uniform_support_and_mean() {
        let mut s = RngStream::new(7, 3);
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let u = s.uniform();
            assert!(u > 0.0 && u < 1.0);
            sum += u;
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.002);
    }

    #[test]
    fn replay_is_bit_identical() {
        let a: Vec<u64> = {
            let mut s = RngStream::new(99, 5);
            (0..1000).map(|_| s.uniform().to_bits()).collect()
        };
        let b: Vec<u64> = {
            let mut s = RngStream::new(99, 5);
            (0..1000).map(|_| s.uniform().to_bits()).collect()
        };
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_streams_are_uncorrelated() {
        let n = 100_000;
        let mut s0 = RngStream::new(42, 0);
        let mut s1 = RngStream::new(42, 1);
        let mut f = s0.fork(0);
        let x: Vec<f64> = (0..n).map(|_| s0.uniform()).collect();
        let y: Vec<f64> = (0..n).map(|_| s1.uniform()).collect();
        let z: Vec<f64> = (0..n).map(|_| f.uniform()).collect();
        // 5 standard errors of a null correlation
        let bound = 5.0 / (n as f64).sqrt();
        assert!(correlation(&x, &y).abs() < bound);
        assert!(correlation(&x, &z).abs() < bound);
        assert!(correlation(&y, &z).abs() < bound);
    }

    #[test]
    fn fork_is_position_independent() {
        let base = RngStream::new(1, 2);
        let mut advanced = base.clone();
        for _ in 0..10 {
            advanced.uniform();
        }
        assert_eq!(base.fork(3).uniform(), advanced.fork(3).uniform());
        assert_ne!(base.fork(3).uniform(), base.fork(4).uniform());
    }

    #[test]
    fn uniform_int_range() {
        let mut s = RngStream::new(5, 0);
        let mut seen = [false; 4];
        for _ in 0..1000 {
            let k = s.uniform_int(1, 4);
            assert!((1..=4).contains(&k));
            seen[(k - 1) as usize] = true;
        }
        assert!(seen.iter().all(|&b| b));
    }

    fn correlation(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (a, b) in x.iter().zip(y) {
            sxy += (a - mx) * (b - my);
            sxx += (a - mx) * (a - mx);
            syy += (b - my) * (b - my);
        }
        sxy / num_traits::Float::sqrt(sxx * syy)
    }
}
