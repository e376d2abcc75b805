//! Reproducible random-number streams.
//!
//! A stream is identified by `(root_seed, stream_id)`. The root seed keys a
//! ChaCha block cipher and the stream id selects its independent 64-bit stream,
//! so replicate `i` of an experiment always sees the same numbers no matter
//! which thread runs it or in what order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::special::std_normal_quantile;

#[derive(Debug, Clone)]
pub struct RngStream {
    root_seed: u64,
    stream_id: u64,
    inner: ChaCha12Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(root_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha12Rng::seed_from_u64(root_seed);
        inner.set_stream(stream_id);
        RngStream { root_seed, stream_id, inner }
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream keyed by this stream's identity and `sub`. Independent of
    /// how many numbers have been drawn from `self`.
    pub fn fork(&self, sub: u64) -> RngStream {
        let key = splitmix64(self.root_seed ^ splitmix64(self.stream_id.wrapping_add(0x5851_F42D_4C95_7F2D)));
        RngStream::new(key, sub)
    }

    /// Uniform draw on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw by inversion of a uniform.
    #[inline]
    pub fn std_normal(&mut self) -> f64 {
        std_normal_quantile(self.uniform())
    }

    pub fn std_normals(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.std_normal()).collect()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
