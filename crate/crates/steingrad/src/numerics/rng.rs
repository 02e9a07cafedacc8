//! Counter-based deterministic random stream.
//!
//! A [`RandomStream`] is an immutable token `(seed, stream_id, index)`; each
//! draw keys a ChaCha block cipher with the seed, selects the stream, jumps
//! the block counter to the index, and returns the next token alongside the
//! value. Identical tokens therefore yield identical draws regardless of
//! thread scheduling, and distinct stream ids give independent-quality
//! streams.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::linalg::Vector;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Immutable handle on a deterministic random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomStream {
    seed: u64,
    stream_id: u64,
    index: u64,
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        RandomStream {
            seed,
            stream_id,
            index: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Derive an independent child stream. The child's id mixes the parent
    /// id and the child index so distinct (parent, child) pairs collide with
    /// negligible probability.
    pub fn substream(&self, child: u64) -> RandomStream {
        let mixed = splitmix64(self.stream_id ^ splitmix64(child.wrapping_add(1)));
        RandomStream {
            seed: self.seed,
            stream_id: mixed,
            index: 0,
        }
    }

    /// Next raw 64-bit draw.
    pub fn next_u64(self) -> (RandomStream, u64) {
        let mut key = [0u8; 32];
        let mut s = self.seed;
        for chunk in key.chunks_exact_mut(8) {
            s = splitmix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(self.stream_id);
        // Each u64 consumes two 32-bit words of the keystream.
        rng.set_word_pos(u128::from(self.index) * 2);
        let value = rng.next_u64();
        (
            RandomStream {
                index: self.index + 1,
                ..self
            },
            value,
        )
    }

    /// Uniform draw in the open interval (0, 1).
    pub fn next_uniform(self) -> (RandomStream, f64) {
        let (next, bits) = self.next_u64();
        let u = ((bits >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0);
        (next, u)
    }

    /// Standard normal draw via the Box-Muller cosine branch (two uniforms
    /// per normal; the sine branch is discarded to keep the token
    /// progression a pure function of the draw count).
    pub fn next_normal(self) -> (RandomStream, f64) {
        let (s1, u1) = self.next_uniform();
        let (s2, u2) = s1.next_uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        (s2, r * (2.0 * std::f64::consts::PI * u2).cos())
    }

    /// Vector of `dim` independent standard normals.
    pub fn next_normal_vec(self, dim: usize) -> (RandomStream, Vector) {
        let mut stream = self;
        let mut out = Vec::with_capacity(dim);
        for _ in 0..dim {
            let (next, z) = stream.next_normal();
            stream = next;
            out.push(z);
        }
        (stream, Vector::from_raw(out))
    }
}
