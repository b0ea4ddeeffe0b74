//! Deterministic randomness: a single root seed fans out to per-experiment,
//! per-trial and per-component streams.
//!
//! Derivation scheme: the root seed and a `(label, index)` pair are folded
//! through SplitMix64; the resulting state keys a ChaCha12 stream. Identical
//! root seed and derivation path always reproduce identical draws, which is
//! what the harness determinism contract rests on.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::params::DdGrid;
use crate::{qam_map, Scalar};

#[inline]
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// A node in the seed-derivation tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStream {
    state: u64,
}

impl SeedStream {
    pub fn new(root: u64) -> Self {
        Self { state: root }
    }

    /// Child stream for `(label, index)`; deterministic and collision-mixed.
    pub fn derive(&self, label: &str, index: u64) -> Self {
        let mut s = self.state ^ fnv1a(label.as_bytes()).rotate_left(17) ^ index.wrapping_mul(0xA24B_AED4_963E_E407);
        splitmix64(&mut s);
        Self { state: s }
    }

    /// Materialize a ChaCha12 generator for this node.
    pub fn rng(&self) -> ChaCha12Rng {
        let mut s = self.state;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut s).to_le_bytes());
        }
        ChaCha12Rng::from_seed(key)
    }
}

/// One standard-normal pair via Box-Muller (platform-stable given the rng).
pub fn normal_pair<T: Scalar>(rng: &mut ChaCha12Rng) -> (T, T) {
    // u1 in (0, 1] so the log is finite.
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let ang = 2.0 * std::f64::consts::PI * u2;
    (
        T::from_f64(r * ang.cos()).unwrap(),
        T::from_f64(r * ang.sin()).unwrap(),
    )
}

/// Circularly-symmetric complex Gaussian with variance `var` (total, both
/// quadratures).
pub fn complex_normal<T: Scalar>(var: T, rng: &mut ChaCha12Rng) -> Complex<T> {
    let (a, b) = normal_pair::<T>(rng);
    let s = (var / T::from_f64(2.0).unwrap()).sqrt();
    Complex::new(a * s, b * s)
}

pub fn random_bits(len: usize, rng: &mut ChaCha12Rng) -> Vec<u8> {
    (0..len).map(|_| rng.gen_range(0..2u8)).collect()
}

/// Uniform random 4-QAM grid with unit symbol energy.
pub fn random_qam_grid<T: Scalar>(m: usize, n: usize, rng: &mut ChaCha12Rng) -> DdGrid<T> {
    let bits = random_bits(2 * m * n, rng);
    qam_map(&bits, m, n).expect("bit count matches by construction")
}
