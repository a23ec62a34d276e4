//! Counter-based randomness derived from a 64-bit seed and named streams.
//!
//! Every draw is a pure function of `(seed, label, block, counter)`, so any
//! factor of a feature map can be recomputed on demand instead of stored.
//!
//! # Mixer
//!
//! The tuple is hashed with the MurmurHash3 x64 block mixer over three 64-bit
//! words followed by the `fmix64` finalizer:
//!
//! ```text
//! label_key = FNV-1a-64(label bytes)
//! h = seed
//! for k in [label_key, block, counter]:
//!     k = rotl(k * 0x87c37b91114253d5, 31) * 0x4cf5ad432745937f
//!     h = rotl(h ^ k, 27) * 5 + 0x52dce729
//! h ^= 24
//! h = fmix64(h)
//! ```
//!
//! All arithmetic wraps modulo 2^64. The first two words are folded once per
//! stream; each draw only mixes the counter.

use crate::error::{Error, Result};

const C1: u64 = 0x87c3_7b91_1142_53d5;
const C2: u64 = 0x4cf5_ad43_2745_937f;
const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Smallest value returned by the log-guarded uniform, 2^-53.
pub const UNIFORM_FLOOR: f64 = 1.0 / (1u64 << 53) as f64;

#[inline]
fn fmix64(mut k: u64) -> u64 {
    k ^= k >> 33;
    k = k.wrapping_mul(0xff51_afd7_ed55_8ccd);
    k ^= k >> 33;
    k = k.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    k ^= k >> 33;
    k
}

#[inline]
fn mix_word(h: u64, k: u64) -> u64 {
    let k = k.wrapping_mul(C1).rotate_left(31).wrapping_mul(C2);
    (h ^ k)
        .rotate_left(27)
        .wrapping_mul(5)
        .wrapping_add(0x52dc_e729)
}

/// FNV-1a over the label bytes.
pub fn label_key(label: &str) -> u64 {
    label.bytes().fold(FNV_OFFSET, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

/// Pure hash of the full stream tuple.
pub fn hash64(seed: u64, label: &str, block: u64, counter: u64) -> u64 {
    let h = mix_word(mix_word(seed, label_key(label)), block);
    fmix64(mix_word(h, counter) ^ 24)
}

/// A named, seeded draw sequence. Each hash consumes one counter step.
#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    label: String,
    block: u64,
    counter: u64,
    prefix: u64,
    spare_gaussian: Option<f64>,
}

impl RandomStream {
    pub fn new(seed: u64, label: &str, block: u64) -> Self {
        Self {
            seed,
            label: label.to_owned(),
            block,
            counter: 0,
            prefix: mix_word(mix_word(seed, label_key(label)), block),
            spare_gaussian: None,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn block(&self) -> u64 {
        self.block
    }

    /// Number of hash evaluations consumed so far.
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Hash at an arbitrary counter without advancing.
    #[inline]
    pub fn hash_at(&self, counter: u64) -> u64 {
        fmix64(mix_word(self.prefix, counter) ^ 24)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let h = self.hash_at(self.counter);
        self.counter += 1;
        h
    }

    /// Uniform on `[0, 1)` from the top 53 bits of one hash.
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * UNIFORM_FLOOR
    }

    /// Uniform on `(0, 1)`: an exact zero is replaced by 2^-53.
    #[inline]
    fn uniform_open(&mut self) -> f64 {
        let u = self.uniform01();
        if u == 0.0 {
            UNIFORM_FLOOR
        } else {
            u
        }
    }

    /// `+1` or `-1` from the top bit of one hash.
    #[inline]
    pub fn sign_pm1(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Uniform index in `0..bound` by multiply-shift; bias is below `bound / 2^64`.
    #[inline]
    pub fn index_below(&mut self, bound: usize) -> usize {
        ((u128::from(self.next_u64()) * bound as u128) >> 64) as usize
    }

    /// Standard normal via Box-Muller.
    ///
    /// Variates come in pairs from two uniforms; the sine branch is held and
    /// returned by the next call, so two gaussians always cost two counter steps.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_gaussian.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform01();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        self.spare_gaussian = Some(r * s);
        r * c
    }

    /// Fisher-Yates shuffle of `0..n` driven by this stream.
    pub fn permutation(&mut self, n: usize) -> Result<Vec<usize>> {
        if n == 0 {
            return Err(Error::EmptyPermutation);
        }
        let mut perm: Vec<usize> = (0..n).collect();
        self.shuffle(&mut perm);
        Ok(perm)
    }

    /// In-place Fisher-Yates: for `i` from `n-1` down to `1`, swap `i` with a
    /// uniform `j <= i`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.index_below(i + 1);
            items.swap(i, j);
        }
    }

    /// Uniform point in the `n`-ball of radius `r`: `r * U^(1/n) * X / |X|`.
    ///
    /// Draws `n` gaussians then one uniform. An all-zero `X` is redrawn.
    pub fn unit_ball_sample(&mut self, n: usize, r: f64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidArgument("unit ball dimension must be >= 1".into()));
        }
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!("ball radius must be > 0, got {r}")));
        }
        let mut x = vec![0.0; n];
        let norm = loop {
            x.iter_mut().for_each(|v| *v = self.gaussian());
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                break norm;
            }
        };
        let radius = r * self.uniform01().powf(1.0 / n as f64);
        let scale = radius / norm;
        x.iter_mut().for_each(|v| *v *= scale);
        Ok(x)
    }

    /// Chi variate with `d` degrees of freedom, the norm of `d` gaussians.
    pub fn chi_sample(&mut self, d: usize) -> f64 {
        (0..d).map(|_| self.gaussian().powi(2)).sum::<f64>().sqrt()
    }
}

/// Convenience wrapper over [`RandomStream::permutation`].
pub fn fisher_yates_permutation(stream: &mut RandomStream, n: usize) -> Result<Vec<usize>> {
    stream.permutation(n)
}
