//! Fastfood feature maps.
//!
//! Each expansion block realizes `Z = C H G P H B / (sigma * sqrt(n))` on the
//! zero-padded input, where `B` is a random sign diagonal, `P` a random
//! permutation, `G` a gaussian diagonal, `C` a kernel-dependent radial scale and
//! `H` the Walsh-Hadamard matrix. `E` blocks are stacked and the result is
//! mapped to `[cos(Zx), sin(Zx)] / sqrt(n * E)`.
//!
//! Every factor is drawn from [`detrand`](crate::detrand) streams labelled
//! `"B"`, `"Pi"`, `"G"` and `"C"` at the block index, so a
//! [`FeatureMapSpec`] alone reproduces the map.

use std::fmt;
use std::str::FromStr;

use crate::detrand::RandomStream;
use crate::error::{Error, Result};
use crate::wht;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    Rbf { sigma: f64 },
    RbfMatern { sigma: f64, t: usize },
}

impl KernelKind {
    pub fn sigma(&self) -> f64 {
        match *self {
            KernelKind::Rbf { sigma } | KernelKind::RbfMatern { sigma, .. } => sigma,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Rbf { .. } => "rbf",
            KernelKind::RbfMatern { .. } => "matern",
        }
    }
}

/// Smallest power of two `>= d` (`d >= 1`).
pub fn next_pow2(d: usize) -> usize {
    d.max(1).next_power_of_two()
}

/// Everything needed to rebuild one feature map.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMapSpec {
    input_dim: usize,
    expansions: usize,
    kernel: KernelKind,
    seed: u64,
}

impl FeatureMapSpec {
    pub fn new(input_dim: usize, expansions: usize, kernel: KernelKind, seed: u64) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::Config("input dimension must be >= 1".into()));
        }
        if expansions == 0 {
            return Err(Error::Config("expansion count must be >= 1".into()));
        }
        let sigma = kernel.sigma();
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive and finite, got {sigma}")));
        }
        if let KernelKind::RbfMatern { t: 0, .. } = kernel {
            return Err(Error::Config("matern sample count t must be >= 1".into()));
        }
        Ok(Self { input_dim, expansions, kernel, seed })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn padded_dim(&self) -> usize {
        next_pow2(self.input_dim)
    }

    pub fn expansions(&self) -> usize {
        self.expansions
    }

    pub fn kernel(&self) -> KernelKind {
        self.kernel
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Rows of the stacked projection, `n * E`.
    pub fn projection_dim(&self) -> usize {
        self.padded_dim() * self.expansions
    }

    /// Length of the cos/sin feature vector, `2 * n * E`.
    pub fn feature_dim(&self) -> usize {
        2 * self.projection_dim()
    }

    /// Parameters of a softmax head over these features: `C * (2 n E + 1)`.
    pub fn param_count(&self, classes: usize) -> usize {
        classes * (self.feature_dim() + 1)
    }
}

impl fmt::Display for FeatureMapSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "d={}", self.input_dim)?;
        writeln!(f, "E={}", self.expansions)?;
        writeln!(f, "kernel={}", self.kernel.name())?;
        writeln!(f, "sigma={}", self.kernel.sigma())?;
        if let KernelKind::RbfMatern { t, .. } = self.kernel {
            writeln!(f, "t={t}")?;
        }
        writeln!(f, "seed={}", self.seed)
    }
}

impl FromStr for FeatureMapSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (mut d, mut e, mut kernel, mut sigma, mut t, mut seed) = (None, None, None, None, None, None);
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Config(format!("line {}: bad {what} '{value}'", lineno + 1));
            match key {
                "d" => d = Some(value.parse::<usize>().map_err(|_| bad("d"))?),
                "E" => e = Some(value.parse::<usize>().map_err(|_| bad("E"))?),
                "kernel" => kernel = Some(value.to_owned()),
                "sigma" => sigma = Some(value.parse::<f64>().map_err(|_| bad("sigma"))?),
                "t" => t = Some(value.parse::<usize>().map_err(|_| bad("t"))?),
                "seed" => seed = Some(value.parse::<u64>().map_err(|_| bad("seed"))?),
                other => return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        let missing = |k: &str| Error::Config(format!("missing key '{k}'"));
        let sigma = sigma.ok_or_else(|| missing("sigma"))?;
        let kernel = match kernel.as_deref() {
            Some("rbf") => KernelKind::Rbf { sigma },
            Some("matern") => KernelKind::RbfMatern { sigma, t: t.ok_or_else(|| missing("t"))? },
            Some(other) => return Err(Error::Config(format!("unknown kernel '{other}'"))),
            None => return Err(missing("kernel")),
        };
        FeatureMapSpec::new(
            d.ok_or_else(|| missing("d"))?,
            e.ok_or_else(|| missing("E"))?,
            kernel,
            seed.ok_or_else(|| missing("seed"))?,
        )
    }
}

/// One realized set of diagonal and permutation factors.
#[derive(Debug, Clone, PartialEq)]
pub struct FastfoodBlock {
    pub block_index: usize,
    pub b_signs: Vec<f32>,
    pub permutation: Vec<usize>,
    pub g_diag: Vec<f32>,
    pub c_diag: Vec<f32>,
}

impl FastfoodBlock {
    pub fn len(&self) -> usize {
        self.b_signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b_signs.is_empty()
    }
}

fn l2(v: &[f32]) -> f64 {
    v.iter().map(|&x| f64::from(x).powi(2)).sum::<f64>().sqrt()
}

/// RBF radial scale: `chi(n)` draws divided by `|g|`, so each projection row
/// has the norm of an `n`-dimensional standard gaussian.
pub fn calibration_rbf(stream: &mut RandomStream, g_diag: &[f32]) -> Result<Vec<f64>> {
    let g_norm = l2(g_diag);
    if g_norm == 0.0 {
        return Err(Error::DegenerateGaussian);
    }
    let n = g_diag.len();
    Ok((0..n).map(|_| stream.chi_sample(n) / g_norm).collect())
}

/// Matern radial draws: the norm of a sum of `t` uniform samples from the
/// `n`-ball. Not yet divided by `|g|`; see [`build_block`].
pub fn calibration_matern(stream: &mut RandomStream, n: usize, t: usize) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(Error::InvalidArgument("matern sample count t must be >= 1".into()));
    }
    let mut sum = vec![0.0; n];
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        sum.iter_mut().for_each(|s| *s = 0.0);
        for _ in 0..t {
            let z = stream.unit_ball_sample(n, 1.0)?;
            sum.iter_mut().zip(&z).for_each(|(s, v)| *s += v);
        }
        out.push(sum.iter().map(|s| s * s).sum::<f64>().sqrt());
    }
    Ok(out)
}

/// Draws the factors of block `block_index`.
pub fn build_block(spec: &FeatureMapSpec, block_index: usize) -> Result<FastfoodBlock> {
    if block_index >= spec.expansions {
        return Err(Error::InvalidArgument(format!(
            "block index {block_index} out of range for {} expansions",
            spec.expansions
        )));
    }
    let n = spec.padded_dim();
    let seed = spec.seed;
    let block = block_index as u64;

    let mut bs = RandomStream::new(seed, "B", block);
    let b_signs = (0..n).map(|_| bs.sign_pm1() as f32).collect();

    let permutation = RandomStream::new(seed, "Pi", block).permutation(n)?;

    let mut gs = RandomStream::new(seed, "G", block);
    let g_diag: Vec<f32> = (0..n).map(|_| gs.gaussian() as f32).collect();

    let mut cs = RandomStream::new(seed, "C", block);
    let c_diag = match spec.kernel {
        KernelKind::Rbf { .. } => calibration_rbf(&mut cs, &g_diag)?,
        KernelKind::RbfMatern { t, .. } => {
            let g_norm = l2(&g_diag);
            if g_norm == 0.0 {
                return Err(Error::DegenerateGaussian);
            }
            let mut radial = calibration_matern(&mut cs, n, t)?;
            radial.iter_mut().for_each(|r| *r /= g_norm);
            radial
        }
    };

    Ok(FastfoodBlock {
        block_index,
        b_signs,
        permutation,
        g_diag,
        c_diag: c_diag.into_iter().map(|c| c as f32).collect(),
    })
}

/// A spec together with its realized blocks.
#[derive(Debug, Clone)]
pub struct FastfoodMap {
    spec: FeatureMapSpec,
    blocks: Vec<FastfoodBlock>,
    scale: f32,
    feature_scale: f32,
}

impl FastfoodMap {
    pub fn new(spec: FeatureMapSpec) -> Result<Self> {
        let blocks = (0..spec.expansions).map(|i| build_block(&spec, i)).collect::<Result<Vec<_>>>()?;
        Self::from_blocks(spec, blocks)
    }

    pub fn from_blocks(spec: FeatureMapSpec, blocks: Vec<FastfoodBlock>) -> Result<Self> {
        let n = spec.padded_dim();
        if blocks.len() != spec.expansions {
            return Err(Error::LengthMismatch { expected: spec.expansions, actual: blocks.len() });
        }
        for b in &blocks {
            for len in [b.b_signs.len(), b.permutation.len(), b.g_diag.len(), b.c_diag.len()] {
                if len != n {
                    return Err(Error::LengthMismatch { expected: n, actual: len });
                }
            }
            let mut seen = vec![false; n];
            for &p in &b.permutation {
                if p >= n || std::mem::replace(&mut seen[p], true) {
                    return Err(Error::InvalidArgument(format!("block {} permutation is not a bijection", b.block_index)));
                }
            }
        }
        let scale = (1.0 / (spec.kernel.sigma() * (n as f64).sqrt())) as f32;
        let feature_scale = (1.0 / (spec.projection_dim() as f64).sqrt()) as f32;
        Ok(Self { spec, blocks, scale, feature_scale })
    }

    pub fn spec(&self) -> &FeatureMapSpec {
        &self.spec
    }

    pub fn blocks(&self) -> &[FastfoodBlock] {
        &self.blocks
    }

    fn check_input(&self, x: &[f32]) -> Result<()> {
        if x.len() != self.spec.input_dim {
            return Err(Error::LengthMismatch { expected: self.spec.input_dim, actual: x.len() });
        }
        Ok(())
    }

    /// `Z x` into `out` (length `n * E`). `scratch` is resized to `n`.
    pub fn apply_zhat_into(&self, x: &[f32], out: &mut [f32], scratch: &mut Vec<f32>) -> Result<()> {
        self.check_input(x)?;
        let n = self.spec.padded_dim();
        let d = self.spec.input_dim;
        if out.len() != n * self.blocks.len() {
            return Err(Error::LengthMismatch { expected: n * self.blocks.len(), actual: out.len() });
        }
        scratch.resize(n, 0.0);
        for (block, out) in self.blocks.iter().zip(out.chunks_exact_mut(n)) {
            // B x, zero padded
            for ((s, &xi), &b) in scratch[..d].iter_mut().zip(x).zip(&block.b_signs) {
                *s = b * xi;
            }
            scratch[d..].iter_mut().for_each(|s| *s = 0.0);
            wht::wht_fast(scratch)?;
            // P then G: gather out[i] = v[perm[i]]
            for ((o, &p), &g) in out.iter_mut().zip(&block.permutation).zip(&block.g_diag) {
                *o = scratch[p] * g;
            }
            wht::wht_fast(out)?;
            for (o, &c) in out.iter_mut().zip(&block.c_diag) {
                *o *= c * self.scale;
            }
        }
        Ok(())
    }

    pub fn apply_zhat(&self, x: &[f32]) -> Result<Vec<f32>> {
        let mut out = vec![0.0; self.spec.projection_dim()];
        self.apply_zhat_into(x, &mut out, &mut Vec::new())?;
        Ok(out)
    }

    /// The `1 / sqrt(n E)` factor applied by [`feature_map_into`](Self::feature_map_into).
    pub fn feature_scale(&self) -> f32 {
        self.feature_scale
    }

    /// `[cos(Zx), sin(Zx)] / sqrt(n E)` into `out` (length `2 n E`).
    pub fn feature_map_into(&self, x: &[f32], out: &mut [f32], scratch: &mut Vec<f32>) -> Result<()> {
        self.cos_sin_into(x, out, scratch, self.feature_scale)
    }

    /// `[cos(Zx), sin(Zx)]` without the normalization.
    pub fn cos_sin_features_into(&self, x: &[f32], out: &mut [f32], scratch: &mut Vec<f32>) -> Result<()> {
        self.cos_sin_into(x, out, scratch, 1.0)
    }

    fn cos_sin_into(&self, x: &[f32], out: &mut [f32], scratch: &mut Vec<f32>, a: f32) -> Result<()> {
        let dim = self.spec.projection_dim();
        if out.len() != 2 * dim {
            return Err(Error::LengthMismatch { expected: 2 * dim, actual: out.len() });
        }
        let (cos, sin) = out.split_at_mut(dim);
        self.apply_zhat_into(x, cos, scratch)?;
        for (c, s) in cos.iter_mut().zip(sin.iter_mut()) {
            let (sz, cz) = c.sin_cos();
            *c = a * cz;
            *s = a * sz;
        }
        Ok(())
    }

    pub fn feature_map(&self, x: &[f32]) -> Result<Vec<f32>> {
        let mut out = vec![0.0; self.spec.feature_dim()];
        self.feature_map_into(x, &mut out, &mut Vec::new())?;
        Ok(out)
    }
}
