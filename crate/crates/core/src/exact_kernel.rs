//! Exact-kernel reference computations in `f64`.
//!
//! Gram matrices, the regularized interpolation solve `(n gamma I + K) t = y`,
//! the V-matrix variant `(n gamma I + V K) t = V y`, and a checker that scores
//! a Fastfood map against the exact RBF kernel.

use crate::detrand::RandomStream;
use crate::error::{Error, Result};
use crate::fastfood::{FastfoodMap, KernelKind};

/// `exp(-|x - y|^2 / (2 sigma^2))`.
pub fn rbf_kernel(x: &[f64], y: &[f64], sigma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch { expected: x.len(), actual: y.len() });
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be > 0, got {sigma}")));
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
    Ok((-d2 / (2.0 * sigma * sigma)).exp())
}

/// Dense symmetric `n x n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
    kernel: Option<KernelKind>,
}

impl GramMatrix {
    /// RBF Gram matrix; each off-diagonal entry is computed once and mirrored.
    pub fn rbf(points: &[Vec<f64>], sigma: f64) -> Result<Self> {
        let n = points.len();
        let mut entries = vec![0.0; n * n];
        for r in 0..n {
            entries[r * n + r] = 1.0;
            for c in 0..r {
                let k = rbf_kernel(&points[r], &points[c], sigma)?;
                entries[r * n + c] = k;
                entries[c * n + r] = k;
            }
        }
        Ok(Self { n, entries, kernel: Some(KernelKind::Rbf { sigma }) })
    }

    /// Wraps precomputed entries (e.g. a feature-space Gram `Phi Phi^T`).
    /// The upper triangle is overwritten by the lower one.
    pub fn from_entries(n: usize, mut entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, actual: entries.len() });
        }
        for r in 0..n {
            for c in 0..r {
                entries[c * n + r] = entries[r * n + c];
            }
        }
        Ok(Self { n, entries, kernel: None })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.n + c]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn kernel(&self) -> Option<KernelKind> {
        self.kernel
    }

    /// Frobenius norm, used as a scale for `||K||`.
    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// True when `K + jitter I` admits a Cholesky factorization.
    pub fn is_psd(&self, jitter: f64) -> bool {
        let mut a = self.entries.clone();
        for i in 0..self.n {
            a[i * self.n + i] += jitter;
        }
        cholesky(&mut a, self.n).is_ok()
    }
}

/// In-place lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky(a: &mut [f64], n: usize) -> Result<()> {
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) {
            return Err(Error::NotPositiveDefinite { row: j, value: diag });
        }
        let l_jj = diag.sqrt();
        a[j * n + j] = l_jj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / l_jj;
        }
        for k in j + 1..n {
            a[j * n + k] = 0.0;
        }
    }
    Ok(())
}

/// Solves `L L^T x = b` given the factor from [`cholesky`].
pub fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            y[i] -= l[i * n + k] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            y[i] -= l[k * n + i] * y[k];
        }
        y[i] /= l[i * n + i];
    }
    y
}

/// Gaussian elimination with partial pivoting for general square systems.
pub fn lu_solve(mut a: Vec<f64>, n: usize, mut b: Vec<f64>) -> Result<Vec<f64>> {
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap_or(col);
        if a[pivot * n + col] == 0.0 {
            return Err(Error::Singular(col));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let p = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for r in (0..n).rev() {
        let mut s = b[r];
        for k in r + 1..n {
            s -= a[r * n + k] * b[k];
        }
        b[r] = s / a[r * n + r];
    }
    Ok(b)
}

fn regularized(k: &GramMatrix, gamma: f64) -> Vec<f64> {
    let n = k.n;
    let mut a = k.entries.clone();
    for i in 0..n {
        a[i * n + i] += n as f64 * gamma;
    }
    a
}

/// Coefficients `t` of `(n gamma I + K) t = y`, by Cholesky.
pub fn ridge_solve(k: &GramMatrix, y: &[f64], gamma: f64) -> Result<Vec<f64>> {
    if y.len() != k.n {
        return Err(Error::LengthMismatch { expected: k.n, actual: y.len() });
    }
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be > 0, got {gamma}")));
    }
    let mut a = regularized(k, gamma);
    cholesky(&mut a, k.n)?;
    Ok(cholesky_solve(&a, k.n, y))
}

/// `||(n gamma I + K) t - y|| / ||y||`.
pub fn ridge_residual(k: &GramMatrix, y: &[f64], gamma: f64, t: &[f64]) -> f64 {
    let n = k.n;
    let a = regularized(k, gamma);
    let r2: f64 = (0..n)
        .map(|i| {
            let at: f64 = (0..n).map(|j| a[i * n + j] * t[j]).sum();
            (at - y[i]).powi(2)
        })
        .sum();
    let y2: f64 = y.iter().map(|v| v * v).sum();
    (r2 / y2).sqrt()
}

/// `f(x) = sum_z t_z k(x_z, x)` given the cross-kernel row `k(x_z, x)`.
pub fn ridge_predict(t: &[f64], cross: &[f64]) -> f64 {
    t.iter().zip(cross).map(|(a, b)| a * b).sum()
}

/// Per-coordinate upper bounds defaulting to the data maxima.
pub fn default_bounds(samples: &[Vec<f64>]) -> Vec<f64> {
    let d = samples.first().map_or(0, Vec::len);
    (0..d)
        .map(|k| samples.iter().map(|s| s[k]).fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// `V(c, z) = sum_k (t_k - max(x_c^k, x_z^k))`, requiring `0 <= x^k <= t_k`.
pub fn v_matrix(samples: &[Vec<f64>], bounds: &[f64]) -> Result<Vec<f64>> {
    let n = samples.len();
    for (i, s) in samples.iter().enumerate() {
        if s.len() != bounds.len() {
            return Err(Error::LengthMismatch { expected: bounds.len(), actual: s.len() });
        }
        for (k, (&v, &t)) in s.iter().zip(bounds).enumerate() {
            if !(0.0..=t).contains(&v) {
                return Err(Error::OutOfBounds { sample: i, coord: k, value: v, bound: t });
            }
        }
    }
    let mut v = vec![0.0; n * n];
    for c in 0..n {
        for z in 0..=c {
            let e: f64 = bounds
                .iter()
                .enumerate()
                .map(|(k, &t)| t - samples[c][k].max(samples[z][k]))
                .sum();
            v[c * n + z] = e;
            v[z * n + c] = e;
        }
    }
    Ok(v)
}

/// Coefficients of `(n gamma I + V K) t = V y`.
pub fn v_ridge_solve(k: &GramMatrix, v: &[f64], y: &[f64], gamma: f64) -> Result<Vec<f64>> {
    let n = k.n;
    if v.len() != n * n {
        return Err(Error::LengthMismatch { expected: n * n, actual: v.len() });
    }
    if y.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: y.len() });
    }
    let mut a = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            a[r * n + c] = (0..n).map(|m| v[r * n + m] * k.get(m, c)).sum();
        }
        a[r * n + r] += n as f64 * gamma;
    }
    let vy: Vec<f64> = (0..n).map(|r| (0..n).map(|m| v[r * n + m] * y[m]).sum()).collect();
    lu_solve(a, n, vy)
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelCheck {
    pub dims: usize,
    pub features: usize,
    pub pairs: usize,
    pub mean_err: f64,
    pub max_err: f64,
    /// `1 / sqrt(D)`, the Monte-Carlo error scale.
    pub ref_scale: f64,
}

/// Scores `<phi(x), phi(x')>` against the exact RBF kernel over `pairs`.
pub fn kernel_check(map: &FastfoodMap, pairs: &[(Vec<f32>, Vec<f32>)]) -> Result<KernelCheck> {
    let spec = map.spec();
    let KernelKind::Rbf { sigma } = spec.kernel() else {
        return Err(Error::InvalidArgument("kernel check needs an RBF spec".into()));
    };
    let mut sum = 0.0;
    let mut max = 0.0f64;
    for (x, y) in pairs {
        let px = map.feature_map(x)?;
        let py = map.feature_map(y)?;
        let approx: f64 = px.iter().zip(&py).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum();
        let xd: Vec<f64> = x.iter().map(|&v| f64::from(v)).collect();
        let yd: Vec<f64> = y.iter().map(|&v| f64::from(v)).collect();
        let err = (approx - rbf_kernel(&xd, &yd, sigma)?).abs();
        sum += err;
        max = max.max(err);
    }
    let features = spec.projection_dim();
    Ok(KernelCheck {
        dims: spec.input_dim(),
        features,
        pairs: pairs.len(),
        mean_err: if pairs.is_empty() { 0.0 } else { sum / pairs.len() as f64 },
        max_err: max,
        ref_scale: 1.0 / (features as f64).sqrt(),
    })
}

/// Random pairs with i.i.d. `N(0, sigma^2 / dim)` coordinates, so typical
/// squared distances are near `2 sigma^2` and kernel values near `e^-1`.
pub fn random_pairs(dim: usize, count: usize, sigma: f64, seed: u64) -> Vec<(Vec<f32>, Vec<f32>)> {
    let mut s = RandomStream::new(seed, "pairs", 0);
    let scale = sigma / (dim as f64).sqrt();
    let draw = |s: &mut RandomStream| -> Vec<f32> { (0..dim).map(|_| (scale * s.gaussian()) as f32).collect() };
    (0..count).map(|_| (draw(&mut s), draw(&mut s))).collect()
}
