#![allow(dead_code)]

use std::path::PathBuf;

use kexpand::dataio::{self, Dataset};
use kexpand::detrand::RandomStream;
use kexpand::exact_kernel::{rbf_kernel, ridge_solve, GramMatrix};
use kexpand::fastfood::{FastfoodMap, FeatureMapSpec, KernelKind};
use kexpand::linear_model::{gradient, loss, Batch, SoftmaxModel};

pub const DEFAULT_SEED: u64 = 1398239763;

/// Largest per-entry relative gap between analytic and central-difference
/// gradients (`h = 1e-4`) on a random 3-class, 5-feature instance. Entries
/// where both values are below `1e-7` in magnitude are compared absolutely.
pub fn gradient_check(seed: u64, l2: f64) -> f64 {
    let (c, f, m) = (3, 5, 7);
    let mut s = RandomStream::new(seed, "gradcheck", 0);
    let weights: Vec<f64> = (0..c * f).map(|_| s.gaussian()).collect();
    let bias: Vec<f64> = (0..c).map(|_| s.gaussian()).collect();
    let rows: Vec<f64> = (0..m * f).map(|_| s.gaussian()).collect();
    let labels: Vec<usize> = (0..m).map(|_| s.index_below(c)).collect();
    let model = SoftmaxModel::from_parts(c, f, weights, bias).unwrap();
    let batch = Batch::new(&rows, &labels, f).unwrap();
    let (_, g) = gradient(&model, &batch, l2).unwrap();

    let h = 1e-4;
    let numeric = |bump: &dyn Fn(&mut SoftmaxModel<f64>, f64)| {
        let (mut plus, mut minus) = (model.clone(), model.clone());
        bump(&mut plus, h);
        bump(&mut minus, -h);
        (loss(&plus, &batch, l2).unwrap() - loss(&minus, &batch, l2).unwrap()) / (2.0 * h)
    };
    let mut worst = 0.0f64;
    let mut compare = |analytic: f64, fd: f64| {
        let big = analytic.abs().max(fd.abs());
        let err = if big < 1e-7 { (analytic - fd).abs() } else { (analytic - fd).abs() / big };
        worst = worst.max(err);
    };
    for i in 0..c * f {
        compare(g.weights[i], numeric(&|m, d| m.weights_mut()[i] += d));
    }
    for k in 0..c {
        compare(g.bias[k], numeric(&|m, d| m.bias_mut()[k] += d));
    }
    worst
}

fn gaussian_points(count: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut s = RandomStream::new(seed, "ridge-points", 0);
    let scale = 1.0 / (dim as f64).sqrt();
    (0..count).map(|_| (0..dim).map(|_| scale * s.gaussian()).collect()).collect()
}

fn target(x: &[f64]) -> f64 {
    (2.0 * x.iter().sum::<f64>()).sin() + x[0]
}

/// Mean absolute gap between exact kernel-ridge predictions and ridge on
/// Fastfood features (via their Gram matrix) on `train`/`test` points.
pub fn feature_ridge_gap(dim: usize, projection_dim: usize, train: usize, test: usize, seed: u64) -> f64 {
    let gamma = 1e-3;
    let points = gaussian_points(train + test, dim, 1);
    let (xs, ts) = points.split_at(train);
    let y: Vec<f64> = xs.iter().map(|x| target(x)).collect();

    let exact = GramMatrix::rbf(xs, 1.0).unwrap();
    let coef = ridge_solve(&exact, &y, gamma).unwrap();

    let n = kexpand::fastfood::next_pow2(dim);
    let spec = FeatureMapSpec::new(dim, projection_dim / n, KernelKind::Rbf { sigma: 1.0 }, seed).unwrap();
    let map = FastfoodMap::new(spec).unwrap();
    let phi = |x: &Vec<f64>| -> Vec<f64> {
        let xf: Vec<f32> = x.iter().map(|&v| v as f32).collect();
        map.feature_map(&xf).unwrap().into_iter().map(f64::from).collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    let train_phi: Vec<Vec<f64>> = xs.iter().map(phi).collect();
    let mut entries = vec![0.0; train * train];
    for r in 0..train {
        for c in 0..train {
            entries[r * train + c] = dot(&train_phi[r], &train_phi[c]);
        }
    }
    let approx = GramMatrix::from_entries(train, entries).unwrap();
    let coef_approx = ridge_solve(&approx, &y, gamma).unwrap();

    ts.iter()
        .map(|t| {
            let pt = phi(t);
            let exact_pred: f64 = xs.iter().zip(&coef).map(|(x, a)| a * rbf_kernel(x, t, 1.0).unwrap()).sum();
            let approx_pred: f64 = train_phi.iter().zip(&coef_approx).map(|(p, a)| a * dot(p, &pt)).sum();
            (exact_pred - approx_pred).abs()
        })
        .sum::<f64>()
        / test as f64
}

/// MNIST IDX directory: `MCK_MNIST_DIR`, else `data/mnist` at the workspace root.
pub fn mnist_dir() -> PathBuf {
    std::env::var_os("MCK_MNIST_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist"))
}

pub fn load_mnist() -> Option<(Dataset, Dataset)> {
    let dir = mnist_dir();
    let train = dataio::load_idx(&dir.join("train-images-idx3-ubyte"), &dir.join("train-labels-idx1-ubyte")).ok()?;
    let test = dataio::load_idx(&dir.join("t10k-images-idx3-ubyte"), &dir.join("t10k-labels-idx1-ubyte")).ok()?;
    Some((train, test))
}
