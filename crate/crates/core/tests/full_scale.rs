//! Full 60000/10000 runs. Ignored by default; run with
//! `cargo test --release -p kexpand --test full_scale -- --ignored --nocapture`.
//! FASHION-MNIST is read from `MCK_FASHION_DIR`.

mod common;

use std::path::Path;

use kexpand::dataio::{load_idx, Dataset};
use kexpand::fastfood::{FastfoodMap, FeatureMapSpec, KernelKind};
use kexpand::linear_model::{train, FeatureScale, KernelFeatures, RawFeatures, TrainConfig};

use common::DEFAULT_SEED;

fn load(dir: &Path) -> (Dataset, Dataset) {
    let train = load_idx(&dir.join("train-images-idx3-ubyte"), &dir.join("train-labels-idx1-ubyte")).unwrap();
    let test = load_idx(&dir.join("t10k-images-idx3-ubyte"), &dir.join("t10k-labels-idx1-ubyte")).unwrap();
    assert_eq!((train.len(), test.len(), train.dim()), (60000, 10000, 784));
    (train, test)
}

fn kernel_beats_logistic(dir: &Path) {
    let (train_set, test_set) = load(dir);
    let spec = FeatureMapSpec::new(784, 4, KernelKind::RbfMatern { sigma: 1.0, t: 40 }, DEFAULT_SEED).unwrap();
    let kernel = KernelFeatures { map: FastfoodMap::new(spec).unwrap(), scale: FeatureScale::Unit };
    let (_, k) = train(&kernel, &train_set, &test_set, &TrainConfig::new(0.001, 10, 20, 0.0, DEFAULT_SEED).unwrap()).unwrap();
    let (_, lr) =
        train(&RawFeatures { dim: 784 }, &train_set, &test_set, &TrainConfig::new(0.01, 10, 20, 0.0, DEFAULT_SEED).unwrap())
            .unwrap();
    println!("kernel\n{}logistic\n{}", k.to_csv(), lr.to_csv());
    assert!(k.last().unwrap().test_acc > lr.last().unwrap().test_acc);
}

#[test]
#[ignore]
fn mnist_full() {
    kernel_beats_logistic(&common::mnist_dir());
}

#[test]
#[ignore]
fn fashion_mnist_full() {
    let dir = std::env::var_os("MCK_FASHION_DIR").expect("set MCK_FASHION_DIR to the FASHION-MNIST IDX directory");
    kernel_beats_logistic(Path::new(&dir));
}
