//! In-place Walsh-Hadamard transforms.
//!
//! Three routes compute `H_m v` for `len = 2^m`:
//!
//! * [`wht_naive`]: explicit `O(n^2)` matrix-vector product, accumulated in
//!   `f64`. This is the correctness oracle.
//! * [`wht_recursive`]: the textbook divide-and-conquer split
//!   `H c = [H c0 + H c1; H c0 - H c1]`.
//! * [`wht_fast`]: the production path. Outer butterfly stages halve the span
//!   (decimation in frequency) until a sub-block reaches the base size; the base
//!   routine then runs its stages from span 1 doubling upward on a block small
//!   enough to stay in L1. All inner loops walk contiguous runs so they lower
//!   to lane-parallel adds and subtracts.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::Real;

/// Base block length used by [`wht_fast`].
pub const DEFAULT_BASE: usize = 256;

/// Naive timings are skipped above this size by default.
pub const DEFAULT_NAIVE_CUTOFF: usize = 1 << 16;

pub fn check_pow2(len: usize) -> Result<()> {
    if len.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::NotPowerOfTwo(len))
    }
}

/// Owned power-of-two buffer transformed in place.
#[derive(Debug, Clone, PartialEq)]
pub struct HadamardBuffer<T> {
    data: Vec<T>,
}

impl<T: Real> HadamardBuffer<T> {
    pub fn new(data: Vec<T>) -> Result<Self> {
        check_pow2(data.len())?;
        Ok(Self { data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_inner(self) -> Vec<T> {
        self.data
    }

    pub fn transform(&mut self) {
        fast_unchecked(&mut self.data, DEFAULT_BASE);
    }
}

/// Entry `(row, col)` of `H_m`: `(-1)^popcount(row & col)`.
pub fn hadamard_entry(row: usize, col: usize) -> f64 {
    if (row & col).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Row `row` of `H_m` built by the block recursion: doubling the prefix, and
/// negating the copy whenever the current bit of `row` is set.
fn hadamard_row(row: usize, len: usize, out: &mut [f64]) {
    out[0] = 1.0;
    let mut width = 1;
    while width < len {
        let (lo, hi) = out[..2 * width].split_at_mut(width);
        if row & width == 0 {
            hi.copy_from_slice(lo);
        } else {
            hi.iter_mut().zip(lo.iter()).for_each(|(h, &l)| *h = -l);
        }
        width *= 2;
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let mut ca = a.chunks_exact(8);
    let mut cb = b.chunks_exact(8);
    for (x, y) in (&mut ca).zip(&mut cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    acc.iter().sum::<f64>() + tail
}

/// Explicit product `H_m v`.
pub fn wht_naive(v: &[f64]) -> Result<Vec<f64>> {
    Ok(wht_naive_many(std::slice::from_ref(&v.to_vec()))?.remove(0))
}

/// [`wht_naive`] over several equal-length vectors, generating each row of
/// `H_m` once.
pub fn wht_naive_many(vs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = vs.first() else {
        return Ok(Vec::new());
    };
    let len = first.len();
    check_pow2(len)?;
    if let Some(bad) = vs.iter().find(|v| v.len() != len) {
        return Err(Error::LengthMismatch { expected: len, actual: bad.len() });
    }
    let mut out = vec![vec![0.0; len]; vs.len()];
    let mut row = vec![0.0; len];
    for i in 0..len {
        hadamard_row(i, len, &mut row);
        for (v, o) in vs.iter().zip(out.iter_mut()) {
            o[i] = dot(&row, v);
        }
    }
    Ok(out)
}

/// Divide-and-conquer reference: transform both halves, then combine.
pub fn wht_recursive<T: Real>(v: &mut [T]) -> Result<()> {
    check_pow2(v.len())?;
    fn go<T: Real>(v: &mut [T]) {
        if v.len() == 1 {
            return;
        }
        let (lo, hi) = v.split_at_mut(v.len() / 2);
        go(lo);
        go(hi);
        butterfly(lo, hi);
    }
    go(v);
    Ok(())
}

#[inline(always)]
fn butterfly<T: Real>(lo: &mut [T], hi: &mut [T]) {
    for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = x + y;
        *b = x - y;
    }
}

/// All stages of a block, span 1 doubling up to `len / 2`.
#[inline(always)]
fn stages_upward<T: Real>(data: &mut [T]) {
    let n = data.len();
    let mut span = if n >= 4 {
        for q in data.chunks_exact_mut(4) {
            let (s0, d0) = (q[0] + q[1], q[0] - q[1]);
            let (s1, d1) = (q[2] + q[3], q[2] - q[3]);
            q[0] = s0 + s1;
            q[1] = d0 + d1;
            q[2] = s0 - s1;
            q[3] = d0 - d1;
        }
        4
    } else {
        1
    };
    while span < n {
        for group in data.chunks_exact_mut(2 * span) {
            let (lo, hi) = group.split_at_mut(span);
            butterfly(lo, hi);
        }
        span *= 2;
    }
}

#[inline(never)]
fn base_fixed<T: Real, const N: usize>(data: &mut [T]) {
    let block: &mut [T; N] = data.try_into().expect("base block length");
    stages_upward(block.as_mut_slice());
}

type BaseFn<T> = fn(&mut [T]);

fn base_routine<T: Real>(base: usize) -> BaseFn<T> {
    match base {
        2 => base_fixed::<T, 2>,
        4 => base_fixed::<T, 4>,
        8 => base_fixed::<T, 8>,
        16 => base_fixed::<T, 16>,
        32 => base_fixed::<T, 32>,
        64 => base_fixed::<T, 64>,
        128 => base_fixed::<T, 128>,
        256 => base_fixed::<T, 256>,
        512 => base_fixed::<T, 512>,
        1024 => base_fixed::<T, 1024>,
        2048 => base_fixed::<T, 2048>,
        4096 => base_fixed::<T, 4096>,
        _ => stages_upward::<T>,
    }
}

fn fast_unchecked<T: Real>(data: &mut [T], base: usize) {
    if data.len() <= 1 {
        return;
    }
    if data.len() < base {
        stages_upward(data);
        return;
    }
    let base_fn = base_routine::<T>(base);
    split_down(data, base, base_fn);
}

fn split_down<T: Real>(data: &mut [T], base: usize, base_fn: BaseFn<T>) {
    if data.len() == base {
        base_fn(data);
        return;
    }
    let (lo, hi) = data.split_at_mut(data.len() / 2);
    butterfly(lo, hi);
    split_down(lo, base, base_fn);
    split_down(hi, base, base_fn);
}

/// Fast transform with an explicit base block length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WhtPlan {
    base: usize,
}

impl Default for WhtPlan {
    fn default() -> Self {
        Self { base: DEFAULT_BASE }
    }
}

impl WhtPlan {
    pub fn new(base: usize) -> Result<Self> {
        check_pow2(base)?;
        if base < 2 {
            return Err(Error::InvalidArgument("base block must be at least 2".into()));
        }
        Ok(Self { base })
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn transform<T: Real>(&self, data: &mut [T]) -> Result<()> {
        check_pow2(data.len())?;
        fast_unchecked(data, self.base);
        Ok(())
    }
}

/// In-place fast transform with the default base block.
pub fn wht_fast<T: Real>(data: &mut [T]) -> Result<()> {
    check_pow2(data.len())?;
    fast_unchecked(data, DEFAULT_BASE);
    Ok(())
}

/// Transforms consecutive `len`-sized buffers of `data` concurrently.
pub fn wht_fast_batch<T: Real>(data: &mut [T], len: usize) -> Result<()> {
    check_pow2(len)?;
    if data.len() % len != 0 {
        return Err(Error::LengthMismatch { expected: data.len() / len * len + len, actual: data.len() });
    }
    data.par_chunks_mut(len).for_each(|b| fast_unchecked(b, DEFAULT_BASE));
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRecord {
    pub size: usize,
    pub reps: usize,
    pub fast_ms: f64,
    /// `None` when the size is above the naive cutoff.
    pub naive_ms: Option<f64>,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str = "size,impl,median_ms,reps";

    /// One CSV line per measured implementation.
    pub fn csv_rows(&self) -> Vec<String> {
        let mut rows = vec![format!("{},fast,{:.6},{}", self.size, self.fast_ms, self.reps)];
        if let Some(naive) = self.naive_ms {
            rows.push(format!("{},naive,{:.6},{}", self.size, naive, self.reps));
        }
        rows
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub reps: usize,
    pub naive_cutoff: usize,
    /// Fast timings repeat the transform until at least this many elements
    /// have been processed per repetition, so small sizes rise above clock
    /// resolution.
    pub min_elements_per_rep: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self { reps: 5, naive_cutoff: DEFAULT_NAIVE_CUTOFF, min_elements_per_rep: 1 << 22 }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn bench_input(size: usize) -> Vec<f64> {
    let mut s = crate::detrand::RandomStream::new(0, "bench", size as u64);
    (0..size).map(|_| 2.0 * s.uniform01() - 1.0).collect()
}

/// Median wall-clock milliseconds per transform, fast `f32` path against the
/// naive oracle. Each fast iteration refills the buffer from the source
/// vector before transforming, so the O(n) copy is included.
pub fn bench_wht(sizes: &[usize], config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if config.reps < 3 {
        return Err(Error::InvalidArgument(format!("repetitions must be >= 3, got {}", config.reps)));
    }
    for &s in sizes {
        check_pow2(s)?;
    }
    let mut records = Vec::with_capacity(sizes.len());
    for &size in sizes {
        let src64 = bench_input(size);
        let src: Vec<f32> = src64.iter().map(|&x| x as f32).collect();
        let mut buf = src.clone();
        let iters = (config.min_elements_per_rep / size).max(1);

        let mut fast = Vec::with_capacity(config.reps);
        for _ in 0..config.reps {
            let start = Instant::now();
            for _ in 0..iters {
                buf.copy_from_slice(&src);
                fast_unchecked(std::hint::black_box(&mut buf), DEFAULT_BASE);
            }
            std::hint::black_box(&buf);
            fast.push(start.elapsed().as_secs_f64() * 1e3 / iters as f64);
        }

        let naive_ms = if size <= config.naive_cutoff {
            let mut naive = Vec::with_capacity(config.reps);
            for _ in 0..config.reps {
                let start = Instant::now();
                let out = wht_naive(std::hint::black_box(&src64))?;
                std::hint::black_box(out);
                naive.push(start.elapsed().as_secs_f64() * 1e3);
            }
            Some(median(naive))
        } else {
            None
        };

        records.push(BenchRecord { size, reps: config.reps, fast_ms: median(fast), naive_ms });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn naive_small_cases() {
        assert_eq!(wht_naive(&[3.5]).unwrap(), vec![3.5]);
        assert_eq!(wht_naive(&[1.0, 1.0]).unwrap(), vec![2.0, 0.0]);
        assert_eq!(wht_naive(&[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![10.0, -2.0, -4.0, 0.0]);
    }

    #[test]
    fn fast_small_case() {
        let mut v = [1.0f32, 2.0, 3.0, 4.0];
        wht_fast(&mut v).unwrap();
        assert_eq!(v, [10.0, -2.0, -4.0, 0.0]);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(wht_naive(&[1.0; 3]), Err(Error::NotPowerOfTwo(3))));
        assert!(matches!(wht_fast(&mut [1.0f32; 6]), Err(Error::NotPowerOfTwo(6))));
        assert!(matches!(wht_fast::<f64>(&mut []), Err(Error::NotPowerOfTwo(0))));
        assert!(HadamardBuffer::new(vec![0.0f32; 12]).is_err());
    }

    #[test]
    fn rows_follow_parity_rule() {
        let mut row = vec![0.0; 16];
        for i in 0..16 {
            hadamard_row(i, 16, &mut row);
            for (j, &s) in row.iter().enumerate() {
                assert_eq!(s, hadamard_entry(i, j));
            }
        }
    }

    #[test]
    fn every_base_gives_same_result() {
        let src: Vec<f64> = (0..4096).map(|i| ((i * 37 % 101) as f64) - 50.0).collect();
        let mut reference = src.clone();
        wht_recursive(&mut reference).unwrap();
        for k in 1..=13 {
            let mut v = src.clone();
            WhtPlan::new(1 << k).unwrap().transform(&mut v).unwrap();
            assert_eq!(v, reference, "base 2^{k}");
        }
    }

    #[test]
    fn batch_matches_single() {
        let mut flat: Vec<f32> = (0..8 * 512).map(|i| (i % 13) as f32).collect();
        let mut single = flat.clone();
        for chunk in single.chunks_mut(512) {
            wht_fast(chunk).unwrap();
        }
        wht_fast_batch(&mut flat, 512).unwrap();
        assert_eq!(flat, single);
    }

    #[test]
    fn bench_validates_inputs() {
        let cfg = BenchConfig { reps: 2, ..Default::default() };
        assert!(bench_wht(&[16], &cfg).is_err());
        assert!(bench_wht(&[7], &BenchConfig::default()).is_err());
    }

    #[test]
    fn bench_skips_naive_above_cutoff() {
        let cfg = BenchConfig { reps: 3, naive_cutoff: 64, min_elements_per_rep: 1 << 10 };
        let recs = bench_wht(&[64, 128], &cfg).unwrap();
        assert!(recs[0].naive_ms.is_some());
        assert!(recs[1].naive_ms.is_none());
        assert_eq!(recs[1].csv_rows().len(), 1);
    }
}
