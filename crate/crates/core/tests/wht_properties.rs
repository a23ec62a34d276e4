use kexpand::wht::{wht_fast, wht_fast_batch, wht_naive, wht_recursive, WhtPlan};
use proptest::prelude::*;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn pow2_vec() -> impl Strategy<Value = Vec<f32>> {
    (0u32..=12).prop_flat_map(|k| prop::collection::vec(-1.0f32..1.0, 1usize << k))
}

fn fast64(v: &[f32]) -> Vec<f64> {
    let mut out = v.to_vec();
    wht_fast(&mut out).unwrap();
    out.into_iter().map(f64::from).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linearity(
        (u, v) in (0u32..=12).prop_flat_map(|k| {
            let n = 1usize << k;
            (prop::collection::vec(-1.0f32..1.0, n), prop::collection::vec(-1.0f32..1.0, n))
        }),
        a in -2.0f32..2.0,
        b in -2.0f32..2.0,
    ) {
        let mix: Vec<f32> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lhs = fast64(&mix);
        let (fu, fv) = (fast64(&u), fast64(&v));
        let rhs: Vec<f64> = fu.iter().zip(&fv).map(|(x, y)| f64::from(a) * x + f64::from(b) * y).collect();
        let scale = max_abs(&rhs).max(f64::from(a.abs() + b.abs()) * (max_abs(&fu) + max_abs(&fv))).max(1e-30);
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() <= 1e-6 * scale, "{l} vs {r}");
        }
    }

    #[test]
    fn parseval(v in pow2_vec()) {
        let n = v.len() as f64;
        let energy: f64 = v.iter().map(|&x| f64::from(x).powi(2)).sum();
        let out: f64 = fast64(&v).iter().map(|x| x * x).sum();
        prop_assert!((out - n * energy).abs() <= 1e-6 * n * energy.max(1e-30));
    }

    #[test]
    fn involution(v in pow2_vec()) {
        let n = v.len() as f32;
        let mut w = v.clone();
        wht_fast(&mut w).unwrap();
        wht_fast(&mut w).unwrap();
        let scale = f64::from(n) * v.iter().fold(0.0f64, |m, &x| m.max(f64::from(x).abs())).max(1e-30);
        for (x, y) in w.iter().zip(&v) {
            prop_assert!((f64::from(*x) - f64::from(n * y)).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn fast_matches_naive(v in pow2_vec()) {
        let exact = wht_naive(&v.iter().map(|&x| f64::from(x)).collect::<Vec<_>>()).unwrap();
        let scale = max_abs(&exact).max(1e-30);
        for (f, e) in fast64(&v).iter().zip(&exact) {
            prop_assert!((f - e).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn recursive_and_every_base_agree_exactly(ints in prop::collection::vec(-1000i32..1000, 1usize << 10), k in 1u32..=10) {
        let v: Vec<f64> = ints.into_iter().map(f64::from).collect();
        let mut reference = v.clone();
        wht_recursive(&mut reference).unwrap();
        let mut fast = v.clone();
        WhtPlan::new(1 << k).unwrap().transform(&mut fast).unwrap();
        prop_assert_eq!(fast, reference);
    }

    #[test]
    fn non_powers_of_two_are_rejected(len in 3usize..5000) {
        prop_assume!(!len.is_power_of_two());
        let mut v = vec![0.0f32; len];
        prop_assert!(wht_fast(&mut v).is_err());
        prop_assert!(wht_naive(&vec![0.0; len]).is_err());
    }
}

#[test]
fn single_element_is_identity() {
    let mut v = [std::f32::consts::PI];
    wht_fast(&mut v).unwrap();
    assert_eq!(v, [std::f32::consts::PI]);
}

#[test]
fn delta_maps_to_constant_row() {
    let mut v = vec![0.0f32; 1 << 14];
    v[0] = 1.0;
    wht_fast(&mut v).unwrap();
    assert!(v.iter().all(|&x| x == 1.0));
}

#[test]
fn batch_of_many_sizes() {
    for k in [0, 3, 8, 9, 12] {
        let n = 1usize << k;
        let src: Vec<f32> = (0..n * 7).map(|i| ((i * 31 % 17) as f32) - 8.0).collect();
        let mut batch = src.clone();
        wht_fast_batch(&mut batch, n).unwrap();
        for (chunk, out) in src.chunks(n).zip(batch.chunks(n)) {
            let mut single = chunk.to_vec();
            wht_fast(&mut single).unwrap();
            assert_eq!(single, out);
        }
    }
    assert!(wht_fast_batch(&mut [0.0f32; 12], 8).is_err());
}
