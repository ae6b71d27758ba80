mod common;

use common::*;
use proptest::prelude::*;
use sic_core::basis::BasisSet;
use sic_core::channel::{cascade_si, cascade_si_dft, CascadeChannelState};
use sic_core::dft::{extract_valid, pad_front, Dft, FrameConfig};
use sic_core::ops::OpCounter;

#[test]
fn parseval_and_round_trip() {
    let mut r = rng(1);
    let d = Dft::<f64>::new(FrameConfig::new(64, 56).unwrap());
    let x = cvec(&mut r, 64);
    let spec = d.dft(&x).unwrap();
    let e_t: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let e_f: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
    assert!((e_f - 64.0 * e_t).abs() < 1e-10 * e_f);
    let back = d.idft(&spec).unwrap();
    assert!(max_abs(&back, &x) < 1e-12);
    assert!(d.dft(&x[..10]).is_err());
}

#[test]
fn dft_matches_dense_matrix() {
    let mut r = rng(2);
    let d = Dft::<f64>::new(FrameConfig::new(12, 7).unwrap());
    let x = cvec(&mut r, 12);
    let want = to_vec(&(dft_matrix(12) * col(&x)));
    assert!(max_abs(&d.dft(&x).unwrap(), &want) < 1e-12);
}

#[test]
fn constraint_matches_dense_operator() {
    let mut r = rng(3);
    let cfg = FrameConfig::new(8, 6).unwrap();
    let d = Dft::<f64>::new(cfg);
    let phi = cvec(&mut r, 8);
    let v = cvec(&mut r, 8);
    let got = d.apply_constraint(&phi, &v, &mut OpCounter::default()).unwrap();
    let want = to_vec(&(constraint(8, 2, &phi) * col(&v)));
    assert!(max_abs(&got, &want) < 1e-12);
}

#[test]
fn constraint_of_zero_is_zero() {
    let mut r = rng(4);
    let d = Dft::<f64>::new(FrameConfig::new(8, 5).unwrap());
    let phi = cvec(&mut r, 8);
    let z = vec![C::new(0.0, 0.0); 8];
    let out = d.apply_constraint(&phi, &z, &mut OpCounter::default()).unwrap();
    assert!(out.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn padding_then_extraction_zeroes_overlap() {
    let cfg = FrameConfig::new(6, 4).unwrap();
    let mut r = rng(5);
    let f = cvec(&mut r, 6);
    let p = pad_front(&extract_valid(&f, cfg).unwrap(), cfg).unwrap();
    assert_eq!(&p[..2], &[C::new(0.0, 0.0); 2]);
    assert_eq!(&p[2..], &f[2..]);
}

fn frame_case() -> impl Strategy<Value = (usize, usize, u64)> {
    (2usize..=64).prop_flat_map(|m| (Just(m), 1usize..m, any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn constraint_is_linear((m, r, seed) in frame_case(), c in -3.0f64..3.0) {
        let mut g = rng(seed);
        let d = Dft::<f64>::new(FrameConfig::new(m, r).unwrap());
        let phi = cvec(&mut g, m);
        let v = cvec(&mut g, m);
        let u = cvec(&mut g, m);
        let s = C::new(c, 0.5);
        let mut ops = OpCounter::default();
        let lhs = d.apply_constraint(&phi, &v.iter().zip(&u).map(|(a, b)| a * s + b).collect::<Vec<_>>(), &mut ops).unwrap();
        let cv = d.apply_constraint(&phi, &v, &mut ops).unwrap();
        let cu = d.apply_constraint(&phi, &u, &mut ops).unwrap();
        let rhs: Vec<_> = cv.iter().zip(&cu).map(|(a, b)| a * s + b).collect();
        let scale = rhs.iter().map(|v| v.norm()).fold(1.0, f64::max);
        prop_assert!(max_abs(&lhs, &rhs) < 1e-10 * scale);
    }

    #[test]
    fn projection_is_idempotent((m, r, seed) in frame_case()) {
        let mut g = rng(seed);
        let d = Dft::<f64>::new(FrameConfig::new(m, r).unwrap());
        let mut v = cvec(&mut g, m);
        let mut ops = OpCounter::default();
        d.project_in_place(&mut v, &mut ops);
        let once = v.clone();
        d.project_in_place(&mut v, &mut ops);
        prop_assert!(max_abs(&once, &v) < 1e-10);
    }

    #[test]
    fn overlap_save_equals_direct_convolution((m, r, seed) in frame_case()) {
        let mut g = rng(seed);
        let cfg = FrameConfig::new(m, r).unwrap();
        let d = Dft::<f64>::new(cfg);
        let x = cvec(&mut g, m);
        let basis = BasisSet::default().expand(&x);
        let state = CascadeChannelState { w: cvec(&mut g, cfg.l()), a: vec![C::new(1.0, 0.0), cn(&mut g), cn(&mut g)] };
        let direct = cascade_si(&basis, &state, cfg).unwrap();
        let fast = cascade_si_dft(&basis, &state, &d).unwrap();
        let scale = direct.iter().map(|v| v.norm()).fold(1e-300, f64::max);
        prop_assert!(max_abs(&direct, &fast) <= 1e-10 * scale);
    }
}
