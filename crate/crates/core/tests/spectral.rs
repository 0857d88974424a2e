use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rtmix::{PeriodicGrid, RealField, Spectral};

fn spectral(n: usize) -> Spectral {
    Spectral::new(PeriodicGrid::new(n).unwrap())
}

/// Direct O(N²) evaluation of `f̂(k) = (1/N) Σ_j f_j e^{-ikα_j}`.
fn naive_dft(f: &RealField, k: i64) -> Complex64 {
    let g = f.grid();
    let n = g.len() as f64;
    f.values()
        .iter()
        .enumerate()
        .map(|(j, v)| Complex64::from_polar(*v, -(k as f64) * g.node(j)))
        .sum::<Complex64>()
        / n
}

/// Real trigonometric polynomial `c + Σ_k (a_k cos kα + b_k sin kα)`.
fn trig(g: PeriodicGrid, mean: f64, coeffs: &[(f64, f64)]) -> RealField {
    RealField::from_fn(g, |x| {
        mean + coeffs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let k = (i + 1) as f64;
                a * (k * x).cos() + b * (k * x).sin()
            })
            .sum::<f64>()
    })
}

fn coeffs(max_modes: usize) -> impl Strategy<Value = (f64, Vec<(f64, f64)>)> {
    (
        -2.0..2.0f64,
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max_modes),
    )
}

fn inner(f: &RealField, g: &RealField) -> f64 {
    f.mul(g).integral()
}

#[test]
fn fft_matches_direct_sum() {
    let sp = spectral(32);
    let f = RealField::from_fn(sp.grid(), |x| (x.sin() * 2.0).exp() + 0.3 * (5.0 * x).cos());
    let c = sp.dft(&f);
    for k in -15i64..=16 {
        let d = c.get(k) - naive_dft(&f, k);
        assert!(d.norm() < 1e-14, "k = {k}: {d}");
    }
    assert!(c.hermitian_defect() < 1e-15);
    assert!(sp.idft(&c).sub(&f).linf() < 1e-14);
}

#[test]
fn operators_on_monomials() {
    let sp = spectral(64);
    let g = sp.grid();
    for k in 1..=31i64 {
        let kf = k as f64;
        let s = RealField::from_fn(g, |x| (kf * x).sin());
        let c = RealField::from_fn(g, |x| (kf * x).cos());
        // Roundoff in every mode is amplified by the operator norm, (N/2)^order.
        let close =
            |a: &RealField, b: &RealField, order: i32| a.sub(b).linf() <= 1e-13 * 32f64.powi(order);

        assert!(close(&sp.hilbert(&c), &s, 0));
        assert!(close(&sp.hilbert(&s), &c.scale(-1.0), 0));
        assert!(close(&sp.lambda(&s), &s.scale(kf), 1));
        assert!(close(&sp.lambda_pow(&c, 0.5), &c.scale(kf.sqrt()), 1));
        assert!(close(&sp.lambda_pow(&c, 3.0), &c.scale(kf.powi(3)), 3));
        assert!(close(&sp.derivative(&s, 1), &c.scale(kf), 1));
        assert!(close(&sp.derivative(&c, 2), &c.scale(-kf * kf), 2));
        assert!(close(&sp.derivative(&s, 3), &c.scale(-kf.powi(3)), 3));
    }
}

#[test]
fn low_modes_match_closed_forms_relatively() {
    let sp = spectral(32);
    let g = sp.grid();
    for k in 1..=8i64 {
        let kf = k as f64;
        let s = RealField::from_fn(g, |x| (kf * x).sin());
        let c = RealField::from_fn(g, |x| (kf * x).cos());
        for order in [0.5, 1.0, 2.0, 3.0] {
            let scale = kf.powf(order);
            let err = sp.lambda_pow(&s, order).sub(&s.scale(scale)).linf() / scale;
            assert!(err < 1e-12, "Λ^{order} sin {k}α: {err:e}");
        }
        for n in 1..=3u32 {
            let scale = kf.powi(n as i32);
            let expect = match n {
                1 => c.scale(scale),
                2 => s.scale(-scale),
                _ => c.scale(-scale),
            };
            let err = sp.derivative(&s, n).sub(&expect).linf() / scale;
            assert!(err < 1e-12, "∂^{n} sin {k}α: {err:e}");
        }
        assert!(sp.hilbert(&s).add(&c).linf() < 1e-12);
    }
}

#[test]
fn constants_and_nyquist_are_annihilated() {
    let sp = spectral(16);
    let g = sp.grid();
    let one = RealField::constant(g, 3.0);
    let nyq = RealField::from_fn(g, |x| (8.0 * x).cos());
    for f in [&one, &nyq] {
        assert!(sp.hilbert(f).linf() < 1e-15);
        assert!(sp.lambda(f).linf() < 1e-15);
        assert!(sp.derivative(f, 1).linf() < 1e-14);
    }
}

#[test]
fn tricomi_needs_dealiasing() {
    let sp = spectral(32);
    let g = sp.grid();
    let tricomi_defect = |f: &RealField, h: &RealField, dealias: bool| {
        let hf = sp.hilbert(f);
        let hh = sp.hilbert(h);
        let lhs = sp.hilbert(
            &sp.pointwise_product(f, &hh, dealias)
                .add(&sp.pointwise_product(h, &hf, dealias)),
        );
        let rhs = sp
            .pointwise_product(&hf, &hh, dealias)
            .sub(&sp.pointwise_product(f, h, dealias));
        lhs.sub(&rhs).linf()
    };
    let f = RealField::from_fn(g, |x| (14.0 * x).cos() + 0.5 * (3.0 * x).sin());
    let h = RealField::from_fn(g, |x| (13.0 * x).sin() - (2.0 * x).cos());
    assert!(tricomi_defect(&f, &h, false) > 0.1);
    let fp = sp.project(&f, g.dealias_cutoff());
    let hp = sp.project(&h, g.dealias_cutoff());
    assert!(tricomi_defect(&fp, &hp, true) < 1e-10);
}

#[test]
fn product_matches_convolution() {
    let sp = spectral(32);
    let g = sp.grid();
    let f = trig(g, 0.2, &[(0.5, -0.1), (0.0, 0.3), (0.2, 0.2)]);
    let w = trig(g, 0.0, &[(1.0, 0.0), (-0.4, 0.7), (0.0, 0.0), (0.1, -0.2)]);
    let cf = sp.dft(&f);
    let cw = sp.dft(&w);
    // Λ(w Hw), with the product expanded as a discrete convolution
    let hw = |k: i64| Complex64::new(0.0, -(k.signum() as f64)) * cw.get(k);
    let conv = |a: &dyn Fn(i64) -> Complex64, b: &dyn Fn(i64) -> Complex64, k: i64| {
        (-8i64..=8).map(|m| a(m) * b(k - m)).sum::<Complex64>()
    };
    let fw = sp.dft(&f.mul(&w));
    let lam = sp.dft(&sp.lambda(&w.mul(&sp.hilbert(&w))));
    for k in -12i64..=12 {
        let direct = conv(&|m| cf.get(m), &|m| cw.get(m), k);
        assert!((fw.get(k) - direct).norm() < 1e-14, "fw at {k}");
        let expect = conv(&|m| cw.get(m), &hw, k) * k.abs() as f64;
        assert!((lam.get(k) - expect).norm() < 1e-13, "Λ(wHw) at {k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn transform_round_trip(vals in prop::collection::vec(-10.0..10.0f64, 64)) {
        let sp = spectral(64);
        let f = RealField::new(sp.grid(), vals).unwrap();
        let back = sp.idft(&sp.dft(&f));
        prop_assert!(back.sub(&f).linf() < 1e-12);
    }

    #[test]
    fn hilbert_is_skew_adjoint((m1, c1) in coeffs(20), (m2, c2) in coeffs(20)) {
        let sp = spectral(64);
        let f = trig(sp.grid(), m1, &c1);
        let g = trig(sp.grid(), m2, &c2);
        let a = inner(&sp.hilbert(&f), &g);
        let b = inner(&f, &sp.hilbert(&g));
        prop_assert!((a + b).abs() < 1e-11);
    }

    #[test]
    fn hilbert_squared_is_minus_identity_plus_mean((m, c) in coeffs(30)) {
        let sp = spectral(64);
        let f = trig(sp.grid(), m, &c);
        let hh = sp.hilbert(&sp.hilbert(&f));
        prop_assert!(hh.sub(&RealField::constant(sp.grid(), f.mean()).sub(&f)).linf() < 1e-12);
    }

    #[test]
    fn parseval((m, c) in coeffs(30)) {
        let sp = spectral(64);
        let f = trig(sp.grid(), m, &c);
        let spectral_sum: f64 = sp.dft(&f).modes().iter().map(|(_, v)| v.norm_sqr()).sum();
        let physical = f.mul(&f).integral();
        prop_assert!((2.0 * PI * spectral_sum - physical).abs() < 1e-11 * physical.max(1.0));
    }

    #[test]
    fn operator_algebra((m, c) in coeffs(30)) {
        let sp = spectral(64);
        let f = trig(sp.grid(), m, &c);
        // H∂ = Λ, Λ^½Λ^½ = Λ, Λ² = -∂²
        prop_assert!(sp.hilbert(&sp.derivative(&f, 1)).sub(&sp.lambda(&f)).linf() < 1e-11);
        let half = sp.lambda_pow(&sp.lambda_pow(&f, 0.5), 0.5);
        prop_assert!(half.sub(&sp.lambda(&f)).linf() < 1e-11);
        prop_assert!(sp.lambda_pow(&f, 2.0).add(&sp.derivative(&f, 2)).linf() < 1e-10);
    }

    #[test]
    fn projection_is_idempotent_and_commutes((m, c) in coeffs(31), cutoff in 0usize..=32) {
        let sp = spectral(64);
        let f = trig(sp.grid(), m, &c);
        let p = sp.project(&f, cutoff);
        prop_assert!(sp.project(&p, cutoff).sub(&p).linf() < 1e-13);
        let a = sp.hilbert(&p);
        let b = sp.project(&sp.hilbert(&f), cutoff);
        prop_assert!(a.sub(&b).linf() < 1e-13);
    }

    #[test]
    fn tricomi_on_dealiased_fields((_, c1) in coeffs(21), (_, c2) in coeffs(21)) {
        let sp = spectral(64);
        let k = sp.grid().dealias_cutoff();
        let f = sp.project(&trig(sp.grid(), 0.0, &c1), k);
        let g = sp.project(&trig(sp.grid(), 0.0, &c2), k);
        let (hf, hg) = (sp.hilbert(&f), sp.hilbert(&g));
        let lhs = sp.hilbert(&sp.pointwise_product(&f, &hg, true).add(&sp.pointwise_product(&g, &hf, true)));
        let rhs = sp.pointwise_product(&hf, &hg, true).sub(&sp.pointwise_product(&f, &g, true));
        prop_assert!(lhs.sub(&rhs).linf() < 1e-10);
    }

    #[test]
    fn shifts_commute_with_operators((m, c) in coeffs(30), by in 0usize..64) {
        let sp = spectral(64);
        let f = trig(sp.grid(), m, &c);
        let a = sp.hilbert(&f).shift_nodes(by);
        let b = sp.hilbert(&f.shift_nodes(by));
        prop_assert!(a.sub(&b).linf() < 1e-12);
    }
}
