use d4ap::kernel::{
    fit_small_x, kernel_trace, kernel_u, kernel_u_asymptotic, kernel_u_bent, kernel_u_leading, kernel_u_small_x,
    lemma5_envelope, make_smooth_weight, truncation_t, w_hat, w_hat_with, working_envelope, Branch, KernelConfig,
    SmoothWeight, LEADING_REMAINDER_BOUND, MAX_DERIVATIVE, SMALL_X_COEFFS, SMALL_X_MODEL_ERROR,
};
use d4ap::quad::gl32;
use d4ap::Error;
use proptest::prelude::*;

/// `U(X)` from mpmath quadrature at 30 digits.
const REFERENCE: [(f64, f64); 14] = [
    (0.0625, 1.391_978_395_601_278_4),
    (0.125, 0.917_184_494_786_108_1),
    (0.25, -0.012_454_232_559_061_686),
    (1.0 / 3.0, -0.355_801_630_589_847_93),
    (0.5, -0.635_045_159_020_722_6),
    (1.0, -0.361_940_024_806_879_97),
    (2.0, 0.313_666_066_461_558_3),
    (10.0, -0.160_207_340_211_603_17),
    (30.0, -0.092_149_456_231_9),
    (100.0, -0.080_156_198_142_540_96),
    (1000.0, -0.041_409_756_204_372),
    (3000.0, 0.008_044_716_227_890_606),
    (10000.0, 0.014_017_138_204_928_885),
    (30000.0, 0.008_043_984_102_81),
];

#[test]
fn bent_contour_matches_reference() {
    let cfg = KernelConfig { tolerance: 1e-10, ..KernelConfig::default() };
    for &(x, u) in &REFERENCE {
        let e = kernel_u_bent(x, &cfg).unwrap();
        let digits: f64 = if x == 30.0 || x == 30000.0 { 1e-12 } else { 1e-11 };
        assert!((e.value - u).abs() <= digits.max(e.error), "X={x}: {} vs {u}", e.value);
    }
}

#[test]
fn line_integral_within_its_bound() {
    let cfg = KernelConfig::default();
    for &(x, u) in REFERENCE.iter().filter(|(x, _)| [1.0, 10.0, 1000.0].contains(x)) {
        let e = kernel_u(x, &cfg).unwrap();
        assert!(e.error <= cfg.tolerance);
        assert!((e.value - u).abs() <= e.error, "X={x}: {} ± {} vs {u}", e.value, e.error);
    }
}

#[test]
fn line_independence() {
    let a = kernel_u(1.0, &KernelConfig::default()).unwrap();
    let b = kernel_u(1.0, &KernelConfig { c: 0.2, ..KernelConfig::default() }).unwrap();
    assert!((a.value - b.value).abs() <= a.error + b.error);
}

#[test]
fn unreachable_tolerance_is_an_accuracy_error() {
    let cfg = KernelConfig { height: 50.0, richardson: false, ..KernelConfig::default() };
    match kernel_u(10.0, &cfg) {
        Err(e @ Error::Accuracy { .. }) => assert_eq!(e.exit_code(), 2),
        other => panic!("expected accuracy failure, got {other:?}"),
    }
    assert!(kernel_u(0.0, &KernelConfig::default()).is_err());
    assert!(kernel_u(1.0, &KernelConfig { c: 0.3, ..KernelConfig::default() }).is_err());
}

#[test]
fn small_x_cubic() {
    assert_eq!(SMALL_X_COEFFS.len(), 4);
    assert_eq!(kernel_u_small_x(1.0).unwrap().value, SMALL_X_COEFFS[0]);
    for &(x, u) in REFERENCE.iter().filter(|(x, _)| (0.125..=1.0).contains(x)) {
        let p = kernel_u_small_x(x).unwrap();
        assert!((p.value - u).abs() <= p.error, "X={x}");
    }
    // combined-error check at 1/3 against the contour value
    let third = kernel_u(1.0 / 3.0, &KernelConfig::default()).unwrap();
    let p = kernel_u_small_x(1.0 / 3.0).unwrap();
    assert!((third.value - p.value).abs() <= third.error + SMALL_X_MODEL_ERROR);
    assert!(kernel_u_small_x(0.0625).unwrap().error.is_infinite());
    assert!(kernel_u_small_x(2.0).is_err());
}

#[test]
fn small_x_coefficients_reproduce() {
    let fitted = fit_small_x(&KernelConfig::default()).unwrap();
    for (a, b) in fitted.iter().zip(SMALL_X_COEFFS) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
}

#[test]
fn leading_term_remainder() {
    for &(x, u) in REFERENCE.iter().filter(|(x, _)| *x >= 10.0) {
        let r = (u - kernel_u_leading(x)).abs();
        assert!(r <= LEADING_REMAINDER_BOUND * x.powf(-0.625), "X={x}: remainder {r}");
    }
}

#[test]
fn stated_asymptotic_form() {
    let one = kernel_u_asymptotic(1.0).unwrap();
    let phase = 2.0 * std::f64::consts::PI * 8f64.powf(0.25);
    assert!((one.re - phase.cos()).abs() < 1e-15 && (one.im - phase.sin()).abs() < 1e-15);
    assert!((kernel_u_asymptotic(1e4).unwrap().norm() - 10f64.powf(-1.5)).abs() < 1e-16);
    assert!(kernel_u_asymptotic(0.5).is_err());
}

#[test]
fn trace_rows() {
    let rows = kernel_trace(&[1.0, 2.0], &KernelConfig::default()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1].im_u, 0.0);
    assert!((rows[1].re_u - REFERENCE[6].1).abs() <= rows[1].error_bound);
}

/// `∫ w(t) U(Nt) dt` by Gauss–Legendre panels with `U` from the bent contour.
fn w_hat_oracle(n: u64, q: u64, w: &SmoothWeight) -> f64 {
    let big_n = std::f64::consts::PI.powi(4) * n as f64 / (q as f64).powi(4);
    let cfg = KernelConfig { tolerance: 1e-9, ..KernelConfig::default() };
    let (lo, hi) = w.support();
    let x = w.x();
    let mut total = 0.0;
    for (a, b, panels) in [(lo, x, 4), (x, 2.0 * x, 8), (2.0 * x, hi, 4)] {
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let (pa, pb) = (a + p as f64 * h, a + (p + 1) as f64 * h);
            total += gl32().integrate(pa, pb, |t: f64| w.value(t) * kernel_u_bent(big_n * t, &cfg).unwrap().value);
        }
    }
    total
}

#[test]
fn transform_against_pointwise_quadrature() {
    let w = make_smooth_weight(1000.0, 200.0).unwrap();
    let cfg = KernelConfig::default();
    for n in [1u64, 5] {
        let oracle = w_hat_oracle(n, 11, &w);
        let v = w_hat(n, 11, &w, &cfg).unwrap();
        assert!(
            (v.value - oracle).abs() <= v.error + 1e-6 * w.integral(),
            "n={n}: {} vs {oracle} ({:?})",
            v.value,
            v.branch
        );
        let d = w_hat_with(n, 11, &w, &cfg, Branch::Direct).unwrap();
        assert!((d.value - oracle).abs() <= d.error + 1e-6 * w.integral(), "n={n} direct");
    }
}

#[test]
fn branches_agree() {
    let (x, q) = (1e4f64, 11u64);
    let y = x.powf(0.75) * (q as f64).powf(7.0 / 16.0);
    let w = make_smooth_weight(x, y).unwrap();
    let cfg = KernelConfig::default();
    for n in [40u64, 175, 698] {
        let d = w_hat_with(n, q, &w, &cfg, Branch::Direct).unwrap();
        let o = w_hat_with(n, q, &w, &cfg, Branch::Oscillatory).unwrap();
        assert_eq!(o.branch, Branch::Oscillatory);
        assert!((d.value - o.value).abs() <= d.error + o.error, "n={n}: {} vs {}", d.value, o.value);
        // trivial size bound: |ŵ| ≤ ∫w · max|U|
        assert!(d.value.abs() <= w.integral() * 1.4);
        assert!(working_envelope(n, q, x) > 0.0 && lemma5_envelope(n, q, &w, 0) > 0.0);
    }
}

#[test]
fn truncation_parameter_examples() {
    assert!((truncation_t(1e4, 10.0, 1e4, 0.0) - 1.0).abs() < 1e-12);
    let ratio: f64 = truncation_t(1e4, 10.0, 1e4, 0.1) / truncation_t(1e4, 10.0, 1e4, 0.0);
    assert!((ratio - 1e4f64.powf(0.1)).abs() < 1e-12);
}

#[test]
fn weight_integral_bracket() {
    let w = make_smooth_weight(1000.0, 300.0).unwrap();
    let (lo, hi) = w.support();
    let h = (hi - lo) / 64.0;
    let numeric: f64 =
        (0..64).map(|p| gl32().integrate(lo + p as f64 * h, lo + (p + 1) as f64 * h, |t: f64| w.value(t))).sum();
    assert!(numeric >= 1000.0 && numeric <= 1600.0);
    assert!((numeric - w.integral()).abs() < 1e-9 * numeric);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_shape(x in 10.0f64..1e6, frac in 0.0f64..1.0, s in 0.0f64..1.0) {
        let y = 1.0 + frac * (x - 1.0);
        let w = make_smooth_weight(x, y).unwrap();
        let t = x - y + s * (x + 3.0 * y);
        let v = w.value(t);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(w.value(1.5 * x), 1.0);
        prop_assert_eq!(w.value(x - y), 0.0);
        prop_assert_eq!(w.value(2.0 * x + y), 0.0);
        for j in 0..=MAX_DERIVATIVE {
            prop_assert!(w.derivative(t, j).abs() <= w.derivative_bound(j) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn truncation_decreases_in_y(y1 in 1.0f64..1e4, y2 in 1.0f64..1e4) {
        prop_assume!(y1 < y2);
        prop_assert!(truncation_t(1e4, 11.0, y1, 0.05) > truncation_t(1e4, 11.0, y2, 0.05));
    }
}
