//! The Mellin–Barnes kernel
//! `U(X) = (1/2πi) ∫_{(c)} (Γ(s/2)/Γ((1−s)/2))^4 X^{−s} ds`,
//! its large- and small-`X` forms, the smooth weight `w` and the transform
//! `ŵ_q(n) = ∫ w(t) U(Nt) dt`.
//!
//! The integrand is conjugate-symmetric, so `U` and `ŵ` are real. Every
//! integral below is taken over the upper half `P` of a conjugation-symmetric
//! contour and reduced to `Im(∫_P F ds)/π`.

mod transform;
mod weight;

pub use transform::{
    lemma5_envelope, truncation_t, w_hat, w_hat_with, working_envelope, Branch, TransformValue,
    LEADING_REMAINDER_BOUND, OSCILLATORY_MIN_X,
};
pub use weight::{make_smooth_weight, ramp, ramp_derivative, SmoothWeight, MAX_DERIVATIVE, RAMP_DERIVATIVE_BOUNDS};

use crate::error::{ensure, Error, Result};
use crate::phase::pairwise_sum;
use crate::quad::{adaptive_segment, PanelSum};
use crate::special::{digamma, ln_gamma};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

const ADAPTIVE_DEPTH: u32 = 30;
const RAY_BATCH: usize = 64;
const RAY_MAX_BATCHES: usize = 4000;
/// Tilt of the ray past the vertical.
const RAY_TILT: f64 = 0.3;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelConfig {
    /// Real part of the integration line, in `(0, 1/4)`.
    pub c: f64,
    /// Truncation height of the vertical line.
    pub height: f64,
    /// Largest quadrature panel, in units of `Im s`.
    pub step: f64,
    /// Accuracy requested from every kernel value.
    pub tolerance: f64,
    /// Repeat the line integral to twice the height and fold the difference into the bound.
    pub richardson: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig { c: 1.0 / 9.0, height: 1e4, step: 1.0, tolerance: 1e-6, richardson: true }
    }
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.c > 0.0 && self.c < 0.25, || format!("line real part c = {} must lie in (0, 1/4)", self.c))?;
        ensure(self.height.is_finite() && self.height > 0.0, || "truncation height must be positive".into())?;
        ensure(self.step.is_finite() && self.step > 0.0, || "quadrature step must be positive".into())?;
        ensure(self.tolerance > 0.0, || "tolerance must be positive".into())
    }
}

/// A value with an attached error estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// `4 ln(Γ(s/2)/Γ((1−s)/2))`, imaginary part modulo `2π`.
pub fn log_gamma_ratio4(s: Complex64) -> Complex64 {
    4.0 * (ln_gamma(0.5 * s) - ln_gamma(0.5 * (1.0 - s)))
}

/// `d/ds` of [`log_gamma_ratio4`].
pub fn log_gamma_ratio4_derivative(s: Complex64) -> Complex64 {
    2.0 * (digamma(0.5 * s) + digamma(0.5 * (1.0 - s)))
}

/// Quadrature targets below this are not resolvable in double precision;
/// requests for less are still checked, against the final bound.
const TOLERANCE_FLOOR: f64 = 1e-14;

pub(crate) fn working_tolerance(tolerance: f64) -> f64 {
    tolerance.max(TOLERANCE_FLOOR)
}

fn check_accuracy(est: Estimate, tolerance: f64) -> Result<Estimate> {
    if est.error.is_finite() && est.error <= tolerance {
        Ok(est)
    } else {
        Err(Error::Accuracy { requested: tolerance, achieved: est.error })
    }
}

/// Panel breakpoints on `[a, b]` with width `min(step, π/rate)`.
fn breakpoints<R: Fn(f64) -> f64>(a: f64, b: f64, step: f64, rate: R) -> Vec<f64> {
    let mut pts = vec![a];
    let mut t = a;
    while t < b {
        let r = rate(t);
        let w = if r > 0.0 { step.min(PI / r) } else { step };
        t = (t + w).min(b);
        pts.push(t);
    }
    pts
}

fn integrate_panels<F>(f: &F, start: Complex64, dir: Complex64, pts: &[f64], abs_tol: f64) -> PanelSum
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let parts: Vec<PanelSum> =
        pts.par_windows(2).map(|w| adaptive_segment(f, start, dir, w[0], w[1], abs_tol, ADAPTIVE_DEPTH)).collect();
    pairwise_sum(&parts)
}

/// `U(X)` along `Re s = c`, truncated at `|Im s| = height`.
///
/// The error combines the panel estimates, a rounding floor and the tail
/// bound `2A(H)/(πΦ'(H))` (amplitude `A = |F|`, phase speed
/// `Φ' = Re(d log F/ds)`), which holds once `A/Φ'` decreases, i.e. beyond
/// the stationary point `2X^{1/4}`.
pub fn kernel_u(x: f64, cfg: &KernelConfig) -> Result<Estimate> {
    cfg.validate()?;
    ensure(x.is_finite() && x > 0.0, || format!("kernel argument X = {x} must be positive"))?;
    let ln_x = x.ln();
    let c = cfg.c;
    let f = |s: Complex64| (log_gamma_ratio4(s) - s * ln_x).exp();
    let rate = |t: f64| (log_gamma_ratio4_derivative(Complex64::new(c, t)) - ln_x).norm();
    let tail = |h: f64| {
        let s = Complex64::new(c, h);
        let amp = f(s).norm();
        let speed = log_gamma_ratio4_derivative(s).re - ln_x;
        if speed > 0.0 {
            2.0 * amp / (PI * speed)
        } else {
            f64::INFINITY
        }
    };
    let h = cfg.height;
    // the tail alone can rule the request out before any quadrature
    let floor = tail(if cfg.richardson { 2.0 * h } else { h });
    if floor > cfg.tolerance {
        return Err(Error::Accuracy { requested: cfg.tolerance, achieved: floor });
    }
    let start = Complex64::new(c, 0.0);
    let dir = Complex64::i();
    let abs_tol = 1e-3 * working_tolerance(cfg.tolerance) / cfg.height;
    let first = integrate_panels(&f, start, dir, &breakpoints(0.0, h, cfg.step, rate), abs_tol);
    let (total, truncation) = if cfg.richardson {
        let second = integrate_panels(&f, start, dir, &breakpoints(h, 2.0 * h, cfg.step, rate), abs_tol);
        let increment = second.value.im.abs() / PI;
        let excess = (increment - tail(h)).max(0.0);
        (first + second, tail(2.0 * h).max(excess))
    } else {
        (first, tail(h))
    };
    let rounding = 8.0 * f64::EPSILON * total.magnitude / PI;
    let est = Estimate { value: total.value.im / PI, error: total.error / PI + rounding + truncation };
    check_accuracy(est, cfg.tolerance)
}

/// Integral of `exp(log_f)` over the upper half of a bent contour: up the
/// line `Re s = c` to height `tau1`, then along a ray tilted `RAY_TILT`
/// past the vertical into the left half-plane, where the Γ-ratio decays
/// faster than any exponential once `|s|` passes the stationary point.
/// Returns `Im(∫_P F ds)/π` with its estimate, and `∫_P |F| |ds|`.
pub(crate) fn bent_contour<L, D>(
    log_f: &L,
    dlog_f: &D,
    c: f64,
    tau1: f64,
    step: f64,
    abs_tol: f64,
) -> Result<(Estimate, f64)>
where
    L: Fn(Complex64) -> Complex64 + Sync,
    D: Fn(Complex64) -> Complex64 + Sync,
{
    let f = |s: Complex64| log_f(s).exp();
    let up = Complex64::i();
    let vertical_pts = breakpoints(0.0, tau1, step, |t| dlog_f(Complex64::new(c, t)).norm());
    let mut total = integrate_panels(&f, Complex64::new(c, 0.0), up, &vertical_pts, abs_tol);

    let ray_start = Complex64::new(c, tau1);
    let dir = Complex64::from_polar(1.0, 0.5 * PI + RAY_TILT);
    let mut rho = 0.0;
    for _ in 0..RAY_MAX_BATCHES {
        let mut pts = vec![rho];
        for _ in 0..RAY_BATCH {
            let r = dlog_f(ray_start + dir * rho).norm();
            rho += if r > 0.0 { step.min(PI / r) } else { step };
            pts.push(rho);
        }
        let batch = integrate_panels(&f, ray_start, dir, &pts, abs_tol);
        total = total + batch;
        let decaying = log_f(ray_start + dir * rho).re < log_f(ray_start).re;
        if decaying && batch.magnitude <= 1e-17 * total.magnitude {
            let rounding = 8.0 * f64::EPSILON * total.magnitude / PI;
            let est = Estimate { value: total.value.im / PI, error: total.error / PI + rounding };
            return Ok((est, total.magnitude));
        }
    }
    Err(Error::NoConvergence(format!("ray integral still significant at |s| ≈ {rho:.3e}")))
}

/// `U(X)` on the bent contour; no truncation, so it doubles as an
/// independent check of [`kernel_u`].
pub fn kernel_u_bent(x: f64, cfg: &KernelConfig) -> Result<Estimate> {
    cfg.validate()?;
    ensure(x.is_finite() && x > 0.0, || format!("kernel argument X = {x} must be positive"))?;
    let ln_x = x.ln();
    let log_f = |s: Complex64| log_gamma_ratio4(s) - s * ln_x;
    let dlog = |s: Complex64| log_gamma_ratio4_derivative(s) - ln_x;
    let tau1 = 2.5 * x.powf(0.25) + 5.0;
    let abs_tol = 1e-4 * working_tolerance(cfg.tolerance) / (3.0 * tau1);
    let (est, _) = bent_contour(&log_f, &dlog, cfg.c, tau1, cfg.step.min(1.0), abs_tol)?;
    check_accuracy(est, cfg.tolerance)
}

/// The large-`X` form `e((8X)^{1/4}) / X^{3/8}` exactly as stated.
pub fn kernel_u_asymptotic(x: f64) -> Result<Complex64> {
    ensure(x >= 1.0, || format!("asymptotic form needs X >= 1, got {x}"))?;
    let phase = 2.0 * PI * (8.0 * x).powf(0.25);
    Ok(Complex64::from_polar(x.powf(-0.375), phase))
}

/// Amplitude `π^{−1/2} X^{−3/8}` of the leading oscillation.
pub fn leading_amplitude(x: f64) -> f64 {
    x.powf(-0.375) / PI.sqrt()
}

/// Leading term `π^{−1/2} X^{−3/8} cos(8X^{1/4} + 3π/4)` from the saddle
/// point at `Im s = 2X^{1/4}`. Its remainder is below
/// `LEADING_REMAINDER_BOUND · X^{−5/8}` for `X ≥ OSCILLATORY_MIN_X`.
pub fn kernel_u_leading(x: f64) -> f64 {
    leading_amplitude(x) * (8.0 * x.powf(0.25) + 0.75 * PI).cos()
}

/// Interpolation nodes of the small-`X` cubic.
pub const SMALL_X_NODES: [f64; 4] = [1.0, 0.5, 0.25, 0.125];

/// `P(L) = Σ_k SMALL_X_COEFFS[k] L^k`, interpolating `U` at [`SMALL_X_NODES`]
/// in `L = log X`. [`fit_small_x`] reproduces them from [`kernel_u`].
pub const SMALL_X_COEFFS: [f64; 4] =
    [-0.361_940_024_806_879_97, 1.323_195_530_288_399_8, 1.544_734_112_876_449_2, 0.294_596_939_634_147_98];

/// `|U − P(log X)|` on `[1/8, 1]`: twice the largest deviation found at the
/// log-midpoints `2^{-1/2}, 2^{-3/2}, 2^{-5/2}` (0.0339), rounded up.
/// Residues at `s = −2, −4, …` are not polynomial in `log X`.
pub const SMALL_X_MODEL_ERROR: f64 = 0.07;

/// `P(log X)` with the model error as its estimate; infinite below the
/// fitted range.
pub fn kernel_u_small_x(x: f64) -> Result<Estimate> {
    ensure(x > 0.0 && x <= 1.0, || format!("small-X form needs 0 < X <= 1, got {x}"))?;
    let l = x.ln();
    let value = SMALL_X_COEFFS.iter().rev().fold(0.0, |acc, &a| acc * l + a);
    let error = if x >= SMALL_X_NODES[3] { SMALL_X_MODEL_ERROR } else { f64::INFINITY };
    Ok(Estimate { value, error })
}

/// Recompute the small-`X` coefficients from [`kernel_u`] at the nodes.
pub fn fit_small_x(cfg: &KernelConfig) -> Result<[f64; 4]> {
    let mut a = [[0.0; 4]; 4];
    let mut b = [0.0; 4];
    for (i, &x) in SMALL_X_NODES.iter().enumerate() {
        let l = x.ln();
        for (k, slot) in a[i].iter_mut().enumerate() {
            *slot = l.powi(k as i32);
        }
        b[i] = kernel_u(x, cfg)?.value;
    }
    Ok(solve4(a, b))
}

fn solve4(mut a: [[f64; 4]; 4], mut b: [f64; 4]) -> [f64; 4] {
    for col in 0..4 {
        let piv = (col..4).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let m = a[row][col] / a[col][col];
            for k in col..4 {
                a[row][k] -= m * a[col][k];
            }
            b[row] -= m * b[col];
        }
    }
    let mut x = [0.0; 4];
    for row in (0..4).rev() {
        let s: f64 = (row + 1..4).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// One line of a kernel trace.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TraceRow {
    #[serde(rename = "X")]
    pub x: f64,
    pub re_u: f64,
    pub im_u: f64,
    pub error_bound: f64,
}

/// `U` along the line at each `X`; the imaginary part is zero by symmetry.
pub fn kernel_trace(xs: &[f64], cfg: &KernelConfig) -> Result<Vec<TraceRow>> {
    xs.iter()
        .map(|&x| kernel_u(x, cfg).map(|e| TraceRow { x, re_u: e.value, im_u: 0.0, error_bound: e.error }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(KernelConfig::default().validate().is_ok());
        let bad = KernelConfig { c: 0.3, ..Default::default() };
        assert!(bad.validate().is_err());
        assert!(kernel_u(-1.0, &KernelConfig::default()).is_err());
    }

    #[test]
    fn asymptotic_form() {
        let a = kernel_u_asymptotic(1.0).unwrap();
        let phase = 2.0 * PI * 8f64.powf(0.25);
        assert!((a - Complex64::from_polar(1.0, phase)).norm() < 1e-15);
        assert!((kernel_u_asymptotic(1e4).unwrap().norm() - 10f64.powf(-1.5)).abs() < 1e-15);
        assert!(kernel_u_asymptotic(0.5).is_err());
    }

    #[test]
    fn small_x_polynomial() {
        let p = kernel_u_small_x(1.0).unwrap();
        assert_eq!(p.value, SMALL_X_COEFFS[0]);
        assert!(kernel_u_small_x(0.01).unwrap().error.is_infinite());
        assert!(kernel_u_small_x(1.5).is_err());
        assert!(kernel_u_small_x(0.0).is_err());
    }

    #[test]
    fn solve4_recovers_cubic() {
        let coeffs = [0.5, -1.0, 2.0, 0.25];
        let mut a = [[0.0; 4]; 4];
        let mut b = [0.0; 4];
        for i in 0..4 {
            let l = -(i as f64) * 0.7;
            for k in 0..4 {
                a[i][k] = l.powi(k as i32);
            }
            b[i] = (0..4).map(|k| coeffs[k] * l.powi(k as i32)).sum();
        }
        let x = solve4(a, b);
        for k in 0..4 {
            assert!((x[k] - coeffs[k]).abs() < 1e-12);
        }
    }
}
