//! Residues at `s = 1` of `ζ(s)^k · G_d(s) · ((2x)^s − x^s)/s`.

mod laurent;
mod zeta;

pub use laurent::{exp_series, LaurentSeries};
pub use zeta::{stieltjes, stieltjes_constants, zeta_em, zeta_laurent, StieltjesConstant, MAX_ZETA_DEGREE};

use crate::arith::{gcd, is_prime, ramanujan_sum};
use crate::error::{ensure, Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

/// Pole order 4 plus two guard orders.
pub const DEFAULT_DEGREE: i32 = 6;
/// Radius of the oracle contour around `s = 1`.
pub const DEFAULT_RADIUS: f64 = 0.25;

const NUMERIC_TOL: f64 = 1e-13;
const NUMERIC_MIN_NODES: usize = 16;
const NUMERIC_MAX_NODES: usize = 4096;

/// `F_x(d)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MainTermValue {
    pub x: f64,
    pub d: u64,
    pub value: f64,
}

fn check_modulus(d: u64) -> Result<()> {
    ensure(d == 1 || is_prime(d), || format!("d = {d} must be 1 or a prime"))
}

fn check_scale(x: f64) -> Result<()> {
    ensure(x.is_finite() && x >= 2.0, || format!("x = {x} must be at least 2"))
}

/// `G_q(s) = 1 − (q/(q−1))(1 − q^{−s})^k` expanded at `s = 1`; the
/// constant series 1 for `q = 1`.
pub fn local_factor_series_k(q: u64, k: u32, degree: i32) -> Result<LaurentSeries> {
    check_modulus(q)?;
    ensure(degree >= 0, || format!("degree {degree} must be non-negative"))?;
    if q == 1 {
        return Ok(LaurentSeries::constant(1.0, degree));
    }
    let qf = q as f64;
    // 1 − q^{−s} = 1 − q^{−1} e^{−ε log q}
    let inner = &LaurentSeries::constant(1.0, degree) - &exp_series(-qf.ln(), degree).scale(1.0 / qf);
    let factor = inner.powi(k).scale(qf / (qf - 1.0));
    Ok(&LaurentSeries::constant(1.0, degree) - &factor)
}

pub fn local_factor_series(q: u64, degree: i32) -> Result<LaurentSeries> {
    local_factor_series_k(q, 4, degree)
}

/// `((2x)^s − x^s)/s` at `s = 1 + ε`: `(2x e^{ε log 2x} − x e^{ε log x})/(1 + ε)`.
pub fn window_series(x: f64, degree: i32) -> LaurentSeries {
    let upper = exp_series((2.0 * x).ln(), degree).scale(2.0 * x);
    let lower = exp_series(x.ln(), degree).scale(x);
    let one_plus = LaurentSeries::new(0, {
        let mut c = vec![0.0; degree as usize + 1];
        c[0] = 1.0;
        if degree >= 1 {
            c[1] = 1.0;
        }
        c
    });
    &(&upper - &lower) * &one_plus.unit_inverse()
}

/// `ζ(s)^k G_d(s)` at `s = 1`; its polar part is the meromorphic part of
/// `Σ d_k(n) θ_n(d) n^{−s}`.
pub fn dirichlet_series_k(d: u64, k: u32, degree: i32) -> Result<LaurentSeries> {
    ensure(k >= 1, || "k must be at least 1".to_string())?;
    ensure(degree >= k as i32 - 1, || format!("degree {degree} too small for a pole of order {k}"))?;
    let zeta_k = zeta_laurent(degree)?.powi(k);
    Ok(&zeta_k * &local_factor_series_k(d, k, degree)?)
}

/// `Res_{s=1}` of `ζ(s)^k G_d(s) ((2x)^s − x^s)/s` by series algebra.
pub fn residue_f_fold(x: f64, d: u64, k: u32, degree: i32) -> Result<MainTermValue> {
    check_scale(x)?;
    let series = dirichlet_series_k(d, k, degree)?;
    let product = &series * &window_series(x, degree);
    ensure(product.degree() >= -1, || format!("degree {degree} leaves the residue undetermined for k = {k}"))?;
    Ok(MainTermValue { x, d, value: product.residue() })
}

/// `F_x(d)` for `d ∈ {1, prime}`.
pub fn residue_f(x: f64, d: u64, degree: i32) -> Result<MainTermValue> {
    residue_f_fold(x, d, 4, degree)
}

fn integrand(x: f64, d: u64, k: u32, s: Complex64) -> Complex64 {
    let window = ((2.0 * x).ln() * s).exp() - (x.ln() * s).exp();
    let mut g = Complex64::new(1.0, 0.0);
    if d > 1 {
        let qf = d as f64;
        let inner = Complex64::new(1.0, 0.0) - (-s * qf.ln()).exp();
        g -= inner.powi(k as i32) * (qf / (qf - 1.0));
    }
    zeta_em(s).powi(k as i32) * g * window / s
}

/// Residue by the trapezoid rule on `|s − 1| = radius`, doubling the node
/// count until two successive values agree to 1e-13 relative.
pub fn residue_f_numeric_with(x: f64, d: u64, k: u32, radius: f64) -> Result<MainTermValue> {
    check_scale(x)?;
    check_modulus(d)?;
    ensure(radius > 0.0 && radius <= 0.5, || format!("radius {radius} outside (0, 1/2]"))?;
    let trapezoid = |m: usize| -> f64 {
        let sum: Complex64 = (0..m)
            .map(|j| {
                let z = Complex64::from_polar(radius, 2.0 * PI * j as f64 / m as f64);
                integrand(x, d, k, 1.0 + z) * z
            })
            .sum();
        (sum / m as f64).re
    };
    let mut m = NUMERIC_MIN_NODES;
    let mut prev = trapezoid(m);
    while m < NUMERIC_MAX_NODES {
        m *= 2;
        let next = trapezoid(m);
        if (next - prev).abs() <= NUMERIC_TOL * next.abs() {
            return Ok(MainTermValue { x, d, value: next });
        }
        prev = next;
    }
    Err(Error::NoConvergence(format!("contour residue for x = {x}, d = {d} unsettled after {NUMERIC_MAX_NODES} nodes")))
}

pub fn residue_f_numeric(x: f64, d: u64) -> Result<MainTermValue> {
    residue_f_numeric_with(x, d, 4, DEFAULT_RADIUS)
}

fn check_residue(q: u64, a: u64) -> Result<()> {
    ensure(q >= 1 && (1..=q).contains(&a), || format!("residue a = {a} outside 1..={q}"))
}

/// `M_x(q, a) = (F_x(1) + c_q(a) F_x(q))/q` for prime `q`.
pub fn main_term_m(x: f64, q: u64, a: u64) -> Result<f64> {
    ensure(is_prime(q), || format!("q = {q} must be prime"))?;
    check_residue(q, a)?;
    let f1 = residue_f(x, 1, DEFAULT_DEGREE)?.value;
    let fq = residue_f(x, q, DEFAULT_DEGREE)?.value;
    Ok((f1 + ramanujan_sum(q, a as i64) as f64 * fq) / q as f64)
}

/// `f_{a/q}(x) = F_x(q/(q, a))`.
pub fn f_over_q(x: f64, q: u64, a: u64) -> Result<f64> {
    check_residue(q, a)?;
    Ok(residue_f(x, q / gcd(q, a), DEFAULT_DEGREE)?.value)
}

/// Polar coefficients `(order, value)` of the meromorphic part of
/// `Σ d_4(n) e(na/q) n^{−s}`, i.e. of `ζ^4 G_{q/(q,a)}`.
pub fn polar_coefficients(q: u64, a: u64, degree: i32) -> Result<Vec<(i32, f64)>> {
    check_residue(q, a)?;
    Ok(dirichlet_series_k(q / gcd(q, a), 4, degree)?.polar_part())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_factor_at_one() {
        for q in [2u64, 3, 5, 7, 101] {
            let g = local_factor_series(q, 6).unwrap();
            let qf = q as f64;
            let expect = 1.0 - ((qf - 1.0) / qf).powi(3);
            assert!((g.coeff(0) - expect).abs() < 1e-15, "q={q}");
        }
        assert_eq!(local_factor_series(1, 6).unwrap(), LaurentSeries::constant(1.0, 6));
        assert!(local_factor_series(6, 6).is_err());
    }

    #[test]
    fn single_zeta_residue_is_x() {
        for x in [2.0, 10.0, 1234.5, 1e6] {
            let r = residue_f_fold(x, 1, 1, 6).unwrap().value;
            assert!((r - x).abs() <= 1e-12 * x, "x={x}: {r}");
        }
    }

    #[test]
    fn window_series_derivative() {
        // d/ds ((2x)^s − x^s)/s at s = 1 is (2x log 2x − x log x) − x
        let x = 50.0f64;
        let w = window_series(x, 3);
        assert!((w.coeff(0) - x).abs() < 1e-12);
        let expect = 2.0 * x * (2.0 * x).ln() - x * x.ln() - x;
        assert!((w.coeff(1) - expect).abs() < 1e-11);
    }

    #[test]
    fn degree_too_small_rejected() {
        assert!(residue_f(100.0, 1, 2).is_err());
        assert!(residue_f(100.0, 1, 3).is_ok());
        assert!(residue_f(1.0, 1, 6).is_err());
        assert!(residue_f(100.0, 9, 6).is_err());
    }

    #[test]
    fn series_matches_contour() {
        let s = residue_f(1e4, 7, 6).unwrap().value;
        let n = residue_f_numeric(1e4, 7).unwrap().value;
        assert!((s - n).abs() <= 1e-8 * n.abs(), "{s} vs {n}");
    }

    #[test]
    fn f_over_q_cases() {
        let x = 500.0;
        let f1 = residue_f(x, 1, DEFAULT_DEGREE).unwrap().value;
        let f7 = residue_f(x, 7, DEFAULT_DEGREE).unwrap().value;
        assert_eq!(f_over_q(x, 7, 7).unwrap(), f1);
        assert_eq!(f_over_q(x, 7, 3).unwrap(), f7);
        assert_eq!(f_over_q(x, 1, 1).unwrap(), f1);
        assert!(f_over_q(x, 12, 1).is_err());
        assert!(f_over_q(x, 7, 0).is_err());
    }
}
