//! Additive characters `e(t) = exp(2πi t)` at rational phases, and
//! order-fixed summation.

use num_complex::Complex64;
use std::f64::consts::TAU;
use std::ops::Add;

/// `e(num/den)` with the phase reduced exactly in integers first.
///
/// Quarter turns come back exact, so sums over `q ∈ {1, 2, 4}` carry no
/// rounding at all.
pub fn unit_root(num: i64, den: u64) -> Complex64 {
    assert!(den > 0, "unit_root with zero denominator");
    let r = (num as i128).rem_euclid(den as i128) as u64;
    unit_root_reduced(r, den)
}

pub(crate) fn unit_root_reduced(r: u64, den: u64) -> Complex64 {
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let four = 4 * r as u128;
    if four % den as u128 == 0 {
        return match (four / den as u128) % 4 {
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    // symmetric representative keeps |angle| ≤ π
    let signed = if 2 * r > den { r as f64 - den as f64 } else { r as f64 };
    let (s, c) = (TAU * signed / den as f64).sin_cos();
    Complex64::new(c, s)
}

/// Table of `e(k/q)` for `k = 0..q`.
pub fn root_table(q: u64) -> Vec<Complex64> {
    (0..q).map(|k| unit_root_reduced(k, q)).collect()
}

/// Pairwise (tree) summation in a fixed order.
///
/// The split points depend only on the slice length, so the result is
/// bit-identical no matter how the terms were produced.
pub fn pairwise_sum<T>(terms: &[T]) -> T
where
    T: Copy + Default + Add<Output = T>,
{
    const LEAF: usize = 16;
    if terms.len() <= LEAF {
        return terms.iter().fold(T::default(), |acc, &t| acc + t);
    }
    let mid = terms.len() / 2;
    pairwise_sum(&terms[..mid]) + pairwise_sum(&terms[mid..])
}
