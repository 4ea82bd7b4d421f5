use crate::arith::{euler_phi, gcd, gcd_signed, mobius};
use crate::phase::unit_root;
use num_complex::Complex64;
use num_rational::Ratio;

/// Reduced rational with positive denominator.
pub type RationalValue = Ratio<i64>;

/// `c_q(n)` via `μ(q/g) φ(q) / φ(q/g)` with `g = (q, n)`.
pub fn ramanujan_sum(q: u64, n: i64) -> i64 {
    assert!(q >= 1, "ramanujan_sum needs q >= 1");
    let r = q / gcd_signed(q, n);
    mobius(r) * (euler_phi(q) / euler_phi(r)) as i64
}

/// `c_q(n)` as the literal sum of `e(an/q)` over `a` coprime to `q`.
pub fn ramanujan_sum_bruteforce(q: u64, n: i64) -> Complex64 {
    assert!(q >= 1, "ramanujan_sum_bruteforce needs q >= 1");
    let n_red = (n as i128).rem_euclid(q as i128) as i64;
    (1..=q).filter(|&a| gcd(a, q) == 1).map(|a| unit_root(a as i64 * n_red, q)).sum()
}

/// `θ_n(q) = μ(q/(q,n)) / φ(q/(q,n))`.
pub fn theta(q: u64, n: i64) -> RationalValue {
    assert!(q >= 1, "theta needs q >= 1");
    let r = q / gcd_signed(q, n);
    Ratio::new(mobius(r), euler_phi(r) as i64)
}
