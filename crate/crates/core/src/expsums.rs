//! Complete exponential sums
//! `R_{a,b,c,d}(h/q) = Σ_{x,y,z,w mod q} e((ax+by+cz+dw − hxyzw)/q)`
//! for prime `q`, the coefficients `A_{h/q}(n)` built from them, and their
//! correlations over `h`.

use crate::arith::{divisors, gcd, is_prime, mobius, mod_inverse, mod_mul, ramanujan_sum};
use crate::error::{ensure, Result};
use crate::phase::{pairwise_sum, root_table};
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;

/// Largest modulus accepted by the `q^4` oracle.
pub const BRUTEFORCE_MAX_Q: u64 = 13;

/// Arguments of `R_{a,b,c,d}(h/q)`, stored reduced mod `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RSumSpec {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
    pub h: u64,
    pub q: u64,
}

impl RSumSpec {
    /// `q` must be prime, or 1 for the trivial one-term sum.
    pub fn new(coeffs: [i64; 4], h: i64, q: u64) -> Result<Self> {
        ensure(q == 1 || is_prime(q), || format!("R-sum modulus {q} is not prime"))?;
        let red = |v: i64| (v as i128).rem_euclid(q as i128) as u64;
        Ok(RSumSpec { a: red(coeffs[0]), b: red(coeffs[1]), c: red(coeffs[2]), d: red(coeffs[3]), h: red(h), q })
    }

    pub fn coeffs(&self) -> [u64; 4] {
        [self.a, self.b, self.c, self.d]
    }
}

fn from_phase_counts(counts: &[u64], q: u64, scale: f64) -> Complex64 {
    let roots = root_table(q);
    let terms: Vec<Complex64> =
        counts.iter().zip(&roots).filter(|(&c, _)| c != 0).map(|(&c, &z)| z * c as f64).collect();
    pairwise_sum(&terms) * scale
}

/// Literal `q^4`-term sum. Oracle only.
pub fn r_sum_bruteforce(spec: &RSumSpec) -> Result<Complex64> {
    let q = spec.q;
    ensure(q <= BRUTEFORCE_MAX_Q, || format!("brute-force R-sum limited to q <= {BRUTEFORCE_MAX_Q}, got {q}"))?;
    let mut counts = vec![0u64; q as usize];
    for x in 1..=q {
        for y in 1..=q {
            for z in 1..=q {
                for w in 1..=q {
                    let lin = spec.a * x + spec.b * y + spec.c * z + spec.d * w;
                    let prod = spec.h * x * y * z * w;
                    let r = (lin + q * q * q * q * q * q - prod % q) % q;
                    counts[r as usize] += 1;
                }
            }
        }
    }
    Ok(from_phase_counts(&counts, q, 1.0))
}

/// `O(q^2)` evaluation.
///
/// Summing over `w` leaves `q·[hxyz ≡ d]`. For each `(x, y)` with
/// `hxy ≢ 0` the congruence fixes `z = d·(hxy)^{-1}`; the stratum
/// `hxy ≡ 0` survives only when `d ≡ 0`, and then the free `z`-sum is
/// `q·[c ≡ 0]`. Phase multiplicities are collected as integers.
pub fn r_sum_reduced(spec: &RSumSpec) -> Complex64 {
    let q = spec.q;
    let inv: Vec<u64> = (0..q).map(|v| mod_inverse(v, q).unwrap_or(0)).collect();
    let mut counts = vec![0u64; q as usize];
    let free_z = if spec.c == 0 { q } else { 0 };
    for x in 1..=q {
        let hx = mod_mul(spec.h, x, q);
        let ax = mod_mul(spec.a, x, q);
        for y in 1..=q {
            let p = mod_mul(hx, y, q);
            let lin = (ax + mod_mul(spec.b, y, q)) % q;
            if p != 0 {
                let z = mod_mul(spec.d, inv[p as usize], q);
                counts[((lin + mod_mul(spec.c, z, q)) % q) as usize] += 1;
            } else if spec.d == 0 {
                counts[lin as usize] += free_z;
            }
        }
    }
    from_phase_counts(&counts, q, q as f64)
}

/// Closed forms for the strata with `q | d`:
/// `q·c_q(a)c_q(b)` when `(q, c) = 1`, and
/// `q·(c_q(a)c_q(b) + q(c_q(a) + c_q(b) + 1))` when `q | c`.
///
/// `(h, q) = 1` is required; the value does not depend on `h`.
pub fn r_sum_q_divides_d(spec: &RSumSpec) -> Option<i64> {
    let q = spec.q;
    if q == 1 || spec.d != 0 || spec.h == 0 {
        return None;
    }
    let qi = q as i64;
    let ca = ramanujan_sum(q, spec.a as i64);
    let cb = ramanujan_sum(q, spec.b as i64);
    Some(if spec.c == 0 { qi * (ca * cb + qi * (ca + cb + 1)) } else { qi * ca * cb })
}

/// Ordered quadruples `(a, b, c, d)` with `abcd = n`.
pub fn ordered_quadruples(n: u64) -> Vec<[u64; 4]> {
    assert!(n >= 1);
    let mut memo: HashMap<u64, Vec<u64>> = HashMap::new();
    let mut divs = |m: u64| memo.entry(m).or_insert_with(|| divisors(m)).clone();
    let mut out = Vec::new();
    for a in divs(n) {
        let n1 = n / a;
        for b in divs(n1) {
            let n2 = n1 / b;
            for c in divs(n2) {
                out.push([a, b, c, n2 / c]);
            }
        }
    }
    out
}

/// Memo of `R` values keyed by the residues of the quadruple and `h`.
#[derive(Default)]
pub struct RSumCache {
    map: HashMap<RSumSpec, Complex64>,
}

impl RSumCache {
    pub fn get(&mut self, quad: [u64; 4], h: u64, q: u64) -> Complex64 {
        let spec = RSumSpec { a: quad[0] % q, b: quad[1] % q, c: quad[2] % q, d: quad[3] % q, h: h % q, q };
        *self.map.entry(spec).or_insert_with(|| r_sum_reduced(&spec))
    }
}

fn a_sum_cached(quads: &[[u64; 4]], h: u64, q: u64, cache: &mut RSumCache) -> Complex64 {
    let terms: Vec<Complex64> = quads.iter().map(|&quad| cache.get(quad, h, q)).collect();
    pairwise_sum(&terms) * 0.5
}

/// `A_{h/q}(n) = ½ Σ_{abcd = n} R_{a,b,c,d}(h/q)`.
pub fn a_sum(n: u64, h: i64, q: u64) -> Result<Complex64> {
    ensure(n >= 1, || "A-sum needs n >= 1".into())?;
    ensure(is_prime(q), || format!("A-sum modulus {q} is not prime"))?;
    let h = (h as i128).rem_euclid(q as i128) as u64;
    let quads = ordered_quadruples(n);
    Ok(a_sum_cached(&quads, h, q, &mut RSumCache::default()))
}

/// `Σ'_{h mod q} A_{h/q}(n) · conj A_{h/q}(m)`.
pub fn h_correlation(n: u64, m: u64, q: u64) -> Result<Complex64> {
    ensure(n >= 1 && m >= 1, || "h-correlation needs n, m >= 1".into())?;
    ensure(is_prime(q), || format!("h-correlation modulus {q} is not prime"))?;
    let qn = ordered_quadruples(n);
    let qm = ordered_quadruples(m);
    let per_h: Vec<Complex64> = (1..q)
        .into_par_iter()
        .map(|h| {
            let mut cache = RSumCache::default();
            let an = a_sum_cached(&qn, h, q, &mut cache);
            let am = a_sum_cached(&qm, h, q, &mut cache);
            an * am.conj()
        })
        .collect();
    Ok(pairwise_sum(&per_h))
}

/// `Σ'_h R_α(h/q)·conj R_β(h/q) = q²(q(q·c_q(n−m) + μ(q)) + μ(q)³)` for
/// quadruples `α`, `β` with products `n`, `m` coprime to `q`.
pub fn h_correlation_quadruple_formula(n_prod: u64, m_prod: u64, q: u64) -> Result<Complex64> {
    ensure(is_prime(q), || format!("modulus {q} is not prime"))?;
    ensure(gcd(n_prod % q, q) == 1 && gcd(m_prod % q, q) == 1, || {
        format!("formula needs (nm, q) = 1; got n = {n_prod}, m = {m_prod}, q = {q}")
    })?;
    let qi = q as i64;
    let mu = mobius(q);
    let diff = n_prod as i64 % qi - m_prod as i64 % qi;
    let v = qi * qi * (qi * (qi * ramanujan_sum(q, diff) + mu) + mu * mu * mu);
    Ok(Complex64::new(v as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(c: [i64; 4], h: i64, q: u64) -> RSumSpec {
        RSumSpec::new(c, h, q).unwrap()
    }

    #[test]
    fn quoted_r_values() {
        let r = r_sum_bruteforce(&spec([1, 1, 1, 1], 1, 2)).unwrap();
        assert!((r - Complex64::new(-2.0, 0.0)).norm() < 1e-12);
        let r = r_sum_bruteforce(&spec([1, 1, 1, 2], 1, 2)).unwrap();
        assert!((r - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        let r = r_sum_reduced(&spec([1, 1, 1, 2], 1, 2));
        assert!((r - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(r_sum_reduced(&spec([3, 4, 5, 6], 7, 1)), Complex64::new(1.0, 0.0));
        assert!(RSumSpec::new([1, 1, 1, 1], 1, 4).is_err());
        assert!(r_sum_bruteforce(&spec([1, 1, 1, 1], 1, 17)).is_err());
    }

    #[test]
    fn reduced_matches_bruteforce_small() {
        for q in [2u64, 3, 5] {
            let qi = q as i64;
            for a in 0..qi {
                for b in 0..qi {
                    for c in 0..qi {
                        for d in 0..qi {
                            for h in 0..qi {
                                let s = spec([a, b, c, d], h, q);
                                let r1 = r_sum_reduced(&s);
                                let r2 = r_sum_bruteforce(&s).unwrap();
                                assert!((r1 - r2).norm() < 1e-6, "{s:?}: {r1} vs {r2}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn q_divides_d_closed_forms() {
        let s = spec([1, 1, 1, 2], 1, 2);
        assert_eq!(r_sum_q_divides_d(&s), Some(2));
        assert_eq!(r_sum_q_divides_d(&spec([1, 1, 1, 1], 1, 2)), None);
        assert_eq!(r_sum_q_divides_d(&spec([1, 1, 0, 0], 0, 3)), None);
    }

    #[test]
    fn quadruple_enumeration() {
        assert_eq!(ordered_quadruples(1), vec![[1, 1, 1, 1]]);
        assert_eq!(ordered_quadruples(2).len(), 4);
        assert_eq!(ordered_quadruples(16).len(), 35);
        assert_eq!(ordered_quadruples(6).len(), 16);
        for q in ordered_quadruples(360) {
            assert_eq!(q.iter().product::<u64>(), 360);
        }
    }

    #[test]
    fn quoted_correlations() {
        let v = h_correlation(1, 1, 2).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert_eq!(h_correlation_quadruple_formula(1, 1, 2).unwrap().re, 4.0);
        assert_eq!(h_correlation_quadruple_formula(3, 8, 5).unwrap().re, 2350.0);
        assert_eq!(h_correlation_quadruple_formula(2, 1, 3).unwrap().re, -117.0);
        assert!(h_correlation_quadruple_formula(5, 1, 5).is_err());
    }
}
