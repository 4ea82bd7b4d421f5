use std::ops::{Add, Mul, Neg, Sub};

/// Truncated Laurent series `Σ_k c_k (s−1)^k`, `lowest ≤ k ≤ degree`.
///
/// `degree` is the last order that is known; products and sums keep only
/// the orders both operands determine.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentSeries {
    lowest: i32,
    coeffs: Vec<f64>,
}

impl LaurentSeries {
    /// Coefficients for orders `lowest, lowest + 1, …`.
    pub fn new(lowest: i32, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one known order");
        LaurentSeries { lowest, coeffs }
    }

    pub fn constant(value: f64, degree: i32) -> Self {
        assert!(degree >= 0);
        let mut coeffs = vec![0.0; degree as usize + 1];
        coeffs[0] = value;
        LaurentSeries { lowest: 0, coeffs }
    }

    pub fn lowest(&self) -> i32 {
        self.lowest
    }

    pub fn degree(&self) -> i32 {
        self.lowest + self.coeffs.len() as i32 - 1
    }

    /// Coefficient of `(s−1)^k`; zero below `lowest`, panics above `degree`.
    pub fn coeff(&self, k: i32) -> f64 {
        assert!(k <= self.degree(), "order {k} beyond known degree {}", self.degree());
        if k < self.lowest {
            0.0
        } else {
            self.coeffs[(k - self.lowest) as usize]
        }
    }

    /// Coefficient of `(s−1)^{-1}`.
    pub fn residue(&self) -> f64 {
        self.coeff(-1)
    }

    /// Orders `lowest..0` as `(order, coefficient)` pairs.
    pub fn polar_part(&self) -> Vec<(i32, f64)> {
        (self.lowest..0.min(self.degree() + 1)).map(|k| (k, self.coeff(k))).collect()
    }

    pub fn truncate(&self, degree: i32) -> Self {
        assert!(degree >= self.lowest && degree <= self.degree());
        LaurentSeries { lowest: self.lowest, coeffs: self.coeffs[..(degree - self.lowest + 1) as usize].to_vec() }
    }

    pub fn scale(&self, c: f64) -> Self {
        LaurentSeries { lowest: self.lowest, coeffs: self.coeffs.iter().map(|v| v * c).collect() }
    }

    /// `(s−1)^m · self`.
    pub fn shift(&self, m: i32) -> Self {
        LaurentSeries { lowest: self.lowest + m, coeffs: self.coeffs.clone() }
    }

    pub fn powi(&self, n: u32) -> Self {
        assert!(n >= 1);
        (1..n).fold(self.clone(), |acc, _| &acc * self)
    }

    /// Inverse of a series with nonzero constant term and `lowest = 0`.
    pub fn unit_inverse(&self) -> Self {
        assert_eq!(self.lowest, 0, "unit inverse needs a series without pole");
        let a = &self.coeffs;
        assert!(a[0] != 0.0, "constant term vanishes");
        let mut b = vec![0.0; a.len()];
        b[0] = 1.0 / a[0];
        for k in 1..a.len() {
            let s: f64 = (1..=k).map(|j| a[j] * b[k - j]).sum();
            b[k] = -s / a[0];
        }
        LaurentSeries { lowest: 0, coeffs: b }
    }

    /// `Σ c_k ε^k`.
    pub fn eval(&self, eps: f64) -> f64 {
        self.coeffs.iter().enumerate().map(|(i, c)| c * eps.powi(self.lowest + i as i32)).sum()
    }
}

impl Add for &LaurentSeries {
    type Output = LaurentSeries;
    fn add(self, o: &LaurentSeries) -> LaurentSeries {
        let lowest = self.lowest.min(o.lowest);
        let degree = self.degree().min(o.degree());
        let coeffs = (lowest..=degree).map(|k| self.coeff(k) + o.coeff(k)).collect();
        LaurentSeries { lowest, coeffs }
    }
}

impl Neg for &LaurentSeries {
    type Output = LaurentSeries;
    fn neg(self) -> LaurentSeries {
        self.scale(-1.0)
    }
}

impl Sub for &LaurentSeries {
    type Output = LaurentSeries;
    fn sub(self, o: &LaurentSeries) -> LaurentSeries {
        self + &(-o)
    }
}

impl Mul for &LaurentSeries {
    type Output = LaurentSeries;
    fn mul(self, o: &LaurentSeries) -> LaurentSeries {
        let lowest = self.lowest + o.lowest;
        let degree = (self.degree() + o.lowest).min(o.degree() + self.lowest);
        let coeffs = (lowest..=degree)
            .map(|k| {
                (self.lowest..=self.degree())
                    .filter(|&i| k - i >= o.lowest && k - i <= o.degree())
                    .map(|i| self.coeff(i) * o.coeff(k - i))
                    .sum()
            })
            .collect();
        LaurentSeries { lowest, coeffs }
    }
}

/// `exp(a·ε)` through order `degree`.
pub fn exp_series(a: f64, degree: i32) -> LaurentSeries {
    let mut coeffs = Vec::with_capacity(degree as usize + 1);
    let mut term = 1.0;
    for k in 0..=degree {
        coeffs.push(term);
        term *= a / (k + 1) as f64;
    }
    LaurentSeries::new(0, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_truncation() {
        let a = LaurentSeries::new(-1, vec![1.0, 2.0, 3.0]); // degree 1
        let b = LaurentSeries::new(0, vec![1.0, 1.0, 1.0, 1.0]); // degree 3
        let p = &a * &b;
        assert_eq!(p.lowest(), -1);
        assert_eq!(p.degree(), 1);
        assert_eq!(p.coeff(-1), 1.0);
        assert_eq!(p.coeff(0), 3.0);
        assert_eq!(p.coeff(1), 6.0);
    }

    #[test]
    fn inverse_of_exponential() {
        let e = exp_series(0.7, 6);
        let inv = e.unit_inverse();
        let back = exp_series(-0.7, 6);
        for k in 0..=6 {
            assert!((inv.coeff(k) - back.coeff(k)).abs() < 1e-15);
        }
        let one = &e * &inv;
        assert!((one.coeff(0) - 1.0).abs() < 1e-15);
        for k in 1..=6 {
            assert!(one.coeff(k).abs() < 1e-15);
        }
    }

    #[test]
    fn add_aligns_orders() {
        let a = LaurentSeries::new(-2, vec![1.0, 0.0, 5.0, 1.0]);
        let b = LaurentSeries::constant(2.0, 4);
        let s = &a + &b;
        assert_eq!(s.lowest(), -2);
        assert_eq!(s.degree(), 1);
        assert_eq!(s.coeff(0), 7.0);
        assert_eq!(s.polar_part(), vec![(-2, 1.0), (-1, 0.0)]);
        assert_eq!((&s - &s).coeff(-2), 0.0);
        assert_eq!(a.shift(2).coeff(0), 1.0);
        assert!((a.eval(0.5) - (4.0 + 5.0 + 0.5)).abs() < 1e-15);
    }
}
