use crate::arith::{gcd, DivisorTable};
use crate::error::{ensure, Result};
use crate::experiments::{ExperimentConfig, ResidueProfile};
use crate::kernel::{make_smooth_weight, SmoothWeight};
use crate::mainterm::{dirichlet_series_k, LaurentSeries, DEFAULT_DEGREE};
use crate::phase::{pairwise_sum, unit_root};
use crate::quad::gl32;
use num_complex::Complex64;

const PANELS: usize = 16;

/// `∫ w(t) t^{s−1} dt` at `s = 1 + ε` through `ε^degree`, coefficients
/// `∫ w(t) (log t)^j dt / j!`.
pub fn mellin_series(weight: &SmoothWeight, degree: i32) -> LaurentSeries {
    let (lo, hi) = weight.support();
    let x = weight.x();
    let pieces = [(lo, x), (x, 2.0 * x), (2.0 * x, hi)];
    let mut coeffs = vec![0.0; degree as usize + 1];
    let mut factorial = 1.0;
    for (j, c) in coeffs.iter_mut().enumerate() {
        if j > 0 {
            factorial *= j as f64;
        }
        let mut parts = Vec::with_capacity(3 * PANELS);
        for &(a, b) in &pieces {
            let h = (b - a) / PANELS as f64;
            for p in 0..PANELS {
                let (pa, pb) = (a + p as f64 * h, a + (p + 1) as f64 * h);
                parts.push(gl32().integrate(pa, pb, |t: f64| weight.value(t) * t.ln().powi(j as i32)));
            }
        }
        *c = pairwise_sum(&parts) / factorial;
    }
    LaurentSeries::new(0, coeffs)
}

fn smooth_residue(weight: &SmoothWeight, d: u64) -> Result<f64> {
    let series = dirichlet_series_k(d, 4, DEFAULT_DEGREE)?;
    Ok((&series * &mellin_series(weight, DEFAULT_DEGREE)).residue())
}

fn check(cfg: &ExperimentConfig, h: u64, table: &DivisorTable) -> Result<SmoothWeight> {
    cfg.validate()?;
    ensure(gcd(h, cfg.q) == 1, || format!("h = {h} must be coprime to q = {}", cfg.q))?;
    let weight = make_smooth_weight(cfg.x as f64, cfg.y)?;
    let top = weight.support().1.ceil() as u64;
    ensure(top <= table.limit(), || format!("weight support reaches {top}, beyond table limit {}", table.limit()))?;
    Ok(weight)
}

fn weighted_sum(weight: &SmoothWeight, q: u64, h: u64, table: &DivisorTable) -> Complex64 {
    let (lo, hi) = weight.support();
    let terms: Vec<Complex64> = (lo.floor() as u64 + 1..=hi.ceil() as u64)
        .filter(|&n| n >= 1)
        .map(|n| unit_root((n * h % q) as i64, q) * (table.get(n) as f64 * weight.value(n as f64)))
        .collect();
    pairwise_sum(&terms)
}

/// `Σ d_4(n) e(nh/q) w(n) − Res_{s=1} E_{h/q}(s) ∫ w(t) t^{s−1} dt`.
pub fn smoothed_delta(cfg: &ExperimentConfig, h: u64, table: &DivisorTable) -> Result<Complex64> {
    let weight = check(cfg, h, table)?;
    let q = cfg.q;
    Ok(weighted_sum(&weight, q, h % q, table) - smooth_residue(&weight, q)?)
}

/// Pieces of the bound `|Δ̃(h/q) − Δ(h/q)| ≤ window_mass + residue_shift`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingBudget {
    /// `Δ̃ − Δ`.
    pub gap: Complex64,
    /// `Σ d_4(n)` over the two ramp windows.
    pub window_mass: f64,
    /// `|Res(W) − F_x(q)|`.
    pub residue_shift: f64,
}

impl SmoothingBudget {
    pub fn bound(&self) -> f64 {
        self.window_mass + self.residue_shift
    }
}

pub fn smoothing_budget(cfg: &ExperimentConfig, h: u64, table: &DivisorTable) -> Result<SmoothingBudget> {
    let weight = check(cfg, h, table)?;
    let q = cfg.q;
    let smooth = smoothed_delta(cfg, h, table)?;
    let profile = ResidueProfile::new(cfg.x, q, table)?;
    let sharp = profile.delta(h % q)?;
    let (lo, hi) = weight.support();
    let x = cfg.x;
    let window_mass: u64 = (lo.floor() as u64 + 1..=x)
        .chain(2 * x + 1..=hi.ceil() as u64)
        .filter(|&n| n >= 1)
        .map(|n| table.get(n) as u64)
        .sum();
    let residue_shift = (smooth_residue(&weight, q)? - profile.fq).abs();
    Ok(SmoothingBudget { gap: smooth - sharp, window_mass: window_mass as f64, residue_shift })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mellin_constant_term_is_integral() {
        let w = make_smooth_weight(1000.0, 200.0).unwrap();
        let m = mellin_series(&w, 3);
        assert!((m.coeff(0) - w.integral()).abs() < 1e-9 * w.integral());
        // plateau-only check of the log moment when Y is tiny
        let thin = make_smooth_weight(1000.0, 1.0).unwrap();
        let m1 = mellin_series(&thin, 1).coeff(1);
        let plateau = 2000.0 * 2000f64.ln() - 1000.0 * 1000f64.ln() - 1000.0;
        assert!((m1 - plateau).abs() < 1e-3 * plateau);
    }
}
