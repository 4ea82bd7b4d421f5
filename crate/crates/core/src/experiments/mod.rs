//! Exact residue-class statistics of `d_4` on `(x, 2x]` and the derived
//! variance, residual and identity checks.

mod scaling;
mod smoothing;

pub use scaling::{
    failures_path, log_log_slope, read_records, scaling_table, write_rows, OutputFormat, ScalingFailure, ScalingRun,
};
pub use smoothing::{mellin_series, smoothed_delta, smoothing_budget, SmoothingBudget};

use crate::arith::{
    build_character_group, character_partial_sums, euler_phi, gcd, is_prime, mobius, ramanujan_sum, DivisorTable,
};
use crate::error::{ensure, Result};
use crate::mainterm::{main_term_m, residue_f, DEFAULT_DEGREE};
use crate::phase::{pairwise_sum, root_table, unit_root};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub x: u64,
    pub q: u64,
    pub y: f64,
    pub epsilon: f64,
    pub output_path: Option<PathBuf>,
    /// Worker count; `None` uses the ambient rayon pool.
    pub parallelism: Option<usize>,
    pub seed: u64,
}

/// `x^{3/4} q^{7/16}`, clamped to `[1, x]`.
pub fn default_transition(x: u64, q: u64) -> f64 {
    let xf = x as f64;
    (xf.powf(0.75) * (q as f64).powf(7.0 / 16.0)).clamp(1.0, xf.max(1.0))
}

impl ExperimentConfig {
    pub fn new(x: u64, q: u64) -> Self {
        ExperimentConfig {
            x,
            q,
            y: default_transition(x, q),
            epsilon: 0.05,
            output_path: None,
            parallelism: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.x >= 2, || format!("x = {} must be at least 2", self.x))?;
        ensure(is_prime(self.q), || format!("q = {} must be prime", self.q))?;
        ensure(self.q <= self.x, || format!("q = {} exceeds x = {}", self.q, self.x))?;
        ensure(self.y.is_finite() && self.y >= 1.0 && self.y <= self.x as f64, || {
            format!("Y = {} outside [1, x = {}]", self.y, self.x)
        })?;
        ensure(self.epsilon > 0.0 && self.epsilon < 1.0, || format!("epsilon = {} outside (0, 1)", self.epsilon))
    }

    /// Set when `q > x^{4/7}`, outside the range the variance bound covers.
    pub fn range_warning(&self) -> Option<String> {
        let limit = (self.x as f64).powf(4.0 / 7.0);
        (self.q as f64 > limit)
            .then(|| format!("q = {} exceeds x^(4/7) = {limit:.1}; results are outside the theorem range", self.q))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub x: u64,
    pub q: u64,
    #[serde(rename = "Y")]
    pub y: f64,
    pub variance: f64,
    pub normalized_variance: f64,
    pub theorem2_sum: f64,
    pub normalized_t2: f64,
    pub parseval_gap: f64,
    pub wall_ms: f64,
}

/// `Σ_{x<n≤2x, n≡r (q)} d_4(n)` for each `r`, summed exactly, together with
/// the main terms `F_x(1)` and `F_x(q)`.
#[derive(Clone, Debug)]
pub struct ResidueProfile {
    x: u64,
    q: u64,
    sums: Vec<u64>,
    f1: f64,
    fq: f64,
}

impl ResidueProfile {
    pub fn new(x: u64, q: u64, table: &DivisorTable) -> Result<Self> {
        ensure(x >= 2, || format!("x = {x} must be at least 2"))?;
        ensure(q == 1 || is_prime(q), || format!("q = {q} must be 1 or prime"))?;
        ensure(2 * x <= table.limit(), || format!("2x = {} exceeds table limit {}", 2 * x, table.limit()))?;
        let mut sums = vec![0u64; q as usize];
        let mut r = (x + 1) % q;
        for &v in table.window(x, 2 * x)? {
            sums[r as usize] += v as u64;
            r += 1;
            if r == q {
                r = 0;
            }
        }
        let xf = x as f64;
        let f1 = residue_f(xf, 1, DEFAULT_DEGREE)?.value;
        let fq = if q == 1 { f1 } else { residue_f(xf, q, DEFAULT_DEGREE)?.value };
        Ok(ResidueProfile { x, q, sums, f1, fq })
    }

    pub fn x(&self) -> u64 {
        self.x
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Class sums indexed by `r = 0..q`.
    pub fn class_sums(&self) -> &[u64] {
        &self.sums
    }

    pub fn total(&self) -> u64 {
        self.sums.iter().sum()
    }

    /// `F_x(1)`.
    pub fn main_total(&self) -> f64 {
        self.f1
    }

    fn check(&self, a: u64) -> Result<()> {
        ensure((1..=self.q).contains(&a), || format!("a = {a} outside 1..={}", self.q))
    }

    /// `Δ(a/q) = Σ_{x<n≤2x} d_4(n) e(na/q) − F_x(q/(q,a))`.
    pub fn delta(&self, a: u64) -> Result<Complex64> {
        self.check(a)?;
        Ok(self.delta_with(a, &root_table(self.q)))
    }

    fn delta_with(&self, a: u64, roots: &[Complex64]) -> Complex64 {
        let q = self.q;
        let terms: Vec<Complex64> =
            self.sums.iter().enumerate().map(|(r, &s)| roots[((r as u64 * a) % q) as usize] * s as f64).collect();
        let main = if gcd(q, a) == q { self.f1 } else { self.fq };
        pairwise_sum(&terms) - main
    }

    /// `M_x(q, a)` from the cached main terms.
    pub fn main_term(&self, a: u64) -> Result<f64> {
        self.check(a)?;
        ensure(self.q > 1, || "M_x needs a prime modulus".to_string())?;
        let c = ramanujan_sum(self.q, a as i64) as f64;
        Ok((self.f1 + c * self.fq) / self.q as f64)
    }

    /// `E_x(q, a) = Σ_{x<n≤2x, n≡a (q)} d_4(n) − M_x(q, a)`.
    pub fn residual(&self, a: u64) -> Result<f64> {
        let m = self.main_term(a)?;
        Ok(self.sums[(a % self.q) as usize] as f64 - m)
    }

    /// `Δ(a/q)` for `a = 1..=q`, computed in parallel, returned in order.
    pub fn deltas(&self) -> Vec<Complex64> {
        let roots = root_table(self.q);
        (1..=self.q).into_par_iter().map(|a| self.delta_with(a, &roots)).collect()
    }

    pub fn residuals(&self) -> Result<Vec<f64>> {
        (1..=self.q).map(|a| self.residual(a)).collect()
    }
}

fn with_pool<T: Send>(parallelism: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match parallelism {
        None => Ok(f()),
        Some(n) => {
            ensure(n >= 1, || "parallelism must be at least 1".to_string())?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::Error::Precondition(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

pub fn delta(x: u64, q: u64, a: u64, table: &DivisorTable) -> Result<Complex64> {
    ResidueProfile::new(x, q, table)?.delta(a)
}

pub fn residual_e(x: u64, q: u64, a: u64, table: &DivisorTable) -> Result<f64> {
    ensure(is_prime(q), || format!("q = {q} must be prime"))?;
    ResidueProfile::new(x, q, table)?.residual(a)
}

fn parseval_gap(deltas: &[Complex64], residuals: &[f64], q: u64) -> f64 {
    let lhs = pairwise_sum(&residuals.iter().map(|e| e * e).collect::<Vec<_>>());
    let rhs = pairwise_sum(&deltas.iter().map(|d| d.norm_sqr()).collect::<Vec<_>>()) / q as f64;
    (lhs - rhs).abs() / rhs
}

/// `|Σ_a E_x(q,a)^2 − (1/q) Σ_b |Δ(b/q)|^2| / ((1/q) Σ_b |Δ(b/q)|^2)`.
pub fn parseval_check(x: u64, q: u64, table: &DivisorTable) -> Result<f64> {
    ensure(is_prime(q), || format!("q = {q} must be prime"))?;
    let profile = ResidueProfile::new(x, q, table)?;
    Ok(parseval_gap(&profile.deltas(), &profile.residuals()?, q))
}

pub fn variance_theorem1(cfg: &ExperimentConfig, table: &DivisorTable) -> Result<ExperimentRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let (profile, deltas) = with_pool(cfg.parallelism, || -> Result<_> {
        let profile = ResidueProfile::new(cfg.x, cfg.q, table)?;
        let deltas = profile.deltas();
        Ok((profile, deltas))
    })??;
    let residuals = profile.residuals()?;
    let variance = pairwise_sum(&deltas.iter().map(|d| d.norm_sqr()).collect::<Vec<_>>());
    let theorem2_sum = pairwise_sum(&residuals.iter().map(|e| e.abs()).collect::<Vec<_>>());
    let (xf, qf) = (cfg.x as f64, cfg.q as f64);
    Ok(ExperimentRecord {
        x: cfg.x,
        q: cfg.q,
        y: cfg.y,
        variance,
        normalized_variance: variance / (xf.powf(1.5) * qf.powf(7.0 / 8.0)),
        theorem2_sum,
        normalized_t2: theorem2_sum / (xf.powf(0.75) * qf.powf(7.0 / 16.0)),
        parseval_gap: parseval_gap(&deltas, &residuals, cfg.q),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Recomputes `count` randomly chosen `Δ(a/q)` by a direct pass over
/// `(x, 2x]` and returns the largest relative discrepancy against the
/// class-sum route.
pub fn spot_check_deltas(cfg: &ExperimentConfig, table: &DivisorTable, count: usize) -> Result<f64> {
    cfg.validate()?;
    let profile = ResidueProfile::new(cfg.x, cfg.q, table)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let values = table.window(cfg.x, 2 * cfg.x)?;
    let mut worst = 0.0f64;
    for _ in 0..count {
        let a = rng.gen_range(1..=cfg.q);
        let terms: Vec<Complex64> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| unit_root(((cfg.x + 1 + i as u64) * a % cfg.q) as i64, cfg.q) * v as f64)
            .collect();
        let main = if a == cfg.q { profile.f1 } else { profile.fq };
        let direct = pairwise_sum(&terms) - main;
        let fast = profile.delta(a)?;
        worst = worst.max((direct - fast).norm() / direct.norm().max(1.0));
    }
    Ok(worst)
}

/// `|Σ_{x<n≤2x} d_4(n) − F_x(1)| / x`.
pub fn main_term_gap(x: u64, table: &DivisorTable) -> Result<f64> {
    let profile = ResidueProfile::new(x, 1, table)?;
    Ok((profile.total() as f64 - profile.f1).abs() / x as f64)
}

/// `M_x(q, a)` summed over `a`; equals `F_x(1)` up to rounding.
pub fn main_terms_total(x: u64, q: u64) -> Result<f64> {
    let terms = (1..=q).map(|a| main_term_m(x as f64, q, a)).collect::<Result<Vec<_>>>()?;
    Ok(pairwise_sum(&terms))
}

/// Relative gap between `Σ_{n≤N,(n,q)=1} d_4(n) c_q(n−m)` summed directly
/// and `(1/φ(q))(μ(q)c_q(m) f_{χ_0}(N) + q Σ_{χ≠χ_0} χ̄(m) f_χ(N))`.
pub fn character_decomposition_check(q: u64, n_max: u64, m: i64, table: &DivisorTable) -> Result<f64> {
    ensure(n_max <= table.limit(), || format!("N = {n_max} exceeds table limit {}", table.limit()))?;
    let group = build_character_group(q)?;
    let mut lhs: i128 = 0;
    for n in 1..=n_max {
        if n % q != 0 {
            lhs += table.get(n) as i128 * ramanujan_sum(q, n as i64 - m) as i128;
        }
    }
    let f = character_partial_sums(&group, n_max, table)?;
    let mut nonprincipal = Vec::with_capacity(f.len());
    let mut principal = Complex64::new(0.0, 0.0);
    for (chi, f_chi) in group.characters().zip(&f) {
        if chi.is_principal() {
            principal = *f_chi;
        } else {
            nonprincipal.push(chi.value(m).conj() * f_chi);
        }
    }
    let qf = q as f64;
    let rhs =
        ((mobius(q) * ramanujan_sum(q, m)) as f64 * principal + qf * pairwise_sum(&nonprincipal)) / euler_phi(q) as f64;
    let lhs = lhs as f64;
    Ok((rhs - lhs).norm() / lhs.abs().max(1.0))
}
