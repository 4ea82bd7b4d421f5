//! Gauss–Legendre rules on `[-1, 1]`, built once by Newton iteration.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::ops::{Add, Mul};
use std::sync::OnceLock;

#[derive(Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    fn build(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_a^b f` with this rule on a single panel.
    pub fn integrate<T, F>(&self, a: f64, b: f64, mut f: F) -> T
    where
        T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
        F: FnMut(f64) -> T,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = T::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc = acc + f(mid + half * x) * w;
        }
        acc * half
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

macro_rules! cached_rule {
    ($name:ident, $n:expr) => {
        pub fn $name() -> &'static GaussRule {
            static RULE: OnceLock<GaussRule> = OnceLock::new();
            RULE.get_or_init(|| GaussRule::build($n))
        }
    };
}

cached_rule!(gl8, 8);
cached_rule!(gl16, 16);
cached_rule!(gl32, 32);

/// A rule of arbitrary order, not cached.
pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    GaussRule::build(n)
}

/// Result of an adaptive panel integration.
#[derive(Clone, Copy, Debug, Default)]
pub struct PanelSum {
    pub value: Complex64,
    /// Sum of `|GL16 − GL8|` over accepted sub-panels.
    pub error: f64,
    /// `∫|f|` estimate, used for rounding floors.
    pub magnitude: f64,
    pub evaluations: usize,
}

impl Add for PanelSum {
    type Output = PanelSum;
    fn add(self, o: PanelSum) -> PanelSum {
        PanelSum {
            value: self.value + o.value,
            error: self.error + o.error,
            magnitude: self.magnitude + o.magnitude,
            evaluations: self.evaluations + o.evaluations,
        }
    }
}

/// Integrate `f` along the segment `s(u) = start + dir·u`, `u ∈ [a, b]`,
/// returning `∫ f(s) ds`. Panels are bisected until GL16 and GL8 agree to
/// `abs_tol` (scaled by panel length) or to `1e-14` relative.
pub fn adaptive_segment<F>(
    f: &F,
    start: Complex64,
    dir: Complex64,
    a: f64,
    b: f64,
    abs_tol: f64,
    depth: u32,
) -> PanelSum
where
    F: Fn(Complex64) -> Complex64,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut g16 = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for (&x, &w) in gl16().nodes.iter().zip(&gl16().weights) {
        let v = f(start + dir * (mid + half * x));
        g16 += v * w;
        mag += v.norm() * w;
    }
    let mut g8 = Complex64::new(0.0, 0.0);
    for (&x, &w) in gl8().nodes.iter().zip(&gl8().weights) {
        g8 += f(start + dir * (mid + half * x)) * w;
    }
    let scale = dir * half;
    let (g16, g8) = (g16 * scale, g8 * scale);
    let diff = (g16 - g8).norm();
    let mag = mag * scale.norm();
    if depth == 0 || diff <= abs_tol * (b - a) || diff <= 1e-14 * mag {
        return PanelSum { value: g16, error: diff, magnitude: mag, evaluations: 24 };
    }
    adaptive_segment(f, start, dir, a, mid, abs_tol, depth - 1)
        + adaptive_segment(f, start, dir, mid, b, abs_tol, depth - 1)
}
