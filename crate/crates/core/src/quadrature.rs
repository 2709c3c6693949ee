//! Gauss–Legendre rules and the interval maps used for the wavevector and
//! frequency integrals.

use std::f64::consts::PI;

/// Nodes and weights of an n-point Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on P_n from the Chebyshev-like initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = (n + 1) / 2;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped affinely onto [a, b].
    pub fn on_interval(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }

    /// Rule for ∫₀^∞ through x = scale·t/(1−t), t ∈ [0, 1).
    pub fn semi_infinite(&self, scale: f64) -> Vec<(f64, f64)> {
        self.on_interval(0.0, 1.0)
            .into_iter()
            .map(|(t, w)| {
                let s = 1.0 - t;
                (scale * t / s, w * scale / (s * s))
            })
            .collect()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Composite rule on [a, b] with panels whose edges are graded geometrically
/// toward `a`: the first panel has width `first`, each further one doubles.
/// Degenerates to a single panel when `first >= b - a`.
pub fn graded_panels(rule: &GaussLegendre, a: f64, b: f64, first: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut lo = a;
    let mut width = first.max(0.0);
    if width <= 0.0 || width >= b - a {
        return rule.on_interval(a, b);
    }
    while lo < b {
        let hi = (lo + width).min(b);
        // absorb a short remainder into the last panel
        let hi = if b - hi < 0.5 * width { b } else { hi };
        out.extend(rule.on_interval(lo, hi));
        lo = hi;
        width *= 2.0;
    }
    out
}
