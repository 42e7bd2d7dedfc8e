//! Gauss–Legendre rules and the quadrature settings shared by every integral
//! against a parametric baseline.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use crate::measures::MeasureError;

/// Default node budget for parametric integrals.
pub const DEFAULT_NODES: usize = 512;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on the Legendre three-term recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
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
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature settings for integrals against parametric baselines.
///
/// Holds the total node budget and the family of rules (the budget, then
/// successive halvings) handed out to the panels between integrand
/// breakpoints. Cloning is cheap.
#[derive(Clone, Debug)]
pub struct QuadratureSpec {
    nodes: usize,
    rules: Arc<Vec<GaussLegendre>>,
}

impl QuadratureSpec {
    pub fn new(nodes: usize) -> Result<Self, MeasureError> {
        if nodes < 2 {
            return Err(MeasureError::InvalidQuadrature(nodes));
        }
        let mut rules = Vec::new();
        let mut n = nodes;
        loop {
            rules.push(GaussLegendre::new(n));
            if n <= 8 {
                break;
            }
            n /= 2;
        }
        Ok(Self {
            nodes,
            rules: Arc::new(rules),
        })
    }

    /// The shared default specification with [`DEFAULT_NODES`] nodes.
    pub fn standard() -> &'static QuadratureSpec {
        static STANDARD: OnceLock<QuadratureSpec> = OnceLock::new();
        STANDARD.get_or_init(|| QuadratureSpec::new(DEFAULT_NODES).expect("default node count is valid"))
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    /// Largest available rule with at most `share` nodes (or the smallest rule).
    pub(crate) fn rule_for(&self, share: f64) -> &GaussLegendre {
        self.rules
            .iter()
            .find(|r| r.len() as f64 <= share)
            .unwrap_or_else(|| self.rules.last().expect("at least one rule"))
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::standard().clone()
    }
}
