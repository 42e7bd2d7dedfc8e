//! Robust OCE on a finite outcome space with a polytope of priors.
//!
//! Primal: `inf_m (sup_{P ∈ 𝒫} E_P[l(X − m)] + m)`; the inner sup is linear in
//! `P` and sits at a vertex. Dual: `sup_Q (E_Q[X] − inf_{P ∈ 𝒫} E_P[l*(dQ/dP)])`,
//! searched on a barycentric lattice of `Q`.

use serde::Serialize;

use crate::ext::ExtReal;
use crate::lp::{LinearProgram, Relation};
use crate::scalar::golden_section;

pub const MAX_OUTCOMES: usize = 6;
/// Largest space the dual lattice accepts.
pub const MAX_GRID_OUTCOMES: usize = 4;
/// Gap above which the dual lattice is flagged as too coarse.
pub const GAP_TOL: f64 = 2e-4;
/// Lattice shrink factor of each refinement pass.
const REFINE_FACTOR: usize = 10;
const REFINE_PASSES: usize = 2;
const GOLDEN_TOL: f64 = 1e-10;
const SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FiniteError {
    #[error("the space needs between 2 and {MAX_OUTCOMES} outcomes, got {0}")]
    BadSize(usize),
    #[error("outcome {0} is not finite")]
    NonFiniteOutcome(usize),
    #[error("a prior set needs at least one vertex")]
    NoVertices,
    #[error("vertex {index} has length {got}, expected {expected}")]
    VertexLength { index: usize, expected: usize, got: usize },
    #[error("vertex {0} is not a probability vector")]
    NotProbability(usize),
    #[error("`alpha` must be {requirement}, got {value}")]
    BadAlpha { requirement: &'static str, value: f64 },
    #[error("the dual lattice supports at most {MAX_GRID_OUTCOMES} outcomes, got {0}")]
    GridTooLarge(usize),
    #[error("lattice resolution must be >= 1")]
    BadResolution,
    #[error("probability vectors differ in length")]
    LengthMismatch,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteSpace {
    x: Vec<f64>,
}

impl FiniteSpace {
    pub fn new(x: Vec<f64>) -> Result<Self, FiniteError> {
        if x.len() < 2 || x.len() > MAX_OUTCOMES {
            return Err(FiniteError::BadSize(x.len()));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(FiniteError::NonFiniteOutcome(i));
        }
        Ok(Self { x })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PriorSet {
    vertices: Vec<Vec<f64>>,
}

impl PriorSet {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self, FiniteError> {
        let Some(first) = vertices.first() else {
            return Err(FiniteError::NoVertices);
        };
        let n = first.len();
        for (index, v) in vertices.iter().enumerate() {
            if v.len() != n {
                return Err(FiniteError::VertexLength {
                    index,
                    expected: n,
                    got: v.len(),
                });
            }
            let sum: f64 = v.iter().sum();
            if v.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > SUM_TOL {
                return Err(FiniteError::NotProbability(index));
            }
        }
        Ok(Self { vertices })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            vertices: vec![vec![1.0 / n as f64; n]],
        }
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    fn check_against(&self, space: &FiniteSpace) -> Result<(), FiniteError> {
        let n = space.n();
        match self.vertices.iter().position(|v| v.len() != n) {
            Some(index) => Err(FiniteError::VertexLength {
                index,
                expected: n,
                got: self.vertices[index].len(),
            }),
            None => Ok(()),
        }
    }
}

/// Convex, increasing losses, bounded below, with `l(0) = 0` and `l*(1) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CibLoss {
    /// `(e^{αx} − 1)/α`.
    Entropic { alpha: f64 },
    /// `(((1 + x)⁺)² − 1)/2`.
    MeanVar,
    /// `x⁺/α`.
    AvarL { alpha: f64 },
}

impl CibLoss {
    pub fn validate(&self) -> Result<(), FiniteError> {
        match *self {
            CibLoss::Entropic { alpha } if !(alpha > 0.0 && alpha.is_finite()) => Err(FiniteError::BadAlpha {
                requirement: "finite and > 0",
                value: alpha,
            }),
            CibLoss::AvarL { alpha } if !(alpha > 0.0 && alpha < 1.0) => Err(FiniteError::BadAlpha {
                requirement: "in (0, 1)",
                value: alpha,
            }),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CibLoss::Entropic { .. } => "entropic",
            CibLoss::MeanVar => "meanvar",
            CibLoss::AvarL { .. } => "avar",
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            CibLoss::Entropic { alpha } => (alpha * x).exp_m1() / alpha,
            CibLoss::MeanVar => {
                let u = (1.0 + x).max(0.0);
                0.5 * (u * u - 1.0)
            }
            CibLoss::AvarL { alpha } => x.max(0.0) / alpha,
        }
    }

    /// `l*(y)` for `y >= 0`.
    pub fn conjugate(&self, y: f64) -> f64 {
        match *self {
            CibLoss::Entropic { alpha } => {
                if y == 0.0 {
                    1.0 / alpha
                } else {
                    (y * y.ln() - y + 1.0) / alpha
                }
            }
            CibLoss::MeanVar => 0.5 * (y - 1.0) * (y - 1.0),
            CibLoss::AvarL { alpha } => {
                if y <= 1.0 / alpha {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

/// `Σ_i p_i l*(q_i/p_i)`, with `0·l*(0/0) = 0` and `+∞` when `q_i > 0 = p_i`.
pub fn divergence(loss: &CibLoss, q: &[f64], p: &[f64]) -> Result<ExtReal, FiniteError> {
    if q.len() != p.len() {
        return Err(FiniteError::LengthMismatch);
    }
    Ok(ExtReal::from_f64(divergence_unchecked(loss, q, p)))
}

fn divergence_unchecked(loss: &CibLoss, q: &[f64], p: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&qi, &pi) in q.iter().zip(p) {
        if pi <= 0.0 {
            if qi > 0.0 {
                return f64::INFINITY;
            }
            continue;
        }
        total += pi * loss.conjugate(qi / pi);
    }
    total
}

fn expectation(p: &[f64], x: &[f64]) -> f64 {
    p.iter().zip(x).map(|(a, b)| a * b).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PrimalRoce {
    pub value: f64,
    pub m_star: f64,
}

/// `inf_m (max_v E_v[l(X − m)] + m)`; the minimizer lies in `[min X, max X]`.
pub fn primal_roce(space: &FiniteSpace, priors: &PriorSet, loss: &CibLoss) -> Result<PrimalRoce, FiniteError> {
    loss.validate()?;
    priors.check_against(space)?;
    let x = space.values();
    let h = |m: f64| {
        priors
            .vertices()
            .iter()
            .map(|v| v.iter().zip(x).map(|(p, xi)| p * loss.eval(xi - m)).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
            + m
    };
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best = golden_section(h, lo, hi, GOLDEN_TOL * (1.0 + lo.abs().max(hi.abs())));
    // Kinks of the AV@R loss sit at the outcomes.
    for &m in x {
        let v = h(m);
        if v < best.value {
            best.value = v;
            best.x = m;
        }
    }
    Ok(PrimalRoce {
        value: best.value,
        m_star: best.x,
    })
}

/// `inf_{P ∈ conv(vertices)} D(q, P)`.
fn inner_inf(loss: &CibLoss, q: &[f64], priors: &PriorSet) -> f64 {
    let vs = priors.vertices();
    if vs.len() == 1 {
        return divergence_unchecked(loss, q, &vs[0]);
    }
    if let CibLoss::AvarL { alpha } = *loss {
        return if density_cap_feasible(alpha, q, vs) {
            0.0
        } else {
            f64::INFINITY
        };
    }
    let n = q.len();
    let mut p = vec![0.0; n];
    let mut weights = vec![0.0; vs.len()];
    simplex_min(
        &mut |t: &[f64]| {
            for (i, pi) in p.iter_mut().enumerate() {
                *pi = t.iter().zip(vs).map(|(tk, v)| tk * v[i]).sum();
            }
            divergence_unchecked(loss, q, &p)
        },
        &mut weights,
        0,
        1.0,
    )
}

/// Nested golden section over the weights `t ∈ Δ_K`; each level fixes one
/// weight, the last takes the remaining mass. The objective is jointly convex,
/// so every partial minimum is convex in the outer weights.
fn simplex_min(f: &mut dyn FnMut(&[f64]) -> f64, t: &mut [f64], level: usize, remaining: f64) -> f64 {
    let k = t.len();
    if level == k - 1 {
        t[level] = remaining;
        return f(t);
    }
    let mut inner = |s: f64| {
        t[level] = s;
        simplex_min(f, t, level + 1, (remaining - s).max(0.0))
    };
    golden_section(&mut inner, 0.0, remaining, GOLDEN_TOL).value
}

/// Whether some `P ∈ conv(vertices)` has `q <= P/α` componentwise.
fn density_cap_feasible(alpha: f64, q: &[f64], vertices: &[Vec<f64>]) -> bool {
    let k = vertices.len();
    let mut lp = LinearProgram::maximize(vec![0.0; k]);
    lp.add_constraint(vec![1.0; k], Relation::Eq, 1.0);
    for (i, &qi) in q.iter().enumerate() {
        let row: Vec<f64> = vertices.iter().map(|v| v[i]).collect();
        lp.add_constraint(row, Relation::Ge, alpha * qi);
    }
    lp.solve().is_ok()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualRoce {
    pub dual: f64,
    pub q_star: Vec<f64>,
    pub primal: f64,
    /// `primal − dual`.
    pub gap: f64,
    pub resolution: usize,
    /// Set when the gap exceeds [`GAP_TOL`].
    pub coarse: bool,
}

/// Lattice points `k/res` of the simplex in `n` coordinates.
fn lattice(n: usize, res: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n - 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(n, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, res, &mut Vec::with_capacity(n), &mut out);
    out
}

/// `sup_Q (E_Q[X] − inf_P D(Q, P))` on a lattice of `resolution` subdivisions
/// per edge, refined twice around the incumbent by a factor 10.
pub fn dual_roce(
    space: &FiniteSpace,
    priors: &PriorSet,
    loss: &CibLoss,
    resolution: usize,
) -> Result<DualRoce, FiniteError> {
    loss.validate()?;
    priors.check_against(space)?;
    let n = space.n();
    if n > MAX_GRID_OUTCOMES {
        return Err(FiniteError::GridTooLarge(n));
    }
    if resolution == 0 {
        return Err(FiniteError::BadResolution);
    }
    let x = space.values();
    let mut best = (f64::NEG_INFINITY, vec![1.0 / n as f64; n]);
    // D >= 0, so E_Q[X] bounds the objective and prunes most of the lattice.
    let consider = |q: &[f64], best: &mut (f64, Vec<f64>)| {
        let eq = expectation(q, x);
        if eq <= best.0 {
            return;
        }
        let v = eq - inner_inf(loss, q, priors);
        if v > best.0 {
            *best = (v, q.to_vec());
        }
    };
    let h = 1.0 / resolution as f64;
    for k in lattice(n, resolution) {
        let q: Vec<f64> = k.iter().map(|&ki| ki as f64 * h).collect();
        consider(&q, &mut best);
    }
    // Refinement: offsets of ±1 coarse step in the first n − 1 coordinates.
    let mut step = h;
    for _ in 0..REFINE_PASSES {
        step /= REFINE_FACTOR as f64;
        let center = best.1.clone();
        let span = REFINE_FACTOR as i64;
        let width = (2 * span + 1) as usize;
        let count = width.pow((n - 1) as u32);
        let mut q = vec![0.0; n];
        for idx in 0..count {
            let mut rem = idx;
            let mut ok = true;
            let mut sum = 0.0;
            for (i, qi) in q.iter_mut().enumerate().take(n - 1) {
                let off = (rem % width) as i64 - span;
                rem /= width;
                *qi = center[i] + off as f64 * step;
                if *qi < 0.0 {
                    ok = false;
                }
                sum += *qi;
            }
            q[n - 1] = 1.0 - sum;
            if ok && q[n - 1] >= 0.0 {
                consider(&q, &mut best);
            }
        }
    }
    let primal = primal_roce(space, priors, loss)?.value;
    let gap = primal - best.0;
    Ok(DualRoce {
        dual: best.0,
        q_star: best.1,
        primal,
        gap,
        resolution,
        coarse: gap > GAP_TOL,
    })
}
