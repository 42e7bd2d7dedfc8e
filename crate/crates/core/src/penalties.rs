//! Penalization functions `φ` of the transport distance and their convex
//! conjugates `φ*(λ) = sup_{x >= 0} (λx − φ(x))`.

use serde::{Deserialize, Serialize};

use crate::ext::ExtReal;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Penalty {
    /// `φ = ∞·1_{(δ, ∞)}`: a hard ball of radius `δ`.
    Ball { delta: f64 },
    /// `φ(x) = x`.
    Linear,
    /// `φ(x) = x^p / p`, `p > 1`.
    Power { p: f64 },
    /// `φ(x) = e^x − 1`.
    Exponential,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum PenaltyError {
    #[error("`{field}` must be {requirement}, got {value}")]
    InvalidParameter {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("penalty argument must be nonnegative, got {0}")]
    NegativeArgument(f64),
}

impl Penalty {
    pub fn validate(&self) -> Result<(), PenaltyError> {
        match *self {
            Penalty::Ball { delta } if !(delta >= 0.0 && delta.is_finite()) => Err(PenaltyError::InvalidParameter {
                field: "delta",
                requirement: "finite and >= 0",
                value: delta,
            }),
            Penalty::Power { p } if !(p > 1.0 && p.is_finite()) => Err(PenaltyError::InvalidParameter {
                field: "p",
                requirement: "finite and > 1",
                value: p,
            }),
            _ => Ok(()),
        }
    }

    /// Short label used in reports and CSV output.
    pub fn label(&self) -> &'static str {
        match self {
            Penalty::Ball { .. } => "ball",
            Penalty::Linear => "linear",
            Penalty::Power { .. } => "power",
            Penalty::Exponential => "exponential",
        }
    }

    /// Conjugate exponent `q = p/(p − 1)` of a power penalty.
    pub fn conjugate_exponent(&self) -> Option<f64> {
        match *self {
            Penalty::Power { p } => Some(p / (p - 1.0)),
            _ => None,
        }
    }

    pub fn phi(&self, x: f64) -> Result<ExtReal, PenaltyError> {
        if x < 0.0 || x.is_nan() {
            return Err(PenaltyError::NegativeArgument(x));
        }
        Ok(ExtReal::from_f64(self.phi_unchecked(x)))
    }

    pub(crate) fn phi_unchecked(&self, x: f64) -> f64 {
        match *self {
            Penalty::Ball { delta } => {
                if x <= delta {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Penalty::Linear => x,
            Penalty::Power { p } => x.powf(p) / p,
            Penalty::Exponential => x.exp_m1(),
        }
    }

    pub fn phi_star(&self, lambda: f64) -> Result<ExtReal, PenaltyError> {
        if lambda < 0.0 || lambda.is_nan() {
            return Err(PenaltyError::NegativeArgument(lambda));
        }
        Ok(ExtReal::from_f64(self.phi_star_unchecked(lambda)))
    }

    /// `φ*(λ)` as an `f64` (`+∞` as `f64::INFINITY`), for `λ >= 0`.
    pub(crate) fn phi_star_unchecked(&self, lambda: f64) -> f64 {
        match *self {
            Penalty::Ball { delta } => delta * lambda,
            Penalty::Linear => {
                if lambda <= 1.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Penalty::Power { p } => {
                let q = p / (p - 1.0);
                lambda.powf(q) / q
            }
            // Conjugate over x >= 0: the unconstrained maximizer ln λ is
            // infeasible for λ < 1, where the sup sits at x = 0.
            Penalty::Exponential => {
                if lambda <= 1.0 {
                    0.0
                } else {
                    lambda * lambda.ln() - lambda + 1.0
                }
            }
        }
    }

    /// Right end of `{λ : φ*(λ) < ∞}`.
    pub fn conjugate_domain_max(&self) -> f64 {
        match self {
            Penalty::Linear => 1.0,
            _ => f64::INFINITY,
        }
    }

    /// `sup_x (λx − φ(x))` over `{0} ∪` a log-spaced grid of `grid` points in
    /// `[1e-9, 1e9]` (plus `δ` for the ball).
    pub fn phi_star_numeric(&self, lambda: f64, grid: usize) -> f64 {
        let (lo, hi) = (1e-9f64.ln(), 1e9f64.ln());
        let n = grid.max(2);
        let mut xs: Vec<f64> = (0..n)
            .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
            .collect();
        xs.push(0.0);
        if let Penalty::Ball { delta } = *self {
            xs.push(delta);
        }
        xs.into_iter()
            .map(|x| lambda * x - self.phi_unchecked(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
