//! Robust European option prices for one asset at zero rate.
//!
//! The hedge `a(S − s)` has zero price under every spot-consistent model, so
//! the robust price is `inf_a inf_λ (∫ h_a^{λc} dμ0 + φ*(λ))` with
//! `h_a(y) = h(y) + a(y − s)`. The map `(a, λ) ↦ h_a^{λc}(x)` is a supremum of
//! affine functions, so both searches are convex.

use std::path::Path;

use serde::Serialize;

use crate::ctransform::{CTransform, Domain, GridTransform, LossFn, MaxAffine, GENERIC_COARSE_NODES};
use crate::dual_engine::minimize_multiplier;
use crate::ext::ExtReal;
use crate::func::{Kinked, PiecewiseLinear, RealFn};
use crate::measures::{std_normal_cdf, Distribution, MeasureError};
use crate::penalties::{Penalty, PenaltyError};
use crate::quadrature::QuadratureSpec;
use crate::scalar::{minimize_line, Minimum};
use crate::table::{format_sig, write_csv_file, SIG_DIGITS};
use crate::transport_oracle::CostFn;

const A_TOL: f64 = 1e-9;
const LAMBDA_TOL: f64 = 1e-9;
/// Tolerance of the spot-consistency check `∫ S dμ0 = s`.
pub const MARTINGALE_TOL: f64 = 1e-8;

pub const CURVE_HEADER: [&str; 4] = ["strike", "classical", "robust", "spread"];

#[derive(Debug, thiserror::Error)]
pub enum PricingError {
    #[error("`{field}` must be positive and finite, got {value}")]
    InvalidMarket { field: &'static str, value: f64 },
    #[error("pricing needs a cost exponent p > 1, got {0}")]
    SublinearCost(f64),
    #[error("baseline mean {mean} differs from spot {spot}")]
    NotMartingale { mean: f64, spot: f64 },
    #[error("the transformed payoff is not integrable under the baseline")]
    NotIntegrable,
    #[error("strikes must be positive and sorted")]
    BadStrikes,
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MarketSpec {
    pub spot: f64,
    pub sigma: f64,
    pub maturity: f64,
}

impl MarketSpec {
    pub fn new(spot: f64, sigma: f64, maturity: f64) -> Result<Self, PricingError> {
        for (field, value) in [("spot", spot), ("sigma", sigma), ("maturity", maturity)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(PricingError::InvalidMarket { field, value });
            }
        }
        Ok(Self { spot, sigma, maturity })
    }

    fn total_vol(&self) -> f64 {
        self.sigma * self.maturity.sqrt()
    }

    /// Lognormal law with mean `spot`.
    pub fn baseline(&self) -> Distribution {
        let v = self.total_vol();
        Distribution::lognormal(self.spot.ln() - 0.5 * v * v, v).expect("validated market")
    }

    /// `|∫ S dμ0 − s|` by quadrature; errors beyond [`MARTINGALE_TOL`].
    pub fn check_martingale(&self) -> Result<(), PricingError> {
        let mean = self.baseline().integrate(&|x: f64| x, QuadratureSpec::standard());
        if (mean - self.spot).abs() > MARTINGALE_TOL * self.spot.max(1.0) {
            return Err(PricingError::NotMartingale { mean, spot: self.spot });
        }
        Ok(())
    }
}

/// Zero-rate Black–Scholes call; `s − k` for `k <= 0`.
pub fn black_scholes_call(k: f64, market: &MarketSpec) -> f64 {
    let s = market.spot;
    if k <= 0.0 {
        return s - k;
    }
    let v = market.total_vol();
    let d1 = ((s / k).ln() + 0.5 * v * v) / v;
    s * std_normal_cdf(d1) - k * std_normal_cdf(d1 - v)
}

pub fn black_scholes_put(k: f64, market: &MarketSpec) -> f64 {
    black_scholes_call(k, market) - market.spot + k
}

#[derive(Clone, Debug, PartialEq)]
pub enum PayoffSpec {
    Call {
        strike: f64,
    },
    Put {
        strike: f64,
    },
    /// Linear interpolation, extended linearly.
    Tabulated(PiecewiseLinear),
}

impl PayoffSpec {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            PayoffSpec::Call { strike } => (y - strike).max(0.0),
            PayoffSpec::Put { strike } => (strike - y).max(0.0),
            PayoffSpec::Tabulated(t) => t.eval(y),
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self {
            PayoffSpec::Call { strike } | PayoffSpec::Put { strike } => vec![*strike],
            PayoffSpec::Tabulated(t) => t.points().to_vec(),
        }
    }

    /// `h(y) + a(y − s)` in a form with an exact transform.
    pub fn hedged(&self, a: f64, spot: f64) -> HedgedPayoff {
        let b = -a * spot;
        match self {
            PayoffSpec::Call { strike } => HedgedPayoff::Affine(MaxAffine::new(vec![(a, b), (1.0 + a, b - strike)])),
            PayoffSpec::Put { strike } => HedgedPayoff::Affine(MaxAffine::new(vec![(a, b), (a - 1.0, b + strike)])),
            PayoffSpec::Tabulated(t) => HedgedPayoff::Table(LossFn::Tabulated(t.add_linear(a, b))),
        }
    }
}

/// A hedged payoff with its exact transform.
#[derive(Clone, Debug, PartialEq)]
pub enum HedgedPayoff {
    Affine(MaxAffine),
    Table(LossFn),
}

impl RealFn for HedgedPayoff {
    fn eval(&self, x: f64) -> f64 {
        match self {
            HedgedPayoff::Affine(f) => f.eval(x),
            HedgedPayoff::Table(f) => f.eval(x),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            HedgedPayoff::Affine(f) => f.breakpoints(),
            HedgedPayoff::Table(f) => f.breakpoints(),
        }
    }
}

impl CTransform for HedgedPayoff {
    fn transform_at(&self, cost: &CostFn, lambda: f64, x: f64) -> f64 {
        match self {
            HedgedPayoff::Affine(f) => f.transform_at(cost, lambda, x),
            HedgedPayoff::Table(f) => f.transform_at(cost, lambda, x),
        }
    }

    fn transform_breakpoints(&self, cost: &CostFn, lambda: f64) -> Vec<f64> {
        match self {
            HedgedPayoff::Affine(f) => f.transform_breakpoints(cost, lambda),
            HedgedPayoff::Table(f) => f.transform_breakpoints(cost, lambda),
        }
    }
}

/// How `h_a^{λc}` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PricingMode {
    /// Exact max-affine or piecewise-linear transform.
    Closed,
    /// Grid search on `[x − radius, x + radius]`; `+∞` at `λ = 0`.
    Generic { radius: f64, nodes: usize },
}

impl PricingMode {
    pub fn generic(radius: f64) -> Self {
        PricingMode::Generic {
            radius,
            nodes: GENERIC_COARSE_NODES,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PriceResult {
    pub value: ExtReal,
    pub lambda_star: Option<f64>,
    pub a_star: Option<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

/// `∫ h dμ0`.
pub fn classical_price(payoff: &PayoffSpec, market: &MarketSpec) -> f64 {
    let h = Kinked::new(|y: f64| payoff.eval(y), payoff.kinks());
    market.baseline().integrate(&h, QuadratureSpec::standard())
}

/// Outer convex search over the hedge ratio of an inner value `v(a)`.
fn minimize_hedge<V: FnMut(f64) -> Minimum>(mut inner: V) -> (Minimum, Minimum, usize) {
    let mut evaluations = 0;
    let outer = minimize_line(
        |a| {
            let m = inner(a);
            evaluations += m.evaluations;
            m.value
        },
        0.0,
        0.5,
        A_TOL,
        &[],
    );
    let at = inner(outer.x);
    evaluations += at.evaluations;
    (outer, at, evaluations)
}

fn result(outer: Minimum, at: Minimum, evaluations: usize) -> PriceResult {
    if outer.value == f64::INFINITY {
        return PriceResult {
            value: ExtReal::PosInf,
            lambda_star: None,
            a_star: None,
            evaluations,
            converged: true,
        };
    }
    PriceResult {
        value: ExtReal::from_f64(outer.value),
        lambda_star: Some(at.x),
        a_star: Some(outer.x),
        evaluations,
        converged: outer.converged && at.converged,
    }
}

/// Robust price `inf_a inf_λ (∫ h_a^{λc} dμ0 + φ*(λ))`.
pub fn robust_price(
    payoff: &PayoffSpec,
    market: &MarketSpec,
    cost: &CostFn,
    penalty: &Penalty,
    mode: PricingMode,
) -> Result<PriceResult, PricingError> {
    penalty.validate()?;
    if cost.exponent() <= 1.0 {
        return Err(PricingError::SublinearCost(cost.exponent()));
    }
    market.check_martingale()?;
    let mu0 = market.baseline();
    let quad = QuadratureSpec::standard();
    let mut nan = false;
    let (outer, at, evaluations) = minimize_hedge(|a| {
        let h = payoff.hedged(a, market.spot);
        minimize_multiplier(
            |lambda| {
                let phi = penalty.phi_star_unchecked(lambda);
                if phi == f64::INFINITY {
                    return f64::INFINITY;
                }
                let v = match mode {
                    PricingMode::Closed => crate::dual_engine::objective(&h, &mu0, cost, penalty, lambda, quad),
                    PricingMode::Generic { .. } if lambda == 0.0 => f64::INFINITY,
                    PricingMode::Generic { radius, nodes } => {
                        let g = GridTransform {
                            f: &h,
                            domain: Domain::Around(radius),
                            nodes,
                        };
                        crate::dual_engine::objective(&g, &mu0, cost, penalty, lambda, quad)
                    }
                };
                if v.is_nan() {
                    nan = true;
                    f64::INFINITY
                } else {
                    v
                }
            },
            penalty,
            LAMBDA_TOL,
        )
    });
    if nan {
        return Err(PricingError::NotIntegrable);
    }
    Ok(result(outer, at, evaluations))
}

/// Robust call for `c = (x − y)²/2` from the Black–Scholes formula:
/// `inf_a inf_λ (CALL(k − (2a+1)/(2λ)) + a²/(2λ) + φ*(λ))`.
pub fn robust_call_closed(k: f64, market: &MarketSpec, penalty: &Penalty) -> Result<PriceResult, PricingError> {
    penalty.validate()?;
    let (outer, at, evaluations) = minimize_hedge(|a| {
        minimize_multiplier(
            |lambda| {
                let phi = penalty.phi_star_unchecked(lambda);
                if lambda == 0.0 || phi == f64::INFINITY {
                    return f64::INFINITY;
                }
                black_scholes_call(k - (2.0 * a + 1.0) / (2.0 * lambda), market) + a * a / (2.0 * lambda) + phi
            },
            penalty,
            LAMBDA_TOL,
        )
    });
    Ok(result(outer, at, evaluations))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurveRow {
    pub strike: f64,
    pub classical: f64,
    pub robust: ExtReal,
    pub spread: ExtReal,
}

impl CurveRow {
    pub fn to_record(&self) -> Vec<String> {
        vec![
            format_sig(self.strike, SIG_DIGITS),
            format_sig(self.classical, SIG_DIGITS),
            format_sig(self.robust.to_f64(), SIG_DIGITS),
            format_sig(self.spread.to_f64(), SIG_DIGITS),
        ]
    }
}

/// Classical and robust call prices across `strikes` (closed mode).
pub fn price_curve(
    strikes: &[f64],
    market: &MarketSpec,
    cost: &CostFn,
    penalty: &Penalty,
) -> Result<Vec<CurveRow>, PricingError> {
    if strikes.iter().any(|k| !(*k > 0.0 && k.is_finite())) || strikes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PricingError::BadStrikes);
    }
    strikes
        .iter()
        .map(|&k| {
            let payoff = PayoffSpec::Call { strike: k };
            let classical = classical_price(&payoff, market);
            let robust = robust_price(&payoff, market, cost, penalty, PricingMode::Closed)?.value;
            Ok(CurveRow {
                strike: k,
                classical,
                robust,
                spread: robust + (-classical),
            })
        })
        .collect()
}

pub fn write_curve(rows: &[CurveRow], path: &Path) -> Result<(), PricingError> {
    let records: Vec<Vec<String>> = rows.iter().map(CurveRow::to_record).collect();
    write_csv_file(path, &CURVE_HEADER, &records)?;
    Ok(())
}
