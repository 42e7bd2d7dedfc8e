//! Classical and robust risk measures.
//!
//! `OCE(l) = inf_m (∫ l(x − m) dμ0 + m)` and the shortfall
//! `ES(l) = inf{m : ∫ l(x − m) dμ0 <= 0}`. Robust versions replace `∫ · dμ0`
//! by the dual functional of [`crate::dual_engine`]; since the cost depends on
//! `x − y` only, `l(· − m)^{λc} = l^{λc}(· − m)` and the allocation can be
//! optimized against the transformed loss.

use serde::Serialize;

use crate::ctransform::{CTransform, LossFn, TransformError, Transformed};
use crate::dual_engine::{minimize_multiplier, robust_expectation_with, DualError};
use crate::ext::ExtReal;
use crate::func::{Kinked, RealFn, Shifted};
use crate::measures::{Distribution, MeasureError};
use crate::penalties::{Penalty, PenaltyError};
use crate::quadrature::QuadratureSpec;
use crate::scalar::{bisect_threshold, bracket_threshold, minimize_line};
use crate::transport_oracle::CostFn;

/// Bracket width on the allocation `m`.
const M_TOL: f64 = 1e-10;
/// Bracket width on the multiplier `λ`.
const LAMBDA_TOL: f64 = 1e-9;
/// Tail mass left outside the initial shortfall bracket.
const ES_BRACKET_MASS: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RiskPath {
    /// Direct minimization under `μ0`, no ambiguity.
    Direct,
    ClosedForm,
    GenericDual,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RiskResult {
    pub value: ExtReal,
    pub m_star: Option<f64>,
    pub lambda_star: Option<f64>,
    pub path: RiskPath,
}

#[derive(Debug, thiserror::Error)]
pub enum RiskError {
    #[error("the OCE objective is unbounded below; the loss must dominate x − const")]
    Divergent,
    #[error("the OCE objective is undefined (NaN) at m = {0}")]
    Undefined(f64),
    #[error("the shortfall needs a loss with inf l < 0")]
    NonNegativeLoss,
    #[error("no closed form for the {penalty} penalty with cost exponent {exponent}{}", if *.capped { " and a capped cost" } else { "" })]
    UnsupportedCell {
        penalty: &'static str,
        exponent: f64,
        capped: bool,
    },
    #[error(transparent)]
    Loss(#[from] TransformError),
    #[error(transparent)]
    Penalty(#[from] PenaltyError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// Minimizes `m ↦ ∫ l(x − m) dμ0 + m`; returns `(m*, value)`.
fn oce_inner<F: RealFn + ?Sized>(l: &F, mu0: &Distribution, quad: &QuadratureSpec) -> Result<(f64, f64), RiskError> {
    let h = |m: f64| mu0.integrate(&Shifted { f: l, shift: m }, quad) + m;
    let (lo, hi) = mu0.central_range(1e-3);
    let x0 = 0.5 * (lo + hi);
    let h0 = h(x0);
    if h0.is_nan() {
        return Err(RiskError::Undefined(x0));
    }
    if h0 == f64::INFINITY {
        return Ok((x0, f64::INFINITY));
    }
    // Kinks of m ↦ l(x_i − m) for discrete laws, so piecewise-linear minima
    // come out exact.
    let candidates: Vec<f64> = match mu0.as_discrete() {
        Some(d) => {
            let bps = l.breakpoints();
            d.points().iter().flat_map(|x| bps.iter().map(move |b| x - b)).collect()
        }
        None => Vec::new(),
    };
    let step = ((hi - lo) / 4.0).max(1e-3);
    let r = minimize_line(h, x0, step, M_TOL, &candidates);
    if r.value.is_nan() {
        return Err(RiskError::Undefined(r.x));
    }
    if !r.converged || r.value == f64::NEG_INFINITY {
        return Err(RiskError::Divergent);
    }
    Ok((r.x, r.value))
}

/// `OCE(l)` under `μ0`.
pub fn classical_oce<F: RealFn + ?Sized>(l: &F, mu0: &Distribution) -> Result<RiskResult, RiskError> {
    let (m, v) = oce_inner(l, mu0, QuadratureSpec::standard())?;
    Ok(RiskResult {
        value: ExtReal::from_f64(v),
        m_star: Some(m),
        lambda_star: None,
        path: RiskPath::Direct,
    })
}

/// `AV@R_α(μ0)` as the OCE of `x⁺/α`.
pub fn classical_avar(alpha: f64, mu0: &Distribution) -> Result<RiskResult, RiskError> {
    let l = LossFn::Avar { alpha };
    l.validate()?;
    classical_oce(&l, mu0)
}

/// `V@R_α(μ0) = inf{m : μ0((m, ∞)) <= α}`.
pub fn classical_var(alpha: f64, mu0: &Distribution) -> Result<f64, RiskError> {
    LossFn::VarIndicator { alpha }.validate()?;
    Ok(mu0.upper_quantile(alpha)?)
}

/// Robust OCE: `inf_λ (OCE(l^{λc}) + φ*(λ))`.
pub fn robust_oce<F: CTransform + ?Sized>(
    l: &F,
    mu0: &Distribution,
    cost: &CostFn,
    penalty: &Penalty,
) -> Result<RiskResult, RiskError> {
    penalty.validate()?;
    let quad = QuadratureSpec::standard();
    let mut failure = None;
    let best = minimize_multiplier(
        |lambda| {
            let phi = penalty.phi_star_unchecked(lambda);
            if phi == f64::INFINITY {
                return f64::INFINITY;
            }
            let t = Transformed {
                f: l,
                cost: *cost,
                lambda,
            };
            match oce_inner(&t, mu0, quad) {
                Ok((_, v)) => v + phi,
                Err(e) => {
                    failure.get_or_insert(e);
                    f64::INFINITY
                }
            }
        },
        penalty,
        LAMBDA_TOL,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    if best.value == f64::INFINITY {
        return Ok(RiskResult {
            value: ExtReal::PosInf,
            m_star: None,
            lambda_star: None,
            path: RiskPath::GenericDual,
        });
    }
    let t = Transformed {
        f: l,
        cost: *cost,
        lambda: best.x,
    };
    let (m, _) = oce_inner(&t, mu0, quad)?;
    Ok(RiskResult {
        value: ExtReal::Finite(best.value),
        m_star: Some(m),
        lambda_star: Some(best.x),
        path: RiskPath::GenericDual,
    })
}

/// Robust AV@R from the additive premiums of the closed-form cells.
///
/// With cost `κ|x − y|^p` every premium is the unit-cost premium at level
/// `ακ`. The power/`p = 2` cell uses the minimizer of `λ^q/q + 1/(4λακ)`.
pub fn robust_avar_closed(
    alpha: f64,
    mu0: &Distribution,
    cost: &CostFn,
    penalty: &Penalty,
) -> Result<RiskResult, RiskError> {
    penalty.validate()?;
    let classical = classical_avar(alpha, mu0)?;
    let p = cost.exponent();
    let unsupported = || RiskError::UnsupportedCell {
        penalty: penalty.label(),
        exponent: p,
        capped: cost.cap().is_some(),
    };
    if cost.cap().is_some() || (p != 1.0 && p != 2.0) {
        return Err(unsupported());
    }
    let a = alpha * cost.scale();
    // (premium, λ*); λ* = None when the infimum is not attained.
    let (premium, lambda) = match (*penalty, p == 1.0) {
        (Penalty::Ball { delta }, true) => (delta / a, Some(1.0 / a)),
        (Penalty::Ball { delta }, false) => {
            let lam = if delta > 0.0 {
                Some(1.0 / (2.0 * (delta * a).sqrt()))
            } else {
                None
            };
            ((delta / a).sqrt(), lam)
        }
        (Penalty::Linear, true) => (f64::INFINITY, None),
        (Penalty::Linear, false) => (1.0 / (4.0 * a), Some(1.0)),
        (Penalty::Power { .. }, true) => {
            let q = penalty.conjugate_exponent().unwrap();
            ((1.0 / a).powf(q) / q, Some(1.0 / a))
        }
        (Penalty::Power { .. }, false) => {
            let q = penalty.conjugate_exponent().unwrap();
            let lam = (4.0 * a).powf(-1.0 / (q + 1.0));
            ((1.0 + q) / q * (4.0 * a).powf(-q / (q + 1.0)), Some(lam))
        }
        (Penalty::Exponential, _) => return Err(unsupported()),
    };
    if premium == f64::INFINITY {
        return Ok(RiskResult {
            value: ExtReal::PosInf,
            m_star: None,
            lambda_star: None,
            path: RiskPath::ClosedForm,
        });
    }
    // l^{λc} = l(· + s) with s = 1/(4λκα) for p = 2 and s = 0 for p = 1.
    let shift = match (lambda, p == 2.0) {
        (Some(lam), true) => 1.0 / (4.0 * lam * a),
        _ => 0.0,
    };
    Ok(RiskResult {
        value: classical.value + premium,
        m_star: classical.m_star.map(|m| m + shift),
        lambda_star: lambda,
        path: RiskPath::ClosedForm,
    })
}

/// Smallest `m` with `pred(m)`, for a predicate monotone in `m`, starting
/// from the central `1 − 2·ES_BRACKET_MASS` range of `μ0`.
fn smallest_feasible<P: FnMut(f64) -> bool>(mut pred: P, mu0: &Distribution) -> Option<f64> {
    let (lo, hi) = mu0.central_range(ES_BRACKET_MASS);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let (lo, hi) = bracket_threshold(&mut pred, lo, hi)?;
    let tol = M_TOL * (1.0 + lo.abs().max(hi.abs()));
    Some(bisect_threshold(pred, lo, hi, tol))
}

/// Robust shortfall `inf{m : Φ(l(· − m)) <= 0}`.
///
/// `m ↦ Φ(l(· − m))` is nonincreasing, so the level set is found by
/// bisection, each probe being a convex minimization in `λ`. This equals
/// `inf_λ ES(l^{λc} + φ*(λ))` and avoids assuming that the inner shortfall
/// is unimodal in `λ`.
pub fn robust_es(l: &LossFn, mu0: &Distribution, cost: &CostFn, penalty: &Penalty) -> Result<RiskResult, RiskError> {
    l.validate()?;
    penalty.validate()?;
    if !(l.infimum() < 0.0) {
        return Err(RiskError::NonNegativeLoss);
    }
    let quad = QuadratureSpec::standard();
    let mut failure = None;
    let dual_at = |m: f64| robust_expectation_with(&Shifted { f: l, shift: m }, mu0, cost, penalty, LAMBDA_TOL, quad);
    let found = smallest_feasible(
        |m| match dual_at(m) {
            Ok(r) => r.value.to_f64() <= 0.0,
            Err(e) => {
                failure.get_or_insert(e);
                false
            }
        },
        mu0,
    );
    if let Some(e) = failure {
        return Err(e.into());
    }
    let Some(m) = found else {
        log_infeasible("shortfall");
        return Ok(infeasible());
    };
    let r = dual_at(m)?;
    Ok(RiskResult {
        value: ExtReal::Finite(m),
        m_star: Some(m),
        lambda_star: Some(r.lambda_star),
        path: RiskPath::GenericDual,
    })
}

fn infeasible() -> RiskResult {
    RiskResult {
        value: ExtReal::PosInf,
        m_star: None,
        lambda_star: None,
        path: RiskPath::GenericDual,
    }
}

fn log_infeasible(what: &str) {
    log::warn!("{what}: no feasible allocation within the expanded bracket; reporting +inf");
}

/// `e(m, λ) = ∫_{(m − λ'^{-1/p}, m]} (1 − λ'|x − m|^p) μ0(dx)`, `λ' = λκ`.
pub fn var_excess(mu0: &Distribution, cost: &CostFn, m: f64, lambda: f64) -> f64 {
    let lam = lambda * cost.scale();
    let p = cost.exponent();
    if lam == 0.0 {
        return mu0.cdf(m);
    }
    let width = lam.powf(-1.0 / p);
    let g = |x: f64| {
        if x > m || x <= m - width {
            0.0
        } else {
            1.0 - lam * (m - x).powf(p)
        }
    };
    match mu0.as_discrete() {
        Some(d) => d.atoms().map(|(x, w)| w * g(x)).sum(),
        None => mu0.integrate(&Kinked::new(g, vec![m - width, m]), QuadratureSpec::standard()),
    }
}

/// Robust V@R: `inf{m : inf_λ (μ0((m, ∞)) + e(m, λ) + φ*(λ)) <= α}`.
///
/// The criterion is `∫ ψ_λ(m − x) μ0(dx) + φ*(λ)` with `ψ_λ` nonincreasing,
/// hence nonincreasing in `m`, and convex in `λ`.
pub fn robust_var(alpha: f64, mu0: &Distribution, cost: &CostFn, penalty: &Penalty) -> Result<RiskResult, RiskError> {
    LossFn::VarIndicator { alpha }.validate()?;
    penalty.validate()?;
    if cost.cap().is_some() {
        return Err(TransformError::CappedCost.into());
    }
    let inner = |m: f64| {
        let tail = mu0.upper_tail(m);
        minimize_multiplier(
            |lambda| {
                let phi = penalty.phi_star_unchecked(lambda);
                if phi == f64::INFINITY {
                    f64::INFINITY
                } else {
                    tail + var_excess(mu0, cost, m, lambda) + phi
                }
            },
            penalty,
            LAMBDA_TOL,
        )
    };
    let Some(m) = smallest_feasible(|m| inner(m).value <= alpha, mu0) else {
        log_infeasible("value-at-risk");
        return Ok(infeasible());
    };
    Ok(RiskResult {
        value: ExtReal::Finite(m),
        m_star: Some(m),
        lambda_star: Some(inner(m).x),
        path: RiskPath::GenericDual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::PiecewiseLinear;
    use crate::measures::{std_normal_pdf, std_normal_quantile, DiscreteDistribution};
    use proptest::prelude::*;

    fn c(p: f64) -> CostFn {
        CostFn::power(p).unwrap()
    }

    fn normal() -> Distribution {
        Distribution::normal(0.0, 1.0).unwrap()
    }

    fn fin(r: &RiskResult) -> f64 {
        r.value.finite().unwrap()
    }

    fn linear_loss() -> LossFn {
        LossFn::Tabulated(PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, 1.0]).unwrap())
    }

    /// Dense scan followed by two zooms.
    fn scan_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
        let mut best = (f64::INFINITY, lo);
        for _ in 0..4 {
            let n = 2000;
            let h = (hi - lo) / n as f64;
            for i in 0..=n {
                let x = lo + h * i as f64;
                let v = f(x);
                if v < best.0 {
                    best = (v, x);
                }
            }
            lo = best.1 - 2.0 * h;
            hi = best.1 + 2.0 * h;
        }
        best.0
    }

    #[test]
    fn dirac_avar_is_zero() {
        let r = classical_oce(&LossFn::Avar { alpha: 0.1 }, &Distribution::dirac(0.0)).unwrap();
        assert!(fin(&r).abs() < 1e-12);
        assert!(r.m_star.unwrap().abs() < 1e-9);
    }

    #[test]
    fn normal_avar_matches_analytic() {
        let alpha = 0.05;
        let r = classical_avar(alpha, &normal()).unwrap();
        let exact = std_normal_pdf(std_normal_quantile(1.0 - alpha)) / alpha;
        assert!((fin(&r) - exact).abs() < 1e-6, "{} vs {exact}", fin(&r));
        assert!((r.m_star.unwrap() - std_normal_quantile(1.0 - alpha)).abs() < 1e-4);
    }

    #[test]
    fn meanvar_matches_scan() {
        let mu = DiscreteDistribution::new([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let l = LossFn::MeanVar;
        let r = classical_oce(&l, &mu.clone().into()).unwrap();
        let oracle = scan_min(|m| 0.5 * l.eval(-1.0 - m) + 0.5 * l.eval(1.0 - m) + m, -5.0, 5.0);
        assert!((fin(&r) - oracle).abs() < 1e-8, "{} vs {oracle}", fin(&r));
    }

    #[test]
    fn bounded_loss_diverges() {
        let r = classical_oce(&LossFn::VarIndicator { alpha: 0.1 }, &normal());
        assert!(matches!(r, Err(RiskError::Divergent)));
    }

    #[test]
    fn ball_p1_premium() {
        for (alpha, delta) in [(0.05, 0.1), (0.25, 0.05)] {
            let classical = fin(&classical_avar(alpha, &normal()).unwrap());
            let r = robust_oce(&LossFn::Avar { alpha }, &normal(), &c(1.0), &Penalty::Ball { delta }).unwrap();
            assert!((fin(&r) - classical - delta / alpha).abs() < 1e-6);
        }
    }

    #[test]
    fn linear_p1_is_infinite() {
        let r = robust_oce(&LossFn::Avar { alpha: 0.1 }, &normal(), &c(1.0), &Penalty::Linear).unwrap();
        assert_eq!(r.value, ExtReal::PosInf);
        let r = robust_avar_closed(0.1, &normal(), &c(1.0), &Penalty::Linear).unwrap();
        assert_eq!(r.value, ExtReal::PosInf);
    }

    #[test]
    fn meanvar_linear_penalty() {
        let l = LossFn::MeanVar;
        let r = robust_oce(&l, &normal(), &c(2.0), &Penalty::Linear).unwrap();
        let doubled = classical_oce(&|x: f64| 2.0 * l.eval(x), &normal()).unwrap();
        assert!((fin(&r) - fin(&doubled) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn closed_form_examples() {
        let d = Distribution::dirac(0.0);
        let r = robust_avar_closed(0.05, &d, &c(1.0), &Penalty::Ball { delta: 0.1 }).unwrap();
        assert!((fin(&r) - 2.0).abs() < 1e-9);
        let r = robust_avar_closed(0.25, &d, &c(2.0), &Penalty::Linear).unwrap();
        assert!((fin(&r) - 1.0).abs() < 1e-9);
        assert!(robust_avar_closed(0.1, &d, &c(2.0), &Penalty::Exponential).is_err());
        assert!(robust_avar_closed(0.1, &d, &c(3.0), &Penalty::Linear).is_err());
    }

    #[test]
    fn closed_form_matches_generic() {
        let pens = [
            Penalty::Ball { delta: 0.05 },
            Penalty::Ball { delta: 0.0 },
            Penalty::Linear,
            Penalty::Power { p: 2.0 },
            Penalty::Power { p: 3.0 },
        ];
        for p in [1.0, 2.0] {
            for pen in pens {
                if p == 1.0 && pen == Penalty::Linear {
                    continue;
                }
                let closed = robust_avar_closed(0.1, &normal(), &c(p), &pen).unwrap();
                let generic = robust_oce(&LossFn::Avar { alpha: 0.1 }, &normal(), &c(p), &pen).unwrap();
                assert!(
                    (fin(&closed) - fin(&generic)).abs() < 1e-6,
                    "p={p} {pen:?}: {closed:?} vs {generic:?}"
                );
                if let (Some(a), Some(b)) = (closed.m_star, generic.m_star) {
                    assert!((a - b).abs() < 1e-3, "p={p} {pen:?}: m* {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn half_quadratic_cost_rescales_level() {
        let cost = CostFn::half_quadratic();
        let pen = Penalty::Ball { delta: 0.1 };
        let closed = robust_avar_closed(0.1, &normal(), &cost, &pen).unwrap();
        let generic = robust_oce(&LossFn::Avar { alpha: 0.1 }, &normal(), &cost, &pen).unwrap();
        assert!((fin(&closed) - fin(&generic)).abs() < 1e-6);
    }

    #[test]
    fn es_without_ambiguity_is_var() {
        let alpha = 0.1;
        let r = robust_es(
            &LossFn::VarIndicator { alpha },
            &normal(),
            &c(1.0),
            &Penalty::Ball { delta: 0.0 },
        )
        .unwrap();
        assert!((fin(&r) - classical_var(alpha, &normal()).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn es_of_identity_shifts_mean() {
        let mu = Distribution::normal(0.4, 1.5).unwrap();
        let r = robust_es(&linear_loss(), &mu, &c(1.0), &Penalty::Ball { delta: 0.3 }).unwrap();
        assert!((fin(&r) - 0.7).abs() < 1e-6, "{r:?}");
    }

    #[test]
    fn es_of_identity_against_oracle() {
        use crate::transport_oracle::{primal_robust_value, OracleSpec};
        let mu = DiscreteDistribution::new([(-0.5, 0.3), (0.0, 0.2), (1.0, 0.5)]).unwrap();
        let ys: Vec<f64> = (0..=60)
            .map(|i| -3.0 + 0.1 * i as f64)
            .chain([-0.5, 0.0, 1.0])
            .collect();
        let spec = OracleSpec::new(ys, 24).unwrap();
        let f: Vec<f64> = spec.candidate_support().to_vec();
        let primal = primal_robust_value(&mu, &f, &c(1.0), &Penalty::Ball { delta: 0.2 }, &spec).unwrap();
        let r = robust_es(&linear_loss(), &mu.into(), &c(1.0), &Penalty::Ball { delta: 0.2 }).unwrap();
        assert!((fin(&r) - primal).abs() < 1e-6, "{r:?} vs {primal}");
    }

    #[test]
    fn es_var_linear_penalty_matches_scan() {
        let alpha = 0.1;
        let mu = normal();
        let r = robust_es(&LossFn::VarIndicator { alpha }, &mu, &c(1.0), &Penalty::Linear).unwrap();
        // Criterion at λ = 1: μ0((m, ∞)) + ∫_{(m−1, m]} (1 − (m − x)) dμ0 <= α.
        let crit = |m: f64| {
            let g = Kinked::new(
                move |x: f64| if x > m - 1.0 && x <= m { 1.0 - (m - x) } else { 0.0 },
                vec![m - 1.0, m],
            );
            mu.upper_tail(m) + mu.integrate(&g, QuadratureSpec::standard())
        };
        let oracle = bisect_threshold(|m| crit(m) <= alpha, 0.0, 5.0, 1e-12);
        assert!((fin(&r) - oracle).abs() < 1e-6, "{} vs {oracle}", fin(&r));
    }

    #[test]
    fn var_on_dirac() {
        let r = robust_var(0.5, &Distribution::dirac(0.0), &c(1.0), &Penalty::Linear).unwrap();
        assert!((fin(&r) - 0.5).abs() < 1e-8, "{r:?}");
    }

    #[test]
    fn var_without_ambiguity() {
        let mu = Distribution::lognormal(0.0, 0.5).unwrap();
        let r = robust_var(0.05, &mu, &c(2.0), &Penalty::Ball { delta: 0.0 }).unwrap();
        assert!((fin(&r) - classical_var(0.05, &mu).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn var_matches_es_and_stays_below_avar() {
        for (pen, p) in [
            (Penalty::Ball { delta: 0.05 }, 1.0),
            (Penalty::Power { p: 2.0 }, 2.0),
            (Penalty::Linear, 2.0),
        ] {
            let alpha = 0.1;
            let v = robust_var(alpha, &normal(), &c(p), &pen).unwrap();
            let e = robust_es(&LossFn::VarIndicator { alpha }, &normal(), &c(p), &pen).unwrap();
            assert!((fin(&v) - fin(&e)).abs() < 1e-6, "{pen:?}: {v:?} vs {e:?}");
            let a = robust_oce(&LossFn::Avar { alpha }, &normal(), &c(p), &pen).unwrap();
            assert!(fin(&v) <= a.value.to_f64() + 1e-9);
        }
    }

    #[test]
    fn es_rejects_nonnegative_loss() {
        let r = robust_es(&LossFn::Avar { alpha: 0.1 }, &normal(), &c(1.0), &Penalty::Linear);
        assert!(matches!(r, Err(RiskError::NonNegativeLoss)));
    }

    #[test]
    fn ball_premium_vanishes_with_radius() {
        let classical = fin(&classical_avar(0.1, &normal()).unwrap());
        let mut prev = classical;
        for delta in [1e-6, 1e-3, 1e-2] {
            let r = fin(&robust_oce(
                &LossFn::Avar { alpha: 0.1 },
                &normal(),
                &c(1.0),
                &Penalty::Ball { delta },
            )
            .unwrap());
            assert!(r >= prev - 1e-9);
            prev = r;
            if delta == 1e-6 {
                assert!(r - classical <= 1e-3);
            }
        }
    }

    fn small_law() -> impl Strategy<Value = DiscreteDistribution> {
        prop::collection::vec((-30i32..=30, 1u32..10), 1..=8).prop_map(|v| {
            let total: u32 = v.iter().map(|a| a.1).sum();
            DiscreteDistribution::new(v.into_iter().map(|(x, w)| (x as f64 * 0.1, w as f64 / total as f64))).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn robust_dominates_classical(mu in small_law(), alpha in 0.05f64..0.5, delta in 0.0f64..0.3, p in prop::sample::select(vec![1.0, 2.0])) {
            let mu: Distribution = mu.into();
            let l = LossFn::Avar { alpha };
            let classical = fin(&classical_oce(&l, &mu).unwrap());
            let robust = robust_oce(&l, &mu, &c(p), &Penalty::Ball { delta }).unwrap();
            prop_assert!(robust.value.to_f64() >= classical - 1e-9);
            let closed = robust_avar_closed(alpha, &mu, &c(p), &Penalty::Ball { delta }).unwrap();
            prop_assert!((fin(&closed) - fin(&robust)).abs() < 1e-6, "{:?} vs {:?}", closed, robust);
        }

        #[test]
        fn allocation_is_optimal(mu in small_law(), alpha in 0.05f64..0.5) {
            let mu: Distribution = mu.into();
            let l = LossFn::Avar { alpha };
            let r = classical_oce(&l, &mu).unwrap();
            let m = r.m_star.unwrap();
            let h = |m: f64| mu.integrate(&Shifted { f: &l, shift: m }, QuadratureSpec::standard()) + m;
            let eps = 1e-5;
            // One-sided slopes bracket 0: ∫ l'₋ <= 1 <= ∫ l'₊.
            prop_assert!((h(m + eps) - h(m)) / eps >= -1e-7);
            prop_assert!((h(m) - h(m - eps)) / eps <= 1e-7);
        }

        #[test]
        fn var_criterion_is_monotone(mu in small_law(), lambda in 0.0f64..20.0, m1 in -3.0f64..3.0, dm in 0.0f64..1.0) {
            let mu: Distribution = mu.into();
            let crit = |m: f64| mu.upper_tail(m) + var_excess(&mu, &c(1.0), m, lambda);
            prop_assert!(crit(m1 + dm) <= crit(m1) + 1e-12);
        }
    }
}
