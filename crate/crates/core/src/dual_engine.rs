//! The dual functional `Φ(f) = inf_{λ >= 0} (∫ f^{λc} dμ0 + φ*(λ))`.
//!
//! `g(λ) = ∫ f^{λc} dμ0 + φ*(λ)` is convex and extended-valued. It is `+∞`
//! below a critical multiplier when `f` grows at the same rate as the cost,
//! and beyond the conjugate domain of the penalty.

use serde::Serialize;

use crate::ctransform::{CTransform, Transformed};
use crate::ext::ExtReal;
use crate::measures::Distribution;
use crate::penalties::Penalty;
use crate::quadrature::QuadratureSpec;
use crate::scalar::{minimize_halfline, Minimum};
use crate::transport_oracle::CostFn;

/// Default bracket width on `λ`.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DualResult {
    pub value: ExtReal,
    pub lambda_star: f64,
    pub evaluations: usize,
    pub bracket: (f64, f64),
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DualError {
    #[error("tolerance must be finite and > 0, got {0}")]
    BadTolerance(f64),
    #[error("the baseline integral of the transform is undefined at λ = {0}")]
    UndefinedIntegral(f64),
}

/// Minimizes a convex extended-valued function of the multiplier over the
/// conjugate domain of `penalty`.
///
/// With the linear penalty `φ* = 0` on `[0, 1]` and the transform part is
/// nonincreasing in `λ`, so the minimum sits at `λ = 1`.
pub(crate) fn minimize_multiplier<G: FnMut(f64) -> f64>(mut g: G, penalty: &Penalty, tol: f64) -> Minimum {
    match penalty {
        Penalty::Linear => {
            let value = g(1.0);
            Minimum {
                x: 1.0,
                value,
                evaluations: 1,
                bracket: (1.0, 1.0),
                converged: true,
            }
        }
        _ => minimize_halfline(g, 0.0, penalty.conjugate_domain_max(), tol),
    }
}

/// `g(λ)`; `f64::INFINITY` for `+∞`, NaN when the integral is undefined.
pub fn objective<F: CTransform + ?Sized>(
    f: &F,
    mu0: &Distribution,
    cost: &CostFn,
    penalty: &Penalty,
    lambda: f64,
    quad: &QuadratureSpec,
) -> f64 {
    let phi = penalty.phi_star_unchecked(lambda);
    if phi == f64::INFINITY {
        return f64::INFINITY;
    }
    let t = Transformed { f, cost: *cost, lambda };
    mu0.integrate(&t, quad) + phi
}

/// `Φ(f)` with the default quadrature.
pub fn robust_expectation<F: CTransform + ?Sized>(
    f: &F,
    mu0: &Distribution,
    cost: &CostFn,
    penalty: &Penalty,
    tol: f64,
) -> Result<DualResult, DualError> {
    robust_expectation_with(f, mu0, cost, penalty, tol, QuadratureSpec::standard())
}

pub fn robust_expectation_with<F: CTransform + ?Sized>(
    f: &F,
    mu0: &Distribution,
    cost: &CostFn,
    penalty: &Penalty,
    tol: f64,
    quad: &QuadratureSpec,
) -> Result<DualResult, DualError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(DualError::BadTolerance(tol));
    }
    let mut undefined = None;
    let m = minimize_multiplier(
        |lambda| {
            let v = objective(f, mu0, cost, penalty, lambda, quad);
            if v.is_nan() {
                undefined.get_or_insert(lambda);
                f64::INFINITY
            } else {
                v
            }
        },
        penalty,
        tol,
    );
    if let Some(lambda) = undefined {
        return Err(DualError::UndefinedIntegral(lambda));
    }
    Ok(DualResult {
        value: ExtReal::from_f64(m.value),
        lambda_star: m.x,
        evaluations: m.evaluations,
        bracket: m.bracket,
        converged: m.converged,
    })
}

/// `g(λ)` at each requested multiplier.
pub fn objective_profile<F: CTransform + ?Sized>(
    f: &F,
    mu0: &Distribution,
    cost: &CostFn,
    penalty: &Penalty,
    lambdas: &[f64],
) -> Vec<ExtReal> {
    lambdas
        .iter()
        .map(|&l| {
            let v = objective(f, mu0, cost, penalty, l, QuadratureSpec::standard());
            ExtReal::from_f64(if v.is_nan() { f64::INFINITY } else { v })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctransform::{DiscreteFn, LossFn, MaxAffine};
    use crate::func::RealFn;
    use crate::measures::DiscreteDistribution;
    use crate::transport_oracle::{primal_robust_value, OracleSpec};
    use proptest::prelude::*;

    fn c(p: f64) -> CostFn {
        CostFn::power(p).unwrap()
    }

    fn constant(m: f64) -> MaxAffine {
        MaxAffine::new(vec![(0.0, m)])
    }

    #[test]
    fn constants_are_fixed_points() {
        let mu = Distribution::normal(0.3, 2.0).unwrap();
        for pen in [
            Penalty::Ball { delta: 0.2 },
            Penalty::Linear,
            Penalty::Power { p: 2.0 },
            Penalty::Exponential,
        ] {
            let r = robust_expectation(&constant(3.0), &mu, &c(2.0), &pen, DEFAULT_TOL).unwrap();
            assert!((r.value.finite().unwrap() - 3.0).abs() < 1e-12, "{pen:?}");
        }
    }

    #[test]
    fn linear_penalty_pins_multiplier() {
        let mu = Distribution::normal(0.0, 1.0).unwrap();
        let l = LossFn::Avar { alpha: 0.25 };
        let r = robust_expectation(&l, &mu, &c(2.0), &Penalty::Linear, DEFAULT_TOL).unwrap();
        assert_eq!(r.lambda_star, 1.0);
        let direct = mu.integrate(
            &Transformed {
                f: &l,
                cost: c(2.0),
                lambda: 1.0,
            },
            QuadratureSpec::standard(),
        );
        assert_eq!(r.value.finite().unwrap(), direct);
    }

    #[test]
    fn matches_oracle_on_ten_atoms() {
        let xs: Vec<f64> = (0..10).map(|i| -1.0 + 0.2 * i as f64).collect();
        let ws = [0.05, 0.15, 0.1, 0.08, 0.12, 0.1, 0.1, 0.1, 0.1, 0.1];
        let mu0 = DiscreteDistribution::new(xs.iter().copied().zip(ws)).unwrap();
        let mut ys: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
        ys.extend_from_slice(&xs);
        let spec = OracleSpec::new(ys, 24).unwrap();
        let f: Vec<f64> = spec.candidate_support().iter().map(|y| y.clamp(0.0, 1.5)).collect();
        let pen = Penalty::Ball { delta: 0.05 };
        let primal = primal_robust_value(&mu0, &f, &c(1.0), &pen, &spec).unwrap();
        let df = DiscreteFn::new(spec.candidate_support().to_vec(), f);
        let dual = robust_expectation(&df, &mu0.into(), &c(1.0), &pen, 1e-10).unwrap();
        assert!(
            (dual.value.finite().unwrap() - primal).abs() < 1e-6,
            "{dual:?} vs {primal}"
        );
    }

    #[test]
    fn profile_examples() {
        let mu = Distribution::dirac(0.0);
        let v = objective_profile(
            &constant(3.0),
            &mu,
            &c(2.0),
            &Penalty::Ball { delta: 1.0 },
            &[0.0, 1.0, 2.0],
        );
        assert_eq!(
            v,
            vec![ExtReal::Finite(3.0), ExtReal::Finite(4.0), ExtReal::Finite(5.0)]
        );

        let lambdas: Vec<f64> = (0..10).map(|i| i as f64 * 0.999).collect();
        let v = objective_profile(
            &LossFn::Avar { alpha: 0.1 },
            &Distribution::normal(0.0, 1.0).unwrap(),
            &c(1.0),
            &Penalty::Ball { delta: 0.1 },
            &lambdas,
        );
        assert!(v.iter().all(|x| x.is_infinite()));
    }

    #[test]
    fn profile_is_convex_where_finite() {
        let lambdas: Vec<f64> = (1..60).map(|i| i as f64 * 0.25).collect();
        let v = objective_profile(
            &LossFn::Avar { alpha: 0.2 },
            &Distribution::normal(0.0, 1.0).unwrap(),
            &c(2.0),
            &Penalty::Ball { delta: 0.1 },
            &lambdas,
        );
        for w in v.windows(3) {
            let (a, b, cc) = (w[0].to_f64(), w[1].to_f64(), w[2].to_f64());
            assert!(a - 2.0 * b + cc >= -1e-10);
        }
    }

    #[test]
    fn everywhere_infinite_is_a_value() {
        // p = 1 AV@R at α = 0.1 needs λ >= 10, but φ* = ∞ beyond 1.
        let r = robust_expectation(
            &LossFn::Avar { alpha: 0.1 },
            &Distribution::normal(0.0, 1.0).unwrap(),
            &c(1.0),
            &Penalty::Linear,
            DEFAULT_TOL,
        )
        .unwrap();
        assert_eq!(r.value, ExtReal::PosInf);
        assert!(r.converged);
    }

    #[test]
    fn rejects_bad_tolerance() {
        let r = robust_expectation(
            &constant(1.0),
            &Distribution::dirac(0.0),
            &c(1.0),
            &Penalty::Linear,
            0.0,
        );
        assert_eq!(r, Err(DualError::BadTolerance(0.0)));
    }

    fn small_law() -> impl Strategy<Value = DiscreteDistribution> {
        prop::collection::vec((-20i32..=20, 1u32..10), 1..=8).prop_map(|v| {
            let total: u32 = v.iter().map(|a| a.1).sum();
            DiscreteDistribution::new(v.into_iter().map(|(x, w)| (x as f64 * 0.1, w as f64 / total as f64))).unwrap()
        })
    }

    fn pen_strategy() -> impl Strategy<Value = Penalty> {
        prop_oneof![
            (0.0f64..0.5).prop_map(|delta| Penalty::Ball { delta }),
            Just(Penalty::Linear),
            (1.5f64..3.0).prop_map(|p| Penalty::Power { p }),
            Just(Penalty::Exponential),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn cash_additivity(mu in small_law(), pen in pen_strategy(), m in -5.0f64..5.0, alpha in 0.05f64..0.9) {
            let shifted = LossFn::Tabulated(crate::func::PiecewiseLinear::new(vec![0.0, 1.0], vec![m, m + 1.0 / alpha]).unwrap());
            let base = LossFn::Tabulated(crate::func::PiecewiseLinear::new(vec![0.0, 1.0], vec![0.0, 1.0 / alpha]).unwrap());
            let mu: Distribution = mu.into();
            let a = robust_expectation(&base, &mu, &c(2.0), &pen, 1e-10).unwrap().value.to_f64();
            let b = robust_expectation(&shifted, &mu, &c(2.0), &pen, 1e-10).unwrap().value.to_f64();
            prop_assert!((b - a - m).abs() <= 1e-7 * a.abs().max(1.0), "{} {} {}", a, b, m);
        }

        #[test]
        fn dominates_baseline(mu in small_law(), pen in pen_strategy(), alpha in 0.05f64..0.9, p in prop::sample::select(vec![1.0, 2.0])) {
            let l = LossFn::Avar { alpha };
            let mu: Distribution = mu.into();
            let base = mu.integrate(&l, QuadratureSpec::standard());
            let r = robust_expectation(&l, &mu, &c(p), &pen, 1e-10).unwrap();
            prop_assert!(r.value.to_f64() >= base - 1e-8);
        }

        #[test]
        fn monotone_in_radius(mu in small_law(), d1 in 0.0f64..0.5, dd in 0.0f64..0.5, alpha in 0.05f64..0.9) {
            let l = LossFn::Avar { alpha };
            let mu: Distribution = mu.into();
            let a = robust_expectation(&l, &mu, &c(2.0), &Penalty::Ball { delta: d1 }, 1e-10).unwrap().value.to_f64();
            let b = robust_expectation(&l, &mu, &c(2.0), &Penalty::Ball { delta: d1 + dd }, 1e-10).unwrap().value.to_f64();
            prop_assert!(b >= a - 1e-8);
        }

        #[test]
        fn multiplier_is_attained(mu in small_law(), pen in pen_strategy(), alpha in 0.05f64..0.9) {
            let l = LossFn::Avar { alpha };
            let mu: Distribution = mu.into();
            let tol = 1e-8;
            let r = robust_expectation(&l, &mu, &c(2.0), &pen, tol).unwrap();
            let q = QuadratureSpec::standard();
            let g = |lam: f64| objective(&l, &mu, &c(2.0), &pen, lam, q);
            let v = r.value.to_f64();
            prop_assert!(v <= g(r.lambda_star) + 1e-12);
            prop_assert!(r.bracket.0 <= r.lambda_star && r.lambda_star <= r.bracket.1);
            let left = if r.lambda_star >= tol { g(r.lambda_star - tol) } else { f64::INFINITY };
            let right = g(r.lambda_star + tol);
            prop_assert!(v <= left.min(right) + 1e-9, "{} vs {} {}", v, left, right);
        }
    }

    #[test]
    fn discrete_fn_eval_on_support() {
        let f = DiscreteFn::new(vec![0.0, 1.0], vec![2.0, 5.0]);
        assert_eq!(f.eval(1.0), 5.0);
    }
}
