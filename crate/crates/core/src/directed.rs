//! Finite directed families of laws on the line.
//!
//! A family is directed when every pair has a member below both of them in
//! the CDF order. For a finite family this forces a single member `μ*` whose
//! CDF lies below all others; robust V@R and AV@R over the family are then
//! those of `μ*`.

use serde::Serialize;

use crate::ext::ExtReal;
use crate::measures::{Distribution, MeasureError};
use crate::quadrature::GaussLegendre;
use crate::risk::{classical_avar, RiskError};

/// Points of the validation grid.
pub const DIR_GRID_POINTS: usize = 2001;
/// Tail mass left outside the validation grid on each side.
pub const DIR_GRID_MASS: f64 = 1e-3;
/// Slack on CDF comparisons.
const CDF_SLACK: f64 = 1e-12;
/// Dyadic panels of the `(0, α]` quadrature; the rest below `α·2^{-60}` is
/// dropped.
const TAIL_PANELS: usize = 60;

#[derive(Debug, thiserror::Error)]
pub enum DirectedError {
    #[error("a family needs at least one member")]
    Empty,
    #[error("`{field}` must be {requirement}, got {value}")]
    InvalidParameter {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("family is not directed: no member lies below members {first} and {second} (witness t = {t})")]
    NotDirected { first: usize, second: usize, t: f64 },
    #[error("mixing weights must be positive and sum to 1 (candidate {0})")]
    BadMixing(usize),
    #[error("mixing levels must lie in (0, 1] (candidate {0})")]
    BadLevel(usize),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Risk(#[from] RiskError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct DirectedFamily {
    members: Vec<Distribution>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirReport {
    pub passed: bool,
    /// Pair without a common lower bound and the grid point where the best
    /// candidate fails by the largest margin.
    pub witness: Option<(usize, usize, f64)>,
}

impl DirectedFamily {
    pub fn new(members: Vec<Distribution>) -> Result<Self, DirectedError> {
        if members.is_empty() {
            return Err(DirectedError::Empty);
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[Distribution] {
        &self.members
    }

    /// Uniform grid over the union of member `[q(0.001), q(0.999)]` ranges.
    pub fn validation_grid(&self) -> Vec<f64> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for m in &self.members {
            let (a, b) = m.central_range(DIR_GRID_MASS);
            lo = lo.min(a);
            hi = hi.max(b);
        }
        if hi <= lo {
            return vec![lo];
        }
        let n = DIR_GRID_POINTS;
        (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
    }

    fn cdf_table(&self, grid: &[f64]) -> Vec<Vec<f64>> {
        self.members
            .iter()
            .map(|m| grid.iter().map(|&t| m.cdf(t)).collect())
            .collect()
    }

    /// Checks that every pair has a member whose CDF lies below both on the
    /// validation grid.
    pub fn check_dir(&self) -> DirReport {
        let grid = self.validation_grid();
        let cdfs = self.cdf_table(&grid);
        let n = self.members.len();
        for i in 0..n {
            for j in i + 1..n {
                // Largest excess of member k over min(F_i, F_j); k works if <= 0.
                let mut best: Option<(f64, usize)> = None;
                for fk in &cdfs {
                    let (mut worst, mut at) = (f64::NEG_INFINITY, 0);
                    for g in 0..grid.len() {
                        let excess = fk[g] - cdfs[i][g].min(cdfs[j][g]);
                        if excess > worst {
                            worst = excess;
                            at = g;
                        }
                    }
                    if best.is_none_or(|b| worst < b.0) {
                        best = Some((worst, at));
                    }
                }
                let (worst, at) = best.expect("nonempty family");
                if worst > CDF_SLACK {
                    return DirReport {
                        passed: false,
                        witness: Some((i, j, grid[at])),
                    };
                }
            }
        }
        DirReport {
            passed: true,
            witness: None,
        }
    }

    /// Index of the member whose CDF lies below every other member's.
    pub fn envelope_index(&self) -> Result<usize, DirectedError> {
        let report = self.check_dir();
        if let Some((first, second, t)) = report.witness {
            return Err(DirectedError::NotDirected { first, second, t });
        }
        let grid = self.validation_grid();
        let cdfs = self.cdf_table(&grid);
        let below_all = |k: usize| {
            cdfs.iter()
                .all(|other| cdfs[k].iter().zip(other).all(|(a, b)| *a <= b + CDF_SLACK))
        };
        Ok((0..self.members.len())
            .find(|&k| below_all(k))
            .expect("a finite directed family has a least element"))
    }
}

/// The law `μ*` with CDF `min_μ F_μ`.
pub fn lower_envelope(family: &DirectedFamily) -> Result<Distribution, DirectedError> {
    Ok(family.members[family.envelope_index()?].clone())
}

/// Robust `V@R_u` per level: `inf{m : μ*((m, ∞)) <= u}`.
pub fn robust_var_curve(family: &DirectedFamily, levels: &[f64]) -> Result<Vec<f64>, DirectedError> {
    let env = lower_envelope(family)?;
    levels.iter().map(|&u| Ok(env.upper_quantile(u)?)).collect()
}

/// Robust AV@R as the largest member AV@R.
pub fn robust_avar(family: &DirectedFamily, alpha: f64) -> Result<f64, DirectedError> {
    family.envelope_index()?;
    avar_sup(family, alpha)
}

fn avar_sup(family: &DirectedFamily, alpha: f64) -> Result<f64, DirectedError> {
    let mut best = f64::NEG_INFINITY;
    for m in &family.members {
        best = best.max(avar_at(alpha, m)?);
    }
    Ok(best)
}

/// `AV@R_u`, with `AV@R_1` the mean.
fn avar_at(u: f64, mu: &Distribution) -> Result<f64, DirectedError> {
    if u == 1.0 {
        return Ok(mu.mean());
    }
    Ok(classical_avar(u, mu)?.value.to_f64())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// `sup_μ AV@R_α(μ)` against `(1/α) ∫_0^α V@R_u(μ*) du`.
///
/// The integral runs over dyadic panels `(α 2^{-k-1}, α 2^{-k}]` with
/// `quad_nodes` Gauss–Legendre nodes each, which absorbs the growth of the
/// quantile at `u → 0`.
pub fn tail_identity_check(
    family: &DirectedFamily,
    alpha: f64,
    quad_nodes: usize,
) -> Result<TailIdentity, DirectedError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(DirectedError::InvalidParameter {
            field: "alpha",
            requirement: "in (0, 1)",
            value: alpha,
        });
    }
    let env = lower_envelope(family)?;
    let lhs = avar_sup(family, alpha)?;
    let gl = GaussLegendre::new(quad_nodes.max(2));
    let mut integral = 0.0;
    let mut hi = alpha;
    for _ in 0..TAIL_PANELS {
        let lo = 0.5 * hi;
        let mut err = None;
        integral += gl.integrate(lo, hi, |u| match env.upper_quantile(u) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        });
        if let Some(e) = err {
            return Err(e.into());
        }
        hi = lo;
    }
    let rhs = integral / alpha;
    Ok(TailIdentity {
        lhs,
        rhs,
        gap: lhs - rhs,
    })
}

/// A finitely supported mixing law on `(0, 1]` with its penalty.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingMeasure {
    /// `(u_i, w_i)`.
    pub atoms: Vec<(f64, f64)>,
    /// `β(ν)`; `+∞` excludes the candidate.
    pub beta: ExtReal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KusuokaValue {
    pub value: ExtReal,
    /// Winning candidate; `None` when every candidate is excluded.
    pub best: Option<usize>,
}

fn check_mixing(candidates: &[MixingMeasure]) -> Result<(), DirectedError> {
    for (c, nu) in candidates.iter().enumerate() {
        let total: f64 = nu.atoms.iter().map(|a| a.1).sum();
        if nu.atoms.is_empty() || nu.atoms.iter().any(|a| !(a.1 > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(DirectedError::BadMixing(c));
        }
        if nu.atoms.iter().any(|a| !(a.0 > 0.0 && a.0 <= 1.0)) {
            return Err(DirectedError::BadLevel(c));
        }
    }
    Ok(())
}

/// `max_ν (Σ_i w_i AV@R_{u_i}(μ*) − β(ν))` over the candidate menu.
pub fn kusuoka_value(family: &DirectedFamily, candidates: &[MixingMeasure]) -> Result<KusuokaValue, DirectedError> {
    check_mixing(candidates)?;
    let env = lower_envelope(family)?;
    let mut out = KusuokaValue {
        value: ExtReal::Finite(f64::NEG_INFINITY),
        best: None,
    };
    for (c, nu) in candidates.iter().enumerate() {
        let Some(beta) = nu.beta.finite() else {
            continue;
        };
        let mut v = -beta;
        for &(u, w) in &nu.atoms {
            v += w * avar_at(u, &env)?;
        }
        if out.best.is_none() || v > out.value.to_f64() {
            out = KusuokaValue {
                value: ExtReal::Finite(v),
                best: Some(c),
            };
        }
    }
    Ok(out)
}

/// Laws of `s0·exp((b − σ²/2)T + σ√T Z)` for `b` on a uniform grid of
/// `[b_low, b_high]`; a single member uses `b_high`, the drift that carries
/// the envelope.
pub fn lognormal_drift_family(
    s0: f64,
    sigma: f64,
    maturity: f64,
    b_low: f64,
    b_high: f64,
    n_members: usize,
) -> Result<DirectedFamily, DirectedError> {
    for (field, value) in [("s0", s0), ("sigma", sigma), ("maturity", maturity)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(DirectedError::InvalidParameter {
                field,
                requirement: "positive and finite",
                value,
            });
        }
    }
    if !(b_low <= b_high && b_low.is_finite() && b_high.is_finite()) {
        return Err(DirectedError::InvalidParameter {
            field: "b_low",
            requirement: "finite and <= b_high",
            value: b_low,
        });
    }
    if n_members == 0 {
        return Err(DirectedError::InvalidParameter {
            field: "n_members",
            requirement: ">= 1",
            value: 0.0,
        });
    }
    let drifts: Vec<f64> = if n_members == 1 {
        vec![b_high]
    } else {
        (0..n_members)
            .map(|i| b_low + (b_high - b_low) * i as f64 / (n_members - 1) as f64)
            .collect()
    };
    let v = sigma * maturity.sqrt();
    let members = drifts
        .into_iter()
        .map(|b| Distribution::lognormal(s0.ln() + (b - 0.5 * sigma * sigma) * maturity, v))
        .collect::<Result<Vec<_>, _>>()?;
    DirectedFamily::new(members)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::QuadratureSpec;
    use crate::risk::classical_var;
    use proptest::prelude::*;

    fn n(m: f64, s: f64) -> Distribution {
        Distribution::normal(m, s).unwrap()
    }

    fn drift3() -> DirectedFamily {
        lognormal_drift_family(1.0, 0.2, 1.0, 0.0, 0.1, 3).unwrap()
    }

    #[test]
    fn singleton_envelope() {
        let f = DirectedFamily::new(vec![n(0.0, 1.0)]).unwrap();
        assert_eq!(lower_envelope(&f).unwrap(), n(0.0, 1.0));
        let v = robust_var_curve(&f, &[0.05, 0.1]).unwrap();
        assert!((v[0] - classical_var(0.05, &n(0.0, 1.0)).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn shifted_normals() {
        let f = DirectedFamily::new(vec![n(0.0, 1.0), n(1.0, 1.0)]).unwrap();
        assert_eq!(lower_envelope(&f).unwrap(), n(1.0, 1.0));
        let levels = [0.01, 0.05, 0.2, 0.5];
        let v = robust_var_curve(&f, &levels).unwrap();
        for (u, x) in levels.iter().zip(&v) {
            assert!((x - classical_var(*u, &n(1.0, 1.0)).unwrap()).abs() < 1e-12);
        }
        for w in v.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn drift_family_envelope_is_top_drift() {
        let f = drift3();
        assert!(f.check_dir().passed);
        assert_eq!(f.envelope_index().unwrap(), 2);
        let single = lognormal_drift_family(1.0, 0.2, 1.0, 0.0, 0.1, 1).unwrap();
        assert_eq!(single.members()[0], f.members()[2]);
    }

    #[test]
    fn crossing_family_is_rejected() {
        let f = DirectedFamily::new(vec![n(0.0, 1.0), n(0.0, 2.0)]).unwrap();
        let r = f.check_dir();
        assert!(!r.passed);
        let (i, j, t) = r.witness.unwrap();
        assert_eq!((i, j), (0, 1));
        assert!(t.is_finite());
        assert!(matches!(
            tail_identity_check(&f, 0.05, 200),
            Err(DirectedError::NotDirected { .. })
        ));
    }

    #[test]
    fn tail_identity_gaps() {
        let single = DirectedFamily::new(vec![n(0.0, 1.0)]).unwrap();
        let r = tail_identity_check(&single, 0.05, 200).unwrap();
        assert!(r.gap.abs() <= 1e-5, "{r:?}");
        for alpha in [0.01, 0.05, 0.1, 0.25] {
            let r = tail_identity_check(&drift3(), alpha, 200).unwrap();
            assert!(r.gap.abs() <= 1e-4, "{alpha}: {r:?}");
        }
    }

    #[test]
    fn kusuoka_examples() {
        let f = drift3();
        let dirac = MixingMeasure {
            atoms: vec![(0.05, 1.0)],
            beta: ExtReal::ZERO,
        };
        let v = kusuoka_value(&f, std::slice::from_ref(&dirac)).unwrap();
        assert!((v.value.to_f64() - robust_avar(&f, 0.05).unwrap()).abs() < 1e-12);

        let second = MixingMeasure {
            atoms: vec![(0.1, 0.5), (1.0, 0.5)],
            beta: ExtReal::ZERO,
        };
        let excluded = MixingMeasure {
            beta: ExtReal::PosInf,
            ..dirac.clone()
        };
        let v = kusuoka_value(&f, &[excluded, second.clone()]).unwrap();
        assert_eq!(v.best, Some(1));

        let menu = [
            dirac,
            MixingMeasure {
                atoms: vec![(0.05, 0.3), (0.1, 0.7)],
                beta: ExtReal::Finite(0.01),
            },
        ];
        let v = kusuoka_value(&f, &menu).unwrap().value.to_f64();
        let oracle = f
            .members()
            .iter()
            .flat_map(|m| {
                menu.iter().map(move |nu| {
                    nu.atoms.iter().map(|&(u, w)| w * avar_at(u, m).unwrap()).sum::<f64>() - nu.beta.to_f64()
                })
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((v - oracle).abs() < 1e-5);
    }

    #[test]
    fn bad_mixing_rejected() {
        let nu = MixingMeasure {
            atoms: vec![(0.1, 0.4)],
            beta: ExtReal::ZERO,
        };
        assert!(matches!(
            kusuoka_value(&drift3(), &[nu]),
            Err(DirectedError::BadMixing(0))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn drift_families_are_directed(lo in -0.2f64..0.2, width in 0.0f64..0.3, k in 1usize..6, sigma in 0.05f64..0.6) {
            let f = lognormal_drift_family(1.0, sigma, 1.0, lo, lo + width, k).unwrap();
            prop_assert!(f.check_dir().passed);
            let env = lower_envelope(&f).unwrap();
            for t in f.validation_grid().iter().step_by(50) {
                for m in f.members() {
                    prop_assert!(env.cdf(*t) <= m.cdf(*t) + 1e-12);
                }
            }
        }

        #[test]
        fn sup_of_integrals(shifts in prop::collection::vec(-1.0f64..1.0, 1..5), b in 0.5f64..3.0) {
            let f = DirectedFamily::new(shifts.iter().map(|&s| n(s, 1.0)).collect()).unwrap();
            let env = lower_envelope(&f).unwrap();
            let clip = crate::func::Kinked::new(move |x: f64| x.clamp(-b, b), vec![-b, b]);
            let q = QuadratureSpec::standard();
            let sup = f.members().iter().map(|m| m.integrate(&clip, q)).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!((sup - env.integrate(&clip, q)).abs() < 1e-10);
        }
    }
}
