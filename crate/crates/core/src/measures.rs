//! Baseline laws: discrete atoms or parametric (normal, log-normal) families,
//! with integration, CDF, quantiles, discretization and sample ingestion.
//!
//! Parametric integrals use the quantile transform `u = Φ(z)`: the integral
//! `∫ f dμ` becomes `∫ f(T(z)) φ(z) dz` over the normal score `z`, where `T` is
//! the (affine or exponential) quantile map of the family. Working in the
//! score rather than in `u` itself removes the endpoint singularities of the
//! quantile function; the score range `[-10, 10]` is split at the mapped
//! breakpoints of `f` and each smooth panel gets a Gauss–Legendre rule.

use std::fs;
use std::path::{Path, PathBuf};

use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::ext::ExtReal;
use crate::func::RealFn;
use crate::quadrature::QuadratureSpec;

/// Half-width of the normal-score window used for parametric integrals.
/// `Φ(-10) ≈ 7.6e-24`.
pub const SCORE_RANGE: f64 = 10.0;

/// Atoms closer than this are merged.
pub const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, thiserror::Error)]
pub enum MeasureError {
    #[error("a discrete distribution needs at least one atom")]
    Empty,
    #[error("atom {index} has a non-finite location {point}")]
    NonFinitePoint { index: usize, point: f64 },
    #[error("atom {index} has weight {weight}; weights must be positive and finite")]
    BadWeight { index: usize, weight: f64 },
    #[error("weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("parameter `{name}` must be {requirement}, got {value}")]
    InvalidParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("quadrature needs at least 2 nodes, got {0}")]
    InvalidQuadrature(usize),
    #[error("probability level {0} is outside (0, 1)")]
    LevelOutOfRange(f64),
    #[error("discretization needs at least 2 atoms, got {0}")]
    TooFewAtoms(usize),
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: line {line}: cannot parse {text:?} as a real number")]
    Parse { path: PathBuf, line: usize, text: String },
    #[error("{0}: sample file holds no observations")]
    EmptySample(PathBuf),
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// `Φ(z)` through `erfc`, accurate to a few ulp in both tails.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    std_normal().pdf(z)
}

pub fn std_normal_quantile(u: f64) -> f64 {
    std_normal().inverse_cdf(u)
}

/// Finitely supported law with strictly increasing atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    points: Vec<f64>,
    weights: Vec<f64>,
    /// `cum[i] = Σ_{j ≤ i} w_j`, last entry exactly 1.
    cum: Vec<f64>,
    /// `tail[i] = Σ_{j ≥ i} w_j`, with a trailing 0.
    tail: Vec<f64>,
}

impl DiscreteDistribution {
    /// Sorts, merges atoms closer than [`MERGE_TOL`] and renormalizes.
    ///
    /// Weights must be positive and sum to one within `1e-9`.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self, MeasureError> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(MeasureError::Empty);
        }
        for (index, &(point, weight)) in atoms.iter().enumerate() {
            if !point.is_finite() {
                return Err(MeasureError::NonFinitePoint { index, point });
            }
            if !(weight > 0.0 && weight.is_finite()) {
                return Err(MeasureError::BadWeight { index, weight });
            }
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(MeasureError::WeightSum(total));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut points: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut weights: Vec<f64> = Vec::with_capacity(atoms.len());
        for (x, w) in atoms {
            match points.last() {
                Some(&last) if x - last < MERGE_TOL => *weights.last_mut().unwrap() += w,
                _ => {
                    points.push(x);
                    weights.push(w);
                }
            }
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self::from_sorted(points, weights))
    }

    fn from_sorted(points: Vec<f64>, weights: Vec<f64>) -> Self {
        let mut cum = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cum.push(acc);
        }
        *cum.last_mut().unwrap() = 1.0;
        let mut tail = vec![0.0; weights.len() + 1];
        for i in (0..weights.len()).rev() {
            tail[i] = tail[i + 1] + weights[i];
        }
        Self {
            points,
            weights,
            cum,
            tail,
        }
    }

    pub fn dirac(x: f64) -> Self {
        assert!(x.is_finite(), "Dirac location must be finite");
        Self::from_sorted(vec![x], vec![1.0])
    }

    /// Empirical measure: weight `1/N` per observation, duplicates merged.
    pub fn from_samples(samples: &[f64]) -> Result<Self, MeasureError> {
        let w = 1.0 / samples.len() as f64;
        Self::new(samples.iter().map(|&x| (x, w)))
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        self.atoms().map(|(x, w)| x * w).sum()
    }

    pub fn min(&self) -> f64 {
        self.points[0]
    }

    pub fn max(&self) -> f64 {
        *self.points.last().unwrap()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|&x| x <= t);
        if k == 0 {
            0.0
        } else {
            self.cum[k - 1]
        }
    }

    /// `μ((t, ∞))`, summed from the right.
    pub fn upper_tail(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|&x| x <= t);
        self.tail[k]
    }

    fn quantile_unchecked(&self, u: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c < u);
        self.points[k.min(self.points.len() - 1)]
    }

    fn upper_quantile_unchecked(&self, u: f64) -> f64 {
        // Smallest atom x_i with μ((x_i, ∞)) = tail[i + 1] <= u.
        let n = self.points.len();
        let k = (0..n).find(|&i| self.tail[i + 1] <= u).unwrap_or(n - 1);
        self.points[k]
    }
}

/// Parametric family of a baseline law.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Normal { mean: f64, std: f64 },
    LogNormal { log_mean: f64, log_std: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParametricDistribution {
    family: Family,
}

fn check_scale(name: &'static str, value: f64) -> Result<(), MeasureError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(MeasureError::InvalidParameter {
            name,
            requirement: "positive and finite",
            value,
        })
    }
}

fn check_finite(name: &'static str, value: f64) -> Result<(), MeasureError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(MeasureError::InvalidParameter {
            name,
            requirement: "finite",
            value,
        })
    }
}

impl ParametricDistribution {
    pub fn normal(mean: f64, std: f64) -> Result<Self, MeasureError> {
        check_finite("mean", mean)?;
        check_scale("std", std)?;
        Ok(Self {
            family: Family::Normal { mean, std },
        })
    }

    pub fn lognormal(log_mean: f64, log_std: f64) -> Result<Self, MeasureError> {
        check_finite("log_mean", log_mean)?;
        check_scale("log_std", log_std)?;
        Ok(Self {
            family: Family::LogNormal { log_mean, log_std },
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Quantile map from the normal score.
    pub fn from_score(&self, z: f64) -> f64 {
        match self.family {
            Family::Normal { mean, std } => mean + std * z,
            Family::LogNormal { log_mean, log_std } => (log_mean + log_std * z).exp(),
        }
    }

    /// Inverse of [`Self::from_score`]; `None` outside the support.
    pub fn to_score(&self, x: f64) -> Option<f64> {
        match self.family {
            Family::Normal { mean, std } => Some((x - mean) / std),
            Family::LogNormal { log_mean, log_std } => (x > 0.0).then(|| (x.ln() - log_mean) / log_std),
        }
    }

    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Normal { mean, .. } => mean,
            Family::LogNormal { log_mean, log_std } => (log_mean + 0.5 * log_std * log_std).exp(),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self.to_score(t) {
            Some(z) => std_normal_cdf(z),
            None => 0.0,
        }
    }

    pub fn upper_tail(&self, t: f64) -> f64 {
        match self.to_score(t) {
            Some(z) => std_normal_cdf(-z),
            None => 1.0,
        }
    }

    fn integrate<F: RealFn + ?Sized>(&self, f: &F, quad: &QuadratureSpec) -> f64 {
        let mut cuts: Vec<f64> = f
            .breakpoints()
            .into_iter()
            .filter_map(|b| self.to_score(b))
            .filter(|z| z.abs() < SCORE_RANGE)
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

        let mut edges = Vec::with_capacity(cuts.len() + 2);
        edges.push(-SCORE_RANGE);
        edges.extend(cuts);
        edges.push(SCORE_RANGE);

        let budget = quad.nodes() as f64;
        let mut total = 0.0;
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let rule = quad.rule_for(budget * (b - a) / (2.0 * SCORE_RANGE));
            for (z, w) in rule.mapped(a, b) {
                let v = f.eval(self.from_score(z));
                if v == f64::INFINITY {
                    return f64::INFINITY;
                }
                total += w * std_normal_pdf(z) * v;
            }
        }
        total
    }

    /// Atoms for an `n`-point approximation.
    pub fn discretize(&self, n: usize, scheme: DiscretizationScheme) -> Result<DiscreteDistribution, MeasureError> {
        if n < 2 {
            return Err(MeasureError::TooFewAtoms(n));
        }
        let nf = n as f64;
        match scheme {
            DiscretizationScheme::EqualProbability => {
                let w = 1.0 / nf;
                DiscreteDistribution::new(
                    (0..n).map(|i| (self.from_score(std_normal_quantile((i as f64 + 0.5) / nf)), w)),
                )
            }
            DiscretizationScheme::Grid => {
                let lo = self.from_score(std_normal_quantile(0.5 / nf));
                let hi = self.from_score(std_normal_quantile(1.0 - 0.5 / nf));
                let step = (hi - lo) / (nf - 1.0);
                let points: Vec<f64> = (0..n).map(|i| lo + step * i as f64).collect();
                let mut atoms = Vec::with_capacity(n);
                let mut below = 0.0;
                for i in 0..n {
                    let upper = if i + 1 == n {
                        1.0
                    } else {
                        self.cdf(0.5 * (points[i] + points[i + 1]))
                    };
                    atoms.push((points[i], upper - below));
                    below = upper;
                }
                atoms.retain(|a| a.1 > 0.0);
                DiscreteDistribution::new(atoms)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiscretizationScheme {
    /// Atoms at the quantiles `(i - 1/2)/n`, weight `1/n` each.
    EqualProbability,
    /// Equally spaced atoms between the `1/(2n)` and `1 - 1/(2n)` quantiles,
    /// each carrying the mass of its Voronoi cell.
    Grid,
}

/// A baseline law `μ0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Distribution {
    Discrete(DiscreteDistribution),
    Parametric(ParametricDistribution),
}

impl From<DiscreteDistribution> for Distribution {
    fn from(d: DiscreteDistribution) -> Self {
        Distribution::Discrete(d)
    }
}

impl From<ParametricDistribution> for Distribution {
    fn from(d: ParametricDistribution) -> Self {
        Distribution::Parametric(d)
    }
}

impl Distribution {
    pub fn normal(mean: f64, std: f64) -> Result<Self, MeasureError> {
        ParametricDistribution::normal(mean, std).map(Into::into)
    }

    pub fn lognormal(log_mean: f64, log_std: f64) -> Result<Self, MeasureError> {
        ParametricDistribution::lognormal(log_mean, log_std).map(Into::into)
    }

    pub fn dirac(x: f64) -> Self {
        DiscreteDistribution::dirac(x).into()
    }

    pub fn as_discrete(&self) -> Option<&DiscreteDistribution> {
        match self {
            Distribution::Discrete(d) => Some(d),
            Distribution::Parametric(_) => None,
        }
    }

    /// `∫ f dμ`. Exact weighted sum for discrete laws; panelled Gauss–Legendre
    /// in the normal score otherwise. `+∞` as soon as `f` is `+∞` at a
    /// node carrying positive weight.
    pub fn expect<F: RealFn + ?Sized>(&self, f: &F, quad: &QuadratureSpec) -> ExtReal {
        ExtReal::from_f64(self.integrate(f, quad))
    }

    /// [`Self::expect`] with `+∞` reported as `f64::INFINITY`.
    pub fn integrate<F: RealFn + ?Sized>(&self, f: &F, quad: &QuadratureSpec) -> f64 {
        match self {
            Distribution::Discrete(d) => {
                let mut total = 0.0;
                for (x, w) in d.atoms() {
                    let v = f.eval(x);
                    if v == f64::INFINITY {
                        return f64::INFINITY;
                    }
                    total += w * v;
                }
                total
            }
            Distribution::Parametric(p) => p.integrate(f, quad),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Discrete(d) => d.mean(),
            Distribution::Parametric(p) => p.mean(),
        }
    }

    /// `F(t) = μ((-∞, t])`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Distribution::Discrete(d) => d.cdf(t),
            Distribution::Parametric(p) => p.cdf(t),
        }
    }

    /// `μ((t, ∞))`.
    pub fn upper_tail(&self, t: f64) -> f64 {
        match self {
            Distribution::Discrete(d) => d.upper_tail(t),
            Distribution::Parametric(p) => p.upper_tail(t),
        }
    }

    /// Left-continuous inverse `inf{x : F(x) >= u}`.
    pub fn quantile(&self, u: f64) -> Result<f64, MeasureError> {
        check_level(u)?;
        Ok(match self {
            Distribution::Discrete(d) => d.quantile_unchecked(u),
            Distribution::Parametric(p) => p.from_score(std_normal_quantile(u)),
        })
    }

    /// Value-at-risk form `inf{m : μ((m, ∞)) <= u}` (upper-tail mass `u`).
    pub fn upper_quantile(&self, u: f64) -> Result<f64, MeasureError> {
        check_level(u)?;
        Ok(match self {
            Distribution::Discrete(d) => d.upper_quantile_unchecked(u),
            Distribution::Parametric(p) => p.from_score(-std_normal_quantile(u)),
        })
    }

    /// Interval covering all but `2·eps` of the mass (the full hull for
    /// discrete laws).
    pub fn central_range(&self, eps: f64) -> (f64, f64) {
        match self {
            Distribution::Discrete(d) => (d.min(), d.max()),
            Distribution::Parametric(p) => (
                p.from_score(std_normal_quantile(eps)),
                p.from_score(-std_normal_quantile(eps)),
            ),
        }
    }
}

fn check_level(u: f64) -> Result<(), MeasureError> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(MeasureError::LevelOutOfRange(u))
    }
}

/// Reads one real per line (LF or CRLF, blank lines ignored) into an
/// empirical measure.
pub fn load_samples(path: impl AsRef<Path>) -> Result<DiscreteDistribution, MeasureError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| MeasureError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(x) if x.is_finite() => samples.push(x),
            _ => {
                return Err(MeasureError::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    text: line.to_string(),
                })
            }
        }
    }
    if samples.is_empty() {
        return Err(MeasureError::EmptySample(path.to_path_buf()));
    }
    DiscreteDistribution::from_samples(&samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::func::Kinked;
    use std::io::Write;

    fn quad() -> &'static QuadratureSpec {
        QuadratureSpec::standard()
    }

    #[test]
    fn dirac_expectation() {
        let d = Distribution::dirac(0.0);
        assert_eq!(d.expect(&|x: f64| x + 3.0, quad()), ExtReal::Finite(3.0));
    }

    #[test]
    fn normal_second_moment() {
        let q = QuadratureSpec::new(256).unwrap();
        let d = Distribution::normal(0.0, 1.0).unwrap();
        let v = d.expect(&|x: f64| x * x, &q).finite().unwrap();
        assert!((v - 1.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn two_atom_positive_part() {
        let d: Distribution = DiscreteDistribution::new([(0.0, 0.5), (2.0, 0.5)]).unwrap().into();
        assert_eq!(d.expect(&|x: f64| x.max(0.0), quad()), ExtReal::Finite(1.0));
    }

    #[test]
    fn infinite_integrand_propagates() {
        let d = Distribution::normal(0.0, 1.0).unwrap();
        let v = d.expect(&|x: f64| if x > 3.0 { f64::INFINITY } else { 0.0 }, quad());
        assert_eq!(v, ExtReal::PosInf);
    }

    #[test]
    fn kinked_normal_integral_is_accurate() {
        // E (X - 1)^+ for X ~ N(0,1) is φ(1) - (1 - Φ(1)).
        let d = Distribution::normal(0.0, 1.0).unwrap();
        let f = Kinked::new(|x: f64| (x - 1.0).max(0.0), vec![1.0]);
        let v = d.integrate(&f, quad());
        let exact = std_normal_pdf(1.0) - std_normal_cdf(-1.0);
        assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
    }

    #[test]
    fn lognormal_mean() {
        let d = Distribution::lognormal(-0.02, 0.2).unwrap();
        let v = d.integrate(&|x: f64| x, quad());
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cdf_examples() {
        let d = Distribution::dirac(0.0);
        assert_eq!(d.cdf(-0.1), 0.0);
        assert_eq!(d.cdf(0.0), 1.0);
        let n = Distribution::normal(0.0, 1.0).unwrap();
        assert!((n.cdf(0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(Distribution::dirac(5.0).quantile(0.3).unwrap(), 5.0);
        let n = Distribution::normal(0.0, 1.0).unwrap();
        assert!(n.quantile(0.5).unwrap().abs() < 1e-12);
        let d: Distribution = DiscreteDistribution::new([(1.0, 0.5), (3.0, 0.5)]).unwrap().into();
        assert_eq!(d.quantile(0.75).unwrap(), 3.0);
        assert_eq!(d.quantile(0.5).unwrap(), 1.0);
        assert!(d.quantile(0.0).is_err());
        assert!(d.quantile(1.0).is_err());
    }

    #[test]
    fn upper_quantile_uses_strict_upper_tail() {
        // μ((m,∞)) <= 0.5 first holds at m = 1.
        let d: Distribution = DiscreteDistribution::new([(1.0, 0.5), (3.0, 0.5)]).unwrap().into();
        assert_eq!(d.upper_quantile(0.5).unwrap(), 1.0);
        assert_eq!(d.upper_quantile(0.4).unwrap(), 3.0);
        let n = Distribution::normal(0.0, 1.0).unwrap();
        assert!((n.upper_quantile(0.05).unwrap() - 1.6448536269514722).abs() < 1e-12);
    }

    #[test]
    fn discretize_examples() {
        let n = ParametricDistribution::normal(0.0, 1.0).unwrap();
        let d2 = n.discretize(2, DiscretizationScheme::EqualProbability).unwrap();
        assert!((d2.points()[0] + d2.points()[1]).abs() < 1e-14);
        assert_eq!(d2.weights(), &[0.5, 0.5]);
        assert!((d2.points()[1] - std_normal_quantile(0.75)).abs() < 1e-14);

        let ln = ParametricDistribution::lognormal(0.0, 0.2).unwrap();
        let d4 = ln.discretize(4, DiscretizationScheme::EqualProbability).unwrap();
        assert_eq!(d4.len(), 4);
        assert!(d4.weights().iter().all(|&w| (w - 0.25).abs() < 1e-15));
        assert!(d4.points().windows(2).all(|p| p[0] < p[1]));

        let d101 = n.discretize(101, DiscretizationScheme::EqualProbability).unwrap();
        assert!(d101.mean().abs() < 1e-10);
    }

    #[test]
    fn grid_discretization_keeps_all_mass() {
        let n = ParametricDistribution::normal(1.0, 2.0).unwrap();
        let d = n.discretize(41, DiscretizationScheme::Grid).unwrap();
        assert_eq!(d.len(), 41);
        assert!((d.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((d.mean() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn discretized_means_converge() {
        let ln = ParametricDistribution::lognormal(0.0, 0.5).unwrap();
        let target = ln.mean();
        let errs: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&n| {
                let d = ln.discretize(n, DiscretizationScheme::EqualProbability).unwrap();
                (d.mean() - target).abs()
            })
            .collect();
        assert!(errs.windows(2).all(|e| e[1] < e[0]), "{errs:?}");
    }

    #[test]
    fn merges_close_atoms_and_validates() {
        let d = DiscreteDistribution::new([(1.0, 0.25), (1.0 + 1e-14, 0.25), (0.0, 0.5)]).unwrap();
        assert_eq!(d.points(), &[0.0, 1.0]);
        assert_eq!(d.weights(), &[0.5, 0.5]);
        assert!(matches!(
            DiscreteDistribution::new([(0.0, 0.5)]),
            Err(MeasureError::WeightSum(_))
        ));
        assert!(matches!(
            DiscreteDistribution::new([(0.0, 1.5), (1.0, -0.5)]),
            Err(MeasureError::BadWeight { index: 1, .. })
        ));
        assert!(matches!(DiscreteDistribution::new([]), Err(MeasureError::Empty)));
        assert!(ParametricDistribution::normal(0.0, 0.0).is_err());
        assert!(ParametricDistribution::lognormal(0.0, -1.0).is_err());
    }

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn load_samples_examples() {
        let f = write_tmp("0\n0\n1\n");
        let d = load_samples(f.path()).unwrap();
        assert_eq!(d.points(), &[0.0, 1.0]);
        assert!((d.weights()[0] - 2.0 / 3.0).abs() < 1e-15);

        let f = write_tmp("5\n");
        assert_eq!(load_samples(f.path()).unwrap(), DiscreteDistribution::dirac(5.0));

        let f = write_tmp("1\r\n2\r\n3\r\n4");
        let d = load_samples(f.path()).unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.weights().iter().all(|&w| w == 0.25));
    }

    #[test]
    fn load_samples_errors() {
        let f = write_tmp("1\n2\nabc\n");
        match load_samples(f.path()) {
            Err(MeasureError::Parse { line, text, .. }) => {
                assert_eq!(line, 3);
                assert_eq!(text, "abc");
            }
            other => panic!("unexpected {other:?}"),
        }
        let f = write_tmp("");
        assert!(matches!(load_samples(f.path()), Err(MeasureError::EmptySample(_))));
        assert!(matches!(
            load_samples("/nonexistent/samples.csv"),
            Err(MeasureError::Io { .. })
        ));
    }
}
