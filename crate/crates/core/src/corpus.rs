//! Fixed-seed instance generators shared by the certification tests and the
//! `check-duality` command. Every generator is deterministic in [`CORPUS_SEED`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ctransform::DiscreteFn;
use crate::dual_engine::{robust_expectation, DualError};
use crate::finite_duality::PriorSet;
use crate::measures::{std_normal_quantile, DiscreteDistribution};
use crate::penalties::Penalty;
use crate::transport_oracle::{primal_robust_value, CostFn, OracleError, OracleSpec};

pub const CORPUS_SEED: u64 = 0x5EED_2024;
pub const DUALITY_INSTANCES: usize = 60;
const ATOM_COUNTS: [usize; 3] = [5, 10, 20];
const GRID_SIZES: [usize; 2] = [21, 51];
const COST_EXPONENTS: [f64; 2] = [1.0, 2.0];
/// Half-width of the candidate grid around the origin; atoms lie in `[-1, 1]`.
const GRID_RADIUS: f64 = 2.5;
const ORACLE_BUDGET_GRID: usize = 24;
const DUAL_TOL: f64 = 1e-10;

pub fn corpus_penalties() -> [Penalty; 4] {
    [
        Penalty::Ball { delta: 0.05 },
        Penalty::Ball { delta: 0.2 },
        Penalty::Linear,
        Penalty::Power { p: 2.0 },
    ]
}

/// One discrete duality instance: baseline, candidate support and payoff
/// tabulated on that support.
#[derive(Clone, Debug)]
pub struct DualityInstance {
    pub index: usize,
    pub mu0: DiscreteDistribution,
    pub spec: OracleSpec,
    pub payoff: Vec<f64>,
    pub cost: CostFn,
    pub penalty: Penalty,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Certificate {
    pub index: usize,
    pub atoms: usize,
    pub grid: usize,
    pub exponent: f64,
    pub penalty: &'static str,
    pub dual: f64,
    pub primal: f64,
    /// `|dual − primal| / max(1, |primal|)`.
    pub relative_gap: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Dual(#[from] DualError),
    #[error("dual value is infinite on instance {0}")]
    InfiniteDual(usize),
}

/// Instance `i` cycles atom count fastest, then grid size, cost exponent and
/// penalty.
pub fn duality_corpus() -> Vec<DualityInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let penalties = corpus_penalties();
    (0..DUALITY_INSTANCES)
        .map(|i| {
            let n = ATOM_COUNTS[i % 3];
            let m = GRID_SIZES[(i / 3) % 2];
            let p = COST_EXPONENTS[(i / 6) % 2];
            let penalty = penalties[(i / 12) % 4];

            let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let ws: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
            let total: f64 = ws.iter().sum();
            let mu0 = DiscreteDistribution::new(xs.iter().zip(&ws).map(|(&x, &w)| (x, w / total)))
                .expect("generated atoms are valid");

            let mut support: Vec<f64> = (0..m)
                .map(|j| -GRID_RADIUS + 2.0 * GRID_RADIUS * j as f64 / (m - 1) as f64)
                .collect();
            support.extend_from_slice(mu0.points());
            let spec = OracleSpec::new(support, ORACLE_BUDGET_GRID).expect("grid is finite");

            let strike = rng.random_range(-0.5..0.5);
            let width = rng.random_range(0.5..1.5);
            let payoff = spec
                .candidate_support()
                .iter()
                .map(|y| (y - strike).clamp(0.0, width))
                .collect();

            DualityInstance {
                index: i,
                mu0,
                spec,
                payoff,
                cost: CostFn::power(p).expect("exponent is valid"),
                penalty,
            }
        })
        .collect()
}

/// Solves one instance on both sides.
pub fn certify(instance: &DualityInstance) -> Result<Certificate, CorpusError> {
    let primal = primal_robust_value(
        &instance.mu0,
        &instance.payoff,
        &instance.cost,
        &instance.penalty,
        &instance.spec,
    )?;
    let f = DiscreteFn::new(instance.spec.candidate_support().to_vec(), instance.payoff.clone());
    let dual = robust_expectation(
        &f,
        &instance.mu0.clone().into(),
        &instance.cost,
        &instance.penalty,
        DUAL_TOL,
    )?
    .value
    .finite()
    .ok_or(CorpusError::InfiniteDual(instance.index))?;
    Ok(Certificate {
        index: instance.index,
        atoms: instance.mu0.len(),
        grid: instance.spec.candidate_support().len(),
        exponent: instance.cost.exponent(),
        penalty: instance.penalty.label(),
        dual,
        primal,
        relative_gap: (dual - primal).abs() / primal.abs().max(1.0),
    })
}

/// `n` standard normal draws by inversion, as an empirical measure.
pub fn empirical_normal(n: usize) -> DiscreteDistribution {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 0xE3);
    let samples: Vec<f64> = (0..n)
        .map(|_| std_normal_quantile(rng.random_range(1e-9..1.0 - 1e-9)))
        .collect();
    DiscreteDistribution::from_samples(&samples).expect("draws are finite")
}

/// `count` prior sets on `n` outcomes, each the hull of `vertices` random
/// probability vectors.
pub fn random_prior_sets(count: usize, n: usize, vertices: usize) -> Vec<PriorSet> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED ^ 0x9A);
    (0..count)
        .map(|_| {
            let vs = (0..vertices)
                .map(|_| {
                    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
                    let total: f64 = raw.iter().sum();
                    let mut v: Vec<f64> = raw.iter().map(|r| r / total).collect();
                    let head: f64 = v[..n - 1].iter().sum();
                    v[n - 1] = 1.0 - head;
                    v
                })
                .collect();
            PriorSet::new(vs).expect("generated vertices are probability vectors")
        })
        .collect()
}
