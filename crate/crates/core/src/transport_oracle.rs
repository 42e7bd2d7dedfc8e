//! Transport costs between discrete laws and the brute-force primal value of
//! the penalized worst case, `sup_μ (∫ f dμ − φ(d_c(μ0, μ)))`, over measures
//! supported on a finite candidate grid.
//!
//! The primal value is computed without any multiplier: for each budget `t`
//! the linear program
//!
//! ```text
//! G(t) = max Σ f(y_j) π_ij   s.t.  Σ_j π_ij = w_i,  Σ c(x_i, y_j) π_ij <= t,  π >= 0
//! ```
//!
//! is solved by the simplex method, and `G(t) − φ(t)` is maximized over `t`.
//! `G` is concave and nondecreasing, so a sweep followed by golden section
//! finds the maximum.

use crate::lp::{LinearProgram, LpError, Relation};
use crate::measures::DiscreteDistribution;
use crate::penalties::Penalty;
use crate::scalar::golden_section;

/// `c(x, y) = min(κ|x − y|^p, cap)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostFn {
    scale: f64,
    exponent: f64,
    cap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error("cost `{field}` must be {requirement}, got {value}")]
    InvalidCost {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("candidate support must be nonempty, finite and strictly increasing")]
    BadSupport,
    #[error("baseline atom {0} is not on the candidate support")]
    AtomOffSupport(f64),
    #[error("{values} function values for {points} candidate points")]
    LengthMismatch { points: usize, values: usize },
    #[error("function value at candidate {0} is not finite")]
    NonFiniteValue(usize),
    #[error("transport budget must be finite and >= 0, got {0}")]
    BadBudget(f64),
    #[error(transparent)]
    Lp(#[from] LpError),
}

impl CostFn {
    pub fn new(scale: f64, exponent: f64) -> Result<Self, OracleError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(OracleError::InvalidCost {
                field: "scale",
                requirement: "finite and > 0",
                value: scale,
            });
        }
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(OracleError::InvalidCost {
                field: "exponent",
                requirement: "finite and > 0",
                value: exponent,
            });
        }
        Ok(Self {
            scale,
            exponent,
            cap: None,
        })
    }

    /// `|x − y|^p`.
    pub fn power(exponent: f64) -> Result<Self, OracleError> {
        Self::new(1.0, exponent)
    }

    /// `(x − y)²/2`, the pricing cost.
    pub fn half_quadratic() -> Self {
        Self {
            scale: 0.5,
            exponent: 2.0,
            cap: None,
        }
    }

    /// Truncates the cost at `cap`; bounded costs make convex losses
    /// degenerate, which is what this exists to exhibit.
    pub fn capped(self, cap: f64) -> Result<Self, OracleError> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(OracleError::InvalidCost {
                field: "cap",
                requirement: "finite and > 0",
                value: cap,
            });
        }
        Ok(Self { cap: Some(cap), ..self })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exponent(&self) -> f64 {
        self.exponent
    }

    pub fn cap(&self) -> Option<f64> {
        self.cap
    }

    /// `|d|^p`, with the common exponents evaluated exactly.
    pub fn unit(&self, d: f64) -> f64 {
        let d = d.abs();
        if self.exponent == 1.0 {
            d
        } else if self.exponent == 2.0 {
            d * d
        } else {
            d.powf(self.exponent)
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let c = self.scale * self.unit(x - y);
        match self.cap {
            Some(cap) => c.min(cap),
            None => c,
        }
    }
}

/// A transport plan between two discrete laws, stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    pub rows: Vec<f64>,
    pub cols: Vec<f64>,
    /// Row-major, `rows.len() × cols.len()`.
    pub mass: Vec<f64>,
}

impl Coupling {
    pub fn row_sums(&self) -> Vec<f64> {
        self.mass.chunks(self.cols.len()).map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.cols.len()];
        for r in self.mass.chunks(self.cols.len()) {
            for (a, v) in s.iter_mut().zip(r) {
                *a += v;
            }
        }
        s
    }

    pub fn cost(&self, cost: &CostFn) -> f64 {
        let m = self.cols.len();
        let mut total = 0.0;
        for (i, &x) in self.rows.iter().enumerate() {
            for (j, &y) in self.cols.iter().enumerate() {
                let p = self.mass[i * m + j];
                if p != 0.0 {
                    total += p * cost.eval(x, y);
                }
            }
        }
        total
    }
}

/// The comonotone (quantile) coupling of two discrete laws.
pub fn comonotone_coupling(mu: &DiscreteDistribution, nu: &DiscreteDistribution) -> Coupling {
    let (n, m) = (mu.len(), nu.len());
    let cum = |w: &[f64]| {
        let mut acc = 0.0;
        let mut c: Vec<f64> = w
            .iter()
            .map(|x| {
                acc += x;
                acc
            })
            .collect();
        *c.last_mut().unwrap() = 1.0;
        c
    };
    let (cu, cv) = (cum(mu.weights()), cum(nu.weights()));
    let mut mass = vec![0.0; n * m];
    let (mut i, mut j, mut level) = (0, 0, 0.0);
    // Mass between consecutive merged quantile levels goes to the pair of
    // atoms holding that level on each side.
    while i < n && j < m {
        let next = cu[i].min(cv[j]);
        mass[i * m + j] += (next - level).max(0.0);
        level = next;
        if cu[i] <= next {
            i += 1;
        }
        if cv[j] <= next {
            j += 1;
        }
    }
    Coupling {
        rows: mu.points().to_vec(),
        cols: nu.points().to_vec(),
        mass,
    }
}

/// Optimal coupling by linear programming (any cost).
pub fn lp_coupling(
    mu: &DiscreteDistribution,
    nu: &DiscreteDistribution,
    cost: &CostFn,
) -> Result<Coupling, OracleError> {
    let (n, m) = (mu.len(), nu.len());
    let costs: Vec<f64> = mu
        .points()
        .iter()
        .flat_map(|&x| nu.points().iter().map(move |&y| cost.eval(x, y)))
        .collect();
    let mut lp = LinearProgram::minimize(costs);
    for (i, &w) in mu.weights().iter().enumerate() {
        let mut row = vec![0.0; n * m];
        row[i * m..(i + 1) * m].iter_mut().for_each(|v| *v = 1.0);
        lp.add_constraint(row, Relation::Eq, w);
    }
    for (j, &w) in nu.weights().iter().enumerate() {
        let mut row = vec![0.0; n * m];
        for i in 0..n {
            row[i * m + j] = 1.0;
        }
        lp.add_constraint(row, Relation::Eq, w);
    }
    let sol = lp.solve()?;
    Ok(Coupling {
        rows: mu.points().to_vec(),
        cols: nu.points().to_vec(),
        mass: sol.x,
    })
}

/// `d_c(μ, ν)`: comonotone coupling for uncapped `p >= 1` (optimal for
/// convex costs of the difference), linear programming otherwise.
pub fn transport_cost(mu: &DiscreteDistribution, nu: &DiscreteDistribution, cost: &CostFn) -> Result<f64, OracleError> {
    if cost.exponent >= 1.0 && cost.cap.is_none() {
        Ok(comonotone_coupling(mu, nu).cost(cost))
    } else {
        Ok(lp_coupling(mu, nu, cost)?.cost(cost))
    }
}

/// Candidate grid for the primal problem and the resolution of the budget
/// sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleSpec {
    candidate_support: Vec<f64>,
    budget_grid: usize,
}

/// Default number of budgets in the coarse sweep.
pub const DEFAULT_BUDGET_GRID: usize = 24;

impl OracleSpec {
    pub fn new(mut candidate_support: Vec<f64>, budget_grid: usize) -> Result<Self, OracleError> {
        candidate_support.sort_by(f64::total_cmp);
        candidate_support.dedup();
        if candidate_support.is_empty() || candidate_support.iter().any(|y| !y.is_finite()) {
            return Err(OracleError::BadSupport);
        }
        Ok(Self {
            candidate_support,
            budget_grid: budget_grid.max(2),
        })
    }

    /// Union of the atoms of `mu0` with `points` equally spaced nodes on
    /// `[min atom − R, max atom + R]`, where `κR^p = 10·f_range` (beyond that
    /// radius moving mass cannot pay for itself).
    pub fn default_support(
        mu0: &DiscreteDistribution,
        cost: &CostFn,
        f_range: f64,
        points: usize,
    ) -> Result<Self, OracleError> {
        let radius = (10.0 * f_range.max(1e-12) / cost.scale).powf(1.0 / cost.exponent);
        let (lo, hi) = (mu0.min() - radius, mu0.max() + radius);
        let k = points.max(2);
        let mut ys: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
        ys.extend_from_slice(mu0.points());
        Self::new(ys, DEFAULT_BUDGET_GRID)
    }

    pub fn candidate_support(&self) -> &[f64] {
        &self.candidate_support
    }

    pub fn budget_grid(&self) -> usize {
        self.budget_grid
    }

    fn check(&self, mu0: &DiscreteDistribution, f: &[f64]) -> Result<(), OracleError> {
        if f.len() != self.candidate_support.len() {
            return Err(OracleError::LengthMismatch {
                points: self.candidate_support.len(),
                values: f.len(),
            });
        }
        if let Some(i) = f.iter().position(|v| !v.is_finite()) {
            return Err(OracleError::NonFiniteValue(i));
        }
        for &x in mu0.points() {
            if self.candidate_support.binary_search_by(|y| y.total_cmp(&x)).is_err() {
                return Err(OracleError::AtomOffSupport(x));
            }
        }
        Ok(())
    }
}

/// Reusable budget-constrained transport program for one instance.
struct BudgetProblem<'a> {
    mu0: &'a DiscreteDistribution,
    f: &'a [f64],
    ys: &'a [f64],
    costs: Vec<f64>,
}

impl<'a> BudgetProblem<'a> {
    fn new(mu0: &'a DiscreteDistribution, f: &'a [f64], cost: &CostFn, spec: &'a OracleSpec) -> Self {
        let ys = spec.candidate_support();
        let costs = mu0
            .points()
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| cost.eval(x, y)))
            .collect();
        Self { mu0, f, ys, costs }
    }

    /// `Σ_i w_i max_j c(x_i, y_j)`: beyond this budget the constraint is slack.
    fn max_budget(&self) -> f64 {
        let m = self.ys.len();
        self.mu0
            .weights()
            .iter()
            .enumerate()
            .map(|(i, w)| w * self.costs[i * m..(i + 1) * m].iter().cloned().fold(0.0, f64::max))
            .sum()
    }

    fn value(&self, t: f64) -> Result<f64, OracleError> {
        let (n, m) = (self.mu0.len(), self.ys.len());
        let objective: Vec<f64> = (0..n).flat_map(|_| self.f.iter().copied()).collect();
        let mut lp = LinearProgram::maximize(objective);
        for (i, &w) in self.mu0.weights().iter().enumerate() {
            let mut row = vec![0.0; n * m];
            row[i * m..(i + 1) * m].iter_mut().for_each(|v| *v = 1.0);
            lp.add_constraint(row, Relation::Eq, w);
        }
        lp.add_constraint(self.costs.clone(), Relation::Le, t);
        Ok(lp.solve()?.objective)
    }
}

/// `G(t)`: the best value of `∫ f dμ` over `μ` on the candidate support with
/// `d_c(μ0, μ) <= t`.
pub fn budget_value(
    mu0: &DiscreteDistribution,
    f: &[f64],
    cost: &CostFn,
    spec: &OracleSpec,
    t: f64,
) -> Result<f64, OracleError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(OracleError::BadBudget(t));
    }
    spec.check(mu0, f)?;
    BudgetProblem::new(mu0, f, cost, spec).value(t)
}

/// `sup_t (G(t) − φ(t))`, the penalized worst case restricted to the
/// candidate support.
pub fn primal_robust_value(
    mu0: &DiscreteDistribution,
    f: &[f64],
    cost: &CostFn,
    penalty: &Penalty,
    spec: &OracleSpec,
) -> Result<f64, OracleError> {
    spec.check(mu0, f)?;
    let problem = BudgetProblem::new(mu0, f, cost, spec);
    if let Penalty::Ball { delta } = *penalty {
        return problem.value(delta);
    }
    let t_max = problem.max_budget();
    if t_max == 0.0 {
        return problem.value(0.0);
    }
    let k = spec.budget_grid();
    let ts: Vec<f64> = (0..k).map(|i| t_max * i as f64 / (k - 1) as f64).collect();
    let mut vals = Vec::with_capacity(k);
    for &t in &ts {
        vals.push(problem.value(t)? - penalty.phi_unchecked(t));
    }
    let best = (0..k).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let (a, b) = (ts[best.saturating_sub(1)], ts[(best + 1).min(k - 1)]);

    let mut err = None;
    let m = golden_section(
        |t| match problem.value(t) {
            Ok(g) => -(g - penalty.phi_unchecked(t)),
            Err(e) => {
                err.get_or_insert(e);
                f64::INFINITY
            }
        },
        a,
        b,
        1e-11 * t_max.max(1.0),
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok((-m.value).max(vals[best]))
}
