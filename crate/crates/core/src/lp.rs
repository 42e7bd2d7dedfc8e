//! Dense two-phase tableau simplex for small linear programs.
//!
//! Variables are nonnegative; the objective is maximized. Pricing is Dantzig's
//! largest-coefficient rule, switching to Bland's smallest-index rule after a
//! run of degenerate pivots so the method cannot cycle.

/// Smallest pivot magnitude accepted in the ratio test.
pub const PIVOT_TOL: f64 = 1e-10;
/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-9;

const DEGENERATE_STREAK: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
struct Row {
    coefs: Vec<f64>,
    relation: Relation,
    rhs: f64,
}

/// `max c·x` subject to the added rows and `x >= 0`.
#[derive(Clone, Debug)]
pub struct LinearProgram {
    /// Always in maximization form.
    objective: Vec<f64>,
    rows: Vec<Row>,
    minimize: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LpError {
    #[error("linear program is infeasible (phase-one residual {0:e})")]
    Infeasible(f64),
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("constraint has {got} coefficients, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("linear program data contains a non-finite number")]
    NonFinite,
}

impl LinearProgram {
    pub fn maximize(objective: Vec<f64>) -> Self {
        Self {
            objective,
            rows: Vec::new(),
            minimize: false,
        }
    }

    pub fn minimize(objective: Vec<f64>) -> Self {
        Self {
            minimize: true,
            ..Self::maximize(objective.into_iter().map(|c| -c).collect())
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coefs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.rows.push(Row { coefs, relation, rhs });
        self
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        let n = self.objective.len();
        for row in &self.rows {
            if row.coefs.len() != n {
                return Err(LpError::Dimension {
                    expected: n,
                    got: row.coefs.len(),
                });
            }
            if !row.rhs.is_finite() || row.coefs.iter().any(|c| !c.is_finite()) {
                return Err(LpError::NonFinite);
            }
        }
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite);
        }
        let mut sol = Tableau::build(self).run(&self.objective)?;
        if self.minimize {
            sol.objective = -sol.objective;
        }
        Ok(sol)
    }
}

struct Tableau {
    m: usize,
    /// Columns excluding the right-hand side.
    cols: usize,
    structural: usize,
    first_artificial: usize,
    /// Row-major, `cols + 1` entries per row; the last is the right-hand side.
    data: Vec<f64>,
    basis: Vec<usize>,
    /// Reduced profits `c_j - c_B B⁻¹ A_j`, then `-c_B B⁻¹ b`.
    obj: Vec<f64>,
    iterations: usize,
    limit: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.objective.len();
        let m = lp.rows.len();
        let mut rows: Vec<Row> = lp.rows.clone();
        for row in &mut rows {
            if row.rhs < 0.0 {
                row.rhs = -row.rhs;
                row.coefs.iter_mut().for_each(|c| *c = -*c);
                row.relation = match row.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let slacks = rows.iter().filter(|r| r.relation != Relation::Eq).count();
        let artificials = rows.iter().filter(|r| r.relation != Relation::Le).count();
        let cols = n + slacks + artificials;
        let width = cols + 1;
        let mut data = vec![0.0; m * width];
        let mut basis = vec![0; m];
        let (mut s, mut a) = (n, n + slacks);
        for (i, row) in rows.iter().enumerate() {
            let r = &mut data[i * width..(i + 1) * width];
            r[..n].copy_from_slice(&row.coefs);
            r[cols] = row.rhs;
            match row.relation {
                Relation::Le => {
                    r[s] = 1.0;
                    basis[i] = s;
                    s += 1;
                }
                Relation::Ge => {
                    r[s] = -1.0;
                    s += 1;
                    r[a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
                Relation::Eq => {
                    r[a] = 1.0;
                    basis[i] = a;
                    a += 1;
                }
            }
        }
        Self {
            m,
            cols,
            structural: n,
            first_artificial: n + slacks,
            data,
            basis,
            obj: vec![0.0; width],
            iterations: 0,
            limit: 50 * (m + cols) + 1000,
        }
    }

    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width() + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    /// Loads reduced profits for the column profits `cost`.
    fn load_objective(&mut self, cost: &[f64]) {
        let w = self.width();
        self.obj.iter_mut().for_each(|v| *v = 0.0);
        self.obj[..cost.len()].copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                let row = &self.data[i * w..(i + 1) * w];
                for (o, r) in self.obj.iter_mut().zip(row) {
                    *o -= cb * r;
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let p = self.data[r * w + c];
        for v in &mut self.data[r * w..(r + 1) * w] {
            *v /= p;
        }
        self.data[r * w + c] = 1.0;
        let (before, rest) = self.data.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Simplex iterations over columns `< active`.
    fn optimize(&mut self, active: usize) -> Result<(), LpError> {
        let mut bland = false;
        let mut streak = 0;
        loop {
            let entering = if bland {
                (0..active).find(|&j| self.obj[j] > PIVOT_TOL)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for j in 0..active {
                    let d = self.obj[j];
                    if d > PIVOT_TOL && best.is_none_or(|(_, b)| d > b) {
                        best = Some((j, d));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(c) = entering else {
                return Ok(());
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * lr.abs().max(1.0);
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };

            self.iterations += 1;
            if self.iterations > self.limit {
                return Err(LpError::IterationLimit(self.limit));
            }
            if ratio <= FEAS_TOL {
                streak += 1;
                if streak >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
                bland = false;
            }
            self.pivot(r, c);
        }
    }

    fn run(mut self, objective: &[f64]) -> Result<LpSolution, LpError> {
        if self.first_artificial < self.cols {
            let mut phase_one = vec![0.0; self.cols];
            phase_one[self.first_artificial..].iter_mut().for_each(|c| *c = -1.0);
            self.load_objective(&phase_one);
            self.optimize(self.cols)?;
            let residual = self.obj[self.cols];
            let scale = (0..self.m).map(|i| self.rhs(i).abs()).fold(1.0, f64::max);
            if residual > FEAS_TOL * scale {
                return Err(LpError::Infeasible(residual));
            }
            self.expel_artificials();
        }
        self.load_objective(objective);
        self.optimize(self.first_artificial)?;

        let mut x = vec![0.0; self.structural];
        for i in 0..self.m {
            let b = self.basis[i];
            if b < self.structural {
                x[b] = self.rhs(i).max(0.0);
            }
        }
        let value = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            x,
            objective: value,
            iterations: self.iterations,
        })
    }

    /// Pivots zero-level artificials out of the basis; rows where that is
    /// impossible are redundant and dropped.
    fn expel_artificials(&mut self) {
        let mut i = 0;
        while i < self.m {
            if self.basis[i] >= self.first_artificial {
                let col = (0..self.first_artificial)
                    .filter(|&j| self.at(i, j).abs() > PIVOT_TOL)
                    .max_by(|&a, &b| self.at(i, a).abs().total_cmp(&self.at(i, b).abs()));
                match col {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.remove_row(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }

    fn remove_row(&mut self, i: usize) {
        let w = self.width();
        self.data.drain(i * w..(i + 1) * w);
        self.basis.remove(i);
        self.m -= 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36.
        let mut lp = LinearProgram::maximize(vec![3.0, 5.0]);
        lp.add_constraint(vec![1.0, 0.0], Relation::Le, 4.0)
            .add_constraint(vec![0.0, 2.0], Relation::Le, 12.0)
            .add_constraint(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 36.0).abs() < 1e-12);
        assert!((s.x[0] - 2.0).abs() < 1e-12 && (s.x[1] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y, x + y = 2, x >= 0.5, y - x >= -1.
        let mut lp = LinearProgram::minimize(vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 2.0)
            .add_constraint(vec![1.0, 0.0], Relation::Ge, 0.5)
            .add_constraint(vec![-1.0, 1.0], Relation::Ge, -1.0);
        let s = lp.solve().unwrap();
        // Optimum x = 1.5, y = 0.5, cost 2.5.
        assert!((s.objective - 2.5).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::maximize(vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0)
            .add_constraint(vec![1.0], Relation::Ge, 2.0);
        assert!(matches!(lp.solve(), Err(LpError::Infeasible(_))));

        let mut lp = LinearProgram::maximize(vec![1.0, 0.0]);
        lp.add_constraint(vec![-1.0, 1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(), Err(LpError::Unbounded));
    }

    #[test]
    fn redundant_equalities_are_dropped() {
        // Transportation problem with one redundant marginal row.
        let cost = [0.0, 1.0, 1.0, 0.0];
        let mut lp = LinearProgram::minimize(cost.to_vec());
        lp.add_constraint(vec![1.0, 1.0, 0.0, 0.0], Relation::Eq, 0.5)
            .add_constraint(vec![0.0, 0.0, 1.0, 1.0], Relation::Eq, 0.5)
            .add_constraint(vec![1.0, 0.0, 1.0, 0.0], Relation::Eq, 0.25)
            .add_constraint(vec![0.0, 1.0, 0.0, 1.0], Relation::Eq, 0.75);
        let s = lp.solve().unwrap();
        assert!((s.objective - 0.25).abs() < 1e-12);
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Beale's classic cycling example for the largest-coefficient rule.
        let mut lp = LinearProgram::maximize(vec![0.75, -150.0, 0.02, -6.0]);
        lp.add_constraint(vec![0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0)
            .add_constraint(vec![0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0)
            .add_constraint(vec![0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 0.05).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn rejects_bad_dimensions() {
        let mut lp = LinearProgram::maximize(vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(lp.solve(), Err(LpError::Dimension { .. })));
    }
}
