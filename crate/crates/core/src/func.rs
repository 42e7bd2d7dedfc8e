//! Real functions that know where they are not smooth.
//!
//! Integrals against parametric baselines split the domain at the kinks and
//! jumps reported by [`RealFn::breakpoints`], which turns a slowly convergent
//! quadrature of a kinked integrand into a handful of smooth panels.

/// A function `R -> (-∞, +∞]`; `+∞` is returned as `f64::INFINITY`.
pub trait RealFn {
    fn eval(&self, x: f64) -> f64;

    /// Points where the function may fail to be smooth (kinks, jumps).
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> RealFn for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// A closure together with its known breakpoints.
#[derive(Clone, Debug)]
pub struct Kinked<F> {
    pub f: F,
    pub kinks: Vec<f64>,
}

impl<F: Fn(f64) -> f64> Kinked<F> {
    pub fn new(f: F, kinks: Vec<f64>) -> Self {
        Self { f, kinks }
    }
}

impl<F: Fn(f64) -> f64> RealFn for Kinked<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.kinks.clone()
    }
}

/// `x ↦ f(x - shift)`.
#[derive(Clone, Copy, Debug)]
pub struct Shifted<'a, F: ?Sized> {
    pub f: &'a F,
    pub shift: f64,
}

impl<F: RealFn + ?Sized> RealFn for Shifted<'_, F> {
    fn eval(&self, x: f64) -> f64 {
        self.f.eval(x - self.shift)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.f.breakpoints().into_iter().map(|b| b + self.shift).collect()
    }
}

/// Piecewise-linear interpolant through `(points, values)`, extended linearly
/// beyond both ends with the slope of the outermost segment.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    points: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("a table needs at least two points, got {0}")]
    TooShort(usize),
    #[error("points and values differ in length ({points} vs {values})")]
    LengthMismatch { points: usize, values: usize },
    #[error("table points must be finite and strictly increasing (index {0})")]
    NotIncreasing(usize),
    #[error("table value at index {0} is not finite")]
    NonFiniteValue(usize),
}

impl PiecewiseLinear {
    pub fn new(points: Vec<f64>, values: Vec<f64>) -> Result<Self, TableError> {
        if points.len() != values.len() {
            return Err(TableError::LengthMismatch {
                points: points.len(),
                values: values.len(),
            });
        }
        if points.len() < 2 {
            return Err(TableError::TooShort(points.len()));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.is_finite() || (i > 0 && *p <= points[i - 1]) {
                return Err(TableError::NotIncreasing(i));
            }
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(TableError::NonFiniteValue(i));
        }
        Ok(Self { points, values })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Slope of segment `i` (between `points[i]` and `points[i + 1]`).
    pub fn slope(&self, i: usize) -> f64 {
        (self.values[i + 1] - self.values[i]) / (self.points[i + 1] - self.points[i])
    }

    pub fn left_slope(&self) -> f64 {
        self.slope(0)
    }

    pub fn right_slope(&self) -> f64 {
        self.slope(self.points.len() - 2)
    }

    pub fn add_linear(&self, slope: f64, intercept: f64) -> Self {
        Self {
            points: self.points.clone(),
            values: self
                .points
                .iter()
                .zip(&self.values)
                .map(|(x, v)| v + slope * x + intercept)
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            points: self.points.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }
}

impl RealFn for PiecewiseLinear {
    fn eval(&self, x: f64) -> f64 {
        let n = self.points.len();
        let i = self.points.partition_point(|&p| p <= x);
        let seg = i.saturating_sub(1).min(n - 2);
        self.values[seg] + self.slope(seg) * (x - self.points[seg])
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.points.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_and_extrapolates() {
        let t = PiecewiseLinear::new(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(2.0), 2.5);
        assert_eq!(t.eval(-1.0), -2.0);
        assert_eq!(t.eval(5.0), 4.0);
        assert_eq!(t.eval(1.0), 2.0);
    }

    #[test]
    fn rejects_bad_tables() {
        assert_eq!(PiecewiseLinear::new(vec![0.0], vec![1.0]), Err(TableError::TooShort(1)));
        assert_eq!(
            PiecewiseLinear::new(vec![0.0, 0.0], vec![1.0, 2.0]),
            Err(TableError::NotIncreasing(1))
        );
    }

    #[test]
    fn shifted_moves_breakpoints() {
        let k = Kinked::new(|x: f64| x.max(0.0), vec![0.0]);
        let s = Shifted { f: &k, shift: 2.0 };
        assert_eq!(s.eval(3.0), 1.0);
        assert_eq!(s.breakpoints(), vec![2.0]);
    }
}
