//! λc-transforms `f^{λc}(x) = sup_y (f(y) − λ c(x, y))`.
//!
//! Costs `κ|x − y|^p` are handled with the unit cost `|x − y|^p` and the folded
//! multiplier `λκ`. A cap `min(c, K)` splits the supremum into
//! `max(f^{λc}(x), sup f − λK)`, so every closed form below extends to
//! truncated costs.

use crate::ext::ExtReal;
use crate::func::{PiecewiseLinear, RealFn, Shifted};
use crate::transport_oracle::CostFn;

/// Coarse nodes of the generic grid transform.
pub const GENERIC_COARSE_NODES: usize = 1024;
/// Nodes of the refinement pass around the incumbent.
pub const GENERIC_REFINE_NODES: usize = 256;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("closed form needs cost exponent 1 or 2, got {0}")]
    UnsupportedExponent(f64),
    #[error("closed form needs an uncapped cost")]
    CappedCost,
    #[error("multiplier must be > 0 for this transform, got {0}")]
    ZeroMultiplier(f64),
    #[error("multiplier must be finite and >= 0, got {0}")]
    NegativeMultiplier(f64),
    #[error("`alpha` must lie in (0, 1), got {0}")]
    BadLevel(f64),
}

/// A function whose λc-transform can be evaluated pointwise.
pub trait CTransform: RealFn {
    /// `f^{λc}(x)`; `f64::INFINITY` stands for `+∞`.
    fn transform_at(&self, cost: &CostFn, lambda: f64, x: f64) -> f64;

    /// Points where `x ↦ f^{λc}(x)` may fail to be smooth.
    fn transform_breakpoints(&self, _cost: &CostFn, _lambda: f64) -> Vec<f64> {
        self.breakpoints()
    }
}

/// `x ↦ f^{λc}(x)` as a [`RealFn`], ready for integration.
#[derive(Clone, Copy, Debug)]
pub struct Transformed<'a, F: ?Sized> {
    pub f: &'a F,
    pub cost: CostFn,
    pub lambda: f64,
}

impl<F: CTransform + ?Sized> RealFn for Transformed<'_, F> {
    fn eval(&self, x: f64) -> f64 {
        self.f.transform_at(&self.cost, self.lambda, x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.f.transform_breakpoints(&self.cost, self.lambda)
    }
}

/// Costs depending on `x − y` only: `f(· − m)^{λc}(x) = f^{λc}(x − m)`.
impl<F: CTransform + ?Sized> CTransform for Shifted<'_, F> {
    fn transform_at(&self, cost: &CostFn, lambda: f64, x: f64) -> f64 {
        self.f.transform_at(cost, lambda, x - self.shift)
    }

    fn transform_breakpoints(&self, cost: &CostFn, lambda: f64) -> Vec<f64> {
        self.f
            .transform_breakpoints(cost, lambda)
            .into_iter()
            .map(|b| b + self.shift)
            .collect()
    }
}

/// `sup_{d >= 0} (a·d − λ d^p)` for `a >= 0`.
fn shift_gain(a: f64, lambda: f64, p: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if lambda == 0.0 || p < 1.0 {
        return f64::INFINITY;
    }
    if p == 1.0 {
        return if a <= lambda { 0.0 } else { f64::INFINITY };
    }
    let d = optimal_shift(a, lambda, p);
    a * d * (1.0 - 1.0 / p)
}

/// Maximizer `d` of `a·d − λ d^p`, `p > 1`.
fn optimal_shift(a: f64, lambda: f64, p: f64) -> f64 {
    if p == 2.0 {
        a / (2.0 * lambda)
    } else {
        (a / (lambda * p)).powf(1.0 / (p - 1.0))
    }
}

/// Folded multiplier `λκ` and exponent.
fn folded(cost: &CostFn, lambda: f64) -> (f64, f64) {
    (lambda * cost.scale(), cost.exponent())
}

fn apply_cap(uncapped: f64, sup_f: f64, cost: &CostFn, lambda: f64) -> f64 {
    match cost.cap() {
        Some(cap) => uncapped.max(sup_f - lambda * cap),
        None => uncapped,
    }
}

/// `f(y) = max_k (a_k y + b_k)`: convex piecewise-linear. Its transform is
/// exact for every exponent: `max_k (a_k x + b_k + sup_d (|a_k| d − λ' d^p))`.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxAffine {
    pieces: Vec<(f64, f64)>,
}

impl MaxAffine {
    /// Pieces as `(slope, intercept)`; at least one.
    pub fn new(pieces: Vec<(f64, f64)>) -> Self {
        assert!(!pieces.is_empty(), "MaxAffine needs at least one piece");
        Self { pieces }
    }

    pub fn pieces(&self) -> &[(f64, f64)] {
        &self.pieces
    }

    fn sup_value(&self) -> f64 {
        if self.pieces.iter().all(|p| p.0 == 0.0) {
            self.pieces.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
        } else {
            f64::INFINITY
        }
    }

    fn uncapped(&self, lam: f64, p: f64, x: f64) -> f64 {
        self.pieces
            .iter()
            .map(|&(a, b)| a * x + b + shift_gain(a.abs(), lam, p))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl RealFn for MaxAffine {
    fn eval(&self, x: f64) -> f64 {
        self.pieces
            .iter()
            .map(|&(a, b)| a * x + b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for (i, &(a1, b1)) in self.pieces.iter().enumerate() {
            for &(a2, b2) in &self.pieces[i + 1..] {
                if a1 != a2 {
                    out.push((b2 - b1) / (a1 - a2));
                }
            }
        }
        out
    }
}

impl CTransform for MaxAffine {
    fn transform_at(&self, cost: &CostFn, lambda: f64, x: f64) -> f64 {
        let (lam, p) = folded(cost, lambda);
        apply_cap(self.uncapped(lam, p, x), self.sup_value(), cost, lambda)
    }

    fn transform_breakpoints(&self, cost: &CostFn, lambda: f64) -> Vec<f64> {
        // Crossings of the shifted pieces.
        let (lam, p) = folded(cost, lambda);
        let shifted: Vec<(f64, f64)> = self
            .pieces
            .iter()
            .map(|&(a, b)| (a, b + shift_gain(a.abs(), lam, p)))
            .filter(|pc| pc.1.is_finite())
            .collect();
        if shifted.is_empty() {
            return Vec::new();
        }
        MaxAffine::new(shifted).breakpoints()
    }
}

/// Losses of the risk module.
#[derive(Clone, Debug, PartialEq)]
pub enum LossFn {
    /// `l(x) = x⁺/α`.
    Avar { alpha: f64 },
    /// `l(x) = (((1 + x)⁺)² − 1)/2`.
    MeanVar,
    /// `l(x) = 1_{(0,∞)}(x) − α`.
    VarIndicator { alpha: f64 },
    /// Piecewise-linear interpolation, extended linearly.
    Tabulated(PiecewiseLinear),
}

fn check_alpha(alpha: f64) -> Result<(), TransformError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(TransformError::BadLevel(alpha))
    }
}

impl LossFn {
    pub fn validate(&self) -> Result<(), TransformError> {
        match *self {
            LossFn::Avar { alpha } | LossFn::VarIndicator { alpha } => check_alpha(alpha),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            LossFn::Avar { .. } => "avar",
            LossFn::MeanVar => "meanvar",
            LossFn::VarIndicator { .. } => "var",
            LossFn::Tabulated(_) => "tabulated",
        }
    }

    /// `inf_x l(x)`, possibly `-∞`.
    pub fn infimum(&self) -> f64 {
        match self {
            LossFn::Avar { .. } => 0.0,
            LossFn::MeanVar => -0.5,
            LossFn::VarIndicator { alpha } => -alpha,
            LossFn::Tabulated(t) => {
                if t.left_slope() > 0.0 || t.right_slope() < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    t.values().iter().cloned().fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    /// `sup_x l(x)`, possibly `+∞`.
    pub fn supremum(&self) -> f64 {
        match self {
            LossFn::Avar { .. } | LossFn::MeanVar => f64::INFINITY,
            LossFn::VarIndicator { alpha } => 1.0 - alpha,
            LossFn::Tabulated(t) => pwl_supremum(t),
        }
    }
}

impl RealFn for LossFn {
    fn eval(&self, x: f64) -> f64 {
        match self {
            LossFn::Avar { alpha } => x.max(0.0) / alpha,
            LossFn::MeanVar => meanvar_loss(x),
            LossFn::VarIndicator { alpha } => {
                if x > 0.0 {
                    1.0 - alpha
                } else {
                    -alpha
                }
            }
            LossFn::Tabulated(t) => t.eval(x),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            LossFn::Avar { .. } | LossFn::VarIndicator { .. } => vec![0.0],
            LossFn::MeanVar => vec![-1.0],
            LossFn::Tabulated(t) => t.breakpoints(),
        }
    }
}

fn meanvar_loss(x: f64) -> f64 {
    let u = (1.0 + x).max(0.0);
    0.5 * (u * u - 1.0)
}

impl CTransform for LossFn {
    fn transform_at(&self, cost: &CostFn, lambda: f64, x: f64) -> f64 {
        let (lam, p) = folded(cost, lambda);
        let uncapped = match self {
            LossFn::Avar { alpha } => avar_uncapped(*alpha, lam, p, x),
            LossFn::MeanVar => meanvar_uncapped(lam, p, x),
            LossFn::VarIndicator { alpha } => var_indicator_uncapped(*alpha, lam, p, x),
            LossFn::Tabulated(t) => pwl_transform(t, lam, p, x),
        };
        apply_cap(uncapped, self.supremum(), cost, lambda)
    }

    fn transform_breakpoints(&self, cost: &CostFn, lambda: f64) -> Vec<f64> {
        let (lam, p) = folded(cost, lambda);
        let mut out = match self {
            LossFn::Avar { alpha } => {
                if p == 1.0 {
                    vec![0.0]
                } else if p > 1.0 && lam > 0.0 {
                    vec![-alpha * shift_gain(1.0 / alpha, lam, p)]
                } else {
                    vec![]
                }
            }
            LossFn::MeanVar => vec![-1.0],
            LossFn::VarIndicator { .. } => {
                if lam > 0.0 {
                    vec![-(1.0 / lam).powf(1.0 / p), 0.0]
                } else {
                    vec![0.0]
                }
            }
            LossFn::Tabulated(t) => pwl_transform_breakpoints(t, lam, p),
        };
        if cost.cap().is_some() {
            // Where the capped branch takes over is not tracked; panels stay
            // correct, only less tight.
            out.extend(self.breakpoints());
        }
        out
    }
}

fn avar_uncapped(alpha: f64, lam: f64, p: f64, x: f64) -> f64 {
    (x / alpha + shift_gain(1.0 / alpha, lam, p)).max(0.0)
}

fn meanvar_uncapped(lam: f64, p: f64, x: f64) -> f64 {
    if p < 2.0 || lam <= 0.0 {
        return f64::INFINITY;
    }
    if p == 2.0 {
        if lam <= 0.5 {
            return f64::INFINITY;
        }
        return 2.0 * lam / (2.0 * lam - 1.0) * meanvar_loss(x) + 1.0 / (4.0 * lam - 2.0);
    }
    // p > 2: the maximizer satisfies 1 + y = λ'p(y − x)^{p−1}; bracket it.
    let f = |y: f64| meanvar_loss(y) - lam * (y - x).abs().powf(p);
    let radius = 2.0 + (1.0 + x.abs()) + (4.0 * (2.0 + x.abs()) / lam).powf(1.0 / (p - 2.0)).min(1e6);
    generic_grid_max(&f, x - radius, x + radius, x, &[-1.0], GENERIC_COARSE_NODES).0
}

fn var_indicator_uncapped(alpha: f64, lam: f64, p: f64, x: f64) -> f64 {
    if x > 0.0 {
        return 1.0 - alpha;
    }
    // Moving to just above 0 costs λ'|x|^p.
    (1.0 - lam * (-x).powf(p)).max(0.0) - alpha
}

fn pwl_supremum(t: &PiecewiseLinear) -> f64 {
    if t.left_slope() < 0.0 || t.right_slope() > 0.0 {
        f64::INFINITY
    } else {
        t.values().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Exact transform of a piecewise-linear function: the objective is concave
/// (for `p >= 1`) or convex (for `p < 1`) on each segment on each side of
/// `x`, so its maximum sits at a table point, at `x`, or at the stationary
/// point of a segment.
fn pwl_transform(t: &PiecewiseLinear, lam: f64, p: f64, x: f64) -> f64 {
    pwl_transform_arg(t, lam, p, x).0
}

/// Transform value and the id of the winning candidate: `0` for `y = x`,
/// `1 + j` for table point `j`, `1 + n + i` for the stationary point of
/// segment `i` (tails included).
fn pwl_transform_arg(t: &PiecewiseLinear, lam: f64, p: f64, x: f64) -> (f64, usize) {
    let (sl, sr) = (t.left_slope(), t.right_slope());
    // Tail growth: f(y) − λ'|x−y|^p → ∞ along a tail.
    let tail_diverges = |s: f64| {
        if s <= 0.0 {
            false
        } else if lam == 0.0 || p < 1.0 {
            true
        } else if p == 1.0 {
            s > lam
        } else {
            false
        }
    };
    if tail_diverges(-sl) || tail_diverges(sr) {
        return (f64::INFINITY, 0);
    }
    if lam == 0.0 {
        return (pwl_supremum(t), 0);
    }
    let obj = |y: f64| t.eval(y) - lam * (x - y).abs().powf(p);
    let pts = t.points();
    let n = pts.len();
    let mut best = (obj(x), 0);
    let mut consider = |v: f64, id: usize| {
        if v > best.0 {
            best = (v, id);
        }
    };
    for (j, &y) in pts.iter().enumerate() {
        consider(obj(y), 1 + j);
    }
    if p > 1.0 {
        for i in 0..=n {
            // Segment i spans [pts[i-1], pts[i]]; i = 0 and i = n are the tails.
            let (lo, hi, s) = if i == 0 {
                (f64::NEG_INFINITY, pts[0], sl)
            } else if i == n {
                (pts[n - 1], f64::INFINITY, sr)
            } else {
                (pts[i - 1], pts[i], t.slope(i - 1))
            };
            if s == 0.0 {
                continue;
            }
            let y = x + s.signum() * optimal_shift(s.abs(), lam, p);
            if y > lo && y < hi {
                consider(obj(y), 1 + n + i);
            }
        }
    }
    best
}

/// Nodes of the scan that locates switches of the winning candidate.
const PWL_SCAN_NODES: usize = 4096;

/// Table points plus every point where the winning candidate changes,
/// located by a scan and bisection to machine precision. Outside the scanned
/// window a single tail candidate wins.
fn pwl_transform_breakpoints(t: &PiecewiseLinear, lam: f64, p: f64) -> Vec<f64> {
    let pts = t.points();
    let mut out = pts.to_vec();
    if lam == 0.0 || pwl_transform(t, lam, p, pts[0]).is_infinite() {
        return out;
    }
    let n = pts.len();
    let max_shift = if p > 1.0 {
        (0..n - 1)
            .map(|i| t.slope(i).abs())
            .map(|s| if s == 0.0 { 0.0 } else { optimal_shift(s, lam, p) })
            .fold(0.0, f64::max)
    } else {
        0.0
    };
    let span = pts[n - 1] - pts[0];
    let margin = 2.0 * max_shift + 0.01 * span + 1e-6;
    let (lo, hi) = (pts[0] - margin, pts[n - 1] + margin);
    let h = (hi - lo) / PWL_SCAN_NODES as f64;
    let id_at = |x: f64| pwl_transform_arg(t, lam, p, x).1;
    let mut prev = (lo, id_at(lo));
    for k in 1..=PWL_SCAN_NODES {
        let x = lo + h * k as f64;
        let id = id_at(x);
        if id != prev.1 {
            let (mut a, mut b) = (prev.0, x);
            while b - a > 1e-14 * (1.0 + a.abs()) {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if id_at(mid) == prev.1 {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev = (x, id);
    }
    out
}

/// Values of `f` on a finite support `Y`; its transform maximizes over `Y`
/// only, which is exactly the transform on the closed space `X = Y`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFn {
    support: Vec<f64>,
    values: Vec<f64>,
}

impl DiscreteFn {
    pub fn new(support: Vec<f64>, values: Vec<f64>) -> Self {
        assert_eq!(support.len(), values.len(), "support and values differ in length");
        assert!(!support.is_empty(), "DiscreteFn needs a nonempty support");
        Self { support, values }
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl RealFn for DiscreteFn {
    /// Value at a support point; off the support, the value at the nearest
    /// support point (only support points are ever integrated).
    fn eval(&self, x: f64) -> f64 {
        let k = self.support.partition_point(|&y| y < x);
        let left_closer = k > 0 && (k == self.support.len() || x - self.support[k - 1] < self.support[k] - x);
        let k = if left_closer { k - 1 } else { k };
        self.values[k]
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.support.clone()
    }
}

impl CTransform for DiscreteFn {
    fn transform_at(&self, cost: &CostFn, lambda: f64, x: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.values)
            .map(|(&y, &v)| {
                let c = cost.eval(x, y);
                // 0·c stays 0 even for λ = 0.
                if lambda == 0.0 {
                    v
                } else {
                    v - lambda * c
                }
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Search window of the generic transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Fixed(f64, f64),
    /// `[x − r, x + r]` around the evaluation point.
    Around(f64),
}

impl Domain {
    fn at(&self, x: f64) -> (f64, f64) {
        match *self {
            Domain::Fixed(a, b) => (a, b),
            Domain::Around(r) => (x - r, x + r),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformResult {
    pub value: ExtReal,
    pub argmax_hint: Option<f64>,
}

/// Two-stage grid search for `sup_y g(y)` on `[lo, hi]`: `coarse` uniform
/// nodes plus `x` and the breakpoints (and their immediate neighbours), then
/// [`GENERIC_REFINE_NODES`] nodes across the two cells around the incumbent.
fn generic_grid_max<G: RealFn + ?Sized>(g: &G, lo: f64, hi: f64, x: f64, extra: &[f64], coarse: usize) -> (f64, f64) {
    let n = coarse.max(2);
    let h = (hi - lo) / (n - 1) as f64;
    let mut best = (f64::NEG_INFINITY, x);
    let consider = |y: f64, best: &mut (f64, f64)| {
        if y >= lo && y <= hi {
            let v = g.eval(y);
            if v > best.0 || v.is_nan() {
                *best = (v, y);
            }
        }
    };
    for i in 0..n {
        consider(lo + h * i as f64, &mut best);
    }
    consider(x, &mut best);
    for &b in extra {
        let eps = 1e-12 * (1.0 + b.abs());
        consider(b, &mut best);
        consider(b - eps, &mut best);
        consider(b + eps, &mut best);
    }
    if best.0 == f64::INFINITY {
        return best;
    }
    let (a, b) = ((best.1 - h).max(lo), (best.1 + h).min(hi));
    let m = GENERIC_REFINE_NODES;
    for i in 0..m {
        consider(a + (b - a) * i as f64 / (m - 1) as f64, &mut best);
    }
    best
}

/// Numeric `f^{λc}(x)` on `domain` by two-stage grid search.
///
/// `y = x` is always a node, so the value is never below `f(x)` when `x` lies
/// in the domain.
pub fn generic_ctransform<F: RealFn + ?Sized>(
    f: &F,
    cost: &CostFn,
    lambda: f64,
    x: f64,
    domain: Domain,
    nodes: usize,
) -> TransformResult {
    let (lo, hi) = domain.at(x);
    let g = |y: f64| {
        let v = f.eval(y);
        if lambda == 0.0 {
            v
        } else {
            v - lambda * cost.eval(x, y)
        }
    };
    let (v, y) = generic_grid_max(&g, lo, hi, x, &f.breakpoints(), nodes.max(16));
    TransformResult {
        value: ExtReal::from_f64(v),
        argmax_hint: Some(y),
    }
}

/// Any function with the generic grid transform attached.
#[derive(Clone, Copy, Debug)]
pub struct GridTransform<'a, F: ?Sized> {
    pub f: &'a F,
    pub domain: Domain,
    pub nodes: usize,
}

impl<'a, F: RealFn + ?Sized> GridTransform<'a, F> {
    pub fn new(f: &'a F, domain: Domain) -> Self {
        Self {
            f,
            domain,
            nodes: GENERIC_COARSE_NODES,
        }
    }
}

impl<F: RealFn + ?Sized> RealFn for GridTransform<'_, F> {
    fn eval(&self, x: f64) -> f64 {
        self.f.eval(x)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.f.breakpoints()
    }
}

impl<F: RealFn + ?Sized> CTransform for GridTransform<'_, F> {
    fn transform_at(&self, cost: &CostFn, lambda: f64, x: f64) -> f64 {
        generic_ctransform(self.f, cost, lambda, x, self.domain, self.nodes)
            .value
            .to_f64()
    }
}

/// AV@R loss transform for `p ∈ {1, 2}`: `(1/α)(x + 1/(4λα))⁺` for `p = 2`
/// (`+∞` at `λ = 0`); `x⁺/α` when `λ >= 1/α` and `+∞` otherwise for `p = 1`.
pub fn avar_transform(alpha: f64, cost: &CostFn, lambda: f64, x: f64) -> Result<ExtReal, TransformError> {
    check_alpha(alpha)?;
    check_lambda(lambda)?;
    let p = cost.exponent();
    if p != 1.0 && p != 2.0 {
        return Err(TransformError::UnsupportedExponent(p));
    }
    if cost.cap().is_some() {
        return Err(TransformError::CappedCost);
    }
    let lam = lambda * cost.scale();
    let v = if p == 2.0 {
        if lam == 0.0 {
            f64::INFINITY
        } else {
            (x + 1.0 / (4.0 * lam * alpha)).max(0.0) / alpha
        }
    } else if lam < 1.0 / alpha {
        f64::INFINITY
    } else {
        x.max(0.0) / alpha
    };
    Ok(ExtReal::from_f64(v))
}

/// Mean-variance loss transform for the cost `(x − y)²`: `+∞` for
/// `λ <= 1/2`, else `(2λ/(2λ−1)) l(x) + 1/(4λ−2)`.
pub fn meanvar_transform(lambda: f64, x: f64) -> Result<ExtReal, TransformError> {
    check_lambda(lambda)?;
    Ok(ExtReal::from_f64(meanvar_uncapped(lambda, 2.0, x)))
}

/// V@R indicator loss transform:
/// `1_{(0,∞)}(x) + (1 − λ|x|^p) 1_{(−λ^{−1/p}, 0]}(x) − α`.
pub fn var_indicator_transform(alpha: f64, cost: &CostFn, lambda: f64, x: f64) -> Result<f64, TransformError> {
    check_alpha(alpha)?;
    check_lambda(lambda)?;
    if cost.cap().is_some() {
        return Err(TransformError::CappedCost);
    }
    let (lam, p) = folded(cost, lambda);
    Ok(var_indicator_uncapped(alpha, lam, p, x))
}

/// Transform of the hedged call `(y − k)⁺ + a(y − s)` under `c = (x − y)²/2`:
/// `(x − (k − (2a+1)/(2λ)))⁺ + a(x − s) + a²/(2λ)`.
pub fn call_payoff_transform(k: f64, s: f64, a: f64, lambda: f64, x: f64) -> Result<f64, TransformError> {
    check_lambda(lambda)?;
    if lambda == 0.0 {
        return Err(TransformError::ZeroMultiplier(lambda));
    }
    Ok((x - (k - (2.0 * a + 1.0) / (2.0 * lambda))).max(0.0) + a * (x - s) + a * a / (2.0 * lambda))
}

fn check_lambda(lambda: f64) -> Result<(), TransformError> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(TransformError::NegativeMultiplier(lambda))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(p: f64) -> CostFn {
        CostFn::power(p).unwrap()
    }

    #[test]
    fn generic_examples() {
        let f = |y: f64| (y - 1.0).powi(2).min(4.0);
        let r = generic_ctransform(&f, &c(2.0), 0.0, 0.3, Domain::Fixed(-5.0, 5.0), 1024);
        assert_eq!(r.value, ExtReal::Finite(4.0));

        let m = |_: f64| 3.0;
        for (lambda, x) in [(0.0, 0.0), (1.0, 2.0), (7.0, -1.0)] {
            let r = generic_ctransform(&m, &c(2.0), lambda, x, Domain::Around(5.0), 1024);
            assert_eq!(r.value, ExtReal::Finite(3.0));
        }

        let l = LossFn::Avar { alpha: 0.5 };
        let r = generic_ctransform(&l, &c(2.0), 1.0, 0.0, Domain::Fixed(-10.0, 10.0), 1024);
        assert!((r.value.finite().unwrap() - 1.0).abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn avar_examples() {
        // (1/α)(x + 1/(4λα))⁺ = 2·(1/2) at α = 1/2, λ = 1, x = 0.
        assert_eq!(avar_transform(0.5, &c(2.0), 1.0, 0.0).unwrap(), ExtReal::Finite(1.0));
        assert_eq!(avar_transform(0.1, &c(1.0), 5.0, 0.0).unwrap(), ExtReal::PosInf);
        assert_eq!(avar_transform(0.1, &c(1.0), 20.0, -3.0).unwrap(), ExtReal::ZERO);
        assert_eq!(avar_transform(0.1, &c(2.0), 0.0, 1.0).unwrap(), ExtReal::PosInf);
        assert!(matches!(
            avar_transform(0.1, &c(3.0), 1.0, 0.0),
            Err(TransformError::UnsupportedExponent(_))
        ));
    }

    #[test]
    fn meanvar_examples() {
        assert_eq!(meanvar_transform(0.4, 0.0).unwrap(), ExtReal::PosInf);
        assert_eq!(meanvar_transform(1.0, 0.0).unwrap(), ExtReal::Finite(0.5));
        for x in [-2.0, -0.5, 0.0, 0.7, 3.0] {
            let v = meanvar_transform(1.0, x).unwrap().finite().unwrap();
            assert!((v - (2.0 * meanvar_loss(x) + 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn var_indicator_examples() {
        assert_eq!(var_indicator_transform(0.1, &c(1.0), 3.0, 1.0).unwrap(), 0.9);
        assert_eq!(var_indicator_transform(0.1, &c(1.0), 1.0, -2.0).unwrap(), -0.1);
        assert!((var_indicator_transform(0.1, &c(1.0), 1.0, -0.5).unwrap() - 0.4).abs() < 1e-15);
        // λ = 0: the window covers the whole half-line.
        assert_eq!(var_indicator_transform(0.1, &c(2.0), 0.0, -50.0).unwrap(), 0.9);
    }

    #[test]
    fn call_examples() {
        let v = call_payoff_transform(1.0, 1.0, 0.0, 1e9, 2.0).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
        assert_eq!(call_payoff_transform(1.0, 1.0, 0.0, 1.0, 0.5).unwrap(), 0.0);
        assert!(call_payoff_transform(1.0, 1.0, 0.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn call_matches_generic_on_grid() {
        let cost = CostFn::half_quadratic();
        for a in [-1.0, 0.0, 1.0] {
            let h = move |y: f64| (y - 1.0).max(0.0) + a * (y - 1.0);
            for lambda in [0.5, 1.0, 2.0] {
                for i in 0..20 {
                    let x = 0.1 + 2.9 * i as f64 / 19.0;
                    let closed = call_payoff_transform(1.0, 1.0, a, lambda, x).unwrap();
                    let g = generic_ctransform(&h, &cost, lambda, x, Domain::Around(10.0), 1024);
                    assert!(
                        (closed - g.value.finite().unwrap()).abs() < 1e-5,
                        "a={a} λ={lambda} x={x}"
                    );
                }
            }
        }
    }

    #[test]
    fn max_affine_reproduces_call_transform() {
        let (k, s, a) = (1.1, 1.0, -0.3);
        let h = MaxAffine::new(vec![(a, -a * s), (1.0 + a, -k - a * s)]);
        let cost = CostFn::half_quadratic();
        for x in [0.2, 0.9, 1.5, 2.5] {
            let v = h.transform_at(&cost, 0.8, x);
            let w = call_payoff_transform(k, s, a, 0.8, x).unwrap();
            assert!((v - w).abs() < 1e-14);
        }
    }

    #[test]
    fn tabulated_matches_generic() {
        let t = PiecewiseLinear::new(vec![-1.0, 0.0, 0.5, 2.0], vec![1.0, 0.0, 1.0, 0.2]).unwrap();
        // Tails: slope -1 on the left (grows leftwards), -0.533 on the right.
        let l = LossFn::Tabulated(t.clone());
        for p in [1.0, 1.5, 2.0, 3.0] {
            for lambda in [1.5, 3.0, 10.0] {
                for x in [-3.0, -0.7, 0.1, 0.4, 1.2, 4.0] {
                    let exact = l.transform_at(&c(p), lambda, x);
                    let g = generic_ctransform(&t, &c(p), lambda, x, Domain::Around(12.0), 4096);
                    let g = g.value.finite().unwrap();
                    assert!(exact >= g - 1e-12, "p={p} λ={lambda} x={x}: {exact} < {g}");
                    assert!(exact - g < 1e-5, "p={p} λ={lambda} x={x}: {exact} vs {g}");
                }
            }
        }
        // Left tail slope -1 beats λ = 0.5 for p = 1.
        assert_eq!(l.transform_at(&c(1.0), 0.5, 0.0), f64::INFINITY);
    }

    #[test]
    fn scale_folds_into_multiplier() {
        let l = LossFn::Avar { alpha: 0.2 };
        let a = l.transform_at(&CostFn::new(3.0, 2.0).unwrap(), 2.0, 0.4);
        let b = l.transform_at(&c(2.0), 6.0, 0.4);
        assert_eq!(a, b);
    }

    #[test]
    fn capped_cost_makes_convex_losses_degenerate() {
        let cost = c(1.0).capped(5.0).unwrap();
        let l = LossFn::Avar { alpha: 0.1 };
        assert_eq!(l.transform_at(&cost, 100.0, 0.0), f64::INFINITY);
        let small = generic_ctransform(&l, &cost, 2.0, 0.0, Domain::Around(10.0), 1024)
            .value
            .to_f64();
        let big = generic_ctransform(&l, &cost, 2.0, 0.0, Domain::Around(100.0), 1024)
            .value
            .to_f64();
        assert!(big >= small + 1.0);
        // Bounded losses stay finite.
        let v = LossFn::VarIndicator { alpha: 0.1 };
        assert!((v.transform_at(&cost, 0.1, -100.0) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn discrete_fn_transform() {
        let f = DiscreteFn::new(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]);
        assert_eq!(f.transform_at(&c(1.0), 0.0, 0.0), 3.0);
        assert_eq!(f.transform_at(&c(1.0), 2.0, 0.0), 0.0);
        assert_eq!(f.transform_at(&c(1.0), 1.0, 0.0), 1.0);
        assert_eq!(f.eval(1.9), 3.0);
    }

    fn losses() -> Vec<LossFn> {
        vec![
            LossFn::Avar { alpha: 0.1 },
            LossFn::Avar { alpha: 0.5 },
            LossFn::MeanVar,
            LossFn::VarIndicator { alpha: 0.05 },
            LossFn::Tabulated(PiecewiseLinear::new(vec![-1.0, 0.0, 1.0], vec![0.5, 0.0, 2.0]).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn dominance(x in -5.0f64..5.0, lambda in 0.0f64..50.0, k in 0usize..5, p in prop::sample::select(vec![1.0, 2.0, 3.0])) {
            let l = &losses()[k];
            let v = l.transform_at(&c(p), lambda, x);
            prop_assert!(v >= l.eval(x) - 1e-12);
        }

        #[test]
        fn nonincreasing_in_lambda(x in -5.0f64..5.0, l1 in 0.0f64..20.0, dl in 0.0f64..20.0, k in 0usize..5, p in prop::sample::select(vec![1.0, 2.0])) {
            let l = &losses()[k];
            let a = l.transform_at(&c(p), l1, x);
            let b = l.transform_at(&c(p), l1 + dl, x);
            prop_assert!(b <= a + 1e-12);
        }

        #[test]
        fn convex_in_lambda(x in -3.0f64..3.0, l0 in 0.0f64..20.0, h in 0.01f64..2.0, k in 0usize..5, p in prop::sample::select(vec![1.0, 2.0])) {
            let l = &losses()[k];
            let v: Vec<f64> = (0..3).map(|i| l.transform_at(&c(p), l0 + h * i as f64, x)).collect();
            if v.iter().all(|t| t.is_finite()) {
                prop_assert!(v[0] - 2.0 * v[1] + v[2] >= -1e-8 * v[0].abs().max(1.0));
            }
        }

        #[test]
        fn closed_forms_match_generic(x in -3.0f64..3.0, lambda in 0.6f64..20.0, k in 0usize..5) {
            let l = &losses()[k];
            let exact = l.transform_at(&c(2.0), lambda, x);
            let g = generic_ctransform(l, &c(2.0), lambda, x, Domain::Around(20.0), 2048).value.to_f64();
            prop_assert!(exact >= g - 1e-9, "{} < {}", exact, g);
            prop_assert!(exact - g <= 1e-5, "{} vs {}", exact, g);
        }
    }
}
