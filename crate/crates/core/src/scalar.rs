//! One-dimensional search: golden section, geometric bracketing and monotone
//! bisection.
//!
//! Every robust quantity in this crate is a nest of scalar convex
//! minimizations (over the transport multiplier, the cash allocation or the
//! hedge ratio), so these routines are deliberately derivative-free: objectives
//! are routinely kinked, and may be `+∞` on part of the domain.

/// `1/φ` where `φ` is the golden ratio.
const INV_PHI: f64 = 0.618_033_988_749_894_9;

const MAX_GOLDEN_ITERS: usize = 400;
const MAX_EXPANSIONS: usize = 200;

/// Upper end of the multiplier search when the objective keeps decreasing.
pub const HALFLINE_CEILING: f64 = 1e12;

/// Outcome of a scalar minimization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub x: f64,
    /// May be `f64::INFINITY` when the objective is `+∞` everywhere probed.
    pub value: f64,
    pub evaluations: usize,
    /// Final bracket; `x` always lies inside it.
    pub bracket: (f64, f64),
    pub converged: bool,
}

/// Tracks the best point seen, so callers get `value <= f(x)` for every probe.
struct Tracked<F> {
    f: F,
    best_x: f64,
    best_value: f64,
    evaluations: usize,
}

impl<F: FnMut(f64) -> f64> Tracked<F> {
    fn new(f: F) -> Self {
        Self {
            f,
            best_x: f64::NAN,
            best_value: f64::INFINITY,
            evaluations: 0,
        }
    }

    fn eval(&mut self, x: f64) -> f64 {
        let v = (self.f)(x);
        self.evaluations += 1;
        if v < self.best_value || self.best_x.is_nan() {
            self.best_value = v;
            self.best_x = x;
        }
        v
    }

    fn finish(self, bracket: (f64, f64), converged: bool) -> Minimum {
        let x = if self.best_x.is_nan() {
            0.5 * (bracket.0 + bracket.1)
        } else {
            self.best_x
        };
        let bracket = (bracket.0.min(x), bracket.1.max(x));
        Minimum {
            x,
            value: self.best_value,
            evaluations: self.evaluations,
            bracket,
            converged,
        }
    }
}

fn width_ok(a: f64, b: f64, tol: f64) -> bool {
    (b - a).abs() <= tol + 4.0 * f64::EPSILON * a.abs().max(b.abs())
}

fn golden_core<F: FnMut(f64) -> f64>(t: &mut Tracked<F>, mut a: f64, mut b: f64, tol: f64) -> (f64, f64, bool) {
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = t.eval(c);
    let mut fd = t.eval(d);
    for _ in 0..MAX_GOLDEN_ITERS {
        if width_ok(a, b, tol) {
            return (a, b, true);
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = t.eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = t.eval(d);
        }
    }
    (a, b, width_ok(a, b, tol))
}

/// Golden-section search for a unimodal `f` on `[a, b]`, to bracket width `tol`.
///
/// The endpoints themselves are evaluated too, so a minimum sitting exactly
/// on the boundary is returned exactly.
pub fn golden_section<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Minimum {
    let mut t = Tracked::new(f);
    t.eval(a);
    t.eval(b);
    let (lo, hi, ok) = golden_core(&mut t, a, b, tol);
    t.finish((lo, hi), ok)
}

/// Minimizes a convex, everywhere-finite `f` on the real line.
///
/// Starts at `x0` with step `step`, walks downhill doubling the step until the
/// objective increases, then runs golden section on the bracket. `candidates`
/// are extra points (typically kinks of a piecewise-linear objective) checked
/// after the search so that minima at kinks come out exact.
pub fn minimize_line<F: FnMut(f64) -> f64>(f: F, x0: f64, step: f64, tol: f64, candidates: &[f64]) -> Minimum {
    let mut t = Tracked::new(f);
    let h0 = if step > 0.0 { step } else { 1.0 };
    let f0 = t.eval(x0);
    let fp = t.eval(x0 + h0);

    let (dir, mut prev, mut cur, mut fcur) = if fp < f0 {
        (1.0, x0, x0 + h0, fp)
    } else {
        let fm = t.eval(x0 - h0);
        if fm < f0 {
            (-1.0, x0, x0 - h0, fm)
        } else {
            let (lo, hi, ok) = golden_core(&mut t, x0 - h0, x0 + h0, tol);
            polish(&mut t, lo, hi, tol, candidates);
            return t.finish((lo, hi), ok);
        }
    };

    let mut h = h0;
    let mut converged = false;
    let mut next = cur;
    for _ in 0..MAX_EXPANSIONS {
        h *= 2.0;
        next = cur + dir * h;
        if !next.is_finite() || next.abs() > 1e15 {
            break;
        }
        let fnext = t.eval(next);
        if fnext >= fcur {
            converged = true;
            break;
        }
        prev = cur;
        cur = next;
        fcur = fnext;
    }
    if !converged {
        return t.finish((prev.min(cur), prev.max(cur)), false);
    }
    let (lo, hi) = (prev.min(next), prev.max(next));
    let (lo, hi, ok) = golden_core(&mut t, lo, hi, tol);
    polish(&mut t, lo, hi, tol, candidates);
    t.finish((lo, hi), ok)
}

fn polish<F: FnMut(f64) -> f64>(t: &mut Tracked<F>, lo: f64, hi: f64, tol: f64, candidates: &[f64]) {
    let margin = (hi - lo).abs() + tol;
    for &c in candidates {
        if c >= lo - margin && c <= hi + margin {
            t.eval(c);
        }
    }
}

/// Minimizes a convex extended-valued `f` on `[lo, hi]` (`hi` may be `+∞`).
///
/// The effective domain `{f < ∞}` is an interval. When `f(lo)` is infinite the
/// routine probes `lo + 2^k·tol`, `k = 0..=60`, for the first finite value and,
/// if the minimum turns out to sit at the domain edge, locates that edge by
/// bisection to machine precision. It then expands a bracket geometrically
/// from there until `f` increases, caps at `hi`, and finishes with golden
/// section. An objective that is `+∞` on every probe yields
/// `value = +∞` with `converged = true`.
pub fn minimize_halfline<F: FnMut(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Minimum {
    let mut t = Tracked::new(f);
    let hi = hi.max(lo);

    // Locate the first finite point.
    let f_lo = t.eval(lo);
    let (mut start, mut f_start, mut inf_below) = (lo, f_lo, None::<f64>);
    if !f_lo.is_finite() {
        let mut last_inf = lo;
        let mut found = false;
        for k in 0..=60 {
            let p = (lo + (2f64).powi(k) * tol).min(hi);
            let v = t.eval(p);
            if v.is_finite() {
                start = p;
                f_start = v;
                inf_below = Some(last_inf);
                found = true;
                break;
            }
            last_inf = p;
            if p >= hi {
                break;
            }
        }
        if !found {
            return t.finish((lo, hi), true);
        }
    }
    if start >= hi {
        return t.finish((start, start), true);
    }

    let x1 = (2.0 * start).max(1.0).min(hi);
    let f1 = t.eval(x1);
    if f1 >= f_start {
        // Minimum lies in [edge, x1].
        let mut left = start;
        if let Some(mut bad) = inf_below {
            let mut good = start;
            for _ in 0..200 {
                if good - bad <= 2.0 * f64::EPSILON * good.abs() {
                    break;
                }
                let mid = 0.5 * (bad + good);
                if mid <= bad || mid >= good {
                    break;
                }
                if t.eval(mid).is_finite() {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            left = good;
        }
        let (a, b, ok) = golden_core(&mut t, left, x1, tol);
        t.eval(left);
        return t.finish((a, b), ok);
    }

    // Downhill from `start`: expand geometrically.
    let (mut prev, mut cur, mut fcur) = (start, x1, f1);
    let mut h = x1 - start;
    loop {
        if cur >= hi {
            let (a, b, ok) = golden_core(&mut t, prev, hi, tol);
            t.eval(hi);
            return t.finish((a, b), ok);
        }
        h *= 2.0;
        let next = (cur + h).min(hi);
        if next > HALFLINE_CEILING {
            // Still decreasing at the ceiling: the infimum is approached at
            // infinity. Accept it when the decrease has flattened out.
            let fnext = t.eval(HALFLINE_CEILING.max(cur));
            let flat = (fcur - fnext).abs() <= tol * fcur.abs().max(1.0);
            return t.finish((cur, HALFLINE_CEILING.max(cur)), flat);
        }
        let fnext = t.eval(next);
        if fnext >= fcur {
            let (a, b, ok) = golden_core(&mut t, prev, next, tol);
            return t.finish((a, b), ok);
        }
        prev = cur;
        cur = next;
        fcur = fnext;
    }
}

/// Smallest `x` in `[lo, hi]` with `pred(x)` true, for a predicate that is
/// false below some threshold and true above it. Requires `pred(hi)`.
pub fn bisect_threshold<P: FnMut(f64) -> bool>(mut pred: P, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..400 {
        if width_ok(lo, hi, tol) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Expands `[lo, hi]` geometrically until `pred(lo)` is false and `pred(hi)`
/// is true. Returns `None` when no such bracket is found within `1e15`.
pub fn bracket_threshold<P: FnMut(f64) -> bool>(mut pred: P, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let (mut lo, mut hi) = (lo.min(hi), lo.max(hi));
    let mut width = (hi - lo).max(1.0);
    let mut hi_ok = pred(hi);
    for _ in 0..MAX_EXPANSIONS {
        if hi_ok {
            break;
        }
        lo = hi;
        hi += width;
        width *= 2.0;
        if hi.abs() > 1e15 {
            return None;
        }
        hi_ok = pred(hi);
    }
    if !hi_ok {
        return None;
    }
    let mut width = (hi - lo).max(1.0);
    for _ in 0..MAX_EXPANSIONS {
        if !pred(lo) {
            return Some((lo, hi));
        }
        hi = lo;
        lo -= width;
        width *= 2.0;
        if lo.abs() > 1e15 {
            return None;
        }
    }
    None
}
