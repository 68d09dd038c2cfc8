//! Single-system potential, fixed points, and the BP and potential
//! thresholds obtained by bisection on the channel parameter.

use serde::Serialize;

use crate::ensembles::ScalarSystem;
use crate::error::{Error, Result};
use crate::quadrature::{self, DEFAULT_TOL};

/// Grid size used by the threshold predicates.
pub const PREDICATE_GRID: usize = 2000;
/// Resolution of bisection and golden-section refinements in `x`.
pub const X_TOL: f64 = 1e-10;
/// A trajectory below this value counts as decoded.
pub const ZERO_LEVEL: f64 = 1e-9;
/// Iteration budget of the recursion predicate.
pub const MAX_RECURSION_ITERS: usize = 100_000;
/// Default bisection tolerance in `ε`.
pub const DEFAULT_EPS_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PotentialEval {
    pub x: f64,
    pub eps: f64,
    pub u: f64,
    pub u_prime: f64,
    /// `G(x) = ∫_0^x g`
    pub big_g: f64,
    /// `F(g(x); ε) = ∫_0^{g(x)} f(z; ε) dz`
    pub big_f: f64,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{name} = {v} is outside [0, 1]")))
    }
}

/// `U(x; ε) = x g(x) − G(x) − F(g(x); ε)` and `U'(x; ε) = (x − f(g(x); ε)) g'(x)`.
///
/// With identity `g` the closed form `G(x) = x²/2` replaces the quadrature.
pub fn potential(sys: &ScalarSystem, x: f64, eps: f64) -> Result<PotentialEval> {
    check_unit("x", x)?;
    check_unit("eps", eps)?;
    let big_g = if sys.g_is_identity() {
        0.5 * x * x
    } else {
        quadrature::integrate(|z| sys.g(z).unwrap_or(f64::NAN), 0.0, x, DEFAULT_TOL)?
    };
    finish(sys, x, eps, big_g, 0.0, 0.0)
}

/// Same as [`potential`] but always integrating `g` numerically.
pub fn potential_by_quadrature(sys: &ScalarSystem, x: f64, eps: f64) -> Result<PotentialEval> {
    check_unit("x", x)?;
    check_unit("eps", eps)?;
    let big_g = quadrature::integrate(|z| sys.g(z).unwrap_or(f64::NAN), 0.0, x, DEFAULT_TOL)?;
    finish(sys, x, eps, big_g, 0.0, 0.0)
}

/// Assemble `U` at `x` given `G(x)` and `F` already known up to `f_from`.
fn finish(sys: &ScalarSystem, x: f64, eps: f64, big_g: f64, f_from: f64, f_base: f64) -> Result<PotentialEval> {
    let gx = sys.g(x)?;
    let big_f = f_base + integrate_f(sys, eps, f_from, gx)?;
    let u = x * gx - big_g - big_f;
    let u_prime = (x - sys.f(gx, eps)?) * sys.g_derivative(x)?;
    let out = PotentialEval {
        x,
        eps,
        u,
        u_prime,
        big_g,
        big_f,
    };
    if out.u.is_nan() {
        return Err(Error::InvalidArgument(format!("potential undefined at x = {x}")));
    }
    Ok(out)
}

fn integrate_f(sys: &ScalarSystem, eps: f64, a: f64, b: f64) -> Result<f64> {
    let mut failure = None;
    let v = quadrature::integrate(
        |z| match sys.f(z.clamp(0.0, 1.0), eps) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        DEFAULT_TOL,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

fn integrate_g(sys: &ScalarSystem, a: f64, b: f64) -> Result<f64> {
    if sys.g_is_identity() {
        return Ok(0.5 * (b * b - a * a));
    }
    let mut failure = None;
    let v = quadrature::integrate(
        |z| match sys.g(z.clamp(0.0, 1.0)) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        },
        a,
        b,
        DEFAULT_TOL,
    )?;
    match failure {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// The potential on increasing points, integrating panel by panel from the
/// previous point instead of from zero.
pub fn potential_curve(sys: &ScalarSystem, eps: f64, points: &[f64]) -> Result<Vec<PotentialEval>> {
    check_unit("eps", eps)?;
    let mut out = Vec::with_capacity(points.len());
    let (mut prev_x, mut prev_gx, mut big_g, mut big_f) = (0.0, 0.0, 0.0, 0.0);
    for &x in points {
        check_unit("x", x)?;
        if x < prev_x {
            return Err(Error::InvalidArgument("curve points must be increasing".into()));
        }
        big_g += integrate_g(sys, prev_x, x)?;
        let eval = finish(sys, x, eps, big_g, prev_gx, big_f)?;
        big_f = eval.big_f;
        prev_gx = sys.g(x)?;
        prev_x = x;
        out.push(eval);
    }
    Ok(out)
}

/// Potential at `x ≥ anchor.x`, continuing the integrals from `anchor`.
fn potential_after(sys: &ScalarSystem, anchor: &PotentialEval, x: f64) -> Result<PotentialEval> {
    let big_g = anchor.big_g + integrate_g(sys, anchor.x, x)?;
    let g_anchor = sys.g(anchor.x)?;
    finish(sys, x, anchor.eps, big_g, g_anchor, anchor.big_f)
}

// ---------------------------------------------------------------------------
// fixed points

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
    /// Touching point or a point where the sign pattern is ambiguous.
    Neutral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FixedPoint {
    pub x: f64,
    pub stability: Stability,
}

/// `h(x) = f(g(x); ε) − x`
fn excess(sys: &ScalarSystem, eps: f64, x: f64) -> Result<f64> {
    Ok(sys.step(x, eps)? - x)
}

/// Bisection for the crossing of a predicate that is false at `lo` and true
/// at `hi`; returns the true end.
fn bisect_x<P: FnMut(f64) -> Result<bool>>(mut lo: f64, mut hi: f64, mut pred: P) -> Result<f64> {
    while hi - lo > X_TOL {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn classify(left: f64, right: Option<f64>) -> Stability {
    // h > 0 to the left and h < 0 to the right pulls iterates in
    match (left.partial_cmp(&0.0), right.and_then(|r| r.partial_cmp(&0.0))) {
        (Some(std::cmp::Ordering::Greater), Some(std::cmp::Ordering::Less)) => Stability::Stable,
        (Some(std::cmp::Ordering::Greater), None) => Stability::Stable,
        (Some(std::cmp::Ordering::Less), Some(std::cmp::Ordering::Greater)) => Stability::Unstable,
        (Some(std::cmp::Ordering::Less), None) => Stability::Unstable,
        _ => Stability::Neutral,
    }
}

/// Fixed points of `x ← f(g(x); ε)` located by sign changes of
/// `h(x) = f(g(x); ε) − x` on a uniform grid and refined by bisection.
/// `x = 0` is always reported first.
pub fn fixed_points(sys: &ScalarSystem, eps: f64, grid: usize) -> Result<Vec<FixedPoint>> {
    if grid < 1000 {
        return Err(Error::InvalidArgument(format!("grid {grid} must be at least 1000")));
    }
    check_unit("eps", eps)?;
    let xs: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
    let h: Vec<f64> = xs.iter().map(|&x| excess(sys, eps, x)).collect::<Result<_>>()?;
    let zero_stability = if h[1] < 0.0 {
        Stability::Stable
    } else if h[1] > 0.0 {
        Stability::Unstable
    } else {
        Stability::Neutral
    };
    let mut out = vec![FixedPoint {
        x: 0.0,
        stability: zero_stability,
    }];
    for i in 1..=grid {
        if h[i] == 0.0 {
            let right = if i < grid { Some(h[i + 1]) } else { None };
            out.push(FixedPoint {
                x: xs[i],
                stability: classify(h[i - 1], right),
            });
        } else if i < grid && h[i].signum() != h[i + 1].signum() && h[i + 1] != 0.0 {
            let positive_left = h[i] > 0.0;
            let x = bisect_x(xs[i], xs[i + 1], |x| {
                Ok((excess(sys, eps, x)? > 0.0) != positive_left)
            })?;
            out.push(FixedPoint {
                x,
                stability: if positive_left {
                    Stability::Stable
                } else {
                    Stability::Unstable
                },
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// thresholds

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub eps: f64,
    pub verdict: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdResult {
    /// Midpoint of the final bracket.
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub bracket_width: f64,
    pub iterations: usize,
    /// Every predicate evaluation in order, including the bracket ends.
    pub trace: Vec<Probe>,
}

impl ThresholdResult {
    /// Every probe with a true verdict lies below every probe with a false one.
    pub fn trace_is_monotone(&self) -> bool {
        trace_is_monotone(&self.trace)
    }
}

pub fn trace_is_monotone(trace: &[Probe]) -> bool {
    let max_true = trace
        .iter()
        .filter(|p| p.verdict)
        .map(|p| p.eps)
        .fold(f64::NEG_INFINITY, f64::max);
    let min_false = trace
        .iter()
        .filter(|p| !p.verdict)
        .map(|p| p.eps)
        .fold(f64::INFINITY, f64::min);
    max_true < min_false
}

fn check_tol(tol: f64, min: f64) -> Result<()> {
    if tol >= min && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance {tol} must lie in [{min}, 1)")))
    }
}

/// Bisection for `sup {ε : pred(ε)}` on `[lo, hi]`. Both ends are probed; a
/// false lower end or a true upper end collapses the answer to that end.
pub fn bisect_threshold<P>(lo: f64, hi: f64, tol: f64, mut pred: P) -> Result<ThresholdResult>
where
    P: FnMut(f64) -> Result<bool>,
{
    let mut trace = Vec::new();
    let mut probe = |eps: f64, trace: &mut Vec<Probe>| -> Result<bool> {
        let verdict = pred(eps)?;
        trace.push(Probe { eps, verdict });
        Ok(verdict)
    };
    let done = |value: f64, lower: f64, upper: f64, trace: Vec<Probe>| ThresholdResult {
        value,
        lower,
        upper,
        bracket_width: upper - lower,
        iterations: trace.len(),
        trace,
    };
    if probe(hi, &mut trace)? {
        return Ok(done(hi, hi, hi, trace));
    }
    if !probe(lo, &mut trace)? {
        return Ok(done(lo, lo, lo, trace));
    }
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid, &mut trace)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(done(0.5 * (lo + hi), lo, hi, trace))
}

/// Minimum over `(0, 1]` of `x − f(g(x); ε)` on a uniform grid, refined by
/// golden section around the grid minimizer. Returns `(x_min, value)`.
pub fn min_gap(sys: &ScalarSystem, eps: f64, grid: usize) -> Result<(f64, f64)> {
    let gap = |x: f64| -> Result<f64> { Ok(x - sys.step(x, eps)?) };
    let xs: Vec<f64> = (1..=grid).map(|i| i as f64 / grid as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| gap(x)).collect::<Result<_>>()?;
    let (i, _) = vals
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &v)| if v < best.1 { (i, v) } else { best });
    let lo = if i == 0 { 0.0 } else { xs[i - 1] };
    let hi = xs[(i + 1).min(grid - 1)];
    let (x, v) = golden_min(lo.max(1e-12), hi, gap)?;
    Ok(if v < vals[i] { (x, v) } else { (xs[i], vals[i]) })
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
fn golden_min<F: FnMut(f64) -> Result<f64>>(mut a: f64, mut b: f64, mut f: F) -> Result<(f64, f64)> {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > X_TOL {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

/// Whether the recursion from `x = 1` falls below [`ZERO_LEVEL`] within
/// `max_iters` iterations. Stops early once the iterate stops decreasing.
pub fn recursion_decodes(sys: &ScalarSystem, eps: f64, max_iters: usize) -> Result<bool> {
    let mut x = 1.0;
    for _ in 0..max_iters {
        let next = sys.step(x, eps)?;
        if next < ZERO_LEVEL {
            return Ok(true);
        }
        if next >= x {
            return Ok(false);
        }
        x = next;
    }
    Ok(false)
}

/// `ε^BP`: largest `ε` without a nonzero fixed point. Each probe is decided
/// by the grid minimum of `x − f(g(x); ε)` and by running the recursion; the
/// two must agree (after one retry on a ten times finer grid).
pub fn bp_threshold(sys: &ScalarSystem, tol: f64) -> Result<ThresholdResult> {
    check_tol(tol, 1e-8)?;
    bisect_threshold(0.0, 1.0, tol, |eps| bp_predicate(sys, eps))
}

/// The BP probe at one `ε`: `true` when the recursion decodes.
pub fn bp_predicate(sys: &ScalarSystem, eps: f64) -> Result<bool> {
    let by_iteration = recursion_decodes(sys, eps, MAX_RECURSION_ITERS)?;
    let (_, gap) = min_gap(sys, eps, PREDICATE_GRID)?;
    if (gap > 0.0) == by_iteration {
        return Ok(by_iteration);
    }
    let (x, gap) = min_gap(sys, eps, 10 * PREDICATE_GRID)?;
    if (gap > 0.0) == by_iteration {
        return Ok(by_iteration);
    }
    Err(Error::PredicateDisagreement {
        eps,
        detail: format!(
            "grid minimum of x - f(g(x)) is {gap:e} at x = {x}, recursion {}",
            if by_iteration { "decodes" } else { "gets stuck" }
        ),
    })
}

/// `u(ε)`: the smallest `x > 0` with `f(g(x); ε) ≥ x`, or `None` when
/// `f(g(x); ε) < x` on all of `(0, 1]`.
pub fn min_unstable_fixed_point(sys: &ScalarSystem, eps: f64) -> Result<Option<f64>> {
    check_unit("eps", eps)?;
    let reached = |x: f64| -> Result<bool> { Ok(sys.step(x, eps)? >= x) };
    let n = PREDICATE_GRID;
    for i in 1..=n {
        let x = i as f64 / n as f64;
        if reached(x)? {
            if i == 1 {
                return Ok(Some(x));
            }
            return bisect_x((i - 1) as f64 / n as f64, x, reached).map(Some);
        }
    }
    Ok(None)
}

/// Minimum of `U(·; ε)` over `[u, 1]` by grid and golden-section refinement.
pub fn min_potential_above(sys: &ScalarSystem, eps: f64, u: f64) -> Result<PotentialEval> {
    let n = PREDICATE_GRID;
    let xs: Vec<f64> = (0..n).map(|i| u + (1.0 - u) * i as f64 / (n - 1) as f64).collect();
    let curve = potential_curve(sys, eps, &xs)?;
    let (i, best) = curve
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.u.total_cmp(&b.1.u))
        .map(|(i, e)| (i, *e))
        .expect("grid is not empty");
    let anchor = curve[i.saturating_sub(1)];
    let hi = xs[(i + 1).min(n - 1)];
    let mut evals = Vec::new();
    golden_min(anchor.x, hi, |x| {
        let e = potential_after(sys, &anchor, x)?;
        evals.push(e);
        Ok(e.u)
    })?;
    Ok(evals.into_iter().fold(best, |b, e| if e.u < b.u { e } else { b }))
}

/// Outcome of one potential-threshold probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PotentialProbe {
    pub eps: f64,
    pub u: Option<f64>,
    pub min_potential: Option<PotentialEval>,
    pub verdict: bool,
}

/// The potential-threshold probe: true when `u(ε)` is undefined (no nonzero
/// fixed point, so the condition is vacuous) or when `u(ε) > 0` and
/// `U(·; ε) > 0` on `[u(ε), 1]`.
pub fn potential_predicate(sys: &ScalarSystem, eps: f64) -> Result<PotentialProbe> {
    let u = min_unstable_fixed_point(sys, eps)?;
    let (min_potential, verdict) = match u {
        None => (None, true),
        Some(u) => {
            let m = min_potential_above(sys, eps, u)?;
            (Some(m), u > 0.0 && m.u > 0.0)
        }
    };
    Ok(PotentialProbe {
        eps,
        u,
        min_potential,
        verdict,
    })
}

/// `ε*`: bisection over `[ε^BP, 1]` with [`potential_predicate`].
pub fn potential_threshold(sys: &ScalarSystem, tol: f64) -> Result<ThresholdResult> {
    check_tol(tol, 1e-8)?;
    let bp = bp_threshold(sys, tol)?;
    potential_threshold_from(sys, bp.lower, tol)
}

/// Same as [`potential_threshold`] with a known lower bracket end.
pub fn potential_threshold_from(sys: &ScalarSystem, lower: f64, tol: f64) -> Result<ThresholdResult> {
    check_tol(tol, 1e-8)?;
    bisect_threshold(lower, 1.0, tol, |eps| Ok(potential_predicate(sys, eps)?.verdict))
}
