//! Adaptive composite Gauss–Legendre quadrature.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const PANEL_POINTS: usize = 16;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const MAX_LEVELS: usize = 20;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// by Newton iteration on `P_n` from the Chebyshev-like initial guesses.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_POINTS))
}

fn panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = rule16();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// `∫_a^b f` with 16-point panels, bisecting each panel until the panel
/// estimate and the sum of its two halves agree to `tol`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = panel(&mut f, a, b);
    refine(&mut f, a, b, whole, tol, 0)
}

fn refine<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    level: usize,
) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = panel(f, a, mid);
    let right = panel(f, mid, b);
    if (left + right - whole).abs() <= tol {
        return Ok(left + right);
    }
    if level + 1 >= MAX_LEVELS {
        return Err(Error::Quadrature {
            a,
            b,
            levels: MAX_LEVELS,
        });
    }
    Ok(refine(f, a, mid, left, tol, level + 1)? + refine(f, mid, b, right, tol, level + 1)?)
}

/// `∫_0^{x_i} f` for increasing `points`, accumulated panel by panel.
pub fn cumulative<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    let mut prev = 0.0;
    for &x in points {
        debug_assert!(x >= prev, "points must be increasing");
        acc += integrate(&mut f, prev, x, tol)?;
        out.push(acc);
        prev = x;
    }
    Ok(out)
}
