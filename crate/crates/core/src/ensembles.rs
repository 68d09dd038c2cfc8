//! Scalar admissible systems `(f, g)` of the PCC, SCC and BCC ensembles with
//! identical component encoders, and the un-collapsed vector density
//! evolution they reduce to.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::transfer::{StreamProbs, TransferFunction};
use crate::trellis::StreamRole;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Pcc,
    Scc,
    Bcc,
    Custom,
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ensemble::Pcc => "pcc",
            Ensemble::Scc => "scc",
            Ensemble::Bcc => "bcc",
            Ensemble::Custom => "custom",
        })
    }
}

impl std::str::FromStr for Ensemble {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pcc" => Ok(Ensemble::Pcc),
            "scc" => Ok(Ensemble::Scc),
            "bcc" => Ok(Ensemble::Bcc),
            other => Err(Error::InvalidArgument(format!(
                "unknown ensemble '{other}' (expected pcc, scc or bcc)"
            ))),
        }
    }
}

type FFn = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;
type GFn = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Step of the centered difference used for `g'` when `g` is not the identity.
pub const G_DIFF_STEP: f64 = 1e-6;

/// A scalar admissible system: recursion `x ← f(g(x); ε)`.
#[derive(Clone)]
pub struct ScalarSystem {
    ensemble: Ensemble,
    name: String,
    f: FFn,
    /// `None` means `g(x) = x`
    g: Option<GFn>,
    transfer: Option<Arc<TransferFunction>>,
}

impl fmt::Debug for ScalarSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarSystem")
            .field("ensemble", &self.ensemble)
            .field("name", &self.name)
            .field("g_identity", &self.g.is_none())
            .finish()
    }
}

impl ScalarSystem {
    /// A system from plain closures; `g = None` selects the identity.
    pub fn custom<F, G>(name: &str, f: F, g: Option<G>) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScalarSystem {
            ensemble: Ensemble::Custom,
            name: name.to_string(),
            f: Arc::new(move |x, e| Ok(f(x, e))),
            g: g.map(|g| Arc::new(move |x| Ok(g(x))) as GFn),
            transfer: None,
        }
    }

    pub fn ensemble(&self) -> Ensemble {
        self.ensemble
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn transfer(&self) -> Option<&Arc<TransferFunction>> {
        self.transfer.as_ref()
    }

    pub fn g_is_identity(&self) -> bool {
        self.g.is_none()
    }

    pub fn f(&self, x: f64, eps: f64) -> Result<f64> {
        (self.f)(x, eps)
    }

    pub fn g(&self, x: f64) -> Result<f64> {
        match &self.g {
            None => Ok(x),
            Some(g) => g(x),
        }
    }

    /// `g'(x)`: exactly 1 for the identity, otherwise a centered difference
    /// (one-sided within one step of the interval ends).
    pub fn g_derivative(&self, x: f64) -> Result<f64> {
        match &self.g {
            None => Ok(1.0),
            Some(g) => {
                let h = G_DIFF_STEP;
                let lo = (x - h).max(0.0);
                let hi = (x + h).min(1.0);
                Ok((g(hi)? - g(lo)?) / (hi - lo))
            }
        }
    }

    /// One step of the uncoupled recursion.
    pub fn step(&self, x: f64, eps: f64) -> Result<f64> {
        self.f(self.g(x)?, eps)
    }

    /// `iters + 1` iterates starting at `x0`.
    pub fn trajectory(&self, x0: f64, eps: f64, iters: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(iters + 1);
        let mut x = x0;
        out.push(x);
        for _ in 0..iters {
            x = self.step(x, eps)?;
            out.push(x);
        }
        Ok(out)
    }
}

fn check_layout(tf: &TransferFunction, inputs: usize, parities: usize, what: &str) -> Result<()> {
    let layout = tf.trellis().layout();
    if layout.input_count() != inputs || layout.parity_count() != parities {
        return Err(Error::UnsupportedTrellis(format!(
            "{what} needs {inputs} input and {parities} parity stream(s); '{}' has {} and {}",
            tf.trellis().generator().text(),
            layout.input_count(),
            layout.parity_count()
        )));
    }
    debug_assert_eq!(layout.streams()[0].role, StreamRole::Input);
    Ok(())
}

fn probs(v: Vec<f64>) -> Result<StreamProbs> {
    StreamProbs::clamped(v)
}

/// PCC: `f(x; ε) = f_s(ε x, ε)`, `g(x) = x`.
pub fn pcc_system(tf: Arc<TransferFunction>) -> Result<ScalarSystem> {
    check_layout(&tf, 1, 1, "a PCC component")?;
    let t = tf.clone();
    Ok(ScalarSystem {
        ensemble: Ensemble::Pcc,
        name: format!("pcc {}", tf.trellis().generator().text()),
        f: Arc::new(move |x, eps| Ok(t.extrinsic(&probs(vec![eps * x, eps])?)?[0])),
        g: None,
        transfer: Some(tf),
    })
}

/// SCC: `f(y; ε) = ε f_s(ε y, ε)` and `g(x) = (f_s(x, x) + f_p(x, x)) / 2`,
/// so that `x ← f(g(x); ε)` is the serial recursion with identical inner and
/// outer codes.
pub fn scc_system(tf: Arc<TransferFunction>) -> Result<ScalarSystem> {
    check_layout(&tf, 1, 1, "an SCC component")?;
    let tf_f = tf.clone();
    let tf_g = tf.clone();
    Ok(ScalarSystem {
        ensemble: Ensemble::Scc,
        name: format!("scc {}", tf.trellis().generator().text()),
        f: Arc::new(move |y, eps| Ok(eps * tf_f.extrinsic(&probs(vec![eps * y, eps])?)?[0])),
        g: Some(Arc::new(move |x| {
            let out = tf_g.extrinsic(&probs(vec![x, x])?)?;
            Ok((out[0] + out[1]) / 2.0)
        })),
        transfer: Some(tf),
    })
}

/// BCC: `f(x; ε) = f_ave(ε x, ε x, ε x)` with `f_ave` the mean of the three
/// per-edge transfer functions, `g(x) = x`.
pub fn bcc_system(tf: Arc<TransferFunction>) -> Result<ScalarSystem> {
    check_layout(&tf, 2, 1, "a BCC component")?;
    let t = tf.clone();
    Ok(ScalarSystem {
        ensemble: Ensemble::Bcc,
        name: format!("bcc {}", tf.trellis().generator().text()),
        f: Arc::new(move |x, eps| {
            let q = eps * x;
            let out = t.extrinsic(&probs(vec![q, q, q])?)?;
            Ok((out[0] + out[1] + out[2]) / 3.0)
        }),
        g: None,
        transfer: Some(tf),
    })
}

/// Build the system of `ensemble` from a generator description.
pub fn build_system(ensemble: Ensemble, generator: &str) -> Result<ScalarSystem> {
    let tf = Arc::new(TransferFunction::from_generator(generator)?);
    match ensemble {
        Ensemble::Pcc => pcc_system(tf),
        Ensemble::Scc => scc_system(tf),
        Ensemble::Bcc => bcc_system(tf),
        Ensemble::Custom => Err(Error::InvalidArgument(
            "custom systems are built from closures".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// vector density evolution, written per component node

/// Two-node PCC recursion `p_U ← f_s(ε p_L, ε)`, `p_L ← f_s(ε p_U, ε)` from
/// `p_U = p_L = 1`. Returns the `p_U` trajectory.
pub fn pcc_vector_de(tf: &TransferFunction, eps: f64, iters: usize) -> Result<Vec<f64>> {
    check_layout(tf, 1, 1, "a PCC component")?;
    let (mut p_upper, mut p_lower) = (1.0, 1.0);
    let mut out = vec![p_upper];
    for _ in 0..iters {
        let q_lower = eps * p_lower;
        let q_upper = eps * p_upper;
        let next_upper = tf.extrinsic(&probs(vec![q_lower, eps])?)?[0];
        let next_lower = tf.extrinsic(&probs(vec![q_upper, eps])?)?[0];
        p_upper = next_upper;
        p_lower = next_lower;
        out.push(p_upper);
    }
    Ok(out)
}

/// Serial recursion through the outer and inner decoders. The state is the
/// erasure probability `q_I` entering the outer decoder, started at `q_i0`;
/// returns the `q_I` trajectory.
pub fn scc_vector_de(tf: &TransferFunction, eps: f64, q_i0: f64, iters: usize) -> Result<Vec<f64>> {
    check_layout(tf, 1, 1, "an SCC component")?;
    let mut q_inner = q_i0;
    let mut out = vec![q_inner];
    for _ in 0..iters {
        // outer decoder sees q_I on both its streams
        let outer = tf.extrinsic(&probs(vec![q_inner, q_inner])?)?;
        let (p_outer_s, p_outer_p) = (outer[0], outer[1]);
        let q_outer = eps * ((p_outer_s + p_outer_p) / 2.0);
        // inner decoder: a-priori q_O on its input, channel on its parity
        let p_inner_s = tf.extrinsic(&probs(vec![q_outer, eps])?)?[0];
        q_inner = eps * p_inner_s;
        out.push(q_inner);
    }
    Ok(out)
}

/// Per-edge transfer of a component whose symbol order along the branches
/// rotates periodically over the three edges: the average over the three
/// rotations of the time-invariant per-stream outputs.
pub fn rotated_edge_transfer(tf: &TransferFunction, edge_probs: [f64; 3]) -> Result<[f64; 3]> {
    let mut acc = [0.0; 3];
    for r in 0..3 {
        // at phase r, edge k sits on trellis stream (k + r) mod 3
        let mut stream_probs = vec![0.0; 3];
        for (k, &p) in edge_probs.iter().enumerate() {
            stream_probs[(k + r) % 3] = p;
        }
        let out = tf.extrinsic(&probs(stream_probs)?)?;
        for (k, a) in acc.iter_mut().enumerate() {
            *a += out[(k + r) % 3];
        }
    }
    Ok(acc.map(|a| a / 3.0))
}

/// Three-edge BCC recursion with identical upper and lower nodes:
/// `x_k ← F_k(ε x_1, ε x_3, ε x_2)`, where edge 2 of one node is fed by edge
/// 3 of the other and vice versa. Returns the trajectory of all three edges.
pub fn bcc_vector_de(tf: &TransferFunction, eps: f64, iters: usize) -> Result<Vec<[f64; 3]>> {
    check_layout(tf, 2, 1, "a BCC component")?;
    let mut x = [1.0; 3];
    let mut out = vec![x];
    for _ in 0..iters {
        x = rotated_edge_transfer(tf, [eps * x[0], eps * x[2], eps * x[1]])?;
        out.push(x);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// admissibility

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionResult {
    pub name: &'static str,
    pub pass: bool,
    /// Largest violation found (0 when none), or the growth ratio for the
    /// smoothness proxy.
    pub worst: f64,
    pub limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub system: String,
    pub grid_size: usize,
    pub conditions: Vec<ConditionResult>,
}

impl AdmissibilityReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Tolerance for monotonicity and zero conditions on sampled grids.
pub const GRID_TOL: f64 = 1e-12;

/// Limit on the growth of the largest `|Δ²f| / h²` when the stencil width is
/// halved at the same interior centres. For a twice differentiable function
/// the ratio tends to 1; a kink doubles it and a jump quadruples it.
pub const SECOND_DIFF_GROWTH_LIMIT: f64 = 1.5;

/// Largest second difference below which the growth ratio is not meaningful
/// (functions that are linear on the grid).
const SECOND_DIFF_FLOOR: f64 = 1e-9;

/// Evaluate the conditions defining a scalar admissible system on a
/// `grid_size × grid_size` grid over `[0, 1]^2`.
pub fn check_admissible(sys: &ScalarSystem, grid_size: usize) -> Result<AdmissibilityReport> {
    if grid_size < 11 {
        return Err(Error::InvalidArgument(format!(
            "grid_size {grid_size} must be at least 11"
        )));
    }
    let n = grid_size;
    let h = 1.0 / (n - 1) as f64;
    let pts: Vec<f64> = (0..n).map(|i| i as f64 * h).collect();
    // f[i][j] = f(x_i; eps_j)
    let mut f = vec![vec![0.0; n]; n];
    for (i, &x) in pts.iter().enumerate() {
        for (j, &e) in pts.iter().enumerate() {
            f[i][j] = sys.f(x, e)?;
        }
    }
    let g: Vec<f64> = pts.iter().map(|&x| sys.g(x)).collect::<Result<_>>()?;

    let mut dec_x: f64 = 0.0;
    let mut dec_e: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i + 1 < n {
                dec_x = dec_x.max(f[i][j] - f[i + 1][j]);
            }
            if j + 1 < n {
                dec_e = dec_e.max(f[i][j] - f[i][j + 1]);
            }
        }
    }
    let dec_g = g.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);

    let mut zero: f64 = g[0].abs();
    for k in 0..n {
        zero = zero.max(f[0][k].abs()).max(f[k][0].abs());
    }

    // second differences at the interior grid centres with stencil width
    // `step`, scaled by `step^2`
    let second = |step: f64| -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &x in &pts[1..n - 1] {
            for &e in &pts[1..n - 1] {
                let c = sys.f(x, e)?;
                let dxx = sys.f(x + step, e)? - 2.0 * c + sys.f(x - step, e)?;
                let dee = sys.f(x, e + step)? - 2.0 * c + sys.f(x, e - step)?;
                worst = worst.max(dxx.abs()).max(dee.abs());
            }
            let dgg = sys.g(x + step)? - 2.0 * sys.g(x)? + sys.g(x - step)?;
            worst = worst.max(dgg.abs());
        }
        Ok(worst / (step * step))
    };
    let coarse = second(h)?;
    let fine = second(0.5 * h)?;
    let growth = if fine <= SECOND_DIFF_FLOOR {
        0.0
    } else {
        fine / coarse.max(SECOND_DIFF_FLOOR)
    };

    let cond = |name, worst: f64, limit: f64| ConditionResult {
        name,
        pass: worst <= limit,
        worst,
        limit,
    };
    Ok(AdmissibilityReport {
        system: sys.name().to_string(),
        grid_size,
        conditions: vec![
            cond("f increasing in x", dec_x, GRID_TOL),
            cond("f increasing in eps", dec_e, GRID_TOL),
            cond("g increasing", dec_g, GRID_TOL),
            cond("zero conditions", zero, GRID_TOL),
            cond("bounded second differences", growth, SECOND_DIFF_GROWTH_LIMIT),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tf(gen: &str) -> Arc<TransferFunction> {
        Arc::new(TransferFunction::from_generator(gen).unwrap())
    }

    #[test]
    fn pcc_zero_conditions() {
        let sys = pcc_system(tf("1,5/7")).unwrap();
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(sys.f(x, 0.0).unwrap(), 0.0);
            assert_eq!(sys.f(0.0, x).unwrap(), 0.0);
        }
        assert_eq!(sys.f(1.0, 1.0).unwrap(), 1.0);
        assert!(sys.g_is_identity());
        assert_eq!(sys.g_derivative(0.4).unwrap(), 1.0);
    }

    #[test]
    fn scc_g_endpoints() {
        let sys = scc_system(tf("1,5/7")).unwrap();
        assert_eq!(sys.g(0.0).unwrap(), 0.0);
        assert_eq!(sys.g(1.0).unwrap(), 1.0);
        for i in 0..=20 {
            let v = sys.g(i as f64 / 20.0).unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn bcc_zero_conditions() {
        let sys = bcc_system(tf("1 0 1/7; 0 1 5/7")).unwrap();
        assert_eq!(sys.f(0.7, 0.0).unwrap(), 0.0);
        assert_eq!(sys.f(0.0, 0.7).unwrap(), 0.0);
    }

    #[test]
    fn arity_is_checked() {
        assert!(pcc_system(tf("1 0 1/7; 0 1 5/7")).is_err());
        assert!(scc_system(tf("1 0 1/7; 0 1 5/7")).is_err());
        assert!(bcc_system(tf("1,5/7")).is_err());
    }

    #[test]
    fn corrupted_f_fails_zero_condition() {
        let pcc = pcc_system(tf("1,5/7")).unwrap();
        let sys = ScalarSystem::custom(
            "pcc minus 0.1",
            move |x: f64, e: f64| (pcc.f(x, e).unwrap() - 0.1).min(1.0),
            None::<fn(f64) -> f64>,
        );
        let report = check_admissible(&sys, 21).unwrap();
        let zero = report.condition("zero conditions").unwrap();
        assert!(!zero.pass);
        assert!((zero.worst - 0.1).abs() < 1e-12);
    }

    #[test]
    fn identity_g_is_monotone_exactly() {
        let sys = ScalarSystem::custom("quad", |x: f64, e: f64| x * x * e, None::<fn(f64) -> f64>);
        let report = check_admissible(&sys, 21).unwrap();
        let g = report.condition("g increasing").unwrap();
        assert!(g.pass);
        assert_eq!(g.worst, 0.0);
        assert!(report.all_pass());
    }

    #[test]
    fn jump_fails_smoothness() {
        let sys = ScalarSystem::custom(
            "jump",
            |x: f64, e: f64| 0.5 * x * e + if x > 0.52 { 0.3 * e } else { 0.0 },
            None::<fn(f64) -> f64>,
        );
        let report = check_admissible(&sys, 21).unwrap();
        let smooth = report.condition("bounded second differences").unwrap();
        assert!(!smooth.pass);
        assert!((smooth.worst - 4.0).abs() < 1e-6);
    }

    #[test]
    fn ensembles_are_admissible() {
        for (e, gen) in [
            (Ensemble::Pcc, "1,5/7"),
            (Ensemble::Scc, "1,5/7"),
            (Ensemble::Bcc, "1 0 1/7; 0 1 5/7"),
        ] {
            let report = check_admissible(&build_system(e, gen).unwrap(), 21).unwrap();
            assert!(report.all_pass(), "{report:?}");
        }
    }

    #[test]
    fn small_grid_rejected() {
        let sys = ScalarSystem::custom("quad", |x: f64, e: f64| x * e, None::<fn(f64) -> f64>);
        assert!(check_admissible(&sys, 5).is_err());
    }

    #[test]
    fn parse_ensemble() {
        assert_eq!("PCC".parse::<Ensemble>().unwrap(), Ensemble::Pcc);
        assert!("ldpc".parse::<Ensemble>().is_err());
    }
}
