//! Spatially coupled chains of a scalar system: positions `1..=L` coupled
//! with uniform weights `1/(1+m)` and known (zero) values outside the chain.
//!
//! One synchronous step is
//! `y_τ = mean_{j=0..m} g(x_{τ-j})` for `τ = 1..=L+m`, then
//! `x_t = mean_{k=0..m} f(y_{t+k}; ε)`.

use serde::Serialize;

use crate::ensembles::ScalarSystem;
use crate::error::{Error, Result};
use crate::potential::{bisect_threshold, ThresholdResult, ZERO_LEVEL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CouplingSpec {
    /// Number of positions `L`.
    pub length: usize,
    /// Coupling memory `m`.
    pub memory: usize,
}

impl CouplingSpec {
    pub fn new(length: usize, memory: usize) -> Result<Self> {
        if length == 0 {
            return Err(Error::InvalidArgument("coupling length must be at least 1".into()));
        }
        if memory > length {
            return Err(Error::InvalidArgument(format!(
                "coupling memory {memory} exceeds length {length}"
            )));
        }
        Ok(CouplingSpec { length, memory })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WaveState {
    /// `profile[t - 1]` is the erasure probability at position `t`.
    pub profile: Vec<f64>,
    pub iteration: usize,
}

impl WaveState {
    pub fn ones(spec: &CouplingSpec) -> Self {
        WaveState {
            profile: vec![1.0; spec.length],
            iteration: 0,
        }
    }

    /// Value at position `t` (1-based); zero outside the chain.
    pub fn at(&self, t: isize) -> f64 {
        if t >= 1 && (t as usize) <= self.profile.len() {
            self.profile[t as usize - 1]
        } else {
            0.0
        }
    }

    pub fn max(&self) -> f64 {
        self.profile.iter().copied().fold(0.0, f64::max)
    }
}

/// Mean of `values`, summed in ascending order so that the result does not
/// depend on the order of the terms (keeps mirrored positions bit-identical).
fn sorted_mean(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// One synchronous update of every position.
pub fn coupled_step(sys: &ScalarSystem, spec: &CouplingSpec, state: &WaveState, eps: f64) -> Result<WaveState> {
    let (l, m) = (spec.length, spec.memory);
    if state.profile.len() != l {
        return Err(Error::InvalidArgument(format!(
            "profile has {} positions, coupling length is {l}",
            state.profile.len()
        )));
    }
    let gx: Vec<f64> = state.profile.iter().map(|&x| sys.g(x)).collect::<Result<_>>()?;
    let g_at = |t: isize| if t >= 1 && t as usize <= l { gx[t as usize - 1] } else { 0.0 };
    let mut terms = vec![0.0; m + 1];
    // fy[τ - 1] = f(y_τ; ε) for τ = 1..=L+m
    let mut fy = Vec::with_capacity(l + m);
    for tau in 1..=(l + m) as isize {
        for (j, term) in terms.iter_mut().enumerate() {
            *term = g_at(tau - j as isize);
        }
        fy.push(sys.f(sorted_mean(&mut terms), eps)?);
    }
    let profile = (0..l)
        .map(|t| {
            terms.copy_from_slice(&fy[t..t + m + 1]);
            sorted_mean(&mut terms)
        })
        .collect();
    Ok(WaveState {
        profile,
        iteration: state.iteration + 1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IterationLimits {
    pub max_iter: usize,
    /// Max-norm change between iterations that counts as converged.
    pub conv_tol: f64,
}

impl Default for IterationLimits {
    fn default() -> Self {
        IterationLimits {
            max_iter: 100_000,
            conv_tol: 1e-10,
        }
    }
}

/// Profiles whose maximum is below this level are still decaying towards
/// zero, so a small change there is not taken as convergence.
const STALL_LEVEL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoupledOutcome {
    pub state: WaveState,
    pub converged_to_zero: bool,
    pub iterations: usize,
}

/// Iterate from the all-ones profile until every position is below
/// [`ZERO_LEVEL`] or the profile stops changing.
pub fn coupled_fixed_point(
    sys: &ScalarSystem,
    spec: &CouplingSpec,
    eps: f64,
    limits: &IterationLimits,
) -> Result<CoupledOutcome> {
    run(sys, spec, eps, limits, |_| {})
}

fn run<S: FnMut(&WaveState)>(
    sys: &ScalarSystem,
    spec: &CouplingSpec,
    eps: f64,
    limits: &IterationLimits,
    mut on_step: S,
) -> Result<CoupledOutcome> {
    if limits.max_iter == 0 || limits.conv_tol <= 0.0 {
        return Err(Error::InvalidArgument(
            "max_iter must be positive and conv_tol strictly positive".into(),
        ));
    }
    let mut state = WaveState::ones(spec);
    let mut last_change = f64::INFINITY;
    for _ in 0..limits.max_iter {
        let next = coupled_step(sys, spec, &state, eps)?;
        last_change = next
            .profile
            .iter()
            .zip(&state.profile)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        state = next;
        on_step(&state);
        let top = state.max();
        if top < ZERO_LEVEL || (last_change < limits.conv_tol && top >= STALL_LEVEL) {
            return Ok(CoupledOutcome {
                converged_to_zero: top < ZERO_LEVEL,
                iterations: state.iteration,
                state,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "coupled recursion",
        iterations: limits.max_iter,
        last_change,
    })
}

/// Largest `ε` for which the coupled recursion decodes, by bisection on
/// `[0, 1]`.
pub fn coupled_threshold(
    sys: &ScalarSystem,
    spec: &CouplingSpec,
    tol: f64,
    limits: &IterationLimits,
) -> Result<ThresholdResult> {
    coupled_threshold_in(sys, spec, 0.0, 1.0, tol, limits)
}

/// Same as [`coupled_threshold`] on the bracket `[lo, hi]`.
pub fn coupled_threshold_in(
    sys: &ScalarSystem,
    spec: &CouplingSpec,
    lo: f64,
    hi: f64,
    tol: f64,
    limits: &IterationLimits,
) -> Result<ThresholdResult> {
    if !(1e-6..1.0).contains(&tol) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must lie in [1e-6, 1)")));
    }
    let result = bisect_threshold(lo, hi, tol, |eps| {
        Ok(coupled_fixed_point(sys, spec, eps, limits)?.converged_to_zero)
    })?;
    if !result.trace_is_monotone() {
        return Err(Error::NonMonotoneTrace(format!("{:?}", result.trace)));
    }
    Ok(result)
}

/// Snapshots of the profile at every `every`-th iteration, plus the final
/// profile.
pub fn wave_profile_series(
    sys: &ScalarSystem,
    spec: &CouplingSpec,
    eps: f64,
    every: usize,
    limits: &IterationLimits,
) -> Result<Vec<WaveState>> {
    if every == 0 {
        return Err(Error::InvalidArgument("snapshot interval must be at least 1".into()));
    }
    let mut snapshots = Vec::new();
    let outcome = run(sys, spec, eps, limits, |s| {
        if s.iteration % every == 0 {
            snapshots.push(s.clone());
        }
    })?;
    if snapshots.last().map(|s| s.iteration) != Some(outcome.state.iteration) {
        snapshots.push(outcome.state);
    }
    Ok(snapshots)
}
