//! Monte-Carlo estimate of extrinsic erasure rates by explicit decoding.
//!
//! Each trial erases the all-zero codeword of a terminated trellis and runs
//! forward and backward passes over explicit sets of states, then counts a
//! symbol as extrinsically erased when the consistent branches of its section
//! (ignoring the symbol's own observation) disagree on it. No subspace
//! algebra is involved, so the result is an independent check of
//! [`crate::transfer`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::transfer::StreamProbs;
use crate::trellis::Trellis;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub sections: usize,
    pub trials: usize,
    pub seed: u64,
    /// Central fraction of sections that is measured.
    pub measure_window: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            sections: 2000,
            trials: 200,
            seed: 0,
            measure_window: 0.5,
        }
    }
}

impl McConfig {
    pub fn with_seed(seed: u64) -> Self {
        McConfig {
            seed,
            ..Default::default()
        }
    }

    /// Measured section range `[start, end)`.
    pub fn window(&self) -> (usize, usize) {
        let measured = ((self.sections as f64) * self.measure_window).round() as usize;
        let start = (self.sections - measured) / 2;
        (start, start + measured)
    }

    pub fn validate(&self, memory: usize) -> Result<()> {
        if self.sections < 4 * memory.max(1) {
            return Err(Error::InvalidArgument(format!(
                "sections {} must be at least 4 x memory {}",
                self.sections, memory
            )));
        }
        if self.trials < 10 {
            return Err(Error::InvalidArgument(format!(
                "trials {} must be at least 10",
                self.trials
            )));
        }
        if !(self.measure_window > 0.0 && self.measure_window <= 1.0) {
            return Err(Error::InvalidArgument("measure_window must be in (0, 1]".into()));
        }
        let (start, end) = self.window();
        if start < memory || self.sections - end < memory || end <= start {
            return Err(Error::InvalidArgument(format!(
                "measurement window [{start}, {end}) must leave at least {memory} sections at each end"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: Vec<f64>,
    /// Standard error from the spread of per-trial means; trials are
    /// independent, sections within a trial are not.
    pub stderr: Vec<f64>,
    /// `sqrt(p(1-p)/samples)`, which treats every measured section as an
    /// independent sample and therefore understates the error.
    pub binomial_stderr: Vec<f64>,
    pub samples: u64,
}

/// Derive an independent per-trial seed from `(seed, trial)` (splitmix64).
fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Explicit branch table: `(from, input, to, symbols)` for all `2^m · 2^k`
/// branches.
struct Branches {
    states: usize,
    list: Vec<(usize, usize, u64)>,
}

impl Branches {
    fn new(trellis: &Trellis) -> Self {
        let states = trellis.num_states();
        let inputs = 1u64 << trellis.num_inputs();
        let mut list = Vec::with_capacity(states * inputs as usize);
        for s in 0..states as u64 {
            for u in 0..inputs {
                let (next, sym) = trellis.branch(s, u);
                list.push((s as usize, next as usize, sym));
            }
        }
        Branches { states, list }
    }
}

/// Extrinsic erasure counts of one trial over the measured window.
fn run_trial(
    branches: &Branches,
    probs: &[f64],
    sections: usize,
    window: (usize, usize),
    rng: &mut ChaCha8Rng,
) -> Vec<u64> {
    let streams = probs.len();
    let erased: Vec<u64> = (0..sections)
        .map(|_| {
            (0..streams).fold(0u64, |acc, s| {
                // draw for every stream so the random stream does not depend on probs
                let r: f64 = rng.gen();
                acc | (((r < probs[s]) as u64) << s)
            })
        })
        .collect();

    let nstates = branches.states;
    let allowed = |sym: u64, mask: u64| sym & !mask == 0;

    // alpha[t][σ]: σ reachable at the start of section t
    let mut alpha = vec![vec![false; nstates]; sections + 1];
    alpha[0][0] = true;
    for t in 0..sections {
        let (cur, next) = alpha.split_at_mut(t + 1);
        for &(from, to, sym) in &branches.list {
            if cur[t][from] && allowed(sym, erased[t]) {
                next[0][to] = true;
            }
        }
    }
    // beta[t][σ]: σ at the start of section t can reach the zero end state
    let mut beta = vec![vec![false; nstates]; sections + 1];
    beta[sections][0] = true;
    for t in (0..sections).rev() {
        let (cur, next) = beta.split_at_mut(t + 1);
        for &(from, to, sym) in &branches.list {
            if next[0][to] && allowed(sym, erased[t]) {
                cur[t][from] = true;
            }
        }
    }

    let mut counts = vec![0u64; streams];
    for t in window.0..window.1 {
        for (s, count) in counts.iter_mut().enumerate() {
            let mask = erased[t] | (1 << s);
            // the all-zero branch is always consistent, so a consistent branch
            // carrying a one on stream s means the symbol is undetermined
            let ambiguous = branches.list.iter().any(|&(from, to, sym)| {
                alpha[t][from] && beta[t + 1][to] && allowed(sym, mask) && sym >> s & 1 == 1
            });
            if ambiguous {
                *count += 1;
            }
        }
    }
    counts
}

/// Estimate per-stream extrinsic erasure probabilities by simulation.
pub fn simulate_extrinsic(trellis: &Trellis, probs: &StreamProbs, cfg: &McConfig) -> Result<McEstimate> {
    cfg.validate(trellis.memory())?;
    let streams = trellis.streams().len();
    if probs.len() != streams {
        return Err(Error::InvalidProbs(format!(
            "expected {streams} stream probabilities, got {}",
            probs.len()
        )));
    }
    let branches = Branches::new(trellis);
    let window = cfg.window();
    let per_trial: Vec<Vec<u64>> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(cfg.seed, trial));
            run_trial(&branches, probs.as_slice(), cfg.sections, window, &mut rng)
        })
        .collect();
    // integer counts make the aggregate independent of trial order
    let samples = (cfg.trials * (window.1 - window.0)) as u64;
    let mut mean = vec![0.0; streams];
    let mut stderr = vec![0.0; streams];
    let mut binomial_stderr = vec![0.0; streams];
    let per_window = (window.1 - window.0) as f64;
    for s in 0..streams {
        let total: u64 = per_trial.iter().map(|c| c[s]).sum();
        let p = total as f64 / samples as f64;
        mean[s] = p;
        binomial_stderr[s] = (p * (1.0 - p) / samples as f64).sqrt();
        let var: f64 = per_trial
            .iter()
            .map(|c| (c[s] as f64 / per_window - p).powi(2))
            .sum::<f64>()
            / (cfg.trials as f64 - 1.0);
        stderr[s] = (var / cfg.trials as f64).sqrt();
    }
    Ok(McEstimate {
        mean,
        stderr,
        binomial_stderr,
        samples,
    })
}

/// `(exact − estimate) / stderr`, with the standard error floored at one
/// count (`1 / samples`) so that estimates of exactly 0 or 1 do not produce
/// infinite scores from rounding-level differences.
pub fn z_score(exact: f64, estimate: f64, stderr: f64, samples: u64) -> f64 {
    let floor = 1.0 / samples as f64;
    (exact - estimate) / stderr.max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trellis::{build_trellis, parse_generator};

    fn pcc() -> Trellis {
        build_trellis(&parse_generator("1,5/7").unwrap()).unwrap()
    }

    fn small() -> McConfig {
        McConfig {
            sections: 200,
            trials: 10,
            seed: 1,
            measure_window: 0.5,
        }
    }

    #[test]
    fn all_known_gives_zero() {
        let est = simulate_extrinsic(&pcc(), &StreamProbs::uniform(2, 0.0).unwrap(), &small()).unwrap();
        assert_eq!(est.mean, vec![0.0, 0.0]);
        assert_eq!(est.stderr, vec![0.0, 0.0]);
        assert_eq!(est.samples, 1000);
    }

    #[test]
    fn all_erased_gives_one() {
        let est = simulate_extrinsic(&pcc(), &StreamProbs::uniform(2, 1.0).unwrap(), &small()).unwrap();
        assert_eq!(est.mean, vec![1.0, 1.0]);
    }

    #[test]
    fn seed_determinism() {
        let p = StreamProbs::new(vec![0.4, 0.6]).unwrap();
        let a = simulate_extrinsic(&pcc(), &p, &small()).unwrap();
        let b = simulate_extrinsic(&pcc(), &p, &small()).unwrap();
        assert_eq!(a, b);
        let c = simulate_extrinsic(&pcc(), &p, &McConfig { seed: 2, ..small() }).unwrap();
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn config_validation() {
        let t = pcc();
        assert!(McConfig { trials: 5, ..small() }.validate(t.memory()).is_err());
        assert!(McConfig { sections: 6, ..small() }.validate(t.memory()).is_err());
        assert!(McConfig { measure_window: 1.0, ..small() }.validate(t.memory()).is_err());
        assert!(McConfig::default().validate(t.memory()).is_ok());
    }

    #[test]
    fn z_score_floor() {
        assert_eq!(z_score(0.0, 0.0, 0.0, 100), 0.0);
        assert!((z_score(1e-6, 0.0, 0.0, 1000) - 1e-3).abs() < 1e-12);
    }
}
