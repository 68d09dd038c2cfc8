//! Exact extrinsic erasure probabilities of BCJR decoding on the BEC.
//!
//! Conditioned on the all-zero codeword, the set of trellis states that
//! remain consistent with the observations to the left of a section is a
//! linear subspace of GF(2)^m, and likewise to the right. Random erasures
//! drive both subspaces as finite Markov chains. An output symbol is erased
//! exactly when its functional does not vanish on the set of branches
//! consistent with the two subspaces and the other observations of the
//! section, so averaging over the limiting distributions of the two chains
//! and over the local erasure patterns gives the transfer function of an
//! infinitely long trellis.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::gf2::{self, Subspace};
use crate::trellis::Trellis;

/// Largest memory for which subspaces are enumerated (67 subspaces).
pub const MAX_MEMORY: usize = 4;

/// Cache keys are the inputs rounded to this resolution.
pub const CACHE_QUANTUM: f64 = 1e-12;

/// Number of memoized evaluations kept before the cache is emptied.
pub const CACHE_CAPACITY: usize = 1 << 18;

/// Per-stream erasure probabilities, each in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct StreamProbs(Vec<f64>);

impl StreamProbs {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        for (s, &p) in probs.iter().enumerate() {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidProbs(format!("stream {s} has probability {p}")));
            }
        }
        Ok(StreamProbs(probs))
    }

    /// Like `new`, but pulls values within `1e-12` of the unit interval back
    /// into it (accumulated rounding in averaged arguments).
    pub fn clamped(mut probs: Vec<f64>) -> Result<Self> {
        for p in probs.iter_mut() {
            if *p < 0.0 && *p > -1e-12 {
                *p = 0.0;
            } else if *p > 1.0 && *p < 1.0 + 1e-12 {
                *p = 1.0;
            }
        }
        Self::new(probs)
    }

    pub fn uniform(len: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for StreamProbs {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// All subspaces of GF(2)^m ordered by dimension then basis; `{0}` first and
/// the full space last.
pub fn enumerate_subspaces(m: usize) -> Result<Vec<Subspace>> {
    if m > MAX_MEMORY {
        return Err(Error::MemoryCap(m));
    }
    let mut seen: HashMap<Subspace, ()> = HashMap::new();
    let mut frontier = vec![Subspace::zero(m)];
    seen.insert(Subspace::zero(m), ());
    while let Some(s) = frontier.pop() {
        for v in 1..(1u64 << m) {
            if s.contains(v) {
                continue;
            }
            let bigger = Subspace::span(m, s.basis().iter().copied().chain([v]));
            if !seen.contains_key(&bigger) {
                seen.insert(bigger.clone(), ());
                frontier.push(bigger);
            }
        }
    }
    let mut all: Vec<Subspace> = seen.into_keys().collect();
    all.sort_by(|a, b| a.dim().cmp(&b.dim()).then_with(|| a.basis().cmp(b.basis())));
    Ok(all)
}

/// Functionals on `(σ, u)` that vanish exactly when the non-erased streams
/// carry zero symbols.
fn observed_functionals(trellis: &Trellis, erased: u64) -> Vec<u64> {
    trellis
        .streams()
        .iter()
        .enumerate()
        .filter(|(s, _)| erased >> s & 1 == 0)
        .map(|(_, st)| st.functional)
        .collect()
}

/// Functionals on `(σ, u)` requiring `σ ∈ space`.
fn state_constraints(space: &Subspace) -> Vec<u64> {
    space.annihilator()
}

/// Functionals on `(σ, u)` requiring `Aσ + Bu ∈ space`.
fn next_state_constraints(trellis: &Trellis, space: &Subspace) -> Vec<u64> {
    let cols = trellis.next_columns();
    space
        .annihilator()
        .into_iter()
        .map(|h| {
            cols.iter()
                .enumerate()
                .fold(0u64, |acc, (c, &img)| acc | ((gf2::dot(h, img) as u64) << c))
        })
        .collect()
}

/// One section of the forward recursion: the span of next states reachable
/// from `forward` along branches whose non-erased symbols are zero.
/// Bit `s` of `erased` marks stream `s` as erased.
pub fn forward_step(forward: &Subspace, trellis: &Trellis, erased: u64) -> Subspace {
    let mut constraints = state_constraints(forward);
    constraints.extend(observed_functionals(trellis, erased));
    let branches = gf2::kernel(&constraints, trellis.branch_bits());
    Subspace::span(
        trellis.memory(),
        branches.into_iter().map(|v| trellis.next_of(v)),
    )
}

/// One section of the backward recursion: the states with a branch into
/// `backward` whose non-erased symbols are zero.
pub fn backward_step(backward: &Subspace, trellis: &Trellis, erased: u64) -> Subspace {
    let mut constraints = next_state_constraints(trellis, backward);
    constraints.extend(observed_functionals(trellis, erased));
    let branches = gf2::kernel(&constraints, trellis.branch_bits());
    let state_mask = (1u64 << trellis.memory()) - 1;
    Subspace::span(trellis.memory(), branches.into_iter().map(|v| v & state_mask))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

/// Markov chain of knowledge subspaces under random per-stream erasures.
#[derive(Clone, Debug)]
pub struct SubspaceChain {
    direction: Direction,
    subspaces: Arc<Vec<Subspace>>,
    num_streams: usize,
    /// `step[i * 2^S + mask]` is the successor of subspace `i` under `mask`
    step: Vec<u32>,
}

impl SubspaceChain {
    pub fn new(trellis: &Trellis, direction: Direction) -> Result<Self> {
        let subspaces = Arc::new(enumerate_subspaces(trellis.memory())?);
        Self::with_subspaces(trellis, direction, subspaces)
    }

    fn with_subspaces(
        trellis: &Trellis,
        direction: Direction,
        subspaces: Arc<Vec<Subspace>>,
    ) -> Result<Self> {
        let index: HashMap<&Subspace, u32> = subspaces
            .iter()
            .enumerate()
            .map(|(i, s)| (s, i as u32))
            .collect();
        let num_streams = trellis.streams().len();
        let masks = 1u64 << num_streams;
        let mut step = Vec::with_capacity(subspaces.len() * masks as usize);
        for s in subspaces.iter() {
            for mask in 0..masks {
                let next = match direction {
                    Direction::Forward => forward_step(s, trellis, mask),
                    Direction::Backward => backward_step(s, trellis, mask),
                };
                step.push(index[&next]);
            }
        }
        Ok(SubspaceChain {
            direction,
            subspaces,
            num_streams,
            step,
        })
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn subspaces(&self) -> &[Subspace] {
        &self.subspaces
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    pub fn successor(&self, from: usize, erased: u64) -> usize {
        self.step[(from << self.num_streams) + erased as usize] as usize
    }

    /// Row-stochastic transition matrix (row-major) for the given probs.
    pub fn transition_matrix(&self, probs: &StreamProbs) -> Vec<f64> {
        let mask_probs = mask_probabilities(probs.as_slice());
        self.transition_from_mask_probs(&mask_probs)
    }

    fn transition_from_mask_probs(&self, mask_probs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            let row = &mut t[i * n..(i + 1) * n];
            for (mask, &p) in mask_probs.iter().enumerate() {
                if p != 0.0 {
                    row[self.step[(i << self.num_streams) + mask] as usize] += p;
                }
            }
        }
        t
    }
}

/// Probability of every erasure pattern; bit `s` set means stream `s` erased.
pub fn mask_probabilities(probs: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    for &p in probs {
        let mut next = Vec::with_capacity(out.len() * 2);
        next.extend(out.iter().map(|w| w * (1.0 - p)));
        next.extend(out.iter().map(|w| w * p));
        out = next;
    }
    out
}

/// Convergence threshold on the start row between successive squarings.
const SQUARING_TOL: f64 = 1e-13;
/// Squarings before giving up, i.e. `2^64` steps of the chain. Inputs are
/// quantized to `1e-12`, so the slowest transition happens at rate at least
/// `1e-12` and mixing takes on the order of `2^40` steps.
const MAX_SQUARINGS: usize = 64;

/// Limiting distribution of `T` started from the point mass on subspace 0.
///
/// Uses the lazy chain `(I + T) / 2`, which is aperiodic and has the same
/// long-run averages as `T`, raised to successive powers of two by squaring.
pub fn limiting_from_matrix(t: &[f64], n: usize) -> Result<Vec<f64>> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = 0.5 * t[i * n + j];
        }
        m[i * n + i] += 0.5;
    }
    let mut sq = vec![0.0; n * n];
    let mut last_change = f64::INFINITY;
    for _ in 0..MAX_SQUARINGS {
        for i in 0..n {
            for j in 0..n {
                sq[i * n + j] = 0.0;
            }
            for k in 0..n {
                let a = m[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    sq[i * n + j] += a * m[k * n + j];
                }
            }
            // rounding drift in a row sum would be squared at every step
            let total: f64 = sq[i * n..(i + 1) * n].iter().sum();
            for v in &mut sq[i * n..(i + 1) * n] {
                *v /= total;
            }
        }
        last_change = (0..n)
            .map(|j| (sq[j] - m[j]).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut m, &mut sq);
        if last_change < SQUARING_TOL {
            let mut row: Vec<f64> = m[..n].to_vec();
            let total: f64 = row.iter().sum();
            for v in row.iter_mut() {
                *v /= total;
            }
            return Ok(row);
        }
    }
    Err(Error::NoConvergence {
        what: "limiting distribution (squarings)",
        iterations: MAX_SQUARINGS,
        last_change,
    })
}

/// Limiting distribution over `chain.subspaces()` from the terminated start.
pub fn limiting_distribution(chain: &SubspaceChain, probs: &StreamProbs) -> Result<Vec<f64>> {
    check_arity(chain.num_streams, probs)?;
    limiting_from_matrix(&chain.transition_matrix(probs), chain.len())
}

fn check_arity(expected: usize, probs: &StreamProbs) -> Result<()> {
    if probs.len() != expected {
        return Err(Error::InvalidProbs(format!(
            "expected {expected} stream probabilities, got {}",
            probs.len()
        )));
    }
    Ok(())
}

/// Exact transfer function of one trellis: per-stream extrinsic erasure
/// probability as a function of per-stream input erasure probabilities.
///
/// Evaluations are memoized on inputs rounded to [`CACHE_QUANTUM`]; the
/// rounded point is also the point evaluated, so cached and fresh results
/// agree exactly.
pub struct TransferFunction {
    trellis: Trellis,
    forward: SubspaceChain,
    backward: SubspaceChain,
    /// `undetermined[s]` is indexed by `(f * n + b) * 2^S + mask`, with the
    /// own-stream bit of `mask` always set
    undetermined: Vec<Vec<bool>>,
    cache: Mutex<HashMap<Vec<u64>, Arc<[f64]>>>,
}

impl std::fmt::Debug for TransferFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransferFunction")
            .field("generator", &self.trellis.generator().text())
            .field("subspaces", &self.forward.len())
            .finish()
    }
}

impl TransferFunction {
    pub fn new(trellis: Trellis) -> Result<Self> {
        let m = trellis.memory();
        if m > MAX_MEMORY {
            return Err(Error::MemoryCap(m));
        }
        if !trellis.is_controllable() {
            return Err(Error::UnsupportedTrellis(format!(
                "'{}' is not controllable; the all-erased chain would not reach the full space",
                trellis.generator().text()
            )));
        }
        let subspaces = Arc::new(enumerate_subspaces(m)?);
        let forward = SubspaceChain::with_subspaces(&trellis, Direction::Forward, subspaces.clone())?;
        let backward = SubspaceChain::with_subspaces(&trellis, Direction::Backward, subspaces.clone())?;

        let n = subspaces.len();
        let streams = trellis.streams().len();
        let masks = 1usize << streams;
        let state_cons: Vec<Vec<u64>> = subspaces.iter().map(state_constraints).collect();
        let next_cons: Vec<Vec<u64>> = subspaces
            .iter()
            .map(|s| next_state_constraints(&trellis, s))
            .collect();
        let mut undetermined = vec![vec![false; n * n * masks]; streams];
        for f in 0..n {
            for b in 0..n {
                for mask in 0..masks {
                    let mut cons = state_cons[f].clone();
                    cons.extend_from_slice(&next_cons[b]);
                    cons.extend(observed_functionals(&trellis, mask as u64));
                    let consistent = gf2::kernel(&cons, trellis.branch_bits());
                    for (s, st) in trellis.streams().iter().enumerate() {
                        if mask >> s & 1 == 1 {
                            undetermined[s][(f * n + b) * masks + mask] =
                                consistent.iter().any(|&v| gf2::dot(st.functional, v));
                        }
                    }
                }
            }
        }

        Ok(TransferFunction {
            trellis,
            forward,
            backward,
            undetermined,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn from_generator(text: &str) -> Result<Self> {
        let spec = crate::trellis::parse_generator(text)?;
        Self::new(crate::trellis::build_trellis(&spec)?)
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    pub fn num_streams(&self) -> usize {
        self.trellis.streams().len()
    }

    pub fn forward_chain(&self) -> &SubspaceChain {
        &self.forward
    }

    pub fn backward_chain(&self) -> &SubspaceChain {
        &self.backward
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }

    pub fn clear_cache(&self) {
        self.cache.lock().unwrap().clear();
    }

    /// Extrinsic erasure probability for every stream.
    pub fn extrinsic(&self, probs: &StreamProbs) -> Result<StreamProbs> {
        check_arity(self.num_streams(), probs)?;
        let key: Vec<u64> = probs
            .as_slice()
            .iter()
            .map(|p| (p / CACHE_QUANTUM).round() as u64)
            .collect();
        if let Some(hit) = self.cache.lock().unwrap().get(&key) {
            return Ok(StreamProbs(hit.to_vec()));
        }
        let quantized: Vec<f64> = key.iter().map(|&q| q as f64 * CACHE_QUANTUM).collect();
        let out: Arc<[f64]> = self.evaluate(&quantized)?.into();
        let mut cache = self.cache.lock().unwrap();
        if cache.len() >= CACHE_CAPACITY {
            // long coupled runs visit millions of distinct points; dropping
            // everything is cheap and keeps results unchanged
            cache.clear();
        }
        cache.insert(key, out.clone());
        Ok(StreamProbs(out.to_vec()))
    }

    /// Same as [`extrinsic`](Self::extrinsic) without touching the cache.
    pub fn extrinsic_uncached(&self, probs: &StreamProbs) -> Result<StreamProbs> {
        check_arity(self.num_streams(), probs)?;
        let quantized: Vec<f64> = probs
            .as_slice()
            .iter()
            .map(|p| (p / CACHE_QUANTUM).round() * CACHE_QUANTUM)
            .collect();
        Ok(StreamProbs(self.evaluate(&quantized)?))
    }

    /// Convenience wrapper returning a single stream's output.
    pub fn stream(&self, stream: usize, probs: &[f64]) -> Result<f64> {
        let out = self.extrinsic(&StreamProbs::clamped(probs.to_vec())?)?;
        Ok(out[stream])
    }

    fn evaluate(&self, probs: &[f64]) -> Result<Vec<f64>> {
        let streams = probs.len();
        let masks = 1usize << streams;
        let mask_probs = mask_probabilities(probs);
        let n = self.forward.len();
        let pf = limiting_from_matrix(&self.forward.transition_from_mask_probs(&mask_probs), n)?;
        let pb = limiting_from_matrix(&self.backward.transition_from_mask_probs(&mask_probs), n)?;

        let mut out = vec![0.0; streams];
        for (s, table) in self.undetermined.iter().enumerate() {
            // weight of each pattern with the own stream forced to erased
            let own = 1usize << s;
            let weights: Vec<(usize, f64)> = (0..masks)
                .filter(|m| m & own != 0)
                .map(|m| {
                    let w: f64 = (0..streams)
                        .filter(|&r| r != s)
                        .map(|r| if m >> r & 1 == 1 { probs[r] } else { 1.0 - probs[r] })
                        .product();
                    (m, w)
                })
                .filter(|&(_, w)| w != 0.0)
                .collect();
            let mut acc = 0.0;
            for f in 0..n {
                if pf[f] == 0.0 {
                    continue;
                }
                for b in 0..n {
                    let pfb = pf[f] * pb[b];
                    if pfb == 0.0 {
                        continue;
                    }
                    let base = (f * n + b) * masks;
                    let mut local = 0.0;
                    for &(m, w) in &weights {
                        if table[base + m] {
                            local += w;
                        }
                    }
                    acc += pfb * local;
                }
            }
            out[s] = acc.clamp(0.0, 1.0);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trellis::{build_trellis, parse_generator};

    fn pcc() -> Trellis {
        build_trellis(&parse_generator("1,5/7").unwrap()).unwrap()
    }

    /// Brute force: all XOR-closed subsets of GF(2)^m containing zero.
    fn brute_force_subspace_count(m: usize) -> usize {
        let size = 1usize << m;
        (0u64..(1u64 << size))
            .filter(|set| {
                set & 1 == 1
                    && (0..size).all(|a| {
                        set >> a & 1 == 0
                            || (0..size).all(|b| set >> b & 1 == 0 || set >> (a ^ b) & 1 == 1)
                    })
            })
            .count()
    }

    #[test]
    fn slow_chain_limit_stays_normalized() {
        let r = 1e-12;
        let t = [1.0 - r, r, r, 1.0 - r];
        let p = limiting_from_matrix(&t, 2).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-9 && (p[1] - 0.5).abs() < 1e-9, "{p:?}");
        let tf = TransferFunction::new(pcc()).unwrap();
        for q in [1e-12, 8.9655e-5, 1e-3] {
            let out = tf.extrinsic(&StreamProbs::new(vec![q, 0.9]).unwrap()).unwrap();
            assert!(out.as_slice().iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn subspace_counts_match_brute_force() {
        assert_eq!(enumerate_subspaces(0).unwrap().len(), 1);
        for m in 1..=3 {
            let n = enumerate_subspaces(m).unwrap().len();
            assert_eq!(n, brute_force_subspace_count(m), "m = {m}");
        }
        assert_eq!(enumerate_subspaces(2).unwrap().len(), 5);
        assert_eq!(enumerate_subspaces(3).unwrap().len(), 16);
        assert_eq!(enumerate_subspaces(4).unwrap().len(), 67);
        assert!(matches!(enumerate_subspaces(5), Err(Error::MemoryCap(5))));
    }

    #[test]
    fn subspace_order_is_zero_first_full_last() {
        let all = enumerate_subspaces(3).unwrap();
        assert!(all[0].is_zero());
        assert!(all.last().unwrap().is_full());
    }

    #[test]
    fn forward_step_edge_cases() {
        let t = pcc();
        let zero = Subspace::zero(2);
        let full = Subspace::full(2);
        assert_eq!(forward_step(&zero, &t, 0b00), zero);
        assert_eq!(forward_step(&full, &t, 0b11), full);
        // only the input erased: two branches leave state 0, u = 0 and u = 1
        // with parity n_0 u forced to 0; 5/7 has n_0 = 1 so only u = 0 remains
        // unless the parity is also erased
        let only_input = forward_step(&zero, &t, 0b01);
        let brute: Vec<u64> = (0..2u64)
            .filter(|&u| t.branch(0, u).1 & 0b10 == 0)
            .map(|u| t.branch(0, u).0)
            .collect();
        assert_eq!(only_input, Subspace::span(2, brute));
        let both = forward_step(&zero, &t, 0b11);
        let b_col = t.input_matrix().iter().enumerate().fold(0u64, |acc, (r, row)| acc | ((row & 1) << r));
        assert_eq!(both, Subspace::span(2, [b_col]));
    }

    #[test]
    fn backward_step_edge_cases() {
        let t = pcc();
        let zero = Subspace::zero(2);
        let full = Subspace::full(2);
        assert_eq!(backward_step(&zero, &t, 0b00), zero);
        assert_eq!(backward_step(&full, &t, 0b11), full);
        // brute force over explicit branches for every subspace and mask
        for s in enumerate_subspaces(2).unwrap() {
            for mask in 0..4u64 {
                let elems = s.elements();
                let preds: Vec<u64> = (0..4u64)
                    .filter(|&sigma| {
                        (0..2u64).any(|u| {
                            let (next, sym) = t.branch(sigma, u);
                            elems.contains(&next) && sym & !mask == 0
                        })
                    })
                    .collect();
                assert_eq!(backward_step(&s, &t, mask), Subspace::span(2, preds));
            }
        }
    }

    #[test]
    fn transition_rows_sum_to_one() {
        let tf = TransferFunction::new(pcc()).unwrap();
        for p in [[0.0, 0.0], [0.3, 0.7], [1.0, 1.0], [0.5, 0.0]] {
            let probs = StreamProbs::new(p.to_vec()).unwrap();
            for chain in [tf.forward_chain(), tf.backward_chain()] {
                let t = chain.transition_matrix(&probs);
                let n = chain.len();
                for i in 0..n {
                    let s: f64 = t[i * n..(i + 1) * n].iter().sum();
                    assert!((s - 1.0).abs() < 1e-12);
                }
                // full space stays full under all-erased observations
                assert_eq!(chain.successor(n - 1, 0b11), n - 1);
            }
        }
    }

    #[test]
    fn limiting_distribution_endpoints() {
        let tf = TransferFunction::new(pcc()).unwrap();
        let zero = StreamProbs::new(vec![0.0, 0.0]).unwrap();
        let one = StreamProbs::new(vec![1.0, 1.0]).unwrap();
        for chain in [tf.forward_chain(), tf.backward_chain()] {
            let d0 = limiting_distribution(chain, &zero).unwrap();
            assert_eq!(d0[0], 1.0);
            let d1 = limiting_distribution(chain, &one).unwrap();
            assert!((d1[chain.len() - 1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn periodic_chain_limit_is_the_average() {
        // 0 -> 1 -> 0 deterministic flip
        let t = [0.0, 1.0, 1.0, 0.0];
        let d = limiting_from_matrix(&t, 2).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-12 && (d[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn extrinsic_endpoints() {
        let tf = TransferFunction::new(pcc()).unwrap();
        let out0 = tf.extrinsic(&StreamProbs::uniform(2, 0.0).unwrap()).unwrap();
        assert_eq!(out0.as_slice(), &[0.0, 0.0]);
        let out1 = tf.extrinsic(&StreamProbs::uniform(2, 1.0).unwrap()).unwrap();
        assert_eq!(out1.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn cache_is_transparent() {
        let tf = TransferFunction::new(pcc()).unwrap();
        let p = StreamProbs::new(vec![0.37, 0.61]).unwrap();
        let a = tf.extrinsic(&p).unwrap();
        let b = tf.extrinsic(&p).unwrap();
        let c = tf.extrinsic_uncached(&p).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(tf.cache_len(), 1);
    }

    #[test]
    fn wrong_arity_rejected() {
        let tf = TransferFunction::new(pcc()).unwrap();
        assert!(tf.extrinsic(&StreamProbs::uniform(3, 0.5).unwrap()).is_err());
        assert!(StreamProbs::new(vec![1.5]).is_err());
    }
}
