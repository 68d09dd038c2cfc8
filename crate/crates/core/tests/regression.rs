//! Frozen values cross-checked against independent oracles, and the
//! worked example of the rate-1/2 parallel concatenation.

use std::sync::Arc;

use sctc::coupled::{coupled_fixed_point, coupled_step, CouplingSpec, IterationLimits, WaveState};
use sctc::ensembles::{build_system, pcc_system, Ensemble, ScalarSystem};
use sctc::mc::{simulate_extrinsic, McConfig};
use sctc::potential::{
    bp_threshold, fixed_points, min_gap, min_unstable_fixed_point, potential, potential_threshold, Stability,
};
use sctc::transfer::{limiting_distribution, StreamProbs, TransferFunction};

const RATE_HALF: &str = "1,5/7";
const RATE_TWO_THIRDS: &str = "1 0 1/7; 0 1 5/7";

fn pcc() -> ScalarSystem {
    build_system(Ensemble::Pcc, RATE_HALF).unwrap()
}

fn within_sigmas(exact: f64, est: f64, stderr: f64, k: f64) -> bool {
    (exact - est).abs() <= k * stderr
}

#[test]
fn rate_half_transfer_at_half() {
    let tf = TransferFunction::from_generator(RATE_HALF).unwrap();
    let out = tf.extrinsic(&StreamProbs::new(vec![0.5, 0.5]).unwrap()).unwrap();
    // 173/338 and 165/338
    assert!((out[0] - 0.5118343195266273).abs() < 1e-13);
    assert!((out[1] - 0.48816568047337283).abs() < 1e-13);
    assert!((out[0] - 173.0 / 338.0).abs() < 1e-13);
}

#[test]
fn rate_half_transfer_agrees_with_simulation() {
    let tf = TransferFunction::from_generator(RATE_HALF).unwrap();
    let probs = StreamProbs::new(vec![0.5, 0.5]).unwrap();
    let exact = tf.extrinsic(&probs).unwrap();
    let est = simulate_extrinsic(tf.trellis(), &probs, &McConfig::with_seed(42)).unwrap();
    assert_eq!(est.mean, vec![0.509405, 0.48397]);
    assert_eq!(est.samples, 200_000);
    for s in 0..2 {
        assert!(within_sigmas(exact[s], est.mean[s], est.stderr[s], 3.0), "stream {s}");
    }
}

#[test]
fn rate_two_thirds_transfer_agrees_with_simulation() {
    let tf = TransferFunction::from_generator(RATE_TWO_THIRDS).unwrap();
    let probs = StreamProbs::new(vec![0.25, 0.25, 0.25]).unwrap();
    let exact = tf.extrinsic(&probs).unwrap();
    let frozen = [0.3416871029980279, 0.2663388573436829, 0.21828293989381564];
    let est = simulate_extrinsic(tf.trellis(), &probs, &McConfig::with_seed(42)).unwrap();
    assert_eq!(est.mean, vec![0.34005, 0.26372, 0.216685]);
    for s in 0..3 {
        assert!((exact[s] - frozen[s]).abs() < 1e-13);
        assert!(within_sigmas(exact[s], est.mean[s], est.stderr[s], 3.0), "stream {s}");
    }
}

#[test]
fn scalar_system_values() {
    let scc = build_system(Ensemble::Scc, RATE_HALF).unwrap();
    assert!((scc.g(0.5).unwrap() - 0.5).abs() < 1e-13);
    assert!((scc.g(0.3).unwrap() - 0.05024514423127656).abs() < 1e-13);
    let bcc = build_system(Ensemble::Bcc, RATE_TWO_THIRDS).unwrap();
    assert!((bcc.f(0.5, 0.5).unwrap() - 0.27543630007850883).abs() < 1e-13);
    assert!((pcc().f(0.3, 0.6).unwrap() - 0.1752470529820762).abs() < 1e-13);
}

#[test]
fn scc_outer_function_agrees_with_simulation() {
    // g(0.5) is the mean of both extrinsic outputs at (0.5, 0.5)
    let tf = TransferFunction::from_generator(RATE_HALF).unwrap();
    let probs = StreamProbs::new(vec![0.5, 0.5]).unwrap();
    let est = simulate_extrinsic(tf.trellis(), &probs, &McConfig::with_seed(42)).unwrap();
    let mc = 0.5 * (est.mean[0] + est.mean[1]);
    let se = 0.5 * (est.stderr[0].powi(2) + est.stderr[1].powi(2)).sqrt() * 2f64.sqrt();
    let scc = build_system(Ensemble::Scc, RATE_HALF).unwrap();
    assert!(within_sigmas(scc.g(0.5).unwrap(), mc, se, 3.0));
}

/// Walk the forward recursion on explicit state sets and histogram the sets
/// against the subspace list of the chain.
#[test]
fn forward_distribution_matches_set_histogram() {
    use rand::{Rng, SeedableRng};
    let tf = TransferFunction::from_generator(RATE_HALF).unwrap();
    let trellis = tf.trellis();
    let states = trellis.num_states();
    let subspaces = tf.forward_chain().subspaces();
    let member_sets: Vec<Vec<bool>> = subspaces
        .iter()
        .map(|s| (0..states as u64).map(|v| s.contains(v)).collect())
        .collect();
    let exact = limiting_distribution(tf.forward_chain(), &StreamProbs::new(vec![0.5, 0.5]).unwrap()).unwrap();

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let batches = 100;
    let per_batch = 10_000;
    let mut set = vec![false; states];
    set[0] = true;
    let mut batch_freq = vec![vec![0.0; subspaces.len()]; batches];
    for freq in batch_freq.iter_mut() {
        for _ in 0..per_batch {
            let erased: u64 = (rng.gen::<f64>() < 0.5) as u64 | (((rng.gen::<f64>() < 0.5) as u64) << 1);
            let mut next = vec![false; states];
            for s in 0..states {
                if !set[s] {
                    continue;
                }
                for u in 0..2u64 {
                    let (to, sym) = trellis.branch(s as u64, u);
                    if sym & !erased == 0 {
                        next[to as usize] = true;
                    }
                }
            }
            set = next;
            let idx = member_sets.iter().position(|m| *m == set).expect("set is a subspace");
            freq[idx] += 1.0 / per_batch as f64;
        }
    }
    for (i, &p) in exact.iter().enumerate() {
        let means: Vec<f64> = batch_freq.iter().map(|f| f[i]).collect();
        let mean = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
        let se = (var / batches as f64).sqrt();
        assert!((mean - p).abs() <= 4.0 * se.max(1e-4), "subspace {i}: {mean} vs {p}");
    }
}

#[test]
fn pcc_thresholds_match_the_worked_example() {
    let sys = pcc();
    let bp = bp_threshold(&sys, 1e-6).unwrap();
    assert!((bp.value - 0.6428).abs() <= 2e-4, "{}", bp.value);
    let star = potential_threshold(&sys, 1e-6).unwrap();
    assert!((star.value - 0.6554).abs() <= 2e-4, "{}", star.value);
    assert!(star.value >= bp.value);
}

#[test]
fn scc_and_bcc_thresholds_are_frozen() {
    let cases = [
        (Ensemble::Scc, RATE_HALF, 0.6895776, 0.7483939),
        (Ensemble::Bcc, RATE_TWO_THIRDS, 0.5522227, 0.6654064),
    ];
    for (e, gen, bp_frozen, star_frozen) in cases {
        let sys = build_system(e, gen).unwrap();
        let bp = bp_threshold(&sys, 1e-6).unwrap();
        let star = sctc::potential::potential_threshold_from(&sys, bp.lower, 1e-6).unwrap();
        assert!((bp.value - bp_frozen).abs() < 2e-6, "{e}: {}", bp.value);
        assert!((star.value - star_frozen).abs() < 2e-6, "{e}: {}", star.value);
    }
}

#[test]
fn nonzero_fixed_point_location_matches_dense_grid() {
    let sys = pcc();
    let eps = 0.65;
    let fps = fixed_points(&sys, eps, 1000).unwrap();
    let stable: Vec<_> = fps
        .iter()
        .filter(|p| p.x > 0.0 && p.stability == Stability::Stable)
        .collect();
    assert_eq!(stable.len(), 1);
    // largest sign change of f(x) - x on a 10^5 grid
    let n = 100_000;
    let mut last_cross = None;
    let mut prev = sys.step(1.0 / n as f64, eps).unwrap() - 1.0 / n as f64;
    for i in 2..=n {
        let x = i as f64 / n as f64;
        let h = sys.step(x, eps).unwrap() - x;
        if prev > 0.0 && h <= 0.0 {
            last_cross = Some(x);
        }
        prev = h;
    }
    let dense = last_cross.unwrap();
    assert!((stable[0].x - dense).abs() <= 1.0 / n as f64, "{} vs {dense}", stable[0].x);
}

#[test]
fn supercritical_potential_sign_matches_trapezoid() {
    let sys = pcc();
    let n = 100_000;
    let h = 1.0 / n as f64;
    let mut big_f = 0.0;
    for i in 0..n {
        let a = sys.f(i as f64 * h, 0.9).unwrap();
        let b = sys.f((i + 1) as f64 * h, 0.9).unwrap();
        big_f += 0.5 * h * (a + b);
    }
    let trapezoid = 0.5 - big_f;
    let u = potential(&sys, 1.0, 0.9).unwrap().u;
    assert!(u < 0.0 && trapezoid < 0.0);
    assert!((u - trapezoid).abs() < 1e-6);
}

#[test]
fn unstable_point_just_above_threshold_is_near_tangency() {
    let sys = pcc();
    let bp = bp_threshold(&sys, 1e-6).unwrap();
    let (tangency, gap) = min_gap(&sys, bp.upper, 2000).unwrap();
    assert!(gap <= 0.0);
    let u = min_unstable_fixed_point(&sys, bp.upper + 1e-4).unwrap().unwrap();
    assert!((u - tangency).abs() < 0.05, "{u} vs {tangency}");
    assert!(min_unstable_fixed_point(&sys, bp.lower).unwrap().is_none());
}

#[test]
fn coupled_step_matches_literal_loops() {
    let sys = pcc();
    let spec = CouplingSpec::new(5, 1).unwrap();
    let next = coupled_step(&sys, &spec, &WaveState::ones(&spec), 0.5).unwrap();
    let x = [1.0; 5];
    let at = |t: i32| if (1..=5).contains(&t) { x[t as usize - 1] } else { 0.0 };
    for t in 1..=5 {
        let mut outer = 0.0;
        for k in 0..=1 {
            let mut inner = 0.0;
            for j in 0..=1 {
                inner += at(t - j + k);
            }
            outer += sys.f(inner / 2.0, 0.5).unwrap();
        }
        assert!((next.profile[t as usize - 1] - outer / 2.0).abs() < 1e-15);
    }
    // the edges see half the interior input
    let interior = sys.f(1.0, 0.5).unwrap();
    let edge = 0.5 * (sys.f(0.5, 0.5).unwrap() + interior);
    assert_eq!(next.profile[2], interior);
    assert!((next.profile[0] - edge).abs() < 1e-15);
}

#[test]
fn pcc_built_from_shared_transfer() {
    let tf = Arc::new(TransferFunction::from_generator(RATE_HALF).unwrap());
    let a = pcc_system(tf.clone()).unwrap();
    let b = pcc_system(tf).unwrap();
    assert_eq!(a.f(0.4, 0.7).unwrap(), b.f(0.4, 0.7).unwrap());
}

#[test]
fn coupling_decodes_between_the_two_thresholds() {
    // at 0.650 the uncoupled recursion is stuck; memory 1 already decodes
    let sys = pcc();
    let limits = IterationLimits::default();
    let decodes = |m| {
        let spec = CouplingSpec::new(50, m).unwrap();
        coupled_fixed_point(&sys, &spec, 0.650, &limits).unwrap().converged_to_zero
    };
    assert!(!decodes(0));
    assert!(decodes(1));
    assert!(decodes(3));
}
