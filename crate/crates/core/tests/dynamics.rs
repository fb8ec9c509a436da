mod support;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use misalign_core::graph::Graph;
use misalign_core::predictor::{consensus_point, consensus_point_with};
use misalign_core::rotation::AngleProfile;
use misalign_core::scenarios::builtin;
use misalign_core::simulator::{simulate, Outcome, Scenario};
use misalign_core::spectrum::{analyze, Stability};

use support::*;

#[test]
fn spectral_verdict_agrees_with_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut consensus, mut divergent, mut drawn) = (0, 0, 0);
    while consensus + divergent < 100 {
        drawn += 1;
        assert!(drawn < 5000, "too few non-marginal scenarios");
        let n = rng.gen_range(2..=6);
        let (_, g) = random_graph(&mut rng, n);
        // every other draw leans towards acute angles so both verdicts show up
        let spread = if drawn % 2 == 0 { PI } else { 2.0 };
        let theta: Vec<f64> = (0..n).map(|_| rng.gen_range(-spread..spread)).collect();
        let sp = analyze(&g, &AngleProfile::new(theta.clone()).unwrap()).unwrap();
        let rest = sp.nonstructural();
        if sp.zero_count() != 2 || rest.iter().any(|z| z.re.abs() <= 0.05) {
            continue;
        }
        let class = sp.classification();
        let horizon = match class.stability {
            Stability::Consensus => 50.0 / rest.iter().map(|z| z.re).fold(f64::INFINITY, f64::min),
            Stability::Divergent => 50.0 / rest.iter().map(|z| -z.re).filter(|r| *r > 0.0).fold(0.0, f64::max),
            _ => continue,
        };
        let initial: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)]).collect();
        let s = Scenario::from_radians("random", g, &theta, Some(initial))
            .unwrap()
            .with_horizon(horizon.ceil())
            .unwrap();
        let outcome = simulate(&s).outcome;
        match class.stability {
            Stability::Consensus => {
                consensus += 1;
                assert!(matches!(outcome, Outcome::Converged { .. }), "{theta:?}: {outcome}");
            }
            _ => {
                divergent += 1;
                assert!(matches!(outcome, Outcome::Diverged { .. }), "{theta:?}: {outcome}");
            }
        }
    }
    assert!(consensus > 10 && divergent > 10, "{consensus} / {divergent}");
}

#[test]
fn aligned_agents_keep_their_centroid() {
    let s = builtin("ex2-case1").unwrap();
    let traj = simulate(&s);
    let start = mean_point(s.initial_state().as_slice());
    for state in &traj.states {
        let m = mean_point(state.as_slice());
        assert!((m[0] - start[0]).abs() <= 1e-9 && (m[1] - start[1]).abs() <= 1e-9);
    }
    match traj.outcome {
        Outcome::Converged { point, .. } => {
            assert!((point[0] - start[0]).abs() <= 1e-9 && (point[1] - start[1]).abs() <= 1e-9)
        }
        other => panic!("{other}"),
    }
}

#[test]
fn step_halving_leaves_the_limit_in_place() {
    for key in ["ex1-case2-c", "ex2-case2", "ex3-a"] {
        let coarse = builtin(key).unwrap();
        let fine = coarse.clone().with_step(coarse.step() / 2.0).unwrap().with_record_stride(20).unwrap();
        let (a, b) = (simulate(&coarse), simulate(&fine));
        assert_eq!(a.times.len(), b.times.len(), "{key}");
        match (a.outcome, b.outcome) {
            (Outcome::Converged { point: p, .. }, Outcome::Converged { point: q, .. }) => {
                let gap = (p[0] - q[0]).abs().max((p[1] - q[1]).abs());
                assert!(gap <= 1e-8, "{key}: {gap:e}");
            }
            other => panic!("{key}: {other:?}"),
        }
    }
}

#[test]
fn simulation_is_deterministic() {
    let s = builtin("ex2-case5").unwrap();
    let (a, b) = (simulate(&s), simulate(&s));
    assert_eq!(a.times, b.times);
    assert_eq!(a.states, b.states);
    assert_eq!(a.outcome, b.outcome);
}

#[test]
fn prediction_matches_simulated_limit() {
    let s = builtin("ex2-case2").unwrap();
    let p0 = s.initial_state();
    let pred = consensus_point(s.graph(), s.profile(), p0.as_slice()).unwrap();
    let Outcome::Converged { point, .. } = simulate(&s).outcome else {
        panic!("ex2-case2 should converge");
    };
    assert!((point[0] - pred.point.x).abs() <= 1e-3 && (point[1] - pred.point.y).abs() <= 1e-3);
    let centroid = mean_point(p0.as_slice());
    assert!((pred.point.x - centroid[0]).hypot(pred.point.y - centroid[1]) > 1e-3);

    let s = builtin("ex1-case2-b").unwrap();
    let pred = consensus_point(s.graph(), s.profile(), s.initial_state().as_slice()).unwrap();
    let Outcome::Converged { point, .. } = simulate(&s).outcome else {
        panic!("ex1-case2-b should converge");
    };
    assert!((point[0] - pred.point.x).abs() <= 1e-3 && (point[1] - pred.point.y).abs() <= 1e-3);
}

#[test]
fn mixed_sign_convergence_follows_the_formula() {
    // ex3-a converges although cos θ₁ < 0; the conservation argument still applies
    let s = builtin("ex3-a").unwrap();
    let class = analyze(s.graph(), s.profile()).unwrap().classification();
    assert_eq!(class.stability, Stability::Consensus);
    let pred = consensus_point_with(s.graph(), s.profile(), s.initial_state().as_slice(), Some(class)).unwrap();
    assert!(pred.extrapolated);
    let Outcome::Converged { point, .. } = simulate(&s).outcome else {
        panic!("ex3-a should converge");
    };
    assert!((point[0] - pred.point.x).abs() <= 1e-3 && (point[1] - pred.point.y).abs() <= 1e-3);
}

#[test]
fn disconnected_pair_of_pairs_never_agrees() {
    let g = Graph::new_undirected(4, &[(0, 1), (2, 3)]).unwrap();
    let s = Scenario::from_radians("split", g, &[0.0; 4], None).unwrap().with_horizon(30.0).unwrap();
    let traj = simulate(&s);
    assert_eq!(traj.outcome, Outcome::Stalled);
    // each pair meets at its own midpoint
    let p = traj.final_state();
    assert!((p[0] - p[2]).abs() < 1e-9 && (p[4] - p[6]).abs() < 1e-9);
    assert!((p[0] - p[4]).abs() > 1.0);
}
