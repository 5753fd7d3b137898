use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use offpolicy::baselines::{LstdAccumulator, LstdTrace, LstdVariant};
use offpolicy::domain::{importance_ratio, Transition};
use offpolicy::env::ProblemKind;
use offpolicy::evaluation::{sampled_distribution, stationary_distribution};
use offpolicy::experiments::{build_grid, sweep, SweepSettings};
use offpolicy::learners::Algorithm;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// On-policy Collision transitions (`π` replaced by `b`), cut after the last
/// terminal step so every episode is complete.
fn on_policy_episodes(seed: u64, steps: usize) -> Vec<Transition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let problem = ProblemKind::Collision.instantiate(&mut rng).unwrap();
    let mut stream = problem.stream(rng);
    let mut ts: Vec<Transition> = (0..steps)
        .map(|_| {
            let t = problem.transition(0, stream.next_step()).unwrap();
            Transition { pi_prob: t.b_prob, ..t }
        })
        .collect();
    let end = ts.iter().rposition(|t| t.gamma_next == 0.0).unwrap();
    ts.truncate(end + 1);
    ts
}

/// Some of the random three-hot draws span only five dimensions.
fn full_rank(ts: &[Transition]) -> bool {
    let dim = ts[0].x.dim();
    let mut xx = DMatrix::<f64>::zeros(dim, dim);
    for t in ts {
        let x = DVector::from_vec(t.x.to_dense());
        xx += &x * x.transpose();
    }
    xx.rank(1e-9) == dim
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ratio_is_scale_covariant(pi in 0.0f64..1.0, b in 0.01f64..1.0, c in 0.1f64..10.0) {
        let r = importance_ratio(pi, b).unwrap();
        let scaled = importance_ratio(pi * c, b * c).unwrap();
        prop_assert!((r - scaled).abs() <= 1e-12 * r.max(1.0));
    }

    #[test]
    fn high_variance_ratios_stay_in_range(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let problem = ProblemKind::HighVarianceFourRooms.instantiate(&mut rng).unwrap();
        let mut stream = problem.stream(rng);
        for _ in 0..2_000 {
            let st = stream.next_step();
            for j in 0..problem.gvfs.len() {
                let rho = problem.transition(j, st).unwrap().rho();
                prop_assert!((0.0..=50.0).contains(&rho));
            }
        }
    }

    #[test]
    fn lstd_one_equals_monte_carlo_regression(seed in any::<u64>()) {
        let ts = on_policy_episodes(seed, 3_000);
        prop_assume!(full_rank(&ts));
        let dim = ts[0].x.dim();
        let mut acc = LstdAccumulator::new(dim, 1.0, LstdVariant::Plain).unwrap().with_trace(LstdTrace::Learner);
        for t in &ts {
            acc.accumulate(t).unwrap();
        }
        let mut g = 0.0;
        let mut xx = DMatrix::<f64>::zeros(dim, dim);
        let mut xg = DVector::<f64>::zeros(dim);
        for t in ts.iter().rev() {
            g = t.reward + t.gamma_next * g;
            let x = DVector::from_vec(t.x.to_dense());
            xx += &x * x.transpose();
            xg += &x * g;
        }
        let mc = xx.lu().solve(&xg).unwrap();
        let lstd = acc.solve(0.0).unwrap();
        for i in 0..dim {
            prop_assert!((lstd[i] - mc[i]).abs() <= 1e-8 * mc[i].abs().max(1.0), "{} vs {}", lstd[i], mc[i]);
        }
    }

    #[test]
    fn lsetd_reduces_to_lstd_on_policy_at_lambda_one(seed in any::<u64>()) {
        let ts = on_policy_episodes(seed, 2_000);
        let dim = ts[0].x.dim();
        let mut plain = LstdAccumulator::new(dim, 1.0, LstdVariant::Plain).unwrap().with_trace(LstdTrace::Learner);
        let mut emphatic = LstdAccumulator::new(dim, 1.0, LstdVariant::Emphatic { beta: None }).unwrap();
        for t in &ts {
            plain.accumulate(t).unwrap();
            emphatic.accumulate(t).unwrap();
        }
        let (a, b) = (plain.solve(0.0).unwrap(), emphatic.solve(0.0).unwrap());
        for i in 0..dim {
            prop_assert!((a[i] - b[i]).abs() <= 1e-10 * a[i].abs().max(1.0));
        }
    }

    #[test]
    fn lambda_zero_lstd_ignores_transition_order(seed in any::<u64>()) {
        let mut ts = on_policy_episodes(seed, 500);
        prop_assume!(full_rank(&ts));
        let dim = ts[0].x.dim();
        let solve = |ts: &[Transition]| {
            let mut acc = LstdAccumulator::new(dim, 0.0, LstdVariant::Plain).unwrap().with_trace(LstdTrace::Learner);
            ts.iter().for_each(|t| acc.accumulate(t).unwrap());
            acc.solve(1e-8).unwrap()
        };
        let forward = solve(&ts);
        ts.reverse();
        let backward = solve(&ts);
        for i in 0..dim {
            prop_assert!((forward[i] - backward[i]).abs() <= 1e-10 * forward[i].abs().max(1.0));
        }
    }
}

#[test]
fn sampled_distribution_converges_to_exact() {
    for kind in [ProblemKind::Collision, ProblemKind::HighVarianceFourRooms] {
        let problem = kind.reference().unwrap();
        let exact = stationary_distribution(&problem).unwrap();
        let n = 400_000u64;
        let sampled = sampled_distribution(&problem, n, ChaCha8Rng::seed_from_u64(1)).unwrap();
        let gap = exact.iter().zip(&sampled).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 5.0 / (n as f64).sqrt(), "{kind}: {gap}");
    }
}

#[test]
fn executed_cells_equal_the_grid() {
    let grid = build_grid(Algorithm::Htd, ProblemKind::Collision).unwrap();
    let mut cells = grid.cells().unwrap();
    cells.retain(|c| c.config.alpha >= 0.5);
    let settings = SweepSettings { runs: 1, steps: Some(50), ..SweepSettings::desk() };
    let results = sweep(&cells, &[], &settings).unwrap();
    let executed: BTreeSet<String> = results.records.iter().map(|r| r[0].cell_id.clone()).collect();
    let planned: BTreeSet<String> = cells.iter().map(|c| c.id()).collect();
    assert_eq!(executed, planned);
    assert_eq!(planned.len(), 2 * 8 * 2);
}
