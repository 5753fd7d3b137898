//! Eight-state Collision corridor.
//!
//! The target always drives right. The behavior drives right in the four
//! leftmost states and flips a fair coin between right and retreat in the
//! four rightmost ones. Driving right from state 7 pays 1.0 and terminates;
//! the stream then restarts uniformly in states 0..=3, which is also where
//! retreat lands.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;

use super::{Dynamics, Problem, ProblemKind};
use crate::domain::{FeatureVector, GvfSpec, TabularPolicy, Transition};
use crate::error::{Error, Result};

pub const N_STATES: usize = 8;
pub const GAMMA: f64 = 0.9;
pub const RIGHT: usize = 0;
pub const RETREAT: usize = 1;
pub const FEATURE_DIM: usize = 6;
const N_START: usize = 4;
const TERMINAL_REWARD: f64 = 1.0;

pub fn behavior() -> TabularPolicy {
    let rows = (0..N_STATES)
        .map(|s| if s < N_START { vec![1.0, 0.0] } else { vec![0.5, 0.5] })
        .collect();
    TabularPolicy::new(rows).expect("valid behavior table")
}

pub fn target() -> TabularPolicy {
    TabularPolicy::new(vec![vec![1.0, 0.0]; N_STATES]).expect("valid target table")
}

fn restart() -> Vec<(usize, f64)> {
    (0..N_START).map(|s| (s, 1.0 / N_START as f64)).collect()
}

pub fn dynamics() -> Dynamics {
    let next = (0..N_STATES)
        .map(|s| {
            let right = if s + 1 < N_STATES { vec![(s + 1, 1.0)] } else { restart() };
            vec![right, restart()]
        })
        .collect();
    Dynamics::new(next).expect("valid collision dynamics")
}

fn is_terminal(s: usize, a: usize) -> bool {
    s == N_STATES - 1 && a == RIGHT
}

pub fn gvf() -> GvfSpec {
    GvfSpec::new(
        "collision",
        target(),
        |s, a, _| if is_terminal(s, a) { TERMINAL_REWARD } else { 0.0 },
        |s, a, _| if is_terminal(s, a) { 0.0 } else { GAMMA },
        |_| 1.0,
    )
    .expect("valid collision gvf")
}

/// Per-state features: eight distinct 3-of-6 binary vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct CollisionFeatures {
    table: Vec<FeatureVector>,
}

impl CollisionFeatures {
    /// Draws 8 of the 20 three-hot vectors of length six, uniformly without
    /// replacement, and assigns them to states in draw order.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let all = three_of_six();
        let picks = sample(rng, all.len(), N_STATES);
        let table = picks
            .iter()
            .map(|i| FeatureVector::binary(FEATURE_DIM, all[i].clone()).expect("sorted indices"))
            .collect();
        Self { table }
    }

    pub fn as_slice(&self) -> &[FeatureVector] {
        &self.table
    }

    pub fn into_table(self) -> Vec<Arc<FeatureVector>> {
        self.table.into_iter().map(Arc::new).collect()
    }
}

fn three_of_six() -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(20);
    for i in 0..FEATURE_DIM {
        for j in i + 1..FEATURE_DIM {
            for k in j + 1..FEATURE_DIM {
                out.push(vec![i, j, k]);
            }
        }
    }
    out
}

/// One-hot features, used for the least-squares correctness checks.
pub fn tabular_features() -> Vec<Arc<FeatureVector>> {
    (0..N_STATES).map(|s| Arc::new(FeatureVector::one_hot(N_STATES, s).unwrap())).collect()
}

pub fn problem(features: Vec<Arc<FeatureVector>>) -> Problem {
    assert_eq!(features.len(), N_STATES);
    let mut start = vec![0.0; N_STATES];
    start[..N_START].fill(1.0 / N_START as f64);
    Problem {
        kind: ProblemKind::Collision,
        dynamics: dynamics(),
        behavior: behavior(),
        gvfs: vec![gvf()],
        features,
        start,
    }
}

/// Takes `action` in `state`, sampling any restart from `rng`.
///
/// Retreat in the leftmost states is rejected: the behavior never takes it
/// there, so no importance ratio exists.
pub fn collision_step<R: Rng + ?Sized>(
    features: &[Arc<FeatureVector>],
    state: usize,
    action: usize,
    rng: &mut R,
) -> Result<Transition> {
    if state >= N_STATES {
        return Err(Error::InvalidState(state));
    }
    let b = behavior();
    if action > RETREAT || b.prob(state, action) == 0.0 {
        return Err(Error::IllegalAction { state, action });
    }
    let s_next = dynamics().sample_with(state, action, rng.gen());
    let g = gvf();
    Transition::new(
        state,
        action,
        s_next,
        g.cumulant(state, action, s_next),
        g.discount(state, action, s_next),
        g.target.prob(state, action),
        b.prob(state, action),
        1.0,
        Arc::clone(&features[state]),
        Arc::clone(&features[s_next]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn step_examples() {
        let f = tabular_features();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = collision_step(&f, 7, RIGHT, &mut rng).unwrap();
        assert_eq!(t.reward, 1.0);
        assert_eq!(t.gamma_next, 0.0);
        assert!(t.s_next < 4);

        let t = collision_step(&f, 2, RIGHT, &mut rng).unwrap();
        assert_eq!((t.s_next, t.reward, t.rho()), (3, 0.0, 1.0));

        let t = collision_step(&f, 5, RIGHT, &mut rng).unwrap();
        assert_eq!((t.s_next, t.rho(), t.gamma_next), (6, 2.0, GAMMA));

        let t = collision_step(&f, 5, RETREAT, &mut rng).unwrap();
        assert!(t.s_next < 4);
        assert_eq!(t.rho(), 0.0);
    }

    #[test]
    fn retreat_in_leftmost_states_is_rejected() {
        let f = tabular_features();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for s in 0..4 {
            assert!(matches!(
                collision_step(&f, s, RETREAT, &mut rng),
                Err(Error::IllegalAction { .. })
            ));
        }
        assert!(collision_step(&f, 8, RIGHT, &mut rng).is_err());
    }

    #[test]
    fn random_features_are_distinct_three_hot() {
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f = CollisionFeatures::random(&mut rng);
            let table = f.as_slice();
            assert_eq!(table.len(), 8);
            for (i, x) in table.iter().enumerate() {
                assert_eq!(x.active().unwrap().len(), 3);
                assert_eq!(x.dim(), 6);
                for y in &table[i + 1..] {
                    assert_ne!(x, y);
                }
            }
        }
    }

    #[test]
    fn random_features_are_seed_deterministic() {
        let a = CollisionFeatures::random(&mut ChaCha8Rng::seed_from_u64(11));
        let b = CollisionFeatures::random(&mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn behavior_ratios_are_zero_one_or_two() {
        let p = problem(tabular_features());
        let mut stream = p.stream(ChaCha8Rng::seed_from_u64(5));
        let mut seen = [false; 3];
        for _ in 0..10_000 {
            let step = stream.next_step();
            let r = p.transition(0, step).unwrap().rho();
            assert!(r == 0.0 || r == 1.0 || r == 2.0, "ratio {r}");
            seen[r as usize] = true;
            assert!(!(step.s < 4 && step.a == RETREAT));
        }
        assert_eq!(seen, [true, true, true]);
    }

    #[test]
    fn target_episode_length_and_return() {
        let g = gvf();
        let d = dynamics();
        for i in 0..N_STATES {
            let (mut s, mut ret, mut disc, mut len) = (i, 0.0, 1.0, 0);
            loop {
                let a = RIGHT;
                let s2 = d.outcomes(s, a)[0].0;
                ret += disc * g.cumulant(s, a, s2);
                disc *= g.discount(s, a, s2);
                len += 1;
                if disc == 0.0 {
                    break;
                }
                s = s2;
            }
            assert_eq!(len, 8 - i);
            assert!((ret - GAMMA.powi(7 - i as i32)).abs() < 1e-15);
        }
    }
}
