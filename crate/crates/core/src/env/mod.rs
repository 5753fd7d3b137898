//! Benchmark MDPs: the Collision corridor and (High-Variance) Four Rooms.
//!
//! Both are finite, so each is reduced to a [`Problem`]: tabular dynamics, a
//! behavior policy, one or more GVFs and a per-state feature table. The
//! [`Stream`] samples behavior experience from a problem, and
//! [`Problem::transition`] turns one sampled step into the [`Transition`] a
//! given GVF's learner consumes.

pub mod collision;
pub mod fourrooms;
pub mod tiles;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{FeatureVector, GvfSpec, TabularPolicy, Transition};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Collision,
    #[serde(rename = "fourrooms")]
    FourRooms,
    #[serde(rename = "hv_fourrooms")]
    HighVarianceFourRooms,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] =
        [ProblemKind::Collision, ProblemKind::FourRooms, ProblemKind::HighVarianceFourRooms];

    pub fn id(self) -> &'static str {
        match self {
            ProblemKind::Collision => "collision",
            ProblemKind::FourRooms => "fourrooms",
            ProblemKind::HighVarianceFourRooms => "hv_fourrooms",
        }
    }

    /// Steps per run used in the published experiments.
    pub fn default_steps(self) -> usize {
        match self {
            ProblemKind::Collision => 20_000,
            _ => 50_000,
        }
    }

    pub fn is_episodic(self) -> bool {
        matches!(self, ProblemKind::Collision)
    }

    /// The instance used for ground truth and audits: Collision features are
    /// drawn from a ChaCha8 stream seeded with 0. Values and `d_b` do not
    /// depend on the features.
    pub fn reference(self) -> Result<Problem> {
        use rand::SeedableRng;
        self.instantiate(&mut rand_chacha::ChaCha8Rng::seed_from_u64(0))
    }

    /// Builds the problem instance for one run. Collision draws its random
    /// binary features from `rng`; Four Rooms features are deterministic.
    pub fn instantiate<R: Rng + ?Sized>(self, rng: &mut R) -> Result<Problem> {
        match self {
            ProblemKind::Collision => {
                let features = collision::CollisionFeatures::random(rng);
                Ok(collision::problem(features.into_table()))
            }
            ProblemKind::FourRooms => fourrooms::FourRooms::standard()?.problem(false),
            ProblemKind::HighVarianceFourRooms => fourrooms::FourRooms::standard()?.problem(true),
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "collision" => Ok(ProblemKind::Collision),
            "fourrooms" | "four_rooms" => Ok(ProblemKind::FourRooms),
            "hv_fourrooms" | "high_variance_fourrooms" | "hv" => Ok(ProblemKind::HighVarianceFourRooms),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }
}

/// `P(s' | s, a)` as a sparse list of `(s', p)` per state-action pair.
#[derive(Clone, Debug)]
pub struct Dynamics {
    next: Vec<Vec<Vec<(usize, f64)>>>,
}

impl Dynamics {
    pub fn new(next: Vec<Vec<Vec<(usize, f64)>>>) -> Result<Self> {
        let n = next.len();
        for (s, per_action) in next.iter().enumerate() {
            for (a, outcomes) in per_action.iter().enumerate() {
                let sum: f64 = outcomes.iter().map(|&(_, p)| p).sum();
                if (sum - 1.0).abs() > 1e-12 || outcomes.iter().any(|&(s2, p)| s2 >= n || p < 0.0) {
                    return Err(Error::InvalidConfig(format!("bad dynamics at ({s},{a})")));
                }
            }
        }
        Ok(Self { next })
    }

    pub fn n_states(&self) -> usize {
        self.next.len()
    }

    pub fn n_actions(&self) -> usize {
        self.next[0].len()
    }

    pub fn outcomes(&self, s: usize, a: usize) -> &[(usize, f64)] {
        &self.next[s][a]
    }

    pub fn sample_with(&self, s: usize, a: usize, u: f64) -> usize {
        let outcomes = &self.next[s][a];
        let mut acc = 0.0;
        for &(s2, p) in outcomes {
            acc += p;
            if u < acc {
                return s2;
            }
        }
        outcomes.last().expect("non-empty outcome list").0
    }

    /// State-to-state transition matrix rows under `policy`, sparse.
    pub fn chain(&self, policy: &TabularPolicy) -> Vec<Vec<(usize, f64)>> {
        (0..self.n_states())
            .map(|s| {
                let mut row: Vec<(usize, f64)> = Vec::new();
                for a in 0..self.n_actions() {
                    let pa = policy.prob(s, a);
                    if pa == 0.0 {
                        continue;
                    }
                    for &(s2, p) in &self.next[s][a] {
                        match row.iter_mut().find(|(t, _)| *t == s2) {
                            Some(entry) => entry.1 += pa * p,
                            None => row.push((s2, pa * p)),
                        }
                    }
                }
                row.sort_by_key(|&(t, _)| t);
                row
            })
            .collect()
    }
}

/// A fully specified benchmark instance for one run.
#[derive(Clone, Debug)]
pub struct Problem {
    pub kind: ProblemKind,
    pub dynamics: Dynamics,
    pub behavior: TabularPolicy,
    pub gvfs: Vec<GvfSpec>,
    pub features: Vec<Arc<FeatureVector>>,
    /// Start-state distribution.
    pub start: Vec<f64>,
}

/// One behavior step `(s, a, s')`, shared by every GVF.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Step {
    pub s: usize,
    pub a: usize,
    pub s_next: usize,
}

impl Problem {
    pub fn n_states(&self) -> usize {
        self.dynamics.n_states()
    }

    pub fn feature_dim(&self) -> usize {
        self.features[0].dim()
    }

    /// Whether GVF `j` learns from steps leaving `s`. Four Rooms GVFs stop
    /// updating once the agent is outside their room.
    pub fn in_scope(&self, j: usize, s: usize) -> bool {
        match self.kind {
            ProblemKind::Collision => true,
            _ => self.gvfs[j].interest(s) > 0.0,
        }
    }

    pub fn transition(&self, j: usize, step: Step) -> Result<Transition> {
        let gvf = &self.gvfs[j];
        let Step { s, a, s_next } = step;
        Transition::new(
            s,
            a,
            s_next,
            gvf.cumulant(s, a, s_next),
            gvf.discount(s, a, s_next),
            gvf.target.prob(s, a),
            self.behavior.prob(s, a),
            gvf.interest(s),
            Arc::clone(&self.features[s]),
            Arc::clone(&self.features[s_next]),
        )
    }

    pub fn stream<R: Rng>(&self, rng: R) -> Stream<'_, R> {
        Stream::new(self, rng)
    }
}

/// Behavior-policy experience generator.
pub struct Stream<'a, R> {
    problem: &'a Problem,
    rng: R,
    state: usize,
}

impl<'a, R: Rng> Stream<'a, R> {
    pub fn new(problem: &'a Problem, mut rng: R) -> Self {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut state = problem.start.len() - 1;
        for (s, &p) in problem.start.iter().enumerate() {
            acc += p;
            if u < acc {
                state = s;
                break;
            }
        }
        Self { problem, rng, state }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn next_step(&mut self) -> Step {
        let s = self.state;
        let a = self.problem.behavior.sample_with(s, self.rng.gen());
        let s_next = self.problem.dynamics.sample_with(s, a, self.rng.gen());
        self.state = s_next;
        Step { s, a, s_next }
    }
}

impl<R: Rng> Iterator for Stream<'_, R> {
    type Item = Step;

    fn next(&mut self) -> Option<Step> {
        Some(self.next_step())
    }
}
