//! Ground truth and error metrics.
//!
//! True values come from an exact policy-evaluation solve, and `d_b` from
//! power iteration on the behavior chain. Both benchmarks are small enough to
//! enumerate. [`Evaluator`] caches the pieces the runner needs to score a set
//! of weight vectors cheaply.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::FeatureVector;
use crate::env::Problem;
use crate::error::{Error, Result};

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITERS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DbSource {
    Exact,
    Sampled(u64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// One state-indexed vector per GVF.
    pub v_true: Vec<Vec<f64>>,
    pub d_b: Vec<f64>,
    pub source: DbSource,
}

impl GroundTruth {
    pub fn exact(problem: &Problem) -> Result<Self> {
        let v_true = (0..problem.gvfs.len()).map(|j| true_values(problem, j)).collect::<Result<_>>()?;
        Ok(Self { v_true, d_b: stationary_distribution(problem)?, source: DbSource::Exact })
    }

    pub fn sampled<R: Rng>(problem: &Problem, steps: u64, rng: R) -> Result<Self> {
        let v_true = (0..problem.gvfs.len()).map(|j| true_values(problem, j)).collect::<Result<_>>()?;
        Ok(Self { v_true, d_b: sampled_distribution(problem, steps, rng)?, source: DbSource::Sampled(steps) })
    }

    /// `state,d_b,v_<gvf name>...` with one row per state.
    pub fn write_csv<W: Write>(&self, problem: &Problem, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["state".to_string(), "d_b".to_string()];
        header.extend(problem.gvfs.iter().map(|g| format!("v_{}", g.name)));
        w.write_record(&header)?;
        for s in 0..self.d_b.len() {
            let mut row = vec![s.to_string(), self.d_b[s].to_string()];
            row.extend(self.v_true.iter().map(|v| v[s].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact `v_π` for GVF `j`: solves `v = r_π + P_π^γ v`, where `r_π` is the
/// expected cumulant and `P_π^γ` the discounted target-policy transition matrix.
pub fn true_values(problem: &Problem, j: usize) -> Result<Vec<f64>> {
    let gvf = problem.gvfs.get(j).ok_or(Error::InvalidState(j))?;
    let n = problem.n_states();
    let mut m = DMatrix::<f64>::identity(n, n);
    let mut r = DVector::<f64>::zeros(n);
    for s in 0..n {
        for a in 0..problem.dynamics.n_actions() {
            let pa = gvf.target.prob(s, a);
            if pa == 0.0 {
                continue;
            }
            for &(s2, p) in problem.dynamics.outcomes(s, a) {
                let w = pa * p;
                r[s] += w * gvf.cumulant(s, a, s2);
                m[(s, s2)] -= w * gvf.discount(s, a, s2);
            }
        }
    }
    let v = m.lu().solve(&r).ok_or(Error::Singular)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(v.iter().copied().collect())
}

/// Discounted return of the target policy from `start`, following the
/// most probable action and outcome. Exact when both are deterministic.
pub fn rollout_value(problem: &Problem, j: usize, start: usize, horizon: usize) -> Result<f64> {
    let gvf = problem.gvfs.get(j).ok_or(Error::InvalidState(j))?;
    if start >= problem.n_states() {
        return Err(Error::InvalidState(start));
    }
    let (mut s, mut ret, mut disc) = (start, 0.0, 1.0);
    for _ in 0..horizon {
        let row = gvf.target.row(s);
        let a = (0..row.len()).max_by(|&x, &y| row[x].total_cmp(&row[y]).then(y.cmp(&x))).expect("non-empty row");
        let outcomes = problem.dynamics.outcomes(s, a);
        let s2 = outcomes.iter().max_by(|x, y| x.1.total_cmp(&y.1)).expect("non-empty").0;
        ret += disc * gvf.cumulant(s, a, s2);
        disc *= gvf.discount(s, a, s2);
        if disc == 0.0 {
            return Ok(ret);
        }
        s = s2;
    }
    Err(Error::HorizonExceeded(horizon))
}

/// Stationary distribution of the behavior chain, by power iteration on the
/// lazy chain `(I + P) / 2` (same fixed point, no periodicity).
pub fn stationary_distribution(problem: &Problem) -> Result<Vec<f64>> {
    let chain = problem.dynamics.chain(&problem.behavior);
    let n = chain.len();
    let mut d = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..POWER_MAX_ITERS {
        next.iter_mut().zip(&d).for_each(|(nx, di)| *nx = 0.5 * di);
        for (s, row) in chain.iter().enumerate() {
            let mass = 0.5 * d[s];
            for &(s2, p) in row {
                next[s2] += mass * p;
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        let change: f64 = next.iter().zip(&d).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut d, &mut next);
        if change < POWER_TOL {
            return Ok(d);
        }
    }
    Err(Error::NoConvergence(POWER_MAX_ITERS))
}

/// Empirical visit frequencies of `s_t` over `steps` behavior transitions.
pub fn sampled_distribution<R: Rng>(problem: &Problem, steps: u64, rng: R) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::Empty);
    }
    let mut counts = vec![0u64; problem.n_states()];
    let mut stream = problem.stream(rng);
    for _ in 0..steps {
        counts[stream.next_step().s] += 1;
    }
    Ok(counts.into_iter().map(|c| c as f64 / steps as f64).collect())
}

/// `sqrt(Σ_s d_b(s) (w·x(s) − v(s))²)`.
pub fn rve(w: &[f64], features: &[impl AsRef<FeatureVector>], v_true: &[f64], d_b: &[f64]) -> f64 {
    features
        .iter()
        .zip(v_true)
        .zip(d_b)
        .fold(0.0, |acc, ((x, v), d)| {
            let err = x.as_ref().dot(w) - v;
            acc + d * err * err
        })
        .sqrt()
}

/// Interest-weighted RVE, normalized by the interest mass.
pub fn nrve(
    w: &[f64],
    features: &[impl AsRef<FeatureVector>],
    v_true: &[f64],
    d_b: &[f64],
    interest: &[f64],
) -> Result<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for (((x, v), d), i) in features.iter().zip(v_true).zip(d_b).zip(interest) {
        let weight = d * i;
        if weight > 0.0 {
            let err = x.as_ref().dot(w) - v;
            num += weight * err * err;
            den += weight;
        }
    }
    if den <= 0.0 {
        return Err(Error::ZeroInterest);
    }
    Ok((num / den).sqrt())
}

/// Mean of per-GVF NRVE values.
pub fn trve(nrves: &[f64]) -> Result<f64> {
    if nrves.is_empty() {
        return Err(Error::Empty);
    }
    Ok(nrves.iter().sum::<f64>() / nrves.len() as f64)
}

pub fn auc(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Empty);
    }
    Ok(series.iter().sum::<f64>() / series.len() as f64)
}

/// Mean of the last `⌈fraction · len⌉` points.
pub fn final_perf(series: &[f64], fraction: f64) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::Empty);
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidConfig(format!("fraction={fraction} outside (0,1]")));
    }
    let k = final_window(series.len(), fraction);
    auc(&series[series.len() - k..])
}

/// `⌈fraction · len⌉`, at least one.
pub fn final_window(len: usize, fraction: f64) -> usize {
    // Round away representation error before the ceiling, so 0.01 · 20000 is 200.
    let raw = fraction * len as f64;
    let k = ((raw * 1e9).round() / 1e9).ceil() as usize;
    k.clamp(1, len.max(1))
}

struct ScoredState {
    weight: f64,
    x: usize,
    v: f64,
}

/// Precomputed scoring for one problem instance.
///
/// Collision is scored with the RVE of its single GVF; Four Rooms with the
/// mean NRVE over its GVFs, each weighted by `d_b` times that GVF's interest.
pub struct Evaluator {
    features: Vec<std::sync::Arc<FeatureVector>>,
    per_gvf: Vec<Vec<ScoredState>>,
}

impl Evaluator {
    pub fn new(problem: &Problem, truth: &GroundTruth) -> Result<Self> {
        let n = problem.n_states();
        if truth.d_b.len() != n || truth.v_true.len() != problem.gvfs.len() {
            return Err(Error::DimensionMismatch { expected: n, got: truth.d_b.len() });
        }
        let mut per_gvf = Vec::with_capacity(problem.gvfs.len());
        for (j, gvf) in problem.gvfs.iter().enumerate() {
            let mass: f64 = (0..n).map(|s| truth.d_b[s] * gvf.interest(s)).sum();
            if mass <= 0.0 {
                return Err(Error::ZeroInterest);
            }
            per_gvf.push(
                (0..n)
                    .filter_map(|s| {
                        let weight = truth.d_b[s] * gvf.interest(s) / mass;
                        (weight > 0.0).then(|| ScoredState { weight, x: s, v: truth.v_true[j][s] })
                    })
                    .collect(),
            );
        }
        Ok(Self { features: problem.features.clone(), per_gvf })
    }

    pub fn n_gvfs(&self) -> usize {
        self.per_gvf.len()
    }

    pub fn gvf_error(&self, j: usize, w: &[f64]) -> f64 {
        self.per_gvf[j]
            .iter()
            .fold(0.0, |acc, st| {
                let err = self.features[st.x].dot(w) - st.v;
                acc + st.weight * err * err
            })
            .sqrt()
    }

    /// Mean per-GVF error over the given weight vectors, one per GVF.
    pub fn error<'a>(&self, weights: impl IntoIterator<Item = &'a [f64]>) -> f64 {
        let mut total = 0.0;
        let mut count = 0;
        for (j, w) in weights.into_iter().enumerate() {
            total += self.gvf_error(j, w);
            count += 1;
        }
        debug_assert_eq!(count, self.n_gvfs());
        total / count as f64
    }

    /// Error of the all-zero weights.
    pub fn zero_error(&self) -> f64 {
        let dim = self.features[0].dim();
        let zeros = vec![0.0; dim];
        self.error((0..self.n_gvfs()).map(|_| zeros.as_slice()))
    }
}
