//! Value types shared by every learner, environment and evaluator.
//!
//! All arithmetic is `f64`. Sparse dot products sum active indices in
//! ascending order, and dense dot products sum all indices in ascending order,
//! so both paths agree bit for bit on binary features with finite weights.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// State features `x(s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    dim: usize,
    repr: FeatureRepr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum FeatureRepr {
    Dense(Vec<f64>),
    /// Sorted active indices, each with implicit value 1.
    Binary(Vec<usize>),
}

impl FeatureVector {
    pub fn dense(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidFeatures("dimension must be positive".into()));
        }
        Ok(Self { dim: values.len(), repr: FeatureRepr::Dense(values) })
    }

    /// Binary features. `active` must be strictly increasing and below `dim`.
    pub fn binary(dim: usize, active: Vec<usize>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFeatures("dimension must be positive".into()));
        }
        if active.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidFeatures("active indices must be strictly increasing".into()));
        }
        if let Some(&last) = active.last() {
            if last >= dim {
                return Err(Error::InvalidFeatures(format!("index {last} out of range for dim {dim}")));
            }
        }
        Ok(Self { dim, repr: FeatureRepr::Binary(active) })
    }

    /// Tabular indicator for state `index` out of `dim` states.
    pub fn one_hot(dim: usize, index: usize) -> Result<Self> {
        Self::binary(dim, vec![index])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_binary(&self) -> bool {
        matches!(self.repr, FeatureRepr::Binary(_))
    }

    /// Active indices of a binary vector, `None` for dense vectors.
    pub fn active(&self) -> Option<&[usize]> {
        match &self.repr {
            FeatureRepr::Binary(idx) => Some(idx),
            FeatureRepr::Dense(_) => None,
        }
    }

    pub fn get(&self, i: usize) -> f64 {
        match &self.repr {
            FeatureRepr::Dense(v) => v[i],
            FeatureRepr::Binary(idx) => {
                if idx.binary_search(&i).is_ok() {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match &self.repr {
            FeatureRepr::Dense(v) => v.clone(),
            FeatureRepr::Binary(idx) => {
                let mut out = vec![0.0; self.dim];
                for &i in idx {
                    out[i] = 1.0;
                }
                out
            }
        }
    }

    /// Dense copy of a binary vector, keeping the same values.
    pub fn densified(&self) -> Self {
        Self { dim: self.dim, repr: FeatureRepr::Dense(self.to_dense()) }
    }

    /// `w · x` without a dimension check. Callers guarantee `w.len() == dim`.
    #[inline]
    pub fn dot(&self, w: &[f64]) -> f64 {
        debug_assert_eq!(w.len(), self.dim);
        match &self.repr {
            FeatureRepr::Dense(v) => v.iter().zip(w).fold(0.0, |acc, (x, w)| acc + x * w),
            FeatureRepr::Binary(idx) => idx.iter().fold(0.0, |acc, &i| acc + w[i]),
        }
    }

    /// `out += scale * x`.
    #[inline]
    pub fn add_scaled_to(&self, out: &mut [f64], scale: f64) {
        debug_assert_eq!(out.len(), self.dim);
        match &self.repr {
            FeatureRepr::Dense(v) => {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += scale * x;
                }
            }
            FeatureRepr::Binary(idx) => {
                for &i in idx {
                    out[i] += scale;
                }
            }
        }
    }

    pub fn squared_norm(&self) -> f64 {
        match &self.repr {
            FeatureRepr::Dense(v) => v.iter().map(|x| x * x).sum(),
            FeatureRepr::Binary(idx) => idx.len() as f64,
        }
    }
}

/// Stochastic stationary policy over a finite state and action set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabularPolicy {
    probs: Vec<Vec<f64>>,
}

const ROW_SUM_TOL: f64 = 1e-12;

impl TabularPolicy {
    pub fn new(probs: Vec<Vec<f64>>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPolicy("no states".into()));
        }
        let n_actions = probs[0].len();
        for (s, row) in probs.iter().enumerate() {
            if row.len() != n_actions || n_actions == 0 {
                return Err(Error::InvalidPolicy(format!("state {s} has {} actions", row.len())));
            }
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::InvalidPolicy(format!("state {s} has a probability outside [0,1]")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::InvalidPolicy(format!("state {s} sums to {sum}")));
            }
        }
        Ok(Self { probs })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        let p = 1.0 / n_actions as f64;
        Self { probs: vec![vec![p; n_actions]; n_states] }
    }

    pub fn n_states(&self) -> usize {
        self.probs.len()
    }

    pub fn n_actions(&self) -> usize {
        self.probs[0].len()
    }

    #[inline]
    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s][a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s]
    }

    pub fn is_deterministic_at(&self, s: usize) -> bool {
        self.probs[s].contains(&1.0)
    }

    /// True when `behavior` covers `self` on `states`: every action this
    /// policy may take has positive behavior probability.
    pub fn covered_by(&self, behavior: &TabularPolicy, states: impl IntoIterator<Item = usize>) -> bool {
        states.into_iter().all(|s| {
            self.probs[s]
                .iter()
                .zip(&behavior.probs[s])
                .all(|(&pi, &b)| pi == 0.0 || b > 0.0)
        })
    }

    /// Samples an action by inverting the cumulative distribution with `u` in `[0,1)`.
    pub fn sample_with(&self, s: usize, u: f64) -> usize {
        let row = &self.probs[s];
        let mut acc = 0.0;
        for (a, &p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return a;
            }
        }
        // Rounding can leave `acc` just under 1; fall back to the last supported action.
        row.iter().rposition(|&p| p > 0.0).unwrap_or(row.len() - 1)
    }
}

type TransitionFn = Arc<dyn Fn(usize, usize, usize) -> f64 + Send + Sync>;
type StateFn = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// A prediction question: target policy, cumulant, discount and interest.
#[derive(Clone)]
pub struct GvfSpec {
    pub name: String,
    pub target: TabularPolicy,
    cumulant: TransitionFn,
    discount: TransitionFn,
    interest: StateFn,
}

impl fmt::Debug for GvfSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GvfSpec").field("name", &self.name).finish_non_exhaustive()
    }
}

impl GvfSpec {
    /// Builds a GVF and checks that discount and interest stay in `[0,1]`
    /// over every `(s, a, s')` of the given finite spaces.
    pub fn new(
        name: impl Into<String>,
        target: TabularPolicy,
        cumulant: impl Fn(usize, usize, usize) -> f64 + Send + Sync + 'static,
        discount: impl Fn(usize, usize, usize) -> f64 + Send + Sync + 'static,
        interest: impl Fn(usize) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let gvf = Self {
            name: name.into(),
            target,
            cumulant: Arc::new(cumulant),
            discount: Arc::new(discount),
            interest: Arc::new(interest),
        };
        let n_s = gvf.target.n_states();
        let n_a = gvf.target.n_actions();
        for s in 0..n_s {
            let i = gvf.interest(s);
            if !(0.0..=1.0).contains(&i) {
                return Err(Error::InvalidConfig(format!("interest({s}) = {i} outside [0,1]")));
            }
            for a in 0..n_a {
                for s2 in 0..n_s {
                    let g = gvf.discount(s, a, s2);
                    if !(0.0..=1.0).contains(&g) {
                        return Err(Error::InvalidConfig(format!(
                            "discount({s},{a},{s2}) = {g} outside [0,1]"
                        )));
                    }
                }
            }
        }
        Ok(gvf)
    }

    #[inline]
    pub fn cumulant(&self, s: usize, a: usize, s_next: usize) -> f64 {
        (self.cumulant)(s, a, s_next)
    }

    #[inline]
    pub fn discount(&self, s: usize, a: usize, s_next: usize) -> f64 {
        (self.discount)(s, a, s_next)
    }

    #[inline]
    pub fn interest(&self, s: usize) -> f64 {
        (self.interest)(s)
    }
}

/// One interaction record as seen by a single prediction.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub s: usize,
    pub a: usize,
    pub s_next: usize,
    pub reward: f64,
    pub gamma_next: f64,
    pub pi_prob: f64,
    pub b_prob: f64,
    pub interest: f64,
    pub x: Arc<FeatureVector>,
    pub x_next: Arc<FeatureVector>,
}

impl Transition {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        s: usize,
        a: usize,
        s_next: usize,
        reward: f64,
        gamma_next: f64,
        pi_prob: f64,
        b_prob: f64,
        interest: f64,
        x: Arc<FeatureVector>,
        x_next: Arc<FeatureVector>,
    ) -> Result<Self> {
        if b_prob <= 0.0 {
            return Err(Error::ZeroBehaviorProbability);
        }
        if !(0.0..=1.0).contains(&b_prob) || !(0.0..=1.0).contains(&pi_prob) {
            return Err(Error::InvalidTransition("probabilities must lie in [0,1]".into()));
        }
        if !(0.0..=1.0).contains(&gamma_next) {
            return Err(Error::InvalidTransition(format!("gamma_next {gamma_next} outside [0,1]")));
        }
        if !(0.0..=1.0).contains(&interest) {
            return Err(Error::InvalidTransition(format!("interest {interest} outside [0,1]")));
        }
        if x.dim() != x_next.dim() {
            return Err(Error::DimensionMismatch { expected: x.dim(), got: x_next.dim() });
        }
        Ok(Self { s, a, s_next, reward, gamma_next, pi_prob, b_prob, interest, x, x_next })
    }

    /// Importance sampling ratio `π(a|s) / b(a|s)`.
    #[inline]
    pub fn rho(&self) -> f64 {
        self.pi_prob / self.b_prob
    }
}

/// `π / b`, rejecting actions the behavior could not have taken.
pub fn importance_ratio(pi_prob: f64, b_prob: f64) -> Result<f64> {
    if b_prob <= 0.0 {
        return Err(Error::ZeroBehaviorProbability);
    }
    Ok(pi_prob / b_prob)
}

pub fn rho(t: &Transition) -> f64 {
    t.rho()
}

/// `R + γ' w·x' − w·x`.
#[inline]
pub fn td_error(w: &[f64], t: &Transition) -> f64 {
    t.reward + t.gamma_next * t.x_next.dot(w) - t.x.dot(w)
}

pub fn predict(w: &[f64], x: &FeatureVector) -> Result<f64> {
    if w.len() != x.dim() {
        return Err(Error::DimensionMismatch { expected: x.dim(), got: w.len() });
    }
    Ok(x.dot(w))
}

/// Primary and (optional) secondary weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSet {
    pub w: Vec<f64>,
    pub h: Vec<f64>,
}

impl WeightSet {
    pub fn zeros(dim: usize, with_secondary: bool) -> Self {
        Self { w: vec![0.0; dim], h: if with_secondary { vec![0.0; dim] } else { Vec::new() } }
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn is_finite(&self) -> bool {
        self.w.iter().chain(&self.h).all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arc(x: FeatureVector) -> Arc<FeatureVector> {
        Arc::new(x)
    }

    fn transition(pi: f64, b: f64) -> Transition {
        let x = arc(FeatureVector::dense(vec![1.0, 0.0]).unwrap());
        let xn = arc(FeatureVector::dense(vec![0.0, 1.0]).unwrap());
        Transition::new(0, 0, 1, 0.0, 0.9, pi, b, 1.0, x, xn).unwrap()
    }

    #[test]
    fn rho_examples() {
        assert_eq!(transition(1.0, 0.5).rho(), 2.0);
        assert_eq!(transition(0.25, 0.25).rho(), 1.0);
        assert_eq!(transition(0.5, 0.01).rho(), 50.0);
        assert_eq!(transition(0.0, 0.5).rho(), 0.0);
    }

    #[test]
    fn zero_behavior_probability_is_rejected() {
        assert!(matches!(importance_ratio(1.0, 0.0), Err(Error::ZeroBehaviorProbability)));
        let x = arc(FeatureVector::one_hot(2, 0).unwrap());
        let r = Transition::new(0, 0, 0, 0.0, 0.9, 1.0, 0.0, 1.0, x.clone(), x);
        assert!(matches!(r, Err(Error::ZeroBehaviorProbability)));
    }

    #[test]
    fn td_error_examples() {
        let x = arc(FeatureVector::dense(vec![1.0, 0.0]).unwrap());
        let xn = arc(FeatureVector::dense(vec![0.0, 1.0]).unwrap());
        let t = Transition::new(0, 0, 1, 1.0, 0.9, 1.0, 1.0, 1.0, x.clone(), xn.clone()).unwrap();
        assert_eq!(td_error(&[0.0, 0.0], &t), 1.0);

        let t = Transition::new(0, 0, 1, 0.0, 1.0, 1.0, 1.0, 1.0, x.clone(), xn.clone()).unwrap();
        assert_eq!(td_error(&[0.7, 0.7], &t), 0.0);

        let t = Transition::new(0, 0, 1, 0.0, 0.9, 1.0, 1.0, 1.0, x, xn).unwrap();
        assert!((td_error(&[0.5, 0.5], &t) - (-0.05)).abs() < 1e-15);
    }

    #[test]
    fn predict_examples() {
        let x = FeatureVector::binary(6, vec![0, 1, 2]).unwrap();
        assert_eq!(predict(&[0.0; 6], &x).unwrap(), 0.0);
        assert_eq!(predict(&[1.0, 1.0, 1.0, 0.0, 0.0, 0.0], &x).unwrap(), 3.0);
        let values = [0.3, -1.25, 7.5, 0.0];
        for (i, v) in values.iter().enumerate() {
            let x = FeatureVector::one_hot(4, i).unwrap();
            assert_eq!(predict(&values, &x).unwrap(), *v);
        }
        assert!(matches!(predict(&[0.0; 5], &x), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn binary_features_validate_indices() {
        assert!(FeatureVector::binary(4, vec![1, 1]).is_err());
        assert!(FeatureVector::binary(4, vec![2, 1]).is_err());
        assert!(FeatureVector::binary(4, vec![4]).is_err());
        assert!(FeatureVector::binary(0, vec![]).is_err());
        assert!(FeatureVector::dense(vec![]).is_err());
    }

    #[test]
    fn policy_rows_must_sum_to_one() {
        assert!(TabularPolicy::new(vec![vec![0.5, 0.5], vec![0.3, 0.6]]).is_err());
        assert!(TabularPolicy::new(vec![vec![1.5, -0.5]]).is_err());
        let pi = TabularPolicy::new(vec![vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let b = TabularPolicy::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert!(pi.covered_by(&b, 0..2));
        assert!(!b.covered_by(&pi, 0..2));
    }

    #[test]
    fn gvf_rejects_out_of_range_discount() {
        let pi = TabularPolicy::uniform(2, 2);
        assert!(GvfSpec::new("bad", pi.clone(), |_, _, _| 0.0, |_, _, _| 1.5, |_| 1.0).is_err());
        assert!(GvfSpec::new("bad", pi.clone(), |_, _, _| 0.0, |_, _, _| 0.9, |_| -0.1).is_err());
        let g = GvfSpec::new("ok", pi, |_, _, _| 1.0, |_, _, _| 0.9, |_| 1.0).unwrap();
        assert_eq!(g.discount(0, 1, 1), 0.9);
    }

    proptest! {
        #[test]
        fn sparse_and_dense_dot_agree_exactly(
            (dim, mask, w) in (1usize..40).prop_flat_map(|d| (
                Just(d),
                proptest::collection::vec(any::<bool>(), d),
                proptest::collection::vec(-1e6f64..1e6, d),
            ))
        ) {
            let active: Vec<usize> = mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
            let sparse = FeatureVector::binary(dim, active).unwrap();
            let dense = sparse.densified();
            prop_assert!(sparse.dot(&w) == dense.dot(&w));
        }

        #[test]
        fn rho_is_scale_covariant(pi in 0.0f64..1.0, b in 0.01f64..1.0, c in 0.01f64..1.0) {
            let r1 = importance_ratio(pi, b).unwrap();
            let r2 = importance_ratio(pi * c, b * c).unwrap();
            prop_assert!((r1 - r2).abs() <= 1e-12 * r1.max(1.0));
        }

        #[test]
        fn td_error_homogeneous_part_is_linear(
            w1 in proptest::collection::vec(-10.0f64..10.0, 3),
            w2 in proptest::collection::vec(-10.0f64..10.0, 3),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            gamma in 0.0f64..1.0,
        ) {
            let x = Arc::new(FeatureVector::dense(vec![1.0, 0.5, 0.0]).unwrap());
            let xn = Arc::new(FeatureVector::dense(vec![0.0, 0.25, 1.0]).unwrap());
            let t = Transition::new(0, 0, 1, 0.0, gamma, 1.0, 1.0, 1.0, x, xn).unwrap();
            let mix: Vec<f64> = w1.iter().zip(&w2).map(|(p, q)| a * p + b * q).collect();
            let lhs = td_error(&mix, &t);
            let rhs = a * td_error(&w1, &t) + b * td_error(&w2, &t);
            prop_assert!((lhs - rhs).abs() <= 1e-9);
        }
    }
}
