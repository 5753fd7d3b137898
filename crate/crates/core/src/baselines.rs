//! Least-squares fixed points (LSTD, LSETD, LSAltTD) and the NEU / MSPBE
//! objectives.
//!
//! The accumulator keeps sums of the per-step contributions and divides by the
//! step count on read, so `a()`, `b()` and `c()` are running means. Sparse
//! feature vectors then only touch the columns they activate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::domain::{FeatureVector, Transition};
use crate::error::{Error, Result};

pub const DEFAULT_RIDGE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LstdVariant {
    Plain,
    /// Emphatic weighting. `beta: None` decays the followon with `γ_t`.
    Emphatic { beta: Option<f64> },
    AltLife,
}

impl LstdVariant {
    pub fn id(self) -> &'static str {
        match self {
            LstdVariant::Plain => "lstd",
            LstdVariant::Emphatic { .. } => "lsetd",
            LstdVariant::AltLife => "lsaltd",
        }
    }
}

/// Trace used by the plain variant.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LstdTrace {
    /// `e ← ρ_t γ_t (λ e + x_t)`.
    #[default]
    Discounted,
    /// `e ← ρ_t (γ_t λ e + x_t)`, the Off-policy TD(λ) trace.
    Learner,
}

#[derive(Clone, Debug)]
pub struct LstdAccumulator {
    variant: LstdVariant,
    trace_kind: LstdTrace,
    lambda: f64,
    a_sum: DMatrix<f64>,
    b_sum: DVector<f64>,
    c_sum: DMatrix<f64>,
    e: Vec<f64>,
    n: u64,
    followon: f64,
    last_rho: f64,
    last_gamma: f64,
    rho_product: f64,
}

impl LstdAccumulator {
    pub fn new(dim: usize, lambda: f64, variant: LstdVariant) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidFeatures("feature dimension must be positive".into()));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidConfig(format!("lambda={lambda} outside [0,1]")));
        }
        if let LstdVariant::Emphatic { beta: Some(beta) } = variant {
            if !(0.0..=1.0).contains(&beta) {
                return Err(Error::InvalidConfig(format!("beta={beta} outside [0,1]")));
            }
        }
        Ok(Self {
            variant,
            trace_kind: LstdTrace::default(),
            lambda,
            a_sum: DMatrix::zeros(dim, dim),
            b_sum: DVector::zeros(dim),
            c_sum: DMatrix::zeros(dim, dim),
            e: vec![0.0; dim],
            n: 0,
            followon: 0.0,
            last_rho: 0.0,
            last_gamma: 0.0,
            rho_product: 1.0,
        })
    }

    pub fn with_trace(mut self, trace: LstdTrace) -> Self {
        self.trace_kind = trace;
        self
    }

    pub fn variant(&self) -> LstdVariant {
        self.variant
    }

    pub fn dim(&self) -> usize {
        self.e.len()
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn trace(&self) -> &[f64] {
        &self.e
    }

    pub fn accumulate(&mut self, t: &Transition) -> Result<()> {
        if t.x.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: t.x.dim() });
        }
        let rho = t.rho();
        let gamma_t = self.last_gamma;
        let lambda = self.lambda;
        match self.variant {
            LstdVariant::Plain => match self.trace_kind {
                LstdTrace::Discounted => {
                    self.e.iter_mut().for_each(|v| *v *= lambda);
                    t.x.add_scaled_to(&mut self.e, 1.0);
                    let c = rho * gamma_t;
                    self.e.iter_mut().for_each(|v| *v *= c);
                }
                LstdTrace::Learner => self.decay_add_scale(gamma_t * lambda, &t.x, 1.0, rho),
            },
            LstdVariant::Emphatic { beta } => {
                let beta_eff = beta.unwrap_or(gamma_t);
                self.followon = self.last_rho * beta_eff * self.followon + t.interest;
                let m = self.followon + lambda * (t.interest - self.followon);
                self.decay_add_scale(gamma_t * lambda, &t.x, m, rho);
            }
            LstdVariant::AltLife => {
                if self.n == 0 || gamma_t == 0.0 {
                    self.rho_product = 1.0;
                    self.e.fill(0.0);
                }
                let p = self.rho_product;
                self.decay_add_scale(gamma_t * lambda, &t.x, p, rho);
                self.rho_product *= rho;
            }
        }

        // A += e (x − γ′x′)ᵀ, column by column.
        let e = DVector::from_column_slice(&self.e);
        add_outer(&mut self.a_sum, &e, &t.x, 1.0);
        add_outer(&mut self.a_sum, &e, &t.x_next, -t.gamma_next);
        self.b_sum.axpy(t.reward, &e, 1.0);
        let x = DVector::from_vec(t.x.to_dense());
        add_outer(&mut self.c_sum, &x, &t.x, 1.0);

        self.n += 1;
        self.last_rho = rho;
        self.last_gamma = t.gamma_next;
        Ok(())
    }

    /// `e ← outer·(decay·e + scale_x·x)`.
    fn decay_add_scale(&mut self, decay: f64, x: &FeatureVector, scale_x: f64, outer: f64) {
        self.e.iter_mut().for_each(|v| *v *= decay);
        x.add_scaled_to(&mut self.e, scale_x);
        self.e.iter_mut().for_each(|v| *v *= outer);
    }

    fn mean_scale(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::Empty);
        }
        Ok(1.0 / self.n as f64)
    }

    pub fn a(&self) -> Result<DMatrix<f64>> {
        Ok(&self.a_sum * self.mean_scale()?)
    }

    pub fn b(&self) -> Result<DVector<f64>> {
        Ok(&self.b_sum * self.mean_scale()?)
    }

    pub fn c(&self) -> Result<DMatrix<f64>> {
        Ok(&self.c_sum * self.mean_scale()?)
    }

    pub fn solve(&self, ridge: f64) -> Result<Vec<f64>> {
        lstd_solve(&self.a()?, &self.b()?, ridge)
    }

    pub fn mspbe(&self, w: &[f64]) -> Result<f64> {
        compute_mspbe(&self.a()?, &self.b()?, &self.c()?, w)
    }

    pub fn neu(&self, w: &[f64]) -> Result<f64> {
        compute_neu(&self.a()?, &self.b()?, w)
    }

    /// Combines statistics from another shard as a weighted average.
    /// Trace state is kept from `self`.
    pub fn merge(&mut self, other: &LstdAccumulator) -> Result<()> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        if other.variant != self.variant || other.lambda != self.lambda || other.trace_kind != self.trace_kind {
            return Err(Error::InvalidConfig("cannot merge accumulators with different settings".into()));
        }
        self.a_sum += &other.a_sum;
        self.b_sum += &other.b_sum;
        self.c_sum += &other.c_sum;
        self.n += other.n;
        Ok(())
    }
}

/// `out += scale · u xᵀ`.
fn add_outer(out: &mut DMatrix<f64>, u: &DVector<f64>, x: &FeatureVector, scale: f64) {
    if scale == 0.0 {
        return;
    }
    match x.active() {
        Some(active) => {
            for &j in active {
                out.column_mut(j).axpy(scale, u, 1.0);
            }
        }
        None => {
            for j in 0..x.dim() {
                let xj = x.get(j);
                if xj != 0.0 {
                    out.column_mut(j).axpy(scale * xj, u, 1.0);
                }
            }
        }
    }
}

/// `(A + ridge·I)⁻¹ b`.
pub fn lstd_solve(a: &DMatrix<f64>, b: &DVector<f64>, ridge: f64) -> Result<Vec<f64>> {
    if ridge.is_nan() || ridge < 0.0 {
        return Err(Error::InvalidConfig(format!("ridge={ridge} must be non-negative")));
    }
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let reg = a + DMatrix::identity(n, n) * ridge;
    let w = reg.lu().solve(b).ok_or(Error::Singular)?;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular);
    }
    Ok(w.iter().copied().collect())
}

fn residual(a: &DMatrix<f64>, b: &DVector<f64>, w: &[f64]) -> Result<DVector<f64>> {
    if a.ncols() != w.len() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.ncols(), got: w.len() });
    }
    Ok(b - a * DVector::from_column_slice(w))
}

/// `(b − Aw)ᵀ C⁻¹ (b − Aw)`.
pub fn compute_mspbe(a: &DMatrix<f64>, b: &DVector<f64>, c: &DMatrix<f64>, w: &[f64]) -> Result<f64> {
    let r = residual(a, b, w)?;
    let chol = c.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    Ok(r.dot(&chol.solve(&r)))
}

/// `‖b − Aw‖²`.
pub fn compute_neu(a: &DMatrix<f64>, b: &DVector<f64>, w: &[f64]) -> Result<f64> {
    Ok(residual(a, b, w)?.norm_squared())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::collision;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn dense(v: &[f64]) -> Arc<FeatureVector> {
        Arc::new(FeatureVector::dense(v.to_vec()).unwrap())
    }

    fn tr(x: &[f64], x2: &[f64], r: f64, g: f64, pi: f64, b: f64) -> Transition {
        Transition::new(0, 0, 0, r, g, pi, b, 1.0, dense(x), dense(x2)).unwrap()
    }

    #[test]
    fn single_step_is_one_rank_one_term() {
        let mut acc = LstdAccumulator::new(2, 0.5, LstdVariant::Plain).unwrap().with_trace(LstdTrace::Learner);
        acc.accumulate(&tr(&[1.0, 2.0], &[0.5, 0.0], 3.0, 0.9, 1.0, 0.5)).unwrap();
        // e = ρ x = [2, 4]; x − γx′ = [0.55, 2].
        let a = acc.a().unwrap();
        assert!((a - DMatrix::from_row_slice(2, 2, &[1.1, 4.0, 2.2, 8.0])).amax() < 1e-15);
        assert_eq!(acc.b().unwrap(), DVector::from_vec(vec![6.0, 12.0]));
        assert_eq!(acc.c().unwrap(), DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]));
    }

    #[test]
    fn zero_ratio_step_contributes_nothing() {
        let mut acc = LstdAccumulator::new(2, 0.5, LstdVariant::Plain).unwrap();
        acc.accumulate(&tr(&[1.0, 0.0], &[0.0, 1.0], 1.0, 0.9, 1.0, 0.5)).unwrap();
        acc.accumulate(&tr(&[0.0, 1.0], &[1.0, 0.0], 1.0, 0.9, 1.0, 0.5)).unwrap();
        let a_before = acc.a().unwrap() * 2.0;
        acc.accumulate(&tr(&[0.0, 1.0], &[1.0, 0.0], 5.0, 0.9, 0.0, 0.5)).unwrap();
        assert!(acc.trace().iter().all(|&v| v == 0.0));
        assert!((acc.a().unwrap() * 3.0 - a_before).amax() < 1e-12);
    }

    #[test]
    fn identity_solve() {
        let b = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        let w = lstd_solve(&DMatrix::identity(3, 3), &b, 0.0).unwrap();
        assert_eq!(w, vec![1.0, -2.0, 3.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let b = DVector::from_vec(vec![1.0, 1.0]);
        assert!(matches!(lstd_solve(&a, &b, 0.0), Err(Error::Singular)));
        assert!(lstd_solve(&a, &b, 1e-3).is_ok());
        assert!(LstdAccumulator::new(2, 0.0, LstdVariant::Plain).unwrap().solve(0.0).is_err());
    }

    #[test]
    fn mspbe_equals_neu_with_identity_c() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, -0.3, 1.0]);
        let b = DVector::from_vec(vec![0.4, -1.0]);
        let w = [0.25, 0.75];
        let m = compute_mspbe(&a, &b, &DMatrix::identity(2, 2), &w).unwrap();
        assert!((m - compute_neu(&a, &b, &w).unwrap()).abs() < 1e-15);
        let bad_c = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(matches!(compute_mspbe(&a, &b, &bad_c, &w), Err(Error::NotPositiveDefinite)));
    }

    #[test]
    fn mspbe_matches_projection_norm() {
        // Three-state on-policy chain, two features, λ = 0.
        let p = DMatrix::from_row_slice(3, 3, &[0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.5, 0.0, 0.5]);
        let d = DVector::from_vec(vec![1.0 / 3.0; 3]);
        let r = DVector::from_vec(vec![0.0, 1.0, -0.5]);
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.5, 0.5, 0.0, 1.0]);
        let gamma = 0.8;
        let dm = DMatrix::from_diagonal(&d);
        let ident = DMatrix::<f64>::identity(3, 3);
        let a = x.transpose() * &dm * (&ident - &p * gamma) * &x;
        let b = x.transpose() * &dm * &r;
        let c = x.transpose() * &dm * &x;
        let w = [0.3, -0.2];
        let wv = DVector::from_column_slice(&w);
        let v = &x * &wv;
        let td = &r + (&p * &v) * gamma - &v;
        let proj = &x * c.clone().try_inverse().unwrap() * x.transpose() * &dm * td;
        let brute = (proj.transpose() * &dm * &proj)[(0, 0)];
        let m = compute_mspbe(&a, &b, &c, &w).unwrap();
        assert!((m - brute).abs() < 1e-12, "{m} vs {brute}");
    }

    fn collision_accumulator(variant: LstdVariant, lambda: f64, steps: usize, seed: u64) -> LstdAccumulator {
        let problem = collision::problem(collision::tabular_features());
        let mut acc = LstdAccumulator::new(8, lambda, variant).unwrap();
        let mut stream = problem.stream(ChaCha8Rng::seed_from_u64(seed));
        for _ in 0..steps {
            acc.accumulate(&problem.transition(0, stream.next_step()).unwrap()).unwrap();
        }
        acc
    }

    #[test]
    fn tabular_collision_recovers_true_values() {
        for variant in [LstdVariant::Plain, LstdVariant::Emphatic { beta: None }, LstdVariant::AltLife] {
            let acc = collision_accumulator(variant, 0.0, 100_000, 1);
            let w = acc.solve(DEFAULT_RIDGE).unwrap();
            for (i, wi) in w.iter().enumerate() {
                let truth = collision::GAMMA.powi(7 - i as i32);
                assert!((wi - truth).abs() < 0.05, "{variant:?} state {i}: {wi} vs {truth}");
            }
            assert!(acc.mspbe(&w).unwrap() < 1e-10);
        }
    }

    #[test]
    fn merge_order_does_not_matter() {
        let a = collision_accumulator(LstdVariant::Plain, 0.9, 2_000, 2);
        let b = collision_accumulator(LstdVariant::Plain, 0.9, 3_000, 3);
        let mut ab = a.clone();
        ab.merge(&b).unwrap();
        let mut ba = b.clone();
        ba.merge(&a).unwrap();
        assert_eq!(ab.n(), 5_000);
        let (wa, wb) = (ab.solve(DEFAULT_RIDGE).unwrap(), ba.solve(DEFAULT_RIDGE).unwrap());
        for (p, q) in wa.iter().zip(&wb) {
            assert!((p - q).abs() <= 1e-10 * p.abs().max(1.0));
        }
        let other = LstdAccumulator::new(8, 0.0, LstdVariant::Plain).unwrap();
        assert!(ab.merge(&other).is_err());
    }
}
