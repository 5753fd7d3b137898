//! The twelve linear off-policy prediction learners.
//!
//! Every learner is a per-transition update of a [`WeightSet`] and a
//! [`TraceState`]. The free `*_step` functions are the updates themselves;
//! [`Learner`] bundles them with a configuration, divergence tracking and
//! JSON snapshots.
//!
//! The trace state remembers `γ_t`, the discount of the current state, as the
//! `gamma_next` of the previous transition. It starts at zero along with every
//! trace, so the first transition of a stream never decays anything.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{td_error, FeatureVector, TabularPolicy, Transition, WeightSet};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[serde(rename = "td")]
    OffPolicyTd,
    #[serde(rename = "altlife")]
    AltLifeTd,
    Gtd,
    Gtd2,
    Htd,
    Pgtd,
    Pgtd2,
    Etd,
    #[serde(rename = "etdb")]
    EtdBeta,
    Tb,
    Vtrace,
    Abtd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 12] = [
        Algorithm::OffPolicyTd,
        Algorithm::AltLifeTd,
        Algorithm::Gtd,
        Algorithm::Gtd2,
        Algorithm::Htd,
        Algorithm::Pgtd,
        Algorithm::Pgtd2,
        Algorithm::Etd,
        Algorithm::EtdBeta,
        Algorithm::Tb,
        Algorithm::Vtrace,
        Algorithm::Abtd,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::OffPolicyTd => "td",
            Algorithm::AltLifeTd => "altlife",
            Algorithm::Gtd => "gtd",
            Algorithm::Gtd2 => "gtd2",
            Algorithm::Htd => "htd",
            Algorithm::Pgtd => "pgtd",
            Algorithm::Pgtd2 => "pgtd2",
            Algorithm::Etd => "etd",
            Algorithm::EtdBeta => "etdb",
            Algorithm::Tb => "tb",
            Algorithm::Vtrace => "vtrace",
            Algorithm::Abtd => "abtd",
        }
    }

    /// Learners with a secondary weight vector `h`.
    pub fn uses_secondary(self) -> bool {
        matches!(self, Algorithm::Gtd | Algorithm::Gtd2 | Algorithm::Htd | Algorithm::Pgtd | Algorithm::Pgtd2)
    }

    pub fn uses_lambda(self) -> bool {
        self != Algorithm::Abtd
    }

    pub fn uses_beta(self) -> bool {
        self == Algorithm::EtdBeta
    }

    pub fn uses_zeta(self) -> bool {
        self == Algorithm::Abtd
    }

    pub fn is_emphatic(self) -> bool {
        matches!(self, Algorithm::Etd | Algorithm::EtdBeta)
    }

    /// Alternative-life TD needs episode boundaries to reset its ratio product.
    pub fn episodic_only(self) -> bool {
        self == Algorithm::AltLifeTd
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        let found = match lower.as_str() {
            "offtd" | "off_policy_td" => Some(Algorithm::OffPolicyTd),
            "altlife_td" | "alternative_life" => Some(Algorithm::AltLifeTd),
            "etd_beta" => Some(Algorithm::EtdBeta),
            "v-trace" | "v_trace" => Some(Algorithm::Vtrace),
            other => Algorithm::ALL.into_iter().find(|a| a.id() == other),
        };
        found.ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// Where the importance ratio enters the Off-policy TD update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoPlacement {
    /// `ρ_t` multiplies the whole TD error.
    #[default]
    Full,
    /// `δ′ = ρ_t(R + γ′w·x′) − w·x`, applied with the `z′` trace.
    Partial,
}

/// Off-policy TD trace bookkeeping: `z^ρ = ρ_t z′`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceForm {
    /// `z^ρ ← ρ_t(γ_t λ z^ρ + x_t)`, `w ← w + α δ z^ρ`.
    #[default]
    Inside,
    /// `z′ ← ρ_{t−1} γ_t λ z′ + x_t`, `w ← w + α ρ_t δ z′`.
    Outside,
}

/// Sign of the HTD correction term in the primary update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HtdSign {
    /// `w ← w + α[δz^ρ − (x − γ′x′)(z^ρ − z)·h]`.
    #[default]
    Minus,
    /// The `+` variant of the same correction.
    Plus,
}

macro_rules! id_enum {
    ($ty:ty, $($variant:path => $id:literal),+) => {
        impl $ty {
            pub fn id(self) -> &'static str {
                match self { $($variant => $id),+ }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.id())
            }
        }

        impl FromStr for $ty {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($id => Ok($variant),)+
                    other => Err(Error::InvalidConfig(format!(
                        "unknown {} `{other}`", stringify!($ty)
                    ))),
                }
            }
        }
    };
}

id_enum!(RhoPlacement, RhoPlacement::Full => "full", RhoPlacement::Partial => "partial");
id_enum!(TraceForm, TraceForm::Inside => "inside", TraceForm::Outside => "outside");
id_enum!(HtdSign, HtdSign::Minus => "minus", HtdSign::Plus => "plus");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub alpha: f64,
    pub alpha_h: f64,
    pub lambda: f64,
    pub beta: f64,
    pub zeta: f64,
    pub c_bar: f64,
    #[serde(default)]
    pub rho_placement: RhoPlacement,
    #[serde(default)]
    pub trace_form: TraceForm,
    #[serde(default)]
    pub htd_sign: HtdSign,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            alpha_h: 0.0,
            lambda: 0.0,
            beta: 0.0,
            zeta: 0.0,
            c_bar: 1.0,
            rho_placement: RhoPlacement::Full,
            trace_form: TraceForm::Inside,
            htd_sign: HtdSign::Minus,
        }
    }
}

impl LearnerConfig {
    pub fn new(alpha: f64, lambda: f64) -> Self {
        Self { alpha, lambda, ..Self::default() }
    }

    pub fn with_alpha_h(mut self, alpha_h: f64) -> Self {
        self.alpha_h = alpha_h;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn with_zeta(mut self, zeta: f64) -> Self {
        self.zeta = zeta;
        self
    }

    pub fn with_c_bar(mut self, c_bar: f64) -> Self {
        self.c_bar = c_bar;
        self
    }

    pub fn with_trace_form(mut self, form: TraceForm) -> Self {
        self.trace_form = form;
        self
    }

    pub fn with_rho_placement(mut self, placement: RhoPlacement) -> Self {
        self.rho_placement = placement;
        self
    }

    pub fn validate(&self, algorithm: Algorithm) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name}={v} outside [0,1]")))
            }
        };
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha={} must be positive", self.alpha)));
        }
        if !(self.alpha_h >= 0.0 && self.alpha_h.is_finite()) {
            return Err(Error::InvalidConfig(format!("alpha_h={} must be non-negative", self.alpha_h)));
        }
        if matches!(algorithm, Algorithm::Gtd | Algorithm::Gtd2 | Algorithm::Htd) && self.alpha_h == 0.0 {
            return Err(Error::InvalidConfig(format!("{algorithm} needs alpha_h > 0")));
        }
        unit("lambda", self.lambda)?;
        unit("beta", self.beta)?;
        unit("zeta", self.zeta)?;
        if self.c_bar.is_nan() || self.c_bar <= 0.0 {
            return Err(Error::InvalidConfig(format!("c_bar={} must be positive", self.c_bar)));
        }
        if algorithm != Algorithm::OffPolicyTd
            && (self.rho_placement != RhoPlacement::Full || self.trace_form != TraceForm::Inside)
        {
            return Err(Error::InvalidConfig(format!(
                "rho_placement and trace_form only apply to td, not {algorithm}"
            )));
        }
        Ok(())
    }
}

/// Per-learner mutable trace state. Zero-initialized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceState {
    /// `z^ρ`, or `z′` / `z` for the forms that keep ρ outside the trace.
    pub z_rho: Vec<f64>,
    /// Behavior trace (HTD only).
    pub z_b: Vec<f64>,
    pub f: f64,
    pub m: f64,
    pub last_rho: f64,
    pub last_pi: f64,
    pub last_b: f64,
    pub last_nu: f64,
    /// `γ_t` for the next transition.
    pub last_gamma: f64,
    /// Product of earlier ratios in the current episode (Alternative-life TD).
    pub episode_rho_product: f64,
    /// ABTD's `ψ(ζ)` for this prediction's policy pair.
    pub psi: f64,
    pub steps: u64,
    #[serde(skip)]
    scratch_w: Vec<f64>,
    #[serde(skip)]
    scratch_h: Vec<f64>,
}

impl TraceState {
    pub fn zeros(dim: usize, algorithm: Algorithm) -> Self {
        Self {
            z_rho: vec![0.0; dim],
            z_b: if algorithm == Algorithm::Htd { vec![0.0; dim] } else { Vec::new() },
            f: 0.0,
            m: 0.0,
            last_rho: 0.0,
            last_pi: 0.0,
            last_b: 0.0,
            last_nu: 0.0,
            last_gamma: 0.0,
            episode_rho_product: 1.0,
            psi: 0.0,
            steps: 0,
            scratch_w: Vec::new(),
            scratch_h: Vec::new(),
        }
    }

    fn advance(&mut self, t: &Transition) {
        self.last_gamma = t.gamma_next;
        self.last_rho = t.rho();
        self.last_pi = t.pi_prob;
        self.last_b = t.b_prob;
        self.steps += 1;
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc + x * y)
}

#[inline]
fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn scale(v: &mut [f64], c: f64) {
    for vi in v {
        *vi *= c;
    }
}

/// `z ← decay·z + scale·x`.
#[inline]
fn decay_add(z: &mut [f64], decay: f64, x: &FeatureVector, scale_x: f64) {
    scale(z, decay);
    x.add_scaled_to(z, scale_x);
}

/// `z^ρ ← ρ_t(γ_t λ z^ρ + x_t)`.
#[inline]
fn corrected_trace(cfg: &LearnerConfig, trace: &mut TraceState, t: &Transition) {
    decay_add(&mut trace.z_rho, trace.last_gamma * cfg.lambda, &t.x, 1.0);
    scale(&mut trace.z_rho, t.rho());
}

pub fn offtd_step(cfg: &LearnerConfig, ws: &mut WeightSet, trace: &mut TraceState, t: &Transition) {
    let rho = t.rho();
    match (cfg.rho_placement, cfg.trace_form) {
        (RhoPlacement::Full, TraceForm::Inside) => {
            let delta = td_error(&ws.w, t);
            corrected_trace(cfg, trace, t);
            axpy(&mut ws.w, cfg.alpha * delta, &trace.z_rho);
        }
        (RhoPlacement::Full, TraceForm::Outside) => {
            let delta = td_error(&ws.w, t);
            let decay = trace.last_gamma * (cfg.lambda * trace.last_rho);
            decay_add(&mut trace.z_rho, decay, &t.x, 1.0);
            axpy(&mut ws.w, cfg.alpha * rho * delta, &trace.z_rho);
        }
        (RhoPlacement::Partial, _) => {
            let delta = rho * (t.reward + t.gamma_next * t.x_next.dot(&ws.w)) - t.x.dot(&ws.w);
            let decay = trace.last_gamma * (cfg.lambda * trace.last_rho);
            decay_add(&mut trace.z_rho, decay, &t.x, 1.0);
            axpy(&mut ws.w, cfg.alpha * delta, &trace.z_rho);
        }
    }
    trace.advance(t);
}

/// A new episode starts at the beginning of the stream and after any
/// transition with `γ′ = 0`; the ratio product and trace reset there.
pub fn altlife_td_step(cfg: &LearnerConfig, ws: &mut WeightSet, trace: &mut TraceState, t: &Transition) {
    if trace.steps == 0 || trace.last_gamma == 0.0 {
        trace.episode_rho_product = 1.0;
        trace.z_rho.fill(0.0);
    }
    let rho = t.rho();
    let delta = td_error(&ws.w, t);
    decay_add(&mut trace.z_rho, trace.last_gamma * cfg.lambda, &t.x, trace.episode_rho_product);
    scale(&mut trace.z_rho, rho);
    axpy(&mut ws.w, cfg.alpha * delta, &trace.z_rho);
    trace.episode_rho_product *= rho;
    trace.advance(t);
}

/// `h ← h + α_h[δ z − (h·x) x]`, with `h·x` supplied.
#[inline]
fn secondary_update(h: &mut [f64], alpha_h: f64, delta: f64, z: &[f64], x: &FeatureVector, hx: f64) {
    axpy(h, alpha_h * delta, z);
    x.add_scaled_to(h, -(alpha_h * hx));
}

pub fn gtd_step(cfg: &LearnerConfig, ws: &mut WeightSet, trace: &mut TraceState, t: &Transition) {
    let delta = td_error(&ws.w, t);
    corrected_trace(cfg, trace, t);
    let hx = t.x.dot(&ws.h);
    let hz = dot(&ws.h, &trace.z_rho);
    secondary_update(&mut ws.h, cfg.alpha_h, delta, &trace.z_rho, &t.x, hx);
    axpy(&mut ws.w, cfg.alpha * delta, &trace.z_rho);
    t.x_next.add_scaled_to(&mut ws.w, -(cfg.alpha * t.gamma_next * (1.0 - cfg.lambda) * hz));
    trace.advance(t);
}

pub fn gtd2_step(cfg: &LearnerConfig, ws: &mut WeightSet, trace: &mut TraceState, t: &Transition) {
    let delta = td_error(&ws.w, t);
    corrected_trace(cfg, trace, t);
    let hx = t.x.dot(&ws.h);
    let hz = dot(&ws.h, &trace.z_rho);
    secondary_update(&mut ws.h, cfg.alpha_h, delta, &trace.z_rho, &t.x, hx);
    t.x.add_scaled_to(&mut ws.w, cfg.alpha * hx);
    t.x_next.add_scaled_to(&mut ws.w, -(cfg.alpha * t.gamma_next * (1.0 - cfg.lambda) * hz));
    trace.advance(t);
}

pub fn htd_step(cfg: &LearnerConfig, ws: &mut WeightSet, trace: &mut TraceState, t: &Transition) {
    let delta = td_error(&ws.w, t);
    let decay = trace.last_gamma * cfg.lambda;
    corrected_trace(cfg, trace, t);
    decay_add(&mut trace.z_b, decay, &t.x, 1.0);

    let h_zb = dot(&ws.h, &trace.z_b);
    let diff_h = trace
        .z_rho
        .iter()
        .zip(&trace.z_b)
        .zip(&ws.h)
        .fold(0.0, |acc, ((zr, zb), h)| acc + (zr - zb) * h);
    let sign = match cfg.htd_sign {
        HtdSign::Minus => 1.0,
        HtdSign::Plus => -1.0,
    };

    axpy(&mut ws.h, cfg.alpha_h * delta, &trace.z_rho);
    t.x.add_scaled_to(&mut ws.h, -(cfg.alpha_h * h_zb));
    t.x_next.add_scaled_to(&mut ws.h, cfg.alpha_h * h_zb * t.gamma_next);

    let c = sign * cfg.alpha * diff_h;
    axpy(&mut ws.w, cfg.alpha * delta, &trace.z_rho);
    t.x.add_scaled_to(&mut ws.w, -c);
    t.x_next.add_scaled_to(&mut ws.w, c * t.gamma_next);
    trace.advance(t);
}

/// Shared mirror-prox block. `td_primary` selects the proximal GTD primary
/// update (`α δ z^ρ`) over the GTD2 one (`α (h·x) x`).
fn proximal_step(cfg: &LearnerConfig, ws: &mut WeightSet, trace: &mut TraceState, t: &Transition, td_primary: bool) {
    let delta = td_error(&ws.w, t);
    corrected_trace(cfg, trace, t);
    let correction = cfg.alpha * t.gamma_next * (1.0 - cfg.lambda);

    let primary = |w: &mut [f64], delta: f64, hx: f64, hz: f64, z: &[f64]| {
        if td_primary {
            axpy(w, cfg.alpha * delta, z);
        } else {
            t.x.add_scaled_to(w, cfg.alpha * hx);
        }
        t.x_next.add_scaled_to(w, -(correction * hz));
    };

    let hx = t.x.dot(&ws.h);
    let hz = dot(&ws.h, &trace.z_rho);

    let mut h_half = std::mem::take(&mut trace.scratch_h);
    h_half.clear();
    h_half.extend_from_slice(&ws.h);
    secondary_update(&mut h_half, cfg.alpha_h, delta, &trace.z_rho, &t.x, hx);

    let mut w_half = std::mem::take(&mut trace.scratch_w);
    w_half.clear();
    w_half.extend_from_slice(&ws.w);
    primary(&mut w_half, delta, hx, hz, &trace.z_rho);

    let delta_half = td_error(&w_half, t);
    let hx_half = t.x.dot(&h_half);
    let hz_half = dot(&h_half, &trace.z_rho);

    secondary_update(&mut ws.h, cfg.alpha_h, delta_half, &trace.z_rho, &t.x, hx_half);
    primary(&mut ws.w, delta_half, hx_half, hz_half, &trace.z_rho);

    trace.scratch_h = h_half;
    trace.scratch_w = w_half;
    trace.advance(t);
}

pub fn pgtd_step(cfg: &LearnerConfig, ws: &mut WeightSet, trace: &mut TraceState, t: &Transition) {
    proximal_step(cfg, ws, trace, t, true);
}

pub fn pgtd2_step(cfg: &LearnerConfig, ws: &mut WeightSet, trace: &mut TraceState, t: &Transition) {
    proximal_step(cfg, ws, trace, t, false);
}

/// ETD(λ) when `beta` is `None` (the followon decays with `γ_t`), ETD(λ,β)
/// otherwise.
pub fn etd_step(
    cfg: &LearnerConfig,
    ws: &mut WeightSet,
    trace: &mut TraceState,
    t: &Transition,
    beta: Option<f64>,
) {
    let beta_eff = beta.unwrap_or(trace.last_gamma);
    let interest = t.interest;
    trace.f = trace.last_rho * beta_eff * trace.f + interest;
    trace.m = trace.f + cfg.lambda * (interest - trace.f);
    let delta = td_error(&ws.w, t);
    decay_add(&mut trace.z_rho, trace.last_gamma * cfg.lambda, &t.x, trace.m);
    scale(&mut trace.z_rho, t.rho());
    axpy(&mut ws.w, cfg.alpha * delta, &trace.z_rho);
    trace.advance(t);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AdaptiveMethod {
    Tb,
    Vtrace,
    Abtd,
}

/// `κ` in `z ← γ_t κ z + x_t`.
pub fn trace_decay(method: AdaptiveMethod, lambda: f64, pi_prev: f64, b_prev: f64, nu_prev: f64, c_bar: f64) -> f64 {
    match method {
        AdaptiveMethod::Tb => lambda * pi_prev,
        AdaptiveMethod::Vtrace => {
            if b_prev > 0.0 {
                lambda * c_bar.min(pi_prev / b_prev)
            } else {
                0.0
            }
        }
        AdaptiveMethod::Abtd => nu_prev * pi_prev,
    }
}

pub fn adtd_step(
    cfg: &LearnerConfig,
    ws: &mut WeightSet,
    trace: &mut TraceState,
    t: &Transition,
    method: AdaptiveMethod,
) {
    let kappa = trace_decay(method, cfg.lambda, trace.last_pi, trace.last_b, trace.last_nu, cfg.c_bar);
    let delta = td_error(&ws.w, t);
    decay_add(&mut trace.z_rho, trace.last_gamma * kappa, &t.x, 1.0);
    axpy(&mut ws.w, cfg.alpha * t.rho() * delta, &trace.z_rho);
    if method == AdaptiveMethod::Abtd {
        trace.last_nu = abtd_nu(trace.psi, t.b_prob, t.pi_prob);
    }
    trace.advance(t);
}

/// `ψ(ζ)` with the extrema of `max(b, π)` taken over pairs the behavior can take.
pub fn abtd_psi(zeta: f64, behavior: &TabularPolicy, target: &TabularPolicy) -> Result<f64> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for s in 0..behavior.n_states() {
        for a in 0..behavior.n_actions() {
            let b = behavior.prob(s, a);
            if b > 0.0 {
                let m = b.max(target.prob(s, a));
                lo = lo.min(m);
                hi = hi.max(m);
            }
        }
    }
    if !lo.is_finite() {
        return Err(Error::Empty);
    }
    let psi0 = 1.0 / hi;
    let psi_max = 1.0 / lo;
    Ok(2.0 * zeta * psi0 + (2.0 * zeta - 1.0).max(0.0) * (psi_max - 2.0 * psi0))
}

/// `ν = min(ψ, 1 / max(b, π))`.
pub fn abtd_nu(psi: f64, b_prob: f64, pi_prob: f64) -> f64 {
    psi.min(1.0 / b_prob.max(pi_prob))
}

pub fn abtd_psi_nu(
    zeta: f64,
    behavior: &TabularPolicy,
    target: &TabularPolicy,
    s: usize,
    a: usize,
) -> Result<(f64, f64)> {
    let psi = abtd_psi(zeta, behavior, target)?;
    Ok((psi, abtd_nu(psi, behavior.prob(s, a), target.prob(s, a))))
}

/// One algorithm instance: configuration, weights, traces and a divergence flag.
#[derive(Clone, Debug)]
pub struct Learner {
    algorithm: Algorithm,
    config: LearnerConfig,
    weights: WeightSet,
    trace: TraceState,
    diverged: bool,
}

/// Flat checkpoint record. `psi` travels inside `trace`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerSnapshot {
    pub algorithm: Algorithm,
    pub config: LearnerConfig,
    pub weights: WeightSet,
    pub trace: TraceState,
    pub diverged: bool,
}

impl Learner {
    pub fn new(algorithm: Algorithm, config: LearnerConfig, dim: usize) -> Result<Self> {
        config.validate(algorithm)?;
        if dim == 0 {
            return Err(Error::InvalidFeatures("feature dimension must be positive".into()));
        }
        Ok(Self {
            algorithm,
            config,
            weights: WeightSet::zeros(dim, algorithm.uses_secondary()),
            trace: TraceState::zeros(dim, algorithm),
            diverged: false,
        })
    }

    /// Like [`Learner::new`], also fixing ABTD's `ψ` from the policy pair.
    pub fn for_policies(
        algorithm: Algorithm,
        config: LearnerConfig,
        dim: usize,
        behavior: &TabularPolicy,
        target: &TabularPolicy,
    ) -> Result<Self> {
        let mut learner = Self::new(algorithm, config, dim)?;
        if algorithm == Algorithm::Abtd {
            learner.trace.psi = abtd_psi(learner.config.zeta, behavior, target)?;
        }
        Ok(learner)
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn weights(&self) -> &WeightSet {
        &self.weights
    }

    pub fn trace(&self) -> &TraceState {
        &self.trace
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged
    }

    /// Freezes the learner; later steps are ignored.
    pub fn mark_diverged(&mut self) {
        self.diverged = true;
    }

    pub fn predict(&self, x: &FeatureVector) -> f64 {
        x.dot(&self.weights.w)
    }

    /// Applies one transition. Returns `false` once the learner has diverged.
    pub fn step(&mut self, t: &Transition) -> bool {
        if self.diverged {
            return false;
        }
        let (cfg, ws, tr) = (&self.config, &mut self.weights, &mut self.trace);
        match self.algorithm {
            Algorithm::OffPolicyTd => offtd_step(cfg, ws, tr, t),
            Algorithm::AltLifeTd => altlife_td_step(cfg, ws, tr, t),
            Algorithm::Gtd => gtd_step(cfg, ws, tr, t),
            Algorithm::Gtd2 => gtd2_step(cfg, ws, tr, t),
            Algorithm::Htd => htd_step(cfg, ws, tr, t),
            Algorithm::Pgtd => pgtd_step(cfg, ws, tr, t),
            Algorithm::Pgtd2 => pgtd2_step(cfg, ws, tr, t),
            Algorithm::Etd => etd_step(cfg, ws, tr, t, None),
            Algorithm::EtdBeta => etd_step(cfg, ws, tr, t, Some(cfg.beta)),
            Algorithm::Tb => adtd_step(cfg, ws, tr, t, AdaptiveMethod::Tb),
            Algorithm::Vtrace => adtd_step(cfg, ws, tr, t, AdaptiveMethod::Vtrace),
            Algorithm::Abtd => adtd_step(cfg, ws, tr, t, AdaptiveMethod::Abtd),
        }
        if !self.weights.is_finite() || !self.trace.f.is_finite() {
            self.diverged = true;
        }
        !self.diverged
    }

    pub fn snapshot(&self) -> LearnerSnapshot {
        LearnerSnapshot {
            algorithm: self.algorithm,
            config: self.config.clone(),
            weights: self.weights.clone(),
            trace: self.trace.clone(),
            diverged: self.diverged,
        }
    }

    pub fn restore(snapshot: LearnerSnapshot) -> Result<Self> {
        snapshot.config.validate(snapshot.algorithm)?;
        let dim = snapshot.weights.dim();
        let expected_h = if snapshot.algorithm.uses_secondary() { dim } else { 0 };
        if snapshot.weights.h.len() != expected_h || snapshot.trace.z_rho.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: snapshot.trace.z_rho.len() });
        }
        Ok(Self {
            algorithm: snapshot.algorithm,
            config: snapshot.config,
            weights: snapshot.weights,
            trace: snapshot.trace,
            diverged: snapshot.diverged,
        })
    }

    /// JSON snapshot. Non-finite weights cannot be represented and are an error.
    pub fn to_json(&self) -> Result<String> {
        if !self.weights.is_finite() {
            return Err(Error::Unsupported("cannot snapshot non-finite weights".into()));
        }
        Ok(serde_json::to_string(&self.snapshot())?)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::restore(serde_json::from_str(json)?)
    }
}
