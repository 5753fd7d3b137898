//! Parameter grids, seeded execution of sweep cells on a bounded worker pool,
//! divergence handling and aggregation.
//!
//! Every run of a problem draws its stream from
//! `run_seed(base_seed, problem, run)`, so all cells of a sweep see the same
//! experience for a given run index and the least-squares baselines are
//! computed from that same stream.

mod io;
mod report;

pub use io::*;
pub use report::*;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{LstdAccumulator, LstdTrace, LstdVariant, DEFAULT_RIDGE};
use crate::env::{Problem, ProblemKind};
use crate::error::{Error, Result};
use crate::evaluation::{auc, final_perf, Evaluator, GroundTruth};
use crate::learners::{Algorithm, Learner, LearnerConfig, RhoPlacement, TraceForm};

/// `2^-18 ... 2^0`.
pub fn alpha_values() -> Vec<f64> {
    (0..19).map(|k| 2f64.powi(k - 18)).collect()
}

/// `0.01 · 2^{0,2,...,14}`.
pub fn alpha_h_values() -> Vec<f64> {
    (0..8).map(|k| 0.01 * 2f64.powi(2 * k)).collect()
}

pub const LAMBDA_VALUES: [f64; 2] = [0.0, 0.9];
pub const BETA_VALUES: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
pub const ZETA_VALUES: [f64; 2] = [0.0, 0.9];

/// One parameter point of one algorithm on one problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub problem: ProblemKind,
    pub algorithm: Algorithm,
    pub config: LearnerConfig,
}

impl Cell {
    pub fn new(problem: ProblemKind, algorithm: Algorithm, config: LearnerConfig) -> Result<Self> {
        config.validate(algorithm)?;
        if algorithm.episodic_only() && !problem.is_episodic() {
            return Err(Error::Unsupported(format!("{algorithm} needs an episodic problem, {problem} is continuing")));
        }
        Ok(Self { problem, algorithm, config })
    }

    pub fn id(&self) -> String {
        let c = &self.config;
        cell_id(self.problem, self.algorithm, c.lambda, c.alpha, c.alpha_h, c.beta, c.zeta, c.rho_placement)
    }
}

/// Canonical cell identifier; ranking ties are broken by its byte order.
#[allow(clippy::too_many_arguments)]
pub fn cell_id(
    problem: ProblemKind,
    algorithm: Algorithm,
    lambda: f64,
    alpha: f64,
    alpha_h: f64,
    beta: f64,
    zeta: f64,
    rho: RhoPlacement,
) -> String {
    let mut s = format!("{problem}/{algorithm}/lambda={lambda}/alpha={alpha}");
    if algorithm.uses_secondary() {
        let _ = write!(s, "/alpha_h={alpha_h}");
    }
    if algorithm.uses_beta() {
        let _ = write!(s, "/beta={beta}");
    }
    if algorithm.uses_zeta() {
        let _ = write!(s, "/zeta={zeta}");
    }
    if rho != RhoPlacement::Full {
        let _ = write!(s, "/rho={rho}");
    }
    s
}

/// The parameter grid of one algorithm on one problem. Parameters the
/// algorithm ignores hold a single `0` so the cell count is the product of
/// the applicable cardinalities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub algorithm: Algorithm,
    pub problem: ProblemKind,
    pub alphas: Vec<f64>,
    pub alpha_hs: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub betas: Vec<f64>,
    pub zetas: Vec<f64>,
    pub rho_placement: RhoPlacement,
    pub trace_form: TraceForm,
}

pub fn build_grid(algorithm: Algorithm, problem: ProblemKind) -> Result<SweepGrid> {
    if algorithm.episodic_only() && !problem.is_episodic() {
        return Err(Error::Unsupported(format!("{algorithm} needs an episodic problem, {problem} is continuing")));
    }
    let pick = |applies: bool, values: &[f64]| if applies { values.to_vec() } else { vec![0.0] };
    Ok(SweepGrid {
        algorithm,
        problem,
        alphas: alpha_values(),
        alpha_hs: pick(algorithm.uses_secondary(), &alpha_h_values()),
        lambdas: pick(algorithm.uses_lambda(), &LAMBDA_VALUES),
        betas: pick(algorithm.uses_beta(), &BETA_VALUES),
        zetas: pick(algorithm.uses_zeta(), &ZETA_VALUES),
        rho_placement: RhoPlacement::Full,
        trace_form: TraceForm::Inside,
    })
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.alphas.len() * self.alpha_hs.len() * self.lambdas.len() * self.betas.len() * self.zetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Replaces the lambda axis, e.g. with a finer grid for an emphatic study.
    pub fn with_lambdas(mut self, lambdas: Vec<f64>) -> Result<Self> {
        if !self.algorithm.uses_lambda() {
            return Err(Error::InvalidConfig(format!("{} has no lambda parameter", self.algorithm)));
        }
        self.lambdas = lambdas;
        Ok(self)
    }

    /// Cells ordered by lambda, zeta, beta, alpha_h, then alpha.
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let mut out = Vec::with_capacity(self.len());
        for &lambda in &self.lambdas {
            for &zeta in &self.zetas {
                for &beta in &self.betas {
                    for &alpha_h in &self.alpha_hs {
                        for &alpha in &self.alphas {
                            let config = LearnerConfig::new(alpha, lambda)
                                .with_alpha_h(alpha_h)
                                .with_beta(beta)
                                .with_zeta(zeta)
                                .with_rho_placement(self.rho_placement)
                                .with_trace_form(self.trace_form);
                            out.push(Cell::new(self.problem, self.algorithm, config)?);
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn problem_code(kind: ProblemKind) -> u64 {
    match kind {
        ProblemKind::Collision => 1,
        ProblemKind::FourRooms => 2,
        ProblemKind::HighVarianceFourRooms => 3,
    }
}

/// `splitmix64(splitmix64(splitmix64(base) ^ code) ^ run)` with problem codes
/// collision 1, fourrooms 2, hv_fourrooms 3. The result seeds a ChaCha8 RNG.
pub fn run_seed(base: u64, problem: ProblemKind, run: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ problem_code(problem)) ^ run as u64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSettings {
    pub runs: usize,
    /// `None` uses the problem's published run length.
    pub steps: Option<usize>,
    pub eval_every: usize,
    pub base_seed: u64,
    /// A run diverges once its error exceeds this multiple of the zero-weight error.
    pub cutoff_factor: f64,
    pub final_fraction: f64,
    pub lstd_trace: LstdTrace,
    /// Worker threads. Never serialized: results do not depend on it.
    #[serde(skip, default = "default_workers")]
    pub workers: usize,
}

fn default_workers() -> usize {
    1
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self::desk()
    }
}

impl SweepSettings {
    pub fn desk() -> Self {
        Self {
            runs: 10,
            steps: None,
            eval_every: 10,
            base_seed: 0,
            cutoff_factor: 100.0,
            final_fraction: 0.01,
            lstd_trace: LstdTrace::default(),
            workers: 1,
        }
    }

    pub fn paper() -> Self {
        Self { runs: 50, eval_every: 1, ..Self::desk() }
    }

    pub fn steps_for(&self, problem: ProblemKind) -> usize {
        self.steps.unwrap_or_else(|| problem.default_steps())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.runs == 0 {
            return bad("runs must be positive".into());
        }
        if self.steps == Some(0) {
            return bad("steps must be positive".into());
        }
        if self.eval_every == 0 {
            return bad("eval_every must be positive".into());
        }
        if self.steps.is_some_and(|n| self.eval_every > n) {
            return bad(format!("eval_every={} exceeds the run length", self.eval_every));
        }
        if !(self.cutoff_factor > 0.0 && self.cutoff_factor.is_finite()) {
            return bad(format!("cutoff={} must be positive", self.cutoff_factor));
        }
        if !(self.final_fraction > 0.0 && self.final_fraction <= 1.0) {
            return bad(format!("final fraction {} outside (0,1]", self.final_fraction));
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub cell_id: String,
    pub run: usize,
    pub seed: u64,
    /// `(step, error)` at every evaluation point before divergence.
    pub series: Vec<(usize, f64)>,
    /// Step at which divergence was detected.
    pub diverged_at: Option<usize>,
    pub auc: f64,
    #[serde(rename = "final")]
    pub final_perf: f64,
}

impl RunRecord {
    pub fn diverged(&self) -> bool {
        self.diverged_at.is_some()
    }
}

/// A least-squares baseline evaluated on one problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub problem: ProblemKind,
    pub variant: LstdVariant,
    pub lambda: f64,
}

impl BaselineSpec {
    pub fn id(&self) -> String {
        let mut s = format!("{}/{}/lambda={}", self.problem, self.variant.id(), self.lambda);
        if let LstdVariant::Emphatic { beta: Some(beta) } = self.variant {
            let _ = write!(s, "/beta={beta}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineRecord {
    pub id: String,
    pub run: usize,
    pub seed: u64,
    /// Error of the solved weights after the whole stream.
    pub error: f64,
}

/// Ground truth and cutoffs per problem; executes single runs.
pub struct Runner {
    settings: SweepSettings,
    truths: BTreeMap<ProblemKind, (GroundTruth, f64)>,
}

impl Runner {
    pub fn new(settings: SweepSettings, problems: impl IntoIterator<Item = ProblemKind>) -> Result<Self> {
        settings.validate()?;
        let mut truths = BTreeMap::new();
        for kind in problems {
            if truths.contains_key(&kind) {
                continue;
            }
            let problem = kind.reference()?;
            let truth = GroundTruth::exact(&problem)?;
            let cutoff = settings.cutoff_factor * Evaluator::new(&problem, &truth)?.zero_error();
            truths.insert(kind, (truth, cutoff));
        }
        Ok(Self { settings, truths })
    }

    pub fn settings(&self) -> &SweepSettings {
        &self.settings
    }

    /// Error level above which a run counts as diverged.
    pub fn cutoff(&self, problem: ProblemKind) -> Result<f64> {
        self.entry(problem).map(|e| e.1)
    }

    pub fn cutoffs(&self) -> BTreeMap<ProblemKind, f64> {
        self.truths.iter().map(|(&k, e)| (k, e.1)).collect()
    }

    fn entry(&self, problem: ProblemKind) -> Result<&(GroundTruth, f64)> {
        self.truths
            .get(&problem)
            .ok_or_else(|| Error::InvalidConfig(format!("runner was not prepared for {problem}")))
    }

    fn setup(&self, problem: ProblemKind, run: usize) -> Result<(Problem, ChaCha8Rng, u64)> {
        let seed = run_seed(self.settings.base_seed, problem, run);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let instance = problem.instantiate(&mut rng)?;
        Ok((instance, rng, seed))
    }

    pub fn run_cell(&self, cell: &Cell, run: usize) -> Result<RunRecord> {
        let (truth, cutoff) = self.entry(cell.problem)?;
        let (problem, rng, seed) = self.setup(cell.problem, run)?;
        let evaluator = Evaluator::new(&problem, truth)?;
        let dim = problem.feature_dim();
        let mut learners = problem
            .gvfs
            .iter()
            .map(|g| Learner::for_policies(cell.algorithm, cell.config.clone(), dim, &problem.behavior, &g.target))
            .collect::<Result<Vec<_>>>()?;

        let steps = self.settings.steps_for(cell.problem);
        let every = self.settings.eval_every;
        let mut series = Vec::with_capacity(steps / every);
        let mut diverged_at = None;
        let mut stream = problem.stream(rng);
        for step in 1..=steps {
            let st = stream.next_step();
            for (j, learner) in learners.iter_mut().enumerate() {
                if problem.in_scope(j, st.s) {
                    learner.step(&problem.transition(j, st)?);
                }
            }
            if step % every == 0 {
                let err = evaluator.error(learners.iter().map(|l| l.weights().w.as_slice()));
                if learners.iter().any(Learner::is_diverged) || !err.is_finite() || err > *cutoff {
                    diverged_at = Some(step);
                    break;
                }
                series.push((step, err));
            }
        }

        let (auc_v, final_v) = if diverged_at.is_some() || series.is_empty() {
            (*cutoff, *cutoff)
        } else {
            let values: Vec<f64> = series.iter().map(|p| p.1).collect();
            (auc(&values)?, final_perf(&values, self.settings.final_fraction)?)
        };
        Ok(RunRecord { cell_id: cell.id(), run, seed, series, diverged_at, auc: auc_v, final_perf: final_v })
    }

    pub fn run_baseline(&self, spec: &BaselineSpec, run: usize) -> Result<BaselineRecord> {
        let (truth, _) = self.entry(spec.problem)?;
        let (problem, rng, seed) = self.setup(spec.problem, run)?;
        let evaluator = Evaluator::new(&problem, truth)?;
        let dim = problem.feature_dim();
        let mut accs = (0..problem.gvfs.len())
            .map(|_| LstdAccumulator::new(dim, spec.lambda, spec.variant).map(|a| a.with_trace(self.settings.lstd_trace)))
            .collect::<Result<Vec<_>>>()?;
        let mut stream = problem.stream(rng);
        for _ in 0..self.settings.steps_for(spec.problem) {
            let st = stream.next_step();
            for (j, acc) in accs.iter_mut().enumerate() {
                if problem.in_scope(j, st.s) {
                    acc.accumulate(&problem.transition(j, st)?)?;
                }
            }
        }
        let weights = accs.iter().map(|a| a.solve(DEFAULT_RIDGE)).collect::<Result<Vec<_>>>()?;
        let error = evaluator.error(weights.iter().map(Vec::as_slice));
        Ok(BaselineRecord { id: spec.id(), run, seed, error })
    }
}

/// Everything a sweep produced, in deterministic order: cells in input order,
/// runs ascending within each cell, baselines after cells.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResults {
    pub settings: SweepSettings,
    pub cutoffs: BTreeMap<ProblemKind, f64>,
    pub cells: Vec<Cell>,
    /// `records[i]` holds the runs of `cells[i]`.
    pub records: Vec<Vec<RunRecord>>,
    pub baselines: Vec<BaselineSpec>,
    pub baseline_records: Vec<Vec<BaselineRecord>>,
}

/// Runs every cell and baseline `settings.runs` times on a pool of
/// `settings.workers` threads. Output order never depends on scheduling.
pub fn sweep(cells: &[Cell], baselines: &[BaselineSpec], settings: &SweepSettings) -> Result<SweepResults> {
    let problems = cells.iter().map(|c| c.problem).chain(baselines.iter().map(|b| b.problem));
    let runner = Runner::new(settings.clone(), problems)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?;
    let runs = settings.runs;

    let (records, baseline_records) = pool.install(|| {
        let cell_jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|i| (0..runs).map(move |r| (i, r))).collect();
        let flat = cell_jobs
            .par_iter()
            .map(|&(i, r)| runner.run_cell(&cells[i], r))
            .collect::<Result<Vec<_>>>()?;
        let base_jobs: Vec<(usize, usize)> =
            (0..baselines.len()).flat_map(|i| (0..runs).map(move |r| (i, r))).collect();
        let base_flat = base_jobs
            .par_iter()
            .map(|&(i, r)| runner.run_baseline(&baselines[i], r))
            .collect::<Result<Vec<_>>>()?;
        Ok::<_, Error>((chunk(flat, runs), chunk(base_flat, runs)))
    })?;

    Ok(SweepResults {
        settings: settings.clone(),
        cutoffs: runner.cutoffs(),
        cells: cells.to_vec(),
        records,
        baselines: baselines.to_vec(),
        baseline_records,
    })
}

fn chunk<T>(flat: Vec<T>, size: usize) -> Vec<Vec<T>> {
    let mut out = Vec::with_capacity(flat.len() / size.max(1));
    let mut it = flat.into_iter().peekable();
    while it.peek().is_some() {
        out.push(it.by_ref().take(size).collect());
    }
    out
}

/// Mean over runs for one cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub id: String,
    pub problem: ProblemKind,
    pub algorithm: Algorithm,
    pub lambda: f64,
    pub alpha: f64,
    pub alpha_h: f64,
    pub beta: f64,
    pub zeta: f64,
    pub rho_placement: RhoPlacement,
    pub runs: usize,
    pub auc: f64,
    #[serde(rename = "final")]
    pub final_perf: f64,
    pub diverged_fraction: f64,
    pub cutoff: f64,
}

impl CellSummary {
    pub fn from_records(cell: &Cell, records: &[RunRecord], cutoff: f64) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::Empty);
        }
        let n = records.len() as f64;
        let c = &cell.config;
        Ok(Self {
            id: cell.id(),
            problem: cell.problem,
            algorithm: cell.algorithm,
            lambda: c.lambda,
            alpha: c.alpha,
            alpha_h: c.alpha_h,
            beta: c.beta,
            zeta: c.zeta,
            rho_placement: c.rho_placement,
            runs: records.len(),
            auc: records.iter().map(|r| r.auc).sum::<f64>() / n,
            final_perf: records.iter().map(|r| r.final_perf).sum::<f64>() / n,
            diverged_fraction: records.iter().filter(|r| r.diverged()).count() as f64 / n,
            cutoff,
        })
    }

    /// Algorithm with its trace parameter, e.g. `etd(0.9)`; ABTD shows `zeta`.
    pub fn family(&self) -> String {
        let p = if self.algorithm.uses_zeta() { self.zeta } else { self.lambda };
        format!("{}({p})", self.algorithm)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub id: String,
    pub problem: ProblemKind,
    pub algorithm: String,
    pub lambda: f64,
    pub runs: usize,
    pub error: f64,
}

impl SweepResults {
    pub fn summaries(&self) -> Result<Vec<CellSummary>> {
        self.cells
            .iter()
            .zip(&self.records)
            .map(|(cell, recs)| CellSummary::from_records(cell, recs, self.cutoffs[&cell.problem]))
            .collect()
    }

    pub fn baseline_summaries(&self) -> Vec<BaselineSummary> {
        self.baselines
            .iter()
            .zip(&self.baseline_records)
            .map(|(spec, recs)| BaselineSummary {
                id: spec.id(),
                problem: spec.problem,
                algorithm: spec.variant.id().to_string(),
                lambda: spec.lambda,
                runs: recs.len(),
                error: recs.iter().map(|r| r.error).sum::<f64>() / recs.len().max(1) as f64,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SweepSettings {
        SweepSettings { runs: 2, steps: Some(400), eval_every: 10, ..SweepSettings::desk() }
    }

    #[test]
    fn grid_counts() {
        let count = |a| build_grid(a, ProblemKind::Collision).unwrap().cells().unwrap().len();
        assert_eq!(count(Algorithm::OffPolicyTd), 38);
        assert_eq!(count(Algorithm::Gtd), 304);
        assert_eq!(count(Algorithm::EtdBeta), 228);
        assert_eq!(count(Algorithm::Abtd), 38);
        assert!(build_grid(Algorithm::AltLifeTd, ProblemKind::FourRooms).is_err());
        assert_eq!(alpha_h_values()[7], 163.84);
        assert_eq!(alpha_values()[0], 2f64.powi(-18));
    }

    #[test]
    fn cell_ids_are_unique() {
        let cells = build_grid(Algorithm::EtdBeta, ProblemKind::Collision).unwrap().cells().unwrap();
        let ids: std::collections::BTreeSet<_> = cells.iter().map(Cell::id).collect();
        assert_eq!(ids.len(), cells.len());
    }

    #[test]
    fn seeds_differ_by_problem_and_run() {
        let a = run_seed(0, ProblemKind::Collision, 0);
        assert_ne!(a, run_seed(0, ProblemKind::Collision, 1));
        assert_ne!(a, run_seed(0, ProblemKind::FourRooms, 0));
        assert_ne!(a, run_seed(1, ProblemKind::Collision, 0));
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn run_cell_is_deterministic_and_cadenced() {
        let s = SweepSettings { eval_every: 1, ..quick() };
        let runner = Runner::new(s, [ProblemKind::Collision]).unwrap();
        let cell = Cell::new(ProblemKind::Collision, Algorithm::Etd, LearnerConfig::new(1.0 / 256.0, 0.0)).unwrap();
        let a = runner.run_cell(&cell, 3).unwrap();
        assert_eq!(a, runner.run_cell(&cell, 3).unwrap());
        assert_eq!(a.series.len(), 400);
        assert!(!a.diverged());
    }

    #[test]
    fn large_stepsize_diverges_and_truncates() {
        let runner = Runner::new(quick(), [ProblemKind::Collision]).unwrap();
        let cell = Cell::new(ProblemKind::Collision, Algorithm::Etd, LearnerConfig::new(1.0, 0.9)).unwrap();
        let cutoff = runner.cutoff(ProblemKind::Collision).unwrap();
        let diverged = (0..5).map(|r| runner.run_cell(&cell, r).unwrap()).filter(RunRecord::diverged).collect::<Vec<_>>();
        assert!(!diverged.is_empty());
        for r in diverged {
            let at = r.diverged_at.unwrap();
            assert!(r.series.iter().all(|p| p.0 < at));
            assert_eq!((r.auc, r.final_perf), (cutoff, cutoff));
        }
    }

    #[test]
    fn sweep_is_independent_of_worker_count() {
        let mut cells = build_grid(Algorithm::OffPolicyTd, ProblemKind::Collision).unwrap().cells().unwrap();
        cells.truncate(6);
        let base = [BaselineSpec { problem: ProblemKind::Collision, variant: LstdVariant::Plain, lambda: 0.0 }];
        let one = sweep(&cells, &base, &quick()).unwrap();
        let four = sweep(&cells, &base, &SweepSettings { workers: 4, ..quick() }).unwrap();
        assert_eq!(one, SweepResults { settings: one.settings.clone(), ..four });
        assert_eq!(one.records.len(), 6);
        assert!(one.records.iter().all(|r| r.len() == 2));
    }

    #[test]
    fn altlife_rejected_on_continuing_problems() {
        let err = Cell::new(ProblemKind::FourRooms, Algorithm::AltLifeTd, LearnerConfig::new(0.1, 0.0));
        assert!(matches!(err, Err(Error::Unsupported(_))));
    }
}
