mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use offpolicy::baselines::LstdVariant;
use offpolicy::env::ProblemKind;
use offpolicy::evaluation::GroundTruth;
use offpolicy::experiments::{
    best_by_family, build_grid, learning_curves, rank, read_series, read_summary, sensitivity_table, stepsize_table,
    sweep, write_results, BaselineSpec, Cell, Criterion, SweepResults, SweepSettings, LAMBDA_VALUES,
};
use offpolicy::learners::{Algorithm, LearnerConfig, RhoPlacement, TraceForm};
use serde::Serialize;

use config::Config;

/// Worker threads for `run` and `sweep`; defaults to the available cores.
const WORKERS_ENV: &str = "OFFPOLICY_WORKERS";

#[derive(Parser)]
#[command(name = "offpolicy", version, about = "Linear off-policy TD prediction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm at one parameter point for `runs` runs.
    Run(ConfigArgs),
    /// Run full parameter grids for one problem.
    Sweep(ConfigArgs),
    /// Rank a sweep and write its parameter-sensitivity table.
    Report {
        #[arg(long, default_value = "results")]
        results: PathBuf,
        #[arg(long, default_value = "final")]
        criterion: Criterion,
        /// Sensitivity CSV path. Defaults to `<results>/sensitivity_<criterion>.csv`.
        #[arg(long)]
        output: Option<PathBuf>,
        /// List every cell instead of the best per algorithm family.
        #[arg(long)]
        all: bool,
    },
    /// Write exact ground truth (`state,d_b,v_<gvf>...`) for a problem.
    Oracle {
        #[arg(long)]
        problem: ProblemKind,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit the data behind learning-curve, stepsize and sensitivity plots.
    Plotdata {
        #[arg(long, default_value = "results")]
        results: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        #[arg(long, default_value = "final")]
        criterion: Criterion,
        /// Keep only these algorithms (comma-separated ids).
        #[arg(long)]
        algo: Option<String>,
        /// Keep only these lambda values (comma-separated).
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotKind {
    #[value(name = "learning_curve", alias = "learning-curve")]
    LearningCurve,
    Stepsize,
    Sensitivity,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Flags mirror config keys one-to-one and override the file.
#[derive(Args)]
struct ConfigArgs {
    /// `key = value` file; `#` starts a comment.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long, visible_alias = "algorithm")]
    algo: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    alpha_h: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    zeta: Option<String>,
    #[arg(long)]
    c_bar: Option<String>,
    #[arg(long)]
    runs: Option<String>,
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    eval_every: Option<String>,
    #[arg(long, visible_alias = "base-seed")]
    seed: Option<String>,
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    cutoff: Option<String>,
    #[arg(long)]
    rho_placement: Option<String>,
    #[arg(long)]
    trace_form: Option<String>,
    #[arg(long)]
    paper_scale: bool,
    #[arg(long)]
    baselines: Option<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        let flags = [
            ("problem", &self.problem),
            ("algo", &self.algo),
            ("alpha", &self.alpha),
            ("alpha_h", &self.alpha_h),
            ("lambda", &self.lambda),
            ("beta", &self.beta),
            ("zeta", &self.zeta),
            ("c_bar", &self.c_bar),
            ("runs", &self.runs),
            ("steps", &self.steps),
            ("eval_every", &self.eval_every),
            ("seed", &self.seed),
            ("output", &self.output),
            ("cutoff", &self.cutoff),
            ("rho_placement", &self.rho_placement),
            ("trace_form", &self.trace_form),
            ("baselines", &self.baselines),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.paper_scale {
            cfg.set("paper_scale", "true")?;
        }
        Ok(cfg)
    }
}

fn workers() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => bail!("{WORKERS_ENV} must be a positive integer, got `{v}`"),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn settings(cfg: &Config) -> Result<SweepSettings> {
    let mut s = if cfg.flag("paper_scale")? { SweepSettings::paper() } else { SweepSettings::desk() };
    if let Some(v) = cfg.get("runs")? {
        s.runs = v;
    }
    if let Some(v) = cfg.get("steps")? {
        s.steps = Some(v);
    }
    if let Some(v) = cfg.get("eval_every")? {
        s.eval_every = v;
    }
    if let Some(v) = cfg.get("seed")? {
        s.base_seed = v;
    }
    if let Some(v) = cfg.get("cutoff")? {
        s.cutoff_factor = v;
    }
    s.workers = workers()?;
    s.validate()?;
    Ok(s)
}

fn output_dir(cfg: &Config) -> PathBuf {
    PathBuf::from(cfg.raw("output").unwrap_or("results"))
}

fn cmd_run(cfg: &Config) -> Result<()> {
    let problem: ProblemKind = cfg.require("problem")?;
    let algo: Algorithm = cfg.require("algo")?;
    let mut lc = LearnerConfig::new(cfg.require("alpha")?, cfg.get("lambda")?.unwrap_or(0.0))
        .with_beta(cfg.get("beta")?.unwrap_or(0.0))
        .with_zeta(cfg.get("zeta")?.unwrap_or(0.0))
        .with_c_bar(cfg.get("c_bar")?.unwrap_or(1.0))
        .with_rho_placement(cfg.get("rho_placement")?.unwrap_or_default())
        .with_trace_form(cfg.get("trace_form")?.unwrap_or_default());
    if algo.uses_secondary() {
        lc = lc.with_alpha_h(cfg.require("alpha_h")?);
    }
    if cfg.raw("baselines").is_some() {
        bail!("`baselines` applies to sweep only");
    }
    let cell = Cell::new(problem, algo, lc)?;
    let results = sweep(&[cell], &[], &settings(cfg)?)?;
    let dir = output_dir(cfg);
    write_results(&results, &dir)?;
    let s = &results.summaries()?[0];
    println!(
        "{}: auc {} final {} diverged {:.0}% -> {}",
        s.id,
        s.auc,
        s.final_perf,
        100.0 * s.diverged_fraction,
        dir.display()
    );
    Ok(())
}

fn sweep_cells(cfg: &Config, problem: ProblemKind) -> Result<Vec<Cell>> {
    let algos: Vec<Algorithm> = match cfg.list("algo")? {
        Some(list) => list,
        None => Algorithm::ALL.into_iter().filter(|a| !a.episodic_only() || problem.is_episodic()).collect(),
    };
    let placement: RhoPlacement = cfg.get("rho_placement")?.unwrap_or_default();
    let form: TraceForm = cfg.get("trace_form")?.unwrap_or_default();
    let c_bar: Option<f64> = cfg.get("c_bar")?;
    let mut cells = Vec::new();
    for algo in algos {
        let mut grid = build_grid(algo, problem)?;
        if let Some(v) = cfg.list("alpha")? {
            grid.alphas = v;
        }
        if let Some(v) = cfg.list("alpha_h")?.filter(|_| algo.uses_secondary()) {
            grid.alpha_hs = v;
        }
        if let Some(v) = cfg.list("lambda")?.filter(|_| algo.uses_lambda()) {
            grid.lambdas = v;
        }
        if let Some(v) = cfg.list("beta")?.filter(|_| algo.uses_beta()) {
            grid.betas = v;
        }
        if let Some(v) = cfg.list("zeta")?.filter(|_| algo.uses_zeta()) {
            grid.zetas = v;
        }
        if algo == Algorithm::OffPolicyTd {
            grid.rho_placement = placement;
            grid.trace_form = form;
        }
        for mut cell in grid.cells()? {
            if let Some(c) = c_bar {
                cell.config.c_bar = c;
                cell = Cell::new(cell.problem, cell.algorithm, cell.config)?;
            }
            cells.push(cell);
        }
    }
    Ok(cells)
}

fn sweep_baselines(cfg: &Config, problem: ProblemKind) -> Result<Vec<BaselineSpec>> {
    let Some(names) = cfg.list::<String>("baselines")? else { return Ok(Vec::new()) };
    let lambdas: Vec<f64> = cfg.list("lambda")?.unwrap_or_else(|| LAMBDA_VALUES.to_vec());
    let mut out = Vec::new();
    for name in names {
        let variant = match name.as_str() {
            "lstd" => LstdVariant::Plain,
            "lsetd" => LstdVariant::Emphatic { beta: None },
            "lsaltd" if problem.is_episodic() => LstdVariant::AltLife,
            "lsaltd" => bail!("lsaltd needs an episodic problem, {problem} is continuing"),
            other => bail!("unknown baseline `{other}` (lstd, lsetd, lsaltd)"),
        };
        out.extend(lambdas.iter().map(|&lambda| BaselineSpec { problem, variant, lambda }));
    }
    Ok(out)
}

fn cmd_sweep(cfg: &Config) -> Result<()> {
    let problem: ProblemKind = cfg.require("problem")?;
    let cells = sweep_cells(cfg, problem)?;
    let baselines = sweep_baselines(cfg, problem)?;
    let settings = settings(cfg)?;
    let results: SweepResults = sweep(&cells, &baselines, &settings)?;
    let dir = output_dir(cfg);
    write_results(&results, &dir)?;
    println!(
        "{} cells and {} baselines x {} runs on {problem} -> {}",
        cells.len(),
        baselines.len(),
        settings.runs,
        dir.display()
    );
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn sink(output: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_rows<T: Serialize>(rows: &[T], format: Format, out: Box<dyn Write>) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn cmd_report(results: &Path, criterion: Criterion, output: Option<PathBuf>, all: bool) -> Result<()> {
    let summary = read_summary(results)?;
    let ranked = if all {
        rank(&summary.cells, criterion)?
    } else {
        let mut best: Vec<_> = best_by_family(&summary.cells, criterion)?.into_values().collect();
        best.sort_by(|a, b| criterion.value(a).total_cmp(&criterion.value(b)).then_with(|| a.id.cmp(&b.id)));
        best
    };
    let mut out = io::stdout().lock();
    writeln!(out, "ranked by {criterion}")?;
    writeln!(out, "{:>4}  {:<16} {:>12} {:>12} {:>9}  cell", "rank", "family", "auc", "final", "diverged")?;
    for (i, c) in ranked.iter().enumerate() {
        writeln!(
            out,
            "{:>4}  {:<16} {:>12.6} {:>12.6} {:>8.1}%  {}",
            i + 1,
            c.family(),
            c.auc,
            c.final_perf,
            100.0 * c.diverged_fraction,
            c.id
        )?;
    }
    for b in &summary.baselines {
        writeln!(out, "baseline {:<24} error {:.6} over {} runs", b.id, b.error, b.runs)?;
    }
    let path = output.unwrap_or_else(|| results.join(format!("sensitivity_{criterion}.csv")));
    write_rows(&sensitivity_table(&summary.cells, criterion)?, Format::Csv, Box::new(create(&path)?))?;
    writeln!(out, "sensitivity table -> {}", path.display())?;
    Ok(())
}

fn cmd_oracle(problem: ProblemKind, output: Option<PathBuf>) -> Result<()> {
    let instance = problem.reference()?;
    GroundTruth::exact(&instance)?.write_csv(&instance, sink(output.as_deref())?)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_plotdata(
    results: &Path,
    kind: PlotKind,
    criterion: Criterion,
    algo: Option<String>,
    lambda: Option<String>,
    format: Format,
    output: Option<PathBuf>,
) -> Result<()> {
    let mut summary = read_summary(results)?;
    let mut filter = Config::default();
    if let Some(a) = &algo {
        filter.set("algo", a)?;
    }
    if let Some(l) = &lambda {
        filter.set("lambda", l)?;
    }
    let algos: Option<Vec<Algorithm>> = filter.list("algo")?;
    let lambdas: Option<Vec<f64>> = filter.list("lambda")?;
    summary.cells.retain(|c| {
        algos.as_ref().is_none_or(|a| a.contains(&c.algorithm)) && lambdas.as_ref().is_none_or(|l| l.contains(&c.lambda))
    });
    if summary.cells.is_empty() {
        bail!("no cells in {} match the filters", results.display());
    }
    let out = sink(output.as_deref())?;
    match kind {
        PlotKind::LearningCurve => {
            let rows = read_series(results)?;
            write_rows(&learning_curves(&summary, &rows, criterion)?, format, out)
        }
        PlotKind::Stepsize => write_rows(&stepsize_table(&summary.cells, criterion)?, format, out),
        PlotKind::Sensitivity => write_rows(&sensitivity_table(&summary.cells, criterion)?, format, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => args.resolve().and_then(|c| cmd_run(&c)),
        Command::Sweep(args) => args.resolve().and_then(|c| cmd_sweep(&c)),
        Command::Report { results, criterion, output, all } => cmd_report(&results, criterion, output, all),
        Command::Oracle { problem, output } => cmd_oracle(problem, output),
        Command::Plotdata { results, kind, criterion, algo, lambda, format, output } => {
            cmd_plotdata(&results, kind, criterion, algo, lambda, format, output)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
