use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CellSummary, SeriesRow, SummaryFile};
use crate::env::ProblemKind;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Auc,
    Final,
}

impl Criterion {
    pub fn value(self, cell: &CellSummary) -> f64 {
        match self {
            Criterion::Auc => cell.auc,
            Criterion::Final => cell.final_perf,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Criterion::Auc => "auc",
            Criterion::Final => "final",
        })
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auc" => Ok(Criterion::Auc),
            "final" => Ok(Criterion::Final),
            other => Err(Error::InvalidConfig(format!("unknown criterion `{other}` (auc|final)"))),
        }
    }
}

fn by_criterion(criterion: Criterion) -> impl Fn(&&CellSummary, &&CellSummary) -> Ordering {
    move |a, b| criterion.value(a).total_cmp(&criterion.value(b)).then_with(|| a.id.cmp(&b.id))
}

/// Cells ascending by the criterion; equal values fall back to the cell id.
pub fn rank(cells: &[CellSummary], criterion: Criterion) -> Result<Vec<&CellSummary>> {
    if cells.is_empty() {
        return Err(Error::Empty);
    }
    let mut out: Vec<&CellSummary> = cells.iter().collect();
    out.sort_by(by_criterion(criterion));
    Ok(out)
}

/// Best cell of every `(problem, family)` group, e.g. the best `gtd(0)` cell.
pub fn best_by_family(cells: &[CellSummary], criterion: Criterion) -> Result<BTreeMap<(ProblemKind, String), &CellSummary>> {
    let mut best: BTreeMap<(ProblemKind, String), &CellSummary> = BTreeMap::new();
    for cell in rank(cells, criterion)? {
        best.entry((cell.problem, cell.family())).or_insert(cell);
    }
    Ok(best)
}

/// One point of the parameter-sensitivity plot.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub problem: ProblemKind,
    pub family: String,
    pub cell: String,
    pub value: f64,
    /// `value`, or the cutoff when any run diverged.
    pub plotted: f64,
    pub diverged_fraction: f64,
    /// Share of the family's cells with at least one diverged run, in percent.
    pub family_diverged_pct: f64,
}

/// One row per cell, grouped by problem and family in id order.
pub fn sensitivity_table(cells: &[CellSummary], criterion: Criterion) -> Result<Vec<SensitivityRow>> {
    if cells.is_empty() {
        return Err(Error::Empty);
    }
    let mut sorted: Vec<&CellSummary> = cells.iter().collect();
    sorted.sort_by(|a, b| (a.problem, a.family()).cmp(&(b.problem, b.family())).then_with(|| a.id.cmp(&b.id)));
    let mut pct: BTreeMap<(ProblemKind, String), (usize, usize)> = BTreeMap::new();
    for c in &sorted {
        let e = pct.entry((c.problem, c.family())).or_default();
        e.0 += usize::from(c.diverged_fraction > 0.0);
        e.1 += 1;
    }
    Ok(sorted
        .into_iter()
        .map(|c| {
            let (bad, total) = pct[&(c.problem, c.family())];
            let value = criterion.value(c);
            SensitivityRow {
                problem: c.problem,
                family: c.family(),
                cell: c.id.clone(),
                value,
                plotted: if c.diverged_fraction > 0.0 { c.cutoff } else { value },
                diverged_fraction: c.diverged_fraction,
                family_diverged_pct: 100.0 * bad as f64 / total as f64,
            }
        })
        .collect())
}

/// Criterion against stepsize with every other parameter optimized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepsizeRow {
    pub problem: ProblemKind,
    pub family: String,
    pub alpha: f64,
    pub value: f64,
    pub cell: String,
}

pub fn stepsize_table(cells: &[CellSummary], criterion: Criterion) -> Result<Vec<StepsizeRow>> {
    let mut sorted = rank(cells, criterion)?;
    sorted.sort_by(|a, b| {
        (a.problem, a.family()).cmp(&(b.problem, b.family())).then(a.alpha.total_cmp(&b.alpha))
    });
    // `sort_by` is stable, so the first cell of each (problem, family, alpha) run is its best.
    let mut out: Vec<StepsizeRow> = Vec::new();
    for c in sorted {
        let family = c.family();
        if out.last().is_some_and(|r| r.problem == c.problem && r.family == family && r.alpha == c.alpha) {
            continue;
        }
        out.push(StepsizeRow { problem: c.problem, family, alpha: c.alpha, value: criterion.value(c), cell: c.id.clone() });
    }
    Ok(out)
}

/// Mean error over runs at each evaluation step of a family's best cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub problem: ProblemKind,
    pub family: String,
    pub cell: String,
    pub step: usize,
    /// Runs that diverged earlier contribute the cutoff.
    pub mean_error: f64,
    pub runs: usize,
}

/// Evaluation points by step, and the step a divergence was detected.
type RunPoints = (BTreeMap<usize, f64>, Option<usize>);

pub fn learning_curves(summary: &SummaryFile, rows: &[SeriesRow], criterion: Criterion) -> Result<Vec<CurveRow>> {
    let best = best_by_family(&summary.cells, criterion)?;
    let wanted: BTreeMap<String, &CellSummary> = best.values().map(|c| (c.id.clone(), *c)).collect();
    let mut runs: BTreeMap<String, BTreeMap<usize, RunPoints>> = BTreeMap::new();
    for row in rows {
        let Some(id) = row.cell_id().filter(|id| wanted.contains_key(id)) else { continue };
        let entry = runs.entry(id).or_default().entry(row.run).or_default();
        if row.diverged {
            entry.1 = Some(row.step);
        } else {
            entry.0.insert(row.step, row.error);
        }
    }

    let every = summary.settings.eval_every;
    let mut out = Vec::new();
    for ((problem, family), cell) in best {
        let per_run = runs
            .get(&cell.id)
            .ok_or_else(|| Error::CorruptResults(format!("no series rows for {}", cell.id)))?;
        let steps = summary.settings.steps_for(problem);
        for step in (every..=steps).step_by(every) {
            let mut total = 0.0;
            for (run, (points, diverged_at)) in per_run {
                total += match (points.get(&step), diverged_at) {
                    (Some(&e), _) => e,
                    (None, Some(d)) if *d <= step => cell.cutoff,
                    _ => return Err(Error::CorruptResults(format!("{} run {run} lacks step {step}", cell.id))),
                };
            }
            out.push(CurveRow {
                problem,
                family: family.clone(),
                cell: cell.id.clone(),
                step,
                mean_error: total / per_run.len() as f64,
                runs: per_run.len(),
            });
        }
    }
    Ok(out)
}
