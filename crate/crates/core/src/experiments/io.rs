use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BaselineSummary, CellSummary, SweepResults, SweepSettings};
use crate::baselines::LstdVariant;
use crate::env::ProblemKind;
use crate::error::{Error, Result};
use crate::learners::{Algorithm, RhoPlacement};

pub const SERIES_FILE: &str = "series.csv";
pub const SUMMARY_FILE: &str = "summary.json";

/// One line of `series.csv`. Parameters an algorithm does not use are empty.
/// A diverged run ends with a single row at the detection step whose error is
/// the cutoff and whose `diverged` is `true`. Baseline rows carry the error of
/// the solved weights at the final step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub problem: ProblemKind,
    pub algorithm: String,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub alpha_h: Option<f64>,
    pub beta: Option<f64>,
    pub zeta: Option<f64>,
    pub rho_placement: Option<RhoPlacement>,
    pub run: usize,
    pub step: usize,
    pub error: f64,
    pub diverged: bool,
}

impl SeriesRow {
    /// Cell id of a learner row; `None` for baseline rows.
    pub fn cell_id(&self) -> Option<String> {
        let algorithm: Algorithm = self.algorithm.parse().ok()?;
        Some(super::cell_id(
            self.problem,
            algorithm,
            self.lambda.unwrap_or(0.0),
            self.alpha?,
            self.alpha_h.unwrap_or(0.0),
            self.beta.unwrap_or(0.0),
            self.zeta.unwrap_or(0.0),
            self.rho_placement.unwrap_or_default(),
        ))
    }
}

pub fn write_series_csv<W: Write>(results: &SweepResults, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (cell, records) in results.cells.iter().zip(&results.records) {
        let a = cell.algorithm;
        let c = &cell.config;
        let row = |run, step, error, diverged| SeriesRow {
            problem: cell.problem,
            algorithm: a.id().to_string(),
            lambda: a.uses_lambda().then_some(c.lambda),
            alpha: Some(c.alpha),
            alpha_h: a.uses_secondary().then_some(c.alpha_h),
            beta: a.uses_beta().then_some(c.beta),
            zeta: a.uses_zeta().then_some(c.zeta),
            rho_placement: Some(c.rho_placement),
            run,
            step,
            error,
            diverged,
        };
        for rec in records {
            for &(step, error) in &rec.series {
                w.serialize(row(rec.run, step, error, false))?;
            }
            if let Some(step) = rec.diverged_at {
                w.serialize(row(rec.run, step, rec.auc, true))?;
            }
        }
    }
    for (spec, records) in results.baselines.iter().zip(&results.baseline_records) {
        let beta = match spec.variant {
            LstdVariant::Emphatic { beta } => beta,
            _ => None,
        };
        for rec in records {
            w.serialize(SeriesRow {
                problem: spec.problem,
                algorithm: spec.variant.id().to_string(),
                lambda: Some(spec.lambda),
                alpha: None,
                alpha_h: None,
                beta,
                zeta: None,
                rho_placement: None,
                run: rec.run,
                step: results.settings.steps_for(spec.problem),
                error: rec.error,
                diverged: false,
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv<R: Read>(input: R) -> Result<Vec<SeriesRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<Vec<SeriesRow>, _>>()
        .map_err(|e| Error::CorruptResults(format!("{SERIES_FILE}: {e}")))
}

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryFile {
    pub settings: SweepSettings,
    pub cutoffs: BTreeMap<ProblemKind, f64>,
    pub cells: Vec<CellSummary>,
    pub baselines: Vec<BaselineSummary>,
}

impl SummaryFile {
    pub fn from_results(results: &SweepResults) -> Result<Self> {
        Ok(Self {
            settings: results.settings.clone(),
            cutoffs: results.cutoffs.clone(),
            cells: results.summaries()?,
            baselines: results.baseline_summaries(),
        })
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        out.flush()?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        serde_json::from_reader(input).map_err(|e| Error::CorruptResults(format!("{SUMMARY_FILE}: {e}")))
    }
}

/// Writes `series.csv` and `summary.json` into `dir`, creating it if needed.
pub fn write_results(results: &SweepResults, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_series_csv(results, BufWriter::new(File::create(dir.join(SERIES_FILE))?))?;
    SummaryFile::from_results(results)?.write_json(BufWriter::new(File::create(dir.join(SUMMARY_FILE))?))
}

fn open(dir: &Path, name: &str) -> Result<BufReader<File>> {
    let path = dir.join(name);
    File::open(&path)
        .map(BufReader::new)
        .map_err(|e| Error::CorruptResults(format!("cannot open {}: {e}", path.display())))
}

pub fn read_summary(dir: &Path) -> Result<SummaryFile> {
    SummaryFile::read_json(open(dir, SUMMARY_FILE)?)
}

pub fn read_series(dir: &Path) -> Result<Vec<SeriesRow>> {
    read_series_csv(open(dir, SERIES_FILE)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::LstdVariant;
    use crate::experiments::{build_grid, sweep, BaselineSpec};

    fn small() -> SweepResults {
        let mut cells = build_grid(Algorithm::Gtd, ProblemKind::Collision).unwrap().cells().unwrap();
        cells.retain(|c| c.config.alpha >= 0.25 && c.config.alpha_h == 0.01);
        let base = [BaselineSpec { problem: ProblemKind::Collision, variant: LstdVariant::Emphatic { beta: Some(0.2) }, lambda: 0.9 }];
        let settings = SweepSettings { runs: 2, steps: Some(300), ..SweepSettings::desk() };
        sweep(&cells, &base, &settings).unwrap()
    }

    #[test]
    fn series_round_trips_and_ids_match() {
        let results = small();
        let mut buf = Vec::new();
        write_series_csv(&results, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("problem,algorithm,lambda,alpha,alpha_h,beta,zeta,rho_placement,run,step,error,diverged\n"));
        let rows = read_series_csv(buf.as_slice()).unwrap();
        let ids: std::collections::BTreeSet<_> = rows.iter().filter_map(SeriesRow::cell_id).collect();
        let expected: std::collections::BTreeSet<_> = results.cells.iter().map(|c| c.id()).collect();
        assert_eq!(ids, expected);
        let lsetd: Vec<_> = rows.iter().filter(|r| r.algorithm == "lsetd").collect();
        assert_eq!(lsetd.len(), 2);
        assert_eq!(lsetd[0].error, results.baseline_records[0][0].error);
    }

    #[test]
    fn summary_round_trips_exactly() {
        let summary = SummaryFile::from_results(&small()).unwrap();
        let mut buf = Vec::new();
        summary.write_json(&mut buf).unwrap();
        assert_eq!(SummaryFile::read_json(buf.as_slice()).unwrap(), summary);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("\"final\"") && text.contains("\"diverged_fraction\""));
        assert!(!text.contains("workers"));
    }

    #[test]
    fn corrupt_files_are_reported() {
        assert!(matches!(SummaryFile::read_json(&b"{"[..]), Err(Error::CorruptResults(_))));
        assert!(matches!(read_series_csv(&b"problem,algorithm\nmars,td\n"[..]), Err(Error::CorruptResults(_))));
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(read_summary(dir.path()), Err(Error::CorruptResults(_))));
    }
}
