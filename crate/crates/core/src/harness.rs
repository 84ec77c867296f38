//! Seeded experiment runner: grid cells × repeated runs, NMI/RI aggregation,
//! report and trace files, and score tables for the rank tests.
//!
//! Every (cell, run) pair is an independent job on the shared dataset. Jobs
//! run on the rayon pool and are merged back in (cell, run) order, so the
//! output bytes do not depend on scheduling.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cofkm::{self, CoFkmConfig};
use crate::dataset::{self, CsvOptions, MultiViewDataset, SyntheticSpec};
use crate::error::{MvfcError, Result};
use crate::fcm::{self, FcmConfig};
use crate::hss::{self, HssConfig};
use crate::metrics;
use crate::nmf::{self, NmfConfig};
use crate::stats::ScoreTable;
use crate::trace::Trace;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Files {
        /// One samples-as-rows CSV per view.
        views: Vec<PathBuf>,
        labels: PathBuf,
        #[serde(default)]
        has_header: bool,
        /// Min-max scale every feature to [0, 1] after loading.
        #[serde(default = "default_true")]
        normalize: bool,
    },
    Synthetic(SyntheticSpec),
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algorithm {
    /// FCM on the concatenated views.
    #[serde(rename = "fcm")]
    Fcm,
    #[serde(rename = "cofkm")]
    CoFkm,
    #[serde(rename = "hss")]
    Hss,
    /// Shared-coefficient NMF followed by FCM on the coefficients.
    #[serde(rename = "shared_nmf+fcm")]
    SharedNmfFcm,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fcm => "fcm",
            Algorithm::CoFkm => "cofkm",
            Algorithm::Hss => "hss",
            Algorithm::SharedNmfFcm => "shared_nmf+fcm",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "fcm" => Ok(Algorithm::Fcm),
            "cofkm" => Ok(Algorithm::CoFkm),
            "hss" => Ok(Algorithm::Hss),
            "shared_nmf+fcm" | "nmf" => Ok(Algorithm::SharedNmfFcm),
            other => Err(MvfcError::InvalidConfig(format!(
                "unknown algorithm {other:?}"
            ))),
        }
    }
}

/// Parameter lists. An absent axis takes its default; an axis given as an
/// empty list is a configuration error.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    pub lambda: Option<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
    pub rank: Option<Vec<usize>>,
    pub fuzzifier: Option<Vec<f64>>,
    pub cofkm_eta: Option<Vec<f64>>,
    /// Fill absent λ, η and r axes with the full search ranges.
    #[serde(default)]
    pub full_ranges: bool,
}

/// `{2^-3, …, 2^14}`.
pub fn lambda_range() -> Vec<f64> {
    (-3..=14).map(|e| 2f64.powi(e)).collect()
}

/// `{1e-7, …, 1e7}`.
pub fn eta_range() -> Vec<f64> {
    (-7..=7).map(|e| 10f64.powi(e)).collect()
}

/// `{10, 20, …, min(100, d_min)}`, or `{d_min}` when no multiple of ten fits.
pub fn rank_range(d_min: usize) -> Vec<usize> {
    let top = d_min.min(100);
    if top < 10 {
        vec![d_min]
    } else {
        (1..=top / 10).map(|i| 10 * i).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub grid: ParamGrid,
    /// Defaults to the number of distinct labels.
    #[serde(default)]
    pub clusters: Option<usize>,
    #[serde(default = "default_runs")]
    pub runs_per_cell: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    #[serde(default = "default_h_steps")]
    pub h_inner_steps: usize,
}

fn default_runs() -> usize {
    10
}
fn default_output() -> PathBuf {
    PathBuf::from("mvfc-out")
}
fn default_tol() -> f64 {
    1e-6
}
fn default_t_max() -> usize {
    1000
}
fn default_h_steps() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetSource, algorithm: Algorithm) -> Self {
        Self {
            dataset,
            algorithm,
            grid: ParamGrid::default(),
            clusters: None,
            runs_per_cell: default_runs(),
            base_seed: 0,
            output_dir: default_output(),
            tol: default_tol(),
            t_max: default_t_max(),
            h_inner_steps: default_h_steps(),
        }
    }
}

pub fn load_dataset(source: &DatasetSource) -> Result<(String, MultiViewDataset)> {
    match source {
        DatasetSource::Files {
            views,
            labels,
            has_header,
            normalize,
        } => {
            let ds = dataset::load_multiview(
                views,
                Some(labels.as_path()),
                CsvOptions {
                    has_header: *has_header,
                },
            )?;
            let name = labels
                .parent()
                .and_then(Path::file_name)
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into());
            Ok((
                name,
                if *normalize {
                    ds.normalize_minmax()
                } else {
                    ds
                },
            ))
        }
        DatasetSource::Synthetic(spec) => {
            Ok(("synthetic".into(), dataset::generate_synthetic(spec)?))
        }
    }
}

/// Parameters of one grid cell. Axes an algorithm does not use are `None`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellParams {
    pub fuzzifier: f64,
    pub lambda: Option<f64>,
    pub eta: Option<f64>,
    pub rank: Option<usize>,
    pub cofkm_eta: Option<f64>,
}

/// Validated plan: dataset, cluster count and the expanded grid.
#[derive(Clone, Debug)]
pub struct Plan {
    pub dataset_name: String,
    pub dataset: MultiViewDataset,
    pub labels: Vec<i64>,
    pub clusters: usize,
    pub cells: Vec<CellParams>,
}

fn axis<T: Copy>(given: &Option<Vec<T>>, name: &str, default: Vec<T>) -> Result<Vec<T>> {
    match given {
        Some(v) if v.is_empty() => Err(MvfcError::InvalidConfig(format!(
            "grid axis {name} is empty"
        ))),
        Some(v) => Ok(v.clone()),
        None => Ok(default),
    }
}

fn check_all(values: &[f64], name: &str, ok: impl Fn(f64) -> bool, rule: &str) -> Result<()> {
    match values.iter().find(|&&v| !ok(v)) {
        Some(v) => Err(MvfcError::InvalidConfig(format!(
            "{name} = {v}: must be {rule}"
        ))),
        None => Ok(()),
    }
}

/// Checks everything that can be checked without running a fit.
pub fn plan(cfg: &ExperimentConfig) -> Result<Plan> {
    if cfg.runs_per_cell == 0 {
        return Err(MvfcError::InvalidConfig(
            "runs_per_cell must be >= 1".into(),
        ));
    }
    if !(cfg.tol >= 0.0) || cfg.t_max == 0 || cfg.h_inner_steps == 0 {
        return Err(MvfcError::InvalidConfig(
            "need tol >= 0, t_max >= 1 and h_inner_steps >= 1".into(),
        ));
    }
    let (dataset_name, ds) = load_dataset(&cfg.dataset)?;
    let labels = ds.require_labels()?.to_vec();
    let n = ds.n_samples();
    let clusters = match cfg.clusters {
        Some(c) => c,
        None => ds.n_classes().unwrap_or(0),
    };
    if clusters == 0 || clusters > n {
        return Err(MvfcError::InvalidConfig(format!(
            "cluster count {clusters} must be in [1, {n}]"
        )));
    }
    if matches!(cfg.algorithm, Algorithm::Hss | Algorithm::SharedNmfFcm) && !ds.is_nonnegative() {
        return Err(MvfcError::InvalidConfig(
            "factorization-based algorithms need nonnegative data; enable normalize".into(),
        ));
    }

    let g = &cfg.grid;
    let d_min = ds.min_view_dim();
    let fuzzifier = axis(&g.fuzzifier, "fuzzifier", Vec::new())?;
    check_all(
        &fuzzifier,
        "fuzzifier",
        |m| m > 1.0 && m.is_finite(),
        "finite and > 1",
    )?;
    // an empty list here means "derive from n and the clustering dimension"
    let m_for = |d: usize| -> Vec<f64> {
        if fuzzifier.is_empty() {
            vec![fcm::default_fuzzifier(n, d)]
        } else {
            fuzzifier.clone()
        }
    };

    let default_rank = match &cfg.dataset {
        DatasetSource::Synthetic(spec) if !g.full_ranges => vec![spec.r_true.min(d_min)],
        _ if g.full_ranges => rank_range(d_min),
        _ => vec![rank_range(d_min)[0]],
    };

    let mut cells = Vec::new();
    match cfg.algorithm {
        Algorithm::Fcm => {
            let d: usize = ds.view_dims().iter().sum();
            for m in m_for(d) {
                cells.push(CellParams {
                    fuzzifier: m,
                    lambda: None,
                    eta: None,
                    rank: None,
                    cofkm_eta: None,
                });
            }
        }
        Algorithm::CoFkm => {
            let etas = axis(&g.cofkm_eta, "cofkm_eta", vec![0.5])?;
            check_all(&etas, "cofkm_eta", |e| (0.0..1.0).contains(&e), "in [0, 1)")?;
            for m in m_for(d_min) {
                for &e in &etas {
                    cells.push(CellParams {
                        fuzzifier: m,
                        lambda: None,
                        eta: None,
                        rank: None,
                        cofkm_eta: Some(e),
                    });
                }
            }
        }
        Algorithm::Hss | Algorithm::SharedNmfFcm => {
            let ranks = axis(&g.rank, "rank", default_rank)?;
            if let Some(&r) = ranks.iter().find(|&&r| r == 0 || r > d_min) {
                return Err(MvfcError::InvalidConfig(format!(
                    "rank {r} must be in [1, {d_min}]"
                )));
            }
            let hss = cfg.algorithm == Algorithm::Hss;
            let (lambdas, etas) = if hss {
                let (dl, de) = if g.full_ranges {
                    (lambda_range(), eta_range())
                } else {
                    (vec![1.0], vec![1.0])
                };
                let l = axis(&g.lambda, "lambda", dl)?;
                let e = axis(&g.eta, "eta", de)?;
                check_all(&l, "lambda", |x| x > 0.0 && x.is_finite(), "finite and > 0")?;
                check_all(&e, "eta", |x| x > 0.0 && x.is_finite(), "finite and > 0")?;
                (
                    l.into_iter().map(Some).collect(),
                    e.into_iter().map(Some).collect(),
                )
            } else {
                (vec![None], vec![None])
            };
            for &r in &ranks {
                for m in m_for(r) {
                    for &l in &lambdas {
                        for &e in &etas {
                            cells.push(CellParams {
                                fuzzifier: m,
                                lambda: l,
                                eta: e,
                                rank: Some(r),
                                cofkm_eta: None,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(Plan {
        dataset_name,
        dataset: ds,
        labels,
        clusters,
        cells,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub nmi: f64,
    pub ri: f64,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub reseeds: usize,
    /// Labels in sample order.
    #[serde(skip)]
    pub labels: Vec<usize>,
    /// Trace of the clustering stage.
    #[serde(skip)]
    pub trace: Trace,
    /// Factorization trace of `shared_nmf+fcm`.
    #[serde(skip)]
    pub nmf_trace: Option<Trace>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Aggregate {
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
}

impl Aggregate {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Self { mean, variance }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellReport {
    pub cell: usize,
    pub params: CellParams,
    pub nmi: Aggregate,
    pub ri: Aggregate,
    pub runs: Vec<RunRecord>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Nmi,
    Ri,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub algorithm: Algorithm,
    pub n_samples: usize,
    pub n_views: usize,
    pub clusters: usize,
    pub base_seed: u64,
    pub runs_per_cell: usize,
    pub cells: Vec<CellReport>,
    pub best_cell_by_nmi: usize,
    pub best_cell_by_ri: usize,
    /// Best cells are picked with the ground-truth labels.
    pub oracle_selection: bool,
}

impl ExperimentReport {
    pub fn best_cell(&self, metric: Metric) -> &CellReport {
        match metric {
            Metric::Nmi => &self.cells[self.best_cell_by_nmi],
            Metric::Ri => &self.cells[self.best_cell_by_ri],
        }
    }

    pub fn best_mean(&self, metric: Metric) -> f64 {
        let cell = self.best_cell(metric);
        match metric {
            Metric::Nmi => cell.nmi.mean,
            Metric::Ri => cell.ri.mean,
        }
    }
}

fn best_by(cells: &[CellReport], key: impl Fn(&CellReport) -> f64) -> usize {
    let mut best = 0;
    for (i, c) in cells.iter().enumerate() {
        if key(c) > key(&cells[best]) {
            best = i;
        }
    }
    best
}

fn score(labels: Vec<usize>, truth: &[i64]) -> Result<(Vec<usize>, f64, f64)> {
    let nmi = metrics::nmi(&labels, truth)?;
    let ri = metrics::rand_index(&labels, truth)?;
    Ok((labels, nmi, ri))
}

/// One seeded fit of the configured algorithm.
pub fn run_once(
    cfg: &ExperimentConfig,
    plan: &Plan,
    cell: &CellParams,
    run: usize,
) -> Result<RunRecord> {
    let ds = &plan.dataset;
    let c = plan.clusters;
    let seed = cfg.base_seed.wrapping_add(run as u64);
    let (labels, trace, nmf_trace, objective) = match cfg.algorithm {
        Algorithm::Fcm => {
            let data = ds.concatenated();
            let fc = FcmConfig {
                tol: cfg.tol,
                t_max: cfg.t_max,
                ..FcmConfig::new(c, cell.fuzzifier, seed)
            };
            let fit = fcm::fcm_fit(data.view(), &fc)?;
            let j = fit.trace.final_objective().unwrap_or(f64::NAN);
            (fcm::defuzzify(&fit.partition), fit.trace, None, j)
        }
        Algorithm::CoFkm => {
            let cc = CoFkmConfig {
                eta: cell.cofkm_eta.unwrap_or(0.5),
                tol: cfg.tol,
                t_max: cfg.t_max,
                ..CoFkmConfig::new(c, cell.fuzzifier, seed)
            };
            let fit = cofkm::cofkm_fit(ds, &cc)?;
            let j = fit.trace.final_objective().unwrap_or(f64::NAN);
            let consensus = cofkm::consensus_membership(&fit.state);
            (fcm::defuzzify(&consensus), fit.trace, None, j)
        }
        Algorithm::Hss => {
            let hc = HssConfig {
                lambda: cell.lambda.unwrap_or(1.0),
                eta: cell.eta.unwrap_or(1.0),
                tol: cfg.tol,
                t_max: cfg.t_max,
                h_inner_steps: cfg.h_inner_steps,
                ..HssConfig::new(c, cell.rank.unwrap_or(1), cell.fuzzifier, seed)
            };
            let fit = hss::hss_fit(ds, &hc)?;
            (fit.state.labels(), fit.trace, None, fit.state.objective)
        }
        Algorithm::SharedNmfFcm => {
            let nc = NmfConfig {
                tol: cfg.tol,
                t_max: cfg.t_max,
                ..NmfConfig::new(cell.rank.unwrap_or(1), seed)
            };
            let nfit = nmf::shared_nmf_fit(ds, &nc)?;
            let fc = FcmConfig {
                tol: cfg.tol,
                t_max: cfg.t_max,
                ..FcmConfig::new(c, cell.fuzzifier, seed)
            };
            let fit = fcm::fcm_fit(nfit.factorization.coeff().view(), &fc)?;
            let j = fit.trace.final_objective().unwrap_or(f64::NAN);
            (
                fcm::defuzzify(&fit.partition),
                fit.trace,
                Some(nfit.trace),
                j,
            )
        }
    };
    let (labels, nmi, ri) = score(labels, &plan.labels)?;
    Ok(RunRecord {
        run,
        seed,
        nmi,
        ri,
        objective,
        iterations: trace.iterations(),
        converged: trace.converged,
        reseeds: trace.reseeds.len(),
        labels,
        trace,
        nmf_trace,
    })
}

/// Runs every (cell, run) job and assembles the report. Writes nothing.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let plan = plan(cfg)?;
    run_plan(cfg, &plan)
}

pub fn run_plan(cfg: &ExperimentConfig, plan: &Plan) -> Result<ExperimentReport> {
    let jobs: Vec<(usize, usize)> = (0..plan.cells.len())
        .flat_map(|c| (0..cfg.runs_per_cell).map(move |r| (c, r)))
        .collect();
    let results: Vec<Result<RunRecord>> = jobs
        .par_iter()
        .map(|&(c, r)| run_once(cfg, plan, &plan.cells[c], r))
        .collect();

    let mut records = results.into_iter();
    let mut cells = Vec::with_capacity(plan.cells.len());
    for (i, params) in plan.cells.iter().enumerate() {
        let runs = records
            .by_ref()
            .take(cfg.runs_per_cell)
            .collect::<Result<Vec<_>>>()?;
        let nmi: Vec<f64> = runs.iter().map(|r| r.nmi).collect();
        let ri: Vec<f64> = runs.iter().map(|r| r.ri).collect();
        cells.push(CellReport {
            cell: i,
            params: params.clone(),
            nmi: Aggregate::of(&nmi),
            ri: Aggregate::of(&ri),
            runs,
        });
    }
    Ok(ExperimentReport {
        dataset: plan.dataset_name.clone(),
        algorithm: cfg.algorithm,
        n_samples: plan.dataset.n_samples(),
        n_views: plan.dataset.n_views(),
        clusters: plan.clusters,
        base_seed: cfg.base_seed,
        runs_per_cell: cfg.runs_per_cell,
        best_cell_by_nmi: best_by(&cells, |c| c.nmi.mean),
        best_cell_by_ri: best_by(&cells, |c| c.ri.mean),
        cells,
        oracle_selection: true,
    })
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

/// One row per run.
pub fn report_csv(report: &ExperimentReport) -> String {
    let mut out = String::from(
        "cell,run,seed,fuzzifier,lambda,eta,rank,cofkm_eta,nmi,ri,objective,iterations,converged,reseeds\n",
    );
    for cell in &report.cells {
        let p = &cell.params;
        for r in &cell.runs {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                cell.cell,
                r.run,
                r.seed,
                p.fuzzifier,
                opt(&p.lambda),
                opt(&p.eta),
                opt(&p.rank),
                opt(&p.cofkm_eta),
                r.nmi,
                r.ri,
                r.objective,
                r.iterations,
                r.converged,
                r.reseeds
            );
        }
    }
    out
}

pub fn summary_json(report: &ExperimentReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn trace_file_name(cell: usize, run: usize) -> String {
    format!("cell{cell:03}_run{run:03}.csv")
}

/// Writes one trace CSV per run under `dir`, plus `_nmf` traces where present.
pub fn export_traces(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| MvfcError::io(dir, e))?;
    let mut written = Vec::new();
    for cell in &report.cells {
        for r in &cell.runs {
            let mut files = vec![(trace_file_name(cell.cell, r.run), &r.trace)];
            let nmf_name = format!("cell{:03}_run{:03}_nmf.csv", cell.cell, r.run);
            if let Some(t) = &r.nmf_trace {
                files.push((nmf_name, t));
            }
            for (name, trace) in files {
                let path = dir.join(name);
                let mut buf = Vec::new();
                trace
                    .write_csv(&mut buf)
                    .map_err(|e| MvfcError::io(&path, e))?;
                fs::write(&path, buf).map_err(|e| MvfcError::io(&path, e))?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// `report.csv`, `summary.json` and `traces/` under `dir`.
pub fn write_outputs(report: &ExperimentReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| MvfcError::io(dir, e))?;
    let csv_path = dir.join("report.csv");
    fs::write(&csv_path, report_csv(report)).map_err(|e| MvfcError::io(&csv_path, e))?;
    let json_path = dir.join("summary.json");
    fs::write(&json_path, summary_json(report)).map_err(|e| MvfcError::io(&json_path, e))?;
    export_traces(report, &dir.join("traces"))?;
    Ok(())
}

/// Validates, runs, and writes the outputs to `cfg.output_dir`.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let report = run_experiment(cfg)?;
    write_outputs(&report, &cfg.output_dir)?;
    Ok(report)
}

/// One cell of a score table: the best-cell mean of `metric` for an
/// algorithm on a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreEntry {
    pub dataset: String,
    pub algorithm: String,
    pub value: f64,
}

impl ScoreEntry {
    pub fn from_report(report: &ExperimentReport, algorithm: &str, metric: Metric) -> Self {
        Self {
            dataset: report.dataset.clone(),
            algorithm: algorithm.to_string(),
            value: report.best_mean(metric),
        }
    }
}

/// Datasets and algorithms keep first-appearance order. Every pair must be
/// present exactly once.
pub fn build_score_table(entries: &[ScoreEntry]) -> Result<ScoreTable> {
    let mut datasets: Vec<String> = Vec::new();
    let mut algorithms: Vec<String> = Vec::new();
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for e in entries {
        let d = match datasets.iter().position(|x| x == &e.dataset) {
            Some(i) => i,
            None => {
                datasets.push(e.dataset.clone());
                datasets.len() - 1
            }
        };
        let a = match algorithms.iter().position(|x| x == &e.algorithm) {
            Some(i) => i,
            None => {
                algorithms.push(e.algorithm.clone());
                algorithms.len() - 1
            }
        };
        if cells.insert((d, a), e.value).is_some() {
            return Err(MvfcError::InvalidScoreTable(format!(
                "duplicated entry for algorithm {:?} on dataset {:?}",
                e.algorithm, e.dataset
            )));
        }
    }
    let mut scores = Array2::zeros((datasets.len(), algorithms.len()));
    for d in 0..datasets.len() {
        for a in 0..algorithms.len() {
            scores[[d, a]] = *cells.get(&(d, a)).ok_or_else(|| {
                MvfcError::InvalidScoreTable(format!(
                    "missing entry for algorithm {:?} on dataset {:?}",
                    algorithms[a], datasets[d]
                ))
            })?;
        }
    }
    ScoreTable::new(scores, algorithms, datasets, true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(lambda_range().len(), 18);
        assert_eq!(lambda_range()[0], 0.125);
        assert_eq!(*lambda_range().last().unwrap(), 16384.0);
        assert_eq!(eta_range().len(), 15);
        assert_eq!(
            rank_range(250),
            (1..=10).map(|i| i * 10).collect::<Vec<_>>()
        );
        assert_eq!(rank_range(34), vec![10, 20, 30]);
        assert_eq!(rank_range(7), vec![7]);
    }

    #[test]
    fn population_variance() {
        let a = Aggregate::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.mean, 2.5);
        assert_eq!(a.variance, 1.25);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in [
            Algorithm::Fcm,
            Algorithm::CoFkm,
            Algorithm::Hss,
            Algorithm::SharedNmfFcm,
        ] {
            assert_eq!(Algorithm::parse(a.name()).unwrap(), a);
        }
        assert!(Algorithm::parse("kmeans").is_err());
    }
}
