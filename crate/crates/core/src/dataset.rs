//! Multi-view data model, CSV ingestion, min-max normalization and the
//! synthetic generator used for desk-scale experiments.
//!
//! Views are stored features × samples. CSV files on disk hold one sample per
//! row and are transposed on load.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::{concatenate, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{MvfcError, Result};

/// K views of the same n samples, with optional ground-truth labels.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiViewDataset {
    views: Vec<Array2<f64>>,
    labels: Option<Vec<i64>>,
    view_names: Vec<String>,
}

impl MultiViewDataset {
    /// Builds a dataset from features × samples view matrices.
    pub fn new(views: Vec<Array2<f64>>, labels: Option<Vec<i64>>) -> Result<Self> {
        if views.is_empty() {
            return Err(MvfcError::InvalidDataset(
                "at least one view is required".into(),
            ));
        }
        let n = views[0].ncols();
        if n < 2 {
            return Err(MvfcError::InvalidDataset(format!(
                "need at least 2 samples, got {n}"
            )));
        }
        for (k, v) in views.iter().enumerate() {
            if v.ncols() != n {
                return Err(MvfcError::InvalidDataset(format!(
                    "view {} has {} samples, view 1 has {n}",
                    k + 1,
                    v.ncols()
                )));
            }
            if v.nrows() == 0 {
                return Err(MvfcError::InvalidDataset(format!(
                    "view {} has no features",
                    k + 1
                )));
            }
        }
        if let Some(l) = &labels {
            if l.len() != n {
                return Err(MvfcError::LabelLength {
                    expected: n,
                    found: l.len(),
                });
            }
        }
        let view_names = (1..=views.len()).map(|k| format!("view_{k}")).collect();
        Ok(Self {
            views,
            labels,
            view_names,
        })
    }

    pub fn with_view_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.views.len() {
            return Err(MvfcError::InvalidDataset(format!(
                "{} view names for {} views",
                names.len(),
                self.views.len()
            )));
        }
        self.view_names = names;
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.n_samples() {
            return Err(MvfcError::LabelLength {
                expected: self.n_samples(),
                found: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n_samples(&self) -> usize {
        self.views[0].ncols()
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    pub fn views(&self) -> &[Array2<f64>] {
        &self.views
    }

    pub fn view(&self, k: usize) -> &Array2<f64> {
        &self.views[k]
    }

    pub fn view_names(&self) -> &[String] {
        &self.view_names
    }

    /// Feature count m_k of every view.
    pub fn view_dims(&self) -> Vec<usize> {
        self.views.iter().map(|v| v.nrows()).collect()
    }

    pub fn min_view_dim(&self) -> usize {
        self.views.iter().map(|v| v.nrows()).min().unwrap_or(0)
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Labels, or [`MvfcError::MissingLabels`] when none were attached.
    pub fn require_labels(&self) -> Result<&[i64]> {
        self.labels().ok_or(MvfcError::MissingLabels)
    }

    /// Number of distinct ground-truth classes, if labels are present.
    pub fn n_classes(&self) -> Option<usize> {
        self.labels.as_ref().map(|l| {
            let mut v = l.clone();
            v.sort_unstable();
            v.dedup();
            v.len()
        })
    }

    /// All views stacked into one (Σ m_k) × n matrix.
    pub fn concatenated(&self) -> Array2<f64> {
        let parts: Vec<_> = self.views.iter().map(|v| v.view()).collect();
        concatenate(Axis(0), &parts).expect("views share the sample axis")
    }

    pub fn is_nonnegative(&self) -> bool {
        self.views.iter().all(|v| v.iter().all(|&x| x >= 0.0))
    }

    /// Maps every feature row to [0, 1] by `(x − min) / (max − min)`.
    /// Constant features map to 0.
    pub fn normalize_minmax(&self) -> Self {
        let views = self.views.iter().map(normalize_rows).collect();
        Self {
            views,
            labels: self.labels.clone(),
            view_names: self.view_names.clone(),
        }
    }
}

fn normalize_rows(view: &Array2<f64>) -> Array2<f64> {
    let mut out = view.clone();
    for mut row in out.rows_mut() {
        let min = row.iter().copied().fold(f64::INFINITY, f64::min);
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = max - min;
        if span > 0.0 {
            row.mapv_inplace(|x| (x - min) / span);
        } else {
            row.fill(0.0);
        }
    }
    out
}

/// CSV reading options.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvOptions {
    /// Skip the first row of each view file.
    pub has_header: bool,
}

/// Reads a samples-as-rows numeric CSV into a features × samples matrix.
pub fn read_view_csv(path: &Path, opts: CsvOptions) -> Result<Array2<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(opts.has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;

    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(rows + 1, |p| p.line() as usize);
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(MvfcError::RaggedRow {
                    path: path.to_path_buf(),
                    line,
                    expected: w,
                    found: record.len(),
                })
            }
            _ => {}
        }
        for (col, cell) in record.iter().enumerate() {
            let x: f64 = cell.parse().map_err(|_| MvfcError::NonNumeric {
                path: path.to_path_buf(),
                line,
                column: col + 1,
                value: cell.to_string(),
            })?;
            values.push(x);
        }
        rows += 1;
    }
    let width = width.unwrap_or(0);
    if rows == 0 || width == 0 {
        return Err(MvfcError::InvalidDataset(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let samples_by_features =
        Array2::from_shape_vec((rows, width), values).expect("row widths were checked");
    Ok(samples_by_features
        .reversed_axes()
        .as_standard_layout()
        .to_owned())
}

/// Reads one integer label per non-empty line.
pub fn read_labels(path: &Path) -> Result<Vec<i64>> {
    let text = fs::read_to_string(path).map_err(|e| MvfcError::io(path, e))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let cell = line.trim();
        if cell.is_empty() {
            continue;
        }
        let label = cell.parse().map_err(|_| MvfcError::NonNumeric {
            path: path.to_path_buf(),
            line: i + 1,
            column: 1,
            value: cell.to_string(),
        })?;
        labels.push(label);
    }
    Ok(labels)
}

fn csv_error(path: &Path, e: csv::Error) -> MvfcError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => MvfcError::io(path, io),
        other => MvfcError::Csv {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

/// Loads one CSV per view plus an optional label file.
pub fn load_multiview<P: AsRef<Path>>(
    paths: &[P],
    label_path: Option<&Path>,
    opts: CsvOptions,
) -> Result<MultiViewDataset> {
    if paths.is_empty() {
        return Err(MvfcError::InvalidDataset("no view files given".into()));
    }
    let mut views = Vec::with_capacity(paths.len());
    let mut names = Vec::with_capacity(paths.len());
    for p in paths {
        let p = p.as_ref();
        let view = read_view_csv(p, opts)?;
        if let Some(first) = views.first().map(|v: &Array2<f64>| v.ncols()) {
            if view.ncols() != first {
                return Err(MvfcError::SampleCountMismatch {
                    path: p.to_path_buf(),
                    expected: first,
                    found: view.ncols(),
                });
            }
        }
        names.push(
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("view_{}", views.len() + 1)),
        );
        views.push(view);
    }
    let labels = match label_path {
        Some(lp) => {
            let labels = read_labels(lp)?;
            if labels.len() != views[0].ncols() {
                return Err(MvfcError::SampleCountMismatch {
                    path: lp.to_path_buf(),
                    expected: views[0].ncols(),
                    found: labels.len(),
                });
            }
            Some(labels)
        }
        None => None,
    };
    MultiViewDataset::new(views, labels)?.with_view_names(names)
}

/// Writes each view as a samples-as-rows CSV (`view_1.csv`, …) and the
/// labels as `labels.csv`. Returns the written paths, views first.
pub fn write_multiview(ds: &MultiViewDataset, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| MvfcError::io(dir, e))?;
    let mut written = Vec::new();
    for (k, view) in ds.views().iter().enumerate() {
        let path = dir.join(format!("view_{}.csv", k + 1));
        let mut text = String::new();
        for sample in view.columns() {
            let cells: Vec<String> = sample.iter().map(|x| x.to_string()).collect();
            text.push_str(&cells.join(","));
            text.push('\n');
        }
        fs::write(&path, text).map_err(|e| MvfcError::io(&path, e))?;
        written.push(path);
    }
    if let Some(labels) = ds.labels() {
        let path = dir.join("labels.csv");
        let text: String = labels.iter().map(|l| format!("{l}\n")).collect();
        fs::write(&path, text).map_err(|e| MvfcError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

/// Parameters of the synthetic generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub c_true: usize,
    pub r_true: usize,
    pub view_dims: Vec<usize>,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.c_true < 2 || self.n < self.c_true {
            return Err(MvfcError::InvalidParameter(format!(
                "need n >= c_true >= 2, got n={} c_true={}",
                self.n, self.c_true
            )));
        }
        if self.r_true == 0 {
            return Err(MvfcError::InvalidParameter("r_true must be >= 1".into()));
        }
        if self.view_dims.is_empty() || self.view_dims.contains(&0) {
            return Err(MvfcError::InvalidParameter(
                "view_dims must be non-empty with every width >= 1".into(),
            ));
        }
        if !(self.noise_sigma >= 0.0) || !self.noise_sigma.is_finite() {
            return Err(MvfcError::InvalidParameter(format!(
                "noise_sigma must be finite and >= 0, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Generating factors behind a synthetic dataset.
#[derive(Clone, Debug)]
pub struct SyntheticTruth {
    /// H_true, r_true × n.
    pub hidden: Array2<f64>,
    /// P^k_true, m_k × r_true.
    pub bases: Vec<Array2<f64>>,
    /// X^k after noise and clamping, before normalization.
    pub raw_views: Vec<Array2<f64>>,
}

/// Cluster id of sample `i` when `n` samples are split into `c` contiguous,
/// balanced blocks.
pub fn block_label(i: usize, n: usize, c: usize) -> usize {
    let base = n / c;
    let extra = n % c;
    let big = extra * (base + 1);
    if i < big {
        i / (base + 1)
    } else {
        extra + (i - big) / base
    }
}

/// Draws a cluster-structured dataset `X^k = P^k H + noise`, clamped at 0
/// and min-max normalized.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<MultiViewDataset> {
    generate_synthetic_with_truth(spec).map(|(ds, _)| ds)
}

pub fn generate_synthetic_with_truth(
    spec: &SyntheticSpec,
) -> Result<(MultiViewDataset, SyntheticTruth)> {
    spec.validate()?;
    let mut rng = crate::seeded_rng(spec.seed);
    let (n, c, r) = (spec.n, spec.c_true, spec.r_true);

    // Cluster j is hot on coordinate j mod r; clusters sharing a coordinate
    // differ in its level.
    let prototypes = Array2::from_shape_fn((c, r), |_| 0.1 * rng.random::<f64>());
    let mut prototypes = prototypes;
    for j in 0..c {
        prototypes[[j, j % r]] += 1.0 + (j / r) as f64;
    }

    let labels: Vec<usize> = (0..n).map(|i| block_label(i, n, c)).collect();
    let mut hidden = Array2::zeros((r, n));
    for (i, &l) in labels.iter().enumerate() {
        for q in 0..r {
            hidden[[q, i]] = prototypes[[l, q]] + 0.1 * rng.random::<f64>();
        }
    }

    let bases: Vec<Array2<f64>> = spec
        .view_dims
        .iter()
        .map(|&m| Array2::from_shape_fn((m, r), |_| rng.random::<f64>()))
        .collect();

    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).expect("sigma validated"))
    } else {
        None
    };
    let raw_views: Vec<Array2<f64>> = bases
        .iter()
        .map(|p| {
            let mut x = p.dot(&hidden);
            if let Some(dist) = &noise {
                x.mapv_inplace(|v| (v + dist.sample(&mut rng)).max(0.0));
            }
            x
        })
        .collect();

    let labels_i64 = labels.iter().map(|&l| l as i64).collect();
    let ds = MultiViewDataset::new(raw_views.clone(), Some(labels_i64))?.normalize_minmax();
    Ok((
        ds,
        SyntheticTruth {
            hidden,
            bases,
            raw_views,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        let mut f = fs::File::create(&p).unwrap();
        f.write_all(text.as_bytes()).unwrap();
        p
    }

    #[test]
    fn loads_two_views_with_shapes() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "1,2\n3,4\n5,6\n7,8\n");
        let b = write(dir.path(), "b.csv", "1,2,3\n4,5,6\n7,8,9\n1,1,1\n");
        let ds = load_multiview(&[a, b], None, CsvOptions::default()).unwrap();
        assert_eq!(ds.n_samples(), 4);
        assert_eq!(ds.n_views(), 2);
        assert_eq!(ds.view_dims(), vec![2, 3]);
        // transposed: feature 0 of view a holds the first column
        assert_eq!(ds.view(0).row(0).to_vec(), vec![1.0, 3.0, 5.0, 7.0]);
        assert_eq!(ds.view_names(), &["a".to_string(), "b".to_string()]);
    }

    #[test]
    fn header_row_is_skipped_when_flagged() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "f1,f2\n1,2\n3,4\n");
        let ds = load_multiview(&[&a], None, CsvOptions { has_header: true }).unwrap();
        assert_eq!(ds.n_samples(), 2);
        let err = load_multiview(&[&a], None, CsvOptions::default()).unwrap_err();
        assert!(
            matches!(
                err,
                MvfcError::NonNumeric {
                    line: 1,
                    column: 1,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn mismatched_row_counts_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "1\n2\n3\n4\n");
        let b = write(dir.path(), "b.csv", "1\n2\n3\n4\n5\n");
        let err = load_multiview(&[a, b.clone()], None, CsvOptions::default()).unwrap_err();
        match err {
            MvfcError::SampleCountMismatch {
                path,
                expected,
                found,
            } => {
                assert_eq!(path, b);
                assert_eq!((expected, found), (4, 5));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "1,2\n3,x\n");
        let err = load_multiview(&[a], None, CsvOptions::default()).unwrap_err();
        match err {
            MvfcError::NonNumeric {
                line,
                column,
                value,
                ..
            } => {
                assert_eq!((line, column, value.as_str()), (2, 2, "x"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "1,2\n3\n");
        let err = load_multiview(&[a], None, CsvOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            MvfcError::RaggedRow {
                line: 2,
                expected: 2,
                found: 1,
                ..
            }
        ));
    }

    #[test]
    fn label_length_must_match() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "1\n2\n3\n");
        let l = write(dir.path(), "l.csv", "0\n1\n");
        let err = load_multiview(&[&a], Some(&l), CsvOptions::default()).unwrap_err();
        assert!(matches!(
            err,
            MvfcError::SampleCountMismatch {
                expected: 3,
                found: 2,
                ..
            }
        ));
        let l = write(dir.path(), "l2.csv", "0\n1\n1\n");
        let ds = load_multiview(&[&a], Some(&l), CsvOptions::default()).unwrap();
        assert_eq!(ds.labels(), Some(&[0, 1, 1][..]));
    }

    #[test]
    fn dot_decimal_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let a = write(dir.path(), "a.csv", "1.5,2e-1\n-3.25, 4\n");
        let ds = load_multiview(&[a], None, CsvOptions::default()).unwrap();
        assert_eq!(ds.view(0), &array![[1.5, -3.25], [0.2, 4.0]]);
    }

    #[test]
    fn webkb_shaped_input() {
        let n = 226;
        let views = vec![
            Array2::<f64>::zeros((2500, n)),
            Array2::zeros((215, n)),
            Array2::zeros((389, n)),
        ];
        let ds = MultiViewDataset::new(views, Some(vec![0; n])).unwrap();
        assert_eq!(ds.n_views(), 3);
        assert_eq!(ds.view_dims().iter().sum::<usize>(), 3104);
        assert_eq!(ds.concatenated().dim(), (3104, n));
    }

    #[test]
    fn minmax_examples() {
        let ds = MultiViewDataset::new(
            vec![array![[-1.0, 0.0, 1.0], [5.0, 5.0, 5.0], [0.0, 1.0, 1.0]]],
            None,
        )
        .unwrap()
        .normalize_minmax();
        assert_eq!(
            ds.view(0),
            &array![[0.0, 0.5, 1.0], [0.0, 0.0, 0.0], [0.0, 1.0, 1.0]]
        );
    }

    #[test]
    fn zero_noise_synthetic_is_exact_product() {
        let spec = SyntheticSpec {
            n: 30,
            c_true: 3,
            r_true: 3,
            view_dims: vec![5, 7],
            noise_sigma: 0.0,
            seed: 7,
        };
        let (ds, truth) = generate_synthetic_with_truth(&spec).unwrap();
        for (raw, p) in truth.raw_views.iter().zip(&truth.bases) {
            assert_eq!(raw, &p.dot(&truth.hidden));
        }
        assert_eq!(ds.view_dims(), vec![5, 7]);
        assert!(ds.is_nonnegative());
    }

    #[test]
    fn synthetic_labels_are_balanced() {
        let spec = SyntheticSpec {
            n: 60,
            c_true: 3,
            r_true: 3,
            view_dims: vec![4, 6],
            noise_sigma: 0.01,
            seed: 1,
        };
        let ds = generate_synthetic(&spec).unwrap();
        let labels = ds.labels().unwrap();
        for c in 0..3 {
            assert_eq!(labels.iter().filter(|&&l| l == c).count(), 20);
        }
    }

    #[test]
    fn block_labels_cover_remainders() {
        let labels: Vec<_> = (0..7).map(|i| block_label(i, 7, 3)).collect();
        assert_eq!(labels, vec![0, 0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn synthetic_spec_validation() {
        let mut spec = SyntheticSpec {
            n: 10,
            c_true: 2,
            r_true: 2,
            view_dims: vec![3],
            noise_sigma: 0.0,
            seed: 0,
        };
        assert!(spec.validate().is_ok());
        spec.c_true = 11;
        assert!(spec.validate().is_err());
        spec.c_true = 2;
        spec.noise_sigma = -1.0;
        assert!(spec.validate().is_err());
    }

    fn small_view() -> impl Strategy<Value = Array2<f64>> {
        (1usize..4, 2usize..7).prop_flat_map(|(m, n)| {
            proptest::collection::vec(-50.0f64..50.0, m * n)
                .prop_map(move |v| Array2::from_shape_vec((m, n), v).unwrap())
        })
    }

    proptest! {
        #[test]
        fn normalized_views_lie_in_unit_box_and_are_idempotent(x in small_view()) {
            let ds = MultiViewDataset::new(vec![x], None).unwrap().normalize_minmax();
            prop_assert!(ds.view(0).iter().all(|&v| (0.0..=1.0).contains(&v)));
            prop_assert_eq!(ds.normalize_minmax(), ds);
        }

        #[test]
        fn synthetic_is_seed_deterministic(seed in 0u64..1000) {
            let spec = SyntheticSpec { n: 12, c_true: 3, r_true: 2, view_dims: vec![3, 4], noise_sigma: 0.05, seed };
            let a = generate_synthetic(&spec).unwrap();
            let b = generate_synthetic(&spec).unwrap();
            prop_assert_eq!(&a, &b);
            let other = generate_synthetic(&SyntheticSpec { seed: seed + 1, ..spec }).unwrap();
            prop_assert_ne!(a, other);
        }
    }
}
