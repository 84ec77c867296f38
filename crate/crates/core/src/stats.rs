//! Friedman rank test over a datasets × algorithms score table, followed by
//! the Holm step-down comparison of every algorithm against the best-ranked
//! one.
//!
//! Statistic: `χ²_F = 12N / (k(k+1)) · [Σ_j R_j² − k(k+1)²/4]` on `k − 1`
//! degrees of freedom, where `R_j` is the average rank of algorithm `j` over
//! the `N` datasets (rank 1 is best, ties share the average rank).
//! Post-hoc: `z_j = (R_j − R_0) / SE` with `SE = sqrt(k(k+1) / (6N))`,
//! two-sided normal p-values, and the i-th smallest p compared with `α / i`
//! in descending-z order until the first non-rejection.

use std::fmt::Write as _;
use std::path::Path;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{MvfcError, Result};
use crate::special::{chi_square_sf, normal_two_sided_p};

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    scores: Array2<f64>,
    algorithms: Vec<String>,
    datasets: Vec<String>,
    higher_is_better: bool,
}

impl ScoreTable {
    /// `scores` is datasets × algorithms.
    pub fn new(
        scores: Array2<f64>,
        algorithms: Vec<String>,
        datasets: Vec<String>,
        higher_is_better: bool,
    ) -> Result<Self> {
        let (n, k) = scores.dim();
        if n < 2 || k < 2 {
            return Err(MvfcError::InvalidScoreTable(format!(
                "need at least 2 datasets and 2 algorithms, got {n}×{k}"
            )));
        }
        if algorithms.len() != k || datasets.len() != n {
            return Err(MvfcError::InvalidScoreTable(format!(
                "{} algorithm names and {} dataset names for a {n}×{k} table",
                algorithms.len(),
                datasets.len()
            )));
        }
        for (i, a) in algorithms.iter().enumerate() {
            if algorithms[..i].contains(a) {
                return Err(MvfcError::InvalidScoreTable(format!(
                    "duplicated algorithm name {a:?}"
                )));
            }
        }
        for (i, d) in datasets.iter().enumerate() {
            if datasets[..i].contains(d) {
                return Err(MvfcError::InvalidScoreTable(format!(
                    "duplicated dataset name {d:?}"
                )));
            }
        }
        if scores.iter().any(|x| !x.is_finite()) {
            return Err(MvfcError::InvalidScoreTable("scores must be finite".into()));
        }
        Ok(Self {
            scores,
            algorithms,
            datasets,
            higher_is_better,
        })
    }

    /// Parses `name,alg_1,…,alg_k` header plus one `dataset,score…` row per
    /// dataset.
    pub fn from_csv_str(text: &str, higher_is_better: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let header = rdr
            .headers()
            .map_err(|e| MvfcError::InvalidScoreTable(e.to_string()))?
            .clone();
        if header.len() < 3 {
            return Err(MvfcError::InvalidScoreTable(
                "header needs a dataset column and at least two algorithms".into(),
            ));
        }
        let algorithms: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut datasets = Vec::new();
        let mut values = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| MvfcError::InvalidScoreTable(e.to_string()))?;
            if rec.len() != header.len() {
                return Err(MvfcError::InvalidScoreTable(format!(
                    "row {} has {} cells, header has {}",
                    row + 2,
                    rec.len(),
                    header.len()
                )));
            }
            datasets.push(rec[0].to_string());
            for (col, cell) in rec.iter().enumerate().skip(1) {
                let v: f64 = cell.parse().map_err(|_| {
                    MvfcError::InvalidScoreTable(format!(
                        "row {}, column {}: {cell:?} is not a number",
                        row + 2,
                        col + 1
                    ))
                })?;
                values.push(v);
            }
        }
        let n = datasets.len();
        let scores = Array2::from_shape_vec((n, algorithms.len()), values)
            .map_err(|e| MvfcError::InvalidScoreTable(e.to_string()))?;
        Self::new(scores, algorithms, datasets, higher_is_better)
    }

    pub fn read_csv(path: &Path, higher_is_better: bool) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| MvfcError::io(path, e))?;
        Self::from_csv_str(&text, higher_is_better)
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("dataset");
        for a in &self.algorithms {
            out.push(',');
            out.push_str(a);
        }
        out.push('\n');
        for (d, row) in self.datasets.iter().zip(self.scores.rows()) {
            out.push_str(d);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn scores(&self) -> &Array2<f64> {
        &self.scores
    }

    pub fn algorithms(&self) -> &[String] {
        &self.algorithms
    }

    pub fn datasets(&self) -> &[String] {
        &self.datasets
    }

    pub fn higher_is_better(&self) -> bool {
        self.higher_is_better
    }

    pub fn n_datasets(&self) -> usize {
        self.scores.nrows()
    }

    pub fn n_algorithms(&self) -> usize {
        self.scores.ncols()
    }

    /// Per-dataset ranks (1 = best), ties averaged.
    pub fn ranks(&self) -> Array2<f64> {
        let mut ranks = Array2::zeros(self.scores.raw_dim());
        for (d, row) in self.scores.rows().into_iter().enumerate() {
            let mut order: Vec<usize> = (0..row.len()).collect();
            order.sort_by(|&a, &b| {
                let o = row[a].total_cmp(&row[b]);
                if self.higher_is_better {
                    o.reverse()
                } else {
                    o
                }
            });
            let mut start = 0;
            while start < order.len() {
                let mut end = start;
                while end + 1 < order.len() && row[order[end + 1]] == row[order[start]] {
                    end += 1;
                }
                let shared = (start + end) as f64 / 2.0 + 1.0;
                for &j in &order[start..=end] {
                    ranks[[d, j]] = shared;
                }
                start = end + 1;
            }
        }
        ranks
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FriedmanResult {
    pub algorithms: Vec<String>,
    pub avg_ranks: Vec<f64>,
    pub chi_square: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub reject_at_alpha: bool,
    pub n_datasets: usize,
}

impl FriedmanResult {
    /// Index of the best (lowest) average rank; ties go to the first.
    pub fn best(&self) -> usize {
        let mut best = 0;
        for (j, &r) in self.avg_ranks.iter().enumerate() {
            if r < self.avg_ranks[best] {
                best = j;
            }
        }
        best
    }
}

pub fn friedman(table: &ScoreTable, alpha: f64) -> Result<FriedmanResult> {
    let (n, k) = table.scores.dim();
    if n < 2 || k < 2 {
        return Err(MvfcError::InvalidScoreTable(format!(
            "{n}×{k} table is too small"
        )));
    }
    let ranks = table.ranks();
    let avg_ranks: Vec<f64> = ranks
        .columns()
        .into_iter()
        .map(|c| c.sum() / n as f64)
        .collect();
    let (nf, kf) = (n as f64, k as f64);
    let sum_sq: f64 = avg_ranks.iter().map(|r| r * r).sum();
    let chi_square =
        (12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0).powi(2) / 4.0)).max(0.0);
    let p_value = chi_square_sf(chi_square, kf - 1.0);
    Ok(FriedmanResult {
        algorithms: table.algorithms.clone(),
        avg_ranks,
        chi_square,
        p_value,
        alpha,
        reject_at_alpha: p_value < alpha,
        n_datasets: n,
    })
}

/// `sqrt(k(k+1) / (6N))`.
pub fn rank_standard_error(k: usize, n: usize) -> f64 {
    ((k * (k + 1)) as f64 / (6.0 * n as f64)).sqrt()
}

/// z statistic and two-sided p-value of algorithm rank `r_i` against the
/// control rank `r_0`.
pub fn compare_ranks(r_0: f64, r_i: f64, k: usize, n: usize) -> (f64, f64) {
    let z = (r_i - r_0) / rank_standard_error(k, n);
    (z, normal_two_sided_p(z))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolmRow {
    /// Holm index; the threshold is `α / i`.
    pub i: usize,
    pub algorithm: String,
    pub z: f64,
    pub p_value: f64,
    pub threshold: f64,
    pub reject: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolmResult {
    pub control: String,
    pub standard_error: f64,
    pub alpha: f64,
    /// Ordered by descending z.
    pub rows: Vec<HolmRow>,
}

pub fn holm_posthoc(fr: &FriedmanResult, n_datasets: usize, alpha: f64) -> HolmResult {
    let k = fr.avg_ranks.len();
    let best = fr.best();
    let r0 = fr.avg_ranks[best];
    let mut cmp: Vec<(usize, f64, f64)> = (0..k)
        .filter(|&j| j != best)
        .map(|j| {
            let (z, p) = compare_ranks(r0, fr.avg_ranks[j], k, n_datasets);
            (j, z, p)
        })
        .collect();
    cmp.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));

    let mut still_rejecting = true;
    let rows = cmp
        .into_iter()
        .enumerate()
        .map(|(pos, (j, z, p))| {
            let i = k - 1 - pos;
            let threshold = alpha / i as f64;
            still_rejecting = still_rejecting && p < threshold;
            HolmRow {
                i,
                algorithm: fr.algorithms[j].clone(),
                z,
                p_value: p,
                threshold,
                reject: still_rejecting,
            }
        })
        .collect();
    HolmResult {
        control: fr.algorithms[best].clone(),
        standard_error: rank_standard_error(k, n_datasets),
        alpha,
        rows,
    }
}

fn hypothesis(reject: bool) -> &'static str {
    if reject {
        "Reject"
    } else {
        "Not Reject"
    }
}

/// `Algorithm  Ranking  p-value  Hypothesis`, with the test outcome on the
/// first row.
pub fn render_friedman(fr: &FriedmanResult) -> String {
    let width = fr
        .algorithms
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(9)
        .max(9);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>8}  {:>10}  Hypothesis",
        "Algorithm", "Ranking", "p-value"
    );
    for (j, (a, r)) in fr.algorithms.iter().zip(&fr.avg_ranks).enumerate() {
        if j == 0 {
            let _ = writeln!(
                out,
                "{a:<width$}  {r:>8.4}  {:>10.6}  {}",
                fr.p_value,
                hypothesis(fr.reject_at_alpha)
            );
        } else {
            let _ = writeln!(out, "{a:<width$}  {r:>8.4}");
        }
    }
    let _ = writeln!(
        out,
        "chi-square = {:.6}, df = {}",
        fr.chi_square,
        fr.algorithms.len() - 1
    );
    out
}

/// `i  Algorithms  z  p-value  Holm  Hypothesis`.
pub fn render_holm(h: &HolmResult) -> String {
    let width = h
        .rows
        .iter()
        .map(|r| r.algorithm.len())
        .max()
        .unwrap_or(10)
        .max(10);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3}  {:<width$}  {:>10}  {:>10}  {:>9}  Hypothesis",
        "i", "Algorithms", "z", "p-value", "Holm"
    );
    for r in &h.rows {
        let _ = writeln!(
            out,
            "{:>3}  {:<width$}  {:>10.6}  {:>10.6}  {:>9.6}  {}",
            r.i,
            r.algorithm,
            r.z,
            r.p_value,
            r.threshold,
            hypothesis(r.reject)
        );
    }
    let _ = writeln!(out, "control = {}, SE = {:.6}", h.control, h.standard_error);
    out
}

pub fn friedman_csv(fr: &FriedmanResult) -> String {
    let mut out = String::from("algorithm,ranking,chi_square,p_value,hypothesis\n");
    for (a, r) in fr.algorithms.iter().zip(&fr.avg_ranks) {
        let _ = writeln!(
            out,
            "{a},{r},{},{},{}",
            fr.chi_square,
            fr.p_value,
            hypothesis(fr.reject_at_alpha)
        );
    }
    out
}

pub fn holm_csv(h: &HolmResult) -> String {
    let mut out = String::from("i,algorithm,z,p_value,holm_threshold,hypothesis\n");
    for r in &h.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.i,
            r.algorithm,
            r.z,
            r.p_value,
            r.threshold,
            hypothesis(r.reject)
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;
    use proptest::prelude::*;

    fn names(prefix: &str, k: usize) -> Vec<String> {
        (0..k).map(|i| format!("{prefix}{i}")).collect()
    }

    #[test]
    fn ties_are_averaged() {
        let t = ScoreTable::new(
            array![[0.9, 0.5, 0.9, 0.1], [1.0, 2.0, 3.0, 4.0]],
            names("a", 4),
            names("d", 2),
            true,
        )
        .unwrap();
        let r = t.ranks();
        assert_eq!(r.row(0).to_vec(), vec![1.5, 3.0, 1.5, 4.0]);
        assert_eq!(r.row(1).to_vec(), vec![4.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn lower_is_better_flips_ranks() {
        let t = ScoreTable::new(
            array![[1.0, 2.0], [3.0, 4.0]],
            names("a", 2),
            names("d", 2),
            false,
        )
        .unwrap();
        assert_eq!(t.ranks().row(0).to_vec(), vec![1.0, 2.0]);
    }

    #[test]
    fn full_ties_give_null_statistic() {
        let t = ScoreTable::new(
            Array2::from_elem((4, 5), 0.7),
            names("a", 5),
            names("d", 4),
            true,
        )
        .unwrap();
        let fr = friedman(&t, 0.05).unwrap();
        assert!(fr.avg_ranks.iter().all(|&r| r == 3.0));
        assert_eq!(fr.chi_square, 0.0);
        assert_eq!(fr.p_value, 1.0);
        assert!(!fr.reject_at_alpha);
    }

    #[test]
    fn self_comparison_is_null() {
        let (z, p) = compare_ranks(2.5, 2.5, 11, 6);
        assert_eq!(z, 0.0);
        assert_eq!(p, 1.0);
        assert_abs_diff_eq!(rank_standard_error(11, 6), 1.914854, epsilon = 1e-6);
    }

    #[test]
    fn validation() {
        assert!(ScoreTable::new(array![[1.0, 2.0]], names("a", 2), names("d", 1), true).is_err());
        let dup = vec!["x".to_string(), "x".to_string()];
        assert!(matches!(
            ScoreTable::new(array![[1.0, 2.0], [1.0, 2.0]], dup, names("d", 2), true),
            Err(MvfcError::InvalidScoreTable(_))
        ));
        assert!(ScoreTable::from_csv_str("dataset,a,b\nd1,1,zz\nd2,1,2\n", true).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = ScoreTable::from_csv_str("dataset,a,b,c\nd1,0.5,0.25,1\nd2,1,2,3\n", true).unwrap();
        assert_eq!(t.algorithms(), &["a", "b", "c"]);
        assert_eq!(t.datasets(), &["d1", "d2"]);
        let again = ScoreTable::from_csv_str(&t.to_csv_string(), true).unwrap();
        assert_eq!(again, t);
    }

    proptest! {
        #[test]
        fn rank_rows_sum_and_monotone_invariance(
            vals in proptest::collection::vec(0u8..6, 12),
        ) {
            let scores = Array2::from_shape_fn((3, 4), |(i, j)| vals[i * 4 + j] as f64 / 5.0);
            let t = ScoreTable::new(scores.clone(), names("a", 4), names("d", 3), true).unwrap();
            for row in t.ranks().rows() {
                prop_assert_eq!(row.sum(), 10.0);
            }
            let warped = ScoreTable::new(scores.mapv(|x| (3.0 * x).exp() - 7.0), names("a", 4), names("d", 3), true).unwrap();
            let a = friedman(&t, 0.05).unwrap();
            let b = friedman(&warped, 0.05).unwrap();
            prop_assert_eq!(a.avg_ranks, b.avg_ranks);
            prop_assert_eq!(a.p_value, b.p_value);
        }

        #[test]
        fn holm_rejections_are_downward_closed(
            vals in proptest::collection::vec(0.0f64..1.0, 30),
            alpha in 0.01f64..0.2,
        ) {
            let scores = Array2::from_shape_vec((5, 6), vals).unwrap();
            let t = ScoreTable::new(scores, names("a", 6), names("d", 5), true).unwrap();
            let fr = friedman(&t, alpha).unwrap();
            let h = holm_posthoc(&fr, 5, alpha);
            prop_assert_eq!(h.rows.len(), 5);
            for w in h.rows.windows(2) {
                prop_assert!(w[0].z >= w[1].z);
                prop_assert!(w[0].i == w[1].i + 1);
                if w[1].reject { prop_assert!(w[0].reject); }
            }
        }
    }
}
