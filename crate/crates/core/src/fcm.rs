//! Fuzzy c-means: the single-view baseline and the membership/center kernels
//! reused on the hidden space by [`crate::hss`] and per view by
//! [`crate::cofkm`].
//!
//! Membership update. Minimizing `Σ_l u_l^m d_l` over the simplex (with
//! `d_l` squared distances) gives `u_l ∝ d_l^{-1/(m−1)}`, i.e.
//! `u_l = 1 / Σ_{l'} (d_l / d_{l'})^{1/(m−1)}`. The exponent applies to
//! squared distances. A sample whose squared distance to one or more centers
//! is below [`EPS_DIST`] gets crisp membership split uniformly over those
//! centers.

use ndarray::{Array2, ArrayView2, Axis};
use rand::Rng;

use crate::error::{MvfcError, Result};
use crate::trace::{Reseed, Trace};
use crate::EPS_DIST;

/// Column-stochastic c×n membership matrix together with its fuzzifier.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyPartition {
    u: Array2<f64>,
    fuzzifier: f64,
}

impl FuzzyPartition {
    /// Validates entries in [0, 1] and unit column sums (within 1e-9).
    pub fn new(u: Array2<f64>, fuzzifier: f64) -> Result<Self> {
        if !(fuzzifier > 1.0) {
            return Err(MvfcError::InvalidParameter(format!(
                "fuzzifier must be > 1, got {fuzzifier}"
            )));
        }
        let part = Self { u, fuzzifier };
        if !part.is_simplex_valid(1e-9) {
            return Err(MvfcError::InvalidParameter(
                "membership columns must lie on the simplex".into(),
            ));
        }
        Ok(part)
    }

    pub(crate) fn from_parts(u: Array2<f64>, fuzzifier: f64) -> Self {
        Self { u, fuzzifier }
    }

    /// Uniform draws on [0, 1) per entry, each column normalized to sum 1.
    pub fn random<R: Rng + ?Sized>(c: usize, n: usize, fuzzifier: f64, rng: &mut R) -> Self {
        let mut u = Array2::from_shape_fn((c, n), |_| rng.random::<f64>());
        for mut col in u.columns_mut() {
            let s: f64 = col.sum();
            if s > 0.0 {
                col.mapv_inplace(|x| x / s);
            } else {
                col.fill(1.0 / c as f64);
            }
        }
        Self { u, fuzzifier }
    }

    pub fn memberships(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn into_memberships(self) -> Array2<f64> {
        self.u
    }

    pub fn fuzzifier(&self) -> f64 {
        self.fuzzifier
    }

    pub fn n_clusters(&self) -> usize {
        self.u.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.u.ncols()
    }

    /// `u_li^m`.
    pub fn powered(&self) -> Array2<f64> {
        let m = self.fuzzifier;
        self.u.mapv(|x| x.powf(m))
    }

    pub fn is_simplex_valid(&self, tol: f64) -> bool {
        is_column_stochastic(&self.u, tol)
    }
}

pub(crate) fn is_column_stochastic(u: &Array2<f64>, tol: f64) -> bool {
    u.iter().all(|&x| (0.0..=1.0).contains(&x))
        && u.columns()
            .into_iter()
            .all(|c| (c.sum() - 1.0).abs() <= tol)
}

/// Cluster centers, one per row (c×d).
#[derive(Clone, Debug, PartialEq)]
pub struct Centers {
    v: Array2<f64>,
}

impl Centers {
    pub fn new(v: Array2<f64>) -> Result<Self> {
        if v.nrows() == 0 {
            return Err(MvfcError::InvalidParameter(
                "need at least one center".into(),
            ));
        }
        Ok(Self { v })
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.v
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.v
    }

    pub fn n_clusters(&self) -> usize {
        self.v.nrows()
    }

    pub fn dim(&self) -> usize {
        self.v.ncols()
    }
}

/// Squared Euclidean distances `‖x_i − v_l‖²` as a c×n matrix.
pub fn squared_distances(data: ArrayView2<f64>, centers: &Array2<f64>) -> Array2<f64> {
    let (c, n) = (centers.nrows(), data.ncols());
    let mut d = Array2::zeros((c, n));
    for (l, v) in centers.rows().into_iter().enumerate() {
        for (i, x) in data.columns().into_iter().enumerate() {
            d[[l, i]] = x
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
    }
    d
}

/// Simplex-valid memberships from a c×n matrix of (generalized) squared
/// distances.
pub fn memberships_from_sq_dists(dists: &Array2<f64>, fuzzifier: f64) -> Array2<f64> {
    assert!(fuzzifier > 1.0, "fuzzifier must exceed 1");
    let p = 1.0 / (fuzzifier - 1.0);
    let c = dists.nrows();
    let mut u = Array2::zeros(dists.raw_dim());
    for (i, col) in dists.columns().into_iter().enumerate() {
        let coincident = col.iter().filter(|&&d| d < EPS_DIST).count();
        if coincident > 0 {
            let share = 1.0 / coincident as f64;
            for l in 0..c {
                if col[l] < EPS_DIST {
                    u[[l, i]] = share;
                }
            }
            continue;
        }
        let dmin = col.iter().copied().fold(f64::INFINITY, f64::min);
        let mut total = 0.0;
        for l in 0..c {
            let t = (dmin / col[l]).powf(p);
            u[[l, i]] = t;
            total += t;
        }
        for l in 0..c {
            u[[l, i]] /= total;
        }
    }
    u
}

/// `v_l = Σ_i w_li x_i / Σ_i w_li` for a c×n weight matrix.
///
/// Fails with [`MvfcError::DegenerateCluster`] on the first cluster whose
/// weights sum to zero.
pub fn weighted_centers(data: ArrayView2<f64>, weights: &Array2<f64>) -> Result<Array2<f64>> {
    let (c, d) = (weights.nrows(), data.nrows());
    let mut v = Array2::zeros((c, d));
    for l in 0..c {
        let w = weights.row(l);
        let total: f64 = w.sum();
        if !(total > 0.0) {
            return Err(MvfcError::DegenerateCluster { cluster: l });
        }
        let mut row = v.row_mut(l);
        for (i, x) in data.columns().into_iter().enumerate() {
            let wi = w[i];
            if wi != 0.0 {
                row.scaled_add(wi, &x);
            }
        }
        row.mapv_inplace(|s| s / total);
    }
    Ok(v)
}

/// Center update: `v_l = Σ_i u_li^m x_i / Σ_i u_li^m`.
pub fn update_centers(data: ArrayView2<f64>, part: &FuzzyPartition) -> Result<Centers> {
    weighted_centers(data, &part.powered()).map(|v| Centers { v })
}

/// Membership update for fixed centers.
pub fn update_membership(
    data: ArrayView2<f64>,
    centers: &Centers,
    fuzzifier: f64,
) -> FuzzyPartition {
    let d = squared_distances(data, &centers.v);
    FuzzyPartition::from_parts(memberships_from_sq_dists(&d, fuzzifier), fuzzifier)
}

/// `Σ_l Σ_i u_li^m ‖x_i − v_l‖²`.
pub fn fcm_objective(data: ArrayView2<f64>, part: &FuzzyPartition, centers: &Centers) -> f64 {
    let d = squared_distances(data, &centers.v);
    (&part.powered() * &d).sum()
}

/// Hard labels by per-sample argmax; ties go to the lowest cluster index.
pub fn defuzzify(part: &FuzzyPartition) -> Vec<usize> {
    argmax_columns(&part.u)
}

pub(crate) fn argmax_columns(u: &Array2<f64>) -> Vec<usize> {
    u.columns()
        .into_iter()
        .map(|col| {
            let mut best = 0;
            for (l, &x) in col.iter().enumerate() {
                if x > col[best] {
                    best = l;
                }
            }
            best
        })
        .collect()
}

/// Default fuzzifier `m = q / (q − 2)` with `q = min(n, d − 1)`, falling back
/// to 2 when `d ≤ 3` or `n ≤ 3`.
pub fn default_fuzzifier(n: usize, d: usize) -> f64 {
    if d <= 3 || n <= 3 {
        return 2.0;
    }
    let q = n.min(d - 1) as f64;
    q / (q - 2.0)
}

/// Centers from weights, re-seeding degenerate clusters.
///
/// A cluster with zero total weight takes the sample with the largest
/// `badness` not already used by another re-seeded cluster.
pub(crate) fn centers_with_rescue(
    data: ArrayView2<f64>,
    weights: &Array2<f64>,
    badness: impl FnOnce(&Array2<f64>, &[usize]) -> Vec<f64>,
) -> (Array2<f64>, Vec<usize>) {
    match weighted_centers(data, weights) {
        Ok(v) => (v, Vec::new()),
        Err(_) => {
            let totals = weights.sum_axis(Axis(1));
            let degenerate: Vec<usize> = (0..weights.nrows())
                .filter(|&l| !(totals[l] > 0.0))
                .collect();
            let mut v = Array2::zeros((weights.nrows(), data.nrows()));
            for l in 0..weights.nrows() {
                if degenerate.contains(&l) {
                    continue;
                }
                let mut row = v.row_mut(l);
                for (i, x) in data.columns().into_iter().enumerate() {
                    row.scaled_add(weights[[l, i]], &x);
                }
                row.mapv_inplace(|s| s / totals[l]);
            }
            let scores = badness(&v, &degenerate);
            let mut order: Vec<usize> = (0..data.ncols()).collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            for (&l, &i) in degenerate.iter().zip(order.iter()) {
                v.row_mut(l).assign(&data.column(i));
            }
            (v, degenerate)
        }
    }
}

/// Squared distance from each sample to its nearest non-degenerate center.
pub(crate) fn distance_to_valid_centers(
    data: ArrayView2<f64>,
    centers: &Array2<f64>,
    degenerate: &[usize],
) -> Vec<f64> {
    let d = squared_distances(data, centers);
    (0..data.ncols())
        .map(|i| {
            (0..centers.nrows())
                .filter(|l| !degenerate.contains(l))
                .map(|l| d[[l, i]])
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FcmConfig {
    pub clusters: usize,
    pub fuzzifier: f64,
    pub seed: u64,
    pub tol: f64,
    pub t_max: usize,
}

impl FcmConfig {
    pub fn new(clusters: usize, fuzzifier: f64, seed: u64) -> Self {
        Self {
            clusters,
            fuzzifier,
            seed,
            tol: 1e-6,
            t_max: 1000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct FcmFit {
    pub partition: FuzzyPartition,
    pub centers: Centers,
    pub trace: Trace,
}

pub(crate) fn validate_run_params(
    clusters: usize,
    n: usize,
    fuzzifier: f64,
    tol: f64,
    t_max: usize,
) -> Result<()> {
    if clusters == 0 || clusters > n {
        return Err(MvfcError::InvalidParameter(format!(
            "cluster count {clusters} must be in [1, n={n}]"
        )));
    }
    if !(fuzzifier > 1.0) || !fuzzifier.is_finite() {
        return Err(MvfcError::InvalidParameter(format!(
            "fuzzifier must be finite and > 1, got {fuzzifier}"
        )));
    }
    if !(tol >= 0.0) {
        return Err(MvfcError::InvalidParameter(format!(
            "tol must be >= 0, got {tol}"
        )));
    }
    if t_max == 0 {
        return Err(MvfcError::InvalidParameter("t_max must be >= 1".into()));
    }
    Ok(())
}

/// Runs FCM from a seeded random membership matrix.
pub fn fcm_fit(data: ArrayView2<f64>, cfg: &FcmConfig) -> Result<FcmFit> {
    fcm_fit_observed(data, cfg, |_, _, _| {})
}

/// [`fcm_fit`] calling `observe(t, partition, centers)` after every iteration.
pub fn fcm_fit_observed(
    data: ArrayView2<f64>,
    cfg: &FcmConfig,
    observe: impl FnMut(usize, &FuzzyPartition, &Centers),
) -> Result<FcmFit> {
    validate_run_params(
        cfg.clusters,
        data.ncols(),
        cfg.fuzzifier,
        cfg.tol,
        cfg.t_max,
    )?;
    let mut rng = crate::seeded_rng(cfg.seed);
    let init = FuzzyPartition::random(cfg.clusters, data.ncols(), cfg.fuzzifier, &mut rng);
    fcm_fit_from_observed(data, init, cfg.tol, cfg.t_max, observe)
}

/// Runs FCM from a given initial partition, alternating centers then
/// memberships until `|ΔJ| ≤ tol·max(1, |J|)` or `t_max` iterations.
pub fn fcm_fit_from(
    data: ArrayView2<f64>,
    init: FuzzyPartition,
    tol: f64,
    t_max: usize,
) -> Result<FcmFit> {
    fcm_fit_from_observed(data, init, tol, t_max, |_, _, _| {})
}

pub fn fcm_fit_from_observed(
    data: ArrayView2<f64>,
    init: FuzzyPartition,
    tol: f64,
    t_max: usize,
    mut observe: impl FnMut(usize, &FuzzyPartition, &Centers),
) -> Result<FcmFit> {
    validate_run_params(
        init.n_clusters(),
        data.ncols(),
        init.fuzzifier(),
        tol,
        t_max,
    )?;
    if init.n_samples() != data.ncols() {
        return Err(MvfcError::ShapeMismatch(format!(
            "partition covers {} samples, data has {}",
            init.n_samples(),
            data.ncols()
        )));
    }
    let m = init.fuzzifier();
    let mut part = init;
    let mut centers = Centers {
        v: Array2::zeros((part.n_clusters(), data.nrows())),
    };
    let mut trace = Trace::new();
    for t in 1..=t_max {
        let (v, reseeded) = centers_with_rescue(data, &part.powered(), |v, bad| {
            distance_to_valid_centers(data, v, bad)
        });
        trace
            .reseeds
            .extend(reseeded.into_iter().map(|cluster| Reseed {
                iteration: t,
                cluster,
            }));
        centers = Centers { v };
        part = update_membership(data, &centers, m);
        let j = fcm_objective(data, &part, &centers);
        observe(t, &part, &centers);
        if trace.record(j, Vec::new(), tol) {
            trace.converged = true;
            break;
        }
    }
    Ok(FcmFit {
        partition: part,
        centers,
        trace,
    })
}
