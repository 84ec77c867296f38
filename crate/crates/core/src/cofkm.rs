//! Collaborative multi-view fuzzy c-means (Co-FKM).
//!
//! Each view keeps its own memberships `μ_k` and centers `V_k`. With
//! `a = η / (K − 1)` (zero when K = 1) the objective is
//!
//! ```text
//! J = Σ_k Σ_ij μ̃_ij,k ‖x_j,k − v_i,k‖²,   μ̃_k = (1 − η) μ_k^m + a Σ_{k'≠k} μ_{k'}^m
//!   = Σ_k Σ_ij μ_ij,k^m D̃_ij,k,          D̃_k = (1 − η) d²_k + a Σ_{k'≠k} d²_{k'}
//! ```
//!
//! so the center step is a μ̃-weighted mean and the membership step is the
//! FCM update on the blended distances `D̃`. Both are exact block minimizers
//! and the objective is non-increasing.

use ndarray::Array2;

use crate::dataset::MultiViewDataset;
use crate::error::{MvfcError, Result};
use crate::fcm::{
    self, centers_with_rescue, distance_to_valid_centers, memberships_from_sq_dists,
    squared_distances, Centers, FuzzyPartition,
};
use crate::trace::{Reseed, Trace};

#[derive(Clone, Debug, PartialEq)]
pub struct CoFkmConfig {
    pub clusters: usize,
    pub fuzzifier: f64,
    /// Cooperation parameter in [0, 1).
    pub eta: f64,
    pub seed: u64,
    pub tol: f64,
    pub t_max: usize,
}

impl CoFkmConfig {
    pub fn new(clusters: usize, fuzzifier: f64, seed: u64) -> Self {
        Self {
            clusters,
            fuzzifier,
            eta: 0.5,
            seed,
            tol: 1e-6,
            t_max: 1000,
        }
    }
}

/// Per-view memberships and centers.
#[derive(Clone, Debug, PartialEq)]
pub struct CoFkmState {
    pub memberships: Vec<FuzzyPartition>,
    pub centers: Vec<Centers>,
    pub eta: f64,
    pub fuzzifier: f64,
}

#[derive(Clone, Debug)]
pub struct CoFkmFit {
    pub state: CoFkmState,
    pub trace: Trace,
}

/// Seed of the initial membership matrix of view `k`.
pub fn view_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add(k as u64)
}

fn coupling(eta: f64, views: usize) -> f64 {
    if views > 1 {
        eta / (views - 1) as f64
    } else {
        0.0
    }
}

/// `(1 − η)·own[k] + a·Σ_{k'≠k} own[k']` for every view.
fn blend(parts: &[Array2<f64>], eta: f64) -> Vec<Array2<f64>> {
    let a = coupling(eta, parts.len());
    (0..parts.len())
        .map(|k| {
            let mut others = Array2::<f64>::zeros(parts[k].raw_dim());
            for (kk, p) in parts.iter().enumerate() {
                if kk != k {
                    others += p;
                }
            }
            let own = &parts[k];
            let mut out = own.mapv(|x| (1.0 - eta) * x);
            out.zip_mut_with(&others, |o, &s| *o += a * s);
            out
        })
        .collect()
}

/// Co-FKM objective for the current memberships and centers.
pub fn cofkm_objective(ds: &MultiViewDataset, state: &CoFkmState) -> f64 {
    let powered: Vec<_> = state.memberships.iter().map(|p| p.powered()).collect();
    let blended = blend(&powered, state.eta);
    ds.views()
        .iter()
        .zip(&state.centers)
        .zip(&blended)
        .map(|((x, v), w)| (w * &squared_distances(x.view(), v.matrix())).sum())
        .sum()
}

fn validate(ds: &MultiViewDataset, cfg: &CoFkmConfig) -> Result<()> {
    fcm::validate_run_params(
        cfg.clusters,
        ds.n_samples(),
        cfg.fuzzifier,
        cfg.tol,
        cfg.t_max,
    )?;
    if !(0.0..1.0).contains(&cfg.eta) {
        return Err(MvfcError::InvalidParameter(format!(
            "Co-FKM eta must lie in [0, 1), got {}",
            cfg.eta
        )));
    }
    Ok(())
}

/// Fits Co-FKM with view `k` initialized from [`view_seed`]`(cfg.seed, k)`.
pub fn cofkm_fit(ds: &MultiViewDataset, cfg: &CoFkmConfig) -> Result<CoFkmFit> {
    cofkm_fit_observed(ds, cfg, |_, _, _| {})
}

/// Fits Co-FKM from given per-view initial memberships (the seed in `cfg`
/// is ignored).
pub fn cofkm_fit_from(
    ds: &MultiViewDataset,
    init: Vec<FuzzyPartition>,
    cfg: &CoFkmConfig,
) -> Result<CoFkmFit> {
    cofkm_fit_from_observed(ds, init, cfg, |_, _, _| {})
}

/// [`cofkm_fit`] calling `observe(t, memberships, centers)` after every
/// iteration.
pub fn cofkm_fit_observed(
    ds: &MultiViewDataset,
    cfg: &CoFkmConfig,
    observe: impl FnMut(usize, &[FuzzyPartition], &[Centers]),
) -> Result<CoFkmFit> {
    validate(ds, cfg)?;
    cofkm_fit_from_observed(ds, initial_memberships(ds, cfg), cfg, observe)
}

fn initial_memberships(ds: &MultiViewDataset, cfg: &CoFkmConfig) -> Vec<FuzzyPartition> {
    (0..ds.n_views())
        .map(|k| {
            let mut rng = crate::seeded_rng(view_seed(cfg.seed, k));
            FuzzyPartition::random(cfg.clusters, ds.n_samples(), cfg.fuzzifier, &mut rng)
        })
        .collect()
}

pub fn cofkm_fit_from_observed(
    ds: &MultiViewDataset,
    init: Vec<FuzzyPartition>,
    cfg: &CoFkmConfig,
    mut observe: impl FnMut(usize, &[FuzzyPartition], &[Centers]),
) -> Result<CoFkmFit> {
    validate(ds, cfg)?;
    if init.len() != ds.n_views()
        || init
            .iter()
            .any(|p| p.n_clusters() != cfg.clusters || p.n_samples() != ds.n_samples())
    {
        return Err(MvfcError::ShapeMismatch(
            "initial memberships must be c×n, one per view".into(),
        ));
    }
    let m = cfg.fuzzifier;
    let mut memberships = init;
    let mut centers: Vec<Centers> = Vec::new();
    let mut trace = Trace::new();

    for t in 1..=cfg.t_max {
        let powered: Vec<_> = memberships.iter().map(|p| p.powered()).collect();
        let weights = blend(&powered, cfg.eta);
        centers = ds
            .views()
            .iter()
            .zip(&weights)
            .map(|(x, w)| {
                let (v, reseeded) = centers_with_rescue(x.view(), w, |v, bad| {
                    distance_to_valid_centers(x.view(), v, bad)
                });
                trace
                    .reseeds
                    .extend(reseeded.into_iter().map(|cluster| Reseed {
                        iteration: t,
                        cluster,
                    }));
                Centers::new(v).expect("c >= 1")
            })
            .collect();

        let dists: Vec<_> = ds
            .views()
            .iter()
            .zip(&centers)
            .map(|(x, v)| squared_distances(x.view(), v.matrix()))
            .collect();
        memberships = blend(&dists, cfg.eta)
            .iter()
            .map(|d| FuzzyPartition::from_parts(memberships_from_sq_dists(d, m), m))
            .collect();

        let powered: Vec<_> = memberships.iter().map(|p| p.powered()).collect();
        let j: f64 = blend(&powered, cfg.eta)
            .iter()
            .zip(&dists)
            .map(|(w, d)| (w * d).sum())
            .sum();
        observe(t, &memberships, &centers);
        if trace.record(j, Vec::new(), cfg.tol) {
            trace.converged = true;
            break;
        }
    }

    Ok(CoFkmFit {
        state: CoFkmState {
            memberships,
            centers,
            eta: cfg.eta,
            fuzzifier: m,
        },
        trace,
    })
}

/// Geometric mean of the per-view memberships, renormalized per sample.
///
/// A sample whose geometric mean vanishes in every cluster gets uniform
/// membership.
pub fn consensus_membership(state: &CoFkmState) -> FuzzyPartition {
    let k = state.memberships.len() as f64;
    let mut g = state.memberships[0].memberships().clone();
    for p in &state.memberships[1..] {
        g *= p.memberships();
    }
    g.mapv_inplace(|x| x.powf(1.0 / k));
    normalize_columns(&mut g);
    FuzzyPartition::from_parts(g, state.fuzzifier)
}

fn normalize_columns(g: &mut Array2<f64>) {
    let c = g.nrows() as f64;
    for mut col in g.columns_mut() {
        let s = col.sum();
        if s > 0.0 {
            col.mapv_inplace(|x| x / s);
        } else {
            col.fill(1.0 / c);
        }
    }
}
