//! Shared-hidden-space multi-view fuzzy clustering.
//!
//! Minimizes, over memberships `U`, hidden-space centers `V`, per-view bases
//! `P^k`, shared coefficients `H` and view weights `w`,
//!
//! ```text
//! J = Σ_l Σ_i u_li^m ‖h_i − v_l‖² + λ Σ_k w_k D_k + η Σ_k w_k ln w_k,
//! D_k = ‖X^k − P^k H‖²_F,
//! ```
//!
//! subject to column-stochastic `U`, `w` on the simplex and `P^k, H ≥ 0`.
//! Each outer iteration updates the blocks in the fixed order U, V, P, H, w:
//!
//! * U and V: the FCM kernels of [`crate::fcm`] applied to the columns of `H`;
//! * P^k: the multiplicative step of [`crate::nmf::update_basis_step`];
//! * H: `h_inner_steps` multiplicative steps
//!   `H ← H ⊙ [Vᵀ Uᵐ + λ Σ_k w_k (P^k)ᵀX^k] / [H diag(Σ_l u_li^m) + λ Σ_k w_k (P^k)ᵀP^k H]`;
//! * w: the closed form `w_k ∝ exp(−λ D_k / η)`.
//!
//! Every block step is non-increasing in `J`, so the objective trace is
//! monotone except at iterations where an empty cluster had to be re-seeded
//! (recorded in [`Trace::reseeds`]).

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};

use crate::dataset::MultiViewDataset;
use crate::error::{MvfcError, Result};
use crate::fcm::{self, centers_with_rescue, Centers, FuzzyPartition};
use crate::nmf::{self, update_basis_step, HiddenFactorization};
use crate::trace::{Reseed, Trace};
use crate::EPS_DIV;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HssConfig {
    pub clusters: usize,
    /// Hidden dimension r.
    pub rank: usize,
    pub fuzzifier: f64,
    /// Weight λ of the factorization loss.
    pub lambda: f64,
    /// Weight η of the negative-entropy regularizer on the view weights.
    pub eta: f64,
    pub tol: f64,
    pub t_max: usize,
    /// Multiplicative H steps per outer iteration.
    pub h_inner_steps: usize,
    pub seed: u64,
}

impl HssConfig {
    pub fn new(clusters: usize, rank: usize, fuzzifier: f64, seed: u64) -> Self {
        Self {
            clusters,
            rank,
            fuzzifier,
            lambda: 1.0,
            eta: 1.0,
            tol: 1e-6,
            t_max: 1000,
            h_inner_steps: 1,
            seed,
        }
    }

    pub fn validate(&self, ds: &MultiViewDataset) -> Result<()> {
        fcm::validate_run_params(
            self.clusters,
            ds.n_samples(),
            self.fuzzifier,
            self.tol,
            self.t_max,
        )?;
        nmf::check_rank(ds, self.rank)?;
        for (name, v) in [("lambda", self.lambda), ("eta", self.eta)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(MvfcError::InvalidParameter(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        if self.h_inner_steps == 0 {
            return Err(MvfcError::InvalidParameter(
                "h_inner_steps must be >= 1".into(),
            ));
        }
        if !ds.is_nonnegative() {
            return Err(MvfcError::InvalidDataset(
                "views must be nonnegative; normalize first".into(),
            ));
        }
        Ok(())
    }
}

/// View weights on the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ViewWeights {
    w: Vec<f64>,
}

impl ViewWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        let s: f64 = w.iter().sum();
        if w.is_empty() || w.iter().any(|x| !(0.0..=1.0).contains(x)) || (s - 1.0).abs() > 1e-12 {
            return Err(MvfcError::InvalidParameter(format!(
                "view weights {w:?} are not on the simplex"
            )));
        }
        Ok(Self { w })
    }

    pub fn uniform(views: usize) -> Self {
        Self {
            w: vec![1.0 / views as f64; views],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.w
    }

    pub fn is_simplex_valid(&self, tol: f64) -> bool {
        self.w.iter().all(|x| (0.0..=1.0).contains(x))
            && (self.w.iter().sum::<f64>() - 1.0).abs() <= tol
    }
}

/// `Σ_k w_k ln w_k` with `0 ln 0 = 0`.
pub fn negative_entropy(w: &[f64]) -> f64 {
    w.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum()
}

/// Closed-form weights `w_k = exp(−λD_k/η) / Σ_k' exp(−λD_k'/η)`, evaluated
/// after shifting the exponents by their maximum.
pub fn update_weights(view_errors: &[f64], lambda: f64, eta: f64) -> ViewWeights {
    // shift by the smallest error before scaling so huge λ/η never forms ∞ − ∞
    let d_min = view_errors.iter().copied().fold(f64::INFINITY, f64::min);
    let e: Vec<f64> = view_errors
        .iter()
        .map(|d| (-(lambda / eta) * (d - d_min)).exp())
        .collect();
    let total: f64 = e.iter().sum();
    ViewWeights {
        w: e.into_iter().map(|x| x / total).collect(),
    }
}

/// Full solver state after an outer iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct HssState {
    /// Memberships of the columns of `H`.
    pub partition: FuzzyPartition,
    /// Hidden-space centers, c×r.
    pub centers: Centers,
    pub factorization: HiddenFactorization,
    pub weights: ViewWeights,
    /// `D_k` as used for the weight update.
    pub view_errors: Vec<f64>,
    pub objective: f64,
}

impl HssState {
    pub fn labels(&self) -> Vec<usize> {
        fcm::defuzzify(&self.partition)
    }

    /// All block constraints: simplex memberships and weights within `tol`,
    /// exact nonnegativity of every factor.
    pub fn satisfies_constraints(&self, tol: f64) -> bool {
        self.partition.is_simplex_valid(tol)
            && self.weights.is_simplex_valid(tol)
            && self.factorization.is_nonnegative()
    }
}

fn clustering_term(h: &Array2<f64>, partition: &FuzzyPartition, centers: &Centers) -> f64 {
    fcm::fcm_objective(h.view(), partition, centers)
}

fn assemble_objective(
    h: &Array2<f64>,
    partition: &FuzzyPartition,
    centers: &Centers,
    view_errors: &[f64],
    weights: &[f64],
    lambda: f64,
    eta: f64,
) -> f64 {
    let fit: f64 = weights.iter().zip(view_errors).map(|(w, d)| w * d).sum();
    clustering_term(h, partition, centers) + lambda * fit + eta * negative_entropy(weights)
}

/// Objective value of a state, with every `D_k` recomputed from its factors.
pub fn objective(ds: &MultiViewDataset, state: &HssState, cfg: &HssConfig) -> f64 {
    let d = state.factorization.view_errors(ds);
    assemble_objective(
        state.factorization.coeff(),
        &state.partition,
        &state.centers,
        &d,
        state.weights.as_slice(),
        cfg.lambda,
        cfg.eta,
    )
}

/// Multiplicative steps on `H` with `U`, `V`, `P^k` and `w` fixed.
pub fn update_hidden(
    ds: &MultiViewDataset,
    partition: &FuzzyPartition,
    centers: &Centers,
    factorization: &HiddenFactorization,
    weights: &[f64],
    lambda: f64,
    steps: usize,
) -> Array2<f64> {
    let um = partition.powered();
    let mass: Array1<f64> = um.sum_axis(Axis(0));
    let r = factorization.rank();

    let mut numer = centers.matrix().t().dot(&um);
    let mut gram = Array2::<f64>::zeros((r, r));
    for ((x, p), &w) in ds.views().iter().zip(factorization.bases()).zip(weights) {
        let pt = p.t();
        numer.scaled_add(lambda * w, &pt.dot(x));
        gram.scaled_add(lambda * w, &pt.dot(p));
    }

    let mut h = factorization.coeff().clone();
    for _ in 0..steps {
        let mut denom = gram.dot(&h);
        for (mut col, (&s, hc)) in denom
            .columns_mut()
            .into_iter()
            .zip(mass.iter().zip(h.columns()))
        {
            col.scaled_add(s, &hc);
        }
        ndarray::Zip::from(&mut h)
            .and(&numer)
            .and(&denom)
            .for_each(|hv, &a, &b| *hv *= a / b.max(EPS_DIV));
    }
    h
}

/// [`update_hidden`] driven by a state and config.
pub fn update_hidden_step(ds: &MultiViewDataset, state: &HssState, cfg: &HssConfig) -> Array2<f64> {
    update_hidden(
        ds,
        &state.partition,
        &state.centers,
        &state.factorization,
        state.weights.as_slice(),
        cfg.lambda,
        cfg.h_inner_steps,
    )
}

/// `Σ_k ‖x_i^k − P^k h_i‖²` per sample.
fn per_sample_reconstruction(ds: &MultiViewDataset, f: &HiddenFactorization) -> Vec<f64> {
    let mut err = vec![0.0; ds.n_samples()];
    for (x, p) in ds.views().iter().zip(f.bases()) {
        let ph = p.dot(f.coeff());
        for (i, (xc, pc)) in x.columns().into_iter().zip(ph.columns()).enumerate() {
            err[i] += xc
                .iter()
                .zip(pc.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
        }
    }
    err
}

#[derive(Clone, Debug)]
pub struct HssFit {
    pub state: HssState,
    pub trace: Trace,
}

pub fn hss_fit(ds: &MultiViewDataset, cfg: &HssConfig) -> Result<HssFit> {
    hss_fit_observed(ds, cfg, |_, _| {})
}

/// [`hss_fit`] that hands the state to `observe` after every outer
/// iteration.
pub fn hss_fit_observed(
    ds: &MultiViewDataset,
    cfg: &HssConfig,
    mut observe: impl FnMut(usize, &HssState),
) -> Result<HssFit> {
    cfg.validate(ds)?;
    let (n, k) = (ds.n_samples(), ds.n_views());
    let m = cfg.fuzzifier;
    let mut rng = crate::seeded_rng(cfg.seed);

    let mut factorization = HiddenFactorization::random(&ds.view_dims(), n, cfg.rank, &mut rng);
    let picks = rand::seq::index::sample(&mut rng, n, cfg.clusters).into_vec();
    let mut v0 = Array2::zeros((cfg.clusters, cfg.rank));
    for (l, &i) in picks.iter().enumerate() {
        v0.row_mut(l).assign(&factorization.coeff().column(i));
    }
    let mut centers = Centers::new(v0)?;
    let mut weights = ViewWeights::uniform(k);
    let mut trace = Trace::new();
    let mut state = None;

    for t in 1..=cfg.t_max {
        let h = factorization.coeff();
        let partition = fcm::update_membership(h.view(), &centers, m);

        let (v, reseeded) = centers_with_rescue(h.view(), &partition.powered(), |_, _| {
            per_sample_reconstruction(ds, &factorization)
        });
        trace
            .reseeds
            .extend(reseeded.into_iter().map(|cluster| Reseed {
                iteration: t,
                cluster,
            }));
        centers = Centers::new(v)?;

        let h = factorization.coeff().clone();
        for (p, x) in factorization.bases_mut().iter_mut().zip(ds.views()) {
            *p = update_basis_step(x.view(), p, &h);
        }

        let h = update_hidden(
            ds,
            &partition,
            &centers,
            &factorization,
            weights.as_slice(),
            cfg.lambda,
            cfg.h_inner_steps,
        );
        factorization.set_coeff(h);

        let view_errors = factorization.view_errors(ds);
        weights = update_weights(&view_errors, cfg.lambda, cfg.eta);

        let j = assemble_objective(
            factorization.coeff(),
            &partition,
            &centers,
            &view_errors,
            weights.as_slice(),
            cfg.lambda,
            cfg.eta,
        );
        let current = HssState {
            partition,
            centers: centers.clone(),
            factorization: factorization.clone(),
            weights: weights.clone(),
            view_errors,
            objective: j,
        };
        observe(t, &current);
        let done = trace.record(j, weights.as_slice().to_vec(), cfg.tol);
        state = Some(current);
        if done {
            trace.converged = true;
            break;
        }
    }

    Ok(HssFit {
        state: state.expect("t_max >= 1"),
        trace,
    })
}
