//! Nonnegative matrix factorization kernels: the single-matrix objective
//! `‖X − PH‖²_F`, the multiplicative basis step, and the multi-view
//! factorization `Σ_k ‖X^k − P^k H‖²_F` with a coefficient matrix shared by
//! all views.

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::dataset::MultiViewDataset;
use crate::error::{MvfcError, Result};
use crate::trace::Trace;
use crate::EPS_DIV;

/// Per-view bases `P^k` (m_k×r) and the shared coefficients `H` (r×n).
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenFactorization {
    bases: Vec<Array2<f64>>,
    coeff: Array2<f64>,
}

impl HiddenFactorization {
    pub fn new(bases: Vec<Array2<f64>>, coeff: Array2<f64>) -> Result<Self> {
        let r = coeff.nrows();
        if r == 0 || bases.is_empty() {
            return Err(MvfcError::ShapeMismatch("empty factorization".into()));
        }
        if bases.iter().any(|p| p.ncols() != r) {
            return Err(MvfcError::ShapeMismatch(format!(
                "every basis needs {r} columns"
            )));
        }
        let f = Self { bases, coeff };
        if !f.is_nonnegative() {
            return Err(MvfcError::InvalidParameter(
                "factor entries must be nonnegative".into(),
            ));
        }
        Ok(f)
    }

    /// Entries drawn uniformly on [0, 1): every basis first, then `H`.
    pub fn random<R: Rng + ?Sized>(
        view_dims: &[usize],
        n: usize,
        rank: usize,
        rng: &mut R,
    ) -> Self {
        let bases = view_dims
            .iter()
            .map(|&m| Array2::from_shape_fn((m, rank), |_| rng.random::<f64>()))
            .collect();
        let coeff = Array2::from_shape_fn((rank, n), |_| rng.random::<f64>());
        Self { bases, coeff }
    }

    pub fn bases(&self) -> &[Array2<f64>] {
        &self.bases
    }

    pub fn coeff(&self) -> &Array2<f64> {
        &self.coeff
    }

    pub fn rank(&self) -> usize {
        self.coeff.nrows()
    }

    pub(crate) fn bases_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.bases
    }

    pub(crate) fn set_coeff(&mut self, h: Array2<f64>) {
        self.coeff = h;
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeff.iter().all(|&x| x >= 0.0)
            && self.bases.iter().all(|p| p.iter().all(|&x| x >= 0.0))
    }

    /// `D_k = ‖X^k − P^k H‖²_F` for every view.
    pub fn view_errors(&self, ds: &MultiViewDataset) -> Vec<f64> {
        ds.views()
            .iter()
            .zip(&self.bases)
            .map(|(x, p)| sq_residual(x.view(), p, &self.coeff))
            .collect()
    }
}

/// Largest admissible rank: `min(m_1, …, m_K, n)`.
pub fn max_rank(ds: &MultiViewDataset) -> usize {
    ds.min_view_dim().min(ds.n_samples())
}

pub fn check_rank(ds: &MultiViewDataset, rank: usize) -> Result<()> {
    let max = max_rank(ds);
    if rank == 0 || rank > max {
        return Err(MvfcError::RankOutOfBounds { rank, max });
    }
    Ok(())
}

fn sq_residual(x: ArrayView2<f64>, p: &Array2<f64>, h: &Array2<f64>) -> f64 {
    let ph = p.dot(h);
    x.iter()
        .zip(ph.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// `‖X − PH‖²_F`.
pub fn reconstruction_error(x: &Array2<f64>, p: &Array2<f64>, h: &Array2<f64>) -> Result<f64> {
    if p.ncols() != h.nrows() || x.nrows() != p.nrows() || x.ncols() != h.ncols() {
        return Err(MvfcError::ShapeMismatch(format!(
            "X {:?}, P {:?}, H {:?}",
            x.dim(),
            p.dim(),
            h.dim()
        )));
    }
    Ok(sq_residual(x.view(), p, h))
}

/// Multiplicative basis step `P ← P ⊙ (X Hᵀ) / (P H Hᵀ)` with the
/// denominator floored at [`EPS_DIV`].
pub fn update_basis_step(x: ArrayView2<f64>, p: &Array2<f64>, h: &Array2<f64>) -> Array2<f64> {
    let ht = h.t();
    let numer = x.dot(&ht);
    let denom = p.dot(&h.dot(&ht));
    let mut out = p.clone();
    ndarray::Zip::from(&mut out)
        .and(&numer)
        .and(&denom)
        .for_each(|o, &a, &b| *o *= a / b.max(EPS_DIV));
    out
}

/// Shared-coefficient step with unit view weights:
/// `H ← H ⊙ Σ_k (P^k)ᵀX^k / Σ_k (P^k)ᵀP^k H`.
pub fn update_shared_coeff_step(
    views: &[Array2<f64>],
    bases: &[Array2<f64>],
    h: &Array2<f64>,
) -> Array2<f64> {
    let mut numer = Array2::<f64>::zeros(h.raw_dim());
    let mut gram = Array2::<f64>::zeros((h.nrows(), h.nrows()));
    for (x, p) in views.iter().zip(bases) {
        numer += &p.t().dot(x);
        gram += &p.t().dot(p);
    }
    let denom = gram.dot(h);
    let mut out = h.clone();
    ndarray::Zip::from(&mut out)
        .and(&numer)
        .and(&denom)
        .for_each(|o, &a, &b| *o *= a / b.max(EPS_DIV));
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct NmfConfig {
    pub rank: usize,
    pub seed: u64,
    pub tol: f64,
    pub t_max: usize,
}

impl NmfConfig {
    pub fn new(rank: usize, seed: u64) -> Self {
        Self {
            rank,
            seed,
            tol: 1e-6,
            t_max: 1000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NmfFit {
    pub factorization: HiddenFactorization,
    pub trace: Trace,
}

/// Minimizes `Σ_k ‖X^k − P^k H‖²_F` by alternating multiplicative steps on
/// every `P^k` and then on `H`.
pub fn shared_nmf_fit(ds: &MultiViewDataset, cfg: &NmfConfig) -> Result<NmfFit> {
    shared_nmf_fit_observed(ds, cfg, |_, _| {})
}

/// [`shared_nmf_fit`] calling `observe(t, factorization)` after every
/// iteration.
pub fn shared_nmf_fit_observed(
    ds: &MultiViewDataset,
    cfg: &NmfConfig,
    mut observe: impl FnMut(usize, &HiddenFactorization),
) -> Result<NmfFit> {
    check_rank(ds, cfg.rank)?;
    if !ds.is_nonnegative() {
        return Err(MvfcError::InvalidDataset(
            "NMF needs nonnegative views; normalize first".into(),
        ));
    }
    if cfg.t_max == 0 || !(cfg.tol >= 0.0) {
        return Err(MvfcError::InvalidParameter(
            "need t_max >= 1 and tol >= 0".into(),
        ));
    }
    let mut rng = crate::seeded_rng(cfg.seed);
    let mut f = HiddenFactorization::random(&ds.view_dims(), ds.n_samples(), cfg.rank, &mut rng);
    let mut trace = Trace::new();
    for t in 1..=cfg.t_max {
        let h = f.coeff().clone();
        for (p, x) in f.bases_mut().iter_mut().zip(ds.views()) {
            *p = update_basis_step(x.view(), p, &h);
        }
        let h = update_shared_coeff_step(ds.views(), f.bases(), &h);
        f.set_coeff(h);
        let j: f64 = f.view_errors(ds).iter().sum();
        observe(t, &f);
        if trace.record(j, Vec::new(), cfg.tol) {
            trace.converged = true;
            break;
        }
    }
    Ok(NmfFit {
        factorization: f,
        trace,
    })
}
