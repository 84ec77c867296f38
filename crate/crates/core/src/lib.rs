//! Multi-view fuzzy clustering over a shared nonnegative hidden space.
//!
//! The central algorithm ([`hss`]) learns, by alternating block minimization,
//! a fuzzy partition of `n` samples together with a shared coefficient matrix
//! `H` (r×n), one nonnegative basis `P^k` per view, and an entropy-regularized
//! weight per view:
//!
//! ```text
//! J = Σ_l Σ_i u_li^m ‖h_i − v_l‖² + λ Σ_k w_k ‖X^k − P^k H‖²_F + η Σ_k w_k ln w_k
//! ```
//!
//! Around it sit the baselines ([`fcm`], [`cofkm`], [`nmf`]), the external
//! validity indices ([`metrics`]), the Friedman/Holm comparison ([`stats`])
//! and the seeded batch experiment driver ([`harness`]).
//!
//! Matrices are `ndarray::Array2<f64>`. Data and views are stored
//! features × samples; membership matrices are clusters × samples; center
//! matrices hold one center per row.

pub mod cofkm;
pub mod dataset;
pub mod error;
pub mod fcm;
pub mod harness;
pub mod hss;
pub mod metrics;
pub mod nmf;
pub mod special;
pub mod stats;
pub mod trace;

pub use error::{MvfcError, Result};

/// Floor applied to denominators of multiplicative updates.
pub const EPS_DIV: f64 = 1e-12;

/// Squared distance below which a sample is treated as sitting on a center.
pub const EPS_DIST: f64 = 1e-12;

pub(crate) fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
