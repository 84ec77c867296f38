//! External validity indices: normalized mutual information and the Rand
//! index.

use std::collections::HashMap;
use std::hash::Hash;

use crate::error::{MvfcError, Result};

/// Maps arbitrary labels to `0..c` in order of first appearance.
pub fn densify<T: Eq + Hash + Clone>(labels: &[T]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let dense = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(l.clone()).or_insert(next)
        })
        .collect();
    (dense, ids.len())
}

/// Cluster × class counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<usize>>,
    pub row_sums: Vec<usize>,
    pub col_sums: Vec<usize>,
    pub total: usize,
}

impl ContingencyTable {
    /// Rows index predicted clusters, columns index true classes.
    pub fn new<A: Eq + Hash + Clone, B: Eq + Hash + Clone>(
        pred: &[A],
        truth: &[B],
    ) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(MvfcError::LengthMismatch {
                left: pred.len(),
                right: truth.len(),
            });
        }
        let (p, rows) = densify(pred);
        let (t, cols) = densify(truth);
        let mut counts = vec![vec![0usize; cols]; rows];
        for (&i, &j) in p.iter().zip(&t) {
            counts[i][j] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..cols)
            .map(|j| counts.iter().map(|r| r[j]).sum())
            .collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            total: pred.len(),
        })
    }
}

/// Agreeing sample pairs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCounts {
    /// Pairs split by both the classes and the clusters.
    pub f00: u64,
    /// Pairs joined by both.
    pub f11: u64,
    pub total_pairs: u64,
}

fn choose2(x: usize) -> u64 {
    let x = x as u64;
    x * x.saturating_sub(1) / 2
}

impl PairCounts {
    pub fn from_table(t: &ContingencyTable) -> Self {
        let f11: u64 = t.counts.iter().flatten().map(|&c| choose2(c)).sum();
        let same_cluster: u64 = t.row_sums.iter().map(|&c| choose2(c)).sum();
        let same_class: u64 = t.col_sums.iter().map(|&c| choose2(c)).sum();
        let total_pairs = choose2(t.total);
        Self {
            f00: total_pairs + f11 - same_cluster - same_class,
            f11,
            total_pairs,
        }
    }
}

/// Normalized mutual information with natural logarithms:
///
/// ```text
/// NMI = Σ_ij n_ij ln(n·n_ij / (n_i n_j)) / sqrt(Σ_i n_i ln(n_i/n) · Σ_j n_j ln(n_j/n))
/// ```
///
/// Returns 0 when either labeling has a single cluster.
pub fn nmi<A: Eq + Hash + Clone, B: Eq + Hash + Clone>(pred: &[A], truth: &[B]) -> Result<f64> {
    if pred.is_empty() {
        return Err(MvfcError::InvalidParameter(
            "nmi needs at least one sample".into(),
        ));
    }
    let t = ContingencyTable::new(pred, truth)?;
    Ok(nmi_from_table(&t))
}

pub fn nmi_from_table(t: &ContingencyTable) -> f64 {
    let n = t.total as f64;
    let entropy_sum = |sums: &[usize]| -> f64 {
        sums.iter()
            .filter(|&&s| s > 0)
            .map(|&s| s as f64 * (s as f64 / n).ln())
            .sum()
    };
    let hp = entropy_sum(&t.row_sums);
    let ht = entropy_sum(&t.col_sums);
    let denom = (hp * ht).sqrt();
    if !(denom > 0.0) {
        return 0.0;
    }
    let mut mi = 0.0;
    for (i, row) in t.counts.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c * (n * c / (t.row_sums[i] as f64 * t.col_sums[j] as f64)).ln();
            }
        }
    }
    (mi / denom).clamp(0.0, 1.0)
}

/// `(f00 + f11) / (n(n−1)/2)`.
pub fn rand_index<A: Eq + Hash + Clone, B: Eq + Hash + Clone>(
    pred: &[A],
    truth: &[B],
) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(MvfcError::LengthMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    if pred.len() < 2 {
        return Err(MvfcError::InvalidParameter(
            "rand index needs at least two samples".into(),
        ));
    }
    let pc = PairCounts::from_table(&ContingencyTable::new(pred, truth)?);
    Ok((pc.f00 + pc.f11) as f64 / pc.total_pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn identical_and_relabeled() {
        let t = [3, 3, 7, 7, 1, 1, 1];
        let p = ["a", "a", "b", "b", "c", "c", "c"];
        assert_abs_diff_eq!(nmi(&t, &t).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(nmi(&p, &t).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(rand_index(&p, &t).unwrap(), 1.0);
    }

    #[test]
    fn nmi_contingency_example() {
        // counts [[2,0],[1,1]]
        let pred = [0, 0, 1, 1];
        let truth = [0, 0, 0, 1];
        let t = ContingencyTable::new(&pred, &truth).unwrap();
        assert_eq!(t.counts, vec![vec![2, 0], vec![1, 1]]);
        assert_abs_diff_eq!(nmi(&pred, &truth).unwrap(), 0.34558, epsilon = 2e-5);
        // independent route: I(P;T) / sqrt(H(P) H(T)) with probabilities
        let (h_p, h_t) = (2f64.ln(), -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln()));
        let i = 0.5 * (0.5f64 / (0.5 * 0.75)).ln()
            + 0.25 * (0.25f64 / (0.5 * 0.75)).ln()
            + 0.25 * (0.25f64 / (0.5 * 0.25)).ln();
        assert_abs_diff_eq!(
            nmi(&pred, &truth).unwrap(),
            i / (h_p * h_t).sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn rand_index_examples() {
        let ri = rand_index(&[1, 2, 1, 2], &[1, 1, 2, 2]).unwrap();
        let pc =
            PairCounts::from_table(&ContingencyTable::new(&[1, 2, 1, 2], &[1, 1, 2, 2]).unwrap());
        assert_eq!((pc.f00, pc.f11, pc.total_pairs), (2, 0, 6));
        assert_abs_diff_eq!(ri, 2.0 / 6.0, epsilon = 1e-15);
        let singletons: Vec<usize> = (0..6).collect();
        assert_eq!(rand_index(&singletons, &singletons).unwrap(), 1.0);
    }

    #[test]
    fn single_cluster_nmi_is_zero() {
        assert_eq!(nmi(&[0, 0, 0], &[0, 1, 2]).unwrap(), 0.0);
        assert_eq!(nmi(&[0, 0, 0], &[5, 5, 5]).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            nmi(&[0, 1], &[0]),
            Err(MvfcError::LengthMismatch { .. })
        ));
        assert!(rand_index(&[0], &[0]).is_err());
        assert!(rand_index(&[0, 1], &[0]).is_err());
    }

    proptest! {
        #[test]
        fn indices_bounded_symmetric_and_relabel_invariant(
            a in proptest::collection::vec(0u8..4, 2..30),
            seed in proptest::collection::vec(0u8..4, 30),
        ) {
            let b: Vec<u8> = a.iter().zip(&seed).map(|(x, s)| (x + s) % 3).collect();
            let relabeled: Vec<i32> = a.iter().map(|&x| 100 - 7 * x as i32).collect();
            let n1 = nmi(&a, &b).unwrap();
            let r1 = rand_index(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&n1));
            prop_assert!((0.0..=1.0).contains(&r1));
            prop_assert!((n1 - nmi(&b, &a).unwrap()).abs() < 1e-12);
            prop_assert_eq!(r1, rand_index(&b, &a).unwrap());
            prop_assert!((n1 - nmi(&relabeled, &b).unwrap()).abs() < 1e-12);
            prop_assert_eq!(r1, rand_index(&relabeled, &b).unwrap());
        }
    }
}
