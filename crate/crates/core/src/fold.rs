//! Fold maps: which fold each observation of one class belongs to.
//!
//! Folds and observations are numbered from 0 here and in every serialized
//! form; fold 0 is the test fold of a Monte-Carlo repetition.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// What to do when the fold count does not divide the class size.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Remainder {
    /// Reject non-divisible `(n, K)`.
    #[default]
    Reject,
    /// Give the `n mod K` leftover observations one each to the lowest folds.
    Ragged,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldMap {
    folds: usize,
    assignment: Vec<usize>,
}

fn check_counts(n: usize, k: usize, remainder: Remainder) -> Result<()> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!("fold count K={k} must satisfy 2 <= K <= n={n}")));
    }
    if remainder == Remainder::Reject && n % k != 0 {
        return Err(Error::invalid(format!(
            "K={k} does not divide n={n}; use ragged folds to allow uneven fold sizes"
        )));
    }
    Ok(())
}

/// Fold of position `pos` under canonical folding of `n` positions into `k` folds.
fn canonical_fold(pos: usize, n: usize, k: usize) -> usize {
    let base = n / k;
    let extra = n % k;
    // The first `extra` folds hold base + 1 positions.
    let big = extra * (base + 1);
    if pos < big {
        pos / (base + 1)
    } else {
        extra + (pos - big) / base
    }
}

impl FoldMap {
    /// Contiguous folding: observation `i` goes to fold `k` iff
    /// `n_K k <= i < n_K (k + 1)`.
    pub fn canonical(n: usize, k: usize) -> Result<Self> {
        FoldMap::canonical_with(n, k, Remainder::Reject)
    }

    pub fn canonical_with(n: usize, k: usize, remainder: Remainder) -> Result<Self> {
        check_counts(n, k, remainder)?;
        Ok(FoldMap {
            folds: k,
            assignment: (0..n).map(|i| canonical_fold(i, n, k)).collect(),
        })
    }

    /// Canonical folding applied to a permutation: the observation at
    /// position `pos` of `order` gets the canonical fold of `pos`.
    pub fn from_order(order: &[usize], k: usize, remainder: Remainder) -> Result<Self> {
        let n = order.len();
        check_counts(n, k, remainder)?;
        let mut assignment = vec![usize::MAX; n];
        for (pos, &obs) in order.iter().enumerate() {
            if obs >= n || assignment[obs] != usize::MAX {
                return Err(Error::invalid("order is not a permutation"));
            }
            assignment[obs] = canonical_fold(pos, n, k);
        }
        Ok(FoldMap { folds: k, assignment })
    }

    /// Validate an explicit assignment (e.g. read back from JSON).
    pub fn from_assignment(assignment: Vec<usize>, k: usize) -> Result<Self> {
        if k < 2 || k > assignment.len() {
            return Err(Error::invalid(format!("invalid fold count {k}")));
        }
        let mut sizes = vec![0usize; k];
        for &f in &assignment {
            if f >= k {
                return Err(Error::invalid(format!("fold index {f} out of range")));
            }
            sizes[f] += 1;
        }
        if sizes.contains(&0) {
            return Err(Error::invalid("every fold must be non-empty"));
        }
        Ok(FoldMap { folds: k, assignment })
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn folds(&self) -> usize {
        self.folds
    }

    #[inline]
    pub fn fold_of(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Observations of fold `k` in increasing order.
    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.assignment[i] == k).collect()
    }

    pub fn fold_size(&self, k: usize) -> usize {
        self.assignment.iter().filter(|&&f| f == k).count()
    }

    /// Common fold size, if all folds are the same size.
    pub fn uniform_size(&self) -> Option<usize> {
        let s = self.fold_size(0);
        (1..self.folds).all(|k| self.fold_size(k) == s).then_some(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonical_examples() {
        assert_eq!(FoldMap::canonical(6, 3).unwrap().assignment(), &[0, 0, 1, 1, 2, 2]);
        assert_eq!(FoldMap::canonical(4, 4).unwrap().assignment(), &[0, 1, 2, 3]);
        let m = FoldMap::canonical(10, 5).unwrap();
        assert!((0..5).all(|k| m.fold_size(k) == 2));
    }

    #[test]
    fn canonical_rejects_bad_counts() {
        assert!(FoldMap::canonical(5, 6).is_err());
        assert!(FoldMap::canonical(5, 1).is_err());
        assert!(FoldMap::canonical(10, 3).is_err());
    }

    #[test]
    fn ragged_puts_remainder_in_low_folds() {
        let m = FoldMap::canonical_with(11, 3, Remainder::Ragged).unwrap();
        assert_eq!(m.assignment(), &[0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2]);
        assert_eq!(m.uniform_size(), None);
    }

    #[test]
    fn from_order_applies_permutation() {
        let m = FoldMap::from_order(&[3, 0, 2, 1], 2, Remainder::Reject).unwrap();
        assert_eq!(m.assignment(), &[0, 1, 1, 0]);
        assert!(FoldMap::from_order(&[0, 0, 1, 2], 2, Remainder::Reject).is_err());
    }

    #[test]
    fn assignment_validation() {
        assert!(FoldMap::from_assignment(vec![0, 1, 1], 2).is_ok());
        assert!(FoldMap::from_assignment(vec![0, 0, 0], 2).is_err());
        assert!(FoldMap::from_assignment(vec![0, 2, 1], 2).is_err());
    }

    proptest! {
        #[test]
        fn canonical_folds_have_equal_size((n, k) in (2usize..60).prop_flat_map(|n| (Just(n), 2..=n))) {
            if n % k == 0 {
                let m = FoldMap::canonical(n, k).unwrap();
                prop_assert!((0..k).all(|f| m.fold_size(f) == n / k));
                for i in 0..n {
                    // n_K (k-1) < i <= n_K k in 1-based terms.
                    let nk = n / k;
                    prop_assert!(nk * m.fold_of(i) <= i && i < nk * (m.fold_of(i) + 1));
                }
            } else {
                let m = FoldMap::canonical_with(n, k, Remainder::Ragged).unwrap();
                let sizes: Vec<usize> = (0..k).map(|f| m.fold_size(f)).collect();
                prop_assert!(sizes.iter().all(|&s| s == n / k || s == n / k + 1));
                prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }
}
