//! The two-sample AUC kernel and the empirical (Mann-Whitney) AUC.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Kernel ψ(a, b): 1 if a > b, ½ on a tie, 0 otherwise.
pub fn psi(a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!("non-finite score in psi({a}, {b})")));
    }
    Ok(TieRule::EXACT.psi(a, b))
}

/// How close two scores must be to count as a tie.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TieRule {
    pub tolerance: f64,
}

impl TieRule {
    pub const EXACT: TieRule = TieRule { tolerance: 0.0 };

    pub fn new(tolerance: f64) -> Result<Self> {
        if !(tolerance >= 0.0 && tolerance.is_finite()) {
            return Err(Error::invalid(format!("tie tolerance must be >= 0, got {tolerance}")));
        }
        Ok(TieRule { tolerance })
    }

    #[inline]
    pub fn psi(&self, a: f64, b: f64) -> f64 {
        let d = a - b;
        if d.abs() <= self.tolerance {
            0.5
        } else if d > 0.0 {
            1.0
        } else {
            0.0
        }
    }
}

impl Default for TieRule {
    fn default() -> Self {
        TieRule::EXACT
    }
}

/// Empirical AUC `(1/(n1 n2)) Σ_i Σ_j ψ(s1_i, s2_j)`.
pub fn empirical_auc(scores1: &[f64], scores2: &[f64]) -> Result<f64> {
    empirical_auc_with(scores1, scores2, TieRule::EXACT)
}

pub fn empirical_auc_with(scores1: &[f64], scores2: &[f64], ties: TieRule) -> Result<f64> {
    if scores1.is_empty() || scores2.is_empty() {
        return Err(Error::invalid("AUC needs at least one score per class"));
    }
    if scores1.iter().chain(scores2).any(|s| !s.is_finite()) {
        return Err(Error::invalid("non-finite score"));
    }
    let total = if ties.tolerance == 0.0 {
        // Mann-Whitney count via binary search over the sorted class-2 scores.
        let mut sorted = scores2.to_vec();
        sorted.sort_by(f64::total_cmp);
        scores1
            .iter()
            .map(|&a| {
                let below = sorted.partition_point(|&b| b < a);
                let not_above = sorted.partition_point(|&b| b <= a);
                below as f64 + 0.5 * (not_above - below) as f64
            })
            .sum::<f64>()
    } else {
        scores1
            .iter()
            .map(|&a| scores2.iter().map(|&b| ties.psi(a, b)).sum::<f64>())
            .sum()
    };
    Ok(total / (scores1.len() * scores2.len()) as f64)
}

/// Per-pair aggregates of the Monte-Carlo CV estimator:
/// `num[i, j] = Σ_m I_i^m I_j^m ψ_m(i, j)` and `den[i, j] = Σ_m I_i^m I_j^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairwiseAucTable {
    pub num: Grid<f64>,
    pub den: Grid<u32>,
}

impl PairwiseAucTable {
    pub fn zeros(n1: usize, n2: usize) -> Self {
        PairwiseAucTable {
            num: Grid::filled(n1, n2, 0.0),
            den: Grid::filled(n1, n2, 0),
        }
    }

    pub fn n1(&self) -> usize {
        self.num.rows()
    }

    pub fn n2(&self) -> usize {
        self.num.cols()
    }

    /// Smoothed kernel `num / den`, or `None` when the pair never co-occurred.
    #[inline]
    pub fn ratio(&self, i: usize, j: usize) -> Option<f64> {
        let d = self.den[(i, j)];
        (d > 0).then(|| self.num[(i, j)] / d as f64)
    }

    pub fn uncovered(&self) -> usize {
        self.den.iter().filter(|&&d| d == 0).count()
    }

    /// Elementwise sum, used to merge partial tables.
    pub fn merge(&mut self, other: &PairwiseAucTable) {
        assert_eq!((self.n1(), self.n2()), (other.n1(), other.n2()));
        for i in 0..self.n1() {
            for j in 0..self.n2() {
                self.num[(i, j)] += other.num[(i, j)];
                self.den[(i, j)] += other.den[(i, j)];
            }
        }
    }
}
