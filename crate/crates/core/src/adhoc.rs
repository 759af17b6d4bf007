//! Ad-hoc variance estimators for CV estimates, and the covariance
//! decomposition of the K-fold error rate.
//!
//! The ad-hoc estimators treat fold-level estimates as independent draws,
//! so they ignore the covariance between folds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::FoldAucs;
use crate::grid::Grid;

/// Sample variance with divisor `n - 1`.
pub fn sample_variance(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::invalid(format!(
            "sample variance needs at least 2 values, got {}",
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("sample variance of non-finite values"));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Ok(0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    Ok(ss / (n - 1.0))
}

/// Covariance structure of the per-observation CV losses `e_i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceComponents {
    /// `Var e_i`.
    pub sigma2: f64,
    /// Covariance of two losses from the same test fold.
    pub omega: f64,
    /// Covariance of two losses from different test folds.
    pub gamma: f64,
    /// `E e_i`.
    pub mu: f64,
}

impl CovarianceComponents {
    /// Checks `sigma2 >= 0` and `|omega|, |gamma| <= sigma2`, with a small
    /// relative slack for Monte-Carlo estimates.
    pub fn validate(&self) -> Result<()> {
        let slack = 1e-12 * self.sigma2.abs().max(1.0);
        if !(self.sigma2 >= 0.0) {
            return Err(Error::invalid(format!("sigma2 = {} is negative", self.sigma2)));
        }
        if self.omega.abs() > self.sigma2 + slack || self.gamma.abs() > self.sigma2 + slack {
            return Err(Error::invalid("covariances exceed the variance"));
        }
        Ok(())
    }
}

/// Naive variance of the K-fold error rate: `(1/K)` times the sample
/// variance of the fold errors.
pub fn naive_var_err_cvk(err_k: &[f64]) -> Result<f64> {
    Ok(sample_variance(err_k)? / err_k.len() as f64)
}

/// `Var[Err^CVK] = σ²/n + (n_K − 1)ω/n + (n − n_K)γ/n`.
pub fn var_decomposition(comp: &CovarianceComponents, n: usize, n_k: usize) -> Result<f64> {
    if n == 0 || n_k == 0 || n_k > n {
        return Err(Error::invalid(format!("need 1 <= n_K <= n, got n = {n}, n_K = {n_k}")));
    }
    let (n, nk) = (n as f64, n_k as f64);
    Ok(comp.sigma2 / n + (nk - 1.0) * comp.omega / n + (n - nk) * comp.gamma / n)
}

/// Bias of the naive estimator: `−γ`.
pub fn expected_naive_bias(comp: &CovarianceComponents) -> f64 {
    -comp.gamma
}

/// Expected value of the naive estimator, `σ²/n + (n_K − 1)ω/n − γ/K`.
pub fn expected_naive_value(comp: &CovarianceComponents, n: usize, n_k: usize) -> Result<f64> {
    if n_k == 0 || n % n_k != 0 {
        return Err(Error::invalid(format!("n_K = {n_k} must divide n = {n}")));
    }
    let k = (n / n_k) as f64;
    let (n, nk) = (n as f64, n_k as f64);
    Ok(comp.sigma2 / n + (nk - 1.0) * comp.omega / n - comp.gamma / k)
}

/// `(1/√(K1·K2))` times the sample variance of a pool of fold-pair AUCs.
pub fn var1_pooled(values: &[f64], k1: usize, k2: usize) -> Result<f64> {
    Ok(sample_variance(values)? / ((k1 * k2) as f64).sqrt())
}

/// Var₁ from the `K1 × K2` grid of `AUC_{k1 k2}`.
pub fn var1_cvk(auc_pairs: &Grid<f64>) -> Result<f64> {
    var1_pooled(auc_pairs.as_slice(), auc_pairs.rows(), auc_pairs.cols())
}

/// Var₂ from the matched-fold AUCs `AUC_k`.
pub fn var2_cvk(auc_matched: &[f64]) -> Result<f64> {
    Ok(sample_variance(auc_matched)? / auc_matched.len() as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Var3Criterion {
    /// `c1 = 1/(K1(K1−1))`.
    #[default]
    Unbiased,
    /// `c1 = 1/K1²`.
    Mle,
}

/// Var₃: spread of the row and column means of `AUC_{k1 k2}` about the K-fold estimate.
pub fn var3_cvk(auc_pairs: &Grid<f64>, auc_cvk: f64, criterion: Var3Criterion) -> Result<f64> {
    let (k1, k2) = (auc_pairs.rows(), auc_pairs.cols());
    if k1 < 2 || k2 < 2 {
        return Err(Error::invalid(format!("Var3 needs K1, K2 >= 2, got {k1} x {k2}")));
    }
    let c = |k: usize| match criterion {
        Var3Criterion::Unbiased => 1.0 / (k * (k - 1)) as f64,
        Var3Criterion::Mle => 1.0 / (k * k) as f64,
    };
    let rows: f64 = (0..k1)
        .map(|a| (auc_pairs.row(a).iter().sum::<f64>() / k2 as f64 - auc_cvk).powi(2))
        .sum();
    let cols: f64 = (0..k2)
        .map(|b| ((0..k1).map(|a| auc_pairs[(a, b)]).sum::<f64>() / k1 as f64 - auc_cvk).powi(2))
        .sum();
    Ok(c(k1) * rows + c(k2) * cols)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdhocForm {
    Var1,
    Var2,
    Var3(Var3Criterion),
}

/// Ad-hoc estimate of one K-fold repetition.
pub fn var_cvk(rep: &FoldAucs, form: AdhocForm) -> Result<f64> {
    let pairs = || {
        rep.pairs
            .as_ref()
            .ok_or_else(|| Error::invalid("this form needs the full K1 x K2 fold-pair AUCs"))
    };
    match form {
        AdhocForm::Var1 => var1_cvk(pairs()?),
        AdhocForm::Var2 => var2_cvk(
            rep.matched
                .as_deref()
                .ok_or_else(|| Error::invalid("Var2 needs matched-fold AUCs"))?,
        ),
        AdhocForm::Var3(c) => var3_cvk(pairs()?, rep.auc, c),
    }
}

/// Average of the per-repetition ad-hoc estimates.
pub fn var_cvkr(reps: &[FoldAucs], form: AdhocForm) -> Result<f64> {
    if reps.is_empty() {
        return Err(Error::invalid("no repetitions"));
    }
    let mut total = 0.0;
    for r in reps {
        total += var_cvk(r, form)?;
    }
    Ok(total / reps.len() as f64)
}

/// Monte-Carlo ad-hoc estimate from the fold-0 AUCs of each repetition.
pub fn var_cvkm(auc_11m: &[f64], k1: usize, k2: usize) -> Result<f64> {
    var1_pooled(auc_11m, k1, k2)
}
