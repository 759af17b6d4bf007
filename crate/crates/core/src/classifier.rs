//! Linear and quadratic Gaussian discriminants used as the scoring rules.
//!
//! Scores are oriented so that larger means "more class 1", and a score above
//! zero predicts class 1.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Samples;
use crate::error::{Error, Result};

/// A fitted rule that maps a feature vector to a real score.
pub trait Scorer {
    /// Score of `x`; the caller guarantees `x.len()` matches the training dimension.
    fn eval(&self, x: &[f64]) -> f64;

    /// Number of covariance estimates that needed the automatic ridge.
    fn ridge_activations(&self) -> usize {
        0
    }
}

/// Something that can be trained on class-1 and class-2 samples.
pub trait TrainingRule: Sync {
    type Model: Scorer + Send;

    fn fit(&self, train1: &Samples, train2: &Samples) -> Result<Self::Model>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassifierKind {
    Lda,
    Qda,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    /// Added to every covariance diagonal before inversion.
    #[serde(default)]
    pub ridge: f64,
}

impl ClassifierSpec {
    pub fn lda() -> Self {
        ClassifierSpec {
            kind: ClassifierKind::Lda,
            ridge: 0.0,
        }
    }

    pub fn qda() -> Self {
        ClassifierSpec {
            kind: ClassifierKind::Qda,
            ridge: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::invalid(format!("ridge must be >= 0, got {}", self.ridge)));
        }
        Ok(())
    }
}

/// Relative eigenvalue floor below which the automatic ridge kicks in.
const CONDITION_FLOOR: f64 = 1e-10;
/// Automatic ridge as a fraction of the mean eigenvalue.
const AUTO_RIDGE: f64 = 1e-6;
/// Allowed `‖Σ Σ⁻¹ − I‖∞` after inversion.
const INVERSE_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
enum Fit {
    Lda {
        weights: Vec<f64>,
        intercept: f64,
    },
    Qda {
        mean1: Vec<f64>,
        mean2: Vec<f64>,
        inv1: DMatrix<f64>,
        inv2: DMatrix<f64>,
        /// ½ (log|Σ₂| − log|Σ₁|)
        log_det_term: f64,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainedClassifier {
    kind: ClassifierKind,
    dim: usize,
    fit: Fit,
    sign: f64,
    ridge_activations: usize,
}

struct Inverted {
    inverse: DMatrix<f64>,
    log_det: f64,
    ridged: bool,
}

fn scatter(samples: &Samples, mean: &[f64]) -> DMatrix<f64> {
    let p = samples.dim();
    let mut s = DMatrix::<f64>::zeros(p, p);
    for row in samples.rows() {
        for a in 0..p {
            let da = row[a] - mean[a];
            for b in 0..=a {
                s[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            s[(b, a)] = s[(a, b)];
        }
    }
    s
}

fn invert_covariance(mut cov: DMatrix<f64>, ridge: f64) -> Result<Inverted> {
    let p = cov.nrows();
    for d in 0..p {
        cov[(d, d)] += ridge;
    }
    let eig = cov.clone().symmetric_eigen().eigenvalues;
    let max = eig.max();
    let min = eig.min();
    let mut ridged = false;
    if !(min >= CONDITION_FLOOR * max) {
        let lambda = AUTO_RIDGE * cov.trace() / p as f64;
        if !(lambda > 0.0) {
            return Err(Error::numerical("covariance", "covariance is zero"));
        }
        for d in 0..p {
            cov[(d, d)] += lambda;
        }
        ridged = true;
    }
    let chol = cov
        .clone()
        .cholesky()
        .ok_or_else(|| Error::numerical("covariance", "not positive definite after ridge"))?;
    let inverse = chol.inverse();
    let residual = (&cov * &inverse - DMatrix::<f64>::identity(p, p))
        .row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if !(residual < INVERSE_TOLERANCE) {
        return Err(Error::numerical(
            "covariance",
            format!("inverse residual {residual:.3e} exceeds {INVERSE_TOLERANCE:e}"),
        ));
    }
    let log_det = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    Ok(Inverted {
        inverse,
        log_det,
        ridged,
    })
}

fn quad_form(inv: &DMatrix<f64>, x: &[f64], mean: &[f64]) -> f64 {
    let p = mean.len();
    let mut acc = 0.0;
    for a in 0..p {
        let da = x[a] - mean[a];
        let mut row = 0.0;
        for b in 0..p {
            row += inv[(a, b)] * (x[b] - mean[b]);
        }
        acc += da * row;
    }
    acc
}

impl Fit {
    #[inline]
    fn raw(&self, x: &[f64]) -> f64 {
        match self {
            Fit::Lda { weights, intercept } => {
                weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + intercept
            }
            Fit::Qda {
                mean1,
                mean2,
                inv1,
                inv2,
                log_det_term,
            } => 0.5 * (quad_form(inv2, x, mean2) - quad_form(inv1, x, mean1)) + log_det_term,
        }
    }
}

/// Fit an LDA or QDA rule.
pub fn train(spec: &ClassifierSpec, train1: &Samples, train2: &Samples) -> Result<TrainedClassifier> {
    spec.validate()?;
    let p = train1.dim();
    if train2.dim() != p {
        return Err(Error::invalid("training sets have different dimensions"));
    }
    let (n1, n2) = (train1.len(), train2.len());
    if n1 < 2 || n2 < 2 {
        return Err(Error::invalid(format!(
            "each training class needs at least 2 rows (got {n1} and {n2})"
        )));
    }
    let mean1 = train1.column_means();
    let mean2 = train2.column_means();
    let s1 = scatter(train1, &mean1);
    let s2 = scatter(train2, &mean2);

    let (fit, ridge_activations) = match spec.kind {
        ClassifierKind::Lda => {
            let pooled = (s1 + s2) / (n1 + n2 - 2) as f64;
            let inv = invert_covariance(pooled, spec.ridge).map_err(|e| e.within("pooled"))?;
            let diff = DVector::from_iterator(p, mean1.iter().zip(&mean2).map(|(a, b)| a - b));
            let w = &inv.inverse * diff;
            let intercept = -0.5
                * w.iter()
                    .zip(mean1.iter().zip(&mean2))
                    .map(|(wk, (a, b))| wk * (a + b))
                    .sum::<f64>();
            (
                Fit::Lda {
                    weights: w.iter().copied().collect(),
                    intercept,
                },
                usize::from(inv.ridged),
            )
        }
        ClassifierKind::Qda => {
            let c1 = invert_covariance(s1 / (n1 - 1) as f64, spec.ridge).map_err(|e| e.within("class 1"))?;
            let c2 = invert_covariance(s2 / (n2 - 1) as f64, spec.ridge).map_err(|e| e.within("class 2"))?;
            let ridged = usize::from(c1.ridged) + usize::from(c2.ridged);
            (
                Fit::Qda {
                    mean1,
                    mean2,
                    log_det_term: 0.5 * (c2.log_det - c1.log_det),
                    inv1: c1.inverse,
                    inv2: c2.inverse,
                },
                ridged,
            )
        }
    };

    let mean_score = |s: &Samples| s.rows().map(|x| fit.raw(x)).sum::<f64>() / s.len() as f64;
    let sign = if mean_score(train1) >= mean_score(train2) { 1.0 } else { -1.0 };
    Ok(TrainedClassifier {
        kind: spec.kind,
        dim: p,
        fit,
        sign,
        ridge_activations,
    })
}

impl TrainedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Orientation applied to the raw discriminant (±1).
    pub fn orientation(&self) -> f64 {
        self.sign
    }

    /// LDA weight vector (oriented), `None` for QDA.
    pub fn lda_weights(&self) -> Option<Vec<f64>> {
        match &self.fit {
            Fit::Lda { weights, .. } => Some(weights.iter().map(|w| w * self.sign).collect()),
            Fit::Qda { .. } => None,
        }
    }

    pub fn score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::invalid(format!(
                "feature vector has {} entries, classifier expects {}",
                x.len(),
                self.dim
            )));
        }
        Ok(self.eval(x))
    }

    /// Predicted class (1 or 2) with the threshold at zero.
    pub fn predict(&self, x: &[f64]) -> Result<u8> {
        Ok(if self.score(x)? > 0.0 { 1 } else { 2 })
    }
}

impl Scorer for TrainedClassifier {
    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        self.sign * self.fit.raw(x)
    }

    fn ridge_activations(&self) -> usize {
        self.ridge_activations
    }
}

impl TrainingRule for ClassifierSpec {
    type Model = TrainedClassifier;

    fn fit(&self, train1: &Samples, train2: &Samples) -> Result<TrainedClassifier> {
        train(self, train1, train2)
    }
}
