use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::classifier::ClassifierSpec;
use crate::error::{Error, Result};
use crate::estimators::{Pairing, ZeroDenPolicy};
use crate::fold::Remainder;

pub const SCHEMA_VERSION: u32 = 1;

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_m() -> usize {
    200
}

fn default_r() -> usize {
    200
}

fn default_n_mc() -> usize {
    500
}

fn default_estimators() -> Vec<CvEstimator> {
    vec![CvEstimator::Cvkm, CvEstimator::Cvkr]
}

fn default_zero_den() -> ZeroDenPolicy {
    ZeroDenPolicy::Skip
}

fn default_test_n() -> usize {
    2000
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// `Φ(c·√p/√2)`: AUC of the optimal rule between N(0, I) and N(c·1, I).
pub fn bayes_auc(c: f64, p: usize) -> f64 {
    standard_normal().cdf(c * (p as f64).sqrt() / std::f64::consts::SQRT_2)
}

/// Mean shift `c` giving the requested optimal AUC.
pub fn shift_for_bayes_auc(auc: f64, p: usize) -> Result<f64> {
    if !(0.5..1.0).contains(&auc) || p == 0 {
        return Err(Error::invalid(format!("need 0.5 <= AUC < 1 and p >= 1, got {auc}, {p}")));
    }
    let normal = standard_normal();
    let mut z = normal.inverse_cdf(auc);
    // polish the quantile with Newton steps
    for _ in 0..3 {
        z -= (normal.cdf(z) - auc) / normal.pdf(z);
    }
    Ok(std::f64::consts::SQRT_2 * z / (p as f64).sqrt())
}

/// Default separation: Bayes AUC ≈ 0.80.
pub fn default_shift(p: usize) -> f64 {
    1.19 / (p as f64).sqrt()
}

/// Population: class 1 ~ N(0, I_p), class 2 ~ N(c·1, I_p).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Population {
    pub n1: usize,
    pub n2: usize,
    pub p: usize,
    /// Mean shift; when absent it is derived from `bayes_auc`, or defaults to `1.19/√p`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bayes_auc: Option<f64>,
}

impl Population {
    pub fn shift(&self) -> Result<f64> {
        match (self.c, self.bayes_auc) {
            (Some(c), Some(a)) if (bayes_auc(c, self.p) - a).abs() < 1e-9 => Ok(c),
            (Some(_), Some(_)) => Err(Error::invalid("c and bayes_auc disagree; give only one")),
            (Some(c), None) if c >= 0.0 && c.is_finite() => Ok(c),
            (Some(c), None) => Err(Error::invalid(format!("c must be finite and >= 0, got {c}"))),
            (None, Some(a)) => shift_for_bayes_auc(a, self.p),
            (None, None) => Ok(default_shift(self.p)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 < 2 || self.n2 < 2 || self.p == 0 {
            return Err(Error::invalid("need n1, n2 >= 2 and p >= 1"));
        }
        self.shift().map(|_| ())
    }

    /// Copy with `c` filled in and `bayes_auc` set to the value it implies.
    pub fn resolved(&self) -> Result<Self> {
        let c = self.shift()?;
        Ok(Population {
            c: Some(c),
            bayes_auc: Some(bayes_auc(c, self.p)),
            ..self.clone()
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvEstimator {
    Cvn,
    Cvk,
    Cvkr,
    Cvkm,
}

impl CvEstimator {
    pub fn name(self) -> &'static str {
        match self {
            CvEstimator::Cvn => "cvn",
            CvEstimator::Cvk => "cvk",
            CvEstimator::Cvkr => "cvkr",
            CvEstimator::Cvkm => "cvkm",
        }
    }

    pub(crate) fn code(self) -> u64 {
        self as u64
    }
}

/// One cell of a Monte-Carlo study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub n1: usize,
    pub n2: usize,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bayes_auc: Option<f64>,
    #[serde(default = "ClassifierSpec::lda")]
    pub classifier: ClassifierSpec,
    /// Folds per class.
    pub k: usize,
    /// Monte-Carlo CV repetitions.
    #[serde(default = "default_m")]
    pub m: usize,
    /// Repeated K-fold repetitions.
    #[serde(default = "default_r")]
    pub r: usize,
    /// Simulated datasets.
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<CvEstimator>,
    #[serde(default)]
    pub pairing: Pairing,
    #[serde(default = "default_zero_den")]
    pub zero_den: ZeroDenPolicy,
    #[serde(default)]
    pub tie_tolerance: f64,
    #[serde(default)]
    pub remainder: Remainder,
    /// Per-class test-sample size for the conditional AUC of the classifier
    /// trained on the whole dataset; 0 disables it.
    #[serde(default = "default_test_n")]
    pub true_auc_test_n: usize,
    /// Worker threads, 0 = one per core.
    #[serde(default)]
    pub workers: usize,
}

impl StudyConfig {
    pub fn new(population: Population, k: usize) -> Self {
        StudyConfig {
            schema_version: SCHEMA_VERSION,
            n1: population.n1,
            n2: population.n2,
            p: population.p,
            c: population.c,
            bayes_auc: population.bayes_auc,
            classifier: ClassifierSpec::lda(),
            k,
            m: default_m(),
            r: default_r(),
            n_mc: default_n_mc(),
            seed: 0,
            estimators: default_estimators(),
            pairing: Pairing::default(),
            zero_den: default_zero_den(),
            tie_tolerance: 0.0,
            remainder: Remainder::default(),
            true_auc_test_n: default_test_n(),
            workers: 0,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: StudyConfig = serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        self.population().validate()?;
        self.classifier.validate()?;
        if self.k < 2 || self.m == 0 || self.r == 0 || self.n_mc < 2 {
            return Err(Error::invalid("need k >= 2, m >= 1, r >= 1 and n_mc >= 2"));
        }
        if self.k > self.n1 || self.k > self.n2 {
            return Err(Error::invalid("k exceeds a class size"));
        }
        if self.estimators.is_empty() {
            return Err(Error::invalid("no estimators selected"));
        }
        if !(self.tie_tolerance >= 0.0) {
            return Err(Error::invalid("tie_tolerance must be >= 0"));
        }
        Ok(())
    }

    /// Copy with every derived default filled in, for echoing into outputs.
    pub fn resolved(&self) -> Result<Self> {
        self.validate()?;
        let pop = self.population().resolved()?;
        Ok(StudyConfig {
            c: pop.c,
            bayes_auc: pop.bayes_auc,
            ..self.clone()
        })
    }

    pub fn population(&self) -> Population {
        Population {
            n1: self.n1,
            n2: self.n2,
            p: self.p,
            c: self.c,
            bayes_auc: self.bayes_auc,
        }
    }
}

/// Setup for the covariance-component study of the K-fold error rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentsConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub n1: usize,
    pub n2: usize,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bayes_auc: Option<f64>,
    #[serde(default = "ClassifierSpec::lda")]
    pub classifier: ClassifierSpec,
    pub k: usize,
    #[serde(default = "default_n_mc")]
    pub n_mc: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub workers: usize,
}

impl ComponentsConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ComponentsConfig = serde_json::from_str(text).map_err(|e| Error::invalid(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!("unsupported schema_version {}", self.schema_version)));
        }
        self.population().validate()?;
        self.classifier.validate()?;
        let (n1, n2) = (self.n1, self.n2);
        if self.k < 2 || n1 % self.k != 0 || n2 % self.k != 0 {
            return Err(Error::invalid(format!("k = {} must be >= 2 and divide n1 and n2", self.k)));
        }
        if self.n_mc < 3 {
            return Err(Error::invalid("need n_mc >= 3"));
        }
        Ok(())
    }

    pub fn population(&self) -> Population {
        Population {
            n1: self.n1,
            n2: self.n2,
            p: self.p,
            c: self.c,
            bayes_auc: self.bayes_auc,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_round_trip() {
        let c = shift_for_bayes_auc(0.84, 2).unwrap();
        assert!((c - 0.9945).abs() < 1e-3, "{c}");
        assert!((bayes_auc(c, 2) - 0.84).abs() < 1e-12);
        assert!((bayes_auc(default_shift(4), 4) - 0.80).abs() < 0.002);
        assert_eq!(bayes_auc(0.0, 3), 0.5);
    }

    #[test]
    fn config_defaults_and_validation() {
        let cfg = StudyConfig::from_json(r#"{"n1": 10, "n2": 10, "p": 2, "k": 5}"#).unwrap();
        assert_eq!(cfg.m, 200);
        assert_eq!(cfg.n_mc, 500);
        assert_eq!(cfg.zero_den, ZeroDenPolicy::Skip);
        let r = cfg.resolved().unwrap();
        assert!((r.c.unwrap() - 1.19 / 2f64.sqrt()).abs() < 1e-15);
        assert!(StudyConfig::from_json(r#"{"n1": 10, "n2": 10, "p": 2, "k": 5, "bogus": 1}"#).is_err());
        assert!(StudyConfig::from_json(r#"{"n1": 10, "n2": 10, "p": 2, "k": 11}"#).is_err());
        assert!(StudyConfig::from_json(r#"{"n1": 10, "n2": 10, "p": 2, "k": 5, "c": -1}"#).is_err());
        assert!(StudyConfig::from_json(r#"{"n1": 10, "n2": 10, "p": 2, "k": 5, "c": 1, "bayes_auc": 0.8}"#).is_err());
        let echoed = serde_json::to_string(&r).unwrap();
        assert_eq!(StudyConfig::from_json(&echoed).unwrap(), r);
    }
}
