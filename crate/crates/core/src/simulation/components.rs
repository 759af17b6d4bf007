//! Monte-Carlo estimates of the covariance structure of K-fold losses.
//!
//! Fold maps are fixed (canonical) across trials, so observation `a` of every
//! simulated dataset has the same fold, and moments are taken across trials.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ComponentsConfig;
use super::study::{gaussian_dataset, mean_sd};
use crate::adhoc::{expected_naive_bias, naive_var_err_cvk, var_decomposition, CovarianceComponents};
use crate::classifier::TrainingRule;
use crate::error::{Error, Result};
use crate::estimators::err_cvk;
use crate::fold::{FoldMap, Remainder};
use crate::resampling::{CvMode, FoldPlan, Repetition};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentsReport {
    pub components: CovarianceComponents,
    /// Pooled sample size and pooled fold size.
    pub n: usize,
    pub n_k: usize,
    pub k: usize,
    pub n_mc: usize,
    pub mean_err: f64,
    /// Sample variance of the K-fold error rate across trials.
    pub mc_var: f64,
    pub mc_var_se: f64,
    pub mean_naive_var: f64,
    pub mean_naive_var_se: f64,
    /// `mean(naive) − mc_var`.
    pub observed_bias: f64,
    pub observed_bias_se: f64,
    /// `−γ̂`.
    pub predicted_bias: f64,
    /// `observed_bias − predicted_bias` and its Monte-Carlo SE.
    pub bias_gap: f64,
    pub bias_gap_se: f64,
    /// `σ̂²/n + (n_K − 1)ω̂/n + (n − n_K)γ̂/n`.
    pub reconstruction: f64,
    pub reconstruction_se: f64,
}

struct TrialMoments {
    err: f64,
    naive: f64,
    losses: Vec<f64>,
}

fn canonical_plan(n1: usize, n2: usize, k: usize) -> Result<FoldPlan> {
    Ok(FoldPlan {
        mode: CvMode::Cvk,
        seed: None,
        remainder: Remainder::Reject,
        reps: vec![Repetition {
            class1: FoldMap::canonical(n1, k)?,
            class2: FoldMap::canonical(n2, k)?,
        }],
    })
}

/// Per-trial K-fold losses for `rule`.
fn collect<R: TrainingRule>(cfg: &ComponentsConfig, rule: &R) -> Result<(Vec<usize>, Vec<TrialMoments>)> {
    cfg.validate()?;
    let pop = cfg.population();
    let plan = canonical_plan(cfg.n1, cfg.n2, cfg.k)?;
    let rep = &plan.reps[0];
    let folds: Vec<usize> = rep.class1.assignment().iter().chain(rep.class2.assignment()).copied().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let trials: Result<Vec<TrialMoments>> = pool.install(|| {
        (0..cfg.n_mc as u64)
            .into_par_iter()
            .map(|t| {
                let data = gaussian_dataset(&pop, cfg.seed, t)?;
                let e = err_cvk(&data, rule, &plan).map_err(|e| e.within(format!("trial {t}")))?;
                Ok(TrialMoments {
                    err: e.err,
                    naive: naive_var_err_cvk(&e.fold_errors)?,
                    losses: e.pooled_errors(),
                })
            })
            .collect()
    });
    Ok((folds, trials?))
}

/// Per-trial centred second moments, scaled so their averages are sample covariances.
struct Centred {
    sigma2: Vec<f64>,
    omega: Vec<f64>,
    gamma: Vec<f64>,
    var: Vec<f64>,
}

fn centred(folds: &[usize], k: usize, trials: &[TrialMoments]) -> Centred {
    let n = folds.len();
    let t = trials.len() as f64;
    let scale = t / (t - 1.0);
    let mut mean = vec![0.0; n];
    for tr in trials {
        mean.iter_mut().zip(&tr.losses).for_each(|(m, e)| *m += e / t);
    }
    let mean_err = trials.iter().map(|tr| tr.err).sum::<f64>() / t;
    let mut sizes = vec![0usize; k];
    folds.iter().for_each(|&f| sizes[f] += 1);
    let same_pairs: usize = sizes.iter().map(|s| s * (s - 1)).sum();
    let cross_pairs = n * n - sizes.iter().map(|s| s * s).sum::<usize>();
    let mut out = Centred {
        sigma2: Vec::new(),
        omega: Vec::new(),
        gamma: Vec::new(),
        var: Vec::new(),
    };
    for tr in trials {
        let d: Vec<f64> = tr.losses.iter().zip(&mean).map(|(e, m)| e - m).collect();
        let total: f64 = d.iter().sum();
        let squares: f64 = d.iter().map(|v| v * v).sum();
        let mut by_fold = vec![0.0; k];
        d.iter().zip(folds).for_each(|(v, &f)| by_fold[f] += v);
        let within: f64 = by_fold.iter().map(|v| v * v).sum();
        out.sigma2.push(scale * squares / n as f64);
        out.omega.push(scale * (within - squares) / same_pairs as f64);
        out.gamma.push(scale * (total * total - within) / cross_pairs as f64);
        out.var.push(scale * (tr.err - mean_err).powi(2));
    }
    out
}

fn se(values: &[f64]) -> f64 {
    mean_sd(values).1 / (values.len() as f64).sqrt()
}

/// Estimate σ², ω, γ of the pooled K-fold losses and check the naive-variance bias.
pub fn estimate_components_with<R: TrainingRule>(cfg: &ComponentsConfig, rule: &R) -> Result<ComponentsReport> {
    let (folds, trials) = collect(cfg, rule)?;
    let c = centred(&folds, cfg.k, &trials);
    let n = folds.len();
    let n_k = n / cfg.k;
    let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let mu = avg(&trials.iter().map(|t| t.losses.iter().sum::<f64>() / n as f64).collect::<Vec<_>>());
    let components = CovarianceComponents {
        sigma2: avg(&c.sigma2),
        omega: avg(&c.omega),
        gamma: avg(&c.gamma),
        mu,
    };
    let naive: Vec<f64> = trials.iter().map(|t| t.naive).collect();
    let diff: Vec<f64> = naive.iter().zip(&c.var).map(|(a, b)| a - b).collect();
    let gap: Vec<f64> = diff.iter().zip(&c.gamma).map(|(d, g)| d + g).collect();
    let mc_var = avg(&c.var);
    let mean_naive_var = avg(&naive);
    Ok(ComponentsReport {
        components,
        n,
        n_k,
        k: cfg.k,
        n_mc: trials.len(),
        mean_err: avg(&trials.iter().map(|t| t.err).collect::<Vec<_>>()),
        mc_var,
        mc_var_se: se(&c.var),
        mean_naive_var,
        mean_naive_var_se: se(&naive),
        observed_bias: mean_naive_var - mc_var,
        observed_bias_se: se(&diff),
        predicted_bias: expected_naive_bias(&components),
        bias_gap: avg(&gap),
        bias_gap_se: se(&gap),
        reconstruction: var_decomposition(&components, n, n_k)?,
        // per trial, σ_t/n + (n_K−1)ω_t/n + (n−n_K)γ_t/n is the centred squared total
        reconstruction_se: se(&c.var),
    })
}

pub fn estimate_components(cfg: &ComponentsConfig) -> Result<ComponentsReport> {
    estimate_components_with(cfg, &cfg.classifier)
}

/// Sample variance of the K-fold error rate from an independent set of trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McVariance {
    pub mean_err: f64,
    pub var: f64,
    pub var_se: f64,
}

pub fn mc_variance_err_cvk<R: TrainingRule>(cfg: &ComponentsConfig, rule: &R) -> Result<McVariance> {
    let (_, trials) = collect(cfg, rule)?;
    let errs: Vec<f64> = trials.iter().map(|t| t.err).collect();
    let (mean_err, sd) = mean_sd(&errs);
    let t = errs.len() as f64;
    let v: Vec<f64> = errs.iter().map(|e| (e - mean_err).powi(2) * t / (t - 1.0)).collect();
    Ok(McVariance {
        mean_err,
        var: sd * sd,
        var_se: se(&v),
    })
}

/// `C(n, n/2) / nⁿ`, evaluated in log space.
pub fn permutation_ratio(n: usize) -> Result<f64> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::invalid(format!("n must be positive and even, got {n}")));
    }
    let ln = statrs::function::factorial::ln_binomial(n as u64, n as u64 / 2) - n as f64 * (n as f64).ln();
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::config::SCHEMA_VERSION;
    use crate::testkit::FirstCoordinate;

    fn cfg(n: usize, k: usize, n_mc: usize, seed: u64) -> ComponentsConfig {
        ComponentsConfig {
            schema_version: SCHEMA_VERSION,
            n1: n,
            n2: n,
            p: 2,
            c: Some(0.8),
            bayes_auc: None,
            classifier: crate::classifier::ClassifierSpec::lda(),
            k,
            n_mc,
            seed,
            workers: 1,
        }
    }

    #[test]
    fn permutation_ratios() {
        assert!((permutation_ratio(2).unwrap() - 0.5).abs() < 1e-12);
        assert!((permutation_ratio(4).unwrap() - 6.0 / 256.0).abs() < 1e-12);
        let r: Vec<f64> = (1..=20).map(|h| permutation_ratio(2 * h).unwrap()).collect();
        assert!(r.windows(2).all(|w| w[1] < w[0]));
        assert!(permutation_ratio(3).is_err());
    }

    #[test]
    fn moments_match_covariance_matrix() {
        let c = cfg(10, 5, 40, 3);
        let (folds, trials) = collect(&c, &c.classifier).unwrap();
        let got = centred(&folds, 5, &trials);
        // explicit sample covariance matrix
        let n = folds.len();
        let t = trials.len() as f64;
        let mean: Vec<f64> = (0..n).map(|a| trials.iter().map(|tr| tr.losses[a]).sum::<f64>() / t).collect();
        let cov = |a: usize, b: usize| {
            trials
                .iter()
                .map(|tr| (tr.losses[a] - mean[a]) * (tr.losses[b] - mean[b]))
                .sum::<f64>()
                / (t - 1.0)
        };
        let (mut s, mut w, mut g, mut nw, mut ng) = (0.0, 0.0, 0.0, 0, 0);
        for a in 0..n {
            s += cov(a, a);
            for b in 0..n {
                if a == b {
                    continue;
                }
                if folds[a] == folds[b] {
                    w += cov(a, b);
                    nw += 1;
                } else {
                    g += cov(a, b);
                    ng += 1;
                }
            }
        }
        let avg = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!((avg(&got.sigma2) - s / n as f64).abs() < 1e-12);
        assert!((avg(&got.omega) - w / nw as f64).abs() < 1e-12);
        assert!((avg(&got.gamma) - g / ng as f64).abs() < 1e-12);
        // the decomposition reproduces the sample variance of the same trials
        let comp = CovarianceComponents {
            sigma2: avg(&got.sigma2),
            omega: avg(&got.omega),
            gamma: avg(&got.gamma),
            mu: 0.0,
        };
        let recon = var_decomposition(&comp, n, n / 5).unwrap();
        assert!((recon - avg(&got.var)).abs() < 1e-12);
    }

    #[test]
    fn fixed_rule_has_no_fold_covariance() {
        let c = cfg(10, 5, 400, 4);
        let r = estimate_components_with(&c, &FirstCoordinate).unwrap();
        let s = r.components.sigma2;
        assert!(s > 0.1);
        // one pair's covariance has SE ≈ σ²/20 at 400 trials; ω averages 30 pairs, γ 160
        assert!(r.components.omega.abs() < 0.05 * s, "{:?}", r.components);
        assert!(r.components.gamma.abs() < 0.03 * s, "{:?}", r.components);
    }
}
