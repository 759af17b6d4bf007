use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{CvEstimator, Population, StudyConfig, SCHEMA_VERSION};
use crate::adhoc::{var_cvkm, var_cvkr, AdhocForm, Var3Criterion};
use crate::auc::{empirical_auc, TieRule};
use crate::classifier::{train, ClassifierSpec};
use crate::data::{Samples, TwoClassDataset};
use crate::error::{Error, Result};
use crate::estimators::{auc_cvk, auc_cvkm, auc_cvkr, auc_cvn, CvAucResult, CvOptions};
use crate::influence::{if_partial_cvkr, if_sd_cvkm, if_sd_cvn_reduction};
use crate::resampling::{plan_cvk, plan_cvkm, plan_cvkr};
use crate::rng::{derive, stream, tag, StreamRng};

fn draw(rng: &mut StreamRng, n: usize, p: usize, mean: f64) -> Samples {
    let values = (0..n * p)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            mean + z
        })
        .collect();
    Samples::new(p, values).expect("finite draws")
}

/// Dataset `trial` of the study seeded with `seed`.
pub fn gaussian_dataset(pop: &Population, seed: u64, trial: u64) -> Result<TwoClassDataset> {
    pop.validate()?;
    let c = pop.shift()?;
    let mut rng = stream(seed, &[tag::DATASET, trial]);
    let class1 = draw(&mut rng, pop.n1, pop.p, 0.0);
    let class2 = draw(&mut rng, pop.n2, pop.p, c);
    TwoClassDataset::new(class1, class2)
}

pub fn generate_dataset(cfg: &StudyConfig, trial: u64) -> Result<TwoClassDataset> {
    gaussian_dataset(&cfg.population(), cfg.seed, trial)
}

/// AUC of the classifier trained on `data`, measured on a fresh sample of
/// `test_n` observations per class.
pub fn conditional_auc(
    spec: &ClassifierSpec,
    data: &TwoClassDataset,
    pop: &Population,
    test_n: usize,
    seed: u64,
    trial: u64,
) -> Result<f64> {
    let model = train(spec, data.class1(), data.class2())?;
    let c = pop.shift()?;
    let mut rng = stream(seed, &[tag::TEST_SAMPLE, trial]);
    let t1 = draw(&mut rng, test_n, pop.p, 0.0);
    let t2 = draw(&mut rng, test_n, pop.p, c);
    let s1: Vec<f64> = t1.rows().map(|x| model.score(x)).collect::<Result<_>>()?;
    let s2: Vec<f64> = t2.rows().map(|x| model.score(x)).collect::<Result<_>>()?;
    empirical_auc(&s1, &s2)
}

/// One per-trial value, e.g. `("cvkm", "sd_if", 0.09)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialValue {
    pub estimator: String,
    pub quantity: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrialDiagnostics {
    pub trainings: usize,
    pub ridge_activations: usize,
    pub uncovered_pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub values: Vec<TrialValue>,
    pub diagnostics: TrialDiagnostics,
}

impl TrialOutcome {
    pub fn get(&self, estimator: &str, quantity: &str) -> Option<f64> {
        self.values
            .iter()
            .find(|v| v.estimator == estimator && v.quantity == quantity)
            .map(|v| v.value)
    }
}

struct Collector {
    values: Vec<TrialValue>,
    diagnostics: TrialDiagnostics,
}

impl Collector {
    fn push(&mut self, estimator: &str, quantity: &str, value: f64) {
        self.values.push(TrialValue {
            estimator: estimator.to_string(),
            quantity: quantity.to_string(),
            value,
        });
    }

    fn absorb(&mut self, r: &CvAucResult) {
        self.diagnostics.trainings += r.diagnostics.trainings;
        self.diagnostics.ridge_activations += r.diagnostics.ridge_activations;
        self.diagnostics.uncovered_pairs += r.diagnostics.uncovered_pairs;
    }

    /// Ad-hoc SEs of every form the fold AUCs support, averaged over repetitions.
    fn adhoc(&mut self, name: &str, r: &CvAucResult) -> Result<()> {
        let forms = [
            ("sd_var1", AdhocForm::Var1),
            ("sd_var2", AdhocForm::Var2),
            ("sd_var3", AdhocForm::Var3(Var3Criterion::Unbiased)),
        ];
        for (label, form) in forms {
            let usable = r.per_rep.iter().all(|rep| match form {
                AdhocForm::Var2 => rep.matched.is_some(),
                _ => rep.pairs.is_some(),
            });
            if usable {
                self.push(name, label, var_cvkr(&r.per_rep, form)?.sqrt());
            }
        }
        Ok(())
    }
}

/// All estimates and SE estimates for one simulated dataset.
pub fn run_trial(cfg: &StudyConfig, trial: u64) -> Result<TrialOutcome> {
    let data = generate_dataset(cfg, trial)?;
    let pop = cfg.population();
    let (n1, n2, k) = (cfg.n1, cfg.n2, cfg.k);
    let options = CvOptions {
        ties: TieRule::new(cfg.tie_tolerance)?,
        zero_den: cfg.zero_den,
    };
    let spec = &cfg.classifier;
    let mut out = Collector {
        values: Vec::new(),
        diagnostics: TrialDiagnostics::default(),
    };
    if cfg.true_auc_test_n > 0 {
        let auc = conditional_auc(spec, &data, &pop, cfg.true_auc_test_n, cfg.seed, trial)?;
        out.push("population", "auc", auc);
    }
    for &est in &cfg.estimators {
        let name = est.name();
        let plan_seed = derive(cfg.seed, &[tag::PLAN, trial, est.code()]);
        let context = |e: Error| e.within(format!("trial {trial}, {name}"));
        match est {
            CvEstimator::Cvn => {
                let r = auc_cvn(&data, spec, &options).map_err(context)?;
                out.absorb(&r);
                out.push(name, "auc", r.auc);
                out.push(name, "sd_if", if_sd_cvn_reduction(&r.per_obs_auc1, &r.per_obs_auc2, r.auc)?);
            }
            CvEstimator::Cvk => {
                let plan = plan_cvk(n1, n2, k, k, plan_seed, cfg.remainder)?;
                let r = auc_cvk(&data, spec, &plan, cfg.pairing, &options).map_err(context)?;
                out.absorb(&r);
                out.push(name, "auc", r.auc);
                out.adhoc(name, &r)?;
            }
            CvEstimator::Cvkr => {
                let plan = plan_cvkr(n1, n2, k, cfg.r, plan_seed, cfg.remainder)?;
                let r = auc_cvkr(&data, spec, &plan, cfg.pairing, &options).map_err(context)?;
                out.absorb(&r);
                out.push(name, "auc", r.auc);
                out.adhoc(name, &r)?;
                out.push(name, "sd_if_i", if_partial_cvkr(&r, &plan)?.sd_first_term);
            }
            CvEstimator::Cvkm => {
                let plan = plan_cvkm(n1, n2, k, cfg.m, plan_seed, cfg.remainder)?;
                let r = auc_cvkm(&data, spec, &plan, &options).map_err(context)?;
                out.absorb(&r);
                out.push(name, "auc", r.auc);
                let inf = if_sd_cvkm(&r, &plan).map_err(context)?;
                out.push(name, "sd_if", inf.sd);
                out.push(name, "sd_if_i", inf.sd_first_term);
                let (k1, k2) = (plan.k1(), plan.k2());
                out.push(name, "sd_adhoc", var_cvkm(&r.auc_11m, k1, k2)?.sqrt());
            }
        }
    }
    Ok(TrialOutcome {
        trial,
        values: out.values,
        diagnostics: out.diagnostics,
    })
}

/// Summary of one SE estimator across trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    /// `mean − true SD`.
    pub bias: f64,
    /// `√(bias² + sd²)`.
    pub rms: f64,
    pub norm_mean: f64,
    pub norm_bias: f64,
    pub norm_sd: f64,
    pub norm_rms: f64,
    /// Monte-Carlo SE of `mean`.
    pub mean_mc_se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSummary {
    pub estimator: String,
    pub mean_auc: f64,
    pub mean_auc_mc_se: f64,
    /// SD of the point estimate across trials: the estimand of every SE estimator.
    pub true_sd: f64,
    pub true_sd_mc_se: f64,
    pub se: Vec<SeSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub schema_version: u32,
    /// The configuration with every default resolved.
    pub config: StudyConfig,
    pub trials: usize,
    pub failed_trials: usize,
    /// Mean conditional AUC of the classifier trained on the full dataset.
    pub mean_true_auc: Option<f64>,
    pub estimators: Vec<EstimatorSummary>,
    pub diagnostics: TrialDiagnostics,
    pub failures: Vec<String>,
}

impl StudyReport {
    pub fn estimator(&self, name: &str) -> Option<&EstimatorSummary> {
        self.estimators.iter().find(|e| e.estimator == name)
    }

    pub fn se(&self, estimator: &str, name: &str) -> Option<&SeSummary> {
        self.estimator(estimator)?.se.iter().find(|s| s.name == name)
    }
}

pub struct StudyRun {
    pub report: StudyReport,
    pub trials: Vec<TrialOutcome>,
}

/// Mean and sample SD (divisor n − 1).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
    (mean, if values.len() > 1 { (ss / (n - 1.0)).sqrt() } else { 0.0 })
}

fn summarize_se(name: &str, values: &[f64], true_sd: f64) -> SeSummary {
    let (mean, sd) = mean_sd(values);
    let bias = mean - true_sd;
    let rms = (bias * bias + sd * sd).sqrt();
    SeSummary {
        name: name.to_string(),
        mean,
        sd,
        bias,
        rms,
        norm_mean: mean / true_sd,
        norm_bias: bias / true_sd,
        norm_sd: sd / true_sd,
        norm_rms: rms / true_sd,
        mean_mc_se: sd / (values.len() as f64).sqrt(),
    }
}

/// Aggregate per-trial outcomes, in trial order, into a report.
pub fn summarize(cfg: &StudyConfig, trials: &[TrialOutcome], failures: Vec<String>) -> Result<StudyReport> {
    let n = trials.len();
    if n < 2 {
        return Err(Error::invalid("need at least two successful trials to summarize"));
    }
    let column = |est: &str, q: &str| -> Option<Vec<f64>> { trials.iter().map(|t| t.get(est, q)).collect() };
    let mut estimators = Vec::new();
    for est in &cfg.estimators {
        let name = est.name();
        let aucs = column(name, "auc").ok_or_else(|| Error::invalid(format!("missing {name} estimates")))?;
        let (mean_auc, true_sd) = mean_sd(&aucs);
        let mut quantities: Vec<&str> = Vec::new();
        for v in &trials[0].values {
            if v.estimator == name && v.quantity != "auc" && !quantities.contains(&v.quantity.as_str()) {
                quantities.push(&v.quantity);
            }
        }
        let se = quantities
            .into_iter()
            .filter_map(|q| column(name, q).map(|vals| summarize_se(q, &vals, true_sd)))
            .collect();
        estimators.push(EstimatorSummary {
            estimator: name.to_string(),
            mean_auc,
            mean_auc_mc_se: true_sd / (n as f64).sqrt(),
            true_sd,
            true_sd_mc_se: true_sd / (2.0 * (n as f64 - 1.0)).sqrt(),
            se,
        });
    }
    let mean_true_auc = column("population", "auc").map(|v| mean_sd(&v).0);
    let mut diagnostics = TrialDiagnostics::default();
    for t in trials {
        diagnostics.trainings += t.diagnostics.trainings;
        diagnostics.ridge_activations += t.diagnostics.ridge_activations;
        diagnostics.uncovered_pairs += t.diagnostics.uncovered_pairs;
    }
    Ok(StudyReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.resolved()?,
        trials: n,
        failed_trials: failures.len(),
        mean_true_auc,
        estimators,
        diagnostics,
        failures,
    })
}

/// Largest tolerated share of failed trials.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// Run every trial (in parallel when `workers != 1`) and summarize them.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyRun> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let results: Vec<Result<TrialOutcome>> =
        pool.install(|| (0..cfg.n_mc as u64).into_par_iter().map(|t| run_trial(cfg, t)).collect());
    let mut trials = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Ok(o) => trials.push(o),
            Err(e @ (Error::InvalidInput(_) | Error::Io(_) | Error::Json(_))) => return Err(e),
            Err(e) => failures.push(format!("trial {t}: {e}")),
        }
    }
    if failures.len() as f64 > MAX_FAILURE_RATE * cfg.n_mc as f64 {
        return Err(Error::StudyAborted {
            failed: failures.len(),
            trials: cfg.n_mc,
            first: failures[0].clone(),
        });
    }
    let report = summarize(cfg, &trials, failures)?;
    Ok(StudyRun { report, trials })
}
