//! Cross-validation estimators of the AUC and of the error rate.
//!
//! Every estimator evaluates a [`FoldPlan`] with a [`TrainingRule`]. A pair
//! `(x_i, y_j)` is always scored by a classifier trained without the folds of
//! both observations. For the Monte-Carlo variant only fold 0 of each class is
//! tested, and each pair is averaged over the repetitions in which both of its
//! observations were tested.

use serde::{Deserialize, Serialize};

use crate::auc::{PairwiseAucTable, TieRule};
use crate::classifier::{Scorer, TrainingRule};
use crate::data::{Samples, TwoClassDataset};
use crate::error::{Error, Result};
use crate::fold::FoldMap;
use crate::grid::Grid;
use crate::resampling::{plan_cvn, CvMode, FoldPlan};

/// Which fold pairs are used when both classes are folded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    /// Every `(k1, k2)` pair; `K1·K2` classifiers per repetition.
    #[default]
    Full,
    /// Only `k1 = k2`; `K` classifiers per repetition.
    Matched,
}

/// Handling of Monte-Carlo pairs that never share a test fold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroDenPolicy {
    #[default]
    Strict,
    /// Average over covered pairs only.
    Skip,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    #[serde(default)]
    pub ties: TieRule,
    #[serde(default)]
    pub zero_den: ZeroDenPolicy,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub trainings: usize,
    pub ridge_activations: usize,
    pub uncovered_pairs: usize,
    pub valid_pairs: usize,
}

/// Per-repetition classifier scores and test indicators.
///
/// `scores1[(m, i)]` is the score of `x_i` in repetition `m` and is NaN when
/// `x_i` was not tested there (`ind1[(m, i)] == false`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionScores {
    pub scores1: Grid<f64>,
    pub scores2: Grid<f64>,
    pub ind1: Grid<bool>,
    pub ind2: Grid<bool>,
}

impl RepetitionScores {
    fn new(reps: usize, n1: usize, n2: usize) -> Self {
        RepetitionScores {
            scores1: Grid::filled(reps, n1, f64::NAN),
            scores2: Grid::filled(reps, n2, f64::NAN),
            ind1: Grid::filled(reps, n1, false),
            ind2: Grid::filled(reps, n2, false),
        }
    }

    pub fn reps(&self) -> usize {
        self.scores1.rows()
    }
}

/// Fold-level AUCs of one K-fold repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldAucs {
    /// `AUC_{k1 k2}` (full pairing only).
    pub pairs: Option<Grid<f64>>,
    /// `AUC_k` for matched folds (full pairing with `K1 = K2`, or matched pairing).
    pub matched: Option<Vec<f64>>,
    /// This repetition's estimate.
    pub auc: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvAucResult {
    pub mode: CvMode,
    pub pairing: Option<Pairing>,
    pub auc: f64,
    /// Per-repetition fold AUCs (K-fold variants).
    pub per_rep: Vec<FoldAucs>,
    /// `AUC_{1i}`: class-1 observation `i` against all of class 2.
    pub per_obs_auc1: Vec<f64>,
    /// Class-2 analogue, `AUC_{2j}`.
    pub per_obs_auc2: Vec<f64>,
    /// Pair table (Monte-Carlo only).
    pub table: Option<PairwiseAucTable>,
    /// AUC of the single test-fold pair of each Monte-Carlo repetition.
    pub auc_11m: Vec<f64>,
    pub reps: Option<RepetitionScores>,
    pub options: CvOptions,
    pub diagnostics: Diagnostics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvErrResult {
    pub err: f64,
    /// Zero-one loss of every class-1 observation.
    pub errors1: Vec<f64>,
    pub errors2: Vec<f64>,
    /// `err_k`, the error rate of fold `k` (both classes pooled).
    pub fold_errors: Vec<f64>,
    pub diagnostics: Diagnostics,
}

impl CvErrResult {
    /// Losses of all observations, class 1 first.
    pub fn pooled_errors(&self) -> Vec<f64> {
        self.errors1.iter().chain(&self.errors2).copied().collect()
    }
}

fn without_fold(samples: &Samples, map: &FoldMap, fold: usize) -> Samples {
    samples.filter(|i| map.fold_of(i) != fold)
}

struct Trainer<'a, R: TrainingRule> {
    rule: &'a R,
    data: &'a TwoClassDataset,
    diagnostics: Diagnostics,
}

impl<'a, R: TrainingRule> Trainer<'a, R> {
    fn new(rule: &'a R, data: &'a TwoClassDataset) -> Self {
        Trainer {
            rule,
            data,
            diagnostics: Diagnostics::default(),
        }
    }

    fn fit(&mut self, map1: &FoldMap, k1: usize, map2: &FoldMap, k2: usize, rep: usize) -> Result<R::Model> {
        let train1 = without_fold(self.data.class1(), map1, k1);
        let train2 = without_fold(self.data.class2(), map2, k2);
        let model = self
            .rule
            .fit(&train1, &train2)
            .map_err(|e| e.within(format!("repetition {rep}, excluded folds ({k1}, {k2})")))?;
        self.diagnostics.trainings += 1;
        self.diagnostics.ridge_activations += model.ridge_activations();
        Ok(model)
    }
}

fn check_plan(data: &TwoClassDataset, plan: &FoldPlan, modes: &[CvMode]) -> Result<()> {
    plan.validate()?;
    if !modes.contains(&plan.mode) {
        return Err(Error::invalid(format!("expected a {modes:?} plan, got {}", plan.mode)));
    }
    if plan.n1() != data.n1() || plan.n2() != data.n2() {
        return Err(Error::invalid(format!(
            "plan is for {}+{} observations, data has {}+{}",
            plan.n1(),
            plan.n2(),
            data.n1(),
            data.n2()
        )));
    }
    Ok(())
}

/// One K-fold repetition: fold AUCs plus per-observation ψ sums.
struct RepKernel {
    folds: FoldAucs,
    obs1: Vec<f64>,
    obs2: Vec<f64>,
}

fn kfold_repetition<R: TrainingRule>(
    trainer: &mut Trainer<'_, R>,
    plan: &FoldPlan,
    m: usize,
    pairing: Pairing,
    ties: TieRule,
    scores: Option<&mut RepetitionScores>,
) -> Result<RepKernel> {
    let data = trainer.data;
    let rep = &plan.reps[m];
    let (n1, n2) = (data.n1(), data.n2());
    let (k1s, k2s) = (rep.class1.folds(), rep.class2.folds());
    let members1: Vec<Vec<usize>> = (0..k1s).map(|k| rep.class1.members(k)).collect();
    let members2: Vec<Vec<usize>> = (0..k2s).map(|k| rep.class2.members(k)).collect();
    let mut obs1 = vec![0.0; n1];
    let mut obs2 = vec![0.0; n2];

    let score_block = |model: &R::Model, f1: &[usize], f2: &[usize]| -> (Vec<f64>, Vec<f64>) {
        (
            f1.iter().map(|&i| model.eval(data.class1().row(i))).collect(),
            f2.iter().map(|&j| model.eval(data.class2().row(j))).collect(),
        )
    };

    match pairing {
        Pairing::Full => {
            let mut pairs = Grid::filled(k1s, k2s, 0.0);
            let mut total = 0.0;
            for k1 in 0..k1s {
                for k2 in 0..k2s {
                    let model = trainer.fit(&rep.class1, k1, &rep.class2, k2, m)?;
                    let (s1, s2) = score_block(&model, &members1[k1], &members2[k2]);
                    let mut block = 0.0;
                    for (a, &i) in s1.iter().zip(&members1[k1]) {
                        for (b, &j) in s2.iter().zip(&members2[k2]) {
                            let v = ties.psi(*a, *b);
                            block += v;
                            obs1[i] += v;
                            obs2[j] += v;
                        }
                    }
                    pairs[(k1, k2)] = block / (s1.len() * s2.len()) as f64;
                    total += block;
                }
            }
            obs1.iter_mut().for_each(|v| *v /= n2 as f64);
            obs2.iter_mut().for_each(|v| *v /= n1 as f64);
            let matched = (k1s == k2s).then(|| (0..k1s).map(|k| pairs[(k, k)]).collect());
            Ok(RepKernel {
                folds: FoldAucs {
                    pairs: Some(pairs),
                    matched,
                    auc: total / (n1 * n2) as f64,
                },
                obs1,
                obs2,
            })
        }
        Pairing::Matched => {
            if k1s != k2s {
                return Err(Error::invalid(format!(
                    "matched pairing needs equal fold counts, got {k1s} and {k2s}"
                )));
            }
            let mut matched = Vec::with_capacity(k1s);
            let mut scores = scores;
            for k in 0..k1s {
                let model = trainer.fit(&rep.class1, k, &rep.class2, k, m)?;
                let (s1, s2) = score_block(&model, &members1[k], &members2[k]);
                let mut block = 0.0;
                for (a, &i) in s1.iter().zip(&members1[k]) {
                    for (b, &j) in s2.iter().zip(&members2[k]) {
                        let v = ties.psi(*a, *b);
                        block += v;
                        obs1[i] += v / s2.len() as f64;
                        obs2[j] += v / s1.len() as f64;
                    }
                }
                if let Some(sc) = scores.as_deref_mut() {
                    for (a, &i) in s1.iter().zip(&members1[k]) {
                        sc.scores1[(m, i)] = *a;
                        sc.ind1[(m, i)] = true;
                    }
                    for (b, &j) in s2.iter().zip(&members2[k]) {
                        sc.scores2[(m, j)] = *b;
                        sc.ind2[(m, j)] = true;
                    }
                }
                matched.push(block / (s1.len() * s2.len()) as f64);
            }
            let auc = matched.iter().sum::<f64>() / k1s as f64;
            Ok(RepKernel {
                folds: FoldAucs {
                    pairs: None,
                    matched: Some(matched),
                    auc,
                },
                obs1,
                obs2,
            })
        }
    }
}

fn kfold_estimate<R: TrainingRule>(
    data: &TwoClassDataset,
    rule: &R,
    plan: &FoldPlan,
    pairing: Pairing,
    options: &CvOptions,
) -> Result<CvAucResult> {
    let mut trainer = Trainer::new(rule, data);
    let reps = plan.len();
    let mut scores = (pairing == Pairing::Matched).then(|| RepetitionScores::new(reps, data.n1(), data.n2()));
    let mut per_rep = Vec::with_capacity(reps);
    let mut obs1 = vec![0.0; data.n1()];
    let mut obs2 = vec![0.0; data.n2()];
    for m in 0..reps {
        let kernel = kfold_repetition(&mut trainer, plan, m, pairing, options.ties, scores.as_mut())?;
        obs1.iter_mut().zip(&kernel.obs1).for_each(|(a, b)| *a += b);
        obs2.iter_mut().zip(&kernel.obs2).for_each(|(a, b)| *a += b);
        per_rep.push(kernel.folds);
    }
    obs1.iter_mut().for_each(|v| *v /= reps as f64);
    obs2.iter_mut().for_each(|v| *v /= reps as f64);
    let auc = per_rep.iter().map(|r| r.auc).sum::<f64>() / reps as f64;
    Ok(CvAucResult {
        mode: plan.mode,
        pairing: Some(pairing),
        auc,
        per_rep,
        per_obs_auc1: obs1,
        per_obs_auc2: obs2,
        table: None,
        auc_11m: Vec::new(),
        reps: scores,
        options: *options,
        diagnostics: trainer.diagnostics,
    })
}

/// Leave-one-out AUC: pair `(i, j)` is scored by a classifier trained
/// without both `x_i` and `y_j` (`n1·n2` trainings).
pub fn auc_cvn<R: TrainingRule>(data: &TwoClassDataset, rule: &R, options: &CvOptions) -> Result<CvAucResult> {
    let plan = plan_cvn(data.n1(), data.n2())?;
    kfold_estimate(data, rule, &plan, Pairing::Full, options)
}

/// Single K-fold AUC (also accepts a leave-one-out plan).
pub fn auc_cvk<R: TrainingRule>(
    data: &TwoClassDataset,
    rule: &R,
    plan: &FoldPlan,
    pairing: Pairing,
    options: &CvOptions,
) -> Result<CvAucResult> {
    check_plan(data, plan, &[CvMode::Cvk, CvMode::Cvn])?;
    kfold_estimate(data, rule, plan, pairing, options)
}

/// Repeated K-fold AUC: the average of the per-repetition K-fold estimates.
pub fn auc_cvkr<R: TrainingRule>(
    data: &TwoClassDataset,
    rule: &R,
    plan: &FoldPlan,
    pairing: Pairing,
    options: &CvOptions,
) -> Result<CvAucResult> {
    check_plan(data, plan, &[CvMode::Cvkr])?;
    kfold_estimate(data, rule, plan, pairing, options)
}

/// Smallest M for which the expected number of uncovered pairs drops below 0.01.
pub(crate) fn suggested_reps(n1: usize, n2: usize, t1: usize, t2: usize) -> usize {
    let q = (t1 as f64 / n1 as f64) * (t2 as f64 / n2 as f64);
    if q >= 1.0 {
        return 1;
    }
    ((0.01 / (n1 * n2) as f64).ln() / (1.0 - q).ln()).ceil() as usize
}

/// Monte-Carlo K-fold AUC.
pub fn auc_cvkm<R: TrainingRule>(
    data: &TwoClassDataset,
    rule: &R,
    plan: &FoldPlan,
    options: &CvOptions,
) -> Result<CvAucResult> {
    check_plan(data, plan, &[CvMode::Cvkm])?;
    let (n1, n2) = (data.n1(), data.n2());
    let reps = plan.len();
    let ties = options.ties;
    let mut trainer = Trainer::new(rule, data);
    let mut table = PairwiseAucTable::zeros(n1, n2);
    let mut scores = RepetitionScores::new(reps, n1, n2);
    let mut auc_11m = Vec::with_capacity(reps);

    for (m, rep) in plan.reps.iter().enumerate() {
        let test1 = rep.class1.members(0);
        let test2 = rep.class2.members(0);
        let model = trainer.fit(&rep.class1, 0, &rep.class2, 0, m)?;
        for &i in &test1 {
            scores.scores1[(m, i)] = model.eval(data.class1().row(i));
            scores.ind1[(m, i)] = true;
        }
        for &j in &test2 {
            scores.scores2[(m, j)] = model.eval(data.class2().row(j));
            scores.ind2[(m, j)] = true;
        }
        let mut block = 0.0;
        for &i in &test1 {
            let a = scores.scores1[(m, i)];
            for &j in &test2 {
                let v = ties.psi(a, scores.scores2[(m, j)]);
                table.num[(i, j)] += v;
                table.den[(i, j)] += 1;
                block += v;
            }
        }
        auc_11m.push(block / (test1.len() * test2.len()) as f64);
    }

    let uncovered = table.uncovered();
    if uncovered > 0 && (options.zero_den == ZeroDenPolicy::Strict || uncovered == n1 * n2) {
        let first = (0..n1 * n2)
            .map(|k| (k / n2, k % n2))
            .find(|&(i, j)| table.den[(i, j)] == 0)
            .unwrap_or((0, 0));
        let rep = &plan.reps[0];
        return Err(Error::Coverage {
            uncovered,
            total: n1 * n2,
            first,
            suggested_m: suggested_reps(n1, n2, rep.class1.fold_size(0), rep.class2.fold_size(0)),
        });
    }

    let mut total = 0.0;
    let mut row_sum = vec![0.0; n1];
    let mut row_cnt = vec![0usize; n1];
    let mut col_sum = vec![0.0; n2];
    let mut col_cnt = vec![0usize; n2];
    for i in 0..n1 {
        for j in 0..n2 {
            if let Some(r) = table.ratio(i, j) {
                total += r;
                row_sum[i] += r;
                row_cnt[i] += 1;
                col_sum[j] += r;
                col_cnt[j] += 1;
            }
        }
    }
    let valid = n1 * n2 - uncovered;
    let mean = |s: &[f64], c: &[usize]| -> Vec<f64> {
        s.iter()
            .zip(c)
            .map(|(s, &c)| if c > 0 { s / c as f64 } else { f64::NAN })
            .collect()
    };
    let mut diagnostics = trainer.diagnostics;
    diagnostics.uncovered_pairs = uncovered;
    diagnostics.valid_pairs = valid;
    Ok(CvAucResult {
        mode: CvMode::Cvkm,
        pairing: None,
        auc: total / valid as f64,
        per_rep: Vec::new(),
        per_obs_auc1: mean(&row_sum, &row_cnt),
        per_obs_auc2: mean(&col_sum, &col_cnt),
        table: Some(table),
        auc_11m,
        reps: Some(scores),
        options: *options,
        diagnostics,
    })
}

#[inline]
fn zero_one(model: &impl Scorer, x: &[f64], class1: bool) -> f64 {
    let says_class1 = model.eval(x) > 0.0;
    if says_class1 == class1 {
        0.0
    } else {
        1.0
    }
}

/// K-fold error rate. Fold `k` pools the class-1 and class-2 observations
/// of fold `k`; each is classified by the rule trained without fold `k`.
pub fn err_cvk<R: TrainingRule>(data: &TwoClassDataset, rule: &R, plan: &FoldPlan) -> Result<CvErrResult> {
    check_plan(data, plan, &[CvMode::Cvk, CvMode::Cvn, CvMode::Cvkr])?;
    let rep = &plan.reps[0];
    let k = rep.class1.folds();
    if rep.class2.folds() != k {
        return Err(Error::invalid("error-rate CV needs the same fold count in both classes"));
    }
    let mut trainer = Trainer::new(rule, data);
    let mut errors1 = vec![0.0; data.n1()];
    let mut errors2 = vec![0.0; data.n2()];
    let mut fold_errors = Vec::with_capacity(k);
    for f in 0..k {
        let model = trainer.fit(&rep.class1, f, &rep.class2, f, 0)?;
        let m1 = rep.class1.members(f);
        let m2 = rep.class2.members(f);
        let mut wrong = 0.0;
        for &i in &m1 {
            errors1[i] = zero_one(&model, data.class1().row(i), true);
            wrong += errors1[i];
        }
        for &j in &m2 {
            errors2[j] = zero_one(&model, data.class2().row(j), false);
            wrong += errors2[j];
        }
        fold_errors.push(wrong / (m1.len() + m2.len()) as f64);
    }
    Ok(CvErrResult {
        err: fold_errors.iter().sum::<f64>() / k as f64,
        errors1,
        errors2,
        fold_errors,
        diagnostics: trainer.diagnostics,
    })
}

/// Leave-one-out error rate over the pooled sample: every observation is
/// classified by the rule trained on all other observations.
pub fn err_loo<R: TrainingRule>(data: &TwoClassDataset, rule: &R) -> Result<CvErrResult> {
    let mut diagnostics = Diagnostics::default();
    let mut fit = |t1: Samples, t2: Samples, what: String| -> Result<R::Model> {
        let model = rule.fit(&t1, &t2).map_err(|e| e.within(what))?;
        diagnostics.trainings += 1;
        diagnostics.ridge_activations += model.ridge_activations();
        Ok(model)
    };
    let mut errors1 = Vec::with_capacity(data.n1());
    for i in 0..data.n1() {
        let model = fit(data.class1().filter(|a| a != i), data.class2().clone(), format!("left out x_{i}"))?;
        errors1.push(zero_one(&model, data.class1().row(i), true));
    }
    let mut errors2 = Vec::with_capacity(data.n2());
    for j in 0..data.n2() {
        let model = fit(data.class1().clone(), data.class2().filter(|b| b != j), format!("left out y_{j}"))?;
        errors2.push(zero_one(&model, data.class2().row(j), false));
    }
    let fold_errors: Vec<f64> = errors1.iter().chain(&errors2).copied().collect();
    Ok(CvErrResult {
        err: fold_errors.iter().sum::<f64>() / fold_errors.len() as f64,
        errors1,
        errors2,
        fold_errors,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::auc::{empirical_auc, psi};
    use crate::classifier::{train, ClassifierSpec};
    use crate::resampling::{plan_cvk, plan_cvkm, plan_cvkr};
    use crate::testkit::{gaussian, AlwaysClassOne, FirstCoordinate};
    use crate::fold::Remainder;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Double-deletion oracle written directly against `train`.
    fn loo_oracle(data: &TwoClassDataset, spec: &ClassifierSpec) -> f64 {
        let mut total = 0.0;
        for i in 0..data.n1() {
            for j in 0..data.n2() {
                let t1 = data.class1().filter(|a| a != i);
                let t2 = data.class2().filter(|b| b != j);
                let c = train(spec, &t1, &t2).unwrap();
                total += psi(c.score(data.class1().row(i)).unwrap(), c.score(data.class2().row(j)).unwrap()).unwrap();
            }
        }
        total / (data.n1() * data.n2()) as f64
    }

    /// K-fold oracle: explicit loops over fold pairs.
    fn cvk_oracle(data: &TwoClassDataset, spec: &ClassifierSpec, plan: &FoldPlan) -> f64 {
        let rep = &plan.reps[0];
        let mut total = 0.0;
        for i in 0..data.n1() {
            for j in 0..data.n2() {
                let (f1, f2) = (rep.class1.fold_of(i), rep.class2.fold_of(j));
                let t1 = data.class1().filter(|a| rep.class1.fold_of(a) != f1);
                let t2 = data.class2().filter(|b| rep.class2.fold_of(b) != f2);
                let c = train(spec, &t1, &t2).unwrap();
                total += psi(c.score(data.class1().row(i)).unwrap(), c.score(data.class2().row(j)).unwrap()).unwrap();
            }
        }
        total / (data.n1() * data.n2()) as f64
    }

    #[test]
    fn cvn_matches_double_deletion_oracle() {
        for (n, seed) in [(4, 1), (8, 2)] {
            let data = gaussian(n, n, 2, 1.0, seed);
            let spec = ClassifierSpec::lda();
            let r = auc_cvn(&data, &spec, &CvOptions::default()).unwrap();
            assert!(close(r.auc, loo_oracle(&data, &spec), 1e-12));
            assert_eq!(r.diagnostics.trainings, n * n);
            assert_eq!(r.mode, CvMode::Cvn);
        }
    }

    #[test]
    fn cvk_full_pairing_matches_oracle() {
        let data = gaussian(10, 10, 2, 1.0, 3);
        let spec = ClassifierSpec::lda();
        let plan = plan_cvk(10, 10, 5, 5, 11, Remainder::Reject).unwrap();
        let r = auc_cvk(&data, &spec, &plan, Pairing::Full, &CvOptions::default()).unwrap();
        assert!(close(r.auc, cvk_oracle(&data, &spec, &plan), 1e-12));
        assert_eq!(r.diagnostics.trainings, 25);
        let pairs = r.per_rep[0].pairs.as_ref().unwrap();
        let mean = pairs.iter().sum::<f64>() / 25.0;
        assert!(close(mean, r.auc, 1e-12));
    }

    #[test]
    fn full_pairing_diagonal_equals_matched() {
        let data = gaussian(12, 12, 2, 0.8, 4);
        let spec = ClassifierSpec::lda();
        let plan = plan_cvk(12, 12, 4, 4, 5, Remainder::Reject).unwrap();
        let full = auc_cvk(&data, &spec, &plan, Pairing::Full, &CvOptions::default()).unwrap();
        let matched = auc_cvk(&data, &spec, &plan, Pairing::Matched, &CvOptions::default()).unwrap();
        let a = full.per_rep[0].matched.as_ref().unwrap();
        let b = matched.per_rep[0].matched.as_ref().unwrap();
        for (x, y) in a.iter().zip(b) {
            assert!(close(*x, *y, 1e-15));
        }
        assert_eq!(matched.diagnostics.trainings, 4);
        let reps = matched.reps.as_ref().unwrap();
        assert!(reps.ind1.iter().all(|&b| b));
    }

    #[test]
    fn untrained_rule_reproduces_empirical_auc() {
        let data = gaussian(10, 10, 1, 1.0, 5);
        let s1: Vec<f64> = data.class1().rows().map(|r| r[0]).collect();
        let s2: Vec<f64> = data.class2().rows().map(|r| r[0]).collect();
        let opts = CvOptions::default();
        let direct = empirical_auc(&s1, &s2).unwrap();
        let cvn = auc_cvn(&data, &FirstCoordinate, &opts).unwrap();
        assert!(close(cvn.auc, direct, 1e-12));
        let plan = plan_cvkr(10, 10, 5, 3, 9, Remainder::Reject).unwrap();
        let cvkr = auc_cvkr(&data, &FirstCoordinate, &plan, Pairing::Full, &opts).unwrap();
        assert!(close(cvkr.auc, direct, 1e-12));
        let plan = plan_cvkm(10, 10, 5, 300, 9, Remainder::Reject).unwrap();
        let cvkm = auc_cvkm(&data, &FirstCoordinate, &plan, &opts).unwrap();
        assert!(close(cvkm.auc, direct, 1e-12));
    }

    #[test]
    fn constant_rule_gives_half_auc_and_half_error() {
        let data = gaussian(6, 6, 2, 1.0, 6);
        let opts = CvOptions::default();
        let r = auc_cvn(&data, &AlwaysClassOne, &opts).unwrap();
        assert_eq!(r.auc, 0.5);
        let plan = plan_cvk(6, 6, 3, 3, 1, Remainder::Reject).unwrap();
        let e = err_cvk(&data, &AlwaysClassOne, &plan).unwrap();
        assert_eq!(e.err, 0.5);
        assert!(e.errors1.iter().all(|&v| v == 0.0));
        assert!(e.errors2.iter().all(|&v| v == 1.0));
        let l = err_loo(&data, &AlwaysClassOne).unwrap();
        assert_eq!(l.err, 0.5);
    }

    #[test]
    fn cvkm_with_singleton_folds_equals_cvn() {
        let data = gaussian(4, 4, 2, 1.0, 7);
        let spec = ClassifierSpec::lda();
        let opts = CvOptions::default();
        let plan = plan_cvkm(4, 4, 4, 400, 13, Remainder::Reject).unwrap();
        let m = auc_cvkm(&data, &spec, &plan, &opts).unwrap();
        let n = auc_cvn(&data, &spec, &opts).unwrap();
        assert!(close(m.auc, n.auc, 1e-12));
        for (a, b) in m.per_obs_auc1.iter().zip(&n.per_obs_auc1) {
            assert!(close(*a, *b, 1e-12));
        }
    }

    #[test]
    fn per_observation_aucs_average_to_estimate() {
        let data = gaussian(10, 10, 2, 0.7, 8);
        let spec = ClassifierSpec::lda();
        let opts = CvOptions::default();
        let plan = plan_cvkm(10, 10, 5, 400, 21, Remainder::Reject).unwrap();
        let m = auc_cvkm(&data, &spec, &plan, &opts).unwrap();
        let mean1 = m.per_obs_auc1.iter().sum::<f64>() / 10.0;
        let mean2 = m.per_obs_auc2.iter().sum::<f64>() / 10.0;
        assert!(close(mean1, m.auc, 1e-12));
        assert!(close(mean2, m.auc, 1e-12));
        assert_eq!(m.auc_11m.len(), 400);
        let plan = plan_cvk(10, 10, 5, 5, 21, Remainder::Reject).unwrap();
        let k = auc_cvk(&data, &spec, &plan, Pairing::Full, &opts).unwrap();
        let mean1 = k.per_obs_auc1.iter().sum::<f64>() / 10.0;
        assert!(close(mean1, k.auc, 1e-12));
    }

    #[test]
    fn single_repetition_cvkr_equals_cvk() {
        let data = gaussian(10, 10, 2, 0.7, 9);
        let spec = ClassifierSpec::lda();
        let opts = CvOptions::default();
        let a = auc_cvkr(&data, &spec, &plan_cvkr(10, 10, 5, 1, 4, Remainder::Reject).unwrap(), Pairing::Full, &opts)
            .unwrap();
        let b = auc_cvk(&data, &spec, &plan_cvk(10, 10, 5, 5, 4, Remainder::Reject).unwrap(), Pairing::Full, &opts)
            .unwrap();
        assert_eq!(a.auc, b.auc);
    }

    #[test]
    fn coverage_policy() {
        let data = gaussian(10, 10, 2, 0.7, 10);
        let spec = ClassifierSpec::lda();
        let plan = plan_cvkm(10, 10, 5, 5, 1, Remainder::Reject).unwrap();
        match auc_cvkm(&data, &spec, &plan, &CvOptions::default()) {
            Err(Error::Coverage { uncovered, total, suggested_m, .. }) => {
                assert!(uncovered > 0);
                assert_eq!(total, 100);
                // q = 1/25: ln(1e-4) / ln(24/25)
                assert_eq!(suggested_m, 226);
            }
            other => panic!("expected a coverage error, got {other:?}"),
        }
        let skip = CvOptions {
            zero_den: ZeroDenPolicy::Skip,
            ..CvOptions::default()
        };
        let r = auc_cvkm(&data, &spec, &plan, &skip).unwrap();
        assert!(r.diagnostics.uncovered_pairs > 0);
        assert_eq!(r.diagnostics.uncovered_pairs + r.diagnostics.valid_pairs, 100);
        assert!((0.0..=1.0).contains(&r.auc));
    }

    #[test]
    fn plan_mismatch_is_rejected() {
        let data = gaussian(10, 10, 2, 0.7, 11);
        let spec = ClassifierSpec::lda();
        let plan = plan_cvk(8, 10, 4, 5, 1, Remainder::Reject).unwrap();
        assert!(matches!(
            auc_cvk(&data, &spec, &plan, Pairing::Full, &CvOptions::default()),
            Err(Error::InvalidInput(_))
        ));
        let plan = plan_cvk(10, 10, 5, 2, 1, Remainder::Reject).unwrap();
        assert!(auc_cvk(&data, &spec, &plan, Pairing::Matched, &CvOptions::default()).is_err());
        let plan = plan_cvkm(10, 10, 5, 10, 1, Remainder::Reject).unwrap();
        assert!(auc_cvk(&data, &spec, &plan, Pairing::Full, &CvOptions::default()).is_err());
    }

    #[test]
    fn error_rate_matches_direct_loop() {
        let data = gaussian(10, 10, 2, 1.0, 12);
        let spec = ClassifierSpec::lda();
        let plan = plan_cvk(10, 10, 5, 5, 3, Remainder::Reject).unwrap();
        let e = err_cvk(&data, &spec, &plan).unwrap();
        let rep = &plan.reps[0];
        let mut wrong = 0.0;
        for i in 0..10 {
            let f = rep.class1.fold_of(i);
            let c = train(
                &spec,
                &data.class1().filter(|a| rep.class1.fold_of(a) != f),
                &data.class2().filter(|b| rep.class2.fold_of(b) != f),
            )
            .unwrap();
            wrong += if c.predict(data.class1().row(i)).unwrap() == 1 { 0.0 } else { 1.0 };
        }
        for j in 0..10 {
            let f = rep.class2.fold_of(j);
            let c = train(
                &spec,
                &data.class1().filter(|a| rep.class1.fold_of(a) != f),
                &data.class2().filter(|b| rep.class2.fold_of(b) != f),
            )
            .unwrap();
            wrong += if c.predict(data.class2().row(j)).unwrap() == 2 { 0.0 } else { 1.0 };
        }
        // equal fold sizes: the mean of fold errors is the overall rate
        assert!(close(e.err, wrong / 20.0, 1e-12));
        assert_eq!(e.pooled_errors().len(), 20);
    }
}
