//! Influence-function standard error of the Monte-Carlo K-fold AUC.
//!
//! Perturbing the mass of one observation changes both the empirical
//! distribution `f̂` and the probability `g` of every CV training set. The
//! derivative of the estimate at zero perturbation, `Û`, has three parts:
//!
//! * term I, from `f̂`: `AUC_{1i} − ÂUC`;
//! * term II, from `g` in the numerator of each pair ratio;
//! * term III, from `g` in the denominator, entering with a minus sign
//!   (quotient rule). With `K = n` terms II and III cancel.
//!
//! The ratio `ġ(0)/g(0)` only takes two values, `n_K − n` when the observation
//! is in the test fold of a repetition and `n_K` otherwise, so
//! `II − III = (1/W) Σ_m r_m Σ_{pairs tested in m} (ψ_m − ÂUC_pair) / den`.
//!
//! Pairs that were never tested together are left out of every sum and `W`
//! counts the pairs that remain (all `n1·n2` under full coverage).

use serde::{Deserialize, Serialize};
use statrs::function::factorial::{binomial as binomial_approx, ln_factorial};

use crate::error::{Error, Result};
use crate::estimators::{CvAucResult, RepetitionScores, ZeroDenPolicy};
use crate::grid::Grid;
use crate::resampling::{CvMode, FoldPlan};

/// The observation whose mass is perturbed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Observation {
    Class1(usize),
    Class2(usize),
}

/// `Û`, with its three terms, for the observations of one class.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassTerms {
    pub u: Vec<f64>,
    pub term_i: Vec<f64>,
    pub term_ii: Vec<f64>,
    pub term_iii: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InfluenceComponents {
    pub class1: ClassTerms,
    pub class2: ClassTerms,
    /// `√(Σ Û₁ᵢ²/n₁² + Σ Û₂ⱼ²/n₂²)`.
    pub sd: f64,
    /// The same formula with `Û` replaced by term I.
    pub sd_first_term: f64,
}

impl InfluenceComponents {
    pub fn u1(&self) -> &[f64] {
        &self.class1.u
    }

    pub fn u2(&self) -> &[f64] {
        &self.class2.u
    }
}

fn sd_from(u1: &[f64], u2: &[f64]) -> f64 {
    let s = |u: &[f64]| u.iter().map(|v| v * v).sum::<f64>() / (u.len() * u.len()) as f64;
    (s(u1) + s(u2)).sqrt()
}

/// `C(n, k)`, exact while it fits in `u128`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // acc * (n - k + i) is divisible by i at every step
        match acc.checked_mul(n as u128 - k as u128 + i) {
            Some(v) => acc = v / i,
            None => return binomial_approx(n as u64, k as u64),
        }
    }
    acc as f64
}

fn check_counts(n: usize, n_k: usize) -> Result<()> {
    if n_k == 0 || n_k >= n {
        return Err(Error::invalid(format!("need 1 <= n_K < n, got n = {n}, n_K = {n_k}")));
    }
    Ok(())
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::invalid(format!("perturbation must lie in [0, 1), got {eps}")));
    }
    Ok(())
}

/// Probability of one training set of size `n − n_K` after moving mass `eps`
/// onto one observation, which is either in the test fold or in the training set.
pub fn g_perturbed(n: usize, n_k: usize, eps: f64, in_test_fold: bool) -> Result<f64> {
    check_counts(n, n_k)?;
    check_eps(eps)?;
    let t = n - n_k;
    let c = binomial(n, t);
    let keep = 1.0 - eps;
    if in_test_fold {
        return Ok(keep.powi(t as i32) / c);
    }
    let mut sum = 0.0;
    let mut power = 1.0;
    for r in 1..=t {
        sum += power * (eps * n as f64 - r as f64 * eps + 1.0);
        power *= keep;
    }
    Ok(sum / (t as f64 * c))
}

/// `ġ(0)/g(0) = n_K − I·n`.
pub fn gdot_ratio(n: usize, n_k: usize, in_test_fold: bool) -> f64 {
    if in_test_fold {
        n_k as f64 - n as f64
    } else {
        n_k as f64
    }
}

/// Derivative of the perturbed empirical mass of `j` when `i` is perturbed.
pub fn fdot(n: usize, i: usize, j: usize) -> f64 {
    f64::from(u8::from(i == j)) - 1.0 / n as f64
}

/// `ġ/g` for every repetition and observation of a Monte-Carlo plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationKernel {
    pub n1_k: usize,
    pub n2_k: usize,
    /// `M × n1`.
    pub gdot1: Grid<f64>,
    /// `M × n2`.
    pub gdot2: Grid<f64>,
}

impl PerturbationKernel {
    pub fn from_plan(plan: &FoldPlan) -> Result<Self> {
        plan.validate()?;
        if plan.mode != CvMode::Cvkm {
            return Err(Error::invalid(format!("expected a cvkm plan, got {}", plan.mode)));
        }
        let n1_k = plan.reps[0].class1.fold_size(0);
        let n2_k = plan.reps[0].class2.fold_size(0);
        let (n1, n2, m) = (plan.n1(), plan.n2(), plan.len());
        check_counts(n1, n1_k)?;
        check_counts(n2, n2_k)?;
        let mut gdot1 = Grid::filled(m, n1, 0.0);
        let mut gdot2 = Grid::filled(m, n2, 0.0);
        for (r, rep) in plan.reps.iter().enumerate() {
            if rep.class1.fold_size(0) != n1_k || rep.class2.fold_size(0) != n2_k {
                return Err(Error::invalid("test-fold size differs between repetitions"));
            }
            for i in 0..n1 {
                gdot1[(r, i)] = gdot_ratio(n1, n1_k, rep.class1.fold_of(i) == 0);
            }
            for j in 0..n2 {
                gdot2[(r, j)] = gdot_ratio(n2, n2_k, rep.class2.fold_of(j) == 0);
            }
        }
        Ok(PerturbationKernel { n1_k, n2_k, gdot1, gdot2 })
    }
}

/// Inputs shared by the estimator and the perturbed functional.
struct McView<'a> {
    result: &'a CvAucResult,
    scores: &'a RepetitionScores,
    tests1: Vec<Vec<usize>>,
    tests2: Vec<Vec<usize>>,
}

impl<'a> McView<'a> {
    fn new(result: &'a CvAucResult, plan: &FoldPlan) -> Result<Self> {
        if result.mode != CvMode::Cvkm {
            return Err(Error::invalid(format!("expected a cvkm result, got {}", result.mode)));
        }
        let (table, scores) = match (&result.table, &result.reps) {
            (Some(t), Some(s)) => (t, s),
            _ => return Err(Error::invalid("cvkm result lacks its pair table or repetition scores")),
        };
        if plan.n1() != table.n1() || plan.n2() != table.n2() || plan.len() != scores.reps() {
            return Err(Error::invalid("plan does not match the cvkm result"));
        }
        let uncovered = table.uncovered();
        if uncovered == table.n1() * table.n2()
            || (uncovered > 0 && result.options.zero_den == ZeroDenPolicy::Strict)
        {
            return Err(Error::Coverage {
                uncovered,
                total: table.n1() * table.n2(),
                first: (0..table.n1() * table.n2())
                    .map(|k| (k / table.n2(), k % table.n2()))
                    .find(|&(i, j)| table.den[(i, j)] == 0)
                    .unwrap_or((0, 0)),
                suggested_m: crate::estimators::suggested_reps(
                    table.n1(),
                    table.n2(),
                    plan.reps[0].class1.fold_size(0),
                    plan.reps[0].class2.fold_size(0),
                ),
            });
        }
        let tests1: Vec<Vec<usize>> = plan.reps.iter().map(|r| r.class1.members(0)).collect();
        let tests2: Vec<Vec<usize>> = plan.reps.iter().map(|r| r.class2.members(0)).collect();
        for (m, (t1, t2)) in tests1.iter().zip(&tests2).enumerate() {
            if t1.iter().any(|&i| !scores.ind1[(m, i)]) || t2.iter().any(|&j| !scores.ind2[(m, j)]) {
                return Err(Error::invalid(format!("plan repetition {m} does not match the result")));
            }
        }
        Ok(McView { result, scores, tests1, tests2 })
    }

    fn psi(&self, m: usize, i: usize, j: usize) -> f64 {
        self.result
            .options
            .ties
            .psi(self.scores.scores1[(m, i)], self.scores.scores2[(m, j)])
    }
}

/// Influence-function SE of a Monte-Carlo K-fold AUC.
pub fn if_sd_cvkm(result: &CvAucResult, plan: &FoldPlan) -> Result<InfluenceComponents> {
    let view = McView::new(result, plan)?;
    let kernel = PerturbationKernel::from_plan(plan)?;
    let table = result.table.as_ref().expect("checked by McView");
    let (n1, n2) = (table.n1(), table.n2());
    let auc = result.auc;

    // Per repetition: Σ ψ/den and Σ (num/den)/den over the tested pairs.
    let reps = plan.len();
    let mut p = vec![0.0; reps];
    let mut q = vec![0.0; reps];
    for m in 0..reps {
        for &i in &view.tests1[m] {
            for &j in &view.tests2[m] {
                let den = f64::from(table.den[(i, j)]);
                p[m] += view.psi(m, i, j) / den;
                q[m] += table.num[(i, j)] / (den * den);
            }
        }
    }

    let mut cover1 = vec![0usize; n1];
    let mut cover2 = vec![0usize; n2];
    for i in 0..n1 {
        for j in 0..n2 {
            if table.den[(i, j)] > 0 {
                cover1[i] += 1;
                cover2[j] += 1;
            }
        }
    }
    let w = cover1.iter().sum::<usize>() as f64;

    let class = |n: usize, gdot: &Grid<f64>, cover: &[usize], per_obs: &[f64]| -> ClassTerms {
        let mut t = ClassTerms::default();
        for i in 0..n {
            let term_i = if cover[i] > 0 {
                n as f64 * cover[i] as f64 / w * (per_obs[i] - auc)
            } else {
                0.0
            };
            let (mut ii, mut iii) = (0.0, 0.0);
            for m in 0..reps {
                let r = gdot[(m, i)];
                ii += r * p[m];
                iii += r * q[m];
            }
            ii /= w;
            iii /= w;
            t.term_i.push(term_i);
            t.term_ii.push(ii);
            t.term_iii.push(iii);
            t.u.push(term_i + ii - iii);
        }
        t
    };
    let class1 = class(n1, &kernel.gdot1, &cover1, &result.per_obs_auc1);
    let class2 = class(n2, &kernel.gdot2, &cover2, &result.per_obs_auc2);
    let sd = sd_from(&class1.u, &class2.u);
    let sd_first_term = sd_from(&class1.term_i, &class2.term_i);
    if !sd.is_finite() {
        return Err(Error::numerical("influence", "non-finite standard error"));
    }
    Ok(InfluenceComponents {
        class1,
        class2,
        sd,
        sd_first_term,
    })
}

/// The Monte-Carlo K-fold AUC as a functional of the perturbed empirical
/// distribution, `Σ_V A·B/C / Σ_V A`. Equals the estimate at `eps = 0`.
pub fn perturbed_auc_cvkm(result: &CvAucResult, plan: &FoldPlan, eps: f64, obs: Observation) -> Result<f64> {
    check_eps(eps)?;
    let view = McView::new(result, plan)?;
    let table = result.table.as_ref().expect("checked by McView");
    let (n1, n2) = (table.n1(), table.n2());
    let n1_k = plan.reps[0].class1.fold_size(0);
    let n2_k = plan.reps[0].class2.fold_size(0);
    let (g1_in, g1_out, g2_in, g2_out);
    match obs {
        Observation::Class1(i) if i < n1 => {
            g1_in = g_perturbed(n1, n1_k, eps, true)?;
            g1_out = g_perturbed(n1, n1_k, eps, false)?;
            g2_in = 1.0 / binomial(n2, n2 - n2_k);
            g2_out = g2_in;
        }
        Observation::Class2(j) if j < n2 => {
            g1_in = 1.0 / binomial(n1, n1 - n1_k);
            g1_out = g1_in;
            g2_in = g_perturbed(n2, n2_k, eps, true)?;
            g2_out = g_perturbed(n2, n2_k, eps, false)?;
        }
        _ => return Err(Error::invalid(format!("{obs:?} is out of range"))),
    }
    let mut b = Grid::filled(n1, n2, 0.0);
    let mut c = Grid::filled(n1, n2, 0.0);
    for (m, rep) in plan.reps.iter().enumerate() {
        let g = match obs {
            Observation::Class1(i) => (if rep.class1.fold_of(i) == 0 { g1_in } else { g1_out }) * g2_in,
            Observation::Class2(j) => g1_in * if rep.class2.fold_of(j) == 0 { g2_in } else { g2_out },
        };
        for &i in &view.tests1[m] {
            for &j in &view.tests2[m] {
                b[(i, j)] += view.psi(m, i, j) * g;
                c[(i, j)] += g;
            }
        }
    }
    let mass = |n: usize, own: Option<usize>, k: usize| {
        (1.0 - eps) / n as f64 + if own == Some(k) { eps } else { 0.0 }
    };
    let (own1, own2) = match obs {
        Observation::Class1(i) => (Some(i), None),
        Observation::Class2(j) => (None, Some(j)),
    };
    let (mut value, mut total) = (0.0, 0.0);
    for i in 0..n1 {
        let f1 = mass(n1, own1, i);
        for j in 0..n2 {
            if table.den[(i, j)] == 0 {
                continue;
            }
            let a = f1 * mass(n2, own2, j);
            value += a * b[(i, j)] / c[(i, j)];
            total += a;
        }
    }
    Ok(value / total)
}

/// SE for leave-one-out, where `Û` reduces to `AUC_{1i} − ÂUC`.
pub fn if_sd_cvn_reduction(per_obs_auc1: &[f64], per_obs_auc2: &[f64], auc: f64) -> Result<f64> {
    if per_obs_auc1.is_empty() || per_obs_auc2.is_empty() {
        return Err(Error::invalid("per-observation AUCs are empty"));
    }
    if per_obs_auc1.iter().chain(per_obs_auc2).any(|v| !v.is_finite()) || !auc.is_finite() {
        return Err(Error::invalid("per-observation AUCs must be finite"));
    }
    let d1: Vec<f64> = per_obs_auc1.iter().map(|v| v - auc).collect();
    let d2: Vec<f64> = per_obs_auc2.iter().map(|v| v - auc).collect();
    Ok(sd_from(&d1, &d2))
}

/// SE of the leave-one-out error rate: `√(Σ (e_i − ē)²) / n`.
pub fn if_sd_err_cvn(errors: &[f64]) -> Result<f64> {
    if errors.is_empty() || errors.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("need a non-empty finite loss vector"));
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    Ok(errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>().sqrt() / n)
}

/// Computable part of the influence function of the repeated K-fold AUC.
///
/// The derivative of the training-set probability `G` has no closed form, so
/// only term I and `G(0)` are reported; `sd_first_term` is not a complete SE.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartialCvkrInfluence {
    pub term_i1: Vec<f64>,
    pub term_i2: Vec<f64>,
    pub sd_first_term: f64,
    /// `ln G(0)`: minus the log number of distinct fold partitions of both classes.
    pub ln_g0: f64,
}

fn ln_partitions(n: usize, sizes: impl Iterator<Item = usize>) -> f64 {
    sizes.fold(ln_factorial(n as u64), |acc, s| acc - ln_factorial(s as u64))
}

pub fn if_partial_cvkr(result: &CvAucResult, plan: &FoldPlan) -> Result<PartialCvkrInfluence> {
    if result.mode != CvMode::Cvkr || plan.mode != CvMode::Cvkr {
        return Err(Error::invalid("expected a cvkr result and plan"));
    }
    let term_i1: Vec<f64> = result.per_obs_auc1.iter().map(|v| v - result.auc).collect();
    let term_i2: Vec<f64> = result.per_obs_auc2.iter().map(|v| v - result.auc).collect();
    let rep = &plan.reps[0];
    let ln_g0 = -ln_partitions(plan.n1(), (0..rep.class1.folds()).map(|k| rep.class1.fold_size(k)))
        - ln_partitions(plan.n2(), (0..rep.class2.folds()).map(|k| rep.class2.fold_size(k)));
    Ok(PartialCvkrInfluence {
        sd_first_term: sd_from(&term_i1, &term_i2),
        term_i1,
        term_i2,
        ln_g0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::ClassifierSpec;
    use crate::estimators::{auc_cvkm, auc_cvkr, auc_cvn, CvOptions, Pairing};
    use crate::fold::Remainder;
    use crate::resampling::{plan_cvkm, plan_cvkr};
    use crate::testkit::gaussian;
    use proptest::prelude::*;
    use std::collections::HashMap;

    const H: f64 = 1e-5;

    /// Three-point one-sided derivative at 0 (the functions live on [0, 1)).
    fn forward_derivative(f: impl Fn(f64) -> f64) -> f64 {
        (-3.0 * f(0.0) + 4.0 * f(H) - f(2.0 * H)) / (2.0 * H)
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 2), 45.0);
        assert_eq!(binomial(40, 20), 137_846_528_820.0);
        assert_eq!(binomial(5, 7), 0.0);
        let big = binomial(120, 60);
        assert!((big / binomial_approx(120, 60) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unperturbed_probability_is_uniform() {
        for n in 2..=20 {
            for n_k in 1..n {
                let c = binomial(n, n_k);
                for flag in [true, false] {
                    let g = g_perturbed(n, n_k, 0.0, flag).unwrap();
                    assert!((g * c - 1.0).abs() < 1e-14, "n={n} n_k={n_k}");
                }
            }
        }
        assert!(g_perturbed(10, 10, 0.0, true).is_err());
        assert!(g_perturbed(10, 2, 1.0, true).is_err());
        assert!(g_perturbed(10, 2, -0.1, false).is_err());
    }

    #[test]
    fn derivative_of_training_set_probability() {
        let out = forward_derivative(|e| g_perturbed(10, 2, e, false).unwrap());
        assert!((out - 2.0 / 45.0).abs() < 1e-8, "{out}");
        let inside = forward_derivative(|e| g_perturbed(10, 2, e, true).unwrap());
        assert!((inside + 8.0 / 45.0).abs() < 1e-8, "{inside}");
        for (n, n_k) in [(6, 2), (12, 3), (20, 4)] {
            let g0 = 1.0 / binomial(n, n_k);
            for flag in [true, false] {
                let d = forward_derivative(|e| g_perturbed(n, n_k, e, flag).unwrap());
                let want = gdot_ratio(n, n_k, flag) * g0;
                assert!((d - want).abs() <= 1e-6 * want.abs(), "n={n} {flag}: {d} vs {want}");
            }
        }
    }

    /// Probability of each training set, summing over the ordered draws that
    /// produce it. Observation 0 carries the extra mass.
    fn enumerate_draws(n: usize, t: usize, eps: f64) -> HashMap<Vec<usize>, f64> {
        fn walk(n: usize, t: usize, eps: f64, drawn: &mut Vec<usize>, p: f64, out: &mut HashMap<Vec<usize>, f64>) {
            if drawn.len() == t {
                let mut key = drawn.clone();
                key.sort_unstable();
                *out.entry(key).or_default() += p;
                return;
            }
            let left = (n - drawn.len()) as f64;
            let perturbed_left = !drawn.contains(&0);
            for k in 0..n {
                if drawn.contains(&k) {
                    continue;
                }
                let q = if perturbed_left {
                    (1.0 - eps) / left + if k == 0 { eps } else { 0.0 }
                } else {
                    1.0 / left
                };
                drawn.push(k);
                walk(n, t, eps, drawn, p * q, out);
                drawn.pop();
            }
        }
        let mut out = HashMap::new();
        walk(n, t, eps, &mut Vec::new(), 1.0, &mut out);
        out
    }

    #[test]
    fn closed_form_matches_enumeration() {
        for (n, n_k, eps) in [(4, 1, 0.3), (5, 2, 0.15), (6, 2, 0.6), (6, 5, 0.4)] {
            let sets = enumerate_draws(n, n - n_k, eps);
            assert_eq!(sets.len() as f64, binomial(n, n - n_k));
            let total: f64 = sets.values().sum();
            assert!((total - 1.0).abs() < 1e-12);
            for (set, p) in &sets {
                let in_test = !set.contains(&0);
                let g = g_perturbed(n, n_k, eps, in_test).unwrap();
                assert!((g - p).abs() < 1e-12, "n={n} set={set:?}: {g} vs {p}");
            }
        }
        // Four test-fold choices with n = 4, n_K = 1.
        let eps = 0.3;
        let total = g_perturbed(4, 1, eps, true).unwrap() + 3.0 * g_perturbed(4, 1, eps, false).unwrap();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn gdot_values() {
        assert_eq!(gdot_ratio(10, 2, true), -8.0);
        assert_eq!(gdot_ratio(10, 2, false), 2.0);
        // n(N − 1 + 1/K), N = times in the training set
        let n_form = |n: f64, times: f64, k: f64| n * (times - 1.0 + 1.0 / k);
        assert!((n_form(10.0, 0.0, 5.0) - gdot_ratio(10, 2, true)).abs() < 1e-12);
        assert!((n_form(10.0, 1.0, 5.0) - gdot_ratio(10, 2, false)).abs() < 1e-12);
    }

    #[test]
    fn gdot_averages_to_zero() {
        let plan = plan_cvkm(10, 10, 5, 2000, 77, Remainder::Reject).unwrap();
        let kernel = PerturbationKernel::from_plan(&plan).unwrap();
        assert!(kernel.gdot1.iter().all(|&v| v == -8.0 || v == 2.0));
        // sd of a single ratio is 4, so the mean over 2000 has sd 0.089
        for i in 0..10 {
            let mean = (0..2000).map(|m| kernel.gdot1[(m, i)]).sum::<f64>() / 2000.0;
            assert!(mean.abs() < 0.4, "observation {i}: {mean}");
        }
    }

    proptest! {
        #[test]
        fn fdot_preserves_mass(n in 1usize..50, seed in 0usize..50) {
            let i = seed % n;
            let total: f64 = (0..n).map(|j| fdot(n, i, j)).sum();
            prop_assert!(total.abs() < 1e-12);
        }

        #[test]
        fn err_sd_matches_oracle(e in prop::collection::vec(prop::bool::ANY, 1..60)) {
            let e: Vec<f64> = e.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
            let n = e.len() as f64;
            let ones: f64 = e.iter().sum();
            // Σ(e − ē)² = k(1 − k/n) for a 0/1 vector with k ones
            let oracle = (ones * (1.0 - ones / n)).max(0.0).sqrt() / n;
            prop_assert!((if_sd_err_cvn(&e).unwrap() - oracle).abs() < 1e-12);
        }
    }

    #[test]
    fn err_sd_examples() {
        assert!((if_sd_err_cvn(&[1.0, 0.0]).unwrap() - 0.125f64.sqrt()).abs() < 1e-15);
        assert_eq!(if_sd_err_cvn(&[0.0; 7]).unwrap(), 0.0);
        assert!(if_sd_err_cvn(&[]).is_err());
    }

    fn small_case(n: usize, k: usize, reps: usize, seed: u64, zero_den: ZeroDenPolicy) -> (CvAucResult, FoldPlan) {
        let data = gaussian(n, n, 2, 0.8, seed);
        let plan = plan_cvkm(n, n, k, reps, seed, Remainder::Reject).unwrap();
        let opts = CvOptions {
            zero_den,
            ..CvOptions::default()
        };
        (auc_cvkm(&data, &ClassifierSpec::lda(), &plan, &opts).unwrap(), plan)
    }

    #[test]
    fn functional_at_zero_is_the_estimate() {
        let (r, plan) = small_case(6, 3, 200, 3, ZeroDenPolicy::Strict);
        for i in 0..6 {
            for obs in [Observation::Class1(i), Observation::Class2(i)] {
                let v = perturbed_auc_cvkm(&r, &plan, 0.0, obs).unwrap();
                assert!((v - r.auc).abs() < 1e-12, "{obs:?}");
            }
        }
        assert!(perturbed_auc_cvkm(&r, &plan, 1.0, Observation::Class1(0)).is_err());
        assert!(perturbed_auc_cvkm(&r, &plan, 0.1, Observation::Class2(6)).is_err());
    }

    fn check_against_finite_differences(r: &CvAucResult, plan: &FoldPlan) {
        let inf = if_sd_cvkm(r, plan).unwrap();
        for (class, u) in [(1, inf.u1()), (2, inf.u2())] {
            for (i, &want) in u.iter().enumerate() {
                let obs = if class == 1 { Observation::Class1(i) } else { Observation::Class2(i) };
                let fd = forward_derivative(|e| perturbed_auc_cvkm(r, plan, e, obs).unwrap());
                assert!(
                    (fd - want).abs() <= 1e-3 * want.abs() + 1e-9,
                    "class {class} obs {i}: finite difference {fd}, influence {want}"
                );
            }
        }
    }

    #[test]
    fn influence_matches_derivative_of_functional() {
        let (r, plan) = small_case(6, 3, 400, 5, ZeroDenPolicy::Strict);
        check_against_finite_differences(&r, &plan);
        let inf = if_sd_cvkm(&r, &plan).unwrap();
        let direct = (inf.u1().iter().map(|u| u * u).sum::<f64>() / 36.0
            + inf.u2().iter().map(|u| u * u).sum::<f64>() / 36.0)
            .sqrt();
        assert_eq!(inf.sd, direct);
        // term II differs from term III once K < n
        assert!(inf.class1.term_ii.iter().zip(&inf.class1.term_iii).any(|(a, b)| (a - b).abs() > 1e-9));
    }

    #[test]
    fn influence_matches_derivative_with_uncovered_pairs() {
        let (r, plan) = small_case(6, 3, 12, 8, ZeroDenPolicy::Skip);
        assert!(r.diagnostics.uncovered_pairs > 0);
        check_against_finite_differences(&r, &plan);
    }

    #[test]
    fn strict_policy_rejects_uncovered_results() {
        let (mut r, plan) = small_case(6, 3, 12, 8, ZeroDenPolicy::Skip);
        r.options.zero_den = ZeroDenPolicy::Strict;
        assert!(matches!(if_sd_cvkm(&r, &plan), Err(Error::Coverage { .. })));
    }

    #[test]
    fn leave_one_out_limit() {
        let n = 5;
        let data = gaussian(n, n, 2, 0.8, 9);
        let spec = ClassifierSpec::lda();
        let plan = plan_cvkm(n, n, n, 500, 9, Remainder::Reject).unwrap();
        let r = auc_cvkm(&data, &spec, &plan, &CvOptions::default()).unwrap();
        let inf = if_sd_cvkm(&r, &plan).unwrap();
        for t in [&inf.class1, &inf.class2] {
            for (a, b) in t.term_ii.iter().zip(&t.term_iii) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        let reduced = if_sd_cvn_reduction(&r.per_obs_auc1, &r.per_obs_auc2, r.auc).unwrap();
        assert!((inf.sd - reduced).abs() < 1e-12);
        assert!((inf.sd - inf.sd_first_term).abs() < 1e-12);
        let cvn = auc_cvn(&data, &spec, &CvOptions::default()).unwrap();
        let direct = if_sd_cvn_reduction(&cvn.per_obs_auc1, &cvn.per_obs_auc2, cvn.auc).unwrap();
        assert!((inf.sd - direct).abs() < 1e-12);
    }

    #[test]
    fn partial_cvkr() {
        let data = gaussian(10, 10, 2, 0.8, 10);
        let plan = plan_cvkr(10, 10, 5, 4, 10, Remainder::Reject).unwrap();
        let r = auc_cvkr(&data, &ClassifierSpec::lda(), &plan, Pairing::Full, &CvOptions::default()).unwrap();
        let p = if_partial_cvkr(&r, &plan).unwrap();
        // 10!/(2!)^5 = 113400 partitions per class
        assert!((p.ln_g0 + 2.0 * 113_400f64.ln()).abs() < 1e-9);
        assert!(p.term_i1.iter().sum::<f64>().abs() < 1e-12);
        assert!(p.sd_first_term > 0.0);
    }
}
