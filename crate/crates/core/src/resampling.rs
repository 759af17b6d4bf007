//! Fold plans for the four cross-validation variants.
//!
//! Random partitions are drawn as a uniform permutation followed by canonical
//! folding, which gives every partition into equal folds the same
//! probability. Repetition `m` of class `c` uses the stream
//! `rng::stream(seed, [PARTITION, m, c])`, so a plan is a pure function of its
//! inputs and the repetitions can be generated in any order.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fold::{FoldMap, Remainder};
use crate::rng::{self, tag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvMode {
    /// Leave-one-out.
    Cvn,
    /// Single K-fold.
    Cvk,
    /// Repeated K-fold.
    Cvkr,
    /// Monte-Carlo K-fold, testing on fold 0 only.
    Cvkm,
}

impl std::fmt::Display for CvMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CvMode::Cvn => "cvn",
            CvMode::Cvk => "cvk",
            CvMode::Cvkr => "cvkr",
            CvMode::Cvkm => "cvkm",
        })
    }
}

/// Fold maps of both classes for one repetition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repetition {
    pub class1: FoldMap,
    pub class2: FoldMap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub mode: CvMode,
    pub seed: Option<u64>,
    pub remainder: Remainder,
    pub reps: Vec<Repetition>,
}

impl FoldPlan {
    pub fn n1(&self) -> usize {
        self.reps[0].class1.len()
    }

    pub fn n2(&self) -> usize {
        self.reps[0].class2.len()
    }

    pub fn k1(&self) -> usize {
        self.reps[0].class1.folds()
    }

    pub fn k2(&self) -> usize {
        self.reps[0].class2.folds()
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: FoldPlan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }

    /// Structural checks beyond what each `FoldMap` enforces.
    pub fn validate(&self) -> Result<()> {
        let first = self
            .reps
            .first()
            .ok_or_else(|| Error::invalid("plan has no repetitions"))?;
        for (m, rep) in self.reps.iter().enumerate() {
            if rep.class1.len() != first.class1.len()
                || rep.class2.len() != first.class2.len()
                || rep.class1.folds() != first.class1.folds()
                || rep.class2.folds() != first.class2.folds()
            {
                return Err(Error::invalid(format!("repetition {m} has a different shape")));
            }
        }
        match self.mode {
            CvMode::Cvn => {
                if self.reps.len() != 1
                    || first.class1.folds() != first.class1.len()
                    || first.class2.folds() != first.class2.len()
                {
                    return Err(Error::invalid("a leave-one-out plan has one repetition with K = n"));
                }
            }
            CvMode::Cvk if self.reps.len() != 1 => {
                return Err(Error::invalid("a single K-fold plan has exactly one repetition"));
            }
            _ => {}
        }
        Ok(())
    }
}

fn random_map(n: usize, k: usize, remainder: Remainder, seed: u64, m: usize, class: u64) -> Result<FoldMap> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(seed, &[tag::PARTITION, m as u64, class]));
    FoldMap::from_order(&order, k, remainder)
}

fn random_reps(
    n1: usize,
    n2: usize,
    k1: usize,
    k2: usize,
    count: usize,
    seed: u64,
    remainder: Remainder,
) -> Result<Vec<Repetition>> {
    if count == 0 {
        return Err(Error::invalid("repetition count must be at least 1"));
    }
    if n1 < 2 || n2 < 2 {
        return Err(Error::invalid("each class needs at least 2 observations"));
    }
    (0..count)
        .map(|m| {
            Ok(Repetition {
                class1: random_map(n1, k1, remainder, seed, m, 1)?,
                class2: random_map(n2, k2, remainder, seed, m, 2)?,
            })
        })
        .collect()
}

/// Leave-one-out: one repetition, observation `i` alone in fold `i`.
pub fn plan_cvn(n1: usize, n2: usize) -> Result<FoldPlan> {
    if n1 < 2 || n2 < 2 {
        return Err(Error::invalid("each class needs at least 2 observations"));
    }
    Ok(FoldPlan {
        mode: CvMode::Cvn,
        seed: None,
        remainder: Remainder::Reject,
        reps: vec![Repetition {
            class1: FoldMap::canonical(n1, n1)?,
            class2: FoldMap::canonical(n2, n2)?,
        }],
    })
}

/// Single K-fold split with per-class fold counts.
pub fn plan_cvk(n1: usize, n2: usize, k1: usize, k2: usize, seed: u64, remainder: Remainder) -> Result<FoldPlan> {
    Ok(FoldPlan {
        mode: CvMode::Cvk,
        seed: Some(seed),
        remainder,
        reps: random_reps(n1, n2, k1, k2, 1, seed, remainder)?,
    })
}

/// `r` independent exhaustive K-fold partitions per class.
pub fn plan_cvkr(n1: usize, n2: usize, k: usize, r: usize, seed: u64, remainder: Remainder) -> Result<FoldPlan> {
    Ok(FoldPlan {
        mode: CvMode::Cvkr,
        seed: Some(seed),
        remainder,
        reps: random_reps(n1, n2, k, k, r, seed, remainder)?,
    })
}

/// `m` independent random partitions per class; fold 0 is the test fold.
pub fn plan_cvkm(n1: usize, n2: usize, k: usize, m: usize, seed: u64, remainder: Remainder) -> Result<FoldPlan> {
    Ok(FoldPlan {
        mode: CvMode::Cvkm,
        seed: Some(seed),
        remainder,
        reps: random_reps(n1, n2, k, k, m, seed, remainder)?,
    })
}
