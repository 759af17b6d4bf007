use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observations of one class, stored row-major (one row per observation).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Samples {
    dim: usize,
    values: Vec<f64>,
}

impl Samples {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("feature dimension must be at least 1"));
        }
        if values.len() % dim != 0 {
            return Err(Error::invalid(format!(
                "{} values do not form rows of length {dim}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite feature value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Samples { dim, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("rows have inconsistent lengths"));
        }
        Samples::new(dim, rows.concat())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    /// Copy of the rows whose index satisfies `keep`, in index order.
    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> Samples {
        let mut values = Vec::with_capacity(self.values.len());
        for (i, r) in self.rows().enumerate() {
            if keep(i) {
                values.extend_from_slice(r);
            }
        }
        Samples {
            dim: self.dim,
            values,
        }
    }

    pub fn shifted(&self, offset: &[f64]) -> Samples {
        assert_eq!(offset.len(), self.dim);
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, v)| v + offset[k % self.dim])
            .collect();
        Samples {
            dim: self.dim,
            values,
        }
    }

    pub fn column_means(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for r in self.rows() {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        let n = self.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}

/// Two-class data set: `n1` class-1 and `n2` class-2 observations in `p` dimensions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoClassDataset {
    class1: Samples,
    class2: Samples,
}

impl TwoClassDataset {
    pub fn new(class1: Samples, class2: Samples) -> Result<Self> {
        if class1.dim() != class2.dim() {
            return Err(Error::invalid(format!(
                "class dimensions differ: {} vs {}",
                class1.dim(),
                class2.dim()
            )));
        }
        if class1.len() < 2 || class2.len() < 2 {
            return Err(Error::invalid(format!(
                "each class needs at least 2 observations (got {} and {})",
                class1.len(),
                class2.len()
            )));
        }
        Ok(TwoClassDataset { class1, class2 })
    }

    /// Build from `(label, features)` records with labels 1 and 2.
    pub fn from_labeled<'a>(records: impl IntoIterator<Item = (u8, &'a [f64])>) -> Result<Self> {
        let mut rows1: Vec<Vec<f64>> = Vec::new();
        let mut rows2: Vec<Vec<f64>> = Vec::new();
        for (k, (label, x)) in records.into_iter().enumerate() {
            match label {
                1 => rows1.push(x.to_vec()),
                2 => rows2.push(x.to_vec()),
                other => {
                    return Err(Error::invalid(format!(
                        "record {k}: label must be 1 or 2, got {other}"
                    )))
                }
            }
        }
        if rows1.is_empty() || rows2.is_empty() {
            return Err(Error::invalid("both classes must be present"));
        }
        TwoClassDataset::new(Samples::from_rows(&rows1)?, Samples::from_rows(&rows2)?)
    }

    pub fn class1(&self) -> &Samples {
        &self.class1
    }

    pub fn class2(&self) -> &Samples {
        &self.class2
    }

    pub fn n1(&self) -> usize {
        self.class1.len()
    }

    pub fn n2(&self) -> usize {
        self.class2.len()
    }

    pub fn dim(&self) -> usize {
        self.class1.dim()
    }
}
