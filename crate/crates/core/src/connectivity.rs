//! Class-pair connection probabilities over time.

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::pairs::{class_pair_count, index_to_class_pair};

/// G(k1, k2, l) with symmetric slices; the reduced form keeps one entry per
/// unordered class pair, giving an M x L matrix with M = m(m+1)/2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectivityTensor {
    m: usize,
    horizon: usize,
    data: Vec<f64>,
}

impl ConnectivityTensor {
    pub fn new(m: usize, horizon: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != m * m * horizon {
            return Err(Error::InvalidTensor(format!(
                "expected {} values for m={m}, L={horizon}, got {}",
                m * m * horizon,
                data.len()
            )));
        }
        let t = Self { m, horizon, data };
        for l in 0..horizon {
            for k1 in 0..m {
                for k2 in 0..m {
                    let v = t.get(k1, k2, l);
                    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                        return Err(Error::InvalidTensor(format!(
                            "value {v} out of [0,1] at ({k1},{k2},{l})"
                        )));
                    }
                    if v != t.get(k2, k1, l) {
                        return Err(Error::InvalidTensor(format!("asymmetric at ({k1},{k2},{l})")));
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn from_fn(m: usize, horizon: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; m * m * horizon];
        for l in 0..horizon {
            for k1 in 0..m {
                for k2 in k1..m {
                    let v = f(k1, k2, l);
                    data[l * m * m + k1 * m + k2] = v;
                    data[l * m * m + k2 * m + k1] = v;
                }
            }
        }
        Self::new(m, horizon, data)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, k1: usize, k2: usize, l: usize) -> f64 {
        self.data[l * self.m * self.m + k1 * self.m + k2]
    }

    /// The de-duplicated M x L matrix Q, rows in canonical class-pair order.
    pub fn reduced(&self) -> Mat {
        let mm = class_pair_count(self.m);
        Mat::from_fn(mm, self.horizon, |k, l| {
            let (k1, k2) = index_to_class_pair(k);
            self.get(k1, k2, l)
        })
    }

    /// Rebuilds the full symmetric tensor from its reduced form.
    pub fn from_reduced(q: &Mat, m: usize) -> Result<Self> {
        if q.rows() != class_pair_count(m) {
            return Err(Error::DimensionMismatch(format!(
                "reduced form needs {} rows for m={m}, got {}",
                class_pair_count(m),
                q.rows()
            )));
        }
        let horizon = q.cols();
        Self::from_fn(m, horizon, |k1, k2, l| {
            let idx = crate::pairs::class_pair_to_index(k1.min(k2), k1.max(k2));
            q[(idx, l)]
        })
    }
}
