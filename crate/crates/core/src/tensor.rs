//! Probability and adjacency tensors.
//!
//! Both are n x n x L with symmetric slices and a zero diagonal; slices are
//! stored row-major, one after another.

use crate::error::{Error, Result};

/// Ground-truth or estimated connection probabilities, entries in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTensor {
    n: usize,
    horizon: usize,
    data: Vec<f64>,
}

impl ProbabilityTensor {
    pub fn new(n: usize, horizon: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n * horizon {
            return Err(Error::InvalidTensor(format!(
                "expected {} values for n={n}, L={horizon}, got {}",
                n * n * horizon,
                data.len()
            )));
        }
        let t = Self { n, horizon, data };
        t.validate()?;
        Ok(t)
    }

    pub fn zeros(n: usize, horizon: usize) -> Self {
        Self { n, horizon, data: vec![0.0; n * n * horizon] }
    }

    /// Builds from a symmetric function of (i, j, l); the diagonal is zeroed.
    pub fn from_fn(n: usize, horizon: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Result<Self> {
        let mut t = Self::zeros(n, horizon);
        for l in 0..horizon {
            for i in 0..n {
                for j in i + 1..n {
                    let v = f(i, j, l);
                    t.set_pair(i, j, l, v);
                }
            }
        }
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        for l in 0..self.horizon {
            for i in 0..n {
                if self.get(i, i, l) != 0.0 {
                    return Err(Error::InvalidTensor(format!("nonzero diagonal at ({i},{i},{l})")));
                }
                for j in 0..n {
                    let v = self.get(i, j, l);
                    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                        return Err(Error::InvalidTensor(format!("value {v} out of [0,1] at ({i},{j},{l})")));
                    }
                    if v != self.get(j, i, l) {
                        return Err(Error::InvalidTensor(format!("asymmetric at ({i},{j},{l})")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, i: usize, j: usize, l: usize) -> f64 {
        self.data[l * self.n * self.n + i * self.n + j]
    }

    pub(crate) fn set_pair(&mut self, i: usize, j: usize, l: usize, v: f64) {
        let nn = self.n * self.n;
        self.data[l * nn + i * self.n + j] = v;
        self.data[l * nn + j * self.n + i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Squared Frobenius distance summed over slices (counts both triangles).
    pub fn squared_distance(&self, other: &ProbabilityTensor) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Observed binary connections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyTensor {
    n: usize,
    horizon: usize,
    data: Vec<u8>,
}

impl AdjacencyTensor {
    pub fn new(n: usize, horizon: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != n * n * horizon {
            return Err(Error::InvalidTensor(format!(
                "expected {} bits for n={n}, L={horizon}, got {}",
                n * n * horizon,
                data.len()
            )));
        }
        let t = Self { n, horizon, data };
        for l in 0..horizon {
            for i in 0..n {
                if t.get(i, i, l) != 0 {
                    return Err(Error::InvalidTensor(format!("nonzero diagonal at ({i},{i},{l})")));
                }
                for j in 0..n {
                    let v = t.get(i, j, l);
                    if v > 1 {
                        return Err(Error::InvalidTensor(format!("non-binary value {v}")));
                    }
                    if v != t.get(j, i, l) {
                        return Err(Error::InvalidTensor(format!("asymmetric at ({i},{j},{l})")));
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn zeros(n: usize, horizon: usize) -> Self {
        Self { n, horizon, data: vec![0; n * n * horizon] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, i: usize, j: usize, l: usize) -> u8 {
        self.data[l * self.n * self.n + i * self.n + j]
    }

    pub(crate) fn set_pair(&mut self, i: usize, j: usize, l: usize, v: u8) {
        let nn = self.n * self.n;
        self.data[l * nn + i * self.n + j] = v;
        self.data[l * nn + j * self.n + i] = v;
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_asymmetry_and_diagonal() {
        let mut data = vec![0.0; 2 * 2 * 1];
        data[0 * 2 + 1] = 0.3;
        assert!(ProbabilityTensor::new(2, 1, data.clone()).is_err());
        data[1 * 2 + 0] = 0.3;
        assert!(ProbabilityTensor::new(2, 1, data.clone()).is_ok());
        data[0] = 0.1;
        assert!(ProbabilityTensor::new(2, 1, data).is_err());
    }

    #[test]
    fn rejects_out_of_range() {
        let t = ProbabilityTensor::from_fn(3, 1, |_, _, _| 1.5);
        assert!(t.is_err());
    }

    #[test]
    fn squared_distance_counts_both_triangles() {
        let a = ProbabilityTensor::from_fn(2, 1, |_, _, _| 0.5).unwrap();
        let b = ProbabilityTensor::zeros(2, 1);
        assert!((a.squared_distance(&b) - 2.0 * 0.25).abs() < 1e-15);
    }
}
