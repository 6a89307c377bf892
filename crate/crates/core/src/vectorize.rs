//! Vectorization of the tensor model.
//!
//! A symmetric slice with zero diagonal carries N = n(n-1)/2 informative
//! entries. Stacking those entries for l = 1..L turns the tensor into an
//! N x L matrix (a length-NL vector), and the block model becomes a linear
//! regression theta = C q against a block-diagonal clustering matrix C whose
//! rows select class pairs.

use crate::connectivity::ConnectivityTensor;
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::membership::MembershipSequence;
use crate::pairs::{class_pair_count, class_pair_to_index, index_to_pair, pair_count};
use crate::tensor::{AdjacencyTensor, ProbabilityTensor};

/// An N x L matrix of per-pair time series, stored slice after slice
/// (`values[l * N + pair]`). This is the estimator's working form of both
/// observed data and probability tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSeries {
    n: usize,
    horizon: usize,
    values: Vec<f64>,
}

impl PairSeries {
    pub fn new(n: usize, horizon: usize, values: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionMismatch("need at least 2 nodes".into()));
        }
        if values.len() != pair_count(n) * horizon {
            return Err(Error::DimensionMismatch(format!(
                "expected {} values, got {}",
                pair_count(n) * horizon,
                values.len()
            )));
        }
        Ok(Self { n, horizon, values })
    }

    pub fn zeros(n: usize, horizon: usize) -> Self {
        Self { n, horizon, values: vec![0.0; pair_count(n) * horizon] }
    }

    pub fn from_adjacency(b: &AdjacencyTensor) -> Self {
        let mut s = Self::zeros(b.n(), b.horizon());
        let np = s.n_pairs();
        for l in 0..b.horizon() {
            for idx in 0..np {
                let (i, j) = index_to_pair(idx);
                s.values[l * np + idx] = b.get(i, j, l) as f64;
            }
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_pairs(&self) -> usize {
        pair_count(self.n)
    }

    pub fn get(&self, pair: usize, l: usize) -> f64 {
        self.values[l * self.n_pairs() + pair]
    }

    pub(crate) fn set(&mut self, pair: usize, l: usize, v: f64) {
        let np = self.n_pairs();
        self.values[l * np + pair] = v;
    }

    /// The stacked vector (slice l = 0 first).
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum()
    }

    pub fn squared_distance(&self, other: &PairSeries) -> f64 {
        assert_eq!(self.values.len(), other.values.len(), "shape mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Aggregates over time into a symmetric n x n matrix (zero diagonal).
    pub fn aggregate_matrix(&self) -> Mat {
        let mut s = Mat::zeros(self.n, self.n);
        for l in 0..self.horizon {
            for idx in 0..self.n_pairs() {
                let (i, j) = index_to_pair(idx);
                let v = self.get(idx, l);
                s[(i, j)] += v;
                s[(j, i)] += v;
            }
        }
        s
    }
}

/// Extracts the informative entries of a probability tensor in canonical
/// pair order. Exact inverse of [`devectorize`].
pub fn vectorize(lam: &ProbabilityTensor) -> PairSeries {
    let mut s = PairSeries::zeros(lam.n(), lam.horizon());
    let np = s.n_pairs();
    for l in 0..lam.horizon() {
        for idx in 0..np {
            let (i, j) = index_to_pair(idx);
            s.values[l * np + idx] = lam.get(i, j, l);
        }
    }
    s
}

/// Packs a pair series back into a full tensor layout (both triangles filled,
/// zero diagonal). No range check: estimates may leave [0, 1].
pub fn devectorize_raw(theta: &PairSeries) -> Vec<f64> {
    let n = theta.n();
    let mut data = vec![0.0; n * n * theta.horizon()];
    for l in 0..theta.horizon() {
        for idx in 0..theta.n_pairs() {
            let (i, j) = index_to_pair(idx);
            let v = theta.get(idx, l);
            data[l * n * n + i * n + j] = v;
            data[l * n * n + j * n + i] = v;
        }
    }
    data
}

/// Packs a pair series with entries already in [0, 1] into a tensor.
pub fn devectorize(theta: &PairSeries) -> Result<ProbabilityTensor> {
    ProbabilityTensor::new(theta.n(), theta.horizon(), devectorize_raw(theta))
}

/// Same, clamping entries into [0, 1] first.
pub fn devectorize_clamped(theta: &PairSeries) -> ProbabilityTensor {
    let mut data = devectorize_raw(theta);
    for v in &mut data {
        *v = v.clamp(0.0, 1.0);
    }
    ProbabilityTensor::new(theta.n(), theta.horizon(), data).expect("clamped tensor is valid")
}

/// The clustering matrix of one time slice: binary N x M with exactly one 1
/// per row, mapping each node pair to its class pair. Stored as the column
/// index of each row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusteringMatrix {
    n_rows: usize,
    n_cols: usize,
    col_of_row: Vec<u32>,
}

impl ClusteringMatrix {
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn col_of_row(&self, row: usize) -> usize {
        self.col_of_row[row] as usize
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            m[(r, self.col_of_row[r] as usize)] = 1.0;
        }
        m
    }

    /// Column sums: how many pairs fall in each class pair.
    pub fn column_sums(&self) -> Vec<usize> {
        let mut sums = vec![0usize; self.n_cols];
        for &c in &self.col_of_row {
            sums[c as usize] += 1;
        }
        sums
    }
}

/// Builds the slice-l clustering matrix from memberships. Column k = (k1, k2)
/// collects the pairs whose endpoint classes are {k1, k2}; merging the two
/// ordered columns (k1, k2) and (k2, k1) keeps one 1 per row.
pub fn build_clustering_matrix(z: &MembershipSequence, l: usize) -> Result<ClusteringMatrix> {
    let n = z.n();
    let m = z.class_count();
    if l >= z.horizon() {
        return Err(Error::DimensionMismatch(format!(
            "slice {l} out of range (L={})",
            z.horizon()
        )));
    }
    let mut col_of_row = Vec::with_capacity(pair_count(n));
    for idx in 0..pair_count(n) {
        let (i, j) = index_to_pair(idx);
        let (a, b) = (z.label(l, i) as usize, z.label(l, j) as usize);
        if a >= m || b >= m {
            return Err(Error::InvalidMembership(format!("label out of range at l={l}")));
        }
        col_of_row.push(class_pair_to_index(a.min(b), a.max(b)) as u32);
    }
    Ok(ClusteringMatrix { n_rows: pair_count(n), n_cols: class_pair_count(m), col_of_row })
}

/// Pair counts per class pair at slice l: the column sums of the clustering
/// matrix (unordered pairs; (k, k) counts n_k(n_k-1)/2).
pub fn class_pair_counts(z: &MembershipSequence, l: usize) -> Result<Vec<usize>> {
    Ok(build_clustering_matrix(z, l)?.column_sums())
}

/// The ordered-pair convention: n_k1 * n_k2 off the diagonal and
/// n_k (n_k - 1) on it, i.e. twice the within-class column sum.
pub fn ordered_class_pair_counts(z: &MembershipSequence, l: usize) -> Vec<usize> {
    let sizes = z.class_sizes(l);
    let m = z.class_count();
    let mut out = vec![0usize; class_pair_count(m)];
    for k2 in 0..m {
        for k1 in 0..=k2 {
            let idx = class_pair_to_index(k1, k2);
            out[idx] = if k1 == k2 {
                sizes[k1] * (sizes[k1] - 1)
            } else {
                sizes[k1] * sizes[k2]
            };
        }
    }
    out
}

/// Expands memberships and class-pair probabilities into the full tensor:
/// entry (i, j, l) looks up G at the classes of i and j, diagonal zeroed.
pub fn expand_probability(z: &MembershipSequence, g: &ConnectivityTensor) -> Result<ProbabilityTensor> {
    if z.class_count() != g.m() || z.horizon() != g.horizon() {
        return Err(Error::DimensionMismatch(format!(
            "memberships (m={}, L={}) vs connectivity (m={}, L={})",
            z.class_count(),
            z.horizon(),
            g.m(),
            g.horizon()
        )));
    }
    ProbabilityTensor::from_fn(z.n(), z.horizon(), |i, j, l| {
        g.get(z.label(l, i) as usize, z.label(l, j) as usize, l)
    })
}

/// Vectorized model values theta = C q computed by direct lookup.
pub fn theta_from_model(z: &MembershipSequence, g: &ConnectivityTensor) -> Result<PairSeries> {
    if z.class_count() != g.m() || z.horizon() != g.horizon() {
        return Err(Error::DimensionMismatch("memberships vs connectivity".into()));
    }
    let mut s = PairSeries::zeros(z.n(), z.horizon());
    for l in 0..z.horizon() {
        for idx in 0..s.n_pairs() {
            let (i, j) = index_to_pair(idx);
            s.set(idx, l, g.get(z.label(l, i) as usize, z.label(l, j) as usize, l));
        }
    }
    Ok(s)
}

/// The assembled regression view of a block model: theta plus the per-slice
/// clustering matrices (the diagonal blocks of C).
#[derive(Debug, Clone)]
pub struct VectorizedModel {
    pub theta: PairSeries,
    pub clustering: Vec<ClusteringMatrix>,
}

pub fn vectorized_model(z: &MembershipSequence, g: &ConnectivityTensor) -> Result<VectorizedModel> {
    let theta = theta_from_model(z, g)?;
    let clustering = (0..z.horizon())
        .map(|l| build_clustering_matrix(z, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorizedModel { theta, clustering })
}
