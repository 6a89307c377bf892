//! Orthogonal temporal bases.
//!
//! Smooth class-pair trajectories have sparse coefficients under an
//! orthogonal transform of the time axis. Two conditions matter downstream:
//! the first basis row is flat (H * 1 = sqrt(L) * e1, so constant signals
//! load on a single coefficient) and no entry exceeds 1/sqrt(L) in magnitude.
//! For a real orthonormal matrix the entry bound forces every entry to be
//! exactly +-1/sqrt(L), which is a Hadamard-type matrix, so the default
//! basis at dyadic L is the sequency-ordered Walsh matrix: row k changes
//! sign k times across the window, playing the role of a square-wave cosine
//! of frequency k. Non-dyadic lengths fall back to the orthonormal cosine-II
//! matrix, which keeps the flat first row but not the entry bound.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::seed::rng_from;

pub const ORTHOGONALITY_TOL: f64 = 1e-10;
pub const ENTRY_BOUND_TOL: f64 = 1e-12;

/// An orthogonal L x L transform of the time axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalBasis {
    h: Mat,
    is_orthogonal: bool,
    satisfies_flat_row_and_entry_bound: bool,
}

impl TemporalBasis {
    /// Default basis: sequency-ordered Walsh at power-of-two lengths,
    /// orthonormal cosine-II otherwise.
    pub fn dct(horizon: usize) -> Self {
        assert!(horizon >= 1, "need L >= 1");
        let h = if horizon.is_power_of_two() {
            walsh_sequency(horizon)
        } else {
            cosine_ii(horizon)
        };
        Self::from_checked(h)
    }

    /// Orthonormal Haar wavelet basis (dyadic lengths only). Fails the entry
    /// bound for L >= 4: the finest-scale rows have entries +-1/sqrt(2).
    pub fn haar(horizon: usize) -> Result<Self> {
        if !horizon.is_power_of_two() {
            return Err(Error::InvalidBasis(format!("haar needs a power-of-two length, got {horizon}")));
        }
        let l = horizon;
        let mut h = Mat::zeros(l, l);
        let flat = 1.0 / (l as f64).sqrt();
        for j in 0..l {
            h[(0, j)] = flat;
        }
        let mut row = 1;
        let mut scale = 1usize; // number of wavelets at this scale
        while scale < l {
            let block = l / scale;
            let amp = (scale as f64 / l as f64).sqrt();
            for k in 0..scale {
                let start = k * block;
                for j in 0..block / 2 {
                    h[(row, start + j)] = amp;
                }
                for j in block / 2..block {
                    h[(row, start + j)] = -amp;
                }
                row += 1;
            }
            scale *= 2;
        }
        Ok(Self::from_checked(h))
    }

    /// Wraps a user-supplied matrix, rejecting non-orthogonal input.
    pub fn from_matrix(h: Mat) -> Result<Self> {
        if h.rows() != h.cols() {
            return Err(Error::InvalidBasis(format!("matrix must be square, got {}x{}", h.rows(), h.cols())));
        }
        let b = Self::from_checked(h);
        if !b.is_orthogonal {
            return Err(Error::InvalidBasis("matrix is not orthogonal within 1e-10".into()));
        }
        Ok(b)
    }

    fn from_checked(h: Mat) -> Self {
        let is_orthogonal = orthogonality_defect(&h) <= ORTHOGONALITY_TOL;
        let flat = flat_row_defect(&h) <= ORTHOGONALITY_TOL;
        let l = h.rows() as f64;
        let entry = h.max_abs() <= 1.0 / l.sqrt() + ENTRY_BOUND_TOL;
        Self { h, is_orthogonal, satisfies_flat_row_and_entry_bound: flat && entry }
    }

    pub fn horizon(&self) -> usize {
        self.h.rows()
    }

    pub fn matrix(&self) -> &Mat {
        &self.h
    }

    pub fn is_orthogonal(&self) -> bool {
        self.is_orthogonal
    }

    /// Whether both structural conditions hold (flat first row and the
    /// 1/sqrt(L) entry bound).
    pub fn satisfies_h_assumption(&self) -> bool {
        self.satisfies_flat_row_and_entry_bound
    }
}

fn walsh_sequency(l: usize) -> Mat {
    // Sylvester recursion, then rows sorted by sign-change count; the counts
    // are a permutation of 0..L-1.
    let mut h = Mat::from_rows(&[vec![1.0]]);
    while h.rows() < l {
        let k = h.rows();
        let mut next = Mat::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                let v = h[(i, j)];
                next[(i, j)] = v;
                next[(i, j + k)] = v;
                next[(i + k, j)] = v;
                next[(i + k, j + k)] = -v;
            }
        }
        h = next;
    }
    let mut rows: Vec<(usize, Vec<f64>)> = (0..l)
        .map(|i| {
            let row = h.row(i).to_vec();
            let changes = row.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
            (changes, row)
        })
        .collect();
    rows.sort_by_key(|(c, _)| *c);
    debug_assert!(rows.iter().enumerate().all(|(i, (c, _))| i == *c));
    let scale = 1.0 / (l as f64).sqrt();
    Mat::from_fn(l, l, |i, j| rows[i].1[j] * scale)
}

fn cosine_ii(l: usize) -> Mat {
    let lf = l as f64;
    Mat::from_fn(l, l, |s, j| {
        if s == 0 {
            1.0 / lf.sqrt()
        } else {
            (2.0 / lf).sqrt() * (std::f64::consts::PI * s as f64 * (2 * j + 1) as f64 / (2.0 * lf)).cos()
        }
    })
}

fn orthogonality_defect(h: &Mat) -> f64 {
    let l = h.rows();
    let hht = h.matmul_transpose(h);
    let hth = h.transpose().matmul_transpose(&h.transpose());
    let mut worst = 0.0f64;
    for i in 0..l {
        for j in 0..l {
            let id = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((hht[(i, j)] - id).abs());
            worst = worst.max((hth[(i, j)] - id).abs());
        }
    }
    worst
}

fn flat_row_defect(h: &Mat) -> f64 {
    let l = h.rows();
    let ones = vec![1.0; l];
    let h1 = h.matvec(&ones);
    let mut worst = 0.0f64;
    for (s, v) in h1.iter().enumerate() {
        let want = if s == 0 { (l as f64).sqrt() } else { 0.0 };
        worst = worst.max((v - want).abs());
    }
    worst
}

/// Diagnostic report for the basis conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisConditionReport {
    /// H * 1 = sqrt(L) * e1 within 1e-10.
    pub e1_ok: bool,
    /// max |H| <= 1/sqrt(L) + 1e-12 (sufficient for the binary bound).
    pub entry_bound_ok: bool,
    /// ||H^T w||_inf <= ||w||_1 / sqrt(L) over binary w; exhaustive for
    /// L <= 16, sampled (10^4 draws, fixed seed) above that.
    pub binary_sup_ok: bool,
    pub max_abs_entry: f64,
    /// Worst observed ||H^T w||_inf * sqrt(L) / ||w||_1.
    pub worst_binary_ratio: f64,
    pub binary_check_exhaustive: bool,
}

/// Checks the basis conditions for an orthogonal matrix; a non-orthogonal
/// matrix is rejected.
pub fn check_h_assumption(h: &Mat) -> Result<BasisConditionReport> {
    if h.rows() != h.cols() {
        return Err(Error::InvalidBasis("matrix must be square".into()));
    }
    if orthogonality_defect(h) > ORTHOGONALITY_TOL {
        return Err(Error::InvalidBasis("matrix is not orthogonal within 1e-10".into()));
    }
    let l = h.rows();
    let lf = l as f64;
    let e1_ok = flat_row_defect(h) <= ORTHOGONALITY_TOL;
    let max_abs_entry = h.max_abs();
    let entry_bound_ok = max_abs_entry <= 1.0 / lf.sqrt() + ENTRY_BOUND_TOL;

    let mut worst_ratio = 0.0f64;
    let exhaustive = l <= 16;
    let mut check = |w: &[f64]| {
        let ones: f64 = w.iter().sum();
        if ones == 0.0 {
            return;
        }
        let htw = h.tr_matvec(w);
        let sup = htw.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        worst_ratio = worst_ratio.max(sup * lf.sqrt() / ones);
    };
    if exhaustive {
        for mask in 1u64..(1u64 << l) {
            let w: Vec<f64> = (0..l).map(|i| ((mask >> i) & 1) as f64).collect();
            check(&w);
        }
    } else {
        let mut rng = rng_from(0x5eed_ba5e);
        for _ in 0..10_000 {
            let w: Vec<f64> = (0..l).map(|_| f64::from(rng.gen_bool(0.5))).collect();
            check(&w);
        }
    }
    let binary_sup_ok = worst_ratio <= 1.0 + 1e-9;
    Ok(BasisConditionReport {
        e1_ok,
        entry_bound_ok,
        binary_sup_ok,
        max_abs_entry,
        worst_binary_ratio: worst_ratio,
        binary_check_exhaustive: exhaustive,
    })
}

/// Coefficients of an M x L matrix under the basis: D = Q * H^T.
pub fn to_coefficients(q: &Mat, basis: &TemporalBasis) -> Result<Mat> {
    if q.cols() != basis.horizon() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} columns, basis length is {}",
            q.cols(),
            basis.horizon()
        )));
    }
    Ok(q.matmul_transpose(basis.matrix()))
}

/// Inverse transform: Q = D * H.
pub fn from_coefficients(d: &Mat, basis: &TemporalBasis) -> Result<Mat> {
    if d.cols() != basis.horizon() {
        return Err(Error::DimensionMismatch(format!(
            "matrix has {} columns, basis length is {}",
            d.cols(),
            basis.horizon()
        )));
    }
    Ok(d.matmul(basis.matrix()))
}

/// A coefficient matrix with everything outside the support zeroed.
/// Coefficient (k, s) lives at index s * M + k of the column-stacked vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    pub d: Mat,
    pub support: Vec<usize>,
}

impl CoefficientMatrix {
    pub fn truncated(d: &Mat, support: &[usize]) -> Self {
        let (m, l) = (d.rows(), d.cols());
        let mut support: Vec<usize> = support.iter().copied().filter(|&j| j < m * l).collect();
        support.sort_unstable();
        support.dedup();
        let mut out = Mat::zeros(m, l);
        for &j in &support {
            let (k, s) = (j % m, j / m);
            out[(k, s)] = d[(k, s)];
        }
        Self { d: out, support }
    }
}
