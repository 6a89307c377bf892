//! Restricted least squares against the clustering design.
//!
//! The design matrix C W^T never needs to be materialized. Clustering
//! matrices have one 1 per row, so C^T acts by summing pairs within class
//! pairs, and the Gram matrix decouples into one L x L block per class pair:
//!
//!   block_k(s, s') = sum_l H[s,l] H[s',l] count_k(l)
//!
//! With time-constant counts every block is count_k * I, the fully diagonal
//! case. Fitted values go back through Q = D H and a per-pair lookup.

use crate::basis::TemporalBasis;
use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Mat};
use crate::membership::MembershipSequence;
use crate::pairs::{class_pair_count, class_pair_to_index, index_to_pair, pair_count};
use crate::vectorize::PairSeries;

/// Cached index structure of the design for a fixed membership sequence.
#[derive(Debug, Clone)]
pub(crate) struct Design {
    pub m: usize,
    pub horizon: usize,
    pub n_pairs: usize,
    /// Class pair of each (slice, pair): `pair_class[l * N + p]`.
    pub pair_class: Vec<u32>,
    /// Pairs per class pair and slice: `counts[l * M + k]`.
    pub counts: Vec<f64>,
    /// True when every class pair has the same count at every slice.
    pub counts_constant: bool,
}

impl Design {
    pub fn new(z: &MembershipSequence) -> Self {
        let n = z.n();
        let horizon = z.horizon();
        let m = z.class_count();
        let np = pair_count(n);
        let mm = class_pair_count(m);
        let mut pair_class = vec![0u32; np * horizon];
        let mut counts = vec![0.0; mm * horizon];
        for l in 0..horizon {
            let slice = z.slice(l);
            for p in 0..np {
                let (i, j) = index_to_pair(p);
                let (a, b) = (slice[i] as usize, slice[j] as usize);
                let k = class_pair_to_index(a.min(b), a.max(b));
                pair_class[l * np + p] = k as u32;
                counts[l * mm + k] += 1.0;
            }
        }
        let counts_constant =
            (1..horizon).all(|l| counts[l * mm..(l + 1) * mm] == counts[..mm]);
        Self { m, horizon, n_pairs: np, pair_class, counts, counts_constant }
    }

    pub fn class_pairs(&self) -> usize {
        class_pair_count(self.m)
    }

    pub fn count(&self, k: usize, l: usize) -> f64 {
        self.counts[l * self.class_pairs() + k]
    }

    /// Class-pair sums of a pair series per slice: the M x L matrix C^T A.
    pub fn gather(&self, a: &PairSeries) -> Mat {
        assert_eq!(a.n_pairs(), self.n_pairs, "pair count mismatch");
        assert_eq!(a.horizon(), self.horizon, "horizon mismatch");
        let mm = self.class_pairs();
        let mut u = Mat::zeros(mm, self.horizon);
        for l in 0..self.horizon {
            for p in 0..self.n_pairs {
                let k = self.pair_class[l * self.n_pairs + p] as usize;
                u[(k, l)] += a.get(p, l);
            }
        }
        u
    }

    /// The L x L Gram block of class pair k.
    pub fn gram_block(&self, basis: &TemporalBasis, k: usize) -> Mat {
        let h = basis.matrix();
        let horizon = self.horizon;
        let mut t = Mat::zeros(horizon, horizon);
        for s in 0..horizon {
            for s2 in s..horizon {
                let mut v = 0.0;
                for l in 0..horizon {
                    v += h[(s, l)] * h[(s2, l)] * self.count(k, l);
                }
                t[(s, s2)] = v;
                t[(s2, s)] = v;
            }
        }
        t
    }

    /// Fitted values for a coefficient vector d (length M L, coefficient
    /// (k, s) at index s M + k): Q = D H, then a per-pair lookup.
    pub fn fitted_theta(&self, basis: &TemporalBasis, d: &[f64], n: usize) -> PairSeries {
        let mm = self.class_pairs();
        debug_assert_eq!(d.len(), mm * self.horizon);
        let dmat = Mat::from_vec(d, mm, self.horizon);
        let q = dmat.matmul(basis.matrix());
        let mut theta = PairSeries::zeros(n, self.horizon);
        for l in 0..self.horizon {
            for p in 0..self.n_pairs {
                let k = self.pair_class[l * self.n_pairs + p] as usize;
                theta.set(p, l, q[(k, l)]);
            }
        }
        theta
    }
}

/// Output of a restricted least-squares solve.
#[derive(Debug, Clone)]
pub struct RestrictedFit {
    /// Coefficients on the full index range, zero outside the support.
    pub coefficients: Vec<f64>,
    /// Fitted values (the projection of the data onto the design columns).
    pub fitted: PairSeries,
    /// Explicit residual sum of squares.
    pub rss: f64,
}

/// Projects the data onto the design columns selected by `support`
/// (coefficient indices into the length-M L vector). Zero-count class pairs
/// yield unidentifiable coefficients, which the pseudo-inverse fallback
/// zeroes rather than failing.
pub fn restricted_least_squares(
    a: &PairSeries,
    z: &MembershipSequence,
    basis: &TemporalBasis,
    support: &[usize],
) -> Result<RestrictedFit> {
    if z.n() != a.n() || z.horizon() != a.horizon() {
        return Err(Error::DimensionMismatch("data vs memberships".into()));
    }
    if basis.horizon() != a.horizon() {
        return Err(Error::DimensionMismatch("data vs basis length".into()));
    }
    if support.is_empty() {
        return Err(Error::SingularDesign("empty support".into()));
    }
    let design = Design::new(z);
    let mm = design.class_pairs();
    let ml = mm * design.horizon;
    let mut sorted: Vec<usize> = support.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if *sorted.last().unwrap() >= ml {
        return Err(Error::InvalidConfig(format!(
            "support index {} outside 0..{}",
            sorted.last().unwrap(),
            ml
        )));
    }
    let u = design.gather(a);
    let b = crate::basis::to_coefficients(&u, basis)?;
    let d = solve_on_support(&design, basis, &b, &sorted);
    let fitted = design.fitted_theta(basis, &d, a.n());
    let rss = a.squared_distance(&fitted);
    Ok(RestrictedFit { coefficients: d, fitted, rss })
}

/// Solves the normal equations coordinate-block by coordinate-block.
/// `b` is the M x L matrix of transformed class-pair sums (C^T a in the
/// coefficient domain).
pub(crate) fn solve_on_support(
    design: &Design,
    basis: &TemporalBasis,
    b: &Mat,
    support: &[usize],
) -> Vec<f64> {
    let mm = design.class_pairs();
    let ml = mm * design.horizon;
    let mut d = vec![0.0; ml];
    let mut per_class: Vec<Vec<usize>> = vec![Vec::new(); mm];
    for &j in support {
        per_class[j % mm].push(j / mm);
    }
    for (k, times) in per_class.iter().enumerate() {
        if times.is_empty() {
            continue;
        }
        if design.counts_constant {
            let cnt = design.count(k, 0);
            if cnt > 0.0 {
                for &s in times {
                    d[s * mm + k] = b[(k, s)] / cnt;
                }
            }
            continue;
        }
        let gram = design.gram_block(basis, k);
        let sub = Mat::from_fn(times.len(), times.len(), |r, c| gram[(times[r], times[c])]);
        let rhs: Vec<f64> = times.iter().map(|&s| b[(k, s)]).collect();
        let x = solve_spd(&sub, &rhs);
        for (r, &s) in times.iter().enumerate() {
            d[s * mm + k] = x[r];
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::rng_from;
    use crate::connectivity::ConnectivityTensor;
    use crate::vectorize::theta_from_model;
    use rand::Rng;

    fn random_series(n: usize, horizon: usize, seed: u64) -> PairSeries {
        let mut rng = rng_from(seed);
        let np = pair_count(n);
        PairSeries::new(n, horizon, (0..np * horizon).map(|_| rng.gen_range(0.0..1.0)).collect())
            .unwrap()
    }

    #[test]
    fn single_class_static_fit_is_the_grand_mean() {
        let a = random_series(5, 1, 1);
        let z = MembershipSequence::all_ones(5, 1);
        let basis = TemporalBasis::dct(1);
        let fit = restricted_least_squares(&a, &z, &basis, &[0]).unwrap();
        let mean = a.values().iter().sum::<f64>() / a.values().len() as f64;
        assert!((fit.coefficients[0] - mean).abs() < 1e-12);
        for l in 0..1 {
            for p in 0..a.n_pairs() {
                assert!((fit.fitted.get(p, l) - mean).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn noiseless_signal_in_span_is_recovered_exactly() {
        let mut rng = rng_from(2);
        let z = MembershipSequence::constant(6, 4, 2, &[0, 0, 0, 1, 1, 1]).unwrap();
        let basis = TemporalBasis::dct(4);
        let g = ConnectivityTensor::from_fn(2, 4, |_, _, _| rng.gen_range(0.1..0.9)).unwrap();
        let theta = theta_from_model(&z, &g).unwrap();
        let full: Vec<usize> = (0..3 * 4).collect();
        let fit = restricted_least_squares(&theta, &z, &basis, &full).unwrap();
        assert!(fit.rss < 1e-16, "rss {}", fit.rss);
        // reconstruct d* = Q* Hᵀ and compare
        let q = g.reduced();
        let dstar = crate::basis::to_coefficients(&q, &basis).unwrap().vec();
        for (got, want) in fit.coefficients.iter().zip(&dstar) {
            assert!((got - want).abs() < 1e-8);
        }
    }

    #[test]
    fn gram_factorizes_as_identity_kronecker_counts_when_constant() {
        // With time-constant memberships the full Gram in coefficient order
        // equals I_L (x) diag(counts): verified against the explicit design.
        let z = MembershipSequence::constant(5, 3, 2, &[0, 0, 1, 1, 1]).unwrap();
        let basis = TemporalBasis::dct(3);
        let design = Design::new(&z);
        assert!(design.counts_constant);
        let ups = explicit_design(&z, &basis);
        let gram = ups.transpose().matmul(&ups);
        let mm = design.class_pairs();
        for j1 in 0..gram.rows() {
            for j2 in 0..gram.cols() {
                let want = if j1 == j2 { design.count(j1 % mm, 0) } else { 0.0 };
                assert!((gram[(j1, j2)] - want).abs() < 1e-10, "({j1},{j2})");
            }
        }
    }

    #[test]
    fn matches_explicit_projection_on_time_varying_counts() {
        // One node switches class, so counts vary over time and the Gram has
        // off-diagonal blocks; compare against a dense normal-equations solve.
        let labels = vec![0u16, 0, 1, 1, /* l=1 */ 0, 1, 1, 1];
        let z = MembershipSequence::new(4, 2, 2, labels).unwrap();
        let basis = TemporalBasis::dct(2);
        let a = random_series(4, 2, 3);
        let support: Vec<usize> = vec![0, 1, 2, 4, 5];
        let fit = restricted_least_squares(&a, &z, &basis, &support).unwrap();

        let ups = explicit_design(&z, &basis);
        let cols = Mat::from_fn(ups.rows(), support.len(), |r, c| ups[(r, support[c])]);
        let gram = cols.transpose().matmul(&cols);
        let rhs = cols.tr_matvec(a.values());
        let x = solve_spd(&gram, &rhs);
        for (c, &j) in support.iter().enumerate() {
            assert!((fit.coefficients[j] - x[c]).abs() < 1e-8, "coef {j}");
        }
    }

    #[test]
    fn residual_is_orthogonal_to_selected_columns() {
        let z = MembershipSequence::new(5, 2, 2, vec![0, 0, 1, 1, 1, 0, 0, 0, 1, 1]).unwrap();
        let basis = TemporalBasis::dct(2);
        let a = random_series(5, 2, 4);
        let support = vec![0, 2, 3, 5];
        let fit = restricted_least_squares(&a, &z, &basis, &support).unwrap();
        let resid: Vec<f64> = a
            .values()
            .iter()
            .zip(fit.fitted.values())
            .map(|(x, y)| x - y)
            .collect();
        let ups = explicit_design(&z, &basis);
        for &j in &support {
            let mut dot = 0.0;
            for r in 0..ups.rows() {
                dot += ups[(r, j)] * resid[r];
            }
            assert!(dot.abs() < 1e-8, "column {j} inner product {dot}");
        }
    }

    #[test]
    fn zero_count_class_pair_gets_zero_coefficient() {
        // singleton class 1: the (1,1) class pair has no pairs at all
        let z = MembershipSequence::constant(4, 1, 2, &[0, 0, 0, 1]).unwrap();
        let basis = TemporalBasis::dct(1);
        let a = random_series(4, 1, 5);
        let k_11 = class_pair_to_index(1, 1);
        let fit = restricted_least_squares(&a, &z, &basis, &[k_11]).unwrap();
        assert_eq!(fit.coefficients[k_11], 0.0);
    }

    #[test]
    fn empty_support_is_rejected() {
        let z = MembershipSequence::all_ones(4, 1);
        let basis = TemporalBasis::dct(1);
        let a = random_series(4, 1, 6);
        assert!(restricted_least_squares(&a, &z, &basis, &[]).is_err());
    }

    /// Dense N L x M L design for test comparison: column (s, k) has value
    /// H[s, l] on rows of slice l whose pair falls in class pair k.
    pub(crate) fn explicit_design(z: &MembershipSequence, basis: &TemporalBasis) -> Mat {
        let design = Design::new(z);
        let (np, mm, horizon) = (design.n_pairs, design.class_pairs(), design.horizon);
        let h = basis.matrix();
        Mat::from_fn(np * horizon, mm * horizon, |row, col| {
            let (l, p) = (row / np, row % np);
            let (s, k) = (col / mm, col % mm);
            if design.pair_class[l * np + p] as usize == k {
                h[(s, l)]
            } else {
                0.0
            }
        })
    }
}
