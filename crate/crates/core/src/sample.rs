//! Bernoulli sampling of adjacency tensors.

use rand::Rng;

use crate::pairs::index_to_pair;
use crate::seed::rng_from;
use crate::tensor::{AdjacencyTensor, ProbabilityTensor};

/// Draws one independent Bernoulli bit per pair and time point, mirrored to
/// both triangles. Draw order is fixed (slices outer, canonical pair order
/// inner), so a seed fully determines the sample.
pub fn sample_adjacency(lam: &ProbabilityTensor, seed: u64) -> AdjacencyTensor {
    let mut rng = rng_from(seed);
    let n = lam.n();
    let mut b = AdjacencyTensor::zeros(n, lam.horizon());
    let n_pairs = crate::pairs::pair_count(n);
    for l in 0..lam.horizon() {
        for idx in 0..n_pairs {
            let (i, j) = index_to_pair(idx);
            let u: f64 = rng.gen();
            let bit = u8::from(u < lam.get(i, j, l));
            b.set_pair(i, j, l, bit);
        }
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_probabilities_give_empty_graphs() {
        let lam = ProbabilityTensor::zeros(5, 3);
        let b = sample_adjacency(&lam, 42);
        assert!(b.data().iter().all(|&x| x == 0));
    }

    #[test]
    fn unit_probabilities_give_complete_graphs() {
        let lam = ProbabilityTensor::from_fn(5, 3, |_, _, _| 1.0).unwrap();
        let b = sample_adjacency(&lam, 42);
        for l in 0..3 {
            for i in 0..5 {
                for j in 0..5 {
                    assert_eq!(b.get(i, j, l), u8::from(i != j));
                }
            }
        }
    }

    #[test]
    fn fair_coin_mean_is_near_half() {
        // ~8700 draws; a 3-sigma band is about +-0.016, test at +-0.02.
        let lam = ProbabilityTensor::from_fn(30, 20, |_, _, _| 0.5).unwrap();
        let b = sample_adjacency(&lam, 7);
        let mut ones = 0usize;
        let mut total = 0usize;
        for l in 0..20 {
            for i in 0..30 {
                for j in i + 1..30 {
                    ones += b.get(i, j, l) as usize;
                    total += 1;
                }
            }
        }
        let mean = ones as f64 / total as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn same_seed_reproduces_the_tensor() {
        let lam = ProbabilityTensor::from_fn(8, 4, |i, j, l| {
            0.1 + 0.05 * ((i + j + l) % 10) as f64
        })
        .unwrap();
        assert_eq!(sample_adjacency(&lam, 3).data(), sample_adjacency(&lam, 3).data());
        assert_ne!(sample_adjacency(&lam, 3).data(), sample_adjacency(&lam, 4).data());
    }
}
