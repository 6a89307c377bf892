//! Canonical index maps for node pairs and class pairs.
//!
//! Node pairs (i1, i2) with i1 < i2 are enumerated column-major over the
//! triangle: for j = 1..n, all i < j. Class pairs (k1, k2) with k1 <= k2 are
//! enumerated the same way but including the diagonal. The math downstream
//! does not care about the order; one canonical choice is fixed so files and
//! vectors are bit-comparable.

/// Number of unordered node pairs, N = n(n-1)/2.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Row index of the pair (i, j) with i < j (0-based).
pub fn pair_to_index(i: usize, j: usize) -> usize {
    debug_assert!(i < j);
    j * (j - 1) / 2 + i
}

/// Inverse of [`pair_to_index`].
pub fn index_to_pair(idx: usize) -> (usize, usize) {
    // j is the largest integer with j(j-1)/2 <= idx.
    let mut j = ((2.0 * idx as f64 + 0.25).sqrt() + 0.5) as usize;
    while j * (j - 1) / 2 > idx {
        j -= 1;
    }
    while (j + 1) * j / 2 <= idx {
        j += 1;
    }
    (idx - j * (j - 1) / 2, j)
}

/// Number of unordered class pairs including the diagonal, M = m(m+1)/2.
pub fn class_pair_count(m: usize) -> usize {
    m * (m + 1) / 2
}

/// Column index of the class pair (k1, k2) with k1 <= k2 (0-based).
pub fn class_pair_to_index(k1: usize, k2: usize) -> usize {
    debug_assert!(k1 <= k2);
    k2 * (k2 + 1) / 2 + k1
}

/// Inverse of [`class_pair_to_index`].
pub fn index_to_class_pair(idx: usize) -> (usize, usize) {
    let mut k2 = ((2.0 * idx as f64 + 0.25).sqrt() - 0.5) as usize;
    while k2 * (k2 + 1) / 2 > idx {
        k2 -= 1;
    }
    while (k2 + 1) * (k2 + 2) / 2 <= idx {
        k2 += 1;
    }
    (idx - k2 * (k2 + 1) / 2, k2)
}
