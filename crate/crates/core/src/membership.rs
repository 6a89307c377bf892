//! Time-indexed class memberships.

use crate::error::{Error, Result};

/// Class labels z(l, i) in 0..m for every node i and time l. Every class is
/// occupied at every time point: m is the number of occupied classes, which
/// keeps the class-pair Gram matrices invertible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipSequence {
    n: usize,
    horizon: usize,
    m: usize,
    labels: Vec<u16>,
}

impl MembershipSequence {
    pub fn new(n: usize, horizon: usize, m: usize, labels: Vec<u16>) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::InvalidMembership(format!("need 1 <= m <= n, got m={m}, n={n}")));
        }
        if labels.len() != n * horizon {
            return Err(Error::InvalidMembership(format!(
                "expected {} labels, got {}",
                n * horizon,
                labels.len()
            )));
        }
        let z = Self { n, horizon, m, labels };
        for l in 0..horizon {
            let mut seen = vec![false; m];
            for i in 0..n {
                let lab = z.label(l, i) as usize;
                if lab >= m {
                    return Err(Error::InvalidMembership(format!(
                        "label {lab} out of range at (l={l}, i={i}), m={m}"
                    )));
                }
                seen[lab] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::InvalidMembership(format!("empty class at l={l}")));
            }
        }
        Ok(z)
    }

    /// Memberships constant over time.
    pub fn constant(n: usize, horizon: usize, m: usize, slice: &[u16]) -> Result<Self> {
        if slice.len() != n {
            return Err(Error::InvalidMembership(format!("expected {n} labels, got {}", slice.len())));
        }
        let mut labels = Vec::with_capacity(n * horizon);
        for _ in 0..horizon {
            labels.extend_from_slice(slice);
        }
        Self::new(n, horizon, m, labels)
    }

    /// The single-class sequence.
    pub fn all_ones(n: usize, horizon: usize) -> Self {
        Self { n, horizon, m: 1, labels: vec![0; n * horizon] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn class_count(&self) -> usize {
        self.m
    }

    pub fn label(&self, l: usize, i: usize) -> u16 {
        self.labels[l * self.n + i]
    }

    pub fn slice(&self, l: usize) -> &[u16] {
        &self.labels[l * self.n..(l + 1) * self.n]
    }

    pub fn labels(&self) -> &[u16] {
        &self.labels
    }

    pub fn class_sizes(&self, l: usize) -> Vec<usize> {
        let mut sizes = vec![0usize; self.m];
        for i in 0..self.n {
            sizes[self.label(l, i) as usize] += 1;
        }
        sizes
    }

    /// Number of nodes whose label differs between l and l+1.
    pub fn switch_count(&self, l: usize) -> usize {
        assert!(l + 1 < self.horizon, "no successor slice");
        (0..self.n)
            .filter(|&i| self.label(l, i) != self.label(l + 1, i))
            .count()
    }

    /// Relabels classes by first occurrence, scanning l = 0 first and later
    /// slices after that, so label permutations compare equal.
    pub fn canonicalize(&self) -> MembershipSequence {
        let mut map = vec![u16::MAX; self.m];
        let mut next = 0u16;
        for l in 0..self.horizon {
            for i in 0..self.n {
                let lab = self.label(l, i) as usize;
                if map[lab] == u16::MAX {
                    map[lab] = next;
                    next += 1;
                }
            }
        }
        let labels = self.labels.iter().map(|&x| map[x as usize]).collect();
        MembershipSequence { n: self.n, horizon: self.horizon, m: self.m, labels }
    }
}
