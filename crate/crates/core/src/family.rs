//! Clustering-constraint families and the complexity penalty.
//!
//! A family fixes which membership sequences the search may visit: at most
//! `max_switches` nodes change class between consecutive time points, and the
//! balanced variant additionally keeps every class size within constant
//! factors of n/m. The penalty charges the log-cardinality of the family plus
//! a coefficient-count term.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::membership::MembershipSequence;
use crate::pairs::class_pair_count;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FamilyKind {
    /// Any class sizes (every class nonempty).
    Free,
    /// Class sizes within [aleph1 * n/m, aleph2 * n/m] at every time point.
    Balanced { aleph1: f64, aleph2: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterFamily {
    pub n: usize,
    pub horizon: usize,
    /// Maximum number of nodes that may switch class between consecutive
    /// time points.
    pub max_switches: usize,
    pub kind: FamilyKind,
}

impl ClusterFamily {
    pub fn free(n: usize, horizon: usize, max_switches: usize) -> Result<Self> {
        Self::new(n, horizon, max_switches, FamilyKind::Free)
    }

    pub fn balanced(n: usize, horizon: usize, max_switches: usize, aleph1: f64, aleph2: f64) -> Result<Self> {
        Self::new(n, horizon, max_switches, FamilyKind::Balanced { aleph1, aleph2 })
    }

    pub fn new(n: usize, horizon: usize, max_switches: usize, kind: FamilyKind) -> Result<Self> {
        if n < 1 || horizon < 1 {
            return Err(Error::InvalidConfig("need n >= 1 and L >= 1".into()));
        }
        if max_switches > n {
            return Err(Error::InvalidConfig(format!(
                "max_switches {max_switches} exceeds node count {n}"
            )));
        }
        if let FamilyKind::Balanced { aleph1, aleph2 } = kind {
            if !(0.0 < aleph1 && aleph1 <= 1.0 && 1.0 <= aleph2) {
                return Err(Error::InvalidConfig(format!(
                    "balance factors need 0 < aleph1 <= 1 <= aleph2, got ({aleph1}, {aleph2})"
                )));
            }
        }
        Ok(Self { n, horizon, max_switches, kind })
    }

    /// Class-size window [lo, hi] for m classes; `None` when infeasible.
    pub fn size_window(&self, m: usize) -> Option<(usize, usize)> {
        match self.kind {
            FamilyKind::Free => Some((1, self.n)),
            FamilyKind::Balanced { aleph1, aleph2 } => {
                let ratio = self.n as f64 / m as f64;
                let lo = (aleph1 * ratio).ceil() as usize;
                let hi = (aleph2 * ratio).floor() as usize;
                let lo = lo.max(1);
                if lo > hi || lo * m > self.n || hi * m < self.n {
                    None
                } else {
                    Some((lo, hi))
                }
            }
        }
    }

    pub fn feasible(&self, m: usize) -> bool {
        m >= 1 && m <= self.n && self.size_window(m).is_some()
    }

    /// Whether a membership sequence belongs to the family.
    pub fn membership_allowed(&self, z: &MembershipSequence) -> bool {
        if z.n() != self.n || z.horizon() != self.horizon {
            return false;
        }
        for l in 0..z.horizon().saturating_sub(1) {
            if z.switch_count(l) > self.max_switches {
                return false;
            }
        }
        if let Some((lo, hi)) = self.size_window(z.class_count()) {
            for l in 0..z.horizon() {
                if z.class_sizes(l).iter().any(|&s| s < lo || s > hi) {
                    return false;
                }
            }
            true
        } else {
            false
        }
    }

    /// Natural log of the number of label sequences with at most
    /// `max_switches` changes per step: n ln m + (L-1)[ln C(n, n0) + n0 ln m].
    /// With one class there is a single sequence, so the value is 0. For the
    /// balanced kind this is the same superset count (the balanced subfamily
    /// has no closed-form cardinality).
    pub fn log_cardinality(&self, m: usize) -> Result<f64> {
        if m < 1 || m > self.n {
            return Err(Error::InvalidConfig(format!("need 1 <= m <= n, got m={m}")));
        }
        if m == 1 {
            return Ok(0.0);
        }
        let n = self.n as f64;
        let lnm = (m as f64).ln();
        let mut total = n * lnm;
        if self.max_switches > 0 && self.horizon > 1 {
            let per_step = ln_binomial(self.n, self.max_switches) + self.max_switches as f64 * lnm;
            total += (self.horizon - 1) as f64 * per_step;
        }
        Ok(total)
    }

    /// Lower bound on the log-cardinality of the balanced subfamily:
    /// (1/4)[n ln m + (L-1) n0 ln(m n e / n0)]. The second return value is
    /// false when the hypothesis n >= sqrt(e n0^3) fails, in which case the
    /// bound is not claimed. Meaningful for m >= 2.
    pub fn balanced_log_cardinality_lower_bound(&self, m: usize) -> (f64, bool) {
        let n = self.n as f64;
        let n0 = self.max_switches as f64;
        let hypothesis_ok = n >= (std::f64::consts::E * n0.powi(3)).sqrt();
        let mut v = n * (m as f64).ln();
        if self.max_switches > 0 && self.horizon > 1 {
            v += (self.horizon - 1) as f64 * n0 * (m as f64 * n * std::f64::consts::E / n0).ln();
        }
        (0.25 * v, hypothesis_ok)
    }

    /// The clustering-complexity term used inside the penalty:
    /// n ln m + n0 (L-1) ln(m n e / n0), the switching factor replaced by its
    /// log-binomial upper bound. Evaluated literally at m = 1 so model
    /// selection can consider a single class.
    pub fn clustering_complexity(&self, m: usize) -> f64 {
        let n = self.n as f64;
        let n0 = self.max_switches as f64;
        let mut v = n * (m as f64).ln();
        if self.max_switches > 0 && self.horizon > 1 {
            v += n0 * (self.horizon - 1) as f64 * (m as f64 * n * std::f64::consts::E / n0).ln();
        }
        v
    }
}

fn ln_binomial(n: usize, k: usize) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut s = 0.0;
    for i in 0..k {
        s += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    s
}

/// The model-complexity penalty
/// `scale * [c1 * complexity(m) + c2 * j * ln(c3 m^2 L / j)]`
/// with defaults c1 = 11, c2 = 11/2, c3 = 25.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub family: ClusterFamily,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub scale: f64,
}

impl PenaltySpec {
    pub fn standard(family: ClusterFamily) -> Self {
        Self { family, c1: 11.0, c2: 5.5, c3: 25.0, scale: 1.0 }
    }

    /// Penalty for support size j with m classes; domain 1 <= j <= M L.
    pub fn evaluate(&self, j: usize, m: usize) -> Result<f64> {
        let max_j = class_pair_count(m) * self.family.horizon;
        if j < 1 || j > max_j {
            return Err(Error::InvalidConfig(format!(
                "support size {j} outside [1, {max_j}] for m={m}"
            )));
        }
        let l = self.family.horizon as f64;
        let jf = j as f64;
        let coeff_term = self.c2 * jf * (self.c3 * (m * m) as f64 * l / jf).ln();
        Ok(self.scale * (self.c1 * self.family.clustering_complexity(m) + coeff_term))
    }
}

/// Sparsity-adjusted penalty rate: max(rho_n, m^2 / n^2).
pub fn sparse_rate(rho_n: f64, m: usize, n: usize) -> f64 {
    let ratio = (m * m) as f64 / (n * n) as f64;
    rho_n.max(ratio)
}
