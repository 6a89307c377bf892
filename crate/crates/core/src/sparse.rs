//! Uniformly sparse variant: the penalty is rescaled by
//! lambda0 * max(rho_n, m^2/n^2), which adapts the complexity charge when all
//! connection probabilities are bounded by a small rho_n.

use rand::Rng;

use crate::basis::TemporalBasis;
use crate::error::{Error, Result};
use crate::family::{sparse_rate, ClusterFamily, FamilyKind};
use crate::fit::{fit_scaled, EstimatorConfig, FitResult};
use crate::lstsq::restricted_least_squares;
use crate::membership::MembershipSequence;
use crate::pairs::pair_count;
use crate::seed::{mix, rng_from};
use crate::vectorize::PairSeries;

#[derive(Debug, Clone)]
pub struct SparseConfig {
    /// Known upper bound on the connection probabilities, in (0, 1].
    pub rho_n: f64,
    /// Tuning factor, order one.
    pub lambda0: f64,
    pub base: EstimatorConfig,
}

impl SparseConfig {
    pub fn new(rho_n: f64, lambda0: f64, base: EstimatorConfig) -> Result<Self> {
        if !(0.0 < rho_n && rho_n <= 1.0) {
            return Err(Error::InvalidConfig(format!("rho_n must be in (0,1], got {rho_n}")));
        }
        if lambda0 <= 0.0 {
            return Err(Error::InvalidConfig(format!("lambda0 must be positive, got {lambda0}")));
        }
        if !matches!(base.family.kind, FamilyKind::Balanced { .. }) {
            return Err(Error::InvalidConfig("sparse fitting requires the balanced family".into()));
        }
        Ok(Self { rho_n, lambda0, base })
    }
}

/// Same pipeline as the plain fit with the penalty multiplied by
/// lambda0 * max(rho_n, m^2/n^2) for each candidate m. With a unit factor it
/// reproduces the plain fit exactly.
pub fn fit_sparse(a: &PairSeries, config: &SparseConfig) -> Result<FitResult> {
    let n = config.base.family.n;
    let (rho, lambda0) = (config.rho_n, config.lambda0);
    fit_scaled(a, &config.base, &move |m| lambda0 * sparse_rate(rho, m, n))
}

/// Monte Carlo probe of the sup-norm contraction of the residual projector:
/// the worst observed ratio ||theta - P theta||_inf / ||theta||_inf over
/// random balanced clusterings, rectangular supports and random inputs. A
/// diagnostic, not a proof.
#[derive(Debug, Clone)]
pub struct ResidualSupReport {
    pub worst_ratio: f64,
    pub trials: usize,
}

pub fn check_a1_diagnostic(
    basis: &TemporalBasis,
    family: &ClusterFamily,
    trials: usize,
    seed: u64,
) -> Result<ResidualSupReport> {
    let n = family.n;
    let horizon = family.horizon;
    if basis.horizon() != horizon {
        return Err(Error::DimensionMismatch("basis vs family horizon".into()));
    }
    let np = pair_count(n);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let mut rng = rng_from(mix(seed, t as u64));
        let m = rng.gen_range(1..=family_max_m(family));
        let z = random_balanced_membership(family, m, &mut rng)?;
        let mm = crate::pairs::class_pair_count(m);
        let l1 = rng.gen_range(1..=horizon);
        let support: Vec<usize> = (0..mm * l1).collect(); // first l1 coefficient columns
        let theta = PairSeries::new(
            n,
            horizon,
            (0..np * horizon).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        )?;
        let fitted = restricted_least_squares(&theta, &z, basis, &support)?.fitted;
        let sup_in = theta.values().iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        if sup_in == 0.0 {
            continue;
        }
        let sup_res = theta
            .values()
            .iter()
            .zip(fitted.values())
            .fold(0.0f64, |a, (&x, &y)| a.max((x - y).abs()));
        worst = worst.max(sup_res / sup_in);
    }
    Ok(ResidualSupReport { worst_ratio: worst, trials })
}

fn family_max_m(family: &ClusterFamily) -> usize {
    (1..=family.n).rev().find(|&m| family.feasible(m)).unwrap_or(1)
}

fn random_balanced_membership(
    family: &ClusterFamily,
    m: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<MembershipSequence> {
    let n = family.n;
    // round-robin sizes satisfy any feasible window, then shuffle node order
    let mut slice: Vec<u16> = (0..n).map(|i| (i % m) as u16).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        slice.swap(i, j);
    }
    MembershipSequence::constant(n, family.horizon, m, &slice)
}
