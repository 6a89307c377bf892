//! Penalized least-squares estimation with model selection over the class
//! count.
//!
//! For every m in 1..=m_max the clustering search and support selection run
//! independently (in parallel with the `parallel` feature); the winner is the
//! smallest penalized objective with deterministic tie-breaking: smaller m,
//! then smaller support, then lexicographically smallest canonical labels.

use crate::basis::TemporalBasis;
use crate::error::{Error, Result};
use crate::exec;
use crate::family::{ClusterFamily, PenaltySpec};
use crate::membership::MembershipSequence;
use crate::search::{search_clustering_full, SearchMode};
use crate::seed::mix;
use crate::support::SupportRule;
use crate::tensor::{AdjacencyTensor, ProbabilityTensor};
use crate::vectorize::{devectorize_clamped, devectorize_raw, PairSeries};

#[derive(Debug, Clone)]
pub struct EstimatorConfig {
    /// Class counts 1..=m_max are tried.
    pub m_max: usize,
    pub family: ClusterFamily,
    pub basis: TemporalBasis,
    pub penalty: PenaltySpec,
    pub search: SearchMode,
    pub support_rule: SupportRule,
    /// Clamp the estimated probabilities into [0, 1] (raw values are kept in
    /// the diagnostics either way).
    pub clamp_output: bool,
    pub seed: u64,
}

impl EstimatorConfig {
    pub fn new(family: ClusterFamily, basis: TemporalBasis, m_max: usize) -> Result<Self> {
        if m_max < 1 || m_max > family.n {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= m_max <= n, got m_max={m_max}, n={}",
                family.n
            )));
        }
        if basis.horizon() != family.horizon {
            return Err(Error::InvalidConfig(format!(
                "basis length {} vs family horizon {}",
                basis.horizon(),
                family.horizon
            )));
        }
        let penalty = PenaltySpec::standard(family.clone());
        Ok(Self {
            m_max,
            family,
            basis,
            penalty,
            search: SearchMode::default(),
            support_rule: SupportRule::ExactDiagonal,
            clamp_output: true,
            seed: 0,
        })
    }

    pub fn with_search(mut self, search: SearchMode) -> Self {
        self.search = search;
        self
    }

    pub fn with_support_rule(mut self, rule: SupportRule) -> Self {
        self.support_rule = rule;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_clamp(mut self, clamp: bool) -> Self {
        self.clamp_output = clamp;
        self
    }

    pub fn with_penalty_scale(mut self, scale: f64) -> Self {
        self.penalty.scale = scale;
        self
    }
}

#[derive(Debug, Clone)]
pub struct FitDiagnostics {
    pub rss: f64,
    pub penalty_value: f64,
    /// Estimated tensor before clamping, full n x n x L layout.
    pub lambda_raw: Vec<f64>,
    /// Penalized objective per candidate m (None when that m failed or was
    /// infeasible).
    pub per_m_objective: Vec<(usize, Option<f64>)>,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub m_hat: usize,
    /// Selected coefficient indices into the length-(M L) coefficient vector.
    pub support: Vec<usize>,
    /// Coefficients, zero outside the support.
    pub coefficients: Vec<f64>,
    pub memberships: MembershipSequence,
    pub objective: f64,
    pub lambda_hat: ProbabilityTensor,
    pub theta_hat: PairSeries,
    pub diagnostics: FitDiagnostics,
}

/// Fits the estimator to vectorized data (binary or real-valued).
pub fn fit(a: &PairSeries, config: &EstimatorConfig) -> Result<FitResult> {
    fit_scaled(a, config, &|_m| 1.0)
}

/// Fits directly from an observed adjacency tensor.
pub fn fit_adjacency(b: &AdjacencyTensor, config: &EstimatorConfig) -> Result<FitResult> {
    fit(&PairSeries::from_adjacency(b), config)
}

/// Core fit with a per-m penalty multiplier (the sparse variant rescales the
/// penalty by a rate depending on m).
pub(crate) fn fit_scaled(
    a: &PairSeries,
    config: &EstimatorConfig,
    pen_scale_for_m: &(dyn Fn(usize) -> f64 + Sync),
) -> Result<FitResult> {
    if a.n() != config.family.n || a.horizon() != config.family.horizon {
        return Err(Error::DimensionMismatch(format!(
            "data is {}x{}, family expects {}x{}",
            a.n(),
            a.horizon(),
            config.family.n,
            config.family.horizon
        )));
    }
    let candidates = exec::map_indexed(config.m_max, |mi| {
        let m = mi + 1;
        if !config.family.feasible(m) {
            return (m, Err(Error::Infeasible(format!("m={m} infeasible"))));
        }
        let outcome = search_clustering_full(
            a,
            m,
            &config.family,
            &config.basis,
            &config.penalty,
            config.support_rule,
            config.search,
            mix(config.seed, m as u64),
            pen_scale_for_m(m),
        );
        (m, outcome)
    });

    let per_m_objective: Vec<(usize, Option<f64>)> = candidates
        .iter()
        .map(|(m, r)| (*m, r.as_ref().ok().map(|o| o.fit.objective)))
        .collect();

    let mut best: Option<(usize, crate::search::SearchOutcome)> = None;
    let mut first_err: Option<Error> = None;
    for (m, outcome) in candidates {
        match outcome {
            Ok(o) => {
                let better = match &best {
                    None => true,
                    Some((bm, b)) => {
                        let (bo, bj) = (b.fit.objective, b.fit.support.len());
                        let (no, nj) = (o.fit.objective, o.fit.support.len());
                        if (no - bo).abs() > 1e-12 {
                            no < bo
                        } else if m != *bm {
                            m < *bm
                        } else if nj != bj {
                            nj < bj
                        } else {
                            o.z.canonicalize().labels() < b.z.canonicalize().labels()
                        }
                    }
                };
                if better {
                    best = Some((m, o));
                }
            }
            Err(e) => {
                if first_err.is_none() {
                    first_err = Some(e);
                }
            }
        }
    }
    let (m_hat, outcome) = best.ok_or_else(|| {
        first_err.unwrap_or_else(|| Error::Infeasible("no feasible class count".into()))
    })?;

    let design = crate::lstsq::Design::new(&outcome.z);
    let theta_hat = design.fitted_theta(&config.basis, &outcome.fit.coefficients, a.n());
    let lambda_raw = devectorize_raw(&theta_hat);
    let lambda_hat = if config.clamp_output {
        devectorize_clamped(&theta_hat)
    } else {
        ProbabilityTensor::new(a.n(), a.horizon(), lambda_raw.clone())
            .map_err(|_| Error::InvalidTensor("estimate leaves [0,1]; enable clamping".into()))?
    };
    Ok(FitResult {
        m_hat,
        support: outcome.fit.support.clone(),
        coefficients: outcome.fit.coefficients.clone(),
        memberships: outcome.z.clone(),
        objective: outcome.fit.objective,
        lambda_hat,
        theta_hat,
        diagnostics: FitDiagnostics {
            rss: outcome.fit.rss,
            penalty_value: outcome.fit.penalty_value,
            lambda_raw,
            per_m_objective,
        },
    })
}
