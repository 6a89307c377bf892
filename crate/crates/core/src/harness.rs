//! Experiment runner: seeded replicates, risk metrics, high-probability
//! bound checks, CSV/JSON reporting and rate sweeps.

use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::basis::{to_coefficients, TemporalBasis};
use crate::error::{Error, Result};
use crate::exec;
use crate::family::{ClusterFamily, FamilyKind, PenaltySpec};
use crate::fit::{fit, EstimatorConfig, FitResult};
use crate::graphon::{fit_graphon, sample_graphon, GraphonFitConfig, GraphonSpec, ZetaDistribution};
use crate::linalg::Mat;
use crate::lstsq::Design;
use crate::membership::MembershipSequence;
use crate::sample::sample_adjacency;
use crate::search::SearchMode;
use crate::seed::{mix, rng_from};
use crate::sparse::{fit_sparse, SparseConfig};
use crate::support::SupportRule;
use crate::tensor::ProbabilityTensor;
use crate::vectorize::{theta_from_model, vectorize, PairSeries};
use rand::Rng;

pub const SCHEMA_VERSION: u32 = 1;

/// Block-model generator: class-pair levels plus a decaying temporal
/// component. Coefficient rows start at level_k * sqrt(L) and decay like
/// s^-(nu0 + 0.55), so the transform coefficients are summable with margin;
/// the resulting probabilities are shrunk affinely into [0.1, 0.9] only if
/// they leave that range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DsbmGeneratorSpec {
    pub m_star: usize,
    /// Class-pair levels in canonical order, length m*(m*+1)/2.
    pub levels: Vec<f64>,
    #[serde(default)]
    pub wiggle: f64,
    #[serde(default = "default_nu0")]
    pub nu0: f64,
    /// Nodes switching class per step in the generated truth (realized as
    /// balance-preserving swaps, so odd budgets round down).
    #[serde(default)]
    pub max_switches: usize,
}

fn default_nu0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GeneratorSpec {
    Dsbm(DsbmGeneratorSpec),
    Graphon { spec: GraphonSpec, zeta: ZetaDistribution },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Pipeline {
    #[default]
    Dsbm,
    Graphon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BasisKind {
    #[default]
    Dct,
    Haar,
}

impl BasisKind {
    pub fn build(&self, horizon: usize) -> Result<TemporalBasis> {
        match self {
            BasisKind::Dct => Ok(TemporalBasis::dct(horizon)),
            BasisKind::Haar => TemporalBasis::haar(horizon),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseSettings {
    pub rho_n: f64,
    #[serde(default = "default_lambda0")]
    pub lambda0: f64,
}

fn default_lambda0() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSettings {
    pub m_max: usize,
    #[serde(default = "default_family_kind")]
    pub family: FamilyKind,
    #[serde(default)]
    pub max_switches: usize,
    #[serde(default)]
    pub basis: BasisKind,
    #[serde(default = "default_search")]
    pub search: SearchMode,
    #[serde(default = "default_rule")]
    pub support_rule: SupportRule,
    #[serde(default = "default_true")]
    pub clamp: bool,
    #[serde(default)]
    pub sparse: Option<SparseSettings>,
    #[serde(default)]
    pub pipeline: Pipeline,
}

fn default_family_kind() -> FamilyKind {
    FamilyKind::Free
}

fn default_search() -> SearchMode {
    SearchMode::Heuristic { restarts: 4 }
}

fn default_rule() -> SupportRule {
    SupportRule::ExactDiagonal
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub n: usize,
    pub horizon: usize,
    pub generator: GeneratorSpec,
    pub estimator: EstimatorSettings,
    pub replicates: usize,
    pub master_seed: u64,
    #[serde(default = "default_t_values")]
    pub t_values: Vec<f64>,
    /// Feed the estimator the exact probabilities instead of Bernoulli draws.
    #[serde(default)]
    pub noiseless: bool,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_t_values() -> Vec<f64> {
    vec![3.0]
}

/// Ground truth of one generated block-model instance.
#[derive(Debug, Clone)]
pub struct DsbmTruth {
    pub lambda: ProbabilityTensor,
    pub theta: PairSeries,
    pub z: MembershipSequence,
    /// Class-pair probabilities, M* x L.
    pub q: Mat,
    /// Transform coefficients of q, M* x L.
    pub d: Mat,
    pub m_star: usize,
}

/// Builds a block-model truth: contiguous balanced classes (optionally with
/// balance-preserving label swaps over time) and smooth class-pair curves.
pub fn generate_dsbm(
    spec: &DsbmGeneratorSpec,
    n: usize,
    horizon: usize,
    basis: &TemporalBasis,
    seed: u64,
) -> Result<DsbmTruth> {
    let m = spec.m_star;
    if m < 1 || m > n {
        return Err(Error::InvalidConfig(format!("need 1 <= m_star <= n, got {m}")));
    }
    let mm = crate::pairs::class_pair_count(m);
    if spec.levels.len() != mm {
        return Err(Error::InvalidConfig(format!(
            "need {} class-pair levels for m_star={m}, got {}",
            mm,
            spec.levels.len()
        )));
    }
    if basis.horizon() != horizon {
        return Err(Error::DimensionMismatch("basis vs horizon".into()));
    }
    // contiguous near-balanced first slice
    let mut first = vec![0u16; n];
    let base = n / m;
    let extra = n % m;
    let mut idx = 0;
    for c in 0..m {
        let size = base + usize::from(c < extra);
        for _ in 0..size {
            first[idx] = c as u16;
            idx += 1;
        }
    }
    let mut labels = first.clone();
    let mut rng = rng_from(mix(seed, 0xC1A5));
    let mut prev = first;
    for _l in 1..horizon {
        let mut cur = prev.clone();
        let swaps = spec.max_switches / 2;
        for _ in 0..swaps {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if cur[i] != cur[j] {
                cur.swap(i, j);
            }
        }
        labels.extend_from_slice(&cur);
        prev = cur;
    }
    let z = MembershipSequence::new(n, horizon, m, labels)?;

    let lf = horizon as f64;
    let mut d = Mat::zeros(mm, horizon);
    for k in 0..mm {
        d[(k, 0)] = spec.levels[k] * lf.sqrt();
    }
    if spec.wiggle > 0.0 && horizon > 1 {
        let decay: Vec<f64> = (1..horizon).map(|s| (s as f64).powf(-(spec.nu0 + 0.55))).collect();
        let zsum: f64 = decay.iter().sum();
        for k in 0..mm {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            for s in 1..horizon {
                d[(k, s)] = sign * spec.wiggle * lf.sqrt() * decay[s - 1] / zsum;
            }
        }
    }
    let mut q = d.matmul(basis.matrix());
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in q.data() {
        lo = lo.min(*v);
        hi = hi.max(*v);
    }
    // Requested levels are kept verbatim while they are valid probabilities;
    // only an overflowing construction is squeezed into [0.1, 0.9].
    if lo < 0.0 || hi > 1.0 {
        let scale = if hi > lo { 0.8 / (hi - lo) } else { 0.0 };
        let shift = 0.1 - scale * lo;
        q = Mat::from_fn(mm, horizon, |k, l| scale * q[(k, l)] + shift);
    }
    let d = to_coefficients(&q, basis)?;
    let g = crate::connectivity::ConnectivityTensor::from_reduced(&q, m)?;
    let lambda = crate::vectorize::expand_probability(&z, &g)?;
    let theta = theta_from_model(&z, &g)?;
    Ok(DsbmTruth { lambda, theta, z, q, d, m_star: m })
}

/// One evaluated high-probability bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub t: f64,
    pub bias_component: f64,
    pub penalty_component: f64,
    pub deviation_component: f64,
    pub bound: f64,
    pub satisfied: bool,
}

/// Evaluates the feasible-point risk bound at the generating model:
/// min over nested truncations J of the true coefficients of
/// [6 ||theta_J - theta*||^2 + 4 Pen(|J|, m*)] / (n^2 L) + 38 t / (n^2 L),
/// a valid upper bound for the oracle minimum since every truncation is a
/// feasible choice. `mse` is checked against it.
pub fn oracle_inequality_check(
    truth: &DsbmTruth,
    penalty: &PenaltySpec,
    basis: &TemporalBasis,
    mse: f64,
    t: f64,
) -> Result<BoundCheck> {
    let n = truth.lambda.n();
    let horizon = truth.lambda.horizon();
    let norm = (n * n) as f64 * horizon as f64;
    let mm = crate::pairs::class_pair_count(truth.m_star);
    let ml = mm * horizon;
    let dvec = truth.d.vec();
    let mut order: Vec<usize> = (0..ml).collect();
    order.sort_by(|&i, &j| dvec[j].abs().partial_cmp(&dvec[i].abs()).unwrap().then(i.cmp(&j)));
    let design = Design::new(&truth.z);
    let mut best = f64::INFINITY;
    let mut best_parts = (0.0, 0.0);
    let mut kept = vec![0.0; ml];
    for j in 1..=ml {
        kept[order[j - 1]] = dvec[order[j - 1]];
        let theta_j = design.fitted_theta(basis, &kept, n);
        let bias = theta_j.squared_distance(&truth.theta);
        let pen = penalty.evaluate(j, truth.m_star)?;
        let value = (6.0 * bias + 4.0 * pen) / norm;
        if value < best {
            best = value;
            best_parts = (6.0 * bias / norm, 4.0 * pen / norm);
        }
    }
    let deviation = 38.0 * t / norm;
    let bound = best + deviation;
    Ok(BoundCheck {
        t,
        bias_component: best_parts.0,
        penalty_component: best_parts.1,
        deviation_component: deviation,
        bound,
        satisfied: mse <= bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub replicate: usize,
    pub seed: u64,
    pub m_hat: usize,
    pub support_size: usize,
    /// Truncation length of the graphon pipeline, when used.
    pub l1_hat: Option<usize>,
    pub objective: f64,
    pub penalty_value: f64,
    pub mse: f64,
    pub bounds: Vec<BoundCheck>,
    pub error: Option<String>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub t: f64,
    pub violation_frequency: f64,
    /// 9 e^-t plus three binomial standard deviations.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub replicates_ok: usize,
    pub replicates_failed: usize,
    pub mean_mse: f64,
    pub median_mse: f64,
    pub mean_objective: f64,
    pub m_hat_histogram: Vec<(usize, usize)>,
    pub coverage: Vec<CoverageSummary>,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub config: ExperimentConfig,
    pub records: Vec<ResultRecord>,
    pub summary: ExperimentSummary,
}

pub fn build_estimator_config(
    settings: &EstimatorSettings,
    n: usize,
    horizon: usize,
    seed: u64,
) -> Result<EstimatorConfig> {
    let family = ClusterFamily::new(n, horizon, settings.max_switches, settings.family.clone())?;
    let basis = settings.basis.build(horizon)?;
    Ok(EstimatorConfig::new(family, basis, settings.m_max)?
        .with_search(settings.search)
        .with_support_rule(settings.support_rule)
        .with_clamp(settings.clamp)
        .with_seed(seed))
}

/// Runs all replicates (in parallel with the `parallel` feature), collecting
/// records by replicate id so the output order is deterministic. Generator or
/// estimator failures are recorded per replicate and the run continues.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    if config.schema_version != SCHEMA_VERSION {
        return Err(Error::InvalidConfig(format!(
            "config schema {} unsupported (expected {SCHEMA_VERSION})",
            config.schema_version
        )));
    }
    if config.replicates < 1 {
        return Err(Error::InvalidConfig("need at least one replicate".into()));
    }
    let records = exec::map_indexed(config.replicates, |r| run_replicate(config, r));
    let summary = summarize(config, &records);
    Ok(ExperimentRun { config: config.clone(), records, summary })
}

fn run_replicate(config: &ExperimentConfig, replicate: usize) -> ResultRecord {
    let start = Instant::now();
    let seed = mix(config.master_seed, replicate as u64);
    let mut record = ResultRecord {
        replicate,
        seed,
        m_hat: 0,
        support_size: 0,
        l1_hat: None,
        objective: f64::NAN,
        penalty_value: f64::NAN,
        mse: f64::NAN,
        bounds: Vec::new(),
        error: None,
        wall_ms: 0.0,
    };
    match replicate_body(config, seed, &mut record) {
        Ok(()) => {}
        Err(e) => record.error = Some(e.to_string().replace(',', ";")),
    }
    record.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    record
}

fn replicate_body(config: &ExperimentConfig, seed: u64, record: &mut ResultRecord) -> Result<()> {
    let n = config.n;
    let horizon = config.horizon;
    let gen_basis = TemporalBasis::dct(horizon);
    let (lambda_true, dsbm_truth) = match &config.generator {
        GeneratorSpec::Dsbm(spec) => {
            let truth = generate_dsbm(spec, n, horizon, &gen_basis, mix(seed, 1))?;
            (truth.lambda.clone(), Some(truth))
        }
        GeneratorSpec::Graphon { spec, zeta } => {
            let (lambda, _) = sample_graphon(spec, n, horizon, *zeta, mix(seed, 1))?;
            (lambda, None)
        }
    };
    let a = if config.noiseless {
        vectorize(&lambda_true)
    } else {
        PairSeries::from_adjacency(&sample_adjacency(&lambda_true, mix(seed, 2)))
    };

    let norm = (n * n) as f64 * horizon as f64;
    let (lambda_hat, penalty_for_bounds) = match config.estimator.pipeline {
        Pipeline::Dsbm => {
            let est = build_estimator_config(&config.estimator, n, horizon, mix(seed, 3))?;
            let result: FitResult = match &config.estimator.sparse {
                None => fit(&a, &est)?,
                Some(s) => {
                    let sparse = SparseConfig::new(s.rho_n, s.lambda0, est.clone())?;
                    fit_sparse(&a, &sparse)?
                }
            };
            record.m_hat = result.m_hat;
            record.support_size = result.support.len();
            record.objective = result.objective;
            record.penalty_value = result.diagnostics.penalty_value;
            (result.lambda_hat, Some(est.penalty))
        }
        Pipeline::Graphon => {
            let basis = config.estimator.basis.build(horizon)?;
            let gcfg = GraphonFitConfig::new(basis, config.estimator.m_max)
                .with_seed(mix(seed, 3))
                .with_restarts(match config.estimator.search {
                    SearchMode::Heuristic { restarts } => restarts,
                    SearchMode::Exhaustive => 1,
                });
            let result = fit_graphon(&a, &gcfg)?;
            record.m_hat = result.m_hat;
            record.support_size = result.support.len();
            record.l1_hat = Some(result.l1_hat);
            record.objective = result.objective;
            record.penalty_value = result.penalty_value;
            (result.lambda_hat, None)
        }
    };
    record.mse = lambda_hat.squared_distance(&lambda_true) / norm;
    if let (Some(truth), Some(penalty)) = (&dsbm_truth, &penalty_for_bounds) {
        let basis = config.estimator.basis.build(horizon)?;
        for &t in &config.t_values {
            record
                .bounds
                .push(oracle_inequality_check(truth, penalty, &basis, record.mse, t)?);
        }
    }
    Ok(())
}

fn summarize(config: &ExperimentConfig, records: &[ResultRecord]) -> ExperimentSummary {
    let ok: Vec<&ResultRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let mut mses: Vec<f64> = ok.iter().map(|r| r.mse).collect();
    mses.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mean_mse = if mses.is_empty() { f64::NAN } else { mses.iter().sum::<f64>() / mses.len() as f64 };
    let mean_objective = if ok.is_empty() {
        f64::NAN
    } else {
        ok.iter().map(|r| r.objective).sum::<f64>() / ok.len() as f64
    };
    let mut hist = std::collections::BTreeMap::new();
    for r in &ok {
        *hist.entry(r.m_hat).or_insert(0usize) += 1;
    }
    let coverage = config
        .t_values
        .iter()
        .map(|&t| {
            let (mut total, mut violated) = (0usize, 0usize);
            for r in &ok {
                if let Some(b) = r.bounds.iter().find(|b| b.t == t) {
                    total += 1;
                    violated += usize::from(!b.satisfied);
                }
            }
            let p = (9.0 * (-t).exp()).min(1.0);
            let sigma = if total > 0 { (p * (1.0 - p) / total as f64).sqrt() } else { 0.0 };
            CoverageSummary {
                t,
                violation_frequency: if total > 0 { violated as f64 / total as f64 } else { f64::NAN },
                threshold: p + 3.0 * sigma,
            }
        })
        .collect();
    ExperimentSummary {
        replicates_ok: ok.len(),
        replicates_failed: records.len() - ok.len(),
        mean_mse,
        median_mse: median(&mses),
        mean_objective,
        m_hat_histogram: hist.into_iter().collect(),
        coverage,
    }
}

pub fn median(sorted: &[f64]) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let mid = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        0.5 * (sorted[mid - 1] + sorted[mid])
    }
}

/// CSV serialization. The wall-time column is last so determinism checks can
/// strip it; everything else is a pure function of config and master seed.
pub fn csv_string(run: &ExperimentRun) -> String {
    let mut out = String::new();
    out.push_str("replicate,seed,m_hat,support_size,l1_hat,objective,penalty,mse");
    for t in &run.config.t_values {
        out.push_str(&format!(",bound_t{t},covered_t{t}"));
    }
    out.push_str(",error,wall_ms\n");
    for r in &run.records {
        let l1 = r.l1_hat.map_or(String::new(), |v| v.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}",
            r.replicate, r.seed, r.m_hat, r.support_size, l1, r.objective, r.penalty_value, r.mse
        ));
        for t in &run.config.t_values {
            match r.bounds.iter().find(|b| b.t == *t) {
                Some(b) => out.push_str(&format!(",{},{}", b.bound, b.satisfied)),
                None => out.push_str(",,"),
            }
        }
        out.push_str(&format!(",{},{}\n", r.error.clone().unwrap_or_default(), r.wall_ms));
    }
    out
}

pub fn write_csv(run: &ExperimentRun, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(csv_string(run).as_bytes())?;
    Ok(())
}

pub fn write_summary_json(run: &ExperimentRun, path: &Path) -> Result<()> {
    let body = serde_json::json!({
        "schema_version": run.config.schema_version,
        "config": &run.config,
        "summary": &run.summary,
    });
    std::fs::write(path, serde_json::to_string_pretty(&body)?)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Nodes,
    Horizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: usize,
    pub median_mse: f64,
    pub mean_mse: f64,
    pub median_l1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: SweepAxis,
    pub points: Vec<SweepPoint>,
    /// Log-log OLS slope of median mse against the swept value.
    pub slope: f64,
    /// Bootstrap percentile interval (2.5%, 97.5%) for the slope.
    pub slope_interval: (f64, f64),
}

/// Runs the experiment across a grid of n or L values and reports the
/// log-log decay rate of the median risk with a bootstrap interval.
pub fn rate_sweep(base: &ExperimentConfig, axis: SweepAxis, values: &[usize]) -> Result<SweepReport> {
    if values.len() < 3 {
        return Err(Error::InvalidConfig("sweep needs at least three grid points".into()));
    }
    let mut per_point: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    let mut points = Vec::with_capacity(values.len());
    for (i, &v) in values.iter().enumerate() {
        let mut config = base.clone();
        match axis {
            SweepAxis::Nodes => config.n = v,
            SweepAxis::Horizon => config.horizon = v,
        }
        config.master_seed = mix(base.master_seed, 0x5EE9 + i as u64);
        let run = run_experiment(&config)?;
        let mut mses: Vec<f64> = run
            .records
            .iter()
            .filter(|r| r.error.is_none())
            .map(|r| r.mse)
            .collect();
        if mses.is_empty() {
            return Err(Error::Infeasible(format!("no successful replicate at value {v}")));
        }
        mses.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let l1s: Vec<f64> = run
            .records
            .iter()
            .filter(|r| r.error.is_none())
            .filter_map(|r| r.l1_hat.map(|x| x as f64))
            .collect();
        let median_l1 = if l1s.is_empty() {
            None
        } else {
            let mut s = l1s.clone();
            s.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Some(median(&s))
        };
        points.push(SweepPoint {
            value: v,
            median_mse: median(&mses),
            mean_mse: mses.iter().sum::<f64>() / mses.len() as f64,
            median_l1,
        });
        per_point.push(mses);
    }
    let xs: Vec<f64> = values.iter().map(|&v| (v as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.median_mse.ln()).collect();
    let slope = ols_slope(&xs, &ys);
    // bootstrap over replicates within each grid point
    let mut slopes = Vec::with_capacity(200);
    for b in 0..200u64 {
        let mut rng = rng_from(mix(base.master_seed, 0xB007 + b));
        let ys_b: Vec<f64> = per_point
            .iter()
            .map(|mses| {
                let mut resampled: Vec<f64> =
                    (0..mses.len()).map(|_| mses[rng.gen_range(0..mses.len())]).collect();
                resampled.sort_by(|a, b| a.partial_cmp(b).unwrap());
                median(&resampled).ln()
            })
            .collect();
        slopes.push(ols_slope(&xs, &ys_b));
    }
    slopes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let lo = slopes[(0.025 * slopes.len() as f64) as usize];
    let hi = slopes[((0.975 * slopes.len() as f64) as usize).min(slopes.len() - 1)];
    Ok(SweepReport { axis, points, slope, slope_interval: (lo, hi) })
}

fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}
