//! Dynamic graphon sampling and estimation.
//!
//! A graphon assigns each node a latent position in [0, 1]; connection
//! probabilities are a symmetric function f(x, y, t) evaluated at the
//! positions and the (scaled) observation times. Estimation approximates the
//! graphon by a block model whose memberships do not change in time and whose
//! temporal coefficients are truncated to the first L1 transform columns,
//! with L1 selected by a penalized objective.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::basis::TemporalBasis;
use crate::error::{Error, Result};
use crate::exec;
use crate::linalg::Mat;
use crate::membership::MembershipSequence;
use crate::pairs::{class_pair_count, class_pair_to_index, index_to_pair, pair_count};
use crate::search::{kmeans, repair_partition, spectral_embedding};
use crate::seed::{mix, rng_from};
use crate::tensor::ProbabilityTensor;
use crate::vectorize::{devectorize_clamped, devectorize_raw, PairSeries};

/// Temporal modulation shapes for the built-in graphon families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TimeWave {
    /// No temporal variation.
    #[default]
    Constant,
    /// Linear ramp t.
    Ramp,
    /// Smooth pulse 4 t (1 - t).
    Pulse,
}

impl TimeWave {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            TimeWave::Constant => 0.0,
            TimeWave::Ramp => t,
            TimeWave::Pulse => 4.0 * t * (1.0 - t),
        }
    }
}

/// Informational smoothness metadata (not used by the estimator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothnessInfo {
    pub nu1: f64,
    pub nu2: f64,
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GraphonSpec {
    /// Piecewise-constant in (x, y) on the grid of breakpoints:
    /// f = levels[j][k] + amps[j][k] * wave(t).
    PiecewiseConstant {
        /// Full breakpoint list 0 = b_0 < ... < b_r = 1.
        breakpoints: Vec<f64>,
        levels: Vec<Vec<f64>>,
        #[serde(default)]
        amps: Option<Vec<Vec<f64>>>,
        #[serde(default)]
        wave: TimeWave,
        #[serde(default)]
        smoothness: Option<SmoothnessInfo>,
    },
    /// Smooth closed form f = c0 + cxy (x + y) + cprod x y + ct * wave(t).
    Smooth {
        c0: f64,
        #[serde(default)]
        cxy: f64,
        #[serde(default)]
        cprod: f64,
        #[serde(default)]
        ct: f64,
        #[serde(default)]
        wave: TimeWave,
        #[serde(default)]
        smoothness: Option<SmoothnessInfo>,
    },
}

impl GraphonSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            GraphonSpec::PiecewiseConstant { breakpoints, levels, amps, .. } => {
                if breakpoints.len() < 2 {
                    return Err(Error::InvalidSpec("need at least [0, 1] breakpoints".into()));
                }
                if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
                    return Err(Error::InvalidSpec("breakpoints must start at 0 and end at 1".into()));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::InvalidSpec("breakpoints must be strictly increasing".into()));
                }
                let r = breakpoints.len() - 1;
                check_symmetric_grid(levels, r, "levels")?;
                if let Some(a) = amps {
                    check_symmetric_grid(a, r, "amps")?;
                }
                Ok(())
            }
            GraphonSpec::Smooth { .. } => Ok(()),
        }
    }

    /// f(x, y, t); symmetric in (x, y) by construction.
    pub fn value(&self, x: f64, y: f64, t: f64) -> f64 {
        match self {
            GraphonSpec::PiecewiseConstant { breakpoints, levels, amps, wave, .. } => {
                let bx = block_of(breakpoints, x);
                let by = block_of(breakpoints, y);
                let mut v = levels[bx][by];
                if let Some(a) = amps {
                    v += a[bx][by] * wave.eval(t);
                }
                v
            }
            GraphonSpec::Smooth { c0, cxy, cprod, ct, wave, .. } => {
                c0 + cxy * (x + y) + cprod * x * y + ct * wave.eval(t)
            }
        }
    }
}

fn check_symmetric_grid(grid: &[Vec<f64>], r: usize, what: &str) -> Result<()> {
    if grid.len() != r || grid.iter().any(|row| row.len() != r) {
        return Err(Error::InvalidSpec(format!("{what} must be {r}x{r}")));
    }
    for i in 0..r {
        for j in 0..r {
            if grid[i][j] != grid[j][i] {
                return Err(Error::InvalidSpec(format!("{what} must be symmetric")));
            }
        }
    }
    Ok(())
}

fn block_of(breakpoints: &[f64], x: f64) -> usize {
    for (j, w) in breakpoints.windows(2).enumerate() {
        if x <= w[1] {
            return j;
        }
    }
    breakpoints.len() - 2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZetaDistribution {
    IidUniform,
    /// Deterministic grid zeta_i = (i + 1) / n.
    FixedGrid,
}

/// Samples latent positions and evaluates the graphon at t_l = (l + 1) / L.
/// Returns the probability tensor and the positions (ground-truth
/// bookkeeping only; the estimator never sees them).
pub fn sample_graphon(
    spec: &GraphonSpec,
    n: usize,
    horizon: usize,
    zeta: ZetaDistribution,
    seed: u64,
) -> Result<(ProbabilityTensor, Vec<f64>)> {
    spec.validate()?;
    let positions: Vec<f64> = match zeta {
        ZetaDistribution::IidUniform => {
            let mut rng = rng_from(seed);
            (0..n).map(|_| rng.gen_range(0.0..=1.0)).collect()
        }
        ZetaDistribution::FixedGrid => (0..n).map(|i| (i + 1) as f64 / n as f64).collect(),
    };
    let mut bad: Option<String> = None;
    let lam = ProbabilityTensor::from_fn(n, horizon, |i, j, l| {
        let t = (l + 1) as f64 / horizon as f64;
        let v = spec.value(positions[i], positions[j], t);
        if !(0.0..=1.0).contains(&v) && bad.is_none() {
            bad = Some(format!("f({}, {}, {t}) = {v} outside [0,1]", positions[i], positions[j]));
        }
        v.clamp(0.0, 1.0)
    })?;
    if let Some(msg) = bad {
        return Err(Error::InvalidSpec(msg));
    }
    Ok((lam, positions))
}

#[derive(Debug, Clone)]
pub struct GraphonFitConfig {
    pub basis: TemporalBasis,
    pub m_max: usize,
    /// Candidate truncation lengths; defaults to 1..=L.
    pub truncation_grid: Vec<usize>,
    pub restarts: usize,
    pub seed: u64,
}

impl GraphonFitConfig {
    pub fn new(basis: TemporalBasis, m_max: usize) -> Self {
        let horizon = basis.horizon();
        Self { basis, m_max, truncation_grid: (1..=horizon).collect(), restarts: 3, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts.max(1);
        self
    }
}

#[derive(Debug, Clone)]
pub struct GraphonFit {
    pub m_hat: usize,
    /// Selected truncation length (number of leading transform columns kept).
    pub l1_hat: usize,
    pub memberships: MembershipSequence,
    /// Padded coefficient vector, zero beyond the first l1_hat columns.
    pub coefficients: Vec<f64>,
    pub support: Vec<usize>,
    pub objective: f64,
    pub rss: f64,
    pub penalty_value: f64,
    pub lambda_hat: ProbabilityTensor,
    pub theta_hat: PairSeries,
    pub lambda_raw: Vec<f64>,
}

/// Graphon estimation: transform the data along time, truncate to L1
/// columns, fit a time-constant pair clustering by block means, and select
/// (m, L1) by the penalized objective
/// ||X - C V||^2 + 11 n ln m + (11/2) m^2 L1 ln(25 L / L1),
/// where the residual includes the energy of the dropped columns (dropping a
/// column sets its fit to zero, which is what the reconstruction does).
pub fn fit_graphon(a: &PairSeries, config: &GraphonFitConfig) -> Result<GraphonFit> {
    let horizon = a.horizon();
    let n = a.n();
    if config.basis.horizon() != horizon {
        return Err(Error::DimensionMismatch("basis vs data horizon".into()));
    }
    if !config.basis.satisfies_h_assumption() {
        return Err(Error::InvalidBasis(
            "graphon fitting needs a basis with a flat first row and the entry bound".into(),
        ));
    }
    if config.m_max < 1 || config.m_max > n {
        return Err(Error::InvalidConfig(format!("need 1 <= m_max <= n, got {}", config.m_max)));
    }
    let mut grid: Vec<usize> = config
        .truncation_grid
        .iter()
        .copied()
        .filter(|&l1| l1 >= 1 && l1 <= horizon)
        .collect();
    grid.sort_unstable();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty truncation grid".into()));
    }

    let np = pair_count(n);
    let a_mat = Mat::from_fn(np, horizon, |p, l| a.get(p, l));
    let x = a_mat.matmul_transpose(config.basis.matrix());
    let total_energy: f64 = x.data().iter().map(|v| v * v).sum();

    let per_m = exec::map_indexed(config.m_max, |mi| {
        let m = mi + 1;
        search_constant_blocks(a, &x, total_energy, m, &grid, config)
    });

    let mut best: Option<(f64, usize, usize, Vec<u16>)> = None;
    for (m, outcome) in per_m.into_iter().enumerate().map(|(mi, o)| (mi + 1, o)) {
        let (obj, l1, labels) = outcome;
        let better = match &best {
            None => true,
            Some((bo, bm, bl1, blab)) => {
                if (obj - bo).abs() > 1e-12 {
                    obj < *bo
                } else if m != *bm {
                    m < *bm
                } else if l1 != *bl1 {
                    l1 < *bl1
                } else {
                    labels < *blab
                }
            }
        };
        if better {
            best = Some((obj, m, l1, labels));
        }
    }
    let (_, m_hat, l1_hat, labels) = best.expect("m_max >= 1");
    let z = MembershipSequence::constant(n, horizon, m_hat, &labels)?;

    // Block means of the kept columns, padded with zeros.
    let mm = class_pair_count(m_hat);
    let state = BlockState::new(a, &x, &labels, m_hat);
    let mut d_pad = Mat::zeros(mm, horizon);
    for s in 0..l1_hat {
        for k in 0..mm {
            if state.counts[k] > 0.0 {
                d_pad[(k, s)] = state.ux[(k, s)] / state.counts[k];
            }
        }
    }
    let q = d_pad.matmul(config.basis.matrix());
    let mut theta = PairSeries::zeros(n, horizon);
    for l in 0..horizon {
        for p in 0..np {
            theta.set(p, l, q[(state.pair_class[p], l)]);
        }
    }
    let rss = a.squared_distance(&theta);
    let penalty_value = graphon_penalty(n, m_hat, l1_hat, horizon);
    let support: Vec<usize> = (0..l1_hat)
        .flat_map(|s| (0..mm).map(move |k| s * mm + k))
        .collect();
    let lambda_raw = devectorize_raw(&theta);
    Ok(GraphonFit {
        m_hat,
        l1_hat,
        memberships: z,
        coefficients: d_pad.vec(),
        support,
        objective: rss + penalty_value,
        rss,
        penalty_value,
        lambda_hat: devectorize_clamped(&theta),
        theta_hat: theta,
        lambda_raw,
    })
}

pub fn graphon_penalty(n: usize, m: usize, l1: usize, horizon: usize) -> f64 {
    11.0 * n as f64 * (m as f64).ln()
        + 5.5 * (m * m) as f64 * l1 as f64 * (25.0 * horizon as f64 / l1 as f64).ln()
}

/// Class-pair sums of the transformed columns for constant labels.
struct BlockState {
    pair_class: Vec<usize>,
    counts: Vec<f64>,
    ux: Mat,
}

impl BlockState {
    fn new(a: &PairSeries, x: &Mat, labels: &[u16], m: usize) -> Self {
        let np = a.n_pairs();
        let mm = class_pair_count(m);
        let mut pair_class = vec![0usize; np];
        let mut counts = vec![0.0; mm];
        let mut ux = Mat::zeros(mm, x.cols());
        for p in 0..np {
            let (i, j) = index_to_pair(p);
            let (ci, cj) = (labels[i] as usize, labels[j] as usize);
            let k = class_pair_to_index(ci.min(cj), ci.max(cj));
            pair_class[p] = k;
            counts[k] += 1.0;
            for s in 0..x.cols() {
                ux[(k, s)] += x[(p, s)];
            }
        }
        Self { pair_class, counts, ux }
    }
}

/// Best (objective, L1) for fixed labels: the explained energy of column s is
/// sum_k ux[k,s]^2 / count_k, so the objective over the truncation grid is a
/// prefix scan.
fn objective_over_grid(
    counts: &[f64],
    ux: &Mat,
    total_energy: f64,
    n: usize,
    m: usize,
    grid: &[usize],
    horizon: usize,
) -> (f64, usize) {
    let mut explained = vec![0.0; horizon];
    for s in 0..horizon {
        let mut e = 0.0;
        for k in 0..counts.len() {
            if counts[k] > 0.0 {
                e += ux[(k, s)] * ux[(k, s)] / counts[k];
            }
        }
        explained[s] = e;
    }
    let mut best = (f64::INFINITY, grid[0]);
    let mut prefix = 0.0;
    let mut gi = 0;
    for s in 1..=horizon {
        prefix += explained[s - 1];
        if gi < grid.len() && grid[gi] == s {
            let obj = total_energy - prefix + graphon_penalty(n, m, s, horizon);
            if obj < best.0 {
                best = (obj, s);
            }
            gi += 1;
        }
    }
    best
}

fn search_constant_blocks(
    a: &PairSeries,
    x: &Mat,
    total_energy: f64,
    m: usize,
    grid: &[usize],
    config: &GraphonFitConfig,
) -> (f64, usize, Vec<u16>) {
    let n = a.n();
    let horizon = a.horizon();
    if m == 1 {
        let labels = vec![0u16; n];
        let state = BlockState::new(a, x, &labels, 1);
        let (obj, l1) = objective_over_grid(&state.counts, &state.ux, total_energy, n, 1, grid, horizon);
        return (obj, l1, labels);
    }
    let embed = spectral_embedding(a, m);
    let mut best: Option<(f64, usize, Vec<u16>)> = None;
    for r in 0..config.restarts.max(1) {
        let mut rng = rng_from(mix(mix(config.seed, m as u64), r as u64));
        let init = kmeans(&embed, m, &mut rng);
        let init = match repair_partition(init, m, 1, n) {
            Ok(v) => v,
            Err(_) => continue,
        };
        let mut labels = init;
        let mut state = BlockState::new(a, x, &labels, m);
        let (mut obj, mut l1) =
            objective_over_grid(&state.counts, &state.ux, total_energy, n, m, grid, horizon);
        // steepest single-node moves
        let mut sizes = vec![0usize; m];
        for &l in &labels {
            sizes[l as usize] += 1;
        }
        for _sweep in 0..200 {
            let mut best_move: Option<(f64, usize, usize, usize)> = None;
            for node in 0..n {
                let from = labels[node] as usize;
                if sizes[from] <= 1 {
                    continue;
                }
                for to in 0..m {
                    if to == from {
                        continue;
                    }
                    let (counts2, ux2) = move_deltas(&state, a, x, &labels, node, to);
                    let (o2, l12) =
                        objective_over_grid(&counts2, &ux2, total_energy, n, m, grid, horizon);
                    if o2 < obj - 1e-10
                        && best_move.map_or(true, |(bo, _, _, _)| o2 < bo - 1e-15)
                    {
                        best_move = Some((o2, node, to, l12));
                    }
                }
            }
            match best_move {
                Some((o2, node, to, l12)) => {
                    let (counts2, ux2) = move_deltas(&state, a, x, &labels, node, to);
                    state.counts = counts2;
                    state.ux = ux2;
                    sizes[labels[node] as usize] -= 1;
                    sizes[to] += 1;
                    labels[node] = to as u16;
                    // pair_class refresh for moved node
                    for other in 0..n {
                        if other == node {
                            continue;
                        }
                        let p = if other < node {
                            crate::pairs::pair_to_index(other, node)
                        } else {
                            crate::pairs::pair_to_index(node, other)
                        };
                        let (ci, cj) = (labels[index_to_pair(p).0] as usize, labels[index_to_pair(p).1] as usize);
                        state.pair_class[p] = class_pair_to_index(ci.min(cj), ci.max(cj));
                    }
                    obj = o2;
                    l1 = l12;
                }
                None => break,
            }
        }
        if best
            .as_ref()
            .map_or(true, |(bo, bl1, blab)| {
                obj < bo - 1e-12
                    || ((obj - bo).abs() <= 1e-12 && (l1, &labels) < (*bl1, blab))
            })
        {
            best = Some((obj, l1, labels));
        }
    }
    best.unwrap_or_else(|| {
        let labels = vec![0u16; n];
        let state = BlockState::new(a, x, &labels, 1);
        let (obj, l1) = objective_over_grid(&state.counts, &state.ux, total_energy, n, 1, grid, horizon);
        (obj, l1, labels)
    })
}

fn move_deltas(
    state: &BlockState,
    a: &PairSeries,
    x: &Mat,
    labels: &[u16],
    node: usize,
    to: usize,
) -> (Vec<f64>, Mat) {
    let mut counts = state.counts.clone();
    let mut ux = state.ux.clone();
    let from = labels[node] as usize;
    let n = labels.len();
    for other in 0..n {
        if other == node {
            continue;
        }
        let o = labels[other] as usize;
        let p = if other < node {
            crate::pairs::pair_to_index(other, node)
        } else {
            crate::pairs::pair_to_index(node, other)
        };
        let k_old = class_pair_to_index(from.min(o), from.max(o));
        let k_new = class_pair_to_index(to.min(o), to.max(o));
        counts[k_old] -= 1.0;
        counts[k_new] += 1.0;
        for s in 0..x.cols() {
            let v = x[(p, s)];
            ux[(k_old, s)] -= v;
            ux[(k_new, s)] += v;
        }
    }
    let _ = a;
    (counts, ux)
}
