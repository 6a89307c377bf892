//! End-to-end acceptance suite: one test per release criterion, each printing
//! a PASS line with its headline numbers.
//!
//! Run with: cargo test -p dnt-core --test acceptance -- --nocapture

use std::time::Instant;

use rand::Rng;

use dnt_core::basis::check_h_assumption;
use dnt_core::harness::{
    BasisKind, DsbmGeneratorSpec, EstimatorSettings, ExperimentConfig, GeneratorSpec, Pipeline,
    SweepAxis, SCHEMA_VERSION,
};
use dnt_core::linalg::Mat;
use dnt_core::oracle::brute_force_fit_default;
use dnt_core::search::SearchMode;
use dnt_core::seed::{mix, rng_from};
use dnt_core::support::SupportRule;
use dnt_core::vectorize::devectorize;
use dnt_core::{
    csv_string, fit, rate_sweep, restricted_least_squares, run_experiment, sample_adjacency,
    select_support, theta_from_model, vectorize, ClusterFamily, ConnectivityTensor,
    EstimatorConfig, FamilyKind, GraphonSpec, MembershipSequence, PairSeries, PenaltySpec,
    ProbabilityTensor, SparseConfig, TemporalBasis, TimeWave, ZetaDistribution,
};

fn finish(name: &str, start: Instant, limit_s: f64, detail: &str) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("acceptance {name}: PASS ({detail}; {elapsed:.2}s, limit {limit_s:.0}s)");
    assert!(elapsed < limit_s, "{name} exceeded the runtime limit: {elapsed:.1}s >= {limit_s}s");
}

fn random_membership(rng: &mut rand_chacha::ChaCha8Rng, n: usize, m: usize, horizon: usize) -> MembershipSequence {
    let mut labels = vec![0u16; n * horizon];
    for l in 0..horizon {
        for i in 0..n {
            labels[l * n + i] = if i < m { i as u16 } else { rng.gen_range(0..m) as u16 };
        }
    }
    MembershipSequence::new(n, horizon, m, labels).unwrap()
}

/// 1. Algebraic identities on random instances: vectorization round trip,
/// the Kronecker identity, theta = C q, and the projection laws.
#[test]
fn criterion_1_algebraic_identities() {
    let start = Instant::now();
    let mut rng = rng_from(0xACC1);
    let tol = 1e-8;
    for trial in 0..200 {
        let n = rng.gen_range(2..=10usize);
        let m = rng.gen_range(1..=n.min(4));
        let horizon = rng.gen_range(1..=8usize);

        // vectorization round trip, bit-exact
        let lam = ProbabilityTensor::from_fn(n, horizon, |_, _, _| rng.gen_range(0.0..1.0)).unwrap();
        let theta = vectorize(&lam);
        assert_eq!(devectorize(&theta).unwrap().data(), lam.data(), "trial {trial}");

        // Kronecker identity vec(Z G Z^T) = (Z (x) Z) vec(G)
        let z = random_membership(&mut rng, n, m, 1);
        let zmat = Mat::from_fn(n, m, |i, k| f64::from(z.label(0, i) as usize == k));
        let mut gmat = Mat::zeros(m, m);
        for a in 0..m {
            for b in a..m {
                let v = rng.gen_range(0.0..1.0);
                gmat[(a, b)] = v;
                gmat[(b, a)] = v;
            }
        }
        let left = zmat.matmul(&gmat).matmul(&zmat.transpose()).vec();
        let right = zmat.kron(&zmat).matvec(&gmat.vec());
        let kron_err: f64 = left
            .iter()
            .zip(&right)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(kron_err <= tol, "trial {trial}: kron error {kron_err}");

        // theta = C vec(Q): the gather path agrees exactly with the dense
        // clustering-matrix product
        let zs = random_membership(&mut rng, n, m, horizon);
        let g = ConnectivityTensor::from_fn(m, horizon, |_, _, _| rng.gen_range(0.0..1.0)).unwrap();
        let theta = theta_from_model(&zs, &g).unwrap();
        let q = g.reduced();
        for l in 0..horizon {
            let c = dnt_core::build_clustering_matrix(&zs, l).unwrap();
            for p in 0..theta.n_pairs() {
                assert_eq!(theta.get(p, l), q[(c.col_of_row(p), l)], "trial {trial}");
            }
        }

        // projection laws through the fitted-values map
        let basis = TemporalBasis::dct(horizon);
        let np = theta.n_pairs();
        let a = PairSeries::new(n, horizon, (0..np * horizon).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let mm = m * (m + 1) / 2;
        let ml = mm * horizon;
        let j_size = rng.gen_range(1..=ml);
        let mut support: Vec<usize> = (0..ml).collect();
        for i in (1..ml).rev() {
            let j = rng.gen_range(0..=i);
            support.swap(i, j);
        }
        support.truncate(j_size);
        let proj = |v: &PairSeries| restricted_least_squares(v, &zs, &basis, &support).unwrap().fitted;
        let pa = proj(&a);
        let ppa = proj(&pa);
        assert!(pa.squared_distance(&ppa).sqrt() <= tol, "trial {trial}: idempotence");
        let y = PairSeries::new(n, horizon, (0..np * horizon).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let py = proj(&y);
        let dot = |u: &PairSeries, v: &PairSeries| -> f64 {
            u.values().iter().zip(v.values()).map(|(a, b)| a * b).sum()
        };
        assert!((dot(&pa, &y) - dot(&a, &py)).abs() <= tol * (1.0 + dot(&a, &a).abs()), "trial {trial}: symmetry");
        assert!(pa.norm_sq() <= a.norm_sq() + tol, "trial {trial}: contraction");
        // residual orthogonal to every selected column
        let resid = PairSeries::new(
            n,
            horizon,
            a.values().iter().zip(pa.values()).map(|(x, y)| x - y).collect(),
        )
        .unwrap();
        let presid = proj(&resid);
        assert!(presid.norm_sq().sqrt() <= tol, "trial {trial}: orthogonality");
    }
    finish("1 algebraic identities", start, 10.0, "200 instances, tol 1e-8");
}

/// 2. Default basis validity at dyadic lengths: orthogonality, flat first
/// row, entrywise bound, and the exhaustive binary sup check.
#[test]
fn criterion_2_basis_validity() {
    let start = Instant::now();
    for l in [1usize, 2, 4, 8, 16] {
        let basis = TemporalBasis::dct(l);
        let h = basis.matrix();
        // orthogonality within 1e-10 both ways
        let hht = h.matmul_transpose(h);
        let hth = h.transpose().matmul(h);
        for i in 0..l {
            for j in 0..l {
                let id = f64::from(i == j);
                assert!((hht[(i, j)] - id).abs() <= 1e-10, "L={l}");
                assert!((hth[(i, j)] - id).abs() <= 1e-10, "L={l}");
            }
        }
        // flat first row: H 1 = sqrt(L) e1 within 1e-10
        let h1 = h.matvec(&vec![1.0; l]);
        assert!((h1[0] - (l as f64).sqrt()).abs() <= 1e-10, "L={l}");
        for v in &h1[1..] {
            assert!(v.abs() <= 1e-10, "L={l}");
        }
        let report = check_h_assumption(h).unwrap();
        assert!(report.e1_ok && report.entry_bound_ok && report.binary_sup_ok, "L={l}: {report:?}");
        assert!(report.binary_check_exhaustive, "L={l} should be checked exhaustively");
        assert!(report.max_abs_entry <= 1.0 / (l as f64).sqrt() + 1e-12, "L={l}");
    }
    finish("2 basis validity", start, 5.0, "L in {1,2,4,8,16}, exhaustive binary check");
}

/// 3. Oracle equivalence on 200 seeded tiny instances: exhaustive-search fit
/// matches the brute-force optimum exactly; the heuristic matches on at
/// least 180 (calibrated: it matches on all 200).
#[test]
fn criterion_3_oracle_equivalence() {
    let start = Instant::now();
    let mut exhaustive_matches = 0usize;
    let mut heuristic_matches = 0usize;
    let trials = 200usize;
    for trial in 0..trials {
        let seed = mix(0xACC3, trial as u64);
        let mut rng = rng_from(seed);
        let n = rng.gen_range(3..=5usize);
        let horizon = rng.gen_range(1..=3usize);
        let n0 = rng.gen_range(0..=1usize);
        let m_star = rng.gen_range(1..=2usize);
        let lam = if m_star == 1 {
            let p = rng.gen_range(0.2..0.8);
            ProbabilityTensor::from_fn(n, horizon, |_, _, _| p).unwrap()
        } else {
            let labels: Vec<u16> = (0..n).map(|i| u16::from(i >= n / 2)).collect();
            let z = MembershipSequence::constant(n, horizon, 2, &labels).unwrap();
            let g = ConnectivityTensor::from_fn(2, horizon, |k1, k2, _| if k1 == k2 { 0.8 } else { 0.2 }).unwrap();
            dnt_core::expand_probability(&z, &g).unwrap()
        };
        let b = sample_adjacency(&lam, mix(seed, 1));
        let a = PairSeries::from_adjacency(&b);
        let family = ClusterFamily::free(n, horizon, n0).unwrap();
        let basis = TemporalBasis::dct(horizon);

        let oracle = brute_force_fit_default(&a, &family, &basis, 2).unwrap();
        let exhaustive = fit(
            &a,
            &EstimatorConfig::new(family.clone(), basis.clone(), 2)
                .unwrap()
                .with_search(SearchMode::Exhaustive)
                .with_seed(seed),
        )
        .unwrap();
        let heuristic = fit(
            &a,
            &EstimatorConfig::new(family, basis, 2)
                .unwrap()
                .with_search(SearchMode::Heuristic { restarts: 2 })
                .with_seed(seed),
        )
        .unwrap();
        assert!(exhaustive.objective >= oracle.objective - 1e-9, "trial {trial}");
        assert!(heuristic.objective >= oracle.objective - 1e-9, "trial {trial}");
        if (exhaustive.objective - oracle.objective).abs() <= 1e-8 {
            exhaustive_matches += 1;
        }
        if (heuristic.objective - oracle.objective).abs() <= 1e-8 {
            heuristic_matches += 1;
        }
    }
    assert_eq!(exhaustive_matches, trials, "exhaustive fit must match the oracle everywhere");
    assert!(heuristic_matches >= 180, "heuristic matched only {heuristic_matches}/{trials}");
    finish(
        "3 oracle equivalence",
        start,
        300.0,
        &format!("exhaustive {exhaustive_matches}/200, heuristic {heuristic_matches}/200"),
    );
}

fn coverage_config() -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        n: 24,
        horizon: 8,
        generator: GeneratorSpec::Dsbm(DsbmGeneratorSpec {
            m_star: 2,
            levels: vec![0.8, 0.2, 0.75],
            wiggle: 0.08,
            nu0: 1.0,
            max_switches: 0,
        }),
        estimator: EstimatorSettings {
            m_max: 3,
            family: FamilyKind::Free,
            max_switches: 0,
            basis: BasisKind::Dct,
            search: SearchMode::Heuristic { restarts: 3 },
            support_rule: SupportRule::ExactDiagonal,
            clamp: true,
            sparse: None,
            pipeline: Pipeline::Dsbm,
        },
        replicates: 200,
        master_seed: 0xACC4,
        t_values: vec![3.0],
        noiseless: false,
    }
}

/// 4. High-probability risk bound coverage at the generating model: the
/// violation frequency over 200 replicates stays below 9 e^-t plus three
/// binomial standard deviations.
#[test]
fn criterion_4_oracle_inequality_coverage() {
    let start = Instant::now();
    let run = run_experiment(&coverage_config()).unwrap();
    assert_eq!(run.summary.replicates_failed, 0);
    let cov = &run.summary.coverage[0];
    assert_eq!(cov.t, 3.0);
    let p = 9.0 * (-3.0f64).exp();
    let sigma = (p * (1.0 - p) / 200.0).sqrt();
    let threshold = p + 3.0 * sigma;
    assert!((cov.threshold - threshold).abs() < 1e-12);
    assert!(
        cov.violation_frequency <= threshold,
        "violations {} > threshold {threshold}",
        cov.violation_frequency
    );
    finish(
        "4 oracle-inequality coverage",
        start,
        1200.0,
        &format!(
            "violation frequency {:.3} <= {:.3} (t=3, R=200)",
            cov.violation_frequency, threshold
        ),
    );
}

/// 5. Rate trend over n: the planted two-block model has strictly decreasing
/// median risk with log-log slope at most -0.8, and the constant-tensor
/// control decays like n^-2.
#[test]
fn criterion_5_rate_trend() {
    let start = Instant::now();
    let mut config = coverage_config();
    config.replicates = 40;
    config.master_seed = 0xACC5;
    config.generator = GeneratorSpec::Dsbm(DsbmGeneratorSpec {
        m_star: 2,
        levels: vec![0.85, 0.15, 0.8],
        wiggle: 0.01,
        nu0: 1.0,
        max_switches: 0,
    });
    let report = rate_sweep(&config, SweepAxis::Nodes, &[16, 32, 64]).unwrap();
    let medians: Vec<f64> = report.points.iter().map(|p| p.median_mse).collect();
    assert!(
        medians.windows(2).all(|w| w[1] < w[0]),
        "medians not strictly decreasing: {medians:?}"
    );
    assert!(report.slope <= -0.8, "slope {}", report.slope);

    let mut control = config.clone();
    control.generator = GeneratorSpec::Dsbm(DsbmGeneratorSpec {
        m_star: 1,
        levels: vec![0.5],
        wiggle: 0.0,
        nu0: 1.0,
        max_switches: 0,
    });
    control.estimator.m_max = 2;
    control.master_seed = 0xACC6;
    let flat = rate_sweep(&control, SweepAxis::Nodes, &[16, 32, 64]).unwrap();
    assert!(
        flat.slope >= -2.5 && flat.slope <= -1.5,
        "control slope {} outside [-2.5, -1.5]",
        flat.slope
    );
    finish(
        "5 rate trend",
        start,
        1800.0,
        &format!(
            "planted slope {:.2} (medians {:?}), control slope {:.2}",
            report.slope, medians, flat.slope
        ),
    );
}

/// 6. Constant-in-time connectivity concentrates on the first transform
/// column: the selected support is exactly the first-column coefficients.
#[test]
fn criterion_6_constant_signal_sparsity() {
    let start = Instant::now();
    let n = 16;
    let horizon = 8;
    let labels: Vec<u16> = (0..n).map(|i| u16::from(i >= n / 2)).collect();
    let z = MembershipSequence::constant(n, horizon, 2, &labels).unwrap();
    let levels = [0.7, 0.3, 0.55];
    let g = ConnectivityTensor::from_fn(2, horizon, |k1, k2, _| {
        levels[dnt_core::pairs::class_pair_to_index(k1.min(k2), k1.max(k2))]
    })
    .unwrap();
    let theta = theta_from_model(&z, &g).unwrap();
    let basis = TemporalBasis::dct(horizon);
    let penalty = PenaltySpec::standard(ClusterFamily::free(n, horizon, 0).unwrap());
    let fit = select_support(&theta, &z, &basis, &penalty, SupportRule::ExactDiagonal).unwrap();
    assert_eq!(fit.support, vec![0, 1, 2], "support must be exactly the first column");
    finish("6 constant-signal sparsity", start, 10.0, "support == {(k, 1st column)}, exact");
}

/// 7. Graphon pipeline: a time-constant piecewise-constant graphon selects
/// truncation length 1; over finer time grids of a smooth graphon the
/// selected truncation never shrinks and the risk never grows.
#[test]
fn criterion_7_graphon_pipeline() {
    let start = Instant::now();
    let pwc = GraphonSpec::PiecewiseConstant {
        breakpoints: vec![0.0, 0.5, 1.0],
        levels: vec![vec![0.8, 0.2], vec![0.2, 0.7]],
        amps: None,
        wave: TimeWave::Constant,
        smoothness: None,
    };
    let (lam, _) = dnt_core::sample_graphon(&pwc, 16, 8, ZetaDistribution::FixedGrid, 0).unwrap();
    let a = vectorize(&lam);
    let gfit = dnt_core::fit_graphon(
        &a,
        &dnt_core::GraphonFitConfig::new(TemporalBasis::dct(8), 3).with_seed(1),
    )
    .unwrap();
    assert_eq!(gfit.l1_hat, 1, "time-constant graphon must keep a single column");

    let smooth = GraphonSpec::Smooth {
        c0: 0.25,
        cxy: 0.15,
        cprod: 0.0,
        ct: 0.3,
        wave: TimeWave::Pulse,
        smoothness: None,
    };
    let mut l1s = Vec::new();
    let mut mses = Vec::new();
    for horizon in [4usize, 16, 64] {
        let (lam, _) = dnt_core::sample_graphon(&smooth, 24, horizon, ZetaDistribution::FixedGrid, 0).unwrap();
        let a = vectorize(&lam);
        let gfit = dnt_core::fit_graphon(
            &a,
            &dnt_core::GraphonFitConfig::new(TemporalBasis::dct(horizon), 3).with_seed(2),
        )
        .unwrap();
        let mse = gfit.lambda_hat.squared_distance(&lam) / ((24 * 24 * horizon) as f64);
        l1s.push(gfit.l1_hat);
        mses.push(mse);
    }
    assert!(l1s.windows(2).all(|w| w[0] <= w[1]), "truncations {l1s:?}");
    assert!(*l1s.last().unwrap() > l1s[0], "truncation should actually grow: {l1s:?}");
    assert!(mses.windows(2).all(|w| w[1] <= w[0] + 1e-15), "mses {mses:?}");
    finish(
        "7 graphon pipeline",
        start,
        600.0,
        &format!("constant: l1=1; sweep l1 {l1s:?}, mse {mses:?}"),
    );
}

/// 8. Sparse variant: with a unit rate it reproduces the plain fit bit for
/// bit on 50 seeded instances, and the rate picks the right branch.
#[test]
fn criterion_8_sparse_variant() {
    let start = Instant::now();
    for trial in 0..50u64 {
        let seed = mix(0xACC8, trial);
        let mut rng = rng_from(seed);
        let n = rng.gen_range(8..=12usize);
        let horizon = if rng.gen_bool(0.5) { 2 } else { 4 };
        let lam = ProbabilityTensor::from_fn(n, horizon, |i, j, l| {
            0.15 + 0.05 * ((i * 3 + j * 5 + l) % 9) as f64
        })
        .unwrap();
        let a = PairSeries::from_adjacency(&sample_adjacency(&lam, mix(seed, 1)));
        let family = ClusterFamily::balanced(n, horizon, 0, 0.5, 2.0).unwrap();
        let config = EstimatorConfig::new(family, TemporalBasis::dct(horizon), 2)
            .unwrap()
            .with_search(SearchMode::Heuristic { restarts: 2 })
            .with_seed(seed);
        let plain = fit(&a, &config).unwrap();
        let sparse = dnt_core::fit_sparse(&a, &SparseConfig::new(1.0, 1.0, config).unwrap()).unwrap();
        assert_eq!(plain.m_hat, sparse.m_hat, "trial {trial}");
        assert_eq!(plain.support, sparse.support, "trial {trial}");
        assert_eq!(plain.memberships, sparse.memberships, "trial {trial}");
        assert_eq!(plain.objective.to_bits(), sparse.objective.to_bits(), "trial {trial}");
        let pbits: Vec<u64> = plain.coefficients.iter().map(|x| x.to_bits()).collect();
        let sbits: Vec<u64> = sparse.coefficients.iter().map(|x| x.to_bits()).collect();
        assert_eq!(pbits, sbits, "trial {trial}");
    }
    // rate branches, exact
    assert_eq!(dnt_core::sparse_rate(0.1, 2, 10), 0.1);
    assert_eq!(dnt_core::sparse_rate(0.01, 5, 10), 0.25);
    assert_eq!(dnt_core::sparse_rate(0.04, 2, 10), 0.04);
    finish("8 sparse variant", start, 300.0, "50/50 bit-identical, both rate branches exact");
}

/// 9. Determinism: the same config and master seed produce byte-identical
/// CSV output (wall-time column excluded).
#[test]
fn criterion_9_experiment_determinism() {
    let start = Instant::now();
    let mut config = coverage_config();
    config.n = 12;
    config.horizon = 4;
    config.replicates = 8;
    config.master_seed = 0xACC9;
    let first = run_experiment(&config).unwrap();
    let second = run_experiment(&config).unwrap();
    let strip = |s: &str| -> String {
        s.lines()
            .map(|line| {
                let mut parts: Vec<&str> = line.split(',').collect();
                parts.pop();
                parts.join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = strip(&csv_string(&first));
    let b = strip(&csv_string(&second));
    assert_eq!(a.into_bytes(), b.into_bytes());
    finish("9 experiment determinism", start, 120.0, "two runs byte-identical modulo wall time");
}
