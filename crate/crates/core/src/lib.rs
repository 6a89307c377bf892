//! Dynamic network tensors: simulation and penalized least-squares
//! estimation for dynamic stochastic block models and dynamic graphons.
//!
//! The pipeline: symmetric zero-diagonal tensors are vectorized into per-pair
//! time series; block structure turns estimation into linear regression
//! against a clustering design; temporal smoothness becomes coefficient
//! sparsity under an orthogonal transform; and a complexity penalty selects
//! the class count, the coefficient support and the clustering jointly.
//! Brute-force reference optimizers and a Monte Carlo harness keep the
//! scalable paths honest.
//!
//! Heavy loops (model-selection grids, restarts, replicates) run on rayon by
//! default; build with `--no-default-features` for the sequential fallback.

#![forbid(unsafe_code)]

pub mod basis;
pub mod connectivity;
pub mod error;
pub mod exec;
pub mod family;
pub mod fit;
pub mod graphon;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod lstsq;
pub mod membership;
pub mod oracle;
pub mod pairs;
pub mod sample;
pub mod search;
pub mod seed;
pub mod sparse;
pub mod support;
pub mod tensor;
pub mod vectorize;

pub use basis::{check_h_assumption, from_coefficients, to_coefficients, BasisConditionReport, CoefficientMatrix, TemporalBasis};
pub use connectivity::ConnectivityTensor;
pub use error::{Error, Result};
pub use family::{sparse_rate, ClusterFamily, FamilyKind, PenaltySpec};
pub use fit::{fit, fit_adjacency, EstimatorConfig, FitResult};
pub use graphon::{fit_graphon, sample_graphon, GraphonFit, GraphonFitConfig, GraphonSpec, TimeWave, ZetaDistribution};
pub use harness::{
    csv_string, generate_dsbm, oracle_inequality_check, rate_sweep, run_experiment, write_csv,
    write_summary_json, DsbmGeneratorSpec, EstimatorSettings, ExperimentConfig, ExperimentRun,
    GeneratorSpec, SweepAxis,
};
pub use lstsq::{restricted_least_squares, RestrictedFit};
pub use membership::MembershipSequence;
pub use oracle::{brute_force_fit, brute_force_fit_default, enumerate_family, OracleLimits};
pub use sample::sample_adjacency;
pub use search::{search_clustering, SearchMode};
pub use sparse::{check_a1_diagnostic, fit_sparse, SparseConfig};
pub use support::{select_support, SupportFit, SupportRule};
pub use tensor::{AdjacencyTensor, ProbabilityTensor};
pub use vectorize::{
    build_clustering_matrix, class_pair_counts, devectorize, devectorize_clamped,
    expand_probability, ordered_class_pair_counts, theta_from_model, vectorize, PairSeries,
    VectorizedModel,
};
