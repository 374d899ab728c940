//! Exact desk-scale simulation of quantum mean estimators built from the
//! generalized Grover operator.
//!
//! The numerical kernel ([`prob`], [`sim`], [`spectrum`], [`phase`]) is generic
//! over the scalar type through [`Real`]; the estimator stacks ([`uni`],
//! [`multi`]) and the cost [`ledger`] run in `f64`. Concrete `f64` aliases are
//! exported at the crate root.

// Domain checks are written `!(x < y)` on purpose so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fixtures;
pub mod ledger;
pub mod linalg;
pub mod multi;
pub mod phase;
pub mod prob;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod spectrum;
pub mod uni;

pub use error::{Error, ErrorCategory, Result};
pub use ledger::{predict, Algorithm, AlgorithmParams, CostLedger, CostReport, EstimatorConfig, StageCost};
pub use multi::{Inner, MultiEstimateReport, VMode};
pub use phase::{NoiseMode, PEConfig};
pub use scalar::Real;
pub use uni::{EstimateReport, Schedule};

/// `f64` finite distribution.
pub type FiniteDist = prob::FiniteDist<f64>;
/// `f64` univariate random variable.
pub type UniRv = prob::UniRv<f64>;
/// `f64` scalar statistics.
pub type ScalarStats = prob::ScalarStats<f64>;
/// `f64` covariance summary.
pub type CovSummary = prob::CovSummary<f64>;
/// `f64` statevector.
pub type StateVector = sim::StateVector<f64>;
/// `f64` measurement distribution.
pub type MeasurementDistribution = sim::MeasurementDistribution<f64>;
/// `f64` dense complex matrix.
pub type CMatrix = linalg::CMatrix<f64>;
/// `f64` Grover operator.
pub type GroverOperator = spectrum::GroverOperator<f64>;
/// `f64` spectral solution.
pub type SpectralSolution = spectrum::SpectralSolution<f64>;
/// `f64` key-property certificate.
pub type SpectrumCertificate = spectrum::SpectrumCertificate<f64>;
/// `f64` phase-estimation outcome table.
pub type PEOutcome = phase::PEOutcome<f64>;

pub use num_complex::Complex64;
pub use sim::LatticeSpec;
