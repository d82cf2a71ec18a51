//! Orthogonal nonnegative matrix factorization.
//!
//! Factorizes a nonnegative data matrix as `A ≈ B·C` (or `A ≈ B·S·C` with
//! orthogonality pulled onto both outer factors) under seven solver
//! variants: the classic least-squares multiplicative rules, two
//! multiplier-based orthogonal variants, and penalty-based multiplicative
//! and additive solvers. The additive solvers escape zero-locked entries
//! and grow a per-factor damping value until every update is nonincreasing,
//! which makes their objective traces monotone by construction.
//!
//! The crate also ships the objective/gradient/stationarity machinery used
//! to check the solvers, cluster readout with four quality metrics
//! (mutual information, entropy, purity, F-measure), and MatrixMarket/CSV
//! ingestion and emission for batch runs.

pub mod clustering;
pub mod config;
mod error;
pub mod factors;
pub mod io;
pub mod kernels;
pub mod matrix;
pub mod objective;
pub mod solvers;
pub mod trace;

pub use config::{SolverConfig, SolverKind};
pub use error::{Error, Result};
pub use factors::{init_factors, normalize_b_unit_columns, FactorSet};
pub use matrix::DataMatrix;
pub use objective::{gradient, kkt_report, objective, FactorId, KktReport, ObjectiveKind};
pub use solvers::{run_au, run_mu, solve, solve_with, RunOptions, StepOutcome};
pub use trace::{IterationRecord, IterationTrace};
