//! Solver selection and run configuration.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::objective::ObjectiveKind;

/// The seven solver variants.
///
/// `Ls` minimizes the plain least-squares objective. `Du`/`Db` are the
/// multiplicative solvers for the multiplier-based uni-/bi-orthogonal
/// objectives; they carry no orthogonality weight and are not guaranteed to
/// decrease their objective. `MuU`/`MuB` are multiplicative solvers for the
/// penalty-based objectives, `AuU`/`AuB` their additive counterparts with a
/// damped inner loop that enforces the nonincreasing property.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Ls,
    Du,
    Db,
    MuU,
    AuU,
    MuB,
    AuB,
}

impl SolverKind {
    pub const ALL: [SolverKind; 7] = [
        SolverKind::Ls,
        SolverKind::Du,
        SolverKind::Db,
        SolverKind::MuU,
        SolverKind::AuU,
        SolverKind::MuB,
        SolverKind::AuB,
    ];

    /// Tri-factor solvers carry the extra scale matrix `S`.
    pub fn is_bi(self) -> bool {
        matches!(self, SolverKind::Db | SolverKind::MuB | SolverKind::AuB)
    }

    /// Additive-update solvers with the damped inner loop.
    pub fn is_au(self) -> bool {
        matches!(self, SolverKind::AuU | SolverKind::AuB)
    }

    /// Whether the solver's objective carries the `alpha` weight.
    pub fn uses_alpha(self) -> bool {
        matches!(
            self,
            SolverKind::MuU | SolverKind::AuU | SolverKind::MuB | SolverKind::AuB
        )
    }

    /// Whether the solver's objective carries the `beta` weight.
    pub fn uses_beta(self) -> bool {
        matches!(self, SolverKind::MuB | SolverKind::AuB)
    }

    /// The objective this solver minimizes (and that its traces record).
    pub fn objective_kind(self, alpha: f64, beta: f64) -> ObjectiveKind {
        match self {
            SolverKind::Ls => ObjectiveKind::Standard,
            SolverKind::Du => ObjectiveKind::MultiplierUni,
            SolverKind::Db => ObjectiveKind::MultiplierBi,
            SolverKind::MuU | SolverKind::AuU => ObjectiveKind::PenaltyUni { alpha },
            SolverKind::MuB | SolverKind::AuB => ObjectiveKind::PenaltyBi { alpha, beta },
        }
    }

    /// Command-line token for this solver.
    pub fn token(self) -> &'static str {
        match self {
            SolverKind::Ls => "ls",
            SolverKind::Du => "d-u",
            SolverKind::Db => "d-b",
            SolverKind::MuU => "mu-u",
            SolverKind::AuU => "au-u",
            SolverKind::MuB => "mu-b",
            SolverKind::AuB => "au-b",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .iter()
            .copied()
            .find(|k| k.token() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown solver '{s}' (expected one of ls, d-u, d-b, mu-u, au-u, mu-b, au-b)"
                ))
            })
    }
}

/// Full configuration of a factorization run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub solver: SolverKind,
    /// Factorization rank `K`; the bi-orthogonal scale matrix is `K×K`.
    pub rank: usize,
    /// Orthogonality weight on the rows of `C` (penalty objectives only).
    pub alpha: f64,
    /// Orthogonality weight on the columns of `B` (bi-orthogonal penalty only).
    pub beta: f64,
    /// Denominator stabilizer; also the starting value of each damped loop.
    pub delta: f64,
    /// Floor used when lifting a zero-locked entry.
    pub sigma: f64,
    /// Growth factor of the damping value on each failed inner attempt.
    pub step: f64,
    pub max_iter: usize,
    /// Cap on damped retries per factor update; hitting it is reported as a
    /// numerical failure rather than accepted silently.
    pub max_inner_iter: usize,
    pub seed: u64,
    /// Rescale the columns of `B` to unit length after each step (`Ls` only;
    /// the orthogonal objectives change value under this rescaling).
    pub normalize_b: bool,
}

impl SolverConfig {
    pub fn new(solver: SolverKind, rank: usize) -> Self {
        SolverConfig {
            solver,
            rank,
            alpha: 0.1,
            beta: 1.0,
            delta: 1e-8,
            sigma: 1e-8,
            step: 10.0,
            max_iter: 20,
            max_inner_iter: 60,
            seed: 0,
            normalize_b: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    /// The objective kind this configuration minimizes.
    pub fn objective_kind(&self) -> ObjectiveKind {
        self.solver.objective_kind(self.alpha, self.beta)
    }

    /// Validates the configuration against the data dimensions.
    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::Config("rank must be at least 1".into()));
        }
        if self.rank > rows.min(cols) {
            return Err(Error::Config(format!(
                "rank {} exceeds min(rows, cols) = {}",
                self.rank,
                rows.min(cols)
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Config(format!(
                "delta must be positive: {}",
                self.delta
            )));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::Config(format!(
                "sigma must be positive: {}",
                self.sigma
            )));
        }
        if !(self.step > 1.0 && self.step.is_finite()) {
            return Err(Error::Config(format!(
                "step must be greater than 1: {}",
                self.step
            )));
        }
        if self.alpha < 0.0 || !self.alpha.is_finite() {
            return Err(Error::Config(format!(
                "alpha must be nonnegative: {}",
                self.alpha
            )));
        }
        if self.beta < 0.0 || !self.beta.is_finite() {
            return Err(Error::Config(format!(
                "beta must be nonnegative: {}",
                self.beta
            )));
        }
        if self.normalize_b && self.solver != SolverKind::Ls {
            return Err(Error::Config(format!(
                "normalize_b is only valid for the ls solver, not {}",
                self.solver
            )));
        }
        Ok(())
    }
}
