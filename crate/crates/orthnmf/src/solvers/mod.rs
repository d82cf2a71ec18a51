//! Solver steps and run drivers.
//!
//! Each step consumes the current factors and produces the next ones along
//! with the objective after the step. The drivers initialize seeded factors,
//! record the starting objective, and append one trace record per iteration.
//! Multiplicative solvers are allowed to increase their objective; the trace
//! flags such iterations instead of aborting. The additive solvers grow a
//! per-factor damping value until each update is nonincreasing, so their
//! recorded traces are monotone unless the damping cap is reported as an
//! error.

pub mod au;
pub mod mu;

use std::time::Instant;

use crate::config::{SolverConfig, SolverKind};
use crate::error::{Error, Result};
use crate::factors::{init_factors, normalize_b_unit_columns, FactorSet};
use crate::matrix::DataMatrix;
use crate::objective::{kkt_report, objective};
use crate::trace::{IterationRecord, IterationTrace};

/// Relative slack used when comparing successive objective values, to keep
/// round-off from registering as a monotonicity violation.
pub const MONOTONE_SLACK: f64 = 1e-12;

/// True when `next` is within slack of not exceeding `prev`. NaN never
/// passes.
pub fn accepts(next: f64, prev: f64) -> bool {
    next <= prev + MONOTONE_SLACK * (1.0 + prev.abs())
}

/// Result of one outer iteration.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub factors: FactorSet,
    /// Objective value at the updated factors.
    pub objective: f64,
    /// Whether the objective rose beyond round-off slack.
    pub increased: bool,
    /// Damped retries spent per factor (B, C, S); zero for multiplicative
    /// steps.
    pub inner_iters: [usize; 3],
}

/// Extra knobs for a run that the configuration itself does not carry.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Record a stationarity residual at this tolerance in every trace row.
    pub record_kkt: Option<f64>,
}

/// Runs the configured solver to its iteration budget.
pub fn solve(a: &DataMatrix, config: &SolverConfig) -> Result<(FactorSet, IterationTrace)> {
    solve_with(a, config, RunOptions::default())
}

/// `solve` with trace options.
pub fn solve_with(
    a: &DataMatrix,
    config: &SolverConfig,
    opts: RunOptions,
) -> Result<(FactorSet, IterationTrace)> {
    if config.solver.is_au() {
        run_au_with(a, config, opts)
    } else {
        run_mu_with(a, config, opts)
    }
}

/// Driver for the multiplicative solvers (ls, d-u, d-b, mu-u, mu-b).
pub fn run_mu(a: &DataMatrix, config: &SolverConfig) -> Result<(FactorSet, IterationTrace)> {
    run_mu_with(a, config, RunOptions::default())
}

pub fn run_mu_with(
    a: &DataMatrix,
    config: &SolverConfig,
    opts: RunOptions,
) -> Result<(FactorSet, IterationTrace)> {
    if config.solver.is_au() {
        return Err(Error::Config(format!(
            "run_mu cannot drive the additive solver {}",
            config.solver
        )));
    }
    let step = match config.solver {
        SolverKind::Ls => mu::ls_step,
        SolverKind::Du => mu::du_step,
        SolverKind::Db => mu::db_step,
        SolverKind::MuU => mu::mu_u_step,
        SolverKind::MuB => mu::mu_b_step,
        _ => unreachable!(),
    };
    run_loop(a, config, opts, step)
}

/// Driver for the additive solvers (au-u, au-b).
pub fn run_au(a: &DataMatrix, config: &SolverConfig) -> Result<(FactorSet, IterationTrace)> {
    run_au_with(a, config, RunOptions::default())
}

pub fn run_au_with(
    a: &DataMatrix,
    config: &SolverConfig,
    opts: RunOptions,
) -> Result<(FactorSet, IterationTrace)> {
    let step = match config.solver {
        SolverKind::AuU => au::au_u_step,
        SolverKind::AuB => au::au_b_step,
        other => {
            return Err(Error::Config(format!(
                "run_au cannot drive the multiplicative solver {other}"
            )))
        }
    };
    run_loop(a, config, opts, step)
}

fn run_loop(
    a: &DataMatrix,
    config: &SolverConfig,
    opts: RunOptions,
    step: fn(&DataMatrix, &FactorSet, &SolverConfig) -> Result<StepOutcome>,
) -> Result<(FactorSet, IterationTrace)> {
    config.validate(a.rows(), a.cols())?;
    let start = Instant::now();
    let kind = config.objective_kind();
    let mut factors = init_factors(a.rows(), a.cols(), config)?;
    let mut trace = IterationTrace::default();

    let mut record = IterationRecord::initial(objective(a, &factors, kind)?);
    if let Some(tol) = opts.record_kkt {
        record.kkt_residual = Some(kkt_report(a, &factors, kind, tol)?.combined);
    }
    trace.records.push(record);

    for _ in 0..config.max_iter {
        let outcome = step(a, &factors, config)?;
        factors = outcome.factors;
        if config.normalize_b {
            factors = normalize_b_unit_columns(&factors)?;
        }
        let mut record = IterationRecord {
            objective: outcome.objective,
            inner_iters: outcome.inner_iters,
            violation: outcome.increased,
            kkt_residual: None,
        };
        if let Some(tol) = opts.record_kkt {
            record.kkt_residual = Some(kkt_report(a, &factors, kind, tol)?.combined);
        }
        trace.records.push(record);
    }
    trace.elapsed = start.elapsed();
    Ok((factors, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(seed: u64, m: usize, n: usize) -> DataMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DataMatrix::from_dense(&Array2::from_shape_simple_fn((m, n), || {
            rng.random::<f64>()
        }))
        .unwrap()
    }

    #[test]
    fn zero_iterations_leaves_factors_at_init() {
        let a = random_data(1, 6, 7);
        let mut cfg = SolverConfig::new(SolverKind::Ls, 2).with_seed(3);
        cfg.max_iter = 0;
        let (factors, trace) = run_mu(&a, &cfg).unwrap();
        assert_eq!(trace.len(), 1);
        let init = init_factors(6, 7, &cfg).unwrap();
        assert_eq!(factors.b, init.b);
        assert_eq!(factors.c, init.c);

        let mut cfg = SolverConfig::new(SolverKind::AuU, 2).with_seed(3);
        cfg.max_iter = 0;
        let (_, trace) = run_au(&a, &cfg).unwrap();
        assert_eq!(trace.len(), 1);
    }

    #[test]
    fn ls_run_is_monotone_and_full_length() {
        let a = random_data(2, 10, 12);
        let cfg = SolverConfig::new(SolverKind::Ls, 3).with_seed(5);
        let (_, trace) = run_mu(&a, &cfg).unwrap();
        assert_eq!(trace.len(), 21);
        assert_eq!(trace.violation_count(), 0);
        for w in trace.records.windows(2) {
            assert!(accepts(w[1].objective, w[0].objective));
        }
    }

    #[test]
    fn mu_u_run_reduces_the_objective() {
        let a = random_data(3, 6, 8);
        let cfg = SolverConfig::new(SolverKind::MuU, 2)
            .with_seed(1)
            .with_alpha(0.1);
        let (_, trace) = run_mu(&a, &cfg).unwrap();
        assert_eq!(trace.len(), 21);
        assert!(trace.final_objective() < trace.error0());
    }

    #[test]
    fn drivers_reject_foreign_solver_kinds() {
        let a = random_data(4, 5, 5);
        let cfg = SolverConfig::new(SolverKind::AuU, 2);
        assert!(matches!(run_mu(&a, &cfg), Err(Error::Config(_))));
        let cfg = SolverConfig::new(SolverKind::Ls, 2);
        assert!(matches!(run_au(&a, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn normalized_ls_keeps_unit_columns_and_monotone_trace() {
        let a = random_data(8, 9, 7);
        let mut cfg = SolverConfig::new(SolverKind::Ls, 2).with_seed(2);
        cfg.normalize_b = true;
        let (factors, trace) = run_mu(&a, &cfg).unwrap();
        for r in 0..2 {
            let norm: f64 = (0..9).map(|m| factors.b[[m, r]] * factors.b[[m, r]]).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        assert_eq!(trace.violation_count(), 0);
    }

    #[test]
    fn kkt_recording_shrinks_residual_over_a_run() {
        let a = random_data(7, 8, 9);
        let mut cfg = SolverConfig::new(SolverKind::Ls, 2).with_seed(11);
        cfg.max_iter = 40;
        let opts = RunOptions {
            record_kkt: Some(1e-9),
        };
        let (_, trace) = run_mu_with(&a, &cfg, opts).unwrap();
        let first = trace.records[0].kkt_residual.unwrap();
        let last = trace.records.last().unwrap().kkt_residual.unwrap();
        assert!(
            last < first,
            "stationarity residual did not move: {first} -> {last}"
        );
    }
}
