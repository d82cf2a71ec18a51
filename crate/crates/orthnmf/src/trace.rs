//! Per-iteration run records.

use std::time::Duration;

/// One row of a run trace. Index 0 holds the objective of the initial
/// factors before any update ran.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub objective: f64,
    /// Damped retries spent on the B, C, and S updates of this iteration.
    /// Multiplicative solvers always report zeros.
    pub inner_iters: [usize; 3],
    /// True when this iteration's objective exceeded the previous one
    /// beyond round-off slack. Recorded, never fatal.
    pub violation: bool,
    /// Stationarity residual, filled only when the run was asked for it.
    pub kkt_residual: Option<f64>,
}

impl IterationRecord {
    pub fn initial(objective: f64) -> Self {
        IterationRecord {
            objective,
            inner_iters: [0; 3],
            violation: false,
            kkt_residual: None,
        }
    }

    pub fn total_inner(&self) -> usize {
        self.inner_iters.iter().sum()
    }
}

/// Objective trajectory of a run: `max_iter + 1` records at most, plus the
/// total wall time.
#[derive(Debug, Clone, Default)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub elapsed: Duration,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Objective of the initial factors.
    pub fn error0(&self) -> f64 {
        self.records[0].objective
    }

    pub fn final_objective(&self) -> f64 {
        self.records.last().expect("empty trace").objective
    }

    pub fn violation_count(&self) -> usize {
        self.records.iter().filter(|r| r.violation).count()
    }

    pub fn total_inner_iters(&self) -> usize {
        self.records.iter().map(|r| r.total_inner()).sum()
    }
}
