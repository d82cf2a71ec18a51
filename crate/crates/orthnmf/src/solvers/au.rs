//! Additive update steps with zero-locking escape and adaptive damping.
//!
//! Each factor moves by a scaled negative gradient. Entries sitting at zero
//! with a negative gradient would never move under a multiplicative rule;
//! the escape matrix lifts their step scale to at least `sigma` so they can
//! leave the boundary. Updates whose objective would rise are retried from
//! the same snapshot with the damping value multiplied by `step`; attempt
//! `i` therefore uses exactly `delta · stepⁱ`. The retry count is capped and
//! hitting the cap is reported as a numerical failure, never accepted
//! silently.

use ndarray::{Array2, Zip};

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::factors::FactorSet;
use crate::kernels::{matmul, matmul_nt, matmul_tn};
use crate::matrix::DataMatrix;
use crate::objective::objective;
use crate::solvers::{accepts, StepOutcome};

/// Escape matrix: entries keep their value where the gradient is
/// nonnegative and are lifted to at least `sigma` where it is negative.
pub fn escape(x: &Array2<f64>, grad: &Array2<f64>, sigma: f64) -> Array2<f64> {
    let mut out = x.clone();
    Zip::from(&mut out).and(grad).for_each(|v, &g| {
        if g < 0.0 {
            *v = v.max(sigma);
        }
    });
    out
}

/// `x − x̄ ⊙ grad / (denom + delta)`, clamped at zero. The update is
/// nonnegative in exact arithmetic; the clamp only absorbs round-off.
fn candidate(
    x: &Array2<f64>,
    bar: &Array2<f64>,
    grad: &Array2<f64>,
    denom: &Array2<f64>,
    delta: f64,
) -> Array2<f64> {
    let mut out = x.clone();
    Zip::from(&mut out)
        .and(bar)
        .and(grad)
        .and(denom)
        .for_each(|v, &b, &g, &d| {
            *v = (*v - b * g / (d + delta)).max(0.0);
        });
    out
}

/// Result of one damped factor update.
#[derive(Debug, Clone)]
pub struct DampedUpdate {
    pub factor: Array2<f64>,
    /// Failed attempts before acceptance; the trace records this.
    pub retries: usize,
    /// The damping value of the accepted attempt, `delta · step^retries`.
    pub accepted_delta: f64,
    /// Objective at the accepted candidate.
    pub objective: f64,
}

/// Repeats the additive update from the same snapshot, growing the damping
/// value until the objective stops increasing.
fn damped_update(
    x: &Array2<f64>,
    bar: &Array2<f64>,
    grad: &Array2<f64>,
    denom: &Array2<f64>,
    cfg: &SolverConfig,
    reference: f64,
    eval: impl Fn(&Array2<f64>) -> Result<f64>,
) -> Result<DampedUpdate> {
    let mut last = (0.0, f64::NAN);
    for attempt in 0..=cfg.max_inner_iter {
        let delta = cfg.delta * cfg.step.powi(attempt as i32);
        let cand = candidate(x, bar, grad, denom, delta);
        let j = eval(&cand)?;
        if accepts(j, reference) {
            return Ok(DampedUpdate {
                factor: cand,
                retries: attempt,
                accepted_delta: delta,
                objective: j,
            });
        }
        last = (delta, j);
    }
    Err(Error::DampingFailure {
        attempts: cfg.max_inner_iter + 1,
        delta: last.0,
        candidate: last.1,
        reference,
    })
}

/// Uni-orthogonal `B` update with a fixed stabilizer; the restriction of
/// the objective to `B` is quadratic, so no damping loop is needed.
pub fn au_u_b_update(a: &DataMatrix, f: &FactorSet, cfg: &SolverConfig) -> Result<Array2<f64>> {
    f.validate_for(a, false)?;
    let cct = matmul_nt(&f.c, &f.c);
    let grad = &matmul(&f.b, &cct) - &a.mul_ct(&f.c);
    let bar = escape(&f.b, &grad, cfg.sigma);
    let denom = matmul(&bar, &cct);
    Ok(candidate(&f.b, &bar, &grad, &denom, cfg.delta))
}

/// Uni-orthogonal `C` update: damped retries against the objective at the
/// already-updated `B`.
pub fn au_u_c_update(
    a: &DataMatrix,
    b_new: &Array2<f64>,
    c: &Array2<f64>,
    cfg: &SolverConfig,
) -> Result<DampedUpdate> {
    let alpha = cfg.alpha;
    let kind = crate::objective::ObjectiveKind::PenaltyUni { alpha };
    let mid = FactorSet {
        b: b_new.clone(),
        c: c.clone(),
        s: None,
    };
    let reference = objective(a, &mid, kind)?;

    let gram = matmul_tn(b_new, b_new);
    let mut grad = &matmul(&gram, c) - &a.tmul(b_new);
    if alpha != 0.0 {
        let cct = matmul_nt(c, c);
        grad = &grad + &(alpha * &(&matmul(&cct, c) - c));
    }
    let bar = escape(c, &grad, cfg.sigma);
    let mut denom = matmul(&gram, &bar);
    if alpha != 0.0 {
        denom = &denom + &(alpha * &matmul(&matmul_nt(&bar, &bar), &bar));
    }
    damped_update(c, &bar, &grad, &denom, cfg, reference, |cand| {
        objective(
            a,
            &FactorSet {
                b: b_new.clone(),
                c: cand.clone(),
                s: None,
            },
            kind,
        )
    })
}

/// One outer iteration of the additive uni-orthogonal solver.
pub fn au_u_step(a: &DataMatrix, f: &FactorSet, cfg: &SolverConfig) -> Result<StepOutcome> {
    let kind = cfg.objective_kind();
    let before = objective(a, f, kind)?;
    let b = au_u_b_update(a, f, cfg)?;
    let c = au_u_c_update(a, &b, &f.c, cfg)?;
    Ok(StepOutcome {
        increased: !accepts(c.objective, before),
        objective: c.objective,
        inner_iters: [0, c.retries, 0],
        factors: FactorSet {
            b,
            c: c.factor,
            s: None,
        },
    })
}

/// One outer iteration of the additive bi-orthogonal solver: three damped
/// updates in sequence, each retried against the objective at the factors
/// it started from.
pub fn au_b_step(a: &DataMatrix, f: &FactorSet, cfg: &SolverConfig) -> Result<StepOutcome> {
    f.validate_for(a, true)?;
    let kind = cfg.objective_kind();
    let (alpha, beta) = (cfg.alpha, cfg.beta);
    let s = f.s.as_ref().expect("validated");
    let before = objective(a, f, kind)?;

    // B update.
    let cct = matmul_nt(&f.c, &f.c);
    let w = matmul(&f.b, s);
    let mut grad_b = &matmul_nt(&matmul(&w, &cct), s) - &matmul_nt(&a.mul_ct(&f.c), s);
    if beta != 0.0 {
        grad_b = &grad_b + &(beta * &(&matmul(&f.b, &matmul_tn(&f.b, &f.b)) - &f.b));
    }
    let bar_b = escape(&f.b, &grad_b, cfg.sigma);
    let wbar = matmul(&bar_b, s);
    let mut denom_b = matmul_nt(&matmul(&wbar, &cct), s);
    if beta != 0.0 {
        denom_b = &denom_b + &(beta * &matmul(&bar_b, &matmul_tn(&bar_b, &bar_b)));
    }
    let b_up = damped_update(&f.b, &bar_b, &grad_b, &denom_b, cfg, before, |cand| {
        objective(
            a,
            &FactorSet {
                b: cand.clone(),
                c: f.c.clone(),
                s: Some(s.clone()),
            },
            kind,
        )
    })?;
    let b_new = b_up.factor;

    // C update against the fresh B.
    let gram = matmul_tn(&b_new, &b_new);
    let bta = a.tmul(&b_new);
    let h = matmul_tn(s, &matmul(&gram, s));
    let mut grad_c = &matmul(&h, &f.c) - &matmul_tn(s, &bta);
    if alpha != 0.0 {
        grad_c = &grad_c + &(alpha * &(&matmul(&cct, &f.c) - &f.c));
    }
    let bar_c = escape(&f.c, &grad_c, cfg.sigma);
    let mut denom_c = matmul(&h, &bar_c);
    if alpha != 0.0 {
        denom_c = &denom_c + &(alpha * &matmul(&matmul_nt(&bar_c, &bar_c), &bar_c));
    }
    let c_up = damped_update(
        &f.c,
        &bar_c,
        &grad_c,
        &denom_c,
        cfg,
        b_up.objective,
        |cand| {
            objective(
                a,
                &FactorSet {
                    b: b_new.clone(),
                    c: cand.clone(),
                    s: Some(s.clone()),
                },
                kind,
            )
        },
    )?;
    let c_new = c_up.factor;

    // S update against both fresh factors.
    let cct_new = matmul_nt(&c_new, &c_new);
    let grad_s = &matmul(&matmul(&gram, s), &cct_new) - &matmul_nt(&bta, &c_new);
    let bar_s = escape(s, &grad_s, cfg.sigma);
    let denom_s = matmul(&matmul(&gram, &bar_s), &cct_new);
    let s_up = damped_update(s, &bar_s, &grad_s, &denom_s, cfg, c_up.objective, |cand| {
        objective(
            a,
            &FactorSet {
                b: b_new.clone(),
                c: c_new.clone(),
                s: Some(cand.clone()),
            },
            kind,
        )
    })?;

    Ok(StepOutcome {
        increased: !accepts(s_up.objective, before),
        objective: s_up.objective,
        inner_iters: [b_up.retries, c_up.retries, s_up.retries],
        factors: FactorSet {
            b: b_new,
            c: c_new,
            s: Some(s_up.factor),
        },
    })
}
