//! Multiplicative update steps.
//!
//! Every rule multiplies each entry by a ratio of nonnegative terms with the
//! stabilizer `delta` added to the denominator, so nonnegativity is
//! preserved by construction. Updates run in factor order: `B` uses the old
//! `C` (and `S`), `C` uses the fresh `B`, and `S` uses both fresh factors.

use ndarray::{Array2, Zip};

use crate::config::SolverConfig;
use crate::error::Result;
use crate::factors::FactorSet;
use crate::kernels::{matmul, matmul_nt, matmul_tn};
use crate::matrix::DataMatrix;
use crate::objective::objective;
use crate::solvers::{accepts, StepOutcome};

/// `x ⊙ numer / (denom + delta)`
fn ratio_update(
    x: &Array2<f64>,
    numer: &Array2<f64>,
    denom: &Array2<f64>,
    delta: f64,
) -> Array2<f64> {
    let mut out = x.clone();
    Zip::from(&mut out)
        .and(numer)
        .and(denom)
        .for_each(|v, &n, &d| {
            *v *= n / (d + delta);
        });
    out
}

fn finish(
    a: &DataMatrix,
    before: f64,
    factors: FactorSet,
    cfg: &SolverConfig,
) -> Result<StepOutcome> {
    let after = objective(a, &factors, cfg.objective_kind())?;
    Ok(StepOutcome {
        factors,
        objective: after,
        increased: !accepts(after, before),
        inner_iters: [0; 3],
    })
}

/// Least-squares step: `b ← b · (ACᵀ)/(BCCᵀ + δ)`, then
/// `c ← c · (BᵀA)/(BᵀBC + δ)` with the fresh `B`.
pub fn ls_step(a: &DataMatrix, f: &FactorSet, cfg: &SolverConfig) -> Result<StepOutcome> {
    f.validate_for(a, false)?;
    let before = objective(a, f, cfg.objective_kind())?;

    let cct = matmul_nt(&f.c, &f.c);
    let b = ratio_update(&f.b, &a.mul_ct(&f.c), &matmul(&f.b, &cct), cfg.delta);

    let gram = matmul_tn(&b, &b);
    let c = ratio_update(&f.c, &a.tmul(&b), &matmul(&gram, &f.c), cfg.delta);

    finish(a, before, FactorSet { b, c, s: None }, cfg)
}

/// Multiplier-based uni-orthogonal step: `B` as in `ls_step`, then
/// `c ← c · (BᵀA)/(BᵀACᵀC + δ)`.
pub fn du_step(a: &DataMatrix, f: &FactorSet, cfg: &SolverConfig) -> Result<StepOutcome> {
    f.validate_for(a, false)?;
    let before = objective(a, f, cfg.objective_kind())?;

    let cct = matmul_nt(&f.c, &f.c);
    let b = ratio_update(&f.b, &a.mul_ct(&f.c), &matmul(&f.b, &cct), cfg.delta);

    let bta = a.tmul(&b);
    let denom = matmul(&matmul_nt(&bta, &f.c), &f.c);
    let c = ratio_update(&f.c, &bta, &denom, cfg.delta);

    finish(a, before, FactorSet { b, c, s: None }, cfg)
}

/// Multiplier-based bi-orthogonal step, three rules in sequence:
/// `b ← b · (ACᵀSᵀ)/(BBᵀACᵀSᵀ + δ)`,
/// `c ← c · (SᵀBᵀA)/(SᵀBᵀACᵀC + δ)`,
/// `s ← s · (BᵀACᵀ)/(BᵀBSCCᵀ + δ)`.
pub fn db_step(a: &DataMatrix, f: &FactorSet, cfg: &SolverConfig) -> Result<StepOutcome> {
    f.validate_for(a, true)?;
    let before = objective(a, f, cfg.objective_kind())?;
    let s = f.s.as_ref().expect("validated");

    let act_st = matmul_nt(&a.mul_ct(&f.c), s);
    let denom_b = matmul(&f.b, &matmul_tn(&f.b, &act_st));
    let b = ratio_update(&f.b, &act_st, &denom_b, cfg.delta);

    let bta = a.tmul(&b);
    let numer_c = matmul_tn(s, &bta);
    let denom_c = matmul(&matmul_nt(&numer_c, &f.c), &f.c);
    let c = ratio_update(&f.c, &numer_c, &denom_c, cfg.delta);

    let numer_s = matmul_nt(&bta, &c);
    let denom_s = matmul(&matmul(&matmul_tn(&b, &b), s), &matmul_nt(&c, &c));
    let s_new = ratio_update(s, &numer_s, &denom_s, cfg.delta);

    finish(
        a,
        before,
        FactorSet {
            b,
            c,
            s: Some(s_new),
        },
        cfg,
    )
}

/// Penalty-based uni-orthogonal step: `B` as in `ls_step`, then
/// `c ← c · (BᵀA + αC)/(BᵀBC + αCCᵀC + δ)`. With `alpha = 0` this is
/// exactly the least-squares step.
pub fn mu_u_step(a: &DataMatrix, f: &FactorSet, cfg: &SolverConfig) -> Result<StepOutcome> {
    f.validate_for(a, false)?;
    let before = objective(a, f, cfg.objective_kind())?;
    let alpha = cfg.alpha;

    let cct = matmul_nt(&f.c, &f.c);
    let b = ratio_update(&f.b, &a.mul_ct(&f.c), &matmul(&f.b, &cct), cfg.delta);

    let gram = matmul_tn(&b, &b);
    let mut numer = a.tmul(&b);
    let mut denom = matmul(&gram, &f.c);
    if alpha != 0.0 {
        numer = &numer + &(alpha * &f.c);
        denom = &denom + &(alpha * &matmul(&cct, &f.c));
    }
    let c = ratio_update(&f.c, &numer, &denom, cfg.delta);

    finish(a, before, FactorSet { b, c, s: None }, cfg)
}

/// Penalty-based bi-orthogonal step:
/// `b ← b · (ACᵀSᵀ + βB)/(BSCCᵀSᵀ + βBBᵀB + δ)`,
/// `c ← c · (SᵀBᵀA + αC)/(SᵀBᵀBSC + αCCᵀC + δ)`,
/// `s ← s · (BᵀACᵀ)/(BᵀBSCCᵀ + δ)`. With `alpha = beta = 0` the penalty
/// terms drop out entirely.
pub fn mu_b_step(a: &DataMatrix, f: &FactorSet, cfg: &SolverConfig) -> Result<StepOutcome> {
    f.validate_for(a, true)?;
    let before = objective(a, f, cfg.objective_kind())?;
    let s = f.s.as_ref().expect("validated");
    let (alpha, beta) = (cfg.alpha, cfg.beta);

    let cct = matmul_nt(&f.c, &f.c);
    let w = matmul(&f.b, s);
    let mut numer_b = matmul_nt(&a.mul_ct(&f.c), s);
    let mut denom_b = matmul_nt(&matmul(&w, &cct), s);
    if beta != 0.0 {
        numer_b = &numer_b + &(beta * &f.b);
        denom_b = &denom_b + &(beta * &matmul(&f.b, &matmul_tn(&f.b, &f.b)));
    }
    let b = ratio_update(&f.b, &numer_b, &denom_b, cfg.delta);

    let gram = matmul_tn(&b, &b);
    let bta = a.tmul(&b);
    let h = matmul_tn(s, &matmul(&gram, s));
    let mut numer_c = matmul_tn(s, &bta);
    let mut denom_c = matmul(&h, &f.c);
    if alpha != 0.0 {
        numer_c = &numer_c + &(alpha * &f.c);
        denom_c = &denom_c + &(alpha * &matmul(&cct, &f.c));
    }
    let c = ratio_update(&f.c, &numer_c, &denom_c, cfg.delta);

    let numer_s = matmul_nt(&bta, &c);
    let denom_s = matmul(&matmul(&gram, s), &matmul_nt(&c, &c));
    let s_new = ratio_update(s, &numer_s, &denom_s, cfg.delta);

    finish(
        a,
        before,
        FactorSet {
            b,
            c,
            s: Some(s_new),
        },
        cfg,
    )
}
