//! Objective functions, exact gradients, and stationarity diagnostics.
//!
//! Five objective variants are supported:
//!
//! * `Standard`: `½‖A − BC‖²`.
//! * `PenaltyUni`: adds `(α/2)‖CCᵀ − I‖²` to pull the rows of `C` toward
//!   orthonormality.
//! * `PenaltyBi`: the tri-factor fit `½‖A − BSC‖²` plus the `C` penalty and
//!   `(β/2)‖BᵀB − I‖²`.
//! * `MultiplierUni` / `MultiplierBi`: the fit plus trace terms
//!   `½tr(Λ(CCᵀ − I))` (and the `BᵀB` analog) in which the multiplier `Λ`
//!   has a closed form in the factors. These objectives are signed and may
//!   go negative.
//!
//! The multiplier matrices are recomputed from the current iterate at every
//! evaluation, so each objective is a plain function of the factors and
//! `gradient` returns its exact derivative, including the terms that flow
//! through `Λ`. Central finite differences therefore reproduce every
//! gradient here to first order.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::factors::FactorSet;
use crate::kernels::{
    identity_deviation_sq, matmul, matmul_nt, matmul_tn, subtract_identity, trace_prod,
};
use crate::matrix::DataMatrix;

/// Which objective a solver minimizes. The orthogonality weights ride along
/// with the penalty variants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveKind {
    Standard,
    MultiplierUni,
    MultiplierBi,
    PenaltyUni { alpha: f64 },
    PenaltyBi { alpha: f64, beta: f64 },
}

impl ObjectiveKind {
    /// Tri-factor objectives carry the scale matrix `S`.
    pub fn needs_s(self) -> bool {
        matches!(
            self,
            ObjectiveKind::MultiplierBi | ObjectiveKind::PenaltyBi { .. }
        )
    }
}

/// Selects the factor a gradient is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorId {
    B,
    C,
    S,
}

/// Objective value at the given factors.
pub fn objective(a: &DataMatrix, f: &FactorSet, kind: ObjectiveKind) -> Result<f64> {
    f.validate_for(a, kind.needs_s())?;
    Ok(match kind {
        ObjectiveKind::Standard => a.half_residual_sq(&f.b, &f.c),
        ObjectiveKind::PenaltyUni { alpha } => {
            let mut j = a.half_residual_sq(&f.b, &f.c);
            if alpha != 0.0 {
                j += 0.5 * alpha * identity_deviation_sq(&matmul_nt(&f.c, &f.c));
            }
            j
        }
        ObjectiveKind::PenaltyBi { alpha, beta } => {
            let s = f.s.as_ref().expect("validated");
            let w = matmul(&f.b, s);
            let mut j = a.half_residual_sq(&w, &f.c);
            if alpha != 0.0 {
                j += 0.5 * alpha * identity_deviation_sq(&matmul_nt(&f.c, &f.c));
            }
            if beta != 0.0 {
                j += 0.5 * beta * identity_deviation_sq(&matmul_tn(&f.b, &f.b));
            }
            j
        }
        ObjectiveKind::MultiplierUni => {
            let fit = a.half_residual_sq(&f.b, &f.c);
            let bta = a.tmul(&f.b);
            let lambda = &matmul_nt(&bta, &f.c) - &matmul_tn(&f.b, &f.b);
            let p = subtract_identity(&matmul_nt(&f.c, &f.c));
            fit + 0.5 * trace_prod(&lambda, &p)
        }
        ObjectiveKind::MultiplierBi => {
            let s = f.s.as_ref().expect("validated");
            let w = matmul(&f.b, s);
            let fit = a.half_residual_sq(&w, &f.c);
            let bta = a.tmul(&f.b);
            let batc = matmul_nt(&bta, &f.c);
            let gram = matmul_tn(&f.b, &f.b);
            let cct = matmul_nt(&f.c, &f.c);
            let scct_st = matmul_nt(&matmul(s, &cct), s);
            let lambda_b = &matmul_nt(&batc, s) - &scct_st;
            let lambda_c = &matmul_tn(s, &batc) - &matmul_tn(s, &matmul(&gram, s));
            let p_c = subtract_identity(&cct);
            let p_b = subtract_identity(&gram);
            fit + 0.5 * trace_prod(&lambda_c, &p_c) + 0.5 * trace_prod(&lambda_b, &p_b)
        }
    })
}

/// Exact gradient of `objective` with respect to one factor.
pub fn gradient(
    a: &DataMatrix,
    f: &FactorSet,
    kind: ObjectiveKind,
    wrt: FactorId,
) -> Result<Array2<f64>> {
    f.validate_for(a, kind.needs_s())?;
    if wrt == FactorId::S && !kind.needs_s() {
        return Err(Error::Config(
            "gradient with respect to S requested for a two-factor objective".into(),
        ));
    }
    Ok(match kind {
        ObjectiveKind::Standard => standard_gradient(a, f, wrt, 0.0),
        ObjectiveKind::PenaltyUni { alpha } => standard_gradient(a, f, wrt, alpha),
        ObjectiveKind::PenaltyBi { alpha, beta } => penalty_bi_gradient(a, f, wrt, alpha, beta),
        ObjectiveKind::MultiplierUni => multiplier_uni_gradient(a, f, wrt),
        ObjectiveKind::MultiplierBi => multiplier_bi_gradient(a, f, wrt),
    })
}

fn standard_gradient(a: &DataMatrix, f: &FactorSet, wrt: FactorId, alpha: f64) -> Array2<f64> {
    match wrt {
        FactorId::B => {
            let cct = matmul_nt(&f.c, &f.c);
            &matmul(&f.b, &cct) - &a.mul_ct(&f.c)
        }
        FactorId::C => {
            let gram = matmul_tn(&f.b, &f.b);
            let mut g = &matmul(&gram, &f.c) - &a.tmul(&f.b);
            if alpha != 0.0 {
                let cct = matmul_nt(&f.c, &f.c);
                // d/dC (α/2)‖CCᵀ−I‖² = 2α(CCᵀ−I)C.
                g = &g + &(2.0 * alpha * &(&matmul(&cct, &f.c) - &f.c));
            }
            g
        }
        FactorId::S => unreachable!("rejected above"),
    }
}

fn penalty_bi_gradient(
    a: &DataMatrix,
    f: &FactorSet,
    wrt: FactorId,
    alpha: f64,
    beta: f64,
) -> Array2<f64> {
    let s = f.s.as_ref().expect("validated");
    let cct = matmul_nt(&f.c, &f.c);
    let gram = matmul_tn(&f.b, &f.b);
    match wrt {
        FactorId::B => {
            let w = matmul(&f.b, s);
            let fit = &matmul_nt(&matmul(&w, &cct), s) - &matmul_nt(&a.mul_ct(&f.c), s);
            if beta == 0.0 {
                fit
            } else {
                &fit + &(2.0 * beta * &(&matmul(&f.b, &gram) - &f.b))
            }
        }
        FactorId::C => {
            let h = matmul_tn(s, &matmul(&gram, s));
            let fit = &matmul(&h, &f.c) - &matmul_tn(s, &a.tmul(&f.b));
            if alpha == 0.0 {
                fit
            } else {
                &fit + &(2.0 * alpha * &(&matmul(&cct, &f.c) - &f.c))
            }
        }
        FactorId::S => {
            let bta = a.tmul(&f.b);
            &matmul(&matmul(&gram, s), &cct) - &matmul_nt(&bta, &f.c)
        }
    }
}

/// Gradient of the uni-orthogonal multiplier objective, with the multiplier
/// `Λ_C = BᵀACᵀ − BᵀB` expanded so the derivative is exact.
fn multiplier_uni_gradient(a: &DataMatrix, f: &FactorSet, wrt: FactorId) -> Array2<f64> {
    let cct = matmul_nt(&f.c, &f.c);
    match wrt {
        FactorId::B => {
            let act = a.mul_ct(&f.c);
            let p = subtract_identity(&cct);
            let fit = &matmul(&f.b, &cct) - &act;
            &fit + &(&(0.5 * &matmul(&act, &p)) - &matmul(&f.b, &p))
        }
        FactorId::C => {
            let m = a.tmul(&f.b);
            let gram = matmul_tn(&f.b, &f.b);
            let fit = &matmul(&gram, &f.c) - &m;
            let t1 = matmul(&cct, &m);
            let t2 = matmul(&matmul_nt(&f.c, &m), &f.c);
            let t3 = matmul(&matmul_nt(&m, &f.c), &f.c);
            let pen = 0.5 * &(&(&(&t1 + &t2) + &t3) - &(&m + &(2.0 * &matmul(&gram, &f.c))));
            &fit + &pen
        }
        FactorId::S => unreachable!("rejected above"),
    }
}

/// Gradient of the bi-orthogonal multiplier objective with both multipliers
/// `Λ_B = BᵀACᵀSᵀ − SCCᵀSᵀ` and `Λ_C = SᵀBᵀACᵀ − SᵀBᵀBS` expanded.
fn multiplier_bi_gradient(a: &DataMatrix, f: &FactorSet, wrt: FactorId) -> Array2<f64> {
    let s = f.s.as_ref().expect("validated");
    let cct = matmul_nt(&f.c, &f.c);
    let gram = matmul_tn(&f.b, &f.b);
    let bta = a.tmul(&f.b);
    match wrt {
        FactorId::B => {
            let act = a.mul_ct(&f.c);
            let act_st = matmul_nt(&act, s);
            let z = matmul_nt(&matmul(s, &cct), s);
            let u = matmul_nt(s, s);
            let w = matmul(&f.b, s);
            let fit = &matmul_nt(&matmul(&w, &cct), s) - &act_st;
            // C-orthogonality trace term
            let t_c = 0.5
                * &(&(&matmul_nt(&matmul(&act, &cct), s) - &act_st)
                    + &(2.0 * &(&matmul(&f.b, &u) - &matmul(&f.b, &z))));
            // B-orthogonality trace term
            let sc = matmul(s, &f.c);
            let scat_b = matmul(&f.b, &matmul_nt(&sc, &bta));
            let t_b = 0.5
                * &(&(&(&matmul(&act_st, &gram) + &matmul(&f.b, &matmul_tn(&f.b, &act_st)))
                    + &scat_b)
                    - &(&act_st + &(2.0 * &matmul(&f.b, &z))));
            &(&fit + &t_c) + &t_b
        }
        FactorId::C => {
            let n1 = matmul_tn(s, &bta);
            let h = matmul_tn(s, &matmul(&gram, s));
            let hc = matmul(&h, &f.c);
            let fit = &hc - &n1;
            let q1 = matmul(&cct, &n1);
            let q2 = matmul(&matmul_nt(&f.c, &n1), &f.c);
            let q3 = matmul(&matmul_nt(&n1, &f.c), &f.c);
            let t_c = 0.5 * &(&(&(&q1 + &q2) + &q3) - &(&n1 + &(2.0 * &hc)));
            let sts_c = matmul(&matmul_tn(s, s), &f.c);
            let t_b = 0.5
                * &(&(&(&matmul_tn(s, &matmul(&gram, &bta)) - &n1) - &(2.0 * &hc))
                    + &(2.0 * &sts_c));
            &(&fit + &t_c) + &t_b
        }
        FactorId::S => {
            let batc = matmul_nt(&bta, &f.c);
            let gs = matmul(&gram, s);
            let gs_cct = matmul(&gs, &cct);
            let fit = &gs_cct - &batc;
            let t_c = 0.5 * &(&(&matmul(&batc, &cct) - &batc) + &(2.0 * &(&gs - &gs_cct)));
            let t_b =
                0.5 * &(&(&matmul(&gram, &batc) - &batc) + &(2.0 * &(&matmul(s, &cct) - &gs_cct)));
            &(&fit + &t_c) + &t_b
        }
    }
}

/// Stationarity diagnostics for one factor.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorKkt {
    /// Smallest entry of the factor (negative means infeasible).
    pub min_entry: f64,
    /// Smallest gradient entry over the active set (entries of the factor
    /// at zero within tolerance); `None` when no entry is active.
    pub min_active_gradient: Option<f64>,
    /// Largest `|∇J ⊙ X|` entry.
    pub max_slackness: f64,
    /// Largest violated-direction magnitude for this factor.
    pub residual: f64,
}

impl FactorKkt {
    fn from_parts(x: &Array2<f64>, grad: &Array2<f64>, tol: f64) -> FactorKkt {
        let mut min_entry = f64::INFINITY;
        let mut max_entry = f64::NEG_INFINITY;
        for &v in x.iter() {
            min_entry = min_entry.min(v);
            max_entry = max_entry.max(v);
        }
        let active_cutoff = tol * (1.0 + max_entry.max(0.0));
        let mut min_active_gradient: Option<f64> = None;
        let mut max_slackness = 0.0f64;
        for (v, g) in x.iter().zip(grad.iter()) {
            if *v <= active_cutoff {
                min_active_gradient = Some(min_active_gradient.map_or(*g, |cur: f64| cur.min(*g)));
            }
            max_slackness = max_slackness.max((g * v).abs());
        }
        let negativity = (-min_entry).max(0.0);
        let active_descent = min_active_gradient.map_or(0.0, |g| (-g).max(0.0));
        FactorKkt {
            min_entry,
            min_active_gradient,
            max_slackness,
            residual: negativity.max(active_descent).max(max_slackness),
        }
    }
}

/// Stationarity report across all factors of a point.
///
/// The combined residual is zero exactly when, within tolerance, every
/// factor is nonnegative, every gradient entry over an active (zero) factor
/// entry is nonnegative, and the complementary slackness products vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    pub b: FactorKkt,
    pub c: FactorKkt,
    pub s: Option<FactorKkt>,
    pub combined: f64,
}

/// Evaluates the stationarity conditions at the given factors.
///
/// An entry counts as active when it is at most `tol · (1 + max entry)` of
/// its factor, so the threshold tracks the factor's scale.
pub fn kkt_report(
    a: &DataMatrix,
    f: &FactorSet,
    kind: ObjectiveKind,
    tol: f64,
) -> Result<KktReport> {
    let b = FactorKkt::from_parts(&f.b, &gradient(a, f, kind, FactorId::B)?, tol);
    let c = FactorKkt::from_parts(&f.c, &gradient(a, f, kind, FactorId::C)?, tol);
    let s = match (&f.s, kind.needs_s()) {
        (Some(sm), true) => Some(FactorKkt::from_parts(
            sm,
            &gradient(a, f, kind, FactorId::S)?,
            tol,
        )),
        _ => None,
    };
    let mut combined = b.residual.max(c.residual);
    if let Some(sk) = &s {
        combined = combined.max(sk.residual);
    }
    Ok(KktReport { b, c, s, combined })
}
