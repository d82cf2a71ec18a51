//! Factor matrices, seeded initialization, and column rescaling.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// The dense factors of a run: `B: M×K`, `C: K×N`, and the scale matrix
/// `S: K×K` for tri-factor solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet {
    pub b: Array2<f64>,
    pub c: Array2<f64>,
    pub s: Option<Array2<f64>>,
}

impl FactorSet {
    pub fn rank(&self) -> usize {
        self.b.ncols()
    }

    /// Checks the factor shapes against a data matrix and whether `S` must
    /// be present.
    pub fn validate_for(&self, a: &DataMatrix, needs_s: bool) -> Result<()> {
        let (m, k) = self.b.dim();
        let (k2, n) = self.c.dim();
        if m != a.rows() || n != a.cols() {
            return Err(Error::Shape(format!(
                "factors {m}x{k} · {k2}x{n} do not cover a {}x{} data matrix",
                a.rows(),
                a.cols()
            )));
        }
        match (&self.s, needs_s) {
            (Some(s), true) => {
                let (p, q) = s.dim();
                if p != k || q != k2 {
                    return Err(Error::Shape(format!(
                        "scale matrix is {p}x{q}, expected {k}x{k2}"
                    )));
                }
                Ok(())
            }
            (None, true) => Err(Error::Config(
                "this solver factors A ≈ B·S·C but no scale matrix S is present".into(),
            )),
            (Some(_), false) => Err(Error::Config(
                "a scale matrix S is present but this solver does not use one".into(),
            )),
            (None, false) => {
                if k != k2 {
                    return Err(Error::Shape(format!(
                        "B has {k} columns but C has {k2} rows"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Largest absolute entry change between two factor sets.
    pub fn max_abs_diff(&self, other: &FactorSet) -> f64 {
        let mut d: f64 = 0.0;
        for (x, y) in self.b.iter().zip(other.b.iter()) {
            d = d.max((x - y).abs());
        }
        for (x, y) in self.c.iter().zip(other.c.iter()) {
            d = d.max((x - y).abs());
        }
        if let (Some(s1), Some(s2)) = (&self.s, &other.s) {
            for (x, y) in s1.iter().zip(s2.iter()) {
                d = d.max((x - y).abs());
            }
        }
        d
    }
}

/// Draws strictly positive factors, i.i.d. uniform on `(0, 1]`, filled in
/// row-major order from a stream seeded by `config.seed`. Identical
/// dimensions and seed give bit-identical factors.
pub fn init_factors(rows: usize, cols: usize, config: &SolverConfig) -> Result<FactorSet> {
    if rows == 0 || cols == 0 {
        return Err(Error::Shape(format!("empty data matrix {rows}x{cols}")));
    }
    if config.rank == 0 || config.rank > rows.min(cols) {
        return Err(Error::Config(format!(
            "rank {} invalid for a {rows}x{cols} matrix",
            config.rank
        )));
    }
    let k = config.rank;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw =
        |r: usize, c: usize| Array2::from_shape_simple_fn((r, c), || 1.0 - rng.random::<f64>());
    let b = draw(rows, k);
    let c = draw(k, cols);
    let s = config.solver.is_bi().then(|| draw(k, k));
    Ok(FactorSet { b, c, s })
}

/// Rescales each column of `B` to unit Euclidean length and multiplies the
/// matching row of `C` by the removed norm, leaving the product `B·C`
/// unchanged up to round-off.
pub fn normalize_b_unit_columns(f: &FactorSet) -> Result<FactorSet> {
    let (m, k) = f.b.dim();
    let mut out = f.clone();
    for r in 0..k {
        let mut sq = 0.0;
        for i in 0..m {
            sq += f.b[[i, r]] * f.b[[i, r]];
        }
        if sq == 0.0 {
            return Err(Error::Degenerate(format!("column {r} of B has zero norm")));
        }
        let norm = sq.sqrt();
        for i in 0..m {
            out.b[[i, r]] /= norm;
        }
        for j in 0..out.c.ncols() {
            out.c[[r, j]] *= norm;
        }
    }
    Ok(out)
}
