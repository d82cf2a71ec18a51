//! Dense product kernels with a fixed, index-ordered summation order.
//!
//! Every accumulation runs over ascending indices so that repeated runs
//! produce bit-identical results. Factor matrices are small (rank times a
//! data dimension), so plain loops are fast enough and keep the evaluation
//! order under our control.

use ndarray::Array2;

/// `x · y`
pub fn matmul(x: &Array2<f64>, y: &Array2<f64>) -> Array2<f64> {
    let (m, l) = x.dim();
    let (l2, n) = y.dim();
    assert_eq!(l, l2, "matmul: inner dimensions {l} vs {l2}");
    let mut out = Array2::zeros((m, n));
    for i in 0..m {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..l {
                acc += x[[i, k]] * y[[k, j]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

/// `xᵀ · y` for `x: L×M`, `y: L×N`.
pub fn matmul_tn(x: &Array2<f64>, y: &Array2<f64>) -> Array2<f64> {
    let (l, m) = x.dim();
    let (l2, n) = y.dim();
    assert_eq!(l, l2, "matmul_tn: leading dimensions {l} vs {l2}");
    let mut out = Array2::zeros((m, n));
    for i in 0..m {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..l {
                acc += x[[k, i]] * y[[k, j]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

/// `x · yᵀ` for `x: M×L`, `y: N×L`.
pub fn matmul_nt(x: &Array2<f64>, y: &Array2<f64>) -> Array2<f64> {
    let (m, l) = x.dim();
    let (n, l2) = y.dim();
    assert_eq!(l, l2, "matmul_nt: trailing dimensions {l} vs {l2}");
    let mut out = Array2::zeros((m, n));
    for i in 0..m {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..l {
                acc += x[[i, k]] * y[[j, k]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}

/// `tr(x · y)` for `x: M×N`, `y: N×M`.
pub fn trace_prod(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let (m, n) = x.dim();
    let (n2, m2) = y.dim();
    assert_eq!((n, m), (n2, m2), "trace_prod: shapes incompatible");
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..n {
            acc += x[[i, j]] * y[[j, i]];
        }
    }
    acc
}

/// `‖g − I‖²_F` for a square `g`, summed in index order.
pub fn identity_deviation_sq(g: &Array2<f64>) -> f64 {
    let (m, n) = g.dim();
    assert_eq!(m, n, "identity_deviation_sq: matrix not square");
    let mut acc = 0.0;
    for i in 0..m {
        for j in 0..n {
            let d = if i == j { g[[i, j]] - 1.0 } else { g[[i, j]] };
            acc += d * d;
        }
    }
    acc
}

/// Subtracts the identity in place: `g − I`.
pub fn subtract_identity(g: &Array2<f64>) -> Array2<f64> {
    let (m, n) = g.dim();
    assert_eq!(m, n, "subtract_identity: matrix not square");
    let mut out = g.clone();
    for i in 0..m {
        out[[i, i]] -= 1.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn matmul_small() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let y = array![[5.0, 6.0], [7.0, 8.0]];
        assert_eq!(matmul(&x, &y), array![[19.0, 22.0], [43.0, 50.0]]);
    }

    #[test]
    fn transpose_variants_agree_with_explicit_transpose() {
        let x = array![[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]];
        let y = array![[1.0, 0.5], [2.0, 1.5], [0.0, 1.0]];
        let xt = x.t().to_owned();
        let yt = y.t().to_owned();
        assert_eq!(matmul_tn(&x, &x), matmul(&xt, &x));
        assert_eq!(matmul_nt(&x, &yt), matmul(&x, &y));
    }

    #[test]
    fn trace_of_product_matches_elementwise_sum() {
        let x = array![[1.0, 2.0], [3.0, 4.0]];
        let y = array![[5.0, 6.0], [7.0, 8.0]];
        let p = matmul(&x, &y);
        assert_eq!(trace_prod(&x, &y), p[[0, 0]] + p[[1, 1]]);
    }

    #[test]
    fn identity_deviation_of_identity_is_zero() {
        let g = array![[1.0, 0.0], [0.0, 1.0]];
        assert_eq!(identity_deviation_sq(&g), 0.0);
        let g = array![[2.0, 1.0], [1.0, 1.0]];
        assert_eq!(identity_deviation_sq(&g), 1.0 + 1.0 + 1.0);
    }
}
