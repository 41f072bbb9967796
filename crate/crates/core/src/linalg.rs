//! Small dense linear algebra: numeric rank and least squares through the
//! SVD, and exact symbolic determinants for the tiny systems that arise from
//! determining equations.

use nalgebra::{DMatrix, DVector};

use crate::expr::Expr;

/// Singular values below this fraction of the largest count as zero.
pub const RANK_CUTOFF: f64 = 1e-8;

pub fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let largest = sv.iter().cloned().fold(0.0, f64::max);
    if largest == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > RANK_CUTOFF * largest).count()
}

/// Minimum-norm least-squares solution of `a x = b` and the residual
/// `|a x - b|` normalized by the largest entry magnitude of `a` and `b`.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, f64) {
    let scale = a.amax().max(b.amax()).max(f64::MIN_POSITIVE);
    if a.ncols() == 0 {
        return (DVector::zeros(0), b.amax() / scale);
    }
    let svd = a.clone().svd(true, true);
    let largest = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let eps = (RANK_CUTOFF * largest).max(f64::MIN_POSITIVE);
    let x = svd
        .solve(b, eps)
        .unwrap_or_else(|_| DVector::zeros(a.ncols()));
    let r = (a * &x - b).amax() / scale;
    (x, r)
}

/// Determinant by cofactor expansion along the first row.
pub fn det(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        n => {
            let mut terms = Vec::with_capacity(n);
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != j)
                            .map(|(_, e)| e.clone())
                            .collect()
                    })
                    .collect();
                let t = &m[0][j] * &det(&minor);
                terms.push(if j % 2 == 0 { t } else { -t });
            }
            Expr::sum(terms)
        }
    }
}

/// Solve `a x = b` by Cramer's rule. Returns `None` when `det(a)` is
/// structurally zero.
pub fn cramer(a: &[Vec<Expr>], b: &[Expr]) -> Option<Vec<Expr>> {
    let d = det(a);
    if d.is_zero() {
        return None;
    }
    let inv = d.recip();
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let ak: Vec<Vec<Expr>> = a
            .iter()
            .zip(b)
            .map(|(row, bi)| {
                let mut r = row.clone();
                r[k] = bi.clone();
                r
            })
            .collect();
        out.push(&det(&ak) * &inv);
    }
    Some(out)
}
