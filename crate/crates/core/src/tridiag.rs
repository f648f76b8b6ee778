//! Tridiagonal and cyclic tridiagonal solvers.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TridiagError {
    #[error("system size {0} is too small")]
    TooSmall(usize),
    #[error("band lengths disagree")]
    LengthMismatch,
    #[error("zero pivot at row {0}")]
    ZeroPivot(usize),
}

/// Thomas algorithm for `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]`.
/// `sub[0]` and `sup[n-1]` are ignored.
pub fn solve_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, TridiagError> {
    let n = diag.len();
    if n == 0 {
        return Err(TridiagError::TooSmall(n));
    }
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(TridiagError::LengthMismatch);
    }
    let mut c = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot == 0.0 {
        return Err(TridiagError::ZeroPivot(0));
    }
    x[0] = rhs[0] / pivot;
    for i in 1..n {
        c[i - 1] = sup[i - 1] / pivot;
        pivot = diag[i] - sub[i] * c[i - 1];
        if pivot == 0.0 {
            return Err(TridiagError::ZeroPivot(i));
        }
        x[i] = (rhs[i] - sub[i] * x[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Periodic tridiagonal system: row 0 couples to `x[n-1]` through `sub[0]`
/// and row `n-1` couples to `x[0]` through `sup[n-1]`. Solved with the
/// Sherman–Morrison correction on top of [`solve_tridiagonal`].
pub fn solve_cyclic(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, TridiagError> {
    let n = diag.len();
    if n < 3 {
        return Err(TridiagError::TooSmall(n));
    }
    if sub.len() != n || sup.len() != n || rhs.len() != n {
        return Err(TridiagError::LengthMismatch);
    }
    let alpha = sup[n - 1];
    let beta = sub[0];
    let gamma = if diag[0] != 0.0 { -diag[0] } else { 1.0 };
    let mut bb = diag.to_vec();
    bb[0] -= gamma;
    bb[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(sub, &bb, sup, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(sub, &bb, sup, &u)?;
    let denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    if denom == 0.0 {
        return Err(TridiagError::ZeroPivot(n - 1));
    }
    let fact = (x[0] + beta * x[n - 1] / gamma) / denom;
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}
