use nalgebra::DMatrix;

use super::{DensityMatrix, FockCutoffs, Mode, Space, C64};
use crate::error::{Error, Result};

/// Partial transpose of a two-mode matrix on one mode. For the vibration:
/// `ρ^{T_b}[(n,j),(m,k)] = ρ[(n,k),(m,j)]`.
pub fn partial_transpose_matrix(
    rho: &DMatrix<C64>,
    cutoffs: FockCutoffs,
    mode: Mode,
) -> Result<DMatrix<C64>> {
    let d = cutoffs.two_mode_dim();
    if rho.nrows() != d || rho.ncols() != d {
        return Err(Error::Shape(format!(
            "{}x{} matrix for a two-mode space of dimension {d}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    let db = cutoffs.dim_b();
    Ok(DMatrix::from_fn(d, d, |r, c| {
        let (n, j) = (r / db, r % db);
        let (m, k) = (c / db, c % db);
        match mode {
            Mode::Vibration => rho[(n * db + k, m * db + j)],
            Mode::Cavity => rho[(m * db + j, n * db + k)],
        }
    }))
}

/// Partial transpose of a two-mode density matrix. The result has unit
/// trace and is Hermitian but need not be positive, so it comes back as a
/// plain matrix.
pub fn partial_transpose(rho: &DensityMatrix, mode: Mode) -> Result<DMatrix<C64>> {
    match rho.space() {
        Space::TwoMode(c) => partial_transpose_matrix(rho.matrix(), c, mode),
        other => Err(Error::Shape(format!(
            "partial transpose needs a two-mode space, got {other:?}"
        ))),
    }
}

/// Reduced state of the mode `keep` of a two-mode density matrix.
pub fn partial_trace(rho: &DensityMatrix, keep: Mode) -> Result<DensityMatrix> {
    let Space::TwoMode(c) = rho.space() else {
        return Err(Error::Shape(format!(
            "partial trace needs a two-mode space, got {:?}",
            rho.space()
        )));
    };
    let m = rho.matrix();
    let (da, db) = (c.dim_a(), c.dim_b());
    let out = match keep {
        Mode::Cavity => DMatrix::from_fn(da, da, |n, k| {
            (0..db).map(|j| m[(n * db + j, k * db + j)]).sum()
        }),
        Mode::Vibration => DMatrix::from_fn(db, db, |j, l| {
            (0..da).map(|n| m[(n * db + j, n * db + l)]).sum()
        }),
    };
    let dim = out.nrows();
    Ok(DensityMatrix::from_raw(Space::Mode(dim), out))
}

/// Traces the electronic level out of a composite density matrix.
pub fn trace_electronic(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let Space::Composite(s) = rho.space() else {
        return Err(Error::Shape(format!("{:?} has no electronic level", rho.space())));
    };
    let m = rho.matrix();
    let d = s.two_mode_dim();
    let out = DMatrix::from_fn(d, d, |r, c| m[(r, c)] + m[(r + d, c + d)]);
    Ok(DensityMatrix::from_raw(Space::TwoMode(s.cutoffs), out))
}
