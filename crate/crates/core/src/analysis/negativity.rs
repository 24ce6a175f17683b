use crate::error::{Error, Result};
use crate::hilbert::{partial_transpose, DensityMatrix, Mode, Space, StateVector, HERMITIAN_TOL};

fn two_mode(space: Space) -> Result<()> {
    match space {
        Space::TwoMode(_) => Ok(()),
        other => Err(Error::Shape(format!("negativity needs a two-mode state, got {other:?}"))),
    }
}

fn checked(rho: &DensityMatrix) -> Result<()> {
    two_mode(rho.space())?;
    let defect = rho.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::Argument(format!("state not Hermitian (defect {defect:e})")));
    }
    Ok(())
}

/// `log₂ ‖ρ^{T_b}‖₁` from the eigenvalues of the Hermitian partial
/// transpose. The raw value is returned without clamping at zero.
pub fn log_negativity(rho: &DensityMatrix) -> Result<f64> {
    checked(rho)?;
    let pt = partial_transpose(rho, Mode::Vibration)?;
    let norm: f64 = pt.symmetric_eigenvalues().iter().map(|l| l.abs()).sum();
    Ok(norm.log2())
}

/// Same quantity through the singular values of `ρ^{T_b}`.
pub fn log_negativity_svd(rho: &DensityMatrix) -> Result<f64> {
    checked(rho)?;
    let pt = partial_transpose(rho, Mode::Vibration)?;
    Ok(pt.singular_values().sum().log2())
}

/// For a pure state the trace norm equals `(Σ sᵢ)²` with `sᵢ` the Schmidt
/// coefficients, the singular values of the coefficient matrix.
pub fn log_negativity_pure(psi: &StateVector) -> Result<f64> {
    two_mode(psi.space())?;
    let s: f64 = psi.coefficient_matrix()?.singular_values().sum();
    Ok(2.0 * s.log2())
}
