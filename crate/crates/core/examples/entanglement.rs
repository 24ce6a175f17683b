//! Logarithmic negativity three ways: Schmidt coefficients of a pure
//! state, eigenvalues and singular values of the partial transpose, and
//! its decay as a cat state is mixed with its dephased version.

use molcav::analysis::{log_negativity, log_negativity_pure, log_negativity_svd};
use molcav::hilbert::{coherent_amplitudes, DensityMatrix, FockCutoffs, Space, StateVector, C64};
use nalgebra::DVector;

fn cat(alpha: f64, c: FockCutoffs) -> molcav::Result<StateVector> {
    let a = coherent_amplitudes(C64::new(alpha, 0.0), c.dim_a())?.value;
    let b = coherent_amplitudes(C64::new(0.0, alpha), c.dim_b())?.value;
    let mut v = DVector::from_fn(c.two_mode_dim(), |i, _| a[i / c.dim_b()] * b[i % c.dim_b()]);
    v[0] += C64::new(1.0, 0.0);
    StateVector::normalized(Space::TwoMode(c), v)
}

fn main() -> molcav::Result<()> {
    let c = FockCutoffs::new(14, 14)?;
    for alpha in [0.5, 1.0, 2.0] {
        let psi = cat(alpha, c)?;
        let rho = psi.to_density();
        println!(
            "alpha {alpha}: pure {:.8}  eigen {:.8}  svd {:.8}",
            log_negativity_pure(&psi)?,
            log_negativity(&rho)?,
            log_negativity_svd(&rho)?
        );
    }

    let pure = cat(2.0, c)?.to_density();
    let m = pure.matrix();
    for lambda in [0.0, 0.25, 0.5, 0.75, 1.0] {
        // Scale the coherences between the two branches by 1 - lambda.
        let mixed = DensityMatrix::new(
            pure.space(),
            nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |r, k| {
                let cross = (r == 0) != (k == 0);
                if cross { m[(r, k)] * (1.0 - lambda) } else { m[(r, k)] }
            }),
        )?;
        println!("dephasing {lambda:.2}: N = {:.5}", log_negativity(&mixed)?);
    }
    Ok(())
}
