use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hilbert::{displacement_closed_form, DensityMatrix, FockCutoffs, Space, StateVector, C64};

/// `4/π²`, the value of the joint Wigner function of the two-mode vacuum at
/// the origin and the bound on its modulus.
pub const WIGNER_MAX: f64 = 4.0 / (PI * PI);

/// Smallest fraction of a displaced state that must stay inside the
/// enlarged Fock block, per mode.
const CAPTURE_TOL: f64 = 5e-11;
/// Eigencomponents of a mixed state below this weight are dropped.
const MIN_WEIGHT: f64 = 1e-12;
/// Largest imaginary residue tolerated before it is discarded.
const IMAG_TOL: f64 = 1e-8;

/// `W(ς_i, χ_j)` on the product of two coordinate lists.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub alphas: Vec<C64>,
    pub betas: Vec<C64>,
    /// `values[(i, j)] = W(alphas[i], betas[j])`.
    pub values: DMatrix<f64>,
}

impl WignerGrid {
    pub fn min(&self) -> f64 {
        self.values.min()
    }

    pub fn max(&self) -> f64 {
        self.values.max()
    }
}

/// Weighted pure components `(p_k, Ψ_k)` with `Ψ_k[n, j]` the two-mode
/// coefficient matrix.
fn components(state: Components<'_>) -> Result<(FockCutoffs, Vec<(f64, DMatrix<C64>)>)> {
    match state {
        Components::Pure(psi) => {
            let c = two_mode(psi.space())?;
            Ok((c, vec![(1.0, psi.coefficient_matrix()?)]))
        }
        Components::Mixed(rho) => {
            let c = two_mode(rho.space())?;
            let eig = rho.matrix().clone().symmetric_eigen();
            let mut out = Vec::new();
            for (k, &p) in eig.eigenvalues.iter().enumerate() {
                if p > MIN_WEIGHT {
                    let v = eig.eigenvectors.column(k);
                    out.push((p, DMatrix::from_fn(c.dim_a(), c.dim_b(), |n, j| v[n * c.dim_b() + j])));
                }
            }
            Ok((c, out))
        }
    }
}

fn two_mode(space: Space) -> Result<FockCutoffs> {
    match space {
        Space::TwoMode(c) => Ok(c),
        other => Err(Error::Shape(format!("joint Wigner function needs a two-mode state, got {other:?}"))),
    }
}

/// Pure or mixed two-mode input.
#[derive(Clone, Copy)]
pub enum Components<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a StateVector> for Components<'a> {
    fn from(s: &'a StateVector) -> Self {
        Components::Pure(s)
    }
}

impl<'a> From<&'a DensityMatrix> for Components<'a> {
    fn from(r: &'a DensityMatrix) -> Self {
        Components::Mixed(r)
    }
}

/// Rows kept for `D(−ς)` acting on `dim` levels: the support of a state
/// with amplitude up to `√(dim−1) + |ς|` plus a wide margin.
fn enlarged_rows(dim: usize, shift: f64) -> usize {
    let r = ((dim - 1) as f64).sqrt() + shift;
    (r * r + 8.0 * r + 10.0).ceil() as usize
}

/// Largest enlarged block, which bounds the phase-space radius that can be
/// sampled.
pub const MAX_ENLARGED_ROWS: usize = 2048;

/// `D(−ς)` on `dim` columns, enlarged rows.
fn conjugating_displacement(z: C64, dim: usize) -> Result<DMatrix<C64>> {
    let rows = enlarged_rows(dim, z.norm());
    if !(rows <= MAX_ENLARGED_ROWS) {
        return Err(Error::Truncation(format!(
            "displacement {z} needs {rows} Fock levels, more than the {MAX_ENLARGED_ROWS} available"
        )));
    }
    displacement_closed_form(-z, rows, dim)
}

/// Fraction of `‖X‖²` retained, with a truncation error below tolerance.
fn check_capture(kept: f64, total: f64, what: &str, z: C64) -> Result<()> {
    if kept < total * (1.0 - CAPTURE_TOL) {
        return Err(Error::Truncation(format!(
            "displacing the {what} by {z} leaves {:.3e} of the state outside the enlarged Fock block",
            1.0 - kept / total
        )));
    }
    Ok(())
}

/// Per-χ data: `M = B† Π_b B` with `B = D_b(−χ)`.
fn vibration_parity(chi: C64, comps: &[(f64, DMatrix<C64>)], db: usize) -> Result<DMatrix<C64>> {
    let b = conjugating_displacement(chi, db)?;
    for (_, psi) in comps {
        let q = psi * b.transpose();
        check_capture(q.norm_squared(), psi.norm_squared(), "vibration", chi)?;
    }
    let mut pb = b.clone();
    for (j, mut row) in pb.row_iter_mut().enumerate() {
        if j % 2 == 1 {
            row.neg_mut();
        }
    }
    Ok(b.adjoint() * pb)
}

fn evaluate(alphas: &[C64], betas: &[C64], comps: &[(f64, DMatrix<C64>)], c: FockCutoffs) -> Result<DMatrix<f64>> {
    let parities = betas
        .iter()
        .map(|&chi| vibration_parity(chi, comps, c.dim_b()))
        .collect::<Result<Vec<_>>>()?;
    let mut values = DMatrix::zeros(alphas.len(), betas.len());
    for (i, &sigma) in alphas.iter().enumerate() {
        let a = conjugating_displacement(sigma, c.dim_a())?;
        let displaced: Vec<(f64, DMatrix<C64>)> = comps
            .iter()
            .map(|(p, psi)| {
                let phi = &a * psi;
                check_capture(phi.norm_squared(), psi.norm_squared(), "cavity", sigma)?;
                Ok((*p, phi))
            })
            .collect::<Result<_>>()?;
        for (j, m) in parities.iter().enumerate() {
            let mut w = C64::default();
            for (p, phi) in &displaced {
                let s = phi * m.transpose();
                let mut acc = C64::default();
                for n in 0..phi.nrows() {
                    let row: C64 = phi.row(n).iter().zip(s.row(n).iter()).map(|(x, y)| x.conj() * y).sum();
                    if n % 2 == 0 {
                        acc += row;
                    } else {
                        acc -= row;
                    }
                }
                w += acc * *p;
            }
            if w.im.abs() > IMAG_TOL {
                return Err(Error::Argument(format!(
                    "Wigner value at ({sigma}, {}) has imaginary residue {:e}",
                    betas[j], w.im
                )));
            }
            values[(i, j)] = WIGNER_MAX * w.re;
        }
    }
    Ok(values)
}

/// Joint Wigner function
/// `W(ς, χ) = (4/π²) ⟨D_a(ς) Π_a D_a†(ς) ⊗ D_b(χ) Π_b D_b†(χ)⟩`
/// with `Π = (−1)^{number}`, on every pair of `alphas × betas`.
///
/// The state is displaced by `D†` into an enlarged Fock block and the
/// parity read off there; a displaced state that leaks out of that block
/// is reported as a truncation error. `threads > 1` splits the `alphas`
/// across scoped worker threads.
pub fn joint_wigner<'a>(state: impl Into<Components<'a>>, alphas: &[C64], betas: &[C64], threads: usize) -> Result<WignerGrid> {
    let (c, comps) = components(state.into())?;
    let threads = threads.max(1).min(alphas.len().max(1));
    let values = if threads == 1 {
        evaluate(alphas, betas, &comps, c)?
    } else {
        let chunk = alphas.len().div_ceil(threads);
        let parts: Vec<Result<DMatrix<f64>>> = std::thread::scope(|scope| {
            let handles: Vec<_> = alphas
                .chunks(chunk)
                .map(|part| {
                    let comps = &comps;
                    scope.spawn(move || evaluate(part, betas, comps, c))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Argument("Wigner worker panicked".into()))))
                .collect()
        });
        let mut values = DMatrix::zeros(alphas.len(), betas.len());
        let mut row = 0;
        for part in parts {
            let part = part?;
            values.view_mut((row, 0), (part.nrows(), part.ncols())).copy_from(&part);
            row += part.nrows();
        }
        values
    };
    Ok(WignerGrid {
        alphas: alphas.to_vec(),
        betas: betas.to_vec(),
        values,
    })
}

/// `W` at individual `(ς, χ)` pairs, for line cuts through phase space.
pub fn joint_wigner_points<'a>(state: impl Into<Components<'a>>, points: &[(C64, C64)]) -> Result<Vec<f64>> {
    let (c, comps) = components(state.into())?;
    points
        .iter()
        .map(|&(s, x)| Ok(evaluate(&[s], &[x], &comps, c)?[(0, 0)]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{coherent_amplitudes, Space};
    use nalgebra::DVector;

    fn coherent_pair(a: C64, b: C64, c: FockCutoffs) -> StateVector {
        let va = coherent_amplitudes(a, c.dim_a()).unwrap().value;
        let vb = coherent_amplitudes(b, c.dim_b()).unwrap().value;
        let v = DVector::from_fn(c.two_mode_dim(), |i, _| va[i / c.dim_b()] * vb[i % c.dim_b()]);
        StateVector::normalized(Space::TwoMode(c), v).unwrap()
    }

    #[test]
    fn vacuum_peak() {
        let c = FockCutoffs::new(4, 4).unwrap();
        let vac = StateVector::fock(c, 0, 0).unwrap();
        let w = joint_wigner(&vac, &[C64::default()], &[C64::default()], 1).unwrap();
        assert!((w.values[(0, 0)] - WIGNER_MAX).abs() < 1e-12);
    }

    #[test]
    fn fock_one_is_negative_at_origin() {
        let c = FockCutoffs::new(3, 3).unwrap();
        let psi = StateVector::fock(c, 1, 0).unwrap();
        let w = joint_wigner_points(&psi, &[(C64::default(), C64::default())]).unwrap();
        assert!((w[0] + WIGNER_MAX).abs() < 1e-12);
    }

    #[test]
    fn mixed_and_pure_agree() {
        let c = FockCutoffs::new(10, 10).unwrap();
        let psi = coherent_pair(C64::new(0.8, 0.2), C64::new(-0.3, 0.5), c);
        let pts = [C64::new(0.5, 0.0), C64::new(-0.2, 0.7)];
        let a = joint_wigner(&psi, &pts, &pts, 1).unwrap();
        let b = joint_wigner(&psi.to_density(), &pts, &pts, 2).unwrap();
        assert!((a.values - b.values).amax() < 1e-10);
    }

    #[test]
    fn leaking_displacement_is_reported() {
        let c = FockCutoffs::new(3, 3).unwrap();
        let vac = StateVector::fock(c, 0, 0).unwrap();
        assert!(joint_wigner(&vac, &[C64::new(1e3, 0.0)], &[C64::default()], 1).is_err());
    }
}
