//! Post-processing of simulated or analytic states: electronic projection,
//! fidelities, excitation numbers, logarithmic negativity and the joint
//! Wigner function.

mod negativity;
mod wigner;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{hermitize, DensityMatrix, Level, Sign, Space, StateVector, C64};

pub use negativity::{log_negativity, log_negativity_pure, log_negativity_svd};
pub use wigner::{joint_wigner, joint_wigner_points, Components, WignerGrid, MAX_ENLARGED_ROWS, WIGNER_MAX};

/// Below this branch probability no collapsed state is formed.
pub const VANISHING_PROBABILITY: f64 = 1e-12;

/// Outcome of measuring the electronic state in the `|±⟩ = (|e⟩ ± |g⟩)/√2`
/// basis.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionResult<S> {
    pub sign: Sign,
    pub probability: f64,
    /// Normalized two-mode state left behind.
    pub collapsed: S,
}

/// A state on the composite or two-mode space that the analysis routines
/// accept in either pure or mixed form.
pub trait QuantumState: Sized {
    /// Two-mode counterpart produced by an electronic projection.
    type TwoMode;

    fn space(&self) -> Space;

    /// Unnormalized branch `⟨±|·|±⟩` and its weight.
    fn branch(&self, sign: Sign) -> Result<(f64, Self::TwoMode)>;

    /// `(⟨a†a⟩, ⟨b†b⟩)`.
    fn mean_excitations(&self) -> (f64, f64);
}

fn composite_only(space: Space) -> Result<crate::hilbert::CompositeSpace> {
    match space {
        Space::Composite(s) => Ok(s),
        other => Err(Error::Shape(format!("projection needs the composite space, got {other:?}"))),
    }
}

fn occupations(space: Space) -> Vec<(usize, usize)> {
    space.fock_numbers().unwrap_or_default()
}

impl QuantumState for StateVector {
    type TwoMode = StateVector;

    fn space(&self) -> Space {
        StateVector::space(self)
    }

    fn branch(&self, sign: Sign) -> Result<(f64, StateVector)> {
        let s = composite_only(self.space())?;
        let e = self.level_block(Level::Excited)?;
        let g = self.level_block(Level::Ground)?;
        let v: DVector<C64> = (e + g.scale(sign.factor())).unscale(std::f64::consts::SQRT_2);
        let p = v.norm_squared();
        Ok((p, StateVector::from_raw(Space::TwoMode(s.cutoffs), v)))
    }

    fn mean_excitations(&self) -> (f64, f64) {
        let amps = self.amplitudes();
        occupations(self.space())
            .iter()
            .zip(amps.iter())
            .fold((0.0, 0.0), |(na, nb), (&(n, j), c)| {
                let w = c.norm_sqr();
                (na + w * n as f64, nb + w * j as f64)
            })
    }
}

impl QuantumState for DensityMatrix {
    type TwoMode = DensityMatrix;

    fn space(&self) -> Space {
        DensityMatrix::space(self)
    }

    fn branch(&self, sign: Sign) -> Result<(f64, DensityMatrix)> {
        let s = composite_only(self.space())?;
        let (e, g) = (Level::Excited, Level::Ground);
        let cross = self.level_block(e, g)? + self.level_block(g, e)?;
        let m: DMatrix<C64> = (self.level_block(e, e)? + self.level_block(g, g)? + cross.scale(sign.factor())).scale(0.5);
        let p = m.trace().re;
        Ok((p, DensityMatrix::from_raw(Space::TwoMode(s.cutoffs), m)))
    }

    fn mean_excitations(&self) -> (f64, f64) {
        let m = self.matrix();
        occupations(self.space())
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(na, nb), (i, &(n, j))| {
                let w = m[(i, i)].re;
                (na + w * n as f64, nb + w * j as f64)
            })
    }
}

/// Probability of the `sign` outcome only, without forming the collapsed
/// state.
pub fn detection_probability<S: QuantumState>(state: &S, sign: Sign) -> Result<f64> {
    Ok(state.branch(sign)?.0)
}

/// Projects onto `|±⟩` and renormalizes the remaining two-mode state.
pub fn project_electronic(state: &StateVector, sign: Sign) -> Result<ProjectionResult<StateVector>> {
    let (p, branch) = state.branch(sign)?;
    check_branch(sign, p)?;
    let space = branch.space();
    let v = branch.into_amplitudes().unscale(p.sqrt());
    Ok(ProjectionResult {
        sign,
        probability: p,
        collapsed: StateVector::from_raw(space, v),
    })
}

/// Mixed-state counterpart of [`project_electronic`]: `⟨±|ρ|±⟩ / p_±`.
pub fn project_electronic_mixed(rho: &DensityMatrix, sign: Sign) -> Result<ProjectionResult<DensityMatrix>> {
    let (p, branch) = rho.branch(sign)?;
    check_branch(sign, p)?;
    let space = branch.space();
    let mut m = branch.into_matrix().unscale(p);
    hermitize(&mut m);
    Ok(ProjectionResult {
        sign,
        probability: p,
        collapsed: DensityMatrix::from_raw(space, m),
    })
}

fn check_branch(sign: Sign, p: f64) -> Result<()> {
    if !(p >= VANISHING_PROBABILITY) {
        return Err(Error::VanishingBranch { sign, probability: p });
    }
    Ok(())
}

fn same_space(a: Space, b: Space) -> Result<()> {
    if a != b {
        return Err(Error::Shape(format!("{a:?} vs {b:?}")));
    }
    Ok(())
}

/// `|⟨x|y⟩|²`.
pub fn fidelity_pure(x: &StateVector, y: &StateVector) -> Result<f64> {
    Ok(x.inner(y)?.norm_sqr())
}

/// `⟨ψ|ρ|ψ⟩`, evaluated as a quadratic form.
pub fn fidelity_mixed(psi: &StateVector, rho: &DensityMatrix) -> Result<f64> {
    same_space(psi.space(), rho.space())?;
    let v = psi.amplitudes();
    Ok(v.dotc(&(rho.matrix() * v)).re)
}

/// `(⟨a†a⟩, ⟨b†b⟩)` of a pure or mixed state.
pub fn mean_excitations<S: QuantumState>(state: &S) -> (f64, f64) {
    state.mean_excitations()
}
