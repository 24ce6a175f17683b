//! Truncated Hilbert spaces for one electronic two-level system and two
//! bosonic modes: the cavity field `a` and the molecular vibration `b`.
//!
//! Basis layout of the composite space is level-major, then cavity Fock
//! index, then vibrational Fock index:
//!
//! ```text
//! index(s, n, j) = s * (N_a + 1)(N_b + 1) + n * (N_b + 1) + j,   s ∈ {g = 0, e = 1}
//! ```
//!
//! so each electronic level owns one contiguous two-mode slab and the slab
//! uses the same layout as the two-mode space on its own.

mod fock;
mod operator;
mod partial;

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use fock::{
    annihilation, coherent_amplitudes, coherent_state, creation, displacement, displacement_closed_form,
    ln_factorials,
    number, poisson_tail, Truncated,
};
pub use operator::{Coefficient, Operator, TimeDependentOperator};
pub use partial::{partial_trace, partial_transpose, partial_transpose_matrix, trace_electronic};

pub type C64 = Complex64;

/// Tolerance on the Euclidean norm of a state vector.
pub const NORM_TOL: f64 = 1e-8;
/// Tolerance on `max |ρ - ρ†|` of a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Tolerance on `|Tr ρ - 1|`.
pub const TRACE_TOL: f64 = 1e-6;
/// Slack allowed on the smallest eigenvalue of a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-6;

/// Electronic level of the molecule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    Ground,
    Excited,
}

impl Level {
    pub const ALL: [Level; 2] = [Level::Ground, Level::Excited];

    fn block(self) -> usize {
        match self {
            Level::Ground => 0,
            Level::Excited => 1,
        }
    }
}

/// One of the two bosonic modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    /// Cavity field, operator `a`.
    Cavity,
    /// Molecular vibration, operator `b`.
    Vibration,
}

/// Measurement outcome in the `|±⟩ = (|e⟩ ± |g⟩)/√2` basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        }
    }
}

/// Highest retained Fock level of each mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockCutoffs {
    pub n_a_max: usize,
    pub n_b_max: usize,
}

impl FockCutoffs {
    pub fn new(n_a_max: usize, n_b_max: usize) -> Result<Self> {
        let c = FockCutoffs { n_a_max, n_b_max };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_a_max < 1 || self.n_b_max < 1 {
            return Err(Error::Argument(format!(
                "Fock cutoffs must be at least 1, got ({}, {})",
                self.n_a_max, self.n_b_max
            )));
        }
        Ok(())
    }

    pub fn dim_a(&self) -> usize {
        self.n_a_max + 1
    }

    pub fn dim_b(&self) -> usize {
        self.n_b_max + 1
    }

    pub fn dim_of(&self, mode: Mode) -> usize {
        match mode {
            Mode::Cavity => self.dim_a(),
            Mode::Vibration => self.dim_b(),
        }
    }

    /// Dimension of the two-mode space.
    pub fn two_mode_dim(&self) -> usize {
        self.dim_a() * self.dim_b()
    }

    /// Linear index of `|n⟩_a|j⟩_b` in the two-mode space.
    pub fn two_mode_index(&self, n: usize, j: usize) -> Result<usize> {
        if n > self.n_a_max || j > self.n_b_max {
            return Err(Error::IndexRange(format!(
                "(n, j) = ({n}, {j}) outside cutoffs ({}, {})",
                self.n_a_max, self.n_b_max
            )));
        }
        Ok(n * self.dim_b() + j)
    }

    /// `a` on the two-mode space.
    pub fn cavity_annihilation(&self) -> Operator {
        annihilation_unchecked(self.dim_a()).kron(&Operator::identity(self.dim_b()))
    }

    /// `b` on the two-mode space.
    pub fn vibration_annihilation(&self) -> Operator {
        Operator::identity(self.dim_a()).kron(&annihilation_unchecked(self.dim_b()))
    }
}

/// The truncated space `{g, e} ⊗ Fock(a) ⊗ Fock(b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CompositeSpace {
    pub cutoffs: FockCutoffs,
}

impl CompositeSpace {
    pub fn new(cutoffs: FockCutoffs) -> Result<Self> {
        cutoffs.validate()?;
        Ok(CompositeSpace { cutoffs })
    }

    pub fn dim(&self) -> usize {
        2 * self.cutoffs.two_mode_dim()
    }

    pub fn two_mode_dim(&self) -> usize {
        self.cutoffs.two_mode_dim()
    }

    pub fn index(&self, level: Level, n: usize, j: usize) -> Result<usize> {
        Ok(level.block() * self.two_mode_dim() + self.cutoffs.two_mode_index(n, j)?)
    }

    pub fn unindex(&self, index: usize) -> Result<(Level, usize, usize)> {
        if index >= self.dim() {
            return Err(Error::IndexRange(format!(
                "index {index} outside composite dimension {}",
                self.dim()
            )));
        }
        let slab = self.two_mode_dim();
        let level = if index < slab { Level::Ground } else { Level::Excited };
        let rem = index % slab;
        Ok((level, rem / self.cutoffs.dim_b(), rem % self.cutoffs.dim_b()))
    }

    /// Index range of the two-mode slab belonging to `level`.
    pub fn block(&self, level: Level) -> Range<usize> {
        let slab = self.two_mode_dim();
        level.block() * slab..(level.block() + 1) * slab
    }

    fn lift(&self, level_op: &Operator, mode_op: &Operator) -> Operator {
        level_op.kron(mode_op)
    }

    /// `a` on the composite space.
    pub fn cavity_annihilation(&self) -> Operator {
        self.lift(&Operator::identity(2), &self.cutoffs.cavity_annihilation())
    }

    /// `b` on the composite space.
    pub fn vibration_annihilation(&self) -> Operator {
        self.lift(&Operator::identity(2), &self.cutoffs.vibration_annihilation())
    }

    /// `σ₋ = |g⟩⟨e|`.
    pub fn lowering(&self) -> Operator {
        let s = Operator::from_triplets(2, 2, [(0, 1, C64::new(1.0, 0.0))]);
        self.lift(&s, &Operator::identity(self.two_mode_dim()))
    }

    /// `σ₊σ₋ = |e⟩⟨e|`.
    pub fn excited_projector(&self) -> Operator {
        let p = Operator::from_triplets(2, 2, [(1, 1, C64::new(1.0, 0.0))]);
        self.lift(&p, &Operator::identity(self.two_mode_dim()))
    }

    /// Iterator over `(index, level, n, j)` in layout order.
    pub fn basis(&self) -> impl Iterator<Item = (usize, Level, usize, usize)> + '_ {
        (0..self.dim()).map(move |i| {
            let (s, n, j) = self.unindex(i).expect("index in range");
            (i, s, n, j)
        })
    }
}

/// The space a state lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Space {
    /// A single bosonic mode with `dim` Fock levels.
    Mode(usize),
    /// Cavity ⊗ vibration.
    TwoMode(FockCutoffs),
    /// Electronic ⊗ cavity ⊗ vibration.
    Composite(CompositeSpace),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Mode(d) => *d,
            Space::TwoMode(c) => c.two_mode_dim(),
            Space::Composite(s) => s.dim(),
        }
    }

    pub fn cutoffs(&self) -> Option<FockCutoffs> {
        match self {
            Space::Mode(_) => None,
            Space::TwoMode(c) => Some(*c),
            Space::Composite(s) => Some(s.cutoffs),
        }
    }

    /// Fock numbers `(n, j)` of every basis index; `None` for single modes.
    pub(crate) fn fock_numbers(&self) -> Option<Vec<(usize, usize)>> {
        let c = self.cutoffs()?;
        let slab: Vec<(usize, usize)> = (0..c.dim_a())
            .flat_map(|n| (0..c.dim_b()).map(move |j| (n, j)))
            .collect();
        Some(match self {
            Space::Composite(_) => slab.iter().chain(slab.iter()).copied().collect(),
            _ => slab,
        })
    }
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: Space,
    amps: DVector<C64>,
}

impl StateVector {
    /// Wraps amplitudes that must already have unit norm.
    pub fn new(space: Space, amps: DVector<C64>) -> Result<Self> {
        check_len(&space, amps.len())?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Argument(format!("state norm {norm} is not 1")));
        }
        Ok(StateVector { space, amps })
    }

    /// Normalizes `amps`; fails on a zero vector.
    pub fn normalized(space: Space, amps: DVector<C64>) -> Result<Self> {
        check_len(&space, amps.len())?;
        let norm = amps.norm();
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::Argument("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(StateVector {
            space,
            amps: amps.unscale(norm),
        })
    }

    pub(crate) fn from_raw(space: Space, amps: DVector<C64>) -> Self {
        debug_assert_eq!(space.dim(), amps.len());
        StateVector { space, amps }
    }

    /// `|s⟩|n⟩_a|j⟩_b`.
    pub fn basis(space: CompositeSpace, level: Level, n: usize, j: usize) -> Result<Self> {
        let mut amps = DVector::zeros(space.dim());
        amps[space.index(level, n, j)?] = C64::new(1.0, 0.0);
        Ok(StateVector::from_raw(Space::Composite(space), amps))
    }

    /// `|n⟩_a|j⟩_b`.
    pub fn fock(cutoffs: FockCutoffs, n: usize, j: usize) -> Result<Self> {
        let mut amps = DVector::zeros(cutoffs.two_mode_dim());
        amps[cutoffs.two_mode_index(n, j)?] = C64::new(1.0, 0.0);
        Ok(StateVector::from_raw(Space::TwoMode(cutoffs), amps))
    }

    /// `(|e⟩ + |g⟩)|0⟩|0⟩/√2`, the initial state of every protocol run.
    pub fn initial_plus(space: CompositeSpace) -> Self {
        let mut amps = DVector::zeros(space.dim());
        let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[space.index(Level::Ground, 0, 0).unwrap()] = h;
        amps[space.index(Level::Excited, 0, 0).unwrap()] = h;
        StateVector::from_raw(Space::Composite(space), amps)
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.space != other.space {
            return Err(Error::Shape(format!(
                "inner product between {:?} and {:?}",
                self.space, other.space
            )));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// Unnormalized two-mode slab of a composite state for `level`.
    pub fn level_block(&self, level: Level) -> Result<DVector<C64>> {
        match self.space {
            Space::Composite(s) => Ok(self.amps.rows_range(s.block(level)).into_owned()),
            other => Err(Error::Shape(format!("{other:?} has no electronic level"))),
        }
    }

    /// Coefficient matrix `Ψ[n, j]` of a two-mode state.
    pub fn coefficient_matrix(&self) -> Result<DMatrix<C64>> {
        match self.space {
            Space::TwoMode(c) => Ok(DMatrix::from_fn(c.dim_a(), c.dim_b(), |n, j| {
                self.amps[n * c.dim_b() + j]
            })),
            other => Err(Error::Shape(format!("{other:?} is not a two-mode space"))),
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space,
            mat: &self.amps * self.amps.adjoint(),
        }
    }

    /// `Σ |amp|²` over basis states with `n = N_a` or `j = N_b`.
    pub fn top_level_population(&self) -> f64 {
        top_population(&self.space, |i| self.amps[i].norm_sqr())
    }
}

/// Mixed state: Hermitian, unit trace, positive semidefinite within slack.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: Space,
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    /// Checks squareness, Hermiticity and trace. Positivity is checked
    /// separately by [`DensityMatrix::check_positive`] since it needs a
    /// factorization.
    pub fn new(space: Space, mat: DMatrix<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::Shape(format!(
                "density matrix is {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        check_len(&space, mat.nrows())?;
        let defect = hermiticity_defect(&mat);
        if defect > HERMITIAN_TOL {
            return Err(Error::Argument(format!("density matrix not Hermitian (defect {defect:e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Argument(format!("density matrix trace {tr} is not 1")));
        }
        Ok(DensityMatrix { space, mat })
    }

    pub(crate) fn from_raw(space: Space, mat: DMatrix<C64>) -> Self {
        DensityMatrix { space, mat }
    }

    /// `I/d`.
    pub fn maximally_mixed(space: Space) -> Self {
        let d = space.dim();
        DensityMatrix {
            space,
            mat: DMatrix::identity(d, d).unscale(d as f64),
        }
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.mat
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.mat)
    }

    /// Replaces the matrix by `(ρ + ρ†)/2`.
    pub fn hermitize(&mut self) {
        hermitize(&mut self.mat);
    }

    /// Smallest eigenvalue, via a full Hermitian eigendecomposition.
    pub fn min_eigenvalue(&self) -> f64 {
        self.mat
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// True when every eigenvalue is above `-slack`: a Cholesky factorization
    /// of `ρ + slack·I` exists exactly in that case.
    pub fn is_positive_within(&self, slack: f64) -> bool {
        cholesky_succeeds(&self.mat, slack)
    }

    pub fn check_positive(&self) -> Result<()> {
        if self.is_positive_within(POSITIVITY_TOL) {
            Ok(())
        } else {
            Err(Error::Argument(format!(
                "density matrix has an eigenvalue below -{POSITIVITY_TOL:e}"
            )))
        }
    }

    /// Two-mode block `⟨s|ρ|s'⟩` of a composite density matrix.
    pub fn level_block(&self, row: Level, col: Level) -> Result<DMatrix<C64>> {
        match self.space {
            Space::Composite(s) => {
                let (r, c) = (s.block(row), s.block(col));
                Ok(self
                    .mat
                    .view((r.start, c.start), (r.len(), c.len()))
                    .into_owned())
            }
            other => Err(Error::Shape(format!("{other:?} has no electronic level"))),
        }
    }

    pub fn top_level_population(&self) -> f64 {
        top_population(&self.space, |i| self.mat[(i, i)].re)
    }
}

/// Attempts an in-place Cholesky factorization of `m + shift·I`, reading
/// only the lower triangle; fails on the first pivot that is not strictly
/// positive.
pub(crate) fn cholesky_succeeds(m: &DMatrix<C64>, shift: f64) -> bool {
    let n = m.nrows();
    let mut l = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re + shift;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / d;
        }
    }
    true
}

fn top_population(space: &Space, pop: impl Fn(usize) -> f64) -> f64 {
    match (space.cutoffs(), space.fock_numbers()) {
        (Some(c), Some(nums)) => nums
            .iter()
            .enumerate()
            .filter(|(_, &(n, j))| n == c.n_a_max || j == c.n_b_max)
            .map(|(i, _)| pop(i))
            .sum(),
        _ => pop(space.dim() - 1),
    }
}

fn check_len(space: &Space, len: usize) -> Result<()> {
    if space.dim() != len {
        return Err(Error::Shape(format!(
            "{len} amplitudes for a space of dimension {}",
            space.dim()
        )));
    }
    Ok(())
}

pub(crate) fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for c in 0..n {
        for r in c..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitize(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    for c in 0..n {
        for r in c..n {
            let avg = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            m[(r, c)] = avg;
            m[(c, r)] = avg.conj();
        }
    }
}

/// Symmetrizes a column-major `d × d` matrix in place and returns the
/// largest `|m[r,c] − conj(m[c,r])|` seen beforehand.
pub(crate) fn hermitize_slice(m: &mut [C64], d: usize) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..d {
        for r in c..d {
            let (a, b) = (m[r + c * d], m[c + r * d]);
            worst = worst.max((a - b.conj()).norm());
            let avg = (a + b.conj()) * 0.5;
            m[r + c * d] = avg;
            m[c + r * d] = avg.conj();
        }
    }
    worst
}

fn annihilation_unchecked(dim: usize) -> Operator {
    Operator::from_triplets(
        dim,
        dim,
        (1..dim).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(na: usize, nb: usize) -> CompositeSpace {
        CompositeSpace::new(FockCutoffs::new(na, nb).unwrap()).unwrap()
    }

    #[test]
    fn layout_origin_and_excited_offset() {
        let s = space(3, 2);
        assert_eq!(s.index(Level::Ground, 0, 0).unwrap(), 0);
        assert_eq!(s.index(Level::Excited, 0, 0).unwrap(), 4 * 3);
        assert_eq!(s.dim(), 2 * 4 * 3);
    }

    #[test]
    fn index_is_a_bijection() {
        for (na, nb) in [(1, 1), (2, 5), (4, 3)] {
            let s = space(na, nb);
            let mut seen = vec![false; s.dim()];
            for level in Level::ALL {
                for n in 0..=na {
                    for j in 0..=nb {
                        let i = s.index(level, n, j).unwrap();
                        assert!(!seen[i]);
                        seen[i] = true;
                        assert_eq!(s.unindex(i).unwrap(), (level, n, j));
                    }
                }
            }
            assert!(seen.into_iter().all(|x| x));
        }
    }

    #[test]
    fn out_of_range_index_is_rejected() {
        let s = space(2, 2);
        assert!(matches!(s.index(Level::Excited, 3, 0), Err(Error::IndexRange(_))));
        assert!(matches!(s.index(Level::Ground, 0, 3), Err(Error::IndexRange(_))));
        assert!(matches!(s.unindex(s.dim()), Err(Error::IndexRange(_))));
    }

    #[test]
    fn zero_cutoff_rejected() {
        assert!(FockCutoffs::new(0, 3).is_err());
        assert!(FockCutoffs::new(3, 0).is_err());
    }

    #[test]
    fn composite_operators_act_on_expected_levels() {
        let s = space(2, 2);
        let psi = StateVector::basis(s, Level::Excited, 1, 2).unwrap();
        let mut out = vec![C64::default(); s.dim()];
        s.cavity_annihilation().apply(psi.amplitudes().as_slice(), &mut out);
        assert!((out[s.index(Level::Excited, 0, 2).unwrap()] - 1.0).norm() < 1e-15);
        s.vibration_annihilation().apply(psi.amplitudes().as_slice(), &mut out);
        assert!((out[s.index(Level::Excited, 1, 1).unwrap()] - 2f64.sqrt()).norm() < 1e-15);
        s.lowering().apply(psi.amplitudes().as_slice(), &mut out);
        assert!((out[s.index(Level::Ground, 1, 2).unwrap()] - 1.0).norm() < 1e-15);
    }

    #[test]
    fn density_matrix_validation() {
        let s = space(1, 1);
        let psi = StateVector::initial_plus(s);
        let rho = psi.to_density();
        assert!(DensityMatrix::new(rho.space(), rho.matrix().clone()).is_ok());
        let mut bad = rho.matrix().clone();
        bad[(0, 1)] += C64::new(1e-6, 0.0);
        assert!(DensityMatrix::new(rho.space(), bad).is_err());
        let half = rho.matrix().scale(0.5);
        assert!(DensityMatrix::new(rho.space(), half).is_err());
        assert!(rho.is_positive_within(1e-12));
        let mut neg = DMatrix::<C64>::zeros(s.dim(), s.dim());
        neg[(0, 0)] = C64::new(1.1, 0.0);
        neg[(1, 1)] = C64::new(-0.1, 0.0);
        let neg = DensityMatrix::new(Space::Composite(s), neg).unwrap();
        assert!(neg.check_positive().is_err());
        assert!((neg.min_eigenvalue() + 0.1).abs() < 1e-12);
    }
}
