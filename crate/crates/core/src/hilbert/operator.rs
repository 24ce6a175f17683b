//! Compressed sparse row operators.
//!
//! Every Hamiltonian and jump operator in this crate has at most a handful of
//! nonzero entries per row, so they are stored in CSR form and applied to
//! vectors and to the columns of dense matrices directly. Dense conversion is
//! available for small spaces and for tests.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::C64;
use crate::error::{Error, Result};

/// Sparse complex matrix in compressed-row layout.
#[derive(Clone, PartialEq)]
pub struct Operator {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("nrows", &self.nrows)
            .field("ncols", &self.ncols)
            .field("nnz", &self.nnz())
            .finish()
    }
}

impl Operator {
    /// Builds an operator from `(row, col, value)` triplets. Duplicates are
    /// summed; entries that sum to exactly zero are dropped.
    pub fn from_triplets<I>(nrows: usize, ncols: usize, triplets: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, C64)>,
    {
        let mut trip: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        trip.sort_by_key(|a| (a.0, a.1));
        let mut row_ptr = vec![0usize; nrows + 1];
        let mut col_idx = Vec::with_capacity(trip.len());
        let mut values: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows_of = Vec::with_capacity(trip.len());
        for (r, c, v) in trip {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) outside {nrows}x{ncols}");
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                rows_of.push(r);
                last = Some((r, c));
            }
        }
        // drop exact zeros after summation
        let mut keep_c = Vec::with_capacity(col_idx.len());
        let mut keep_v = Vec::with_capacity(col_idx.len());
        for ((c, v), r) in col_idx.into_iter().zip(values).zip(rows_of) {
            if v != C64::new(0.0, 0.0) {
                keep_c.push(c);
                keep_v.push(v);
                row_ptr[r + 1] += 1;
            }
        }
        for r in 0..nrows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Operator {
            nrows,
            ncols,
            row_ptr,
            col_idx: keep_c,
            values: keep_v,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Operator::from_triplets(nrows, ncols, std::iter::empty())
    }

    pub fn identity(n: usize) -> Self {
        Operator::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Operator::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `r` as `(col, value)` pairs.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// Value at `(r, c)`, zero if not stored.
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r)
            .find(|&(cc, _)| cc == c)
            .map(|(_, v)| v)
            .unwrap_or_default()
    }

    pub fn transpose(&self) -> Self {
        Operator::from_triplets(self.ncols, self.nrows, self.iter().map(|(r, c, v)| (c, r, v)))
    }

    pub fn adjoint(&self) -> Self {
        Operator::from_triplets(
            self.ncols,
            self.nrows,
            self.iter().map(|(r, c, v)| (c, r, v.conj())),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.check_same_shape(other)?;
        Ok(Operator::from_triplets(
            self.nrows,
            self.ncols,
            self.iter().chain(other.iter()),
        ))
    }

    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        if self.ncols != other.nrows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut trip = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    trip.push((r, c, a * b));
                }
            }
        }
        Ok(Operator::from_triplets(self.nrows, other.ncols, trip))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Self {
        let mut trip = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.iter() {
            for (r2, c2, v2) in other.iter() {
                trip.push((r1 * other.nrows + r2, c1 * other.ncols + c2, v1 * v2));
            }
        }
        Operator::from_triplets(self.nrows * other.nrows, self.ncols * other.ncols, trip)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    /// `y += alpha A x`.
    pub fn apply_add(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yr += alpha * acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// Largest entry of `|A - A†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        self.iter()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    /// `(row_ptr, col_idx, values)` for hand-written kernels.
    pub(crate) fn raw(&self) -> (&[usize], &[usize], &[C64]) {
        (&self.row_ptr, &self.col_idx, &self.values)
    }

    /// Position of `(r, c)` in the value array, if stored.
    pub(crate) fn position(&self, r: usize, c: usize) -> Option<usize> {
        (self.row_ptr[r]..self.row_ptr[r + 1]).find(|&k| self.col_idx[k] == c)
    }

    fn check_same_shape(&self, other: &Operator) -> Result<()> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        Ok(())
    }
}

/// Scalar time dependence of one Hamiltonian term.
pub type Coefficient = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// `H(t) = Σ_k c_k(t) O_k` on a shared sparsity pattern.
///
/// The union pattern is computed once; evaluating at a given time only
/// refills the value array.
#[derive(Clone)]
pub struct TimeDependentOperator {
    pattern: Operator,
    terms: Vec<(Vec<C64>, Coefficient)>,
}

impl fmt::Debug for TimeDependentOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TimeDependentOperator")
            .field("pattern", &self.pattern)
            .field("terms", &self.terms.len())
            .finish()
    }
}

impl TimeDependentOperator {
    pub fn new(terms: Vec<(Operator, Coefficient)>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::Argument("time-dependent operator needs a term".into()))?;
        let (n, m) = (first.0.nrows(), first.0.ncols());
        for (op, _) in &terms {
            if op.nrows() != n || op.ncols() != m {
                return Err(Error::Shape(format!(
                    "term of shape {}x{} in a {}x{} sum",
                    op.nrows(),
                    op.ncols(),
                    n,
                    m
                )));
            }
        }
        // union pattern; unit values so nothing is dropped as zero
        let pattern = Operator::from_triplets(
            n,
            m,
            terms
                .iter()
                .flat_map(|(op, _)| op.iter().map(|(r, c, _)| (r, c, C64::new(1.0, 0.0)))),
        );
        let terms = terms
            .into_iter()
            .map(|(op, coeff)| {
                let mut vals = vec![C64::new(0.0, 0.0); pattern.nnz()];
                for (r, c, v) in op.iter() {
                    let k = pattern.position(r, c).expect("entry in union pattern");
                    vals[k] += v;
                }
                (vals, coeff)
            })
            .collect();
        Ok(TimeDependentOperator { pattern, terms })
    }

    /// Returns `self + c(t)·op`.
    pub fn with_term(&self, op: Operator, coeff: Coefficient) -> Result<Self> {
        let mut terms: Vec<(Operator, Coefficient)> = self
            .terms
            .iter()
            .map(|(vals, c)| {
                let mut o = self.pattern.clone();
                o.values_mut().copy_from_slice(vals);
                (o, c.clone())
            })
            .collect();
        terms.push((op, coeff));
        TimeDependentOperator::new(terms)
    }

    pub fn dim(&self) -> usize {
        self.pattern.nrows()
    }

    /// Operator with the right pattern whose values are refreshed by
    /// [`TimeDependentOperator::eval_into`].
    pub fn workspace(&self) -> Operator {
        self.pattern.clone()
    }

    pub fn eval_into(&self, t: f64, out: &mut Operator) {
        let vals = out.values_mut();
        vals.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        for (tv, coeff) in &self.terms {
            let c = coeff(t);
            for (o, &x) in vals.iter_mut().zip(tv) {
                *o += c * x;
            }
        }
    }

    pub fn eval(&self, t: f64) -> Operator {
        let mut op = self.workspace();
        self.eval_into(t, &mut op);
        op
    }
}
