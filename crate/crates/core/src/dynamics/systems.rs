use std::sync::Arc;

use super::ode::System;
use crate::error::Result;
use crate::hilbert::{Operator, TimeDependentOperator, C64};

const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Stored entries of a sparse operator grouped into stretches along a
/// diagonal: `(row + i, col + i)` for `i < len`. The ladder operators of
/// the model produce few, long stretches, which turns every product into
/// contiguous slice arithmetic.
#[derive(Clone, Copy, Debug)]
struct Run {
    row: usize,
    col: usize,
    /// Offset of the first value in the value array.
    start: usize,
    len: usize,
}

/// Run layout of an operator plus, for every value slot, the position of
/// the matching entry in the operator's CSR value array.
struct RunLayout {
    runs: Vec<Run>,
    source: Vec<usize>,
}

impl RunLayout {
    fn new(op: &Operator) -> Self {
        let (rp, ci, _) = op.raw();
        let mut entries: Vec<(isize, usize, usize, usize)> = Vec::with_capacity(op.nnz());
        for r in 0..op.nrows() {
            for pos in rp[r]..rp[r + 1] {
                let c = ci[pos];
                entries.push((c as isize - r as isize, r, c, pos));
            }
        }
        entries.sort_unstable();
        let mut runs: Vec<Run> = Vec::new();
        let mut source = Vec::with_capacity(entries.len());
        let mut prev: Option<(isize, usize)> = None;
        for (slot, &(diag, r, c, pos)) in entries.iter().enumerate() {
            match (prev, runs.last_mut()) {
                (Some((pd, pr)), Some(run)) if pd == diag && pr + 1 == r => run.len += 1,
                _ => runs.push(Run {
                    row: r,
                    col: c,
                    start: slot,
                    len: 1,
                }),
            }
            source.push(pos);
            prev = Some((diag, r));
        }
        RunLayout { runs, source }
    }

    fn gather(&self, csr_values: &[C64], out: &mut [C64]) {
        for (o, &pos) in out.iter_mut().zip(&self.source) {
            *o = csr_values[pos];
        }
    }
}

/// `out += A x` for a run-structured `A` with values `vals`.
fn apply_add(runs: &[Run], vals: &[C64], x: &[C64], out: &mut [C64]) {
    for run in runs {
        let v = &vals[run.start..run.start + run.len];
        let src = &x[run.col..run.col + run.len];
        let dst = &mut out[run.row..run.row + run.len];
        for ((o, &a), &b) in dst.iter_mut().zip(v).zip(src) {
            *o += a * b;
        }
    }
}

/// Time-dependent operator evaluated straight into run order.
struct RunOperator {
    op: TimeDependentOperator,
    work: Operator,
    layout: RunLayout,
    values: Vec<C64>,
}

impl RunOperator {
    fn new(op: TimeDependentOperator) -> Self {
        let work = op.workspace();
        let layout = RunLayout::new(&work);
        let values = vec![C64::default(); layout.source.len()];
        RunOperator {
            op,
            work,
            layout,
            values,
        }
    }

    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn update(&mut self, t: f64) {
        self.op.eval_into(t, &mut self.work);
        let (_, _, v) = self.work.raw();
        self.layout.gather(v, &mut self.values);
    }

    fn apply_add(&self, x: &[C64], out: &mut [C64]) {
        apply_add(&self.layout.runs, &self.values, x, out);
    }
}

/// `y' = −i H(t) y`.
pub(crate) struct Schrodinger {
    h: RunOperator,
}

impl Schrodinger {
    pub fn new(h: TimeDependentOperator) -> Self {
        Schrodinger { h: RunOperator::new(h) }
    }
}

impl System for Schrodinger {
    fn len(&self) -> usize {
        self.h.dim()
    }

    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
        self.h.update(t);
        dy.iter_mut().for_each(|v| *v = C64::default());
        self.h.apply_add(y, dy);
        dy.iter_mut().for_each(|v| *v *= MINUS_I);
    }
}

/// Constant jump operator `L` with its rate, in run form.
struct Jump {
    rate: f64,
    runs: Vec<Run>,
    values: Vec<C64>,
    /// `(row, col, value)` of every stored entry.
    entries: Vec<(usize, usize, C64)>,
}

impl Jump {
    fn new(rate: f64, op: &Operator) -> Self {
        let layout = RunLayout::new(op);
        let (_, _, v) = op.raw();
        let mut values = vec![C64::default(); layout.source.len()];
        layout.gather(v, &mut values);
        Jump {
            rate,
            runs: layout.runs,
            values,
            entries: op.iter().collect(),
        }
    }

    /// `out += rate · L ρ L†` on the lower triangle (`row ≥ col`) of a
    /// column-major `d × d` matrix: column `c` collects
    /// `conj(L[c,m]) · L ρ[:, m]`.
    fn sandwich_add_lower(&self, d: usize, rho: &[C64], out: &mut [C64]) {
        for &(c, m, lcm) in &self.entries {
            let w = lcm.conj() * self.rate;
            let src = &rho[m * d..(m + 1) * d];
            let dst = &mut out[c * d..(c + 1) * d];
            for run in &self.runs {
                let skip = c.saturating_sub(run.row).min(run.len);
                let len = run.len - skip;
                let v = &self.values[run.start + skip..run.start + run.len];
                let s = &src[run.col + skip..run.col + skip + len];
                let o = &mut dst[run.row + skip..run.row + skip + len];
                for ((o, &a), &b) in o.iter_mut().zip(v).zip(s) {
                    *o += a * w * b;
                }
            }
        }
    }
}

/// Lindblad generator on a column-major density matrix:
///
/// ```text
/// X  = −i H_eff ρ,   H_eff = H − (i/2) Σ γ L†L
/// ρ' = X + X† + Σ γ L ρ L†
/// ```
///
/// which equals `−i[H, ρ] + Σ γ D[L]ρ` for Hermitian `ρ`. Only the lower
/// triangle is computed; the upper one is its conjugate mirror, so the
/// derivative is exactly Hermitian. A diagonal `Σ γ L†L` is applied
/// elementwise instead of through `H_eff`.
pub(crate) struct Lindblad {
    h_eff: RunOperator,
    /// Diagonal of `Σ γ L†L / 2` when that operator is diagonal.
    half_decay: Vec<f64>,
    jumps: Vec<Jump>,
    x: Vec<C64>,
    d: usize,
}

impl Lindblad {
    pub fn new(h: TimeDependentOperator, jumps: Vec<(f64, Operator)>) -> Result<Self> {
        let d = h.dim();
        let mut decay = Operator::zeros(d, d);
        for (rate, l) in &jumps {
            decay = decay.add(&l.adjoint().matmul(l)?.scale(C64::new(0.5 * rate, 0.0)))?;
        }
        let mut half_decay = vec![0.0; d];
        let h_eff = if decay.iter().all(|(r, c, v)| r == c && v.im == 0.0) {
            for (r, _, v) in decay.iter() {
                half_decay[r] = v.re;
            }
            h
        } else {
            h.with_term(decay.scale(C64::new(0.0, -1.0)), Arc::new(|_| C64::new(1.0, 0.0)))?
        };
        Ok(Lindblad {
            h_eff: RunOperator::new(h_eff),
            half_decay,
            jumps: jumps.iter().map(|(rate, op)| Jump::new(*rate, op)).collect(),
            x: vec![C64::default(); d * d],
            d,
        })
    }
}

const TILE: usize = 32;

impl System for Lindblad {
    fn len(&self) -> usize {
        self.d * self.d
    }

    fn rhs(&mut self, t: f64, rho: &[C64], drho: &mut [C64]) {
        let d = self.d;
        self.h_eff.update(t);
        self.x.iter_mut().for_each(|v| *v = C64::default());
        for (col, xcol) in rho.chunks_exact(d).zip(self.x.chunks_exact_mut(d)) {
            self.h_eff.apply_add(col, xcol);
        }
        // X holds H_eff ρ; the −i factor is applied while symmetrizing.
        let (x, gam) = (&self.x, &self.half_decay);
        for c0 in (0..d).step_by(TILE) {
            for r0 in (c0..d).step_by(TILE) {
                for c in c0..(c0 + TILE).min(d) {
                    for r in r0.max(c)..(r0 + TILE).min(d) {
                        let v = x[r + c * d] - x[c + r * d].conj();
                        drho[r + c * d] = C64::new(v.im, -v.re) - rho[r + c * d] * (gam[r] + gam[c]);
                    }
                }
            }
        }
        for jump in &self.jumps {
            jump.sandwich_add_lower(d, rho, drho);
        }
        for c0 in (0..d).step_by(TILE) {
            for r0 in (c0..d).step_by(TILE) {
                for c in c0..(c0 + TILE).min(d) {
                    for r in r0.max(c + 1)..(r0 + TILE).min(d) {
                        drho[c + r * d] = drho[r + c * d].conj();
                    }
                }
            }
        }
    }
}
