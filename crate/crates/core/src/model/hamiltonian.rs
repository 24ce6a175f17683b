use std::sync::Arc;

use super::{EffectiveParams, ModelParams};
use crate::error::Result;
use crate::hilbert::{CompositeSpace, FockCutoffs, Operator, TimeDependentOperator, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

struct Ladders {
    a: Operator,
    b: Operator,
    pe: Operator,
}

impl Ladders {
    fn new(space: &CompositeSpace) -> Self {
        Ladders {
            a: space.cavity_annihilation(),
            b: space.vibration_annihilation(),
            pe: space.excited_projector(),
        }
    }
}

/// Time-independent part of the lab-frame Hamiltonian with the electronic
/// splitting scaled by `electronic_weight` (1 in the lab, 0 once the
/// constant `ω_e σ₊σ₋` has been moved into the frame).
fn static_part(p: &ModelParams, l: &Ladders, electronic_weight: f64) -> Result<Operator> {
    let (ad, bd) = (l.a.adjoint(), l.b.adjoint());
    let na = ad.matmul(&l.a)?;
    let nb = bd.matmul(&l.b)?;
    let hopping = ad.matmul(&l.b)?.add(&bd.matmul(&l.a)?)?;
    let displacement = l.pe.matmul(&bd.add(&l.b)?)?;
    l.pe
        .scale(c(electronic_weight * p.omega_e))
        .add(&na.scale(c(p.omega_c)))?
        .add(&nb.scale(c(p.omega_v)))?
        .add(&hopping.scale(c(p.g)))?
        .add(&displacement.scale(c(p.lambda)))
}

fn total_number(l: &Ladders) -> Result<Operator> {
    l.a.adjoint().matmul(&l.a)?.add(&l.b.adjoint().matmul(&l.b)?)
}

/// Lab-frame `H(t)` at one instant:
/// `ω_e σ₊σ₋ + ω_v b†b + λσ₊σ₋(b†+b) + ω_c a†a + g(a†b+ab†) + ξω₀cos(ω₀t)(a†a+b†b)`.
pub fn full_hamiltonian(
    p: &ModelParams,
    e: &EffectiveParams,
    t: f64,
    space: &CompositeSpace,
) -> Result<Operator> {
    let l = Ladders::new(space);
    let modulation = p.xi * e.omega_0 * (e.omega_0 * t).cos();
    static_part(p, &l, 1.0)?.add(&total_number(&l)?.scale(c(modulation)))
}

/// Lab-frame `H(t)` as a time-dependent operator. With `electronic_shift`
/// the constant `ω_e σ₊σ₋` is dropped, which is the Hamiltonian in the frame
/// rotating with the electronic splitting.
pub fn full_hamiltonian_td(
    p: &ModelParams,
    e: &EffectiveParams,
    space: &CompositeSpace,
    electronic_shift: bool,
) -> Result<TimeDependentOperator> {
    let l = Ladders::new(space);
    let weight = if electronic_shift { 0.0 } else { 1.0 };
    let (xi, w0) = (p.xi, e.omega_0);
    TimeDependentOperator::new(vec![
        (static_part(p, &l, weight)?, Arc::new(|_| c(1.0))),
        (total_number(&l)?, Arc::new(move |t| c(xi * w0 * (w0 * t).cos()))),
    ])
}

/// `H(t)` in the interaction picture of its diagonal part
/// `ω_e σ₊σ₋ + (ω_c + ξω₀cos ω₀t) a†a + (ω_v + ξω₀cos ω₀t) b†b`:
///
/// ```text
/// H_I(t) = g (e^{i(ω_c−ω_v)t} a†b + h.c.) + λ σ₊σ₋ (e^{i(ω_v t + ξ sin ω₀t)} b† + h.c.)
/// ```
///
/// No approximation is involved; a basis amplitude `(s, n, j)` differs from
/// its lab-frame value by the phase `ω_e s t + n φ_c(t) + j φ_v(t)` with
/// `φ_x(t) = ω_x t + ξ sin ω₀t`.
pub fn interaction_hamiltonian_td(
    p: &ModelParams,
    e: &EffectiveParams,
    space: &CompositeSpace,
) -> Result<TimeDependentOperator> {
    let l = Ladders::new(space);
    let (ad, bd) = (l.a.adjoint(), l.b.adjoint());
    let (g, lam, xi, w0) = (p.g, p.lambda, p.xi, e.omega_0);
    let dw = p.omega_c - p.omega_v;
    let wv = p.omega_v;
    let phase_v = move |t: f64| wv * t + xi * (w0 * t).sin();
    TimeDependentOperator::new(vec![
        (ad.matmul(&l.b)?, Arc::new(move |t| C64::from_polar(g, dw * t))),
        (bd.matmul(&l.a)?, Arc::new(move |t| C64::from_polar(g, -dw * t))),
        (l.pe.matmul(&bd)?, Arc::new(move |t| C64::from_polar(lam, phase_v(t)))),
        (l.pe.matmul(&l.b)?, Arc::new(move |t| C64::from_polar(lam, -phase_v(t)))),
    ])
}

fn rwa_terms(e: &EffectiveParams, a: Operator, b: Operator) -> Result<TimeDependentOperator> {
    let (ga, gb, da, db) = (e.g_a, e.g_b, e.delta_a, e.delta_b);
    TimeDependentOperator::new(vec![
        (b.adjoint(), Arc::new(move |t| C64::from_polar(gb, db * t))),
        (b, Arc::new(move |t| C64::from_polar(gb, -db * t))),
        (a.adjoint(), Arc::new(move |t| C64::from_polar(-ga, da * t))),
        (a, Arc::new(move |t| C64::from_polar(-ga, -da * t))),
    ])
}

/// Excited-branch RWA Hamiltonian on the two-mode space:
/// `H_e(t) = g_b(b†e^{iδ_b t} + h.c.) − g_a(a†e^{iδ_a t} + h.c.)`.
pub fn excited_block_rwa(e: &EffectiveParams, cutoffs: &FockCutoffs) -> Result<TimeDependentOperator> {
    rwa_terms(e, cutoffs.cavity_annihilation(), cutoffs.vibration_annihilation())
}

/// `H_RWA(t) = H_e(t) ⊗ |e⟩⟨e|` on the composite space as a time-dependent
/// operator.
pub fn rwa_hamiltonian_td(e: &EffectiveParams, space: &CompositeSpace) -> Result<TimeDependentOperator> {
    let pe = space.excited_projector();
    rwa_terms(
        e,
        pe.matmul(&space.cavity_annihilation())?,
        pe.matmul(&space.vibration_annihilation())?,
    )
}

/// `H_RWA(t)` at one instant.
pub fn rwa_hamiltonian(e: &EffectiveParams, t: f64, space: &CompositeSpace) -> Result<Operator> {
    Ok(rwa_hamiltonian_td(e, space)?.eval(t))
}
