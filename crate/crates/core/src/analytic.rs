//! Closed-form solution of the sideband-resonant dynamics.
//!
//! In the excited electronic branch the resonant Hamiltonian is linear in
//! the mode operators, so its propagator is a product of displacements and
//! a scalar phase:
//!
//! ```text
//! U_e(t) = e^{i(θ_a + θ_b)} D_a(−η) D_b(ζ)
//! η = (g_a/δ_a)(1 − e^{iδ_a t}),         ζ = (g_b/δ_b)(1 − e^{iδ_b t})
//! θ_x = (g_x/δ_x)² (δ_x t − sin δ_x t)
//! ```
//!
//! Rotating back to the bare modes gives lab-frame coherent amplitudes
//!
//! ```text
//! α = sinϑ ζ e^{−i(ξ sin ω₀t + ω₊t)} − cosϑ η e^{−i(ξ sin ω₀t + ω₋t)}
//! β = cosϑ ζ e^{−i(ξ sin ω₀t + ω₊t)} + sinϑ η e^{−i(ξ sin ω₀t + ω₋t)}
//! ```
//!
//! and the joint state `(e^{iθ}|e⟩|α,β⟩ + |g⟩|0,0⟩)/√2` with
//! `θ = θ_a + θ_b − ω_e t`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    coherent_amplitudes, displacement, CompositeSpace, FockCutoffs, Level, Sign, Space, StateVector,
    Truncated, C64,
};
use crate::model::{EffectiveParams, ModelParams};

/// Denominators `1 ± cosθ e^{−(|α|²+|β|²)/2}` below this are treated as zero.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AnalyticState {
    pub t: f64,
    pub alpha: C64,
    pub beta: C64,
    pub eta: C64,
    pub zeta: C64,
    pub theta_a: f64,
    pub theta_b: f64,
    pub theta: f64,
    /// `None` when the corresponding cat has vanishing norm.
    pub m_plus: Option<f64>,
    pub m_minus: Option<f64>,
    pub p_plus: f64,
    pub p_minus: f64,
}

impl AnalyticState {
    /// `⟨0,0|α,β⟩ = e^{−(|α|²+|β|²)/2}`.
    pub fn vacuum_overlap(&self) -> f64 {
        (-0.5 * (self.alpha.norm_sqr() + self.beta.norm_sqr())).exp()
    }

    pub fn normalization(&self, sign: Sign) -> Option<f64> {
        match sign {
            Sign::Plus => self.m_plus,
            Sign::Minus => self.m_minus,
        }
    }

    pub fn probability(&self, sign: Sign) -> f64 {
        match sign {
            Sign::Plus => self.p_plus,
            Sign::Minus => self.p_minus,
        }
    }
}

fn ratio(g: f64, delta: f64, which: &'static str) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::ResonantLimit(which));
    }
    Ok(g / delta)
}

/// Displacement `(g/δ)(1 − e^{iδt})` and phase `(g/δ)²(δt − sin δt)`.
fn branch(g: f64, delta: f64, t: f64, which: &'static str) -> Result<(C64, f64)> {
    let r = ratio(g, delta, which)?;
    let x = delta * t;
    let disp = C64::new(r, 0.0) * (C64::new(1.0, 0.0) - C64::from_polar(1.0, x));
    Ok((disp, r * r * (x - x.sin())))
}

/// Evaluates the closed-form solution at time `t`.
pub fn analytic_state(p: &ModelParams, e: &EffectiveParams, t: f64) -> Result<AnalyticState> {
    let (eta, theta_a) = branch(e.g_a, e.delta_a, t, "delta_a")?;
    let (zeta, theta_b) = branch(e.g_b, e.delta_b, t, "delta_b")?;
    let (s, c) = e.theta_mix.sin_cos();
    let modulation = p.xi * (e.omega_0 * t).sin();
    let rot_plus = C64::from_polar(1.0, -(modulation + e.omega_plus * t));
    let rot_minus = C64::from_polar(1.0, -(modulation + e.omega_minus * t));
    let alpha = zeta * rot_plus * s - eta * rot_minus * c;
    let beta = zeta * rot_plus * c + eta * rot_minus * s;
    let theta = theta_a + theta_b - p.omega_e * t;

    let overlap = (-0.5 * (eta.norm_sqr() + zeta.norm_sqr())).exp();
    let q = theta.cos() * overlap;
    let p_plus = 0.5 * (1.0 + q);
    let norm = |d: f64| (d > DEGENERACY_FLOOR).then(|| (2.0 * d).sqrt().recip());
    Ok(AnalyticState {
        t,
        alpha,
        beta,
        eta,
        zeta,
        theta_a,
        theta_b,
        theta,
        m_plus: norm(1.0 + q),
        m_minus: norm(1.0 - q),
        p_plus,
        p_minus: 1.0 - p_plus,
    })
}

/// `(⟨a†a⟩, ⟨b†b⟩) = (|α|²/2, |β|²/2)`: only the excited half of the
/// superposition is displaced.
pub fn mean_excitations_analytic(s: &AnalyticState) -> (f64, f64) {
    (0.5 * s.alpha.norm_sqr(), 0.5 * s.beta.norm_sqr())
}

pub fn detection_prob_analytic(s: &AnalyticState) -> (f64, f64) {
    (s.p_plus, s.p_minus)
}

/// Outer product of two single-mode coherent vectors laid out on the
/// two-mode space, with the combined truncation deficit.
fn two_mode_coherent(alpha: C64, beta: C64, c: FockCutoffs) -> Result<(DVector<C64>, f64)> {
    let ca = coherent_amplitudes(alpha, c.dim_a())?;
    let cb = coherent_amplitudes(beta, c.dim_b())?;
    let kept = (1.0 - ca.deficit) * (1.0 - cb.deficit);
    let scale = kept.sqrt();
    let v = DVector::from_fn(c.two_mode_dim(), |i, _| {
        ca.value[i / c.dim_b()] * cb.value[i % c.dim_b()] * scale
    });
    Ok((v, 1.0 - kept))
}

/// `M_±(e^{iθ}|α,β⟩ ± |0,0⟩)` on the two-mode space.
///
/// The coherent components are taken with their exact (untruncated)
/// coefficients; the weight lost above the cutoffs is reported as the
/// deficit and the vector is renormalized.
pub fn cat_state(s: &AnalyticState, sign: Sign, cutoffs: FockCutoffs) -> Result<Truncated<StateVector>> {
    let m = s.normalization(sign).ok_or(Error::DegenerateCat { sign })?;
    let (mut v, _) = two_mode_coherent(s.alpha, s.beta, cutoffs)?;
    v *= C64::from_polar(1.0, s.theta);
    v[0] += sign.factor();
    v.scale_mut(m);
    let kept = v.norm_squared();
    let state = StateVector::normalized(Space::TwoMode(cutoffs), v)?;
    Ok(Truncated {
        value: state,
        deficit: (1.0 - kept).max(0.0),
    })
}

/// `(e^{iθ}|e⟩|α,β⟩ + |g⟩|0,0⟩)/√2` on the composite space.
pub fn full_state_analytic(s: &AnalyticState, space: CompositeSpace) -> Result<Truncated<StateVector>> {
    let (coh, deficit) = two_mode_coherent(s.alpha, s.beta, space.cutoffs)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut v = DVector::zeros(space.dim());
    let excited = space.block(Level::Excited);
    v.rows_range_mut(excited).copy_from(&(coh * C64::from_polar(h, s.theta)));
    v[space.index(Level::Ground, 0, 0)?] = C64::new(h, 0.0);
    let kept = v.norm_squared();
    Ok(Truncated {
        value: StateVector::normalized(Space::Composite(space), v)?,
        deficit: (1.0 - kept).max(0.0).max(0.5 * deficit),
    })
}

/// Excited-branch propagator, stored in factored form.
#[derive(Clone, Debug)]
pub struct MagnusUnitary {
    pub phase: C64,
    /// `D_a(−η)` cropped to the cavity cutoff.
    pub cavity: DMatrix<C64>,
    /// `D_b(ζ)` cropped to the vibrational cutoff.
    pub vibration: DMatrix<C64>,
    pub cutoffs: FockCutoffs,
}

impl MagnusUnitary {
    /// `Ψ ↦ phase · D_a Ψ D_bᵀ` on the coefficient matrix of a two-mode state.
    /// The result is not renormalized; its norm defect measures truncation.
    pub fn apply(&self, psi: &StateVector) -> Result<DVector<C64>> {
        if psi.space() != Space::TwoMode(self.cutoffs) {
            return Err(Error::Shape(format!("state on {:?}, propagator on {:?}", psi.space(), self.cutoffs)));
        }
        let out = &self.cavity * psi.coefficient_matrix()? * self.vibration.transpose() * self.phase;
        let db = self.cutoffs.dim_b();
        Ok(DVector::from_fn(self.cutoffs.two_mode_dim(), |i, _| out[(i / db, i % db)]))
    }

    /// Dense `(d_a d_b) × (d_a d_b)` matrix in the two-mode layout.
    pub fn to_matrix(&self) -> DMatrix<C64> {
        self.cavity.kronecker(&self.vibration) * self.phase
    }
}

/// `U_e(t) = e^{i(θ_a+θ_b)} D_a(−η) D_b(ζ)`.
pub fn magnus_unitary(e: &EffectiveParams, t: f64, cutoffs: FockCutoffs) -> Result<MagnusUnitary> {
    let (eta, theta_a) = branch(e.g_a, e.delta_a, t, "delta_a")?;
    let (zeta, theta_b) = branch(e.g_b, e.delta_b, t, "delta_b")?;
    Ok(MagnusUnitary {
        phase: C64::from_polar(1.0, theta_a + theta_b),
        cavity: displacement(-eta, cutoffs.dim_a(), cutoffs.dim_a())?,
        vibration: displacement(zeta, cutoffs.dim_b(), cutoffs.dim_b())?,
        cutoffs,
    })
}

/// `t_s = π/|δ_a|`.
pub fn detection_time(e: &EffectiveParams) -> Result<f64> {
    e.detection_time()
}

/// Time in `[0.8, 1.2]·π/|δ_a|` maximizing `|α|² + |β|²`: a dense scan to
/// pick the right lobe of the fast `δ_b` ripple, then golden-section search.
pub fn refined_detection_time(p: &ModelParams, e: &EffectiveParams) -> Result<f64> {
    let ts = e.detection_time()?;
    let size = |t: f64| -> Result<f64> {
        let s = analytic_state(p, e, t)?;
        Ok(s.alpha.norm_sqr() + s.beta.norm_sqr())
    };
    let (lo, hi) = (0.8 * ts, 1.2 * ts);
    let n = 4000;
    let h = (hi - lo) / n as f64;
    let mut best = (lo, size(lo)?);
    for k in 1..=n {
        let t = lo + k as f64 * h;
        let v = size(t)?;
        if v > best.1 {
            best = (t, v);
        }
    }
    let (mut a, mut b) = ((best.0 - h).max(lo), (best.0 + h).min(hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (size(x1)?, size(x2)?);
    while b - a > 1e-12 * ts {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = size(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = size(x2)?;
        }
    }
    Ok(0.5 * (a + b))
}
