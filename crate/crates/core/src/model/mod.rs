//! Physical parameters, the Floquet-sideband effective parameters derived
//! from them, and Hamiltonian builders.
//!
//! All energies and rates are in units of the electron–vibration coupling
//! `λ`; times are in units of `1/λ`.

mod bessel;
mod hamiltonian;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hilbert::{poisson_tail, FockCutoffs};
use crate::report::ValidationReport;

pub use bessel::{bessel_j, bessel_j_orders, first_peak, MAX_ARG, MAX_ORDER};
pub use hamiltonian::{
    excited_block_rwa, full_hamiltonian, full_hamiltonian_td, interaction_hamiltonian_td,
    rwa_hamiltonian, rwa_hamiltonian_td,
};

/// A resolved frequency must exceed this multiple of `λ` for the rotating
/// wave approximation to be considered safe.
pub const RWA_MARGIN: f64 = 10.0;

/// Bare physical parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega_c: f64,
    pub omega_v: f64,
    pub omega_e: f64,
    pub g: f64,
    pub lambda: f64,
    pub xi: f64,
    pub n_a: u32,
    pub n_b: u32,
    /// Target cavity-sideband detuning as a signed multiple of `g_a`.
    pub delta_a_spec: f64,
    pub kappa: f64,
    pub gamma_v: f64,
    pub gamma_e: f64,
}

impl Default for ModelParams {
    /// The baseline regime: `ω_c = 50`, `ω_v = 50.5`, `ω_e = 250`, `g = 2.5`,
    /// `ξ` at the first peak of `|J₋₁|`, first sidebands, `δ_a = −g_a/2`,
    /// no dissipation.
    fn default() -> Self {
        ModelParams {
            omega_c: 50.0,
            omega_v: 50.5,
            omega_e: 250.0,
            g: 2.5,
            lambda: 1.0,
            xi: 1.841,
            n_a: 1,
            n_b: 1,
            delta_a_spec: -0.5,
            kappa: 0.0,
            gamma_v: 0.0,
            gamma_e: 0.0,
        }
    }
}

impl ModelParams {
    /// Hard constraints on the parameters; every violation is listed.
    pub fn check(&self) -> ValidationReport {
        let mut r = ValidationReport::new();
        for (name, v) in [
            ("omega_c", self.omega_c),
            ("omega_v", self.omega_v),
            ("omega_e", self.omega_e),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                r.error("nonpositive", format!("model.{name}"), format!("must be positive and finite, got {v}"));
            }
        }
        // Zero coupling or zero modulation depth is a valid (trivial) limit.
        for (name, v) in [("lambda", self.lambda), ("xi", self.xi)] {
            if !(v >= 0.0) || !v.is_finite() {
                r.error("negative", format!("model.{name}"), format!("must be nonnegative and finite, got {v}"));
            }
        }
        for (name, v) in [("kappa", self.kappa), ("gamma_v", self.gamma_v), ("gamma_e", self.gamma_e)] {
            if !(v >= 0.0) || !v.is_finite() {
                r.error("negative-rate", format!("model.{name}"), format!("must be nonnegative, got {v}"));
            }
        }
        if !self.g.is_finite() {
            r.error("nonfinite", "model.g", format!("must be finite, got {}", self.g));
        }
        if !self.delta_a_spec.is_finite() {
            r.error("nonfinite", "model.delta_a_spec", "must be finite");
        }
        for (name, v) in [("n_a", self.n_a), ("n_b", self.n_b)] {
            if v == 0 {
                r.error("sideband-index", format!("model.{name}"), "sideband index must be a positive integer");
            } else if v > MAX_ORDER as u32 {
                r.error("sideband-index", format!("model.{name}"), format!("must be at most {MAX_ORDER}"));
            }
        }
        if self.xi > MAX_ARG {
            r.error("xi-range", "model.xi", format!("modulation depth above {MAX_ARG} is unsupported"));
        }
        r
    }

    /// Fails with the first violation reported by [`ModelParams::check`].
    pub fn validate(&self) -> Result<()> {
        let r = self.check();
        let first = r.errors().next().map(|d| format!("{}: {}", d.field, d.message));
        match first {
            Some(msg) => Err(Error::Validation(msg)),
            None => Ok(()),
        }
    }

    pub fn has_dissipation(&self) -> bool {
        self.kappa > 0.0 || self.gamma_v > 0.0 || self.gamma_e > 0.0
    }
}

/// Floquet-sideband quantities derived from [`ModelParams`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub theta_mix: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub omega_0: f64,
    pub g_a: f64,
    pub g_b: f64,
    pub delta_a: f64,
    pub delta_b: f64,
}

impl EffectiveParams {
    /// Time `π/|δ_a|` at which the conditional displacement of the cavity
    /// branch is largest.
    pub fn detection_time(&self) -> Result<f64> {
        Ok(PI / self.nonzero_delta_a()?)
    }

    /// Decoupling period `2π/|δ_a|`.
    pub fn period(&self) -> Result<f64> {
        Ok(2.0 * PI / self.nonzero_delta_a()?)
    }

    fn nonzero_delta_a(&self) -> Result<f64> {
        let d = self.delta_a.abs();
        if d == 0.0 {
            Err(Error::ResonantLimit("delta_a"))
        } else {
            Ok(d)
        }
    }

    /// Upper estimate of `max |α(t)|` and `max |β(t)|` over a period,
    /// from the triangle inequality on the closed forms.
    pub fn amplitude_bounds(&self) -> (f64, f64) {
        let (s, c) = self.theta_mix.sin_cos();
        let ra = if self.delta_a != 0.0 { 2.0 * (self.g_a / self.delta_a).abs() } else { f64::INFINITY };
        let rb = if self.delta_b != 0.0 { 2.0 * (self.g_b / self.delta_b).abs() } else { f64::INFINITY };
        (rb * s.abs() + ra * c.abs(), rb * c.abs() + ra * s.abs())
    }
}

/// Derives the hybrid-mode frequencies, mixing angle, sideband couplings,
/// modulation frequency and detunings.
pub fn derive_effective(p: &ModelParams) -> Result<EffectiveParams> {
    p.validate()?;
    let dv = p.omega_v - p.omega_c;
    if dv == 0.0 && p.g == 0.0 {
        return Err(Error::DegenerateMixing);
    }
    let theta = 0.5 * (2.0 * p.g / dv).atan();
    let (s2, c2) = (2.0 * theta).sin_cos();
    let mean = 0.5 * (p.omega_c + p.omega_v);
    let split = 0.5 * dv * c2 + p.g * s2;
    let (omega_plus, omega_minus) = (mean + split, mean - split);
    let g_a = p.lambda * theta.sin() * bessel_j(-(p.n_a as i32), p.xi)?;
    let g_b = p.lambda * theta.cos() * bessel_j(-(p.n_b as i32), p.xi)?;
    let delta_a = p.delta_a_spec * g_a;
    let omega_0 = (omega_minus - delta_a) / p.n_a as f64;
    let delta_b = omega_plus - p.n_b as f64 * omega_0;
    if !(omega_0 > 0.0) {
        return Err(Error::Validation(format!(
            "derived modulation frequency {omega_0} is not positive"
        )));
    }
    Ok(EffectiveParams {
        theta_mix: theta,
        omega_plus,
        omega_minus,
        omega_0,
        g_a,
        g_b,
        delta_a,
        delta_b,
    })
}

/// Checks the conditions under which only the target sidebands survive the
/// rotating-wave approximation.
pub fn rwa_report(p: &ModelParams, e: &EffectiveParams) -> ValidationReport {
    let mut r = ValidationReport::new();
    let floor = RWA_MARGIN * p.lambda;
    for (name, v) in [
        ("omega_minus", e.omega_minus),
        ("omega_plus", e.omega_plus),
        ("omega_0", e.omega_0),
    ] {
        if v < floor {
            r.warn(
                "rwa-frequency",
                format!("effective.{name}"),
                format!("{v:.4} is not large compared with lambda (needs >= {floor})"),
            );
        }
    }
    // Every non-target sideband must stay far detuned.
    for (mode, omega, target) in [("a", e.omega_minus, p.n_a), ("b", e.omega_plus, p.n_b)] {
        let nearest = nearest_spectator(omega, e.omega_0, target);
        if nearest < floor {
            r.warn(
                "rwa-spectator",
                format!("model.n_{mode}"),
                format!("a non-target sideband of mode {mode} is only {nearest:.4} from resonance"),
            );
        }
    }
    if e.delta_b.abs() < 3.0 * e.g_b.abs() {
        r.warn(
            "sideband-b-near-resonant",
            "effective.delta_b",
            format!(
                "|delta_b| = {:.4} is below 3|g_b| = {:.4}; the vibrational sideband is not far detuned",
                e.delta_b.abs(),
                3.0 * e.g_b.abs()
            ),
        );
    }
    if e.delta_a == 0.0 {
        r.error("resonant-limit", "model.delta_a_spec", "delta_a vanishes; closed forms are undefined");
    }
    r
}

/// Smallest `|ω − n ω₀|` over integers `n ≠ target`.
fn nearest_spectator(omega: f64, omega_0: f64, target: u32) -> f64 {
    let centre = (omega / omega_0).round() as i64;
    (centre - 2..=centre + 2)
        .filter(|&n| n != target as i64)
        .map(|n| (omega - n as f64 * omega_0).abs())
        .fold(f64::INFINITY, f64::min)
}

/// Threshold on the Poisson tail beyond the cutoff above which a truncation
/// warning is raised.
pub const TRUNCATION_TAIL: f64 = 1e-6;

/// Warns when the predicted coherent amplitudes put more than
/// [`TRUNCATION_TAIL`] of their Poisson weight above the cutoffs.
pub fn truncation_report(e: &EffectiveParams, cutoffs: &FockCutoffs) -> ValidationReport {
    let mut r = ValidationReport::new();
    let (amax, bmax) = e.amplitude_bounds();
    for (mode, amp, nmax) in [("a", amax, cutoffs.n_a_max), ("b", bmax, cutoffs.n_b_max)] {
        let tail = poisson_tail(amp * amp, nmax + 1);
        if tail > TRUNCATION_TAIL {
            r.warn(
                "truncation-risk",
                format!("cutoffs.n_{mode}_max"),
                format!(
                    "predicted |amplitude| up to {amp:.3} leaves {tail:.2e} of the population above level {nmax}"
                ),
            );
        }
    }
    r
}

/// Smallest cutoffs whose predicted Poisson tail stays at or below `tail`
/// for both modes.
pub fn suggested_cutoffs(e: &EffectiveParams, tail: f64) -> Result<FockCutoffs> {
    let (amax, bmax) = e.amplitude_bounds();
    let level = |amp: f64| -> Result<usize> {
        if !amp.is_finite() {
            return Err(Error::ResonantLimit("sideband"));
        }
        let mut n = 1;
        while poisson_tail(amp * amp, n + 1) > tail {
            n += 1;
            if n > 4096 {
                return Err(Error::Truncation(format!("no cutoff below 4096 reaches tail {tail:e}")));
            }
        }
        Ok(n)
    };
    FockCutoffs::new(level(amax)?, level(bmax)?)
}
