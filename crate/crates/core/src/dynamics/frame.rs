use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hilbert::{CompositeSpace, Level, TimeDependentOperator, C64};
use crate::model::{full_hamiltonian_td, interaction_hamiltonian_td, EffectiveParams, ModelParams};

/// Reference frame in which the equations of motion are integrated. States
/// handed back to callers are always converted to the lab frame.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Frame {
    /// No transformation.
    Lab,
    /// Rotating with `ω_e σ₊σ₋` only.
    ElectronicShift,
    /// Interaction picture of the full diagonal part of `H(t)`, including
    /// the frequency modulation.
    #[default]
    Interaction,
}

impl Frame {
    pub fn name(self) -> &'static str {
        match self {
            Frame::Lab => "lab",
            Frame::ElectronicShift => "electronic-shift",
            Frame::Interaction => "interaction",
        }
    }
}

/// Precomputed data for moving states between a frame and the lab.
#[derive(Clone, Debug)]
pub(crate) struct FrameMap {
    frame: Frame,
    omega_e: f64,
    omega_c: f64,
    omega_v: f64,
    xi: f64,
    omega_0: f64,
    /// `(s, n, j)` occupation of each basis index.
    occupation: Vec<(f64, f64, f64)>,
}

impl FrameMap {
    pub fn new(frame: Frame, p: &ModelParams, e: &EffectiveParams, space: &CompositeSpace) -> Self {
        let occupation = space
            .basis()
            .map(|(_, s, n, j)| {
                let s = if s == Level::Excited { 1.0 } else { 0.0 };
                (s, n as f64, j as f64)
            })
            .collect();
        FrameMap {
            frame,
            omega_e: p.omega_e,
            omega_c: p.omega_c,
            omega_v: p.omega_v,
            xi: p.xi,
            omega_0: e.omega_0,
            occupation,
        }
    }

    pub fn hamiltonian(&self, p: &ModelParams, e: &EffectiveParams, space: &CompositeSpace) -> Result<TimeDependentOperator> {
        match self.frame {
            Frame::Lab => full_hamiltonian_td(p, e, space, false),
            Frame::ElectronicShift => full_hamiltonian_td(p, e, space, true),
            Frame::Interaction => interaction_hamiltonian_td(p, e, space),
        }
    }

    /// Phases `Φ_k(t)` with `ψ_lab,k = e^{−iΦ_k} ψ_frame,k`.
    pub fn phases(&self, t: f64) -> Vec<f64> {
        let (we, wc, wv) = match self.frame {
            Frame::Lab => return vec![0.0; self.occupation.len()],
            Frame::ElectronicShift => (self.omega_e, 0.0, 0.0),
            Frame::Interaction => (self.omega_e, self.omega_c, self.omega_v),
        };
        let m = if self.frame == Frame::Interaction { self.xi * (self.omega_0 * t).sin() } else { 0.0 };
        self.occupation
            .iter()
            .map(|&(s, n, j)| we * t * s + (wc * t + m) * n + (wv * t + m) * j)
            .collect()
    }

    fn rotations(&self, t: f64, sign: f64) -> Vec<C64> {
        self.phases(t).into_iter().map(|p| C64::from_polar(1.0, sign * p)).collect()
    }

    pub fn vector_to_lab(&self, t: f64, y: &mut [C64]) {
        if self.frame == Frame::Lab {
            return;
        }
        for (v, r) in y.iter_mut().zip(self.rotations(t, -1.0)) {
            *v *= r;
        }
    }

    pub fn vector_from_lab(&self, t: f64, y: &mut [C64]) {
        if self.frame == Frame::Lab {
            return;
        }
        for (v, r) in y.iter_mut().zip(self.rotations(t, 1.0)) {
            *v *= r;
        }
    }

    /// Column-major `d × d` matrix: `ρ_lab[k,l] = e^{−i(Φ_k−Φ_l)} ρ[k,l]`.
    pub fn matrix_to_lab(&self, t: f64, m: &mut [C64]) {
        self.rotate_matrix(t, -1.0, m);
    }

    pub fn matrix_from_lab(&self, t: f64, m: &mut [C64]) {
        self.rotate_matrix(t, 1.0, m);
    }

    fn rotate_matrix(&self, t: f64, sign: f64, m: &mut [C64]) {
        if self.frame == Frame::Lab {
            return;
        }
        let r = self.rotations(t, sign);
        let d = r.len();
        for (c, col) in m.chunks_mut(d).enumerate() {
            let rc = r[c].conj();
            for (v, rk) in col.iter_mut().zip(&r) {
                *v *= rk * rc;
            }
        }
    }
}
