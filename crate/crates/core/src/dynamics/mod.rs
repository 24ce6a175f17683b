//! Exact time evolution under the full Hamiltonian, closed (Schrödinger)
//! and open (Lindblad), with conservation monitors at every sample.
//!
//! Integration runs in a configurable [`Frame`]; each sample is rotated
//! back to the lab frame before it is checked or handed to the caller.

mod frame;
mod ode;
mod systems;

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    hermitize_slice, CompositeSpace, DensityMatrix, Operator, Space, StateVector, TimeDependentOperator, C64,
};
use crate::model::{EffectiveParams, ModelParams};

pub use frame::Frame;
pub use ode::{AdaptiveStats, Dopri5, Rk4, System};

use frame::FrameMap;
use systems::{Lindblad, Schrodinger};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Fixed-step classical Runge–Kutta; bit-reproducible.
    #[default]
    Rk4,
    /// Adaptive Dormand–Prince 5(4).
    Rk45,
}

/// What to do when a monitor exceeds its threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BreachPolicy {
    /// Abort with [`Error::Monitor`] or [`Error::Positivity`].
    #[default]
    Error,
    /// Record the breach in the sample's flags and continue.
    Flag,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorThresholds {
    /// Allowed `|‖ψ‖ − 1|` per unit of elapsed time (at least one unit).
    pub norm_drift_rate: f64,
    /// Allowed `|Tr ρ − 1|` per unit of elapsed time (at least one unit).
    pub trace_drift_rate: f64,
    /// Allowed population in the highest retained Fock level of either mode.
    pub top_population: f64,
    /// Allowed negativity of the smallest eigenvalue of `ρ`.
    pub positivity: f64,
    /// Number of samples, spread evenly and including the last, on which
    /// positivity is checked. Each check is a Cholesky factorization.
    pub positivity_checks: usize,
}

impl Default for MonitorThresholds {
    fn default() -> Self {
        MonitorThresholds {
            norm_drift_rate: 1e-8,
            trace_drift_rate: 1e-6,
            top_population: 1e-6,
            positivity: 1e-4,
            positivity_checks: 20,
        }
    }
}

/// Default number of steps per period of the fastest frequency.
pub const STEPS_PER_PERIOD: f64 = 60.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub method: Method,
    /// Explicit RK4 step; when absent it follows from `steps_per_period`.
    pub step: Option<f64>,
    pub steps_per_period: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub frame: Frame,
    /// Time at which the initial state is given.
    pub start_time: f64,
    pub sample_times: Vec<f64>,
    pub monitors: MonitorThresholds,
    pub on_breach: BreachPolicy,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            method: Method::Rk4,
            step: None,
            steps_per_period: STEPS_PER_PERIOD,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            frame: Frame::Interaction,
            start_time: 0.0,
            sample_times: Vec::new(),
            monitors: MonitorThresholds::default(),
            on_breach: BreachPolicy::Error,
        }
    }
}

impl IntegratorOptions {
    pub fn with_samples(sample_times: Vec<f64>) -> Self {
        IntegratorOptions {
            sample_times,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Argument(m));
        if let Some(h) = self.step {
            if !(h > 0.0) || !h.is_finite() {
                return bad(format!("step must be positive, got {h}"));
            }
        }
        if !(self.steps_per_period > 0.0) {
            return bad("steps_per_period must be positive".into());
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.sample_times.is_empty() {
            return bad("at least one sample time is required".into());
        }
        if !(self.start_time >= 0.0) {
            return bad("start time must be nonnegative".into());
        }
        if self.sample_times[0] < self.start_time {
            return bad(format!(
                "first sample {} precedes the start time {}",
                self.sample_times[0], self.start_time
            ));
        }
        if self.sample_times.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("sample times must be strictly increasing".into());
        }
        Ok(())
    }
}

/// Evenly spaced sample times `t0, t0 + dt, …, t1` with `n` intervals.
pub fn linspace(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![t0];
    }
    (0..=n).map(|k| t0 + (t1 - t0) * k as f64 / n as f64).collect()
}

/// Upper bound on the fastest angular frequency the integrator must
/// resolve in `frame`: the largest phase rate of any coefficient plus a
/// bound on the norm of the coupling terms.
pub fn max_frequency(p: &ModelParams, e: &EffectiveParams, space: &CompositeSpace, frame: Frame) -> f64 {
    let (na, nb) = (space.cutoffs.n_a_max as f64, space.cutoffs.n_b_max as f64);
    let coupling = p.g.abs() * (na + nb) + 2.0 * p.lambda * nb.sqrt();
    let damping = 0.5 * (p.kappa * na + p.gamma_v * nb + p.gamma_e);
    let modulation = p.xi * e.omega_0;
    let fastest = match frame {
        Frame::Lab => p.omega_e + na * (p.omega_c + modulation) + nb * (p.omega_v + modulation),
        Frame::ElectronicShift => na * (p.omega_c + modulation) + nb * (p.omega_v + modulation),
        Frame::Interaction => (p.omega_c - p.omega_v).abs().max(p.omega_v + modulation),
    };
    fastest + coupling + damping
}

/// `2π / (steps_per_period · ω_max)`.
pub fn default_step(p: &ModelParams, e: &EffectiveParams, space: &CompositeSpace, frame: Frame, steps_per_period: f64) -> f64 {
    2.0 * PI / (steps_per_period * max_frequency(p, e, space, frame))
}

/// Per-sample diagnostics.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MonitorRecord {
    pub time: f64,
    /// `|‖ψ‖ − 1|` or `|Tr ρ − 1|`.
    pub drift: f64,
    /// `max |ρ − ρ†|` before symmetrization; zero for pure states.
    pub hermiticity: f64,
    pub top_population: f64,
    /// Outcome of the positivity check, when one ran at this sample.
    pub positive: Option<bool>,
    pub steps: usize,
    pub rejected: usize,
    pub flags: Vec<&'static str>,
}

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub monitors: Vec<MonitorRecord>,
    pub frame: Frame,
    /// Fixed step actually used; `None` for adaptive runs.
    pub step: Option<f64>,
}

impl<S> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn flagged(&self) -> impl Iterator<Item = &MonitorRecord> {
        self.monitors.iter().filter(|m| !m.flags.is_empty())
    }
}

/// Monitors without states, returned by the observer-driven evolutions.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub monitors: Vec<MonitorRecord>,
    pub frame: Frame,
    pub step: Option<f64>,
}

enum Stepper {
    Fixed { rk: Rk4, h: f64 },
    Adaptive { ode: Dopri5, stats: AdaptiveStats },
}

impl Stepper {
    fn new(opts: &IntegratorOptions, n: usize, h_nominal: f64) -> Self {
        match opts.method {
            Method::Rk4 => Stepper::Fixed {
                rk: Rk4::new(n),
                h: opts.step.unwrap_or(h_nominal),
            },
            Method::Rk45 => Stepper::Adaptive {
                ode: Dopri5::new(n, opts.rel_tol, opts.abs_tol, h_nominal),
                stats: AdaptiveStats::default(),
            },
        }
    }

    fn fixed_step(&self) -> Option<f64> {
        match self {
            Stepper::Fixed { h, .. } => Some(*h),
            Stepper::Adaptive { .. } => None,
        }
    }

    /// Advances to `t1`; returns `(steps, rejected)`.
    fn advance<S: System>(&mut self, sys: &mut S, t0: f64, t1: f64, y: &mut [C64]) -> Result<(usize, usize)> {
        if t1 <= t0 {
            return Ok((0, 0));
        }
        match self {
            Stepper::Fixed { rk, h } => {
                let n = ((t1 - t0) / *h * (1.0 - 1e-12)).ceil().max(1.0) as usize;
                rk.advance(sys, t0, t1, n, y);
                Ok((n, 0))
            }
            Stepper::Adaptive { ode, stats } => {
                let before = *stats;
                ode.advance(sys, t0, t1, y, stats).map_err(|t| Error::Monitor {
                    time: t,
                    quantity: "adaptive step size",
                    value: ode.h,
                    limit: ode.h_min,
                })?;
                Ok((stats.accepted - before.accepted, stats.rejected - before.rejected))
            }
        }
    }

    fn invalidate(&mut self) {
        if let Stepper::Adaptive { ode, .. } = self {
            ode.invalidate();
        }
    }
}

fn composite_space(space: Space) -> Result<CompositeSpace> {
    match space {
        Space::Composite(s) => Ok(s),
        other => Err(Error::Shape(format!("dynamics needs the composite space, got {other:?}"))),
    }
}

fn check_limit(
    policy: BreachPolicy,
    rec: &mut MonitorRecord,
    quantity: &'static str,
    value: f64,
    limit: f64,
) -> Result<()> {
    if value > limit || value.is_nan() {
        match policy {
            BreachPolicy::Error => {
                return Err(Error::Monitor {
                    time: rec.time,
                    quantity,
                    value,
                    limit,
                })
            }
            BreachPolicy::Flag => rec.flags.push(quantity),
        }
    }
    Ok(())
}

/// Integrates `i∂ₜψ = H(t)ψ` and calls `observe` with each lab-frame sample.
pub fn evolve_schrodinger_observe<F>(
    p: &ModelParams,
    e: &EffectiveParams,
    psi0: &StateVector,
    opts: &IntegratorOptions,
    mut observe: F,
) -> Result<RunSummary>
where
    F: FnMut(f64, &StateVector) -> Result<()>,
{
    opts.validate()?;
    p.validate()?;
    let space = composite_space(psi0.space())?;
    if (psi0.norm() - 1.0).abs() > crate::hilbert::NORM_TOL {
        return Err(Error::Argument(format!("initial state norm {} is not 1", psi0.norm())));
    }
    let map = FrameMap::new(opts.frame, p, e, &space);
    let mut sys = Schrodinger::new(map.hamiltonian(p, e, &space)?);
    let h_nom = default_step(p, e, &space, opts.frame, opts.steps_per_period);
    let mut stepper = Stepper::new(opts, space.dim(), h_nom);

    let mut y: Vec<C64> = psi0.amplitudes().iter().copied().collect();
    map.vector_from_lab(opts.start_time, &mut y);
    let mut t = opts.start_time;
    let mut monitors = Vec::with_capacity(opts.sample_times.len());
    for &ts in &opts.sample_times {
        let (steps, rejected) = stepper.advance(&mut sys, t, ts, &mut y)?;
        t = ts;
        let mut lab = y.clone();
        map.vector_to_lab(t, &mut lab);
        let state = StateVector::from_raw(Space::Composite(space), DVector::from_vec(lab));
        let mut rec = MonitorRecord {
            time: t,
            drift: (state.norm() - 1.0).abs(),
            top_population: state.top_level_population(),
            steps,
            rejected,
            ..Default::default()
        };
        let (drift, top) = (rec.drift, rec.top_population);
        let elapsed = (t - opts.start_time).max(1.0);
        check_limit(opts.on_breach, &mut rec, "norm drift", drift, opts.monitors.norm_drift_rate * elapsed)?;
        check_limit(opts.on_breach, &mut rec, "top Fock population", top, opts.monitors.top_population)?;
        observe(t, &state)?;
        monitors.push(rec);
    }
    Ok(RunSummary {
        monitors,
        frame: opts.frame,
        step: stepper.fixed_step(),
    })
}

/// Integrates `i∂ₜψ = H(t)ψ` and keeps every sample.
pub fn evolve_schrodinger(
    p: &ModelParams,
    e: &EffectiveParams,
    psi0: &StateVector,
    opts: &IntegratorOptions,
) -> Result<Trajectory<StateVector>> {
    let mut states = Vec::with_capacity(opts.sample_times.len());
    let run = evolve_schrodinger_observe(p, e, psi0, opts, |_, s| {
        states.push(s.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        times: opts.sample_times.clone(),
        states,
        monitors: run.monitors,
        frame: run.frame,
        step: run.step,
    })
}

/// Jump operators with nonzero rates: `σ₋`, `a`, `b`.
fn jump_operators(p: &ModelParams, space: &CompositeSpace) -> Vec<(f64, Operator)> {
    let mut jumps = Vec::new();
    if p.gamma_e > 0.0 {
        jumps.push((p.gamma_e, space.lowering()));
    }
    if p.kappa > 0.0 {
        jumps.push((p.kappa, space.cavity_annihilation()));
    }
    if p.gamma_v > 0.0 {
        jumps.push((p.gamma_v, space.vibration_annihilation()));
    }
    jumps
}

/// Integrates the master equation
/// `ρ̇ = −i[H(t), ρ] + γ_e D[σ₋]ρ + κ D[a]ρ + γ_v D[b]ρ` and calls `observe`
/// with each lab-frame sample. Samples are symmetrized before use.
pub fn evolve_lindblad_observe<F>(
    p: &ModelParams,
    e: &EffectiveParams,
    rho0: &DensityMatrix,
    opts: &IntegratorOptions,
    mut observe: F,
) -> Result<RunSummary>
where
    F: FnMut(f64, &DensityMatrix) -> Result<()>,
{
    opts.validate()?;
    p.validate()?;
    let space = composite_space(rho0.space())?;
    DensityMatrix::new(rho0.space(), rho0.matrix().clone())?;
    let d = space.dim();
    let map = FrameMap::new(opts.frame, p, e, &space);
    let jumps = jump_operators(p, &space);
    let mut sys = Lindblad::new(map.hamiltonian(p, e, &space)?, jumps)?;
    let h_nom = default_step(p, e, &space, opts.frame, opts.steps_per_period);
    let mut stepper = Stepper::new(opts, d * d, h_nom);

    let mut y: Vec<C64> = rho0.matrix().as_slice().to_vec();
    map.matrix_from_lab(opts.start_time, &mut y);
    let mut t = opts.start_time;
    let n = opts.sample_times.len();
    let checks = opts.monitors.positivity_checks.max(1).min(n);
    let stride = n.div_ceil(checks);
    let mut monitors = Vec::with_capacity(n);
    for (idx, &ts) in opts.sample_times.iter().enumerate() {
        let (steps, rejected) = stepper.advance(&mut sys, t, ts, &mut y)?;
        t = ts;
        let hermiticity = hermitize_slice(&mut y, d);
        stepper.invalidate();
        let mut lab = y.clone();
        map.matrix_to_lab(t, &mut lab);
        let rho = DensityMatrix::from_raw(Space::Composite(space), DMatrix::from_vec(d, d, lab));
        let mut rec = MonitorRecord {
            time: t,
            drift: (rho.trace() - 1.0).norm(),
            hermiticity,
            top_population: rho.top_level_population(),
            steps,
            rejected,
            ..Default::default()
        };
        let (drift, top) = (rec.drift, rec.top_population);
        let elapsed = (t - opts.start_time).max(1.0);
        check_limit(opts.on_breach, &mut rec, "trace drift", drift, opts.monitors.trace_drift_rate * elapsed)?;
        check_limit(opts.on_breach, &mut rec, "top Fock population", top, opts.monitors.top_population)?;
        if (idx + 1) % stride == 0 || idx + 1 == n {
            let ok = rho.is_positive_within(opts.monitors.positivity);
            rec.positive = Some(ok);
            if !ok {
                match opts.on_breach {
                    BreachPolicy::Error => {
                        return Err(Error::Positivity {
                            time: t,
                            limit: -opts.monitors.positivity,
                        })
                    }
                    BreachPolicy::Flag => rec.flags.push("positivity"),
                }
            }
        }
        observe(t, &rho)?;
        monitors.push(rec);
    }
    Ok(RunSummary {
        monitors,
        frame: opts.frame,
        step: stepper.fixed_step(),
    })
}

/// Integrates the master equation and keeps every sample.
pub fn evolve_lindblad(
    p: &ModelParams,
    e: &EffectiveParams,
    rho0: &DensityMatrix,
    opts: &IntegratorOptions,
) -> Result<Trajectory<DensityMatrix>> {
    let mut states = Vec::with_capacity(opts.sample_times.len());
    let run = evolve_lindblad_observe(p, e, rho0, opts, |_, r| {
        states.push(r.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        times: opts.sample_times.clone(),
        states,
        monitors: run.monitors,
        frame: run.frame,
        step: run.step,
    })
}

/// Fixed-step RK4 propagation of `i∂ₜψ = H(t)ψ` for an arbitrary
/// time-dependent operator, from `t0` to `t1` in `steps` steps.
pub fn propagate(h: &TimeDependentOperator, psi: &mut [C64], t0: f64, t1: f64, steps: usize) -> Result<()> {
    if psi.len() != h.dim() {
        return Err(Error::Shape(format!("vector of length {} for operator of dimension {}", psi.len(), h.dim())));
    }
    if steps == 0 {
        return Err(Error::Argument("at least one step is required".into()));
    }
    let mut sys = Schrodinger::new(h.clone());
    Rk4::new(h.dim()).advance(&mut sys, t0, t1, steps, psi);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{FockCutoffs, Level};
    use crate::model::derive_effective;

    fn small() -> (ModelParams, EffectiveParams, CompositeSpace) {
        let p = ModelParams::default();
        let e = derive_effective(&p).unwrap();
        (p, e, CompositeSpace::new(FockCutoffs::new(6, 6).unwrap()).unwrap())
    }

    #[test]
    fn option_validation() {
        let mut o = IntegratorOptions::with_samples(vec![0.0, 1.0]);
        assert!(o.validate().is_ok());
        o.sample_times = vec![1.0, 1.0];
        assert!(o.validate().is_err());
        o.sample_times = vec![];
        assert!(o.validate().is_err());
        o.sample_times = vec![0.5];
        o.step = Some(0.0);
        assert!(o.validate().is_err());
    }

    #[test]
    fn frames_agree() {
        let (p, e, s) = small();
        let psi0 = StateVector::initial_plus(s);
        let run = |frame| {
            let o = IntegratorOptions {
                frame,
                steps_per_period: 400.0,
                ..IntegratorOptions::with_samples(vec![0.0, 0.25])
            };
            evolve_schrodinger(&p, &e, &psi0, &o).unwrap()
        };
        let lab = run(Frame::Lab);
        let shifted = run(Frame::ElectronicShift);
        let inter = run(Frame::Interaction);
        let a = lab.states[1].amplitudes();
        assert!((a - shifted.states[1].amplitudes()).norm() < 1e-8);
        assert!((a - inter.states[1].amplitudes()).norm() < 1e-8);
        assert_eq!(inter.states[0], psi0);
    }

    #[test]
    fn decoupled_phases_are_exact() {
        let p = ModelParams { g: 0.0, lambda: 0.0, xi: 0.0, ..ModelParams::default() };
        let e = derive_effective(&p).unwrap();
        let s = CompositeSpace::new(FockCutoffs::new(2, 2).unwrap()).unwrap();
        let mut v = DVector::from_element(s.dim(), C64::new(1.0, 0.0));
        v.unscale_mut((s.dim() as f64).sqrt());
        let psi0 = StateVector::new(Space::Composite(s), v.clone()).unwrap();
        let t = 0.7;
        for frame in [Frame::Lab, Frame::Interaction] {
            let o = IntegratorOptions {
                frame,
                steps_per_period: 600.0,
                on_breach: BreachPolicy::Flag,
                ..IntegratorOptions::with_samples(vec![t])
            };
            let out = evolve_schrodinger(&p, &e, &psi0, &o).unwrap();
            for (i, lvl, n, j) in s.basis() {
                let en = if lvl == Level::Excited { p.omega_e } else { 0.0 } + n as f64 * p.omega_c + j as f64 * p.omega_v;
                let expect = v[i] * C64::from_polar(1.0, -en * t);
                assert!((out.states[0].amplitudes()[i] - expect).norm() < 1e-7, "{frame:?}");
            }
        }
    }

    #[test]
    fn closed_lindblad_matches_schrodinger() {
        let (p, e, s) = small();
        let psi0 = StateVector::initial_plus(s);
        let o = IntegratorOptions::with_samples(vec![0.3, 0.6]);
        let pure = evolve_schrodinger(&p, &e, &psi0, &o).unwrap();
        let mixed = evolve_lindblad(&p, &e, &psi0.to_density(), &o).unwrap();
        for (a, b) in pure.states.iter().zip(&mixed.states) {
            let diff = a.to_density().matrix() - b.matrix();
            assert!(diff.camax() < 1e-6);
        }
    }

    #[test]
    fn cavity_decay_is_exponential() {
        let kappa = 0.3;
        let p = ModelParams { g: 0.0, lambda: 0.0, xi: 0.0, kappa, ..ModelParams::default() };
        let e = derive_effective(&p).unwrap();
        let s = CompositeSpace::new(FockCutoffs::new(2, 1).unwrap()).unwrap();
        let psi = StateVector::basis(s, Level::Ground, 1, 0).unwrap();
        let times = linspace(0.0, 3.0, 6);
        let o = IntegratorOptions::with_samples(times.clone());
        let traj = evolve_lindblad(&p, &e, &psi.to_density(), &o).unwrap();
        let i1 = s.index(Level::Ground, 1, 0).unwrap();
        for (t, rho) in times.iter().zip(&traj.states) {
            assert!((rho.matrix()[(i1, i1)].re - (-kappa * t).exp()).abs() < 1e-6);
            assert!((rho.trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn adaptive_matches_fixed() {
        let (p, e, s) = small();
        let psi0 = StateVector::initial_plus(s);
        let fixed = evolve_schrodinger(&p, &e, &psi0, &IntegratorOptions::with_samples(vec![1.0])).unwrap();
        let o = IntegratorOptions {
            method: Method::Rk45,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            ..IntegratorOptions::with_samples(vec![0.5, 1.0])
        };
        let adapt = evolve_schrodinger(&p, &e, &psi0, &o).unwrap();
        assert!((fixed.states[0].amplitudes() - adapt.states[1].amplitudes()).norm() < 1e-7);
        assert!(adapt.step.is_none());
    }

    #[test]
    fn breach_policy() {
        let (p, e, _) = small();
        let s = CompositeSpace::new(FockCutoffs::new(1, 1).unwrap()).unwrap();
        let psi0 = StateVector::initial_plus(s);
        let o = IntegratorOptions::with_samples(vec![2.0]);
        assert!(matches!(evolve_schrodinger(&p, &e, &psi0, &o), Err(Error::Monitor { .. })));
        let o = IntegratorOptions { on_breach: BreachPolicy::Flag, ..o };
        let traj = evolve_schrodinger(&p, &e, &psi0, &o).unwrap();
        assert_eq!(traj.flagged().count(), 1);
    }
}
