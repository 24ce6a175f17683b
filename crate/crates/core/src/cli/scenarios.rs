//! Scenario runners. Each scenario is broken into independent tasks (one
//! per simulation point or Wigner cut) that produce finished tables.

use std::time::{SystemTime, UNIX_EPOCH};

use super::config::{Scenario, ScenarioConfig};
use super::output::{Column, Manifest, OutputTable, ResolvedPoint};
use crate::analysis::{
    detection_probability, fidelity_mixed, fidelity_pure, joint_wigner, joint_wigner_points, log_negativity,
    log_negativity_pure, mean_excitations, project_electronic, project_electronic_mixed,
};
use crate::analytic::{
    analytic_state, cat_state, detection_prob_analytic, full_state_analytic, mean_excitations_analytic, AnalyticState,
};
use crate::dynamics::{
    default_step, evolve_lindblad_observe, evolve_schrodinger_observe, linspace, Method, RunSummary,
};
use crate::error::{Error, Result};
use crate::hilbert::{CompositeSpace, DensityMatrix, FockCutoffs, Sign, StateVector, C64};
use crate::model::{bessel_j, derive_effective, suggested_cutoffs, EffectiveParams, ModelParams, TRUNCATION_TAIL};

/// Poisson tail targeted by automatically chosen cutoffs.
pub const AUTO_TAIL: f64 = TRUNCATION_TAIL / 10.0;

pub(crate) type Task = Box<dyn FnOnce() -> Result<Vec<OutputTable>> + Send>;

/// A simulation point with everything derived from it.
#[derive(Clone, Debug)]
pub(crate) struct Point {
    pub label: String,
    pub model: ModelParams,
    pub effective: EffectiveParams,
    pub cutoffs: FockCutoffs,
}

pub(crate) fn resolve(cfg: &ScenarioConfig, label: String, model: ModelParams) -> Result<Point> {
    let effective = derive_effective(&model)?;
    let (na, nb) = (cfg.cutoffs.n_a_max, cfg.cutoffs.n_b_max);
    let cutoffs = match (na, nb) {
        (Some(a), Some(b)) => FockCutoffs::new(a, b)?,
        _ => {
            let auto = suggested_cutoffs(&effective, AUTO_TAIL)?;
            FockCutoffs::new(na.unwrap_or(auto.n_a_max), nb.unwrap_or(auto.n_b_max))?
        }
    };
    Ok(Point {
        label,
        model,
        effective,
        cutoffs,
    })
}

/// Shared part of every manifest of one run.
#[derive(Clone)]
struct Context {
    cfg: ScenarioConfig,
    sweep: String,
    config: String,
    generated_unix: u64,
}

impl Context {
    fn table_name(&self, base: &str) -> String {
        if self.sweep.is_empty() {
            base.to_string()
        } else {
            format!("{base}__{}", self.sweep.replace(',', "__"))
        }
    }

    fn assumptions(&self) -> Vec<String> {
        let cfg = &self.cfg;
        let mut a = Vec::new();
        if cfg.scenario.simulates() || matches!(cfg.scenario, Scenario::Fig3) {
            a.push("initial state (|e> + |g>)|0,0>/sqrt(2) at t = 0".to_string());
            a.push(format!(
                "samples t_k = k T / {} for k = 1..{}, T = 2 pi/|delta_a|",
                cfg.time.points_per_period,
                (cfg.time.periods * cfg.time.points_per_period as f64).round()
            ));
        }
        if cfg.cutoffs.n_a_max.is_none() || cfg.cutoffs.n_b_max.is_none() {
            a.push(format!("automatic cutoffs keep the predicted Poisson tail above each cutoff below {AUTO_TAIL:e}"));
        }
        match cfg.scenario {
            Scenario::Fig4 => {
                a.push("states are the analytic cat states at t_s = pi/|delta_a|".into());
                a.push("Re-Re plane at Im sigma = Im chi = 0; Im-Im plane at Re sigma = Re chi = 0".into());
            }
            Scenario::Fig7 | Scenario::Fig8 => a.push(format!(
                "omega_e = {} and g = {} are held fixed while omega_c is scanned with omega_v = {} omega_c",
                cfg.model.omega_e, cfg.model.g, cfg.scan.ratio
            )),
            Scenario::Fig9 | Scenario::Fig10 | Scenario::Fig11 => a.push(format!(
                "the two decay channels not being varied are held at rate {}",
                super::config::BACKGROUND_RATE
            )),
            _ => {}
        }
        a
    }

    fn table(&self, base: &str, columns: Vec<Column>, rows: Vec<Vec<f64>>, points: Vec<ResolvedPoint>) -> OutputTable {
        OutputTable {
            name: self.table_name(base),
            columns,
            rows,
            manifest: Manifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                scenario: self.cfg.scenario.name(),
                sweep: self.sweep.clone(),
                points,
                config: self.config.clone(),
                assumptions: self.assumptions(),
                generated_unix: self.generated_unix,
            },
        }
    }
}

fn resolved(cfg: &ScenarioConfig, pt: &Point, summary: Option<&RunSummary>) -> ResolvedPoint {
    let step = match (summary, cfg.integrator.method) {
        (Some(s), _) => s.step,
        (None, Method::Rk4) if cfg.scenario.simulates() => Some(cfg.integrator.step.unwrap_or_else(|| {
            let space = CompositeSpace::new(pt.cutoffs).expect("validated cutoffs");
            default_step(&pt.model, &pt.effective, &space, cfg.integrator.frame, cfg.integrator.steps_per_period)
        })),
        _ => None,
    };
    ResolvedPoint {
        label: pt.label.clone(),
        model: pt.model,
        effective: Some(pt.effective),
        cutoffs: Some(pt.cutoffs),
        step,
        flagged_samples: summary.map_or(0, |s| s.monitors.iter().filter(|m| !m.flags.is_empty()).count()),
    }
}

fn col(name: &str, unit: &str) -> Column {
    Column::new(name, unit)
}

fn time_col() -> Column {
    col("t", "1/lambda")
}

fn pm(name: &str) -> [Column; 2] {
    [col(&format!("{name}_plus"), "1"), col(&format!("{name}_minus"), "1")]
}

fn samples(cfg: &ScenarioConfig, pt: &Point) -> Result<Vec<f64>> {
    Ok(cfg.time.samples(pt.effective.period()?))
}

fn closed_run<F>(cfg: &ScenarioConfig, pt: &Point, times: Vec<f64>, mut row: F) -> Result<(Vec<Vec<f64>>, RunSummary)>
where
    F: FnMut(f64, &StateVector, &AnalyticState) -> Result<Vec<f64>>,
{
    let space = CompositeSpace::new(pt.cutoffs)?;
    let mut opts = cfg.integrator.clone();
    opts.sample_times = times;
    let mut rows = Vec::with_capacity(opts.sample_times.len());
    let run = evolve_schrodinger_observe(&pt.model, &pt.effective, &StateVector::initial_plus(space), &opts, |t, psi| {
        let s = analytic_state(&pt.model, &pt.effective, t)?;
        rows.push(row(t, psi, &s)?);
        Ok(())
    })?;
    Ok((rows, run))
}

fn open_run<F>(cfg: &ScenarioConfig, pt: &Point, times: Vec<f64>, mut row: F) -> Result<(Vec<Vec<f64>>, RunSummary)>
where
    F: FnMut(usize, f64, &DensityMatrix, &AnalyticState) -> Result<Option<Vec<f64>>>,
{
    let space = CompositeSpace::new(pt.cutoffs)?;
    let mut opts = cfg.integrator.clone();
    opts.sample_times = times;
    let mut rows = Vec::with_capacity(opts.sample_times.len());
    let mut k = 0;
    let rho0 = StateVector::initial_plus(space).to_density();
    let run = evolve_lindblad_observe(&pt.model, &pt.effective, &rho0, &opts, |t, rho| {
        let s = analytic_state(&pt.model, &pt.effective, t)?;
        if let Some(r) = row(k, t, rho, &s)? {
            rows.push(r);
        }
        k += 1;
        Ok(())
    })?;
    Ok((rows, run))
}

/// `|⟨cat_±|ψ_±⟩|²` against the renormalized exact branch.
fn branch_fidelities(psi: &StateVector, s: &AnalyticState, cutoffs: FockCutoffs) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (o, sign) in out.iter_mut().zip(Sign::ALL) {
        let exact = project_electronic(psi, sign)?.collapsed;
        *o = fidelity_pure(&cat_state(s, sign, cutoffs)?.value, &exact)?;
    }
    Ok(out)
}

fn full_fidelity(psi: &StateVector, s: &AnalyticState, space: CompositeSpace) -> Result<f64> {
    fidelity_pure(&full_state_analytic(s, space)?.value, psi)
}

fn probabilities<S: crate::analysis::QuantumState>(state: &S) -> Result<[f64; 2]> {
    Ok([detection_probability(state, Sign::Plus)?, detection_probability(state, Sign::Minus)?])
}

fn fig2(ctx: &Context) -> Result<Vec<Task>> {
    let ctx = ctx.clone();
    Ok(vec![Box::new(move || {
        let scan = &ctx.cfg.scan;
        let n = (scan.xi_max / scan.xi_step).round() as usize;
        let rows = (0..=n)
            .map(|k| {
                let xi = k as f64 * scan.xi_step;
                Ok(vec![xi, bessel_j(-1, xi)?.abs()])
            })
            .collect::<Result<_>>()?;
        let pt = resolve(&ctx.cfg, String::new(), ctx.cfg.model)?;
        let points = vec![resolved(&ctx.cfg, &pt, None)];
        Ok(vec![ctx.table("fig2", vec![col("xi", "1"), col("abs_J_minus1", "1")], rows, points)])
    })])
}

fn fig3(ctx: &Context) -> Result<Vec<Task>> {
    let ctx = ctx.clone();
    Ok(vec![Box::new(move || {
        let cfg = &ctx.cfg;
        let pt = resolve(cfg, String::new(), cfg.model)?;
        let rows = samples(cfg, &pt)?
            .into_iter()
            .map(|t| {
                let s = analytic_state(&pt.model, &pt.effective, t)?;
                let mut row = vec![t];
                for sign in Sign::ALL {
                    row.push(log_negativity_pure(&cat_state(&s, sign, pt.cutoffs)?.value)?);
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let mut cols = vec![time_col()];
        cols.extend(pm("N"));
        Ok(vec![ctx.table("fig3", cols, rows, vec![resolved(cfg, &pt, None)])])
    })])
}

fn fig4(ctx: &Context) -> Result<Vec<Task>> {
    let cfg = &ctx.cfg;
    let pt = resolve(cfg, String::new(), cfg.model)?;
    let ts = pt.effective.detection_time()?;
    let w = &cfg.wigner;
    let axis = linspace(-w.extent, w.extent, w.points.saturating_sub(1));
    let mut tasks: Vec<Task> = Vec::new();
    for (plane, unit) in [("rere", C64::new(1.0, 0.0)), ("imim", C64::new(0.0, 1.0))] {
        for sign in Sign::ALL {
            let (ctx, pt, axis) = (ctx.clone(), pt.clone(), axis.clone());
            tasks.push(Box::new(move || {
                let s = analytic_state(&pt.model, &pt.effective, ts)?;
                let cat = cat_state(&s, sign, pt.cutoffs)?.value;
                let coords: Vec<C64> = axis.iter().map(|&x| unit * x).collect();
                let grid = joint_wigner(&cat, &coords, &coords, 1)?;
                let mut rows = Vec::with_capacity(axis.len() * axis.len());
                for (i, &x) in axis.iter().enumerate() {
                    for (j, &y) in axis.iter().enumerate() {
                        rows.push(vec![x, y, grid.values[(i, j)]]);
                    }
                }
                let part = if plane == "rere" { "Re" } else { "Im" };
                let cols = vec![col(&format!("{part}_sigma"), "1"), col(&format!("{part}_chi"), "1"), col("W", "1")];
                let name = format!("fig4_{plane}_{}", sign_name(sign));
                Ok(vec![ctx.table(&name, cols, rows, vec![resolved(&ctx.cfg, &pt, None)])])
            }));
        }
    }
    let (ctx, pt) = (ctx.clone(), pt.clone());
    tasks.push(Box::new(move || {
        let w = &ctx.cfg.wigner;
        let s = analytic_state(&pt.model, &pt.effective, ts)?;
        let cats = [cat_state(&s, Sign::Plus, pt.cutoffs)?.value, cat_state(&s, Sign::Minus, pt.cutoffs)?.value];
        let line_e: Vec<(C64, C64)> = axis.iter().map(|&x| (C64::new(x, 0.0), C64::new(x, w.line_im_chi))).collect();
        let line_f: Vec<(C64, C64)> = axis
            .iter()
            .map(|&y| (C64::new(w.line_re, y), C64::new(w.line_re, y)))
            .collect();
        let mut tables = Vec::new();
        for (name, var, line) in [("fig4_line_re", "x", &line_e), ("fig4_line_im", "y", &line_f)] {
            let plus = joint_wigner_points(&cats[0], line)?;
            let minus = joint_wigner_points(&cats[1], line)?;
            let rows = axis.iter().enumerate().map(|(k, &x)| vec![x, plus[k], minus[k]]).collect();
            let cols = vec![col(var, "1"), col("W_plus", "1"), col("W_minus", "1")];
            tables.push(ctx.table(name, cols, rows, vec![resolved(&ctx.cfg, &pt, None)]));
        }
        Ok(tables)
    }));
    Ok(tasks)
}

fn sign_name(sign: Sign) -> &'static str {
    match sign {
        Sign::Plus => "plus",
        Sign::Minus => "minus",
    }
}

fn fig5(ctx: &Context) -> Result<Vec<Task>> {
    let ctx = ctx.clone();
    Ok(vec![Box::new(move || {
        let cfg = &ctx.cfg;
        let pt = resolve(cfg, String::new(), cfg.model)?;
        let (rows, run) = closed_run(cfg, &pt, samples(cfg, &pt)?, |t, psi, s| {
            let (na, nb) = mean_excitations(psi);
            let (ea, eb) = mean_excitations_analytic(s);
            Ok(vec![t, na, nb, ea, eb])
        })?;
        let cols = vec![
            time_col(),
            col("n_a", "1"),
            col("n_b", "1"),
            col("n_a_analytic", "1"),
            col("n_b_analytic", "1"),
        ];
        Ok(vec![ctx.table("fig5", cols, rows, vec![resolved(cfg, &pt, Some(&run))])])
    })])
}

fn fig6(ctx: &Context) -> Result<Vec<Task>> {
    let ctx = ctx.clone();
    Ok(vec![Box::new(move || {
        let cfg = &ctx.cfg;
        let pt = resolve(cfg, String::new(), cfg.model)?;
        let (rows, run) = closed_run(cfg, &pt, samples(cfg, &pt)?, |t, psi, s| {
            let [p, m] = probabilities(psi)?;
            let (ap, am) = detection_prob_analytic(s);
            Ok(vec![t, p, m, ap, am])
        })?;
        let mut cols = vec![time_col()];
        cols.extend(pm("P"));
        cols.extend([col("P_plus_analytic", "1"), col("P_minus_analytic", "1")]);
        Ok(vec![ctx.table("fig6", cols, rows, vec![resolved(cfg, &pt, Some(&run))])])
    })])
}

fn fig7(ctx: &Context) -> Result<Vec<Task>> {
    let mut tasks: Vec<Task> = Vec::new();
    for (label, model) in ctx.cfg.model_points() {
        let ctx = ctx.clone();
        tasks.push(Box::new(move || {
            let cfg = &ctx.cfg;
            let pt = resolve(cfg, label, model)?;
            let space = CompositeSpace::new(pt.cutoffs)?;
            let (rows, run) = closed_run(cfg, &pt, samples(cfg, &pt)?, |t, psi, s| {
                let [fp, fm] = branch_fidelities(psi, s, pt.cutoffs)?;
                Ok(vec![t, full_fidelity(psi, s, space)?, fp, fm])
            })?;
            let mut cols = vec![time_col(), col("F", "1")];
            cols.extend(pm("F"));
            let name = format!("fig7_{}", pt.label);
            Ok(vec![ctx.table(&name, cols, rows, vec![resolved(cfg, &pt, Some(&run))])])
        }));
    }
    Ok(tasks)
}

fn fig8(ctx: &Context) -> Result<Vec<Task>> {
    let mut tasks: Vec<Task> = Vec::new();
    for (label, model) in ctx.cfg.model_points() {
        let ctx = ctx.clone();
        tasks.push(Box::new(move || {
            let cfg = &ctx.cfg;
            let pt = resolve(cfg, label, model)?;
            let space = CompositeSpace::new(pt.cutoffs)?;
            let ts = pt.effective.detection_time()?;
            let (rows, run) = closed_run(cfg, &pt, vec![ts], |t, psi, s| {
                Ok(vec![pt.model.omega_c, t, full_fidelity(psi, s, space)?])
            })?;
            let cols = vec![col("omega_c", "lambda"), col("t_s", "1/lambda"), col("F", "1")];
            Ok(vec![ctx.table("fig8", cols, rows, vec![resolved(cfg, &pt, Some(&run))])])
        }));
    }
    Ok(tasks)
}

/// Which open-system quantities a table carries.
#[derive(Clone, Copy, PartialEq, Eq)]
enum OpenQuantity {
    Probabilities,
    Fidelities,
    Negativity,
}

fn open_row(
    what: OpenQuantity,
    t: f64,
    rho: &DensityMatrix,
    s: &AnalyticState,
    pt: &Point,
    space: CompositeSpace,
) -> Result<Vec<f64>> {
    let mut row = vec![t];
    match what {
        OpenQuantity::Probabilities => row.extend(probabilities(rho)?),
        OpenQuantity::Fidelities => {
            row.push(fidelity_mixed(&full_state_analytic(s, space)?.value, rho)?);
            for sign in Sign::ALL {
                let branch = project_electronic_mixed(rho, sign)?.collapsed;
                row.push(fidelity_mixed(&cat_state(s, sign, pt.cutoffs)?.value, &branch)?);
            }
        }
        OpenQuantity::Negativity => {
            for sign in Sign::ALL {
                row.push(log_negativity(&project_electronic_mixed(rho, sign)?.collapsed)?);
            }
        }
    }
    Ok(row)
}

fn open_preset(ctx: &Context, what: OpenQuantity) -> Result<Vec<Task>> {
    let mut tasks: Vec<Task> = Vec::new();
    let base = ctx.cfg.scenario.name();
    for (label, model) in ctx.cfg.model_points() {
        let ctx = ctx.clone();
        tasks.push(Box::new(move || {
            let cfg = &ctx.cfg;
            let pt = resolve(cfg, label, model)?;
            let space = CompositeSpace::new(pt.cutoffs)?;
            let stride = cfg.negativity_stride.max(1);
            let (rows, run) = open_run(cfg, &pt, samples(cfg, &pt)?, |k, t, rho, s| {
                if what == OpenQuantity::Negativity && k % stride != stride - 1 {
                    return Ok(None);
                }
                open_row(what, t, rho, s, &pt, space).map(Some)
            })?;
            let mut cols = vec![time_col()];
            match what {
                OpenQuantity::Probabilities => cols.extend(pm("p")),
                OpenQuantity::Fidelities => {
                    cols.push(col("f", "1"));
                    cols.extend(pm("f"));
                }
                OpenQuantity::Negativity => cols.extend(pm("N")),
            }
            let name = format!("{base}_{}", pt.label);
            Ok(vec![ctx.table(&name, cols, rows, vec![resolved(cfg, &pt, Some(&run))])])
        }));
    }
    Ok(tasks)
}

fn custom(ctx: &Context) -> Result<Vec<Task>> {
    let ctx = ctx.clone();
    Ok(vec![Box::new(move || {
        let cfg = &ctx.cfg;
        let pt = resolve(cfg, String::new(), cfg.model)?;
        let space = CompositeSpace::new(pt.cutoffs)?;
        let times = samples(cfg, &pt)?;
        let open = pt.model.has_dissipation();
        let (rows, run) = if open {
            open_run(cfg, &pt, times, |_, t, rho, s| {
                let mut row = open_row(OpenQuantity::Probabilities, t, rho, s, &pt, space)?;
                row.extend_from_slice(&open_row(OpenQuantity::Fidelities, t, rho, s, &pt, space)?[1..]);
                let (na, nb) = mean_excitations(rho);
                row.extend([na, nb]);
                Ok(Some(row))
            })?
        } else {
            closed_run(cfg, &pt, times, |t, psi, s| {
                let mut row = vec![t];
                row.extend(probabilities(psi)?);
                row.push(full_fidelity(psi, s, space)?);
                row.extend(branch_fidelities(psi, s, pt.cutoffs)?);
                let (na, nb) = mean_excitations(psi);
                row.extend([na, nb]);
                Ok(row)
            })?
        };
        let (p, f) = if open { ("p", "f") } else { ("P", "F") };
        let mut cols = vec![time_col()];
        cols.extend(pm(p));
        cols.push(col(f, "1"));
        cols.extend(pm(f));
        cols.extend([col("n_a", "1"), col("n_b", "1")]);
        Ok(vec![ctx.table("custom", cols, rows, vec![resolved(cfg, &pt, Some(&run))])])
    })])
}

/// Independent tasks of one (already swept) configuration.
pub(crate) fn tasks(cfg: &ScenarioConfig, sweep: &str) -> Result<Vec<Task>> {
    let ctx = Context {
        cfg: cfg.clone(),
        sweep: sweep.to_string(),
        config: cfg.render(),
        generated_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
    };
    match cfg.scenario {
        Scenario::Fig2 => fig2(&ctx),
        Scenario::Fig3 => fig3(&ctx),
        Scenario::Fig4 => fig4(&ctx),
        Scenario::Fig5 => fig5(&ctx),
        Scenario::Fig6 => fig6(&ctx),
        Scenario::Fig7 => fig7(&ctx),
        Scenario::Fig8 => fig8(&ctx),
        Scenario::Fig9 => open_preset(&ctx, OpenQuantity::Probabilities),
        Scenario::Fig10 => open_preset(&ctx, OpenQuantity::Fidelities),
        Scenario::Fig11 => open_preset(&ctx, OpenQuantity::Negativity),
        Scenario::Custom => custom(&ctx),
    }
}

/// Concatenates tables that share a name, keeping first-seen order.
pub(crate) fn merge(tables: Vec<OutputTable>) -> Result<Vec<OutputTable>> {
    let mut out: Vec<OutputTable> = Vec::new();
    for t in tables {
        match out.iter_mut().find(|o| o.name == t.name) {
            Some(o) => {
                if o.columns != t.columns {
                    return Err(Error::Shape(format!("table {} assembled from mismatched columns", t.name)));
                }
                o.rows.extend(t.rows);
                o.manifest.points.extend(t.manifest.points);
            }
            None => out.push(t),
        }
    }
    Ok(out)
}
