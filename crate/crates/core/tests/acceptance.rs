//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test --test acceptance -- 3 7` runs a subset. By default the run
//! reports and exits 0; `--strict` makes any failing criterion exit 1.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::time::Instant;

use molcav::analysis::{
    detection_probability, joint_wigner_points, log_negativity, log_negativity_pure, WIGNER_MAX,
};
use molcav::analytic::{analytic_state, magnus_unitary};
use molcav::cli::{run_config, OutputTable, ScenarioConfig};
use molcav::dynamics::{
    evolve_lindblad_observe, evolve_schrodinger_observe, propagate, IntegratorOptions, Rk4, System,
};
use molcav::hilbert::{
    coherent_amplitudes, partial_transpose_matrix, CompositeSpace, DensityMatrix, FockCutoffs, Level, Mode, Sign,
    Space, StateVector, C64,
};
use molcav::model::{derive_effective, rwa_hamiltonian_td, suggested_cutoffs, ModelParams};
use nalgebra::DVector;

type Outcome = Result<Vec<Check>, String>;
type Criterion = (&'static str, fn() -> Outcome);

struct Check {
    ok: bool,
    text: String,
}

fn check(ok: bool, text: impl Into<String>) -> Check {
    Check { ok, text: text.into() }
}

fn within(name: &str, value: f64, target: f64, tol: f64) -> Check {
    check((value - target).abs() <= tol, format!("{name} = {value:.6} (target {target} +/- {tol:e})"))
}

fn run(text: &str) -> Result<Vec<OutputTable>, String> {
    let cfg = ScenarioConfig::parse(text).map_err(|e| e.to_string())?;
    run_config(&cfg, 1).map_err(|e| e.to_string())
}

fn table<'a>(tables: &'a [OutputTable], name: &str) -> Result<&'a OutputTable, String> {
    tables.iter().find(|t| t.name == name).ok_or(format!("no table {name}"))
}

fn col(t: &OutputTable, name: &str) -> Result<Vec<f64>, String> {
    t.column(name).ok_or(format!("table {} has no column {name}", t.name))
}

fn err(e: molcav::Error) -> String {
    e.to_string()
}

fn baseline() -> Result<(ModelParams, molcav::model::EffectiveParams), String> {
    let p = ModelParams::default();
    Ok((p, derive_effective(&p).map_err(err)?))
}

fn fig9_model() -> ModelParams {
    ModelParams {
        omega_c: 100.0,
        omega_v: 101.0,
        delta_a_spec: -1.0,
        ..ModelParams::default()
    }
}

fn fig9_config(kappa: f64, gamma_e: f64, periods: f64) -> String {
    format!(
        "scenario = custom\n\
         model.omega_c = 100\nmodel.omega_v = 101\nmodel.omega_e = 250\nmodel.g = 2.5\nmodel.lambda = 1\n\
         model.xi = 1.841\nmodel.n_a = 1\nmodel.n_b = 1\nmodel.delta_a_spec = -1\n\
         model.kappa = {kappa}\nmodel.gamma_v = 0.001\nmodel.gamma_e = {gamma_e}\n\
         cutoffs.n_a_max = auto\ncutoffs.n_b_max = auto\n\
         time.periods = {periods}\ntime.points_per_period = 2000\n"
    )
}

fn sideband_optimum() -> Outcome {
    let tables = run("scenario = fig2\n")?;
    let t = table(&tables, "fig2")?;
    let (xi, j) = (col(t, "xi")?, col(t, "abs_J_minus1")?);
    let k = (0..j.len()).max_by(|&a, &b| j[a].total_cmp(&j[b])).ok_or("empty fig2 table")?;
    Ok(vec![within("argmax xi", xi[k], 1.841, 0.001)])
}

fn effective_parameters() -> Outcome {
    let (p, e) = baseline()?;
    let half = (p.omega_v - p.omega_c) / 2.0;
    let split = (half * half + p.g * p.g).sqrt();
    let mean = (p.omega_c + p.omega_v) / 2.0;
    Ok(vec![
        within("theta", e.theta_mix, 0.73556, 1e-4),
        within("theta (arctan oracle)", e.theta_mix, 0.5 * (2.0 * p.g / (p.omega_v - p.omega_c)).atan(), 1e-12),
        within("omega_plus", e.omega_plus, 52.7625, 1e-3),
        within("omega_minus", e.omega_minus, 47.7375, 1e-3),
        within("omega_plus (eigenvalue oracle)", e.omega_plus, mean + split, 1e-10),
        within("omega_minus (eigenvalue oracle)", e.omega_minus, mean - split, 1e-10),
        within("g_a", e.g_a, -0.3904, 5e-4),
        within("g_b", e.g_b, -0.4314, 5e-4),
        within("delta_a", e.delta_a, 0.1952, 3e-4),
        within("omega_0", e.omega_0, 47.5423, 1e-3),
        within("delta_b", e.delta_b, 5.2202, 1e-3),
    ])
}

fn cat_amplitudes() -> Outcome {
    let (p, e) = baseline()?;
    let s = analytic_state(&p, &e, e.detection_time().map_err(err)?).map_err(err)?;
    Ok(vec![within("|alpha(t_s)|", s.alpha.norm(), 2.88, 0.08), within("|beta(t_s)|", s.beta.norm(), 2.82, 0.08)])
}

fn rwa_validity() -> Outcome {
    let tables = run("scenario = fig8\nscan.omega_c = 20, 30, 50, 100\nscan.ratio = 1.01\n")?;
    let t = table(&tables, "fig8")?;
    let (w, f) = (col(t, "omega_c")?, col(t, "F")?);
    let mut checks: Vec<Check> = w
        .iter()
        .zip(&f)
        .map(|(w, f)| check(*f >= 0.95, format!("F(t_s) = {f:.5} at omega_c = {w} (>= 0.95)")))
        .collect();
    let rising = f.windows(2).all(|p| p[1] > p[0]);
    checks.push(check(rising, format!("F(t_s) increasing across {w:?}: {f:.5?}")));
    Ok(checks)
}

fn detection_probabilities() -> Outcome {
    let tables = run("scenario = fig6\n")?;
    let t = table(&tables, "fig6")?;
    let (_, e) = baseline()?;
    let ts = e.detection_time().map_err(err)?;
    let times = col(t, "t")?;
    let k = (0..times.len())
        .min_by(|&a, &b| (times[a] - ts).abs().total_cmp(&(times[b] - ts).abs()))
        .ok_or("empty fig6 table")?;
    let mut checks = vec![check((times[k] - ts).abs() < 1e-9, format!("sample at t = {:.6}, t_s = {ts:.6}", times[k]))];
    for name in ["P_plus", "P_minus"] {
        checks.push(within(&format!("analytic {name}(t_s)"), col(t, &format!("{name}_analytic"))?[k], 0.5, 0.01));
        checks.push(within(&format!("exact {name}(t_s)"), col(t, name)?[k], 0.5, 0.05));
    }
    Ok(checks)
}

fn entanglement_plateau() -> Outcome {
    let tables = run("scenario = fig3\n")?;
    let t = table(&tables, "fig3")?;
    let (_, e) = baseline()?;
    let period = e.period().map_err(err)?;
    let times = col(t, "t")?;
    let mut checks = Vec::new();
    for name in ["N_plus", "N_minus"] {
        let n = col(t, name)?;
        let max = times
            .iter()
            .zip(&n)
            .filter(|(t, _)| (0.3 * period..=0.7 * period).contains(*t))
            .map(|(_, v)| *v)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(check((0.95..=1.05).contains(&max), format!("mid-period max {name} = {max:.6} in [0.95, 1.05]")));
    }
    Ok(checks)
}

fn magnus_oracle() -> Outcome {
    let (_, e) = baseline()?;
    let ts = e.detection_time().map_err(err)?;
    let cutoffs = FockCutoffs::new(48, 12).map_err(err)?;
    let space = CompositeSpace::new(cutoffs).map_err(err)?;
    let u = magnus_unitary(&e, ts, cutoffs).map_err(err)?;
    let closed = u.apply(&StateVector::fock(cutoffs, 0, 0).map_err(err)?).map_err(err)?;
    let h = rwa_hamiltonian_td(&e, &space).map_err(err)?;
    let mut y: Vec<C64> =
        StateVector::basis(space, Level::Excited, 0, 0).map_err(err)?.amplitudes().iter().copied().collect();
    propagate(&h, &mut y, 0.0, ts, 8000).map_err(err)?;
    let overlap: C64 = space.block(Level::Excited).zip(closed.iter()).map(|(i, c)| c.conj() * y[i]).sum();
    let f = overlap.norm_sqr();
    Ok(vec![check(f >= 1.0 - 1e-8, format!("1 - F = {:.3e} at t_s with cutoffs 48/12 (<= 1e-8)", 1.0 - f))])
}

fn wigner_sanity() -> Outcome {
    let c = FockCutoffs::new(20, 20).map_err(err)?;
    let origin = (C64::default(), C64::default());
    let vac = StateVector::fock(c, 0, 0).map_err(err)?;
    let w0 = joint_wigner_points(&vac, &[origin]).map_err(err)?[0];
    let mut checks = vec![within("vacuum W(0,0)", w0, 4.0 / (PI * PI), 1e-6)];

    let (a0, b0) = (C64::new(1.0, 0.0), C64::new(0.0, 0.5));
    let va = coherent_amplitudes(a0, c.dim_a()).map_err(err)?.value;
    let vb = coherent_amplitudes(b0, c.dim_b()).map_err(err)?.value;
    let v = DVector::from_fn(c.two_mode_dim(), |i, _| va[i / c.dim_b()] * vb[i % c.dim_b()]);
    let psi = StateVector::normalized(Space::TwoMode(c), v).map_err(err)?;
    let axis = [-2.0, -1.2, -0.4, 0.0, 0.4, 1.2, 2.0];
    let pts: Vec<C64> = axis
        .iter()
        .flat_map(|&x| axis.iter().map(move |&y| C64::new(x, y)))
        .filter(|z| z.norm() <= 2.0)
        .collect();
    let pairs: Vec<(C64, C64)> = pts.iter().flat_map(|&s| pts.iter().map(move |&x| (s, x))).collect();
    let w = joint_wigner_points(&psi, &pairs).map_err(err)?;
    let worst = pairs
        .iter()
        .zip(&w)
        .map(|((s, x), w)| (w - WIGNER_MAX * (-2.0 * (s - a0).norm_sqr() - 2.0 * (x - b0).norm_sqr()).exp()).abs())
        .fold(0.0, f64::max);
    checks.push(check(worst <= 1e-4, format!("coherent Gaussian oracle: max error {worst:.2e} over {} points", pairs.len())));

    let tables = run("scenario = fig4\n")?;
    let t = table(&tables, "fig4_rere_minus")?;
    let (x, y, w) = (col(t, "Re_sigma")?, col(t, "Re_chi")?, col(t, "W")?);
    let (p, e) = baseline()?;
    let s = analytic_state(&p, &e, e.detection_time().map_err(err)?).map_err(err)?;
    let (lx, ly) = (s.alpha.re, s.beta.re);
    let len2 = lx * lx + ly * ly;
    let along = |k: usize| (x[k] * lx + y[k] * ly) / len2;
    let off = |k: usize| (x[k] * ly - y[k] * lx).abs() / len2.sqrt();
    let nearest = |tx: f64, ty: f64| {
        (0..w.len()).min_by(|&a, &b| ((x[a] - tx).hypot(y[a] - ty)).total_cmp(&(x[b] - tx).hypot(y[b] - ty)))
    };
    let (i0, i1) = (nearest(0.0, 0.0).ok_or("empty grid")?, nearest(lx, ly).ok_or("empty grid")?);
    let between = (0..w.len()).filter(|&k| (0.25..=0.75).contains(&along(k)) && off(k) < 0.5);
    let (kmin, wmin) = between.map(|k| (k, w[k])).min_by(|a, b| a.1.total_cmp(&b.1)).ok_or("no grid points between lobes")?;
    checks.push(check(
        w[i0] > 0.0 && w[i1] > 0.0,
        format!("cat(-) lobes positive: W = {:.4} near origin, {:.4} near ({lx:.3}, {ly:.3})", w[i0], w[i1]),
    ));
    checks.push(check(
        wmin < 0.0,
        format!("cat(-) Re-Re cut: W = {wmin:.4} at ({:.2}, {:.2}) between the lobes", x[kmin], y[kmin]),
    ));
    Ok(checks)
}

fn open_system() -> Outcome {
    let p = fig9_model();
    let e = derive_effective(&p).map_err(err)?;
    let (period, ts) = (e.period().map_err(err)?, e.detection_time().map_err(err)?);
    let mut checks = Vec::new();

    let clock = Instant::now();
    let tables = run(&fig9_config(0.0, 0.5, 1.0))?;
    let t = table(&tables, "custom")?;
    let (times, pp, pm) = (col(t, "t")?, col(t, "p_plus")?, col(t, "p_minus")?);
    let late: Vec<usize> = (0..times.len()).filter(|&k| times[k] > 6.0).collect();
    let range = |v: &[f64], idx: &mut dyn Iterator<Item = usize>| {
        idx.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| (lo.min(v[k]), hi.max(v[k])))
    };
    for (name, v) in [("p_plus", &pp), ("p_minus", &pm)] {
        let (lo, hi) = range(v, &mut late.iter().copied());
        checks.push(check(
            lo >= 0.45 && hi <= 0.55,
            format!("gamma_e = 0.5: {name} in [{lo:.4}, {hi:.4}] for t > 6 (within [0.45, 0.55])"),
        ));
        let (lo, hi) = range(v, &mut (0..times.len()).filter(|&k| times[k] >= 0.75 * period));
        checks.push(check(
            hi - lo < 0.05,
            format!("gamma_e = 0.5: {name} envelope {:.4} over the last quarter period (< 0.05)", hi - lo),
        ));
    }
    eprintln!("  gamma_e run: {:.0} s", clock.elapsed().as_secs_f64());

    let mut f_ts = Vec::new();
    for kappa in [0.01, 0.05, 0.1] {
        let clock = Instant::now();
        let tables = run(&fig9_config(kappa, 0.001, 0.5))?;
        let t = table(&tables, "custom")?;
        let (times, f) = (col(t, "t")?, col(t, "f")?);
        let last = times.len() - 1;
        if (times[last] - ts).abs() > 1e-9 {
            return Err(format!("last sample at {} instead of t_s = {ts}", times[last]));
        }
        f_ts.push(f[last]);
        eprintln!("  kappa = {kappa} run: {:.0} s", clock.elapsed().as_secs_f64());
    }
    let falling = f_ts.windows(2).all(|p| p[1] < p[0]);
    checks.push(check(falling, format!("f(t_s) for kappa = 0.01, 0.05, 0.1: {f_ts:.5?} strictly decreasing")));
    Ok(checks)
}

/// `y' = -i t y`, solved by `y = exp(-i t²/2)`.
struct Chirp;

impl System for Chirp {
    fn len(&self) -> usize {
        1
    }

    fn rhs(&mut self, t: f64, y: &[C64], dy: &mut [C64]) {
        dy[0] = C64::new(0.0, -t) * y[0];
    }
}

fn properties() -> Outcome {
    let mut checks = Vec::new();

    let (p, e) = baseline()?;
    let period = e.period().map_err(err)?;
    let space = CompositeSpace::new(suggested_cutoffs(&e, molcav::cli::AUTO_TAIL).map_err(err)?).map_err(err)?;
    let times: Vec<f64> = (1..=50).map(|k| k as f64 * period / 50.0).collect();
    let (mut drift, mut sum_err) = (0.0f64, 0.0f64);
    evolve_schrodinger_observe(&p, &e, &StateVector::initial_plus(space), &IntegratorOptions::with_samples(times), |_, s| {
        drift = drift.max((s.norm() - 1.0).abs());
        let total: f64 = Sign::ALL.iter().map(|&sg| detection_probability(s, sg)).sum::<molcav::Result<f64>>()?;
        sum_err = sum_err.max((total - s.norm() * s.norm()).abs());
        Ok(())
    })
    .map_err(err)?;
    checks.push(check(drift < 1e-8, format!("closed norm drift {drift:.2e} over one period (< 1e-8)")));
    checks.push(check(sum_err < 1e-10, format!("numeric P+ + P- - |psi|^2 = {sum_err:.2e} (< 1e-10)")));

    let exact = (0..400).all(|k| {
        analytic_state(&p, &e, k as f64 * period / 400.0).map(|s| s.p_plus + s.p_minus == 1.0).unwrap_or(false)
    });
    checks.push(check(exact, "analytic P+ + P- = 1 exactly at 400 times"));

    let q = fig9_model();
    let q = ModelParams { gamma_e: 0.5, kappa: 0.05, ..q };
    let qe = derive_effective(&q).map_err(err)?;
    let qperiod = qe.period().map_err(err)?;
    let small = CompositeSpace::new(FockCutoffs::new(6, 6).map_err(err)?).map_err(err)?;
    let mut opts = IntegratorOptions::with_samples((1..=20).map(|k| k as f64 * qperiod / 20.0).collect());
    opts.monitors.top_population = 1.0;
    opts.monitors.positivity_checks = 20;
    let (mut trace, mut herm, mut min_eig) = (0.0f64, 0.0f64, f64::INFINITY);
    let summary = evolve_lindblad_observe(&q, &qe, &StateVector::initial_plus(small).to_density(), &opts, |_, rho| {
        trace = trace.max((rho.trace().re - 1.0).abs());
        herm = herm.max(rho.hermiticity_defect());
        min_eig = min_eig.min(rho.min_eigenvalue());
        Ok(())
    })
    .map_err(err)?;
    let raw_herm = summary.monitors.iter().map(|m| m.hermiticity).fold(0.0, f64::max);
    checks.push(check(trace < 1e-6, format!("open trace drift {trace:.2e} over one period (< 1e-6)")));
    checks.push(check(
        herm == 0.0 && raw_herm < 1e-10,
        format!("rho Hermitian: defect {raw_herm:.2e} before symmetrization"),
    ));
    checks.push(check(min_eig >= -1e-4, format!("min eigenvalue of rho {min_eig:.2e} (>= -1e-4)")));

    let c = FockCutoffs::new(2, 3).map_err(err)?;
    let v1 = DVector::from_fn(c.two_mode_dim(), |i, _| C64::new((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos()));
    let x = StateVector::normalized(Space::TwoMode(c), v1).map_err(err)?.to_density();
    let mut pt_exact = true;
    for mode in [Mode::Cavity, Mode::Vibration] {
        let once = partial_transpose_matrix(x.matrix(), c, mode).map_err(err)?;
        pt_exact &= partial_transpose_matrix(&once, c, mode).map_err(err)? == *x.matrix();
    }
    checks.push(check(pt_exact, "partial transpose applied twice is the identity (bitwise)"));

    let (a, b) = ([0.6, 0.8, 0.0], [0.5, -0.5, 0.5, 0.5]);
    let prod = DVector::from_fn(c.two_mode_dim(), |i, _| C64::from(a[i / c.dim_b()] * b[i % c.dim_b()]));
    let prod = StateVector::normalized(Space::TwoMode(c), prod).map_err(err)?;
    let np = log_negativity(&prod.to_density()).map_err(err)?.max(log_negativity_pure(&prod).map_err(err)?);
    checks.push(check(np < 1e-8, format!("product-state negativity {np:.2e} (< 1e-8)")));

    let q1 = FockCutoffs::new(1, 1).map_err(err)?;
    let bell = DVector::from_vec(vec![C64::from(FRAC_1_SQRT_2), C64::from(0.0), C64::from(0.0), C64::from(FRAC_1_SQRT_2)]);
    let bell = StateVector::new(Space::TwoMode(q1), bell).map_err(err)?;
    let nb = log_negativity(&DensityMatrix::new(Space::TwoMode(q1), bell.to_density().into_matrix()).map_err(err)?)
        .map_err(err)?;
    checks.push(within("Bell-state negativity", nb, 1.0, 1e-8));

    let error = |n: usize| {
        let mut y = [C64::from(1.0)];
        Rk4::new(1).advance(&mut Chirp, 0.0, 2.0, n, &mut y);
        (y[0] - C64::from_polar(1.0, -2.0)).norm()
    };
    let order = (error(40) / error(80)).log2();
    checks.push(check((3.8..=4.2).contains(&order), format!("RK4 observed order {order:.3} (4 expected)")));
    Ok(checks)
}

const CRITERIA: [Criterion; 10] = [
    ("sideband optimum", sideband_optimum),
    ("effective parameters", effective_parameters),
    ("cat amplitudes", cat_amplitudes),
    ("RWA validity curve", rwa_validity),
    ("detection probabilities", detection_probabilities),
    ("entanglement plateau", entanglement_plateau),
    ("Magnus oracle", magnus_oracle),
    ("Wigner sanity", wigner_sanity),
    ("open-system behaviour", open_system),
    ("property suite", properties),
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let strict = args.iter().any(|a| a == "--strict");
    let wanted: Vec<usize> = args.iter().filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (i, (name, f)) in CRITERIA.iter().enumerate() {
        let n = i + 1;
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let clock = Instant::now();
        let outcome = f();
        let secs = clock.elapsed().as_secs_f64();
        let ok = matches!(&outcome, Ok(c) if c.iter().all(|c| c.ok));
        println!("{} criterion {n} ({name}) [{secs:.1} s]", if ok { "PASS" } else { "FAIL" });
        match outcome {
            Ok(checks) => {
                for c in checks {
                    println!("    {} {}", if c.ok { "ok  " } else { "FAIL" }, c.text);
                }
            }
            Err(e) => println!("    error: {e}"),
        }
        if !ok {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        if strict {
            std::process::exit(1);
        }
    }
}
