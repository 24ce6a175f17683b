//! Scenario configuration documents.
//!
//! A document is a list of `key = value` lines with dotted keys. `#` starts
//! a comment, blank lines are ignored, and every key may appear at most
//! once. The `scenario` key selects a preset that fills in every other
//! field; any further key overrides the preset. A `sweep.<key>` line
//! takes a comma-separated list of values for `<key>` and multiplies the
//! run over them. See [`KEYS`] for the full schema.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::dynamics::{BreachPolicy, Frame, IntegratorOptions, Method};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
    Fig9,
    Fig10,
    Fig11,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 11] = [
        Scenario::Fig2,
        Scenario::Fig3,
        Scenario::Fig4,
        Scenario::Fig5,
        Scenario::Fig6,
        Scenario::Fig7,
        Scenario::Fig8,
        Scenario::Fig9,
        Scenario::Fig10,
        Scenario::Fig11,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
            Scenario::Fig5 => "fig5",
            Scenario::Fig6 => "fig6",
            Scenario::Fig7 => "fig7",
            Scenario::Fig8 => "fig8",
            Scenario::Fig9 => "fig9",
            Scenario::Fig10 => "fig10",
            Scenario::Fig11 => "fig11",
            Scenario::Custom => "custom",
        }
    }

    pub fn summary(self) -> &'static str {
        match self {
            Scenario::Fig2 => "sideband weight |J_-1(xi)| against modulation depth xi",
            Scenario::Fig3 => "analytic log-negativity N+- of the conditional cat states over one period",
            Scenario::Fig4 => "joint Wigner function of the cat states at t_s: Re-Re and Im-Im planes, two line cuts",
            Scenario::Fig5 => "mean excitation numbers, exact and analytic, over one period",
            Scenario::Fig6 => "detection probabilities P+-, exact and analytic, over one period",
            Scenario::Fig7 => "fidelities F and F+- of the exact state for omega_c in scan.omega_c",
            Scenario::Fig8 => "fidelity F(t_s) against omega_c",
            Scenario::Fig9 => "open system: detection probabilities p+- for each dissipation setting",
            Scenario::Fig10 => "open system: fidelities f and f+- for each dissipation setting",
            Scenario::Fig11 => "open system: log-negativity N+- for each dissipation setting",
            Scenario::Custom => "user-specified parameters: probabilities, fidelities and excitation numbers",
        }
    }

    /// Whether the scenario needs exact time evolution.
    pub fn simulates(self) -> bool {
        !matches!(self, Scenario::Fig2 | Scenario::Fig3 | Scenario::Fig4)
    }

    fn is_open_preset(self) -> bool {
        matches!(self, Scenario::Fig9 | Scenario::Fig10 | Scenario::Fig11)
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| format!("unknown scenario `{s}`; see list-scenarios"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(format!("expected csv or json, got `{s}`")),
        }
    }
}

/// Which rows of the dissipation grid an open-system preset runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DissipationGroup {
    #[default]
    All,
    Kappa,
    GammaV,
    GammaE,
}

impl DissipationGroup {
    fn name(self) -> &'static str {
        match self {
            DissipationGroup::All => "all",
            DissipationGroup::Kappa => "kappa",
            DissipationGroup::GammaV => "gamma_v",
            DissipationGroup::GammaE => "gamma_e",
        }
    }
}

impl FromStr for DissipationGroup {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            DissipationGroup::All,
            DissipationGroup::Kappa,
            DissipationGroup::GammaV,
            DissipationGroup::GammaE,
        ]
        .into_iter()
        .find(|g| g.name() == s)
        .ok_or_else(|| format!("expected all, kappa, gamma_v or gamma_e, got `{s}`"))
    }
}

/// Rate held by the two channels that are not being varied.
pub const BACKGROUND_RATE: f64 = 0.001;

/// Varied channel and its values for the open-system presets.
pub const DISSIPATION_GRID: [(DissipationGroup, [f64; 3]); 3] = [
    (DissipationGroup::Kappa, [0.01, 0.05, 0.1]),
    (DissipationGroup::GammaV, [0.01, 0.05, 0.1]),
    (DissipationGroup::GammaE, [0.01, 0.1, 0.5]),
];

/// `ω_c` values of the fig8 scan.
pub const FIG8_OMEGA_C: [f64; 12] = [10.0, 15.0, 20.0, 25.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0, 100.0];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    /// Length of the run in units of the period `2π/|δ_a|`.
    pub periods: f64,
    pub points_per_period: usize,
}

impl TimeGrid {
    /// `t_k = k T / points_per_period` for `k = 1, …, periods · points_per_period`.
    pub fn samples(&self, period: f64) -> Vec<f64> {
        let n = (self.periods * self.points_per_period as f64).round() as usize;
        let ppp = self.points_per_period as f64;
        (1..=n).map(|k| k as f64 * period / ppp).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WignerSettings {
    /// Points per axis of each plane cut and along each line cut.
    pub points: usize,
    /// Half-width of the sampled square `[−extent, extent]²`.
    pub extent: f64,
    /// `Im χ` held fixed along the first line cut.
    pub line_im_chi: f64,
    /// `Re ς = Re χ` held fixed along the second line cut.
    pub line_re: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanSettings {
    /// `ω_c` values for fig7 and fig8.
    pub omega_c: Vec<f64>,
    /// `ω_v / ω_c` used along the `ω_c` scan.
    pub ratio: f64,
    pub xi_max: f64,
    pub xi_step: f64,
    pub group: DissipationGroup,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutputSettings {
    pub directory: PathBuf,
    pub format: OutputFormat,
    /// Significant digits written per value.
    pub precision: usize,
}

/// Fock cutoffs; `None` picks the smallest level whose predicted Poisson
/// tail is negligible.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CutoffChoice {
    pub n_a_max: Option<usize>,
    pub n_b_max: Option<usize>,
}

/// A parameter to multiply the run over.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub model: ModelParams,
    pub cutoffs: CutoffChoice,
    /// Integrator settings; the sample times are filled in per scenario.
    pub integrator: IntegratorOptions,
    pub time: TimeGrid,
    pub wigner: WignerSettings,
    pub scan: ScanSettings,
    /// Log-negativity of open-system runs is evaluated on every
    /// `negativity_stride`-th sample.
    pub negativity_stride: usize,
    pub sweep: Vec<SweepAxis>,
    pub output: OutputSettings,
    /// Keys set by the document, sweeps included, in order of appearance.
    pub explicit: Vec<String>,
}

/// Every settable key with a short description.
pub const KEYS: &[(&str, &str)] = &[
    ("scenario", "fig2 ... fig11 or custom (required, first key applied)"),
    ("model.omega_c", "cavity frequency"),
    ("model.omega_v", "vibrational frequency"),
    ("model.omega_e", "electronic transition frequency"),
    ("model.g", "cavity-vibration coupling"),
    ("model.lambda", "electron-vibration coupling"),
    ("model.xi", "modulation depth"),
    ("model.n_a", "cavity sideband order"),
    ("model.n_b", "vibration sideband order"),
    ("model.delta_a_spec", "cavity sideband detuning as a multiple of g_a"),
    ("model.kappa", "cavity decay rate"),
    ("model.gamma_v", "vibrational decay rate"),
    ("model.gamma_e", "electronic decay rate"),
    ("cutoffs.n_a_max", "highest cavity Fock level, or auto"),
    ("cutoffs.n_b_max", "highest vibration Fock level, or auto"),
    ("integrator.method", "rk4 or rk45"),
    ("integrator.step", "fixed RK4 step, or auto"),
    ("integrator.steps_per_period", "RK4 steps per period of the fastest frequency when step = auto"),
    ("integrator.rel_tol", "rk45 relative tolerance"),
    ("integrator.abs_tol", "rk45 absolute tolerance"),
    ("integrator.frame", "lab, electronic-shift or interaction"),
    ("integrator.on_breach", "error or flag"),
    ("monitors.norm_drift_rate", "allowed norm drift per unit time"),
    ("monitors.trace_drift_rate", "allowed trace drift per unit time"),
    ("monitors.top_population", "allowed population of the highest Fock level"),
    ("monitors.positivity", "allowed negative eigenvalue of rho"),
    ("monitors.positivity_checks", "number of samples checked for positivity"),
    ("time.periods", "run length in periods 2*pi/|delta_a|"),
    ("time.points_per_period", "samples per period"),
    ("wigner.points", "points per axis of Wigner cuts"),
    ("wigner.extent", "half-width of the Wigner window"),
    ("wigner.line_im_chi", "Im chi along the Re line cut"),
    ("wigner.line_re", "Re sigma = Re chi along the Im line cut"),
    ("scan.omega_c", "comma-separated omega_c values for fig7 and fig8"),
    ("scan.ratio", "omega_v / omega_c along the omega_c scan"),
    ("scan.xi_max", "upper end of the fig2 xi grid"),
    ("scan.xi_step", "spacing of the fig2 xi grid"),
    ("scan.dissipation", "open-system rows to run: all, kappa, gamma_v or gamma_e"),
    ("analysis.negativity_stride", "evaluate open-system negativity on every n-th sample"),
    ("output.directory", "directory receiving the tables"),
    ("output.format", "csv or json"),
    ("output.precision", "significant digits per value"),
];

/// Keys a custom scenario must set.
pub const CUSTOM_REQUIRED: &[&str] = &[
    "model.omega_c",
    "model.omega_v",
    "model.omega_e",
    "model.g",
    "model.lambda",
    "model.xi",
    "model.n_a",
    "model.n_b",
    "model.delta_a_spec",
    "model.kappa",
    "model.gamma_v",
    "model.gamma_e",
    "cutoffs.n_a_max",
    "cutoffs.n_b_max",
];

fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|_| format!("cannot parse `{v}` as a number"))
}

fn auto_or<T: FromStr>(v: &str) -> std::result::Result<Option<T>, String> {
    if v == "auto" {
        Ok(None)
    } else {
        num(v).map(Some)
    }
}

fn list(v: &str) -> Vec<String> {
    v.split(',').map(|s| s.trim().to_string()).collect()
}

fn fmt_opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "auto".to_string(), |x| x.to_string())
}

impl ScenarioConfig {
    /// Fully populated defaults of a scenario.
    pub fn preset(scenario: Scenario) -> Self {
        let mut model = ModelParams::default();
        if scenario.is_open_preset() {
            model.omega_c = 100.0;
            model.omega_v = 101.0;
            model.delta_a_spec = -1.0;
            model.kappa = BACKGROUND_RATE;
            model.gamma_v = BACKGROUND_RATE;
            model.gamma_e = BACKGROUND_RATE;
        }
        let omega_c = match scenario {
            Scenario::Fig8 => FIG8_OMEGA_C.to_vec(),
            _ => vec![30.0, 50.0, 100.0],
        };
        ScenarioConfig {
            scenario,
            model,
            cutoffs: CutoffChoice::default(),
            integrator: IntegratorOptions::default(),
            time: TimeGrid {
                periods: 1.0,
                points_per_period: 2000,
            },
            wigner: WignerSettings {
                points: 81,
                extent: 4.0,
                line_im_chi: 0.6,
                line_re: 1.0,
            },
            scan: ScanSettings {
                omega_c,
                ratio: 1.01,
                xi_max: 3.0,
                xi_step: 0.001,
                group: DissipationGroup::All,
            },
            negativity_stride: 20,
            sweep: Vec::new(),
            output: OutputSettings {
                directory: PathBuf::from("out"),
                format: OutputFormat::Csv,
                precision: 12,
            },
            explicit: Vec::new(),
        }
    }

    /// Parses a configuration document.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(usize, &str, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (k, v) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() || v.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "empty key or value".into(),
                });
            }
            if let Some(&(first, _, _)) = entries.iter().find(|e| e.1 == k) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{k}` (first set on line {first})"),
                });
            }
            entries.push((line, k, v));
        }
        let &(line, _, name) = entries.iter().find(|e| e.1 == "scenario").ok_or(Error::Parse {
            line: 0,
            message: "missing required key `scenario`".into(),
        })?;
        let scenario = name.parse().map_err(|message| Error::Parse { line, message })?;
        let mut cfg = ScenarioConfig::preset(scenario);
        for (line, k, v) in entries {
            if k == "scenario" {
                continue;
            }
            let err = |m: String| Error::Parse {
                line,
                message: format!("{k}: {m}"),
            };
            if let Some(target) = k.strip_prefix("sweep.") {
                let values = list(v);
                if values.iter().any(|s| s.is_empty()) {
                    return Err(err("empty entry in value list".into()));
                }
                if target == "scenario" || target.starts_with("sweep.") || target.starts_with("output.") {
                    return Err(err(format!("`{target}` cannot be swept")));
                }
                for value in &values {
                    cfg.clone().set(target, value).map_err(err)?;
                }
                cfg.sweep.push(SweepAxis {
                    key: target.to_string(),
                    values,
                });
            } else {
                cfg.set(k, v).map_err(err)?;
            }
            cfg.explicit.push(k.to_string());
        }
        Ok(cfg)
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let m = &mut self.model;
        let it = &mut self.integrator;
        let mon = &mut it.monitors;
        match key {
            "model.omega_c" => m.omega_c = num(v)?,
            "model.omega_v" => m.omega_v = num(v)?,
            "model.omega_e" => m.omega_e = num(v)?,
            "model.g" => m.g = num(v)?,
            "model.lambda" => m.lambda = num(v)?,
            "model.xi" => m.xi = num(v)?,
            "model.n_a" => m.n_a = num(v)?,
            "model.n_b" => m.n_b = num(v)?,
            "model.delta_a_spec" => m.delta_a_spec = num(v)?,
            "model.kappa" => m.kappa = num(v)?,
            "model.gamma_v" => m.gamma_v = num(v)?,
            "model.gamma_e" => m.gamma_e = num(v)?,
            "cutoffs.n_a_max" => self.cutoffs.n_a_max = auto_or(v)?,
            "cutoffs.n_b_max" => self.cutoffs.n_b_max = auto_or(v)?,
            "integrator.method" => {
                it.method = match v {
                    "rk4" => Method::Rk4,
                    "rk45" => Method::Rk45,
                    _ => return Err(format!("expected rk4 or rk45, got `{v}`")),
                }
            }
            "integrator.step" => it.step = auto_or(v)?,
            "integrator.steps_per_period" => it.steps_per_period = num(v)?,
            "integrator.rel_tol" => it.rel_tol = num(v)?,
            "integrator.abs_tol" => it.abs_tol = num(v)?,
            "integrator.frame" => {
                it.frame = match v {
                    "lab" => Frame::Lab,
                    "electronic-shift" => Frame::ElectronicShift,
                    "interaction" => Frame::Interaction,
                    _ => return Err(format!("expected lab, electronic-shift or interaction, got `{v}`")),
                }
            }
            "integrator.on_breach" => {
                it.on_breach = match v {
                    "error" => BreachPolicy::Error,
                    "flag" => BreachPolicy::Flag,
                    _ => return Err(format!("expected error or flag, got `{v}`")),
                }
            }
            "monitors.norm_drift_rate" => mon.norm_drift_rate = num(v)?,
            "monitors.trace_drift_rate" => mon.trace_drift_rate = num(v)?,
            "monitors.top_population" => mon.top_population = num(v)?,
            "monitors.positivity" => mon.positivity = num(v)?,
            "monitors.positivity_checks" => mon.positivity_checks = num(v)?,
            "time.periods" => self.time.periods = num(v)?,
            "time.points_per_period" => self.time.points_per_period = num(v)?,
            "wigner.points" => self.wigner.points = num(v)?,
            "wigner.extent" => self.wigner.extent = num(v)?,
            "wigner.line_im_chi" => self.wigner.line_im_chi = num(v)?,
            "wigner.line_re" => self.wigner.line_re = num(v)?,
            "scan.omega_c" => self.scan.omega_c = list(v).iter().map(|s| num(s)).collect::<std::result::Result<_, _>>()?,
            "scan.ratio" => self.scan.ratio = num(v)?,
            "scan.xi_max" => self.scan.xi_max = num(v)?,
            "scan.xi_step" => self.scan.xi_step = num(v)?,
            "scan.dissipation" => self.scan.group = v.parse()?,
            "analysis.negativity_stride" => self.negativity_stride = num(v)?,
            "output.directory" => self.output.directory = PathBuf::from(v),
            "output.format" => self.output.format = v.parse()?,
            "output.precision" => self.output.precision = num(v)?,
            _ => return Err("unknown key".into()),
        }
        Ok(())
    }

    /// Current value of every key, in the order of [`KEYS`].
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let m = &self.model;
        let it = &self.integrator;
        let mon = &it.monitors;
        let join = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        let values = [
            self.scenario.name().to_string(),
            m.omega_c.to_string(),
            m.omega_v.to_string(),
            m.omega_e.to_string(),
            m.g.to_string(),
            m.lambda.to_string(),
            m.xi.to_string(),
            m.n_a.to_string(),
            m.n_b.to_string(),
            m.delta_a_spec.to_string(),
            m.kappa.to_string(),
            m.gamma_v.to_string(),
            m.gamma_e.to_string(),
            fmt_opt(self.cutoffs.n_a_max),
            fmt_opt(self.cutoffs.n_b_max),
            match it.method {
                Method::Rk4 => "rk4".into(),
                Method::Rk45 => "rk45".into(),
            },
            fmt_opt(it.step),
            it.steps_per_period.to_string(),
            it.rel_tol.to_string(),
            it.abs_tol.to_string(),
            it.frame.name().to_string(),
            match it.on_breach {
                BreachPolicy::Error => "error".into(),
                BreachPolicy::Flag => "flag".into(),
            },
            mon.norm_drift_rate.to_string(),
            mon.trace_drift_rate.to_string(),
            mon.top_population.to_string(),
            mon.positivity.to_string(),
            mon.positivity_checks.to_string(),
            self.time.periods.to_string(),
            self.time.points_per_period.to_string(),
            self.wigner.points.to_string(),
            self.wigner.extent.to_string(),
            self.wigner.line_im_chi.to_string(),
            self.wigner.line_re.to_string(),
            join(&self.scan.omega_c),
            self.scan.ratio.to_string(),
            self.scan.xi_max.to_string(),
            self.scan.xi_step.to_string(),
            self.scan.group.name().to_string(),
            self.negativity_stride.to_string(),
            self.output.directory.display().to_string(),
            match self.output.format {
                OutputFormat::Csv => "csv".into(),
                OutputFormat::Json => "json".into(),
            },
            self.output.precision.to_string(),
        ];
        KEYS.iter().map(|(k, _)| *k).zip(values).collect()
    }

    /// The configuration as a document that parses back to the same
    /// settings. Sweeps are not included.
    pub fn render(&self) -> String {
        self.entries().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    /// One configuration per point of the sweep's Cartesian product,
    /// labelled `key=value` joined by `,`. Without a sweep the result is
    /// this configuration with an empty label.
    pub fn expand_sweep(&self) -> Result<Vec<(String, ScenarioConfig)>> {
        let mut base = self.clone();
        base.sweep.clear();
        let mut out = vec![(String::new(), base)];
        for axis in &self.sweep {
            let mut next = Vec::with_capacity(out.len() * axis.values.len());
            for (label, cfg) in &out {
                for value in &axis.values {
                    let mut c = cfg.clone();
                    c.set(&axis.key, value).map_err(|m| Error::Validation(format!("sweep.{}: {m}", axis.key)))?;
                    let tag = format!("{}={value}", axis.key);
                    let label = if label.is_empty() { tag } else { format!("{label},{tag}") };
                    next.push((label, c));
                }
            }
            out = next;
        }
        Ok(out)
    }

    /// Model parameters of every simulation point of the scenario, with a
    /// label naming what distinguishes it.
    pub fn model_points(&self) -> Vec<(String, ModelParams)> {
        match self.scenario {
            Scenario::Fig7 | Scenario::Fig8 => self
                .scan
                .omega_c
                .iter()
                .map(|&w| {
                    let p = ModelParams {
                        omega_c: w,
                        omega_v: w * self.scan.ratio,
                        ..self.model
                    };
                    (format!("omega_c={w}"), p)
                })
                .collect(),
            s if s.is_open_preset() => DISSIPATION_GRID
                .iter()
                .filter(|(g, _)| self.scan.group == DissipationGroup::All || self.scan.group == *g)
                .flat_map(|&(g, rates)| {
                    rates.into_iter().map(move |r| {
                        let mut p = ModelParams {
                            kappa: BACKGROUND_RATE,
                            gamma_v: BACKGROUND_RATE,
                            gamma_e: BACKGROUND_RATE,
                            ..self.model
                        };
                        match g {
                            DissipationGroup::Kappa => p.kappa = r,
                            DissipationGroup::GammaV => p.gamma_v = r,
                            _ => p.gamma_e = r,
                        }
                        (format!("{}={r}", g.name()), p)
                    })
                })
                .collect(),
            _ => vec![(String::new(), self.model)],
        }
    }
}
