//! JSON run and sweep configurations.
//!
//! Parameters may be given physically (`lambda`, `W`, `alpha1`, `alpha2`,
//! `K`, optional `omega0`) or in units of the reservoir width (`calR`,
//! `calK`, `r1`; `lambda = 1` implied). Command-line flags override file
//! values after parsing.

use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use dipolar::{
    bell_state, validate_initial, BellSign, Complex64, InitialAmplitudes, IntegratorConfig, Model,
    NormalizeMode, Stepping, SystemParams,
};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverChoice {
    #[serde(alias = "closed_form")]
    Closed,
    #[serde(alias = "pseudomode_ode")]
    Ode,
    Volterra,
    All,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum InitSpec {
    Named(String),
    Explicit { c10: [f64; 2], c20: [f64; 2] },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub fixed_dt: Option<f64>,
    pub max_step: Option<f64>,
    pub sample_stride: Option<usize>,
}

/// Raw run configuration as it appears in the file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunFile {
    pub lambda: Option<f64>,
    #[serde(rename = "W")]
    pub w: Option<f64>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub omega0: Option<f64>,
    #[serde(rename = "calR")]
    pub cal_r: Option<f64>,
    #[serde(rename = "calK")]
    pub cal_k: Option<f64>,
    pub r1: Option<f64>,
    pub init: Option<InitSpec>,
    #[serde(default)]
    pub normalize: NormalizeMode,
    pub t_end: Option<f64>,
    pub sample_dt: Option<f64>,
    pub solver: Option<SolverChoice>,
    #[serde(default)]
    pub integrator: IntegratorSpec,
    pub volterra_steps: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub init: InitialAmplitudes,
    pub t_end: f64,
    pub sample_dt: f64,
    pub solver: SolverChoice,
    pub integrator: IntegratorConfig,
    pub volterra_steps: usize,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub svg: bool,
    pub solver: Option<SolverChoice>,
    pub t_end: Option<f64>,
    pub fixed_dt: Option<f64>,
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

pub fn resolve_params(f: &RunFile) -> Result<SystemParams> {
    let physical = [f.lambda, f.w, f.alpha1, f.alpha2, f.k];
    let dimensionless = [f.cal_r, f.cal_k, f.r1];
    let any_physical = physical.iter().any(Option::is_some);
    let any_dimensionless = dimensionless.iter().any(Option::is_some);
    ensure!(
        !(any_physical && any_dimensionless),
        "config mixes physical (lambda, W, alpha1, alpha2, K) and dimensionless (calR, calK, r1) parameters"
    );
    if any_dimensionless {
        let need =
            |v: Option<f64>, name: &str| v.with_context(|| format!("missing field `{name}`"));
        let r1 = need(f.r1, "r1")?;
        ensure!(
            (0.0..=1.0).contains(&r1),
            "field `r1` must lie in [0, 1], got {r1}"
        );
        let mut p = SystemParams::dimensionless(need(f.cal_r, "calR")?, need(f.cal_k, "calK")?, r1);
        p.omega0 = f.omega0.unwrap_or(0.0);
        return Ok(p);
    }
    let need = |v: Option<f64>, name: &str| v.with_context(|| format!("missing field `{name}`"));
    Ok(SystemParams {
        width: need(f.lambda, "lambda")?,
        coupling: need(f.w, "W")?,
        alpha1: need(f.alpha1, "alpha1")?,
        alpha2: need(f.alpha2, "alpha2")?,
        dipole: need(f.k, "K")?,
        omega0: f.omega0.unwrap_or(0.0),
    })
}

pub fn resolve_init(spec: Option<&InitSpec>, mode: NormalizeMode) -> Result<InitialAmplitudes> {
    let raw = match spec {
        None => bail!("missing field `init`"),
        Some(InitSpec::Named(name)) => match name.as_str() {
            "phi_plus" => bell_state(BellSign::Plus),
            "phi_minus" => bell_state(BellSign::Minus),
            other => {
                bail!("field `init`: unknown state `{other}` (expected phi_plus or phi_minus)")
            }
        },
        Some(InitSpec::Explicit { c10, c20 }) => InitialAmplitudes::new(
            Complex64::new(c10[0], c10[1]),
            Complex64::new(c20[0], c20[1]),
        ),
    };
    validate_initial(raw, mode).context("field `init`")
}

fn resolve_integrator(spec: &IntegratorSpec, fixed_dt: Option<f64>) -> Result<IntegratorConfig> {
    let mut cfg = IntegratorConfig::default();
    let (def_rel, def_abs) = match cfg.stepping {
        Stepping::Adaptive { rel_tol, abs_tol } => (rel_tol, abs_tol),
        Stepping::Fixed { .. } => unreachable!("default is adaptive"),
    };
    cfg.stepping = match fixed_dt.or(spec.fixed_dt) {
        Some(dt) => Stepping::Fixed { dt },
        None => Stepping::Adaptive {
            rel_tol: spec.rel_tol.unwrap_or(def_rel),
            abs_tol: spec.abs_tol.unwrap_or(def_abs),
        },
    };
    if let Some(h) = spec.max_step {
        cfg.max_step = h;
    }
    if let Some(n) = spec.sample_stride {
        cfg.sample_stride = n;
    }
    cfg.validate().context("field `integrator`")?;
    Ok(cfg)
}

impl RunConfig {
    pub fn resolve(file: RunFile, ov: &Overrides) -> Result<Self> {
        let params = resolve_params(&file)?;
        let model = Model::new(params).context("invalid parameters")?;
        let init = resolve_init(file.init.as_ref(), file.normalize)?;
        let t_end = ov.t_end.or(file.t_end).unwrap_or(20.0 / model.lambda());
        ensure!(
            t_end > 0.0 && t_end.is_finite(),
            "field `t_end` must be > 0, got {t_end}"
        );
        let sample_dt = file.sample_dt.unwrap_or(0.01 / model.lambda());
        ensure!(
            sample_dt > 0.0 && sample_dt <= t_end,
            "field `sample_dt` must lie in (0, t_end], got {sample_dt}"
        );
        let volterra_steps = file.volterra_steps.unwrap_or(20000);
        ensure!(
            volterra_steps >= 100,
            "field `volterra_steps` must be >= 100"
        );
        Ok(Self {
            model,
            init,
            t_end,
            sample_dt,
            solver: ov.solver.or(file.solver).unwrap_or(SolverChoice::Closed),
            integrator: resolve_integrator(&file.integrator, ov.fixed_dt)?,
            volterra_steps,
            out: ov.out.clone().or(file.out),
            svg: ov.svg || file.svg,
        })
    }

    pub fn load(path: &Path, ov: &Overrides) -> Result<Self> {
        Self::resolve(read_json(path)?, ov)
    }

    /// Output times `0, dt, 2 dt, ..., t_end` (the last one exactly `t_end`).
    pub fn sample_times(&self) -> Vec<f64> {
        let n = (self.t_end / self.sample_dt - 1e-9).ceil().max(1.0) as usize;
        let mut times: Vec<f64> = (0..n).map(|i| i as f64 * self.sample_dt).collect();
        times.push(self.t_end);
        times
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Range { start: f64, stop: f64, step: f64 },
    List(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub base: RunFile,
    #[serde(rename = "K_values")]
    pub k_values: Option<Vec<f64>>,
    #[serde(rename = "calK_values")]
    pub cal_k_values: Option<Vec<f64>>,
    pub tau_grid: GridSpec,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub base: RunConfig,
    /// Physical dipole strengths `K`.
    pub k_values: Vec<f64>,
    /// Strictly increasing, in units of `1 / lambda`.
    pub tau_grid: Vec<f64>,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

impl SweepConfig {
    pub fn resolve(file: SweepFile, ov: &Overrides) -> Result<Self> {
        let mut tau_grid = match file.tau_grid {
            GridSpec::List(v) => v,
            GridSpec::Range { start, stop, step } => {
                ensure!(step > 0.0, "field `tau_grid.step` must be > 0");
                ensure!(stop >= start, "field `tau_grid`: stop < start");
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=n).map(|i| start + i as f64 * step).collect()
            }
        };
        if let Some(t_end) = ov.t_end {
            ensure!(t_end > 0.0, "--t-end must be > 0");
        }
        let base_ov = Overrides {
            out: None,
            svg: false,
            ..ov.clone()
        };
        let base = RunConfig::resolve(file.base, &base_ov).context("field `base`")?;
        let lambda = base.model.lambda();
        if let Some(t_end) = ov.t_end {
            tau_grid.retain(|&tau| tau <= lambda * t_end);
        }
        ensure!(!tau_grid.is_empty(), "field `tau_grid` is empty");
        ensure!(
            tau_grid.iter().all(|t| t.is_finite() && *t >= 0.0),
            "field `tau_grid` must be finite and non-negative"
        );
        ensure!(
            tau_grid.windows(2).all(|w| w[1] > w[0]),
            "field `tau_grid` must be strictly increasing"
        );
        let k_values = match (file.k_values, file.cal_k_values) {
            (Some(_), Some(_)) => bail!("give only one of `K_values` and `calK_values`"),
            (Some(k), None) => k,
            (None, Some(ck)) => ck.into_iter().map(|v| v * lambda).collect(),
            (None, None) => bail!("missing field `K_values` (or `calK_values`)"),
        };
        ensure!(!k_values.is_empty(), "sweep axis is empty");
        ensure!(
            k_values.iter().all(|k| k.is_finite()),
            "sweep axis must be finite"
        );
        Ok(Self {
            base,
            k_values,
            tau_grid,
            out: ov.out.clone().or(file.out),
            svg: ov.svg || file.svg,
        })
    }

    pub fn load(path: &Path, ov: &Overrides) -> Result<Self> {
        Self::resolve(read_json(path)?, ov)
    }
}
