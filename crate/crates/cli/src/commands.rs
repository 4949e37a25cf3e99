//! The four subcommands. Each returns an [`Outcome`]; configuration and I/O
//! problems come back as errors.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use dipolar::{
    char_roots, characteristic::SURVIVING_POLE_TOL, concurrence_series, integrate_pseudomode_at,
    integrate_volterra_extrapolated_with, integrate_volterra_with, residue_coefficients,
    steady_state_verdict, surviving_pole, Error, InitialAmplitudes, IntegratorConfig, KernelSign,
    Model, Trajectory,
};
use rayon::prelude::*;

use crate::config::{resolve_init, resolve_params, RunConfig, RunFile, SolverChoice, SweepConfig};
use crate::output::{fmt, with_sink, write_sweep, write_text, write_trajectory};
use crate::svg::{self, Series};

/// Cross-solver agreement threshold for `verify`.
pub const AGREEMENT_TOL: f64 = 1e-5;
/// Leak-rate identity threshold for `verify`.
pub const LEAK_IDENTITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ChecksFailed,
}

/// Closed-form trajectory, or `None` when the roots are too close together
/// for the residue formula.
pub fn closed_form(
    model: &Model,
    init: &InitialAmplitudes,
    times: &[f64],
) -> Result<Option<Trajectory>> {
    match residue_coefficients(model, init) {
        Ok(sol) => Ok(Some(sol.trajectory(model, init, times))),
        Err(Error::DegenerateRoots { .. }) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn volterra_sampled(cfg: &RunConfig) -> Trajectory {
    let n = cfg.volterra_steps;
    let h = cfg.t_end / n as f64;
    let stride = ((cfg.sample_dt / h).round() as usize).max(1);
    let mut traj =
        integrate_volterra_with(&cfg.model, &cfg.init, cfg.t_end, n, KernelSign::Physical);
    let last = traj.samples.len() - 1;
    traj.samples = traj
        .samples
        .into_iter()
        .enumerate()
        .filter(|(i, _)| i % stride == 0 || *i == last)
        .map(|(_, s)| s)
        .collect();
    traj
}

fn solve(cfg: &RunConfig, solver: SolverChoice, times: &[f64]) -> Result<Trajectory> {
    let ode = || -> Result<Trajectory> {
        Ok(integrate_pseudomode_at(
            &cfg.model,
            &cfg.init,
            times,
            &cfg.integrator,
        )?)
    };
    match solver {
        SolverChoice::Closed => match closed_form(&cfg.model, &cfg.init, times)? {
            Some(t) => Ok(t),
            None => {
                eprintln!("note: characteristic roots are degenerate; using the pseudomode ODE instead of the closed form");
                ode()
            }
        },
        SolverChoice::Ode => ode(),
        SolverChoice::Volterra => Ok(volterra_sampled(cfg)),
        SolverChoice::All => unreachable!("expanded by the caller"),
    }
}

fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

fn trajectory_chart(traj: &Trajectory, title: &str) -> String {
    let lambda = traj.model.lambda();
    let conc: Vec<(f64, f64)> = concurrence_series(traj)
        .into_iter()
        .map(|(t, c)| (lambda * t, c))
        .collect();
    let pop: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .map(|s| (lambda * s.t, s.p1() + s.p2()))
        .collect();
    svg::line_chart(
        title,
        "tau = lambda t",
        "",
        &[
            Series {
                label: "concurrence".into(),
                points: conc,
            },
            Series {
                label: "population".into(),
                points: pop,
            },
        ],
    )
}

pub fn cmd_run(cfg: &RunConfig) -> Result<Outcome> {
    let times = cfg.sample_times();
    let solvers: &[SolverChoice] = match cfg.solver {
        SolverChoice::All => &[
            SolverChoice::Closed,
            SolverChoice::Ode,
            SolverChoice::Volterra,
        ],
        ref one => std::slice::from_ref(one),
    };
    if cfg.solver == SolverChoice::All && cfg.out.is_none() {
        bail!("--solver all writes one file per solver and needs --out");
    }
    if cfg.svg && cfg.out.is_none() {
        bail!("--svg needs --out to name the chart file");
    }
    for &solver in solvers {
        let traj = solve(cfg, solver, &times)?;
        let out = match (&cfg.out, cfg.solver) {
            (Some(p), SolverChoice::All) => {
                Some(sibling(p, &format!("_{}", traj.solver.as_str()), "csv"))
            }
            (p, _) => p.clone(),
        };
        with_sink(out.as_deref(), |w| write_trajectory(w, &traj))?;
        if let (true, Some(p)) = (cfg.svg, out.as_deref()) {
            let title = format!("{} solution", traj.solver.as_str());
            write_text(&p.with_extension("svg"), &trajectory_chart(&traj, &title))?;
        }
    }
    Ok(Outcome::Success)
}

/// Concurrence columns for every `K` in the sweep, in axis order. Each point
/// is computed independently on a pool of `jobs` threads.
pub fn sweep_columns(cfg: &SweepConfig, jobs: usize) -> Result<Vec<Vec<f64>>> {
    let lambda = cfg.base.model.lambda();
    let times: Vec<f64> = cfg.tau_grid.iter().map(|tau| tau / lambda).collect();
    let point = |k: f64| -> Result<Vec<f64>> {
        let mut params = cfg.base.model.params;
        params.dipole = k;
        let model = Model::new(params).with_context(|| format!("sweep point K={k}"))?;
        let traj = match closed_form(&model, &cfg.base.init, &times)? {
            Some(t) => t,
            None => integrate_pseudomode_at(&model, &cfg.base.init, &times, &cfg.base.integrator)?,
        };
        // The solvers always add t = 0; drop it unless the grid asked for it.
        let series = concurrence_series(&traj);
        let skip = series.len() - times.len();
        Ok(series.into_iter().skip(skip).map(|(_, c)| c).collect())
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("starting worker pool")?;
    pool.install(|| cfg.k_values.par_iter().map(|&k| point(k)).collect())
}

pub fn cmd_sweep(cfg: &SweepConfig, jobs: usize) -> Result<Outcome> {
    if cfg.svg && cfg.out.is_none() {
        bail!("--svg needs --out to name the chart file");
    }
    let columns = sweep_columns(cfg, jobs)?;
    with_sink(cfg.out.as_deref(), |w| {
        write_sweep(w, &cfg.tau_grid, &cfg.k_values, &columns)
    })?;
    if let (true, Some(p)) = (cfg.svg, cfg.out.as_deref()) {
        let chart = svg::heatmap(
            "concurrence",
            "tau = lambda t",
            "K",
            &cfg.tau_grid,
            &cfg.k_values,
            &columns,
        );
        write_text(&p.with_extension("svg"), &chart)?;
    }
    Ok(Outcome::Success)
}

fn complex(z: dipolar::Complex64) -> String {
    format!(
        "{} {} {}i",
        fmt(z.re),
        if z.im < 0.0 { '-' } else { '+' },
        fmt(z.im.abs())
    )
}

pub fn roots_report(model: &Model, init: Option<&InitialAmplitudes>) -> String {
    let roots = char_roots(model);
    let d = &model.derived;
    let mut out = String::new();
    out.push_str(&format!(
        "lambda = {}  R = {}  K = {}  r1 = {}  r2 = {}\n",
        model.lambda(),
        d.rabi,
        model.dipole(),
        d.r1,
        d.r2
    ));
    for (i, (s, res)) in roots.roots.iter().zip(roots.residuals()).enumerate() {
        out.push_str(&format!(
            "s{} = {}   |D(s)| = {:.3e}\n",
            i + 1,
            complex(*s),
            res
        ));
    }
    let v = roots.vieta_residuals();
    out.push_str(&format!(
        "vieta residuals = {:.3e} {:.3e} {:.3e}\n",
        v[0], v[1], v[2]
    ));
    out.push_str(&format!(
        "degenerate = {} (min separation {:.3e})\n",
        roots.degenerate, roots.min_separation
    ));
    match surviving_pole(&roots, SURVIVING_POLE_TOL) {
        Some(p) => out.push_str(&format!("surviving pole = {}\n", complex(p))),
        None => out.push_str("surviving pole = none\n"),
    }
    // The regime does not depend on the initial state; borrow one if needed.
    let probe = init
        .copied()
        .unwrap_or_else(|| dipolar::bell_state(dipolar::BellSign::Minus));
    let verdict = steady_state_verdict(model, &probe);
    out.push_str(&format!(
        "verdict = {} (regime {})\n",
        if verdict.steady { "steady" } else { "decaying" },
        verdict.regime.as_str()
    ));
    if init.is_some() {
        out.push_str(&format!(
            "asymptotic concurrence = {}\n",
            fmt(verdict.asymptotic_concurrence)
        ));
    }
    out
}

pub fn cmd_roots(file: &RunFile, out: Option<&Path>) -> Result<Outcome> {
    let model = Model::new(resolve_params(file)?).context("invalid parameters")?;
    let init = match &file.init {
        Some(spec) => Some(resolve_init(Some(spec), file.normalize)?),
        None => None,
    };
    print!("{}", roots_report(&model, init.as_ref()));
    if let Some(p) = out {
        let roots = char_roots(&model);
        with_sink(Some(p), |w| {
            writeln!(w, "root,re,im,residual")?;
            for (i, (s, r)) in roots.roots.iter().zip(roots.residuals()).enumerate() {
                writeln!(w, "{},{},{},{}", i + 1, fmt(s.re), fmt(s.im), fmt(r))?;
            }
            Ok(())
        })?;
    }
    Ok(Outcome::Success)
}

pub struct Check {
    pub name: String,
    /// `None` when the check was skipped.
    pub discrepancy: Option<f64>,
    pub threshold: f64,
    pub note: Option<String>,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.discrepancy.is_none_or(|d| d <= self.threshold)
    }

    pub fn line(&self) -> String {
        let status = match self.discrepancy {
            None => "SKIP",
            Some(_) if self.passed() => "PASS",
            Some(_) => "FAIL",
        };
        let value = self
            .discrepancy
            .map_or("-".to_string(), |d| format!("{d:.3e}"));
        let mut line = format!(
            "{status} {:<34} sup = {value:<10} threshold = {:.0e}",
            self.name, self.threshold
        );
        if let Some(n) = &self.note {
            line.push_str(&format!("  ({n})"));
        }
        line
    }
}

/// Largest mismatch of `d/dt (|c1|^2 + |c2|^2 + |b|^2) = -2 lambda |b|^2`
/// along dense, tightly toleranced ODE output (five-point derivative).
pub fn leak_identity_discrepancy(
    model: &Model,
    init: &InitialAmplitudes,
    t_end: f64,
) -> Result<f64> {
    let h = (1e-3 / model.lambda()).min(1e-2 / model.frequency_scale());
    let n = (t_end / h).ceil() as usize;
    let h = t_end / n as f64;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let traj = integrate_pseudomode_at(
        model,
        init,
        &times,
        &IntegratorConfig::adaptive(1e-12, 1e-14),
    )?;
    let p: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| s.tracked_population())
        .collect();
    let mut worst = 0.0f64;
    for i in 2..p.len().saturating_sub(2) {
        let dp = (p[i - 2] - 8.0 * p[i - 1] + 8.0 * p[i + 1] - p[i + 2]) / (12.0 * h);
        worst = worst.max((dp + 2.0 * model.lambda() * traj.samples[i].pb()).abs());
    }
    Ok(worst)
}

pub fn verify_checks(cfg: &RunConfig, kernel: KernelSign) -> Result<Vec<Check>> {
    let (model, init) = (&cfg.model, &cfg.init);
    let n = cfg
        .volterra_steps
        .max((2000.0 * model.lambda() * cfg.t_end).ceil() as usize);
    let volterra = integrate_volterra_extrapolated_with(model, init, cfg.t_end, n, kernel);
    let times: Vec<f64> = volterra.times().collect();
    let ode = integrate_pseudomode_at(model, init, &times, &cfg.integrator)?;
    let closed = closed_form(model, init, &times)?;
    let check = |name: &str, d: Option<f64>, note: Option<String>| Check {
        name: name.to_string(),
        discrepancy: d,
        threshold: AGREEMENT_TOL,
        note,
    };
    let skipped = || Some("degenerate roots, closed form skipped".to_string());
    let mut checks = vec![
        match &closed {
            Some(c) => check(
                "closed_form vs pseudomode_ode",
                Some(c.sup_distance(&ode)),
                None,
            ),
            None => check("closed_form vs pseudomode_ode", None, skipped()),
        },
        match &closed {
            Some(c) => check(
                "closed_form vs volterra",
                Some(c.sup_distance(&volterra)),
                None,
            ),
            None => check("closed_form vs volterra", None, skipped()),
        },
        check(
            "pseudomode_ode vs volterra",
            Some(ode.sup_distance(&volterra)),
            None,
        ),
    ];
    checks.push(Check {
        name: "leak-rate identity".to_string(),
        discrepancy: Some(leak_identity_discrepancy(model, init, cfg.t_end)?),
        threshold: LEAK_IDENTITY_TOL,
        note: None,
    });
    Ok(checks)
}

pub fn cmd_verify(cfg: &RunConfig, kernel: KernelSign) -> Result<Outcome> {
    let checks = verify_checks(cfg, kernel)?;
    for c in &checks {
        println!("{}", c.line());
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    if failed == 0 {
        println!("verify: all checks passed");
        Ok(Outcome::Success)
    } else {
        println!("verify: {failed} check(s) failed");
        Ok(Outcome::ChecksFailed)
    }
}
