use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{derivative, SolverTag, Trajectory, TrajectoryState};
use crate::error::{Error, Result};
use crate::model::{InitialAmplitudes, Model};

type State = [Complex64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepping {
    /// Dormand–Prince 5(4) with per-component mixed error control.
    Adaptive { rel_tol: f64, abs_tol: f64 },
    /// Classical RK4 on a fixed grid; bit-reproducible.
    Fixed { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub stepping: Stepping,
    pub max_step: f64,
    /// Emit every `sample_stride`-th step when no output grid is given.
    pub sample_stride: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            stepping: Stepping::Adaptive {
                rel_tol: 1e-9,
                abs_tol: 1e-12,
            },
            max_step: f64::INFINITY,
            sample_stride: 1,
        }
    }
}

impl IntegratorConfig {
    pub fn adaptive(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            stepping: Stepping::Adaptive { rel_tol, abs_tol },
            ..Self::default()
        }
    }

    pub fn fixed(dt: f64) -> Self {
        Self {
            stepping: Stepping::Fixed { dt },
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field, reason: String| Err(Error::InvalidParam { field, reason });
        match self.stepping {
            Stepping::Adaptive { rel_tol, abs_tol } => {
                for (field, v) in [("rel_tol", rel_tol), ("abs_tol", abs_tol)] {
                    if !(v > 0.0 && v <= 1e-2) {
                        return bad(field, format!("must lie in (0, 1e-2], got {v}"));
                    }
                }
            }
            Stepping::Fixed { dt } => {
                if !(dt > 0.0 && dt.is_finite()) {
                    return bad("dt", format!("must be > 0, got {dt}"));
                }
            }
        }
        if self.max_step.is_nan() || self.max_step <= 0.0 {
            return bad("max_step", format!("must be > 0, got {}", self.max_step));
        }
        if self.sample_stride == 0 {
            return bad("sample_stride", "must be positive".into());
        }
        Ok(())
    }
}

#[inline]
fn axpy(y: &State, h: f64, terms: &[(f64, &State)]) -> State {
    let mut out = *y;
    for (coef, k) in terms {
        for i in 0..3 {
            out[i] += k[i] * (h * coef);
        }
    }
    out
}

// Dormand–Prince 5(4) tableau. The system is autonomous, so the nodes are
// not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct DoPri<'a> {
    model: &'a Model,
    rel_tol: f64,
    abs_tol: f64,
}

impl DoPri<'_> {
    /// One trial step from `y` (with derivative `k1`). Returns the
    /// 5th-order solution, its derivative (FSAL) and the scaled error norm.
    fn step(&self, y: &State, k1: &State, h: f64) -> (State, State, f64) {
        let m = self.model;
        let k2 = derivative(m, &axpy(y, h, &[(A21, k1)]));
        let k3 = derivative(m, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = derivative(m, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = derivative(
            m,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = derivative(
            m,
            &axpy(
                y,
                h,
                &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            y,
            h,
            &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = derivative(m, &y_new);
        let err = axpy(
            &[Complex64::default(); 3],
            h,
            &[
                (E1, k1),
                (E3, &k3),
                (E4, &k4),
                (E5, &k5),
                (E6, &k6),
                (E7, &k7),
            ],
        );
        let mut acc = 0.0;
        for i in 0..3 {
            for (e, a, b) in [
                (err[i].re, y[i].re, y_new[i].re),
                (err[i].im, y[i].im, y_new[i].im),
            ] {
                let sc = self.abs_tol + self.rel_tol * a.abs().max(b.abs());
                acc += (e / sc) * (e / sc);
            }
        }
        (y_new, k7, (acc / 6.0).sqrt())
    }

    fn scaled_norm(&self, v: &State, y: &State) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            for (e, a) in [(v[i].re, y[i].re), (v[i].im, y[i].im)] {
                let sc = self.abs_tol + self.rel_tol * a.abs();
                acc += (e / sc) * (e / sc);
            }
        }
        (acc / 6.0).sqrt()
    }

    /// Starting step size estimate (Hairer, Nørsett & Wanner, II.4).
    fn initial_step(&self, y: &State, k1: &State, max_step: f64) -> f64 {
        let d0 = self.scaled_norm(y, y);
        let d1 = self.scaled_norm(k1, y);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(max_step);
        let y1 = axpy(y, h0, &[(1.0, k1)]);
        let k2 = derivative(self.model, &y1);
        let diff = [k2[0] - k1[0], k2[1] - k1[1], k2[2] - k1[2]];
        let d2 = self.scaled_norm(&diff, y) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(max_step)
    }
}

fn rk4_step(model: &Model, y: &State, h: f64) -> State {
    let k1 = derivative(model, y);
    let k2 = derivative(model, &axpy(y, h, &[(0.5, &k1)]));
    let k3 = derivative(model, &axpy(y, h, &[(0.5, &k2)]));
    let k4 = derivative(model, &axpy(y, h, &[(1.0, &k3)]));
    axpy(
        y,
        h,
        &[
            (1.0 / 6.0, &k1),
            (1.0 / 3.0, &k2),
            (1.0 / 3.0, &k3),
            (1.0 / 6.0, &k4),
        ],
    )
}

/// Where samples are taken.
enum Output<'a> {
    /// Every `n`-th accepted step, plus the final time.
    Stride(usize),
    /// Exactly at these times (strictly increasing, > 0).
    Grid(&'a [f64]),
}

fn run(
    model: &Model,
    init: &InitialAmplitudes,
    t_end: f64,
    cfg: &IntegratorConfig,
    output: Output<'_>,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParam {
            field: "t_end",
            reason: format!("must be > 0, got {t_end}"),
        });
    }
    let mut samples = vec![TrajectoryState::initial(init)];
    let mut y = samples[0].vector();
    let mut t = 0.0;
    let mut steps = 0usize;
    let mut next_out = 0usize;
    let min_step = 1e-14 * t_end;

    // Next time the integrator must land on exactly.
    let target = |next_out: usize| match output {
        Output::Grid(g) => g.get(next_out).copied().unwrap_or(t_end),
        Output::Stride(_) => t_end,
    };

    let mut record = |t: f64, y: &State, steps: usize, next_out: &mut usize, hit: bool| match output
    {
        Output::Stride(n) => {
            if steps.is_multiple_of(n) || t >= t_end {
                samples.push(TrajectoryState::from_vector(t, *y));
            }
        }
        Output::Grid(_) => {
            if hit {
                samples.push(TrajectoryState::from_vector(t, *y));
                *next_out += 1;
            }
        }
    };

    match cfg.stepping {
        Stepping::Fixed { dt } => {
            let dt = dt.min(cfg.max_step);
            while t < t_end {
                let stop = target(next_out);
                let remaining = stop - t;
                // Absorb a sliver left by rounding instead of taking a tiny step.
                let (h, hit) = if remaining <= dt * (1.0 + 1e-9) {
                    (remaining, true)
                } else {
                    (dt, false)
                };
                y = rk4_step(model, &y, h);
                t = if hit { stop } else { t + h };
                steps += 1;
                record(t, &y, steps, &mut next_out, hit);
            }
        }
        Stepping::Adaptive { rel_tol, abs_tol } => {
            let dp = DoPri {
                model,
                rel_tol,
                abs_tol,
            };
            let mut k1 = derivative(model, &y);
            let mut h = dp.initial_step(&y, &k1, cfg.max_step.min(t_end));
            let mut rejected = false;
            while t < t_end {
                let stop = target(next_out);
                let remaining = stop - t;
                let hit = h >= remaining * (1.0 - 1e-12);
                let h_try = if hit { remaining } else { h };
                let (y_new, k7, err) = dp.step(&y, &k1, h_try);
                if !err.is_finite() {
                    h *= 0.1;
                    if h < min_step {
                        return Err(Error::StepUnderflow { t, h });
                    }
                    continue;
                }
                let fac = if err == 0.0 {
                    10.0
                } else {
                    0.9 * err.powf(-0.2)
                };
                if err <= 1.0 {
                    y = y_new;
                    k1 = k7;
                    t = if hit { stop } else { t + h_try };
                    steps += 1;
                    record(t, &y, steps, &mut next_out, hit);
                    let grow = if rejected {
                        fac.min(1.0)
                    } else {
                        fac.min(10.0)
                    };
                    // Do not let a shortened landing step shrink the next one.
                    h = (h.max(h_try) * grow.max(0.2)).min(cfg.max_step);
                    rejected = false;
                } else {
                    h = h_try * fac.clamp(0.2, 1.0);
                    rejected = true;
                    if h < min_step {
                        return Err(Error::StepUnderflow { t, h });
                    }
                }
            }
        }
    }

    Ok(Trajectory {
        model: *model,
        init: *init,
        samples,
        solver: SolverTag::PseudomodeOde,
    })
}

/// Integrates the pseudomode ODEs on `[0, t_end]`, sampling every
/// `cfg.sample_stride` steps and always at `t_end`.
pub fn integrate_pseudomode(
    model: &Model,
    init: &InitialAmplitudes,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    run(model, init, t_end, cfg, Output::Stride(cfg.sample_stride))
}

/// Integrates the pseudomode ODEs, landing exactly on each requested time.
/// `times` must be strictly increasing and non-negative; the initial sample
/// at `t = 0` is always included.
pub fn integrate_pseudomode_at(
    model: &Model,
    init: &InitialAmplitudes,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let grid: Vec<f64> = times.iter().copied().filter(|&t| t > 0.0).collect();
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParam {
            field: "times",
            reason: "must be finite, non-negative and strictly increasing".into(),
        });
    }
    let Some(&t_end) = grid.last() else {
        return Ok(Trajectory {
            model: *model,
            init: *init,
            samples: vec![TrajectoryState::initial(init)],
            solver: SolverTag::PseudomodeOde,
        });
    };
    run(model, init, t_end, cfg, Output::Grid(&grid))
}
