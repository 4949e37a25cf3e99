//! Time-domain solvers.
//!
//! The pseudomode ODEs
//!
//! ```text
//! c1' = -i W alpha1 b - i K c2
//! c2' = -i W alpha2 b - i K c1
//! b'  = -lambda b - i W (alpha1 c1 + alpha2 c2)
//! ```
//!
//! are the workhorse ([`integrate_pseudomode`]). The equivalent memory-kernel
//! form, with kernel `W^2 e^{-lambda t}`, is integrated directly by
//! [`integrate_volterra`] and serves as an independent check.

mod ode;
mod volterra;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristic::{char_roots, SURVIVING_POLE_TOL};
use crate::model::{InitialAmplitudes, Model};

pub use ode::{integrate_pseudomode, integrate_pseudomode_at, IntegratorConfig, Stepping};
pub use volterra::{
    integrate_volterra, integrate_volterra_extrapolated, integrate_volterra_extrapolated_with,
    integrate_volterra_with, KernelSign,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Amplitudes at one instant: atoms (`c1`, `c2`) and pseudomode (`b`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryState {
    pub t: f64,
    pub c1: Complex64,
    pub c2: Complex64,
    pub b: Complex64,
}

impl TrajectoryState {
    pub fn initial(init: &InitialAmplitudes) -> Self {
        Self {
            t: 0.0,
            c1: init.c10,
            c2: init.c20,
            b: Complex64::default(),
        }
    }

    pub fn p1(&self) -> f64 {
        self.c1.norm_sqr()
    }

    pub fn p2(&self) -> f64 {
        self.c2.norm_sqr()
    }

    pub fn pb(&self) -> f64 {
        self.b.norm_sqr()
    }

    /// Weight held by atoms and pseudomode together.
    pub fn tracked_population(&self) -> f64 {
        self.p1() + self.p2() + self.pb()
    }

    /// Weight lost to the reservoir continuum, clamped at zero.
    pub fn leak(&self) -> f64 {
        (1.0 - self.tracked_population()).max(0.0)
    }

    pub(crate) fn vector(&self) -> [Complex64; 3] {
        [self.c1, self.c2, self.b]
    }

    pub(crate) fn from_vector(t: f64, y: [Complex64; 3]) -> Self {
        Self {
            t,
            c1: y[0],
            c2: y[1],
            b: y[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverTag {
    ClosedForm,
    PseudomodeOde,
    Volterra,
}

impl SolverTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolverTag::ClosedForm => "closed_form",
            SolverTag::PseudomodeOde => "pseudomode_ode",
            SolverTag::Volterra => "volterra",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub model: Model,
    pub init: InitialAmplitudes,
    pub samples: Vec<TrajectoryState>,
    pub solver: SolverTag,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn last(&self) -> &TrajectoryState {
        self.samples
            .last()
            .expect("trajectory has at least the initial sample")
    }

    /// Largest pointwise distance between the two trajectories' `(c1, c2, b)`
    /// at samples whose times coincide within `1e-9` of the time scale.
    /// Samples present in only one of them are skipped.
    pub fn sup_distance(&self, other: &Trajectory) -> f64 {
        let scale = self.last().t.max(1.0) * 1e-9;
        let mut j = 0;
        let mut worst = 0.0f64;
        for a in &self.samples {
            while j < other.samples.len() && other.samples[j].t < a.t - scale {
                j += 1;
            }
            if let Some(b) = other.samples.get(j) {
                if (b.t - a.t).abs() <= scale {
                    worst = worst
                        .max((a.c1 - b.c1).norm())
                        .max((a.c2 - b.c2).norm())
                        .max((a.b - b.b).norm());
                }
            }
        }
        worst
    }
}

/// Right-hand side of the pseudomode ODEs, written in the raw couplings.
pub fn rhs(model: &Model, state: &TrajectoryState) -> (Complex64, Complex64, Complex64) {
    let d = derivative(model, &state.vector());
    (d[0], d[1], d[2])
}

#[inline]
pub(crate) fn derivative(model: &Model, y: &[Complex64; 3]) -> [Complex64; 3] {
    let p = &model.params;
    let (g1, g2) = (p.coupling * p.alpha1, p.coupling * p.alpha2);
    let k = p.dipole;
    let [c1, c2, b] = *y;
    [
        -I * (g1 * b + k * c2),
        -I * (g2 * b + k * c1),
        -p.width * b - I * (g1 * c1 + g2 * c2),
    ]
}

/// `(t, 1 - |c1|^2 - |c2|^2 - |b|^2)` along the trajectory.
pub fn leak_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.samples.iter().map(|s| (s.t, s.leak())).collect()
}

/// A horizon long enough to read off asymptotic values:
/// `max(50 / lambda, 10 / |Re s_slow|)` where `s_slow` is the slowest
/// decaying characteristic root.
pub fn asymptotic_t_end(model: &Model) -> f64 {
    let base = 50.0 / model.lambda();
    match char_roots(model).slowest_decaying(SURVIVING_POLE_TOL) {
        Some(s) => base.max(10.0 / s.re.abs()),
        None => base,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::residue_coefficients;
    use crate::model::{bell_state, BellSign, SystemParams};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rhs_without_pseudomode_or_dipole() {
        let m = Model::new(SystemParams {
            width: 1.0,
            coupling: 3.0,
            alpha1: 0.5,
            alpha2: 2.0,
            dipole: 0.0,
            omega0: 0.0,
        })
        .unwrap();
        let s = TrajectoryState {
            t: 0.0,
            c1: c(0.3, 0.1),
            c2: c(-0.2, 0.4),
            b: c(0.0, 0.0),
        };
        let (d1, d2, db) = rhs(&m, &s);
        assert_eq!(d1, c(0.0, 0.0));
        assert_eq!(d2, c(0.0, 0.0));
        let want = -I * 3.0 * (0.5 * s.c1 + 2.0 * s.c2);
        assert_abs_diff_eq!((db - want).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn rhs_dark_state_only_rotates() {
        let m = Model::new(SystemParams::dimensionless(
            10.0,
            4.0,
            std::f64::consts::FRAC_1_SQRT_2,
        ))
        .unwrap();
        let init = bell_state(BellSign::Minus);
        let (d1, d2, db) = rhs(&m, &TrajectoryState::initial(&init));
        assert_abs_diff_eq!((d1 - (-I * 4.0 * init.c20)).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!((d2 - (-I * 4.0 * init.c10)).norm(), 0.0, epsilon = 1e-15);
        assert!(db.norm() < 1e-14);
    }

    #[test]
    fn rhs_matches_closed_form_derivative() {
        let m = Model::new(SystemParams {
            width: 1.0,
            coupling: 5.0,
            alpha1: 1.0,
            alpha2: 1.0,
            dipole: 3.0,
            omega0: 0.0,
        })
        .unwrap();
        let init = InitialAmplitudes::new(c(0.6, 0.0), c(0.0, 0.8));
        let sol = residue_coefficients(&m, &init).unwrap();
        let h = 1e-6;
        for t in [0.3, 1.1, 2.7] {
            let (a1, a2, ab) = sol.evolve(t + h);
            let (z1, z2, zb) = sol.evolve(t - h);
            let fd = [
                (a1 - z1) / (2.0 * h),
                (a2 - z2) / (2.0 * h),
                (ab - zb) / (2.0 * h),
            ];
            let (d1, d2, db) = rhs(&m, &sol.state(t));
            for (got, want) in [d1, d2, db].iter().zip(fd) {
                assert!((got - want).norm() < 1e-8, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn leak_starts_at_zero() {
        let m = Model::new(SystemParams::dimensionless(10.0, 2.0, 0.8)).unwrap();
        let init = bell_state(BellSign::Plus);
        let traj = integrate_pseudomode(&m, &init, 5.0, &IntegratorConfig::default()).unwrap();
        let leak = leak_series(&traj);
        assert_eq!(leak[0], (0.0, 0.0));
        for w in leak.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-8);
        }
    }

    #[test]
    fn asymptotic_horizon_tracks_slow_pole() {
        let fast = Model::new(SystemParams::dimensionless(10.0, 0.0, 0.8)).unwrap();
        assert_eq!(asymptotic_t_end(&fast), 50.0);
        let slow = Model::new(SystemParams::dimensionless(10.0, 20.0, 3f64.sqrt() / 2.0)).unwrap();
        assert!(asymptotic_t_end(&slow) > 100.0);
    }
}
