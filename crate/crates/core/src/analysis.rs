//! Observables and long-time behaviour.
//!
//! In the single-excitation sector the reduced atomic state is an incoherent
//! mixture of one pure entangled branch and `|gg>`, so the concurrence
//! reduces to `2 |c1| |c2|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::characteristic::{char_roots, SURVIVING_POLE_TOL};
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::model::{InitialAmplitudes, Model};

/// Slack allowed on `|c1|^2 + |c2|^2 <= 1`.
pub const POPULATION_TOL: f64 = 1e-9;

/// `|r1 - r2|` at or below which the couplings count as equal.
pub const EQUAL_COUPLING_TOL: f64 = 1e-12;

fn check_population(c1: Complex64, c2: Complex64) -> Result<f64> {
    let population = c1.norm_sqr() + c2.norm_sqr();
    if population > 1.0 + POPULATION_TOL || !population.is_finite() {
        return Err(Error::PopulationExceedsUnity { population });
    }
    Ok(population)
}

/// Two-atom density matrix in the basis `{|ee>, |eg>, |ge>, |gg>}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomicDensityMatrix(pub [[Complex64; 4]; 4]);

impl AtomicDensityMatrix {
    pub fn entries(&self) -> &[[Complex64; 4]; 4] {
        &self.0
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..4).all(|i| (0..4).all(|j| (self.0[i][j] - self.0[j][i].conj()).norm() <= tol))
    }
}

pub fn density_matrix(c1: Complex64, c2: Complex64) -> Result<AtomicDensityMatrix> {
    let population = check_population(c1, c2)?;
    let z = Complex64::default();
    let mut m = [[z; 4]; 4];
    m[1][1] = Complex64::from(c1.norm_sqr());
    m[1][2] = c1 * c2.conj();
    m[2][1] = c2 * c1.conj();
    m[2][2] = Complex64::from(c2.norm_sqr());
    m[3][3] = Complex64::from((1.0 - population).max(0.0));
    Ok(AtomicDensityMatrix(m))
}

/// `C = 2 |c1| |c2|`, in `[0, 1]`.
pub fn concurrence(c1: Complex64, c2: Complex64) -> Result<f64> {
    check_population(c1, c2)?;
    Ok((2.0 * c1.norm() * c2.norm()).min(1.0))
}

/// `(t, C(t))` for every sample.
pub fn concurrence_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.samples
        .iter()
        .map(|s| (s.t, (2.0 * s.c1.norm() * s.c2.norm()).min(1.0)))
        .collect()
}

/// First time `C` drops below `threshold` and then stays below it for at
/// least `window` (typically `1 / lambda`). Crossings too close to the end
/// of the series to be confirmed are ignored.
pub fn disentanglement_time(series: &[(f64, f64)], threshold: f64, window: f64) -> Option<f64> {
    let t_last = series.last()?.0;
    let mut candidate: Option<f64> = None;
    for &(t, c) in series {
        if c < threshold {
            let start = *candidate.get_or_insert(t);
            if t - start >= window {
                return Some(start);
            }
        } else {
            candidate = None;
        }
    }
    // A run that reaches the end of the series is only confirmed if it
    // already spans the window.
    candidate.filter(|&start| t_last - start >= window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `alpha1 = alpha2`: the antisymmetric state is dark for any `K`.
    EqualCoupling,
    /// `K = 0`: the state `r2|eg> - r1|ge>` is dark.
    ZeroK,
    Decaying,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::EqualCoupling => "equal_coupling",
            Regime::ZeroK => "zero_K",
            Regime::Decaying => "decaying",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateVerdict {
    pub steady: bool,
    pub surviving_pole: Option<Complex64>,
    pub asymptotic_concurrence: f64,
    pub regime: Regime,
}

/// Classifies the long-time behaviour. A steady state exists iff `K = 0` or
/// the couplings are equal; the surviving pole is the characteristic root
/// closest to the predicted point on the imaginary axis (`iK` or `0`).
pub fn steady_state_verdict(model: &Model, init: &InitialAmplitudes) -> SteadyStateVerdict {
    let (r1, r2) = (model.derived.r1, model.derived.r2);
    let k = model.dipole();
    let (c10, c20) = (init.c10, init.c20);

    let (regime, predicted, c_inf) = if (r1 - r2).abs() <= EQUAL_COUPLING_TOL {
        let c_inf = (c10 - c20).norm_sqr() / 2.0;
        (Regime::EqualCoupling, Complex64::new(0.0, k), c_inf)
    } else if k == 0.0 {
        // Projection onto the dark state r2|eg> - r1|ge>.
        let dark = r2 * c10 - r1 * c20;
        (
            Regime::ZeroK,
            Complex64::default(),
            2.0 * r1 * r2 * dark.norm_sqr(),
        )
    } else {
        return SteadyStateVerdict {
            steady: false,
            surviving_pole: None,
            asymptotic_concurrence: 0.0,
            regime: Regime::Decaying,
        };
    };

    let roots = char_roots(model);
    let pole = roots
        .roots
        .iter()
        .copied()
        .min_by(|a, b| (a - predicted).norm().total_cmp(&(b - predicted).norm()))
        .expect("three roots");
    debug_assert!(
        pole.re.abs() <= SURVIVING_POLE_TOL * model.lambda().max(model.frequency_scale()),
        "predicted steady pole {predicted} not found among {:?}",
        roots.roots
    );
    SteadyStateVerdict {
        steady: true,
        surviving_pole: Some(pole),
        asymptotic_concurrence: c_inf.min(1.0),
        regime,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characteristic::surviving_pole;
    use crate::model::{bell_state, BellSign, SystemParams};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn density_matrix_examples() {
        let rho = density_matrix(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(rho.0[1][1], c(1.0, 0.0));
        assert_eq!(rho.0[3][3], c(0.0, 0.0));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let rho = density_matrix(c(s, 0.0), c(-s, 0.0)).unwrap();
        assert_abs_diff_eq!(rho.0[1][2].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.0[2][2].re, 0.5, epsilon = 1e-15);

        let rho = density_matrix(c(0.6, 0.0), c(0.0, 0.3)).unwrap();
        assert_abs_diff_eq!(rho.0[3][3].re, 0.55, epsilon = 1e-15);
        assert_abs_diff_eq!((rho.0[1][2] - c(0.0, -0.18)).norm(), 0.0, epsilon = 1e-15);
        assert!(rho.is_hermitian(0.0));
        assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
        assert!(rho.0[0].iter().all(|z| *z == c(0.0, 0.0)));
    }

    #[test]
    fn over_populated_rejected() {
        assert!(matches!(
            density_matrix(c(1.0, 0.0), c(0.1, 0.0)),
            Err(Error::PopulationExceedsUnity { .. })
        ));
        assert!(concurrence(c(0.9, 0.0), c(0.9, 0.0)).is_err());
    }

    #[test]
    fn concurrence_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(
            concurrence(c(s, 0.0), c(s, 0.0)).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_eq!(concurrence(c(1.0, 0.0), c(0.0, 0.0)).unwrap(), 0.0);
        assert_abs_diff_eq!(
            concurrence(c(0.6, 0.0), c(0.0, 0.3)).unwrap(),
            0.36,
            epsilon = 1e-15
        );
    }

    #[test]
    fn debounced_crossing() {
        let series: Vec<(f64, f64)> = (0..=100)
            .map(|i| {
                let t = i as f64 * 0.1;
                // Dips below 0.1 briefly at t = 2, settles below from t = 5.
                let c = if (2.0..2.3).contains(&t) || t >= 5.0 {
                    0.05
                } else {
                    0.5
                };
                (t, c)
            })
            .collect();
        let got = disentanglement_time(&series, 0.1, 1.0).unwrap();
        assert_abs_diff_eq!(got, 5.0, epsilon = 1e-12);

        let flat: Vec<(f64, f64)> = (0..50).map(|i| (i as f64, 1.0)).collect();
        assert_eq!(disentanglement_time(&flat, 0.1, 1.0), None);
        // Crossing in the last half window cannot be confirmed.
        let late: Vec<(f64, f64)> = (0..=10)
            .map(|i| (i as f64 * 0.1, if i == 10 { 0.0 } else { 1.0 }))
            .collect();
        assert_eq!(disentanglement_time(&late, 0.1, 1.0), None);
    }

    fn reference(k: f64, r1: f64) -> Model {
        Model::new(SystemParams::dimensionless(10.0, k, r1)).unwrap()
    }

    #[test]
    fn verdict_equal_coupling() {
        let m = Model::new(SystemParams {
            width: 1.0,
            coupling: 4.0,
            alpha1: 0.7,
            alpha2: 0.7,
            dipole: 3.0,
            omega0: 0.0,
        })
        .unwrap();
        let v = steady_state_verdict(&m, &InitialAmplitudes::new(c(1.0, 0.0), c(0.0, 0.0)));
        assert!(v.steady);
        assert_eq!(v.regime, Regime::EqualCoupling);
        assert_abs_diff_eq!(v.asymptotic_concurrence, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            (v.surviving_pole.unwrap() - c(0.0, 3.0)).norm(),
            0.0,
            epsilon = 1e-9
        );

        let v = steady_state_verdict(&m, &bell_state(BellSign::Minus));
        assert_abs_diff_eq!(v.asymptotic_concurrence, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn verdict_zero_k() {
        let m = reference(0.0, 3f64.sqrt() / 2.0);
        let v = steady_state_verdict(&m, &bell_state(BellSign::Minus));
        assert!(v.steady);
        assert_eq!(v.regime, Regime::ZeroK);
        let want = (2.0 * 3f64.sqrt() + 3.0) / 8.0;
        assert_abs_diff_eq!(v.asymptotic_concurrence, want, epsilon = 1e-15);
        assert_abs_diff_eq!(v.asymptotic_concurrence, 0.808013, epsilon = 1e-6);
        assert_eq!(
            v.surviving_pole,
            surviving_pole(&char_roots(&m), SURVIVING_POLE_TOL)
        );
    }

    #[test]
    fn verdict_decaying() {
        let m = reference(2.0, 3f64.sqrt() / 2.0);
        let v = steady_state_verdict(&m, &bell_state(BellSign::Minus));
        assert!(!v.steady);
        assert_eq!(v.regime, Regime::Decaying);
        assert_eq!(v.asymptotic_concurrence, 0.0);
        assert_eq!(v.surviving_pole, None);
    }
}
