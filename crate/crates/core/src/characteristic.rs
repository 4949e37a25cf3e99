//! Closed-form solution through the Laplace-domain poles.
//!
//! Eliminating the pseudomode from the Laplace-transformed amplitude
//! equations leaves every amplitude as `N(s) / D(s)` with the monic cubic
//!
//! ```text
//! D(s) = s^3 + lambda s^2 + (R^2 + K^2) s + (K^2 lambda - 2i K R^2 r1 r2)
//! ```
//!
//! For simple roots `s_i` the inverse transform is the residue sum
//! `x(t) = sum_i N(s_i) / D'(s_i) e^{s_i t}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{SolverTag, Trajectory, TrajectoryState};
use crate::error::{Error, Result};
use crate::model::{InitialAmplitudes, Model};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative root spacing below which residues are not trusted.
pub const DEGENERACY_TOL: f64 = 1e-6;

/// Default `|Re s| / lambda` threshold for a pole on the imaginary axis.
pub const SURVIVING_POLE_TOL: f64 = 1e-8;

const NEWTON_STEPS: usize = 2;

/// Coefficients of the monic characteristic cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicCubic {
    /// Coefficient of `s^2` (the reservoir width).
    pub quadratic: f64,
    /// Coefficient of `s`: `R^2 + K^2`.
    pub linear: f64,
    /// `K^2 lambda - 2i K R^2 r1 r2`
    pub constant: Complex64,
    /// `lambda + R + |K|`, used to set tolerances.
    pub freq_scale: f64,
}

impl CharacteristicCubic {
    pub fn new(model: &Model) -> Self {
        let lambda = model.lambda();
        let k = model.dipole();
        let r = model.rabi();
        let (r1, r2) = (model.derived.r1, model.derived.r2);
        Self {
            quadratic: lambda,
            linear: r * r + k * k,
            constant: Complex64::new(k * k * lambda, -2.0 * k * r * r * r1 * r2),
            freq_scale: model.frequency_scale(),
        }
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        ((s + self.quadratic) * s + self.linear) * s + self.constant
    }

    pub fn derivative(&self, s: Complex64) -> Complex64 {
        (3.0 * s + 2.0 * self.quadratic) * s + self.linear
    }

    /// `max(1, lambda^3 + R^3 + |K|^3)`: the magnitude against which
    /// `|D(s_i)|` is judged.
    pub fn residual_scale(&self, model: &Model) -> f64 {
        let (l, r, k) = (model.lambda(), model.rabi(), model.dipole().abs());
        (l.powi(3) + r.powi(3) + k.powi(3)).max(1.0)
    }
}

/// `D(s)` for the given model.
pub fn char_poly_eval(model: &Model, s: Complex64) -> Complex64 {
    CharacteristicCubic::new(model).eval(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicRoots {
    /// Ordered by decreasing real part (slowest decay first).
    pub roots: [Complex64; 3],
    pub degenerate: bool,
    pub min_separation: f64,
    pub cubic: CharacteristicCubic,
}

impl CubicRoots {
    /// Relative Vieta residuals for the sum, pair-sum and product of the
    /// roots. Each is normalized by `max(|expected|, scale^k)` so that
    /// vanishing coefficients are judged on the problem's own scale.
    pub fn vieta_residuals(&self) -> [f64; 3] {
        let [a, b, c] = self.roots;
        let cu = &self.cubic;
        let scale = cu.freq_scale.max(f64::MIN_POSITIVE);
        let rel = |got: Complex64, want: Complex64, order: i32| {
            (got - want).norm() / want.norm().max(scale.powi(order))
        };
        [
            rel(a + b + c, Complex64::new(-cu.quadratic, 0.0), 1),
            rel(a * b + a * c + b * c, Complex64::new(cu.linear, 0.0), 2),
            rel(a * b * c, -cu.constant, 3),
        ]
    }

    /// `|D(s_i)|` for every root.
    pub fn residuals(&self) -> [f64; 3] {
        self.roots.map(|s| self.cubic.eval(s).norm())
    }

    /// The slowest strictly decaying root, ignoring any on the imaginary axis.
    pub fn slowest_decaying(&self, tol: f64) -> Option<Complex64> {
        let cut = tol * self.cubic.quadratic;
        self.roots
            .iter()
            .copied()
            .filter(|s| s.re < -cut)
            .max_by(|a, b| a.re.total_cmp(&b.re))
    }
}

/// Roots of `s^3 + b s^2 + c s + d` by Cardano's formula in complex
/// arithmetic, unpolished.
fn cardano(b: Complex64, c: Complex64, d: Complex64) -> [Complex64; 3] {
    let shift = b / 3.0;
    // Depressed cubic x^3 + p x + q with s = x - b/3.
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    // Take the larger of -q/2 ± sqrt(disc) to avoid cancellation.
    let plus = -q / 2.0 + disc;
    let minus = -q / 2.0 - disc;
    let big = if plus.norm() >= minus.norm() {
        plus
    } else {
        minus
    };
    if big.norm() == 0.0 {
        // p = q = 0: triple root.
        return [-shift; 3];
    }
    let u = big.cbrt();
    let omega = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let mut out = [Complex64::default(); 3];
    let mut uk = u;
    for slot in out.iter_mut() {
        *slot = uk - p / (3.0 * uk) - shift;
        uk *= omega;
    }
    out
}

pub fn char_roots(model: &Model) -> CubicRoots {
    let cubic = CharacteristicCubic::new(model);
    let polish = |s: &mut Complex64| {
        for _ in 0..NEWTON_STEPS {
            let dp = cubic.derivative(*s);
            if dp.norm() == 0.0 {
                break;
            }
            let next = *s - cubic.eval(*s) / dp;
            if next.is_finite() {
                *s = next;
            }
        }
    };
    let first = cardano(
        Complex64::new(cubic.quadratic, 0.0),
        Complex64::new(cubic.linear, 0.0),
        cubic.constant,
    );
    // Polish the most isolated root, then deflate. Newton stalls on a close
    // pair, but the deflated quadratic keeps its sum and product exact.
    let isolation = |i: usize| {
        (0..3)
            .filter(|&j| j != i)
            .map(|j| (first[i] - first[j]).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let iso = (0..3)
        .max_by(|&i, &j| isolation(i).total_cmp(&isolation(j)))
        .unwrap_or(0);
    let mut s3 = first[iso];
    polish(&mut s3);
    let sum = -cubic.quadratic - s3;
    let prod = cubic.linear - s3 * sum;
    let disc = (sum * sum - 4.0 * prod).sqrt();
    let big = (if (sum.conj() * disc).re >= 0.0 {
        sum + disc
    } else {
        sum - disc
    }) / 2.0;
    let (mut s1, mut s2) = if big.norm() == 0.0 {
        (big, big)
    } else {
        (big, prod / big)
    };
    if (s1 - s2).norm() >= DEGENERACY_TOL * cubic.freq_scale {
        polish(&mut s1);
        polish(&mut s2);
    }
    let mut roots = [s1, s2, s3];
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));

    let min_separation = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| (roots[i] - roots[j]).norm())
        .fold(f64::INFINITY, f64::min);
    CubicRoots {
        roots,
        degenerate: min_separation < DEGENERACY_TOL * cubic.freq_scale,
        min_separation,
        cubic,
    }
}

/// The unique root with `|Re s| <= tol * lambda`, if exactly one exists.
pub fn surviving_pole(roots: &CubicRoots, tol: f64) -> Option<Complex64> {
    let cut = tol * roots.cubic.quadratic;
    let mut on_axis = roots.roots.iter().filter(|s| s.re.abs() <= cut);
    match (on_axis.next(), on_axis.next()) {
        (Some(&s), None) => Some(s),
        _ => None,
    }
}

/// Residue-sum representation `x(t) = sum_i coeff_i e^{s_i t}` for each of
/// `c1`, `c2` and `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidueSolution {
    pub roots: CubicRoots,
    pub coeff_c1: [Complex64; 3],
    pub coeff_c2: [Complex64; 3],
    pub coeff_b: [Complex64; 3],
}

pub fn residue_coefficients(model: &Model, init: &InitialAmplitudes) -> Result<ResidueSolution> {
    let roots = char_roots(model);
    if roots.degenerate {
        return Err(Error::DegenerateRoots {
            min_separation: roots.min_separation,
        });
    }
    let lambda = model.lambda();
    let k = model.dipole();
    let r = model.rabi();
    let (r1, r2) = (model.derived.r1, model.derived.r2);
    let (c10, c20) = (init.c10, init.c20);
    let r2_sq = r * r;

    let exchange = |s: Complex64| I * k * (s + lambda) + r2_sq * r1 * r2;
    let n1 = |s: Complex64| c10 * (s * (s + lambda) + r2_sq * r2 * r2) - c20 * exchange(s);
    let n2 = |s: Complex64| c20 * (s * (s + lambda) + r2_sq * r1 * r1) - c10 * exchange(s);
    let nb = |s: Complex64| -I * r * ((r1 * c10 + r2 * c20) * s - I * k * (r1 * c20 + r2 * c10));

    let s = roots.roots;
    let mut coeff_c1 = [Complex64::default(); 3];
    let mut coeff_c2 = [Complex64::default(); 3];
    let mut coeff_b = [Complex64::default(); 3];
    for i in 0..3 {
        // D'(s_i) for a monic cubic with simple roots.
        let dprime = (s[i] - s[(i + 1) % 3]) * (s[i] - s[(i + 2) % 3]);
        coeff_c1[i] = n1(s[i]) / dprime;
        coeff_c2[i] = n2(s[i]) / dprime;
        coeff_b[i] = nb(s[i]) / dprime;
    }
    Ok(ResidueSolution {
        roots,
        coeff_c1,
        coeff_c2,
        coeff_b,
    })
}

impl ResidueSolution {
    /// `(c1, c2, b)` at time `t`.
    pub fn evolve(&self, t: f64) -> (Complex64, Complex64, Complex64) {
        let mut out = (
            Complex64::default(),
            Complex64::default(),
            Complex64::default(),
        );
        for i in 0..3 {
            let e = (self.roots.roots[i] * t).exp();
            out.0 += self.coeff_c1[i] * e;
            out.1 += self.coeff_c2[i] * e;
            out.2 += self.coeff_b[i] * e;
        }
        out
    }

    pub fn state(&self, t: f64) -> TrajectoryState {
        let (c1, c2, b) = self.evolve(t);
        TrajectoryState { t, c1, c2, b }
    }

    /// Samples at `times` (a leading `t = 0` sample is inserted if absent).
    pub fn trajectory(&self, model: &Model, init: &InitialAmplitudes, times: &[f64]) -> Trajectory {
        let mut samples = Vec::with_capacity(times.len() + 1);
        samples.push(TrajectoryState::initial(init));
        samples.extend(times.iter().filter(|&&t| t > 0.0).map(|&t| self.state(t)));
        Trajectory {
            model: *model,
            init: *init,
            samples,
            solver: SolverTag::ClosedForm,
        }
    }
}

pub fn evolve_closed_form(sol: &ResidueSolution, t: f64) -> (Complex64, Complex64, Complex64) {
    sol.evolve(t)
}
