//! Physical parameters, derived dimensionless quantities and initial states.
//!
//! All amplitudes live in the frame rotating at the common atomic frequency,
//! so `omega0` is carried for bookkeeping but never enters the dynamics.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|c10|^2 + |c20|^2 - 1` accepted by [`NormalizeMode::Strict`].
pub const NORM_TOL: f64 = 1e-10;

/// Raw physical inputs.
///
/// `coupling` is the Lorentzian amplitude `W` (kernel `W^2 e^{-lambda t}`),
/// `alpha1`/`alpha2` the relative couplings of each atom and `dipole` the
/// static dipole-dipole exchange `K`. All frequencies share one unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    #[serde(rename = "lambda")]
    pub width: f64,
    #[serde(rename = "W")]
    pub coupling: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    #[serde(rename = "K")]
    pub dipole: f64,
    #[serde(default)]
    pub omega0: f64,
}

impl SystemParams {
    /// Parameters in units of the reservoir width (`lambda = 1`), given the
    /// dimensionless Rabi frequency, dipole strength and the first relative
    /// coupling `r1`.
    pub fn dimensionless(rabi_ratio: f64, dipole_ratio: f64, r1: f64) -> Self {
        let r2 = (1.0 - r1 * r1).max(0.0).sqrt();
        Self {
            width: 1.0,
            coupling: rabi_ratio,
            alpha1: r1,
            alpha2: r2,
            dipole: dipole_ratio,
            omega0: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn finite(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParam {
                    field,
                    reason: format!("must be finite, got {v}"),
                })
            }
        }
        finite("lambda", self.width)?;
        finite("W", self.coupling)?;
        finite("alpha1", self.alpha1)?;
        finite("alpha2", self.alpha2)?;
        finite("K", self.dipole)?;
        finite("omega0", self.omega0)?;
        if self.width <= 0.0 {
            return Err(Error::InvalidParam {
                field: "lambda",
                reason: format!("must be > 0, got {}", self.width),
            });
        }
        for (field, v) in [
            ("W", self.coupling),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must be >= 0, got {v}"),
                });
            }
        }
        if self.coupling == 0.0 || (self.alpha1 == 0.0 && self.alpha2 == 0.0) {
            return Err(Error::NoCoupling);
        }
        Ok(())
    }
}

/// Quantities derived from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// Vacuum Rabi frequency `R = W sqrt(alpha1^2 + alpha2^2)`.
    pub rabi: f64,
    pub r1: f64,
    pub r2: f64,
    /// `r1 / r2`; absent when atom 2 is uncoupled.
    pub alpha_ratio: Option<f64>,
    /// `K / lambda`
    pub dipole_ratio: f64,
    /// `R / lambda`
    pub rabi_ratio: f64,
}

pub fn derive(params: &SystemParams) -> Result<DerivedParams> {
    params.validate()?;
    let norm = params.alpha1.hypot(params.alpha2);
    let r1 = params.alpha1 / norm;
    let r2 = params.alpha2 / norm;
    let rabi = params.coupling * norm;
    Ok(DerivedParams {
        rabi,
        r1,
        r2,
        alpha_ratio: (r2 != 0.0).then(|| r1 / r2),
        dipole_ratio: params.dipole / params.width,
        rabi_ratio: rabi / params.width,
    })
}

/// Validated parameters together with their derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub params: SystemParams,
    pub derived: DerivedParams,
}

impl Model {
    pub fn new(params: SystemParams) -> Result<Self> {
        Ok(Self {
            derived: derive(&params)?,
            params,
        })
    }

    #[inline]
    pub fn lambda(&self) -> f64 {
        self.params.width
    }

    #[inline]
    pub fn dipole(&self) -> f64 {
        self.params.dipole
    }

    #[inline]
    pub fn rabi(&self) -> f64 {
        self.derived.rabi
    }

    /// `lambda + R + |K|`, the natural frequency scale of the problem.
    pub fn frequency_scale(&self) -> f64 {
        self.lambda() + self.rabi() + self.dipole().abs()
    }

    /// Same model with the two atoms relabelled.
    pub fn swapped(&self) -> Result<Self> {
        let mut p = self.params;
        std::mem::swap(&mut p.alpha1, &mut p.alpha2);
        Self::new(p)
    }
}

/// Amplitudes on `|e>|g>` and `|g>|e>`; the field starts in vacuum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialAmplitudes {
    pub c10: Complex64,
    pub c20: Complex64,
}

impl InitialAmplitudes {
    pub fn new(c10: Complex64, c20: Complex64) -> Self {
        Self { c10, c20 }
    }

    pub fn norm_sq(&self) -> f64 {
        self.c10.norm_sqr() + self.c20.norm_sqr()
    }

    /// Multiply both amplitudes by `e^{i phase}`.
    pub fn with_phase(&self, phase: f64) -> Self {
        let u = Complex64::from_polar(1.0, phase);
        Self::new(self.c10 * u, self.c20 * u)
    }

    pub fn conj(&self) -> Self {
        Self::new(self.c10.conj(), self.c20.conj())
    }

    pub fn swapped(&self) -> Self {
        Self::new(self.c20, self.c10)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellSign {
    Plus,
    Minus,
}

/// `(|e>|g> ± |g>|e>) / sqrt(2)`
pub fn bell_state(sign: BellSign) -> InitialAmplitudes {
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    match sign {
        BellSign::Plus => InitialAmplitudes::new(a, a),
        BellSign::Minus => InitialAmplitudes::new(a, -a),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizeMode {
    #[default]
    Strict,
    Renormalize,
}

pub fn validate_initial(init: InitialAmplitudes, mode: NormalizeMode) -> Result<InitialAmplitudes> {
    let norm_sq = init.norm_sq();
    if !norm_sq.is_finite() {
        return Err(Error::InvalidParam {
            field: "init",
            reason: "amplitudes must be finite".into(),
        });
    }
    if norm_sq == 0.0 {
        return Err(Error::ZeroInitialState);
    }
    match mode {
        NormalizeMode::Strict if (norm_sq - 1.0).abs() > NORM_TOL => {
            Err(Error::NotNormalized { norm_sq })
        }
        NormalizeMode::Strict => Ok(init),
        NormalizeMode::Renormalize => {
            let s = norm_sq.sqrt().recip();
            Ok(InitialAmplitudes::new(init.c10 * s, init.c20 * s))
        }
    }
}
