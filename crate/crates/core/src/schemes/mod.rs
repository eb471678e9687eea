//! Time stepping: Glassey's linearly implicit scheme and the fully implicit
//! DVDM scheme, plus the step-size advisor for DVDM solvability.

mod dvdm;
mod glassey;
mod stepsize;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dvdm::{
    dvdm_first_step, dvdm_full_step, dvdm_residual_fen, dvdm_residual_with_potential, dvdm_step,
    pack, simplified_newton, unpack, DvdmForm, DvdmStepper, NewtonOutcome,
};
pub use glassey::{
    glassey_first_n, glassey_recover_v, glassey_step_e, glassey_step_n, GlasseyStepper,
};
pub use stepsize::{stepsize_thresholds, StepSizeThresholds};

pub const DEFAULT_NEWTON_EPS: f64 = 1e-8;
pub const DEFAULT_NEWTON_MAX_ITER: usize = 50;

/// One time level of a discrete solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub e: Vec<Complex64>,
    pub n: Vec<f64>,
    pub v: Option<Vec<f64>>,
    pub step: usize,
    pub t: f64,
}

/// How Glassey's scheme builds the first density level `N¹`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FirstStep {
    /// `N⁰ + dt N_t⁰`.
    G,
    /// Second-order Taylor step.
    Gp,
    /// Taylor step shifted so the mean of `N` is unchanged.
    Gn,
}

/// Scheme choice as exposed to configs and the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    G,
    Gp,
    Gn,
    Dvdm,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] = [SchemeKind::G, SchemeKind::Gp, SchemeKind::Gn, SchemeKind::Dvdm];

    pub fn is_glassey(self) -> bool {
        !matches!(self, SchemeKind::Dvdm)
    }

    /// First density level used by Glassey, or by the DVDM predictor.
    pub fn first_step(self) -> FirstStep {
        match self {
            SchemeKind::G => FirstStep::G,
            SchemeKind::Gp => FirstStep::Gp,
            SchemeKind::Gn | SchemeKind::Dvdm => FirstStep::Gn,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SchemeKind::G => "G",
            SchemeKind::Gp => "GP",
            SchemeKind::Gn => "GN",
            SchemeKind::Dvdm => "D",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g" => Ok(SchemeKind::G),
            "gp" => Ok(SchemeKind::Gp),
            "gn" => Ok(SchemeKind::Gn),
            "d" | "dvdm" => Ok(SchemeKind::Dvdm),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: SchemeKind,
    pub dt: f64,
    pub newton_eps: f64,
    pub newton_max_iter: usize,
}

impl SchemeConfig {
    pub fn new(scheme: SchemeKind, dt: f64) -> Result<Self> {
        Self {
            scheme,
            dt,
            newton_eps: DEFAULT_NEWTON_EPS,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
        }
        .validated()
    }

    pub fn with_newton(mut self, eps: f64, max_iter: usize) -> Result<Self> {
        self.newton_eps = eps;
        self.newton_max_iter = max_iter;
        self.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.newton_eps.is_finite() && self.newton_eps > 0.0) {
            return Err(Error::Config(format!(
                "newton_eps must be positive, got {}",
                self.newton_eps
            )));
        }
        if self.newton_max_iter == 0 {
            return Err(Error::Config("newton_max_iter must be at least 1".into()));
        }
        Ok(self)
    }
}
