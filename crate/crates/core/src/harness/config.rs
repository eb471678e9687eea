use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{resolve_soliton, InitialVariant, SolitonParams};
use crate::grid::Grid;
use crate::schemes::{DvdmForm, SchemeConfig, SchemeKind, DEFAULT_NEWTON_EPS, DEFAULT_NEWTON_MAX_ITER};

/// Final time of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Horizon {
    /// One spatial period of travel, `L / |v|`.
    PeriodTime,
    /// Unit distance of travel, `1 / |v|`.
    UnitTime,
    /// A multiple of the period time.
    Periods(f64),
    /// An explicit time.
    Time(f64),
}

impl Horizon {
    pub fn resolve(self, p: &SolitonParams) -> f64 {
        match self {
            Horizon::PeriodTime => p.period_time(),
            Horizon::UnitTime => p.unit_time(),
            Horizon::Periods(k) => k * p.period_time(),
            Horizon::Time(t) => t,
        }
    }
}

impl FromStr for Horizon {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let bad = || Error::Config(format!("cannot parse horizon '{s}'"));
        let nonneg = |x: f64| {
            if x.is_finite() && x >= 0.0 {
                Ok(x)
            } else {
                Err(Error::Config(format!("horizon must be a nonnegative number, got '{s}'")))
            }
        };
        match t.as_str() {
            "tl" => Ok(Horizon::PeriodTime),
            "t1" => Ok(Horizon::UnitTime),
            _ => {
                if let Some(k) = t.strip_suffix("tl") {
                    let k = k.trim().trim_end_matches('*');
                    return Ok(Horizon::Periods(nonneg(k.parse().map_err(|_| bad())?)?));
                }
                Ok(Horizon::Time(nonneg(t.parse().map_err(|_| bad())?)?))
            }
        }
    }
}

impl TryFrom<String> for Horizon {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Horizon> for String {
    fn from(h: Horizon) -> String {
        h.to_string()
    }
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::PeriodTime => f.write_str("tl"),
            Horizon::UnitTime => f.write_str("t1"),
            Horizon::Periods(k) => write!(f, "{k}tl"),
            Horizon::Time(t) => write!(f, "{t}"),
        }
    }
}

fn default_l() -> f64 {
    20.0
}

fn default_m() -> i32 {
    1
}

fn default_newton_eps() -> f64 {
    DEFAULT_NEWTON_EPS
}

fn default_newton_max_iter() -> usize {
    DEFAULT_NEWTON_MAX_ITER
}

fn default_horizon() -> Horizon {
    Horizon::PeriodTime
}

fn default_form() -> DvdmForm {
    DvdmForm::Eliminated
}

/// One reproducible run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scheme: SchemeKind,
    pub e_max: f64,
    #[serde(default = "default_l")]
    pub l: f64,
    #[serde(default = "default_m")]
    pub m: i32,
    pub dt: f64,
    /// Spatial step; `dt` when absent.
    #[serde(default)]
    pub dx: Option<f64>,
    #[serde(default = "default_horizon")]
    pub horizon: Horizon,
    #[serde(default)]
    pub collision: bool,
    #[serde(default)]
    pub collision_variant: u8,
    #[serde(default = "default_newton_eps")]
    pub newton_eps: f64,
    #[serde(default = "default_newton_max_iter")]
    pub newton_max_iter: usize,
    #[serde(default = "default_form")]
    pub dvdm_form: DvdmForm,
}

impl ExperimentConfig {
    /// Single soliton over one period with `dx = dt`.
    pub fn new(scheme: SchemeKind, e_max: f64, dt: f64) -> Self {
        Self {
            scheme,
            e_max,
            l: default_l(),
            m: default_m(),
            dt,
            dx: None,
            horizon: default_horizon(),
            collision: false,
            collision_variant: 0,
            newton_eps: DEFAULT_NEWTON_EPS,
            newton_max_iter: DEFAULT_NEWTON_MAX_ITER,
            dvdm_form: DvdmForm::Eliminated,
        }
    }

    pub fn with_horizon(mut self, horizon: Horizon) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn with_collision(mut self, variant: u8) -> Self {
        self.collision = true;
        self.collision_variant = variant;
        self
    }

    pub fn dx(&self) -> f64 {
        self.dx.unwrap_or(self.dt)
    }

    pub fn domain_multiplier(&self) -> usize {
        if self.collision {
            8
        } else {
            1
        }
    }

    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        SchemeConfig::new(self.scheme, self.dt)?.with_newton(self.newton_eps, self.newton_max_iter)
    }

    pub fn initial_variant(&self) -> Result<InitialVariant> {
        match (self.collision, self.collision_variant) {
            (false, _) => Ok(InitialVariant::Single),
            (true, 0) => Ok(InitialVariant::Collision0),
            (true, 1) => Ok(InitialVariant::Collision1),
            (true, v) => Err(Error::Config(format!("collision variant must be 0 or 1, got {v}"))),
        }
    }

    /// Check the config and resolve everything a run needs.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        let scheme = self.scheme_config()?;
        let variant = self.initial_variant()?;
        let dx = self.dx();
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::Config(format!("dx must be positive, got {dx}")));
        }
        let soliton = resolve_soliton(self.e_max, self.l, self.m).map_err(|e| Error::Config(e.to_string()))?;
        let mult = self.domain_multiplier();
        let cells = (mult as f64 * self.l / dx).round();
        if cells < 3.0 * mult as f64 || cells > 1e8 {
            return Err(Error::Config(format!("dx = {dx} gives an unusable cell count {cells}")));
        }
        let k = cells as usize;
        if !k.is_multiple_of(mult) {
            return Err(Error::Config(format!(
                "{k} cells do not split into {mult} equal periods; choose dx dividing L"
            )));
        }
        let grid = Grid::new(k, mult as f64 * self.l)?;
        let t_end = self.horizon.resolve(&soliton);
        let steps = (t_end / self.dt).round();
        if !(steps.is_finite() && steps <= 1e9) {
            return Err(Error::Config(format!("horizon {t_end} needs too many steps")));
        }
        Ok(ResolvedConfig {
            scheme,
            soliton,
            grid,
            variant,
            t_end,
            steps: steps as usize,
        })
    }
}

/// Everything derived from an [`ExperimentConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedConfig {
    pub scheme: SchemeConfig,
    pub soliton: SolitonParams,
    pub grid: Grid,
    pub variant: InitialVariant,
    pub t_end: f64,
    pub steps: usize,
}
