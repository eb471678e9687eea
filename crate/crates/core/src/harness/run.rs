use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ResolvedConfig};
use crate::error::{Error, Result};
use crate::exact::{sample_collision_initial, InitialData, InitialVariant, Soliton, SolitonParams};
use crate::grid::{l2_norm_sq, second_diff_unchecked, Grid};
use crate::invariants::{bound_monitor, dvdm_energy_parts, field_distance, glassey_energy_parts};
use crate::linalg::PoissonSolver;
use crate::schemes::{DvdmForm, DvdmStepper, GlasseyStepper, SchemeConfig, State};

/// Seconds spent in `f`. Browsers give wasm no monotonic clock, so there
/// the time is reported as zero.
fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    #[cfg(not(target_family = "wasm"))]
    {
        let start = std::time::Instant::now();
        let out = f();
        (out, start.elapsed().as_secs_f64())
    }
    #[cfg(target_family = "wasm")]
    {
        (f(), 0.0)
    }
}

/// Either scheme behind one stepping interface.
#[derive(Debug, Clone)]
pub enum Trajectory {
    Glassey(Box<GlasseyStepper>),
    Dvdm(Box<DvdmStepper>),
}

impl Trajectory {
    pub fn new(init: &InitialData, cfg: &SchemeConfig, form: DvdmForm) -> Result<Self> {
        Ok(if cfg.scheme.is_glassey() {
            Trajectory::Glassey(Box::new(GlasseyStepper::new(init, cfg)?))
        } else {
            Trajectory::Dvdm(Box::new(DvdmStepper::new(init, cfg, form)?))
        })
    }

    pub fn advance(&mut self) -> Result<()> {
        match self {
            Trajectory::Glassey(s) => s.advance(),
            Trajectory::Dvdm(s) => s.advance(),
        }
    }

    pub fn step(&self) -> usize {
        match self {
            Trajectory::Glassey(s) => s.step(),
            Trajectory::Dvdm(s) => s.step(),
        }
    }

    pub fn e(&self) -> &[Complex64] {
        match self {
            Trajectory::Glassey(s) => s.e(),
            Trajectory::Dvdm(s) => &s.state().e,
        }
    }

    pub fn n(&self) -> &[f64] {
        match self {
            Trajectory::Glassey(s) => s.n(),
            Trajectory::Dvdm(s) => &s.state().n,
        }
    }

    pub fn newton_iterations(&self) -> Option<usize> {
        match self {
            Trajectory::Glassey(_) => None,
            Trajectory::Dvdm(s) => Some(s.last_iterations()),
        }
    }

    pub fn state(&self) -> State {
        match self {
            Trajectory::Glassey(s) => s.state(),
            Trajectory::Dvdm(s) => s.state().clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Completed,
    Diverged,
}

/// Per-level diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub step: usize,
    pub t: f64,
    pub norm: f64,
    pub energy: f64,
    pub err_e: Option<f64>,
    pub err_n: Option<f64>,
    pub newton_iters: Option<usize>,
    pub bound_monitor: [f64; 5],
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub soliton: SolitonParams,
    pub k: usize,
    pub steps: usize,
    pub status: RunStatus,
    /// Reference energy: the first two-level energy for Glassey, the
    /// initial energy for DVDM.
    pub e0_energy: f64,
    pub d_energy: f64,
    pub d_norm: f64,
    pub eps_e: f64,
    pub eps_n: f64,
    /// Seconds spent inside stepping calls.
    pub wall_time: f64,
    pub series: Vec<SeriesRow>,
    pub seam_jump: Option<f64>,
    /// Largest least-squares defect of the recovered Glassey potential.
    pub max_v_residual: Option<f64>,
    pub failure: Option<String>,
    pub newton_history: Option<Vec<f64>>,
}

impl RunReport {
    pub fn diverged(&self) -> bool {
        self.status == RunStatus::Diverged
    }

    pub fn newton_iterations(&self) -> usize {
        self.series.iter().filter_map(|r| r.newton_iters).sum()
    }
}

/// Build the initial data for a resolved config.
pub fn initial_data(r: &ResolvedConfig) -> Result<InitialData> {
    match r.variant {
        InitialVariant::Single => InitialData::single(&r.soliton, &r.grid),
        v => sample_collision_initial(&r.soliton, &r.grid, v),
    }
}

/// Supplies the reference fields compared against each level, if any.
pub(crate) trait Reference {
    fn compare(&mut self, step: usize, t: f64, e: &[Complex64], n: &[f64]) -> Result<Option<(f64, f64)>>;
}

struct ExactReference {
    soliton: Soliton,
    grid: Grid,
}

impl Reference for ExactReference {
    fn compare(&mut self, _step: usize, t: f64, e: &[Complex64], n: &[f64]) -> Result<Option<(f64, f64)>> {
        let (re, rn) = self.soliton.sample_en(&self.grid, t);
        let dx = self.grid.dx();
        Ok(Some((field_distance(e, &re, dx), field_distance(n, &rn, dx))))
    }
}

struct NoReference;

impl Reference for NoReference {
    fn compare(&mut self, _: usize, _: f64, _: &[Complex64], _: &[f64]) -> Result<Option<(f64, f64)>> {
        Ok(None)
    }
}

/// Energy of the current level and, for Glassey, the potential defect.
fn level_energy(traj: &Trajectory, init: &InitialData, poisson: &PoissonSolver, dt: f64) -> (f64, Option<f64>) {
    let dx = init.grid.dx();
    match traj {
        Trajectory::Dvdm(s) => {
            let st = s.state();
            let v = st.v.as_deref().expect("DVDM keeps the potential");
            (dvdm_energy_parts(&st.e, &st.n, v, dx), None)
        }
        Trajectory::Glassey(s) => match s.n_prev() {
            None => (dvdm_energy_parts(&init.e0, &init.n0, &init.v0, dx), None),
            Some(prev) => {
                let rate: Vec<f64> = prev.iter().zip(s.n()).map(|(a, b)| (b - a) / dt).collect();
                let v = poisson.solve_unchecked(&rate);
                let lap = second_diff_unchecked(&v, dx);
                let defect = rate.iter().zip(&lap).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                (glassey_energy_parts(s.e(), s.n(), prev, &v, dx), Some(defect))
            }
        },
    }
}

fn monitor(traj: &Trajectory, g: &Grid) -> [f64; 5] {
    let st = match traj {
        Trajectory::Dvdm(s) => s.state().clone(),
        Trajectory::Glassey(s) => s.state(),
    };
    bound_monitor(&st, g).unwrap_or([f64::NAN; 5])
}

pub(crate) fn drive(cfg: &ExperimentConfig, reference: &mut dyn Reference) -> Result<RunReport> {
    let resolved = cfg.resolve()?;
    let init = initial_data(&resolved)?;
    let g = resolved.grid;
    let dt = resolved.scheme.dt;
    let poisson = PoissonSolver::new(g)?;
    let mut traj = Trajectory::new(&init, &resolved.scheme, cfg.dvdm_form)?;

    let mut series = Vec::with_capacity(resolved.steps + 1);
    let mut wall = 0.0;
    let mut status = RunStatus::Completed;
    let mut failure = None;
    let mut newton_history = None;
    let mut max_defect: Option<f64> = None;
    let mut record = |traj: &Trajectory, reference: &mut dyn Reference| -> Result<SeriesRow> {
        let step = traj.step();
        let t = step as f64 * dt;
        let (energy, defect) = level_energy(traj, &init, &poisson, dt);
        if let Some(d) = defect {
            max_defect = Some(max_defect.map_or(d, |m| m.max(d)));
        }
        let err = reference.compare(step, t, traj.e(), traj.n())?;
        Ok(SeriesRow {
            step,
            t,
            norm: l2_norm_sq(traj.e(), g.dx()),
            energy,
            err_e: err.map(|e| e.0),
            err_n: err.map(|e| e.1),
            newton_iters: traj.newton_iterations().filter(|_| step > 0),
            bound_monitor: monitor(traj, &g),
        })
    };

    series.push(record(&traj, reference)?);
    for _ in 0..resolved.steps {
        let (outcome, secs) = timed(|| traj.advance());
        wall += secs;
        match outcome {
            Ok(()) => {}
            Err(Error::Divergence { step, iterations, last, history }) => {
                status = RunStatus::Diverged;
                failure = Some(format!(
                    "Newton failed at step {step} after {iterations} iterations, |F| = {last:e}"
                ));
                newton_history = Some(history);
                break;
            }
            Err(Error::Singular { index }) => {
                status = RunStatus::Diverged;
                failure = Some(format!("singular system at block {index}, step {}", traj.step() + 1));
                break;
            }
            Err(e) => return Err(e),
        }
        let row = record(&traj, reference)?;
        let finite = row.norm.is_finite() && row.energy.is_finite();
        series.push(row);
        if !finite {
            status = RunStatus::Diverged;
            failure = Some(format!("non-finite solution at step {}", traj.step()));
            break;
        }
    }

    let glassey = cfg.scheme.is_glassey();
    let base = if glassey { series.get(1).unwrap_or(&series[0]) } else { &series[0] };
    let e0_energy = base.energy;
    let skip = usize::from(glassey && series.len() > 1);
    let d_energy = series[skip..]
        .iter()
        .map(|r| (r.energy - e0_energy).abs())
        .fold(0.0, f64::max);
    let n0 = series[0].norm;
    let d_norm = series.iter().map(|r| (r.norm - n0).abs()).fold(0.0, f64::max);
    let eps_e = series.iter().filter_map(|r| r.err_e).fold(0.0, f64::max);
    let eps_n = series.iter().filter_map(|r| r.err_n).fold(0.0, f64::max);

    Ok(RunReport {
        config: *cfg,
        soliton: resolved.soliton,
        k: g.k(),
        steps: resolved.steps,
        status,
        e0_energy,
        d_energy,
        d_norm,
        eps_e,
        eps_n,
        wall_time: wall,
        series,
        seam_jump: init.seam_jump,
        max_v_residual: max_defect,
        failure,
        newton_history,
    })
}

/// Run one experiment to its horizon. Single-soliton runs are compared with
/// the exact solution at every level; collision runs carry no reference.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    let resolved = cfg.resolve()?;
    if resolved.variant == InitialVariant::Single {
        let mut reference = ExactReference {
            soliton: Soliton::new(resolved.soliton),
            grid: resolved.grid,
        };
        drive(cfg, &mut reference)
    } else {
        drive(cfg, &mut NoReference)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::Horizon;
    use crate::schemes::SchemeKind;

    #[test]
    fn zero_steps_echo_initial_state() {
        let cfg = ExperimentConfig::new(SchemeKind::Gn, 1.0, 0.1).with_horizon(Horizon::Time(0.0));
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.series.len(), 1);
        assert_eq!((r.eps_e, r.eps_n, r.d_energy), (0.0, 0.0, 0.0));
        assert!(r.e0_energy > 0.9 && r.e0_energy < 1.1);
    }

    #[test]
    fn short_runs_complete() {
        for s in SchemeKind::ALL {
            let cfg = ExperimentConfig::new(s, 1.0, 0.1).with_horizon(Horizon::Time(1.0));
            let r = run_experiment(&cfg).unwrap();
            assert_eq!(r.status, RunStatus::Completed, "{s}");
            assert_eq!(r.series.len(), 11);
            let tol = if s == SchemeKind::G { 5e-2 } else { 1e-2 };
            assert!(r.eps_e < tol, "{s}: {}", r.eps_e);
        }
    }
}
