use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{drive, initial_data, run_experiment, Reference, RunReport, Trajectory};
use crate::error::{Error, Result};
use crate::grid::l2_norm;

/// One mesh level of a halving study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub dx: f64,
    pub eps_e: f64,
    pub eps_n: f64,
    pub d_energy: f64,
    pub wall_time: f64,
    /// `log2` of the error ratio against the previous row.
    pub order_e: Option<f64>,
    pub order_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub reports: Vec<RunReport>,
}

/// Run `base` and `halvings` refinements with `dt` and `dx` halved
/// together. Levels run concurrently.
pub fn convergence_study(base: &ExperimentConfig, halvings: usize) -> Result<ConvergenceTable> {
    let configs: Vec<ExperimentConfig> = (0..=halvings)
        .map(|h| {
            let f = 0.5f64.powi(h as i32);
            let mut c = *base;
            c.dt = base.dt * f;
            c.dx = Some(base.dx() * f);
            c
        })
        .collect();
    let reports: Vec<Result<RunReport>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs.iter().map(|c| s.spawn(move || run_experiment(c))).collect();
        handles.into_iter().map(|h| h.join().expect("run thread panicked")).collect()
    });
    let reports = reports.into_iter().collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ConvergenceRow> = Vec::with_capacity(reports.len());
    for (c, r) in configs.iter().zip(&reports) {
        let order = |prev: f64, cur: f64| (prev > 0.0 && cur > 0.0).then(|| (prev / cur).log2());
        let (order_e, order_n) = match rows.last() {
            Some(p) => (order(p.eps_e, r.eps_e), order(p.eps_n, r.eps_n)),
            None => (None, None),
        };
        rows.push(ConvergenceRow {
            dt: c.dt,
            dx: c.dx(),
            eps_e: r.eps_e,
            eps_n: r.eps_n,
            d_energy: r.d_energy,
            wall_time: r.wall_time,
            order_e,
            order_n,
        });
    }
    Ok(ConvergenceTable { rows, reports })
}

/// A coarse run measured against a finer numerical reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    /// The coarse run; its errors are distances from the reference.
    pub report: RunReport,
    pub reference: ExperimentConfig,
    pub eps_e: f64,
    pub eps_n: f64,
}

fn integer_ratio(coarse: f64, fine: f64, what: &str) -> Result<usize> {
    let r = coarse / fine;
    let n = r.round();
    if n < 1.0 || (r - n).abs() > 1e-9 * n {
        return Err(Error::Config(format!(
            "reference {what} {fine} does not divide {what} {coarse}"
        )));
    }
    Ok(n as usize)
}

struct Lockstep {
    traj: Trajectory,
    time_ratio: usize,
    space_ratio: usize,
    dx: f64,
}

impl Reference for Lockstep {
    fn compare(&mut self, step: usize, _t: f64, e: &[Complex64], n: &[f64]) -> Result<Option<(f64, f64)>> {
        while self.traj.step() < step * self.time_ratio {
            self.traj.advance()?;
        }
        let s = self.space_ratio;
        let (re, rn) = (self.traj.e(), self.traj.n());
        let de: Vec<Complex64> = e.iter().enumerate().map(|(k, v)| v - re[k * s]).collect();
        let dn: Vec<f64> = n.iter().enumerate().map(|(k, v)| v - rn[k * s]).collect();
        Ok(Some((l2_norm(&de, self.dx), l2_norm(&dn, self.dx))))
    }
}

/// Run `cfg` and `reference` side by side and compare at the coarse levels
/// and nodes.
pub fn collision_comparison(cfg: &ExperimentConfig, reference: &ExperimentConfig) -> Result<CollisionReport> {
    if cfg.collision != reference.collision {
        return Err(Error::Config("run and reference must both be collision runs or neither".into()));
    }
    if cfg.collision_variant != reference.collision_variant {
        return Err(Error::Config(format!(
            "initial-data variants differ: run uses {}, reference uses {}",
            cfg.collision_variant, reference.collision_variant
        )));
    }
    if (cfg.e_max, cfg.l, cfg.m) != (reference.e_max, reference.l, reference.m) {
        return Err(Error::Config("run and reference describe different solitons".into()));
    }
    let coarse = cfg.resolve()?;
    let fine = reference.resolve()?;
    let time_ratio = integer_ratio(cfg.dt, reference.dt, "dt")?;
    let space_ratio = integer_ratio(coarse.grid.dx(), fine.grid.dx(), "dx")?;
    if fine.grid.k() != coarse.grid.k() * space_ratio {
        return Err(Error::Config("reference grid does not nest the run grid".into()));
    }
    if coarse.steps * time_ratio > fine.steps {
        return Err(Error::Config("reference horizon ends before the run".into()));
    }
    let init = initial_data(&fine)?;
    let mut lockstep = Lockstep {
        traj: Trajectory::new(&init, &fine.scheme, reference.dvdm_form)?,
        time_ratio,
        space_ratio,
        dx: coarse.grid.dx(),
    };
    let report = drive(cfg, &mut lockstep)?;
    Ok(CollisionReport {
        reference: *reference,
        eps_e: report.eps_e,
        eps_n: report.eps_n,
        report,
    })
}
