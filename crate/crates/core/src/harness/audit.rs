use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::run::{initial_data, run_experiment, RunReport};
use crate::elliptic::complete_k;
use crate::error::Result;
use crate::schemes::{glassey_first_n, stepsize_thresholds, FirstStep, StepSizeThresholds};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub checks: Vec<Check>,
    /// Solvability bounds for `(p, r) = (4, max |E|_∞ + |N|)`; advisory.
    pub stepsize: Option<StepSizeThresholds>,
    pub report: RunReport,
}

impl Audit {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.to_string(),
        passed,
        detail,
    }
}

/// Run a config and verify the invariants its scheme promises.
pub fn audit(cfg: &ExperimentConfig) -> Result<Audit> {
    let resolved = cfg.resolve()?;
    let p = resolved.soliton;
    let mut checks = Vec::new();

    let w = 1.0 - p.v * p.v;
    let period = 2.0 * (2.0 * w).sqrt() / p.e_max * complete_k(p.q);
    checks.push(check(
        "soliton period matches L",
        (period - p.l).abs() <= 1e-10 * p.l,
        format!("2 sqrt(2(1-v^2)) K(q) / E_max = {period:.15}"),
    ));
    checks.push(check(
        "soliton parameter resolved",
        !p.precision_warning,
        format!("K residual {:e}", p.k_residual),
    ));

    let init = initial_data(&resolved)?;
    let g = resolved.grid;
    let dt = resolved.scheme.dt;
    let gn = glassey_first_n(&init.e0, &init.n0, &init.nt0, &g, dt, FirstStep::Gn)?;
    let mean_shift: f64 = gn.iter().zip(&init.n0).map(|(a, b)| a - b).sum();
    let scale: f64 = init.n0.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
    checks.push(check(
        "mean-preserving first level",
        mean_shift.abs() <= 1e-12 * scale,
        format!("sum of N1 - N0 = {mean_shift:e}"),
    ));

    let report = run_experiment(cfg)?;
    checks.push(check(
        "run completed",
        !report.diverged(),
        report.failure.clone().unwrap_or_else(|| format!("{} steps", report.steps)),
    ));
    let n0 = report.series[0].norm;
    let norm_tol = if cfg.scheme.is_glassey() {
        1e-10 * n0
    } else {
        1e3 * cfg.newton_eps * n0
    };
    checks.push(check(
        "norm conserved",
        report.d_norm <= norm_tol,
        format!("max drift {:e}, tolerance {norm_tol:e}", report.d_norm),
    ));
    let energy_tol = match cfg.scheme {
        crate::schemes::SchemeKind::Gn => Some(1e-8 * report.e0_energy.abs().max(1.0)),
        crate::schemes::SchemeKind::Dvdm => {
            Some(100.0 * cfg.newton_eps * report.steps.max(1) as f64 * report.e0_energy.abs().max(1.0))
        }
        _ => None,
    };
    if let Some(tol) = energy_tol {
        checks.push(check(
            "energy conserved",
            report.d_energy <= tol,
            format!("max drift {:e}, tolerance {tol:e}", report.d_energy),
        ));
    }

    let r = report
        .series
        .iter()
        .map(|s| s.bound_monitor[2] + s.bound_monitor[3])
        .fold(0.0, f64::max);
    let stepsize = if r > 0.0 {
        stepsize_thresholds(4.0, r, &g, dt).ok()
    } else {
        None
    };

    Ok(Audit {
        checks,
        stepsize,
        report,
    })
}
