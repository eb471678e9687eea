//! The fully implicit DVDM scheme, solved by simplified Newton.
//!
//! Unknowns are packed per node as `(Re E_k, Im E_k, N_k)`, matching the
//! block layout of [`assemble_newton_system`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::glassey::{glassey_first_n, glassey_step_e, glassey_step_n};
use super::{FirstStep, SchemeConfig, State};
use crate::error::{check_len, Error, Result};
use crate::exact::InitialData;
use crate::grid::{abs_sq, second_diff_unchecked, Grid};
use crate::linalg::{
    assemble_newton_system, factor, wave_operator, DensityRow, Factorization, SparseBlockSystem,
};

/// Interleave `(Re E, Im E, N)` per node.
pub fn pack(e: &[Complex64], n: &[f64]) -> Vec<f64> {
    e.iter().zip(n).flat_map(|(e, n)| [e.re, e.im, *n]).collect()
}

pub fn unpack(x: &[f64]) -> (Vec<Complex64>, Vec<f64>) {
    x.chunks_exact(3)
        .map(|c| (Complex64::new(c[0], c[1]), c[2]))
        .unzip()
}

/// Residual of one implicit step whose density row is
/// `row.identity N' + row.laplacian D N' + row.coupling D|E'|² + base`.
struct StepResidual<'a> {
    e_curr: &'a [Complex64],
    n_curr: &'a [f64],
    dx: f64,
    dt: f64,
    row: DensityRow,
    base: Vec<f64>,
}

impl<'a> StepResidual<'a> {
    /// Three-level form with the potential eliminated.
    fn eliminated(
        e_curr: &'a [Complex64],
        n_curr: &'a [f64],
        e_prev: &[Complex64],
        n_prev: &[f64],
        dx: f64,
        dt: f64,
    ) -> Self {
        let row = DensityRow::eliminated(dt);
        let (ec, ep) = (abs_sq(e_curr), abs_sq(e_prev));
        let s: Vec<f64> = (0..n_curr.len())
            .map(|k| 0.25 * (2.0 * n_curr[k] + n_prev[k] + 2.0 * ec[k] + ep[k]))
            .collect();
        let ds = second_diff_unchecked(&s, dx);
        let base = (0..n_curr.len())
            .map(|k| (n_prev[k] - 2.0 * n_curr[k]) / (dt * dt) - ds[k])
            .collect();
        Self { e_curr, n_curr, dx, dt, row, base }
    }

    /// Two-level form carrying the current potential.
    fn with_potential(e_curr: &'a [Complex64], n_curr: &'a [f64], v_curr: &[f64], dx: f64, dt: f64) -> Self {
        let row = DensityRow::with_potential(dt);
        let ec = abs_sq(e_curr);
        let s: Vec<f64> = (0..n_curr.len())
            .map(|k| 0.25 * dt * (n_curr[k] + ec[k]) + v_curr[k])
            .collect();
        let ds = second_diff_unchecked(&s, dx);
        let base = (0..n_curr.len()).map(|k| -n_curr[k] / dt - ds[k]).collect();
        Self { e_curr, n_curr, dx, dt, row, base }
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let k = self.n_curr.len();
        let (dx, dt) = (self.dx, self.dt);
        let h2 = dx * dx;
        let node = |j: usize| Complex64::new(x[3 * j], x[3 * j + 1]);
        let mid_e = |j: usize| 0.5 * (node(j) + self.e_curr[j]);
        let mut out = vec![0.0; 3 * k];
        let mut w = vec![0.0; k];
        for j in 0..k {
            let e = node(j);
            w[j] = self.row.laplacian * x[3 * j + 2] + self.row.coupling * e.norm_sqr();
        }
        for j in 0..k {
            let l = (j + k - 1) % k;
            let r = (j + 1) % k;
            let e = node(j);
            let lap = (mid_e(r) - 2.0 * mid_e(j) + mid_e(l)) / h2;
            let mid_n = 0.5 * (x[3 * j + 2] + self.n_curr[j]);
            let f = Complex64::new(0.0, 1.0) * (e - self.e_curr[j]) / dt + lap - mid_n * mid_e(j);
            out[3 * j] = f.re;
            out[3 * j + 1] = f.im;
            out[3 * j + 2] = self.row.identity * x[3 * j + 2]
                + (w[r] - 2.0 * w[j] + w[l]) / h2
                + self.base[j];
        }
        out
    }
}

/// Residual of the DVDM step with the potential eliminated, stacked per
/// node as (real field, imaginary field, density).
#[allow(clippy::too_many_arguments)]
pub fn dvdm_residual_fen(
    e_next: &[Complex64],
    n_next: &[f64],
    e_curr: &[Complex64],
    n_curr: &[f64],
    e_prev: &[Complex64],
    n_prev: &[f64],
    g: &Grid,
    dt: f64,
) -> Result<Vec<f64>> {
    g.check(e_next)?;
    g.check(n_next)?;
    g.check(e_curr)?;
    g.check(n_curr)?;
    g.check(e_prev)?;
    g.check(n_prev)?;
    let r = StepResidual::eliminated(e_curr, n_curr, e_prev, n_prev, g.dx(), dt);
    Ok(r.eval(&pack(e_next, n_next)))
}

/// Residual of the DVDM step in its two-level form, with `V'` replaced by
/// `V + dt (μN + μ|E|²)`.
pub fn dvdm_residual_with_potential(
    e_next: &[Complex64],
    n_next: &[f64],
    e_curr: &[Complex64],
    n_curr: &[f64],
    v_curr: &[f64],
    g: &Grid,
    dt: f64,
) -> Result<Vec<f64>> {
    g.check(e_next)?;
    g.check(n_next)?;
    g.check(e_curr)?;
    g.check(n_curr)?;
    g.check(v_curr)?;
    let r = StepResidual::with_potential(e_curr, n_curr, v_curr, g.dx(), dt);
    Ok(r.eval(&pack(e_next, n_next)))
}

/// Result of a converged simplified Newton solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Residual norm before each iteration and at the accepted point.
    pub history: Vec<f64>,
}

/// Iterate `x <- x - J⁻¹ F(x)` with a fixed factored `J` until
/// `|F(x)|₂ <= eps`. `step` labels the time level in divergence errors.
pub fn simplified_newton<F>(
    guess: Vec<f64>,
    mut residual: F,
    jacobian: &SparseBlockSystem,
    eps: f64,
    max_iter: usize,
    step: usize,
) -> Result<NewtonOutcome>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    check_len(jacobian.factorization.dim(), guess.len())?;
    let mut x = guess;
    let mut history = Vec::new();
    let mut iterations = 0;
    loop {
        let mut r = residual(&x);
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        history.push(norm);
        if norm <= eps {
            return Ok(NewtonOutcome { x, iterations, history });
        }
        if !norm.is_finite() || iterations >= max_iter {
            return Err(Error::Divergence {
                step,
                iterations,
                last: norm,
                history,
            });
        }
        jacobian.factorization.solve_in_place(&mut r);
        for (xi, d) in x.iter_mut().zip(&r) {
            *xi -= d;
        }
        iterations += 1;
    }
}

/// Which algebraic form the DVDM stepper solves after the first step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DvdmForm {
    /// Three-level wave form for `(E, N)`, potential updated afterwards.
    Eliminated,
    /// Two-level form carrying the potential at every step.
    Full,
}

fn v_update(v: &[f64], n: &[f64], n_next: &[f64], e: &[Complex64], e_next: &[Complex64], dt: f64) -> Vec<f64> {
    (0..v.len())
        .map(|k| v[k] + 0.5 * dt * (n[k] + n_next[k] + e[k].norm_sqr() + e_next[k].norm_sqr()))
        .collect()
}

fn solve_from_guess(
    residual: &StepResidual<'_>,
    g: &Grid,
    cfg: &SchemeConfig,
    guess_e: &[Complex64],
    guess_n: &[f64],
    step: usize,
) -> Result<(Vec<Complex64>, Vec<f64>, NewtonOutcome)> {
    let jac = assemble_newton_system(
        residual.e_curr,
        residual.n_curr,
        guess_e,
        guess_n,
        g,
        cfg.dt,
        residual.row,
    )?;
    let outcome = simplified_newton(
        pack(guess_e, guess_n),
        |x| residual.eval(x),
        &jac,
        cfg.newton_eps,
        cfg.newton_max_iter,
        step,
    )?;
    let (e, n) = unpack(&outcome.x);
    Ok((e, n, outcome))
}

/// `(E¹, N¹, V¹)` with the Newton record.
type FirstLevel = (Vec<Complex64>, Vec<f64>, Vec<f64>, NewtonOutcome);

fn first_level(
    e0: &[Complex64],
    n0: &[f64],
    nt0: &[f64],
    v0: &[f64],
    g: &Grid,
    cfg: &SchemeConfig,
) -> Result<FirstLevel> {
    let dt = cfg.dt;
    let guess_n = glassey_first_n(e0, n0, nt0, g, dt, FirstStep::Gn)?;
    let guess_e = glassey_step_e(e0, n0, &guess_n, g, dt)?;
    let residual = StepResidual::with_potential(e0, n0, v0, g.dx(), dt);
    let (e1, n1, outcome) = solve_from_guess(&residual, g, cfg, &guess_e, &guess_n, 1)?;
    let v1 = v_update(v0, n0, &n1, e0, &e1, dt);
    Ok((e1, n1, v1, outcome))
}

/// Solve the first DVDM step from the initial data, starting Newton from
/// one Glassey step with the mean-preserving first density level.
pub fn dvdm_first_step(init: &InitialData, cfg: &SchemeConfig, g: &Grid) -> Result<(State, NewtonOutcome)> {
    if *g != init.grid {
        return Err(Error::Precondition("initial data lives on a different grid".into()));
    }
    let (e, n, v, outcome) = first_level(&init.e0, &init.n0, &init.nt0, &init.v0, g, cfg)?;
    Ok((
        State { e, n, v: Some(v), step: 1, t: cfg.dt },
        outcome,
    ))
}

fn check_consecutive(prev: &State, curr: &State) -> Result<()> {
    if prev.step + 1 != curr.step {
        return Err(Error::Precondition(format!(
            "levels {} and {} are not consecutive",
            prev.step, curr.step
        )));
    }
    Ok(())
}

fn interior_level(
    prev: &State,
    curr: &State,
    cfg: &SchemeConfig,
    g: &Grid,
    wave: &Factorization<f64>,
    form: DvdmForm,
) -> Result<(State, NewtonOutcome)> {
    check_consecutive(prev, curr)?;
    for s in [prev, curr] {
        g.check(&s.e)?;
        g.check(&s.n)?;
    }
    let dt = cfg.dt;
    let guess_n = glassey_step_n(&prev.n, &curr.n, &curr.e, wave, g)?;
    let guess_e = glassey_step_e(&curr.e, &curr.n, &guess_n, g, dt)?;
    let residual = match form {
        DvdmForm::Eliminated => StepResidual::eliminated(&curr.e, &curr.n, &prev.e, &prev.n, g.dx(), dt),
        DvdmForm::Full => {
            let v = curr.v.as_deref().ok_or_else(|| {
                Error::Precondition("the two-level DVDM form needs the current potential".into())
            })?;
            g.check(v)?;
            StepResidual::with_potential(&curr.e, &curr.n, v, g.dx(), dt)
        }
    };
    let (e, n, outcome) = solve_from_guess(&residual, g, cfg, &guess_e, &guess_n, curr.step + 1)?;
    let v = curr.v.as_deref().map(|v| v_update(v, &curr.n, &n, &curr.e, &e, dt));
    let next = State {
        e,
        n,
        v,
        step: curr.step + 1,
        t: (curr.step + 1) as f64 * dt,
    };
    Ok((next, outcome))
}

/// Advance one DVDM step in the three-level form. The potential of the new
/// level is filled in when `curr` carries one.
pub fn dvdm_step(prev: &State, curr: &State, cfg: &SchemeConfig, g: &Grid) -> Result<(State, NewtonOutcome)> {
    let wave = factor(&wave_operator(g, cfg.dt)?)?;
    interior_level(prev, curr, cfg, g, &wave, DvdmForm::Eliminated)
}

/// Advance one DVDM step in the two-level form; `curr` must carry `V`.
pub fn dvdm_full_step(prev: &State, curr: &State, cfg: &SchemeConfig, g: &Grid) -> Result<(State, NewtonOutcome)> {
    let wave = factor(&wave_operator(g, cfg.dt)?)?;
    interior_level(prev, curr, cfg, g, &wave, DvdmForm::Full)
}

/// Sequential DVDM driver.
#[derive(Debug, Clone)]
pub struct DvdmStepper {
    grid: Grid,
    cfg: SchemeConfig,
    form: DvdmForm,
    wave: Factorization<f64>,
    nt0: Vec<f64>,
    prev: Option<State>,
    curr: State,
    last_iterations: usize,
}

impl DvdmStepper {
    pub fn new(init: &InitialData, cfg: &SchemeConfig, form: DvdmForm) -> Result<Self> {
        let g = init.grid;
        Ok(Self {
            grid: g,
            cfg: *cfg,
            form,
            wave: factor(&wave_operator(&g, cfg.dt)?)?,
            nt0: init.nt0.clone(),
            prev: None,
            curr: State {
                e: init.e0.clone(),
                n: init.n0.clone(),
                v: Some(init.v0.clone()),
                step: 0,
                t: 0.0,
            },
            last_iterations: 0,
        })
    }

    pub fn state(&self) -> &State {
        &self.curr
    }

    pub fn step(&self) -> usize {
        self.curr.step
    }

    /// Newton iterations spent on the most recent step.
    pub fn last_iterations(&self) -> usize {
        self.last_iterations
    }

    pub fn advance(&mut self) -> Result<()> {
        let (next, outcome) = if self.curr.step == 0 {
            let v0 = self.curr.v.as_deref().expect("stepper keeps the potential");
            let (e, n, v, outcome) =
                first_level(&self.curr.e, &self.curr.n, &self.nt0, v0, &self.grid, &self.cfg)?;
            (
                State { e, n, v: Some(v), step: 1, t: self.cfg.dt },
                outcome,
            )
        } else {
            let prev = self.prev.as_ref().expect("level above zero has a predecessor");
            interior_level(prev, &self.curr, &self.cfg, &self.grid, &self.wave, self.form)?
        };
        self.last_iterations = outcome.iterations;
        self.prev = Some(std::mem::replace(&mut self.curr, next));
        Ok(())
    }
}
