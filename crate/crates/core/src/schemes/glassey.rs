//! Glassey's linearly implicit scheme.

use num_complex::Complex64;

use super::{FirstStep, SchemeConfig, State};
use crate::error::{check_len, Result};
use crate::exact::InitialData;
use crate::grid::{abs_sq, second_diff_unchecked, Grid};
use crate::linalg::cyclic::{solve_uniform_offdiag, Workspace};
use crate::linalg::{factor, wave_operator, Factorization, PoissonSolver};

/// First density level `N¹` from the initial data.
pub fn glassey_first_n(
    e0: &[Complex64],
    n0: &[f64],
    nt0: &[f64],
    g: &Grid,
    dt: f64,
    variant: FirstStep,
) -> Result<Vec<f64>> {
    g.check(e0)?;
    g.check(n0)?;
    g.check(nt0)?;
    let mut n1: Vec<f64> = n0.iter().zip(nt0).map(|(n, nt)| n + dt * nt).collect();
    if variant == FirstStep::G {
        return Ok(n1);
    }
    let source: Vec<f64> = n0.iter().zip(abs_sq(e0)).map(|(n, a)| n + a).collect();
    let lap = second_diff_unchecked(&source, g.dx());
    for (x, d) in n1.iter_mut().zip(&lap) {
        *x += 0.5 * dt * dt * d;
    }
    if variant == FirstStep::Gn {
        let shift = n1.iter().zip(n0).map(|(a, b)| a - b).sum::<f64>() / g.k() as f64;
        for x in n1.iter_mut() {
            *x -= shift;
        }
    }
    Ok(n1)
}

/// `N^{m+1} = -N^{m-1} - 2|E^m|² + 2 (I - dt²/2 D)⁻¹ (N^m + |E^m|²)`.
///
/// `wave` must factor [`wave_operator`] for the grid and step in use.
pub fn glassey_step_n(
    n_prev: &[f64],
    n_curr: &[f64],
    e_curr: &[Complex64],
    wave: &Factorization<f64>,
    g: &Grid,
) -> Result<Vec<f64>> {
    g.check(n_prev)?;
    g.check(n_curr)?;
    g.check(e_curr)?;
    check_len(g.k(), wave.len())?;
    Ok(step_n_unchecked(n_prev, n_curr, e_curr, wave))
}

fn step_n_unchecked(
    n_prev: &[f64],
    n_curr: &[f64],
    e_curr: &[Complex64],
    wave: &Factorization<f64>,
) -> Vec<f64> {
    let e2 = abs_sq(e_curr);
    let mut w: Vec<f64> = n_curr.iter().zip(&e2).map(|(n, a)| n + a).collect();
    wave.solve_in_place(&mut w);
    w.iter()
        .zip(n_prev)
        .zip(&e2)
        .map(|((w, p), a)| 2.0 * w - p - 2.0 * a)
        .collect()
}

/// `E^{m+1} = -E^m + 4i [2i I + dt (D - diag(μN))]⁻¹ E^m`.
pub fn glassey_step_e(
    e_curr: &[Complex64],
    n_curr: &[f64],
    n_next: &[f64],
    g: &Grid,
    dt: f64,
) -> Result<Vec<Complex64>> {
    g.check(e_curr)?;
    g.check(n_curr)?;
    g.check(n_next)?;
    let mut out = Vec::new();
    step_e_into(e_curr, n_curr, n_next, g, dt, &mut EStepWork::default(), &mut out)?;
    Ok(out)
}

/// Reusable buffers for the field update.
#[derive(Debug, Clone, Default)]
struct EStepWork {
    diag: Vec<Complex64>,
    solve: Workspace<Complex64>,
}

fn step_e_into(
    e_curr: &[Complex64],
    n_curr: &[f64],
    n_next: &[f64],
    g: &Grid,
    dt: f64,
    work: &mut EStepWork,
    out: &mut Vec<Complex64>,
) -> Result<()> {
    let h2 = g.dx() * g.dx();
    let off = Complex64::new(dt / h2, 0.0);
    work.diag.clear();
    work.diag.extend(
        n_curr
            .iter()
            .zip(n_next)
            .map(|(a, b)| Complex64::new(dt * (-2.0 / h2 - 0.5 * (a + b)), 2.0)),
    );
    out.clear();
    out.extend_from_slice(e_curr);
    solve_uniform_offdiag(off, &work.diag, out, &mut work.solve)?;
    let four_i = Complex64::new(0.0, 4.0);
    for (w, e) in out.iter_mut().zip(e_curr) {
        *w = four_i * *w - e;
    }
    Ok(())
}

/// Mean-zero potential with `D V = (N_next - N_curr) / dt` in the
/// least-squares sense.
pub fn glassey_recover_v(n_curr: &[f64], n_next: &[f64], g: &Grid, dt: f64) -> Result<Vec<f64>> {
    g.check(n_curr)?;
    g.check(n_next)?;
    let solver = PoissonSolver::new(*g)?;
    Ok(solver.solve_unchecked(&rate(n_curr, n_next, dt)))
}

fn rate(a: &[f64], b: &[f64], dt: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(a, b)| (b - a) / dt).collect()
}

/// Sequential driver for Glassey's scheme.
///
/// Level `m` holds `E^m`, `N^m` and `N^{m-1}`. The first advance uses the
/// configured first density level; later ones use the three-level update.
#[derive(Debug, Clone)]
pub struct GlasseyStepper {
    grid: Grid,
    dt: f64,
    wave: Factorization<f64>,
    poisson: PoissonSolver,
    n_first: Option<Vec<f64>>,
    n_prev: Option<Vec<f64>>,
    e: Vec<Complex64>,
    n: Vec<f64>,
    step: usize,
    e_next: Vec<Complex64>,
    work: EStepWork,
}

impl GlasseyStepper {
    pub fn new(init: &InitialData, cfg: &SchemeConfig) -> Result<Self> {
        let g = init.grid;
        let dt = cfg.dt;
        let n_first = glassey_first_n(&init.e0, &init.n0, &init.nt0, &g, dt, cfg.scheme.first_step())?;
        Ok(Self {
            grid: g,
            dt,
            wave: factor(&wave_operator(&g, dt)?)?,
            poisson: PoissonSolver::new(g)?,
            n_first: Some(n_first),
            n_prev: None,
            e: init.e0.clone(),
            n: init.n0.clone(),
            step: 0,
            e_next: Vec::with_capacity(g.k()),
            work: EStepWork::default(),
        })
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    pub fn e(&self) -> &[Complex64] {
        &self.e
    }

    pub fn n(&self) -> &[f64] {
        &self.n
    }

    pub fn n_prev(&self) -> Option<&[f64]> {
        self.n_prev.as_deref()
    }

    /// Density of the level after the current one, once it is known
    /// without stepping (only at level 0).
    pub fn n_first(&self) -> Option<&[f64]> {
        self.n_first.as_deref()
    }

    pub fn state(&self) -> State {
        State {
            e: self.e.clone(),
            n: self.n.clone(),
            v: None,
            step: self.step,
            t: self.time(),
        }
    }

    pub fn advance(&mut self) -> Result<()> {
        let n_next = match (self.n_first.take(), &self.n_prev) {
            (Some(n1), _) => n1,
            (None, Some(prev)) => step_n_unchecked(prev, &self.n, &self.e, &self.wave),
            (None, None) => unreachable!("level above zero always has a previous density"),
        };
        step_e_into(&self.e, &self.n, &n_next, &self.grid, self.dt, &mut self.work, &mut self.e_next)?;
        self.n_prev = Some(std::mem::replace(&mut self.n, n_next));
        std::mem::swap(&mut self.e, &mut self.e_next);
        self.step += 1;
        Ok(())
    }

    /// Potential `V^{m-1}` recovered from `N^{m-1}` and `N^m`.
    pub fn recover_v(&self) -> Option<Vec<f64>> {
        self.n_prev
            .as_ref()
            .map(|prev| self.poisson.solve_unchecked(&rate(prev, &self.n, self.dt)))
    }

    /// Largest violation of `D V^{m-1} = (N^m - N^{m-1}) / dt`; nonzero when
    /// the density increment has nonzero mean.
    pub fn v_residual(&self) -> Option<f64> {
        let prev = self.n_prev.as_ref()?;
        let v = self.recover_v()?;
        let lap = second_diff_unchecked(&v, self.grid.dx());
        Some(
            rate(prev, &self.n, self.dt)
                .iter()
                .zip(&lap)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Two-level energy of the current level, defined for `m >= 1`.
    pub fn energy(&self) -> Option<f64> {
        let prev = self.n_prev.as_ref()?;
        let v = self.recover_v()?;
        Some(crate::invariants::glassey_energy_parts(&self.e, &self.n, prev, &v, self.grid.dx()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::l2_norm_sq;

    fn grid() -> Grid {
        Grid::new(16, 4.0).unwrap()
    }

    fn field(k: usize, seed: f64) -> Vec<Complex64> {
        (0..k)
            .map(|j| Complex64::new((seed + j as f64).sin(), (seed * 1.3 + 0.7 * j as f64).cos()))
            .collect()
    }

    #[test]
    fn constants_are_stationary() {
        let g = grid();
        let e = vec![Complex64::new(0.0, 0.0); 16];
        let n = vec![0.7; 16];
        let wave = factor(&wave_operator(&g, 0.1).unwrap()).unwrap();
        let next = glassey_step_n(&n, &n, &e, &wave, &g).unwrap();
        assert!(next.iter().all(|x| (x - 0.7).abs() < 1e-14));
        let c = vec![Complex64::new(0.4, -0.2); 16];
        let z = vec![0.0; 16];
        let e1 = glassey_step_e(&c, &z, &z, &g, 0.1).unwrap();
        assert!(e1.iter().zip(&c).all(|(a, b)| (a - b).norm() < 1e-14));
    }

    #[test]
    fn field_update_conserves_norm() {
        let g = grid();
        let e = field(16, 0.3);
        let n0: Vec<f64> = (0..16).map(|j| (j as f64 * 0.4).cos()).collect();
        let n1: Vec<f64> = (0..16).map(|j| (j as f64 * 0.9).sin()).collect();
        let e1 = glassey_step_e(&e, &n0, &n1, &g, 0.2).unwrap();
        let (a, b) = (l2_norm_sq(&e, g.dx()), l2_norm_sq(&e1, g.dx()));
        assert!((a - b).abs() <= 1e-13 * a);
    }

    #[test]
    fn first_level_variants() {
        let g = grid();
        let e = field(16, 1.1);
        let n0: Vec<f64> = (0..16).map(|j| (j as f64 * 0.4).cos()).collect();
        let nt = vec![0.0; 16];
        let ng = glassey_first_n(&e, &n0, &nt, &g, 0.1, FirstStep::G).unwrap();
        assert_eq!(ng, n0);
        let ngn = glassey_first_n(&e, &n0, &nt, &g, 0.1, FirstStep::Gn).unwrap();
        let drift: f64 = ngn.iter().zip(&n0).map(|(a, b)| a - b).sum();
        assert!(drift.abs() < 1e-14);
    }

    #[test]
    fn recovered_potential_of_equal_levels_is_zero() {
        let g = grid();
        let n = vec![0.3; 16];
        let v = glassey_recover_v(&n, &n, &g, 0.1).unwrap();
        assert!(v.iter().all(|x| *x == 0.0));
    }
}
