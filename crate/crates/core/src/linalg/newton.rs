//! Jacobian of the fully implicit DVDM step in real block form.
//!
//! Unknowns at node `k` are `(Re E_k, Im E_k, N_k)` of the new level, and
//! the rows at node `k` are the real and imaginary parts of the field
//! equation followed by the density equation.

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{check_len, Result};
use crate::grid::Grid;
use crate::linalg::block::{BlockCyclic3, BlockFactorization, BlockMask};

/// Coefficients of the density row `alpha * N' + beta * D N' + gamma * D(|E'|^2)`
/// as seen by the Newton linearisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityRow {
    pub identity: f64,
    pub laplacian: f64,
    pub coupling: f64,
}

impl DensityRow {
    /// Three-level wave form with the potential eliminated.
    pub fn eliminated(dt: f64) -> Self {
        Self {
            identity: 1.0 / (dt * dt),
            laplacian: -0.25,
            coupling: -0.25,
        }
    }

    /// Two-level form that keeps the potential of the current level.
    pub fn with_potential(dt: f64) -> Self {
        Self {
            identity: 1.0 / dt,
            laplacian: -0.25 * dt,
            coupling: -0.25 * dt,
        }
    }
}

/// Assembled Newton matrix and its factorization.
#[derive(Debug, Clone)]
pub struct SparseBlockSystem {
    pub matrix: BlockCyclic3,
    pub factorization: BlockFactorization,
}

impl SparseBlockSystem {
    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.factorization.solve(b)
    }
}

// Off-diagonal blocks touch (Re,Re), (Im,Im) and the whole density row.
const OFF_MASK: BlockMask = 0b111_010_001;

/// Jacobian of the DVDM residual at `(e_guess, n_guess)`, given the current
/// level `(e_curr, n_curr)`.
pub fn assemble_newton_system(
    e_curr: &[Complex64],
    n_curr: &[f64],
    e_guess: &[Complex64],
    n_guess: &[f64],
    grid: &Grid,
    dt: f64,
    row: DensityRow,
) -> Result<SparseBlockSystem> {
    let matrix = assemble_matrix(e_curr, n_curr, e_guess, n_guess, grid, dt, row)?;
    let factorization = matrix.factor()?;
    Ok(SparseBlockSystem {
        matrix,
        factorization,
    })
}

pub(crate) fn assemble_matrix(
    e_curr: &[Complex64],
    n_curr: &[f64],
    e_guess: &[Complex64],
    n_guess: &[f64],
    grid: &Grid,
    dt: f64,
    row: DensityRow,
) -> Result<BlockCyclic3> {
    let k = grid.k();
    for len in [e_curr.len(), n_curr.len(), e_guess.len(), n_guess.len()] {
        check_len(k, len)?;
    }
    let h2 = grid.dx() * grid.dx();
    let d_off = 1.0 / h2;
    let d_diag = -2.0 / h2;
    let inv_dt = 1.0 / dt;
    // d|E|^2/da = 2a, folded into the coupling coefficient.
    let g = 2.0 * row.coupling;

    let mut a = BlockCyclic3::zeros(k)?;
    a.lower_mask = OFF_MASK;
    a.upper_mask = OFF_MASK;
    for i in 0..k {
        let mid_n = 0.5 * (n_guess[i] + n_curr[i]);
        let mid_e = 0.5 * (e_guess[i] + e_curr[i]);
        let s = 0.5 * (d_diag - mid_n);
        let (re, im) = (e_guess[i].re, e_guess[i].im);
        a.diag[i] = Matrix3::new(
            s, -inv_dt, -0.5 * mid_e.re,
            inv_dt, s, -0.5 * mid_e.im,
            g * d_diag * re, g * d_diag * im, row.identity + row.laplacian * d_diag,
        );
        let l = (i + k - 1) % k;
        let r = (i + 1) % k;
        a.lower[i] = off_block(d_off, g, e_guess[l], row.laplacian);
        a.upper[i] = off_block(d_off, g, e_guess[r], row.laplacian);
    }
    Ok(a)
}

fn off_block(d_off: f64, g: f64, e: Complex64, laplacian: f64) -> Matrix3<f64> {
    Matrix3::new(
        0.5 * d_off, 0.0, 0.0,
        0.0, 0.5 * d_off, 0.0,
        g * d_off * e.re, g * d_off * e.im, laplacian * d_off,
    )
}
