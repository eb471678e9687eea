//! Linear solvers: cyclic tridiagonal (real and complex), the mean-zero
//! periodic Poisson solve, and the block system behind the DVDM Newton step.

pub mod block;
pub mod cyclic;
pub mod newton;
pub mod poisson;

pub use block::{BlockCyclic3, BlockFactorization};
pub use cyclic::{factor, solve, CyclicTridiagonal, Factorization};
pub use newton::{assemble_newton_system, DensityRow, SparseBlockSystem};
pub use poisson::{poisson_meanzero, PoissonSolver};

use crate::error::Result;
use crate::grid::{Grid, Scalar};

/// `I - (dt^2 / 2) D` for the Glassey density update.
pub fn wave_operator(g: &Grid, dt: f64) -> Result<CyclicTridiagonal<f64>> {
    let c = 0.5 * dt * dt / (g.dx() * g.dx());
    CyclicTridiagonal::circulant(g.k(), -c, 1.0 + 2.0 * c, -c)
}

/// `2i I + dt (D - diag(potential))` for the Glassey / Crank-Nicolson field update.
pub fn schrodinger_operator(
    g: &Grid,
    dt: f64,
    potential: &[f64],
) -> Result<CyclicTridiagonal<num_complex::Complex64>> {
    use num_complex::Complex64;
    g.check(potential)?;
    let h2 = g.dx() * g.dx();
    let off = Complex64::new(dt / h2, 0.0);
    let diag = potential
        .iter()
        .map(|&p| Complex64::new(dt * (-2.0 / h2 - p), 2.0))
        .collect();
    CyclicTridiagonal::new(vec![off; g.k()], diag, vec![off; g.k()])
}

/// Periodic second-difference matrix as a [`CyclicTridiagonal`].
pub fn laplacian<T: Scalar>(g: &Grid) -> Result<CyclicTridiagonal<T>> {
    let inv = 1.0 / (g.dx() * g.dx());
    CyclicTridiagonal::circulant(g.k(), T::from_real(inv), T::from_real(-2.0 * inv), T::from_real(inv))
}
