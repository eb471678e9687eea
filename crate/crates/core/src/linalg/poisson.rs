use crate::error::Result;
use crate::grid::Grid;
use crate::linalg::cyclic::Thomas;

/// Minimum-norm solve of the periodic discrete Laplacian.
///
/// The periodic second-difference matrix is singular with the constants as
/// kernel, so its pseudo-inverse maps `rhs` to the mean-zero `V` with
/// `D V = rhs - mean(rhs)`. The solve pins `V[0] = 0`, which leaves a
/// nonsingular Dirichlet tridiagonal system on nodes `1..K`, then removes
/// the mean of the result.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    grid: Grid,
    reduced: Thomas<f64>,
}

impl PoissonSolver {
    pub fn new(grid: Grid) -> Result<Self> {
        let m = grid.k() - 1;
        let h2 = grid.dx() * grid.dx();
        let off = vec![1.0 / h2; m];
        let diag = vec![-2.0 / h2; m];
        let reduced = Thomas::new(&off, &diag, &off)?;
        Ok(Self { grid, reduced })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        self.grid.check(rhs)?;
        Ok(self.solve_unchecked(rhs))
    }

    pub(crate) fn solve_unchecked(&self, rhs: &[f64]) -> Vec<f64> {
        let k = rhs.len();
        let mean = rhs.iter().sum::<f64>() / k as f64;
        let mut v = vec![0.0; k];
        for (dst, &r) in v[1..].iter_mut().zip(&rhs[1..]) {
            *dst = r - mean;
        }
        self.reduced.solve_in_place(&mut v[1..]);
        let shift = v.iter().sum::<f64>() / k as f64;
        for x in &mut v {
            *x -= shift;
        }
        v
    }
}

/// One-shot `(D)^dagger rhs` on grid `g`.
pub fn poisson_meanzero(rhs: &[f64], g: &Grid) -> Result<Vec<f64>> {
    PoissonSolver::new(*g)?.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::second_diff;

    #[test]
    fn zero_and_constant_rhs_give_zero() {
        let g = Grid::new(12, 3.0).unwrap();
        assert!(poisson_meanzero(&[0.0; 12], &g).unwrap().iter().all(|&x| x == 0.0));
        let v = poisson_meanzero(&[4.2; 12], &g).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn recovers_mean_zero_field() {
        let g = Grid::new(32, 5.0).unwrap();
        let w: Vec<f64> = g
            .points()
            .map(|x| (2.0 * std::f64::consts::PI * x / 5.0).sin() + 0.3 * (x * 3.0).cos())
            .collect();
        let mean = w.iter().sum::<f64>() / 32.0;
        let w: Vec<f64> = w.iter().map(|x| x - mean).collect();
        let rhs = second_diff(&w, &g).unwrap();
        let v = poisson_meanzero(&rhs, &g).unwrap();
        let err = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10, "err = {err}");
    }
}
