//! Block cyclic tridiagonal matrices with 3x3 blocks.
//!
//! Node `k` owns unknowns `3k..3k+3` and equations `3k..3k+3`. Block row `k`
//! couples to nodes `k-1`, `k`, `k+1` (mod K). The factorization eliminates
//! the leading `K-1` block rows as a block tridiagonal system and borders
//! the last block row and column, so every solve is O(K).

use nalgebra::{Matrix3, Vector3};

use crate::error::{check_len, Error, Result};

/// Bit `3 * row + col` marks a structurally nonzero block entry.
pub type BlockMask = u16;

pub const FULL_MASK: BlockMask = 0b111_111_111;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCyclic3 {
    pub lower: Vec<Matrix3<f64>>,
    pub diag: Vec<Matrix3<f64>>,
    pub upper: Vec<Matrix3<f64>>,
    pub lower_mask: BlockMask,
    pub diag_mask: BlockMask,
    pub upper_mask: BlockMask,
}

impl BlockCyclic3 {
    pub fn zeros(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidGrid(format!(
                "block cyclic system needs at least 3 block rows, got {k}"
            )));
        }
        Ok(Self {
            lower: vec![Matrix3::zeros(); k],
            diag: vec![Matrix3::zeros(); k],
            upper: vec![Matrix3::zeros(); k],
            lower_mask: FULL_MASK,
            diag_mask: FULL_MASK,
            upper_mask: FULL_MASK,
        })
    }

    pub fn blocks(&self) -> usize {
        self.diag.len()
    }

    pub fn dim(&self) -> usize {
        3 * self.blocks()
    }

    /// Structural nonzero count implied by the block masks.
    pub fn nnz(&self) -> usize {
        let per_row = self.lower_mask.count_ones()
            + self.diag_mask.count_ones()
            + self.upper_mask.count_ones();
        per_row as usize * self.blocks()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        let n = self.blocks();
        let mut out = vec![0.0; x.len()];
        for k in 0..n {
            let y = self.lower[k] * node(x, (k + n - 1) % n)
                + self.diag[k] * node(x, k)
                + self.upper[k] * node(x, (k + 1) % n);
            out[3 * k..3 * k + 3].copy_from_slice(y.as_slice());
        }
        Ok(out)
    }

    /// Dense row-major copy, for oracle comparisons.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.blocks();
        let dim = self.dim();
        let mut a = vec![vec![0.0; dim]; dim];
        for k in 0..n {
            for (block, col_node) in [
                (&self.lower[k], (k + n - 1) % n),
                (&self.diag[k], k),
                (&self.upper[k], (k + 1) % n),
            ] {
                for r in 0..3 {
                    for c in 0..3 {
                        a[3 * k + r][3 * col_node + c] += block[(r, c)];
                    }
                }
            }
        }
        a
    }

    pub fn factor(&self) -> Result<BlockFactorization> {
        BlockFactorization::new(self)
    }
}

fn node(x: &[f64], k: usize) -> Vector3<f64> {
    Vector3::new(x[3 * k], x[3 * k + 1], x[3 * k + 2])
}

fn invert(m: &Matrix3<f64>, index: usize) -> Result<Matrix3<f64>> {
    let scale = m.amax();
    let lu = m.lu();
    let u = lu.u();
    let min_pivot = (0..3).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if !(min_pivot > scale * 1e-14) {
        return Err(Error::Singular { index });
    }
    lu.try_inverse().ok_or(Error::Singular { index })
}

/// Immutable factorization of a [`BlockCyclic3`].
#[derive(Debug, Clone)]
pub struct BlockFactorization {
    lower: Vec<Matrix3<f64>>,
    inv_pivot: Vec<Matrix3<f64>>,
    // inv_pivot[k] * upper[k], the back-substitution coupling.
    coupling: Vec<Matrix3<f64>>,
    // Leading block solve applied to the last block column.
    border: Vec<Matrix3<f64>>,
    row_first: Matrix3<f64>,
    row_last: Matrix3<f64>,
    inv_schur: Matrix3<f64>,
}

impl BlockFactorization {
    fn new(a: &BlockCyclic3) -> Result<Self> {
        let n = a.blocks();
        let m = n - 1;
        let mut inv_pivot = Vec::with_capacity(m);
        let mut coupling = Vec::with_capacity(m);
        for k in 0..m {
            let pivot = if k == 0 {
                a.diag[0]
            } else {
                a.diag[k] - a.lower[k] * coupling[k - 1]
            };
            let inv = invert(&pivot, k)?;
            coupling.push(inv * a.upper[k]);
            inv_pivot.push(inv);
        }
        let mut fact = Self {
            lower: a.lower[..m].to_vec(),
            inv_pivot,
            coupling,
            border: vec![Matrix3::zeros(); m],
            row_first: a.upper[n - 1],
            row_last: a.lower[n - 1],
            inv_schur: Matrix3::zeros(),
        };

        // Last block column restricted to the leading rows: A[0][n-1] and
        // A[n-2][n-1].
        let mut col = vec![Matrix3::zeros(); m];
        col[0] = a.lower[0];
        col[m - 1] += a.upper[m - 1];
        fact.leading_solve(&mut col);
        let schur = a.diag[n - 1] - fact.row_first * col[0] - fact.row_last * col[m - 1];
        fact.inv_schur = invert(&schur, n - 1)?;
        fact.border = col;
        Ok(fact)
    }

    fn leading_solve<R>(&self, x: &mut [R])
    where
        R: Copy + std::ops::Sub<Output = R>,
        Matrix3<f64>: std::ops::Mul<R, Output = R>,
    {
        let m = x.len();
        x[0] = self.inv_pivot[0] * x[0];
        for k in 1..m {
            x[k] = self.inv_pivot[k] * (x[k] - self.lower[k] * x[k - 1]);
        }
        for k in (0..m - 1).rev() {
            x[k] = x[k] - self.coupling[k] * x[k + 1];
        }
    }

    pub fn dim(&self) -> usize {
        3 * (self.inv_pivot.len() + 1)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), b.len())?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        let m = self.inv_pivot.len();
        let mut y: Vec<Vector3<f64>> = (0..m).map(|k| node(b, k)).collect();
        let last = node(b, m);
        self.leading_solve(&mut y);
        let x_last = self.inv_schur * (last - self.row_first * y[0] - self.row_last * y[m - 1]);
        for k in 0..m {
            let xk = y[k] - self.border[k] * x_last;
            b[3 * k..3 * k + 3].copy_from_slice(xk.as_slice());
        }
        b[3 * m..3 * m + 3].copy_from_slice(x_last.as_slice());
    }
}
