//! Cyclic tridiagonal systems: Thomas elimination plus a Sherman-Morrison
//! correction for the two periodic corner entries.

use crate::error::{check_len, Error, Result};
use crate::grid::Scalar;

/// Matrix with `A[k][k] = diag[k]`, `A[k][k-1] = lower[k]` and
/// `A[k][k+1] = upper[k]`, indices taken modulo `K`. The corners are
/// `lower[0]` at `(0, K-1)` and `upper[K-1]` at `(K-1, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Scalar> CyclicTridiagonal<T> {
    pub fn new(lower: Vec<T>, diag: Vec<T>, upper: Vec<T>) -> Result<Self> {
        check_len(diag.len(), lower.len())?;
        check_len(diag.len(), upper.len())?;
        if diag.len() < 3 {
            return Err(Error::InvalidGrid(format!(
                "cyclic tridiagonal needs at least 3 rows, got {}",
                diag.len()
            )));
        }
        Ok(Self { lower, diag, upper })
    }

    /// Constant-coefficient circulant.
    pub fn circulant(k: usize, lower: T, diag: T, upper: T) -> Result<Self> {
        Self::new(vec![lower; k], vec![diag; k], vec![upper; k])
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        check_len(self.len(), x.len())?;
        let n = self.len();
        Ok((0..n)
            .map(|k| {
                self.lower[k] * x[(k + n - 1) % n]
                    + self.diag[k] * x[k]
                    + self.upper[k] * x[(k + 1) % n]
            })
            .collect())
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let n = self.len();
        let mut a = vec![vec![T::zero(); n]; n];
        for k in 0..n {
            a[k][k] = a[k][k] + self.diag[k];
            a[k][(k + n - 1) % n] = a[k][(k + n - 1) % n] + self.lower[k];
            a[k][(k + 1) % n] = a[k][(k + 1) % n] + self.upper[k];
        }
        a
    }
}

/// LU factors of a plain (non-cyclic) tridiagonal matrix.
#[derive(Debug, Clone)]
pub(crate) struct Thomas<T> {
    lower: Vec<T>,
    upper_scaled: Vec<T>,
    inv_pivot: Vec<T>,
}

impl<T: Scalar> Thomas<T> {
    /// `lower[0]` and `upper[n-1]` are ignored.
    pub(crate) fn new(lower: &[T], diag: &[T], upper: &[T]) -> Result<Self> {
        let n = diag.len();
        let mut upper_scaled = vec![T::zero(); n];
        let mut inv_pivot = vec![T::zero(); n];
        let scale = diag.iter().map(|d| d.modulus()).fold(0.0, f64::max);
        let mut prev = T::zero();
        for k in 0..n {
            let pivot = if k == 0 {
                diag[0]
            } else {
                diag[k] - lower[k] * prev
            };
            if !(pivot.modulus() > scale * 1e-14) {
                return Err(Error::Singular { index: k });
            }
            let inv = T::one() / pivot;
            inv_pivot[k] = inv;
            if k + 1 < n {
                upper_scaled[k] = upper[k] * inv;
                prev = upper_scaled[k];
            }
        }
        Ok(Self {
            lower: lower.to_vec(),
            upper_scaled,
            inv_pivot,
        })
    }

    pub(crate) fn solve_in_place(&self, x: &mut [T]) {
        let n = x.len();
        x[0] = x[0] * self.inv_pivot[0];
        for k in 1..n {
            x[k] = (x[k] - self.lower[k] * x[k - 1]) * self.inv_pivot[k];
        }
        for k in (0..n - 1).rev() {
            x[k] = x[k] - self.upper_scaled[k] * x[k + 1];
        }
    }
}

/// Reusable factorization of a [`CyclicTridiagonal`]. Immutable once built.
#[derive(Debug, Clone)]
pub struct Factorization<T> {
    thomas: Thomas<T>,
    // Sherman-Morrison data: A = T' + u v^T with u = (gamma, 0.., beta),
    // v = (1, 0.., alpha / gamma).
    z: Vec<T>,
    v_last: T,
    denom: T,
}

/// Factor `a` for repeated O(K) solves.
pub fn factor<T: Scalar>(a: &CyclicTridiagonal<T>) -> Result<Factorization<T>> {
    let n = a.len();
    let alpha = a.lower[0];
    let beta = a.upper[n - 1];
    let gamma = -a.diag[0];
    let gamma = if gamma.modulus() == 0.0 { T::one() } else { gamma };

    let mut diag = a.diag.clone();
    diag[0] = diag[0] - gamma;
    diag[n - 1] = diag[n - 1] - alpha * beta / gamma;
    let thomas = Thomas::new(&a.lower, &diag, &a.upper)?;

    let mut z = vec![T::zero(); n];
    z[0] = gamma;
    z[n - 1] = beta;
    thomas.solve_in_place(&mut z);
    let v_last = alpha / gamma;
    let denom = T::one() + z[0] + v_last * z[n - 1];
    let scale = 1.0 + z[0].modulus() + (v_last * z[n - 1]).modulus();
    if !(denom.modulus() > scale * 1e-14) {
        return Err(Error::Singular { index: n - 1 });
    }
    Ok(Factorization {
        thomas,
        z,
        v_last,
        denom,
    })
}

impl<T: Scalar> Factorization<T> {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        check_len(self.len(), b.len())?;
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    pub fn solve_in_place(&self, x: &mut [T]) {
        let n = x.len();
        self.thomas.solve_in_place(x);
        let factor = (x[0] + self.v_last * x[n - 1]) / self.denom;
        for (xi, &zi) in x.iter_mut().zip(&self.z) {
            *xi = *xi - zi * factor;
        }
    }
}

/// Scratch space for [`solve_uniform_offdiag`].
#[derive(Debug, Clone, Default)]
pub(crate) struct Workspace<T> {
    upper_scaled: Vec<T>,
    z: Vec<T>,
}

/// Solve a cyclic tridiagonal system whose off-diagonal entries all equal
/// `off`, in place and in a single elimination pass over `x` and the
/// Sherman-Morrison vector together. Agrees with [`factor`] followed by
/// [`Factorization::solve_in_place`].
pub(crate) fn solve_uniform_offdiag<T: Scalar>(
    off: T,
    diag: &[T],
    x: &mut [T],
    ws: &mut Workspace<T>,
) -> Result<()> {
    let n = diag.len();
    check_len(n, x.len())?;
    let gamma = -diag[0];
    let gamma = if gamma.modulus() == 0.0 { T::one() } else { gamma };
    let first = diag[0] - gamma;
    let last = diag[n - 1] - off * off / gamma;
    let scale = diag[1..n - 1]
        .iter()
        .map(|d| d.modulus())
        .fold(first.modulus().max(last.modulus()), f64::max);
    ws.upper_scaled.resize(n, T::zero());
    ws.z.resize(n, T::zero());
    let (c, z) = (&mut ws.upper_scaled, &mut ws.z);

    if !(first.modulus() > scale * 1e-14) {
        return Err(Error::Singular { index: 0 });
    }
    let inv = T::one() / first;
    c[0] = off * inv;
    x[0] = x[0] * inv;
    z[0] = gamma * inv;
    for k in 1..n {
        let (d, z_rhs) = if k == n - 1 { (last, off) } else { (diag[k], T::zero()) };
        let pivot = d - off * c[k - 1];
        if !(pivot.modulus() > scale * 1e-14) {
            return Err(Error::Singular { index: k });
        }
        let inv = T::one() / pivot;
        c[k] = off * inv;
        x[k] = (x[k] - off * x[k - 1]) * inv;
        z[k] = (z_rhs - off * z[k - 1]) * inv;
    }
    for k in (0..n - 1).rev() {
        x[k] = x[k] - c[k] * x[k + 1];
        z[k] = z[k] - c[k] * z[k + 1];
    }

    let v_last = off / gamma;
    let denom = T::one() + z[0] + v_last * z[n - 1];
    let dscale = 1.0 + z[0].modulus() + (v_last * z[n - 1]).modulus();
    if !(denom.modulus() > dscale * 1e-14) {
        return Err(Error::Singular { index: n - 1 });
    }
    let f = (x[0] + v_last * x[n - 1]) / denom;
    for (xi, &zi) in x.iter_mut().zip(z.iter()) {
        *xi = *xi - zi * f;
    }
    Ok(())
}

/// Convenience: factor and solve once.
pub fn solve<T: Scalar>(a: &CyclicTridiagonal<T>, b: &[T]) -> Result<Vec<T>> {
    factor(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn uniform_offdiag_solve_matches_factor() {
        let n = 9;
        let off = Complex64::new(0.7, 0.0);
        let diag: Vec<Complex64> = (0..n).map(|k| Complex64::new(-1.4 - 0.1 * k as f64, 2.0)).collect();
        let b: Vec<Complex64> = (0..n).map(|k| Complex64::new((k as f64).sin(), (k as f64).cos())).collect();
        let a = CyclicTridiagonal::new(vec![off; n], diag.clone(), vec![off; n]).unwrap();
        let expect = solve(&a, &b).unwrap();
        let mut x = b.clone();
        solve_uniform_offdiag(off, &diag, &mut x, &mut Workspace::default()).unwrap();
        for (p, q) in x.iter().zip(&expect) {
            assert!((p - q).norm() < 1e-14);
        }
        let singular = vec![Complex64::new(-2.0 * 0.7, 0.0); n];
        let mut x = b;
        assert!(matches!(
            solve_uniform_offdiag(off, &singular, &mut x, &mut Workspace::default()),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn identity_solves_trivially() {
        let a = CyclicTridiagonal::circulant(5, 0.0, 1.0, 0.0).unwrap();
        let f = factor(&a).unwrap();
        let b = vec![1.0, -2.0, 3.5, 0.25, 7.0];
        let x = f.solve(&b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = CyclicTridiagonal::circulant(6, 1.0, -4.0, 1.5).unwrap();
        let x = solve(&a, &[0.0; 6]).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singular_circulant_is_detected() {
        // Rows sum to zero: the periodic Laplacian.
        let a = CyclicTridiagonal::circulant(8, 1.0, -2.0, 1.0).unwrap();
        assert!(matches!(factor(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn complex_plug_back() {
        let n = 9;
        let lower: Vec<Complex64> = (0..n).map(|k| Complex64::new(1.0, 0.1 * k as f64)).collect();
        let upper = lower.clone();
        let diag: Vec<Complex64> = (0..n)
            .map(|k| Complex64::new(-3.0 - 0.2 * k as f64, 2.0))
            .collect();
        let a = CyclicTridiagonal::new(lower, diag, upper).unwrap();
        let b: Vec<Complex64> = (0..n).map(|k| Complex64::new(k as f64, 1.0)).collect();
        let x = solve(&a, &b).unwrap();
        let r = a.matvec(&x).unwrap();
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-12);
        }
    }

    #[test]
    fn shape_errors() {
        assert!(CyclicTridiagonal::new(vec![1.0; 3], vec![1.0; 4], vec![1.0; 4]).is_err());
        assert!(CyclicTridiagonal::circulant(2, 0.0, 1.0, 0.0).is_err());
        let f = factor(&CyclicTridiagonal::circulant(4, 0.0, 1.0, 0.0).unwrap()).unwrap();
        assert!(f.solve(&[1.0; 5]).is_err());
    }
}
