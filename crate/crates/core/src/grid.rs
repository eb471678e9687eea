//! Periodic grid, finite-difference and averaging operators, discrete norms.
//!
//! Fields are plain slices of length `K` indexed cyclically: index `k + K`
//! is the same node as `k`. Node `k` sits at `x_k = k * dx` with
//! `dx = L / K`, so the labels `0..K` cover one period.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Element type of a grid field: `f64` or `Complex64`.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + std::ops::Div<Output = Self>
    + Mul<f64, Output = Self>
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn conjugate(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conjugate(self) -> Self {
        self
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conjugate(self) -> Self {
        self.conj()
    }
}

/// Uniform periodic mesh with `k` cells over one period `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    k: usize,
    l: f64,
}

impl Grid {
    pub fn new(k: usize, l: f64) -> Result<Self> {
        if k < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 cells, got {k}")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("period must be positive, got {l}")));
        }
        Ok(Self { k, l })
    }

    /// Grid whose spacing is as close as possible to `dx`.
    pub fn with_spacing(l: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {dx}")));
        }
        let k = (l / dx).round();
        if !(k.is_finite() && k >= 3.0) {
            return Err(Error::InvalidGrid(format!("L/dx = {} gives too few cells", l / dx)));
        }
        Self::new(k as usize, l)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn dx(&self) -> f64 {
        self.l / self.k as f64
    }

    pub fn x(&self, k: usize) -> f64 {
        k as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.k).map(move |k| self.x(k))
    }

    /// Sobolev constant `sqrt(2) * max(sqrt(L), 1/sqrt(L))`.
    pub fn sobolev_constant(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.l.sqrt().max(1.0 / self.l.sqrt())
    }

    pub(crate) fn check<T>(&self, v: &[T]) -> Result<()> {
        check_len(self.k, v.len())
    }
}

/// `(v[k+1] - v[k]) / dx`, cyclic.
pub fn forward_diff<T: Scalar>(v: &[T], g: &Grid) -> Result<Vec<T>> {
    g.check(v)?;
    Ok(forward_diff_unchecked(v, g.dx()))
}

/// `(v[k] - v[k-1]) / dx`, cyclic.
pub fn backward_diff<T: Scalar>(v: &[T], g: &Grid) -> Result<Vec<T>> {
    g.check(v)?;
    let n = v.len();
    let inv = 1.0 / g.dx();
    Ok((0..n)
        .map(|k| (v[k] - v[(k + n - 1) % n]) * inv)
        .collect())
}

/// `(v[k+1] - 2 v[k] + v[k-1]) / dx^2`, cyclic.
pub fn second_diff<T: Scalar>(v: &[T], g: &Grid) -> Result<Vec<T>> {
    g.check(v)?;
    let mut out = vec![T::zero(); v.len()];
    second_diff_into(v, g.dx(), &mut out);
    Ok(out)
}

/// `(v[k+1] + v[k]) / 2`, cyclic. Neither scheme uses it.
pub fn forward_avg<T: Scalar>(v: &[T], g: &Grid) -> Result<Vec<T>> {
    g.check(v)?;
    let n = v.len();
    Ok((0..n).map(|k| (v[(k + 1) % n] + v[k]) * 0.5).collect())
}

/// Discrete inner product `sum_k v[k] * conj(w[k]) * dx`.
pub fn inner_product<T: Scalar>(v: &[T], w: &[T], g: &Grid) -> Result<T> {
    g.check(v)?;
    g.check(w)?;
    Ok(inner_unchecked(v, w, g.dx()))
}

/// Discrete `p`-norm; pass `f64::INFINITY` for the max norm.
pub fn norm_p<T: Scalar>(v: &[T], p: f64, g: &Grid) -> Result<f64> {
    g.check(v)?;
    if p.is_nan() || p < 1.0 {
        return Err(Error::Domain(format!("norm exponent must be >= 1, got {p}")));
    }
    if p.is_infinite() {
        return Ok(max_norm(v));
    }
    if p == 2.0 {
        return Ok(l2_norm(v, g.dx()));
    }
    let s: f64 = v.iter().map(|x| x.modulus().powf(p)).sum();
    Ok((s * g.dx()).powf(1.0 / p))
}

/// Temporal average `(a + b) / 2`.
pub fn avg2<T: Scalar>(a: &[T], b: &[T]) -> Result<Vec<T>> {
    check_len(a.len(), b.len())?;
    Ok(a.iter().zip(b).map(|(&x, &y)| (x + y) * 0.5).collect())
}

/// Temporal difference `(b - a) / dt`.
pub fn diff2<T: Scalar>(a: &[T], b: &[T], dt: f64) -> Result<Vec<T>> {
    check_len(a.len(), b.len())?;
    let inv = 1.0 / dt;
    Ok(a.iter().zip(b).map(|(&x, &y)| (y - x) * inv).collect())
}

// Unchecked kernels shared by the schemes; callers guarantee lengths.

pub(crate) fn forward_diff_unchecked<T: Scalar>(v: &[T], dx: f64) -> Vec<T> {
    let n = v.len();
    let inv = 1.0 / dx;
    (0..n).map(|k| (v[(k + 1) % n] - v[k]) * inv).collect()
}

pub(crate) fn second_diff_into<T: Scalar>(v: &[T], dx: f64, out: &mut [T]) {
    let n = v.len();
    let inv = 1.0 / (dx * dx);
    for k in 0..n {
        let left = v[(k + n - 1) % n];
        let right = v[(k + 1) % n];
        out[k] = (right - v[k] * 2.0 + left) * inv;
    }
}

pub(crate) fn second_diff_unchecked<T: Scalar>(v: &[T], dx: f64) -> Vec<T> {
    let mut out = vec![T::zero(); v.len()];
    second_diff_into(v, dx, &mut out);
    out
}

pub(crate) fn inner_unchecked<T: Scalar>(v: &[T], w: &[T], dx: f64) -> T {
    v.iter()
        .zip(w)
        .fold(T::zero(), |acc, (&a, &b)| acc + a * b.conjugate())
        * dx
}

pub(crate) fn l2_norm_sq<T: Scalar>(v: &[T], dx: f64) -> f64 {
    v.iter()
        .map(|x| {
            let m = x.modulus();
            m * m
        })
        .sum::<f64>()
        * dx
}

pub(crate) fn l2_norm<T: Scalar>(v: &[T], dx: f64) -> f64 {
    l2_norm_sq(v, dx).sqrt()
}

pub(crate) fn max_norm<T: Scalar>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}

pub(crate) fn abs_sq(e: &[Complex64]) -> Vec<f64> {
    e.iter().map(|z| z.norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(k: usize, l: f64) -> Grid {
        Grid::new(k, l).unwrap()
    }

    #[test]
    fn grid_rejects_bad_inputs() {
        assert!(Grid::new(2, 1.0).is_err());
        assert!(Grid::new(8, 0.0).is_err());
        assert!(Grid::new(8, f64::NAN).is_err());
        let g = Grid::with_spacing(20.0, 0.1).unwrap();
        assert_eq!(g.k(), 200);
        assert_eq!(g.dx(), 20.0 / 200.0);
    }

    #[test]
    fn constant_fields_are_annihilated() {
        let g = grid(16, 3.0);
        let c = vec![2.5; 16];
        for d in [
            forward_diff(&c, &g).unwrap(),
            backward_diff(&c, &g).unwrap(),
            second_diff(&c, &g).unwrap(),
        ] {
            assert!(d.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn direct_stencil_values() {
        let g = grid(4, 2.0);
        assert_eq!(
            forward_diff(&[0.0, 1.0, 0.0, 0.0], &g).unwrap(),
            vec![2.0, -2.0, 0.0, 0.0]
        );
        let g = grid(4, 4.0);
        assert_eq!(
            second_diff(&[1.0, 0.0, 0.0, 0.0], &g).unwrap(),
            vec![-2.0, 1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn backward_is_shifted_forward() {
        let g = grid(7, 1.3);
        let v: Vec<f64> = (0..7).map(|k| (k as f64 * 0.7).sin() + k as f64).collect();
        let f = forward_diff(&v, &g).unwrap();
        let b = backward_diff(&v, &g).unwrap();
        for k in 0..7 {
            assert_eq!(b[k], f[(k + 6) % 7]);
        }
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let g = grid(8, 1.0);
        assert!(matches!(
            forward_diff(&[1.0; 7], &g),
            Err(Error::Shape { expected: 8, got: 7 })
        ));
        assert!(inner_product(&[1.0; 8], &[1.0; 9], &g).is_err());
        assert!(avg2(&[1.0; 3], &[1.0; 4]).is_err());
    }

    #[test]
    fn norms_of_simple_fields() {
        let g = grid(200, 20.0);
        let one = vec![1.0; 200];
        assert!((norm_p(&one, 2.0, &g).unwrap() - 20f64.sqrt()).abs() < 1e-13);
        assert!((inner_product(&one, &one, &g).unwrap() - 20.0).abs() < 1e-12);
        let zero = vec![0.0; 200];
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(norm_p(&zero, p, &g).unwrap(), 0.0);
        }
        assert!(matches!(norm_p(&one, 0.5, &g), Err(Error::Domain(_))));
    }

    #[test]
    fn temporal_operators() {
        let v = vec![Complex64::new(1.0, -2.0); 5];
        assert_eq!(avg2(&v, &v).unwrap(), v);
        assert!(diff2(&v, &v, 0.1).unwrap().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn forward_avg_of_constant() {
        let g = grid(5, 1.0);
        assert_eq!(forward_avg(&[3.0; 5], &g).unwrap(), vec![3.0; 5]);
    }
}
