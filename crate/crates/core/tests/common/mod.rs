//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_real(rng: &mut StdRng, k: usize, scale: f64) -> Vec<f64> {
    (0..k).map(|_| rng.random_range(-scale..scale)).collect()
}

pub fn random_complex(rng: &mut StdRng, k: usize, scale: f64) -> Vec<Complex64> {
    (0..k)
        .map(|_| Complex64::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect()
}

/// Smooth periodic real field: a few random Fourier modes.
pub fn smooth_real(rng: &mut StdRng, k: usize, l: f64, modes: usize, scale: f64) -> Vec<f64> {
    let coeffs: Vec<(f64, f64)> = (0..modes)
        .map(|_| (rng.random_range(-scale..scale), rng.random_range(-scale..scale)))
        .collect();
    let c0 = rng.random_range(-scale..scale);
    (0..k)
        .map(|j| {
            let x = j as f64 * l / k as f64;
            c0 + coeffs
                .iter()
                .enumerate()
                .map(|(m, (a, b))| {
                    let w = 2.0 * std::f64::consts::PI * (m + 1) as f64 * x / l;
                    a * w.cos() + b * w.sin()
                })
                .sum::<f64>()
        })
        .collect()
}

pub fn smooth_complex(rng: &mut StdRng, k: usize, l: f64, modes: usize, scale: f64) -> Vec<Complex64> {
    let re = smooth_real(rng, k, l, modes, scale);
    let im = smooth_real(rng, k, l, modes, scale);
    re.into_iter().zip(im).map(|(a, b)| Complex64::new(a, b)).collect()
}

/// Dense matrix of a cyclic tridiagonal operator built straight from its
/// bands: row `k` holds `lower[k]` at column `k-1`, `diag[k]` at `k`,
/// `upper[k]` at `k+1`, indices mod `n`.
pub fn dense_cyclic<T: nalgebra::ComplexField + Copy>(lower: &[T], diag: &[T], upper: &[T]) -> DMatrix<T> {
    let n = diag.len();
    let mut a = DMatrix::<T>::zeros(n, n);
    for k in 0..n {
        a[(k, k)] += diag[k];
        a[(k, (k + n - 1) % n)] += lower[k];
        a[(k, (k + 1) % n)] += upper[k];
    }
    a
}

pub fn dense_lu_solve_real(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let x = a
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .expect("oracle matrix is singular");
    x.iter().copied().collect()
}

pub fn dense_lu_solve_complex(a: &DMatrix<Complex64>, b: &[Complex64]) -> Vec<Complex64> {
    let x = a
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(b))
        .expect("oracle matrix is singular");
    x.iter().copied().collect()
}

/// Periodic second-difference matrix.
pub fn dense_laplacian(k: usize, dx: f64) -> DMatrix<f64> {
    let h = 1.0 / (dx * dx);
    dense_cyclic(&vec![h; k], &vec![-2.0 * h; k], &vec![h; k])
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix applied to `b`,
/// from its eigendecomposition. Panics if the decomposition does not
/// reproduce `a`.
pub fn pinv_solve(a: &DMatrix<f64>, b: &[f64]) -> Vec<f64> {
    let eig = a.clone().symmetric_eigen();
    let rebuilt = eig.recompose();
    let scale = a.amax();
    assert!((rebuilt - a).amax() <= 1e-12 * scale, "eigendecomposition oracle is inaccurate");
    let cutoff = 1e-10 * scale;
    let b = DVector::from_column_slice(b);
    let mut x = DVector::zeros(b.len());
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > cutoff {
            let v = eig.eigenvectors.column(i);
            x += v * (v.dot(&b) / lambda);
        }
    }
    x.iter().copied().collect()
}

pub fn rel_err_real(x: &[f64], y: &[f64]) -> f64 {
    let num = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let den = y.iter().map(|b| b * b).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    num / den
}

pub fn rel_err_complex(x: &[Complex64], y: &[Complex64]) -> f64 {
    let num = x.iter().zip(y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let den = y.iter().map(|b| b.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    num / den
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * x * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre on `[a, b]` with `panels` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * h;
            rule.iter()
                .map(|(x, w)| w * f(lo + 0.5 * h * (x + 1.0)))
                .sum::<f64>()
                * 0.5
                * h
        })
        .sum()
}

/// Central finite-difference Jacobian of `f` at `x`.
pub fn fd_jacobian<F: Fn(&[f64]) -> Vec<f64>>(f: F, x: &[f64], h: f64) -> DMatrix<f64> {
    let m = f(x).len();
    let mut j = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    for c in 0..x.len() {
        let orig = xp[c];
        xp[c] = orig + h;
        let fp = f(&xp);
        xp[c] = orig - h;
        let fm = f(&xp);
        xp[c] = orig;
        for r in 0..m {
            j[(r, c)] = (fp[r] - fm[r]) / (2.0 * h);
        }
    }
    j
}

pub fn to_dmatrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(n, m, |i, j| rows[i][j])
}

/// `K` from the complement `m' = 1 - q` by quadrature of
/// `∫₀^∞ dt / sqrt((1 + t²)(1 + m' t²))` after `t = e^s`. Stays accurate for
/// `m'` down to the smallest normal floats.
pub fn k_oracle(complement: f64) -> f64 {
    let rule = gauss_legendre(32);
    let hi = 0.5 * (1.0 / complement).ln() + 40.0;
    integrate(
        |s| {
            let t2 = (2.0 * s).exp();
            s.exp() / ((1.0 + t2) * (1.0 + complement * t2)).sqrt()
        },
        -40.0,
        hi,
        400,
        &rule,
    )
}

/// `E(q) = ∫₀^∞ sqrt(1 + m' t²) / (1 + t²)^{3/2} dt`, same substitution.
pub fn e_oracle(complement: f64) -> f64 {
    let rule = gauss_legendre(32);
    let hi = 0.5 * (1.0 / complement).ln() + 40.0;
    integrate(
        |s| {
            let t2 = (2.0 * s).exp();
            s.exp() * (1.0 + complement * t2).sqrt() / (1.0 + t2).powf(1.5)
        },
        -40.0,
        hi.max(40.0),
        400,
        &rule,
    )
}
