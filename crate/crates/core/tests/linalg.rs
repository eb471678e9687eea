mod common;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

use common::*;
use zakharov_core::grid::second_diff;
use zakharov_core::linalg::{
    assemble_newton_system, factor, laplacian, poisson_meanzero, schrodinger_operator, solve, wave_operator,
    CyclicTridiagonal, DensityRow, PoissonSolver,
};
use zakharov_core::schemes::{dvdm_residual_fen, dvdm_residual_with_potential, pack, unpack};
use zakharov_core::{Error, Grid};

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let inv = a.clone().try_inverse().expect("invertible");
    a.norm() * inv.norm()
}

#[test]
fn cyclic_solves_match_dense_lu() {
    let mut r = rng(17);
    let mut tested = 0;
    for &k in &[4usize, 8, 16] {
        let mut count = 0;
        while count < 100 {
            let lower = random_real(&mut r, k, 1.0);
            let upper = random_real(&mut r, k, 1.0);
            let diag: Vec<f64> = random_real(&mut r, k, 2.0)
                .into_iter()
                .map(|d| d + 2.5f64.copysign(d))
                .collect();
            let dense = dense_cyclic(&lower, &diag, &upper);
            if condition_number(&dense) > 1e6 {
                continue;
            }
            let b = random_real(&mut r, k, 1.0);
            let a = CyclicTridiagonal::new(lower, diag, upper).unwrap();
            let x = solve(&a, &b).unwrap();
            let e = rel_err_real(&x, &dense_lu_solve_real(&dense, &b));
            assert!(e <= 1e-11, "K={k}: {e:e}");
            count += 1;
            tested += 1;
        }
    }
    assert_eq!(tested, 300);
}

#[test]
fn wave_operator_matches_dense_elimination() {
    let g = Grid::new(8, 4.0).unwrap();
    let dt = 0.1;
    let a = wave_operator(&g, dt).unwrap();
    let c = 0.5 * dt * dt / (g.dx() * g.dx());
    let dense = DMatrix::identity(8, 8) - dense_laplacian(8, g.dx()) * (0.5 * dt * dt);
    assert!((dense[(0, 7)] + c).abs() < 1e-15);
    let mut r = rng(1);
    let b = random_real(&mut r, 8, 1.0);
    let x = factor(&a).unwrap().solve(&b).unwrap();
    assert!(rel_err_real(&x, &dense_lu_solve_real(&dense, &b)) <= 1e-12);
}

#[test]
fn schrodinger_operator_matches_dense_complex() {
    let mut r = rng(2);
    for k in [4usize, 9, 16] {
        let g = Grid::new(k, 3.0).unwrap();
        let dt = 0.1;
        let n = random_real(&mut r, k, 2.0);
        let a = schrodinger_operator(&g, dt, &n).unwrap();
        let lap = dense_laplacian(k, g.dx()).map(|x| Complex64::new(x, 0.0));
        let diag_n = DMatrix::from_diagonal(&DVector::from_iterator(k, n.iter().map(|x| Complex64::new(*x, 0.0))));
        let dense = DMatrix::<Complex64>::identity(k, k) * Complex64::new(0.0, 2.0)
            + (lap - diag_n) * Complex64::new(dt, 0.0);
        let b = random_complex(&mut r, k, 1.0);
        let x = factor(&a).unwrap().solve(&b).unwrap();
        assert!(rel_err_complex(&x, &dense_lu_solve_complex(&dense, &b)) <= 1e-11);
    }
}

#[test]
fn identity_and_zero_rhs() {
    let a = CyclicTridiagonal::circulant(6, 0.0, 1.0, 0.0).unwrap();
    let b = vec![1.5, -2.0, 3.0, 0.25, 7.0, -1.0];
    assert_eq!(solve(&a, &b).unwrap(), b);
    let w = wave_operator(&Grid::new(6, 1.0).unwrap(), 0.3).unwrap();
    assert!(solve(&w, &[0.0; 6]).unwrap().iter().all(|x| *x == 0.0));
}

#[test]
fn repeated_solves_are_bitwise_identical() {
    let g = Grid::new(32, 5.0).unwrap();
    let a = wave_operator(&g, 0.05).unwrap();
    let f = factor(&a).unwrap();
    let mut r = rng(5);
    let b = random_real(&mut r, 32, 1.0);
    let x1 = f.solve(&b).unwrap();
    let x2 = f.solve(&b).unwrap();
    let x3 = factor(&a).unwrap().solve(&b).unwrap();
    assert_eq!(x1, x2);
    assert_eq!(x1, x3);
}

#[test]
fn singular_matrix_is_reported() {
    let lap = laplacian::<f64>(&Grid::new(8, 1.0).unwrap()).unwrap();
    assert!(matches!(factor(&lap), Err(Error::Singular { .. })));
}

#[test]
fn shape_errors_are_reported() {
    let a = wave_operator(&Grid::new(8, 1.0).unwrap(), 0.1).unwrap();
    assert!(matches!(solve(&a, &[1.0; 7]), Err(Error::Shape { .. })));
    assert!(CyclicTridiagonal::new(vec![1.0; 3], vec![1.0; 4], vec![1.0; 4]).is_err());
}

#[test]
fn poisson_trivial_cases() {
    let g = Grid::new(10, 7.0).unwrap();
    assert!(poisson_meanzero(&[0.0; 10], &g).unwrap().iter().all(|x| *x == 0.0));
    assert!(poisson_meanzero(&[3.25; 10], &g).unwrap().iter().all(|x| x.abs() < 1e-13));
}

#[test]
fn poisson_matches_pseudo_inverse() {
    let mut r = rng(9);
    for k in 3..=16 {
        for _ in 0..10 {
            let g = Grid::new(k, r.random_range(0.5..30.0)).unwrap();
            let rhs = random_real(&mut r, k, 1.0);
            let v = poisson_meanzero(&rhs, &g).unwrap();
            let oracle = pinv_solve(&dense_laplacian(k, g.dx()), &rhs);
            assert!(rel_err_real(&v, &oracle) <= 1e-11, "K={k}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn construct_and_recover(seed in any::<u64>(), k in 3usize..64, boost in 2.1f64..10.0) {
        let mut r = rng(seed);
        let lower = random_complex(&mut r, k, 1.0);
        let upper = random_complex(&mut r, k, 1.0);
        let diag: Vec<Complex64> = random_complex(&mut r, k, 1.0).into_iter().map(|d| d + boost).collect();
        let a = CyclicTridiagonal::new(lower, diag, upper).unwrap();
        let x_true = random_complex(&mut r, k, 1.0);
        let b = a.matvec(&x_true).unwrap();
        let x = factor(&a).unwrap().solve(&b).unwrap();
        prop_assert!(rel_err_complex(&x, &x_true) <= 1e-11);
        let resid: Vec<Complex64> = a.matvec(&x).unwrap().iter().zip(&b).map(|(p, q)| p - q).collect();
        let rn = resid.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let bn = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(rn <= 1e-11 * bn);
    }

    #[test]
    fn poisson_properties(seed in any::<u64>(), k in 3usize..200, l in 0.5f64..50.0, offset in -5.0f64..5.0) {
        let mut r = rng(seed);
        let g = Grid::new(k, l).unwrap();
        let rhs: Vec<f64> = random_real(&mut r, k, 1.0).into_iter().map(|x| x + offset).collect();
        let v = poisson_meanzero(&rhs, &g).unwrap();
        let rhs_norm = (rhs.iter().map(|x| x * x).sum::<f64>() * g.dx()).sqrt();
        let mean = v.iter().sum::<f64>() / k as f64;
        prop_assert!(mean.abs() <= 1e-13 * rhs_norm * l);
        let m = rhs.iter().sum::<f64>() / k as f64;
        let proj: Vec<f64> = rhs.iter().map(|x| x - m).collect();
        let back = second_diff(&v, &g).unwrap();
        prop_assert!(rel_err_real(&back, &proj) <= 1e-10);
    }

    #[test]
    fn poisson_recovers_mean_zero_fields(seed in any::<u64>(), k in 3usize..200, l in 0.5f64..50.0) {
        let mut r = rng(seed);
        let g = Grid::new(k, l).unwrap();
        let mut w = random_real(&mut r, k, 1.0);
        let m = w.iter().sum::<f64>() / k as f64;
        w.iter_mut().for_each(|x| *x -= m);
        let rhs = second_diff(&w, &g).unwrap();
        let v = PoissonSolver::new(g).unwrap().solve(&rhs).unwrap();
        prop_assert!(rel_err_real(&v, &w) <= 1e-10);
    }
}

struct NewtonCase {
    g: Grid,
    dt: f64,
    e_curr: Vec<Complex64>,
    n_curr: Vec<f64>,
    e_prev: Vec<Complex64>,
    n_prev: Vec<f64>,
    v_curr: Vec<f64>,
    guess: Vec<f64>,
}

fn newton_case(seed: u64, k: usize) -> NewtonCase {
    let mut r = rng(seed);
    let g = Grid::new(k, r.random_range(1.0..10.0)).unwrap();
    let l = g.l();
    NewtonCase {
        dt: r.random_range(0.02..0.2),
        e_curr: smooth_complex(&mut r, k, l, 2, 1.0),
        n_curr: smooth_real(&mut r, k, l, 2, 1.0),
        e_prev: smooth_complex(&mut r, k, l, 2, 1.0),
        n_prev: smooth_real(&mut r, k, l, 2, 1.0),
        v_curr: smooth_real(&mut r, k, l, 2, 1.0),
        guess: pack(&smooth_complex(&mut r, k, l, 2, 1.0), &smooth_real(&mut r, k, l, 2, 1.0)),
        g,
    }
}

impl NewtonCase {
    fn residual(&self, eliminated: bool) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
        move |x: &[f64]| {
            let (e, n) = unpack(x);
            if eliminated {
                dvdm_residual_fen(&e, &n, &self.e_curr, &self.n_curr, &self.e_prev, &self.n_prev, &self.g, self.dt)
                    .unwrap()
            } else {
                dvdm_residual_with_potential(&e, &n, &self.e_curr, &self.n_curr, &self.v_curr, &self.g, self.dt)
                    .unwrap()
            }
        }
    }

    fn jacobian(&self, eliminated: bool) -> DMatrix<f64> {
        let (eg, ng) = unpack(&self.guess);
        let row = if eliminated { DensityRow::eliminated(self.dt) } else { DensityRow::with_potential(self.dt) };
        let sys = assemble_newton_system(&self.e_curr, &self.n_curr, &eg, &ng, &self.g, self.dt, row).unwrap();
        to_dmatrix(&sys.matrix.to_dense())
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    for seed in 0..10 {
        for eliminated in [true, false] {
            let c = newton_case(seed, 16);
            let j = c.jacobian(eliminated);
            let fd = fd_jacobian(c.residual(eliminated), &c.guess, 1e-5);
            let err = (&j - &fd).amax() / fd.amax();
            assert!(err < 1e-7, "seed {seed}: {err:e}");
        }
    }
}

#[test]
fn jacobian_vector_product_error_is_first_order() {
    let c = newton_case(42, 16);
    let f = c.residual(true);
    let j = c.jacobian(true);
    let mut r = rng(43);
    let dir = DVector::from_vec(random_real(&mut r, 48, 1.0));
    let f0 = DVector::from_vec(f(&c.guess));
    let defect = |h: f64| {
        let x: Vec<f64> = c.guess.iter().zip(dir.iter()).map(|(a, d)| a + h * d).collect();
        let diff = DVector::from_vec(f(&x)) - &f0;
        (&j * &dir * h - diff).norm() / (h * dir.norm())
    };
    let (a, b, c2) = (defect(1e-2), defect(5e-3), defect(2.5e-3));
    assert!((a / b - 2.0).abs() < 0.1 && (b / c2 - 2.0).abs() < 0.1, "{a:e} {b:e} {c2:e}");
}

#[test]
fn structural_nonzeros_cover_the_dense_pattern() {
    for seed in 0..5 {
        let c = newton_case(seed, 8);
        let (eg, ng) = unpack(&c.guess);
        let sys = assemble_newton_system(&c.e_curr, &c.n_curr, &eg, &ng, &c.g, c.dt, DensityRow::eliminated(c.dt))
            .unwrap();
        let fd = fd_jacobian(c.residual(true), &c.guess, 1e-5);
        let scan = fd.iter().filter(|v| v.abs() > 1e-6 * fd.amax()).count();
        assert_eq!(sys.nnz(), scan, "seed {seed}");
        assert!(sys.nnz() <= 19 * 8);
    }
}

#[test]
fn zero_fields_give_the_linear_schrodinger_block() {
    let k = 8;
    let g = Grid::new(k, 4.0).unwrap();
    let dt = 0.1;
    let z = vec![Complex64::new(0.0, 0.0); k];
    let n = vec![0.0; k];
    let sys = assemble_newton_system(&z, &n, &z, &n, &g, dt, DensityRow::eliminated(dt)).unwrap();
    let j = to_dmatrix(&sys.matrix.to_dense());
    let lap = dense_laplacian(k, g.dx());
    // Real form of (2i I + dt D) / (2 dt) acting on (Re, Im).
    for a in 0..k {
        for b in 0..k {
            let s = lap[(a, b)] / 2.0;
            let i = if a == b { 1.0 / dt } else { 0.0 };
            let block = [[s, -i], [i, s]];
            for (ra, row) in block.iter().enumerate() {
                for (cb, want) in row.iter().enumerate() {
                    let got = j[(3 * a + ra, 3 * b + cb)];
                    assert!((got - want).abs() < 1e-12, "({a},{b}) {got} vs {want}");
                }
            }
            assert_eq!(j[(3 * a, 3 * b + 2)], 0.0);
            assert_eq!(j[(3 * a + 2, 3 * b)], 0.0);
        }
    }
}

#[test]
fn newton_solve_matches_dense_lu_at_small_k() {
    for seed in 0..100 {
        let k = 3 + (seed as usize % 14);
        let c = newton_case(seed, k);
        let (eg, ng) = unpack(&c.guess);
        let sys = assemble_newton_system(&c.e_curr, &c.n_curr, &eg, &ng, &c.g, c.dt, DensityRow::eliminated(c.dt))
            .unwrap();
        let mut r = rng(seed + 1000);
        let b = random_real(&mut r, 3 * k, 1.0);
        let x = sys.solve(&b).unwrap();
        let oracle = dense_lu_solve_real(&to_dmatrix(&sys.matrix.to_dense()), &b);
        assert!(rel_err_real(&x, &oracle) <= 1e-11, "seed {seed}");
    }
}
