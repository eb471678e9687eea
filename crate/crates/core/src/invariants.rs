//! Discrete invariants, a-priori bound monitors and error norms.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{forward_diff_unchecked, l2_norm, l2_norm_sq, max_norm, Grid};
use crate::schemes::State;

/// Norm, energy and bounded quantities of one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantSample {
    pub step: usize,
    pub norm: f64,
    pub energy: f64,
    /// `|E|`, `|δ⁺E|`, `|E|_∞`, `|N|`, `|δ⁺V|`.
    pub bound_monitor: [f64; 5],
}

/// Distance of a level from a reference at the same time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub step: usize,
    pub err_e: f64,
    pub err_n: f64,
}

/// `|E|²`.
pub fn norm_invariant(s: &State, g: &Grid) -> Result<f64> {
    g.check(&s.e)?;
    Ok(l2_norm_sq(&s.e, g.dx()))
}

fn weighted_coupling(n: &[f64], e: &[Complex64], dx: f64) -> f64 {
    n.iter().zip(e).map(|(n, e)| n * e.norm_sqr()).sum::<f64>() * dx
}

pub(crate) fn dvdm_energy_parts(e: &[Complex64], n: &[f64], v: &[f64], dx: f64) -> f64 {
    let de = forward_diff_unchecked(e, dx);
    let dv = forward_diff_unchecked(v, dx);
    l2_norm_sq(&de, dx) + 0.5 * (l2_norm_sq(n, dx) + l2_norm_sq(&dv, dx)) + weighted_coupling(n, e, dx)
}

pub(crate) fn glassey_energy_parts(e_next: &[Complex64], n_next: &[f64], n_curr: &[f64], v_curr: &[f64], dx: f64) -> f64 {
    let de = forward_diff_unchecked(e_next, dx);
    let dv = forward_diff_unchecked(v_curr, dx);
    let mid: Vec<f64> = n_curr.iter().zip(n_next).map(|(a, b)| 0.5 * (a + b)).collect();
    l2_norm_sq(&de, dx)
        + 0.5 * (0.5 * (l2_norm_sq(n_next, dx) + l2_norm_sq(n_curr, dx)) + l2_norm_sq(&dv, dx))
        + weighted_coupling(&mid, e_next, dx)
}

/// `|δ⁺E|² + (|N|² + |δ⁺V|²)/2 + <N, |E|²>`.
pub fn energy_dvdm(s: &State, g: &Grid) -> Result<f64> {
    let v = s
        .v
        .as_deref()
        .ok_or_else(|| Error::Precondition("energy needs the potential V".into()))?;
    g.check(&s.e)?;
    g.check(&s.n)?;
    g.check(v)?;
    Ok(dvdm_energy_parts(&s.e, &s.n, v, g.dx()))
}

/// Two-level energy of Glassey's scheme at the level of `next`, with
/// `v_curr` the potential between `curr` and `next`.
pub fn energy_glassey(curr: &State, next: &State, v_curr: &[f64], g: &Grid) -> Result<f64> {
    g.check(&curr.n)?;
    g.check(&next.e)?;
    g.check(&next.n)?;
    g.check(v_curr)?;
    Ok(glassey_energy_parts(&next.e, &next.n, &curr.n, v_curr, g.dx()))
}

/// The five quantities that stay uniformly bounded along a DVDM trajectory.
/// A missing potential contributes zero.
pub fn bound_monitor(s: &State, g: &Grid) -> Result<[f64; 5]> {
    g.check(&s.e)?;
    g.check(&s.n)?;
    let dx = g.dx();
    let dv = match s.v.as_deref() {
        Some(v) => {
            g.check(v)?;
            l2_norm(&forward_diff_unchecked(v, dx), dx)
        }
        None => 0.0,
    };
    Ok([
        l2_norm(&s.e, dx),
        l2_norm(&forward_diff_unchecked(&s.e, dx), dx),
        max_norm(&s.e),
        l2_norm(&s.n, dx),
        dv,
    ])
}

/// L² distances of `(E, N)` from a reference sampled at `ref_t`.
pub fn error_vs_reference(
    s: &State,
    ref_e: &[Complex64],
    ref_n: &[f64],
    ref_t: f64,
    g: &Grid,
) -> Result<ErrorRecord> {
    if (s.t - ref_t).abs() > 1e-9 * s.t.abs().max(1.0) {
        return Err(Error::Precondition(format!(
            "state at t = {} compared with reference at t = {ref_t}",
            s.t
        )));
    }
    g.check(&s.e)?;
    g.check(&s.n)?;
    g.check(ref_e)?;
    g.check(ref_n)?;
    Ok(ErrorRecord {
        step: s.step,
        err_e: field_distance(&s.e, ref_e, g.dx()),
        err_n: field_distance(&s.n, ref_n, g.dx()),
    })
}

pub(crate) fn field_distance<T>(a: &[T], b: &[T], dx: f64) -> f64
where
    T: crate::grid::Scalar,
{
    let d: Vec<T> = a.iter().zip(b).map(|(x, y)| *x - *y).collect();
    l2_norm(&d, dx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(e: Vec<Complex64>, n: Vec<f64>, v: Option<Vec<f64>>) -> State {
        State { e, n, v, step: 0, t: 0.0 }
    }

    #[test]
    fn trivial_values() {
        let g = Grid::new(40, 20.0).unwrap();
        let one = vec![Complex64::new(1.0, 0.0); 40];
        let z = vec![0.0; 40];
        let s = state(one, z.clone(), Some(z.clone()));
        assert!((norm_invariant(&s, &g).unwrap() - 20.0).abs() < 1e-12);
        let zero = state(vec![Complex64::new(0.0, 0.0); 40], z.clone(), Some(z.clone()));
        assert_eq!(energy_dvdm(&zero, &g).unwrap(), 0.0);
        assert_eq!(energy_glassey(&zero, &zero, &z, &g).unwrap(), 0.0);
        assert!(energy_dvdm(&state(zero.e.clone(), z, None), &g).is_err());
    }

    #[test]
    fn misaligned_times_are_rejected() {
        let g = Grid::new(4, 1.0).unwrap();
        let mut s = state(vec![Complex64::new(0.0, 0.0); 4], vec![0.0; 4], None);
        s.t = 0.5;
        let r = error_vs_reference(&s, &s.e.clone(), &s.n.clone(), 0.5, &g).unwrap();
        assert_eq!((r.err_e, r.err_n), (0.0, 0.0));
        assert!(error_vs_reference(&s, &s.e.clone(), &s.n.clone(), 0.6, &g).is_err());
    }
}
