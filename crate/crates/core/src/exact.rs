//! Exact dn-soliton solutions, collision initial data, and truncation
//! residuals of exact samples in the DVDM equations.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{amplitude_phi_v_with, complete_e, complete_k, incomplete_e2, EllipticParameter, Jacobi};
use crate::error::{Error, Result};
use crate::grid::{abs_sq, forward_diff_unchecked, l2_norm, second_diff_unchecked, Grid};

/// Smallest `1 - q` the parameter search will consider.
const COMPLEMENT_FLOOR: f64 = 1e-300;
const BISECTION_MAX_ITER: usize = 200;
const K_TOLERANCE: f64 = 1e-12;
const RESIDUAL_WARNING: f64 = 1e-8;

/// Fully resolved parameters of a periodic dn-soliton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonParams {
    pub e_max: f64,
    pub l: f64,
    pub m: i32,
    pub v: f64,
    pub q: EllipticParameter,
    /// `K(q)` at the resolved parameter.
    pub k_q: f64,
    pub phi: f64,
    pub u: f64,
    pub n0: f64,
    pub v0: f64,
    /// `K(q)` minus its target value.
    pub k_residual: f64,
    /// Set when the parameter search could not reach `K_TOLERANCE`.
    pub precision_warning: bool,
}

impl SolitonParams {
    /// Factor mapping `x - vt` to the elliptic argument.
    pub fn xi_scale(&self) -> f64 {
        self.e_max / (2.0 * (1.0 - self.v * self.v)).sqrt()
    }

    /// Coefficient of `E₂` in the potential.
    pub fn potential_scale(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.v * self.e_max / (1.0 - self.v * self.v).sqrt()
    }

    /// Time for the wave to travel one period, `L / |v|`.
    pub fn period_time(&self) -> f64 {
        self.l / self.v.abs()
    }

    /// Time for the wave to travel unit distance, `1 / |v|`.
    pub fn unit_time(&self) -> f64 {
        1.0 / self.v.abs()
    }
}

/// Solve the periodicity constraints for the soliton of amplitude `e_max`,
/// period `l` and winding `m`.
pub fn resolve_soliton(e_max: f64, l: f64, m: i32) -> Result<SolitonParams> {
    if !(e_max.is_finite() && e_max > 0.0) {
        return Err(Error::Domain(format!("amplitude must be positive, got {e_max}")));
    }
    if !(l.is_finite() && l > 0.0) {
        return Err(Error::Domain(format!("period must be positive, got {l}")));
    }
    if m == 0 {
        return Err(Error::Domain("winding number m must be nonzero".into()));
    }
    let v = 4.0 * PI * m as f64 / l;
    if v.abs() >= 1.0 {
        return Err(Error::InfeasibleVelocity(v.abs()));
    }
    let one_minus_v2 = 1.0 - v * v;
    let target = e_max * l / (2.0 * (2.0 * one_minus_v2).sqrt());
    if target < 0.5 * PI {
        return Err(Error::InfeasibleAmplitude { required: target });
    }

    // K is decreasing in log(1 - q); bisect there so the search reaches
    // parameters far closer to one than 1 - 1e-16.
    let k_of = |s: f64| complete_k(EllipticParameter::from_complement(s.exp()).expect("in range"));
    let mut lo = COMPLEMENT_FLOOR.ln();
    let mut hi = 0.0_f64;
    for _ in 0..BISECTION_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let k_mid = k_of(mid);
        if (k_mid - target).abs() <= K_TOLERANCE * target.max(1.0) * 1e-3 {
            lo = mid;
            hi = mid;
            break;
        }
        if k_mid > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let pick = if (k_of(lo) - target).abs() < (k_of(hi) - target).abs() { lo } else { hi };
    let q = EllipticParameter::from_complement(pick.exp().min(1.0))?;
    let k_q = complete_k(q);
    let k_residual = k_q - target;

    let phi = 0.5 * v;
    let n0 = 2.0 * std::f64::consts::SQRT_2 * v * v * e_max * complete_e(q)
        / (l * one_minus_v2.sqrt());
    let u = 0.5 * v + 2.0 * n0 / v - (1.0 + q.complement()) * e_max * e_max / (v * one_minus_v2);
    Ok(SolitonParams {
        e_max,
        l,
        m,
        v,
        q,
        k_q,
        phi,
        u,
        n0,
        v0: 0.0,
        k_residual,
        precision_warning: k_residual.abs() > RESIDUAL_WARNING,
    })
}

/// Pointwise evaluator of one soliton, caching the elliptic machinery.
#[derive(Debug, Clone)]
pub struct Soliton {
    params: SolitonParams,
    jacobi: Jacobi,
    complete_e: f64,
}

/// Fields of a soliton at one time on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonSample {
    pub e: Vec<Complex64>,
    pub n: Vec<f64>,
    pub v: Vec<f64>,
    pub nt: Vec<f64>,
}

impl Soliton {
    pub fn new(params: SolitonParams) -> Self {
        Self {
            jacobi: Jacobi::new(params.q),
            complete_e: complete_e(params.q),
            params,
        }
    }

    pub fn params(&self) -> &SolitonParams {
        &self.params
    }

    fn dn_and_xi(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let xi = self.params.xi_scale() * (x - self.params.v * t);
        self.jacobi.snd(xi)
    }

    pub fn field(&self, t: f64, x: f64) -> Complex64 {
        let p = &self.params;
        let (_, _, dn) = self.dn_and_xi(t, x);
        Complex64::from_polar(p.e_max * dn, p.phi * (x - p.u * t))
    }

    pub fn density(&self, t: f64, x: f64) -> f64 {
        let p = &self.params;
        let (_, _, dn) = self.dn_and_xi(t, x);
        -p.e_max * p.e_max / (1.0 - p.v * p.v) * dn * dn + p.n0
    }

    /// Analytic time derivative of the density.
    pub fn density_rate(&self, t: f64, x: f64) -> f64 {
        let p = &self.params;
        let (sn, cn, dn) = self.dn_and_xi(t, x);
        let w = 1.0 - p.v * p.v;
        -2.0 * p.q.q() * p.v * p.e_max.powi(3) / (w * (2.0 * w).sqrt()) * sn * cn * dn
    }

    /// Potential with `N_t = V_xx`, `V_t = N + |E|²` and `V(0, 0) = V0`.
    pub fn potential(&self, t: f64, x: f64) -> f64 {
        let s = x - self.params.v * t;
        self.potential_shape(s) - self.params.n0 / self.params.v * s + self.params.v0
    }

    /// `c E₂(φ_V(s), q)`, the potential without its linear part.
    fn potential_shape(&self, s: f64) -> f64 {
        let p = &self.params;
        let phi_v = amplitude_phi_v_with(s, p, &self.jacobi);
        p.potential_scale() * self.e2(phi_v)
    }

    fn e2(&self, phi: f64) -> f64 {
        let turns = (phi / PI).round();
        let rest = phi - turns * PI;
        2.0 * turns * self.complete_e + incomplete_e2(rest, self.params.q)
    }

    pub fn sample(&self, g: &Grid, t: f64) -> SolitonSample {
        let xs: Vec<f64> = g.points().collect();
        SolitonSample {
            e: xs.iter().map(|&x| self.field(t, x)).collect(),
            n: xs.iter().map(|&x| self.density(t, x)).collect(),
            v: xs.iter().map(|&x| self.potential(t, x)).collect(),
            nt: xs.iter().map(|&x| self.density_rate(t, x)).collect(),
        }
    }

    /// Field and density only.
    pub fn sample_en(&self, g: &Grid, t: f64) -> (Vec<Complex64>, Vec<f64>) {
        let p = &self.params;
        let scale = p.xi_scale();
        let amp = -p.e_max * p.e_max / (1.0 - p.v * p.v);
        let mut e = Vec::with_capacity(g.k());
        let mut n = Vec::with_capacity(g.k());
        for x in g.points() {
            let (_, _, dn) = self.jacobi.snd(scale * (x - p.v * t));
            e.push(Complex64::from_polar(p.e_max * dn, p.phi * (x - p.u * t)));
            n.push(amp * dn * dn + p.n0);
        }
        (e, n)
    }
}

fn check_period(g: &Grid, l: f64) -> Result<()> {
    if (g.l() - l).abs() > 1e-12 * l {
        return Err(Error::Precondition(format!(
            "grid period {} does not match soliton period {}",
            g.l(),
            l
        )));
    }
    Ok(())
}

/// Sample `E`, `N`, `V`, `N_t` of the soliton on `g` at time `t`.
pub fn sample_single_soliton(p: &SolitonParams, g: &Grid, t: f64) -> Result<SolitonSample> {
    check_period(g, p.l)?;
    Ok(Soliton::new(*p).sample(g, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialVariant {
    Single,
    /// Collision data with the analytic `N_t` and the matching smooth potential.
    Collision0,
    /// Collision data with the piecewise potential and `N_t = D V`.
    Collision1,
}

/// Initial data for a run.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub e0: Vec<Complex64>,
    pub n0: Vec<f64>,
    pub nt0: Vec<f64>,
    pub v0: Vec<f64>,
    pub grid: Grid,
    pub variant: InitialVariant,
    /// `|E|` that the piecewise collision assembly replaced with zero.
    pub seam_jump: Option<f64>,
}

impl InitialData {
    pub fn single(p: &SolitonParams, g: &Grid) -> Result<Self> {
        let s = sample_single_soliton(p, g, 0.0)?;
        Ok(Self {
            e0: s.e,
            n0: s.n,
            nt0: s.nt,
            v0: s.v,
            grid: *g,
            variant: InitialVariant::Single,
            seam_jump: None,
        })
    }

    /// `sum_k nt0[k] dx`.
    pub fn nt_mass(&self) -> f64 {
        self.nt0.iter().sum::<f64>() * self.grid.dx()
    }
}

/// Two counter-propagating solitons on a domain of eight periods: the
/// right-mover (`m = +1`) on `[3L, 4L)`, the left-mover (`m = -1`) on
/// `(4L, 5L)`, and the edge state elsewhere.
pub fn sample_collision_initial(
    p: &SolitonParams,
    g: &Grid,
    variant: InitialVariant,
) -> Result<InitialData> {
    check_period(g, 8.0 * p.l)?;
    let cells = g.k() as f64 / 8.0;
    if !g.k().is_multiple_of(8) || (cells - cells.round()).abs() > 0.0 {
        return Err(Error::Precondition(format!(
            "{} cells do not split into 8 equal periods",
            g.k()
        )));
    }
    let per = g.k() / 8;
    let right = Soliton::new(resolve_soliton(p.e_max, p.l, p.m.abs())?);
    let left = Soliton::new(resolve_soliton(p.e_max, p.l, -p.m.abs())?);
    let rp = *right.params();
    let l = p.l;
    let edge_density = right.density(0.0, -0.5 * l);
    let seam_jump = right.field(0.0, -0.5 * l).norm();

    let mut e0 = vec![Complex64::new(0.0, 0.0); g.k()];
    let mut n0 = vec![edge_density; g.k()];
    let mut nt0 = vec![0.0; g.k()];
    let mut smooth_v = vec![0.0; g.k()];
    let mut piecewise_v = vec![0.0; g.k()];
    let offset = rp.n0 * l / (2.0 * rp.v);
    for k in 3 * per..5 * per {
        let x = g.x(k);
        if k < 4 * per {
            let s = x - 3.5 * l;
            e0[k] = right.field(0.0, s);
            n0[k] = right.density(0.0, s);
            nt0[k] = right.density_rate(0.0, s);
            smooth_v[k] = right.potential_shape(s) + offset;
            piecewise_v[k] = right.potential(0.0, s);
        } else {
            let s = x - 4.5 * l;
            // x = 4L is the shared edge: zero field, edge density.
            if k > 4 * per {
                e0[k] = left.field(0.0, s);
                n0[k] = left.density(0.0, s);
                nt0[k] = left.density_rate(0.0, s);
                piecewise_v[k] = left.potential(0.0, s);
            }
            smooth_v[k] = left.potential_shape(s) + offset;
        }
    }

    let (nt0, v0) = match variant {
        InitialVariant::Collision0 => (nt0, smooth_v),
        InitialVariant::Collision1 => (second_diff_unchecked(&piecewise_v, g.dx()), piecewise_v),
        InitialVariant::Single => {
            return Err(Error::Precondition("collision data needs a collision variant".into()))
        }
    };
    Ok(InitialData {
        e0,
        n0,
        nt0,
        v0,
        grid: *g,
        variant,
        seam_jump: Some(seam_jump),
    })
}

/// Norms of the residuals left by exact samples in the DVDM equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationResidual {
    pub field: f64,
    pub field_gradient: f64,
    pub density: f64,
    pub potential_gradient: f64,
}

impl TruncationResidual {
    pub fn as_array(&self) -> [f64; 4] {
        [self.field, self.field_gradient, self.density, self.potential_gradient]
    }
}

/// Plug exact samples at `t` and `t + dt` into the three DVDM equations.
pub fn truncation_residual(p: &SolitonParams, g: &Grid, t: f64, dt: f64) -> Result<TruncationResidual> {
    check_period(g, p.l)?;
    let sol = Soliton::new(*p);
    let a = sol.sample(g, t);
    let b = sol.sample(g, t + dt);
    let dx = g.dx();
    let k = g.k();
    let i = Complex64::new(0.0, 1.0);

    let mid_e: Vec<Complex64> = a.e.iter().zip(&b.e).map(|(x, y)| 0.5 * (x + y)).collect();
    let mid_n: Vec<f64> = a.n.iter().zip(&b.n).map(|(x, y)| 0.5 * (x + y)).collect();
    let mid_v: Vec<f64> = a.v.iter().zip(&b.v).map(|(x, y)| 0.5 * (x + y)).collect();
    let lap_e = second_diff_unchecked(&mid_e, dx);
    let lap_v = second_diff_unchecked(&mid_v, dx);
    let (ea, eb) = (abs_sq(&a.e), abs_sq(&b.e));

    let tau_e: Vec<Complex64> = (0..k)
        .map(|j| i * (b.e[j] - a.e[j]) / dt + lap_e[j] - mid_n[j] * mid_e[j])
        .collect();
    let tau_n: Vec<f64> = (0..k).map(|j| (b.n[j] - a.n[j]) / dt - lap_v[j]).collect();
    let tau_v: Vec<f64> = (0..k)
        .map(|j| (b.v[j] - a.v[j]) / dt - mid_n[j] - 0.5 * (ea[j] + eb[j]))
        .collect();

    Ok(TruncationResidual {
        field: l2_norm(&tau_e, dx),
        field_gradient: l2_norm(&forward_diff_unchecked(&tau_e, dx), dx),
        density: l2_norm(&tau_n, dx),
        potential_gradient: l2_norm(&forward_diff_unchecked(&tau_v, dx), dx),
    })
}
