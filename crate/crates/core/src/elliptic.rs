//! Jacobi elliptic functions and Legendre elliptic integrals.
//!
//! The parameter `q` multiplies `sin^2`: `K(q) = ∫₀^{π/2} dθ / sqrt(1 - q sin²θ)`.
//! It is the square of the modulus, never the modulus itself.
//!
//! Soliton profiles on long periods push `q` so close to one that `1 - q`
//! is not representable as `1.0 - q`. [`EllipticParameter`] therefore
//! carries the complement `1 - q` alongside `q`, and every routine here
//! reads whichever of the two is accurate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::SolitonParams;

const AGM_MAX_ITER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticParameter {
    q: f64,
    complement: f64,
}

impl EllipticParameter {
    /// `q` must lie in `[0, 1)`.
    pub fn new(q: f64) -> Result<Self> {
        if !(q.is_finite() && (0.0..1.0).contains(&q)) {
            return Err(Error::Domain(format!("elliptic parameter q = {q} outside [0, 1)")));
        }
        Ok(Self {
            q,
            complement: 1.0 - q,
        })
    }

    /// Build from `1 - q`, which must lie in `(0, 1]`.
    pub fn from_complement(complement: f64) -> Result<Self> {
        if !(complement.is_finite() && complement > 0.0 && complement <= 1.0) {
            return Err(Error::Domain(format!(
                "complementary parameter 1 - q = {complement} outside (0, 1]"
            )));
        }
        Ok(Self {
            q: 1.0 - complement,
            complement,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `1 - q`, accurate even when `q` rounds to one.
    pub fn complement(&self) -> f64 {
        self.complement
    }
}

/// Complete integral of the first kind via the arithmetic-geometric mean.
pub fn complete_k(q: EllipticParameter) -> f64 {
    PI / (2.0 * agm(1.0, q.complement.sqrt()))
}

/// Complete integral of the second kind, `E₂(π/2, q)`.
pub fn complete_e(q: EllipticParameter) -> f64 {
    let m = q.q;
    carlson_rf(0.0, q.complement, 1.0) - m / 3.0 * carlson_rd(0.0, q.complement, 1.0)
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
    }
    a
}

/// Jacobi `sn`, `cn`, `dn` for a fixed parameter, with the descending Landen
/// sequence computed once and reused for every argument.
#[derive(Debug, Clone)]
pub struct Jacobi {
    param: EllipticParameter,
    quarter_period: f64,
    // c_n / a_n for n = 1..=N
    ratios: Vec<f64>,
    // 2^N a_N
    scale: f64,
}

impl Jacobi {
    pub fn new(param: EllipticParameter) -> Self {
        let mut a = 1.0;
        let mut b = param.complement.sqrt();
        let mut c = param.q.sqrt();
        let mut ratios = Vec::new();
        let mut two_pow = 1.0;
        while c.abs() > 1e-16 * a && ratios.len() < AGM_MAX_ITER {
            let next_a = 0.5 * (a + b);
            c = 0.5 * (a - b);
            b = (a * b).sqrt();
            a = next_a;
            ratios.push(c / a);
            two_pow *= 2.0;
        }
        Self {
            param,
            quarter_period: PI / (2.0 * a),
            ratios,
            scale: two_pow * a,
        }
    }

    pub fn parameter(&self) -> EllipticParameter {
        self.param
    }

    /// `K(q)`.
    pub fn quarter_period(&self) -> f64 {
        self.quarter_period
    }

    /// Amplitude `φ` with `u = F(φ, q)`, for `|u| <= 2K`.
    fn amplitude_reduced(&self, u: f64) -> f64 {
        let mut phi = self.scale * u;
        for &ratio in self.ratios.iter().rev() {
            let s = (ratio * phi.sin()).clamp(-1.0, 1.0);
            phi = 0.5 * (phi + s.asin());
        }
        phi
    }

    pub fn snd(&self, u: f64) -> (f64, f64, f64) {
        let period = 4.0 * self.quarter_period;
        let reduced = u - period * (u / period).round();
        let phi = self.amplitude_reduced(reduced);
        let (sn, cn) = phi.sin_cos();
        // 1 - q sn² written so that it stays accurate as q -> 1.
        let dn = (cn * cn + self.param.complement * sn * sn).sqrt();
        (sn, cn, dn)
    }
}

/// `(sn, cn, dn)(u | q)`.
pub fn jacobi_snd(u: f64, q: EllipticParameter) -> (f64, f64, f64) {
    Jacobi::new(q).snd(u)
}

/// Incomplete integral of the second kind `E₂(φ, q) = ∫₀^φ sqrt(1 - q sin²θ) dθ`,
/// any real `φ`.
pub fn incomplete_e2(phi: f64, q: EllipticParameter) -> f64 {
    let turns = (phi / PI).round();
    let r = phi - turns * PI;
    let base = if turns == 0.0 { 0.0 } else { 2.0 * turns * complete_e(q) };
    base + incomplete_e2_reduced(r, q)
}

fn incomplete_e2_reduced(phi: f64, q: EllipticParameter) -> f64 {
    let (s, c) = phi.sin_cos();
    let c2 = c * c;
    let y = c2 + q.complement * s * s;
    s * carlson_rf(c2, y, 1.0) - q.q / 3.0 * s * s * s * carlson_rd(c2, y, 1.0)
}

/// Continuous amplitude used by the soliton potential: on the branch
/// `(l - 1/2) L < x <= (l + 1/2) L` it is `lπ + asin(sn(ξ(x) - 2lK))`.
pub fn amplitude_phi_v(x: f64, params: &SolitonParams) -> f64 {
    amplitude_phi_v_with(x, params, &Jacobi::new(params.q))
}

pub(crate) fn amplitude_phi_v_with(x: f64, params: &SolitonParams, jacobi: &Jacobi) -> f64 {
    let branch = (x / params.l - 0.5).ceil();
    let arg = params.xi_scale() * x - 2.0 * branch * params.k_q;
    let (sn, cn, _) = jacobi.snd(arg);
    // cn >= 0 on this branch, so atan2 equals asin(sn) without the
    // ill-conditioning of asin near ±1.
    branch * PI + sn.atan2(cn)
}

/// Carlson's symmetric integral `R_F(x, y, z)`; at most one argument may be zero.
pub fn carlson_rf(x: f64, y: f64, z: f64) -> f64 {
    const TOL: f64 = 0.0008;
    let (mut x, mut y, mut z) = (x, y, z);
    let mut mean;
    let (mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        mean = (x + y + z) / 3.0;
        dx = (mean - x) / mean;
        dy = (mean - y) / mean;
        dz = (mean - z) / mean;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= TOL {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (e2 / 24.0 - 0.1 - 3.0 / 44.0 * e3) * e2 + e3 / 14.0) / mean.sqrt()
}

/// Carlson's symmetric integral `R_D(x, y, z)`; `z > 0`, at most one of `x`, `y` zero.
pub fn carlson_rd(x: f64, y: f64, z: f64) -> f64 {
    const TOL: f64 = 0.0005;
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 6.0;
    const C3: f64 = 9.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.25 * C3;
    const C6: f64 = 1.5 * C4;
    let (mut x, mut y, mut z) = (x, y, z);
    let mut sum = 0.0;
    let mut fac = 1.0;
    let mut mean;
    let (mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        sum += fac / (sz * (z + lambda));
        fac *= 0.25;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        mean = 0.2 * (x + y + 3.0 * z);
        dx = (mean - x) / mean;
        dy = (mean - y) / mean;
        dz = (mean - z) / mean;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= TOL {
            break;
        }
    }
    let ea = dx * dy;
    let eb = dz * dz;
    let ec = ea - eb;
    let ed = ea - 6.0 * eb;
    let ee = ed + ec + ec;
    3.0 * sum
        + fac
            * (1.0 + ed * (-C1 + C5 * ed - C6 * dz * ee)
                + dz * (C2 * ee + dz * (-C3 * ec + dz * C4 * ea)))
            / (mean * mean.sqrt())
}
