//! Browser bindings: sample the travelling soliton, watch the energy of
//! the schemes drift over time, and plot Jacobi elliptic functions.
//!
//! Each export is a thin wrapper over a plain function so the numerics can
//! be tested natively.

use wasm_bindgen::prelude::*;
use zakharov_core::elliptic::{complete_k, EllipticParameter, Jacobi};
use zakharov_core::exact::sample_single_soliton;
use zakharov_core::harness::{run_experiment, ExperimentConfig, Horizon};
use zakharov_core::schemes::SchemeKind;
use zakharov_core::{resolve_soliton, Grid};

/// Soliton snapshot on a periodic grid.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct Profile {
    x: Vec<f64>,
    field_abs: Vec<f64>,
    field_re: Vec<f64>,
    density: Vec<f64>,
    velocity: f64,
    period_time: f64,
}

#[wasm_bindgen]
impl Profile {
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }

    #[wasm_bindgen(js_name = fieldAbs)]
    pub fn field_abs(&self) -> Vec<f64> {
        self.field_abs.clone()
    }

    #[wasm_bindgen(js_name = fieldRe)]
    pub fn field_re(&self) -> Vec<f64> {
        self.field_re.clone()
    }

    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    #[wasm_bindgen(getter, js_name = periodTime)]
    pub fn period_time(&self) -> f64 {
        self.period_time
    }
}

pub fn soliton_profile(e_max: f64, l: f64, k: usize, t: f64) -> Result<Profile, String> {
    let p = resolve_soliton(e_max, l, 1).map_err(|e| e.to_string())?;
    let g = Grid::new(k, l).map_err(|e| e.to_string())?;
    let s = sample_single_soliton(&p, &g, t).map_err(|e| e.to_string())?;
    Ok(Profile {
        x: g.points().collect(),
        field_abs: s.e.iter().map(|z| z.norm()).collect(),
        field_re: s.e.iter().map(|z| z.re).collect(),
        density: s.n,
        velocity: p.v,
        period_time: p.period_time(),
    })
}

/// Energy drift `|ℰ(t) - ℰ_ref|` of one scheme, one value per step.
pub fn energy_drift(scheme: &str, e_max: f64, dt: f64, periods: f64) -> Result<Vec<f64>, String> {
    let scheme: SchemeKind = scheme.parse().map_err(|e: zakharov_core::Error| e.to_string())?;
    let cfg = ExperimentConfig::new(scheme, e_max, dt).with_horizon(Horizon::Periods(periods));
    let r = run_experiment(&cfg).map_err(|e| e.to_string())?;
    if let Some(f) = r.failure {
        return Err(f);
    }
    let skip = usize::from(scheme.is_glassey());
    Ok(r.series
        .iter()
        .enumerate()
        .map(|(i, s)| if i < skip { 0.0 } else { (s.energy - r.e0_energy).abs() })
        .collect())
}

/// `sn`, `cn`, `dn` at `n` points over one full period `[0, 4K]`,
/// concatenated: `[u..., sn..., cn..., dn...]`.
pub fn jacobi_curves(q: f64, n: usize) -> Result<Vec<f64>, String> {
    let param = EllipticParameter::new(q).map_err(|e| e.to_string())?;
    let jac = Jacobi::new(param);
    let period = 4.0 * complete_k(param);
    let n = n.max(2);
    let mut out = vec![0.0; 4 * n];
    for i in 0..n {
        let u = period * i as f64 / (n - 1) as f64;
        let (sn, cn, dn) = jac.snd(u);
        out[i] = u;
        out[n + i] = sn;
        out[2 * n + i] = cn;
        out[3 * n + i] = dn;
    }
    Ok(out)
}

#[wasm_bindgen(js_name = solitonProfile)]
pub fn soliton_profile_js(e_max: f64, l: f64, k: usize, t: f64) -> Result<Profile, JsError> {
    soliton_profile(e_max, l, k, t).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = energyDrift)]
pub fn energy_drift_js(scheme: &str, e_max: f64, dt: f64, periods: f64) -> Result<Vec<f64>, JsError> {
    energy_drift(scheme, e_max, dt, periods).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = jacobiCurves)]
pub fn jacobi_curves_js(q: f64, n: usize) -> Result<Vec<f64>, JsError> {
    jacobi_curves(q, n).map_err(|e| JsError::new(&e))
}
