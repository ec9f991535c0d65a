//! Browser bindings for the cutcell schemes.
//!
//! Each export has a plain Rust twin so the numerics can be tested natively.

use cutcell::analysis::amplification_scan;
use cutcell::analysis::exact::Exact1d;
use cutcell::analysis::exact_cell_averages_1d;
use cutcell::geometry2d::build_ramp_geometry;
use cutcell::mesh1d::build_single_cut_mesh;
use cutcell::schemes1d::{time_step_1d, Stepper1d};
use cutcell::{ExplicitScheme, SchemeSpec};
use wasm_bindgen::prelude::*;

type Result<T> = cutcell::Result<T>;

/// Hard cap on work per call so a slider drag can't freeze the tab.
const MAX_CELLS: usize = 4000;
const MAX_STEPS: usize = 20_000;

fn spec_for(scheme: &str, mixed: bool, cfl: f64) -> Result<SchemeSpec> {
    let e: ExplicitScheme = scheme.parse()?;
    let spec = if mixed { SchemeSpec::mixed(e) } else { SchemeSpec::explicit_only(e) };
    let spec = spec.with_cfl(cfl);
    spec.validate()?;
    Ok(spec)
}

fn limit(what: &str, v: usize, max: usize) -> Result<()> {
    if v == 0 || v > max {
        return Err(cutcell::Error::Parameter(format!("{what} must be in 1..={max}, got {v}")));
    }
    Ok(())
}

/// Advects a sine wave across a periodic grid of `n` full cells plus one cut cell of
/// relative size `alpha`, for `periods` domain crossings.
///
/// Returns `[x_0, s_0, e_0, x_1, s_1, e_1, ...]`: cell centre, computed and exact average.
pub fn profile_1d(scheme: &str, mixed: bool, n: usize, alpha: f64, cfl: f64, periods: f64) -> Result<Vec<f64>> {
    limit("cells", n, MAX_CELLS)?;
    let spec = spec_for(scheme, mixed, cfl)?;
    let h = 1.0 / n as f64;
    let mesh = build_single_cut_mesh(n, alpha, h)?;
    let len = mesh.domain_length();
    let sol = Exact1d::sine(len, 0.0, spec.velocity.0);
    let dt0 = time_step_1d(&spec, h)?;
    let t_end = periods.max(0.0) * len / spec.velocity.0.abs();
    let steps = (t_end / dt0).ceil() as usize;
    limit("steps", steps.max(1), MAX_STEPS)?;
    let dt = if steps == 0 { dt0 } else { t_end / steps as f64 };
    let mut st = Stepper1d::new(&mesh, &spec, dt, Some(sol.clone()))?;
    let mut s = exact_cell_averages_1d(&sol, &mesh, 0.0)?.values().to_vec();
    for k in 0..steps {
        s = st.step(&s, k as f64 * dt)?;
    }
    let exact = exact_cell_averages_1d(&sol, &mesh, steps as f64 * dt)?;
    Ok(mesh.centers.iter().zip(&s).zip(exact.values()).flat_map(|((&x, &v), &e)| [x, v, e]).collect())
}

/// Fluid volume fractions of the `n`×`n` ramp grid, row by row from the bottom.
pub fn ramp_alphas(n: usize, angle_deg: f64) -> Result<Vec<f64>> {
    limit("cells per side", n, 512)?;
    let g = build_ramp_geometry(n, angle_deg, 0.146)?;
    Ok((0..n * n).map(|k| g.cells[g.ext_of_phys(k)].alpha).collect())
}

/// Largest amplification factor of the explicit scheme on a uniform grid, per CFL number.
pub fn amplification(scheme: &str, lambdas: &[f64]) -> Result<Vec<f64>> {
    let spec = spec_for(scheme, false, 1.0)?;
    amplification_scan(&spec, lambdas)
}

fn js(e: cutcell::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = profile1d)]
pub fn profile_1d_js(scheme: &str, mixed: bool, n: usize, alpha: f64, cfl: f64, periods: f64) -> std::result::Result<Vec<f64>, JsError> {
    profile_1d(scheme, mixed, n, alpha, cfl, periods).map_err(js)
}

#[wasm_bindgen(js_name = rampAlphas)]
pub fn ramp_alphas_js(n: usize, angle_deg: f64) -> std::result::Result<Vec<f64>, JsError> {
    ramp_alphas(n, angle_deg).map_err(js)
}

#[wasm_bindgen(js_name = amplification)]
pub fn amplification_js(scheme: &str, lambdas: &[f64]) -> std::result::Result<Vec<f64>, JsError> {
    amplification(scheme, lambdas).map_err(js)
}
