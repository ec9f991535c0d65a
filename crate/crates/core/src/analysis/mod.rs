//! Error measurement against exact solutions and stability scans.

pub mod exact;
pub mod quadrature;

use std::f64::consts::PI;

use crate::config::{Coupling, SchemeSpec};
use crate::error::{Error, Result};
use crate::geometry2d::{build_fake_cut_geometry, CutCellGeom2D};
use crate::mesh1d::{build_single_cut_mesh, Mesh1D};
use crate::schemes1d::{time_step_1d, Stepper1d};
use crate::schemes2d::{time_step_2d, Stepper2d};
use crate::state::{FvMesh, GridFn, Role};

use exact::{Exact1d, Exact2d};
use quadrature::{average_polygon, average_rect};

/// Tolerance for cell-average quadrature.
pub const QUAD_TOL: f64 = 1e-12;

/// How the one-step error treats the implicit part of the update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OneStepMode {
    /// Take a real step (including the implicit solve) from exact data.
    #[default]
    Solved,
    /// Substitute the exact new averages into the implicit fluxes.
    Substituted,
}

/// What the one-step error starts from and is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reference {
    #[default]
    Exact,
    /// The modified grid function w̄.
    Wbar,
}

pub fn exact_cell_averages_1d(sol: &Exact1d, mesh: &Mesh1D, t: f64) -> Result<GridFn> {
    let v = (0..mesh.n())
        .map(|i| sol.average(t, mesh.edges[i], mesh.edges[i + 1]))
        .collect::<Result<Vec<_>>>()?;
    GridFn::new(v, mesh)
}

/// Average of `sol` over extended cell `k` at time t (zero on solid cells).
pub fn exact_average_ext(sol: &Exact2d, geom: &CutCellGeom2D, k: usize, t: f64) -> Result<f64> {
    let c = &geom.cells[k];
    if c.alpha == 0.0 {
        return Ok(0.0);
    }
    let f = |x: f64, y: f64| sol.value(t, x, y);
    match &c.polygon {
        Some(p) => average_polygon(&f, p, c.alpha * geom.h * geom.h, QUAD_TOL),
        None => {
            let (ii, jj) = geom.ext_ij(k);
            let b = geom.cell_bounds(ii, jj);
            average_rect(&f, b.0, b.1, b.2, b.3, QUAD_TOL)
        }
    }
}

/// Averages over every extended cell (ghost frame included).
pub fn exact_averages_ext(sol: &Exact2d, geom: &CutCellGeom2D, t: f64) -> Result<Vec<f64>> {
    (0..geom.cells.len()).map(|k| exact_average_ext(sol, geom, k, t)).collect()
}

pub fn exact_cell_averages_2d(sol: &Exact2d, geom: &CutCellGeom2D, t: f64) -> Result<GridFn> {
    let v = (0..geom.n_cells())
        .map(|k| exact_average_ext(sol, geom, geom.ext_of_phys(k), t))
        .collect::<Result<Vec<_>>>()?;
    GridFn::new(v, geom)
}

/// γ on a cut cell: (β/2)(−λ² + (1−β) − (α²−1)/(12β))·h²·s_xx with β = (1+α)/2.
pub fn gamma0(alpha: f64, lambda: f64, h: f64, sxx: f64) -> f64 {
    let beta = 0.5 * (1.0 + alpha);
    0.5 * beta * (-lambda * lambda + (1.0 - beta) - (alpha * alpha - 1.0) / (12.0 * beta)) * h * h * sxx
}

/// Exact averages perturbed on the cut cells so that the mixed scheme with forward
/// slopes has a third-order one-step error everywhere.
pub fn modified_grid_function(sol: &Exact1d, mesh: &Mesh1D, t: f64, spec: &SchemeSpec) -> Result<GridFn> {
    let mut w = exact_cell_averages_1d(sol, mesh, t)?.into_values();
    let lambda = spec.velocity.0.abs() * time_step_1d(spec, mesh.h)? / mesh.h;
    for &c in &mesh.cut_cells {
        w[c] += gamma0(mesh.alpha, lambda, mesh.h, sol.dxx(t, mesh.centers[c]));
    }
    GridFn::new(w, mesh)
}

fn reference_1d(sol: &Exact1d, mesh: &Mesh1D, t: f64, spec: &SchemeSpec, r: Reference) -> Result<GridFn> {
    match r {
        Reference::Exact => exact_cell_averages_1d(sol, mesh, t),
        Reference::Wbar => modified_grid_function(sol, mesh, t, spec),
    }
}

/// Per-cell error of one step of length λh/|u| from t_n.
pub fn one_step_error_1d(
    spec: &SchemeSpec,
    mesh: &Mesh1D,
    sol: &Exact1d,
    t_n: f64,
    mode: OneStepMode,
    reference: Reference,
) -> Result<GridFn> {
    let dt = time_step_1d(spec, mesh.h)?;
    let s_n = reference_1d(sol, mesh, t_n, spec, reference)?;
    let s_np1 = reference_1d(sol, mesh, t_n + dt, spec, reference)?;
    let mut st = Stepper1d::new(mesh, spec, dt, Some(sol.clone()))?;
    let out = match mode {
        OneStepMode::Solved => st.step(s_n.values(), t_n)?,
        OneStepMode::Substituted => st.apply(s_n.values(), s_np1.values(), t_n),
    };
    GridFn::new(out, mesh)?.sub(&s_np1)
}

/// Per-cell one-step error of a 2D stepper from exact data at t_n.
pub fn one_step_error_2d(st: &mut Stepper2d, t_n: f64, mode: OneStepMode) -> Result<GridFn> {
    let sol = st.exact().clone();
    let s_n = exact_averages_ext(&sol, st.geom(), t_n)?;
    let s_np1 = exact_averages_ext(&sol, st.geom(), t_n + st.dt)?;
    let out = match mode {
        OneStepMode::Solved => st.step(&s_n, t_n)?,
        OneStepMode::Substituted => st.apply(&s_n, &s_np1, t_n)?,
    };
    let e: Vec<f64> = st.physical(&out).iter().zip(st.physical(&s_np1)).map(|(a, b)| a - b).collect();
    GridFn::new(e, st.geom())
}

/// One-step error on the transition cell nearest to `near` for the fake-cut 45° band
/// with u = v = 1, together with the predicted leading term
/// ¼(Δt² − Δt³/h)(s_xx − s_yy) at the cell centre.
pub fn transition_error_2d_check(sol: &Exact2d, spec: &SchemeSpec, n: usize, near: (f64, f64)) -> Result<(f64, f64)> {
    let spec = SchemeSpec { velocity: (1.0, 1.0), ..spec.clone() };
    let geom = build_fake_cut_geometry(n, 45.0, 0.0)?;
    let dt = time_step_2d(&spec, geom.h)?;
    let mut st = Stepper2d::new(&geom, &spec, dt, sol.clone())?;
    let err = one_step_error_2d(&mut st, 0.0, OneStepMode::Substituted)?;
    let g = st.geom();
    let best = (0..g.n * g.n)
        .filter(|&k| g.roles[g.ext_of_phys(k)] == Role::Transition)
        .min_by(|&a, &b| {
            let d = |k: usize| {
                let c = g.cells[g.ext_of_phys(k)].centroid;
                (c.0 - near.0).powi(2) + (c.1 - near.1).powi(2)
            };
            d(a).total_cmp(&d(b))
        })
        .ok_or_else(|| Error::Configuration("no transition cells".into()))?;
    let c = g.cells[g.ext_of_phys(best)].centroid;
    let (sxx, _, syy) = sol.hess(0.0, c.0, c.1);
    let h = g.h;
    let predicted = 0.25 * (dt * dt - dt * dt * dt / h) * (sxx - syy);
    Ok((err.values()[best], predicted))
}

/// Number of cells of the periodic grid used by [`amplification_scan`].
pub const SCAN_CELLS: usize = 256;

/// Largest |G| over all Fourier modes of one fully explicit step, for each CFL number.
pub fn amplification_scan(spec: &SchemeSpec, lambdas: &[f64]) -> Result<Vec<f64>> {
    let n = SCAN_CELLS;
    let h = 1.0 / n as f64;
    let mesh = build_single_cut_mesh(n - 1, 1.0, h)?;
    let base = SchemeSpec { coupling: Coupling::FullyExplicit, ..spec.clone() };
    lambdas
        .iter()
        .map(|&lam| {
            if !(lam > 0.0 && lam.is_finite()) {
                return Err(Error::param(format!("CFL number {lam} must be positive")));
            }
            // the time step carries λ; the spec only has to pass validation
            let spec = SchemeSpec { cfl: lam.min(1.0), ..base.clone() };
            let dt = lam * h / spec.velocity.0.abs();
            let mut st = Stepper1d::new(&mesh, &spec, dt, None)?;
            let mut worst = 0.0f64;
            for k in 0..=n / 2 {
                let th = 2.0 * PI * k as f64 / n as f64;
                let re: Vec<f64> = (0..n).map(|j| (th * j as f64).cos()).collect();
                let im: Vec<f64> = (0..n).map(|j| (th * j as f64).sin()).collect();
                let a = st.step(&re, 0.0)?;
                let b = st.step(&im, 0.0)?;
                let num: f64 = a.iter().zip(&b).map(|(x, y)| x * x + y * y).sum();
                worst = worst.max((num / n as f64).sqrt());
            }
            Ok(worst)
        })
        .collect()
}
