//! Flux-bounded explicit/implicit update on a generic face graph.
//!
//! Explicit cells are advanced with precomputed explicit fluxes. The remaining
//! (transition and core) cells are solved together; on their faces the flux is either
//! the committed explicit flux or an implicit flux that is affine in S^{n+1}.

use crate::config::ImplicitScheme;
use crate::error::{Error, Result};
use crate::implicit::{assemble, solve_cached, FactoredSystem, ImplicitRow, LinComb};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub left: usize,
    pub right: usize,
    /// Normal velocity times open face length; positive means flow from left to right.
    pub c: f64,
    /// Offset from the upwind cell centroid to the face midpoint.
    pub d: (f64, f64),
    pub implicit: bool,
}

impl Face {
    pub fn upwind(&self) -> usize {
        if self.c >= 0.0 {
            self.left
        } else {
            self.right
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    /// Advanced with explicit fluxes only.
    Explicit,
    /// Solved for in the implicit system.
    Unknown,
    /// Value prescribed at every time level (ghost cells, solid cells).
    Fixed,
}

#[derive(Debug, Clone)]
pub struct Layout {
    pub vol: Vec<f64>,
    pub kind: Vec<CellKind>,
    pub faces: Vec<Face>,
    /// CSR list of (face, sign) per cell; sign is +1 when the cell is the face's left side.
    face_start: Vec<usize>,
    face_list: Vec<(usize, f64)>,
    pub unknown_of: Vec<Option<usize>>,
    pub unknown_cells: Vec<usize>,
}

impl Layout {
    pub fn new(vol: Vec<f64>, kind: Vec<CellKind>, faces: Vec<Face>) -> Result<Self> {
        let n = vol.len();
        if kind.len() != n {
            return Err(Error::Alignment("cell kinds and volumes differ in length".into()));
        }
        let mut count = vec![0usize; n + 1];
        for f in &faces {
            if f.left >= n || f.right >= n {
                return Err(Error::Configuration("face refers to a missing cell".into()));
            }
            count[f.left + 1] += 1;
            count[f.right + 1] += 1;
        }
        for i in 0..n {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut list = vec![(0usize, 0.0f64); count[n]];
        for (k, f) in faces.iter().enumerate() {
            list[fill[f.left]] = (k, 1.0);
            fill[f.left] += 1;
            list[fill[f.right]] = (k, -1.0);
            fill[f.right] += 1;
        }
        let mut unknown_of = vec![None; n];
        let mut unknown_cells = Vec::new();
        for i in 0..n {
            if kind[i] == CellKind::Unknown {
                unknown_of[i] = Some(unknown_cells.len());
                unknown_cells.push(i);
            }
        }
        let lay = Layout { vol, kind, faces, face_start: count, face_list: list, unknown_of, unknown_cells };
        for i in 0..n {
            if lay.kind[i] == CellKind::Explicit {
                if let Some(&(f, _)) = lay.faces_of(i).iter().find(|(f, _)| lay.faces[*f].implicit) {
                    return Err(Error::Configuration(format!("explicit cell {i} touches implicit face {f}")));
                }
            }
        }
        Ok(lay)
    }

    pub fn n_cells(&self) -> usize {
        self.vol.len()
    }

    pub fn faces_of(&self, i: usize) -> &[(usize, f64)] {
        &self.face_list[self.face_start[i]..self.face_start[i + 1]]
    }
}

/// Face reconstructions used by the implicit fluxes.
pub trait FaceRecon {
    /// Face value at t^n.
    fn at_n(&self, face: usize) -> f64;
    /// Face value at t^{n+1} as an affine function of S^{n+1}.
    fn at_np1(&self, face: usize) -> LinComb;
    /// `at_np1(face)` evaluated at `x`.
    fn at_np1_eval(&self, face: usize, x: &[f64]) -> f64 {
        self.at_np1(face).eval(x)
    }
}

pub struct StepData<'a> {
    pub dt: f64,
    pub s_n: &'a [f64],
    /// Per-face explicit fluxes; read only on explicit faces.
    pub flux: &'a [f64],
    /// New values on fixed cells; other entries ignored.
    pub fixed_np1: &'a [f64],
    pub recon: &'a dyn FaceRecon,
    pub scheme: ImplicitScheme,
}

fn face_flux(lay: &Layout, data: &StepData<'_>, f: usize) -> LinComb {
    let face = &lay.faces[f];
    if !face.implicit {
        return LinComb::constant(data.flux[f]);
    }
    match data.scheme {
        ImplicitScheme::Trapezoidal => {
            let mut l = LinComb::constant(0.5 * face.c * data.recon.at_n(f));
            l.add_scaled(&data.recon.at_np1(f), 0.5 * face.c);
            l
        }
        ImplicitScheme::ImplicitEulerPcw => {
            let mut l = LinComb::default();
            l.add_term(face.upwind(), face.c);
            l
        }
    }
}

/// Rows `vol_i (X_i − S^n_i) + Δt Σ ±F_f(X) = 0` for every unknown cell. Rows are kept in
/// volume-weighted form so that tiny cells do not magnify rounding in the constants.
pub fn implicit_rows(lay: &Layout, data: &StepData<'_>) -> Vec<ImplicitRow> {
    lay.unknown_cells
        .iter()
        .map(|&i| {
            let vol = lay.vol[i];
            let mut lhs = LinComb::default();
            lhs.add_term(i, vol);
            lhs.constant = -vol * data.s_n[i];
            for &(f, sign) in lay.faces_of(i) {
                lhs.add_scaled(&face_flux(lay, data, f), sign * data.dt);
            }
            ImplicitRow { cell: i, lhs }
        })
        .collect()
}

fn explicit_update(lay: &Layout, data: &StepData<'_>) -> Vec<f64> {
    let mut out = data.s_n.to_vec();
    for i in 0..lay.n_cells() {
        match lay.kind[i] {
            CellKind::Fixed => out[i] = data.fixed_np1[i],
            CellKind::Explicit => {
                let div: f64 = lay.faces_of(i).iter().map(|&(f, s)| s * data.flux[f]).sum();
                out[i] = data.s_n[i] - data.dt / lay.vol[i] * div;
            }
            CellKind::Unknown => {}
        }
    }
    out
}

fn face_flux_eval(lay: &Layout, data: &StepData<'_>, f: usize, x: &[f64]) -> f64 {
    let face = &lay.faces[f];
    if !face.implicit {
        return data.flux[f];
    }
    match data.scheme {
        ImplicitScheme::Trapezoidal => 0.5 * face.c * (data.recon.at_n(f) + data.recon.at_np1_eval(f, x)),
        ImplicitScheme::ImplicitEulerPcw => face.c * x[face.upwind()],
    }
}

/// Right-hand side of the implicit system: minus each row evaluated with the unknowns
/// set to zero (`known` already holds zeros there).
fn rhs(lay: &Layout, data: &StepData<'_>, known: &[f64]) -> Vec<f64> {
    lay.unknown_cells
        .iter()
        .map(|&i| {
            let div: f64 = lay.faces_of(i).iter().map(|&(f, sg)| sg * face_flux_eval(lay, data, f, known)).sum();
            lay.vol[i] * data.s_n[i] - data.dt * div
        })
        .collect()
}

/// One flux-bounded step. `cache` keeps the LU factors between calls; the matrix is
/// assembled only when the cache is empty, so a cache must only be reused with the same
/// layout, time step and reconstruction stencils.
pub fn step(lay: &Layout, data: &StepData<'_>, cache: &mut Option<FactoredSystem>) -> Result<Vec<f64>> {
    let mut out = explicit_update(lay, data);
    if lay.unknown_cells.is_empty() {
        return Ok(out);
    }
    let x = match cache {
        Some(fs) => {
            for &i in &lay.unknown_cells {
                out[i] = 0.0;
            }
            fs.solve(&rhs(lay, data, &out))?
        }
        None => {
            let rows = implicit_rows(lay, data);
            let sys = assemble(&rows, &lay.unknown_of, &out)?;
            solve_cached(cache, &sys)?
        }
    };
    for (k, &i) in lay.unknown_cells.iter().enumerate() {
        out[i] = x[k];
    }
    Ok(out)
}

/// The update operator with a given S^{n+1} substituted into the implicit fluxes (no solve).
pub fn apply(lay: &Layout, data: &StepData<'_>, s_np1: &[f64]) -> Vec<f64> {
    let mut out = explicit_update(lay, data);
    for row in implicit_rows(lay, data) {
        out[row.cell] = s_np1[row.cell] - row.lhs.eval(s_np1) / lay.vol[row.cell];
    }
    out
}
