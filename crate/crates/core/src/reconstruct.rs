//! Slope and curvature reconstruction.
//!
//! Every reconstruction here is linear in the cell averages, so each one is built as a
//! stencil (list of `(cell, weight)`) that can be applied to a field or used directly as
//! matrix coefficients by the implicit assembly.

use faer::prelude::*;
use faer::Mat;

use crate::config::SlopeMethod;
use crate::error::{Error, Result};
use crate::geometry2d::{edge_neighbours, CutCellGeom2D};
use crate::mesh1d::Mesh1D;

pub type Stencil = Vec<(usize, f64)>;

pub fn apply(st: &[(usize, f64)], s: &[f64]) -> f64 {
    st.iter().map(|&(k, w)| w * s[k]).sum()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SlopeField {
    pub sx: Vec<f64>,
    /// Empty in 1D.
    pub sy: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Curvature {
    pub sxx: f64,
    pub sxy: f64,
    pub syy: f64,
}

/// Where a 1D slope comes from.
#[derive(Clone, Copy)]
pub enum Slopes1d<'a> {
    Central,
    Forward,
    LeastSquares,
    /// Exact derivative evaluated at the cell center.
    Analytic(&'a dyn Fn(f64) -> f64),
}

#[derive(Clone, Copy)]
pub enum Curvature1d<'a> {
    DiffQuotient,
    QuadraticFit,
    Analytic(&'a dyn Fn(f64) -> f64),
}

/// Condition number beyond which a least-squares fit is treated as rank deficient.
pub const RANK_TOL: f64 = 1e12;

/// Least-squares weights for `A c ≈ b`: returns `W` (cols(A) × rows(A)) with `c = W b`.
/// Columns are equilibrated before a column-pivoted QR; `None` if rank deficient.
pub fn ls_weights(a: &Mat<f64>) -> Option<Mat<f64>> {
    let (m, p) = (a.nrows(), a.ncols());
    if m < p || p == 0 {
        return None;
    }
    let scale: Vec<f64> = (0..p).map(|j| (0..m).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt()).collect();
    if scale.iter().any(|&s| !(s > 0.0)) {
        return None;
    }
    let scaled = Mat::from_fn(m, p, |i, j| a[(i, j)] / scale[j]);
    let qr = scaled.col_piv_qr();
    let r = qr.thin_R();
    let d0 = r[(0, 0)].abs();
    let dmin = (0..p).map(|k| r[(k, k)].abs()).fold(f64::INFINITY, f64::min);
    if !(dmin > 0.0) || d0 / dmin > RANK_TOL {
        return None;
    }
    let w = qr.solve_lstsq(Mat::<f64>::identity(m, m));
    Some(Mat::from_fn(p, m, |j, i| w[(j, i)] / scale[j]))
}

/// Gradient fitted through the cell's own value: minimises Σ (S_k − S_0 − g·d_k)².
/// `nbrs` holds `(cell, dx, dy)` offsets from the owning cell's centroid.
pub fn ls_gradient_stencil(own: usize, nbrs: &[(usize, f64, f64)]) -> Option<[Stencil; 2]> {
    let a = Mat::from_fn(nbrs.len(), 2, |i, j| if j == 0 { nbrs[i].1 } else { nbrs[i].2 });
    let w = ls_weights(&a)?;
    let mut out = [Stencil::with_capacity(nbrs.len() + 1), Stencil::with_capacity(nbrs.len() + 1)];
    for (d, st) in out.iter_mut().enumerate() {
        let mut self_w = 0.0;
        for (i, &(k, _, _)) in nbrs.iter().enumerate() {
            st.push((k, w[(d, i)]));
            self_w -= w[(d, i)];
        }
        st.push((own, self_w));
    }
    Some(out)
}

/// One sample cell for a quadratic fit of cell averages: centroid offset and the cell's
/// central second moments (per unit volume).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitCell {
    pub cell: usize,
    pub dx: f64,
    pub dy: f64,
    pub mxx: f64,
    pub mxy: f64,
    pub myy: f64,
}

/// Fit q = a + b x + c y + ½d x² + e xy + ½f y² to cell averages (own cell included in
/// `cells`) and return stencils for (d, e, f).
pub fn quadratic_fit_stencil(cells: &[FitCell]) -> Option<[Stencil; 3]> {
    let a = Mat::from_fn(cells.len(), 6, |i, j| {
        let c = &cells[i];
        match j {
            0 => 1.0,
            1 => c.dx,
            2 => c.dy,
            3 => 0.5 * (c.dx * c.dx + c.mxx),
            4 => c.dx * c.dy + c.mxy,
            _ => 0.5 * (c.dy * c.dy + c.myy),
        }
    });
    let w = ls_weights(&a)?;
    let st = |r: usize| cells.iter().enumerate().map(|(i, c)| (c.cell, w[(r, i)])).collect();
    Some([st(3), st(4), st(5)])
}

/// Cells whose slope is "irregular" in 1D: non-uniform neighbourhood or part of the
/// implicit zone.
fn near_cut_1d(mesh: &Mesh1D, i: usize) -> bool {
    !mesh.uniform_around(i) || mesh.roles[i].is_implicit()
}

fn central_1d(mesh: &Mesh1D, i: usize) -> Stencil {
    let (m, p) = (mesh.prev(i), mesh.next(i));
    let d = mesh.center_offset(i, p) - mesh.center_offset(i, m);
    vec![(m, -1.0 / d), (p, 1.0 / d)]
}

fn forward_1d(mesh: &Mesh1D, i: usize) -> Stencil {
    let p = mesh.next(i);
    let d = mesh.center_offset(i, p);
    vec![(i, -1.0 / d), (p, 1.0 / d)]
}

fn ls_1d(mesh: &Mesh1D, i: usize) -> Stencil {
    let (m, p) = (mesh.prev(i), mesh.next(i));
    let (dm, dp) = (mesh.center_offset(i, m), mesh.center_offset(i, p));
    let den = dm * dm + dp * dp;
    vec![(m, dm / den), (i, -(dm + dp) / den), (p, dp / den)]
}

/// Per-cell slope stencils; `None` marks cells that take the exact derivative instead.
pub fn slope_stencils_1d(mesh: &Mesh1D, method: SlopeMethod) -> Vec<Option<Stencil>> {
    (0..mesh.n())
        .map(|i| match method {
            SlopeMethod::Central => Some(central_1d(mesh, i)),
            SlopeMethod::Forward => Some(forward_1d(mesh, i)),
            SlopeMethod::LeastSquares if near_cut_1d(mesh, i) => Some(ls_1d(mesh, i)),
            SlopeMethod::LeastSquares => Some(central_1d(mesh, i)),
            SlopeMethod::Analytic if near_cut_1d(mesh, i) => None,
            SlopeMethod::Analytic => Some(central_1d(mesh, i)),
        })
        .collect()
}

/// Slopes of `s` on `mesh`. Least squares and analytic slopes are used on cells next to
/// a cut cell or inside the implicit zone, central differences elsewhere.
pub fn slopes_1d(s: &[f64], mesh: &Mesh1D, method: Slopes1d<'_>) -> Result<SlopeField> {
    if s.len() != mesh.n() {
        return Err(Error::Alignment(format!("{} values for {} cells", s.len(), mesh.n())));
    }
    let (kind, exact) = match method {
        Slopes1d::Central => (SlopeMethod::Central, None),
        Slopes1d::Forward => (SlopeMethod::Forward, None),
        Slopes1d::LeastSquares => (SlopeMethod::LeastSquares, None),
        Slopes1d::Analytic(f) => (SlopeMethod::Analytic, Some(f)),
    };
    let st = slope_stencils_1d(mesh, kind);
    let sx = st
        .iter()
        .enumerate()
        .map(|(i, st)| match (st, exact) {
            (Some(st), _) => apply(st, s),
            (None, Some(f)) => f(mesh.centers[i]),
            (None, None) => unreachable!(),
        })
        .collect();
    Ok(SlopeField { sx, sy: Vec::new() })
}

/// Minmod-limited slope from the one-sided differences.
pub fn minmod_slopes_1d(s: &[f64], mesh: &Mesh1D) -> Vec<f64> {
    (0..mesh.n())
        .map(|i| {
            let (m, p) = (mesh.prev(i), mesh.next(i));
            let a = (s[i] - s[m]) / -mesh.center_offset(i, m);
            let b = (s[p] - s[i]) / mesh.center_offset(i, p);
            if a * b <= 0.0 {
                0.0
            } else if a.abs() < b.abs() {
                a
            } else {
                b
            }
        })
        .collect()
}

/// Second-derivative stencil at cell `i`: the three-point quotient on uniform
/// neighbourhoods, otherwise the exact quadratic through the three cell averages.
pub fn curvature_stencil_1d(mesh: &Mesh1D, i: usize, quadratic_fit: bool) -> Result<Stencil> {
    let (m, p) = (mesh.prev(i), mesh.next(i));
    if !quadratic_fit {
        if !mesh.uniform_around(i) {
            return Err(Error::Reconstruction { cell: i, reason: "difference quotient needs uniform cells".into() });
        }
        let h2 = mesh.h * mesh.h;
        return Ok(vec![(m, 1.0 / h2), (i, -2.0 / h2), (p, 1.0 / h2)]);
    }
    let cells: Vec<FitCell> = [m, i, p]
        .iter()
        .map(|&k| {
            let d = if k == i { 0.0 } else { mesh.center_offset(i, k) };
            FitCell { cell: k, dx: d, dy: 0.0, mxx: mesh.lengths[k].powi(2) / 12.0, mxy: 0.0, myy: 0.0 }
        })
        .collect();
    let a = Mat::from_fn(3, 3, |r, c| {
        let f = &cells[r];
        match c {
            0 => 1.0,
            1 => f.dx,
            _ => 0.5 * (f.dx * f.dx + f.mxx),
        }
    });
    let w = ls_weights(&a).ok_or_else(|| Error::Reconstruction { cell: i, reason: "singular quadratic fit".into() })?;
    Ok(cells.iter().enumerate().map(|(r, f)| (f.cell, w[(2, r)])).collect())
}

/// s_xx at cell `i`.
pub fn second_derivs_1d(s: &[f64], mesh: &Mesh1D, i: usize, method: Curvature1d<'_>) -> Result<f64> {
    match method {
        Curvature1d::DiffQuotient => Ok(apply(&curvature_stencil_1d(mesh, i, false)?, s)),
        Curvature1d::QuadraticFit => Ok(apply(&curvature_stencil_1d(mesh, i, true)?, s)),
        Curvature1d::Analytic(f) => Ok(f(mesh.centers[i])),
    }
}

/// True where a 2D cell needs the irregular reconstruction: cut or solid-adjacent cells,
/// cells with a missing or partial edge neighbour, and cells in the implicit zone.
pub fn near_cut_2d(g: &CutCellGeom2D, k: usize) -> bool {
    let c = &g.cells[k];
    if c.alpha < 1.0 || g.roles[k].is_implicit() {
        return true;
    }
    let nb: Vec<usize> = edge_neighbours(g, k).collect();
    nb.len() < 4 || nb.iter().any(|&j| g.cells[j].alpha < 1.0)
}

/// Neighbours used for a least-squares gradient: open edge neighbours, plus fluid corner
/// neighbours when fewer than three edge neighbours exist.
pub fn ls_neighbours_2d(g: &CutCellGeom2D, k: usize) -> Vec<(usize, f64, f64)> {
    let c0 = g.cells[k].centroid;
    let off = |j: usize| (j, g.cells[j].centroid.0 - c0.0, g.cells[j].centroid.1 - c0.1);
    let mut out: Vec<_> = edge_neighbours(g, k).filter(|&j| g.cells[j].alpha > 0.0).map(off).collect();
    if out.len() < 3 {
        let (ii, jj) = g.ext_ij(k);
        let m = g.m() as isize;
        for (di, dj) in [(1, 1), (-1, 1), (1, -1), (-1, -1)] {
            let (a, b) = (ii as isize + di, jj as isize + dj);
            if a >= 0 && b >= 0 && a < m && b < m {
                let j = g.ext(a as usize, b as usize);
                if g.cells[j].alpha > 0.0 {
                    out.push(off(j));
                }
            }
        }
    }
    out
}

/// Per-cell gradient stencils on the extended grid; `None` marks cells that take the
/// exact gradient. Solid cells get empty stencils.
pub fn slope_stencils_2d(g: &CutCellGeom2D, method: SlopeMethod) -> Result<Vec<Option<[Stencil; 2]>>> {
    let m = g.m();
    let h = g.h;
    (0..g.cells.len())
        .map(|k| {
            if g.cells[k].alpha == 0.0 {
                return Ok(Some([Vec::new(), Vec::new()]));
            }
            let near = near_cut_2d(g, k);
            if near {
                if method == SlopeMethod::Analytic {
                    return Ok(None);
                }
                let nb = ls_neighbours_2d(g, k);
                return ls_gradient_stencil(k, &nb)
                    .map(Some)
                    .ok_or_else(|| Error::Reconstruction { cell: k, reason: "rank-deficient gradient fit".into() });
            }
            Ok(Some(match method {
                SlopeMethod::Forward => [vec![(k, -1.0 / h), (k + 1, 1.0 / h)], vec![(k, -1.0 / h), (k + m, 1.0 / h)]],
                _ => {
                    let w = 0.5 / h;
                    [vec![(k - 1, -w), (k + 1, w)], vec![(k - m, -w), (k + m, w)]]
                }
            }))
        })
        .collect()
}

fn fit_cells(g: &CutCellGeom2D, k: usize, r: isize) -> Vec<FitCell> {
    let (ii, jj) = g.ext_ij(k);
    let m = g.m() as isize;
    let c0 = g.cells[k].centroid;
    let mut out = Vec::new();
    for dj in -r..=r {
        for di in -r..=r {
            let (a, b) = (ii as isize + di, jj as isize + dj);
            if a < 0 || b < 0 || a >= m || b >= m {
                continue;
            }
            let j = g.ext(a as usize, b as usize);
            let c = &g.cells[j];
            if c.alpha > 0.0 {
                let (mxx, mxy, myy) = c.moments;
                out.push(FitCell { cell: j, dx: c.centroid.0 - c0.0, dy: c.centroid.1 - c0.1, mxx, mxy, myy });
            }
        }
    }
    out
}

/// Stencils for (s_xx, s_xy, s_yy) at extended cell `k`: difference quotients when the
/// 3×3 block is full, otherwise a quadratic fit over the fluid cells of the 3×3 block,
/// widened to 5×5 if that fit is singular.
pub fn curvature_stencil_2d(g: &CutCellGeom2D, k: usize) -> Result<[Stencil; 3]> {
    let (ii, jj) = g.ext_ij(k);
    let m = g.m();
    let interior = ii > 0 && jj > 0 && ii + 1 < m && jj + 1 < m;
    let full = interior && (-1isize..=1).all(|dj| (-1isize..=1).all(|di| {
        let j = g.ext((ii as isize + di) as usize, (jj as isize + dj) as usize);
        g.cells[j].alpha == 1.0
    }));
    if full {
        let h2 = g.h * g.h;
        let q = 0.25 / h2;
        return Ok([
            vec![(k - 1, 1.0 / h2), (k, -2.0 / h2), (k + 1, 1.0 / h2)],
            vec![(k + m + 1, q), (k + m - 1, -q), (k - m + 1, -q), (k - m - 1, q)],
            vec![(k - m, 1.0 / h2), (k, -2.0 / h2), (k + m, 1.0 / h2)],
        ]);
    }
    for r in [1, 2] {
        let cells = fit_cells(g, k, r);
        if cells.len() >= 6 {
            if let Some(st) = quadratic_fit_stencil(&cells) {
                return Ok(st);
            }
        }
    }
    Err(Error::Reconstruction { cell: k, reason: "quadratic fit is rank deficient on the 5x5 block".into() })
}
