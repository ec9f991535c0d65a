//! Cut-cell geometry of a straight ramp through the unit square.
//!
//! The fluid lies above the line y = tan(θ)(x − x0). Cells are stored on an extended
//! grid with a frame of ghost cells so boundary stencils can be filled with exact data.

use std::fmt::Write as _;

use crate::config::SchemeSpec;
use crate::error::{Error, Result};
use crate::state::{FvMesh, MeshId, Role};

/// Width of the ghost frame around [0,1]².
pub const GHOST: usize = 3;

/// Cells with a smaller volume fraction are treated as solid.
pub const ALPHA_MIN: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellClass {
    Full,
    Cut,
    Solid,
    /// Crossed by the line but kept Cartesian; treated as cut by the schemes.
    FakeCut,
    /// Cartesian cell below a fake-cut band; always implicit.
    ImplicitFull,
}

impl CellClass {
    pub fn name(self) -> &'static str {
        match self {
            CellClass::Full => "full",
            CellClass::Cut => "cut",
            CellClass::Solid => "solid",
            CellClass::FakeCut => "fake_cut",
            CellClass::ImplicitFull => "implicit_full",
        }
    }

    /// Seeds of the implicit zone.
    pub fn is_seed(self) -> bool {
        matches!(self, CellClass::Cut | CellClass::FakeCut | CellClass::ImplicitFull)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellGeom {
    pub alpha: f64,
    pub centroid: (f64, f64),
    /// Central second moments per unit fluid area: ⟨(x−x̄)²⟩, ⟨(x−x̄)(y−ȳ)⟩, ⟨(y−ȳ)²⟩.
    pub moments: (f64, f64, f64),
    pub class: CellClass,
    /// Fluid polygon (counter-clockwise) for cut cells.
    pub polygon: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGeom {
    pub beta: f64,
    /// Midpoint of the fluid part of the edge.
    pub mid: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct CutCellGeom2D {
    id: MeshId,
    /// Cells per direction inside [0,1]².
    pub n: usize,
    pub g: usize,
    pub h: f64,
    pub angle_deg: f64,
    pub x0: f64,
    pub fake: bool,
    /// Extended grid, index `J*(n+2g) + I`.
    pub cells: Vec<CellGeom>,
    /// Edge between (I,J) and (I+1,J), stored at (I,J).
    pub xedges: Vec<EdgeGeom>,
    /// Edge between (I,J) and (I,J+1), stored at (I,J).
    pub yedges: Vec<EdgeGeom>,
    pub roles: Vec<Role>,
    /// Edge-graph distance to the nearest seed cell (`usize::MAX` if unreachable).
    pub layer: Vec<usize>,
}

impl FvMesh for CutCellGeom2D {
    fn id(&self) -> MeshId {
        self.id
    }
    fn n_cells(&self) -> usize {
        self.n * self.n
    }
    fn volume(&self, k: usize) -> f64 {
        let (i, j) = (k % self.n, k / self.n);
        self.cells[self.ext(i + self.g, j + self.g)].alpha * self.h * self.h
    }
}

impl CutCellGeom2D {
    /// Cells per direction on the extended grid.
    pub fn m(&self) -> usize {
        self.n + 2 * self.g
    }

    pub fn ext(&self, ii: usize, jj: usize) -> usize {
        jj * self.m() + ii
    }

    pub fn ext_ij(&self, k: usize) -> (usize, usize) {
        (k % self.m(), k / self.m())
    }

    /// Extended index of physical cell `k = j*n + i`.
    pub fn ext_of_phys(&self, k: usize) -> usize {
        self.ext(k % self.n + self.g, k / self.n + self.g)
    }

    pub fn is_ghost(&self, ii: usize, jj: usize) -> bool {
        ii < self.g || jj < self.g || ii >= self.g + self.n || jj >= self.g + self.n
    }

    pub fn cell_bounds(&self, ii: usize, jj: usize) -> (f64, f64, f64, f64) {
        let x = (ii as f64 - self.g as f64) * self.h;
        let y = (jj as f64 - self.g as f64) * self.h;
        (x, x + self.h, y, y + self.h)
    }

    pub fn tan(&self) -> f64 {
        self.angle_deg.to_radians().tan()
    }

    /// y of the ramp line at x.
    pub fn line_y(&self, x: f64) -> f64 {
        self.tan() * (x - self.x0)
    }

    /// Exact fluid area inside [0,1]².
    pub fn exact_fluid_area(&self) -> f64 {
        1.0 - area_below_line(self.tan(), self.x0, 0.0, 1.0, 0.0, 1.0)
    }

    /// Flat cell CSV: i, j, alpha, class, centroid.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,alpha,class,cx,cy,role\n");
        for j in 0..self.n {
            for i in 0..self.n {
                let k = self.ext(i + self.g, j + self.g);
                let c = &self.cells[k];
                let _ = writeln!(
                    s,
                    "{i},{j},{:.15e},{},{:.15e},{:.15e},{}",
                    c.alpha,
                    c.class.name(),
                    c.centroid.0,
                    c.centroid.1,
                    self.roles[k].letter()
                );
            }
        }
        s
    }
}

/// Signed distance to the line (positive in the fluid).
fn phi(tan: f64, x0: f64, p: (f64, f64)) -> f64 {
    let c = 1.0 / (1.0 + tan * tan).sqrt();
    let v = c * p.1 - c * tan * (p.0 - x0);
    // vertices within rounding of the line count as on it
    if v.abs() < 1e-13 * (1.0 + p.0.abs() + p.1.abs()) {
        0.0
    } else {
        v
    }
}

/// Sutherland–Hodgman clip of a convex polygon against φ ≥ 0 (points on the line kept).
pub fn clip_polygon(poly: &[(f64, f64)], tan: f64, x0: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let (pa, pb) = (phi(tan, x0, a), phi(tan, x0, b));
        if pa >= 0.0 {
            out.push(a);
        }
        if (pa >= 0.0) != (pb >= 0.0) {
            let t = pa / (pa - pb);
            out.push((a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1)));
        }
    }
    out.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-300 && (a.1 - b.1).abs() < 1e-300);
    out
}

/// Area, centroid and central second moments (per unit area) of a simple polygon.
pub fn polygon_moments(p: &[(f64, f64)]) -> (f64, (f64, f64), (f64, f64, f64)) {
    if p.len() < 3 {
        return (0.0, (0.0, 0.0), (0.0, 0.0, 0.0));
    }
    // shift to the first vertex for accuracy
    let o = p[0];
    let (mut a, mut cx, mut cy, mut ixx, mut ixy, mut iyy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 0..p.len() {
        let (x0, y0) = (p[k].0 - o.0, p[k].1 - o.1);
        let q = p[(k + 1) % p.len()];
        let (x1, y1) = (q.0 - o.0, q.1 - o.1);
        let cr = x0 * y1 - x1 * y0;
        a += cr;
        cx += (x0 + x1) * cr;
        cy += (y0 + y1) * cr;
        ixx += (x0 * x0 + x0 * x1 + x1 * x1) * cr;
        iyy += (y0 * y0 + y0 * y1 + y1 * y1) * cr;
        ixy += (x0 * y1 + 2.0 * x0 * y0 + 2.0 * x1 * y1 + x1 * y0) * cr;
    }
    a *= 0.5;
    if a.abs() < f64::MIN_POSITIVE {
        return (0.0, (0.0, 0.0), (0.0, 0.0, 0.0));
    }
    let (mx, my) = (cx / (6.0 * a), cy / (6.0 * a));
    let sxx = ixx / (12.0 * a) - mx * mx;
    let syy = iyy / (12.0 * a) - my * my;
    let sxy = ixy / (24.0 * a) - mx * my;
    (a, (mx + o.0, my + o.1), (sxx, sxy, syy))
}

/// Fluid part of the segment a→b: (fraction, midpoint).
fn clip_segment(a: (f64, f64), b: (f64, f64), tan: f64, x0: f64) -> EdgeGeom {
    let (pa, pb) = (phi(tan, x0, a), phi(tan, x0, b));
    let lerp = |t: f64| (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
    let (t0, t1) = match (pa >= 0.0, pb >= 0.0) {
        (true, true) => (0.0, 1.0),
        (false, false) => (0.0, 0.0),
        (true, false) => (0.0, pa / (pa - pb)),
        (false, true) => (pa / (pa - pb), 1.0),
    };
    let beta = t1 - t0;
    if beta <= 0.0 {
        return EdgeGeom { beta: 0.0, mid: lerp(0.5) };
    }
    EdgeGeom { beta, mid: lerp(0.5 * (t0 + t1)) }
}

/// Area of {y < tan(x − x0)} ∩ [xa,xb]×[ya,yb], by exact integration of the
/// piecewise-linear clipped height.
pub fn area_below_line(tan: f64, x0: f64, xa: f64, xb: f64, ya: f64, yb: f64) -> f64 {
    let height = |x: f64| (tan * (x - x0)).clamp(ya, yb) - ya;
    let mut ks = vec![xa, xb];
    if tan != 0.0 {
        for y in [ya, yb] {
            let x = x0 + y / tan;
            if x > xa && x < xb {
                ks.push(x);
            }
        }
    }
    ks.sort_by(f64::total_cmp);
    ks.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (height(w[0]) + height(w[1]))).sum()
}

fn check_args(n: usize, angle_deg: f64, x0: f64) -> Result<()> {
    if n < 8 {
        return Err(Error::param(format!("N={n} too small (need at least 8)")));
    }
    if !(angle_deg > 0.0 && angle_deg <= 45.0) {
        return Err(Error::param(format!("angle {angle_deg} outside (0, 45]")));
    }
    if !x0.is_finite() {
        return Err(Error::param("x0 must be finite"));
    }
    Ok(())
}

fn empty_geom(n: usize, angle_deg: f64, x0: f64, fake: bool) -> CutCellGeom2D {
    CutCellGeom2D {
        id: MeshId::fresh(),
        n,
        g: GHOST,
        h: 1.0 / n as f64,
        angle_deg,
        x0,
        fake,
        cells: Vec::new(),
        xedges: Vec::new(),
        yedges: Vec::new(),
        roles: Vec::new(),
        layer: Vec::new(),
    }
}

fn full_cell(b: (f64, f64, f64, f64), h: f64, class: CellClass) -> CellGeom {
    let c = (0.5 * (b.0 + b.1), 0.5 * (b.2 + b.3));
    CellGeom { alpha: 1.0, centroid: c, moments: (h * h / 12.0, 0.0, h * h / 12.0), class, polygon: None }
}

/// Exact cut cells of the half-plane above the ramp.
pub fn build_ramp_geometry(n: usize, angle_deg: f64, x0: f64) -> Result<CutCellGeom2D> {
    check_args(n, angle_deg, x0)?;
    let mut g = empty_geom(n, angle_deg, x0, false);
    let (m, h, tan) = (g.m(), g.h, g.tan());
    g.cells = Vec::with_capacity(m * m);
    for jj in 0..m {
        for ii in 0..m {
            let b = g.cell_bounds(ii, jj);
            let sq = [(b.0, b.2), (b.1, b.2), (b.1, b.3), (b.0, b.3)];
            let inside = sq.iter().filter(|&&p| phi(tan, x0, p) >= 0.0).count();
            let cell = match inside {
                4 => full_cell(b, h, CellClass::Full),
                0 => CellGeom { alpha: 0.0, centroid: (0.5 * (b.0 + b.1), 0.5 * (b.2 + b.3)), moments: (0.0, 0.0, 0.0), class: CellClass::Solid, polygon: None },
                _ => {
                    let poly = clip_polygon(&sq, tan, x0);
                    let (area, c, mom) = polygon_moments(&poly);
                    let alpha = area / (h * h);
                    if alpha < ALPHA_MIN {
                        CellGeom { alpha: 0.0, centroid: c, moments: (0.0, 0.0, 0.0), class: CellClass::Solid, polygon: None }
                    } else if alpha >= 1.0 {
                        full_cell(b, h, CellClass::Full)
                    } else {
                        CellGeom { alpha, centroid: c, moments: mom, class: CellClass::Cut, polygon: Some(poly) }
                    }
                }
            };
            g.cells.push(cell);
        }
    }
    g.xedges = Vec::with_capacity(m * m);
    g.yedges = Vec::with_capacity(m * m);
    for jj in 0..m {
        for ii in 0..m {
            let b = g.cell_bounds(ii, jj);
            let k = g.ext(ii, jj);
            let mut ex = clip_segment((b.1, b.2), (b.1, b.3), tan, x0);
            let mut ey = clip_segment((b.0, b.3), (b.1, b.3), tan, x0);
            let solid = |kk: usize| g.cells[kk].alpha == 0.0;
            if solid(k) || (ii + 1 < m && solid(g.ext(ii + 1, jj))) {
                ex.beta = 0.0;
            }
            if solid(k) || (jj + 1 < m && solid(g.ext(ii, jj + 1))) {
                ey.beta = 0.0;
            }
            g.xedges.push(ex);
            g.yedges.push(ey);
        }
    }
    g.roles = vec![Role::Explicit; m * m];
    g.layer = vec![usize::MAX; m * m];
    Ok(g)
}

/// Cartesian grid where the cells crossed by the ramp line are flagged fake-cut and
/// those below are flagged implicit-full.
pub fn build_fake_cut_geometry(n: usize, angle_deg: f64, x0: f64) -> Result<CutCellGeom2D> {
    check_args(n, angle_deg, x0)?;
    let mut g = empty_geom(n, angle_deg, x0, true);
    let (m, h, tan) = (g.m(), g.h, g.tan());
    g.cells = Vec::with_capacity(m * m);
    for jj in 0..m {
        for ii in 0..m {
            let b = g.cell_bounds(ii, jj);
            let ph = [(b.0, b.2), (b.1, b.2), (b.1, b.3), (b.0, b.3)].map(|p| phi(tan, x0, p));
            let lo = ph.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ph.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let class = if lo < 0.0 && hi > 0.0 {
                CellClass::FakeCut
            } else if hi <= 0.0 {
                CellClass::ImplicitFull
            } else {
                CellClass::Full
            };
            g.cells.push(full_cell(b, h, class));
        }
    }
    g.xedges = (0..m * m)
        .map(|k| {
            let b = g.cell_bounds(k % m, k / m);
            EdgeGeom { beta: 1.0, mid: (b.1, 0.5 * (b.2 + b.3)) }
        })
        .collect();
    g.yedges = (0..m * m)
        .map(|k| {
            let b = g.cell_bounds(k % m, k / m);
            EdgeGeom { beta: 1.0, mid: (0.5 * (b.0 + b.1), b.3) }
        })
        .collect();
    g.roles = vec![Role::Explicit; m * m];
    g.layer = vec![usize::MAX; m * m];
    Ok(g)
}

/// Open edge neighbours of extended cell `k`: (neighbour, open aperture).
pub fn edge_neighbours(g: &CutCellGeom2D, k: usize) -> impl Iterator<Item = usize> + '_ {
    let m = g.m();
    let (ii, jj) = g.ext_ij(k);
    let mut out = [usize::MAX; 4];
    if ii + 1 < m && g.xedges[k].beta > 0.0 {
        out[0] = k + 1;
    }
    if ii > 0 && g.xedges[k - 1].beta > 0.0 {
        out[1] = k - 1;
    }
    if jj + 1 < m && g.yedges[k].beta > 0.0 {
        out[2] = k + m;
    }
    if jj > 0 && g.yedges[k - m].beta > 0.0 {
        out[3] = k - m;
    }
    out.into_iter().filter(|&x| x != usize::MAX)
}

/// Roles for `spec`: seeds (cut, fake-cut, implicit-full) and the next R layers form the
/// implicit core, layer R+1 holds the transition cells.
pub fn classify_cells_2d(geom: &CutCellGeom2D, spec: &SchemeSpec) -> CutCellGeom2D {
    let mut g = geom.clone();
    let total = g.cells.len();
    let mut layer = vec![usize::MAX; total];
    let mut queue = std::collections::VecDeque::new();
    for (k, c) in g.cells.iter().enumerate() {
        if c.class.is_seed() {
            layer[k] = 0;
            queue.push_back(k);
        }
    }
    while let Some(k) = queue.pop_front() {
        let next = layer[k] + 1;
        for nb in edge_neighbours(&g, k) {
            if layer[nb] == usize::MAX && g.cells[nb].alpha > 0.0 {
                layer[nb] = next;
                queue.push_back(nb);
            }
        }
    }
    let r = spec.core_radius();
    g.roles = (0..total)
        .map(|k| {
            if !spec.is_mixed() || g.cells[k].alpha == 0.0 {
                return Role::Explicit;
            }
            match (layer[k], g.cells[k].class) {
                (0, CellClass::Cut | CellClass::FakeCut) => Role::Cut,
                (l, _) if l <= r => Role::ImplicitInterior,
                (l, _) if l == r + 1 => Role::Transition,
                _ => Role::Explicit,
            }
        })
        .collect();
    g.layer = layer;
    g
}
