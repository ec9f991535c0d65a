//! 2D CTU-MUSCL, MUSCLmod and MPRKC fluxes and the flux-bounded mixed step on ramp
//! geometries with an exact-data ghost frame.

use crate::analysis::exact::Exact2d;
use crate::analysis::exact_average_ext;
use crate::bounding::{self, CellKind, Face, FaceRecon, Layout, StepData};
use crate::config::{ExplicitScheme, Limiter, SchemeSpec, SlopeMethod};
use crate::error::{Error, Result};
use crate::geometry2d::{classify_cells_2d, CutCellGeom2D};
use crate::implicit::{FactoredSystem, LinComb};
use crate::reconstruct::{apply, curvature_stencil_2d, slope_stencils_2d, Stencil};

/// Δt = ν·min(h/|u|, h/|v|) for the CTU schemes and νh/(|u|+|v|) for MPRKC; νh when the
/// velocity vanishes.
pub fn time_step_2d(spec: &SchemeSpec, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::param("mesh width must be positive"));
    }
    let (u, v) = (spec.velocity.0.abs(), spec.velocity.1.abs());
    let speed = match spec.explicit {
        ExplicitScheme::Mprkc => u + v,
        _ => u.max(v),
    };
    Ok(if speed == 0.0 { spec.cfl * h } else { spec.cfl * h / speed })
}

/// CTU face value for an x-face with upwind cell state (s, sx, sy) and the transverse
/// difference `tr` = (ŝ_{j+1/2} − ŝ_{j−1/2})/Δy.
pub fn ctu_face_value(vel: (f64, f64), dt: f64, d: (f64, f64), s: f64, grad: (f64, f64), tr: f64) -> f64 {
    s + (d.0 - 0.5 * vel.0 * dt) * grad.0 + d.1 * grad.1 - 0.5 * dt * vel.1 * tr
}

/// MUSCLmod change of an x-face value, `curv` = (s_xx, s_xy, s_yy). Swap the velocity
/// components and s_xx/s_yy for a y-face.
pub fn musclmod_face_correction(vel: (f64, f64), dt: f64, dx: f64, curv: (f64, f64, f64)) -> f64 {
    let (u, v) = vel;
    let (sxx, sxy, _) = curv;
    0.25 * dt * dt * (u * u * sxx + 2.0 * u * v * sxy) - 0.25 * dt * dx * (u * sxx + v * sxy)
}

/// Trapezoidal flux ½c(rec^n + rec^{n+1}) with rec = S + d·∇S of the upwind cell.
pub fn trap_flux_cut_2d(c: f64, d: (f64, f64), n: (f64, (f64, f64)), np1: (f64, (f64, f64))) -> f64 {
    let rec = |(s, g): (f64, (f64, f64))| s + d.0 * g.0 + d.1 * g.1;
    0.5 * c * (rec(n) + rec(np1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    X,
    Y,
}

/// Precomputed operator for repeated 2D steps on the extended grid.
pub struct Stepper2d {
    geom: CutCellGeom2D,
    pub spec: SchemeSpec,
    pub dt: f64,
    sol: Exact2d,
    layout: Layout,
    dirs: Vec<Dir>,
    slopes: Vec<Option<[Stencil; 2]>>,
    curv: Vec<Option<[Stencil; 3]>>,
    predictor: Vec<bool>,
    ghosts: Vec<usize>,
    cache: Option<FactoredSystem>,
}

struct Recon2d<'a> {
    st: &'a Stepper2d,
    s_n: &'a [f64],
    t_n: f64,
}

impl Stepper2d {
    pub fn new(geom: &CutCellGeom2D, spec: &SchemeSpec, dt: f64, sol: Exact2d) -> Result<Self> {
        spec.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param(format!("time step {dt} must be positive")));
        }
        let (u, v) = spec.velocity;
        if u < 0.0 || v < 0.0 {
            return Err(Error::param("2D schemes need non-negative velocity components"));
        }
        if spec.limiter != Limiter::None {
            return Err(Error::param("limiters are 1D only"));
        }
        let geom = classify_cells_2d(geom, spec);
        let g = &geom;
        let m = g.m();
        let total = m * m;
        let mut faces = Vec::new();
        let mut dirs = Vec::new();
        for k in 0..total {
            let (ii, jj) = g.ext_ij(k);
            let core = |j: usize| g.roles[j].is_core();
            let mut add = |nb: usize, beta: f64, mid: (f64, f64), vel: f64, dir: Dir| {
                if beta <= 0.0 || (g.is_ghost(ii, jj) && { let (a, b) = g.ext_ij(nb); g.is_ghost(a, b) }) {
                    return;
                }
                let c0 = g.cells[k].centroid;
                faces.push(Face {
                    left: k,
                    right: nb,
                    c: vel * beta * g.h,
                    d: (mid.0 - c0.0, mid.1 - c0.1),
                    implicit: core(k) || core(nb),
                });
                dirs.push(dir);
            };
            if ii + 1 < m {
                add(k + 1, g.xedges[k].beta, g.xedges[k].mid, u, Dir::X);
            }
            if jj + 1 < m {
                add(k + m, g.yedges[k].beta, g.yedges[k].mid, v, Dir::Y);
            }
        }
        let kind: Vec<CellKind> = (0..total)
            .map(|k| {
                let (ii, jj) = g.ext_ij(k);
                if g.is_ghost(ii, jj) || g.cells[k].alpha == 0.0 {
                    CellKind::Fixed
                } else if g.roles[k].is_implicit() {
                    CellKind::Unknown
                } else {
                    CellKind::Explicit
                }
            })
            .collect();
        let vol = g.cells.iter().map(|c| c.alpha * g.h * g.h).collect();
        let layout = Layout::new(vol, kind, faces)?;
        let slopes = slope_stencils_2d(g, spec.slopes)?;
        let mut curv = vec![None; total];
        if spec.explicit == ExplicitScheme::MusclMod {
            for f in layout.faces.iter().filter(|f| !f.implicit) {
                let j = f.upwind();
                if curv[j].is_none() {
                    curv[j] = Some(curvature_stencil_2d(g, j)?);
                }
            }
        }
        let r = spec.core_radius();
        let predictor = (0..total)
            .map(|k| {
                let (ii, jj) = g.ext_ij(k);
                !g.is_ghost(ii, jj) && g.cells[k].alpha > 0.0 && (!spec.is_mixed() || g.layer[k] >= r)
            })
            .collect();
        let ghosts = (0..total)
            .filter(|&k| {
                let (ii, jj) = g.ext_ij(k);
                g.is_ghost(ii, jj) && g.cells[k].alpha > 0.0
            })
            .collect();
        Ok(Stepper2d {
            geom,
            spec: spec.clone(),
            dt,
            sol,
            layout,
            dirs,
            slopes,
            curv,
            predictor,
            ghosts,
            cache: None,
        })
    }

    /// The classified geometry.
    pub fn geom(&self) -> &CutCellGeom2D {
        &self.geom
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn exact(&self) -> &Exact2d {
        &self.sol
    }

    /// Physical-cell values (row-major) of an extended field.
    pub fn physical(&self, s: &[f64]) -> Vec<f64> {
        let g = &self.geom;
        (0..g.n * g.n).map(|k| s[g.ext_of_phys(k)]).collect()
    }

    /// Exact averages at time t on the ghost cells; other entries zero.
    pub fn ghost_values(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.geom.cells.len()];
        for &k in &self.ghosts {
            out[k] = exact_average_ext(&self.sol, &self.geom, k, t)?;
        }
        Ok(out)
    }

    fn grad(&self, s: &[f64], k: usize, t: f64) -> (f64, f64) {
        match &self.slopes[k] {
            Some([a, b]) => (apply(a, s), apply(b, s)),
            None => {
                let c = self.geom.cells[k].centroid;
                self.sol.grad(t, c.0, c.1)
            }
        }
    }

    /// Time-extrapolated value on the downstream transverse edge of cell `k`.
    fn transverse(&self, s: &[f64], k: usize, t: f64, dir: Dir) -> f64 {
        let g = &self.geom;
        let (u, v) = self.spec.velocity;
        let (ii, jj) = g.ext_ij(k);
        let gr = self.grad(s, k, t);
        // (neighbour below/left, speed, gradient component, step)
        let (nb, w, gk) = match dir {
            Dir::X => ((jj > 0).then(|| k - g.m()), v, gr.1),
            Dir::Y => ((ii > 0).then(|| k - 1), u, gr.0),
        };
        let h = g.h;
        let full = |j: usize| g.cells[j].alpha == 1.0;
        match nb {
            Some(b) if full(k) && full(b) => {
                let gb = self.grad(s, b, t);
                let gbk = if dir == Dir::X { gb.1 } else { gb.0 };
                let top = s[k] + (0.5 * h - 0.5 * w * self.dt) * gk;
                let bot = s[b] + (0.5 * h - 0.5 * w * self.dt) * gbk;
                (top - bot) / h
            }
            _ => gk,
        }
    }

    fn face_value_ctu(&self, s: &[f64], f: usize, t: f64, modified: bool) -> f64 {
        let face = &self.layout.faces[f];
        let j = face.upwind();
        let (u, v) = self.spec.velocity;
        let dir = self.dirs[f];
        let gr = self.grad(s, j, t);
        let tr = self.transverse(s, j, t, dir);
        let (vel, d, grad) = match dir {
            Dir::X => ((u, v), face.d, gr),
            Dir::Y => ((v, u), (face.d.1, face.d.0), (gr.1, gr.0)),
        };
        let mut val = ctu_face_value(vel, self.dt, d, s[j], grad, tr);
        if modified {
            if let Some([xx, xy, yy]) = &self.curv[j] {
                let (a, b, c) = (apply(xx, s), apply(xy, s), apply(yy, s));
                let curv = if dir == Dir::X { (a, b, c) } else { (c, b, a) };
                val += musclmod_face_correction(vel, self.dt, self.geom.h, curv);
            }
        }
        val
    }

    fn ctu_fluxes(&self, s: &[f64], t: f64, modified: bool, on: impl Fn(&Face) -> bool) -> Vec<f64> {
        self.layout
            .faces
            .iter()
            .enumerate()
            .map(|(f, face)| if on(face) { face.c * self.face_value_ctu(s, f, t, modified) } else { f64::NAN })
            .collect()
    }

    /// Explicit fluxes on explicit faces at t_n; `ghost_np1` holds exact ghost values at
    /// t_{n+1} (used as predictor values there).
    pub fn explicit_fluxes(&self, s_n: &[f64], t_n: f64, ghost_np1: &[f64]) -> Vec<f64> {
        match self.spec.explicit {
            ExplicitScheme::Muscl => self.ctu_fluxes(s_n, t_n, false, |f| !f.implicit),
            ExplicitScheme::MusclMod => self.ctu_fluxes(s_n, t_n, true, |f| !f.implicit),
            ExplicitScheme::Mprkc => {
                let pred = &self.predictor;
                let fm = self.ctu_fluxes(s_n, t_n, false, |f| pred[f.left] || pred[f.right]);
                let mut s1 = vec![f64::NAN; s_n.len()];
                for &k in &self.ghosts {
                    s1[k] = ghost_np1[k];
                }
                for (k, c) in self.geom.cells.iter().enumerate() {
                    if c.alpha == 0.0 {
                        s1[k] = 0.0;
                    } else if pred[k] {
                        let div: f64 = self.layout.faces_of(k).iter().map(|&(f, sg)| sg * fm[f]).sum();
                        s1[k] = s_n[k] - self.dt / self.layout.vol[k] * div;
                    }
                }
                let t1 = t_n + self.dt;
                self.layout
                    .faces
                    .iter()
                    .map(|f| {
                        if f.implicit {
                            return f64::NAN;
                        }
                        let j = f.upwind();
                        trap_flux_cut_2d(f.c, f.d, (s_n[j], self.grad(s_n, j, t_n)), (s1[j], self.grad(&s1, j, t1)))
                    })
                    .collect()
            }
        }
    }

    fn check_len(&self, s: &[f64]) -> Result<()> {
        if s.len() != self.geom.cells.len() {
            return Err(Error::Alignment(format!("{} values for {} extended cells", s.len(), self.geom.cells.len())));
        }
        Ok(())
    }

    /// Advance an extended field from t_n. Ghost entries of the result hold exact data.
    pub fn step(&mut self, s_n: &[f64], t_n: f64) -> Result<Vec<f64>> {
        self.check_len(s_n)?;
        let ghost = self.ghost_values(t_n + self.dt)?;
        let flux = self.explicit_fluxes(s_n, t_n, &ghost);
        let mut cache = self.cache.take();
        let out = {
            let rec = Recon2d { st: self, s_n, t_n };
            let data = StepData { dt: self.dt, s_n, flux: &flux, fixed_np1: &ghost, recon: &rec, scheme: self.spec.implicit };
            bounding::step(&self.layout, &data, &mut cache)
        };
        self.cache = cache;
        let out = out?;
        if let Some(k) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Reconstruction { cell: k, reason: "non-finite update".into() });
        }
        Ok(out)
    }

    /// The update with `s_np1` substituted into the implicit fluxes.
    pub fn apply(&self, s_n: &[f64], s_np1: &[f64], t_n: f64) -> Result<Vec<f64>> {
        self.check_len(s_n)?;
        self.check_len(s_np1)?;
        let ghost = self.ghost_values(t_n + self.dt)?;
        let flux = self.explicit_fluxes(s_n, t_n, &ghost);
        let rec = Recon2d { st: self, s_n, t_n };
        let data = StepData { dt: self.dt, s_n, flux: &flux, fixed_np1: &ghost, recon: &rec, scheme: self.spec.implicit };
        Ok(bounding::apply(&self.layout, &data, s_np1))
    }
}

impl FaceRecon for Recon2d<'_> {
    fn at_np1_eval(&self, f: usize, x: &[f64]) -> f64 {
        let face = &self.st.layout.faces[f];
        let j = face.upwind();
        let g = match &self.st.slopes[j] {
            Some([a, b]) => (apply(a, x), apply(b, x)),
            None => {
                let c = self.st.geom.cells[j].centroid;
                self.st.sol.grad(self.t_n + self.st.dt, c.0, c.1)
            }
        };
        x[j] + face.d.0 * g.0 + face.d.1 * g.1
    }

    fn at_n(&self, f: usize) -> f64 {
        let face = &self.st.layout.faces[f];
        let j = face.upwind();
        let g = self.st.grad(self.s_n, j, self.t_n);
        self.s_n[j] + face.d.0 * g.0 + face.d.1 * g.1
    }

    fn at_np1(&self, f: usize) -> LinComb {
        let face = &self.st.layout.faces[f];
        let j = face.upwind();
        let mut l = LinComb::cell(j);
        match &self.st.slopes[j] {
            Some([a, b]) => {
                l.add_stencil(a, face.d.0);
                l.add_stencil(b, face.d.1);
            }
            None => {
                let c = self.st.geom.cells[j].centroid;
                let g = self.st.sol.grad(self.t_n + self.st.dt, c.0, c.1);
                l.constant += face.d.0 * g.0 + face.d.1 * g.1;
            }
        }
        l
    }
}

/// One mixed step of an extended field with Δt = νh/(|u|+|v|).
pub fn mixed_step_2d(s: &[f64], geom: &CutCellGeom2D, spec: &SchemeSpec, sol: &Exact2d, t_n: f64) -> Result<Vec<f64>> {
    let dt = time_step_2d(spec, geom.h)?;
    Stepper2d::new(geom, spec, dt, sol.clone())?.step(s, t_n)
}

/// Whether the slopes of `spec` need the exact solution.
pub fn needs_exact(spec: &SchemeSpec) -> bool {
    spec.slopes == SlopeMethod::Analytic
}
