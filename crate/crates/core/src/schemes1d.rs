//! 1D fluxes and the flux-bounded mixed step on periodic cut-cell meshes.

use crate::analysis::exact::Exact1d;
use crate::bounding::{self, CellKind, Face, FaceRecon, Layout, StepData};
use crate::config::{Coupling, ExplicitScheme, Limiter, SchemeSpec, SlopeMethod};
use crate::error::{Error, Result};
use crate::implicit::{FactoredSystem, LinComb};
use crate::mesh1d::{classify_cells_1d, Mesh1D};
use crate::reconstruct::{apply, curvature_stencil_1d, minmod_slopes_1d, slope_stencils_1d, Stencil};
use crate::state::GridFn;

/// MUSCL edge flux u·(S + (h/2 − uΔt/2)·S_x) from the upwind cell; `d` is the signed
/// offset from the upwind center to the edge (h/2 for u > 0).
pub fn muscl_flux(u: f64, dt: f64, d: f64, s: f64, sx: f64) -> f64 {
    u * (s + (d - 0.5 * u * dt) * sx)
}

/// MUSCL flux minus u·¼λ(1−λ)h²·S_xx with λ = |u|Δt/h.
pub fn musclmod_flux(u: f64, dt: f64, d: f64, s: f64, sx: f64, sxx: f64) -> f64 {
    let h = 2.0 * d.abs();
    let lam = u.abs() * dt / h;
    muscl_flux(u, dt, d, s, sx) - u * 0.25 * lam * (1.0 - lam) * h * h * sxx
}

/// Trapezoidal edge flux (u/2)(S^n + d·S_x^n + S^{n+1} + d·S_x^{n+1}).
pub fn trap_flux(u: f64, d: f64, s_n: f64, sx_n: f64, s_np1: f64, sx_np1: f64) -> f64 {
    0.5 * u * (s_n + d * sx_n + s_np1 + d * sx_np1)
}

/// Time step Δt = λh/|u| on the base width.
pub fn time_step_1d(spec: &SchemeSpec, h: f64) -> Result<f64> {
    let u = spec.velocity.0;
    if u == 0.0 {
        return Err(Error::param("zero velocity"));
    }
    Ok(spec.cfl * h / u.abs())
}

/// One explicit MPRKC step (MUSCL predictor, explicit trapezoidal corrector) everywhere.
pub fn mprkc_step_explicit(s: &GridFn, mesh: &Mesh1D, spec: &SchemeSpec) -> Result<GridFn> {
    let spec = SchemeSpec { explicit: ExplicitScheme::Mprkc, coupling: Coupling::FullyExplicit, ..spec.clone() };
    mixed_step_1d(s, mesh, &spec)
}

/// One flux-bounded step with Δt = λh/|u|. Analytic slopes need [`Stepper1d`].
pub fn mixed_step_1d(s: &GridFn, mesh: &Mesh1D, spec: &SchemeSpec) -> Result<GridFn> {
    s.check_mesh(mesh)?;
    let dt = time_step_1d(spec, mesh.h)?;
    let mut st = Stepper1d::new(mesh, spec, dt, None)?;
    GridFn::new(st.step(s.values(), 0.0)?, mesh)
}

/// Precomputed operator for repeated 1D steps with a fixed Δt.
pub struct Stepper1d {
    pub mesh: Mesh1D,
    pub spec: SchemeSpec,
    pub dt: f64,
    layout: Layout,
    slopes: Vec<Option<Stencil>>,
    curv: Vec<Option<Stencil>>,
    predictor: Vec<bool>,
    exact: Option<Exact1d>,
    cache: Option<FactoredSystem>,
}

struct Recon1d<'a> {
    st: &'a Stepper1d,
    s_n: &'a [f64],
    t_np1: f64,
    t_n: f64,
}

impl Stepper1d {
    pub fn new(mesh: &Mesh1D, spec: &SchemeSpec, dt: f64, exact: Option<Exact1d>) -> Result<Self> {
        spec.validate()?;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::param(format!("time step {dt} must be positive")));
        }
        if spec.slopes == SlopeMethod::Analytic && exact.is_none() {
            return Err(Error::param("analytic slopes need an exact solution"));
        }
        let mesh = classify_cells_1d(mesh, spec)?;
        let n = mesh.n();
        let u = spec.velocity.0;
        let faces: Vec<Face> = (0..n)
            .map(|i| {
                let j = mesh.next(i);
                let d = if u >= 0.0 { 0.5 * mesh.lengths[i] } else { -0.5 * mesh.lengths[j] };
                Face { left: i, right: j, c: u, d: (d, 0.0), implicit: mesh.roles[i].is_core() || mesh.roles[j].is_core() }
            })
            .collect();
        let kind = mesh.roles.iter().map(|r| if r.is_implicit() { CellKind::Unknown } else { CellKind::Explicit }).collect();
        let layout = Layout::new(mesh.lengths.clone(), kind, faces)?;
        let slopes = slope_stencils_1d(&mesh, spec.slopes);
        let mut curv = vec![None; n];
        if spec.explicit == ExplicitScheme::MusclMod {
            for f in layout.faces.iter().filter(|f| !f.implicit) {
                let j = f.upwind();
                if curv[j].is_none() {
                    curv[j] = Some(curvature_stencil_1d(&mesh, j, !mesh.uniform_around(j))?);
                }
            }
        }
        let r = spec.core_radius();
        let predictor = mesh.dist_to_cut.iter().map(|&d| !spec.is_mixed() || d >= r).collect();
        Ok(Stepper1d { mesh, spec: spec.clone(), dt, layout, slopes, curv, predictor, exact, cache: None })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    fn slope(&self, s: &[f64], i: usize, t: f64) -> f64 {
        match &self.slopes[i] {
            Some(st) => apply(st, s),
            None => self.exact.as_ref().expect("checked in new").dx(t, self.mesh.centers[i]),
        }
    }

    fn slopes_all(&self, s: &[f64], t: f64) -> Vec<f64> {
        (0..self.mesh.n()).map(|i| self.slope(s, i, t)).collect()
    }

    fn muscl_fluxes(&self, s: &[f64], t: f64, on: impl Fn(&Face) -> bool) -> Vec<f64> {
        let sx = match self.spec.limiter {
            Limiter::None => self.slopes_all(s, t),
            Limiter::Minmod => minmod_slopes_1d(s, &self.mesh),
        };
        let modified = self.spec.explicit == ExplicitScheme::MusclMod;
        self.layout
            .faces
            .iter()
            .map(|f| {
                if !on(f) {
                    return f64::NAN;
                }
                let j = f.upwind();
                match (&self.curv[j], modified) {
                    (Some(c), true) => musclmod_flux(f.c, self.dt, f.d.0, s[j], sx[j], apply(c, s)),
                    _ => muscl_flux(f.c, self.dt, f.d.0, s[j], sx[j]),
                }
            })
            .collect()
    }

    /// Explicit fluxes for every explicit face at t_n.
    pub fn explicit_fluxes(&self, s_n: &[f64], t_n: f64) -> Vec<f64> {
        if self.spec.explicit != ExplicitScheme::Mprkc {
            return self.muscl_fluxes(s_n, t_n, |f| !f.implicit);
        }
        let pred = &self.predictor;
        let fm = self.muscl_fluxes(s_n, t_n, |f| pred[f.left] || pred[f.right]);
        let mut s1 = vec![f64::NAN; s_n.len()];
        for i in 0..s_n.len() {
            if pred[i] {
                let div: f64 = self.layout.faces_of(i).iter().map(|&(f, sg)| sg * fm[f]).sum();
                s1[i] = s_n[i] - self.dt / self.layout.vol[i] * div;
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
                trap_flux(f.c, f.d.0, s_n[j], self.slope(s_n, j, t_n), s1[j], self.slope(&s1, j, t1))
            })
            .collect()
    }

    fn data<'a>(&self, s_n: &'a [f64], flux: &'a [f64], recon: &'a Recon1d<'a>) -> StepData<'a> {
        StepData { dt: self.dt, s_n, flux, fixed_np1: s_n, recon, scheme: self.spec.implicit }
    }

    /// Advance one step from t_n.
    pub fn step(&mut self, s_n: &[f64], t_n: f64) -> Result<Vec<f64>> {
        if s_n.len() != self.mesh.n() {
            return Err(Error::Alignment("state length differs from mesh".into()));
        }
        let flux = self.explicit_fluxes(s_n, t_n);
        let mut cache = self.cache.take();
        let out = {
            let rec = Recon1d { st: self, s_n, t_n, t_np1: t_n + self.dt };
            bounding::step(&self.layout, &self.data(s_n, &flux, &rec), &mut cache)
        };
        self.cache = cache;
        let out = out?;
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::Reconstruction { cell: i, reason: "non-finite update".into() });
        }
        Ok(out)
    }

    /// The update with `s_np1` substituted into the implicit fluxes instead of solving.
    pub fn apply(&self, s_n: &[f64], s_np1: &[f64], t_n: f64) -> Vec<f64> {
        let flux = self.explicit_fluxes(s_n, t_n);
        let rec = Recon1d { st: self, s_n, t_n, t_np1: t_n + self.dt };
        bounding::apply(&self.layout, &self.data(s_n, &flux, &rec), s_np1)
    }
}

impl FaceRecon for Recon1d<'_> {
    fn at_n(&self, f: usize) -> f64 {
        let face = &self.st.layout.faces[f];
        let j = face.upwind();
        self.s_n[j] + face.d.0 * self.st.slope(self.s_n, j, self.t_n)
    }

    fn at_np1(&self, f: usize) -> LinComb {
        let face = &self.st.layout.faces[f];
        let j = face.upwind();
        let mut l = LinComb::cell(j);
        match &self.st.slopes[j] {
            Some(st) => l.add_stencil(st, face.d.0),
            None => l.constant += face.d.0 * self.st.exact.as_ref().expect("checked").dx(self.t_np1, self.st.mesh.centers[j]),
        }
        l
    }
}
