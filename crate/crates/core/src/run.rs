//! Named experiment presets and the refinement driver behind the command line tool.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::analysis::exact::{Exact1d, Exact2d};
use crate::analysis::{self, OneStepMode, Reference};
use crate::config::{Coupling, ExplicitScheme, ImplicitScheme, Limiter, SchemeSpec, SlopeMethod};
use crate::convergence::{fit_orders, ConvergenceTable};
use crate::error::{Error, Result};
use crate::geometry2d::{build_fake_cut_geometry, build_ramp_geometry, CutCellGeom2D};
use crate::mesh1d::{build_block_mesh, build_single_cut_mesh, Mesh1D};
use crate::norms::norms;
use crate::schemes1d::{time_step_1d, Stepper1d};
use crate::schemes2d::{time_step_2d, Stepper2d};
use crate::state::GridFn;

/// Shift of the 1D sine profile.
pub const SINE_SHIFT: f64 = 0.36;
/// Block size K of Test 2.
pub const BLOCK_K: usize = 40;
/// Coarsest mesh width of Test 2, which fixes the domain length.
pub const H0: f64 = 1.0 / 160.0;
/// Final time of the 2D tests.
pub const T_2D: f64 = 0.15;
/// Ramp start of Test 3.
pub const X0_FAKE: f64 = 0.146;
/// Gaussian bump 1 + exp(−k r²) used in 2D.
pub const GAUSS_K: f64 = 120.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestCase {
    /// One cut cell in a periodic 1D domain.
    Test1,
    /// Blocks of K cells with one cut cell each; the number of blocks doubles per level.
    Test2,
    /// Cartesian 2D mesh with a band of fake cut cells along a ramp.
    Test3,
    /// Real cut cells along a ramp.
    Test4,
}

impl TestCase {
    pub fn name(self) -> &'static str {
        match self {
            TestCase::Test1 => "test1",
            TestCase::Test2 => "test2",
            TestCase::Test3 => "test3",
            TestCase::Test4 => "test4",
        }
    }

    pub fn is_2d(self) -> bool {
        matches!(self, TestCase::Test3 | TestCase::Test4)
    }

    pub fn default_levels(self) -> Vec<usize> {
        if self.is_2d() {
            vec![64, 128, 256, 512]
        } else {
            vec![160, 320, 640]
        }
    }
}

/// Ramp start for Test 4 (all angles).
pub const X0_RAMP: f64 = 0.146;

/// Gaussian centre for Test 4: on the ramp line at x = 0.49, lifted by 0.0014 into the
/// fluid, so the initial peak sits on the cut cells.
pub fn test4_center(angle_deg: f64, x0: f64) -> (f64, f64) {
    let xc = 0.49;
    (xc, angle_deg.to_radians().tan() * (xc - x0) + 0.0014)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub test: TestCase,
    /// Measure the error after one step instead of at the final time.
    pub one_step: bool,
    pub spec: SchemeSpec,
    /// Cells per unit length for each refinement level.
    pub levels: Vec<usize>,
    /// Cut-cell volume fraction (1D).
    pub alpha: f64,
    /// Ramp angle in degrees (2D).
    pub angle: f64,
    /// Ramp start; preset value if `None`.
    pub x0: Option<f64>,
    pub against: Reference,
    pub mode: OneStepMode,
    pub out: Option<PathBuf>,
    pub dump_fields: bool,
    pub dump_geometry: bool,
}

impl RunConfig {
    /// Preset by name: `test1` … `test4`, or `test1-onestep` … `test4-onestep`.
    pub fn preset(name: &str) -> Result<Self> {
        let (base, one_step) = match name.strip_suffix("-onestep") {
            Some(b) => (b, true),
            None => (name, false),
        };
        let test = match base {
            "test1" => TestCase::Test1,
            "test2" => TestCase::Test2,
            "test3" => TestCase::Test3,
            "test4" => TestCase::Test4,
            _ => return Err(Error::Configuration(format!("unknown test '{name}'"))),
        };
        let mut spec = SchemeSpec::mixed(ExplicitScheme::Muscl);
        if test.is_2d() {
            let t = 30f64.to_radians().tan();
            spec.velocity = (2.0, 2.0 * t);
        }
        Ok(RunConfig {
            test,
            one_step,
            spec,
            levels: test.default_levels(),
            alpha: 1e-4,
            angle: 30.0,
            x0: None,
            against: Reference::Exact,
            mode: OneStepMode::Solved,
            out: None,
            dump_fields: false,
            dump_geometry: false,
        })
    }

    pub fn test_name(&self) -> String {
        if self.one_step {
            format!("{}-onestep", self.test.name())
        } else {
            self.test.name().to_string()
        }
    }

    /// Scheme label with the slope method, extra layers and (2D) ramp angle, e.g.
    /// `MPRKC-Trap ls 30deg`.
    pub fn label(&self) -> String {
        let mut s = format!("{} {}", self.spec.label(), self.spec.slopes);
        if self.spec.extra_layers > 0 {
            s.push_str(&format!(" ext{}", self.spec.extra_layers));
        }
        if self.test.is_2d() {
            s.push_str(&format!(" {}deg", self.angle));
        }
        s
    }

    /// Velocity for 2D runs: (2, 2 tan θ) along the ramp.
    pub fn set_angle(&mut self, angle: f64) {
        self.angle = angle;
        if self.test.is_2d() {
            self.spec.velocity = (2.0, 2.0 * angle.to_radians().tan());
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.levels.is_empty() {
            return Err(Error::Configuration("no refinement levels".into()));
        }
        if self.levels.iter().any(|&n| n < 8) {
            return Err(Error::Configuration("levels must have at least 8 cells".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::param(format!("alpha {} outside (0, 1]", self.alpha)));
        }
        if self.test.is_2d() && !(self.angle > 0.0 && self.angle <= 45.0) {
            return Err(Error::param(format!("angle {} outside (0, 45]", self.angle)));
        }
        if self.test == TestCase::Test2 && self.levels.iter().any(|&n| (n * 4) % 160 != 0) {
            return Err(Error::Configuration("test2 levels must be multiples of 40".into()));
        }
        if self.against == Reference::Wbar && self.test.is_2d() {
            return Err(Error::Configuration("the modified grid function is 1D only".into()));
        }
        Ok(())
    }

    /// Flat `key=value` lines.
    pub fn to_kv(&self) -> String {
        let s = &self.spec;
        let lv: Vec<String> = self.levels.iter().map(|n| n.to_string()).collect();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("test", self.test_name());
        kv("scheme", s.explicit.to_string());
        kv("implicit", s.implicit.to_string());
        kv("coupling", s.coupling.to_string());
        kv("slopes", s.slopes.to_string());
        kv("limiter", s.limiter.to_string());
        kv("extra_layers", s.extra_layers.to_string());
        kv("nu", format!("{:?}", s.cfl));
        kv("u", format!("{:?}", s.velocity.0));
        kv("v", format!("{:?}", s.velocity.1));
        kv("levels", lv.join(","));
        kv("alpha", format!("{:?}", self.alpha));
        kv("angle", format!("{:?}", self.angle));
        if let Some(x0) = self.x0 {
            kv("x0", format!("{x0:?}"));
        }
        kv("against", match self.against {
            Reference::Exact => "exact".into(),
            Reference::Wbar => "wbar".into(),
        });
        kv("onestep_mode", match self.mode {
            OneStepMode::Solved => "solved".into(),
            OneStepMode::Substituted => "substituted".into(),
        });
        if let Some(o) = &self.out {
            kv("out", o.display().to_string());
        }
        kv("dump_fields", self.dump_fields.to_string());
        kv("dump_geometry", self.dump_geometry.to_string());
        out
    }

    /// Parses `key=value` lines; `test` must come first or the default preset is test1.
    pub fn from_kv(text: &str) -> Result<Self> {
        let pairs = parse_kv(text)?;
        let test = pairs.iter().find(|(k, _)| k == "test").map(|(_, v)| v.as_str()).unwrap_or("test1");
        let mut cfg = RunConfig::preset(test)?;
        for (k, v) in &pairs {
            if k != "test" {
                cfg.set(k, v)?;
            }
        }
        Ok(cfg)
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = |e: &dyn fmt::Display| Error::Configuration(format!("{key}={value}: {e}"));
        let num = |v: &str| f64::from_str(v.trim()).map_err(|e| bad(&e));
        let flag = |v: &str| bool::from_str(v.trim()).map_err(|e| bad(&e));
        match key {
            "test" => {
                let keep = self.clone();
                *self = RunConfig::preset(value)?;
                self.out = keep.out;
            }
            "scheme" => self.spec.explicit = value.parse::<ExplicitScheme>()?,
            "implicit" => self.spec.implicit = value.parse::<ImplicitScheme>()?,
            "coupling" => self.spec.coupling = value.parse::<Coupling>()?,
            "slopes" => self.spec.slopes = value.parse::<SlopeMethod>()?,
            "limiter" => self.spec.limiter = value.parse::<Limiter>()?,
            "extra_layers" => self.spec.extra_layers = value.trim().parse().map_err(|e| bad(&e))?,
            "nu" => self.spec.cfl = num(value)?,
            "u" => self.spec.velocity.0 = num(value)?,
            "v" => self.spec.velocity.1 = num(value)?,
            "levels" => {
                self.levels = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<usize>().map_err(|e| bad(&e)))
                    .collect::<Result<_>>()?
            }
            "alpha" => self.alpha = num(value)?,
            "angle" => self.set_angle(num(value)?),
            "x0" => self.x0 = Some(num(value)?),
            "against" => {
                self.against = match value.trim() {
                    "exact" => Reference::Exact,
                    "wbar" => Reference::Wbar,
                    _ => return Err(bad(&"expected exact or wbar")),
                }
            }
            "onestep_mode" => {
                self.mode = match value.trim() {
                    "solved" => OneStepMode::Solved,
                    "substituted" => OneStepMode::Substituted,
                    _ => return Err(bad(&"expected solved or substituted")),
                }
            }
            "out" => self.out = Some(PathBuf::from(value.trim())),
            "dump_fields" => self.dump_fields = flag(value)?,
            "dump_geometry" => self.dump_geometry = flag(value)?,
            _ => return Err(Error::Configuration(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

pub fn parse_kv(text: &str) -> Result<Vec<(String, String)>> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Configuration(format!("expected key=value, got '{l}'")))
        })
        .collect()
}

/// One refinement level's result.
#[derive(Debug, Clone)]
pub struct LevelResult {
    pub n: usize,
    pub h: f64,
    pub l1: f64,
    pub linf: f64,
    pub steps: usize,
    /// Final numerical and reference fields (physical cells) when requested.
    pub fields: Option<(Vec<f64>, Vec<f64>)>,
    pub geometry_csv: Option<String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub table: ConvergenceTable,
    pub levels: Vec<LevelResult>,
    pub files: Vec<PathBuf>,
}

/// 1D mesh, exact solution and final time for a level with `n` cells per unit length.
pub fn setup_1d(cfg: &RunConfig, n: usize) -> Result<(Mesh1D, Exact1d, f64)> {
    let h = 1.0 / n as f64;
    let u = cfg.spec.velocity.0;
    let (mesh, len) = match cfg.test {
        TestCase::Test1 => (build_single_cut_mesh(n, cfg.alpha, h)?, 1.0 + cfg.alpha * h),
        TestCase::Test2 => {
            let blocks = (4.0 * H0 / h).round() as usize;
            (build_block_mesh(BLOCK_K, blocks, cfg.alpha, h)?, 1.0 + 4.0 * cfg.alpha * H0)
        }
        _ => return Err(Error::Configuration("not a 1D test".into())),
    };
    let sol = Exact1d::sine(len, SINE_SHIFT, u);
    Ok((mesh, sol, len / u.abs()))
}

/// Geometry and exact solution for a 2D level.
pub fn setup_2d(cfg: &RunConfig, n: usize) -> Result<(CutCellGeom2D, Exact2d)> {
    let vel = cfg.spec.velocity;
    match cfg.test {
        TestCase::Test3 => {
            let geom = build_fake_cut_geometry(n, cfg.angle, cfg.x0.unwrap_or(X0_FAKE))?;
            Ok((geom, Exact2d::gaussian(1.0, 1.0, GAUSS_K, (0.49, 0.2), vel)))
        }
        TestCase::Test4 => {
            let x0 = cfg.x0.unwrap_or(X0_RAMP);
            let c = test4_center(cfg.angle, x0);
            Ok((build_ramp_geometry(n, cfg.angle, x0)?, Exact2d::gaussian(1.0, 1.0, GAUSS_K, c, vel)))
        }
        _ => Err(Error::Configuration("not a 2D test".into())),
    }
}

/// Δt adjusted down so that an integer number of steps lands on `t_end`.
pub fn fit_steps(t_end: f64, dt: f64) -> (usize, f64) {
    let steps = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    (steps, t_end / steps as f64)
}

fn reference_1d(cfg: &RunConfig, mesh: &Mesh1D, sol: &Exact1d, t: f64) -> Result<GridFn> {
    match cfg.against {
        Reference::Exact => analysis::exact_cell_averages_1d(sol, mesh, t),
        Reference::Wbar => analysis::modified_grid_function(sol, mesh, t, &cfg.spec),
    }
}

pub fn run_level_1d(cfg: &RunConfig, n: usize) -> Result<LevelResult> {
    let (mesh, sol, t_end) = setup_1d(cfg, n)?;
    let (err, steps, fields) = if cfg.one_step {
        let e = analysis::one_step_error_1d(&cfg.spec, &mesh, &sol, 0.0, cfg.mode, cfg.against)?;
        (e, 1, None)
    } else {
        let (steps, dt) = fit_steps(t_end, time_step_1d(&cfg.spec, mesh.h)?);
        let mut st = Stepper1d::new(&mesh, &cfg.spec, dt, Some(sol.clone()))?;
        let mut s = reference_1d(cfg, &mesh, &sol, 0.0)?.into_values();
        for k in 0..steps {
            s = st.step(&s, k as f64 * dt)?;
        }
        let r = reference_1d(cfg, &mesh, &sol, t_end)?;
        let num = GridFn::new(s, &mesh)?;
        let e = num.sub(&r)?;
        (e, steps, Some((num.into_values(), r.into_values())))
    };
    let (l1, linf) = norms(&err, &mesh)?;
    Ok(LevelResult { n, h: mesh.h, l1, linf, steps, fields: fields.filter(|_| cfg.dump_fields), geometry_csv: None })
}

pub fn run_level_2d(cfg: &RunConfig, n: usize) -> Result<LevelResult> {
    let (geom, sol) = setup_2d(cfg, n)?;
    let dt0 = time_step_2d(&cfg.spec, geom.h)?;
    let (steps, dt) = if cfg.one_step { (1, dt0) } else { fit_steps(T_2D, dt0) };
    let mut st = Stepper2d::new(&geom, &cfg.spec, dt, sol.clone())?;
    let (err, fields) = if cfg.one_step {
        (analysis::one_step_error_2d(&mut st, 0.0, cfg.mode)?, None)
    } else {
        let mut s = analysis::exact_averages_ext(&sol, st.geom(), 0.0)?;
        for k in 0..steps {
            s = st.step(&s, k as f64 * dt)?;
        }
        let num = GridFn::new(st.physical(&s), st.geom())?;
        let r = analysis::exact_cell_averages_2d(&sol, st.geom(), steps as f64 * dt)?;
        (num.sub(&r)?, Some((num.into_values(), r.into_values())))
    };
    let (l1, linf) = norms(&err, st.geom())?;
    Ok(LevelResult {
        n,
        h: geom.h,
        l1,
        linf,
        steps,
        fields: fields.filter(|_| cfg.dump_fields),
        geometry_csv: cfg.dump_geometry.then(|| st.geom().to_csv()),
    })
}

pub fn run_level(cfg: &RunConfig, n: usize) -> Result<LevelResult> {
    let r = if cfg.test.is_2d() { run_level_2d(cfg, n) } else { run_level_1d(cfg, n) };
    r.map_err(|e| Error::Run { test: cfg.test_name(), level: n, source: Box::new(e) })
}

/// Runs every level, fits orders and writes CSV and markdown files under `cfg.out`.
pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let levels = run_levels(cfg)?;
    let mut table = ConvergenceTable::default();
    for l in &levels {
        table.push(l.h, l.l1, l.linf);
    }
    let table = if table.rows.len() >= 2 { fit_orders(&table)? } else { table };
    let mut files = Vec::new();
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        let stem = format!("{}_{}", cfg.test_name(), cfg.label().replace(['-', ' ', '.'], "_"));
        let title = format!("{} {} ({})", cfg.test_name(), cfg.label(), if cfg.one_step { "one step" } else { "final time" });
        files.push(write(dir, &format!("{stem}.csv"), &table.to_csv())?);
        files.push(write(dir, &format!("{stem}.md"), &table.to_markdown(&title))?);
        for l in &levels {
            if let Some((num, r)) = &l.fields {
                let mut s = String::from("cell,numerical,reference\n");
                for (k, (a, b)) in num.iter().zip(r).enumerate() {
                    s.push_str(&format!("{k},{a:.16e},{b:.16e}\n"));
                }
                files.push(write(dir, &format!("{stem}_fields_N{}.csv", l.n), &s)?);
            }
            if let Some(g) = &l.geometry_csv {
                files.push(write(dir, &format!("geometry_{}_N{}.csv", cfg.test_name(), l.n), g)?);
            }
        }
    }
    Ok(RunOutput { table, levels, files })
}

#[cfg(feature = "cli")]
fn run_levels(cfg: &RunConfig) -> Result<Vec<LevelResult>> {
    use rayon::prelude::*;
    cfg.levels.par_iter().map(|&n| run_level(cfg, n)).collect()
}

#[cfg(not(feature = "cli"))]
fn run_levels(cfg: &RunConfig) -> Result<Vec<LevelResult>> {
    cfg.levels.iter().map(|&n| run_level(cfg, n)).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let p = dir.join(name);
    std::fs::write(&p, text)?;
    Ok(p)
}
