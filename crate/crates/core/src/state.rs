//! Cell-average state containers.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

/// Identity tag handed out to every mesh at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MeshId(u64);

impl MeshId {
    pub fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        MeshId(NEXT.fetch_add(1, Ordering::Relaxed))
    }
}

/// Anything that owns finite-volume cells.
pub trait FvMesh {
    fn id(&self) -> MeshId;
    fn n_cells(&self) -> usize;
    /// Fluid volume of cell `i` (length in 1D, area in 2D). Zero for solid cells.
    fn volume(&self, i: usize) -> f64;
}

/// Time-stepping role of a cell in a mixed scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Explicit,
    Transition,
    Cut,
    ImplicitInterior,
}

impl Role {
    /// Cut and implicit-interior cells: every face touching them is implicit.
    pub fn is_core(self) -> bool {
        matches!(self, Role::Cut | Role::ImplicitInterior)
    }

    /// Cells whose new value comes out of the linear solve.
    pub fn is_implicit(self) -> bool {
        self != Role::Explicit
    }

    pub fn letter(self) -> char {
        match self {
            Role::Explicit => 'E',
            Role::Transition => 'T',
            Role::Cut => 'C',
            Role::ImplicitInterior => 'I',
        }
    }
}

/// Cell averages tied to one mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFn {
    values: Vec<f64>,
    mesh_id: MeshId,
}

impl GridFn {
    pub fn new<M: FvMesh + ?Sized>(values: Vec<f64>, mesh: &M) -> Result<Self> {
        if values.len() != mesh.n_cells() {
            return Err(Error::Alignment(format!(
                "{} values for {} cells",
                values.len(),
                mesh.n_cells()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite value in cell {i}")));
        }
        Ok(GridFn { values, mesh_id: mesh.id() })
    }

    pub fn from_fn<M: FvMesh + ?Sized>(mesh: &M, f: impl FnMut(usize) -> f64) -> Result<Self> {
        GridFn::new((0..mesh.n_cells()).map(f).collect(), mesh)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mesh_id(&self) -> MeshId {
        self.mesh_id
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn check_mesh<M: FvMesh + ?Sized>(&self, mesh: &M) -> Result<()> {
        if self.mesh_id != mesh.id() || self.values.len() != mesh.n_cells() {
            return Err(Error::Alignment("grid function belongs to another mesh".into()));
        }
        Ok(())
    }

    /// Cellwise `self - other`.
    pub fn sub(&self, other: &GridFn) -> Result<GridFn> {
        if self.mesh_id != other.mesh_id || self.len() != other.len() {
            return Err(Error::Alignment("operands live on different meshes".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(GridFn { values, mesh_id: self.mesh_id })
    }

    pub fn scale(&self, c: f64) -> GridFn {
        GridFn { values: self.values.iter().map(|v| c * v).collect(), mesh_id: self.mesh_id }
    }

    /// Σ vol_i S_i.
    pub fn total<M: FvMesh + ?Sized>(&self, mesh: &M) -> f64 {
        self.values.iter().enumerate().map(|(i, v)| mesh.volume(i) * v).sum()
    }
}
