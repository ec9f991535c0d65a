use crate::error::Result;
use crate::state::{FvMesh, GridFn};

/// Volume-normalised L¹ and max norm of a cell error. Solid cells are skipped.
pub fn norms<M: FvMesh + ?Sized>(err: &GridFn, mesh: &M) -> Result<(f64, f64)> {
    err.check_mesh(mesh)?;
    Ok(norms_weighted(err.values(), |i| mesh.volume(i)))
}

pub(crate) fn norms_weighted(e: &[f64], vol: impl Fn(usize) -> f64) -> (f64, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut max = 0.0f64;
    for (i, &v) in e.iter().enumerate() {
        let w = vol(i);
        if w <= 0.0 {
            continue;
        }
        num += w * v.abs();
        den += w;
        max = max.max(v.abs());
    }
    if den == 0.0 {
        return (0.0, 0.0);
    }
    (num / den, max)
}
