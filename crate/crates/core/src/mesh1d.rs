//! Periodic 1D meshes with small cut cells.

use crate::config::SchemeSpec;
use crate::error::{Error, Result};
use crate::state::{FvMesh, MeshId, Role};

#[derive(Debug, Clone)]
pub struct Mesh1D {
    id: MeshId,
    /// Base (Cartesian) width.
    pub h: f64,
    pub alpha: f64,
    pub lengths: Vec<f64>,
    pub centers: Vec<f64>,
    /// Left edge of each cell; `edges[n]` is the domain length.
    pub edges: Vec<f64>,
    pub cut_cells: Vec<usize>,
    /// Periodic cell distance to the nearest cut cell.
    pub dist_to_cut: Vec<usize>,
    pub roles: Vec<Role>,
    pub periodic: bool,
}

impl FvMesh for Mesh1D {
    fn id(&self) -> MeshId {
        self.id
    }
    fn n_cells(&self) -> usize {
        self.lengths.len()
    }
    fn volume(&self, i: usize) -> f64 {
        self.lengths[i]
    }
}

impl Mesh1D {
    fn from_lengths(lengths: Vec<f64>, cut_cells: Vec<usize>, h: f64, alpha: f64) -> Self {
        let n = lengths.len();
        let mut edges = Vec::with_capacity(n + 1);
        let mut x = 0.0;
        edges.push(0.0);
        for l in &lengths {
            x += l;
            edges.push(x);
        }
        let centers = (0..n).map(|i| 0.5 * (edges[i] + edges[i + 1])).collect();
        let mut dist = vec![usize::MAX; n];
        for &c in &cut_cells {
            for (i, d) in dist.iter_mut().enumerate() {
                let k = i.abs_diff(c);
                *d = (*d).min(k.min(n - k));
            }
        }
        Mesh1D {
            id: MeshId::fresh(),
            h,
            alpha,
            lengths,
            centers,
            edges,
            cut_cells,
            dist_to_cut: dist,
            roles: vec![Role::Explicit; n],
            periodic: true,
        }
    }

    pub fn n(&self) -> usize {
        self.lengths.len()
    }

    pub fn domain_length(&self) -> f64 {
        self.edges[self.n()]
    }

    pub fn prev(&self, i: usize) -> usize {
        (i + self.n() - 1) % self.n()
    }

    pub fn next(&self, i: usize) -> usize {
        (i + 1) % self.n()
    }

    /// Signed distance from the center of `i` to the center of `j`, with `j` an
    /// immediate neighbour (wraps periodically).
    pub fn center_offset(&self, i: usize, j: usize) -> f64 {
        let half = 0.5 * (self.lengths[i] + self.lengths[j]);
        if j == self.next(i) {
            half
        } else if j == self.prev(i) {
            -half
        } else {
            self.centers[j] - self.centers[i]
        }
    }

    /// True if cell `i` and both its neighbours have width `h`.
    pub fn uniform_around(&self, i: usize) -> bool {
        let full = |k: usize| (self.lengths[k] - self.h).abs() <= 1e-12 * self.h;
        full(self.prev(i)) && full(i) && full(self.next(i))
    }
}

fn check_alpha_h(alpha: f64, h: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::param(format!("alpha {alpha} outside (0, 1]")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::param(format!("cell width {h} must be positive")));
    }
    Ok(())
}

/// `m` cells of width `h` with one cell of width `alpha*h` after the first `m/2`.
pub fn build_single_cut_mesh(m: usize, alpha: f64, h: f64) -> Result<Mesh1D> {
    check_alpha_h(alpha, h)?;
    if m < 4 {
        return Err(Error::param("need at least 4 Cartesian cells"));
    }
    let half = m / 2;
    let mut lengths = vec![h; m + 1];
    lengths[half] = alpha * h;
    Ok(Mesh1D::from_lengths(lengths, vec![half], h, alpha))
}

/// `l` blocks, each `k/2` full cells, a cut cell of width `alpha*h`, then `k/2` full cells.
pub fn build_block_mesh(k: usize, l: usize, alpha: f64, h: f64) -> Result<Mesh1D> {
    check_alpha_h(alpha, h)?;
    if k < 2 || !k.is_multiple_of(2) {
        return Err(Error::param(format!("block size K={k} must be even and positive")));
    }
    if l == 0 {
        return Err(Error::param("need at least one block"));
    }
    let mut lengths = Vec::with_capacity(l * (k + 1));
    let mut cuts = Vec::with_capacity(l);
    for _ in 0..l {
        lengths.extend(std::iter::repeat_n(h, k / 2));
        cuts.push(lengths.len());
        lengths.push(alpha * h);
        lengths.extend(std::iter::repeat_n(h, k / 2));
    }
    Ok(Mesh1D::from_lengths(lengths, cuts, h, alpha))
}

/// Assign roles for `spec`: cut cells and the next `R` layers form the implicit core,
/// layer `R+1` are transition cells.
pub fn classify_cells_1d(mesh: &Mesh1D, spec: &SchemeSpec) -> Result<Mesh1D> {
    let mut out = mesh.clone();
    if !spec.is_mixed() {
        out.roles = vec![Role::Explicit; mesh.n()];
        return Ok(out);
    }
    let r = spec.core_radius();
    let n = mesh.n();
    let mut sorted = mesh.cut_cells.clone();
    sorted.sort_unstable();
    for (a, &c) in sorted.iter().enumerate() {
        let next = sorted[(a + 1) % sorted.len()];
        let gap = if sorted.len() == 1 { n - 1 } else { (next + n - c) % n - 1 };
        if gap < 2 * r + 4 {
            return Err(Error::Configuration(format!(
                "only {gap} cells between cut cells {c} and {next}; implicit zones of width {r} would touch"
            )));
        }
    }
    out.roles = mesh
        .dist_to_cut
        .iter()
        .map(|&d| match d {
            0 => Role::Cut,
            d if d <= r => Role::ImplicitInterior,
            d if d == r + 1 => Role::Transition,
            _ => Role::Explicit,
        })
        .collect();
    Ok(out)
}
