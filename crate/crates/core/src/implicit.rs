//! Linear systems for the implicitly treated cells.

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

/// Affine combination Σ w·S[cell] + constant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinComb {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl LinComb {
    pub fn constant(c: f64) -> Self {
        LinComb { terms: Vec::new(), constant: c }
    }

    pub fn cell(k: usize) -> Self {
        LinComb { terms: vec![(k, 1.0)], constant: 0.0 }
    }

    pub fn add_term(&mut self, k: usize, w: f64) {
        self.terms.push((k, w));
    }

    /// self += c·other
    pub fn add_scaled(&mut self, other: &LinComb, c: f64) {
        self.terms.extend(other.terms.iter().map(|&(k, w)| (k, c * w)));
        self.constant += c * other.constant;
    }

    pub fn add_stencil(&mut self, st: &[(usize, f64)], c: f64) {
        self.terms.extend(st.iter().map(|&(k, w)| (k, c * w)));
    }

    pub fn eval(&self, s: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(k, w)| w * s[k]).sum::<f64>()
    }
}

/// One equation `lhs(S^{n+1}) = 0` owned by `cell`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImplicitRow {
    pub cell: usize,
    pub lhs: LinComb,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseSystem {
    pub n: usize,
    /// Merged, sorted by (row, col).
    pub triplets: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
    /// Cell id of each unknown.
    pub cells: Vec<usize>,
}

/// Build `A x = b` from rows. `unknown_of[cell]` gives the unknown index; terms on other
/// cells are evaluated with `known` and moved to the right-hand side.
pub fn assemble(rows: &[ImplicitRow], unknown_of: &[Option<usize>], known: &[f64]) -> Result<SparseSystem> {
    let n = rows.len();
    let mut trip = Vec::with_capacity(rows.iter().map(|r| r.lhs.terms.len()).sum());
    let mut rhs = vec![0.0; n];
    let mut cells = Vec::with_capacity(n);
    for (r, row) in rows.iter().enumerate() {
        if unknown_of.get(row.cell).copied().flatten() != Some(r) {
            return Err(Error::Assembly(format!("row {r} is not owned by its cell {}", row.cell)));
        }
        cells.push(row.cell);
        let mut b = -row.lhs.constant;
        for &(k, w) in &row.lhs.terms {
            match unknown_of[k] {
                Some(c) => trip.push((r, c, w)),
                None => b -= w * known[k],
            }
        }
        rhs[r] = b;
    }
    let triplets = merge(trip);
    let mut seen = vec![false; n];
    for &(r, c, v) in &triplets {
        if v != 0.0 {
            seen[c] = true;
        }
        if r == c && v == 0.0 {
            return Err(Error::Assembly(format!("zero diagonal in row {r}")));
        }
    }
    if let Some(c) = seen.iter().position(|s| !s) {
        return Err(Error::Assembly(format!("unknown for cell {} appears in no equation", cells[c])));
    }
    Ok(SparseSystem { n, triplets, rhs, cells })
}

fn merge(mut t: Vec<(usize, usize, f64)>) -> Vec<(usize, usize, f64)> {
    t.sort_unstable_by_key(|&(r, c, _)| (r, c));
    let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(t.len());
    for (r, c, v) in t {
        match out.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => out.push((r, c, v)),
        }
    }
    out
}

/// Tolerance on the normwise backward error ‖Ax − b‖∞ / (‖A‖∞‖x‖∞ + ‖b‖∞) after a solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// An LU factorisation kept for repeated solves with the same matrix.
pub struct FactoredSystem {
    n: usize,
    triplets: Vec<(usize, usize, f64)>,
    lu: Lu<usize, f64>,
}

impl std::fmt::Debug for FactoredSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FactoredSystem").field("n", &self.n).field("nnz", &self.triplets.len()).finish()
    }
}

impl FactoredSystem {
    pub fn factor(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let entries: Vec<_> = triplets.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries)
            .map_err(|e| Error::Assembly(format!("{e:?}")))?;
        // the factorization panics on an exactly zero pivot
        let lu = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| a.sp_lu()))
            .map_err(|_| Error::Singular { pivot: n })?
            .map_err(|e| match e {
                LuError::SymbolicSingular { index } => Error::Singular { pivot: index },
                LuError::Generic(g) => Error::Assembly(format!("{g:?}")),
            })?;
        Ok(FactoredSystem { n, triplets: triplets.to_vec(), lu })
    }

    pub fn same_matrix(&self, n: usize, triplets: &[(usize, usize, f64)]) -> bool {
        self.n == n && self.triplets == triplets
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = Col::<f64>::from_fn(self.n, |i| rhs[i]);
        let x = self.lu.solve(&b);
        let x: Vec<f64> = (0..self.n).map(|i| x[i]).collect();
        if let Some(p) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Singular { pivot: p });
        }
        let mut r: Vec<f64> = rhs.iter().map(|v| -v).collect();
        let mut row_abs = vec![0.0f64; self.n];
        for &(i, j, v) in &self.triplets {
            r[i] += v * x[j];
            row_abs[i] += v.abs();
        }
        let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let scale = inf(&row_abs) * inf(&x) + inf(rhs);
        let rmax = inf(&r);
        if rmax > RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE) && rmax > 0.0 {
            return Err(Error::Accuracy(format!("backward error {:.3e}", rmax / scale)));
        }
        Ok(x)
    }
}

/// Direct sparse LU solve with a residual check.
pub fn solve(sys: &SparseSystem) -> Result<Vec<f64>> {
    if sys.n == 0 {
        return Ok(Vec::new());
    }
    FactoredSystem::factor(sys.n, &sys.triplets)?.solve(&sys.rhs)
}

/// Reuses the cached factorisation while the matrix is unchanged.
pub fn solve_cached(cache: &mut Option<FactoredSystem>, sys: &SparseSystem) -> Result<Vec<f64>> {
    if sys.n == 0 {
        return Ok(Vec::new());
    }
    let fresh = !matches!(cache, Some(f) if f.same_matrix(sys.n, &sys.triplets));
    if fresh {
        *cache = Some(FactoredSystem::factor(sys.n, &sys.triplets)?);
    }
    cache.as_ref().expect("factored above").solve(&sys.rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(n: usize, t: &[(usize, usize, f64)], b: &[f64]) -> SparseSystem {
        SparseSystem { n, triplets: merge(t.to_vec()), rhs: b.to_vec(), cells: (0..n).collect() }
    }

    #[test]
    fn identity_and_two_by_two() {
        let id = dense(3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)], &[1.0, -2.0, 3.5]);
        assert_eq!(solve(&id).unwrap(), vec![1.0, -2.0, 3.5]);
        let s = dense(2, &[(0, 0, 2.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)], &[3.0, 3.0]);
        let x = solve(&s).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
            x[k] = (b[k] - s) / a[k][k];
        }
        x
    }

    #[test]
    fn random_diagonally_dominant() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let mut a = vec![vec![0.0; n]; n];
        let mut t = Vec::new();
        for (i, row) in a.iter_mut().enumerate() {
            for _ in 0..5 {
                let j = rng.gen_range(0..n);
                if j != i {
                    let v = rng.gen_range(-1.0..1.0);
                    row[j] += v;
                    t.push((i, j, v));
                }
            }
            let d = 6.0 + rng.gen_range(0.0..1.0);
            row[i] += d;
            t.push((i, i, d));
        }
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solve(&dense(n, &t, &b)).unwrap();
        let y = gauss(a, b);
        let diff = x.iter().zip(&y).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-11, "{diff}");
    }

    #[test]
    fn singular_reports() {
        let s = dense(2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)], &[1.0, 2.0]);
        assert!(matches!(solve(&s), Err(Error::Singular { .. }) | Err(Error::Accuracy(_))));
    }

    #[test]
    fn scalar_implicit_euler_row() {
        // (1 + λ/α) X = S^n + (λ/α) S_up
        let (lam, alpha, sn, sup) = (0.8, 0.25, 2.0, 3.0);
        let c = lam / alpha;
        let mut lhs = LinComb::cell(1);
        lhs.add_term(1, c);
        lhs.add_term(0, -c);
        lhs.constant = -sn;
        let rows = [ImplicitRow { cell: 1, lhs }];
        let sys = assemble(&rows, &[None, Some(0)], &[sup, 0.0]).unwrap();
        assert_eq!(sys.triplets, vec![(0, 0, 1.0 + c)]);
        assert!((sys.rhs[0] - (sn + c * sup)).abs() < 1e-15);
        let x = solve(&sys).unwrap();
        assert!((x[0] - (sn + c * sup) / (1.0 + c)).abs() < 1e-14);
    }

    #[test]
    fn unreachable_unknown() {
        let mut l0 = LinComb::cell(0);
        l0.constant = -1.0;
        let mut l1 = LinComb::cell(0);
        l1.add_term(1, 0.0);
        let rows = [ImplicitRow { cell: 0, lhs: l0 }, ImplicitRow { cell: 1, lhs: l1 }];
        assert!(matches!(assemble(&rows, &[Some(0), Some(1)], &[0.0, 0.0]), Err(Error::Assembly(_))));
    }

    #[test]
    fn cache_refactors_on_change() {
        let mut cache = None;
        let a = dense(1, &[(0, 0, 2.0)], &[4.0]);
        assert_eq!(solve_cached(&mut cache, &a).unwrap(), vec![2.0]);
        let b = dense(1, &[(0, 0, 4.0)], &[4.0]);
        assert_eq!(solve_cached(&mut cache, &b).unwrap(), vec![1.0]);
    }
}
