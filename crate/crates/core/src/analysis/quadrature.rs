//! Gauss–Legendre rules on intervals, squares and triangles.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights on [-1, 1] by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    static R: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(8))
}

/// ∫_a^b f with an 8-point rule.
pub fn integrate_1d(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (x, w) = gl8();
    let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
    r * x.iter().zip(w).map(|(x, w)| w * f(m + r * x)).sum::<f64>()
}

/// Average of f over [a, b], bisecting until two levels agree to `tol`.
pub fn average_1d(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut pieces = 1usize;
    let mut prev = integrate_1d(f, a, b);
    for _ in 0..12 {
        pieces *= 2;
        let h = (b - a) / pieces as f64;
        let cur: f64 = (0..pieces).map(|k| integrate_1d(f, a + k as f64 * h, a + (k + 1) as f64 * h)).sum();
        let scale = (b - a).abs().max(f64::MIN_POSITIVE);
        if (cur - prev).abs() <= tol * scale * cur.abs().max(1.0) {
            return Ok(cur / (b - a));
        }
        prev = cur;
    }
    Err(Error::Accuracy(format!("quadrature on [{a}, {b}] did not converge")))
}

/// ∫ over the triangle (p0, p1, p2) via the collapsed tensor rule.
pub fn integrate_triangle(f: &dyn Fn(f64, f64) -> f64, p: [(f64, f64); 3]) -> f64 {
    let (x, w) = gl8();
    let area2 = ((p[1].0 - p[0].0) * (p[2].1 - p[0].1) - (p[2].0 - p[0].0) * (p[1].1 - p[0].1)).abs();
    let mut s = 0.0;
    for (a, wa) in x.iter().zip(w) {
        let u = 0.5 * (a + 1.0);
        for (b, wb) in x.iter().zip(w) {
            let v = 0.5 * (b + 1.0) * (1.0 - u);
            let px = p[0].0 + u * (p[1].0 - p[0].0) + v * (p[2].0 - p[0].0);
            let py = p[0].1 + u * (p[1].1 - p[0].1) + v * (p[2].1 - p[0].1);
            s += wa * wb * (1.0 - u) * f(px, py);
        }
    }
    0.25 * s * area2
}

fn split4(t: [(f64, f64); 3]) -> [[(f64, f64); 3]; 4] {
    let m = |a: (f64, f64), b: (f64, f64)| (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
    let (a, b, c) = (m(t[0], t[1]), m(t[1], t[2]), m(t[2], t[0]));
    [[t[0], a, c], [a, t[1], b], [c, b, t[2]], [a, b, c]]
}

fn integrate_tris(f: &dyn Fn(f64, f64) -> f64, tris: &[[(f64, f64); 3]]) -> f64 {
    tris.iter().map(|&t| integrate_triangle(f, t)).sum()
}

/// Average of f over a convex polygon, refining a fan triangulation until two
/// successive levels agree to `tol`.
pub fn average_polygon(f: &dyn Fn(f64, f64) -> f64, poly: &[(f64, f64)], area: f64, tol: f64) -> Result<f64> {
    if poly.len() < 3 || area <= 0.0 {
        return Err(Error::param("degenerate polygon"));
    }
    let mut tris: Vec<[(f64, f64); 3]> = (1..poly.len() - 1).map(|k| [poly[0], poly[k], poly[k + 1]]).collect();
    let mut prev = integrate_tris(f, &tris);
    for _ in 0..6 {
        tris = tris.iter().flat_map(|&t| split4(t)).collect();
        let cur = integrate_tris(f, &tris);
        if (cur - prev).abs() <= tol * area * (cur / area).abs().max(1.0) {
            return Ok(cur / area);
        }
        prev = cur;
    }
    Err(Error::Accuracy("polygon quadrature did not converge".into()))
}

/// Average of f over an axis-aligned rectangle with a tensor rule, refined by 2×2 splits.
pub fn average_rect(f: &dyn Fn(f64, f64) -> f64, x0: f64, x1: f64, y0: f64, y1: f64, tol: f64) -> Result<f64> {
    let (x, w) = gl8();
    let rule = |n: usize| {
        let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
        let mut s = 0.0;
        for a in 0..n {
            for b in 0..n {
                let (cx, cy) = (x0 + (a as f64 + 0.5) * hx, y0 + (b as f64 + 0.5) * hy);
                for (xi, wi) in x.iter().zip(w) {
                    for (yj, wj) in x.iter().zip(w) {
                        s += wi * wj * f(cx + 0.5 * hx * xi, cy + 0.5 * hy * yj);
                    }
                }
            }
        }
        0.25 * s / (n * n) as f64
    };
    let mut n = 1;
    let mut prev = rule(n);
    for _ in 0..5 {
        n *= 2;
        let cur = rule(n);
        if (cur - prev).abs() <= tol * cur.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Accuracy("rectangle quadrature did not converge".into()))
}
