//! Exact solutions of constant-velocity advection.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

type F2 = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type F3 = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// s(t, x) with its first two x-derivatives and, when known, an x-antiderivative.
#[derive(Clone)]
pub struct Exact1d {
    pub tag: String,
    f: F2,
    fx: F2,
    fxx: F2,
    anti: Option<F2>,
}

impl fmt::Debug for Exact1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Exact1d({})", self.tag)
    }
}

const FD_STEP: f64 = 1e-4;
const SHORT_INTERVAL: f64 = 1e-3;
const FD_TOL: f64 = 1e-6;

fn fd_close(fd: f64, exact: f64, scale: f64) -> bool {
    (fd - exact).abs() <= FD_TOL * scale.max(1.0)
}

impl Exact1d {
    /// Wraps the callables after a finite-difference consistency check at a few points.
    pub fn new(
        tag: impl Into<String>,
        f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        fx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        fxx: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        anti: Option<F2>,
    ) -> Result<Self> {
        let s = Exact1d { tag: tag.into(), f: Arc::new(f), fx: Arc::new(fx), fxx: Arc::new(fxx), anti };
        let h = FD_STEP;
        for &(t, x) in &[(0.0, 0.13), (0.07, 0.52), (0.31, 0.9)] {
            let d1 = (s.value(t, x + h) - s.value(t, x - h)) / (2.0 * h);
            let d2 = (s.dx(t, x + h) - s.dx(t, x - h)) / (2.0 * h);
            if !fd_close(d1, s.dx(t, x), s.dx(t, x).abs()) || !fd_close(d2, s.dxx(t, x), s.dxx(t, x).abs()) {
                return Err(Error::param(format!("derivatives of '{}' are inconsistent at x={x}", s.tag)));
            }
            if let Some(a) = &s.anti {
                let d0 = (a(t, x + h) - a(t, x - h)) / (2.0 * h);
                if !fd_close(d0, s.value(t, x), s.value(t, x).abs()) {
                    return Err(Error::param(format!("antiderivative of '{}' is inconsistent", s.tag)));
                }
            }
        }
        Ok(s)
    }

    /// sin(2π(x − u t + shift)/period).
    pub fn sine(period: f64, shift: f64, u: f64) -> Self {
        let k = 2.0 * PI / period;
        Exact1d::new(
            format!("sin(2pi(x+{shift})/{period})"),
            move |t, x| (k * (x - u * t + shift)).sin(),
            move |t, x| k * (k * (x - u * t + shift)).cos(),
            move |t, x| -k * k * (k * (x - u * t + shift)).sin(),
            Some(Arc::new(move |t, x| -(k * (x - u * t + shift)).cos() / k)),
        )
        .expect("analytic sine derivatives")
    }

    /// a + b (x − u t).
    pub fn affine(a: f64, b: f64, u: f64) -> Self {
        Exact1d::new(
            "affine",
            move |t, x| a + b * (x - u * t),
            move |_, _| b,
            |_, _| 0.0,
            Some(Arc::new(move |t, x| a * x + 0.5 * b * (x - u * t).powi(2))),
        )
        .expect("affine derivatives")
    }

    pub fn value(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }
    pub fn dx(&self, t: f64, x: f64) -> f64 {
        (self.fx)(t, x)
    }
    pub fn dxx(&self, t: f64, x: f64) -> f64 {
        (self.fxx)(t, x)
    }

    /// Average over [a, b] at time t. Short intervals skip the antiderivative, whose
    /// difference would cancel.
    pub fn average(&self, t: f64, a: f64, b: f64) -> Result<f64> {
        match &self.anti {
            Some(p) if b - a > SHORT_INTERVAL * (1.0 + a.abs().max(b.abs())) => Ok((p(t, b) - p(t, a)) / (b - a)),
            _ => super::quadrature::average_1d(&|x| self.value(t, x), a, b, 1e-13),
        }
    }
}

/// s(t, x, y) with gradient and Hessian.
#[derive(Clone)]
pub struct Exact2d {
    pub tag: String,
    f: F3,
    fx: F3,
    fy: F3,
    fxx: F3,
    fxy: F3,
    fyy: F3,
}

impl fmt::Debug for Exact2d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Exact2d({})", self.tag)
    }
}

impl Exact2d {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tag: impl Into<String>,
        f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        fx: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        fy: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        fxx: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        fxy: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
        fyy: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        let s = Exact2d {
            tag: tag.into(),
            f: Arc::new(f),
            fx: Arc::new(fx),
            fy: Arc::new(fy),
            fxx: Arc::new(fxx),
            fxy: Arc::new(fxy),
            fyy: Arc::new(fyy),
        };
        let h = FD_STEP;
        for &(t, x, y) in &[(0.0, 0.45, 0.21), (0.05, 0.3, 0.4), (0.1, 0.7, 0.3)] {
            let (gx, gy) = s.grad(t, x, y);
            let (hxx, hxy, hyy) = s.hess(t, x, y);
            let dx = (s.value(t, x + h, y) - s.value(t, x - h, y)) / (2.0 * h);
            let dy = (s.value(t, x, y + h) - s.value(t, x, y - h)) / (2.0 * h);
            let dxx = (s.grad(t, x + h, y).0 - s.grad(t, x - h, y).0) / (2.0 * h);
            let dxy = (s.grad(t, x, y + h).0 - s.grad(t, x, y - h).0) / (2.0 * h);
            let dyy = (s.grad(t, x, y + h).1 - s.grad(t, x, y - h).1) / (2.0 * h);
            let sc = 1.0 + hxx.abs() + hxy.abs() + hyy.abs();
            let ok = fd_close(dx, gx, sc)
                && fd_close(dy, gy, sc)
                && fd_close(dxx, hxx, 100.0 * sc)
                && fd_close(dxy, hxy, 100.0 * sc)
                && fd_close(dyy, hyy, 100.0 * sc);
            if !ok {
                return Err(Error::param(format!("derivatives of '{}' are inconsistent", s.tag)));
            }
        }
        Ok(s)
    }

    /// base + amp·exp(−k((x−x0−ut)² + (y−y0−vt)²)).
    pub fn gaussian(base: f64, amp: f64, k: f64, center: (f64, f64), vel: (f64, f64)) -> Self {
        let (x0, y0) = center;
        let (u, v) = vel;
        let g = move |t: f64, x: f64, y: f64| {
            let (a, b) = (x - x0 - u * t, y - y0 - v * t);
            (a, b, amp * (-k * (a * a + b * b)).exp())
        };
        Exact2d::new(
            format!("gaussian({x0},{y0})"),
            move |t, x, y| base + g(t, x, y).2,
            move |t, x, y| {
                let (a, _, e) = g(t, x, y);
                -2.0 * k * a * e
            },
            move |t, x, y| {
                let (_, b, e) = g(t, x, y);
                -2.0 * k * b * e
            },
            move |t, x, y| {
                let (a, _, e) = g(t, x, y);
                (4.0 * k * k * a * a - 2.0 * k) * e
            },
            move |t, x, y| {
                let (a, b, e) = g(t, x, y);
                4.0 * k * k * a * b * e
            },
            move |t, x, y| {
                let (_, b, e) = g(t, x, y);
                (4.0 * k * k * b * b - 2.0 * k) * e
            },
        )
        .expect("gaussian derivatives")
    }

    /// Translated quadratic c0 + gx ξ + gy η + ½(a ξ² + 2b ξη + c η²), ξ = x−ut, η = y−vt.
    pub fn quadratic(c0: f64, g: (f64, f64), hess: (f64, f64, f64), vel: (f64, f64)) -> Self {
        let (a, b, c) = hess;
        let (u, v) = vel;
        Exact2d::new(
            "quadratic",
            move |t, x, y| {
                let (p, q) = (x - u * t, y - v * t);
                c0 + g.0 * p + g.1 * q + 0.5 * (a * p * p + 2.0 * b * p * q + c * q * q)
            },
            move |t, x, y| g.0 + a * (x - u * t) + b * (y - v * t),
            move |t, x, y| g.1 + b * (x - u * t) + c * (y - v * t),
            move |_, _, _| a,
            move |_, _, _| b,
            move |_, _, _| c,
        )
        .expect("quadratic derivatives")
    }

    pub fn affine(c0: f64, g: (f64, f64), vel: (f64, f64)) -> Self {
        Exact2d::quadratic(c0, g, (0.0, 0.0, 0.0), vel)
    }

    pub fn value(&self, t: f64, x: f64, y: f64) -> f64 {
        (self.f)(t, x, y)
    }
    pub fn grad(&self, t: f64, x: f64, y: f64) -> (f64, f64) {
        ((self.fx)(t, x, y), (self.fy)(t, x, y))
    }
    pub fn hess(&self, t: f64, x: f64, y: f64) -> (f64, f64, f64) {
        ((self.fxx)(t, x, y), (self.fxy)(t, x, y), (self.fyy)(t, x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inconsistent_derivative_rejected() {
        let bad = Exact1d::new("bad", |_, x| x * x, |_, x| x, |_, _| 2.0, None);
        assert!(bad.is_err());
        let bad2 = Exact2d::new("bad", |_, x, _| x, |_, _, _| 1.0, |_, _, _| 1.0, |_, _, _| 0.0, |_, _, _| 0.0, |_, _, _| 0.0);
        assert!(bad2.is_err());
    }

    #[test]
    fn sine_average_closed_form() {
        let s = Exact1d::sine(1.0, 0.0, 1.0);
        let h = 1.0 / 64.0;
        let tp = 2.0 * PI;
        for i in 0..64 {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            let want = ((tp * a).cos() - (tp * b).cos()) / (tp * h);
            assert!((s.average(0.0, a, b).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn translation() {
        let g = Exact2d::gaussian(1.0, 1.0, 120.0, (0.49, 0.2), (2.0, 1.0));
        assert!((g.value(0.1, 0.69, 0.3) - 2.0).abs() < 1e-15);
    }
}
