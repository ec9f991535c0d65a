use cutcell::analysis::exact::Exact2d;
use cutcell::analysis::exact_average_ext;
use cutcell::geometry2d::{build_fake_cut_geometry, build_ramp_geometry, CellClass, CutCellGeom2D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ∫ clamp(p, 0, w) dp, the building block of the trapezoid area formula.
fn clamp_integral(p: f64, w: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else if p <= w {
        0.5 * p * p
    } else {
        0.5 * w * w + w * (p - w)
    }
}

/// Fluid area of the square [xa, xa+h]×[ya, ya+h] above y = t(x − x0), by hand:
/// the solid height is clamp(t(x − x0) − ya, 0, h), and substituting p = t(x − x0) − ya
/// integrates it in closed form.
fn hand_fluid_area(t: f64, x0: f64, xa: f64, ya: f64, h: f64) -> f64 {
    let p = |x: f64| t * (x - x0) - ya;
    let solid = (clamp_integral(p(xa + h), h) - clamp_integral(p(xa), h)) / t;
    h * h - solid
}

fn cell_origin(g: &CutCellGeom2D, k: usize) -> (f64, f64) {
    let (ii, jj) = g.ext_ij(g.ext_of_phys(k));
    let b = g.cell_bounds(ii, jj);
    (b.0, b.2)
}

#[test]
fn alphas_match_trapezoid_formula() {
    for angle in [5.0, 10.0, 20.0, 30.0, 40.0, 45.0] {
        for (n, x0) in [(16, 0.146), (37, 0.3), (64, 0.0)] {
            let g = build_ramp_geometry(n, angle, x0).unwrap();
            let t = g.tan();
            for k in 0..n * n {
                let (xa, ya) = cell_origin(&g, k);
                let want = hand_fluid_area(t, x0, xa, ya, g.h) / (g.h * g.h);
                let got = g.cells[g.ext_of_phys(k)].alpha;
                // slivers below the threshold become solid
                let want = if want < 1e-14 { 0.0 } else { want };
                assert!((got - want).abs() < 1e-12, "angle {angle} n {n} cell {k}: {got} vs {want}");
            }
        }
    }
}

/// Jittered (stratified) Monte-Carlo: one uniform sample per sub-square of an m×m grid.
fn jittered<F: FnMut(f64, f64)>(rng: &mut ChaCha8Rng, xa: f64, ya: f64, h: f64, m: usize, mut f: F) {
    let s = h / m as f64;
    for a in 0..m {
        for b in 0..m {
            let x = xa + (a as f64 + rng.gen::<f64>()) * s;
            let y = ya + (b as f64 + rng.gen::<f64>()) * s;
            f(x, y);
        }
    }
}

#[test]
fn alphas_match_monte_carlo() {
    let g = build_ramp_geometry(16, 30.0, 0.146).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let m = 3163; // about 1e7 samples per cell
    let mut checked = 0;
    for k in 0..16 * 16 {
        let c = &g.cells[g.ext_of_phys(k)];
        if c.class != CellClass::Cut {
            continue;
        }
        let (xa, ya) = cell_origin(&g, k);
        let mut hits = 0usize;
        jittered(&mut rng, xa, ya, g.h, m, |x, y| {
            if y >= g.line_y(x) {
                hits += 1;
            }
        });
        let mc = hits as f64 / (m * m) as f64;
        assert!((mc - c.alpha).abs() < 3e-4, "cell {k}: {mc} vs {}", c.alpha);
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn gaussian_average_on_cut_cell_matches_monte_carlo() {
    let sol = Exact2d::gaussian(1.0, 1.0, 120.0, (0.49, 0.2), (0.0, 0.0));
    let g = build_ramp_geometry(64, 30.0, 0.146).unwrap();
    // the cut cell closest to the bump
    let k = (0..64 * 64)
        .filter(|&k| g.cells[g.ext_of_phys(k)].class == CellClass::Cut)
        .min_by(|&a, &b| {
            let d = |k: usize| {
                let c = g.cells[g.ext_of_phys(k)].centroid;
                (c.0 - 0.49).powi(2) + (c.1 - 0.2).powi(2)
            };
            d(a).total_cmp(&d(b))
        })
        .unwrap();
    let exact = exact_average_ext(&sol, &g, g.ext_of_phys(k), 0.0).unwrap();
    let (xa, ya) = cell_origin(&g, k);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut sum, mut cnt) = (0.0, 0usize);
    jittered(&mut rng, xa, ya, g.h, 3163, |x, y| {
        if y >= g.line_y(x) {
            sum += sol.value(0.0, x, y);
            cnt += 1;
        }
    });
    let mc = sum / cnt as f64;
    assert!((mc - exact).abs() < 3e-4, "{mc} vs {exact}");
}

#[test]
fn total_area_and_edge_invariants() {
    for angle in [1.0, 10.0, 27.5, 30.0, 45.0] {
        for x0 in [-0.2, 0.0, 0.146, 0.5] {
            let g = build_ramp_geometry(48, angle, x0).unwrap();
            let area: f64 = (0..48 * 48).map(|k| g.cells[g.ext_of_phys(k)].alpha * g.h * g.h).sum();
            assert!((area - g.exact_fluid_area()).abs() < 1e-12, "angle {angle} x0 {x0}");
            let m = g.m();
            for jj in 0..m {
                for ii in 0..m {
                    let k = g.ext(ii, jj);
                    let a = g.cells[k].alpha;
                    for (nb, e) in [(ii + 1 < m).then(|| g.ext(ii + 1, jj)).map(|n| (n, &g.xedges[k])), (jj + 1 < m).then(|| g.ext(ii, jj + 1)).map(|n| (n, &g.yedges[k]))].into_iter().flatten() {
                        let b = g.cells[nb].alpha;
                        assert!((0.0..=1.0).contains(&e.beta));
                        if a == 1.0 && b == 1.0 {
                            assert_eq!(e.beta, 1.0);
                        }
                        if a == 0.0 && b == 0.0 {
                            assert_eq!(e.beta, 0.0);
                        }
                    }
                    let c = &g.cells[k];
                    if c.alpha > 0.0 {
                        assert!(c.centroid.1 >= g.line_y(c.centroid.0) - 1e-14, "centroid below the wall");
                    }
                }
            }
        }
    }
}

#[test]
fn fake_geometry_is_cartesian() {
    let g = build_fake_cut_geometry(40, 30.0, 0.146).unwrap();
    assert!(g.cells.iter().all(|c| c.alpha == 1.0));
    assert!(g.xedges.iter().chain(&g.yedges).all(|e| e.beta == 1.0));
    for k in 0..40 * 40 {
        let c = &g.cells[g.ext_of_phys(k)];
        let (xa, ya) = cell_origin(&g, k);
        let (lo, hi) = (g.line_y(xa), g.line_y(xa + g.h));
        let crossed = lo.min(hi) < ya + g.h && lo.max(hi) > ya;
        assert_eq!(c.class == CellClass::FakeCut, crossed, "cell {k}");
        if !crossed && ya + g.h <= lo.min(hi) {
            assert_eq!(c.class, CellClass::ImplicitFull);
        }
    }
}

#[test]
fn classification_is_deterministic() {
    let spec = cutcell::config::SchemeSpec::mixed(cutcell::config::ExplicitScheme::Mprkc);
    let a = cutcell::geometry2d::classify_cells_2d(&build_ramp_geometry(32, 30.0, 0.146).unwrap(), &spec);
    let b = cutcell::geometry2d::classify_cells_2d(&build_ramp_geometry(32, 30.0, 0.146).unwrap(), &spec);
    assert_eq!(a.roles, b.roles);
    assert_eq!(a.to_csv(), b.to_csv());
}
