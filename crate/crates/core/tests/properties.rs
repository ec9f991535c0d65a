use cutcell::analysis::amplification_scan;
use cutcell::analysis::exact::{Exact1d, Exact2d};
use cutcell::config::{ExplicitScheme, ImplicitScheme, Limiter, SchemeSpec, SlopeMethod};
use cutcell::geometry2d::{build_fake_cut_geometry, build_ramp_geometry};
use cutcell::mesh1d::{build_block_mesh, build_single_cut_mesh, Mesh1D};
use cutcell::schemes1d::{time_step_1d, Stepper1d};
use cutcell::schemes2d::{time_step_2d, Stepper2d};
use cutcell::analysis::{exact_averages_ext, exact_cell_averages_1d};
use proptest::prelude::*;

const SCHEMES: [ExplicitScheme; 3] = [ExplicitScheme::Muscl, ExplicitScheme::MusclMod, ExplicitScheme::Mprkc];
const ALPHAS: [f64; 4] = [1e-6, 1e-3, 0.5, 1.0];

fn meshes(alpha: f64) -> Vec<Mesh1D> {
    vec![build_single_cut_mesh(40, alpha, 1.0 / 40.0).unwrap(), build_block_mesh(12, 3, alpha, 1.0 / 36.0).unwrap()]
}

/// With forward slopes every coefficient of the cut-cell row is O(α), so rounding in that
/// row scales like ε/α.
fn tol_1d(alpha: f64) -> f64 {
    1e-13 + 1e-15 / alpha
}

fn total(m: &Mesh1D, s: &[f64]) -> f64 {
    s.iter().zip(&m.lengths).map(|(a, l)| a * l).sum()
}

fn bumpy(m: &Mesh1D) -> Vec<f64> {
    m.centers.iter().map(|&x| 1.0 + (6.0 * x).sin() + 0.3 * (17.0 * x).cos()).collect()
}

/// Mixed variants for every α; fully explicit ones only where the cut cell is not small.
fn variants(alpha: f64) -> Vec<SchemeSpec> {
    let mut v = Vec::new();
    for e in SCHEMES {
        for imp in [ImplicitScheme::Trapezoidal, ImplicitScheme::ImplicitEulerPcw] {
            for sl in [SlopeMethod::Central, SlopeMethod::Forward, SlopeMethod::LeastSquares] {
                v.push(SchemeSpec::mixed(e).with_implicit(imp).with_slopes(sl));
            }
        }
        if alpha >= 0.5 {
            v.push(SchemeSpec::explicit_only(e));
        }
    }
    v
}

#[test]
fn conservation_periodic_1d() {
    for alpha in ALPHAS {
        for m in meshes(alpha) {
            for spec in variants(alpha) {
                for u in [1.0, -0.7] {
                    let spec = spec.clone().with_velocity(u, 0.0);
                    let dt = time_step_1d(&spec, m.h).unwrap();
                    let mut st = Stepper1d::new(&m, &spec, dt, None).unwrap();
                    let mut s = bumpy(&m);
                    let m0 = total(&m, &s);
                    for k in 0..5 {
                        s = st.step(&s, k as f64 * dt).unwrap();
                    }
                    let rel = (total(&m, &s) - m0).abs() / m0.abs();
                    assert!(rel < 1e-12, "{} alpha={alpha} u={u}: {rel:e}", spec.label());
                }
            }
        }
    }
}

#[test]
fn free_stream_1d() {
    for alpha in ALPHAS {
        for m in meshes(alpha) {
            for spec in variants(alpha) {
                let dt = time_step_1d(&spec, m.h).unwrap();
                let mut st = Stepper1d::new(&m, &spec, dt, None).unwrap();
                let mut s = vec![2.5; m.n()];
                for k in 0..3 {
                    s = st.step(&s, k as f64 * dt).unwrap();
                }
                let worst = s.iter().map(|v| (v - 2.5).abs()).fold(0.0, f64::max);
                assert!(worst < tol_1d(alpha), "{spec:?} alpha={alpha}: {worst:e}");
            }
        }
    }
}

/// Velocity parallel to the ramp wall, so that translated data solve the wall problem.
fn wall_velocity(angle: f64) -> (f64, f64) {
    (1.0, angle.to_radians().tan())
}

#[test]
fn free_stream_2d() {
    for angle in [10.0, 30.0, 45.0] {
        let vel = wall_velocity(angle);
        let sol = Exact2d::affine(1.7, (0.0, 0.0), vel);
        let geoms = [build_ramp_geometry(24, angle, 0.21).unwrap(), build_fake_cut_geometry(24, angle, 0.21).unwrap()];
        for g in &geoms {
            for e in SCHEMES {
                for sl in [SlopeMethod::LeastSquares, SlopeMethod::Analytic] {
                    let spec = SchemeSpec::mixed(e).with_velocity(vel.0, vel.1).with_slopes(sl);
                    let dt = time_step_2d(&spec, g.h).unwrap();
                    let mut st = Stepper2d::new(g, &spec, dt, sol.clone()).unwrap();
                    let mut s = exact_averages_ext(&sol, st.geom(), 0.0).unwrap();
                    for k in 0..3 {
                        s = st.step(&s, k as f64 * dt).unwrap();
                    }
                    let g2 = st.geom();
                    let worst = st
                        .physical(&s)
                        .iter()
                        .enumerate()
                        .filter(|&(k, _)| g2.cells[g2.ext_of_phys(k)].alpha > 0.0)
                        .map(|(_, v)| (v - 1.7).abs())
                        .fold(0.0, f64::max);
                    assert!(worst < 1e-12, "{} angle={angle} fake={}: {worst:e}", spec.label(), g.fake);
                }
            }
        }
    }
}

#[test]
fn affine_exact_1d() {
    // linear data is only affine away from the periodic wrap
    let sol = Exact1d::affine(0.8, -0.3, 1.0);
    for alpha in ALPHAS {
        let m = build_single_cut_mesh(40, alpha, 1.0 / 40.0).unwrap();
        for spec in variants(alpha).into_iter().chain([SchemeSpec::mixed(ExplicitScheme::Mprkc).with_slopes(SlopeMethod::Analytic)]) {
            if spec.implicit == ImplicitScheme::ImplicitEulerPcw {
                continue;
            }
            let dt = time_step_1d(&spec, m.h).unwrap();
            let mut st = Stepper1d::new(&m, &spec, dt, Some(sol.clone())).unwrap();
            let s0 = exact_cell_averages_1d(&sol, &m, 0.0).unwrap();
            let s1 = exact_cell_averages_1d(&sol, &m, dt).unwrap();
            let out = st.step(s0.values(), 0.0).unwrap();
            for i in 8..m.n() - 8 {
                let e = (out[i] - s1.values()[i]).abs();
                assert!(e < tol_1d(alpha), "{spec:?} alpha={alpha} cell {i}: {e:e}");
            }
        }
    }
}

#[test]
fn affine_exact_2d() {
    let ramp = wall_velocity(30.0);
    let cases = [
        (build_ramp_geometry(24, 30.0, 0.2).unwrap(), ramp),
        (build_ramp_geometry(32, 30.0, 0.146).unwrap(), (2.0 * ramp.0, 2.0 * ramp.1)),
        (build_fake_cut_geometry(24, 20.0, 0.2).unwrap(), (1.0, 0.5)),
        (build_fake_cut_geometry(24, 30.0, 0.2).unwrap(), (0.3, 1.0)),
    ];
    for (g, (u, v)) in cases {
        let sol = Exact2d::affine(1.0, (0.7, -1.3), (u, v));
        {
            for e in SCHEMES {
                for sl in [SlopeMethod::LeastSquares, SlopeMethod::Analytic] {
                    let spec = SchemeSpec::mixed(e).with_velocity(u, v).with_slopes(sl);
                    let dt = time_step_2d(&spec, g.h).unwrap();
                    let mut st = Stepper2d::new(&g, &spec, dt, sol.clone()).unwrap();
                    let s0 = exact_averages_ext(&sol, st.geom(), 0.0).unwrap();
                    let s1 = exact_averages_ext(&sol, st.geom(), dt).unwrap();
                    let out = st.step(&s0, 0.0).unwrap();
                    let worst = st.physical(&out).iter().zip(st.physical(&s1)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    assert!(worst < 1e-12, "{} fake={} vel=({u},{v}): {worst:e}", spec.label(), g.fake);
                }
            }
        }
    }
}

fn total_variation(s: &[f64]) -> f64 {
    (0..s.len()).map(|i| (s[(i + 1) % s.len()] - s[i]).abs()).sum()
}

#[test]
fn tvd_muscl_minmod_with_implicit_euler() {
    let spec0 = SchemeSpec::mixed(ExplicitScheme::Muscl)
        .with_implicit(ImplicitScheme::ImplicitEulerPcw)
        .with_limiter(Limiter::Minmod);
    for alpha in ALPHAS {
        let m = build_single_cut_mesh(60, alpha, 1.0 / 60.0).unwrap();
        // one monotone rise and one monotone fall around the periodic domain
        let s0: Vec<f64> = m.centers.iter().map(|&x| if x < 0.3 { 0.0 } else if x < 0.6 { (x - 0.3) / 0.3 } else if x < 0.8 { 1.0 } else { 0.0 }).collect();
        for lambda in [0.2, 0.8, 1.0] {
            for u in [1.0, -1.0] {
                let spec = spec0.clone().with_cfl(lambda).with_velocity(u, 0.0);
                let dt = time_step_1d(&spec, m.h).unwrap();
                let mut st = Stepper1d::new(&m, &spec, dt, None).unwrap();
                let mut s = s0.clone();
                let mut tv = total_variation(&s);
                for k in 0..80 {
                    s = st.step(&s, k as f64 * dt).unwrap();
                    let next = total_variation(&s);
                    assert!(next <= tv + 1e-12, "alpha={alpha} lambda={lambda} u={u} step {k}: {tv} -> {next}");
                    tv = next;
                }
            }
        }
    }
}

#[test]
fn amplification_bounded_for_cfl_up_to_one() {
    let lambdas: Vec<f64> = (1..=20).map(|k| k as f64 * 0.05).collect();
    for e in SCHEMES {
        let g = amplification_scan(&SchemeSpec::explicit_only(e), &lambdas).unwrap();
        for (l, gmax) in lambdas.iter().zip(&g) {
            assert!(*gmax <= 1.0 + 1e-10, "{e:?} lambda={l}: |G|={gmax}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conservation_random_data(
        alpha in 1e-6f64..=1.0,
        lambda in 0.05f64..=1.0,
        scheme in 0usize..3,
        seed in proptest::collection::vec(-1.0f64..1.0, 31),
    ) {
        let m = build_single_cut_mesh(30, alpha, 1.0 / 30.0).unwrap();
        let spec = SchemeSpec::mixed(SCHEMES[scheme]).with_cfl(lambda);
        let dt = time_step_1d(&spec, m.h).unwrap();
        let mut st = Stepper1d::new(&m, &spec, dt, None).unwrap();
        let s = st.step(&seed, 0.0).unwrap();
        let scale: f64 = seed.iter().zip(&m.lengths).map(|(a, l)| a.abs() * l).sum();
        prop_assert!((total(&m, &s) - total(&m, &seed)).abs() <= 1e-12 * scale.max(1e-300));
    }

    #[test]
    fn shifted_constant_is_preserved(c in -5.0f64..5.0, alpha in 1e-6f64..=1.0) {
        let m = build_block_mesh(8, 2, alpha, 1.0 / 16.0).unwrap();
        let spec = SchemeSpec::mixed(ExplicitScheme::MusclMod);
        let dt = time_step_1d(&spec, m.h).unwrap();
        let mut st = Stepper1d::new(&m, &spec, dt, None).unwrap();
        let s = st.step(&vec![c; m.n()], 0.0).unwrap();
        prop_assert!(s.iter().all(|v| (v - c).abs() <= 1e-13 * (1.0 + c.abs())));
    }
}
