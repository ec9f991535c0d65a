use cutcell::analysis::exact::{Exact1d, Exact2d};
use cutcell::analysis::{one_step_error_1d, transition_error_2d_check, OneStepMode, Reference};
use cutcell::config::{ExplicitScheme, SchemeSpec, SlopeMethod};
use cutcell::mesh1d::{build_block_mesh, build_single_cut_mesh};
use cutcell::norms::norms;

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse.abs() / fine.abs()).log2()
}

fn muscl_trap() -> SchemeSpec {
    SchemeSpec::mixed(ExplicitScheme::Muscl)
}

#[test]
fn transition_error_vanishes_for_affine_data() {
    let s = Exact2d::affine(1.0, (0.3, -0.2), (1.0, 1.0));
    for n in [32, 64] {
        let (lhs, pred) = transition_error_2d_check(&s, &muscl_trap(), n, (0.5, 0.5)).unwrap();
        assert!(lhs.abs() <= 1e-13 && pred == 0.0, "{lhs:e}");
    }
}

#[test]
fn transition_error_formula_is_exact_for_quadratics() {
    // no third derivatives, so the predicted term is the whole error
    let s = Exact2d::quadratic(1.0, (0.3, -0.2), (2.0, 0.7, -1.0), (1.0, 1.0));
    for n in [32, 64, 128] {
        let (lhs, pred) = transition_error_2d_check(&s, &muscl_trap(), n, (0.5, 0.5)).unwrap();
        assert!((lhs - pred).abs() <= 1e-9 * pred.abs(), "n={n}: {lhs:e} vs {pred:e}");
    }
    let iso = Exact2d::quadratic(1.0, (0.3, -0.2), (2.0, 0.7, 2.0), (1.0, 1.0));
    let (lhs, _) = transition_error_2d_check(&iso, &muscl_trap(), 64, (0.5, 0.5)).unwrap();
    assert!(lhs.abs() < 1e-13);
}

#[test]
fn transition_error_third_order_when_sxx_equals_syy() {
    // s_xx − s_yy vanishes where |x − 0.45| = |y − 0.55|, which includes (0.5, 0.5)
    let s = Exact2d::gaussian(1.0, 1.0, 20.0, (0.45, 0.55), (1.0, 1.0));
    let e: Vec<f64> = [32, 64, 128, 256]
        .iter()
        .map(|&n| transition_error_2d_check(&s, &muscl_trap(), n, (0.5, 0.5)).unwrap().0)
        .collect();
    for w in e.windows(2) {
        assert!(order(w[0], w[1]) > 2.8, "{e:?}");
    }
}

#[test]
fn transition_error_leading_term_by_richardson() {
    let s = Exact2d::gaussian(1.0, 1.0, 20.0, (0.4, 0.62), (1.0, 1.0));
    let near = (0.5, 0.5);
    let runs: Vec<(f64, f64)> =
        [64, 128, 256, 512].iter().map(|&n| transition_error_2d_check(&s, &muscl_trap(), n, near).unwrap()).collect();
    // what remains after removing the predicted term is third order
    let resid: Vec<f64> = runs.iter().map(|(l, p)| l - p).collect();
    for w in resid.windows(2) {
        assert!(order(w[0], w[1]) > 2.7, "{resid:?}");
    }
    // lhs = a h² + b h³ ⇒ 8·lhs(h/2) − lhs(h) = a h²
    let (l256, p256) = runs[2];
    let lead = 8.0 * runs[3].0 - l256;
    assert!((lead - p256).abs() < 0.2 * p256.abs(), "{lead:e} vs {p256:e}");
}

fn sine_test1(len: f64) -> Exact1d {
    Exact1d::sine(len, 0.36, 1.0)
}

#[test]
fn forward_slope_transition_errors_have_opposite_leading_terms() {
    let spec = muscl_trap().with_slopes(SlopeMethod::Forward);
    for alpha in [0.3, 1.0] {
        let mut gaps = Vec::new();
        for n in [160, 320, 640] {
            let m = build_single_cut_mesh(n, alpha, 1.0 / n as f64).unwrap();
            let sol = sine_test1(m.domain_length());
            let e = one_step_error_1d(&spec, &m, &sol, 0.0, OneStepMode::Substituted, Reference::Exact).unwrap();
            let c = m.cut_cells[0];
            let (lm, lp) = (e.values()[c - 1], e.values()[c + 1]);
            let want = -sol.dxx(0.0, m.centers[c - 1]) / sol.dxx(0.0, m.centers[c + 1]);
            gaps.push((lm / lp - want).abs());
        }
        // the O(h³) remainders make the gap shrink like h
        assert!(gaps[2] < 0.05, "alpha={alpha}: {gaps:?}");
        assert!(order(gaps[0], gaps[1]) > 0.8 && order(gaps[1], gaps[2]) > 0.8, "alpha={alpha}: {gaps:?}");
    }
}

#[test]
fn transition_errors_cancel_at_alpha_one() {
    let mut sums = Vec::new();
    let mut single = Vec::new();
    for n in [160, 320, 640] {
        let m = build_single_cut_mesh(n, 1.0, 1.0 / n as f64).unwrap();
        let sol = sine_test1(m.domain_length());
        let e = one_step_error_1d(&muscl_trap(), &m, &sol, 0.0, OneStepMode::Substituted, Reference::Exact).unwrap();
        let c = m.cut_cells[0];
        sums.push(e.values()[c - 1] + e.values()[c + 1]);
        single.push(e.values()[c - 1]);
    }
    assert!(order(single[1], single[2]) < 2.3, "{single:?}");
    assert!(order(sums[0], sums[1]) > 2.7 && order(sums[1], sums[2]) > 2.7, "{sums:?}");
}

#[test]
fn forward_slope_cut_cell_error_is_third_order() {
    let spec = muscl_trap().with_slopes(SlopeMethod::Forward);
    let mut e0 = Vec::new();
    for l in [4, 8, 16] {
        let h = 1.0 / (40.0 * l as f64);
        let m = build_block_mesh(40, l, 1e-4, h).unwrap();
        let sol = sine_test1(m.domain_length());
        let e = one_step_error_1d(&spec, &m, &sol, 0.0, OneStepMode::Substituted, Reference::Exact).unwrap();
        e0.push(m.cut_cells.iter().map(|&c| e.values()[c].abs()).fold(0.0, f64::max));
    }
    assert!(order(e0[0], e0[1]) > 2.7 && order(e0[1], e0[2]) > 2.7, "{e0:?}");
}

#[test]
fn explicit_one_step_error_is_third_order() {
    for e in [ExplicitScheme::Muscl, ExplicitScheme::MusclMod, ExplicitScheme::Mprkc] {
        let spec = SchemeSpec::explicit_only(e);
        let mut linf = Vec::new();
        for n in [80, 160, 320, 640] {
            let h = 1.0 / n as f64;
            let m = build_single_cut_mesh(n - 1, 1.0, h).unwrap();
            let sol = Exact1d::sine(1.0, 0.36, 1.0);
            let err = one_step_error_1d(&spec, &m, &sol, 0.0, OneStepMode::Solved, Reference::Exact).unwrap();
            linf.push(norms(&err, &m).unwrap().1);
        }
        for w in linf.windows(2) {
            assert!(order(w[0], w[1]) >= 2.8, "{e:?}: {linf:?}");
        }
    }
}
