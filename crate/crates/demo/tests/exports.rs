use cutcell_demo::{amplification, profile_1d, ramp_alphas};

#[test]
fn mixed_profile_tracks_exact_solution_on_tiny_cell() {
    for scheme in ["muscl", "musclmod", "mprkc"] {
        let p = profile_1d(scheme, true, 100, 1e-4, 0.9, 1.0).unwrap();
        assert_eq!(p.len(), 3 * 101, "full cells plus the cut cell");
        let worst = p.chunks(3).map(|c| (c[1] - c[2]).abs()).fold(0.0, f64::max);
        assert!(worst < 0.05, "{scheme}: {worst}");
    }
}

#[test]
fn zero_periods_returns_initial_data() {
    let p = profile_1d("muscl", true, 40, 0.3, 0.5, 0.0).unwrap();
    assert!(p.chunks(3).all(|c| c[1] == c[2]));
}

#[test]
fn ramp_alphas_cover_fluid_area() {
    let a = ramp_alphas(32, 30.0).unwrap();
    assert_eq!(a.len(), 32 * 32);
    assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(a.iter().any(|&v| v > 0.0 && v < 1.0));
}

#[test]
fn amplification_stays_bounded() {
    let g = amplification("mprkc", &[0.25, 0.5, 1.0]).unwrap();
    assert!(g.iter().all(|&v| v <= 1.0 + 1e-10));
}

#[test]
fn bad_arguments_are_errors() {
    assert!(profile_1d("nope", true, 40, 0.5, 0.5, 1.0).is_err());
    assert!(profile_1d("muscl", true, 0, 0.5, 0.5, 1.0).is_err());
    assert!(profile_1d("muscl", true, 40, 0.5, 0.001, 1000.0).is_err());
    assert!(ramp_alphas(10_000, 30.0).is_err());
}
