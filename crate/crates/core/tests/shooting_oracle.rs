mod common;

use common::Shooting;
use critnls::grids::{make_radial_grid, Spacing};
use critnls::problem::validate_params;
use critnls::solve::{ground_state_sp, SolverOpts};

#[test]
fn shooting_oracle_is_self_consistent() {
    let sh = Shooting::solve();
    assert!((sh.beta - 4.3374).abs() < 1e-3, "beta = {}", sh.beta);
    // Nehari identity ‖W‖² = ∫W⁴ makes both expressions agree.
    let (a, b) = (sh.sobolev_constant(), sh.nehari_mass_root());
    assert!((a - b).abs() < 1e-4 * a, "{a} vs {b}");
}

#[test]
fn sp_matches_shooting() {
    let params = validate_params(3, 1.0, 1.0, 0.5, 1.0).unwrap();
    assert_eq!(params.p, 4.0);
    let grid = make_radial_grid(3, 1e-3, 40.0, 4000, Spacing::Uniform).unwrap();
    let rep = ground_state_sp(&params, &grid, &SolverOpts::default()).unwrap();
    let oracle = Shooting::solve().sobolev_constant();
    assert!((rep.value - oracle).abs() < 5e-3 * oracle, "{} vs {oracle}", rep.value);
    // The discrete minimizer tracks the shooting profile once both are normalized.
    let sh = Shooting::solve();
    let scale = sh.nehari_mass_root().powf(-0.5);
    for r in [0.5, 1.0, 2.0, 4.0] {
        let i = sh.r.partition_point(|&x| x < r);
        let w = sh.w[i] * scale;
        let u = rep.minimizer.grid.interpolate(&rep.minimizer.vals, r);
        assert!((u - w).abs() < 1e-2 * sh.w[0] * scale, "r = {r}: {u} vs {w}");
    }
}
