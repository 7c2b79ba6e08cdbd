use critnls::grids::{make_radial_grid, Spacing};
use critnls::problem::{model_potentials, validate_params};
use critnls::solve::{minimize_quotient, nehari_minimize, SolverOpts};
use critnls::energy::RadialForm;

fn nehari_value(m: usize, r_max: f64) -> f64 {
    let params = validate_params(3, 1.0, 1.0, 0.5, 1.0).unwrap();
    let pot = model_potentials(&params);
    let grid = make_radial_grid(3, 1e-3, r_max, m, Spacing::Uniform).unwrap();
    nehari_minimize(&params, &pot, &grid, &SolverOpts::default()).unwrap().value
}

#[test]
fn nehari_quotient_is_mesh_stable() {
    let base = nehari_value(4000, 40.0);
    let doubled = nehari_value(8000, 40.0);
    let wider = nehari_value(6000, 60.0);
    assert!((doubled - base).abs() < 1e-2 * base, "{base} vs {doubled}");
    assert!((wider - base).abs() < 1e-2 * base, "{base} vs {wider}");
}

#[test]
fn perturbed_starts_reach_the_same_minimum() {
    let params = validate_params(3, 1.0, 1.0, 0.5, 1.0).unwrap();
    let pot = model_potentials(&params);
    let grid = make_radial_grid(3, 1e-3, 40.0, 2000, Spacing::Uniform).unwrap();
    let form = RadialForm::transformed(&params, &pot, &grid).unwrap();
    let base = nehari_minimize(&params, &pot, &grid, &SolverOpts::default()).unwrap().value;
    for seed in [1, 2, 3] {
        let opts = SolverOpts { seed, perturbation: 0.2, ..SolverOpts::default() };
        let init = critnls::solve::initial_guess(&grid, &opts);
        let rep = minimize_quotient(&form, &init, &opts).unwrap();
        assert!((rep.value - base).abs() < 1e-8 * base, "seed {seed}: {} vs {base}", rep.value);
        assert!(rep.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }
}

#[test]
fn negative_b_on_graded_grid() {
    let params = validate_params(3, 1.0, -1.0, -0.5, 1.0).unwrap();
    let pot = model_potentials(&params);
    let graded = make_radial_grid(3, 1e-3, 40.0, 4000, Spacing::Graded).unwrap();
    let uniform = make_radial_grid(3, 1e-3, 40.0, 4000, Spacing::Uniform).unwrap();
    let opts = SolverOpts::default();
    let a = nehari_minimize(&params, &pot, &graded, &opts).unwrap();
    let b = nehari_minimize(&params, &pot, &uniform, &opts).unwrap();
    assert!((a.value - b.value).abs() < 1e-2 * b.value, "{} vs {}", a.value, b.value);
    let mp = critnls::solve::mountain_pass_path(&params, &pot, &graded, &opts).unwrap();
    assert!((mp.level - a.level).abs() < 1e-2 * a.level);
}
