//! Executable audit of the identities and inequalities behind the theory.
//!
//! Every check returns a [`CheckRecord`]; [`run_suite`] strings them together
//! with fixed seeds so that repeated runs are byte-identical.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{norm_theta_sq, RadialForm};
use crate::error::{Error, Result};
use crate::geometry::{
    laplacian_identity_residual, radial_jacobian, AnalyticField, RadialAnalytic, RadialProfile,
    ShiftedGaussian, TransformSpec,
};
use crate::grids::{
    gradient_tensor, make_radial_grid, make_tensor_grid, radial_derivative, RadialField,
    RadialGrid, Spacing, TensorField, TensorGrid,
};
use crate::output::fmt_sig;
use crate::problem::{k_star, v_star, PotentialPair, ProblemParams};
use crate::solve::{
    ground_state_sp, mountain_pass_path, nehari_minimize, SolverOpts,
};

/// Seed of every random probe set.
pub const PROBE_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub anchor: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub details: String,
}

impl CheckRecord {
    fn new(
        name: &str,
        anchor: &str,
        measured: f64,
        target: f64,
        tolerance: f64,
        passed: bool,
        details: String,
    ) -> Self {
        CheckRecord {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            target,
            tolerance,
            passed: passed && measured.is_finite(),
            details,
        }
    }
}

pub fn records_to_csv(records: &[CheckRecord], digits: usize) -> String {
    let mut out = String::from("name,anchor,measured,target,tolerance,passed\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.name,
            r.anchor,
            fmt_sig(r.measured, digits),
            fmt_sig(r.target, digits),
            fmt_sig(r.tolerance, digits),
            r.passed
        );
    }
    out
}

// ---------------------------------------------------------------- Hardy

/// Discrete `ω∫v'² r^{N-1}` and `((N-2)²/4) ω∫v² r^{N-3}`.
pub fn hardy_sides(field: &RadialField) -> (f64, f64) {
    let grid = &field.grid;
    let form = RadialForm::new(
        Arc::clone(grid),
        1.0,
        vec![0.0; grid.len()],
        vec![0.0; grid.len()],
        2.0,
    )
    .expect("zero coefficients are finite");
    let lhs = form.dirichlet(&field.vals);
    let n = grid.dim() as f64;
    let rhs = (n - 2.0).powi(2) / 4.0
        * grid
            .radii()
            .iter()
            .zip(grid.weights())
            .zip(&field.vals)
            .map(|((r, w), v)| w * v * v / (r * r))
            .sum::<f64>();
    (lhs, rhs)
}

/// Directional Hardy inequality on radial fields; fields must vanish at `r_max`.
pub fn hardy_check(grid: &Arc<RadialGrid>, fields: &[RadialField]) -> CheckRecord {
    let mut worst = f64::INFINITY;
    let mut worst_ratio = f64::INFINITY;
    for f in fields {
        let (lhs, rhs) = hardy_sides(f);
        let margin = if lhs > 0.0 { (lhs - rhs) / lhs } else { lhs - rhs };
        worst = worst.min(margin);
        if rhs > 0.0 {
            worst_ratio = worst_ratio.min(lhs / rhs);
        }
    }
    if fields.is_empty() {
        worst = 0.0;
    }
    CheckRecord::new(
        "hardy_inequality",
        "directional-hardy-inequality",
        worst,
        0.0,
        1e-8,
        worst >= -1e-8,
        format!("{} fields on {} nodes, smallest ratio {worst_ratio:.6}", fields.len(), grid.len()),
    )
}

/// `r^{-(N-2)/2} e^{-ε|ln r|}` times a smooth cutoff in `ln r`, on a geometric
/// grid over `[e^{-70}, e^{70}]`. Its Hardy ratio tends to 1 as `ε → 0`.
pub fn near_extremal_probe(dim: usize, eps: f64, nodes: usize) -> Result<RadialField> {
    let span = 70.0f64;
    let grid = make_radial_grid(dim, (-span).exp(), span.exp(), nodes, Spacing::Graded)?;
    let half = (dim as f64 - 2.0) / 2.0;
    let (flat, edge) = (50.0, 68.0);
    Ok(grid.sample(|r| {
        let t = r.ln();
        let a = t.abs();
        let cut = if a <= flat {
            1.0
        } else if a >= edge {
            0.0
        } else {
            let s = (edge - a) / (edge - flat);
            s * s * (3.0 - 2.0 * s)
        };
        r.powf(-half) * (-eps * a).exp() * cut
    }))
}

pub fn hardy_near_extremal_check(dim: usize) -> Result<CheckRecord> {
    let probe = near_extremal_probe(dim, 0.05, 40_000)?;
    let (lhs, rhs) = hardy_sides(&probe);
    let ratio = lhs / rhs;
    Ok(CheckRecord::new(
        "hardy_near_extremal",
        "directional-hardy-inequality",
        ratio,
        1.3,
        0.0,
        ratio > 1.0 && ratio < 1.3,
        "eps = 0.05, expected about 1 + 4 eps^2 = 1.01".to_string(),
    ))
}

/// Probe set: Gaussians, annulus bumps and seeded random piecewise-linear
/// fields, all vanishing at the outer radius.
pub fn probe_fields(grid: &Arc<RadialGrid>, count: usize, seed: u64) -> Vec<RadialField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outer = grid.r_max().min(30.0);
    let cutoff = |r: f64| if r >= outer { 0.0 } else { 1.0 - (r / outer).powi(8) };
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let field = match k % 5 {
            0 => {
                let c = 0.05 * 100f64.powf(rng.gen_range(0.0..1.0));
                grid.sample(|r| (-c * r * r).exp() * cutoff(r))
            }
            1 => {
                let centre: f64 = rng.gen_range(1.0..20.0);
                let width = rng.gen_range(0.2..0.9) * centre.min(5.0);
                let bump = RadialProfile::Bump { center: centre, half_width: width };
                grid.sample(|r| bump.eval(r)[0])
            }
            _ => {
                let knots = rng.gen_range(4..12);
                let mut xs: Vec<f64> = (0..knots).map(|_| rng.gen_range(grid.r_min()..outer)).collect();
                xs.sort_by(f64::total_cmp);
                let mut ys: Vec<f64> = (0..knots).map(|_| rng.gen_range(-1.0..1.0)).collect();
                xs.push(outer);
                ys.push(0.0);
                grid.sample(|r| piecewise_linear(&xs, &ys, r))
            }
        };
        out.push(field);
    }
    out
}

fn piecewise_linear(xs: &[f64], ys: &[f64], r: f64) -> f64 {
    if r <= xs[0] {
        return ys[0];
    }
    if r >= xs[xs.len() - 1] {
        return 0.0;
    }
    let i = xs.partition_point(|&x| x <= r) - 1;
    let t = (r - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + t * (ys[i + 1] - ys[i])
}

/// Extremes of `‖u‖²_A / (∫|∇u|² + ∫u²)` over `fields`.
pub fn norm_equivalence_bounds(
    params: &ProblemParams,
    pot: &PotentialPair,
    fields: &[RadialField],
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for f in fields {
        let form = RadialForm::transformed(params, pot, &f.grid)?;
        let plain = RadialForm::isotropic(&f.grid, 1.0, params.p)?;
        let ratio = form.norm_sq(&f.vals) / plain.norm_sq(&f.vals);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}

// ------------------------------------------------------- quadratic form

/// `Σ A_ij ∂_i u ∂_j u` by explicit double loop against
/// `|∇u|² + κ (x·∇u)²/|x|²`, both on the same tensor nodes.
pub fn quadratic_form_identity_check(params: &ProblemParams, u: &TensorField) -> Result<CheckRecord> {
    u.check_finite()?;
    let g = gradient_tensor(u)?;
    let kappa = params.kappa;
    let mut full = 0.0;
    let mut dirichlet = 0.0;
    let mut radial = 0.0;
    for idx in 0..u.vals.len() {
        let x = u.grid.point(idx);
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        let grad = [g[0].vals[idx], g[1].vals[idx], g[2].vals[idx]];
        for i in 0..3 {
            for j in 0..3 {
                let delta = if i == j { 1.0 } else { 0.0 };
                full += (delta + kappa * x[i] * x[j] / r2) * grad[i] * grad[j];
            }
        }
        dirichlet += grad.iter().map(|v| v * v).sum::<f64>();
        let xg = x[0] * grad[0] + x[1] * grad[1] + x[2] * grad[2];
        radial += xg * xg / r2;
    }
    let dv = u.grid.cell_volume();
    let lhs = full * dv;
    let rhs = (dirichlet + kappa * radial) * dv;
    let scale = lhs.abs().max(rhs.abs());
    let rel = if scale > 0.0 { (lhs - rhs).abs() / scale } else { 0.0 };
    Ok(CheckRecord::new(
        "quadratic_form_identity",
        "anisotropic-quadratic-form",
        rel,
        0.0,
        1e-12,
        rel < 1e-12,
        format!("double loop {lhs:.12e}, split form {rhs:.12e}"),
    ))
}

/// Seeded smooth random field: a Gaussian envelope times a random trigonometric mix.
pub fn random_tensor_field(grid: &Arc<TensorGrid>, seed: u64) -> TensorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<[f64; 4]> = (0..6)
        .map(|_| {
            [
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            ]
        })
        .collect();
    let l = grid.half_width();
    grid.sample(|[x, y, z]| {
        let env = (-(x * x + y * y + z * z) / (0.2 * l * l)).exp();
        let osc: f64 = coeffs
            .iter()
            .map(|c| c[3] * (c[0] * x + c[1] * y + c[2] * z).sin())
            .sum();
        env * (1.0 + osc)
    })
}

// ------------------------------------------------------ transformation

/// Max residual at `h = 10^{-3}|x|` and the observed order between
/// `h = 10^{-2}|x|` and `h = 10^{-3}|x|`.
pub fn laplacian_identity_order(
    params: &ProblemParams,
    v: &dyn AnalyticField,
    samples: &[Vec<f64>],
) -> Result<(f64, f64)> {
    let spec = TransformSpec::from_params(params);
    let max = |rel: f64| -> Result<f64> {
        Ok(laplacian_identity_residual(&spec, params, v, samples, rel)?.into_iter().fold(0.0, f64::max))
    };
    let coarse = max(1e-2)?;
    let fine = max(1e-3)?;
    Ok((fine, (coarse / fine).log10()))
}

pub fn laplacian_identity_check(
    params: &ProblemParams,
    name: &str,
    v: &dyn AnalyticField,
    samples: &[Vec<f64>],
) -> Result<CheckRecord> {
    let (fine, slope) = laplacian_identity_order(params, v, samples)?;
    Ok(CheckRecord::new(
        &format!("laplacian_identity_{name}"),
        "transformed-laplacian-identity",
        fine,
        1e-4,
        1e-4,
        fine < 1e-4 && (1.8..=2.2).contains(&slope),
        format!("{} samples, order {slope:.4}", samples.len()),
    ))
}

/// `count` seeded points with `lo ≤ |x| ≤ hi`.
pub fn sample_shell(count: usize, lo: f64, hi: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let d: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 0.1 && n <= 1.0 {
                let r = rng.gen_range(lo..hi);
                break d.iter().map(|v| v * r / n).collect();
            }
        })
        .collect()
}

/// Both sides of `∫ f dx = ∫ f(x(y)) (2/(2-b))|y|^{bN/(2-b)} dy` for radial
/// `f` supported in `|x| ≤ extent`, on independent geometric grids.
pub fn measure_sides(params: &ProblemParams, f: &dyn Fn(f64) -> f64, extent: f64) -> Result<(f64, f64)> {
    let spec = TransformSpec::from_params(params);
    let nodes = 60_000;
    let x_grid = make_radial_grid(params.dim, extent * 1e-9, extent, nodes, Spacing::Graded)?;
    let lhs: f64 = x_grid.radii().iter().zip(x_grid.weights()).map(|(r, w)| w * f(*r)).sum();
    let rho_max = spec.forward_radius(extent);
    let y_grid = make_radial_grid(params.dim, rho_max * 1e-9, rho_max, nodes, Spacing::Graded)?;
    let rhs: f64 = y_grid
        .radii()
        .iter()
        .zip(y_grid.weights())
        .map(|(rho, w)| w * f(spec.inverse_radius(*rho)) * radial_jacobian(&spec, *rho))
        .sum();
    Ok((lhs, rhs))
}

pub fn measure_check(
    params: &ProblemParams,
    name: &str,
    integrand: &dyn AnalyticField,
    extent: f64,
) -> Result<CheckRecord> {
    let f = |r: f64| integrand.value(&[r, 0.0, 0.0]);
    let (lhs, rhs) = measure_sides(params, &f, extent)?;
    let rel = (lhs - rhs).abs() / lhs.abs().max(f64::MIN_POSITIVE);
    Ok(CheckRecord::new(
        &format!("measure_identity_{name}"),
        "change-of-variables-measure",
        rel,
        0.0,
        1e-5,
        rel < 1e-5,
        format!("x side {lhs:.10e}, y side {rhs:.10e}"),
    ))
}

// ----------------------------------------------------- theta invariance

/// `x ↦ Px` with `(Px)_{axes[k]} = signs[k] x_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedPermutation {
    pub axes: [usize; 3],
    pub signs: [f64; 3],
}

impl SignedPermutation {
    pub fn new(axes: [usize; 3], signs: [f64; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &a in &axes {
            if a > 2 || seen[a] {
                return Err(Error::BadPermutation(format!("axes {axes:?} are not a permutation")));
            }
            seen[a] = true;
        }
        if signs.iter().any(|s| *s != 1.0 && *s != -1.0) {
            return Err(Error::BadPermutation(format!("signs {signs:?} must be ±1")));
        }
        Ok(SignedPermutation { axes, signs })
    }

    pub fn identity() -> Self {
        SignedPermutation { axes: [0, 1, 2], signs: [1.0; 3] }
    }

    /// `Pᵀθ`, the direction that pairs with the relabelled field.
    pub fn pull_direction(&self, theta: &[f64]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for k in 0..3 {
            out[k] = self.signs[k] * theta[self.axes[k]];
        }
        out
    }

    /// `v(x) = u(Px)` on the same lattice.
    pub fn relabel(&self, u: &TensorField) -> TensorField {
        let g = &u.grid;
        let n = g.nodes_per_axis();
        let mut vals = vec![0.0; g.len()];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let c = [i, j, k];
                    let mut src = [0usize; 3];
                    for a in 0..3 {
                        let idx = c[a];
                        src[self.axes[a]] = if self.signs[a] > 0.0 { idx } else { n - 1 - idx };
                    }
                    vals[g.index(i, j, k)] = u.vals[g.index(src[0], src[1], src[2])];
                }
            }
        }
        TensorField { grid: Arc::clone(g), vals }
    }
}

/// `θ`-quotient `‖u‖²_θ / (∫|u|^p)^{2/p}` on a tensor grid.
pub fn theta_quotient(params: &ProblemParams, u: &TensorField, theta: &[f64]) -> Result<f64> {
    let e = norm_theta_sq(params, u, theta)?;
    let denom = u.integrate_map(|v| v.abs().powf(params.p));
    if !(denom > 0.0) {
        return Err(Error::ZeroDenominator("field vanishes on the tensor grid".into()));
    }
    Ok(e.total_norm_sq / denom.powf(2.0 / params.p))
}

pub fn theta_invariance_check(
    params: &ProblemParams,
    u: &TensorField,
    theta: &[f64],
    perm: &SignedPermutation,
) -> Result<CheckRecord> {
    SignedPermutation::new(perm.axes, perm.signs)?;
    let v = perm.relabel(u);
    let theta_v = perm.pull_direction(theta);
    let eu = norm_theta_sq(params, u, theta)?;
    let ev = norm_theta_sq(params, &v, &theta_v)?;
    let pu = u.integrate_map(|x| x.abs().powf(params.p));
    let pv = v.integrate_map(|x| x.abs().powf(params.p));
    let qu = theta_quotient(params, u, theta)?;
    let qv = theta_quotient(params, &v, &theta_v)?;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    let worst = rel(eu.total_norm_sq, ev.total_norm_sq).max(rel(pu, pv)).max(rel(qu, qv));
    Ok(CheckRecord::new(
        "theta_invariance",
        "direction-independence-of-limit-quotient",
        worst,
        0.0,
        1e-12,
        worst <= 1e-12,
        format!("axes {:?} signs {:?}, quotient {qu:.12e}", perm.axes, perm.signs),
    ))
}

// ---------------------------------------------------------- scaling law

/// `u(x) = w(|(x₁/(1-b/2), x₂, x₃)|)` sampled from a radial profile `w`.
pub fn stretched_field(params: &ProblemParams, w: &RadialField, tensor: &Arc<TensorGrid>) -> TensorField {
    let c = 1.0 - params.b / 2.0;
    let grid = &w.grid;
    let r0 = grid.r_min();
    let w0 = w.vals[0];
    tensor.sample(|[x, y, z]| {
        let r = ((x / c).powi(2) + y * y + z * z).sqrt();
        if r < r0 {
            w0
        } else {
            cubic_interpolate(grid, &w.vals, r)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingOutcome {
    pub s_p: f64,
    pub measured: f64,
    /// `h²`-Richardson combination of `measured` and a run at `3n/4` nodes.
    pub extrapolated: f64,
    pub target: f64,
}

pub fn scaling_law_outcome(
    params: &ProblemParams,
    grid: &Arc<RadialGrid>,
    tensor: &Arc<TensorGrid>,
    opts: &SolverOpts,
) -> Result<ScalingOutcome> {
    let rep = ground_state_sp(params, grid, opts)?;
    let u = stretched_field(params, &rep.minimizer, tensor);
    let theta = [1.0, 0.0, 0.0];
    let measured = theta_quotient(params, &u, &theta)?;
    let n = tensor.nodes_per_axis();
    let n_coarse = (3 * n / 8) * 2;
    let extrapolated = if n_coarse >= 4 && n_coarse < n {
        let coarse_grid = make_tensor_grid(3, tensor.half_width(), n_coarse)?;
        let coarse_field = stretched_field(params, &rep.minimizer, &coarse_grid);
        let coarse = theta_quotient(params, &coarse_field, &theta)?;
        let (hf, hc) = (tensor.spacing().powi(2), coarse_grid.spacing().powi(2));
        (measured * hc - coarse * hf) / (hc - hf)
    } else {
        measured
    };
    let p = params.p;
    let target = (1.0 - params.b / 2.0).powf((p - 2.0) / p) * rep.value;
    Ok(ScalingOutcome { s_p: rep.value, measured, extrapolated, target })
}

pub fn scaling_law_check(
    params: &ProblemParams,
    grid: &Arc<RadialGrid>,
    tensor: &Arc<TensorGrid>,
    opts: &SolverOpts,
) -> Result<CheckRecord> {
    let o = scaling_law_outcome(params, grid, tensor, opts)?;
    let rel = (o.measured - o.target).abs() / o.target;
    Ok(CheckRecord::new(
        "anisotropic_scaling_law",
        "anisotropic-scaling-law",
        o.measured,
        o.target,
        2e-2,
        rel < 2e-2,
        format!("b = {}, S_p = {:.10}, relative gap {rel:.3e}", params.b, o.s_p),
    ))
}

/// Four-point Lagrange interpolation of nodal values, zero outside the grid.
pub fn cubic_interpolate(grid: &RadialGrid, vals: &[f64], r: f64) -> f64 {
    let x = grid.radii();
    let n = x.len();
    if !(r >= x[0] && r <= x[n - 1]) {
        return 0.0;
    }
    let i = x.partition_point(|&v| v <= r).clamp(1, n - 1) - 1;
    let lo = i.saturating_sub(1).min(n - 4);
    let mut sum = 0.0;
    for a in lo..lo + 4 {
        let mut l = 1.0;
        for b in lo..lo + 4 {
            if a != b {
                l *= (r - x[b]) / (x[a] - x[b]);
            }
        }
        sum += l * vals[a];
    }
    sum
}

// ---------------------------------------------------- weak equivalence

#[derive(Debug, Clone, PartialEq)]
pub struct WeakResiduals {
    /// Residuals of the original weak form against each `φ`.
    pub original: Vec<f64>,
    /// Residuals of the transformed weak form against the matching `ψ`.
    pub transformed: Vec<f64>,
}

/// Weak residuals of a transformed field `v` and of `u = |x|^{-b(N-2)/4} v(y)`
/// against radial test profiles `φ` given in `x`. The transformed test
/// function is `ψ(y) = |x|^{b(N-2)/4} φ(x)`.
///
/// Both sides use central differences and trapezoid sums independent of the
/// solver's discrete weak form; `u` is built on its own `x`-grid by cubic
/// interpolation of `v`.
pub fn weak_residuals(
    params: &ProblemParams,
    pot: &PotentialPair,
    v: &RadialField,
    test_profiles: &[RadialProfile],
) -> Result<WeakResiduals> {
    let spec = TransformSpec::from_params(params);
    let alpha = spec.field_exponent();
    let p = params.p;
    let sigma = params.radial_stiffness();
    let vgrid = &v.grid;
    let dv = radial_derivative(v)?;
    let rho = vgrid.radii();

    let mut transformed = Vec::with_capacity(test_profiles.len());
    let mut original = Vec::with_capacity(test_profiles.len());
    for prof in test_profiles {
        let (lo, hi) = prof
            .support()
            .ok_or_else(|| Error::Domain("test profiles must be compactly supported".into()))?;
        if !(lo > 0.0) {
            return Err(Error::Domain("test profiles must vanish near the origin".into()));
        }
        // ψ(ρ) = r^{-α} φ(r) with r = ρ^{2/(2-b)}, differentiated by the chain rule.
        let dr_drho = |rr: f64| 2.0 / (2.0 - params.b) * rr / spec.forward_radius(rr);
        let mut rv = 0.0;
        for i in 0..rho.len() {
            let r = spec.inverse_radius(rho[i]);
            if r <= lo || r >= hi {
                continue;
            }
            let [phi, dphi, _] = prof.eval(r);
            let psi = r.powf(-alpha) * phi;
            let dpsi = (-alpha * r.powf(-alpha - 1.0) * phi + r.powf(-alpha) * dphi) * dr_drho(r);
            let vi = v.vals[i];
            let term = sigma * dv.vals[i] * dpsi + v_star(params, pot, rho[i])? * vi * psi
                - k_star(params, pot, rho[i])? * vi.abs().powf(p - 2.0) * vi * psi;
            rv += vgrid.weights()[i] * term;
        }
        transformed.push(rv);

        let xgrid = make_radial_grid(params.dim, lo, hi, 20_001, Spacing::Uniform)?;
        let u = xgrid.sample(|r| r.powf(alpha) * cubic_interpolate(vgrid, &v.vals, spec.forward_radius(r)));
        let du = radial_derivative(&u)?;
        let mut ru = 0.0;
        for (i, &r) in xgrid.radii().iter().enumerate() {
            let [phi, dphi, _] = prof.eval(r);
            let ui = u.vals[i];
            let term = du.vals[i] * dphi + pot.v(r) * ui * phi
                - pot.k(r) * ui.abs().powf(p - 2.0) * ui * phi;
            ru += xgrid.weights()[i] * term;
        }
        original.push(ru);
    }
    Ok(WeakResiduals { original, transformed })
}

/// Default test profiles: five bumps spanning `|x| ∈ [0.5, 10]`.
pub fn default_test_profiles() -> Vec<RadialProfile> {
    [(1.0, 0.5), (2.5, 1.0), (4.5, 1.0), (7.0, 1.5), (9.0, 1.0)]
        .iter()
        .map(|&(c, w)| RadialProfile::Bump { center: c, half_width: w })
        .collect()
}

pub fn weak_equivalence_check(
    params: &ProblemParams,
    pot: &PotentialPair,
    v_solution: &RadialField,
    test_profiles: &[RadialProfile],
    tol: f64,
) -> Result<CheckRecord> {
    let form = RadialForm::transformed(params, pot, &v_solution.grid)?;
    let g = form.pairing_norm(&form.gradient(&v_solution.vals));
    if !(g <= tol) {
        return Err(Error::NotConverged(g));
    }
    let res = weak_residuals(params, pot, v_solution, test_profiles)?;
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let ru = max_abs(&res.original);
    let rv = max_abs(&res.transformed);
    Ok(CheckRecord::new(
        "weak_solution_equivalence",
        "weak-solution-equivalence",
        ru,
        10.0 * rv,
        10.0,
        ru <= 10.0 * rv,
        format!("{} profiles, transformed residual {rv:.3e}", test_profiles.len()),
    ))
}

// --------------------------------------------------- limit energy bound

pub fn limit_level_bound(params: &ProblemParams, s: f64) -> f64 {
    let p = params.p;
    (0.5 - 1.0 / p) * params.mu.powf(-2.0 / (p - 2.0)) * s.powf(p / (p - 2.0))
}

pub fn limit_level_check(params: &ProblemParams, level: f64, s: f64) -> CheckRecord {
    let bound = limit_level_bound(params, s);
    CheckRecord::new(
        "limit_energy_bound",
        "limit-energy-lower-bound",
        level,
        bound,
        1e-2,
        level >= bound * (1.0 - 1e-2),
        format!("ratio {:.6}", level / bound),
    )
}

// ------------------------------------------------------------- suite

/// Grid settings the suite needs beyond the solver grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteGrids {
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub spacing: Spacing,
    pub tensor_half_width: f64,
    pub tensor_nodes: usize,
}

impl Default for SuiteGrids {
    fn default() -> Self {
        SuiteGrids {
            r_min: 1e-3,
            r_max: 40.0,
            nodes: 4000,
            spacing: Spacing::Uniform,
            tensor_half_width: 4.0,
            tensor_nodes: 128,
        }
    }
}

/// Central-difference audit of the Riesz gradient at `field`; returns the
/// worst relative error over `directions` seeded directions.
pub fn gradient_fd_error(
    form: &RadialForm,
    field: &[f64],
    directions: usize,
    seed: u64,
) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = form.gradient(field);
    let w = form.grid().weights();
    let r = form.grid().radii();
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..directions {
        let h: Vec<f64> = r.iter().map(|r| (-r / 4.0).exp() * rng.gen_range(-1.0..1.0)).collect();
        let shift = |t: f64| -> Vec<f64> { field.iter().zip(&h).map(|(u, h)| u + t * h).collect() };
        let fd = (form.energy(&shift(eps)) - form.energy(&shift(-eps))) / (2.0 * eps);
        let an: f64 = (0..h.len()).map(|i| w[i] * g[i] * h[i]).sum();
        worst = worst.max((an - fd).abs() / (1.0 + an.abs()));
    }
    worst
}

/// Transformed Laplacian identity on three analytic fields and the measure
/// identity on three integrands.
pub fn transform_checks(params: &ProblemParams) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let samples = sample_shell(20, 0.5, 2.0, PROBE_SEED);
    let fields: [(&str, Box<dyn AnalyticField>); 3] = [
        ("gaussian", Box::new(RadialAnalytic(RadialProfile::Gaussian { alpha: 1.0 }))),
        ("quadratic_gaussian", Box::new(RadialAnalytic(RadialProfile::QuadraticGaussian))),
        (
            "shifted_gaussian",
            Box::new(ShiftedGaussian { center: vec![0.3, -0.2, 0.1], alpha: 0.8 }),
        ),
    ];
    for (name, f) in &fields {
        out.push(laplacian_identity_check(params, name, f.as_ref(), &samples)?);
    }
    let integrands = [
        ("gaussian", RadialProfile::Gaussian { alpha: 1.0 }, 10.0),
        ("bump", RadialProfile::Bump { center: 1.5, half_width: 1.0 }, 2.5),
        ("power_bump", RadialProfile::PowerBump { power: -1.5, center: 2.0, half_width: 1.5 }, 3.5),
    ];
    for (name, prof, extent) in integrands {
        out.push(measure_check(params, name, &RadialAnalytic(prof), extent)?);
    }
    Ok(out)
}

pub fn run_suite(
    params: &ProblemParams,
    pot: &PotentialPair,
    grids: &SuiteGrids,
    opts: &SolverOpts,
) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    let grid = make_radial_grid(params.dim, grids.r_min, grids.r_max, grids.nodes, grids.spacing)?;

    out.extend(transform_checks(params)?);

    // Hardy inequality and norm equivalence on the probe set.
    let probes = probe_fields(&grid, 50, PROBE_SEED);
    out.push(hardy_check(&grid, &probes));
    out.push(hardy_near_extremal_check(params.dim)?);
    let (c1, c2) = norm_equivalence_bounds(params, pot, &probes)?;
    out.push(CheckRecord::new(
        "norm_equivalence",
        "norm-equivalence",
        c1,
        0.0,
        0.0,
        c1 > 0.0,
        format!("empirical constants C1 = {c1:.6}, C2 = {c2:.6}"),
    ));

    // Tensor-grid identities.
    if params.dim == 3 {
        let small = make_tensor_grid(3, 4.0, 32)?;
        let rf = random_tensor_field(&small, PROBE_SEED);
        out.push(quadratic_form_identity_check(params, &rf)?);
        let theta = [0.6, 0.0, 0.8];
        for (axes, signs) in [
            ([1, 0, 2], [1.0, 1.0, 1.0]),
            ([0, 1, 2], [-1.0, 1.0, 1.0]),
            ([2, 0, 1], [1.0, -1.0, -1.0]),
        ] {
            let perm = SignedPermutation::new(axes, signs)?;
            let mut rec = theta_invariance_check(params, &rf, &theta, &perm)?;
            rec.name = format!("theta_invariance_{}{}{}", axes[0], axes[1], axes[2]);
            out.push(rec);
        }
        let tensor = make_tensor_grid(3, grids.tensor_half_width, grids.tensor_nodes)?;
        let sp_grid = make_radial_grid(3, grids.r_min, grids.r_max, grids.nodes, Spacing::Uniform)?;
        let sc = scaling_law_outcome(params, &sp_grid, &tensor, opts)?;
        let rel = (sc.measured - sc.target).abs() / sc.target;
        out.push(CheckRecord::new(
            "anisotropic_scaling_law",
            "anisotropic-scaling-law",
            sc.measured,
            sc.target,
            2e-2,
            rel < 2e-2,
            format!("S_p = {:.10}, relative gap {rel:.3e}, extrapolated {:.8}", sc.s_p, sc.extrapolated),
        ));
        // Level of the stretched trial on the limit ray against the bound.
        let level = limit_level_bound(params, sc.extrapolated);
        out.push(limit_level_check(params, level, sc.target));
    }

    // Solver coherence.
    let form = RadialForm::transformed(params, pot, &grid)?;
    let neh = nehari_minimize(params, pot, &grid, opts)?;
    let crit = neh.critical_point();
    let j = form.energy(&crit.vals);
    let gap = (j - neh.level).abs() / neh.level.max(1.0);
    out.push(CheckRecord::new(
        "ray_level_consistency",
        "ray-maximum-level",
        j,
        neh.level,
        1e-8,
        gap <= 1e-8 && neh.final_gradient_norm <= opts.tol,
        format!("gradient norm {:.3e}", neh.final_gradient_norm),
    ));
    let mp = mountain_pass_path(params, pot, &grid, opts)?;
    let mp_gap = (mp.level - neh.level).abs() / neh.level;
    out.push(CheckRecord::new(
        "mountain_pass_level",
        "mountain-pass-level",
        mp.level,
        neh.level,
        1e-2,
        mp_gap < 1e-2,
        format!("{} iterations, peak node {}", mp.iterations, mp.max_index),
    ));
    let mut grad_err = 0.0f64;
    for (k, field) in [
        grid.sample(|r| (-r * r / 2.0).exp()).vals,
        grid.sample(|r| 2.0 * (-r).exp() * (1.0 + 0.5 * r.sin())).vals,
        crit.vals.clone(),
    ]
    .iter()
    .enumerate()
    {
        grad_err = grad_err.max(gradient_fd_error(&form, field, 5, PROBE_SEED + k as u64));
    }
    out.push(CheckRecord::new(
        "gradient_consistency",
        "functional-derivative",
        grad_err,
        0.0,
        1e-5,
        grad_err < 1e-5,
        "3 fields, 5 directions each".into(),
    ));
    match weak_equivalence_check(params, pot, &crit, &default_test_profiles(), opts.tol) {
        Ok(rec) => out.push(rec),
        Err(Error::NotConverged(g)) => out.push(CheckRecord::new(
            "weak_solution_equivalence",
            "weak-solution-equivalence",
            g,
            opts.tol,
            opts.tol,
            false,
            "Nehari minimizer did not reach the gradient tolerance".into(),
        )),
        Err(e) => return Err(e),
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{model_potentials, validate_params};
    use proptest::prelude::*;

    fn params(b: f64) -> ProblemParams {
        validate_params(3, 1.0, b, 0.5 * b, 1.0).unwrap()
    }

    #[test]
    fn bad_permutations_are_rejected() {
        assert!(matches!(
            SignedPermutation::new([0, 0, 2], [1.0; 3]),
            Err(Error::BadPermutation(_))
        ));
        assert!(matches!(
            SignedPermutation::new([0, 1, 3], [1.0; 3]),
            Err(Error::BadPermutation(_))
        ));
        assert!(matches!(
            SignedPermutation::new([0, 1, 2], [1.0, 0.5, 1.0]),
            Err(Error::BadPermutation(_))
        ));
    }

    #[test]
    fn relabel_matches_pointwise_definition() {
        let grid = make_tensor_grid(3, 2.0, 8).unwrap();
        let f = |x: [f64; 3]| x[0] + 10.0 * x[1] + 100.0 * x[2] + x[0] * x[2];
        let u = grid.sample(f);
        let perm = SignedPermutation::new([2, 0, 1], [1.0, -1.0, 1.0]).unwrap();
        let v = perm.relabel(&u);
        for idx in 0..grid.len() {
            let x = grid.point(idx);
            let mut px = [0.0; 3];
            for k in 0..3 {
                px[perm.axes[k]] = perm.signs[k] * x[k];
            }
            assert!((v.vals[idx] - f(px)).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_relabel_is_noop() {
        let grid = make_tensor_grid(3, 2.0, 8).unwrap();
        let u = random_tensor_field(&grid, 3);
        assert_eq!(SignedPermutation::identity().relabel(&u).vals, u.vals);
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let grid = make_radial_grid(3, 0.1, 3.0, 37, Spacing::Graded).unwrap();
        let f = |r: f64| 2.0 - r + 0.5 * r * r - 0.25 * r * r * r;
        let vals: Vec<f64> = grid.radii().iter().map(|&r| f(r)).collect();
        for r in [0.1, 0.123, 0.77, 1.5, 2.999, 3.0] {
            assert!((cubic_interpolate(&grid, &vals, r) - f(r)).abs() < 1e-11, "r = {r}");
        }
        assert_eq!(cubic_interpolate(&grid, &vals, 3.5), 0.0);
    }

    #[test]
    fn measure_identity_for_negative_b() {
        let p = validate_params(3, 1.0, -2.0, -1.0, 1.0).unwrap();
        let rec = measure_check(&p, "gaussian", &RadialAnalytic(RadialProfile::Gaussian { alpha: 1.0 }), 10.0)
            .unwrap();
        assert!(rec.passed, "{rec:?}");
        // ∫ e^{-|x|²} dx = π^{3/2}
        let (lhs, _) = measure_sides(&p, &|r| (-r * r).exp(), 10.0).unwrap();
        let exact = std::f64::consts::PI.powf(1.5);
        assert!((lhs - exact).abs() < 1e-6 * exact, "{lhs} vs {exact}");
    }

    #[test]
    fn csv_layout() {
        let rec = CheckRecord::new("x", "some-anchor", 1.0, 2.0, 0.5, true, String::new());
        let csv = records_to_csv(&[rec], 12);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("name,anchor,measured,target,tolerance,passed"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 6);
        assert_eq!(row[0], "x");
        assert_eq!(row[5], "true");
        assert_eq!(row[2].parse::<f64>().unwrap(), 1.0);
    }

    #[test]
    fn non_finite_measurement_never_passes() {
        let rec = CheckRecord::new("x", "a", f64::NAN, 0.0, 1.0, true, String::new());
        assert!(!rec.passed);
    }

    #[test]
    fn limit_level_decision() {
        let p = params(1.0);
        let bound = limit_level_bound(&p, 6.0);
        // (1/2 - 1/4) * 36 for p = 4, mu = 1
        assert!((bound - 9.0).abs() < 1e-12);
        assert!(limit_level_check(&p, 0.995 * bound, 6.0).passed);
        assert!(!limit_level_check(&p, 0.98 * bound, 6.0).passed);
    }

    #[test]
    fn hardy_probes_respect_the_inequality() {
        let grid = make_radial_grid(3, 1e-3, 40.0, 2000, Spacing::Uniform).unwrap();
        let probes = probe_fields(&grid, 20, PROBE_SEED);
        assert!(hardy_check(&grid, &probes).passed);
    }

    #[test]
    fn near_extremal_ratio_close_to_one() {
        let probe = near_extremal_probe(3, 0.05, 20_000).unwrap();
        let (lhs, rhs) = hardy_sides(&probe);
        let ratio = lhs / rhs;
        assert!(ratio > 1.0 && (ratio - 1.01).abs() < 5e-3, "ratio {ratio}");
    }

    #[test]
    fn weak_residuals_transport_between_variables() {
        // Not a solution: both residuals are O(1) and related by the Jacobian constant.
        for b in [1.0, -1.0] {
            let p = params(b);
            let pot = model_potentials(&p);
            let grid = make_radial_grid(3, 1e-3, 40.0, 20_000, Spacing::Uniform).unwrap();
            let v = grid.sample(|r| (-r * r / 3.0).exp());
            let res = weak_residuals(&p, &pot, &v, &default_test_profiles()).unwrap();
            let factor = 2.0 / (2.0 - b);
            for (ru, rv) in res.original.iter().zip(&res.transformed) {
                assert!(
                    (ru - factor * rv).abs() < 2e-3 * (1.0 + rv.abs()),
                    "b = {b}: {ru} vs {}",
                    factor * rv
                );
            }
        }
    }

    #[test]
    fn disjoint_support_gives_zero_residual() {
        let p = params(1.0);
        let pot = model_potentials(&p);
        let grid = make_radial_grid(3, 1e-3, 40.0, 4000, Spacing::Uniform).unwrap();
        let spec = TransformSpec::from_params(&p);
        let cut = spec.forward_radius(20.0);
        let v = grid.sample(|r| if r > cut { (-(r - cut)).exp() * (r - cut).powi(4) } else { 0.0 });
        let res = weak_residuals(&p, &pot, &v, &default_test_profiles()).unwrap();
        assert!(res.original.iter().chain(&res.transformed).all(|r| *r == 0.0));
    }

    #[test]
    fn weak_check_rejects_non_solutions() {
        let p = params(1.0);
        let pot = model_potentials(&p);
        let grid = make_radial_grid(3, 1e-3, 40.0, 1000, Spacing::Uniform).unwrap();
        let v = grid.sample(|r| (-r * r).exp());
        assert!(matches!(
            weak_equivalence_check(&p, &pot, &v, &default_test_profiles(), 1e-8),
            Err(Error::NotConverged(_))
        ));
    }

    #[test]
    fn quadratic_form_identity_on_random_field() {
        let grid = make_tensor_grid(3, 3.0, 16).unwrap();
        let u = random_tensor_field(&grid, 11);
        assert!(quadratic_form_identity_check(&params(1.0), &u).unwrap().passed);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn theta_invariance_under_signed_permutations(
            perm_idx in 0usize..6,
            signs in prop::array::uniform3(prop::bool::ANY),
            seed in 0u64..1000,
            b in prop_oneof![Just(1.0), Just(-1.0), Just(1.5)],
        ) {
            let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
            let s = signs.map(|x| if x { 1.0 } else { -1.0 });
            let perm = SignedPermutation::new(perms[perm_idx], s).unwrap();
            let grid = make_tensor_grid(3, 3.0, 12).unwrap();
            let u = random_tensor_field(&grid, seed);
            let theta = [0.48, 0.6, 0.64];
            let rec = theta_invariance_check(&params(b), &u, &theta, &perm).unwrap();
            prop_assert!(rec.passed, "{:?}", rec);
        }
    }
}
