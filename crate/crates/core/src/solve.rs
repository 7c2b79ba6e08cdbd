//! Quotient minimization, the Nehari level, a path-deformation mountain-pass
//! search and the existence-threshold report.
//!
//! Quotients are minimized by `L`-preconditioned descent: with
//! `A = uᵀLu`, `B = Σ w k u^p` the search direction is
//! `d = (A/B) L⁻¹(w k u^{p-1}) - u`, so a unit step is one sweep of nonlinear
//! inverse iteration. Steps are Armijo-backtracked, clamped at zero and
//! renormalized to `B = 1`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{ray_max, PowerMode, RadialForm};
use crate::error::{Error, Result};
use crate::grids::{make_radial_grid, RadialField, RadialGrid, Spacing};
use crate::problem::{PotentialPair, ProblemParams};

const ARMIJO: f64 = 1e-4;
const STALL_RTOL: f64 = 1e-12;
const STALL_COUNT: usize = 10;
const MIN_STEP: f64 = 1e-14;
/// Armijo slack in units of the objective, absorbing summation roundoff.
const ROUNDOFF: f64 = 8.0 * f64::EPSILON;
/// Pseudo-time step of the string method in the `L`-preconditioned metric.
const MP_STEP: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOpts {
    pub max_iters: usize,
    pub tol: f64,
    pub path_nodes: usize,
    pub seed: u64,
    /// Relative amplitude of the seeded multiplicative noise on the initial guess.
    pub perturbation: f64,
}

impl Default for SolverOpts {
    fn default() -> Self {
        SolverOpts { max_iters: 5000, tol: 1e-8, path_nodes: 40, seed: 0x5EED, perturbation: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta {
    pub dim: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub spacing: Spacing,
}

impl GridMeta {
    pub fn of(grid: &RadialGrid) -> Self {
        GridMeta {
            dim: grid.dim(),
            r_min: grid.r_min(),
            r_max: grid.r_max(),
            nodes: grid.len(),
            spacing: grid.spacing(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Gradient,
    Stalled,
}

#[derive(Debug, Clone)]
pub struct QuotientReport {
    /// Minimal quotient found.
    pub value: f64,
    /// Minimizer normalized to unit nonlinear integral.
    pub minimizer: RadialField,
    pub iterations: usize,
    /// Riesz gradient norm of the functional at `t_star · minimizer`.
    pub final_gradient_norm: f64,
    pub grid_meta: GridMeta,
    /// Ray-maximizing scale of the minimizer.
    pub t_star: f64,
    /// Critical level `(½ - 1/p) value^{p/(p-2)}`.
    pub level: f64,
    /// Quotient after each accepted step, starting with the initial guess.
    pub history: Vec<f64>,
    pub stop: StopReason,
}

impl QuotientReport {
    /// `t_star · minimizer`, a discrete critical point of the functional.
    pub fn critical_point(&self) -> RadialField {
        self.minimizer.scaled(self.t_star)
    }
}

/// Normalized Gaussian `e^{-r²/2}`, optionally with seeded noise.
pub fn initial_guess(grid: &Arc<RadialGrid>, opts: &SolverOpts) -> RadialField {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let amp = opts.perturbation;
    let vals = grid
        .radii()
        .iter()
        .map(|&r| {
            let noise = if amp > 0.0 { 1.0 + amp * rng.gen_range(-1.0..1.0) } else { 1.0 };
            (-r * r / 2.0).exp() * noise
        })
        .collect();
    RadialField { grid: Arc::clone(grid), vals }
}

fn normalize(form: &RadialForm, u: &mut [f64]) -> Result<f64> {
    let b = form.p_integral(u, PowerMode::PositivePart);
    if !(b > 0.0) {
        return Err(Error::ZeroDenominator("initial guess has no mass on the weight".into()));
    }
    let s = b.powf(-1.0 / form.exponent());
    u.iter_mut().for_each(|v| *v *= s);
    Ok(b)
}

fn critical_gradient_norm(form: &RadialForm, u: &[f64]) -> Result<(f64, f64)> {
    let a = form.norm_sq(u);
    let b = form.p_integral(u, PowerMode::PositivePart);
    let (t, _) = ray_max(a, b, form.exponent())?;
    let tu: Vec<f64> = u.iter().map(|v| t * v).collect();
    Ok((form.pairing_norm(&form.gradient(&tu)), t))
}

/// Minimizes `uᵀLu / (Σ w k (u⁺)^p)^{2/p}` over nonnegative fields.
pub fn minimize_quotient(
    form: &RadialForm,
    init: &RadialField,
    opts: &SolverOpts,
) -> Result<QuotientReport> {
    init.check_finite()?;
    if !Arc::ptr_eq(&init.grid, form.grid()) && *init.grid != **form.grid() {
        return Err(Error::Grid("initial guess lives on a different grid".into()));
    }
    let p = form.exponent();
    let mut u: Vec<f64> = init.vals.iter().map(|v| v.max(0.0)).collect();
    normalize(form, &mut u)?;
    let mut q = form.quotient(&u, PowerMode::PositivePart)?;
    let mut history = vec![q];
    let mut stalled = 0;
    let mut stop = None;
    let mut iterations = 0;
    let mut grad_norm = f64::INFINITY;

    while iterations < opts.max_iters {
        let (g, _) = critical_gradient_norm(form, &u)?;
        // A stall needs both a flat objective and a gradient that stopped shrinking.
        if g < 0.99 * grad_norm {
            stalled = 0;
        }
        grad_norm = g;
        if grad_norm < opts.tol {
            stop = Some(StopReason::Gradient);
            break;
        }
        if stalled >= STALL_COUNT {
            stop = Some(StopReason::Stalled);
            break;
        }
        let a = form.norm_sq(&u);
        let b = form.p_integral(&u, PowerMode::PositivePart);
        let z = form.solve(&form.nonlinear_load(&u))?;
        let d: Vec<f64> = z.iter().zip(&u).map(|(z, u)| a / b * z - u).collect();
        let slope = -2.0 / b.powf(2.0 / p) * dot(&d, &form.apply(&d));

        let mut step = 1.0;
        let next = loop {
            let cand: Vec<f64> =
                u.iter().zip(&d).map(|(u, d)| (u + step * d).max(0.0)).collect();
            if let Ok(qc) = form.quotient(&cand, PowerMode::PositivePart) {
                if qc <= q + ARMIJO * step * slope + ROUNDOFF * q {
                    break Some((cand, qc));
                }
            }
            step *= 0.5;
            if step < MIN_STEP {
                break None;
            }
        };
        iterations += 1;
        let Some((mut cand, qc)) = next else {
            stalled = STALL_COUNT;
            continue;
        };
        normalize(form, &mut cand)?;
        stalled = if (q - qc).abs() <= STALL_RTOL * q { stalled + 1 } else { 0 };
        u = cand;
        q = qc;
        history.push(q);
    }

    let (final_gradient_norm, t_star) = critical_gradient_norm(form, &u)?;
    let stop = match stop {
        Some(s) => s,
        None if final_gradient_norm < opts.tol => StopReason::Gradient,
        None => {
            return Err(Error::NoConvergence { iterations, gradient_norm: grad_norm });
        }
    };
    let level = (0.5 - 1.0 / p) * q.powf(p / (p - 2.0));
    Ok(QuotientReport {
        value: q,
        minimizer: RadialField { grid: Arc::clone(form.grid()), vals: u },
        iterations,
        final_gradient_norm,
        grid_meta: GridMeta::of(form.grid()),
        t_star,
        level,
        history,
        stop,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `S_p`: minimal `(∫|∇v|² + a∫v²)/(∫|v|^p)^{2/p}` over radial fields.
pub fn ground_state_sp(
    params: &ProblemParams,
    grid: &Arc<RadialGrid>,
    opts: &SolverOpts,
) -> Result<QuotientReport> {
    let form = RadialForm::isotropic(grid, params.a, params.p)?;
    minimize_quotient(&form, &initial_guess(grid, opts), opts)
}

/// Minimal `A`-quotient with weight `K*` over nonnegative radial fields.
pub fn nehari_minimize(
    params: &ProblemParams,
    pot: &PotentialPair,
    grid: &Arc<RadialGrid>,
    opts: &SolverOpts,
) -> Result<QuotientReport> {
    let form = RadialForm::transformed(params, pot, grid)?;
    minimize_quotient(&form, &initial_guess(grid, opts), opts)
}

#[derive(Debug, Clone)]
pub struct MountainPassReport {
    /// Highest energy along the converged path.
    pub level: f64,
    /// Path node carrying the maximal energy.
    pub saddle: RadialField,
    pub max_index: usize,
    pub iterations: usize,
    pub final_gradient_norm: f64,
    /// Energies of all path nodes, endpoints included.
    pub path_energies: Vec<f64>,
    pub endpoint_energy: f64,
    pub stop: StopReason,
}

/// Mountain-pass search from `0` to `2 t*(u₀) u₀` with `u₀` the Gaussian guess.
pub fn mountain_pass_path(
    params: &ProblemParams,
    pot: &PotentialPair,
    grid: &Arc<RadialGrid>,
    opts: &SolverOpts,
) -> Result<MountainPassReport> {
    let form = RadialForm::transformed(params, pot, grid)?;
    let u0 = initial_guess(grid, opts);
    let a = form.norm_sq(&u0.vals);
    let b = form.p_integral(&u0.vals, PowerMode::PositivePart);
    if !(b > 0.0) {
        return Err(Error::ZeroDenominator("initial guess has no mass on the weight".into()));
    }
    let (t, _) = ray_max(a, b, params.p)?;
    mountain_pass_with_endpoint(&form, &u0.scaled(2.0 * t), opts)
}

/// Climbing-image string method on the path from `0` to `endpoint`.
///
/// Nodes between `0` and the highest node move along the `L`-preconditioned
/// negative gradient with the path tangent removed; the highest node instead
/// has its tangential component reversed so it climbs to the saddle. Past the
/// highest node the functional is unbounded below, so those nodes are not
/// evolved: they sit on the ray `s z_m` out to a multiple where `J < 0`. The
/// last stretch to `endpoint` stays inside `{J < 0}` after scaling both ends
/// up, so it does not raise the level. After every sweep the nodes below the
/// climbing node are redistributed to equal `L`-arc length.
pub fn mountain_pass_with_endpoint(
    form: &RadialForm,
    endpoint: &RadialField,
    opts: &SolverOpts,
) -> Result<MountainPassReport> {
    endpoint.check_finite()?;
    let end_energy = form.energy(&endpoint.vals);
    if !(end_energy < 0.0) {
        return Err(Error::BadEndpoint(end_energy));
    }
    let segments = opts.path_nodes.max(4);
    let mut path: Vec<Vec<f64>> = (0..=segments)
        .map(|k| endpoint.vals.iter().map(|v| v * k as f64 / segments as f64).collect())
        .collect();
    let mut energies: Vec<f64> = path.iter().map(|z| form.energy(z)).collect();

    let mut step = MP_STEP;
    let mut iterations = 0;
    let mut stalled = 0;
    let mut stop = None;
    let mut grad_norm = f64::INFINITY;
    let mut last_level = f64::INFINITY;
    while iterations < opts.max_iters {
        let m = argmax_interior(&energies);
        let g = form.pairing_norm(&form.gradient(&path[m]));
        if g < 0.99 * grad_norm {
            stalled = 0;
        } else if g > 10.0 * grad_norm && step > MIN_STEP {
            step *= 0.5;
        }
        grad_norm = g;
        if grad_norm < opts.tol {
            stop = Some(StopReason::Gradient);
            break;
        }
        if stalled >= STALL_COUNT {
            stop = Some(StopReason::Stalled);
            break;
        }
        let moved: Vec<Vec<f64>> = (1..=m)
            .map(|k| {
                let z = &path[k];
                // L⁻¹ J'(z) = z - L⁻¹(load)
                let pre = form.solve(&form.nonlinear_load(z))?;
                let mut d: Vec<f64> = z.iter().zip(&pre).map(|(z, s)| s - z).collect();
                let tangent: Vec<f64> =
                    path[k + 1].iter().zip(&path[k - 1]).map(|(a, b)| a - b).collect();
                let lt = form.apply(&tangent);
                let tt = dot(&tangent, &lt);
                if tt > 0.0 {
                    let factor = if k == m { 2.0 } else { 1.0 };
                    let c = factor * dot(&d, &lt) / tt;
                    d.iter_mut().zip(&tangent).for_each(|(d, t)| *d -= c * t);
                }
                Ok(z.iter().zip(&d).map(|(z, d)| z + step * d).collect())
            })
            .collect::<Result<_>>()?;
        for (k, z) in moved.into_iter().enumerate() {
            path[k + 1] = z;
        }
        reparametrize(form, &mut path[..=m]);
        place_tail(form, &mut path, m, &endpoint.vals);
        energies = path.iter().map(|z| form.energy(z)).collect();
        iterations += 1;

        let level = energies[argmax_interior(&energies)];
        if !level.is_finite() {
            return Err(Error::NonFinite(m));
        }
        if (last_level - level).abs() <= STALL_RTOL * level.abs() {
            stalled += 1;
        }
        last_level = level;
    }

    let m = argmax_interior(&energies);
    let final_gradient_norm = form.pairing_norm(&form.gradient(&path[m]));
    let stop = match stop {
        Some(s) => s,
        None if final_gradient_norm < opts.tol => StopReason::Gradient,
        None => return Err(Error::NoConvergence { iterations, gradient_norm: grad_norm }),
    };
    Ok(MountainPassReport {
        level: energies[m],
        saddle: RadialField { grid: Arc::clone(form.grid()), vals: path[m].clone() },
        max_index: m,
        iterations,
        final_gradient_norm,
        path_energies: energies,
        endpoint_energy: end_energy,
        stop,
    })
}

/// Nodes `m+1..` along the ray through `path[m]`, from `s = 1` to twice the
/// multiple where the ray energy changes sign. Falls back to the chord to
/// `endpoint` when the ray carries no nonlinear mass.
fn place_tail(form: &RadialForm, path: &mut [Vec<f64>], m: usize, endpoint: &[f64]) {
    let last = path.len() - 1;
    let z = path[m].clone();
    let a = form.norm_sq(&z);
    let b = form.p_integral(&z, PowerMode::PositivePart);
    let p = form.exponent();
    if !(a > 0.0 && b > 0.0) {
        for k in m + 1..last {
            let t = (k - m) as f64 / (last - m) as f64;
            path[k] = z.iter().zip(endpoint).map(|(a, b)| a + t * (b - a)).collect();
        }
        return;
    }
    let zero_crossing = (p / 2.0 * a / b).powf(1.0 / (p - 2.0));
    let far = (2.0 * zero_crossing).max(2.0);
    for k in m + 1..last {
        let s = 1.0 + (far - 1.0) * (k - m) as f64 / (last - 1 - m).max(1) as f64;
        path[k] = z.iter().map(|v| s * v).collect();
    }
}

fn argmax_interior(energies: &[f64]) -> usize {
    (1..energies.len() - 1).max_by(|&i, &j| energies[i].total_cmp(&energies[j])).unwrap()
}

/// Redistributes the interior nodes of `path` to equal `L`-arc length,
/// keeping both ends fixed.
fn reparametrize(form: &RadialForm, path: &mut [Vec<f64>]) {
    let n = path.len();
    if n < 3 {
        return;
    }
    let mut cum = vec![0.0; n];
    for k in 1..n {
        let diff: Vec<f64> = path[k].iter().zip(&path[k - 1]).map(|(a, b)| a - b).collect();
        cum[k] = cum[k - 1] + dot(&diff, &form.apply(&diff)).max(0.0).sqrt();
    }
    let total = cum[n - 1];
    if !(total > 0.0) {
        return;
    }
    let old = path.to_vec();
    let mut seg = 0;
    for (k, node) in path.iter_mut().enumerate().take(n - 1).skip(1) {
        let target = total * k as f64 / (n - 1) as f64;
        while seg + 2 < n && cum[seg + 1] < target {
            seg += 1;
        }
        let len = cum[seg + 1] - cum[seg];
        let t = if len > 0.0 { ((target - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
        *node = old[seg].iter().zip(&old[seg + 1]).map(|(a, b)| a + t * (b - a)).collect();
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusTrial {
    pub r: f64,
    /// Full `A`-quotient of the bump.
    pub quotient_a: f64,
    /// `∫|∇u|² / (∫K*|u|^p)^{2/p}` of the bump.
    pub dirichlet_quotient: f64,
}

#[derive(Debug, Clone)]
pub struct ThresholdReport {
    /// Smallest `A`-quotient found (an upper bound on the infimum).
    pub lhs: f64,
    pub s_p: f64,
    pub s: f64,
    pub rhs: f64,
    pub ps_threshold: f64,
    pub mp_level: f64,
    pub quotient_condition_holds: bool,
    pub level_below_threshold: bool,
    /// True when the Nehari solve failed and `lhs` comes from trial functions only.
    pub degraded: bool,
    pub nehari_value: Option<f64>,
    pub annulus: Vec<AnnulusTrial>,
}

pub const ANNULUS_RADII: [f64; 3] = [10.0, 20.0, 40.0];

/// Cubic ramp: 0 at `r/2` and `r`, 1 on `[5r/8, 7r/8]`.
pub fn annulus_bump(r: f64, x: f64) -> f64 {
    let smooth = |t: f64| {
        let t = t.clamp(0.0, 1.0);
        t * t * (3.0 - 2.0 * t)
    };
    let (a, b, c, d) = (0.5 * r, 0.625 * r, 0.875 * r, r);
    if x <= a || x >= d {
        0.0
    } else if x < b {
        smooth((x - a) / (b - a))
    } else if x <= c {
        1.0
    } else {
        smooth((d - x) / (d - c))
    }
}

/// Quotients of [`annulus_bump`] on its own grid over `[r/2, r]`.
pub fn annulus_trial(
    params: &ProblemParams,
    pot: &PotentialPair,
    r: f64,
    nodes: usize,
) -> Result<AnnulusTrial> {
    let grid = make_radial_grid(params.dim, 0.5 * r, r, nodes, Spacing::Uniform)?;
    let form = RadialForm::transformed(params, pot, &grid)?;
    let u = grid.sample(|x| annulus_bump(r, x));
    let denom = form.p_integral(&u.vals, PowerMode::Absolute).powf(2.0 / params.p);
    Ok(AnnulusTrial {
        r,
        quotient_a: form.quotient(&u.vals, PowerMode::Absolute)?,
        dirichlet_quotient: form.dirichlet(&u.vals) / denom,
    })
}

pub fn threshold_check(
    params: &ProblemParams,
    pot: &PotentialPair,
    grid: &Arc<RadialGrid>,
    opts: &SolverOpts,
) -> Result<ThresholdReport> {
    let p = params.p;
    let s_p = ground_state_sp(params, grid, opts)?.value;
    let s = (1.0 - params.b / 2.0).powf((p - 2.0) / p) * s_p;
    let rhs = params.mu.powf(-2.0 / p) * s;
    let ps_threshold = (0.5 - 1.0 / p) * params.mu.powf(-2.0 / (p - 2.0)) * s.powf(p / (p - 2.0));

    let annulus = ANNULUS_RADII
        .iter()
        .map(|&r| annulus_trial(params, pot, r, grid.len()))
        .collect::<Result<Vec<_>>>()?;
    let (nehari_value, degraded) = match nehari_minimize(params, pot, grid, opts) {
        Ok(rep) => (Some(rep.value), false),
        Err(Error::NoConvergence { .. }) => (None, true),
        Err(e) => return Err(e),
    };
    let lhs = annulus
        .iter()
        .map(|t| t.quotient_a)
        .chain(nehari_value)
        .fold(f64::INFINITY, f64::min);
    let mp_level = (0.5 - 1.0 / p) * lhs.powf(p / (p - 2.0));
    Ok(ThresholdReport {
        lhs,
        s_p,
        s,
        rhs,
        ps_threshold,
        mp_level,
        quotient_condition_holds: lhs < rhs,
        level_below_threshold: mp_level < ps_threshold,
        degraded,
        nehari_value,
        annulus,
    })
}
