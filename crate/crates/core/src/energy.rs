//! Norms, quotients and the energy functional on discrete fields.
//!
//! Radial fields use an edge-based Dirichlet form
//! `D(u) = ω Σ_i m_i (u_{i+1} - u_i)^2 / h_i`, `m_i = (r_i^{N-1} + r_{i+1}^{N-1})/2`,
//! and trapezoid weights for every zeroth-order term. The anisotropic part of
//! the `A`-norm reduces to `κ D(u)` for radial `u`, so the radial `A`-norm is
//! `(1 + κ) D(u) + Σ w_i V*_i u_i^2`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grids::{gradient_tensor, RadialField, RadialGrid, TensorField};
use crate::problem::{k_star, v_star, PotentialPair, ProblemParams};

/// How the nonlinear integrand treats negative values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    /// `(u⁺)^p`, the integrand of the energy functional.
    PositivePart,
    /// `|u|^p`, the integrand of the Rayleigh quotients.
    Absolute,
}

impl PowerMode {
    fn pow(self, u: f64, p: f64) -> f64 {
        match self {
            PowerMode::PositivePart => u.max(0.0).powf(p),
            PowerMode::Absolute => u.abs().powf(p),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub dirichlet: f64,
    pub aniso: f64,
    pub potential: f64,
    pub nonlinear: f64,
    pub total_norm_sq: f64,
    pub j_value: f64,
}

impl EnergyBreakdown {
    fn assemble(dirichlet: f64, aniso: f64, potential: f64, nonlinear: f64, p: f64) -> Self {
        let total_norm_sq = dirichlet + aniso + potential;
        EnergyBreakdown {
            dirichlet,
            aniso,
            potential,
            nonlinear,
            total_norm_sq,
            j_value: 0.5 * total_norm_sq - nonlinear / p,
        }
    }
}

/// A discrete radial functional `½(σ D(u) + Σ w q u²) - (1/p) Σ w k (u⁺)^p`.
///
/// Its quadratic part is the symmetric tridiagonal matrix `L` with
/// `L_ii = σ(c_{i-1} + c_i) + w_i q_i` and `L_{i,i+1} = -σ c_i`.
#[derive(Debug, Clone)]
pub struct RadialForm {
    grid: Arc<RadialGrid>,
    stiffness: f64,
    potential: Vec<f64>,
    weight: Vec<f64>,
    p: f64,
    edge: Vec<f64>,
}

impl RadialForm {
    pub fn new(
        grid: Arc<RadialGrid>,
        stiffness: f64,
        potential: Vec<f64>,
        weight: Vec<f64>,
        p: f64,
    ) -> Result<Self> {
        let n = grid.len();
        if potential.len() != n || weight.len() != n {
            return Err(Error::Grid("coefficient length does not match grid".into()));
        }
        if let Some(i) = potential.iter().chain(&weight).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i % n));
        }
        let r = grid.radii();
        let omega = grid.omega();
        let e = grid.dim() as i32 - 1;
        let edge = (0..n - 1)
            .map(|i| omega * 0.5 * (r[i].powi(e) + r[i + 1].powi(e)) / (r[i + 1] - r[i]))
            .collect();
        Ok(RadialForm { grid, stiffness, potential, weight, p, edge })
    }

    /// The transformed problem: stiffness `(1 - b/2)^2`, potential `V*`, weight `K*`.
    pub fn transformed(
        params: &ProblemParams,
        pot: &PotentialPair,
        grid: &Arc<RadialGrid>,
    ) -> Result<Self> {
        let r = grid.radii();
        let v = r.iter().map(|&x| v_star(params, pot, x)).collect::<Result<Vec<_>>>()?;
        let k = r.iter().map(|&x| k_star(params, pot, x)).collect::<Result<Vec<_>>>()?;
        Self::new(Arc::clone(grid), params.radial_stiffness(), v, k, params.p)
    }

    /// `|∇u|² + a u²` against `|u|^p`, the isotropic quotient defining `S_p`.
    pub fn isotropic(grid: &Arc<RadialGrid>, a: f64, p: f64) -> Result<Self> {
        Self::limit(grid, a, 1.0, p)
    }

    /// Constant-coefficient limit problem `|∇u|² + a u²` against `μ (u⁺)^p`.
    pub fn limit(grid: &Arc<RadialGrid>, a: f64, mu: f64, p: f64) -> Result<Self> {
        let n = grid.len();
        Self::new(Arc::clone(grid), 1.0, vec![a; n], vec![mu; n], p)
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.grid
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    pub fn stiffness(&self) -> f64 {
        self.stiffness
    }

    /// `D(u)`, the discrete `∫|∇u|²` for radial `u`.
    pub fn dirichlet(&self, u: &[f64]) -> f64 {
        self.edge.iter().enumerate().map(|(i, c)| c * (u[i + 1] - u[i]).powi(2)).sum()
    }

    pub fn potential_energy(&self, u: &[f64]) -> f64 {
        let w = self.grid.weights();
        (0..u.len()).map(|i| w[i] * self.potential[i] * u[i] * u[i]).sum()
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        self.stiffness * self.dirichlet(u) + self.potential_energy(u)
    }

    pub fn p_integral(&self, u: &[f64], mode: PowerMode) -> f64 {
        let w = self.grid.weights();
        (0..u.len()).map(|i| w[i] * self.weight[i] * mode.pow(u[i], self.p)).sum()
    }

    pub fn energy(&self, u: &[f64]) -> f64 {
        0.5 * self.norm_sq(u) - self.p_integral(u, PowerMode::PositivePart) / self.p
    }

    pub fn quotient(&self, u: &[f64], mode: PowerMode) -> Result<f64> {
        let denom = self.p_integral(u, mode);
        if !(denom > 0.0) {
            return Err(Error::ZeroDenominator("nonlinear integral vanishes".into()));
        }
        Ok(self.norm_sq(u) / denom.powf(2.0 / self.p))
    }

    /// `L u`.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let w = self.grid.weights();
        let s = self.stiffness;
        let n = u.len();
        let mut out: Vec<f64> = (0..n).map(|i| w[i] * self.potential[i] * u[i]).collect();
        for (i, c) in self.edge.iter().enumerate() {
            let flux = s * c * (u[i + 1] - u[i]);
            out[i] -= flux;
            out[i + 1] += flux;
        }
        out
    }

    /// Solves `L x = rhs` by the Thomas algorithm.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = rhs.len();
        let w = self.grid.weights();
        let s = self.stiffness;
        let mut diag: Vec<f64> = (0..n).map(|i| w[i] * self.potential[i]).collect();
        for (i, c) in self.edge.iter().enumerate() {
            diag[i] += s * c;
            diag[i + 1] += s * c;
        }
        let off: Vec<f64> = self.edge.iter().map(|c| -s * c).collect();
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        let mut m = diag[0];
        if !(m > 0.0) {
            return Err(Error::ZeroDenominator("quadratic form is not positive definite".into()));
        }
        cp[0] = if n > 1 { off[0] / m } else { 0.0 };
        dp[0] = rhs[0] / m;
        for i in 1..n {
            m = diag[i] - off[i - 1] * cp[i - 1];
            if !(m > 0.0) {
                return Err(Error::ZeroDenominator(
                    "quadratic form is not positive definite".into(),
                ));
            }
            if i < n - 1 {
                cp[i] = off[i] / m;
            }
            dp[i] = (rhs[i] - off[i - 1] * dp[i - 1]) / m;
        }
        let mut x = dp;
        for i in (0..n - 1).rev() {
            x[i] -= cp[i] * x[i + 1];
        }
        Ok(x)
    }

    /// `w_i k_i (u_i⁺)^{p-1}`, the nodal derivative of the nonlinear term.
    pub fn nonlinear_load(&self, u: &[f64]) -> Vec<f64> {
        let w = self.grid.weights();
        (0..u.len()).map(|i| w[i] * self.weight[i] * u[i].max(0.0).powf(self.p - 1.0)).collect()
    }

    /// Riesz representative of `J'(u)` in the weighted pairing `Σ w f g`.
    pub fn gradient(&self, u: &[f64]) -> Vec<f64> {
        let w = self.grid.weights();
        let lu = self.apply(u);
        let load = self.nonlinear_load(u);
        (0..u.len()).map(|i| (lu[i] - load[i]) / w[i]).collect()
    }

    /// `sqrt(Σ w g²)`.
    pub fn pairing_norm(&self, g: &[f64]) -> f64 {
        let w = self.grid.weights();
        g.iter().zip(w).map(|(g, w)| w * g * g).sum::<f64>().sqrt()
    }
}

fn check_field(u: &RadialField, params: &ProblemParams) -> Result<()> {
    if u.grid.dim() != params.dim {
        return Err(Error::Grid(format!(
            "grid dimension {} differs from N = {}",
            u.grid.dim(),
            params.dim
        )));
    }
    u.check_finite()
}

pub fn norm_a_sq(
    params: &ProblemParams,
    pot: &PotentialPair,
    u: &RadialField,
) -> Result<EnergyBreakdown> {
    check_field(u, params)?;
    let form = RadialForm::transformed(params, pot, &u.grid)?;
    let d = form.dirichlet(&u.vals);
    Ok(EnergyBreakdown::assemble(
        d,
        params.kappa * d,
        form.potential_energy(&u.vals),
        form.p_integral(&u.vals, PowerMode::PositivePart),
        params.p,
    ))
}

fn check_unit(theta: &[f64]) -> Result<()> {
    let n: f64 = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    if theta.len() != 3 || (n - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("theta must be a unit 3-vector (|theta| = {n})")));
    }
    Ok(())
}

/// `‖u‖²_θ` on a tensor grid, with `μ ∫(u⁺)^p` as the nonlinear part.
pub fn norm_theta_sq(
    params: &ProblemParams,
    u: &TensorField,
    theta: &[f64],
) -> Result<EnergyBreakdown> {
    check_unit(theta)?;
    u.check_finite()?;
    let grads = gradient_tensor(u)?;
    let dv = u.grid.cell_volume();
    let mut dirichlet = 0.0;
    let mut directional = 0.0;
    for idx in 0..u.vals.len() {
        let g = [grads[0].vals[idx], grads[1].vals[idx], grads[2].vals[idx]];
        dirichlet += g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
        let tg = theta[0] * g[0] + theta[1] * g[1] + theta[2] * g[2];
        directional += tg * tg;
    }
    let potential = params.a * u.integrate_map(|v| v * v);
    let nonlinear = params.mu * u.integrate_map(|v| v.max(0.0).powf(params.p));
    Ok(EnergyBreakdown::assemble(
        dirichlet * dv,
        params.kappa * directional * dv,
        potential,
        nonlinear,
        params.p,
    ))
}

/// `∫ W (u⁺)^p` or `∫ W |u|^p` with `W = K*` (`use_kstar`) or `W = μ`.
pub fn weighted_p_integral(
    params: &ProblemParams,
    pot: &PotentialPair,
    u: &RadialField,
    use_kstar: bool,
    mode: PowerMode,
) -> Result<f64> {
    check_field(u, params)?;
    let w = u.grid.weights();
    let r = u.grid.radii();
    let mut sum = 0.0;
    for i in 0..u.vals.len() {
        let weight = if use_kstar { k_star(params, pot, r[i])? } else { params.mu };
        sum += w[i] * weight * mode.pow(u.vals[i], params.p);
    }
    Ok(sum)
}

pub fn j_value(params: &ProblemParams, pot: &PotentialPair, u: &RadialField) -> Result<f64> {
    Ok(norm_a_sq(params, pot, u)?.j_value)
}

pub fn j_theta_value(params: &ProblemParams, u: &TensorField, theta: &[f64]) -> Result<f64> {
    Ok(norm_theta_sq(params, u, theta)?.j_value)
}

pub fn j_gradient(
    params: &ProblemParams,
    pot: &PotentialPair,
    u: &RadialField,
) -> Result<RadialField> {
    check_field(u, params)?;
    let form = RadialForm::transformed(params, pot, &u.grid)?;
    RadialField::new(Arc::clone(&u.grid), form.gradient(&u.vals))
}

/// `‖u‖²_A / (∫K*|u|^p)^{2/p}`.
pub fn quotient_a(params: &ProblemParams, pot: &PotentialPair, u: &RadialField) -> Result<f64> {
    check_field(u, params)?;
    RadialForm::transformed(params, pot, &u.grid)?.quotient(&u.vals, PowerMode::Absolute)
}

/// `(∫|∇u|² + a∫u²) / (∫|u|^p)^{2/p}`.
pub fn quotient_p(params: &ProblemParams, u: &RadialField) -> Result<f64> {
    check_field(u, params)?;
    RadialForm::isotropic(&u.grid, params.a, params.p)?.quotient(&u.vals, PowerMode::Absolute)
}

/// Maximum of `t ↦ t² A/2 - t^p B/p` over `t ≥ 0`: returns `(t*, level)`.
pub fn ray_max(norm_sq: f64, p_integral: f64, p: f64) -> Result<(f64, f64)> {
    if !(norm_sq > 0.0 && p_integral > 0.0) {
        return Err(Error::Domain(format!(
            "ray maximum needs positive inputs (norm_sq = {norm_sq}, p_integral = {p_integral})"
        )));
    }
    if !(p > 2.0) {
        return Err(Error::Domain(format!("ray maximum needs p > 2 (p = {p})")));
    }
    let t_star = (norm_sq / p_integral).powf(1.0 / (p - 2.0));
    let level = (0.5 - 1.0 / p) * (norm_sq / p_integral.powf(2.0 / p)).powf(p / (p - 2.0));
    Ok((t_star, level))
}
