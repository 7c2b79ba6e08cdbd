//! The change of variables `y = |x|^{-b/2} x` and the matching field transform
//! `u(x) = |x|^{-b(N-2)/4} v(y)`.
//!
//! Under this map the Laplacian of `u` becomes a divergence-form operator in
//! `y` with matrix `A(y) = I + kappa yyᵀ/|y|^2` plus an inverse-square term.
//! [`laplacian_identity_residual`] checks that identity pointwise by finite differences.

use crate::error::{Error, Result};
use crate::problem::ProblemParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSpec {
    pub b: f64,
    pub dim: usize,
}

impl TransformSpec {
    pub fn new(b: f64, dim: usize) -> Result<Self> {
        if !(b < 2.0) || b == 0.0 || !b.is_finite() {
            return Err(Error::Param(format!("transform needs b < 2, b != 0 (b = {b})")));
        }
        if dim < 3 {
            return Err(Error::Param(format!("transform needs N >= 3 (N = {dim})")));
        }
        Ok(TransformSpec { b, dim })
    }

    pub fn from_params(params: &ProblemParams) -> Self {
        TransformSpec { b: params.b, dim: params.dim }
    }

    /// Exponent of the field prefactor, `-b(N-2)/4`.
    pub fn field_exponent(&self) -> f64 {
        -self.b * (self.dim as f64 - 2.0) / 4.0
    }

    /// `|y|` as a function of `|x|`.
    pub fn forward_radius(&self, r: f64) -> f64 {
        r.powf(1.0 - self.b / 2.0)
    }

    /// `|x|` as a function of `|y|`.
    pub fn inverse_radius(&self, rho: f64) -> f64 {
        rho.powf(2.0 / (2.0 - self.b))
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn nonzero_norm(x: &[f64], what: &str) -> Result<f64> {
    let n = norm(x);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::Domain(format!("{what} requires a nonzero finite point")));
    }
    Ok(n)
}

pub fn forward_map(spec: &TransformSpec, x: &[f64]) -> Result<Vec<f64>> {
    let r = nonzero_norm(x, "forward map")?;
    let scale = r.powf(-spec.b / 2.0);
    Ok(x.iter().map(|v| v * scale).collect())
}

pub fn inverse_map(spec: &TransformSpec, y: &[f64]) -> Result<Vec<f64>> {
    let rho = nonzero_norm(y, "inverse map")?;
    let scale = rho.powf(spec.b / (2.0 - spec.b));
    Ok(y.iter().map(|v| v * scale).collect())
}

/// Density of `dx` with respect to `dy`: `(2/(2-b)) |y|^{bN/(2-b)}`.
pub fn jacobian_factor(spec: &TransformSpec, y: &[f64]) -> Result<f64> {
    let rho = nonzero_norm(y, "jacobian factor")?;
    Ok(radial_jacobian(spec, rho))
}

pub(crate) fn radial_jacobian(spec: &TransformSpec, rho: f64) -> f64 {
    let b = spec.b;
    2.0 / (2.0 - b) * rho.powf(b * spec.dim as f64 / (2.0 - b))
}

/// A smooth test function with exact first and second derivatives.
pub trait AnalyticField: Send + Sync {
    fn value(&self, y: &[f64]) -> f64;
    fn gradient(&self, y: &[f64]) -> Vec<f64>;
    fn hessian(&self, y: &[f64]) -> Vec<Vec<f64>>;
}

/// Radial profiles `f(r)` with closed-form `f'` and `f''`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialProfile {
    Constant(f64),
    /// `exp(-alpha r^2)`
    Gaussian { alpha: f64 },
    /// `r^2 exp(-r^2)`
    QuadraticGaussian,
    /// `e · exp(-1/(1-t^2))` with `t = (r - center)/half_width`, peak value 1.
    Bump { center: f64, half_width: f64 },
    /// `r^power` times [`RadialProfile::Bump`].
    PowerBump { power: f64, center: f64, half_width: f64 },
}

impl RadialProfile {
    /// `(f, f', f'')` at radius `r`.
    pub fn eval(&self, r: f64) -> [f64; 3] {
        match *self {
            RadialProfile::Constant(c) => [c, 0.0, 0.0],
            RadialProfile::Gaussian { alpha } => {
                let e = (-alpha * r * r).exp();
                [e, -2.0 * alpha * r * e, (4.0 * alpha * alpha * r * r - 2.0 * alpha) * e]
            }
            RadialProfile::QuadraticGaussian => {
                let e = (-r * r).exp();
                let r2 = r * r;
                [r2 * e, (2.0 * r - 2.0 * r * r2) * e, (2.0 - 10.0 * r2 + 4.0 * r2 * r2) * e]
            }
            RadialProfile::Bump { center, half_width } => bump(r, center, half_width),
            RadialProfile::PowerBump { power, center, half_width } => {
                let [b0, b1, b2] = bump(r, center, half_width);
                if b0 == 0.0 {
                    return [0.0; 3];
                }
                let m = power;
                let rm = r.powf(m);
                [
                    rm * b0,
                    m * rm / r * b0 + rm * b1,
                    m * (m - 1.0) * rm / (r * r) * b0 + 2.0 * m * rm / r * b1 + rm * b2,
                ]
            }
        }
    }

    /// Support `[lo, hi]` for compactly supported profiles.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            RadialProfile::Bump { center, half_width }
            | RadialProfile::PowerBump { center, half_width, .. } => {
                Some((center - half_width, center + half_width))
            }
            _ => None,
        }
    }
}

fn bump(r: f64, center: f64, half_width: f64) -> [f64; 3] {
    let t = (r - center) / half_width;
    if t.abs() >= 1.0 {
        return [0.0; 3];
    }
    let q = 1.0 - t * t;
    let g1 = -2.0 * t / (q * q);
    let g2 = -2.0 / (q * q) - 8.0 * t * t / (q * q * q);
    let f = (1.0 - 1.0 / q).exp();
    let w = half_width;
    [f, f * g1 / w, f * (g2 + g1 * g1) / (w * w)]
}

/// A radially symmetric [`AnalyticField`] built from a [`RadialProfile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialAnalytic(pub RadialProfile);

impl AnalyticField for RadialAnalytic {
    fn value(&self, y: &[f64]) -> f64 {
        self.0.eval(norm(y))[0]
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let r = norm(y);
        if r == 0.0 {
            return vec![0.0; y.len()];
        }
        let d1 = self.0.eval(r)[1];
        y.iter().map(|v| d1 * v / r).collect()
    }

    fn hessian(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let n = y.len();
        let r = norm(y);
        let [_, d1, d2] = self.0.eval(r);
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let rr = y[i] * y[j] / (r * r);
                h[i][j] = d2 * rr + d1 / r * (delta - rr);
            }
        }
        h
    }
}

/// `exp(-alpha |y - center|^2)`, a non-radial test field.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedGaussian {
    pub center: Vec<f64>,
    pub alpha: f64,
}

impl AnalyticField for ShiftedGaussian {
    fn value(&self, y: &[f64]) -> f64 {
        let d2: f64 = y.iter().zip(&self.center).map(|(a, c)| (a - c) * (a - c)).sum();
        (-self.alpha * d2).exp()
    }

    fn gradient(&self, y: &[f64]) -> Vec<f64> {
        let v = self.value(y);
        y.iter().zip(&self.center).map(|(a, c)| -2.0 * self.alpha * (a - c) * v).collect()
    }

    fn hessian(&self, y: &[f64]) -> Vec<Vec<f64>> {
        let v = self.value(y);
        let n = y.len();
        let al = self.alpha;
        let mut h = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let delta = if i == j { 1.0 } else { 0.0 };
                let di = y[i] - self.center[i];
                let dj = y[j] - self.center[j];
                h[i][j] = (4.0 * al * al * di * dj - 2.0 * al * delta) * v;
            }
        }
        h
    }
}

/// `u(x) = |x|^{-b(N-2)/4} v(forward_map(x))`.
pub fn pull_field(spec: &TransformSpec, v: &dyn AnalyticField, x: &[f64]) -> Result<f64> {
    let r = nonzero_norm(x, "field transform")?;
    let y = forward_map(spec, x)?;
    Ok(r.powf(spec.field_exponent()) * v.value(&y))
}

/// Right-hand side of the transformed Laplacian identity at `y`, i.e.
/// `|y|^{-b(N+2)/(2(2-b))} (div(A ∇v) - C_b v/|y|^2)` with the divergence
/// expanded through the analytic derivative of `A`.
pub fn transformed_laplacian(
    spec: &TransformSpec,
    params: &ProblemParams,
    v: &dyn AnalyticField,
    y: &[f64],
) -> Result<f64> {
    let n = y.len();
    let rho = nonzero_norm(y, "transformed operator")?;
    let rho2 = rho * rho;
    let kappa = params.kappa;
    let grad = v.gradient(y);
    let hess = v.hessian(y);

    let mut div = 0.0;
    for i in 0..n {
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            let a_ij = delta + kappa * y[i] * y[j] / rho2;
            // ∂_j (y_i y_j / |y|^2)
            let da_ij = kappa
                * ((delta * y[j] + y[i]) / rho2 - 2.0 * y[i] * y[j] * y[j] / (rho2 * rho2));
            div += a_ij * hess[i][j] + da_ij * grad[i];
        }
    }
    let b = spec.b;
    let prefactor = rho.powf(-b * (spec.dim as f64 + 2.0) / (2.0 * (2.0 - b)));
    Ok(prefactor * (div - params.c_b * v.value(y) / rho2))
}

/// Pointwise `|Δ_x u - RHS|` where `Δ_x u` uses second-order central
/// differences of [`pull_field`] with step `rel_step · |x|`.
pub fn laplacian_identity_residual(
    spec: &TransformSpec,
    params: &ProblemParams,
    v: &dyn AnalyticField,
    x_samples: &[Vec<f64>],
    rel_step: f64,
) -> Result<Vec<f64>> {
    if !(rel_step > 0.0) {
        return Err(Error::Step(format!("relative step must be positive, got {rel_step}")));
    }
    if rel_step >= 0.5 {
        return Err(Error::Step(format!(
            "relative step {rel_step} lets the stencil reach the origin"
        )));
    }
    x_samples
        .iter()
        .map(|x| {
            let r = nonzero_norm(x, "Laplacian identity sample")?;
            let h = rel_step * r;
            let centre = pull_field(spec, v, x)?;
            let mut lap = 0.0;
            let mut probe = x.clone();
            for i in 0..x.len() {
                probe[i] = x[i] + h;
                let plus = pull_field(spec, v, &probe)?;
                probe[i] = x[i] - h;
                let minus = pull_field(spec, v, &probe)?;
                probe[i] = x[i];
                lap += (plus - 2.0 * centre + minus) / (h * h);
            }
            let y = forward_map(spec, x)?;
            Ok((lap - transformed_laplacian(spec, params, v, &y)?).abs())
        })
        .collect()
}
