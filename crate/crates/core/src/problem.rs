//! Problem parameters, potential profiles and their transformed counterparts.
//!
//! The equation is `-Δu + V(x)u = K(x)|u|^{p-2}u` in `R^N` with
//! `|x|^b V(x) → a` and `|x|^s K(x) → mu` at infinity. Everything downstream
//! works with the transformed potentials `V*`, `K*` evaluated on radii.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Validated parameters together with the derived exponent and constants.
///
/// `kappa` and `c_b` are computed once here; every other module reads them
/// from this struct instead of re-deriving them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemParams {
    pub dim: usize,
    pub a: f64,
    pub b: f64,
    pub s: f64,
    pub mu: f64,
    /// Critical exponent `2(N - 2s/b)/(N - 2)`.
    pub p: f64,
    /// Inverse-square coefficient `(b/4)(1 - b/4)(N-2)^2`.
    pub c_b: f64,
    /// Rank-one anisotropy strength `b^2/4 - b`.
    pub kappa: f64,
}

impl ProblemParams {
    /// `1 + kappa`, which equals `(1 - b/2)^2`.
    pub fn radial_stiffness(&self) -> f64 {
        1.0 + self.kappa
    }

    /// Upper end of the subcritical range, `2N/(N-2)`.
    pub fn sobolev_exponent(&self) -> f64 {
        2.0 * self.dim as f64 / (self.dim as f64 - 2.0)
    }

    /// True in the vanishing-potential regime `0 < b < 2`.
    pub fn is_vanishing(&self) -> bool {
        self.b > 0.0
    }
}

pub fn validate_params(dim: usize, a: f64, b: f64, s: f64, mu: f64) -> Result<ProblemParams> {
    if dim < 3 {
        return Err(Error::Param(format!("N >= 3 required, got N = {dim}")));
    }
    for (name, v) in [("a", a), ("b", b), ("s", s), ("mu", mu)] {
        if !v.is_finite() {
            return Err(Error::Param(format!("{name} must be finite, got {v}")));
        }
    }
    if b == 0.0 {
        return Err(Error::Param("constraint b != 0 violated (b = 0)".into()));
    }
    if b >= 2.0 {
        return Err(Error::Param(format!("constraint b < 2 violated (b = {b})")));
    }
    let ratio = s / b;
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Param(format!(
            "constraint 0 < s/b < 1 violated (s/b = {ratio})"
        )));
    }
    if a <= 0.0 {
        return Err(Error::Param(format!("constraint a > 0 violated (a = {a})")));
    }
    if mu <= 0.0 {
        return Err(Error::Param(format!("constraint mu > 0 violated (mu = {mu})")));
    }

    let n = dim as f64;
    let p = 2.0 * (n - 2.0 * ratio) / (n - 2.0);
    let c_b = (b / 4.0) * (1.0 - b / 4.0) * (n - 2.0).powi(2);
    let kappa = b * b / 4.0 - b;

    let params = ProblemParams { dim, a, b, s, mu, p, c_b, kappa };
    let p_star = params.sobolev_exponent();
    if !(p > 2.0 && p < p_star) {
        return Err(Error::Param(format!(
            "derived exponent p = {p} outside (2, {p_star})"
        )));
    }
    Ok(params)
}

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Declared asymptotic limits of a user-supplied potential pair.
///
/// The values are not checked symbolically; [`PotentialPair::limit_diagnostics`]
/// compares them against samples at a large radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticCertificate {
    /// Claimed `lim r^b V(r)`.
    pub v_limit: f64,
    /// Claimed `lim r^s K(r)`.
    pub k_limit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    Model,
    Custom,
}

#[derive(Clone)]
enum Profiles {
    Model { a: f64, b: f64, s: f64, mu: f64 },
    Custom { v: Profile, k: Profile, certificate: AsymptoticCertificate },
}

/// Radial evaluators `r ↦ V(r)` and `r ↦ K(r)`.
#[derive(Clone)]
pub struct PotentialPair {
    profiles: Profiles,
}

impl fmt::Debug for PotentialPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.profiles {
            Profiles::Model { a, b, s, mu } => f
                .debug_struct("PotentialPair::Model")
                .field("a", a)
                .field("b", b)
                .field("s", s)
                .field("mu", mu)
                .finish(),
            Profiles::Custom { certificate, .. } => f
                .debug_struct("PotentialPair::Custom")
                .field("certificate", certificate)
                .finish_non_exhaustive(),
        }
    }
}

impl PotentialPair {
    /// Wraps user-supplied radial profiles. Both must be positive on `[0, ∞)`.
    pub fn custom<V, K>(v: V, k: K, certificate: AsymptoticCertificate) -> Self
    where
        V: Fn(f64) -> f64 + Send + Sync + 'static,
        K: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        PotentialPair {
            profiles: Profiles::Custom { v: Arc::new(v), k: Arc::new(k), certificate },
        }
    }

    pub fn kind(&self) -> PotentialKind {
        match self.profiles {
            Profiles::Model { .. } => PotentialKind::Model,
            Profiles::Custom { .. } => PotentialKind::Custom,
        }
    }

    pub fn v(&self, r: f64) -> f64 {
        match &self.profiles {
            Profiles::Model { a, b, .. } => a / (1.0 + r).powf(*b),
            Profiles::Custom { v, .. } => v(r),
        }
    }

    pub fn k(&self, r: f64) -> f64 {
        match &self.profiles {
            Profiles::Model { s, mu, .. } => mu / (1.0 + r).powf(*s),
            Profiles::Custom { k, .. } => k(r),
        }
    }

    /// Sampled `(r^b V(r), r^s K(r))` at `radius` next to the declared limits.
    pub fn limit_diagnostics(&self, params: &ProblemParams, radius: f64) -> [(f64, f64); 2] {
        let sampled_v = radius.powf(params.b) * self.v(radius);
        let sampled_k = radius.powf(params.s) * self.k(radius);
        let (dv, dk) = match &self.profiles {
            Profiles::Model { a, mu, .. } => (*a, *mu),
            Profiles::Custom { certificate, .. } => (certificate.v_limit, certificate.k_limit),
        };
        [(sampled_v, dv), (sampled_k, dk)]
    }
}

/// The model family `V = a/(1+r)^b`, `K = mu/(1+r)^s`.
pub fn model_potentials(params: &ProblemParams) -> PotentialPair {
    PotentialPair {
        profiles: Profiles::Model { a: params.a, b: params.b, s: params.s, mu: params.mu },
    }
}

/// `V*(rho) = rho^{2b/(2-b)} V(rho^{2/(2-b)}) + C_b rho^{-2}`.
pub fn v_star(params: &ProblemParams, pot: &PotentialPair, rho: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Domain(format!("V* is singular at rho = {rho}; need rho > 0")));
    }
    let b = params.b;
    let outer = rho.powf(2.0 / (2.0 - b));
    Ok(rho.powf(2.0 * b / (2.0 - b)) * pot.v(outer) + params.c_b / (rho * rho))
}

/// `K*(rho) = rho^{2s/(2-b)} K(rho^{2/(2-b)})`, extended by 0 at the origin
/// when `0 < b < 2`.
pub fn k_star(params: &ProblemParams, pot: &PotentialPair, rho: f64) -> Result<f64> {
    let b = params.b;
    if rho == 0.0 && b > 0.0 {
        return Ok(0.0);
    }
    if !(rho > 0.0) {
        return Err(Error::Domain(format!(
            "K* is singular at rho = {rho} for b = {b} < 0"
        )));
    }
    let outer = rho.powf(2.0 / (2.0 - b));
    Ok(rho.powf(2.0 * params.s / (2.0 - b)) * pot.k(outer))
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `A(y) g = g + kappa (y·g) y / |y|^2`.
pub fn anisotropy_apply(kappa: f64, y: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    if y.len() != g.len() {
        return Err(Error::Domain(format!(
            "dimension mismatch: |y| has {} components, g has {}",
            y.len(),
            g.len()
        )));
    }
    let yy = dot(y, y);
    if yy == 0.0 {
        return Err(Error::Domain("A(y) is undefined at y = 0".into()));
    }
    let c = kappa * dot(y, g) / yy;
    Ok(g.iter().zip(y).map(|(gi, yi)| gi + c * yi).collect())
}

/// `B(theta) g = g + kappa (theta·g) theta` for a unit vector `theta`.
pub fn b_theta_apply(kappa: f64, theta: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    if theta.len() != g.len() {
        return Err(Error::Domain("dimension mismatch between theta and g".into()));
    }
    let norm = dot(theta, theta).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("theta must be a unit vector, |theta| = {norm}")));
    }
    let c = kappa * dot(theta, g);
    Ok(g.iter().zip(theta).map(|(gi, ti)| gi + c * ti).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> ProblemParams {
        validate_params(3, 1.0, 1.0, 0.5, 1.0).unwrap()
    }

    #[test]
    fn derived_constants_for_model() {
        let p = model();
        assert!((p.p - 4.0).abs() < 1e-15);
        assert!((p.c_b - 3.0 / 16.0).abs() < 1e-15);
        assert!((p.kappa + 0.75).abs() < 1e-15);
    }

    #[test]
    fn coercive_branch_exponent() {
        let p = validate_params(3, 1.0, -2.0, -1.0, 1.0).unwrap();
        assert!((p.p - 4.0).abs() < 1e-15);
        assert!(p.c_b < 0.0);
    }

    #[test]
    fn rejects_each_constraint() {
        let cases = [
            (3, 1.0, 0.0, 0.1, 1.0, "b != 0"),
            (3, 1.0, 2.0, 1.0, 1.0, "b < 2"),
            (3, 1.0, 1.0, 1.5, 1.0, "0 < s/b < 1"),
            (3, 1.0, 1.0, -0.5, 1.0, "0 < s/b < 1"),
            (2, 1.0, 1.0, 0.5, 1.0, "N >= 3"),
            (3, 0.0, 1.0, 0.5, 1.0, "a > 0"),
            (3, 1.0, 1.0, 0.5, -1.0, "mu > 0"),
        ];
        for (n, a, b, s, mu, needle) in cases {
            match validate_params(n, a, b, s, mu) {
                Err(Error::Param(msg)) => assert!(msg.contains(needle), "{msg} vs {needle}"),
                other => panic!("expected ParamError for {needle}, got {other:?}"),
            }
        }
    }

    #[test]
    fn model_values() {
        let params = model();
        let pot = model_potentials(&params);
        assert_eq!(pot.kind(), PotentialKind::Model);
        assert_eq!(pot.v(0.0), 1.0);
        assert!((pot.v(1.0) - 0.5).abs() < 1e-15);
        let p2 = validate_params(3, 1.0, 1.0, 0.5, 2.0).unwrap();
        assert!((model_potentials(&p2).k(3.0) - 1.0).abs() < 1e-15);
        let r: f64 = 1e6;
        assert!((r.powf(params.b) * pot.v(r) - params.a).abs() < 1e-5);
    }

    #[test]
    fn v_star_values() {
        let params = model();
        let pot = model_potentials(&params);
        assert!((v_star(&params, &pot, 1.0).unwrap() - 11.0 / 16.0).abs() < 1e-15);
        assert!((v_star(&params, &pot, 1e4).unwrap() - 1.0).abs() < 1e-3);
        let rho: f64 = 1e-2;
        let expected = 1875.0 + rho * rho * pot.v(rho * rho);
        let got = v_star(&params, &pot, rho).unwrap();
        assert!((got - expected).abs() / expected < 1e-12);
        assert!(matches!(v_star(&params, &pot, 0.0), Err(Error::Domain(_))));
        assert!(matches!(v_star(&params, &pot, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn k_star_values() {
        let params = model();
        let pot = model_potentials(&params);
        assert!((k_star(&params, &pot, 1.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((k_star(&params, &pot, 1e4).unwrap() - 1.0).abs() < 1e-3);
        assert_eq!(k_star(&params, &pot, 0.0).unwrap(), 0.0);

        let coercive = validate_params(3, 1.0, -2.0, -1.0, 1.0).unwrap();
        let cpot = model_potentials(&coercive);
        let got = k_star(&coercive, &cpot, 1e-4).unwrap();
        assert!((got - 100.0 * cpot.k(0.01)).abs() < 1e-9);
        assert!(matches!(k_star(&coercive, &cpot, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn custom_pair_reports_certificate() {
        let params = model();
        let pot = PotentialPair::custom(
            |r| 1.0 / (1.0 + r * r).sqrt(),
            |r| 1.0 / (1.0 + r).sqrt(),
            AsymptoticCertificate { v_limit: 1.0, k_limit: 1.0 },
        );
        assert_eq!(pot.kind(), PotentialKind::Custom);
        let [(sv, dv), (sk, dk)] = pot.limit_diagnostics(&params, 1e8);
        assert!((sv - dv).abs() < 1e-6 && (sk - dk).abs() < 1e-4);
    }

    #[test]
    fn anisotropy_examples() {
        let out = anisotropy_apply(-0.75, &[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]).unwrap();
        assert!((out[0] - 0.25).abs() < 1e-15 && out[1] == 0.0 && out[2] == 0.0);
        let g = [0.0, 2.0, -1.0];
        assert_eq!(anisotropy_apply(3.3, &[5.0, 0.0, 0.0], &g).unwrap(), g.to_vec());
        assert!(matches!(
            anisotropy_apply(1.0, &[0.0; 3], &[1.0; 3]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn b_theta_examples() {
        let out = b_theta_apply(-0.75, &[1.0, 0.0, 0.0], &[2.0, 1.0, 0.0]).unwrap();
        assert_eq!(out, vec![0.5, 1.0, 0.0]);
        assert!(matches!(
            b_theta_apply(1.0, &[1.0, 1.0, 0.0], &[1.0; 3]),
            Err(Error::Domain(_))
        ));
        let theta = [0.6, 0.8, 0.0];
        let g = [0.3, -1.2, 2.0];
        let lhs = b_theta_apply(-0.4, &theta, &g).unwrap();
        let rhs = anisotropy_apply(-0.4, &theta, &g).unwrap();
        for (x, y) in lhs.iter().zip(&rhs) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn anisotropy_eigenvalues_on_frame() {
        for b in [1.0, 0.5, 1.9, -1.0, -3.0] {
            let params = validate_params(3, 1.0, b, b / 2.0, 1.0).unwrap();
            let y = [1.0, 2.0, 2.0];
            let e1 = [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0];
            let e2 = [2.0 / 3.0, 1.0 / 3.0, -2.0 / 3.0];
            let e3 = [2.0 / 3.0, -2.0 / 3.0, 1.0 / 3.0];
            let lam = (1.0 - b / 2.0).powi(2);
            assert!((params.radial_stiffness() - lam).abs() < 1e-14);
            for (e, expect) in [(e1, lam), (e2, 1.0), (e3, 1.0)] {
                let out = anisotropy_apply(params.kappa, &y, &e).unwrap();
                for i in 0..3 {
                    assert!((out[i] - expect * e[i]).abs() < 1e-14);
                }
            }
        }
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn exponent_is_strictly_subcritical(dim in 3usize..8, b in -6.0f64..1.99, frac in 0.01f64..0.99) {
            prop_assume!(b.abs() > 1e-3);
            let params = validate_params(dim, 1.0, b, frac * b, 1.0).unwrap();
            prop_assert!(params.p > 2.0 && params.p < params.sobolev_exponent());
            let lam = (1.0 - b / 2.0).powi(2);
            prop_assert!((params.radial_stiffness() - lam).abs() <= 1e-12 * lam.max(1.0));
        }

        #[test]
        fn quadratic_form_matches_double_loop(
            kappa in -1.0f64..5.0,
            y in prop::array::uniform3(-3.0f64..3.0),
            g in prop::array::uniform3(-3.0f64..3.0),
        ) {
            let yy: f64 = y.iter().map(|v| v * v).sum();
            prop_assume!(yy > 1e-6);
            let ag = anisotropy_apply(kappa, &y, &g).unwrap();
            let form: f64 = g.iter().zip(&ag).map(|(a, b)| a * b).sum();
            let mut brute = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    let delta = if i == j { 1.0 } else { 0.0 };
                    brute += (delta + kappa * y[i] * y[j] / yy) * g[i] * g[j];
                }
            }
            prop_assert!((form - brute).abs() <= 1e-12 * (1.0 + brute.abs()));
        }

        #[test]
        fn transformed_potentials_approach_limits(b in 0.2f64..1.9, frac in 0.1f64..0.9) {
            let params = validate_params(3, 1.0, b, frac * b, 1.0).unwrap();
            let pot = model_potentials(&params);
            for rho in [1e3f64, 1e4] {
                let tol = 10.0 * rho.powf(-(b.abs().min(params.s.abs()).min(2.0)));
                prop_assert!((v_star(&params, &pot, rho).unwrap() - params.a).abs() < tol);
                prop_assert!((k_star(&params, &pot, rho).unwrap() - params.mu).abs() < tol);
            }
            for rho in [1e-3, 0.5, 1.0, 7.0] {
                prop_assert!(v_star(&params, &pot, rho).unwrap() > 0.0);
            }
        }
    }
}
