//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

/// Ground state of `W'' + (2/r)W' - W + W³ = 0`, `W'(0) = 0`, by RK4 shooting
/// and bisection on `W(0)`.
pub struct Shooting {
    pub beta: f64,
    pub r: Vec<f64>,
    pub w: Vec<f64>,
    pub dw: Vec<f64>,
}

enum Fate {
    Crossed,
    TurnedUp,
    Undecided,
}

const H: f64 = 1e-3;
const R_END: f64 = 30.0;

fn rhs(r: f64, w: f64, dw: f64) -> (f64, f64) {
    (dw, -2.0 / r * dw + w - w * w * w)
}

fn shoot(beta: f64, keep: bool) -> (Fate, Vec<f64>, Vec<f64>, Vec<f64>) {
    // Series start avoids the 1/r singularity.
    let r0 = 1e-4;
    let c = (beta - beta.powi(3)) / 6.0;
    let (mut r, mut w, mut dw) = (r0, beta + c * r0 * r0, 2.0 * c * r0);
    let (mut rs, mut ws, mut dws) = (vec![0.0, r], vec![beta, w], vec![0.0, dw]);
    while r < R_END {
        let (k1w, k1d) = rhs(r, w, dw);
        let (k2w, k2d) = rhs(r + H / 2.0, w + H / 2.0 * k1w, dw + H / 2.0 * k1d);
        let (k3w, k3d) = rhs(r + H / 2.0, w + H / 2.0 * k2w, dw + H / 2.0 * k2d);
        let (k4w, k4d) = rhs(r + H, w + H * k3w, dw + H * k3d);
        w += H / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        dw += H / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        r += H;
        if w < 0.0 {
            return (Fate::Crossed, rs, ws, dws);
        }
        if dw > 0.0 {
            return (Fate::TurnedUp, rs, ws, dws);
        }
        if keep {
            rs.push(r);
            ws.push(w);
            dws.push(dw);
        }
    }
    (Fate::Undecided, rs, ws, dws)
}

impl Shooting {
    pub fn solve() -> Self {
        let (mut lo, mut hi) = (3.0, 6.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            match shoot(mid, false).0 {
                Fate::Crossed => hi = mid,
                Fate::TurnedUp => lo = mid,
                Fate::Undecided => break,
            }
        }
        let beta = 0.5 * (lo + hi);
        let (_, r, w, dw) = shoot(beta, true);
        Shooting { beta, r, w, dw }
    }

    /// `4π ∫ f r² dr` by the trapezoid rule on the shooting mesh.
    fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let g: Vec<f64> = (0..self.r.len())
            .map(|i| f(self.w[i], self.dw[i]) * self.r[i] * self.r[i])
            .collect();
        let mut s = 0.0;
        for i in 1..g.len() {
            s += 0.5 * (g[i] + g[i - 1]) * (self.r[i] - self.r[i - 1]);
        }
        4.0 * std::f64::consts::PI * s
    }

    /// `S_p = (‖∇W‖² + ‖W‖²) / (∫W⁴)^{1/2}` for `p = 4`.
    pub fn sobolev_constant(&self) -> f64 {
        let q = self.integrate(|w, dw| dw * dw + w * w);
        let m = self.integrate(|w, _| w.powi(4));
        q / m.sqrt()
    }

    /// `(∫W⁴)^{1/2}`; equals `S_p` at an exact solution.
    pub fn nehari_mass_root(&self) -> f64 {
        self.integrate(|w, _| w.powi(4)).sqrt()
    }
}
