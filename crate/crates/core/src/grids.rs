//! Radial and Cartesian discretizations.
//!
//! Radial grids carry composite-trapezoid weights that already include the
//! surface factor `ω_{N-1} r^{N-1}`, so `Σ f_i w_i` approximates `∫_{R^N} f dx`
//! for radial `f` supported in `[r_min, r_max]`. Tensor grids are cell-centred
//! lattices on `[-L, L]^3` with no node at the origin.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::output::fmt_sig;

/// Minimum number of radial nodes.
pub const MIN_RADIAL_NODES: usize = 16;
/// Largest supported tensor lattice per axis.
pub const MAX_TENSOR_NODES: usize = 128;

/// Surface area `ω_{N-1} = 2π^{N/2}/Γ(N/2)` of the unit sphere in `R^N`.
pub fn unit_sphere_area(dim: usize) -> f64 {
    // Γ(N/2) by recurrence from Γ(1) = 1 or Γ(1/2) = √π
    let mut gamma = if dim.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if dim.is_multiple_of(2) { 1.0 } else { 0.5 };
    let target = dim as f64 / 2.0;
    while x < target - 1e-12 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(target) / gamma
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Uniform,
    /// Geometric spacing, clustered near `r_min`.
    Graded,
}

impl std::str::FromStr for Spacing {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(Spacing::Uniform),
            "graded" => Ok(Spacing::Graded),
            other => Err(Error::Grid(format!("unknown spacing '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: usize,
    spacing: Spacing,
    r: Vec<f64>,
    w: Vec<f64>,
}

impl RadialGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> Spacing {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn r_min(&self) -> f64 {
        self.r[0]
    }

    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    pub fn omega(&self) -> f64 {
        unit_sphere_area(self.dim)
    }

    /// Linear interpolation of nodal values at `r`; zero outside the grid.
    pub fn interpolate(&self, vals: &[f64], r: f64) -> f64 {
        let n = self.r.len();
        if !(r >= self.r[0] && r <= self.r[n - 1]) {
            return 0.0;
        }
        let idx = self.r.partition_point(|&x| x <= r);
        if idx >= n {
            return vals[n - 1];
        }
        let i = idx - 1;
        let t = (r - self.r[i]) / (self.r[i + 1] - self.r[i]);
        vals[i] * (1.0 - t) + vals[i + 1] * t
    }

    /// Samples `f` at every node.
    pub fn sample(self: &Arc<Self>, f: impl Fn(f64) -> f64) -> RadialField {
        RadialField { grid: Arc::clone(self), vals: self.r.iter().map(|&r| f(r)).collect() }
    }
}

pub fn make_radial_grid(
    dim: usize,
    r_min: f64,
    r_max: f64,
    nodes: usize,
    spacing: Spacing,
) -> Result<Arc<RadialGrid>> {
    if dim < 3 {
        return Err(Error::Grid(format!("dimension {dim} < 3")));
    }
    if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
        return Err(Error::Grid(format!("need 0 < r_min < r_max, got [{r_min}, {r_max}]")));
    }
    if nodes < MIN_RADIAL_NODES {
        return Err(Error::Grid(format!("need at least {MIN_RADIAL_NODES} nodes, got {nodes}")));
    }
    let last = (nodes - 1) as f64;
    let r: Vec<f64> = match spacing {
        Spacing::Uniform => (0..nodes)
            .map(|i| r_min + (r_max - r_min) * i as f64 / last)
            .collect(),
        Spacing::Graded => {
            let ratio = (r_max / r_min).ln();
            (0..nodes).map(|i| r_min * (ratio * i as f64 / last).exp()).collect()
        }
    };
    let omega = unit_sphere_area(dim);
    let w = (0..nodes)
        .map(|i| {
            let left = if i > 0 { r[i] - r[i - 1] } else { 0.0 };
            let right = if i + 1 < nodes { r[i + 1] - r[i] } else { 0.0 };
            omega * r[i].powi(dim as i32 - 1) * 0.5 * (left + right)
        })
        .collect();
    Ok(Arc::new(RadialGrid { dim, spacing, r, w }))
}

/// Nodal values of a radial function.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: Arc<RadialGrid>,
    pub vals: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: Arc<RadialGrid>, vals: Vec<f64>) -> Result<Self> {
        if vals.len() != grid.len() {
            return Err(Error::Grid(format!(
                "field has {} values for {} nodes",
                vals.len(),
                grid.len()
            )));
        }
        Ok(RadialField { grid, vals })
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let n = grid.len();
        RadialField { grid, vals: vec![0.0; n] }
    }

    /// Index of the first non-finite value, if any.
    pub fn check_finite(&self) -> Result<()> {
        match self.vals.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    pub fn scaled(&self, t: f64) -> RadialField {
        RadialField { grid: Arc::clone(&self.grid), vals: self.vals.iter().map(|v| t * v).collect() }
    }

    /// `self + t * other`.
    pub fn axpy(&self, t: f64, other: &RadialField) -> RadialField {
        let vals = self.vals.iter().zip(&other.vals).map(|(a, b)| a + t * b).collect();
        RadialField { grid: Arc::clone(&self.grid), vals }
    }

    /// Weighted L² pairing `Σ w_i f_i g_i`.
    pub fn pairing(&self, other: &RadialField) -> f64 {
        self.grid
            .weights()
            .iter()
            .zip(self.vals.iter().zip(&other.vals))
            .map(|(w, (a, b))| w * a * b)
            .sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.pairing(self).sqrt()
    }

    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("r,value\n");
        for (r, v) in self.grid.radii().iter().zip(&self.vals) {
            let _ = writeln!(out, "{},{}", fmt_sig(*r, digits), fmt_sig(*v, digits));
        }
        out
    }
}

/// Second-order central differences, one-sided at both ends.
pub fn radial_derivative(f: &RadialField) -> Result<RadialField> {
    let r = f.grid.radii();
    let u = &f.vals;
    let n = r.len();
    if n < 3 {
        return Err(Error::Grid("derivative needs at least 3 nodes".into()));
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let hm = r[i] - r[i - 1];
        let hp = r[i + 1] - r[i];
        d[i] = -hp / (hm * (hm + hp)) * u[i - 1] + (hp - hm) / (hm * hp) * u[i]
            + hm / (hp * (hm + hp)) * u[i + 1];
    }
    let (h0, h1) = (r[1] - r[0], r[2] - r[1]);
    d[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * u[0] + (h0 + h1) / (h0 * h1) * u[1]
        - h0 / (h1 * (h0 + h1)) * u[2];
    let (h0, h1) = (r[n - 1] - r[n - 2], r[n - 2] - r[n - 3]);
    d[n - 1] = (2.0 * h0 + h1) / (h0 * (h0 + h1)) * u[n - 1] - (h0 + h1) / (h0 * h1) * u[n - 2]
        + h0 / (h1 * (h0 + h1)) * u[n - 3];
    Ok(RadialField { grid: Arc::clone(&f.grid), vals: d })
}

pub fn integrate_radial(f_vals: &[f64], grid: &RadialGrid) -> Result<f64> {
    if f_vals.len() != grid.len() {
        return Err(Error::Grid(format!(
            "integrand has {} values for {} nodes",
            f_vals.len(),
            grid.len()
        )));
    }
    Ok(f_vals.iter().zip(grid.weights()).map(|(f, w)| f * w).sum())
}

/// Cell-centred lattice on `[-L, L]^3`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    half_width: f64,
    n: usize,
    axis: Vec<f64>,
}

impl TensorGrid {
    pub const DIM: usize = 3;

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        [self.axis[idx / (n * n)], self.axis[(idx / n) % n], self.axis[idx % n]]
    }

    pub fn sample(self: &Arc<Self>, f: impl Fn([f64; 3]) -> f64) -> TensorField {
        let vals = (0..self.len()).map(|idx| f(self.point(idx))).collect();
        TensorField { grid: Arc::clone(self), vals }
    }
}

pub fn make_tensor_grid(dim: usize, half_width: f64, n: usize) -> Result<Arc<TensorGrid>> {
    if dim != TensorGrid::DIM {
        return Err(Error::Grid(format!("tensor grids support N = 3 only, got N = {dim}")));
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(Error::Grid(format!("half width must be positive, got {half_width}")));
    }
    if !n.is_multiple_of(2) {
        return Err(Error::Grid(format!("nodes per axis must be even, got {n}")));
    }
    if !(4..=MAX_TENSOR_NODES).contains(&n) {
        return Err(Error::Grid(format!("nodes per axis must lie in [4, {MAX_TENSOR_NODES}], got {n}")));
    }
    let h = 2.0 * half_width / n as f64;
    let axis = (0..n).map(|k| -half_width + (k as f64 + 0.5) * h).collect();
    Ok(Arc::new(TensorGrid { half_width, n, axis }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TensorField {
    pub grid: Arc<TensorGrid>,
    pub vals: Vec<f64>,
}

impl TensorField {
    pub fn new(grid: Arc<TensorGrid>, vals: Vec<f64>) -> Result<Self> {
        if vals.len() != grid.len() {
            return Err(Error::Grid(format!(
                "field has {} values for {} nodes",
                vals.len(),
                grid.len()
            )));
        }
        Ok(TensorField { grid, vals })
    }

    pub fn check_finite(&self) -> Result<()> {
        match self.vals.iter().position(|v| !v.is_finite()) {
            Some(i) => Err(Error::NonFinite(i)),
            None => Ok(()),
        }
    }

    /// Midpoint-rule integral of `f(value)` over the box.
    pub fn integrate_map(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.vals.iter().map(|&v| f(v)).sum::<f64>() * self.grid.cell_volume()
    }

    pub fn to_csv(&self, digits: usize) -> String {
        let mut out = String::from("x1,x2,x3,value\n");
        for (idx, v) in self.vals.iter().enumerate() {
            let [x, y, z] = self.grid.point(idx);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_sig(x, digits),
                fmt_sig(y, digits),
                fmt_sig(z, digits),
                fmt_sig(*v, digits)
            );
        }
        out
    }
}

/// Per-axis central differences, second-order one-sided at the faces.
pub fn gradient_tensor(f: &TensorField) -> Result<[TensorField; 3]> {
    let g = &f.grid;
    let n = g.nodes_per_axis();
    if n < 4 {
        return Err(Error::Grid("gradient needs at least 4 nodes per axis".into()));
    }
    let h = g.spacing();
    let strides = [n * n, n, 1];
    let mut out: [Vec<f64>; 3] = [vec![0.0; g.len()], vec![0.0; g.len()], vec![0.0; g.len()]];
    for idx in 0..g.len() {
        let coord = [idx / (n * n), (idx / n) % n, idx % n];
        for axis in 0..3 {
            let st = strides[axis];
            let c = coord[axis];
            let v = &f.vals;
            out[axis][idx] = if c == 0 {
                (-3.0 * v[idx] + 4.0 * v[idx + st] - v[idx + 2 * st]) / (2.0 * h)
            } else if c == n - 1 {
                (3.0 * v[idx] - 4.0 * v[idx - st] + v[idx - 2 * st]) / (2.0 * h)
            } else {
                (v[idx + st] - v[idx - st]) / (2.0 * h)
            };
        }
    }
    let [gx, gy, gz] = out;
    Ok([
        TensorField { grid: Arc::clone(g), vals: gx },
        TensorField { grid: Arc::clone(g), vals: gy },
        TensorField { grid: Arc::clone(g), vals: gz },
    ])
}
