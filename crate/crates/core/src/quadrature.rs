//! Product integration of the weakly singular Katugampola kernel.
//!
//! With the substitution `u = s^rho` the fractional integral becomes
//!
//! ```text
//!   I^{alpha;rho} h(t) = rho^{-alpha} / Gamma(alpha) * ∫_{a^rho}^{t^rho} (t^rho - u)^{alpha-1} ĥ(u) du,
//!   ĥ(u) = h(u^{1/rho}),
//! ```
//!
//! so the Jacobian `s^{rho-1}` disappears and only an Abel-type kernel
//! remains. The smooth factor `ĥ` is replaced by its piecewise-linear
//! interpolant on the grid and the kernel moments are integrated exactly, cell
//! by cell. The scheme is exact for `ĥ` affine in `u` and second order for
//! smooth `ĥ`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::operators::{Interval, OperatorError, OperatorParams, RealFunction};
use crate::{special, Flagged};

/// Number of subintervals and grading exponent of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridResolution {
    n: usize,
    grading: f64,
}

impl GridResolution {
    pub const MIN_N: usize = 2;
    pub const MAX_GRADING: f64 = 5.0;

    pub fn new(n: usize, grading: f64) -> Result<Self, OperatorError> {
        if n < Self::MIN_N {
            return Err(OperatorError::InvalidResolution(format!(
                "n must be at least {}, got {n}",
                Self::MIN_N
            )));
        }
        if !(1.0..=Self::MAX_GRADING).contains(&grading) {
            return Err(OperatorError::InvalidResolution(format!(
                "grading must lie in [1, {}], got {grading}",
                Self::MAX_GRADING
            )));
        }
        Ok(GridResolution { n, grading })
    }

    pub fn uniform(n: usize) -> Result<Self, OperatorError> {
        Self::new(n, 1.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }
}

/// Nodes `u_j = a^rho + (b^rho - a^rho) (j/n)^grading` and `t_j = u_j^{1/rho}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    u: Vec<f64>,
    t: Vec<f64>,
    params: OperatorParams,
    interval: Interval,
    resolution: GridResolution,
}

impl Grid {
    pub fn n(&self) -> usize {
        self.u.len() - 1
    }

    pub fn u_nodes(&self) -> &[f64] {
        &self.u
    }

    pub fn t_nodes(&self) -> &[f64] {
        &self.t
    }

    pub fn params(&self) -> OperatorParams {
        self.params
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn resolution(&self) -> GridResolution {
        self.resolution
    }

    /// Index `i` with `u_i <= u <= u_{i+1}`, clamped to `[0, n-1]`.
    fn cell_of(&self, u: f64) -> usize {
        let n = self.n();
        match self.u.binary_search_by(|x| x.total_cmp(&u)) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }
}

pub fn build_grid(iv: Interval, p: OperatorParams, res: GridResolution) -> Grid {
    let rho = p.rho();
    let to_u = |t: f64| if rho == 1.0 { t } else { t.powf(rho) };
    let to_t = |u: f64| if rho == 1.0 { u } else { u.powf(1.0 / rho) };
    let ua = to_u(iv.a());
    let ub = to_u(iv.b());
    let n = res.n();
    let u: Vec<f64> = (0..=n)
        .map(|j| ua + (ub - ua) * (j as f64 / n as f64).powf(res.grading()))
        .collect();
    let mut t: Vec<f64> = u.iter().map(|&x| to_t(x)).collect();
    t[0] = iv.a();
    t[n] = iv.b();
    Grid {
        u,
        t,
        params: p,
        interval: iv,
        resolution: res,
    }
}

/// Samples of a function on a grid, interpolated piecewise linearly in `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self, OperatorError> {
        if values.len() != grid.n() + 1 {
            return Err(OperatorError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.n() + 1,
                values.len()
            )));
        }
        Ok(DiscreteFunction { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.t_nodes().iter().map(|&t| f(t)).collect();
        DiscreteFunction { grid, values }
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let values = vec![c; grid.n() + 1];
        DiscreteFunction { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Value at `t`, linear in `u = t^rho` between nodes; `t` outside the grid
    /// is extrapolated from the boundary cell.
    pub fn interpolate(&self, t: f64) -> f64 {
        let rho = self.grid.params.rho();
        let u = if rho == 1.0 { t } else { t.powf(rho) };
        interpolate_u(&self.grid, &self.values, u)
    }

    /// Samples of the gamma-derivative `t^{1-rho} d/dt = rho d/du` at every
    /// node: second-order centred differences in `u`, one-sided at the ends.
    pub fn gamma_derivative_samples(&self) -> Vec<f64> {
        let u = &self.grid.u;
        let f = &self.values;
        let n = self.grid.n();
        let rho = self.grid.params.rho();
        let mut out = vec![0.0; n + 1];
        {
            let (h1, h2) = (u[1] - u[0], u[2] - u[1]);
            let big = h1 + h2;
            out[0] = ((f[1] - f[0]) * big * big - (f[2] - f[0]) * h1 * h1) / (h1 * h2 * big);
        }
        for i in 1..n {
            let (h1, h2) = (u[i] - u[i - 1], u[i + 1] - u[i]);
            out[i] =
                (h1 * h1 * (f[i + 1] - f[i]) + h2 * h2 * (f[i] - f[i - 1])) / (h1 * h2 * (h1 + h2));
        }
        {
            let (h1, h2) = (u[n - 1] - u[n - 2], u[n] - u[n - 1]);
            let big = h1 + h2;
            out[n] =
                -((f[n - 1] - f[n]) * big * big - (f[n - 2] - f[n]) * h2 * h2) / (h2 * big * h1);
        }
        if rho != 1.0 {
            out.iter_mut().for_each(|v| *v *= rho);
        }
        out
    }
}

pub(crate) fn interpolate_u(grid: &Grid, values: &[f64], u: f64) -> f64 {
    let i = grid.cell_of(u);
    let (u0, u1) = (grid.u[i], grid.u[i + 1]);
    let s = (u - u0) / (u1 - u0);
    if s == 0.0 {
        values[i]
    } else if s == 1.0 {
        values[i + 1]
    } else {
        values[i] + s * (values[i + 1] - values[i])
    }
}

// Below this relative cell width the closed-form moments lose digits to
// cancellation; the positive series is used instead.
const SERIES_THRESHOLD: f64 = 0.25;

/// Scaled kernel moments of one cell.
///
/// With `D` the distance from the far end of the cell to the target node and
/// `eps = cell width / D`, returns `(left, right)` such that the cell's
/// contribution is `D^alpha * (left * ĥ_left + right * ĥ_right)`.
fn cell_moments(eps: f64, r: f64, alpha: f64) -> (f64, f64) {
    if eps <= SERIES_THRESHOLD {
        // (1-s)^(alpha-1) = sum c_k s^k with c_0 = 1, c_{k+1} = c_k (k+1-alpha)/(k+1);
        // every term is positive, so there is no cancellation.
        let mut c = 1.0;
        let mut p = eps;
        let mut left = 0.0;
        let mut right = 0.0;
        for k in 0..200 {
            let kf = k as f64;
            let tr = c * p / (kf + 2.0);
            right += tr;
            left += tr / (kf + 1.0);
            if tr <= 1e-17 * right {
                break;
            }
            c *= (kf + 1.0 - alpha) / (kf + 1.0);
            p *= eps;
        }
        (left, right)
    } else {
        let ra = r.powf(alpha);
        let ra1 = r * ra;
        let m1 = (1.0 - ra1) / (alpha + 1.0);
        let m0 = (1.0 - ra) / alpha;
        ((m1 - r * m0) / eps, (m0 - m1) / eps)
    }
}

fn weights_row(u: &[f64], j: usize, alpha: f64, scale: f64) -> Vec<f64> {
    if j == 0 {
        return Vec::new();
    }
    let uj = u[j];
    let mut w = vec![0.0; j + 1];
    for i in 0..j {
        let d = uj - u[i];
        if d < 1e-300 {
            continue;
        }
        let width = u[i + 1] - u[i];
        let (eps, r) = if i + 1 == j {
            (1.0, 0.0)
        } else {
            (width / d, (uj - u[i + 1]) / d)
        };
        let (left, right) = cell_moments(eps, r, alpha);
        let da = scale * d.powf(alpha);
        w[i] += da * left;
        w[i + 1] += da * right;
    }
    w
}

fn kernel_scale(rho: f64, alpha: f64) -> f64 {
    rho.powf(-alpha) / special::gamma(alpha)
}

fn check_order(alpha: f64) -> Result<(), OperatorError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(OperatorError::InvalidParams(format!(
            "quadrature order must lie in (0,1), got {alpha}"
        )))
    }
}

/// Weights `w_0..w_j` with `Σ w_i ĥ(u_i) = rho^{-alpha}/Gamma(alpha) ∫_{u_0}^{u_j} (u_j-u)^{alpha-1} (Πĥ)(u) du`
/// for the piecewise-linear interpolant `Πĥ`. Empty for `j = 0`.
pub fn singular_weights(grid: &Grid, j: usize, alpha: f64) -> Result<Vec<f64>, OperatorError> {
    check_order(alpha)?;
    if j > grid.n() {
        return Err(OperatorError::OutOfRange(format!(
            "target index {j} exceeds grid size {}",
            grid.n()
        )));
    }
    Ok(weights_row(
        &grid.u,
        j,
        alpha,
        kernel_scale(grid.params.rho(), alpha),
    ))
}

/// All weight rows `j = 0..=n` of one grid and order, computed once and
/// shared by every application of the operator on that grid.
#[derive(Clone, Debug)]
pub struct WeightTable {
    alpha: f64,
    rows: Vec<Vec<f64>>,
}

impl WeightTable {
    pub fn new(grid: &Grid, alpha: f64) -> Result<Self, OperatorError> {
        Self::build_with(grid, alpha, Execution::default())
    }

    pub fn build_with(grid: &Grid, alpha: f64, exec: Execution) -> Result<Self, OperatorError> {
        check_order(alpha)?;
        let scale = kernel_scale(grid.params.rho(), alpha);
        let u = &grid.u;
        let rows = exec.map_range(0..grid.n() + 1, |j| weights_row(u, j, alpha, scale));
        Ok(WeightTable { alpha, rows })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.rows[j]
    }

    /// `Σ_i w_{j,i} values_i`.
    pub fn integrate(&self, j: usize, values: &[f64]) -> f64 {
        self.rows[j].iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// The fractional integral of the sampled function at every node.
    pub fn integrate_all(&self, values: &[f64]) -> Vec<f64> {
        self.integrate_all_with(values, Execution::default())
    }

    pub fn integrate_all_with(&self, values: &[f64], exec: Execution) -> Vec<f64> {
        assert_eq!(
            values.len(),
            self.rows.len(),
            "sample count must match the grid"
        );
        exec.map_range(0..self.rows.len(), |j| self.integrate(j, values))
    }
}

/// `Σ_{i<=j} w_i h(t_i)`: the fractional integral of `h` at node `t_j`.
pub fn integrate_singular(
    h: &RealFunction,
    grid: &Grid,
    j: usize,
    alpha: f64,
) -> Result<Flagged<f64>, OperatorError> {
    let w = singular_weights(grid, j, alpha)?;
    if j == 0 {
        return Ok(Flagged::clean(0.0));
    }
    let samples = h.sample(&grid.t[..=j])?;
    Ok(samples.map(|v| w.iter().zip(&v).map(|(w, v)| w * v).sum()))
}

/// The full-interval integral at the right endpoint `b`; the `c0` integral of
/// the linear problem without its `-1/2` factor.
pub fn integrate_full_kernel_b(
    h: &RealFunction,
    grid: &Grid,
    alpha: f64,
) -> Result<Flagged<f64>, OperatorError> {
    integrate_singular(h, grid, grid.n(), alpha)
}
