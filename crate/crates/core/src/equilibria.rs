//! Collinear equilibria on the synodic x axis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

const EPS_BRACKET: f64 = 1e-9;
const GAMMA_FLOOR: f64 = 1e-12;
const SIGN_GRID: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollinearPoint {
    pub index: u8,
    /// Distance to the closer primary.
    pub gamma: f64,
    /// Signed offset: `-1 + gamma` (L1), `-1 - gamma` (L2), `gamma` (L3).
    pub alpha: f64,
    /// Synodic abscissa `mu + alpha`.
    pub x: f64,
    /// Scaled residual of the on-axis equilibrium condition.
    pub residual: f64,
}

impl CollinearPoint {
    /// +1 for L1, -1 for L2; the upper/lower sign of the linear formulas.
    pub fn side(&self) -> Result<f64> {
        match self.index {
            1 => Ok(1.0),
            2 => Ok(-1.0),
            j => Err(Error::UnsupportedPoint(j)),
        }
    }
}

fn check_index(j: u8) -> Result<()> {
    if (1..=3).contains(&j) {
        Ok(())
    } else {
        Err(Error::UnsupportedPoint(j))
    }
}

/// Abscissa of `L_j` for a given distance to the closer primary.
pub fn abscissa(params: &ModelParams, j: u8, gamma: f64) -> f64 {
    match j {
        1 => gamma + params.mu - 1.0,
        2 => -gamma + params.mu - 1.0,
        _ => gamma + params.mu,
    }
}

fn eq_x_terms(p: &ModelParams, x: f64) -> [f64; 4] {
    let d1 = x - p.mu;
    let d2 = 1.0 + x - p.mu;
    [
        p.n2() * x,
        -p.q * (1.0 - p.mu) * d1 / d1.abs().powi(3),
        -3.0 * p.a * p.mu * d2 / (2.0 * d2.abs().powi(5)),
        -p.mu * d2 / d2.abs().powi(3),
    ]
}

/// On-axis equilibrium condition: the x derivative of the effective potential at `(x, 0, 0)`.
pub fn eq_x(params: &ModelParams, x: f64) -> f64 {
    eq_x_terms(params, x).iter().sum()
}

fn eq_x_scaled(params: &ModelParams, x: f64) -> f64 {
    let t = eq_x_terms(params, x);
    let scale = t.iter().map(|v| v.abs()).fold(0.0, f64::max);
    t.iter().sum::<f64>().abs() / scale.max(f64::MIN_POSITIVE)
}

/// Gradient of the effective potential at an arbitrary synodic position.
pub fn potential_gradient(p: &ModelParams, x: f64, y: f64, z: f64) -> [f64; 3] {
    let mu = p.mu;
    let r1sq = y * y + z * z + (x - mu).powi(2);
    let r2sq = y * y + z * z + (1.0 + x - mu).powi(2);
    let r1_3 = r1sq.powf(1.5);
    let r2_3 = r2sq.powf(1.5);
    let r2_5 = r2sq.powf(2.5);
    let r2_7 = r2sq.powf(3.5);
    let a = p.a;
    let gx = p.n2() * x - p.q * (1.0 - mu) * (x - mu) / r1_3
        + 15.0 * a * z * z * mu * (1.0 + x - mu) / (2.0 * r2_7)
        - 3.0 * a * (1.0 + x - mu) * mu / (2.0 * r2_5)
        - (1.0 + x - mu) * mu / r2_3;
    let gy = p.n2() * y - p.q * y * (1.0 - mu) / r1_3 + 15.0 * a * y * z * z * mu / (2.0 * r2_7)
        - 3.0 * a * y * mu / (2.0 * r2_5)
        - y * mu / r2_3;
    let gz = -p.q * z * (1.0 - mu) / r1_3 + 15.0 * a * z.powi(3) * mu / (2.0 * r2_7)
        - 9.0 * a * z * mu / (2.0 * r2_5)
        - z * mu / r2_3;
    [gx, gy, gz]
}

/// Generalized Euler septic for `L_j`, coefficients in ascending powers of gamma.
pub fn euler_polynomial(params: &ModelParams, j: u8) -> Result<[f64; 8]> {
    check_index(j)?;
    let (mu, q, a) = (params.mu, params.q, params.a);
    let n2 = params.n2();
    let c = if j == 3 {
        [
            2.0 * q * mu - 2.0 * q,
            8.0 * q * mu - 8.0 * q,
            2.0 * n2 * mu - 3.0 * a * mu + 12.0 * q * mu - 12.0 * q - 2.0 * mu,
            2.0 * n2 - 8.0 * q - 4.0 * mu + 8.0 * n2 * mu + 8.0 * q * mu,
            8.0 * n2 + 2.0 * q * mu + 12.0 * n2 * mu - 2.0 * q - 2.0 * mu,
            12.0 * n2 + 8.0 * n2 * mu,
            8.0 * n2 + 2.0 * n2 * mu,
            2.0 * n2,
        ]
    } else {
        let s = if j == 1 { 1.0 } else { -1.0 };
        [
            -s * 3.0 * a * mu,
            6.0 * a * mu,
            -s * (2.0 * mu + 3.0 * a * mu),
            4.0 * mu,
            2.0 * n2 * mu - 2.0 * q * mu - 2.0 * n2 + 2.0 * q - s * 2.0 * mu,
            s * (6.0 * n2 - 4.0 * n2 * mu),
            2.0 * n2 * mu - 6.0 * n2,
            s * 2.0 * n2,
        ]
    };
    Ok(c)
}

/// Value, derivative and absolute term sum of a polynomial in ascending order.
fn poly_eval(c: &[f64], x: f64) -> (f64, f64, f64) {
    let mut v = 0.0;
    let mut d = 0.0;
    let mut mag = 0.0;
    for &ck in c.iter().rev() {
        d = d * x + v;
        v = v * x + ck;
        mag = mag * x.abs() + ck.abs();
    }
    (v, d, mag)
}

/// Scaled septic residual `|p(gamma)| / sum |c_k gamma^k|`.
pub fn septic_residual(params: &ModelParams, j: u8, gamma: f64) -> Result<f64> {
    let c = euler_polynomial(params, j)?;
    let (v, _, mag) = poly_eval(&c, gamma);
    Ok(v.abs() / mag.max(f64::MIN_POSITIVE))
}

fn bracket(j: u8) -> (f64, f64) {
    match j {
        1 => (GAMMA_FLOOR, 1.0 - EPS_BRACKET),
        2 => (GAMMA_FLOOR, 2.0),
        _ => (GAMMA_FLOOR, 2.0),
    }
}

/// Bisection of the on-axis condition in gamma; returns the midpoint of the final bracket.
pub fn bisect_eq_x(params: &ModelParams, j: u8, mut lo: f64, mut hi: f64) -> Result<f64> {
    let f = |g: f64| eq_x(params, abscissa(params, j, g));
    let mut flo = f(lo);
    if flo.signum() == f(hi).signum() {
        return Err(Error::RootIsolation { point: j, lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Locates `L_j`: sign counting on a logarithmic grid, bisection on the
/// equilibrium condition, then Newton polishing on the septic.
pub fn locate_collinear(params: &ModelParams, j: u8) -> Result<CollinearPoint> {
    check_index(j)?;
    let (lo, hi) = bracket(j);
    let f = |g: f64| eq_x(params, abscissa(params, j, g));

    let ratio = (hi / lo).ln() / (SIGN_GRID - 1) as f64;
    let mut changes = Vec::new();
    let mut g_prev = lo;
    let mut f_prev = f(lo);
    for i in 1..SIGN_GRID {
        let g = if i == SIGN_GRID - 1 {
            hi
        } else {
            lo * (ratio * i as f64).exp()
        };
        let fv = f(g);
        if fv.signum() != f_prev.signum() {
            changes.push((g_prev, g));
        }
        g_prev = g;
        f_prev = fv;
    }
    let (blo, bhi) = match changes.len() {
        0 => return Err(Error::RootIsolation { point: j, lo, hi }),
        1 => changes[0],
        count => return Err(Error::MultipleRoots { point: j, count }),
    };

    let mut gamma = bisect_eq_x(params, j, blo, bhi)?;
    let c = euler_polynomial(params, j)?;
    for _ in 0..8 {
        let (v, d, _) = poly_eval(&c, gamma);
        if d == 0.0 {
            break;
        }
        let next = gamma - v / d;
        if !(next > blo && next < bhi) {
            break;
        }
        let done = (next - gamma).abs() <= 1e-16 * gamma;
        gamma = next;
        if done {
            break;
        }
    }

    let alpha = match j {
        1 => -1.0 + gamma,
        2 => -1.0 - gamma,
        _ => gamma,
    };
    let x = abscissa(params, j, gamma);
    Ok(CollinearPoint {
        index: j,
        gamma,
        alpha,
        x,
        residual: eq_x_scaled(params, x),
    })
}
