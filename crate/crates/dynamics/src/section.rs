//! Poincaré section `z = 0`, `p_z > 0` of a center-manifold flow.

use rayon::prelude::*;
use serde::Serialize;

use crate::dop853::Dop853;
use crate::error::{DynamicsError, Result};
use crate::events::{find_crossings, Direction};
use crate::field::{brent, solve_pz, MonodromyFlow, PhaseFlow, PolyField};

#[derive(Debug, Clone, Copy)]
pub struct SectionOptions {
    pub tol: f64,
    /// Integration horizon per orbit.
    pub t_max: f64,
    /// Maximum number of returns per orbit.
    pub max_points: usize,
}

impl Default for SectionOptions {
    fn default() -> Self {
        SectionOptions {
            tol: 1e-12,
            t_max: 2000.0,
            max_points: 300,
        }
    }
}

/// Accepts tolerances in `[1e-14, 1e-8]`.
pub fn check_tol(tol: f64) -> Result<Dop853> {
    if !(1e-14..=1e-8).contains(&tol) {
        return Err(DynamicsError::Tolerance(tol));
    }
    Ok(Dop853::with_tol(tol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionPoint {
    pub y: f64,
    pub p_y: f64,
    pub t: f64,
}

#[derive(Debug, Clone)]
pub struct SectionOrbit {
    pub y0: f64,
    pub p_y0: f64,
    pub p_z0: f64,
    pub points: Vec<SectionPoint>,
    pub escaped: bool,
    /// Largest `|H - h|` over the recorded returns.
    pub energy_error: f64,
}

pub fn section_orbit(
    field: &PolyField<4>,
    h: f64,
    y: f64,
    p_y: f64,
    opts: &SectionOptions,
) -> Result<SectionOrbit> {
    let solver = check_tol(opts.tol)?;
    let pz = solve_pz(field, h, y, p_y)?;
    let run = find_crossings(
        &solver,
        &PhaseFlow(field),
        [y, 0.0, p_y, pz],
        1,
        Direction::Up,
        opts.t_max,
        opts.max_points,
    )?;
    let mut energy_error: f64 = 0.0;
    let points = run
        .crossings
        .iter()
        .map(|c| {
            energy_error = energy_error.max((field.energy(&c.state) - h).abs());
            SectionPoint {
                y: c.state[0],
                p_y: c.state[2],
                t: c.t,
            }
        })
        .collect();
    Ok(SectionOrbit {
        y0: y,
        p_y0: p_y,
        p_z0: pz,
        points,
        escaped: run.escaped,
        energy_error,
    })
}

/// Section orbits for a batch of seeds; seeds off the energy shell are skipped.
pub fn poincare_map(
    field: &PolyField<4>,
    h: f64,
    seeds: &[(f64, f64)],
    opts: &SectionOptions,
) -> Result<Vec<SectionOrbit>> {
    check_tol(opts.tol)?;
    let results: Vec<Result<SectionOrbit>> = seeds
        .par_iter()
        .map(|&(y, p_y)| section_orbit(field, h, y, p_y, opts))
        .collect();
    let mut out = Vec::new();
    for r in results {
        match r {
            Ok(o) => out.push(o),
            Err(DynamicsError::OutsideShell { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Distance from the origin to the section boundary `H(y, 0, p_y, 0) = h`
/// along the direction `(cos phi, sin phi)` in the `(y, p_y)` plane.
pub fn boundary_radius(field: &PolyField<4>, h: f64, phi: f64) -> Option<f64> {
    ray_boundary(field, h, (0.0, 0.0), phi)
}

/// Distance from `origin` to the section boundary along `(cos phi, sin phi)`.
pub fn ray_boundary(field: &PolyField<4>, h: f64, origin: (f64, f64), phi: f64) -> Option<f64> {
    let (c, s) = (phi.cos(), phi.sin());
    let g = |r: f64| field.energy(&[origin.0 + r * c, 0.0, origin.1 + r * s, 0.0]) - h;
    if g(0.0) >= 0.0 {
        return None;
    }
    let mut step = (2.0 * h.abs()).sqrt().max(1e-8) * 0.05;
    let mut lo = 0.0;
    let mut hi = step;
    while g(hi) < 0.0 {
        lo = hi;
        step *= 1.25;
        hi += step;
        if hi > crate::field::ESCAPE_RADIUS {
            return None;
        }
    }
    brent(&g, lo, hi, 1e-15)
}

/// First return with the Jacobian of the section map in `(y, p_y)`.
#[derive(Debug, Clone, Copy)]
pub struct ReturnMap {
    pub y: f64,
    pub p_y: f64,
    pub t: f64,
    pub jacobian: [[f64; 2]; 2],
}

pub fn return_map(field: &PolyField<4>, h: f64, y: f64, p_y: f64, tol: f64) -> Result<ReturnMap> {
    let solver = check_tol(tol)?;
    let pz = solve_pz(field, h, y, p_y)?;
    let x0 = [y, 0.0, p_y, pz];
    let run = find_crossings(
        &solver,
        &MonodromyFlow(field),
        MonodromyFlow::initial(x0),
        1,
        Direction::Up,
        500.0,
        1,
    )?;
    let c = run
        .crossings
        .first()
        .ok_or(DynamicsError::NoCrossing(run.t_end))?;
    let phi = MonodromyFlow::matrix(&c.state);
    let x1 = [c.state[0], c.state[1], c.state[2], c.state[3]];
    // initial variations keep the point on the shell and on z = 0
    let g0 = field.gradient(&x0);
    let dx0 = [
        [1.0, 0.0, 0.0, -g0[0] / g0[3]],
        [0.0, 0.0, 1.0, -g0[2] / g0[3]],
    ];
    let f1 = field.vector_field(&x1);
    let mut jac = [[0.0; 2]; 2];
    for (col, d) in dx0.iter().enumerate() {
        let v: Vec<f64> = (0..4).map(|i| (0..4).map(|k| phi[i][k] * d[k]).sum()).collect();
        let dt = -v[1] / f1[1];
        jac[0][col] = v[0] + f1[0] * dt;
        jac[1][col] = v[2] + f1[2] * dt;
    }
    Ok(ReturnMap {
        y: x1[0],
        p_y: x1[2],
        t: c.t,
        jacobian: jac,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub y: f64,
    pub p_y: f64,
    pub period: f64,
    /// Trace of the section-map Jacobian; `|trace| < 2` is elliptic.
    pub trace: f64,
}

impl FixedPoint {
    pub fn is_elliptic(&self) -> bool {
        self.trace.abs() < 2.0
    }
}

/// Newton iteration for `P(x) = x` from one seed.
pub fn refine_fixed_point(
    field: &PolyField<4>,
    h: f64,
    seed: (f64, f64),
    scale: f64,
    tol: f64,
) -> Option<FixedPoint> {
    let (mut y, mut p) = seed;
    for _ in 0..40 {
        let r = return_map(field, h, y, p, tol).ok()?;
        let (fy, fp) = (r.y - y, r.p_y - p);
        if fy.hypot(fp) < 1e-11 * scale.max(1e-3) {
            let trace = r.jacobian[0][0] + r.jacobian[1][1];
            return Some(FixedPoint {
                y,
                p_y: p,
                period: r.t,
                trace,
            });
        }
        let a = r.jacobian[0][0] - 1.0;
        let b = r.jacobian[0][1];
        let c = r.jacobian[1][0];
        let d = r.jacobian[1][1] - 1.0;
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let mut dy = -(d * fy - b * fp) / det;
        let mut dp = -(-c * fy + a * fp) / det;
        let len = dy.hypot(dp);
        if len > 0.2 * scale {
            dy *= 0.2 * scale / len;
            dp *= 0.2 * scale / len;
        }
        y += dy;
        p += dp;
    }
    None
}

/// Fixed points of the section map found from a polar grid of seeds.
pub fn fixed_points(field: &PolyField<4>, h: f64, tol: f64) -> Result<Vec<FixedPoint>> {
    check_tol(tol)?;
    let n_angles = 16;
    let fractions = [0.0, 0.3, 0.55, 0.75, 0.88, 0.95, 0.985];
    let mut seeds = Vec::new();
    let mut scale: f64 = 0.0;
    for k in 0..n_angles {
        let phi = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / n_angles as f64;
        let rho = boundary_radius(field, h, phi).ok_or(DynamicsError::OutsideShell {
            h,
            y: 0.0,
            p_y: 0.0,
        })?;
        scale = scale.max(rho);
        for &f in &fractions {
            if f == 0.0 && k > 0 {
                continue;
            }
            seeds.push((f * rho * phi.cos(), f * rho * phi.sin()));
        }
    }
    let found: Vec<FixedPoint> = seeds
        .par_iter()
        .filter_map(|&s| refine_fixed_point(field, h, s, scale, tol))
        .collect();
    let mut unique: Vec<FixedPoint> = Vec::new();
    for fp in found {
        if !unique
            .iter()
            .any(|u| (u.y - fp.y).hypot(u.p_y - fp.p_y) < 1e-6 * scale)
        {
            unique.push(fp);
        }
    }
    unique.sort_by(|a, b| a.y.total_cmp(&b.y).then(a.p_y.total_cmp(&b.p_y)));
    Ok(unique)
}

/// Mean turning of successive returns around `center`, in turns per iterate.
pub fn rotation_number(points: &[SectionPoint], center: (f64, f64)) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let angles: Vec<f64> = points
        .iter()
        .map(|p| (p.p_y - center.1).atan2(p.y - center.0))
        .collect();
    let tau = std::f64::consts::TAU;
    let total: f64 = angles
        .windows(2)
        .map(|w| (w[0] - w[1]).rem_euclid(tau))
        .sum();
    Some(total / ((angles.len() - 1) as f64 * tau))
}

#[cfg(test)]
mod tests {
    use super::*;
    use halo_core::params::load_case;
    use halo_core::pipeline::reduce;

    fn field(case: &str, beta: Option<f64>, degree: u32) -> PolyField<4> {
        let p = load_case(case, beta).unwrap();
        PolyField::new(&reduce(&p, 1, degree).unwrap().cm.h).unwrap()
    }

    #[test]
    fn tolerance_bounds() {
        assert!(check_tol(1e-15).is_err());
        assert!(check_tol(1e-7).is_err());
        assert!(check_tol(1e-10).is_ok());
    }

    #[test]
    fn quadratic_part_has_single_fixed_point() {
        let p = load_case("sun-vesta", None).unwrap();
        let cm = reduce(&p, 1, 4).unwrap().cm;
        let f = PolyField::new(&cm.quadratic_only()).unwrap();
        let fps = fixed_points(&f, 0.05, 1e-12).unwrap();
        assert_eq!(fps.len(), 1);
        assert!(fps[0].y.abs() < 1e-9 && fps[0].p_y.abs() < 1e-9);
        let period = std::f64::consts::TAU / cm.omega2;
        assert!((fps[0].period - period).abs() < 1e-9);
    }

    #[test]
    fn sun_vesta_sail_has_halo_islands() {
        let f = field("sun-vesta", Some(1e-2), 4);
        let fps = fixed_points(&f, 0.05, 1e-12).unwrap();
        assert_eq!(fps.len(), 3, "{fps:?}");
        assert!(fps.iter().all(|p| p.is_elliptic()));
        let halos: Vec<_> = fps.iter().filter(|p| p.y.abs() > 1e-4).collect();
        assert_eq!(halos.len(), 2);
        assert!((halos[0].y + halos[1].y).abs() < 1e-8);
    }

    #[test]
    fn return_map_jacobian_is_area_preserving() {
        let f = field("sun-vesta", Some(1e-2), 4);
        let r = return_map(&f, 0.05, 0.05, 0.02, 1e-12).unwrap();
        let det = r.jacobian[0][0] * r.jacobian[1][1] - r.jacobian[0][1] * r.jacobian[1][0];
        assert!((det - 1.0).abs() < 1e-8, "{det}");
    }
}
