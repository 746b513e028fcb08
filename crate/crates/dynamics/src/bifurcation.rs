//! Normal-mode periodic orbits and their stability along the energy.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{DynamicsError, Result};
use crate::events::{find_crossings, Direction};
use crate::field::{PolyField, VerticalBlockFlow};
use crate::section::{check_tol, refine_fixed_point};

/// Planar Lyapunov orbit through `(0, 0, p_y0, 0)` with `p_y0 > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarOrbit {
    pub h: f64,
    pub p_y0: f64,
    pub period: f64,
    /// Monodromy of the `(z, p_z)` variational block over one period.
    pub monodromy: [[f64; 2]; 2],
    /// Half the trace of `monodromy`; stable while `|index| < 1`.
    pub index: f64,
}

pub fn planar_orbit(field: &PolyField<4>, h: f64, tol: f64) -> Result<PlanarOrbit> {
    let solver = check_tol(tol)?;
    let p_y0 = field.solve_coordinate(h, &[0.0; 4], 2).ok_or_else(|| {
        DynamicsError::NoOrbit(format!("no planar energy contour through y = 0 at h = {h}"))
    })?;
    let x0 = [0.0, 0.0, p_y0, 0.0, 1.0, 0.0, 0.0, 1.0];
    let run = find_crossings(
        &solver,
        &VerticalBlockFlow(field),
        x0,
        0,
        Direction::Up,
        1000.0,
        1,
    )?;
    let c = run
        .crossings
        .first()
        .ok_or(DynamicsError::NoCrossing(run.t_end))?;
    let m = [[c.state[4], c.state[5]], [c.state[6], c.state[7]]];
    Ok(PlanarOrbit {
        h,
        p_y0,
        period: c.t,
        monodromy: m,
        index: 0.5 * (m[0][0] + m[1][1]),
    })
}

/// Vertical Lyapunov orbit as the section fixed point nearest the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerticalOrbit {
    pub h: f64,
    pub y: f64,
    pub p_y: f64,
    pub period: f64,
    /// Half the trace of the section-map Jacobian, equal to half the sum of
    /// the nontrivial Floquet multipliers.
    pub index: f64,
}

pub fn vertical_orbit(field: &PolyField<4>, h: f64, tol: f64) -> Result<VerticalOrbit> {
    check_tol(tol)?;
    let scale = crate::section::boundary_radius(field, h, 0.0).ok_or_else(|| {
        DynamicsError::NoOrbit(format!("section at h = {h} is empty"))
    })?;
    let fp = refine_fixed_point(field, h, (0.0, 0.0), scale, tol)
        .ok_or_else(|| DynamicsError::NoOrbit(format!("vertical orbit not found at h = {h}")))?;
    if fp.y.hypot(fp.p_y) > 0.25 * scale {
        return Err(DynamicsError::NoOrbit(format!(
            "Newton left the vertical orbit at h = {h}"
        )));
    }
    Ok(VerticalOrbit {
        h,
        y: fp.y,
        p_y: fp.p_y,
        period: fp.period,
        index: 0.5 * fp.trace,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Family {
    Planar,
    Vertical,
}

pub fn stability_index(field: &PolyField<4>, family: Family, h: f64, tol: f64) -> Result<f64> {
    match family {
        Family::Planar => planar_orbit(field, h, tol).map(|o| o.index),
        Family::Vertical => vertical_orbit(field, h, tol).map(|o| o.index),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub h: f64,
    /// The level `+1` or `-1` crossed by the index.
    pub level: f64,
    /// True when the orbit loses stability as `h` increases.
    pub destabilizing: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Scan {
    pub family: Family,
    pub samples: Vec<(f64, f64)>,
    pub thresholds: Vec<Threshold>,
}

impl Scan {
    pub fn first(&self) -> Option<&Threshold> {
        self.thresholds.first()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub h_min: f64,
    pub h_max: f64,
    pub step: f64,
    /// Bisection width in `h`.
    pub h_tol: f64,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            h_min: 0.005,
            h_max: 0.5,
            step: 0.005,
            h_tol: 1e-5,
            tol: 1e-12,
        }
    }
}

/// Samples the stability index on a grid in `h` and bisects every crossing of `+1` or `-1`.
pub fn bifurcation_scan(field: &PolyField<4>, family: Family, opts: &ScanOptions) -> Result<Scan> {
    check_tol(opts.tol)?;
    if !(opts.step > 0.0 && opts.h_max > opts.h_min && opts.h_tol > 0.0) {
        return Err(DynamicsError::NoOrbit("empty energy range".into()));
    }
    let n = ((opts.h_max - opts.h_min) / opts.step).round() as usize;
    let hs: Vec<f64> = (0..=n).map(|k| opts.h_min + opts.step * k as f64).collect();
    let indices: Vec<Result<f64>> = hs
        .par_iter()
        .map(|&h| stability_index(field, family, h, opts.tol))
        .collect();
    let mut samples = Vec::with_capacity(hs.len());
    for (h, r) in hs.iter().zip(indices) {
        samples.push((*h, r?));
    }
    let mut thresholds = Vec::new();
    for w in samples.windows(2) {
        let ((h0, i0), (h1, i1)) = (w[0], w[1]);
        for level in [1.0, -1.0] {
            if (i0 - level).signum() == (i1 - level).signum() {
                continue;
            }
            let (mut lo, mut hi) = (h0, h1);
            let below = (i0 - level).signum();
            while hi - lo > opts.h_tol {
                let mid = 0.5 * (lo + hi);
                let v = stability_index(field, family, mid, opts.tol)?;
                if (v - level).signum() == below {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            thresholds.push(Threshold {
                h: 0.5 * (lo + hi),
                level,
                destabilizing: i1.abs() > i0.abs(),
            });
        }
    }
    Ok(Scan {
        family,
        samples,
        thresholds,
    })
}
