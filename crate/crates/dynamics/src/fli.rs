//! Fast Lyapunov indicators: `sup_{0 < t <= T} log |eta(t)|` under the tangent flow.

use rayon::prelude::*;
use serde::Serialize;

use crate::dop853::Control;
use crate::error::{DynamicsError, Result};
use crate::field::{solve_pz, PolyField, TangentFlow, ESCAPE_RADIUS};
use crate::section::check_tol;

/// Value recorded for orbits that leave the escape ball.
pub const ESCAPE_FLI: f64 = 1e3;
pub const DEFAULT_HORIZON: f64 = 100.0;
pub const DEFAULT_TANGENT: [f64; 4] = [1.0, 0.0, 0.0, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FliRecord {
    pub state: [f64; 4],
    pub tangent: [f64; 4],
    pub horizon: f64,
    pub value: f64,
    pub escaped: bool,
}

pub fn fli(
    field: &PolyField<4>,
    state: [f64; 4],
    tangent: [f64; 4],
    horizon: f64,
    tol: f64,
) -> Result<FliRecord> {
    let solver = check_tol(tol)?;
    let norm0 = tangent.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm0 == 0.0 || !norm0.is_finite() {
        return Err(DynamicsError::NoOrbit("tangent vector must be nonzero".into()));
    }
    let mut s0 = [0.0; 8];
    s0[..4].copy_from_slice(&state);
    s0[4..].copy_from_slice(&tangent);
    let mut sup = f64::NEG_INFINITY;
    let mut escaped = false;
    let run = solver.solve(&TangentFlow(field), 0.0, s0, horizon, |st| {
        if st.y[..4].iter().any(|v| !v.is_finite() || v.abs() > ESCAPE_RADIUS) {
            escaped = true;
            return Control::Stop;
        }
        let n = st.y[4..].iter().map(|v| v * v).sum::<f64>().sqrt();
        sup = sup.max(n.ln());
        Control::Continue
    });
    match run {
        Ok(_) => {}
        Err(DynamicsError::StepUnderflow { .. }) | Err(DynamicsError::MaxSteps { .. }) => {
            escaped = true
        }
        Err(e) => return Err(e),
    }
    Ok(FliRecord {
        state,
        tangent,
        horizon,
        value: if escaped { ESCAPE_FLI } else { sup },
        escaped,
    })
}

/// FLI over a grid of section points `(y, p_y)` with `z = 0`, `p_z > 0`.
/// Points off the energy shell are omitted.
pub fn fli_grid(
    field: &PolyField<4>,
    h: f64,
    grid: &[(f64, f64)],
    horizon: f64,
    tangent: [f64; 4],
    tol: f64,
) -> Result<Vec<FliRecord>> {
    check_tol(tol)?;
    let out: Vec<Option<Result<FliRecord>>> = grid
        .par_iter()
        .map(|&(y, p_y)| {
            let pz = solve_pz(field, h, y, p_y).ok()?;
            Some(fli(field, [y, 0.0, p_y, pz], tangent, horizon, tol))
        })
        .collect();
    out.into_iter().flatten().collect()
}

/// Regular grid over `[y_min, y_max] x [p_min, p_max]`, row-major in `p_y`.
pub fn regular_grid(y: (f64, f64), p_y: (f64, f64), ny: usize, np: usize) -> Vec<(f64, f64)> {
    let lin = |lo: f64, hi: f64, n: usize, k: usize| {
        if n <= 1 {
            0.5 * (lo + hi)
        } else {
            lo + (hi - lo) * k as f64 / (n - 1) as f64
        }
    };
    let mut g = Vec::with_capacity(ny * np);
    for j in 0..np {
        for i in 0..ny {
            g.push((lin(y.0, y.1, ny, i), lin(p_y.0, p_y.1, np, j)));
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use halo_core::params::load_case;
    use halo_core::pipeline::reduce;

    #[test]
    fn monotone_in_horizon() {
        let p = load_case("sun-vesta", Some(1e-2)).unwrap();
        let f = PolyField::new(&reduce(&p, 1, 4).unwrap().cm.h).unwrap();
        let pz = solve_pz(&f, 0.1, 0.1, 0.0).unwrap();
        let x = [0.1, 0.0, 0.0, pz];
        let a = fli(&f, x, DEFAULT_TANGENT, 20.0, 1e-12).unwrap();
        let b = fli(&f, x, DEFAULT_TANGENT, 60.0, 1e-12).unwrap();
        assert!(b.value >= a.value);
    }

    #[test]
    fn zero_tangent_rejected() {
        let p = load_case("sun-vesta", Some(1e-2)).unwrap();
        let f = PolyField::new(&reduce(&p, 1, 4).unwrap().cm.quadratic_only()).unwrap();
        assert!(fli(&f, [0.0; 4], [0.0; 4], 10.0, 1e-12).is_err());
    }

    #[test]
    fn grid_layout() {
        let g = regular_grid((-1.0, 1.0), (0.0, 2.0), 3, 2);
        assert_eq!(g, vec![(-1.0, 0.0), (0.0, 0.0), (1.0, 0.0), (-1.0, 2.0), (0.0, 2.0), (1.0, 2.0)]);
    }
}
