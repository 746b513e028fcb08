//! Trajectories on the center manifold with optional tangent flow.

use crate::dop853::Control;
use crate::error::{DynamicsError, Result};
use crate::field::{PhaseFlow, PolyField, TangentFlow, ESCAPE_RADIUS};
use crate::section::check_tol;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CmState {
    pub t: f64,
    pub x: [f64; 4],
}

impl CmState {
    pub fn y(&self) -> f64 {
        self.x[0]
    }
    pub fn z(&self) -> f64 {
        self.x[1]
    }
    pub fn p_y(&self) -> f64 {
        self.x[2]
    }
    pub fn p_z(&self) -> f64 {
        self.x[3]
    }
}

/// States at accepted steps, plus the tangent vector when requested.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<CmState>,
    pub tangents: Option<Vec<[f64; 4]>>,
}

impl Trajectory {
    pub fn last(&self) -> &CmState {
        self.states.last().expect("trajectory holds the initial state")
    }

    /// Largest relative energy error `|H - H(0)| / max(|H(0)|, tiny)`.
    pub fn energy_drift(&self, field: &PolyField<4>) -> f64 {
        let h0 = field.energy(&self.states[0].x);
        let scale = h0.abs().max(f64::MIN_POSITIVE);
        self.states
            .iter()
            .map(|s| (field.energy(&s.x) - h0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

/// Integrates over `[0, t_end]` (either sign). Leaving the escape ball is an error.
pub fn integrate_cm(
    field: &PolyField<4>,
    x0: [f64; 4],
    t_end: f64,
    tol: f64,
    tangent: Option<[f64; 4]>,
) -> Result<Trajectory> {
    let solver = check_tol(tol)?;
    let escape = |x: &[f64]| x.iter().any(|v| !v.is_finite() || v.abs() > ESCAPE_RADIUS);
    let mut states = vec![CmState { t: 0.0, x: x0 }];
    let mut escaped_at = None;
    match tangent {
        None => {
            solver.solve(&PhaseFlow(field), 0.0, x0, t_end, |st| {
                states.push(CmState { t: st.t, x: st.y });
                if escape(&st.y) {
                    escaped_at = Some(st.t);
                    return Control::Stop;
                }
                Control::Continue
            })?;
            if let Some(t) = escaped_at {
                return Err(DynamicsError::Escape { t, radius: ESCAPE_RADIUS });
            }
            Ok(Trajectory { states, tangents: None })
        }
        Some(v) => {
            let mut s0 = [0.0; 8];
            s0[..4].copy_from_slice(&x0);
            s0[4..].copy_from_slice(&v);
            let mut tangents = vec![v];
            solver.solve(&TangentFlow(field), 0.0, s0, t_end, |st| {
                let mut x = [0.0; 4];
                let mut e = [0.0; 4];
                x.copy_from_slice(&st.y[..4]);
                e.copy_from_slice(&st.y[4..]);
                states.push(CmState { t: st.t, x });
                tangents.push(e);
                if escape(&x) {
                    escaped_at = Some(st.t);
                    return Control::Stop;
                }
                Control::Continue
            })?;
            if let Some(t) = escaped_at {
                return Err(DynamicsError::Escape { t, radius: ESCAPE_RADIUS });
            }
            Ok(Trajectory {
                states,
                tangents: Some(tangents),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use halo_core::params::load_case;
    use halo_core::pipeline::reduce;

    #[test]
    fn harmonic_return_after_planar_period() {
        let p = load_case("earth-moon", None).unwrap();
        let cm = reduce(&p, 1, 4).unwrap().cm;
        let f = PolyField::new(&cm.quadratic_only()).unwrap();
        let period = std::f64::consts::TAU / cm.omega1;
        let x0 = [0.2, 0.1, -0.1, 0.05];
        let tr = integrate_cm(&f, x0, period, 1e-12, None).unwrap();
        let end = tr.last();
        assert!((end.y() - x0[0]).abs() < 1e-10);
        assert!((end.p_y() - x0[2]).abs() < 1e-10);
    }

    #[test]
    fn tangent_flow_is_linear_in_tangent() {
        let p = load_case("sun-vesta", Some(1e-2)).unwrap();
        let f = PolyField::new(&reduce(&p, 1, 4).unwrap().cm.h).unwrap();
        let x0 = [0.1, 0.0, 0.05, 0.2];
        let a = integrate_cm(&f, x0, 5.0, 1e-12, Some([1.0, 0.0, 0.0, 0.0])).unwrap();
        let b = integrate_cm(&f, x0, 5.0, 1e-12, Some([2.0, 0.0, 0.0, 0.0])).unwrap();
        let ea = a.tangents.unwrap().last().copied().unwrap();
        let eb = b.tangents.unwrap().last().copied().unwrap();
        for i in 0..4 {
            assert!((2.0 * ea[i] - eb[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn escape_is_reported() {
        let p = load_case("sun-vesta", Some(1e-2)).unwrap();
        let f = PolyField::new(&reduce(&p, 1, 4).unwrap().cm.h).unwrap();
        let r = integrate_cm(&f, [3.0, 0.0, 3.0, 0.0], 100.0, 1e-10, None);
        assert!(matches!(
            r,
            Err(DynamicsError::Escape { .. }) | Err(DynamicsError::StepUnderflow { .. })
        ));
    }
}
