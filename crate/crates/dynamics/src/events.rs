//! Located crossings of a coordinate hyperplane.

use crate::dop853::{Control, Dop853, OdeSystem};
use crate::error::{DynamicsError, Result};
use crate::field::{brent, ESCAPE_RADIUS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// From negative to non-negative values.
    Up,
    /// From positive to non-positive values.
    Down,
    Either,
}

impl Direction {
    fn matches(self, before: f64, after: f64) -> bool {
        match self {
            Direction::Up => before < 0.0 && after >= 0.0,
            Direction::Down => before > 0.0 && after <= 0.0,
            Direction::Either => {
                (before < 0.0 && after >= 0.0) || (before > 0.0 && after <= 0.0)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct Crossing<const M: usize> {
    pub t: f64,
    pub state: [f64; M],
}

#[derive(Debug, Clone)]
pub struct CrossingRun<const M: usize> {
    pub crossings: Vec<Crossing<M>>,
    /// Time reached when the run ended.
    pub t_end: f64,
    pub escaped: bool,
}

/// Integrates forward from `t = 0` and records up to `max_count` crossings of
/// `state[index] = 0` in `direction`. The first four coordinates are checked
/// against [`ESCAPE_RADIUS`].
pub fn find_crossings<S, const M: usize>(
    solver: &Dop853,
    sys: &S,
    x0: [f64; M],
    index: usize,
    direction: Direction,
    t_max: f64,
    max_count: usize,
) -> Result<CrossingRun<M>>
where
    S: OdeSystem<M>,
{
    let mut crossings = Vec::new();
    let mut escaped = false;
    let mut failure = None;
    let out = solver.solve(sys, 0.0, x0, t_max, |st| {
        if st.y.iter().take(4).any(|v| !v.is_finite() || v.abs() > ESCAPE_RADIUS) {
            escaped = true;
            return Control::Stop;
        }
        let (a, b) = (st.y_old[index], st.y[index]);
        if direction.matches(a, b) {
            let seg = st.dense();
            let g = |t: f64| seg.eval(t)[index];
            let guess = if b == 0.0 {
                Some(st.t)
            } else {
                brent(&g, st.t_old, st.t, 1e-15 * st.t.abs().max(1.0))
            };
            match guess {
                Some(tc) => crossings.push(polish(sys, tc, seg.eval(tc), index)),
                None => failure = Some(st.t),
            }
            if crossings.len() >= max_count || failure.is_some() {
                return Control::Stop;
            }
        }
        Control::Continue
    })?;
    if let Some(t) = failure {
        return Err(DynamicsError::NoCrossing(t));
    }
    Ok(CrossingRun {
        crossings,
        t_end: out.t,
        escaped,
    })
}

/// Newton correction in time using short single steps of the true flow.
fn polish<S: OdeSystem<M>, const M: usize>(
    sys: &S,
    mut t: f64,
    mut x: [f64; M],
    index: usize,
) -> Crossing<M> {
    for _ in 0..4 {
        let mut f = [0.0; M];
        sys.rhs(t, &x, &mut f);
        if f[index] == 0.0 {
            break;
        }
        let dt = -x[index] / f[index];
        if dt.abs() < 1e-17 || !dt.is_finite() || dt.abs() > 1e-2 {
            break;
        }
        x = Dop853::single_step(sys, t, &x, dt);
        t += dt;
    }
    Crossing { t, state: x }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rotation;
    impl OdeSystem<2> for Rotation {
        fn rhs(&self, _t: f64, y: &[f64; 2], dy: &mut [f64; 2]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn crossings_of_sine() {
        let run = find_crossings(
            &Dop853::with_tol(1e-12),
            &Rotation,
            [0.0, 1.0],
            0,
            Direction::Up,
            20.0,
            3,
        )
        .unwrap();
        assert_eq!(run.crossings.len(), 3);
        for (k, c) in run.crossings.iter().enumerate() {
            let expect = 2.0 * std::f64::consts::PI * (k + 1) as f64;
            assert!((c.t - expect).abs() < 1e-11, "{} {}", c.t, expect);
            assert!(c.state[0].abs() < 1e-14);
        }
        let down = find_crossings(
            &Dop853::with_tol(1e-12),
            &Rotation,
            [0.0, 1.0],
            0,
            Direction::Down,
            20.0,
            1,
        )
        .unwrap();
        assert!((down.crossings[0].t - std::f64::consts::PI).abs() < 1e-11);
    }
}
