//! Taylor expansion of the shifted and scaled Hamiltonian about L1/L2 and
//! its transformation to diagonal complex form.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::equilibria::CollinearPoint;
use crate::error::{Error, Result};
use crate::linear::LinearData;
use crate::params::ModelParams;
use crate::poly::{ComplexSeries, Monomial, RealSeries};

pub const MAX_DEGREE: u32 = 8;
const GRADIENT_TOL: f64 = 1e-10;
const QUADRATIC_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageKind {
    ShiftScale,
    SymplecticBasis,
    Complexification,
}

/// One applied change of variables. `forward` maps new variables to old
/// ones (`old = forward * new`); the shift/scale stage is affine and has no
/// matrix.
#[derive(Debug, Clone)]
pub struct Stage {
    pub kind: StageKind,
    pub note: String,
    pub forward: Option<DMatrix<Complex64>>,
    pub inverse: Option<DMatrix<Complex64>>,
}

#[derive(Debug, Clone)]
pub struct ExpandedHamiltonian {
    pub params: ModelParams,
    pub point: CollinearPoint,
    pub degree: u32,
    /// Expansion in the shifted, scaled synodic variables `(x, y, z, p_x, p_y, p_z)`.
    pub synodic: RealSeries,
    /// Hamiltonian in the variables produced by the last stage.
    pub h: ComplexSeries,
    pub stages: Vec<Stage>,
    /// Size of the discarded linear part relative to the terms that cancel in it.
    pub gradient_residual: f64,
}

/// Homogeneous pieces `G_0..G_n` of `|r - x_p e_x|^(-2 lambda)` in units of
/// `|x_p|`, i.e. `rho^k C_k^lambda(sign(x_p) x / rho)`, in six variables.
pub fn gegenbauer_terms(lambda: f64, x_p: f64, n: u32) -> Vec<RealSeries> {
    let s = x_p.signum();
    let var = |i| RealSeries::variable(6, n, i);
    let x = var(0).scale(s);
    let rho2 = &(&(&var(0) * &var(0)) + &(&var(1) * &var(1))) + &(&var(2) * &var(2));
    let mut g = vec![RealSeries::constant(6, n, 1.0)];
    if n >= 1 {
        g.push(x.scale(2.0 * lambda));
    }
    for k in 2..=n as usize {
        let kf = k as f64;
        let t1 = (&x * &g[k - 1]).scale(2.0 * (kf + lambda - 1.0) / kf);
        let t2 = (&rho2 * &g[k - 2]).scale(-(kf + 2.0 * lambda - 2.0) / kf);
        g.push(&t1 + &t2);
    }
    g
}

/// `|r - x_p e_x|^(-k)` expanded about the origin up to degree `n`.
pub fn inverse_distance(k: u32, x_p: f64, n: u32) -> RealSeries {
    let d = x_p.abs();
    let mut out = RealSeries::zero(6, n);
    for (deg, g) in gegenbauer_terms(k as f64 / 2.0, x_p, n).iter().enumerate() {
        out = &out + &g.scale(d.powi(-(deg as i32 + k as i32)));
    }
    out
}

fn check_degree(n: u32) -> Result<()> {
    if (2..=MAX_DEGREE).contains(&n) {
        Ok(())
    } else {
        Err(Error::Degree(n))
    }
}

/// Offset of the point from the barycenter, `mu + alpha`.
fn origin(params: &ModelParams, point: &CollinearPoint) -> f64 {
    params.mu + point.alpha
}

/// Restriction of the scaled Hamiltonian to zero momenta, evaluated from the
/// closed-form potential. Used as an independent reference for the series.
pub fn scaled_potential_energy(
    params: &ModelParams,
    point: &CollinearPoint,
    x: f64,
    y: f64,
    z: f64,
) -> f64 {
    let g = point.gamma;
    let x0 = origin(params, point);
    let (bx, by, bz) = (-g * x + x0, -g * y, g * z);
    let mu = params.mu;
    let r1 = ((bx - mu).powi(2) + by * by + bz * bz).sqrt();
    let r2 = ((bx - mu + 1.0).powi(2) + by * by + bz * bz).sqrt();
    let u = params.q * (1.0 - mu) / r1 + mu / r2 + mu * params.a / (2.0 * r2.powi(3))
        - 3.0 * mu * params.a * bz * bz / (2.0 * r2.powi(5));
    params.n2() * x0 * x / g - u / (g * g)
}

/// Expansion of the Hamiltonian in the variables centred at `point` and
/// scaled by its distance `gamma` to the closer primary. The Hamiltonian is
/// divided by `gamma^2`, so the quadratic part reads
/// `(p^2)/2 + n (y p_x - x p_y) + a x^2 + b y^2/2 + c z^2/2`.
pub fn expand_hamiltonian(
    params: &ModelParams,
    point: &CollinearPoint,
    n: u32,
) -> Result<ExpandedHamiltonian> {
    check_degree(n)?;
    point.side()?;
    let g = point.gamma;
    let mu = params.mu;
    let x0 = origin(params, point);
    // primaries in scaled coordinates
    let x1 = point.alpha / g;
    let x2 = (point.alpha + 1.0) / g;

    let var = |i| RealSeries::variable(6, n, i);
    let mut u = inverse_distance(1, x1, n).scale(params.q * (1.0 - mu) / g);
    u = &u + &inverse_distance(1, x2, n).scale(mu / g);
    if params.a > 0.0 {
        u = &u + &inverse_distance(3, x2, n).scale(mu * params.a / (2.0 * g.powi(3)));
        let z2 = &var(2) * &var(2);
        let zterm = &z2 * &inverse_distance(5, x2, n - 2).with_max_degree(n);
        u = &u + &zterm.scale(-3.0 * mu * params.a / (2.0 * g.powi(3)));
    }
    let nn = params.n;
    let mut h = u.scale(-1.0 / (g * g));
    let linear_drive = params.n2() * x0 / g;
    h = &h + &var(0).scale(linear_drive);
    for i in 3..6 {
        h = &h + &(&var(i) * &var(i)).scale(0.5);
    }
    h = &h + &(&var(1) * &var(3)).scale(nn);
    h = &h + &(&var(0) * &var(4)).scale(-nn);

    let lin = h.filter(|m, _| m.degree() == 1);
    let gradient_residual = lin.max_abs() / linear_drive.abs().max(1.0);
    if gradient_residual > GRADIENT_TOL {
        return Err(Error::NotEquilibrium(gradient_residual));
    }
    let synodic = h.filter(|m, _| m.degree() >= 2);
    let stage = Stage {
        kind: StageKind::ShiftScale,
        note: format!(
            "X = -gamma x + {x0:.17e}, Y = -gamma y, Z = gamma z, gamma = {g:.17e}; \
             Hamiltonian divided by gamma^2"
        ),
        forward: None,
        inverse: None,
    };
    Ok(ExpandedHamiltonian {
        params: *params,
        point: *point,
        degree: n,
        h: synodic.to_complex(),
        synodic,
        stages: vec![stage],
        gradient_residual,
    })
}

fn to_complex_matrix(m: &nalgebra::Matrix6<f64>) -> DMatrix<Complex64> {
    DMatrix::from_fn(6, 6, |i, j| Complex64::new(m[(i, j)], 0.0))
}

/// `y = (q + i p)/sqrt2`, `p_y = (i q + p)/sqrt2` for each listed position
/// index `q` (its momentum sits at `q + nvars/2`).
pub fn complexification_matrix(nvars: usize, elliptic: &[usize]) -> DMatrix<Complex64> {
    pair_matrix(nvars, elliptic, 1.0)
}

/// Inverse of [`complexification_matrix`]: `q = (y - i p_y)/sqrt2`, `p = (p_y - i y)/sqrt2`.
pub fn realification_matrix(nvars: usize, elliptic: &[usize]) -> DMatrix<Complex64> {
    pair_matrix(nvars, elliptic, -1.0)
}

fn pair_matrix(nvars: usize, elliptic: &[usize], sign: f64) -> DMatrix<Complex64> {
    let d = nvars / 2;
    let mut m = DMatrix::<Complex64>::identity(nvars, nvars);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for &q in elliptic {
        let p = q + d;
        m[(q, q)] = Complex64::new(r, 0.0);
        m[(q, p)] = Complex64::new(0.0, sign * r);
        m[(p, q)] = Complex64::new(0.0, sign * r);
        m[(p, p)] = Complex64::new(r, 0.0);
    }
    m
}

/// Expected diagonal quadratic part `lambda q1 p1 + i w1 q2 p2 + i w2 q3 p3`.
pub fn diagonal_quadratic(lin: &LinearData, n: u32) -> ComplexSeries {
    ComplexSeries::from_terms(
        6,
        n,
        [
            (Monomial::new(&[1, 0, 0, 1, 0, 0]), Complex64::new(lin.lambda1, 0.0)),
            (Monomial::new(&[0, 1, 0, 0, 1, 0]), Complex64::new(0.0, lin.omega1)),
            (Monomial::new(&[0, 0, 1, 0, 0, 1]), Complex64::new(0.0, lin.omega2)),
        ],
    )
}

/// Applies the symplectic basis and the complexification of the two
/// elliptic pairs.
pub fn diagonalize_and_complexify(
    exp: &ExpandedHamiltonian,
    lin: &LinearData,
) -> Result<ExpandedHamiltonian> {
    let basis = to_complex_matrix(&lin.basis6());
    let basis_inv = basis
        .clone()
        .try_inverse()
        .ok_or(Error::BasisMismatch(f64::INFINITY))?;
    let cplx = complexification_matrix(6, &[1, 2]);
    let cplx_inv = realification_matrix(6, &[1, 2]);
    let h = exp
        .h
        .substitute_linear(&basis)?
        .substitute_linear(&cplx)?;
    let off = (&h.degree_part(2) - &diagonal_quadratic(lin, exp.degree)).max_abs();
    if off > QUADRATIC_TOL {
        return Err(Error::BasisMismatch(off));
    }
    // drop round-off in the quadratic part so later stages see the exact form
    let h = &h.filter(|m, _| m.degree() != 2) + &diagonal_quadratic(lin, exp.degree);
    let mut stages = exp.stages.clone();
    stages.push(Stage {
        kind: StageKind::SymplecticBasis,
        note: format!("s1 = {:.17e}, s2 = {:.17e}", lin.s1, lin.s2),
        forward: Some(basis),
        inverse: Some(basis_inv),
    });
    stages.push(Stage {
        kind: StageKind::Complexification,
        note: "y = (q2 + i p2)/sqrt2, p_y = (i q2 + p2)/sqrt2, same for z".into(),
        forward: Some(cplx),
        inverse: Some(cplx_inv),
    });
    Ok(ExpandedHamiltonian {
        h,
        stages,
        ..exp.clone()
    })
}

impl ExpandedHamiltonian {
    /// Maps `h` back through the recorded linear stages to the synodic variables.
    pub fn undo_stages(&self) -> Result<ComplexSeries> {
        let mut h = self.h.clone();
        for st in self.stages.iter().rev() {
            if let Some(inv) = &st.inverse {
                h = h.substitute_linear(inv)?;
            }
        }
        Ok(h)
    }

    pub fn stage_log(&self) -> String {
        self.stages
            .iter()
            .map(|s| format!("{:?}: {}", s.kind, s.note))
            .collect::<Vec<_>>()
            .join("\n")
    }
}
