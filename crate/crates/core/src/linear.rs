//! Linear data at L1/L2 and the symplectic basis that diagonalizes the
//! quadratic Hamiltonian.

use nalgebra::{Matrix4, Matrix6};
use serde::Serialize;

use crate::equilibria::CollinearPoint;
use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearData {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    pub n: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub lambda1: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub d_lambda: f64,
    pub d_omega: f64,
    pub s1: f64,
    pub s2: f64,
    /// Planar basis acting on `(x, y, p_x, p_y)`.
    #[serde(skip)]
    pub c4: Matrix4<f64>,
}

/// Second-derivative coefficients of the shifted Hamiltonian.
///
/// `b` and `delta` come from the explicit formulas; `a` and `c` are then
/// fixed by `a = -(b + delta)` and `c = b + 2 delta`.
pub fn stability_coeffs(params: &ModelParams, point: &CollinearPoint) -> Result<StabilityCoeffs> {
    let s = point.side()?;
    let (mu, q, aob) = (params.mu, params.q, params.a);
    let al = point.alpha;
    let b = -q * (1.0 - mu) / al.powi(3)
        + s * mu / (1.0 + al).powi(3)
        + s * 1.5 * aob * mu / (1.0 + al).powi(5);
    let delta = 1.5 * aob * mu / (1.0 + al).abs().powi(5);
    Ok(StabilityCoeffs {
        a: -(b + delta),
        b,
        c: b + 2.0 * delta,
        delta,
    })
}

fn discriminant(a: f64, b: f64, n: f64) -> f64 {
    let n2 = n * n;
    16.0 * a * n2 + 4.0 * a * a + 8.0 * b * n2 - 4.0 * a * b + b * b
}

/// Whether the planar block is of saddle x center type (all three sign
/// conditions on the squared eigenvalues).
pub fn check_saddle_center(a: f64, b: f64, c: f64, n: f64) -> bool {
    let disc = discriminant(a, b, n);
    if disc < 0.0 || c <= 0.0 {
        return false;
    }
    let base = -2.0 * n * n - 2.0 * a - b;
    base + disc.sqrt() > 0.0 && base - disc.sqrt() < 0.0
}

/// The simpler sufficient condition `b > n^2`.
pub fn sufficient_condition(b: f64, n: f64) -> bool {
    b > n * n
}

/// Characteristic polynomial of the planar linear flow.
pub fn char_poly(a: f64, b: f64, n: f64, lambda: f64) -> f64 {
    let n2 = n * n;
    let l2 = lambda * lambda;
    l2 * l2 + (2.0 * n2 + 2.0 * a + b) * l2 + (n2 * n2 - 2.0 * a * n2 - b * n2 + 2.0 * a * b)
}

/// Squared-eigenvalue roots `(eta1, eta2)`, `eta1 <= eta2`.
pub fn eta_roots(a: f64, b: f64, n: f64) -> (f64, f64) {
    let disc = discriminant(a, b, n).max(0.0).sqrt();
    let base = -2.0 * n * n - 2.0 * a - b;
    (0.5 * (base - disc), 0.5 * (base + disc))
}

/// `(lambda1, omega1, omega2)`.
pub fn frequencies(a: f64, b: f64, c: f64, n: f64) -> Result<(f64, f64, f64)> {
    let (eta1, eta2) = eta_roots(a, b, n);
    if !(eta1 < 0.0 && eta2 > 0.0) {
        return Err(Error::Character(format!("eta1 = {eta1:e}, eta2 = {eta2:e}")));
    }
    if c <= 0.0 {
        return Err(Error::Character(format!("c = {c:e}")));
    }
    Ok((eta2.sqrt(), (-eta1).sqrt(), c.sqrt()))
}

/// Planar symplectic basis with columns `u+/s1, u_w/s2, v-/s1, v_w/s2`.
pub fn symplectic_basis(
    a: f64,
    b: f64,
    n: f64,
    lambda1: f64,
    omega1: f64,
) -> Result<(Matrix4<f64>, f64, f64)> {
    let n2 = n * n;
    let (l, w) = (lambda1, omega1);
    let common = 4.0 * n2 * n2 - b * n2 - 6.0 * a * n2 + 2.0 * a * b - 4.0 * a * a;
    let slope = -4.0 * n2 + 2.0 * a - b;
    let d_lambda = -2.0 * l * (slope * l * l - common);
    let d_omega = -w * (slope * w * w + common);
    if !(d_lambda > 0.0) {
        return Err(Error::Scaling {
            name: "d_lambda",
            value: d_lambda,
        });
    }
    if !(d_omega > 0.0) {
        return Err(Error::Scaling {
            name: "d_omega",
            value: d_omega,
        });
    }
    let s1 = d_lambda.sqrt();
    let s2 = d_omega.sqrt();
    let n3 = n2 * n;
    let u_l = [
        2.0 * n * l,
        l * l + 2.0 * a - n2,
        n * l * l - 2.0 * a * n + n3,
        l.powi(3) + (2.0 * a + n2) * l,
    ];
    let v_l = [
        -2.0 * n * l,
        l * l + 2.0 * a - n2,
        n * l * l - 2.0 * a * n + n3,
        -l.powi(3) - (2.0 * a + n2) * l,
    ];
    let u_w = [0.0, -w * w + 2.0 * a - n2, -n * w * w - 2.0 * a * n + n3, 0.0];
    let v_w = [2.0 * n * w, 0.0, 0.0, -w.powi(3) + (2.0 * a + n2) * w];
    let mut c = Matrix4::zeros();
    for i in 0..4 {
        c[(i, 0)] = u_l[i] / s1;
        c[(i, 1)] = u_w[i] / s2;
        c[(i, 2)] = v_l[i] / s1;
        c[(i, 3)] = v_w[i] / s2;
    }
    Ok((c, s1, s2))
}

pub fn linear_data(params: &ModelParams, point: &CollinearPoint) -> Result<LinearData> {
    let sc = stability_coeffs(params, point)?;
    let n = params.n;
    if !check_saddle_center(sc.a, sc.b, sc.c, n) {
        return Err(Error::Character(format!(
            "a = {}, b = {}, c = {}",
            sc.a, sc.b, sc.c
        )));
    }
    let (eta1, eta2) = eta_roots(sc.a, sc.b, n);
    let (lambda1, omega1, omega2) = frequencies(sc.a, sc.b, sc.c, n)?;
    let (c4, s1, s2) = symplectic_basis(sc.a, sc.b, n, lambda1, omega1)?;
    Ok(LinearData {
        a: sc.a,
        b: sc.b,
        c: sc.c,
        delta: sc.delta,
        n,
        eta1,
        eta2,
        lambda1,
        omega1,
        omega2,
        d_lambda: s1 * s1,
        d_omega: s2 * s2,
        s1,
        s2,
        c4,
    })
}

/// Canonical symplectic form in `(q1, q2, p1, p2)` ordering.
pub fn j4() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    for i in 0..2 {
        j[(i, i + 2)] = 1.0;
        j[(i + 2, i)] = -1.0;
    }
    j
}

pub fn j6() -> Matrix6<f64> {
    let mut j = Matrix6::zeros();
    for i in 0..3 {
        j[(i, i + 3)] = 1.0;
        j[(i + 3, i)] = -1.0;
    }
    j
}

impl LinearData {
    /// Hessian of the planar quadratic Hamiltonian in `(x, y, p_x, p_y)`.
    pub fn planar_hessian(&self) -> Matrix4<f64> {
        let n = self.n;
        Matrix4::new(
            2.0 * self.a, 0.0, 0.0, -n,
            0.0, self.b, n, 0.0,
            0.0, n, 1.0, 0.0,
            -n, 0.0, 0.0, 1.0,
        )
    }

    /// Full basis on `(x, y, z, p_x, p_y, p_z)`, including the vertical
    /// scaling `z = z'/sqrt(omega2)`, `p_z = sqrt(omega2) p_z'`.
    pub fn basis6(&self) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        let idx = [0, 1, 3, 4];
        for i in 0..4 {
            for k in 0..4 {
                m[(idx[i], idx[k])] = self.c4[(i, k)];
            }
        }
        m[(2, 2)] = 1.0 / self.omega2.sqrt();
        m[(5, 5)] = self.omega2.sqrt();
        m
    }

    pub fn symplectic_defect(&self) -> f64 {
        let j = j4();
        (self.c4.transpose() * j * self.c4 - j).amax()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::locate_collinear;
    use crate::params::{build_params, load_case};

    fn data(name: &str, j: u8) -> LinearData {
        let p = load_case(name, None).unwrap();
        let pt = locate_collinear(&p, j).unwrap();
        linear_data(&p, &pt).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn earth_moon_values() {
        let d = data("earth-moon", 1);
        assert!(rel(d.a, -5.14772) < 1e-5);
        assert!(rel(d.b, 5.14772) < 1e-5);
        assert!(rel(d.lambda1, 2.9321) < 1e-4);
        assert!(rel(d.omega1, 2.33441) < 1e-5);
        assert!(rel(d.omega2, 2.26886) < 1e-5);
        assert!(rel(d.s1, 14.9084) < 1e-5);
        assert!(rel(d.s2, 23.4324) < 1e-5);
        assert!(check_saddle_center(d.a, d.b, d.c, d.n));
        assert!(sufficient_condition(d.b, d.n));
    }

    #[test]
    fn vesta_values() {
        let d = data("sun-vesta", 1);
        assert!(rel(d.b, 1.00363) < 1e-5);
        assert!(rel(d.lambda1, 0.10407) < 1e-4);
        assert!(rel(d.omega1, 1.0036) < 1e-4);
        assert!(rel(d.omega2, 1.00181) < 1e-5);
        assert!(rel(d.s1, 0.79682) < 1e-5);
        assert!(rel(d.s2, 2.02523) < 1e-5);
        assert!(check_saddle_center(d.a, d.b, d.c, d.n));
    }

    #[test]
    fn barycenter_frequencies() {
        let d = data("sun-barycenter", 1);
        assert!(rel(d.lambda1, 2.13994) < 1e-5);
        assert!(rel(d.omega1, 1.85169) < 1e-5);
        assert!(rel(d.omega2, 1.77498) < 1e-5);
    }

    #[test]
    fn printed_formulas_agree() {
        for name in ["earth-moon", "sun-barycenter", "sun-vesta"] {
            let p = load_case(name, None).unwrap();
            for j in [1u8, 2] {
                let pt = locate_collinear(&p, j).unwrap();
                let d = linear_data(&p, &pt).unwrap();
                let s = pt.side().unwrap();
                let al = pt.alpha;
                let mu = p.mu;
                let a = p.q * (1.0 - mu) / al.powi(3)
                    - s * mu / (1.0 + al).powi(3)
                    - s * 3.0 * p.a * mu / (1.0 + al).powi(5);
                let c = -p.q * (1.0 - mu) / al.powi(3)
                    + s * mu / (1.0 + al).powi(3)
                    + s * 4.5 * p.a * mu / (1.0 + al).powi(5);
                assert!(rel(d.a, a) < 1e-13, "{name} L{j}");
                assert!(rel(d.c, c) < 1e-13, "{name} L{j}");
                let ulp = 4.0 * f64::EPSILON * d.b.abs();
                assert!((d.a + d.b + d.delta).abs() <= ulp);
                assert!((d.c - d.b - 2.0 * d.delta).abs() <= ulp);
            }
        }
    }

    #[test]
    fn no_oblateness_means_b_equals_c() {
        let p = build_params(0.01, 0.02, 0.0).unwrap();
        let pt = locate_collinear(&p, 2).unwrap();
        let sc = stability_coeffs(&p, &pt).unwrap();
        assert_eq!(sc.c - sc.b, 0.0);
        assert_eq!(sc.a + sc.b, 0.0);
    }

    #[test]
    fn l3_unsupported() {
        let p = load_case("earth-moon", None).unwrap();
        let pt = locate_collinear(&p, 3).unwrap();
        assert!(matches!(
            stability_coeffs(&p, &pt),
            Err(Error::UnsupportedPoint(3))
        ));
    }

    #[test]
    fn synthetic_center_fails() {
        let n = 1.0;
        let b = 0.5 * n * n;
        assert!(!check_saddle_center(-b, b, b, n));
        assert!(!sufficient_condition(b, n));
    }

    #[test]
    fn characteristic_roots() {
        for name in ["earth-moon", "sun-barycenter", "sun-vesta"] {
            for j in [1u8, 2] {
                let d = data(name, j);
                let scale = d.b * d.b;
                assert!(char_poly(d.a, d.b, d.n, d.lambda1).abs() / scale < 1e-10);
                // p(i w) only involves w^2, so substitute lambda^2 = -w^2
                let w2 = -d.omega1 * d.omega1;
                let n2 = d.n * d.n;
                let p_iw = w2 * w2
                    + (2.0 * n2 + 2.0 * d.a + d.b) * w2
                    + (n2 * n2 - 2.0 * d.a * n2 - d.b * n2 + 2.0 * d.a * d.b);
                assert!(p_iw.abs() / scale < 1e-10);
            }
        }
    }

    #[test]
    fn basis_is_symplectic_and_diagonalizes() {
        for name in ["earth-moon", "sun-barycenter", "sun-vesta"] {
            for j in [1u8, 2] {
                let d = data(name, j);
                assert!(d.symplectic_defect() < 1e-10, "{name} L{j}");
                let s = d.c4.transpose() * d.planar_hessian() * d.c4;
                let mut want = Matrix4::zeros();
                want[(0, 2)] = d.lambda1;
                want[(2, 0)] = d.lambda1;
                want[(1, 1)] = d.omega1;
                want[(3, 3)] = d.omega1;
                assert!((s - want).amax() < 1e-10, "{name} L{j}: {s}");
                let m6 = d.basis6();
                let j6m = j6();
                assert!((m6.transpose() * j6m * m6 - j6m).amax() < 1e-10);
            }
        }
    }
}
