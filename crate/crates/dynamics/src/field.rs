//! Compiled polynomial Hamiltonians and the flows they generate.
//!
//! Variables are ordered `(q_1..q_d, p_1..p_d)` with `N = 2d`; for the center
//! manifold this is `(y, z, p_y, p_z)`.

use halo_core::poly::RealSeries;

use crate::dop853::OdeSystem;
use crate::error::{DynamicsError, Result};

#[derive(Debug, Clone)]
struct Terms<const N: usize> {
    exps: Vec<[u8; N]>,
    coefs: Vec<f64>,
}

impl<const N: usize> Terms<N> {
    fn eval(&self, pw: &[[f64; 16]; N]) -> f64 {
        let mut acc = 0.0;
        for (e, c) in self.exps.iter().zip(&self.coefs) {
            let mut t = *c;
            for i in 0..N {
                t *= pw[i][e[i] as usize];
            }
            acc += t;
        }
        acc
    }
}

fn compile<const N: usize>(s: &RealSeries) -> Terms<N> {
    let mut exps = Vec::with_capacity(s.len());
    let mut coefs = Vec::with_capacity(s.len());
    for (m, c) in s.iter() {
        let mut e = [0u8; N];
        e.copy_from_slice(&m.exps()[..N]);
        exps.push(e);
        coefs.push(*c);
    }
    Terms { exps, coefs }
}

/// A real polynomial Hamiltonian with precompiled first and second derivatives.
#[derive(Debug, Clone)]
pub struct PolyField<const N: usize> {
    series: RealSeries,
    h: Terms<N>,
    grad: Vec<Terms<N>>,
    hess: Vec<Vec<Terms<N>>>,
}

impl<const N: usize> PolyField<N> {
    pub fn new(series: &RealSeries) -> Result<Self> {
        if series.nvars() != N || N % 2 != 0 {
            return Err(halo_core::Error::DimensionMismatch {
                rows: N,
                cols: N,
                nvars: series.nvars(),
            }
            .into());
        }
        if series.degree().unwrap_or(0) >= 16 {
            return Err(halo_core::Error::Degree(series.degree().unwrap_or(0)).into());
        }
        let derivs: Vec<RealSeries> = (0..N).map(|i| series.derivative(i)).collect();
        let grad = derivs.iter().map(compile).collect();
        let hess = derivs
            .iter()
            .map(|d| (0..N).map(|j| compile(&d.derivative(j))).collect())
            .collect();
        Ok(PolyField {
            series: series.clone(),
            h: compile(series),
            grad,
            hess,
        })
    }

    pub fn series(&self) -> &RealSeries {
        &self.series
    }

    pub fn dof(&self) -> usize {
        N / 2
    }

    fn powers(x: &[f64; N]) -> [[f64; 16]; N] {
        let mut pw = [[1.0; 16]; N];
        for i in 0..N {
            for k in 1..16 {
                pw[i][k] = pw[i][k - 1] * x[i];
            }
        }
        pw
    }

    pub fn energy(&self, x: &[f64; N]) -> f64 {
        self.h.eval(&Self::powers(x))
    }

    pub fn gradient(&self, x: &[f64; N]) -> [f64; N] {
        let pw = Self::powers(x);
        let mut g = [0.0; N];
        for i in 0..N {
            g[i] = self.grad[i].eval(&pw);
        }
        g
    }

    pub fn hessian(&self, x: &[f64; N]) -> [[f64; N]; N] {
        let pw = Self::powers(x);
        let mut m = [[0.0; N]; N];
        for i in 0..N {
            for j in i..N {
                let v = self.hess[i][j].eval(&pw);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    }

    /// Hamilton's equations `q' = H_p`, `p' = -H_q`.
    pub fn vector_field(&self, x: &[f64; N]) -> [f64; N] {
        let g = self.gradient(x);
        let d = N / 2;
        let mut f = [0.0; N];
        for i in 0..d {
            f[i] = g[d + i];
            f[d + i] = -g[i];
        }
        f
    }

    /// Jacobian of the vector field, `J * Hess(H)`.
    pub fn linearization(&self, x: &[f64; N]) -> [[f64; N]; N] {
        let hs = self.hessian(x);
        let d = N / 2;
        let mut a = [[0.0; N]; N];
        for i in 0..d {
            for j in 0..N {
                a[i][j] = hs[d + i][j];
                a[d + i][j] = -hs[i][j];
            }
        }
        a
    }

    /// Solves `H(x) = h` for coordinate `index` of `base`, taking the
    /// smallest root above `base[index]` found by outward bracketing.
    pub fn solve_coordinate(&self, h: f64, base: &[f64; N], index: usize) -> Option<f64> {
        let g = |v: f64| {
            let mut x = *base;
            x[index] = v;
            self.energy(&x) - h
        };
        let start = base[index];
        let g0 = g(start);
        if g0 >= 0.0 {
            return if g0 == 0.0 { Some(start) } else { None };
        }
        let mut step = (2.0 * h.abs()).sqrt().max(1e-8) * 0.05;
        let mut lo = start;
        let mut hi = start + step;
        let mut iter = 0;
        while g(hi) < 0.0 {
            lo = hi;
            step *= 1.25;
            hi += step;
            iter += 1;
            if hi - start > ESCAPE_RADIUS || iter > 400 {
                return None;
            }
        }
        brent(&g, lo, hi, 1e-16)
    }
}

/// Radius beyond which a center-manifold orbit is declared escaped.
pub const ESCAPE_RADIUS: f64 = 10.0;

/// Root of `f` on `[a, b]` given a sign change, by Brent's method.
pub fn brent(f: &impl Fn(f64) -> f64, a: f64, b: f64, xtol: f64) -> Option<f64> {
    let (mut a, mut b) = (a, b);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    Some(b)
}

/// Initial condition `(y, 0, p_y, p_z)` on the level `h` with `p_z > 0`.
pub fn solve_pz(field: &PolyField<4>, h: f64, y: f64, p_y: f64) -> Result<f64> {
    let pz = field
        .solve_coordinate(h, &[y, 0.0, p_y, 0.0], 3)
        .ok_or(DynamicsError::OutsideShell { h, y, p_y })?;
    let x = [y, 0.0, p_y, pz];
    let residual = (field.energy(&x) - h).abs();
    if residual > 1e-13 * h.abs().max(1.0) {
        return Err(DynamicsError::OutsideShell { h, y, p_y });
    }
    Ok(pz)
}

/// Phase flow in `N` dimensions.
pub struct PhaseFlow<'a, const N: usize>(pub &'a PolyField<N>);

impl<const N: usize> OdeSystem<N> for PhaseFlow<'_, N> {
    fn rhs(&self, _t: f64, x: &[f64; N], dx: &mut [f64; N]) {
        *dx = self.0.vector_field(x);
    }
}

/// Phase flow on the center manifold with one tangent vector, `(x, eta)`.
pub struct TangentFlow<'a>(pub &'a PolyField<4>);

impl OdeSystem<8> for TangentFlow<'_> {
    fn rhs(&self, _t: f64, s: &[f64; 8], ds: &mut [f64; 8]) {
        let x = [s[0], s[1], s[2], s[3]];
        let f = self.0.vector_field(&x);
        let a = self.0.linearization(&x);
        for i in 0..4 {
            ds[i] = f[i];
            ds[4 + i] = (0..4).map(|j| a[i][j] * s[4 + j]).sum();
        }
    }
}

/// Phase flow with the full 4x4 fundamental matrix stored row-major after the state.
pub struct MonodromyFlow<'a>(pub &'a PolyField<4>);

impl OdeSystem<20> for MonodromyFlow<'_> {
    fn rhs(&self, _t: f64, s: &[f64; 20], ds: &mut [f64; 20]) {
        let x = [s[0], s[1], s[2], s[3]];
        let f = self.0.vector_field(&x);
        let a = self.0.linearization(&x);
        ds[..4].copy_from_slice(&f);
        for i in 0..4 {
            for j in 0..4 {
                ds[4 + 4 * i + j] = (0..4).map(|k| a[i][k] * s[4 + 4 * k + j]).sum();
            }
        }
    }
}

impl MonodromyFlow<'_> {
    pub fn initial(x: [f64; 4]) -> [f64; 20] {
        let mut s = [0.0; 20];
        s[..4].copy_from_slice(&x);
        for i in 0..4 {
            s[4 + 5 * i] = 1.0;
        }
        s
    }

    pub fn matrix(s: &[f64; 20]) -> [[f64; 4]; 4] {
        let mut m = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = s[4 + 4 * i + j];
            }
        }
        m
    }
}

/// Phase flow with the 2x2 variational block of the vertical pair `(z, p_z)`.
/// On the invariant plane `z = p_z = 0` this block decouples from the planar one.
pub struct VerticalBlockFlow<'a>(pub &'a PolyField<4>);

impl OdeSystem<8> for VerticalBlockFlow<'_> {
    fn rhs(&self, _t: f64, s: &[f64; 8], ds: &mut [f64; 8]) {
        let x = [s[0], s[1], s[2], s[3]];
        let f = self.0.vector_field(&x);
        let a = self.0.linearization(&x);
        ds[..4].copy_from_slice(&f);
        let blk = [[a[1][1], a[1][3]], [a[3][1], a[3][3]]];
        for i in 0..2 {
            for j in 0..2 {
                ds[4 + 2 * i + j] = blk[i][0] * s[4 + j] + blk[i][1] * s[6 + j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use halo_core::poly::Monomial;

    fn sample() -> RealSeries {
        RealSeries::from_terms(
            4,
            4,
            [
                (Monomial::new(&[2, 0, 0, 0]), 0.5),
                (Monomial::new(&[0, 0, 2, 0]), 0.5),
                (Monomial::new(&[0, 2, 0, 0]), 0.6),
                (Monomial::new(&[0, 0, 0, 2]), 0.6),
                (Monomial::new(&[1, 2, 0, 0]), 0.3),
                (Monomial::new(&[2, 0, 1, 1]), -0.2),
                (Monomial::new(&[0, 0, 4, 0]), 0.05),
            ],
        )
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let s = sample();
        let f = PolyField::<4>::new(&s).unwrap();
        let x = [0.3, -0.2, 0.1, 0.4];
        assert!((f.energy(&x) - s.eval(&x)).abs() < 1e-15);
        let g = f.gradient(&x);
        let hs = f.hessian(&x);
        let e = 1e-6;
        for i in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += e;
            xm[i] -= e;
            let fd = (f.energy(&xp) - f.energy(&xm)) / (2.0 * e);
            assert!((fd - g[i]).abs() < 1e-9);
            let gp = f.gradient(&xp);
            let gm = f.gradient(&xm);
            for j in 0..4 {
                assert!(((gp[j] - gm[j]) / (2.0 * e) - hs[j][i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn hamilton_equations_conserve_energy_rate() {
        let f = PolyField::<4>::new(&sample()).unwrap();
        let x = [0.1, 0.2, -0.3, 0.05];
        let g = f.gradient(&x);
        let v = f.vector_field(&x);
        let rate: f64 = (0..4).map(|i| g[i] * v[i]).sum();
        assert!(rate.abs() < 1e-16);
    }

    #[test]
    fn pz_solution_lies_on_shell() {
        let f = PolyField::<4>::new(&sample()).unwrap();
        let pz = solve_pz(&f, 0.1, 0.05, -0.1).unwrap();
        assert!(pz > 0.0);
        assert!((f.energy(&[0.05, 0.0, -0.1, pz]) - 0.1).abs() < 1e-15);
        assert!(matches!(
            solve_pz(&f, 0.1, 1.0, 0.0),
            Err(DynamicsError::OutsideShell { .. })
        ));
    }

    #[test]
    fn brent_finds_roots() {
        let r = brent(&|x: f64| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(brent(&|x: f64| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }

    #[test]
    fn wrong_dimension_rejected() {
        assert!(PolyField::<6>::new(&sample()).is_err());
    }
}
