//! Lie-series reduction to the center manifold.
//!
//! Each degree `k` generator removes the monomials whose exponents of the
//! hyperbolic pair differ, so that `q1 = p1 = 0` is invariant. The result is
//! realified and restricted to `(y, z, p_y, p_z)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expansion::{realification_matrix, ExpandedHamiltonian};
use crate::linear::LinearData;
use crate::poly::{ComplexSeries, Monomial, RealSeries};

const RESIDUAL_TOL: f64 = 1e-11;
const IMAG_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CMHamiltonian {
    pub lambda1: f64,
    pub omega1: f64,
    pub omega2: f64,
    pub degree: u32,
    /// Real Hamiltonian in `(y, z, p_y, p_z)`.
    pub h: RealSeries,
    /// Same Hamiltonian in the complex variables `(q2, q3, p2, p3)`.
    pub complex: ComplexSeries,
    /// Normalized six-variable Hamiltonian in real variables, before restriction.
    pub full: RealSeries,
    /// Generators `G_3 ..= G_N` in the complex diagonal variables.
    pub generators: Vec<ComplexSeries>,
    /// Homological residual per degree, `(k, max |H_k| on removed monomials)`.
    pub residuals: Vec<(u32, f64)>,
    pub max_imag: f64,
}

impl CMHamiltonian {
    pub fn remainder_degree(&self) -> u32 {
        self.degree + 1
    }

    /// Quadratic part `(w1/2)(y^2 + p_y^2) + (w2/2)(z^2 + p_z^2)` only.
    pub fn quadratic_only(&self) -> RealSeries {
        self.h.degree_part(2)
    }
}

/// `<k_p - k_q, eta>` for a six-variable exponent.
pub fn divisor(m: &Monomial, eta: &[Complex64; 3]) -> Complex64 {
    let e = m.exps();
    (0..3)
        .map(|i| eta[i] * (e[i + 3] as f64 - e[i] as f64))
        .sum()
}

/// Monomials that survive the reduction: equal exponents in `q1` and `p1`.
pub fn is_center_term(m: &Monomial) -> bool {
    m.get(0) == m.get(3)
}

/// Generator of the homological equation `{H2, G} = -H_k` restricted to the
/// monomials coupling the hyperbolic pair.
pub fn lie_generating(hk: &ComplexSeries, eta: &[Complex64; 3]) -> Result<ComplexSeries> {
    let floor = 0.5 * eta[0].norm();
    let mut g = ComplexSeries::zero(hk.nvars(), hk.max_degree());
    for (m, c) in hk.iter().filter(|(m, _)| !is_center_term(m)) {
        let d = divisor(m, eta);
        if d.norm() < floor {
            return Err(Error::SmallDivisor {
                divisor: d.norm(),
                monomial: format!("{:?}", m.exps()),
            });
        }
        g.add_term(*m, -*c / d);
    }
    Ok(g)
}

/// `exp(L_G) H = H + {H, G} + {{H, G}, G}/2 + ...`, truncated at the grading of `h`.
pub fn lie_transform(h: &ComplexSeries, g: &ComplexSeries) -> Result<ComplexSeries> {
    let mut out = h.clone();
    let mut term = h.clone();
    for k in 1..=h.max_degree() + 1 {
        term = term
            .poisson_bracket(g)?
            .scale(Complex64::new(1.0 / k as f64, 0.0));
        if term.is_empty() {
            break;
        }
        out = &out + &term;
    }
    Ok(out)
}

/// Frequency vector `(lambda1, i w1, i w2)`.
pub fn eta(lin: &LinearData) -> [Complex64; 3] {
    [
        Complex64::new(lin.lambda1, 0.0),
        Complex64::new(0.0, lin.omega1),
        Complex64::new(0.0, lin.omega2),
    ]
}

/// Keeps the terms free of `q1, p1` and renumbers `(q2, q3, p2, p3)` as four variables.
pub fn restrict_to_center(h: &ComplexSeries) -> ComplexSeries {
    let terms = h
        .iter()
        .filter(|(m, _)| m.get(0) == 0 && m.get(3) == 0)
        .map(|(m, c)| {
            let e = m.exps();
            (Monomial::new(&[e[1], e[2], e[4], e[5]]), *c)
        });
    ComplexSeries::from_terms(4, h.max_degree(), terms)
}

fn realify(h: &ComplexSeries, elliptic: &[usize]) -> Result<(RealSeries, f64)> {
    let r = h.substitute_linear(&realification_matrix(h.nvars(), elliptic))?;
    let im = r.max_imag();
    let scale = r.max_abs().max(1.0);
    if im > IMAG_TOL * scale {
        return Err(Error::ImaginaryResidue(im));
    }
    Ok((r.map(|c| c.re), im / scale))
}

/// Degree-by-degree reduction of a diagonalized complex expansion.
pub fn cm_normalize(exp: &ExpandedHamiltonian, lin: &LinearData) -> Result<CMHamiltonian> {
    let n = exp.degree;
    let eta = eta(lin);
    let mut h = exp.h.clone();
    let mut generators = Vec::new();
    let mut residuals = Vec::new();
    for k in 3..=n {
        let g = lie_generating(&h.degree_part(k), &eta)?;
        h = lie_transform(&h, &g)?;
        let hk = h.degree_part(k);
        let scale = hk.max_abs().max(1.0);
        let residual = hk
            .iter()
            .filter(|(m, _)| !is_center_term(m))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        if residual > RESIDUAL_TOL * scale {
            return Err(Error::Normalization { degree: k, residual });
        }
        residuals.push((k, residual));
        h = h.filter(|m, _| m.degree() != k || is_center_term(m));
        generators.push(g);
    }
    let complex = restrict_to_center(&h);
    let (cm, im_cm) = realify(&complex, &[0, 1])?;
    let (full, im_full) = realify(&h, &[1, 2])?;
    Ok(CMHamiltonian {
        lambda1: lin.lambda1,
        omega1: lin.omega1,
        omega2: lin.omega2,
        degree: n,
        h: cm,
        complex,
        full,
        generators,
        residuals,
        max_imag: im_cm.max(im_full),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::locate_collinear;
    use crate::expansion::{diagonal_quadratic, diagonalize_and_complexify, expand_hamiltonian};
    use crate::linear::linear_data;
    use crate::params::load_case;

    fn reduce(name: &str, j: u8, n: u32) -> (CMHamiltonian, LinearData) {
        let p = load_case(name, None).unwrap();
        let pt = locate_collinear(&p, j).unwrap();
        let lin = linear_data(&p, &pt).unwrap();
        let e = expand_hamiltonian(&p, &pt, n).unwrap();
        let d = diagonalize_and_complexify(&e, &lin).unwrap();
        (cm_normalize(&d, &lin).unwrap(), lin)
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn normal_form_input_gives_zero_generator() {
        let eta = [c(2.0, 0.0), c(0.0, 1.0), c(0.0, 1.1)];
        let h = ComplexSeries::from_terms(
            6,
            4,
            [
                (Monomial::new(&[1, 1, 0, 1, 0, 0]), c(1.0, 0.5)),
                (Monomial::new(&[0, 2, 1, 0, 0, 0]), c(-0.3, 0.0)),
            ],
        );
        assert!(lie_generating(&h, &eta).unwrap().is_empty());
    }

    #[test]
    fn single_term_divisor() {
        let (lam, w, w2) = (2.0, 1.3, 1.1);
        let eta = [c(lam, 0.0), c(0.0, w), c(0.0, w2)];
        let h = ComplexSeries::monomial(6, 3, &[2, 1, 0, 0, 0, 0], c(0.7, 0.0));
        let g = lie_generating(&h, &eta).unwrap();
        let want = -c(0.7, 0.0) / c(-2.0 * lam, -w);
        assert!((g.coeff(&[2, 1]) - want).norm() < 1e-15);
        // the generator solves the homological equation
        let h2 = ComplexSeries::from_terms(
            6,
            3,
            [
                (Monomial::new(&[1, 0, 0, 1]), eta[0]),
                (Monomial::new(&[0, 1, 0, 0, 1]), eta[1]),
                (Monomial::new(&[0, 0, 1, 0, 0, 1]), eta[2]),
            ],
        );
        let lhs = h2.poisson_bracket(&g).unwrap();
        assert!((&lhs + &h).max_abs() < 1e-15);
    }

    #[test]
    fn divisors_are_bounded_below() {
        for name in ["earth-moon", "sun-barycenter", "sun-vesta"] {
            let (cm, lin) = reduce(name, 1, 5);
            let eta = eta(&lin);
            for g in &cm.generators {
                for (m, _) in g.iter() {
                    assert!(divisor(m, &eta).norm() >= lin.lambda1 * (1.0 - 1e-12));
                }
            }
        }
    }

    #[test]
    fn vesta_center_manifold_coefficients() {
        let (cm, lin) = reduce("sun-vesta", 1, 4);
        assert!((cm.h.coeff(&[2, 0, 0, 0]) - lin.omega1 / 2.0).abs() < 1e-12);
        assert!((cm.h.coeff(&[0, 2, 0, 0]) - lin.omega2 / 2.0).abs() < 1e-12);
        assert!((cm.h.coeff(&[2, 0, 0, 0]) - 0.501797549378742).abs() < 1e-8);
        assert!((cm.h.coeff(&[0, 2, 0, 0]) - 0.500906031584819).abs() < 1e-8);
        // the case table rounds mu, which moves quartic terms by about 1.5e-6
        assert!((cm.h.coeff(&[4, 0, 0, 0]) + 0.02099512477285749).abs() < 1e-5 * 0.021);
        assert!(cm.max_imag <= 1e-12);
        for (_, r) in &cm.residuals {
            assert!(*r <= 1e-12);
        }
    }

    #[test]
    fn reduced_hamiltonian_structure() {
        for (name, j) in [("earth-moon", 1u8), ("earth-moon", 2), ("sun-vesta", 2)] {
            let (cm, lin) = reduce(name, j, 6);
            let q = cm.quadratic_only();
            assert_eq!(q.len(), 4);
            assert!((q.coeff(&[0, 0, 2, 0]) - lin.omega1 / 2.0).abs() < 1e-10);
            assert!((q.coeff(&[0, 0, 0, 2]) - lin.omega2 / 2.0).abs() < 1e-10);
            for (m, _) in cm.h.iter() {
                assert_eq!((m.get(1) + m.get(3)) % 2, 0, "{name} {:?}", m);
            }
            // z = p_z = 0 is invariant: no monomial is linear in (z, p_z)
            for (m, _) in cm.h.iter() {
                assert_ne!(m.get(1) + m.get(3), 1);
            }
            for (m, _) in cm.full.iter() {
                assert!(is_center_term(m));
            }
        }
    }

    #[test]
    fn truncation_consistency() {
        let (a, _) = reduce("sun-barycenter", 1, 4);
        let (b, _) = reduce("sun-barycenter", 1, 6);
        let low = b.h.with_max_degree(4);
        assert!((&low - &a.h).max_abs() < 1e-12);
    }

    #[test]
    fn quadratic_input_stays_quadratic() {
        let (p, pt) = {
            let p = load_case("earth-moon", None).unwrap();
            (p, locate_collinear(&p, 1).unwrap())
        };
        let lin = linear_data(&p, &pt).unwrap();
        let mut e = expand_hamiltonian(&p, &pt, 4).unwrap();
        e.h = diagonal_quadratic(&lin, 4);
        let e = ExpandedHamiltonian { stages: vec![], ..e };
        let cm = cm_normalize(&e, &lin).unwrap();
        assert_eq!(cm.h.len(), 4);
        assert!(cm.generators.iter().all(|g| g.is_empty()));
    }

    #[test]
    fn homological_identity_at_degree_three() {
        let p = load_case("earth-moon", None).unwrap();
        let pt = locate_collinear(&p, 1).unwrap();
        let lin = linear_data(&p, &pt).unwrap();
        let e = expand_hamiltonian(&p, &pt, 4).unwrap();
        let d = diagonalize_and_complexify(&e, &lin).unwrap();
        let eta = eta(&lin);
        let g3 = lie_generating(&d.h.degree_part(3), &eta).unwrap();
        let hat = lie_transform(&d.h, &g3).unwrap();
        let h2 = d.h.degree_part(2);
        let ident = &(&hat.degree_part(3) - &d.h.degree_part(3)) - &h2.poisson_bracket(&g3).unwrap();
        assert!(ident.max_abs() <= 1e-12);
        // degree four collects H4 + {H3, G3} + {{H2, G3}, G3}/2
        let h3g = d.h.degree_part(3).poisson_bracket(&g3).unwrap();
        let h22 = h2.poisson_bracket(&g3).unwrap().poisson_bracket(&g3).unwrap();
        let want = &(&d.h.degree_part(4) + &h3g) + &h22.scale(Complex64::new(0.5, 0.0));
        assert!((&hat.degree_part(4) - &want).max_abs() <= 1e-12);
    }
}
