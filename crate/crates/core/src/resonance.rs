//! Resonant normal form of the center-manifold Hamiltonian near the 1:1
//! commensurability of the planar and vertical frequencies, and the
//! first-order bifurcation thresholds of the halo and anti-halo families.
//!
//! | quantity  | center-manifold naming | resonant naming |
//! |-----------|------------------------|-----------------|
//! | planar    | `omega1`               | `omega_p`       |
//! | vertical  | `omega2`               | `omega_v`       |

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::center_manifold::CMHamiltonian;
use crate::error::{Error, Result};
use crate::expansion::complexification_matrix;
use crate::poly::{ComplexSeries, Monomial, RealSeries};

const CUBIC_RESONANT_TOL: f64 = 1e-12;
const DENOMINATOR_FLOOR: f64 = 1e-14;
const ANGLE_TOL: f64 = 1e-9;

/// Coefficients of the quartic resonant terms
/// `a20 Q2^2 P2^2 + a02 Q3^2 P3^2 + a11 Q2 P2 Q3 P3 + b11 (Q2^2 P3^2 + Q3^2 P2^2)`
/// in the complex variables where the quadratic part is
/// `i omega_p Q2 P2 + i omega_v Q3 P3`. With `Q P = -i I` the action-angle
/// quartic is `-(a20 I2^2 + a02 I3^2 + a11 I2 I3 + 2 b11 I2 I3 cos 2psi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResonantCoeffs {
    pub a20: f64,
    pub a02: f64,
    pub a11: f64,
    pub b11: f64,
    pub omega_p: f64,
    pub omega_v: f64,
    pub delta: f64,
    pub hnew: HNew,
}

/// Coefficients of the reduced one-degree-of-freedom Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HNew {
    pub a_tilde: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl HNew {
    fn from_coeffs(a20: f64, a02: f64, a11: f64, b11: f64, delta: f64, wv: f64) -> Self {
        HNew {
            a_tilde: delta / wv,
            a: (a20 + a02 - a11) / wv,
            b: a02 / wv,
            c: (a11 - 2.0 * a02) / wv,
            d: -2.0 * b11 / wv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    /// Anti-halo families leave the planar orbit (planar orbit re-stabilizes).
    pub e_iy: f64,
    /// Anti-halo families collapse onto the vertical orbit.
    pub e_iz: f64,
    /// Halo families leave the planar orbit (first bifurcation).
    pub e_ly: f64,
    /// Halo families would collapse onto the vertical orbit.
    pub e_lz: f64,
    pub h_iy: f64,
    pub h_iz: f64,
    pub h_ly: f64,
    pub h_lz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyKind {
    /// Anti-halo, `psi` in `{0, pi}`.
    Inclined,
    /// Halo, `psi` in `{pi/2, 3pi/2}`.
    Loop,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `<b - a, (i omega_p, i omega_v)>` for an exponent `(a2, a3, b2, b3)`.
fn resonant_divisor(m: &Monomial, wp: f64, wv: f64) -> Complex64 {
    let e = m.exps();
    Complex64::new(
        0.0,
        (e[2] as f64 - e[0] as f64) * wp + (e[3] as f64 - e[1] as f64) * wv,
    )
}

/// Whether `a - b` is a multiple of `(1, -1)`.
fn is_resonant(m: &Monomial) -> bool {
    let e = m.exps();
    let k2 = e[2] as i32 - e[0] as i32;
    let k3 = e[3] as i32 - e[1] as i32;
    k2 + k3 == 0
}

/// Complex form of a real center-manifold Hamiltonian.
pub fn complexify_cm(h: &RealSeries) -> Result<ComplexSeries> {
    h.to_complex()
        .substitute_linear(&complexification_matrix(4, &[0, 1]))
}

/// Quartic part after removing the whole cubic part with one Lie step:
/// `H4 + {H3, X3}/2` where `{H2, X3} = -H3`.
pub fn second_order_quartic(hc: &ComplexSeries, wp: f64, wv: f64) -> Result<ComplexSeries> {
    let h3 = hc.degree_part(3);
    let worst = h3
        .iter()
        .filter(|(m, _)| is_resonant(m))
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    if worst > CUBIC_RESONANT_TOL {
        return Err(Error::ResonantCubic(worst));
    }
    let mut chi = ComplexSeries::zero(4, hc.max_degree());
    for (m, v) in h3.iter() {
        chi.add_term(*m, -*v / resonant_divisor(m, wp, wv));
    }
    let corr = h3.poisson_bracket(&chi)?.degree_part(4);
    Ok(&hc.degree_part(4) + &corr.scale(c(0.5)))
}

pub fn resonant_coeffs(cm: &CMHamiltonian) -> Result<ResonantCoeffs> {
    if cm.degree < 4 {
        return Err(Error::Degree(cm.degree));
    }
    resonant_coeffs_from(&cm.h, cm.omega1, cm.omega2)
}

/// Resonant coefficients of a real Hamiltonian in `(y, z, p_y, p_z)` whose
/// quadratic part has frequencies `omega_p`, `omega_v`.
pub fn resonant_coeffs_from(h: &RealSeries, omega_p: f64, omega_v: f64) -> Result<ResonantCoeffs> {
    let hc = complexify_cm(&h.with_max_degree(4))?;
    let h4 = second_order_quartic(&hc, omega_p, omega_v)?;
    let a20 = h4.coeff(&[2, 0, 2, 0]).re;
    let a02 = h4.coeff(&[0, 2, 0, 2]).re;
    let a11 = h4.coeff(&[1, 1, 1, 1]).re;
    let b11 = h4.coeff(&[2, 0, 0, 2]).re;
    let delta = omega_p - omega_v;
    Ok(ResonantCoeffs {
        a20,
        a02,
        a11,
        b11,
        omega_p,
        omega_v,
        delta,
        hnew: HNew::from_coeffs(a20, a02, a11, b11, delta, omega_v),
    })
}

impl ResonantCoeffs {
    /// Resonant normal form `i wp Q2P2 + i wv Q3P3 + quartic` in complex variables.
    pub fn normal_form(&self) -> ComplexSeries {
        let i = Complex64::i();
        ComplexSeries::from_terms(
            4,
            4,
            [
                (Monomial::new(&[1, 0, 1, 0]), i * self.omega_p),
                (Monomial::new(&[0, 1, 0, 1]), i * self.omega_v),
                (Monomial::new(&[2, 0, 2, 0]), c(self.a20)),
                (Monomial::new(&[0, 2, 0, 2]), c(self.a02)),
                (Monomial::new(&[1, 1, 1, 1]), c(self.a11)),
                (Monomial::new(&[2, 0, 0, 2]), c(self.b11)),
                (Monomial::new(&[0, 2, 2, 0]), c(self.b11)),
            ],
        )
    }

    /// Total action `I2 + I3 = i (Q2 P2 + Q3 P3)`.
    pub fn total_action() -> ComplexSeries {
        let i = Complex64::i();
        ComplexSeries::from_terms(
            4,
            4,
            [
                (Monomial::new(&[1, 0, 1, 0]), i),
                (Monomial::new(&[0, 1, 0, 1]), i),
            ],
        )
    }
}

fn guarded(num: f64, den: f64) -> Result<f64> {
    if den.abs() < DENOMINATOR_FLOOR {
        Err(Error::DegenerateResonance(den))
    } else {
        Ok(num / den)
    }
}

/// Family thresholds. Each value of the total action is `delta omega_v^2`
/// over its denominator; energies are that value divided by `omega_v`.
pub fn thresholds(rc: &ResonantCoeffs) -> Result<Thresholds> {
    let (a20, a02, a11, b11) = (rc.a20, rc.a02, rc.a11, rc.b11);
    let w = rc.omega_v;
    let num = rc.delta * w * w;
    let e_iy = guarded(num, -a11 + 2.0 * (a20 - b11))?;
    let e_iz = guarded(num, -2.0 * a02 + a11 + 2.0 * b11)?;
    let e_ly = guarded(num, -a11 + 2.0 * (a20 + b11))?;
    let e_lz = guarded(num, -2.0 * a02 - a11 + 2.0 * b11)?;
    Ok(Thresholds {
        e_iy,
        e_iz,
        e_ly,
        e_lz,
        h_iy: e_iy / w,
        h_iz: e_iz / w,
        h_ly: e_ly / w,
        h_lz: e_lz / w,
    })
}

/// Family of a critical resonant angle.
pub fn family_classification(psi: f64) -> Result<FamilyKind> {
    if !psi.is_finite() {
        return Err(Error::NotCriticalAngle(psi));
    }
    let a = psi.rem_euclid(2.0 * PI);
    let near = |t: f64| (a - t).abs() < ANGLE_TOL;
    if near(0.0) || near(PI) || near(2.0 * PI) {
        Ok(FamilyKind::Inclined)
    } else if near(FRAC_PI_2) || near(3.0 * FRAC_PI_2) {
        Ok(FamilyKind::Loop)
    } else {
        Err(Error::NotCriticalAngle(psi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::center_manifold::cm_normalize;
    use crate::equilibria::locate_collinear;
    use crate::expansion::{diagonalize_and_complexify, expand_hamiltonian};
    use crate::linear::linear_data;
    use crate::params::{load_case, ModelParams};

    fn cm_for(p: &ModelParams, j: u8) -> CMHamiltonian {
        let pt = locate_collinear(p, j).unwrap();
        let lin = linear_data(p, &pt).unwrap();
        let e = expand_hamiltonian(p, &pt, 4).unwrap();
        cm_normalize(&diagonalize_and_complexify(&e, &lin).unwrap(), &lin).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn earth_moon_coefficients() {
        let p = load_case("earth-moon", None).unwrap();
        let rc = resonant_coeffs(&cm_for(&p, 1)).unwrap();
        assert!(rel(rc.a20, 0.162109) < 1e-4, "{rc:?}");
        assert!(rel(rc.a02, 0.144891) < 1e-4);
        assert!(rel(rc.a11, 0.0726274) < 1e-4);
        assert!(rel(rc.b11, 0.116537) < 1e-4);
        let t = thresholds(&rc).unwrap();
        assert!((t.h_ly - 0.3069).abs() < 5e-4);
    }

    #[test]
    fn vesta_coefficients() {
        let p = load_case("sun-vesta", None).unwrap();
        let cm = cm_for(&p, 1);
        let rc = resonant_coeffs(&cm).unwrap();
        assert!(rel(rc.a20, 0.0157472) < 1e-4, "{rc:?}");
        assert!(rel(rc.a02, 0.00203253) < 1e-4);
        assert!(rel(rc.a11, 4.11966e-7) < 1e-4);
        assert!(rel(rc.b11, 0.00533371) < 1e-4);
        let t = thresholds(&rc).unwrap();
        assert!((t.h_ly - 0.0424).abs() < 5e-4);
        assert!(t.h_ly < t.h_iy && t.h_iy < t.h_iz);
        let h = rc.hnew;
        assert_eq!(h.b, rc.a02 / rc.omega_v);
        assert_eq!(h.d, -2.0 * rc.b11 / rc.omega_v);
        assert_eq!(h.a_tilde, rc.delta / rc.omega_v);
    }

    #[test]
    fn zero_quartic_part() {
        let h = RealSeries::from_terms(
            4,
            4,
            [
                (Monomial::new(&[2, 0, 0, 0]), 0.5),
                (Monomial::new(&[0, 0, 2, 0]), 0.5),
                (Monomial::new(&[0, 2, 0, 0]), 0.45),
                (Monomial::new(&[0, 0, 0, 2]), 0.45),
            ],
        );
        let rc = resonant_coeffs_from(&h, 1.0, 0.9).unwrap();
        assert_eq!((rc.a20, rc.a02, rc.a11, rc.b11), (0.0, 0.0, 0.0, 0.0));
        assert!(matches!(thresholds(&rc), Err(Error::DegenerateResonance(_))));
    }

    #[test]
    fn exact_resonance_gives_zero_thresholds() {
        let p = load_case("earth-moon", None).unwrap();
        let mut rc = resonant_coeffs(&cm_for(&p, 1)).unwrap();
        rc.omega_v = rc.omega_p;
        rc.delta = 0.0;
        let t = thresholds(&rc).unwrap();
        assert_eq!([t.e_iy, t.e_iz, t.e_ly, t.e_lz], [0.0; 4]);
    }

    #[test]
    fn normal_form_conserves_total_action() {
        let p = load_case("sun-barycenter", None).unwrap();
        let rc = resonant_coeffs(&cm_for(&p, 2)).unwrap();
        let b = ResonantCoeffs::total_action()
            .poisson_bracket(&rc.normal_form())
            .unwrap();
        assert!(b.is_empty());
    }

    #[test]
    fn thresholds_scale_inversely_with_quartic() {
        let p = load_case("sun-vesta", None).unwrap();
        let cm = cm_for(&p, 1);
        let t0 = thresholds(&resonant_coeffs(&cm).unwrap()).unwrap();
        for s in [0.5, 3.0] {
            let scaled = cm.h.map_terms(|m, v| match m.degree() {
                3 => v * f64::sqrt(s),
                4 => v * s,
                _ => v,
            });
            let t = thresholds(&resonant_coeffs_from(&scaled, cm.omega1, cm.omega2).unwrap()).unwrap();
            for (a, b) in [(t.e_iy, t0.e_iy), (t.e_iz, t0.e_iz), (t.e_ly, t0.e_ly), (t.e_lz, t0.e_lz)] {
                assert!(rel(a * s, b) < 1e-12);
            }
            // without cubic terms only the quartic matters
            let q = cm.h.filter(|m, _| m.degree() != 3);
            let qs = q.map_terms(|m, v| if m.degree() == 4 { v * s } else { v });
            let a = thresholds(&resonant_coeffs_from(&q, cm.omega1, cm.omega2).unwrap()).unwrap();
            let b = thresholds(&resonant_coeffs_from(&qs, cm.omega1, cm.omega2).unwrap()).unwrap();
            assert!(rel(b.e_ly * s, a.e_ly) < 1e-12);
        }
    }

    #[test]
    fn critical_angles() {
        assert_eq!(family_classification(FRAC_PI_2).unwrap(), FamilyKind::Loop);
        assert_eq!(family_classification(3.0 * FRAC_PI_2).unwrap(), FamilyKind::Loop);
        assert_eq!(family_classification(0.0).unwrap(), FamilyKind::Inclined);
        assert_eq!(family_classification(PI).unwrap(), FamilyKind::Inclined);
        assert!(family_classification(PI / 4.0).is_err());
    }
}
