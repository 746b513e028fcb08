//! Model parameters of the restricted problem with a radiating larger primary
//! and an oblate smaller primary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Solar luminosity in W.
pub const SOLAR_LUMINOSITY: f64 = 3.839e26;
/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Newtonian constant of gravitation in m^3 kg^-1 s^-2.
pub const GRAVITATIONAL_CONSTANT: f64 = 6.674_30e-11;
/// Solar mass in kg.
pub const SOLAR_MASS: f64 = 1.988_47e30;

pub const MU_MAX: f64 = 0.5;
pub const BETA_MAX: f64 = 0.5;
pub const A_MAX: f64 = 1e-4;

const CASE_TABLE: &str = include_str!("../data/cases.csv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mu: f64,
    pub beta: f64,
    pub q: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub n: f64,
}

impl ModelParams {
    pub fn n2(&self) -> f64 {
        1.0 + 1.5 * self.a
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        build_params(self.mu, beta, self.a)
    }

    pub fn with_oblateness(&self, a: f64) -> Result<Self> {
        build_params(self.mu, self.beta, a)
    }
}

pub fn build_params(mu: f64, beta: f64, a: f64) -> Result<ModelParams> {
    if !(mu > 0.0 && mu <= MU_MAX) {
        return Err(Error::Domain {
            field: "mu",
            value: mu,
            range: "(0, 0.5]",
        });
    }
    if !(0.0..=BETA_MAX).contains(&beta) {
        return Err(Error::Domain {
            field: "beta",
            value: beta,
            range: "[0, 0.5]",
        });
    }
    if !(0.0..=A_MAX).contains(&a) {
        return Err(Error::Domain {
            field: "A",
            value: a,
            range: "[0, 1e-4]",
        });
    }
    Ok(ModelParams {
        mu,
        beta,
        q: 1.0 - beta,
        a,
        n: (1.0 + 1.5 * a).sqrt(),
    })
}

/// Lightness number of a flat sail facing the Sun.
///
/// `q_reflect` is one plus the reflectivity and `mass_area` the sail loading
/// in kg/m^2.
pub fn sail_performance(q_reflect: f64, mass_area: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&q_reflect) {
        return Err(Error::Domain {
            field: "Q",
            value: q_reflect,
            range: "[1, 2]",
        });
    }
    if !(mass_area > 0.0) {
        return Err(Error::Domain {
            field: "B",
            value: mass_area,
            range: "(0, inf)",
        });
    }
    let denom = 4.0
        * std::f64::consts::PI
        * SPEED_OF_LIGHT
        * GRAVITATIONAL_CONSTANT
        * SOLAR_MASS
        * mass_area;
    Ok(SOLAR_LUMINOSITY * q_reflect / denom)
}

/// One row of the bundled case table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CaseRecord {
    pub name: String,
    pub mu: f64,
    pub j2: f64,
    pub a: f64,
    pub beta: f64,
}

pub fn case_table() -> Result<Vec<CaseRecord>> {
    parse_case_table(CASE_TABLE)
}

pub fn parse_case_table(text: &str) -> Result<Vec<CaseRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::CaseTable(e.to_string())))
        .collect()
}

pub fn case_names() -> Vec<String> {
    case_table()
        .map(|t| t.into_iter().map(|c| c.name).collect())
        .unwrap_or_default()
}

/// Parameters of a bundled case, optionally overriding the sail performance.
pub fn load_case(name: &str, beta: Option<f64>) -> Result<ModelParams> {
    let rec = case_table()?
        .into_iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::UnknownCase(name.to_string()))?;
    build_params(rec.mu, beta.unwrap_or(rec.beta), rec.a)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_params() {
        let p = build_params(0.3, 0.0, 0.0).unwrap();
        assert_eq!(p.n, 1.0);
        assert_eq!(p.q, 1.0);
    }

    #[test]
    fn mean_motion_identity() {
        let p = build_params(1.2154e-2, 0.0, 4.15559e-9).unwrap();
        assert!((p.n * p.n - 1.0 - 1.5 * p.a).abs() < 1e-15);
        assert!(p.n >= 1.0);
    }

    #[test]
    fn out_of_range_names_field() {
        match build_params(0.6, 0.0, 0.0) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "mu"),
            other => panic!("{other:?}"),
        }
        match build_params(0.1, 0.7, 0.0) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "beta"),
            other => panic!("{other:?}"),
        }
        match build_params(0.1, 0.0, 1e-3) {
            Err(Error::Domain { field, .. }) => assert_eq!(field, "A"),
            other => panic!("{other:?}"),
        }
        assert!(build_params(0.0, 0.0, 0.0).is_err());
        assert!(build_params(f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn sail_inversion() {
        let q = 2.0;
        let target = 1e-2;
        let b = SOLAR_LUMINOSITY * q
            / (4.0
                * std::f64::consts::PI
                * SPEED_OF_LIGHT
                * GRAVITATIONAL_CONSTANT
                * SOLAR_MASS
                * target);
        assert!((b - 0.1536).abs() < 1e-3, "{b}");
        let beta = sail_performance(q, b).unwrap();
        assert!((beta - target).abs() < 1e-15);
    }

    #[test]
    fn sail_limits() {
        assert!(sail_performance(2.0, 1e30).unwrap() < 1e-28);
        assert!(sail_performance(1.5, 0.0).is_err());
        assert!(sail_performance(2.5, 1.0).is_err());
    }

    #[test]
    fn cases() {
        let sv = load_case("sun-vesta", None).unwrap();
        assert_eq!((sv.mu, sv.a, sv.beta), (1.3574e-10, 4.54776e-14, 1e-2));
        let sb = load_case("sun-barycenter", None).unwrap();
        assert_eq!((sb.mu, sb.a, sb.beta), (3.040423e-6, 1.96782e-12, 1e-2));
        let em = load_case("earth-moon", None).unwrap();
        assert_eq!((em.mu, em.a, em.beta), (1.2154e-2, 4.15559e-9, 0.0));
        let sv0 = load_case("sun-vesta", Some(0.0)).unwrap();
        assert_eq!(sv0.q, 1.0);
        assert!(matches!(
            load_case("pluto-charon", None),
            Err(Error::UnknownCase(_))
        ));
    }

    #[test]
    fn case_table_has_j2() {
        let t = case_table().unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t[2].j2, 0.0812232);
    }
}
