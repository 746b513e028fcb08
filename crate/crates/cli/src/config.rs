//! Run configuration: a TOML file whose values command-line flags override.
//!
//! ```toml
//! system = "sun-vesta"      # or raw parameters: mu, beta, oblateness
//! beta = 0.01
//! point = "L1"
//! degree = 4
//! tol = 1e-12
//! output = "out"
//! energies = [0.05, 0.1]
//! seed = 1
//! jitter = 0.0
//!
//! [section]
//! seeds = 12
//! crossings = 300
//! t_max = 2000.0
//!
//! [freqmap]
//! points = 201
//! p_y0 = 0.0
//!
//! [fli]
//! grid = 101
//! horizon = 100.0
//! tangent = [1.0, 0.0, 0.0, 0.0]
//!
//! [bifscan]
//! family = "planar"
//! h_min = 0.005
//! h_max = 0.5
//! step = 0.005
//! h_tol = 1e-5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use halo_core::expansion::MAX_DEGREE;
use halo_core::params::{build_params, load_case, ModelParams};

use crate::error::{CliError, Context, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Point {
    L1,
    L2,
    L3,
}

impl Point {
    pub fn index(self) -> u8 {
        match self {
            Point::L1 => 1,
            Point::L2 => 2,
            Point::L3 => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Planar,
    Vertical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SectionConfig {
    pub seeds: usize,
    pub crossings: usize,
    pub t_max: f64,
}

impl Default for SectionConfig {
    fn default() -> Self {
        SectionConfig {
            seeds: 12,
            crossings: 300,
            t_max: 2000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FreqConfig {
    pub points: usize,
    pub p_y0: f64,
}

impl Default for FreqConfig {
    fn default() -> Self {
        FreqConfig {
            points: 201,
            p_y0: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FliConfig {
    pub grid: usize,
    pub horizon: f64,
    pub tangent: [f64; 4],
}

impl Default for FliConfig {
    fn default() -> Self {
        FliConfig {
            grid: 101,
            horizon: halo_dynamics::fli::DEFAULT_HORIZON,
            tangent: halo_dynamics::fli::DEFAULT_TANGENT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub family: FamilyArg,
    pub h_min: f64,
    pub h_max: f64,
    pub step: f64,
    pub h_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        let d = halo_dynamics::bifurcation::ScanOptions::default();
        ScanConfig {
            family: FamilyArg::Planar,
            h_min: d.h_min,
            h_max: d.h_max,
            step: d.step,
            h_tol: d.h_tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub system: Option<String>,
    pub mu: Option<f64>,
    pub beta: Option<f64>,
    pub oblateness: Option<f64>,
    pub point: Point,
    pub degree: u32,
    pub tol: f64,
    pub output: PathBuf,
    pub energies: Vec<f64>,
    pub seed: u64,
    /// Grid jitter as a fraction of the grid spacing; 0 disables it.
    pub jitter: f64,
    pub section: SectionConfig,
    pub freqmap: FreqConfig,
    pub fli: FliConfig,
    pub bifscan: ScanConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: None,
            mu: None,
            beta: None,
            oblateness: None,
            point: Point::L1,
            degree: 4,
            tol: 1e-12,
            output: PathBuf::from("out"),
            energies: Vec::new(),
            seed: 0,
            jitter: 0.0,
            section: SectionConfig::default(),
            freqmap: FreqConfig::default(),
            fli: FliConfig::default(),
            bifscan: ScanConfig::default(),
        }
    }
}

pub fn parse_config(text: &str, file: &str) -> Result<RunConfig> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config {
            file: file.to_string(),
            path: if path.is_empty() { ".".into() } else { path },
            msg: e.into_inner().message().trim().to_string(),
        }
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
        file: path.display().to_string(),
        path: ".".into(),
        msg: e.to_string(),
    })?;
    parse_config(&text, &path.display().to_string())
}

impl RunConfig {
    pub fn params(&self) -> Result<ModelParams> {
        let p = match (&self.system, self.mu) {
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "give either a named system or a raw mass ratio, not both".into(),
                ))
            }
            (Some(name), None) => load_case(name, self.beta).ctx("model-params")?,
            (None, Some(mu)) => {
                build_params(mu, self.beta.unwrap_or(0.0), self.oblateness.unwrap_or(0.0))
                    .ctx("model-params")?
            }
            (None, None) => {
                return Err(CliError::Usage(
                    "a system (--system NAME) or mass ratio (--mu) is required".into(),
                ))
            }
        };
        match (self.mu, self.oblateness) {
            (None, Some(a)) => p.with_oblateness(a).ctx("model-params"),
            _ => Ok(p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1e-14..=1e-8).contains(&self.tol) {
            return Err(CliError::Usage(format!(
                "tol = {:e} outside [1e-14, 1e-8]",
                self.tol
            )));
        }
        if !(2..=MAX_DEGREE).contains(&self.degree) {
            return Err(CliError::Usage(format!(
                "degree = {} outside [2, {MAX_DEGREE}]",
                self.degree
            )));
        }
        if !(0.0..=1.0).contains(&self.jitter) {
            return Err(CliError::Usage(format!("jitter = {} outside [0, 1]", self.jitter)));
        }
        if self.energies.iter().any(|h| !h.is_finite()) {
            return Err(CliError::Usage("energies must be finite".into()));
        }
        if self.fli.tangent.iter().all(|v| *v == 0.0) {
            return Err(CliError::Usage("fli.tangent must be nonzero".into()));
        }
        let s = &self.bifscan;
        if !(s.step > 0.0 && s.h_max > s.h_min && s.h_tol > 0.0) {
            return Err(CliError::Usage("bifscan range needs h_min < h_max, step > 0, h_tol > 0".into()));
        }
        Ok(())
    }
}
