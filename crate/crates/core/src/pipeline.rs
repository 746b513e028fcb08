//! End-to-end reduction from model parameters to the center manifold.

use crate::center_manifold::{cm_normalize, CMHamiltonian};
use crate::equilibria::{locate_collinear, CollinearPoint};
use crate::error::Result;
use crate::expansion::{diagonalize_and_complexify, expand_hamiltonian, ExpandedHamiltonian};
use crate::linear::{linear_data, LinearData};
use crate::params::ModelParams;
use crate::resonance::{resonant_coeffs, thresholds, ResonantCoeffs, Thresholds};

#[derive(Debug, Clone)]
pub struct Reduction {
    pub params: ModelParams,
    pub point: CollinearPoint,
    pub linear: LinearData,
    pub expansion: ExpandedHamiltonian,
    pub cm: CMHamiltonian,
}

pub fn reduce(params: &ModelParams, j: u8, degree: u32) -> Result<Reduction> {
    let point = locate_collinear(params, j)?;
    let linear = linear_data(params, &point)?;
    let raw = expand_hamiltonian(params, &point, degree)?;
    let expansion = diagonalize_and_complexify(&raw, &linear)?;
    let cm = cm_normalize(&expansion, &linear)?;
    Ok(Reduction {
        params: *params,
        point,
        linear,
        expansion,
        cm,
    })
}

impl Reduction {
    pub fn resonance(&self) -> Result<(ResonantCoeffs, Thresholds)> {
        let rc = resonant_coeffs(&self.cm)?;
        let t = thresholds(&rc)?;
        Ok((rc, t))
    }
}
