//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{FamilyArg, Point, RunConfig};

#[derive(Debug, Parser)]
#[command(
    name = "halo",
    version,
    about = "Center-manifold reduction and halo bifurcation thresholds at collinear points"
)]
pub struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Named system from the case table (earth-moon, sun-barycenter, sun-vesta).
    #[arg(long)]
    pub system: Option<String>,
    /// Raw mass ratio (instead of --system).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Sail performance; overrides the case value.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Oblateness coefficient A of the smaller primary.
    #[arg(long)]
    pub oblateness: Option<f64>,
    #[arg(long, value_enum)]
    pub point: Option<Point>,
    /// Truncation degree of the expansion.
    #[arg(long)]
    pub degree: Option<u32>,
    /// Integrator tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Energy levels (repeatable).
    #[arg(long = "energy")]
    pub energies: Vec<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Grid jitter as a fraction of the spacing.
    #[arg(long)]
    pub jitter: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Locate L1, L2 and L3.
    Locate(Common),
    /// Linear stability data and symplectic basis at the chosen point.
    Linearize(Common),
    /// Expand the Hamiltonian and bring its quadratic part to diagonal form.
    Expand(Common),
    /// Reduce to the center manifold.
    Reduce(Common),
    /// Resonant normal form and analytic bifurcation thresholds.
    Thresholds(Common),
    /// Poincaré sections z = 0, p_z > 0.
    Poincare {
        #[command(flatten)]
        common: Common,
        /// Number of seed orbits along the y axis.
        #[arg(long)]
        seeds: Option<usize>,
        /// Returns recorded per orbit.
        #[arg(long)]
        crossings: Option<usize>,
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Frequency map over y at z = 0, p_y = p_y0.
    Freqmap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        p_y0: Option<f64>,
    },
    /// Fast Lyapunov indicator grid over the section.
    Fli {
        #[command(flatten)]
        common: Common,
        /// Grid points per axis.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Initial tangent vector over (y, z, p_y, p_z).
        #[arg(long, value_delimiter = ',')]
        tangent: Option<Vec<f64>>,
    },
    /// Stability index of a normal-mode family along the energy.
    Bifscan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long)]
        h_min: Option<f64>,
        #[arg(long)]
        h_max: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        h_tol: Option<f64>,
    },
    /// Regenerate the reference tables and write a diff report.
    ReproduceTables {
        /// Restrict to one system.
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Common {
    pub fn apply(&self, c: &mut RunConfig) {
        if let Some(s) = &self.system {
            c.system = Some(s.clone());
            c.mu = None;
        }
        if let Some(mu) = self.mu {
            c.mu = Some(mu);
            if self.system.is_none() {
                c.system = None;
            }
        }
        if self.beta.is_some() {
            c.beta = self.beta;
        }
        if self.oblateness.is_some() {
            c.oblateness = self.oblateness;
        }
        if let Some(p) = self.point {
            c.point = p;
        }
        if let Some(d) = self.degree {
            c.degree = d;
        }
        if let Some(t) = self.tol {
            c.tol = t;
        }
        if let Some(o) = &self.out {
            c.output = o.clone();
        }
        if !self.energies.is_empty() {
            c.energies = self.energies.clone();
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(j) = self.jitter {
            c.jitter = j;
        }
    }
}
