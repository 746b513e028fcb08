//! Regeneration of the reference tables and a cell-by-cell diff report.

use std::fmt::Write as _;

use serde::Deserialize;

use halo_core::equilibria::locate_collinear;
use halo_core::linear::linear_data;
use halo_core::params::{build_params, load_case, ModelParams};
use halo_core::pipeline::reduce;
use halo_dynamics::bifurcation::{bifurcation_scan, Family, ScanOptions};
use halo_dynamics::field::PolyField;

use crate::error::{Context, Result};

const REFERENCE: &str = include_str!("../data/reference_tables.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Mode {
    #[serde(rename = "abs")]
    Abs,
    #[serde(rename = "rel")]
    Rel,
    #[serde(rename = "rounded-rel")]
    RoundedRel,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SimpleTable<R> {
    pub mode: Mode,
    pub tol: f64,
    pub columns: Vec<String>,
    pub rows: Vec<R>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BetaRow {
    pub system: String,
    pub beta: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct SystemRow {
    pub system: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BifurcationTable {
    pub mode: Mode,
    pub tol: Vec<f64>,
    pub columns: Vec<String>,
    pub rows: Vec<BifurcationRow>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct BifurcationRow {
    pub system: String,
    pub beta: f64,
    pub oblateness: f64,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CoefficientTable {
    pub system: String,
    pub beta: f64,
    pub mu: f64,
    pub degree: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub threshold: f64,
    pub rows: Vec<CoefficientRow>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct CoefficientRow {
    pub exps: [u8; 4],
    pub value: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Reference {
    pub normal_form: SimpleTable<BetaRow>,
    pub locations: SimpleTable<SystemRow>,
    pub linear: SimpleTable<SystemRow>,
    pub bifurcation: BifurcationTable,
    pub cm_coefficients: CoefficientTable,
}

pub fn reference() -> Reference {
    toml::from_str(REFERENCE).expect("embedded reference tables parse")
}

/// Half a unit in the last printed digit of `v`, from its shortest decimal form.
pub fn half_ulp_printed(v: f64) -> f64 {
    let s = format!("{}", v.abs());
    let decimals = s.split('.').nth(1).map_or(0, str::len);
    0.5 * 10f64.powi(-(decimals as i32))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub table: &'static str,
    pub row: String,
    pub column: String,
    pub computed: f64,
    pub reference: f64,
    /// Deviation in the units of `tol`: absolute, relative, or relative to the rounding interval.
    pub deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

impl Cell {
    pub fn new(
        table: &'static str,
        row: &str,
        column: &str,
        computed: f64,
        reference: f64,
        mode: Mode,
        tol: f64,
    ) -> Self {
        let deviation = match mode {
            Mode::Abs => (computed - reference).abs(),
            Mode::Rel => (computed - reference).abs() / reference.abs(),
            Mode::RoundedRel => {
                let half = half_ulp_printed(reference);
                ((computed - reference).abs() - half).max(0.0) / reference.abs()
            }
        };
        Cell {
            table,
            row: row.to_string(),
            column: column.to_string(),
            computed,
            reference,
            deviation,
            tol,
            pass: deviation <= tol && computed.is_finite(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub cells: Vec<Cell>,
}

impl Report {
    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| !c.pass).count()
    }

    pub fn table(&self, name: &str) -> impl Iterator<Item = &Cell> {
        let name = name.to_string();
        self.cells.iter().filter(move |c| c.table == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<16} {:<34} {:<8} {:>24} {:>16} {:>11} {:>9}  status",
            "table", "row", "column", "computed", "reference", "deviation", "tol"
        );
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{:<16} {:<34} {:<8} {:>24.15e} {:>16} {:>11.3e} {:>9.1e}  {}",
                c.table,
                c.row,
                c.column,
                c.computed,
                c.reference,
                c.deviation,
                c.tol,
                if c.pass { "PASS" } else { "FAIL" }
            );
        }
        let _ = writeln!(
            out,
            "{} cells, {} outside tolerance",
            self.cells.len(),
            self.failures()
        );
        out
    }
}

fn label(system: &str, beta: f64) -> String {
    format!("{system} beta={beta}")
}

/// `(a20, a02, a11, b11)` at L1.
pub fn normal_form_row(system: &str, beta: f64) -> Result<[f64; 4]> {
    let p = load_case(system, Some(beta)).ctx("model-params")?;
    let r = reduce(&p, 1, 4).ctx("center-manifold")?;
    let (rc, _) = r.resonance().ctx("resonant-normal-form")?;
    Ok([rc.a20, rc.a02, rc.a11, rc.b11])
}

pub fn location_row(system: &str) -> Result<[f64; 3]> {
    let p = load_case(system, None).ctx("model-params")?;
    let mut out = [0.0; 3];
    for j in 1..=3u8 {
        out[j as usize - 1] = locate_collinear(&p, j).ctx("equilibria")?.x;
    }
    Ok(out)
}

/// `(gamma1, abscissa, a, b, c, lambda1, omega1, omega2, s1, s2)` at L1.
pub fn linear_row(system: &str) -> Result<[f64; 10]> {
    let p = load_case(system, None).ctx("model-params")?;
    let pt = locate_collinear(&p, 1).ctx("equilibria")?;
    let d = linear_data(&p, &pt).ctx("quad-normalization")?;
    Ok([
        pt.gamma, pt.x, d.a, d.b, d.c, d.lambda1, d.omega1, d.omega2, d.s1, d.s2,
    ])
}

/// First energy at which the planar Lyapunov orbit loses vertical stability.
pub fn numeric_threshold(params: &ModelParams, j: u8, degree: u32, tol: f64) -> Result<Option<f64>> {
    let r = reduce(params, j, degree).ctx("center-manifold")?;
    let field = PolyField::new(&r.cm.h).ctx("dynamics-suite")?;
    let opts = ScanOptions {
        h_max: 0.6,
        tol,
        ..Default::default()
    };
    let scan = bifurcation_scan(&field, Family::Planar, &opts).ctx("dynamics-suite")?;
    Ok(scan
        .thresholds
        .iter()
        .find(|t| t.destabilizing)
        .map(|t| t.h))
}

/// Analytic loop-family threshold `h_ly` in energy units.
pub fn analytic_threshold(params: &ModelParams, j: u8) -> Result<f64> {
    let r = reduce(params, j, 4).ctx("center-manifold")?;
    let (_, t) = r.resonance().ctx("resonant-normal-form")?;
    Ok(t.h_ly)
}

pub fn bifurcation_params(row: &BifurcationRow) -> Result<ModelParams> {
    let base = load_case(&row.system, Some(row.beta)).ctx("model-params")?;
    base.with_oblateness(row.oblateness).ctx("model-params")
}

/// `(L1 num, L1 anal, L2 num, L2 anal)`; a missing crossing gives NaN.
pub fn bifurcation_row(row: &BifurcationRow, tol: f64) -> Result<[f64; 4]> {
    let p = bifurcation_params(row)?;
    let mut out = [f64::NAN; 4];
    for (k, j) in [1u8, 2].into_iter().enumerate() {
        out[2 * k] = numeric_threshold(&p, j, 4, tol)?.unwrap_or(f64::NAN);
        out[2 * k + 1] = analytic_threshold(&p, j)?;
    }
    Ok(out)
}

pub fn coefficient_params(t: &CoefficientTable) -> Result<ModelParams> {
    let base = load_case(&t.system, Some(t.beta)).ctx("model-params")?;
    build_params(t.mu, base.beta, base.a).ctx("model-params")
}

fn wanted(filter: Option<&str>, system: &str) -> bool {
    filter.map_or(true, |f| f == system)
}

/// Recomputes every table row (optionally for one system) and diffs it.
pub fn reproduce(filter: Option<&str>, tol: f64) -> Result<(Report, String)> {
    let reference = reference();
    let mut report = Report::default();
    let mut text = String::new();

    let t = &reference.locations;
    let _ = writeln!(text, "# collinear abscissae\nsystem,L1,L2,L3");
    for row in t.rows.iter().filter(|r| wanted(filter, &r.system)) {
        let v = location_row(&row.system)?;
        let _ = writeln!(text, "{},{},{},{}", row.system, v[0], v[1], v[2]);
        for (k, col) in t.columns.iter().enumerate() {
            report.cells.push(Cell::new("locations", &row.system, col, v[k], row.values[k], t.mode, t.tol));
        }
    }

    let t = &reference.linear;
    let _ = writeln!(text, "\n# center-manifold quantities at L1\nsystem,{}", t.columns.join(","));
    for row in t.rows.iter().filter(|r| wanted(filter, &r.system)) {
        let v = linear_row(&row.system)?;
        let cells: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(text, "{},{}", row.system, cells.join(","));
        for (k, col) in t.columns.iter().enumerate() {
            report.cells.push(Cell::new("linear", &row.system, col, v[k], row.values[k], t.mode, t.tol));
        }
    }

    let t = &reference.normal_form;
    let _ = writeln!(text, "\n# resonant normal form at L1\nsystem,beta,{}", t.columns.join(","));
    for row in t.rows.iter().filter(|r| wanted(filter, &r.system)) {
        let v = normal_form_row(&row.system, row.beta)?;
        let _ = writeln!(text, "{},{},{},{},{},{}", row.system, row.beta, v[0], v[1], v[2], v[3]);
        for (k, col) in t.columns.iter().enumerate() {
            report.cells.push(Cell::new(
                "normal_form",
                &label(&row.system, row.beta),
                col,
                v[k],
                row.values[k],
                t.mode,
                t.tol,
            ));
        }
    }

    let t = &reference.bifurcation;
    let _ = writeln!(text, "\n# bifurcation energies\nsystem,beta,oblateness,{}", t.columns.join(","));
    for row in t.rows.iter().filter(|r| wanted(filter, &r.system)) {
        let v = bifurcation_row(row, tol)?;
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            row.system, row.beta, row.oblateness, v[0], v[1], v[2], v[3]
        );
        let name = format!("{} A={}", label(&row.system, row.beta), row.oblateness);
        for (k, col) in t.columns.iter().enumerate() {
            report.cells.push(Cell::new("bifurcation", &name, col, v[k], row.values[k], t.mode, t.tol[k]));
        }
    }

    let t = &reference.cm_coefficients;
    if wanted(filter, &t.system) {
        let p = coefficient_params(t)?;
        let r = reduce(&p, 1, t.degree).ctx("center-manifold")?;
        let _ = writeln!(
            text,
            "\n# center-manifold coefficients, {} beta={} mu={}\nk1,k2,k3,k4,h",
            t.system, t.beta, t.mu
        );
        for (m, c) in r.cm.h.iter() {
            let e = m.exps();
            let _ = writeln!(text, "{},{},{},{},{:.17e}", e[0], e[1], e[2], e[3], c);
        }
        for row in &t.rows {
            let c = r.cm.h.coeff(&row.exps);
            let (mode, tol) = if row.value.abs() > t.threshold {
                (Mode::Rel, t.rel_tol)
            } else {
                (Mode::Abs, t.abs_tol)
            };
            let e = row.exps;
            let name = format!("y{} z{} py{} pz{}", e[0], e[1], e[2], e[3]);
            report.cells.push(Cell::new("cm_coefficients", &name, "h", c, row.value, mode, tol));
        }
    }
    Ok((report, text))
}
