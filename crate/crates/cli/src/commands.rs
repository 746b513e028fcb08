//! Subcommand implementations. Every command writes its artifacts under the
//! configured output directory with fixed column order and number formatting.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use halo_core::equilibria::locate_collinear;
use halo_core::linear::linear_data;
use halo_core::pipeline::{reduce, Reduction};
use halo_dynamics::bifurcation::{bifurcation_scan, Family, ScanOptions};
use halo_dynamics::field::PolyField;
use halo_dynamics::fli::{fli_grid, regular_grid};
use halo_dynamics::freqmap::frequency_map;
use halo_dynamics::section::{boundary_radius, poincare_map, ray_boundary, SectionOptions};

use crate::config::{FamilyArg, RunConfig};
use crate::error::{CliError, Context, Result};
use crate::tables::reproduce;

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.output).map_err(|e| {
        CliError::Io(format!("cannot create {}: {e}", cfg.output.display()))
    })?;
    Ok(cfg.output.clone())
}

fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn energies(cfg: &RunConfig) -> Result<&[f64]> {
    if cfg.energies.is_empty() {
        return Err(CliError::Usage("at least one --energy is required".into()));
    }
    Ok(&cfg.energies)
}

fn reduction(cfg: &RunConfig) -> Result<Reduction> {
    let p = cfg.params()?;
    reduce(&p, cfg.point.index(), cfg.degree).ctx("center-manifold")
}

fn cm_field(cfg: &RunConfig) -> Result<PolyField<4>> {
    let r = reduction(cfg)?;
    PolyField::new(&r.cm.h).ctx("dynamics-suite")
}

fn jitter(values: &mut [(f64, f64)], spacing: (f64, f64), cfg: &RunConfig) {
    if cfg.jitter == 0.0 {
        return;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for v in values.iter_mut() {
        v.0 += cfg.jitter * spacing.0 * (rng.gen::<f64>() - 0.5);
        v.1 += cfg.jitter * spacing.1 * (rng.gen::<f64>() - 0.5);
    }
}

pub fn locate(cfg: &RunConfig) -> Result<()> {
    let p = cfg.params()?;
    let dir = out_dir(cfg)?;
    let mut rows = Vec::new();
    println!("point  gamma                    x                        residual");
    for j in 1..=3u8 {
        let pt = locate_collinear(&p, j).ctx("equilibria")?;
        println!("L{j}     {:<24.17e} {:<24.17e} {:.3e}", pt.gamma, pt.x, pt.residual);
        rows.push((format!("L{j}"), pt.gamma, pt.x, pt.residual));
    }
    write_csv(&dir.join("locations.csv"), &["point", "gamma", "x", "residual"], rows)
}

pub fn linearize(cfg: &RunConfig) -> Result<()> {
    let p = cfg.params()?;
    let pt = locate_collinear(&p, cfg.point.index()).ctx("equilibria")?;
    let d = linear_data(&p, &pt).ctx("quad-normalization")?;
    let rows = vec![
        ("gamma", pt.gamma),
        ("x", pt.x),
        ("a", d.a),
        ("b", d.b),
        ("c", d.c),
        ("delta", d.delta),
        ("eta1", d.eta1),
        ("eta2", d.eta2),
        ("lambda1", d.lambda1),
        ("omega1", d.omega1),
        ("omega2", d.omega2),
        ("s1", d.s1),
        ("s2", d.s2),
        ("symplectic_defect", d.symplectic_defect()),
    ];
    for (k, v) in &rows {
        println!("{k:<18} {v:.17e}");
    }
    let dir = out_dir(cfg)?;
    write_csv(&dir.join("linear.csv"), &["quantity", "value"], rows)?;
    let mut basis = Vec::new();
    for i in 0..4 {
        basis.push((0..4).map(|j| d.c4[(i, j)]).collect::<Vec<f64>>());
    }
    write_csv(&dir.join("basis.csv"), &["c0", "c1", "c2", "c3"], basis)
}

pub fn expand(cfg: &RunConfig) -> Result<()> {
    let r = reduction(cfg)?;
    let dir = out_dir(cfg)?;
    let e = &r.expansion;
    println!("{}", e.stage_log());
    println!("terms: {}  gradient residual: {:.3e}", e.synodic.len(), e.gradient_residual);
    write_text(&dir.join("expansion.txt"), &e.synodic.to_text())?;
    write_text(&dir.join("diagonal.txt"), &e.h.to_text())?;
    write_text(&dir.join("stages.txt"), &e.stage_log())
}

pub fn reduce_cmd(cfg: &RunConfig) -> Result<()> {
    let r = reduction(cfg)?;
    let dir = out_dir(cfg)?;
    for (k, res) in &r.cm.residuals {
        println!("degree {k}: homological residual {res:.3e}");
    }
    println!("center-manifold terms: {}  max imaginary part: {:.3e}", r.cm.h.len(), r.cm.max_imag);
    write_text(&dir.join("cm_hamiltonian.txt"), &r.cm.h.to_text())?;
    write_csv(&dir.join("cm_residuals.csv"), &["degree", "residual"], r.cm.residuals.clone())
}

pub fn thresholds(cfg: &RunConfig) -> Result<()> {
    let r = reduction(cfg)?;
    let (rc, t) = r.resonance().ctx("resonant-normal-form")?;
    let rows = vec![
        ("a20", rc.a20),
        ("a02", rc.a02),
        ("a11", rc.a11),
        ("b11", rc.b11),
        ("omega_p", rc.omega_p),
        ("omega_v", rc.omega_v),
        ("delta", rc.delta),
        ("E_iy", t.e_iy),
        ("E_iz", t.e_iz),
        ("E_ly", t.e_ly),
        ("E_lz", t.e_lz),
        ("h_iy", t.h_iy),
        ("h_iz", t.h_iz),
        ("h_ly", t.h_ly),
        ("h_lz", t.h_lz),
    ];
    for (k, v) in &rows {
        println!("{k:<8} {v:.10e}");
    }
    let dir = out_dir(cfg)?;
    write_csv(&dir.join("thresholds.csv"), &["quantity", "value"], rows)
}

fn options(cfg: &RunConfig) -> SectionOptions {
    SectionOptions {
        tol: cfg.tol,
        t_max: cfg.section.t_max,
        max_points: cfg.section.crossings,
    }
}

pub fn poincare(cfg: &RunConfig) -> Result<()> {
    let field = cm_field(cfg)?;
    let dir = out_dir(cfg)?;
    let n = cfg.section.seeds.max(1);
    for &h in energies(cfg)? {
        let (right, left) = match (boundary_radius(&field, h, 0.0), boundary_radius(&field, h, std::f64::consts::PI)) {
            (Some(r), Some(l)) => (r, l),
            _ => {
                println!("h = {h}: energy below the shell minimum, no section");
                write_csv(&dir.join(format!("section_h{h}.csv")), &["orbit", "y", "p_y", "t"], Vec::<(usize, f64, f64, f64)>::new())?;
                continue;
            }
        };
        let spacing = (right + left) / n as f64;
        let mut seeds: Vec<(f64, f64)> = (0..n)
            .map(|k| (-left + spacing * (k as f64 + 0.5), 0.0))
            .collect();
        jitter(&mut seeds, (spacing, 0.0), cfg);
        let orbits = poincare_map(&field, h, &seeds, &options(cfg)).ctx("dynamics-suite")?;
        let mut rows = Vec::new();
        let mut escaped = 0;
        for (i, o) in orbits.iter().enumerate() {
            if o.escaped {
                escaped += 1;
                continue;
            }
            rows.extend(o.points.iter().map(|p| (i, p.y, p.p_y, p.t)));
        }
        println!("h = {h}: {} orbits, {} crossings, {escaped} escaped", orbits.len(), rows.len());
        write_csv(&dir.join(format!("section_h{h}.csv")), &["orbit", "y", "p_y", "t"], rows)?;
    }
    Ok(())
}

pub fn freqmap(cfg: &RunConfig) -> Result<()> {
    let field = cm_field(cfg)?;
    let dir = out_dir(cfg)?;
    let n = cfg.freqmap.points.max(2);
    let py0 = cfg.freqmap.p_y0;
    for &h in energies(cfg)? {
        let ext = (
            ray_boundary(&field, h, (0.0, py0), std::f64::consts::PI),
            ray_boundary(&field, h, (0.0, py0), 0.0),
        );
        let rows = match ext {
            (Some(l), Some(r)) => {
                let ys: Vec<f64> = (0..n)
                    .map(|k| -l + (l + r) * (k as f64 + 0.5) / n as f64)
                    .collect();
                frequency_map(&field, h, &ys, py0)
            }
            _ => Vec::new(),
        };
        println!("h = {h}: {} scan points", rows.len());
        write_csv(
            &dir.join(format!("freqmap_h{h}.csv")),
            &["y0", "J_y0", "J_z0", "omega_y", "omega_z", "omega_r"],
            rows.iter().map(|p| (p.y0, p.j_y0, p.j_z0, p.omega_y, p.omega_z, p.omega_r)),
        )?;
    }
    Ok(())
}

pub fn fli(cfg: &RunConfig) -> Result<()> {
    let field = cm_field(cfg)?;
    let dir = out_dir(cfg)?;
    let n = cfg.fli.grid.max(2);
    for &h in energies(cfg)? {
        let rho = (0..64)
            .filter_map(|k| boundary_radius(&field, h, std::f64::consts::TAU * k as f64 / 64.0))
            .fold(0.0, f64::max);
        let rows = if rho > 0.0 {
            let mut grid = regular_grid((-rho, rho), (-rho, rho), n, n);
            let d = 2.0 * rho / (n - 1) as f64;
            jitter(&mut grid, (d, d), cfg);
            fli_grid(&field, h, &grid, cfg.fli.horizon, cfg.fli.tangent, cfg.tol).ctx("dynamics-suite")?
        } else {
            Vec::new()
        };
        let escaped = rows.iter().filter(|r| r.escaped).count();
        println!("h = {h}: {} grid points, {escaped} escaped", rows.len());
        write_csv(
            &dir.join(format!("fli_h{h}.csv")),
            &["y", "p_y", "fli"],
            rows.iter().map(|r| (r.state[0], r.state[2], r.value)),
        )?;
    }
    Ok(())
}

pub fn bifscan(cfg: &RunConfig) -> Result<()> {
    let field = cm_field(cfg)?;
    let dir = out_dir(cfg)?;
    let s = &cfg.bifscan;
    let (family, name) = match s.family {
        FamilyArg::Planar => (Family::Planar, "planar"),
        FamilyArg::Vertical => (Family::Vertical, "vertical"),
    };
    let opts = ScanOptions {
        h_min: s.h_min,
        h_max: s.h_max,
        step: s.step,
        h_tol: s.h_tol,
        tol: cfg.tol,
    };
    let scan = bifurcation_scan(&field, family, &opts).ctx("dynamics-suite")?;
    if scan.thresholds.is_empty() {
        println!("{name} family: no stability change in [{}, {}]", s.h_min, s.h_max);
    }
    for t in &scan.thresholds {
        println!(
            "{name} family: index crosses {:+} at h = {:.6} ({})",
            t.level,
            t.h,
            if t.destabilizing { "destabilizing" } else { "restabilizing" }
        );
    }
    write_csv(&dir.join(format!("bifscan_{name}.csv")), &["h", "index"], scan.samples.clone())?;
    write_csv(
        &dir.join(format!("bifscan_{name}_thresholds.csv")),
        &["h", "level", "destabilizing"],
        scan.thresholds.iter().map(|t| (t.h, t.level, t.destabilizing)),
    )
}

pub fn reproduce_tables(system: Option<&str>, cfg: &RunConfig) -> Result<()> {
    if let Some(s) = system {
        if !halo_core::params::case_names().iter().any(|n| n == s) {
            return Err(CliError::Usage(format!("unknown system {s}")));
        }
    }
    let (report, tables) = reproduce(system, cfg.tol)?;
    let dir = out_dir(cfg)?;
    write_text(&dir.join("tables.txt"), &tables)?;
    let rendered = report.render();
    write_text(&dir.join("diff_report.txt"), &rendered)?;
    print!("{rendered}");
    match report.failures() {
        0 => Ok(()),
        n => Err(CliError::Acceptance(n)),
    }
}
