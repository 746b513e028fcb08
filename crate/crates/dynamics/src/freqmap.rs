//! Frequency maps from the angle-averaged Hamiltonian, with a spectral oracle.
//!
//! Harmonic actions are `J_y = (y^2 + p_y^2)/2`, `J_z = (z^2 + p_z^2)/2` with
//! `y = sqrt(2 J_y) sin(theta_y)`, `p_y = sqrt(2 J_y) cos(theta_y)`.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use halo_core::poly::RealSeries;

use crate::dop853::Control;
use crate::error::{DynamicsError, Result};
use crate::field::{solve_pz, PolyField};
use crate::section::check_tol;

/// Polynomial in `(J_y, J_z)`: terms `c * J_y^i * J_z^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedHamiltonian {
    pub terms: Vec<(u32, u32, f64)>,
}

fn double_factorial(n: i64) -> f64 {
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    acc
}

/// Mean of `sin^a(t) cos^b(t)` over a period.
pub fn angle_average(a: u32, b: u32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 {
        return 0.0;
    }
    double_factorial(a as i64 - 1) * double_factorial(b as i64 - 1)
        / double_factorial((a + b) as i64)
}

impl AveragedHamiltonian {
    /// First-order average over both angles of a Hamiltonian in `(y, z, p_y, p_z)`.
    pub fn from_series(h: &RealSeries) -> Self {
        let mut terms: Vec<(u32, u32, f64)> = Vec::new();
        for (m, c) in h.iter() {
            let e = m.exps();
            let (a, b, cy, dz) = (e[0] as u32, e[1] as u32, e[2] as u32, e[3] as u32);
            let w = angle_average(a, cy) * angle_average(b, dz);
            if w == 0.0 {
                continue;
            }
            let (i, j) = ((a + cy) / 2, (b + dz) / 2);
            let v = c * w * 2f64.powi((i + j) as i32);
            match terms.iter_mut().find(|t| t.0 == i && t.1 == j) {
                Some(t) => t.2 += v,
                None => terms.push((i, j, v)),
            }
        }
        terms.sort_by_key(|t| (t.0 + t.1, t.0));
        AveragedHamiltonian { terms }
    }

    pub fn value(&self, jy: f64, jz: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, c)| c * jy.powi(i as i32) * jz.powi(j as i32))
            .sum()
    }

    /// `(d/dJ_y, d/dJ_z)` of the averaged Hamiltonian.
    pub fn frequencies(&self, jy: f64, jz: f64) -> (f64, f64) {
        let mut wy = 0.0;
        let mut wz = 0.0;
        for &(i, j, c) in &self.terms {
            if i > 0 {
                wy += c * i as f64 * jy.powi(i as i32 - 1) * jz.powi(j as i32);
            }
            if j > 0 {
                wz += c * j as f64 * jy.powi(i as i32) * jz.powi(j as i32 - 1);
            }
        }
        (wy, wz)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreqPoint {
    pub y0: f64,
    pub j_y0: f64,
    pub j_z0: f64,
    pub omega_y: f64,
    pub omega_z: f64,
    pub omega_r: f64,
}

/// Scan over `y` with `z = 0` and `p_y = p_y0`; points off the shell are skipped.
pub fn frequency_map(field: &PolyField<4>, h: f64, ys: &[f64], p_y0: f64) -> Vec<FreqPoint> {
    let avg = AveragedHamiltonian::from_series(field.series());
    ys.iter()
        .filter_map(|&y| {
            let pz = solve_pz(field, h, y, p_y0).ok()?;
            let jy = 0.5 * (y * y + p_y0 * p_y0);
            let jz = 0.5 * pz * pz;
            let (wy, wz) = avg.frequencies(jy, jz);
            Some(FreqPoint {
                y0: y,
                j_y0: jy,
                j_z0: jz,
                omega_y: wy,
                omega_z: wz,
                omega_r: (wy / wz).abs(),
            })
        })
        .collect()
}

/// Evenly spaced samples of a trajectory, taken from the dense output.
pub fn sample_trajectory(
    field: &PolyField<4>,
    x0: [f64; 4],
    dt: f64,
    count: usize,
    tol: f64,
) -> Result<Vec<[f64; 4]>> {
    let solver = check_tol(tol)?;
    let mut samples = Vec::with_capacity(count);
    samples.push(x0);
    let t_end = dt * (count - 1) as f64;
    let mut escaped = false;
    solver.solve(&crate::field::PhaseFlow(field), 0.0, x0, t_end, |st| {
        if st.y.iter().any(|v| v.abs() > crate::field::ESCAPE_RADIUS) {
            escaped = true;
            return Control::Stop;
        }
        let seg = st.dense();
        while samples.len() < count {
            let t = dt * samples.len() as f64;
            if t > st.t {
                break;
            }
            samples.push(seg.eval(t));
        }
        Control::Continue
    })?;
    if escaped || samples.len() < count {
        return Err(DynamicsError::Escape {
            t: dt * samples.len() as f64,
            radius: crate::field::ESCAPE_RADIUS,
        });
    }
    Ok(samples)
}

/// Dominant positive frequency of a complex signal sampled every `dt`:
/// Hann-windowed FFT peak refined by golden-section search on the windowed
/// Fourier amplitude.
pub fn dominant_frequency(signal: &[Complex64], dt: f64) -> f64 {
    let n = signal.len();
    let window: Vec<f64> = (0..n)
        .map(|k| 0.5 - 0.5 * (std::f64::consts::TAU * k as f64 / n as f64).cos())
        .collect();
    let mut buf: Vec<Complex64> = signal.iter().zip(&window).map(|(s, w)| s * w).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let (k, _) = buf
        .iter()
        .enumerate()
        .take(n / 2)
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .expect("nonempty signal");
    let dw = std::f64::consts::TAU / (n as f64 * dt);
    let amp = |w: f64| -> f64 {
        signal
            .iter()
            .zip(&window)
            .enumerate()
            .map(|(j, (s, win))| s * win * Complex64::from_polar(1.0, -w * j as f64 * dt))
            .sum::<Complex64>()
            .norm()
    };
    let (mut a, mut b) = ((k as f64 - 1.0) * dw, (k as f64 + 1.0) * dw);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (amp(c), amp(d));
    while (b - a).abs() > 1e-12 * dw.max(1.0) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = amp(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = amp(d);
        }
    }
    0.5 * (a + b)
}

/// Frequencies `(omega_y, omega_z)` read off the spectra of `p_y + i y` and `p_z + i z`.
pub fn spectral_frequencies(
    field: &PolyField<4>,
    x0: [f64; 4],
    dt: f64,
    count: usize,
    tol: f64,
) -> Result<(f64, f64)> {
    let s = sample_trajectory(field, x0, dt, count, tol)?;
    let sy: Vec<Complex64> = s.iter().map(|x| Complex64::new(x[2], x[0])).collect();
    let sz: Vec<Complex64> = s.iter().map(|x| Complex64::new(x[3], x[1])).collect();
    Ok((dominant_frequency(&sy, dt), dominant_frequency(&sz, dt)))
}

/// Spectral counterpart of [`frequency_map`], one trajectory per scan point.
pub fn spectral_map(
    field: &PolyField<4>,
    h: f64,
    ys: &[f64],
    p_y0: f64,
    dt: f64,
    count: usize,
    tol: f64,
) -> Result<Vec<FreqPoint>> {
    check_tol(tol)?;
    let pts: Vec<Option<FreqPoint>> = ys
        .par_iter()
        .map(|&y| {
            let pz = solve_pz(field, h, y, p_y0).ok()?;
            let (wy, wz) = spectral_frequencies(field, [y, 0.0, p_y0, pz], dt, count, tol).ok()?;
            Some(FreqPoint {
                y0: y,
                j_y0: 0.5 * (y * y + p_y0 * p_y0),
                j_z0: 0.5 * pz * pz,
                omega_y: wy,
                omega_z: wz,
                omega_r: (wy / wz).abs(),
            })
        })
        .collect();
    Ok(pts.into_iter().flatten().collect())
}
