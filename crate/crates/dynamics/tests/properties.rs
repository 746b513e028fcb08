use std::sync::OnceLock;

use halo_core::params::load_case;
use halo_core::pipeline::reduce;
use halo_dynamics::bifurcation::vertical_orbit;
use halo_dynamics::dop853::{Control, Dop853};
use halo_dynamics::field::{solve_pz, PhaseFlow, PolyField};
use halo_dynamics::fli::{fli, fli_grid, regular_grid, DEFAULT_TANGENT};
use halo_dynamics::section::{
    boundary_radius, fixed_points, poincare_map, rotation_number, section_orbit, SectionOptions,
};
use halo_dynamics::trajectory::integrate_cm;
use proptest::prelude::*;

fn sun_vesta_sail() -> &'static PolyField<4> {
    static F: OnceLock<PolyField<4>> = OnceLock::new();
    F.get_or_init(|| {
        let p = load_case("sun-vesta", Some(1e-2)).unwrap();
        PolyField::new(&reduce(&p, 1, 4).unwrap().cm.h).unwrap()
    })
}

fn sun_vesta_quadratic() -> PolyField<4> {
    let p = load_case("sun-vesta", Some(1e-2)).unwrap();
    PolyField::new(&reduce(&p, 1, 4).unwrap().cm.quadratic_only()).unwrap()
}

fn on_shell(h: f64, u: f64, v: f64) -> Option<[f64; 4]> {
    let f = sun_vesta_sail();
    let phi = std::f64::consts::TAU * u;
    let rho = boundary_radius(f, h, phi)?;
    let (y, p_y) = (0.9 * v * rho * phi.cos(), 0.9 * v * rho * phi.sin());
    let pz = solve_pz(f, h, y, p_y).ok()?;
    Some([y, 0.0, p_y, pz])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn energy_is_conserved(u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let h = 0.1;
        let x0 = on_shell(h, u, v).unwrap();
        let tr = integrate_cm(sun_vesta_sail(), x0, 100.0, 1e-12, None).unwrap();
        prop_assert!(tr.energy_drift(sun_vesta_sail()) <= 1e-10);
    }

    #[test]
    fn planar_subspace_is_invariant(y in -0.3..0.3f64, p_y in -0.3..0.3f64) {
        let tr = integrate_cm(sun_vesta_sail(), [y, 0.0, p_y, 0.0], 100.0, 1e-12, None).unwrap();
        let worst = tr.states.iter().map(|s| s.z().abs().max(s.p_z().abs())).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-12);
    }

    #[test]
    fn forward_then_backward_returns(u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let f = sun_vesta_sail();
        let x0 = on_shell(0.1, u, v).unwrap();
        let solver = Dop853::with_tol(1e-12);
        let fwd = solver.solve(&PhaseFlow(f), 0.0, x0, 50.0, |_| Control::Continue).unwrap();
        let back = solver.solve(&PhaseFlow(f), 50.0, fwd.y, 0.0, |_| Control::Continue).unwrap();
        for i in 0..4 {
            prop_assert!((back.y[i] - x0[i]).abs() <= 1e-8);
        }
    }

    #[test]
    fn section_points_stay_on_branch(u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let f = sun_vesta_sail();
        let x0 = on_shell(0.05, u, v).unwrap();
        let opts = SectionOptions { max_points: 20, ..Default::default() };
        let o = section_orbit(f, 0.05, x0[0], x0[2], &opts).unwrap();
        prop_assert_eq!(o.points.len(), 20);
        prop_assert!(o.energy_error <= 1e-10 * 0.05);
        for p in &o.points {
            let pz = solve_pz(f, 0.05, p.y, p.p_y).unwrap();
            prop_assert!(pz > 0.0);
        }
    }
}

#[test]
fn refined_crossings_lie_on_the_section() {
    let f = sun_vesta_sail();
    let x0 = on_shell(0.1, 0.3, 0.6).unwrap();
    let run = halo_dynamics::events::find_crossings(
        &Dop853::with_tol(1e-12),
        &PhaseFlow(f),
        x0,
        1,
        halo_dynamics::events::Direction::Up,
        200.0,
        30,
    )
    .unwrap();
    assert_eq!(run.crossings.len(), 30);
    for c in &run.crossings {
        assert!(c.state[1].abs() <= 1e-12);
        assert!(c.state[3] > 0.0);
    }
}

#[test]
fn no_sail_section_is_regular_around_one_center() {
    let p = load_case("sun-vesta", Some(0.0)).unwrap();
    let f = PolyField::new(&reduce(&p, 1, 4).unwrap().cm.h).unwrap();
    let h = 0.2;
    assert_eq!(fixed_points(&f, h, 1e-12).unwrap().len(), 1);
    let v = vertical_orbit(&f, h, 1e-12).unwrap();
    let rho = boundary_radius(&f, h, 0.0).unwrap();
    let opts = SectionOptions {
        max_points: 100,
        t_max: 1e5,
        ..Default::default()
    };
    let rot: Vec<f64> = (1..=8)
        .map(|k| {
            let o = section_orbit(&f, h, v.y + rho * k as f64 / 9.0, v.p_y, &opts).unwrap();
            rotation_number(&o.points, (v.y, v.p_y)).unwrap()
        })
        .collect();
    assert!(rot.windows(2).all(|w| w[1] < w[0]), "{rot:?}");
}

#[test]
fn energy_below_shell_gives_empty_section() {
    let seeds = [(0.0, 0.0), (0.1, 0.0), (0.0, 0.1)];
    let out = poincare_map(sun_vesta_sail(), -0.01, &seeds, &SectionOptions::default()).unwrap();
    assert!(out.is_empty());
}

#[test]
fn quadratic_only_fli_is_flat() {
    let f = sun_vesta_quadratic();
    let h = 0.1;
    let rho = boundary_radius(&f, h, 0.0).unwrap();
    let grid = regular_grid((-rho, rho), (-rho, rho), 9, 9);
    let recs = fli_grid(&f, h, &grid, 100.0, DEFAULT_TANGENT, 1e-12).unwrap();
    assert!(recs.len() > 40);
    let lo = recs.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
    let hi = recs.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
    assert!(hi - lo <= 0.2, "spread {}", hi - lo);
}

fn ridges(profile: &[f64]) -> Vec<usize> {
    let mut sorted = profile.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    (1..profile.len() - 1)
        .filter(|&i| profile[i] > profile[i - 1] && profile[i] >= profile[i + 1])
        .filter(|&i| profile[i] > median)
        .collect()
}

#[test]
fn fli_ridges_do_not_depend_on_tangent() {
    // line through the hyperbolic inclined fixed point; the weak hyperbolicity
    // needs a long horizon before the separatrix stands out
    let f = sun_vesta_sail();
    let h = 0.1;
    let p_y = 0.39;
    let ys: Vec<f64> = (0..20).map(|k| 0.01125 * k as f64).collect();
    let profile = |tangent: [f64; 4]| -> Vec<f64> {
        ys.iter()
            .map(|&y| {
                let pz = solve_pz(f, h, y, p_y).unwrap();
                fli(f, [y, 0.0, p_y, pz], tangent, 3000.0, 1e-12).unwrap().value
            })
            .collect()
    };
    let a = ridges(&profile([1.0, 0.0, 0.0, 0.0]));
    let b = ridges(&profile([0.0, 1.0, 0.0, 0.0]));
    assert!(!a.is_empty());
    assert_eq!(a.len(), b.len(), "{a:?} {b:?}");
    for (i, j) in a.iter().zip(&b) {
        assert!(i.abs_diff(*j) <= 1, "{a:?} {b:?}");
    }
}

#[test]
fn full_three_dof_keeps_hyperbolic_pair_at_rest() {
    let p = load_case("earth-moon", None).unwrap();
    let cm = reduce(&p, 1, 6).unwrap().cm;
    let f = PolyField::<6>::new(&cm.full).unwrap();
    let x0 = [0.0, 0.1, 0.05, 0.0, -0.05, 0.1];
    let mut worst: f64 = 0.0;
    Dop853::with_tol(1e-12)
        .solve(&PhaseFlow(&f), 0.0, x0, 20.0, |st| {
            worst = worst.max((st.y[0] * st.y[3]).abs());
            Control::Continue
        })
        .unwrap();
    assert!(worst <= 1e-10);

    // off the manifold the product q1 p1 is a first integral of the normal form
    let x1 = [1e-6, 0.1, 0.05, 1e-3, -0.05, 0.1];
    let i0 = x1[0] * x1[3];
    let mut drift: f64 = 0.0;
    Dop853::with_tol(1e-12)
        .solve(&PhaseFlow(&f), 0.0, x1, 2.0, |st| {
            drift = drift.max((st.y[0] * st.y[3] - i0).abs());
            Control::Continue
        })
        .unwrap();
    assert!(drift <= 1e-6 * i0.abs(), "{drift}");
}
