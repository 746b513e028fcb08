use halo_core::poly::{Monomial, RealSeries};
use nalgebra::DMatrix;
use proptest::prelude::*;

const GRADING: u32 = 8;

fn series(nvars: usize, max_deg: u32) -> impl Strategy<Value = RealSeries> {
    let term = (
        prop::collection::vec(0u8..=max_deg as u8, nvars),
        -1.0f64..1.0,
    );
    prop::collection::vec(term, 1..10).prop_map(move |terms| {
        RealSeries::from_terms(
            nvars,
            GRADING,
            terms
                .into_iter()
                .filter(|(e, _)| e.iter().map(|&k| k as u32).sum::<u32>() <= max_deg)
                .map(|(e, c)| (Monomial::new(&e), c)),
        )
    })
}

fn close(a: &RealSeries, b: &RealSeries, tol: f64) -> bool {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    (a - b).max_abs() <= tol * scale
}

/// Symplectic matrix built from a shear, a transposed shear and a block
/// `diag(A, A^-T)`.
fn symplectic(d: usize, s1: &[f64], s2: &[f64], a: &[f64]) -> DMatrix<f64> {
    let n = 2 * d;
    let sym = |v: &[f64]| {
        DMatrix::from_fn(d, d, |i, j| {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            v[i * d + j]
        })
    };
    let mut up = DMatrix::identity(n, n);
    up.view_mut((0, d), (d, d)).copy_from(&sym(s1));
    let mut low = DMatrix::identity(n, n);
    low.view_mut((d, 0), (d, d)).copy_from(&sym(s2));
    let mut am = DMatrix::from_row_slice(d, d, a);
    for i in 0..d {
        am[(i, i)] += 3.0;
    }
    let ainv_t = am.clone().try_inverse().unwrap().transpose();
    let mut blk = DMatrix::zeros(n, n);
    blk.view_mut((0, 0), (d, d)).copy_from(&am);
    blk.view_mut((d, d), (d, d)).copy_from(&ainv_t);
    up * low * blk
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn antisymmetry(f in series(6, 3), g in series(6, 3)) {
        let fg = f.poisson_bracket(&g).unwrap();
        let gf = g.poisson_bracket(&f).unwrap();
        prop_assert!((&fg + &gf).max_abs() <= 1e-13);
    }

    #[test]
    fn self_bracket_vanishes(f in series(4, 3)) {
        prop_assert!(f.poisson_bracket(&f).unwrap().max_abs() <= 1e-13);
    }

    #[test]
    fn jacobi(f in series(4, 3), g in series(4, 3), h in series(4, 3)) {
        let pb = |a: &RealSeries, b: &RealSeries| a.poisson_bracket(b).unwrap();
        let sum = &(&pb(&f, &pb(&g, &h)) + &pb(&g, &pb(&h, &f))) + &pb(&h, &pb(&f, &g));
        prop_assert!(sum.max_abs() <= 1e-12);
    }

    #[test]
    fn leibniz(f in series(6, 3), g in series(6, 3), h in series(6, 3)) {
        let lhs = f.poisson_bracket(&(&g * &h)).unwrap();
        let rhs = &(&f.poisson_bracket(&g).unwrap() * &h) + &(&g * &f.poisson_bracket(&h).unwrap());
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn symplectic_substitution_commutes(
        f in series(4, 3),
        g in series(4, 3),
        s1 in prop::collection::vec(-1.0f64..1.0, 4),
        s2 in prop::collection::vec(-1.0f64..1.0, 4),
        a in prop::collection::vec(-1.0f64..1.0, 4),
    ) {
        let m = symplectic(2, &s1, &s2, &a);
        let lhs = f.substitute_linear(&m).unwrap().poisson_bracket(&g.substitute_linear(&m).unwrap()).unwrap();
        let rhs = f.poisson_bracket(&g).unwrap().substitute_linear(&m).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn substitution_is_a_ring_map(
        f in series(4, 3),
        g in series(4, 3),
        entries in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let m = DMatrix::from_row_slice(4, 4, &entries);
        let lhs = (&f * &g).substitute_linear(&m).unwrap();
        let rhs = &f.substitute_linear(&m).unwrap() * &g.substitute_linear(&m).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn text_round_trip(f in series(6, 4)) {
        let back = RealSeries::parse(&f.to_text(), 6, GRADING).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn exact_rational_antisymmetry() {
    let f = RealSeries::from_terms(
        4,
        GRADING,
        [
            (Monomial::new(&[2, 1, 0, 1]), 3.0),
            (Monomial::new(&[0, 1, 2, 0]), -0.5),
        ],
    );
    let g = RealSeries::from_terms(
        4,
        GRADING,
        [
            (Monomial::new(&[1, 0, 1, 1]), 0.25),
            (Monomial::new(&[0, 2, 0, 1]), 2.0),
        ],
    );
    let s = &f.poisson_bracket(&g).unwrap() + &g.poisson_bracket(&f).unwrap();
    assert!(s.is_empty());
}
