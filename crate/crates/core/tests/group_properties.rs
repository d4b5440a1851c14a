//! Property tests for the group/algebra layer.

use proptest::prelude::*;

use lie_momentum::calculus::{q_bound, q_complex_eval};
use lie_momentum::group::{
    bracket, geodesic_distance, group_exp, group_log, inner, AlgebraElement, GroupElement,
    Tolerances,
};
use nalgebra::DMatrix;

fn skew_from(entries: Vec<f64>, n: usize, scale: f64) -> AlgebraElement {
    let mut m = DMatrix::<f64>::zeros(n, n);
    let mut it = entries.into_iter();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = it.next().unwrap_or(0.0) * scale;
            m[(i, j)] = -v;
            m[(j, i)] = v;
        }
    }
    AlgebraElement::new(m).unwrap()
}

fn algebra_strategy(n: usize, scale: f64) -> impl Strategy<Value = AlgebraElement> {
    prop::collection::vec(-1.0f64..1.0, n * (n - 1) / 2)
        .prop_map(move |v| skew_from(v, n, scale))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exp_log_roundtrip(xi in algebra_strategy(5, 0.5)) {
        let tol = Tolerances::default();
        let g = group_exp(&xi);
        let back = group_log(&g, &tol).unwrap();
        prop_assert!((&back - &xi).norm() < 1e-10);
    }

    #[test]
    fn exp_lands_on_the_group(xi in algebra_strategy(4, 2.0)) {
        let g = group_exp(&xi);
        prop_assert!(g.orthogonality_defect() < 1e-12);
        prop_assert!((g.mat().determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bracket_antisymmetry_and_jacobi(
        x in algebra_strategy(4, 1.0),
        y in algebra_strategy(4, 1.0),
        z in algebra_strategy(4, 1.0),
    ) {
        let xy = bracket(&x, &y).unwrap();
        let yx = bracket(&y, &x).unwrap();
        prop_assert!((&xy + &yx).norm() < 1e-13);
        let jacobi = &(&bracket(&x, &bracket(&y, &z).unwrap()).unwrap()
            + &bracket(&y, &bracket(&z, &x).unwrap()).unwrap())
            + &bracket(&z, &xy).unwrap();
        prop_assert!(jacobi.norm() < 1e-12);
    }

    #[test]
    fn ad_is_skew_adjoint(
        x in algebra_strategy(5, 1.0),
        y in algebra_strategy(5, 1.0),
        z in algebra_strategy(5, 1.0),
    ) {
        let lhs = inner(&bracket(&x, &y).unwrap(), &z).unwrap()
            + inner(&y, &bracket(&x, &z).unwrap()).unwrap();
        prop_assert!(lhs.abs() < 1e-12);
    }

    #[test]
    fn distance_is_symmetric(
        a in algebra_strategy(4, 0.4),
        b in algebra_strategy(4, 0.4),
    ) {
        let tol = Tolerances::default();
        let g = group_exp(&a);
        let h = group_exp(&b);
        let d1 = geodesic_distance(&g, &h, &tol).unwrap();
        let d2 = geodesic_distance(&h, &g, &tol).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-10);
    }

    #[test]
    fn left_translation_preserves_distance(
        a in algebra_strategy(4, 0.4),
        b in algebra_strategy(4, 0.4),
        c in algebra_strategy(4, 0.8),
    ) {
        let tol = Tolerances::default();
        let g = group_exp(&a);
        let h = group_exp(&b);
        let k = group_exp(&c);
        let d = geodesic_distance(&g, &h, &tol).unwrap();
        let d_shift = geodesic_distance(&k.compose(&g), &k.compose(&h), &tol).unwrap();
        prop_assert!((d - d_shift).abs() < 1e-10);
    }

    #[test]
    fn q_routes_agree(x in 0.02f64..6.26) {
        prop_assert!((q_bound(x).unwrap() - q_complex_eval(x)).abs() < 1e-12);
    }

    #[test]
    fn constructor_symmetrizes_exactly(entries in prop::collection::vec(-1.0f64..1.0, 16)) {
        let m = DMatrix::from_row_slice(4, 4, &entries);
        let a = AlgebraElement::new(m).unwrap();
        let s = a.mat() + a.mat().transpose();
        prop_assert_eq!(s.norm(), 0.0);
    }
}

#[test]
fn group_element_roundtrips_row_major() {
    let tol = Tolerances::default();
    let g = group_exp(&skew_from(vec![0.3, -0.2, 0.7], 3, 1.0));
    let flat = g.to_row_major();
    let back = GroupElement::from_row_major(3, &flat, &tol).unwrap();
    assert_eq!(g.mat(), back.mat());
}
