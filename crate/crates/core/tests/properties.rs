use num_traits::Zero;
use proptest::prelude::*;

use kn_core::algebras::{lie_action, mul_A};
use kn_core::basis::{MarkedSurface, Section};
use kn_core::exact::{int, ratio, residue_form, RationalFunction, Scalar, SpherePoint};

fn surface(k: usize) -> MarkedSurface {
    let pts: Vec<Scalar> = (0..k as i64).map(int).collect();
    MarkedSurface::from_finite(&pts, &[]).unwrap()
}

fn small_rational() -> impl Strategy<Value = Scalar> {
    (-6i64..=6, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

/// `c ∏ (z - x)^k` with distinct small integer roots.
fn factored() -> impl Strategy<Value = (Scalar, Vec<(Scalar, i64)>)> {
    (
        small_rational().prop_filter("nonzero", |c| !c.is_zero()),
        proptest::collection::btree_map(-4i64..=4, -3i64..=3, 0..4),
    )
        .prop_map(|(c, roots)| (c, roots.into_iter().map(|(x, k)| (int(x), k)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residues_of_a_form_sum_to_zero((c, roots) in factored(), (c2, roots2) in factored()) {
        let f = &RationalFunction::from_root_powers(c, &roots) + &RationalFunction::from_root_powers(c2, &roots2);
        let mut points: Vec<SpherePoint> = roots.iter().chain(&roots2).map(|(x, _)| SpherePoint::Finite(x.clone())).collect();
        points.sort_by_key(|p| format!("{p}"));
        points.dedup();
        points.push(SpherePoint::Infinity);
        let total: Scalar = points.iter().map(|p| residue_form(&f, p)).sum();
        prop_assert!(total.is_zero());
    }

    #[test]
    fn orders_of_a_function_sum_to_zero((c, roots) in factored()) {
        let f = RationalFunction::from_root_powers(c, &roots);
        let finite: i64 = roots.iter().map(|(x, _)| f.order_at_finite(x).unwrap()).sum();
        prop_assert_eq!(finite + f.order_at_infinity().unwrap(), 0);
    }

    #[test]
    fn vector_fields_act_by_derivations(k in 1usize..=3, n in -3i64..=3, m in -3i64..=3, l in -3i64..=3, p in 0usize..3) {
        let s = surface(k);
        let p = p % k + 1;
        let e = s.basis_element(-1, n, p).unwrap().section.clone();
        let g = s.basis_element(0, m, 1).unwrap().section.clone();
        let h = s.basis_element(0, l, k).unwrap().section.clone();
        let lhs = lie_action(&s, &e, &mul_A(&s, &g, &h).unwrap()).unwrap();
        let rhs = mul_A(&s, &lie_action(&s, &e, &g).unwrap(), &h).unwrap()
            .add(&mul_A(&s, &g, &lie_action(&s, &e, &h).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs.f, rhs.f);
    }

    #[test]
    fn expansions_reconstruct(k in 1usize..=3, lambda in -1i32..=2, coeffs in proptest::collection::vec((-4i64..=4, 0usize..3, -3i64..=3), 1..5)) {
        let s = surface(k);
        let mut f = RationalFunction::zero();
        for (n, p, c) in &coeffs {
            let b = s.basis_element(lambda, *n, p % k + 1).unwrap();
            f = &f + &b.section.f.scale(&int(*c));
        }
        let sec = Section::new(lambda, f);
        let e = s.expand(&sec).unwrap();
        prop_assert_eq!(s.reconstruct(&e).unwrap().f, sec.f);
    }
}
