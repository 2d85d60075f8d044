use std::collections::BTreeMap;

use lndkit::rational::frac;
use lndkit::{format_poly, parse_poly, Degree, Monomial, MultiPoly, VarSet, WeightFunction};
use proptest::prelude::*;

fn vars() -> VarSet {
    VarSet::new(["X", "S", "Y", "Z"]).unwrap()
}

fn poly() -> impl Strategy<Value = MultiPoly> {
    sized_poly(4, 6)
}

fn sized_poly(max_exp: u32, max_terms: usize) -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::array::uniform4(0..max_exp), -6i64..7, 1i64..4), 0..max_terms).prop_map(|terms| {
        let v = vars();
        MultiPoly::from_terms(&v, terms.into_iter().map(|(e, n, d)| (Monomial(e.to_vec()), frac(n, d))))
    })
}

fn omega() -> WeightFunction {
    WeightFunction::new(&vars(), vec![0, 1, 2, 5]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn ring_axioms(a in poly(), b in poly(), c in poly()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!(&a * &MultiPoly::one(&vars()), a.clone());
    }

    #[test]
    fn substitution_is_a_homomorphism(
        a in sized_poly(3, 4),
        b in sized_poly(3, 4),
        imgs in prop::collection::vec(sized_poly(2, 3), 4),
    ) {
        let v = vars();
        let map: BTreeMap<String, MultiPoly> =
            v.names().iter().cloned().zip(imgs.into_iter()).collect();
        let sub = |p: &MultiPoly| p.substitute(&map).unwrap();
        prop_assert_eq!(sub(&(&a + &b)), &sub(&a) + &sub(&b));
        prop_assert_eq!(sub(&(&a * &b)), &sub(&a) * &sub(&b));
    }

    #[test]
    fn weight_degree_is_additive_and_tops_multiply(a in poly(), b in poly()) {
        let w = omega();
        let prod = &a * &b;
        match (a.weight_degree(&w), b.weight_degree(&w)) {
            (Degree::Finite(da), Degree::Finite(db)) => {
                prop_assert_eq!(prod.weight_degree(&w), Degree::Finite(da + db));
                let tops = &a.top_homogeneous_component(&w).unwrap() * &b.top_homogeneous_component(&w).unwrap();
                prop_assert_eq!(prod.top_homogeneous_component(&w).unwrap(), tops);
            }
            _ => prop_assert!(prod.is_zero()),
        }
    }

    #[test]
    fn format_then_parse_round_trips(a in poly()) {
        let text = format_poly(&a);
        prop_assert_eq!(parse_poly(&text, &vars()).unwrap(), a);
    }

    #[test]
    fn partial_derivative_obeys_leibniz(a in poly(), b in poly()) {
        for v in ["X", "S", "Y", "Z"] {
            let lhs = (&a * &b).partial_derivative(v).unwrap();
            let rhs = &(&a.partial_derivative(v).unwrap() * &b) + &(&a * &b.partial_derivative(v).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}

#[test]
fn parser_handles_rationals_and_precedence() {
    let v = vars();
    let p = parse_poly("-(X + 1/2)^2*S + 3", &v).unwrap();
    assert_eq!(format_poly(&p), "-X^2*S - X*S - 1/4*S + 3");
    assert!(parse_poly("X^", &v).is_err());
    assert!(parse_poly("Q", &v).is_err());
}
