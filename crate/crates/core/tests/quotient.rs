use lndkit::quotient::QuotOp;
use lndkit::sample::{random_elem, random_poly};
use lndkit::{BasisKey, MultiPoly, Ring, RingPresentation, RingSpec, Strategy};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rings() -> Vec<Ring> {
    let mut out = vec![RingPresentation::toy()];
    for (n, e, d, m) in [(1, 1, 2, 2), (2, 1, 3, 2), (3, 2, 2, 3), (1, 2, 3, 3)] {
        out.push(RingPresentation::simple_full(n, e, d, m).unwrap());
    }
    let odd = r#"{"family":"full","n":2,"e":1,"P":["X+1","0","-2"],"Q":["1/2","X"]}"#;
    out.push(RingSpec::parse_json(odd).unwrap());
    let dan = r#"{"family":"danielewski","n":1,"P":["1","0","X^2","0"]}"#;
    out.push(RingSpec::parse_json(dan).unwrap());
    out
}

fn max_exps(r: &Ring) -> Vec<u32> {
    vec![3; r.vars().len()]
}

#[test]
fn strategies_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for r in rings() {
        for _ in 0..500 {
            let p = random_poly(r.vars(), &mut rng, &max_exps(&r), 5);
            let a = r.normal_form_with(&p, Strategy::SFirst).unwrap();
            let b = r.normal_form_with(&p, Strategy::YFirst).unwrap();
            assert_eq!(a, b, "{} on {p}", r.label());
        }
    }
}

#[test]
fn cofactors_certify_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for r in rings() {
        let gens = r.generators();
        for _ in 0..100 {
            let p = random_poly(r.vars(), &mut rng, &max_exps(&r), 5);
            let (nf, cof) = r.normal_form_with_cofactors(&p).unwrap();
            let mut rebuilt = nf.to_poly();
            for (q, g) in cof.iter().zip(&gens) {
                rebuilt = &rebuilt + &(q * g);
            }
            assert_eq!(rebuilt, p, "{}", r.label());
        }
    }
}

#[test]
fn generators_reduce_to_zero() {
    for r in rings() {
        for g in r.generators() {
            assert!(r.normal_form(&g).unwrap().is_zero(), "{}: {g}", r.label());
        }
    }
}

#[test]
fn normal_monomials_are_fixed_and_distinct() {
    for r in rings() {
        let basis = r.basis_monomials(12);
        assert!(!basis.is_empty());
        let mut seen = std::collections::BTreeSet::new();
        for (k, w) in basis {
            assert!(r.is_normal(k));
            assert_eq!(r.monomial_degree(k).unwrap(), w);
            assert!(w <= 12);
            let e = r.monomial(k);
            assert_eq!(e.terms().len(), 1);
            assert!(seen.insert(k));
        }
    }
}

#[test]
fn rewriting_decreases_the_measure() {
    for r in rings() {
        for s in 0..6 {
            for y in 0..6 {
                let k = BasisKey { s, y, ..BasisKey::ONE };
                for strategy in [Strategy::SFirst, Strategy::YFirst] {
                    if let Some(rw) = r.rewrite_once(k, strategy) {
                        for (nk, _) in &rw.replacement {
                            assert!(r.reduction_measure(*nk) < r.reduction_measure(k), "{}: {k:?}", r.label());
                        }
                    } else {
                        assert!(r.is_normal(k));
                    }
                }
            }
        }
    }
}

#[test]
fn multiplication_matches_polynomial_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for r in rings() {
        for _ in 0..50 {
            let a = random_elem(&r, &mut rng, 8, 2, 4);
            let b = random_elem(&r, &mut rng, 8, 2, 4);
            let direct = r.normal_form(&(&a.to_poly() * &b.to_poly())).unwrap();
            assert_eq!(a.arith(&b, QuotOp::Mul).unwrap(), direct);
        }
    }
}

#[test]
fn elements_round_trip_through_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for r in rings() {
        let a = random_elem(&r, &mut rng, 10, 3, 6);
        let back = lndkit::QuotElem::from_json(&r, &a.to_json()).unwrap();
        assert_eq!(a, back);
    }
}

#[test]
fn mixing_rings_is_an_error() {
    let a = RingPresentation::toy().one();
    let b = RingPresentation::r_ne(1, 1).unwrap().one();
    assert!(a.arith(&b, QuotOp::Add).is_err());
    let p = MultiPoly::one(&lndkit::VarSet::new(["X"]).unwrap());
    assert!(RingPresentation::toy().normal_form(&p).is_err());
}
