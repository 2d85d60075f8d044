use lndkit::cyliso::{
    cancellation_report, compose_chain, danielewski_chain, solve_step, verify_step, CylinderStepSpec, PolyEndo,
};
use lndkit::{parse_poly, VarSet};

fn xs() -> VarSet {
    VarSet::new(["X", "S"]).unwrap()
}

fn single_term_deletions_fail(spec: &CylinderStepSpec, var: &str) {
    let phi = solve_step(spec).unwrap();
    assert!(verify_step(&phi, spec).unwrap().pass);
    let img = phi.image(var).unwrap().clone();
    for (m, _) in img.terms() {
        let mut cut = img.clone();
        cut.remove_term(m);
        let mut mutant: PolyEndo = phi.clone();
        mutant.set_image(var, cut).unwrap();
        let cert = verify_step(&mutant, spec).unwrap();
        assert!(!cert.pass, "{}: deleting {m:?} from Phi({var}) still verifies", spec.label());
    }
}

#[test]
fn mutations_are_caught() {
    single_term_deletions_fail(&CylinderStepSpec::Full { n: 1, e: 1 }, "T");
    single_term_deletions_fail(&CylinderStepSpec::Full { n: 1, e: 1 }, "Z");
    single_term_deletions_fail(&CylinderStepSpec::Full { n: 2, e: 1 }, "T");
    let p = parse_poly("S^4 + X^2*S^2 + 1", &xs()).unwrap();
    single_term_deletions_fail(&CylinderStepSpec::danielewski(1, p), "T");
}

#[test]
fn steps_verify_for_several_parameters() {
    for (n, e) in [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)] {
        let spec = CylinderStepSpec::Full { n, e };
        let cert = verify_step(&solve_step(&spec).unwrap(), &spec).unwrap();
        assert!(cert.pass, "{}: {:?}", spec.label(), cert.witnesses());
    }
    for (p, n) in [("S^2 + 1", 1), ("S^3 + X*S - 2", 2), ("S^4 + X^2*S^2 + 1", 2)] {
        let spec = CylinderStepSpec::danielewski(n, parse_poly(p, &xs()).unwrap());
        let cert = verify_step(&solve_step(&spec).unwrap(), &spec).unwrap();
        assert!(cert.pass, "{}: {:?}", spec.label(), cert.witnesses());
    }
}

#[test]
fn cancellation_fingerprints_differ() {
    let rep = cancellation_report(1, 1, 2).unwrap();
    assert!(rep.pass);
    assert_eq!(rep.source_fingerprint, (1, 1, 2, 2));
    assert_eq!(rep.target_fingerprint, (1, 2, 2, 2));
    assert!(cancellation_report(1, 2, 2).is_err());
}

#[test]
fn composite_with_larger_n() {
    let (_, cert) = compose_chain(2, 1, 3).unwrap();
    assert!(cert.pass, "{:?}", cert.witnesses());
    assert!(cert.congruence.is_none());
    assert!(compose_chain(1, 2, 2).is_err());
}

#[test]
fn danielewski_composite_with_another_polynomial() {
    let p = parse_poly("S^2 + X*S + 1", &xs()).unwrap();
    let (_, cert) = danielewski_chain(&p, 1, 3).unwrap();
    assert!(cert.pass, "{:?}", cert.witnesses());
}

#[test]
fn wrong_target_fails_relation_check() {
    let phi = solve_step(&CylinderStepSpec::Full { n: 1, e: 1 }).unwrap();
    let other = CylinderStepSpec::Full { n: 1, e: 2 };
    let src = CylinderStepSpec::Full { n: 1, e: 1 }.source().unwrap();
    let tgt = other.target().unwrap();
    let chain = lndkit::cyliso::step_chain(&CylinderStepSpec::Full { n: 1, e: 1 }, &phi, "").unwrap();
    let cert = lndkit::cyliso::verify_iso(&phi, &src, &tgt, &chain, None).unwrap();
    assert!(!cert.pass);
}
