//! Automorphisms of `R_{n,e,P}` (the case `Q = Y^m`, `f_{d-1} = 0`).
//!
//! Parameters `(lambda, mu, a(X))` give
//!
//! ```text
//! x -> lambda x
//! s -> mu s + x^{n+e} a(x)
//! y -> c y + W,                 c = mu^d / lambda^n
//! z -> (mu^{dm} / lambda^{nm+e}) z + ((c y + W)^m - c^m y^m - x^{n+e} a(x)) / (lambda^e x^e)
//! ```
//!
//! with `W = (P(lambda x, mu s + x^{n+e} a(x)) - mu^d P(x, s)) / (lambda^n x^n)`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{parse_poly, MultiPoly, VarSet};
use crate::quotient::{BasisKey, Family, QuotElem, Ring};
use crate::rational::{format_rational, parse_rational, pow_i, Rational};
use crate::report::Report;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AutParams {
    pub lambda: Rational,
    pub mu: Rational,
    /// Polynomial in `X` alone.
    pub a: MultiPoly,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AutParamsJson {
    pub lambda: String,
    pub mu: String,
    pub a: String,
}

fn x_vars() -> VarSet {
    VarSet::new(["X"]).unwrap()
}

/// `p(c X)` for a polynomial in `X`.
fn scale_arg(p: &MultiPoly, c: &Rational) -> MultiPoly {
    MultiPoly::from_terms(
        p.vars(),
        p.terms().map(|(m, v)| (m.clone(), v * pow_i(c, m.exponents()[0] as i64))),
    )
}

impl AutParams {
    pub fn new(lambda: Rational, mu: Rational, a: MultiPoly) -> Self {
        AutParams { lambda, mu, a }
    }

    pub fn identity() -> Self {
        Self::new(Rational::one(), Rational::one(), MultiPoly::zero(&x_vars()))
    }

    pub fn from_json(j: &AutParamsJson) -> Result<Self> {
        Ok(Self::new(parse_rational(&j.lambda)?, parse_rational(&j.mu)?, parse_poly(&j.a, &x_vars())?))
    }

    pub fn to_json(&self) -> AutParamsJson {
        AutParamsJson {
            lambda: format_rational(&self.lambda),
            mu: format_rational(&self.mu),
            a: self.a.to_string(),
        }
    }

    /// Parameters of the inverse map: `(1/lambda, 1/mu, -mu^{-1} lambda^{-(n+e)} a(x/lambda))`.
    pub fn inverse(&self, ring: &Ring) -> AutParams {
        let ne = (ring.n() + ring.e()) as i64;
        let li = self.lambda.recip();
        let f = -(self.mu.recip() * pow_i(&li, ne));
        AutParams::new(li.clone(), self.mu.recip(), scale_arg(&self.a, &li).scale(&f))
    }

    /// Parameters of `self o other` (apply `other` first on generators, then `self`).
    pub fn compose(&self, other: &AutParams, ring: &Ring) -> AutParams {
        let ne = (ring.n() + ring.e()) as i64;
        let a = self.a.scale(&other.mu) + scale_arg(&other.a, &self.lambda).scale(&pow_i(&self.lambda, ne));
        AutParams::new(&self.lambda * &other.lambda, &self.mu * &other.mu, a)
    }
}

fn require_normalized(ring: &Ring) -> Result<()> {
    if ring.family() != Family::Full || ring.is_cylinder() {
        return Err(Error::InvalidAutParams("automorphisms need a full-family ring".into()));
    }
    if ring.q_coeffs().iter().any(|g| !g.is_zero()) {
        return Err(Error::InvalidAutParams("Q must be Y^m".into()));
    }
    if !ring.p_coeffs().last().unwrap().is_zero() {
        return Err(Error::InvalidAutParams("f_{d-1} must vanish".into()));
    }
    Ok(())
}

/// Violated constraints (empty when the parameters are admissible).
pub fn check_params(ring: &Ring, p: &AutParams) -> Result<Vec<String>> {
    require_normalized(ring)?;
    let (n, e, d, m) = (ring.n() as i64, ring.e() as i64, ring.d() as i64, ring.m().unwrap() as i64);
    let mut out = Vec::new();
    if p.lambda.is_zero() || p.mu.is_zero() {
        out.push("lambda and mu must be nonzero".to_string());
        return Ok(out);
    }
    if p.a.vars() != &x_vars() {
        out.push(format!("a = {} is not a polynomial in X", p.a));
    }
    let lhs = pow_i(&p.mu, d * m - 1);
    let rhs = pow_i(&p.lambda, n * m);
    if lhs != rhs {
        out.push(format!(
            "mu^(dm-1) = {} but lambda^(nm) = {}",
            format_rational(&lhs),
            format_rational(&rhs)
        ));
    }
    for i in 2..=d {
        let f = &ring.p_coeffs()[(d - i) as usize];
        let mu_i = pow_i(&p.mu, i);
        for (mono, c) in f.terms() {
            let k = mono.exponents()[0] as i64;
            if k >= n + e {
                continue;
            }
            if c * pow_i(&p.lambda, k) != c * &mu_i {
                out.push(format!("f_{}(lambda X) differs from mu^{} f_{}(X) at X^{}", d - i, i, d - i, k));
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct RingAuto {
    ring: Ring,
    params: AutParams,
    /// Images of `X, S, Y, Z` as polynomials in `X, S, Y, Z`.
    polys: Vec<MultiPoly>,
    images: Vec<QuotElem>,
}

fn exact_div(p: &MultiPoly, idx: usize, k: u32, what: &str) -> Result<MultiPoly> {
    p.div_var_power(idx, k).ok_or_else(|| Error::InexactDivision {
        divisor: format!("X^{k}"),
        context: format!("{what}: {p}"),
    })
}

pub fn build_auto(ring: &Ring, p: &AutParams) -> Result<RingAuto> {
    let bad = check_params(ring, p)?;
    if !bad.is_empty() {
        return Err(Error::InvalidAutParams(bad.join("; ")));
    }
    let v = ring.vars();
    let (n, e, d, m) = (ring.n(), ring.e(), ring.d(), ring.m().unwrap());
    let x = MultiPoly::var(v, "X")?;
    let s = MultiPoly::var(v, "S")?;
    let y = MultiPoly::var(v, "Y")?;
    let z = MultiPoly::var(v, "Z")?;
    let (lam, mu) = (&p.lambda, &p.mu);
    let a = p.a.embed(v)?;
    let xa = x.pow(n + e) * &a;

    let img_x = x.scale(lam);
    let img_s = s.scale(mu) + &xa;
    let pp = ring.p_poly();
    let mut sub = BTreeMap::new();
    sub.insert("X".to_string(), img_x.clone());
    sub.insert("S".to_string(), img_s.clone());
    let lifted = pp.substitute(&sub)?;
    let w_num = lifted - pp.scale(&pow_i(mu, d as i64));
    let w = exact_div(&w_num, 0, n, "W")?.scale(&pow_i(lam, -(n as i64)));
    let c = pow_i(mu, d as i64) * pow_i(lam, -(n as i64));
    let img_y = y.scale(&c) + &w;
    let z_num = img_y.pow(m) - y.pow(m).scale(&pow_i(&c, m as i64)) - &xa;
    let z_tail = exact_div(&z_num, 0, e, "z numerator")?.scale(&pow_i(lam, -(e as i64)));
    let z_coef = pow_i(mu, (d * m) as i64) * pow_i(lam, -((n * m + e) as i64));
    let img_z = z.scale(&z_coef) + z_tail;

    let polys = vec![img_x, img_s, img_y, img_z];
    let images = polys.iter().map(|q| ring.normal_form(q)).collect::<Result<Vec<_>>>()?;
    let auto = RingAuto { ring: ring.clone(), params: p.clone(), polys, images };
    let residuals = auto.relation_residuals()?;
    if let Some(r) = residuals.iter().find(|r| !r.is_zero()) {
        return Err(Error::InvalidAutParams(format!("relation maps to {r}")));
    }
    Ok(auto)
}

impl RingAuto {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn params(&self) -> &AutParams {
        &self.params
    }

    pub fn images(&self) -> &[QuotElem] {
        &self.images
    }

    pub fn image_polys(&self) -> &[MultiPoly] {
        &self.polys
    }

    pub fn apply(&self, a: &QuotElem) -> Result<QuotElem> {
        self.ring.eval_poly(&a.to_poly(), &self.images)
    }

    /// Images of the defining generators, which must vanish.
    pub fn relation_residuals(&self) -> Result<Vec<QuotElem>> {
        self.ring.generators().iter().map(|g| self.ring.eval_poly(g, &self.images)).collect()
    }

    /// `self o other` on generators.
    pub fn compose(&self, other: &RingAuto) -> Result<Vec<QuotElem>> {
        other.images.iter().map(|img| self.apply(img)).collect()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AutoCertificate {
    pub ring: String,
    pub params: AutParamsJson,
    pub images: BTreeMap<String, String>,
    pub checks: Vec<Report>,
    pub pass: bool,
}

/// Checks the homomorphism property, degree preservation on all basis
/// monomials of degree `<= degree_bound` and invertibility via the inverse parameters.
pub fn verify_auto(auto: &RingAuto, degree_bound: u64) -> Result<AutoCertificate> {
    let ring = &auto.ring;
    let label = ring.label();

    let mut hom = Report::new("homomorphism", &label, 0);
    for (g, r) in ring.generators().iter().zip(auto.relation_residuals()?) {
        if !r.is_zero() {
            hom.fail(format!("{g} maps to {r}"));
        }
    }

    let mut deg = Report::new("degree_preservation", &label, degree_bound);
    for (k, w) in ring.basis_monomials(degree_bound) {
        let img = auto.apply(&ring.monomial(k))?;
        let got = img.basis_degree();
        if got.finite() != Some(w) {
            deg.fail(format!("deg {} of {} is {got}", w, ring.monomial(k)));
        }
    }

    let mut inv = Report::new("inverse", &label, 0);
    let inverse = build_auto(ring, &auto.params.inverse(ring))?;
    let gens: Vec<QuotElem> = ring.vars().names().iter().map(|v| ring.gen(v)).collect::<Result<_>>()?;
    for (name, comp) in [("alpha o beta", auto.compose(&inverse)?), ("beta o alpha", inverse.compose(auto)?)] {
        for (g, img) in gens.iter().zip(&comp) {
            if g != img {
                inv.fail(format!("{name} sends {g} to {img}"));
            }
        }
    }

    let mut shape = Report::new("generator_shape", &label, 0);
    let lam_x = ring.gen("X")?.scale(&auto.params.lambda);
    if auto.images[0] != lam_x {
        shape.fail(format!("x maps to {}", auto.images[0]));
    }
    let ne = ring.n() + ring.e();
    for k in auto.images[1].terms().keys() {
        let in_span = *k == BasisKey::new(0, 1, 0, 0) || (k.s == 0 && k.y == 0 && k.z == 0 && k.x >= ne);
        if !in_span {
            shape.fail(format!("s maps to {}", auto.images[1]));
            break;
        }
    }

    let checks = vec![hom, deg, inv, shape];
    let pass = checks.iter().all(|c| c.pass);
    let images = ["x", "s", "y", "z"]
        .iter()
        .zip(&auto.images)
        .map(|(n, img)| (n.to_string(), img.to_string()))
        .collect();
    Ok(AutoCertificate { ring: label, params: auto.params.to_json(), images, checks, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quotient::RingPresentation;
    use crate::rational::int;

    fn toy_s2() -> Ring {
        RingPresentation::toy()
    }

    #[test]
    fn identity_is_identity() {
        let r = RingPresentation::r_ne(2, 1).unwrap();
        let id = build_auto(&r, &AutParams::identity()).unwrap();
        for (v, img) in r.vars().names().iter().zip(id.images()) {
            assert_eq!(&r.gen(v).unwrap(), img);
        }
        assert!(verify_auto(&id, 8).unwrap().pass);
    }

    #[test]
    fn r_ne_constraints() {
        let r = RingPresentation::r_ne(2, 1).unwrap();
        let p = AutParams::new(int(-1), int(1), MultiPoly::zero(&x_vars()));
        assert!(check_params(&r, &p).unwrap().is_empty());
        assert!(verify_auto(&build_auto(&r, &p).unwrap(), 8).unwrap().pass);
        let bad = AutParams::new(int(1), int(2), MultiPoly::zero(&x_vars()));
        assert!(!check_params(&r, &bad).unwrap().is_empty());
        assert!(matches!(build_auto(&r, &bad), Err(Error::InvalidAutParams(_))));
        // mu^2 = 1 holds but mu^3 = lambda^4 does not
        let neg = AutParams::new(int(1), int(-1), MultiPoly::zero(&x_vars()));
        assert_eq!(check_params(&r, &neg).unwrap().len(), 1);
    }

    #[test]
    fn scaling_family_on_toy() {
        let r = toy_s2();
        let t = int(2);
        let p = AutParams::new(pow_i(&t, 3), pow_i(&t, 4), MultiPoly::zero(&x_vars()));
        let auto = build_auto(&r, &p).unwrap();
        assert_eq!(auto.images()[0], r.parse_elem("8*X").unwrap());
        assert_eq!(auto.images()[1], r.parse_elem("16*S").unwrap());
        assert_eq!(auto.images()[2], r.parse_elem("4*Y").unwrap());
        assert_eq!(auto.images()[3], r.parse_elem("2*Z").unwrap());
        assert!(verify_auto(&auto, 12).unwrap().pass);
    }

    #[test]
    fn nonzero_a_and_composition() {
        let r = RingPresentation::r_ne(1, 1).unwrap();
        let a1 = parse_poly("X + 3", &x_vars()).unwrap();
        let a2 = parse_poly("1/2*X^2 - 1", &x_vars()).unwrap();
        let p1 = AutParams::new(int(-1), int(1), a1);
        let p2 = AutParams::new(int(1), int(1), a2);
        let al1 = build_auto(&r, &p1).unwrap();
        let al2 = build_auto(&r, &p2).unwrap();
        assert!(verify_auto(&al1, 8).unwrap().pass);
        let composed = build_auto(&r, &p1.compose(&p2, &r)).unwrap();
        assert_eq!(al1.compose(&al2).unwrap(), composed.images().to_vec());
        let inv = p1.inverse(&r);
        assert_eq!(inv.lambda, int(-1));
        assert_eq!(inv.a, parse_poly("X - 3", &x_vars()).unwrap());
    }

    #[test]
    fn unnormalized_ring_is_rejected() {
        let xv = x_vars();
        let r = RingPresentation::full(2, 1, vec![MultiPoly::zero(&xv), MultiPoly::one(&xv)], vec![MultiPoly::zero(&xv); 2]).unwrap();
        assert!(check_params(&r, &AutParams::identity()).is_err());
    }
}
