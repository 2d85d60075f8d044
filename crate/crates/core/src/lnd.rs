//! Derivations on the quotient rings, the degree function they induce, the
//! associated graded map and the bounded-degree kernel / AL checks.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::nullspace;
use crate::poly::{parse_poly, Degree, MultiPoly, WeightFunction};
use crate::quotient::{BasisKey, Family, QuotElem, Ring, RingPresentation, Strategy};
use crate::rational::{int, Rational};
use crate::report::Report;
use crate::sample::{random_elem, random_poly};

/// A derivation given by the images of the ring generators (in variable order).
#[derive(Clone, Debug)]
pub struct Derivation {
    ring: Ring,
    images: Vec<QuotElem>,
}

impl Derivation {
    /// Checks that the images are compatible with every defining relation.
    pub fn new(ring: &Ring, images: Vec<QuotElem>) -> Result<Self> {
        if images.len() != ring.vars().len() {
            return Err(Error::Malformed(format!(
                "{} images for {} generators",
                images.len(),
                ring.vars().len()
            )));
        }
        for img in &images {
            if img.ring() != ring {
                return Err(Error::RingMismatch);
            }
        }
        let d = Derivation { ring: ring.clone(), images };
        for (g, r) in ring.generators().iter().zip(d.relation_residuals()?) {
            if !r.is_zero() {
                return Err(Error::IllDefinedDerivation(format!("image of {g} is {r}")));
            }
        }
        Ok(d)
    }

    /// `d = x^{n+e} d/ds + x^e P_s d/dy + (Q_y P_s - x^n) d/dz` on a full ring and
    /// `x^n d/ds + P_s d/dy` on a Danielewski ring; `x` and `t` are constants.
    pub fn canonical(ring: &Ring) -> Result<Self> {
        let x = ring.gen("X")?;
        let (n, e) = (ring.n(), ring.e());
        let p_s = ring.normal_form(&ring.p_poly().partial_derivative("S")?)?;
        let mut images = vec![ring.zero(), x.pow(n + e), &x.pow(e) * &p_s];
        if let Some(q) = ring.q_poly() {
            let q_y = ring.normal_form(&q.partial_derivative("Y")?)?;
            images.push(&(&q_y * &p_s) - &x.pow(n));
        }
        if ring.is_cylinder() {
            images.push(ring.zero());
        }
        Self::new(ring, images)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn images(&self) -> &[QuotElem] {
        &self.images
    }

    pub fn image(&self, var: &str) -> Option<&QuotElem> {
        self.ring.vars().index_of(var).map(|i| &self.images[i])
    }

    /// The derivation applied formally to each defining generator, reduced.
    pub fn relation_residuals(&self) -> Result<Vec<QuotElem>> {
        let mut out = Vec::new();
        for g in self.ring.generators() {
            let mut acc = self.ring.zero();
            for (i, img) in self.images.iter().enumerate() {
                let dg = g.partial_derivative_at(i);
                if dg.is_zero() || img.is_zero() {
                    continue;
                }
                acc = &acc + &(&self.ring.normal_form(&dg)? * img);
            }
            out.push(acc);
        }
        Ok(out)
    }

    pub fn apply(&self, a: &QuotElem) -> Result<QuotElem> {
        if a.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        let mut raw: Vec<(BasisKey, Rational)> = Vec::new();
        for (k, c) in a.terms() {
            let exps = [k.x, k.s, k.y, k.z, k.t];
            for (slot, img) in self.var_slots().into_iter().zip(&self.images) {
                let e = exps[slot];
                if e == 0 || img.is_zero() {
                    continue;
                }
                let mut lowered = [k.x, k.s, k.y, k.z, k.t];
                lowered[slot] -= 1;
                let base = BasisKey { x: lowered[0], s: lowered[1], y: lowered[2], z: lowered[3], t: lowered[4] };
                let f = c * int(e as i64);
                for (ik, ic) in img.terms() {
                    let key = BasisKey {
                        x: base.x + ik.x,
                        s: base.s + ik.s,
                        y: base.y + ik.y,
                        z: base.z + ik.z,
                        t: base.t + ik.t,
                    };
                    raw.push((key, &f * ic));
                }
            }
        }
        Ok(self.ring.reduce_terms(raw))
    }

    /// Position of each ring variable inside `[x, s, y, z, t]`.
    fn var_slots(&self) -> Vec<usize> {
        let mut v = vec![0, 1, 2];
        if self.ring.family() == Family::Full {
            v.push(3);
        }
        if self.ring.is_cylinder() {
            v.push(4);
        }
        v
    }

    pub fn iterate(&self, a: &QuotElem, k: u32) -> Result<QuotElem> {
        let mut cur = a.clone();
        for _ in 0..k {
            if cur.is_zero() {
                break;
            }
            cur = self.apply(&cur)?;
        }
        Ok(cur)
    }

    /// Largest weight of a ring generator (`md`, or `d` for Danielewski rings).
    fn top_weight(&self) -> u64 {
        self.ring.d() as u64 * self.ring.m().unwrap_or(1) as u64
    }

    /// Default iteration budget for `a`: `md * deg + 1` applications.
    pub fn default_bound(&self, a: &QuotElem) -> u64 {
        self.top_weight() * a.basis_degree().finite().unwrap_or(0) + 1
    }

    /// `min { i : D^{i+1}(a) = 0 }`, trying at most `bound` applications.
    pub fn deg(&self, a: &QuotElem, bound: Option<u64>) -> Result<Degree> {
        if a.is_zero() {
            return Ok(Degree::NegInf);
        }
        let bound = bound.unwrap_or_else(|| self.default_bound(a));
        let mut cur = a.clone();
        for i in 0..bound {
            cur = self.apply(&cur)?;
            if cur.is_zero() {
                return Ok(Degree::Finite(i));
            }
        }
        Err(Error::BoundExceeded { bound })
    }
}

/// The class of an element in `F_i / F_{i-1}`, stored as its degree-`i` terms.
#[derive(Clone, PartialEq, Eq)]
pub struct GradedElem {
    degree: u64,
    elem: QuotElem,
}

impl GradedElem {
    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn elem(&self) -> &QuotElem {
        &self.elem
    }

    pub fn is_zero(&self) -> bool {
        self.elem.is_zero()
    }

    /// Product in the graded ring: multiply, then keep degree `i + j`.
    pub fn mul(&self, other: &GradedElem) -> GradedElem {
        let degree = self.degree + other.degree;
        GradedElem { degree, elem: (&self.elem * &other.elem).homogeneous_part(degree) }
    }

    pub fn add(&self, other: &GradedElem) -> Result<GradedElem> {
        if self.degree != other.degree {
            return Err(Error::Malformed(format!(
                "adding graded pieces of degrees {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(GradedElem { degree: self.degree, elem: &self.elem + &other.elem })
    }

    pub fn pow(&self, k: u32) -> GradedElem {
        let mut acc = GradedElem { degree: 0, elem: self.elem.ring().one() };
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

impl fmt::Display for GradedElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]_{}", self.elem, self.degree)
    }
}

impl fmt::Debug for GradedElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedElem({self})")
    }
}

pub fn gr_leading(a: &QuotElem) -> Result<GradedElem> {
    match a.basis_degree() {
        Degree::NegInf => Err(Error::ZeroPolynomial),
        Degree::Finite(d) => Ok(GradedElem { degree: d, elem: a.homogeneous_part(d) }),
    }
}

/// `omega = (0, 1, d, md)` on `(X, S, Y, Z)`; `(0, 1, d)` on a Danielewski ring.
pub fn omega(ring: &RingPresentation) -> WeightFunction {
    let d = ring.d() as u64;
    let mut w = vec![0, 1, d];
    if let Some(m) = ring.m() {
        w.push(m as u64 * d);
    }
    if ring.is_cylinder() {
        w.push(0);
    }
    WeightFunction::new(ring.vars(), w).expect("one weight per variable")
}

/// Top `omega`-homogeneous components of the defining generators.
pub fn hat_ideal_tops(ring: &RingPresentation) -> Vec<MultiPoly> {
    let w = omega(ring);
    ring.generators()
        .iter()
        .map(|g| g.top_homogeneous_component(&w).expect("generators are nonzero"))
        .collect()
}

/// `{X^n Y - S^d, Y^m - X^e Z}` (the second only for the full family).
pub fn expected_hat_tops(ring: &RingPresentation) -> Vec<MultiPoly> {
    let v = ring.vars();
    let mut out = vec![parse_poly(&format!("X^{}*Y - S^{}", ring.n(), ring.d()), v).unwrap()];
    if let Some(m) = ring.m() {
        out.push(parse_poly(&format!("Y^{} - X^{}*Z", m, ring.e()), v).unwrap());
    }
    out
}

pub fn hat_ideal_check(ring: &Ring) -> Report {
    let mut r = Report::new("hat_ideal_tops", &ring.label(), 0);
    let got = hat_ideal_tops(ring);
    let want = expected_hat_tops(ring);
    for (g, w) in got.iter().zip(&want) {
        if g == w || *g == -w {
            r.note(g.to_string());
        } else {
            r.fail(format!("top {g} differs from {w}"));
        }
    }
    r
}

/// Compares the basis-formula degree with the iteration degree on random elements.
pub fn degree_consistency(d: &Derivation, samples: usize, max_degree: u64, seed: u64) -> Report {
    let ring = d.ring();
    let mut r = Report::new("degree_consistency", &ring.label(), max_degree);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let a = random_elem(ring, &mut rng, max_degree, 3, 4);
        let formula = a.basis_degree();
        match d.deg(&a, None) {
            Ok(it) if it == formula => {}
            Ok(it) => r.fail(format!("{a}: formula {formula}, iteration {it}")),
            Err(e) => r.fail(format!("{a}: {e}")),
        }
    }
    r
}

/// Random polynomials reduced with both rule priorities must agree.
pub fn confluence_check(ring: &Ring, samples: usize, seed: u64) -> Report {
    let mut r = Report::new("confluence", &ring.label(), samples as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (d, m) = (ring.d(), ring.m().unwrap_or(1));
    let mut max_exps = vec![3, 2 * d + 1, 2 * m + 1];
    if ring.family() == Family::Full {
        max_exps.push(2);
    }
    if ring.is_cylinder() {
        max_exps.push(1);
    }
    for _ in 0..samples {
        let p = random_poly(ring.vars(), &mut rng, &max_exps, 4);
        let a = ring.normal_form_with(&p, Strategy::SFirst).expect("same variables");
        let b = ring.normal_form_with(&p, Strategy::YFirst).expect("same variables");
        if a != b {
            r.fail(format!("{p}: {a} vs {b}"));
        }
    }
    r
}

/// Properties P1-P4 of `gr` on random pairs.
pub fn gr_properties_check(ring: &Ring, samples: usize, seed: u64) -> Report {
    let mut r = Report::new("gr_properties", &ring.label(), samples as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let a = random_elem(ring, &mut rng, 8, 2, 4);
        let b = random_elem(ring, &mut rng, 8, 2, 4);
        let (ga, gb) = (gr_leading(&a).unwrap(), gr_leading(&b).unwrap());
        // P1
        let gab = gr_leading(&(&a * &b)).unwrap();
        if gab != ga.mul(&gb) {
            r.fail(format!("P1: gr({a} * {b}) = {gab}, gr*gr = {}", ga.mul(&gb)));
        }
        let sum = &a + &b;
        match ga.degree().cmp(&gb.degree()) {
            std::cmp::Ordering::Greater | std::cmp::Ordering::Less => {
                // P2
                let hi = if ga.degree() > gb.degree() { &ga } else { &gb };
                if gr_leading(&sum).ok().as_ref() != Some(hi) {
                    r.fail(format!("P2: {a} + {b}"));
                }
            }
            std::cmp::Ordering::Equal => {
                let gsum = ga.add(&gb).unwrap();
                let drops = sum.basis_degree() < Degree::Finite(ga.degree());
                // P3 and P4
                if drops != gsum.is_zero() {
                    r.fail(format!("P4: {a} + {b}"));
                }
                if !drops && gr_leading(&sum).ok().as_ref() != Some(&gsum) {
                    r.fail(format!("P3: {a} + {b}"));
                }
            }
        }
        // constructed P4 case: a and -a + lower noise
        let deg = ga.degree();
        let noisy = if deg > 0 {
            let noise = random_elem(ring, &mut rng, deg - 1, 2, 3);
            &(-&a) + &noise
        } else {
            -&a
        };
        let gn = gr_leading(&noisy).unwrap();
        let total = &a + &noisy;
        if !ga.add(&gn).map(|g| g.is_zero()).unwrap_or(false) || total.basis_degree() >= Degree::Finite(deg) {
            r.fail(format!("P4 constructed: {a} and {noisy}"));
        }
    }
    r
}

/// `gr(x)^n gr(y) = gr(s)^d` and `gr(x)^e gr(z) = gr(y)^m`.
pub fn graded_relations_check(ring: &Ring) -> Report {
    let mut r = Report::new("graded_relations", &ring.label(), 0);
    let g = |v: &str| gr_leading(&ring.gen(v).unwrap()).unwrap();
    let (gx, gs, gy) = (g("X"), g("S"), g("Y"));
    let lhs = gx.pow(ring.n()).mul(&gy);
    let rhs = gs.pow(ring.d());
    if lhs != rhs {
        r.fail(format!("gr(x)^n gr(y) = {lhs} but gr(s)^d = {rhs}"));
    }
    if let Some(m) = ring.m() {
        let lhs = gx.pow(ring.e()).mul(&g("Z"));
        let rhs = gy.pow(m);
        if lhs != rhs {
            r.fail(format!("gr(x)^e gr(z) = {lhs} but gr(y)^m = {rhs}"));
        }
    }
    r
}

/// Columns `x^a * b` for basis monomials `b` of degree at most `bound` and `a <= max_x`.
fn columns(ring: &RingPresentation, bound: u64, max_x: u32) -> Vec<(BasisKey, u64)> {
    let mut out = Vec::new();
    for (b, w) in ring.basis_monomials(bound) {
        for a in 0..=max_x {
            out.push((BasisKey { x: a, ..b }, w));
        }
    }
    out
}

/// Null space of the linear map sending column `c` to `images[c]`.
fn kernel_of(images: &[QuotElem]) -> Vec<Vec<Rational>> {
    let mut rows: BTreeMap<BasisKey, usize> = BTreeMap::new();
    for img in images {
        for k in img.terms().keys() {
            let next = rows.len();
            rows.entry(*k).or_insert(next);
        }
    }
    let mut mat = vec![vec![Rational::zero(); images.len()]; rows.len()];
    for (c, img) in images.iter().enumerate() {
        for (k, v) in img.terms() {
            mat[rows[k]][c] = v.clone();
        }
    }
    nullspace(&mat, images.len())
}

fn key_name(k: BasisKey) -> String {
    let mut parts = Vec::new();
    for (v, e) in [("x", k.x), ("s", k.s), ("y", k.y), ("z", k.z), ("t", k.t)] {
        match e {
            0 => {}
            1 => parts.push(v.to_string()),
            _ => parts.push(format!("{v}^{e}")),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// `ker D` restricted to basis degree `<= bound` (and `x`-exponent `<= max_x`)
/// must be spanned by the pure `x`-powers.
pub fn kernel_check(d: &Derivation, bound: u64, max_x: u32) -> Report {
    let ring = d.ring();
    let mut r = Report::new("kernel", &ring.label(), bound);
    let cols = columns(ring, bound, max_x);
    let images: Vec<QuotElem> = cols.iter().map(|(k, _)| d.apply(&ring.monomial(*k)).unwrap()).collect();
    let kernel = kernel_of(&images);
    let pure_x = |k: BasisKey| k.s == 0 && k.y == 0 && k.z == 0;
    let expected = cols.iter().filter(|(k, _)| pure_x(*k)).count();
    if kernel.len() != expected {
        r.fail(format!("kernel dimension {} but {} x-powers", kernel.len(), expected));
    }
    for v in &kernel {
        let support: Vec<BasisKey> = cols.iter().zip(v).filter(|(_, c)| !c.is_zero()).map(|((k, _), _)| *k).collect();
        if let Some(bad) = support.iter().find(|k| !pure_x(**k)) {
            r.fail(format!("kernel vector involves {}", key_name(*bad)));
        }
    }
    if r.pass {
        r.note(format!("kernel spanned by {} x-powers up to x^{}", expected, max_x));
    }
    r
}

/// The filtration `F_i = ker D^{i+1}` at basis level: each `F_i` must be spanned
/// by the monomials of degree `<= i`; `y` first enters at `d`, `z` at `md`, and
/// `F_1 = k[x] + k[x] s`.
pub fn al_chain_check(d: &Derivation, bound: u64, max_x: u32) -> Report {
    let ring = d.ring();
    let mut r = Report::new("al_chain", &ring.label(), bound);
    let cols = columns(ring, bound, max_x);
    // powers[c][k] = D^{k+1}(column c)
    let mut powers: Vec<Vec<QuotElem>> = Vec::new();
    for (k, _) in &cols {
        let mut seq = Vec::new();
        let mut cur = ring.monomial(*k);
        for _ in 0..=bound {
            cur = d.apply(&cur).unwrap();
            seq.push(cur.clone());
        }
        powers.push(seq);
    }
    let mut y_enters = None;
    let mut z_enters = None;
    for i in 0..=bound {
        let images: Vec<QuotElem> = powers.iter().map(|p| p[i as usize].clone()).collect();
        let kernel = kernel_of(&images);
        let expected = cols.iter().filter(|(_, w)| *w <= i).count();
        if kernel.len() != expected {
            r.fail(format!("F_{i}: dimension {} but {} monomials of degree <= {i}", kernel.len(), expected));
        }
        let mut names = std::collections::BTreeSet::new();
        for v in &kernel {
            for ((k, w), c) in cols.iter().zip(v) {
                if c.is_zero() {
                    continue;
                }
                if *w > i {
                    r.fail(format!("F_{i} contains {}", key_name(*k)));
                }
                names.insert(key_name(BasisKey { x: 0, ..*k }));
                if k.y > 0 && y_enters.is_none() {
                    y_enters = Some(i);
                }
                if k.z > 0 && z_enters.is_none() {
                    z_enters = Some(i);
                }
            }
        }
        if i == 1 {
            let want: std::collections::BTreeSet<String> = ["1", "s"].iter().map(|s| s.to_string()).collect();
            if names != want {
                r.fail(format!("F_1 basis {names:?}, expected {{1, s}}"));
            }
        }
        if i + 1 == ring.d() as u64 && names.iter().any(|n| n.contains('y') || n.contains('z')) {
            r.fail(format!("F_{i} involves more than x and s"));
        }
    }
    let dd = ring.d() as u64;
    check_entry(&mut r, "y", y_enters, dd, bound);
    if let Some(m) = ring.m() {
        check_entry(&mut r, "z", z_enters, m as u64 * dd, bound);
    }
    r
}

fn check_entry(r: &mut Report, var: &str, got: Option<u64>, want: u64, bound: u64) {
    match got {
        Some(i) if i == want => r.note(format!("{var} enters at {i}")),
        None if want > bound => r.note(format!("{var} beyond bound {bound}")),
        other => r.fail(format!("{var} enters at {other:?}, expected {want}")),
    }
}

/// All bounded checks for one ring, in a fixed order.
pub fn verify_suite(ring: &Ring, bound: u64, seed: u64) -> Result<Vec<Report>> {
    let d = Derivation::canonical(ring)?;
    let top = ring.d() as u64 * ring.m().unwrap_or(1) as u64;
    Ok(vec![
        confluence_check(ring, 500, seed),
        degree_consistency(&d, 200, 10, seed),
        gr_properties_check(ring, 100, seed),
        graded_relations_check(ring),
        hat_ideal_check(ring),
        kernel_check(&d, bound, 3),
        al_chain_check(&d, bound.max(top), 2),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VarSet;

    #[test]
    fn toy_derivation_images() {
        let r = RingPresentation::toy();
        let d = Derivation::canonical(&r).unwrap();
        assert_eq!(d.image("S").unwrap(), &r.parse_elem("X^3").unwrap());
        assert_eq!(d.image("Y").unwrap(), &r.parse_elem("2*X*S").unwrap());
        assert_eq!(d.image("Z").unwrap(), &r.parse_elem("4*Y*S - X^2").unwrap());
        assert!(d.image("X").unwrap().is_zero());
    }

    #[test]
    fn ill_defined_images_are_rejected() {
        let r = RingPresentation::toy();
        let mut imgs = Derivation::canonical(&r).unwrap().images().to_vec();
        imgs[1] = r.parse_elem("X^2").unwrap();
        assert!(matches!(Derivation::new(&r, imgs), Err(Error::IllDefinedDerivation(_))));
    }

    #[test]
    fn toy_degrees() {
        let r = RingPresentation::toy();
        let d = Derivation::canonical(&r).unwrap();
        let deg = |t: &str| d.deg(&r.parse_elem(t).unwrap(), None).unwrap();
        assert_eq!(deg("X"), Degree::Finite(0));
        assert_eq!(deg("S"), Degree::Finite(1));
        assert_eq!(deg("Y"), Degree::Finite(2));
        assert_eq!(deg("Z"), Degree::Finite(4));
        assert_eq!(deg("S*Y*Z"), Degree::Finite(7));
        assert_eq!(deg("0"), Degree::NegInf);
        assert_eq!(
            d.apply(&r.parse_elem("S^2").unwrap()).unwrap(),
            r.parse_elem("2*X^3*S").unwrap()
        );
    }

    #[test]
    fn budget_exceeded_is_reported() {
        let r = RingPresentation::toy();
        let d = Derivation::canonical(&r).unwrap();
        let z = r.gen("Z").unwrap();
        assert_eq!(d.deg(&z, Some(3)), Err(Error::BoundExceeded { bound: 3 }));
    }

    #[test]
    fn gr_examples() {
        let r = RingPresentation::toy();
        let g = gr_leading(&r.parse_elem("S + X^5").unwrap()).unwrap();
        assert_eq!((g.degree(), g.elem().clone()), (1, r.gen("S").unwrap()));
        let g = gr_leading(&r.parse_elem("Y^2").unwrap()).unwrap();
        assert_eq!((g.degree(), g.elem().clone()), (4, r.parse_elem("X*Z").unwrap()));
        assert_eq!(gr_leading(&r.zero()), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn toy_hat_tops() {
        let r = RingPresentation::toy();
        let tops = hat_ideal_tops(&r);
        assert_eq!(tops[0], parse_poly("X^2*Y - S^2", r.vars()).unwrap());
        assert_eq!(tops[1], parse_poly("Y^2 - X*Z", r.vars()).unwrap());
    }

    #[test]
    fn danielewski_derivation() {
        let xs = VarSet::new(["X", "S"]).unwrap();
        let p = parse_poly("S^4 + X^2*S^2 + 1", &xs).unwrap();
        let b = RingPresentation::from_polys(Family::Danielewski, 2, 0, &p, None).unwrap();
        let d = Derivation::canonical(&b).unwrap();
        assert_eq!(d.image("S").unwrap(), &b.parse_elem("X^2").unwrap());
        assert_eq!(d.image("Y").unwrap(), &b.parse_elem("4*S^3 + 2*X^2*S").unwrap());
        assert_eq!(d.deg(&b.gen("Y").unwrap(), None).unwrap(), Degree::Finite(4));
        assert!(al_chain_check(&d, 5, 2).pass);
        assert!(kernel_check(&d, 6, 2).pass);
    }
}
