//! The rings `R_{n,e,P,Q}` and `B_{n,P}` with canonical normal forms.
//!
//! A full-family ring is presented as
//! `k[X,S,Y,Z] / <X^n Y - P(X,S), Q(X,Y) - X^e Z - S>` and a Danielewski ring
//! as `k[X,S,Y] / <X^n Y - P(X,S)>`. Elements are reduced with the rules
//!
//! ```text
//! s^d -> x^n y - sum f_i(x) s^i        (i < d)
//! y^m -> s + x^e z - sum g_j(x) y^j    (j < m, full family only)
//! ```
//!
//! so a normal form is a combination of `x^a s^l y^j z^i` with `l < d` and
//! `j < m`. A cylinder ring adjoins a free variable `T` with no rule.
//!
//! Reduction always pops the pending monomial that is largest for the
//! measure `(l + d*j + m*d*i, l + j)`. Both rules strictly decrease it, which
//! also means like terms get merged before they are rewritten.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{parse_poly, Degree, Monomial, MultiPoly, VarSet};
use crate::rational::{format_rational, int, parse_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Danielewski,
    Full,
}

/// Exponents of a monomial `x^x s^s y^y z^z t^t` in the quotient ring.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisKey {
    pub x: u32,
    pub s: u32,
    pub y: u32,
    pub z: u32,
    pub t: u32,
}

impl BasisKey {
    pub const ONE: BasisKey = BasisKey { x: 0, s: 0, y: 0, z: 0, t: 0 };

    pub fn new(x: u32, s: u32, y: u32, z: u32) -> Self {
        BasisKey { x, s, y, z, t: 0 }
    }

    fn plus(self, o: BasisKey) -> BasisKey {
        BasisKey { x: self.x + o.x, s: self.s + o.s, y: self.y + o.y, z: self.z + o.z, t: self.t + o.t }
    }

    /// `self - o`, if every component stays non-negative.
    pub fn checked_sub(self, o: BasisKey) -> Option<BasisKey> {
        Some(BasisKey {
            x: self.x.checked_sub(o.x)?,
            s: self.s.checked_sub(o.s)?,
            y: self.y.checked_sub(o.y)?,
            z: self.z.checked_sub(o.z)?,
            t: self.t.checked_sub(o.t)?,
        })
    }
}

/// Which rule wins when a monomial is reducible by both.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    SFirst,
    YFirst,
}

/// One application of a rewriting rule to a monomial `M`:
/// `M = sum(replacement) + sign * quotient * G_rule`, where `G_0, G_1` are the
/// ring's defining generators.
#[derive(Clone, Debug)]
pub struct Rewrite {
    pub rule: usize,
    pub quotient: BasisKey,
    pub sign: i64,
    pub replacement: Vec<(BasisKey, Rational)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingPresentation {
    family: Family,
    n: u32,
    e: u32,
    p_coeffs: Vec<MultiPoly>,
    q_coeffs: Vec<MultiPoly>,
    cylinder: bool,
    vars: VarSet,
    s_rule: Vec<(BasisKey, Rational)>,
    y_rule: Vec<(BasisKey, Rational)>,
}

pub type Ring = Arc<RingPresentation>;

fn x_vars() -> VarSet {
    VarSet::new(["X"]).unwrap()
}

/// Sparse `(exponent, coeff)` view of a polynomial in `X` alone.
fn univariate_terms(p: &MultiPoly) -> Vec<(u32, Rational)> {
    p.terms().map(|(m, c)| (m.exponents()[0], c.clone())).collect()
}

impl RingPresentation {
    /// `R_{n,e,P,Q}` with `P = S^d + sum p_coeffs[i] S^i`, `Q = Y^m + sum q_coeffs[j] Y^j`.
    /// Coefficients are polynomials in `X` (over the variable set `[X]`).
    pub fn full(n: u32, e: u32, p_coeffs: Vec<MultiPoly>, q_coeffs: Vec<MultiPoly>) -> Result<Ring> {
        Self::build(Family::Full, n, e, p_coeffs, q_coeffs, false)
    }

    /// `B_{n,P}` with `P = S^d + sum p_coeffs[i] S^i`.
    pub fn danielewski(n: u32, p_coeffs: Vec<MultiPoly>) -> Result<Ring> {
        Self::build(Family::Danielewski, n, 0, p_coeffs, Vec::new(), false)
    }

    /// Builds a ring from `P(X,S)` (and `Q(X,Y)` for the full family), checking monicity.
    pub fn from_polys(family: Family, n: u32, e: u32, p: &MultiPoly, q: Option<&MultiPoly>) -> Result<Ring> {
        let p_coeffs = monic_coeffs(p, "S", "P")?;
        let q_coeffs = match (family, q) {
            (Family::Full, Some(q)) => monic_coeffs(q, "Y", "Q")?,
            (Family::Full, None) => return Err(Error::InvalidRing("full family needs Q".into())),
            (Family::Danielewski, Some(_)) => {
                return Err(Error::InvalidRing("Danielewski rings take no Q".into()))
            }
            (Family::Danielewski, None) => Vec::new(),
        };
        Self::build(family, n, e, p_coeffs, q_coeffs, false)
    }

    /// The ring of the toy example: `k[X,Y,Z]/<X^2 Y - (Y^2 - X Z)^2>`.
    pub fn toy() -> Ring {
        let xv = x_vars();
        Self::full(2, 1, vec![MultiPoly::zero(&xv); 2], vec![MultiPoly::zero(&xv); 2]).unwrap()
    }

    /// `R_{n,e} = R_{n,e,S^2+1,Y^2}`.
    pub fn r_ne(n: u32, e: u32) -> Result<Ring> {
        let xv = x_vars();
        Self::full(n, e, vec![MultiPoly::one(&xv), MultiPoly::zero(&xv)], vec![MultiPoly::zero(&xv); 2])
    }

    /// `R_{n,e,S^d+1,Y^m}`.
    pub fn simple_full(n: u32, e: u32, d: u32, m: u32) -> Result<Ring> {
        let xv = x_vars();
        let mut p = vec![MultiPoly::zero(&xv); d as usize];
        if let Some(f0) = p.first_mut() {
            *f0 = MultiPoly::one(&xv);
        }
        Self::full(n, e, p, vec![MultiPoly::zero(&xv); m as usize])
    }

    fn build(
        family: Family,
        n: u32,
        e: u32,
        p_coeffs: Vec<MultiPoly>,
        q_coeffs: Vec<MultiPoly>,
        cylinder: bool,
    ) -> Result<Ring> {
        let xv = x_vars();
        if n < 1 {
            return Err(Error::InvalidRing("n must be at least 1".into()));
        }
        if p_coeffs.len() < 2 {
            return Err(Error::InvalidRing(format!("d = {} but d >= 2 is required", p_coeffs.len())));
        }
        for c in p_coeffs.iter().chain(&q_coeffs) {
            if c.vars() != &xv {
                return Err(Error::InvalidRing(format!("coefficient `{c}` is not a polynomial in X")));
            }
        }
        match family {
            Family::Full => {
                if (n, e) == (1, 0) {
                    return Err(Error::InvalidRing("(n,e) = (1,0) is excluded".into()));
                }
                if q_coeffs.len() < 2 {
                    return Err(Error::InvalidRing(format!("m = {} but m >= 2 is required", q_coeffs.len())));
                }
            }
            Family::Danielewski => {
                if e != 0 {
                    return Err(Error::InvalidRing("Danielewski rings have e = 0".into()));
                }
                if !q_coeffs.is_empty() {
                    return Err(Error::InvalidRing("Danielewski rings take no Q".into()));
                }
            }
        }
        let mut names = match family {
            Family::Full => vec!["X", "S", "Y", "Z"],
            Family::Danielewski => vec!["X", "S", "Y"],
        };
        if cylinder {
            names.push("T");
        }
        let vars = VarSet::new(names)?;

        let mut s_rule = vec![(BasisKey { x: n, y: 1, ..BasisKey::ONE }, Rational::one())];
        for (i, f) in p_coeffs.iter().enumerate() {
            for (a, c) in univariate_terms(f) {
                s_rule.push((BasisKey { x: a, s: i as u32, ..BasisKey::ONE }, -c));
            }
        }
        let mut y_rule = Vec::new();
        if family == Family::Full {
            y_rule.push((BasisKey { s: 1, ..BasisKey::ONE }, Rational::one()));
            y_rule.push((BasisKey { x: e, z: 1, ..BasisKey::ONE }, Rational::one()));
            for (j, g) in q_coeffs.iter().enumerate() {
                for (a, c) in univariate_terms(g) {
                    y_rule.push((BasisKey { x: a, y: j as u32, ..BasisKey::ONE }, -c));
                }
            }
        }
        Ok(Arc::new(RingPresentation { family, n, e, p_coeffs, q_coeffs, cylinder, vars, s_rule, y_rule }))
    }

    /// The same ring with a free variable `T` adjoined.
    pub fn with_cylinder(&self) -> Ring {
        Self::build(self.family, self.n, self.e, self.p_coeffs.clone(), self.q_coeffs.clone(), true)
            .expect("already validated")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn e(&self) -> u32 {
        self.e
    }

    pub fn d(&self) -> u32 {
        self.p_coeffs.len() as u32
    }

    /// `None` for Danielewski rings.
    pub fn m(&self) -> Option<u32> {
        match self.family {
            Family::Full => Some(self.q_coeffs.len() as u32),
            Family::Danielewski => None,
        }
    }

    pub fn is_cylinder(&self) -> bool {
        self.cylinder
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn p_coeffs(&self) -> &[MultiPoly] {
        &self.p_coeffs
    }

    pub fn q_coeffs(&self) -> &[MultiPoly] {
        &self.q_coeffs
    }

    /// `(n, e, d, m)`; `m` is 0 for Danielewski rings.
    pub fn fingerprint(&self) -> (u32, u32, u32, u32) {
        (self.n, self.e, self.d(), self.m().unwrap_or(0))
    }

    fn var(&self, name: &str) -> MultiPoly {
        MultiPoly::var(&self.vars, name).expect("ring variable")
    }

    /// `P(X,S)` over the ring's variables.
    pub fn p_poly(&self) -> MultiPoly {
        let s = self.var("S");
        let mut out = s.pow(self.d());
        for (i, f) in self.p_coeffs.iter().enumerate() {
            out = out + f.embed(&self.vars).unwrap() * s.pow(i as u32);
        }
        out
    }

    /// `Q(X,Y)` over the ring's variables (full family only).
    pub fn q_poly(&self) -> Option<MultiPoly> {
        let m = self.m()?;
        let y = self.var("Y");
        let mut out = y.pow(m);
        for (j, g) in self.q_coeffs.iter().enumerate() {
            out = out + g.embed(&self.vars).unwrap() * y.pow(j as u32);
        }
        Some(out)
    }

    /// The generators of the defining ideal in the `S`-presentation:
    /// `[X^n Y - P(X,S), Q(X,Y) - X^e Z - S]` (only the first for Danielewski).
    pub fn generators(&self) -> Vec<MultiPoly> {
        let x = self.var("X");
        let mut out = vec![x.pow(self.n) * self.var("Y") - self.p_poly()];
        if let Some(q) = self.q_poly() {
            out.push(q - x.pow(self.e) * self.var("Z") - self.var("S"));
        }
        out
    }

    /// The single defining polynomial over `k[X,Y,Z]`: `X^n Y - P(X, Q(X,Y) - X^e Z)`.
    /// For Danielewski rings this is `X^n Y - P(X,S)` over `k[X,S,Y]`.
    pub fn defining_polynomial(&self) -> MultiPoly {
        match self.family {
            Family::Danielewski => {
                let v = VarSet::new(["X", "S", "Y"]).unwrap();
                self.generators()[0].embed(&v).unwrap()
            }
            Family::Full => {
                let v = VarSet::new(["X", "Y", "Z"]).unwrap();
                let x = MultiPoly::var(&v, "X").unwrap();
                let y = MultiPoly::var(&v, "Y").unwrap();
                let z = MultiPoly::var(&v, "Z").unwrap();
                let q = self.q_poly().unwrap().embed(&self.vars).unwrap();
                let mut images = BTreeMap::new();
                images.insert("X".to_string(), x.clone());
                images.insert("Y".to_string(), y.clone());
                let s_img = q.substitute(&images).unwrap() - x.pow(self.e) * z;
                images.insert("S".to_string(), s_img);
                x.pow(self.n) * y - self.p_poly().substitute(&images).unwrap()
            }
        }
    }

    /// Human-readable label such as `R(n=2,e=1,P=S^2 + 1,Q=Y^2)`.
    pub fn label(&self) -> String {
        let xs = VarSet::new(["X", "S", "Y"]).unwrap();
        let p = self.p_poly().restrict(&xs);
        let base = match self.family {
            Family::Full => {
                let q = self.q_poly().unwrap().restrict(&xs);
                format!("R(n={},e={},P={},Q={})", self.n, self.e, p, q)
            }
            Family::Danielewski => format!("B(n={},P={})", self.n, p),
        };
        if self.cylinder {
            format!("{base}[T]")
        } else {
            base
        }
    }

    fn check_ring(&self, other: &RingPresentation) -> Result<()> {
        if std::ptr::eq(self, other) || self == other {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    // ----- keys, degrees, basis -----

    fn key_from_exps(&self, exps: &[u32]) -> BasisKey {
        match self.family {
            Family::Full => BasisKey {
                x: exps[0],
                s: exps[1],
                y: exps[2],
                z: exps[3],
                t: if self.cylinder { exps[4] } else { 0 },
            },
            Family::Danielewski => BasisKey {
                x: exps[0],
                s: exps[1],
                y: exps[2],
                z: 0,
                t: if self.cylinder { exps[3] } else { 0 },
            },
        }
    }

    pub(crate) fn exps_from_key(&self, k: BasisKey) -> Vec<u32> {
        let mut v = vec![k.x, k.s, k.y];
        if self.family == Family::Full {
            v.push(k.z);
        }
        if self.cylinder {
            v.push(k.t);
        }
        v
    }

    /// Filtration weight `l + d*j + m*d*i` of `x^a s^l y^j z^i`, without
    /// checking the normal-form constraints.
    pub fn weight(&self, k: BasisKey) -> u64 {
        let d = self.d() as u64;
        let md = self.m().unwrap_or(0) as u64 * d;
        k.s as u64 + d * k.y as u64 + md * k.z as u64
    }

    /// The termination measure of the rewriting system.
    pub fn reduction_measure(&self, k: BasisKey) -> (u64, u32) {
        (self.weight(k), k.s + k.y)
    }

    /// `l + d*j + m*d*i` for a normal-form monomial; `x` and `t` contribute 0.
    pub fn monomial_degree(&self, k: BasisKey) -> Result<u64> {
        if !self.is_normal(k) {
            return Err(Error::BasisConstraint(format!(
                "x^{} s^{} y^{} z^{} with d = {}, m = {:?}",
                k.x,
                k.s,
                k.y,
                k.z,
                self.d(),
                self.m()
            )));
        }
        if k.t > 0 && !self.cylinder {
            return Err(Error::BasisConstraint("t exponent in a non-cylinder ring".into()));
        }
        Ok(self.weight(k))
    }

    pub fn is_normal(&self, k: BasisKey) -> bool {
        match self.family {
            Family::Full => k.s < self.d() && k.y < self.m().unwrap(),
            Family::Danielewski => k.s < self.d() && k.z == 0,
        }
    }

    /// Normal-form monomials `s^l y^j z^i` with degree at most `bound`,
    /// sorted by degree. Each generates a free `k[x]`-module summand.
    pub fn basis_monomials(&self, bound: u64) -> Vec<(BasisKey, u64)> {
        let d = self.d();
        let mut out = Vec::new();
        let max_y = match self.m() {
            Some(m) => m - 1,
            None => (bound / d as u64) as u32,
        };
        let max_z = match self.m() {
            Some(m) => (bound / (m as u64 * d as u64)) as u32,
            None => 0,
        };
        for z in 0..=max_z {
            for y in 0..=max_y {
                for s in 0..d {
                    let k = BasisKey { s, y, z, ..BasisKey::ONE };
                    let w = self.weight(k);
                    if w <= bound {
                        out.push((k, w));
                    }
                }
            }
        }
        out.sort_by_key(|&(k, w)| (w, k));
        out
    }

    // ----- rewriting -----

    /// One rewriting step at the monomial `k`, or `None` if `k` is normal.
    pub fn rewrite_once(&self, k: BasisKey, strategy: Strategy) -> Option<Rewrite> {
        let d = self.d();
        let s_ok = k.s >= d;
        let y_ok = self.family == Family::Full && k.y >= self.m().unwrap();
        let use_s = match strategy {
            Strategy::SFirst => s_ok,
            Strategy::YFirst => s_ok && !y_ok,
        };
        if use_s {
            let quotient = BasisKey { s: k.s - d, ..k };
            let replacement = self.s_rule.iter().map(|(dk, c)| (quotient.plus(*dk), c.clone())).collect();
            return Some(Rewrite { rule: 0, quotient, sign: -1, replacement });
        }
        if y_ok {
            let quotient = BasisKey { y: k.y - self.m().unwrap(), ..k };
            let replacement = self.y_rule.iter().map(|(dk, c)| (quotient.plus(*dk), c.clone())).collect();
            return Some(Rewrite { rule: 1, quotient, sign: 1, replacement });
        }
        None
    }

    fn reduce<I>(
        &self,
        input: I,
        strategy: Strategy,
        mut cofactors: Option<&mut Vec<BTreeMap<BasisKey, Rational>>>,
    ) -> BTreeMap<BasisKey, Rational>
    where
        I: IntoIterator<Item = (BasisKey, Rational)>,
    {
        type Pending = BTreeMap<((u64, u32), BasisKey), Rational>;
        fn push(p: &mut Pending, key: ((u64, u32), BasisKey), c: Rational) {
            if c.is_zero() {
                return;
            }
            let slot = p.entry(key).or_insert_with(Rational::zero);
            *slot += c;
            if slot.is_zero() {
                p.remove(&key);
            }
        }
        let mut pending: Pending = BTreeMap::new();
        let mut out: BTreeMap<BasisKey, Rational> = BTreeMap::new();
        for (k, c) in input {
            push(&mut pending, (self.reduction_measure(k), k), c);
        }
        while let Some(((measure, k), c)) = pending.pop_last() {
            match self.rewrite_once(k, strategy) {
                None => {
                    let slot = out.entry(k).or_insert_with(Rational::zero);
                    *slot += &c;
                    if slot.is_zero() {
                        out.remove(&k);
                    }
                }
                Some(rw) => {
                    if let Some(cof) = cofactors.as_deref_mut() {
                        let slot = cof[rw.rule].entry(rw.quotient).or_insert_with(Rational::zero);
                        *slot += &c * int(rw.sign);
                    }
                    for (nk, nc) in rw.replacement {
                        let nm = self.reduction_measure(nk);
                        debug_assert!(nm < measure, "rewriting must decrease the measure");
                        push(&mut pending, (nm, nk), nc * &c);
                    }
                }
            }
        }
        out
    }

    fn poly_keys(&self, p: &MultiPoly) -> Result<Vec<(BasisKey, Rational)>> {
        if p.vars() != &self.vars {
            return Err(Error::VarSetMismatch {
                left: self.vars.names().join(","),
                right: p.vars().names().join(","),
            });
        }
        Ok(p.terms().map(|(m, c)| (self.key_from_exps(m.exponents()), c.clone())).collect())
    }

    pub(crate) fn key_poly(&self, terms: &BTreeMap<BasisKey, Rational>) -> MultiPoly {
        MultiPoly::from_terms(
            &self.vars,
            terms.iter().map(|(k, c)| (Monomial(self.exps_from_key(*k)), c.clone())),
        )
    }

    fn elem(self: &Arc<Self>, terms: BTreeMap<BasisKey, Rational>) -> QuotElem {
        QuotElem { ring: Arc::clone(self), terms }
    }

    /// Normal form of a polynomial over the ring's variables.
    pub fn normal_form(self: &Arc<Self>, p: &MultiPoly) -> Result<QuotElem> {
        self.normal_form_with(p, Strategy::SFirst)
    }

    pub fn normal_form_with(self: &Arc<Self>, p: &MultiPoly, strategy: Strategy) -> Result<QuotElem> {
        let keys = self.poly_keys(p)?;
        Ok(self.elem(self.reduce(keys, strategy, None)))
    }

    /// Normal form together with cofactors `q` such that
    /// `p = nf + sum q[k] * generators()[k]` holds as a polynomial identity.
    pub fn normal_form_with_cofactors(self: &Arc<Self>, p: &MultiPoly) -> Result<(QuotElem, Vec<MultiPoly>)> {
        let keys = self.poly_keys(p)?;
        let mut cof = vec![BTreeMap::new(); self.generators().len()];
        let nf = self.reduce(keys, Strategy::SFirst, Some(&mut cof));
        let cof = cof.iter().map(|c| self.key_poly(c)).collect();
        Ok((self.elem(nf), cof))
    }

    /// Normal form of an arbitrary combination of (possibly reducible) monomials.
    pub fn reduce_terms<I>(self: &Arc<Self>, terms: I) -> QuotElem
    where
        I: IntoIterator<Item = (BasisKey, Rational)>,
    {
        self.elem(self.reduce(terms, Strategy::SFirst, None))
    }

    pub fn zero(self: &Arc<Self>) -> QuotElem {
        self.elem(BTreeMap::new())
    }

    pub fn constant(self: &Arc<Self>, c: Rational) -> QuotElem {
        self.reduce_terms([(BasisKey::ONE, c)])
    }

    pub fn one(self: &Arc<Self>) -> QuotElem {
        self.constant(Rational::one())
    }

    pub fn monomial(self: &Arc<Self>, k: BasisKey) -> QuotElem {
        self.reduce_terms([(k, Rational::one())])
    }

    /// The class of a variable (`"X"`, `"S"`, `"Y"`, `"Z"` or `"T"`).
    pub fn gen(self: &Arc<Self>, name: &str) -> Result<QuotElem> {
        let p = MultiPoly::var(&self.vars, name)?;
        self.normal_form(&p)
    }

    pub fn parse_elem(self: &Arc<Self>, text: &str) -> Result<QuotElem> {
        self.normal_form(&parse_poly(text, &self.vars)?)
    }

    /// Evaluates `p` at `images[i]` for its `i`-th variable, in this ring.
    pub fn eval_poly(self: &Arc<Self>, p: &MultiPoly, images: &[QuotElem]) -> Result<QuotElem> {
        if images.len() != p.vars().len() {
            return Err(Error::Malformed(format!(
                "{} images for {} variables",
                images.len(),
                p.vars().len()
            )));
        }
        for img in images {
            self.check_ring(&img.ring)?;
        }
        let mut powers: BTreeMap<(usize, u32), QuotElem> = BTreeMap::new();
        let mut acc: BTreeMap<BasisKey, Rational> = BTreeMap::new();
        for (m, c) in p.terms() {
            let mut term = self.constant(c.clone());
            for (i, &e) in m.exponents().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = powers.entry((i, e)).or_insert_with(|| images[i].pow(e));
                term = &term * &*pw;
            }
            for (k, c) in term.terms {
                let slot = acc.entry(k).or_insert_with(Rational::zero);
                *slot += c;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Ok(self.elem(acc))
    }
}

/// Coefficients `c_0..c_{deg-1}` of a polynomial monic in `var`, as polynomials in `X`.
fn monic_coeffs(p: &MultiPoly, var: &str, what: &str) -> Result<Vec<MultiPoly>> {
    let xv = x_vars();
    let idx = p
        .vars()
        .index_of(var)
        .ok_or_else(|| Error::InvalidRing(format!("{what} must be a polynomial in X and {var}")))?;
    for (i, name) in p.vars().names().iter().enumerate() {
        if i != idx && name != "X" && p.involves(i) {
            return Err(Error::InvalidRing(format!("{what} may only involve X and {var}")));
        }
    }
    let xi = p.vars().index_of("X");
    let deg = p.degree_in(idx).unwrap_or(0);
    let mut coeffs = vec![MultiPoly::zero(&xv); deg as usize + 1];
    for (m, c) in p.terms() {
        let a = xi.map_or(0, |xi| m.exponents()[xi]);
        coeffs[m.exponents()[idx] as usize] = &coeffs[m.exponents()[idx] as usize]
            + &MultiPoly::monomial(&xv, vec![a], c.clone());
    }
    let lead = coeffs.pop().unwrap();
    if lead != MultiPoly::one(&xv) {
        return Err(Error::InvalidRing(format!("{what} is not monic in {var} (leading coefficient {lead})")));
    }
    Ok(coeffs)
}

impl MultiPoly {
    /// Like [`MultiPoly::embed`] but for polynomials known to live in the target.
    pub(crate) fn restrict(&self, target: &VarSet) -> MultiPoly {
        self.embed(target).expect("restriction drops a variable that occurs")
    }
}

/// An element of a quotient ring in normal form.
#[derive(Clone)]
pub struct QuotElem {
    ring: Ring,
    terms: BTreeMap<BasisKey, Rational>,
}

impl PartialEq for QuotElem {
    fn eq(&self, other: &Self) -> bool {
        self.ring.check_ring(&other.ring).is_ok() && self.terms == other.terms
    }
}

impl Eq for QuotElem {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotOp {
    Add,
    Sub,
    Mul,
}

impl QuotElem {
    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn terms(&self) -> &BTreeMap<BasisKey, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, k: BasisKey) -> Rational {
        self.terms.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    /// As a polynomial over the ring's variables.
    pub fn to_poly(&self) -> MultiPoly {
        self.ring.key_poly(&self.terms)
    }

    /// Largest monomial degree among the stored terms (`-inf` for zero).
    pub fn basis_degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|&k| Degree::Finite(self.ring.weight(k)))
            .max()
            .unwrap_or(Degree::NegInf)
    }

    /// Terms of the given monomial degree.
    pub fn homogeneous_part(&self, degree: u64) -> QuotElem {
        QuotElem {
            ring: Arc::clone(&self.ring),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| self.ring.weight(**k) == degree)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    pub fn arith(&self, other: &QuotElem, op: QuotOp) -> Result<QuotElem> {
        self.ring.check_ring(&other.ring)?;
        Ok(match op {
            QuotOp::Add => self.add_unchecked(other, Rational::one()),
            QuotOp::Sub => self.add_unchecked(other, -Rational::one()),
            QuotOp::Mul => self.mul_unchecked(other),
        })
    }

    fn add_unchecked(&self, other: &QuotElem, sign: Rational) -> QuotElem {
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            let slot = terms.entry(*k).or_insert_with(Rational::zero);
            *slot += c * &sign;
            if slot.is_zero() {
                terms.remove(k);
            }
        }
        QuotElem { ring: Arc::clone(&self.ring), terms }
    }

    fn mul_unchecked(&self, other: &QuotElem) -> QuotElem {
        let mut raw: BTreeMap<BasisKey, Rational> = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                *raw.entry(ka.plus(*kb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        self.ring.reduce_terms(raw)
    }

    /// `c * k * self` for a monomial `k`.
    pub fn mul_monomial(&self, k: BasisKey, c: &Rational) -> QuotElem {
        self.ring.reduce_terms(self.terms.iter().map(|(kk, cc)| (kk.plus(k), cc * c)))
    }

    pub fn scale(&self, c: &Rational) -> QuotElem {
        if c.is_zero() {
            return self.ring.zero();
        }
        QuotElem {
            ring: Arc::clone(&self.ring),
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> QuotElem {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn to_json(&self) -> Vec<TermJson> {
        self.terms
            .iter()
            .map(|(k, c)| TermJson { x: k.x, s: k.s, y: k.y, z: k.z, t: k.t, c: format_rational(c) })
            .collect()
    }

    pub fn from_json(ring: &Ring, terms: &[TermJson]) -> Result<QuotElem> {
        let mut raw = Vec::new();
        for t in terms {
            raw.push((BasisKey { x: t.x, s: t.s, y: t.y, z: t.z, t: t.t }, parse_rational(&t.c)?));
        }
        Ok(ring.reduce_terms(raw))
    }
}

impl fmt::Display for QuotElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Lower-case names: these are classes in the quotient.
        let lower: Vec<String> = self.ring.vars.names().iter().map(|n| n.to_lowercase()).collect();
        let vars = VarSet::new(lower).unwrap();
        let p = self.to_poly();
        let p = MultiPoly::from_terms(&vars, p.terms().map(|(m, c)| (m.clone(), c.clone())));
        write!(f, "{p}")
    }
}

impl fmt::Debug for QuotElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuotElem({self})")
    }
}

impl Neg for &QuotElem {
    type Output = QuotElem;
    fn neg(self) -> QuotElem {
        self.scale(&-Rational::one())
    }
}

macro_rules! qbinop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl $tr<&QuotElem> for &QuotElem {
            type Output = QuotElem;
            fn $method(self, rhs: &QuotElem) -> QuotElem {
                self.arith(rhs, $op).expect("quotient arithmetic across rings")
            }
        }
        impl $tr<QuotElem> for QuotElem {
            type Output = QuotElem;
            fn $method(self, rhs: QuotElem) -> QuotElem {
                (&self).$method(&rhs)
            }
        }
    };
}

qbinop!(Add, add, QuotOp::Add);
qbinop!(Sub, sub, QuotOp::Sub);
qbinop!(Mul, mul, QuotOp::Mul);

/// One term of a serialized [`QuotElem`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub x: u32,
    pub s: u32,
    pub y: u32,
    pub z: u32,
    #[serde(default, skip_serializing_if = "is_zero_u32")]
    pub t: u32,
    pub c: String,
}

fn is_zero_u32(v: &u32) -> bool {
    *v == 0
}

/// Serialized ring presentation. `P` and `Q` list the non-leading
/// coefficients `f_0..f_{d-1}` / `g_0..g_{m-1}` as polynomials in `X`; the list
/// length fixes `d` (resp. `m`) unless `d`/`m` is given explicitly, in which
/// case shorter lists are padded with zeros.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RingSpec {
    pub family: Family,
    pub n: u32,
    #[serde(default)]
    pub e: u32,
    #[serde(rename = "P")]
    pub p: Vec<String>,
    #[serde(rename = "Q", default)]
    pub q: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
}

impl RingSpec {
    pub fn build(&self) -> Result<Ring> {
        let xv = x_vars();
        let coeffs = |list: &[String], len: Option<u32>, what: &str| -> Result<Vec<MultiPoly>> {
            let mut out: Vec<MultiPoly> = list.iter().map(|s| parse_poly(s, &xv)).collect::<Result<_>>()?;
            if let Some(len) = len {
                if out.len() > len as usize {
                    return Err(Error::InvalidRing(format!("{what} lists {} coefficients but has degree {len}", out.len())));
                }
                out.resize(len as usize, MultiPoly::zero(&xv));
            }
            Ok(out)
        };
        let p = coeffs(&self.p, self.d, "P")?;
        match self.family {
            Family::Full => {
                let q = coeffs(&self.q, self.m, "Q")?;
                RingPresentation::full(self.n, self.e, p, q)
            }
            Family::Danielewski => {
                if !self.q.is_empty() || self.m.is_some() {
                    return Err(Error::InvalidRing("Danielewski rings take no Q".into()));
                }
                if self.e != 0 {
                    return Err(Error::InvalidRing("Danielewski rings have e = 0".into()));
                }
                RingPresentation::danielewski(self.n, p)
            }
        }
    }

    pub fn of(ring: &RingPresentation) -> RingSpec {
        RingSpec {
            family: ring.family,
            n: ring.n,
            e: ring.e,
            p: ring.p_coeffs.iter().map(|c| c.to_string()).collect(),
            q: ring.q_coeffs.iter().map(|c| c.to_string()).collect(),
            d: None,
            m: None,
        }
    }

    pub fn parse_json(text: &str) -> Result<Ring> {
        let spec: RingSpec = serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))?;
        spec.build()
    }
}
