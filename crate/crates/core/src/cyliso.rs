//! Explicit isomorphisms `R_{n,e}[T] -> R_{n,e+1}[T]` and `B_{n,P}[T] -> B_{n+1,P}[T]`.
//!
//! A step is an endomorphism `Phi` of the polynomial ring in `X,S,Y,Z,T`
//! (or `X,S,Y,T`) that carries the source relations exactly onto the target
//! relations and whose composite with the quotient map is surjective. The
//! surjectivity proof is a [`RecoveryChain`]: an ordered list of target
//! elements, each written as a polynomial in the images `Phi(V)` and in the
//! elements recovered before it.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{parse_poly, Monomial, MultiPoly, VarSet};
use crate::quotient::{Family, QuotElem, Ring, RingPresentation};
use crate::rational::{int, Rational};

/// A polynomial endomorphism, given by the image of each variable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "EndoJson", try_from = "EndoJson")]
pub struct PolyEndo {
    vars: VarSet,
    images: Vec<MultiPoly>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EndoJson {
    pub vars: Vec<String>,
    pub images: BTreeMap<String, String>,
}

impl From<PolyEndo> for EndoJson {
    fn from(e: PolyEndo) -> Self {
        EndoJson {
            vars: e.vars.names().to_vec(),
            images: e.vars.names().iter().cloned().zip(e.images.iter().map(|p| p.to_string())).collect(),
        }
    }
}

impl TryFrom<EndoJson> for PolyEndo {
    type Error = Error;
    fn try_from(j: EndoJson) -> Result<Self> {
        let vars = VarSet::new(j.vars.iter().map(|s| s.as_str()))?;
        let mut images = Vec::new();
        for v in vars.names() {
            let text = j.images.get(v).ok_or_else(|| Error::MissingImage(v.clone()))?;
            images.push(parse_poly(text, &vars)?);
        }
        if j.images.len() != vars.len() {
            return Err(Error::Malformed("images for variables outside the variable list".into()));
        }
        PolyEndo::new(&vars, images)
    }
}

impl PolyEndo {
    pub fn new(vars: &VarSet, images: Vec<MultiPoly>) -> Result<Self> {
        if images.len() != vars.len() {
            return Err(Error::Malformed(format!("{} images for {} variables", images.len(), vars.len())));
        }
        for img in &images {
            if img.vars() != vars {
                return Err(Error::VarSetMismatch { left: vars.names().join(","), right: img.vars().names().join(",") });
            }
        }
        Ok(PolyEndo { vars: vars.clone(), images })
    }

    pub fn identity(vars: &VarSet) -> Self {
        PolyEndo { vars: vars.clone(), images: (0..vars.len()).map(|i| MultiPoly::var_at(vars, i)).collect() }
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn images(&self) -> &[MultiPoly] {
        &self.images
    }

    pub fn image(&self, var: &str) -> Option<&MultiPoly> {
        self.vars.index_of(var).map(|i| &self.images[i])
    }

    pub fn set_image(&mut self, var: &str, p: MultiPoly) -> Result<()> {
        let i = self.vars.index_of(var).ok_or_else(|| Error::UnknownVariable(var.to_string()))?;
        if p.vars() != &self.vars {
            return Err(Error::VarSetMismatch { left: self.vars.names().join(","), right: p.vars().names().join(",") });
        }
        self.images[i] = p;
        Ok(())
    }

    pub fn apply(&self, p: &MultiPoly) -> Result<MultiPoly> {
        let imgs: Vec<Option<MultiPoly>> = self.images.iter().cloned().map(Some).collect();
        p.substitute_indexed(&imgs)
    }

    /// `after o self`: first `self`, then `after`.
    pub fn then(&self, after: &PolyEndo) -> Result<PolyEndo> {
        let images = self.images.iter().map(|img| after.apply(img)).collect::<Result<Vec<_>>>()?;
        PolyEndo::new(&self.vars, images)
    }
}

/// One cylinder step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CylinderStepSpec {
    /// `R_{n,e}[T] -> R_{n,e+1}[T]` with `P = S^2 + 1`, `Q = Y^2`.
    Full { n: u32, e: u32 },
    /// `B_{n,P}[T] -> B_{n+1,P}[T]`; `p` is `P(X,S)` over `[X, S]`.
    Danielewski { n: u32, p: MultiPoly },
}

fn xs_vars() -> VarSet {
    VarSet::new(["X", "S"]).unwrap()
}

impl CylinderStepSpec {
    pub fn danielewski(n: u32, p: MultiPoly) -> Self {
        CylinderStepSpec::Danielewski { n, p }
    }

    pub fn source(&self) -> Result<Ring> {
        self.ring_at(0)
    }

    pub fn target(&self) -> Result<Ring> {
        self.ring_at(1)
    }

    fn ring_at(&self, shift: u32) -> Result<Ring> {
        let base = match self {
            CylinderStepSpec::Full { n, e } => {
                if *e < 1 {
                    return Err(Error::InvalidStep("full steps need e >= 1".into()));
                }
                RingPresentation::r_ne(*n, e + shift)?
            }
            CylinderStepSpec::Danielewski { n, p } => {
                RingPresentation::from_polys(Family::Danielewski, n + shift, 0, p, None)?
            }
        };
        Ok(base.with_cylinder())
    }

    /// `c = P(0,0)`, after checking `P = S^d + X*Q(X,S) + c` with `c != 0`.
    fn danielewski_constant(&self) -> Result<Rational> {
        let CylinderStepSpec::Danielewski { p, .. } = self else {
            return Err(Error::InvalidStep("not a Danielewski step".into()));
        };
        let ring = self.source()?;
        let d = ring.d();
        let mut c = Rational::zero();
        for (m, v) in p.terms() {
            let (a, b) = (m.exponents()[0], m.exponents()[1]);
            match (a, b) {
                (0, 0) => c = v.clone(),
                (0, b) if b == d => {}
                (0, _) => {
                    return Err(Error::InvalidStep(format!("P has the term {} not divisible by X", MultiPoly::from_terms(p.vars(), [(m.clone(), v.clone())]))))
                }
                _ => {}
            }
        }
        if c.is_zero() {
            return Err(Error::InvalidStep("P(0,0) must be nonzero".into()));
        }
        Ok(c)
    }

    pub fn label(&self) -> String {
        match self {
            CylinderStepSpec::Full { n, e } => format!("R({n},{e}) -> R({n},{})", e + 1),
            CylinderStepSpec::Danielewski { n, p } => format!("B({n},{p}) -> B({},{p})", n + 1),
        }
    }
}

fn div_x(p: &MultiPoly, k: u32, what: &str) -> Result<MultiPoly> {
    p.div_var_power(0, k).ok_or_else(|| Error::InexactDivision { divisor: format!("X^{k}"), context: format!("{what}: {p}") })
}

/// Largest `H`-valuation tried before giving up.
const MAX_VALUATION: u32 = 16;

/// Builds the step endomorphism: `H = X^k T` with the least `k` for which the
/// relation-transport divisions are exact, then `Phi(T)` from the congruence
/// `Phi(Y Z - X T) = kappa T + (multiple of the target relations)`.
pub fn solve_step(spec: &CylinderStepSpec) -> Result<PolyEndo> {
    let tgt = spec.target()?;
    let v = tgt.vars().clone();
    let var = |name: &str| MultiPoly::var(&v, name).unwrap();
    let (x, s, y, t) = (var("X"), var("S"), var("Y"), var("T"));
    match spec {
        CylinderStepSpec::Full { n, e } => {
            let (n, e) = (*n, *e);
            let z = var("Z");
            let mut found = None;
            for k in 0..=MAX_VALUATION {
                let h = x.pow(k) * &t;
                let Some(l) = (h.scale(&int(2)) * &s + h.pow(2)).div_var_power(0, n) else { continue };
                let Some(f) = (l.scale(&int(2)) * &y + l.pow(2) - &h).div_var_power(0, e) else { continue };
                found = Some((h, l, f));
                break;
            }
            let (h, l, f) = found.ok_or_else(|| Error::InvalidStep("no admissible H".into()))?;
            let phi_y = &y + &l;
            let phi_z = &x * &z + f;
            let rhs = full_congruence_rhs(&tgt);
            let phi_t = div_x(&(&phi_y * &phi_z - rhs), 1, "Phi(T)")?;
            PolyEndo::new(&v, vec![x.clone(), &s + &h, phi_y, phi_z, phi_t])
        }
        CylinderStepSpec::Danielewski { n, .. } => {
            let n = *n;
            let c = spec.danielewski_constant()?;
            let pp = tgt.p_poly();
            let mut found = None;
            for k in 0..=MAX_VALUATION {
                let h = x.pow(k) * &t;
                let shifted = shift_s(&pp, &(&s + &h))?;
                if let Some(l) = (shifted - &pp).div_var_power(0, n) {
                    found = Some((h, l));
                    break;
                }
            }
            let (h, l) = found.ok_or_else(|| Error::InvalidStep("no admissible H".into()))?;
            let phi_s = &s + &h;
            let phi_y = &x * &y + l;
            let rhs = danielewski_congruence_rhs(&tgt, &c);
            let phi_t = div_x(&(&phi_y * &phi_s - rhs), 1, "Phi(T)")?;
            PolyEndo::new(&v, vec![x.clone(), phi_s, phi_y, phi_t])
        }
    }
}

/// `P(X, s_image)` for `P` over the ring's variables.
fn shift_s(p: &MultiPoly, s_image: &MultiPoly) -> Result<MultiPoly> {
    let mut sub = BTreeMap::new();
    sub.insert("S".to_string(), s_image.clone());
    for name in p.vars().names() {
        if name != "S" {
            sub.insert(name.clone(), MultiPoly::var(p.vars(), name)?);
        }
    }
    p.substitute(&sub)
}

/// `4T(-X^n Y) + 4TS(Y^2 - X^{e'} Z)` over the target variables; congruent to `-4T`.
fn full_congruence_rhs(tgt: &RingPresentation) -> MultiPoly {
    let v = tgt.vars();
    parse_poly(&format!("4*T*(-X^{n}*Y) + 4*T*S*(Y^2 - X^{e}*Z)", n = tgt.n(), e = tgt.e()), v).unwrap()
}

/// `dT(P - c - X^{n'} Y)` over the target variables; congruent to `-c d T`.
fn danielewski_congruence_rhs(tgt: &RingPresentation, c: &Rational) -> MultiPoly {
    let v = tgt.vars();
    let x = MultiPoly::var(v, "X").unwrap();
    let y = MultiPoly::var(v, "Y").unwrap();
    let t = MultiPoly::var(v, "T").unwrap();
    let inner = tgt.p_poly() - MultiPoly::constant(v, c.clone()) - x.pow(tgt.n()) * y;
    t.scale(&int(tgt.d() as i64)) * inner
}

/// One element of a recovery chain: `claim` (over the target variables)
/// equals `expr` evaluated at the chain variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryStep {
    pub name: String,
    pub claim: MultiPoly,
    pub expr: MultiPoly,
}

/// Chain variables are `PhiX, PhiS, ...` followed by the step names in order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveryChain {
    vars: VarSet,
    steps: Vec<RecoveryStep>,
}

impl RecoveryChain {
    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn steps(&self) -> &[RecoveryStep] {
        &self.steps
    }

    fn phi_names(target_vars: &VarSet) -> Vec<String> {
        target_vars.names().iter().map(|v| format!("Phi{v}")).collect()
    }

    fn build_vars(target_vars: &VarSet, step_names: &[String]) -> Result<VarSet> {
        let mut names = Self::phi_names(target_vars);
        names.extend(step_names.iter().cloned());
        VarSet::new(names)
    }

    /// Step whose claim is exactly the variable `v`.
    fn step_for_var(&self, v: &str) -> Option<&RecoveryStep> {
        self.steps.iter().find(|s| {
            s.claim.num_terms() == 1
                && s.claim.vars().index_of(v).is_some_and(|i| s.claim == MultiPoly::var_at(s.claim.vars(), i))
        })
    }

    /// The chain for `after o first`, from the chain of `first` (whose target is
    /// the source of `after`) and the chain of `after`.
    pub fn compose(first: &RecoveryChain, after_endo: &PolyEndo, after: &RecoveryChain) -> Result<RecoveryChain> {
        let tv = after_endo.vars();
        let mut names: Vec<String> = first.steps.iter().map(|s| s.name.clone()).collect();
        names.extend(after.steps.iter().map(|s| s.name.clone()));
        let vars = Self::build_vars(tv, &names)?;
        let mut steps = Vec::new();
        for s in &first.steps {
            steps.push(RecoveryStep { name: s.name.clone(), claim: after_endo.apply(&s.claim)?, expr: s.expr.embed(&vars)? });
        }
        // inside `after`'s chain, PhiV refers to the element V recovered by `first`
        let mut sub = BTreeMap::new();
        for name in after.vars.names() {
            let target = match name.strip_prefix("Phi").filter(|v| tv.index_of(v).is_some()) {
                Some(v) => {
                    let step = first
                        .step_for_var(v)
                        .ok_or_else(|| Error::InvalidStep(format!("first chain never recovers {v}")))?;
                    step.name.clone()
                }
                None => name.clone(),
            };
            sub.insert(name.clone(), MultiPoly::var(&vars, &target)?);
        }
        for s in &after.steps {
            steps.push(RecoveryStep { name: s.name.clone(), claim: s.claim.clone(), expr: s.expr.substitute(&sub)? });
        }
        Ok(RecoveryChain { vars, steps })
    }
}

/// Rewrites `p` (over the target variables) in chain variables: each target
/// variable `V` becomes the chain variable `plain[V]`, and `X^a W^k` with
/// `a >= k` for the special variable `W` becomes `xw^k * x^(a-k)`.
fn rewrite_poly(
    p: &MultiPoly,
    chain: &VarSet,
    plain: &BTreeMap<&str, &str>,
    special: Option<(&str, &str)>,
) -> Result<MultiPoly> {
    let tv = p.vars();
    let mut out = MultiPoly::zero(chain);
    for (m, c) in p.terms() {
        let mut exps = vec![0u32; chain.len()];
        let mut x_exp = 0;
        let mut w_exp = 0;
        for (i, &e) in m.exponents().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let name = tv.name(i);
            if name == "X" {
                x_exp = e;
            } else if special.is_some_and(|(w, _)| w == name) {
                w_exp = e;
            } else {
                let cv = plain.get(name).ok_or_else(|| Error::InvalidStep(format!("cannot express {name} yet")))?;
                exps[chain.index_of(cv).unwrap()] += e;
            }
        }
        if w_exp > 0 {
            let (w, xw) = special.unwrap();
            if x_exp < w_exp {
                return Err(Error::InvalidStep(format!("term X^{x_exp}*{w}^{w_exp} is not a multiple of (X*{w})^{w_exp}")));
            }
            exps[chain.index_of(xw).unwrap()] += w_exp;
            x_exp -= w_exp;
        }
        if x_exp > 0 {
            let cv = plain.get("X").ok_or_else(|| Error::InvalidStep("cannot express X yet".into()))?;
            exps[chain.index_of(cv).unwrap()] += x_exp;
        }
        out = out + MultiPoly::from_terms(chain, [(Monomial(exps), c.clone())]);
    }
    Ok(out)
}

fn chain_poly(vars: &VarSet, text: &str) -> MultiPoly {
    parse_poly(text, vars).unwrap_or_else(|e| panic!("chain expression `{text}`: {e}"))
}

/// Recovery chain for a single step, built from the endomorphism itself.
/// Step names carry `suffix` so that chains of several steps can be merged.
pub fn step_chain(spec: &CylinderStepSpec, endo: &PolyEndo, suffix: &str) -> Result<RecoveryChain> {
    let tgt = spec.target()?;
    let tv = tgt.vars();
    let nm = |b: &str| format!("{b}{suffix}");
    let img = |v: &str| endo.image(v).cloned().ok_or_else(|| Error::MissingImage(v.to_string()));
    let var = |v: &str| MultiPoly::var(tv, v).unwrap();
    let claim = |text: &str| parse_poly(text, tv).unwrap();
    let n = tgt.n();
    match spec {
        CylinderStepSpec::Full { .. } => {
            let names: Vec<String> = ["x", "t", "s", "y", "xz", "yz", "sz", "z"].iter().map(|b| nm(b)).collect();
            let cv = RecoveryChain::build_vars(tv, &names)?;
            let (x, t, s, y, xz, yz, sz) = (nm("x"), nm("t"), nm("s"), nm("y"), nm("xz"), nm("yz"), nm("sz"));
            let mut plain: BTreeMap<&str, &str> = BTreeMap::new();
            plain.insert("X", &x);
            plain.insert("T", &t);
            let h = img("S")? - var("S");
            let s_expr = chain_poly(&cv, "PhiS") - rewrite_poly(&h, &cv, &plain, None)?;
            plain.insert("S", &s);
            let l = img("Y")? - var("Y");
            let y_expr = chain_poly(&cv, "PhiY") - rewrite_poly(&l, &cv, &plain, None)?;
            plain.insert("Y", &y);
            let f = img("Z")? - var("X") * var("Z");
            let xz_expr = chain_poly(&cv, "PhiZ") - rewrite_poly(&f, &cv, &plain, None)?;
            let rest = img("T")? - var("Y") * var("Z");
            let yz_expr = chain_poly(&cv, "PhiT") - rewrite_poly(&rest, &cv, &plain, Some(("Z", &xz)))?;
            let e2 = tgt.e() - 2;
            let steps = vec![
                (nm("x"), claim("X"), chain_poly(&cv, "PhiX")),
                (nm("t"), claim("T"), chain_poly(&cv, &format!("-1/4*(PhiY*PhiZ - {x}*PhiT)"))),
                (nm("s"), claim("S"), s_expr),
                (nm("y"), claim("Y"), y_expr),
                (nm("xz"), claim("X*Z"), xz_expr),
                (nm("yz"), claim("Y*Z"), yz_expr),
                (nm("sz"), claim("S*Z"), chain_poly(&cv, &format!("{y}*{yz} - {x}^{e2}*{xz}^2"))),
                (nm("z"), claim("Z"), chain_poly(&cv, &format!("{x}^{n}*{yz} - {s}*{sz}"))),
            ];
            Ok(RecoveryChain {
                vars: cv,
                steps: steps.into_iter().map(|(name, claim, expr)| RecoveryStep { name, claim, expr }).collect(),
            })
        }
        CylinderStepSpec::Danielewski { .. } => {
            let c = spec.danielewski_constant()?;
            let d = tgt.d() as i64;
            let names: Vec<String> = ["x", "t", "s", "xy", "ys", "y"].iter().map(|b| nm(b)).collect();
            let cv = RecoveryChain::build_vars(tv, &names)?;
            let (x, t, s, xy, ys) = (nm("x"), nm("t"), nm("s"), nm("xy"), nm("ys"));
            let mut plain: BTreeMap<&str, &str> = BTreeMap::new();
            plain.insert("X", &x);
            plain.insert("T", &t);
            let t_expr = chain_poly(&cv, &format!("PhiY*PhiS - {x}*PhiT")).scale(&-(&c * int(d)).recip());
            let h = img("S")? - var("S");
            let s_expr = chain_poly(&cv, "PhiS") - rewrite_poly(&h, &cv, &plain, None)?;
            plain.insert("S", &s);
            let l = img("Y")? - var("X") * var("Y");
            let xy_expr = chain_poly(&cv, "PhiY") - rewrite_poly(&l, &cv, &plain, None)?;
            let rest = img("T")? - var("Y") * var("S");
            let ys_expr = chain_poly(&cv, "PhiT") - rewrite_poly(&rest, &cv, &plain, Some(("Y", &xy)))?;
            // c y = x^{n'} y^2 - y (P - c); each y * x^a s^b is rewritten via ys or xy
            let mut y_expr = chain_poly(&cv, &format!("{x}^{}*{xy}^2", n - 2));
            let pc = tgt.p_poly() - MultiPoly::constant(tv, c.clone());
            for (m, coef) in pc.terms() {
                let (a, b) = (m.exponents()[0], m.exponents()[1]);
                let term = if b >= 1 {
                    format!("{ys}*{x}^{a}*{s}^{}", b - 1)
                } else {
                    format!("{xy}*{x}^{}", a - 1)
                };
                y_expr = y_expr - chain_poly(&cv, &term).scale(coef);
            }
            let y_expr = y_expr.scale(&c.recip());
            let steps = vec![
                (nm("x"), claim("X"), chain_poly(&cv, "PhiX")),
                (nm("t"), claim("T"), t_expr),
                (nm("s"), claim("S"), s_expr),
                (nm("xy"), claim("X*Y"), xy_expr),
                (nm("ys"), claim("Y*S"), ys_expr),
                (nm("y"), claim("Y"), y_expr),
            ];
            Ok(RecoveryChain {
                vars: cv,
                steps: steps.into_iter().map(|(name, claim, expr)| RecoveryStep { name, claim, expr }).collect(),
            })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCheck {
    pub source: String,
    pub image: String,
    pub target: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongruenceCheck {
    /// `Phi(lhs) - kappa*T`, which must lie in the target ideal.
    pub expression: String,
    pub residual: String,
    /// Cofactors of the target generators.
    pub cofactors: Vec<String>,
    pub identity_holds: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStepCheck {
    pub name: String,
    pub claim: String,
    pub expr: String,
    pub residual: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsoCertificate {
    pub source: String,
    pub target: String,
    pub endo: PolyEndo,
    pub relation_identity: bool,
    pub relations: Vec<RelationCheck>,
    pub congruence: Option<CongruenceCheck>,
    pub recovery_chain: Vec<ChainStepCheck>,
    pub recovered_generators: bool,
    pub errors: Vec<String>,
    pub pass: bool,
}

impl IsoCertificate {
    /// Nonzero residuals and error messages, for reporting failures.
    pub fn witnesses(&self) -> Vec<String> {
        let mut out = self.errors.clone();
        for r in self.relations.iter().filter(|r| !r.pass) {
            out.push(format!("relation {} maps to {}, expected {}", r.source, r.image, r.target));
        }
        if let Some(c) = self.congruence.as_ref().filter(|c| !c.pass) {
            out.push(format!("congruence residual {}", c.residual));
        }
        for s in self.recovery_chain.iter().filter(|s| !s.pass) {
            out.push(format!("step {} ({}) residual {}", s.name, s.claim, s.residual));
        }
        out
    }
}

/// Checks relation transport, the optional `Phi(lhs) = kappa*T` congruence and the recovery chain.
pub fn verify_iso(
    endo: &PolyEndo,
    source: &Ring,
    target: &Ring,
    chain: &RecoveryChain,
    congruence: Option<(&MultiPoly, Rational)>,
) -> Result<IsoCertificate> {
    if endo.vars() != target.vars() || source.vars() != target.vars() {
        return Err(Error::InvalidStep("endomorphism, source and target must share variables".into()));
    }
    let mut errors = Vec::new();

    let mut relations = Vec::new();
    for (g, h) in source.generators().iter().zip(target.generators()) {
        let image = endo.apply(g)?;
        relations.push(RelationCheck { source: g.to_string(), image: image.to_string(), target: h.to_string(), pass: image == h });
    }
    if source.generators().len() != target.generators().len() {
        errors.push("source and target have different numbers of relations".into());
    }
    let relation_identity = relations.iter().all(|r| r.pass) && errors.is_empty();

    let congruence = match congruence {
        None => None,
        Some((lhs, kappa)) => {
            let t = MultiPoly::var(target.vars(), "T")?;
            let expr = endo.apply(lhs)? - t.scale(&kappa);
            let (nf, cof) = target.normal_form_with_cofactors(&expr)?;
            let recombined = target.generators().iter().zip(&cof).fold(nf.to_poly(), |acc, (g, q)| acc + q * g);
            let identity_holds = recombined == expr;
            Some(CongruenceCheck {
                expression: expr.to_string(),
                residual: nf.to_string(),
                cofactors: cof.iter().map(|q| q.to_string()).collect(),
                identity_holds,
                pass: identity_holds && nf.is_zero(),
            })
        }
    };

    let images: Vec<QuotElem> = endo.images().iter().map(|p| target.normal_form(p)).collect::<Result<_>>()?;
    let mut values: Vec<QuotElem> = images.clone();
    let mut recovery_chain = Vec::new();
    let nphi = images.len();
    for (k, step) in chain.steps.iter().enumerate() {
        if chain.vars.name(nphi + k) != step.name {
            errors.push(format!("step {} out of place", step.name));
        }
        let claim_nf = target.normal_form(&step.claim)?;
        // only images and earlier steps may appear
        let later = (nphi + k..chain.vars.len()).find(|&i| step.expr.involves(i));
        let residual = match later {
            Some(i) => {
                errors.push(format!("step {} uses {} before it is recovered", step.name, chain.vars.name(i)));
                claim_nf.clone()
            }
            None => {
                let mut env = values.clone();
                env.resize(chain.vars.len(), target.zero());
                &target.eval_poly(&step.expr, &env)? - &claim_nf
            }
        };
        recovery_chain.push(ChainStepCheck {
            name: step.name.clone(),
            claim: step.claim.to_string(),
            expr: step.expr.to_string(),
            residual: residual.to_string(),
            pass: residual.is_zero() && later.is_none(),
        });
        values.push(claim_nf);
    }
    let recovered_generators = target.vars().names().iter().all(|v| chain.step_for_var(v).is_some());
    if !recovered_generators {
        errors.push("chain does not recover every generator".into());
    }

    let pass = relation_identity
        && congruence.as_ref().is_none_or(|c| c.pass)
        && recovery_chain.iter().all(|s| s.pass)
        && recovered_generators
        && errors.is_empty();
    Ok(IsoCertificate {
        source: source.label(),
        target: target.label(),
        endo: endo.clone(),
        relation_identity,
        relations,
        congruence,
        recovery_chain,
        recovered_generators,
        errors,
        pass,
    })
}

/// `(YZ - XT, -4)` for full steps, `(YS - XT, -c d)` for Danielewski steps.
fn step_congruence(spec: &CylinderStepSpec) -> Result<(MultiPoly, Rational)> {
    let tv = spec.target()?.vars().clone();
    Ok(match spec {
        CylinderStepSpec::Full { .. } => (parse_poly("Y*Z - X*T", &tv)?, int(-4)),
        CylinderStepSpec::Danielewski { .. } => {
            let c = spec.danielewski_constant()?;
            let d = spec.target()?.d() as i64;
            (parse_poly("Y*S - X*T", &tv)?, -(c * int(d)))
        }
    })
}

pub fn verify_step(endo: &PolyEndo, spec: &CylinderStepSpec) -> Result<IsoCertificate> {
    let (src, tgt) = (spec.source()?, spec.target()?);
    let chain = match step_chain(spec, endo, "") {
        Ok(c) => c,
        Err(e) => {
            // the chain cannot even be written down; report every other check
            let empty = RecoveryChain { vars: RecoveryChain::build_vars(tgt.vars(), &[])?, steps: Vec::new() };
            let (lhs, kappa) = step_congruence(spec)?;
            let mut cert = verify_iso(endo, &src, &tgt, &empty, Some((&lhs, kappa)))?;
            cert.errors.push(format!("recovery chain: {e}"));
            cert.pass = false;
            return Ok(cert);
        }
    };
    let (lhs, kappa) = step_congruence(spec)?;
    verify_iso(endo, &src, &tgt, &chain, Some((&lhs, kappa)))
}

/// Steps `specs[0]`, then `specs[1]`, ...: the composed endomorphism and its
/// merged recovery chain.
pub fn compose_steps(specs: &[CylinderStepSpec]) -> Result<(PolyEndo, RecoveryChain)> {
    let first = specs.first().ok_or_else(|| Error::InvalidStep("empty chain".into()))?;
    let mut endo = solve_step(first)?;
    let mut chain = step_chain(first, &endo, if specs.len() > 1 { "_1" } else { "" })?;
    for (i, spec) in specs.iter().enumerate().skip(1) {
        let step = solve_step(spec)?;
        let step_ch = step_chain(spec, &step, &format!("_{}", i + 1))?;
        chain = RecoveryChain::compose(&chain, &step, &step_ch)?;
        endo = endo.then(&step)?;
    }
    Ok((endo, chain))
}

fn verify_composite(specs: &[CylinderStepSpec]) -> Result<(PolyEndo, IsoCertificate)> {
    let (endo, chain) = compose_steps(specs)?;
    let src = specs[0].source()?;
    let tgt = specs.last().unwrap().target()?;
    let congruence = if specs.len() == 1 { Some(step_congruence(&specs[0])?) } else { None };
    let cert = verify_iso(&endo, &src, &tgt, &chain, congruence.as_ref().map(|(l, k)| (l, k.clone())))?;
    Ok((endo, cert))
}

/// `R_{n,e1}[T] -> R_{n,e2}[T]` as a composite of single steps.
pub fn compose_chain(n: u32, e1: u32, e2: u32) -> Result<(PolyEndo, IsoCertificate)> {
    if e1 < 1 || e2 <= e1 {
        return Err(Error::InvalidStep(format!("need e2 > e1 >= 1, got e1 = {e1}, e2 = {e2}")));
    }
    let specs: Vec<CylinderStepSpec> = (e1..e2).map(|e| CylinderStepSpec::Full { n, e }).collect();
    verify_composite(&specs)
}

/// `B_{n1,P}[T] -> B_{n2,P}[T]`.
pub fn danielewski_chain(p: &MultiPoly, n1: u32, n2: u32) -> Result<(PolyEndo, IsoCertificate)> {
    if n1 < 1 || n2 <= n1 {
        return Err(Error::InvalidStep(format!("need n2 > n1 >= 1, got n1 = {n1}, n2 = {n2}")));
    }
    let p = p.embed(&xs_vars())?;
    let specs: Vec<CylinderStepSpec> = (n1..n2).map(|n| CylinderStepSpec::danielewski(n, p.clone())).collect();
    verify_composite(&specs)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CancellationReport {
    pub source_fingerprint: (u32, u32, u32, u32),
    pub target_fingerprint: (u32, u32, u32, u32),
    pub note: String,
    pub certificate: IsoCertificate,
    pub pass: bool,
}

/// The verified isomorphism `R_{n,e1}[T] = R_{n,e2}[T]` together with the
/// `(n, e, d, m)` fingerprints of the two bases.
pub fn cancellation_report(n: u32, e1: u32, e2: u32) -> Result<CancellationReport> {
    if e1 == e2 {
        return Err(Error::InvalidStep("e1 and e2 must differ".into()));
    }
    let (lo, hi) = (e1.min(e2), e1.max(e2));
    let (_, certificate) = compose_chain(n, lo, hi)?;
    let fp = |e| RingPresentation::r_ne(n, e).map(|r| r.fingerprint());
    let note = format!(
        "R({n},{lo}) and R({n},{hi}) have isomorphic cylinders; for these families the pair (n, e) \
         is an isomorphism invariant of the base ring (cited, not computed here), so the bases differ"
    );
    let pass = certificate.pass;
    Ok(CancellationReport { source_fingerprint: fp(e1)?, target_fingerprint: fp(e2)?, note, certificate, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tv() -> VarSet {
        VarSet::new(["X", "S", "Y", "Z", "T"]).unwrap()
    }

    #[test]
    fn full_step_matches_reference_images() {
        let spec = CylinderStepSpec::Full { n: 1, e: 1 };
        let phi = solve_step(&spec).unwrap();
        let v = tv();
        let p = |t: &str| parse_poly(t, &v).unwrap();
        assert_eq!(phi.image("X").unwrap(), &p("X"));
        assert_eq!(phi.image("S").unwrap(), &p("S + X^2*T"));
        assert_eq!(phi.image("Y").unwrap(), &p("Y + 2*X*S*T + X^3*T^2"));
        assert_eq!(
            phi.image("Z").unwrap(),
            &p("X*Z + 4*S*Y*T - X*T + 2*X^2*Y*T^2 + 4*X*S^2*T^2 + 4*X^3*S*T^3 + X^5*T^4")
        );
        let cert = verify_step(&phi, &spec).unwrap();
        assert!(cert.pass, "{:?}", cert.witnesses());
    }

    #[test]
    fn danielewski_step_matches_reference_images() {
        let p = parse_poly("S^4 + X^2*S^2 + 1", &xs_vars()).unwrap();
        let spec = CylinderStepSpec::danielewski(1, p);
        let phi = solve_step(&spec).unwrap();
        let v = VarSet::new(["X", "S", "Y", "T"]).unwrap();
        let q = |t: &str| parse_poly(t, &v).unwrap();
        assert_eq!(phi.image("S").unwrap(), &q("S + X*T"));
        assert_eq!(
            phi.image("Y").unwrap(),
            &q("X*Y + X^3*T^4 + 4*X^2*T^3*S + 6*X*T^2*S^2 + 4*T*S^3 + T^2*X^3 + 2*T*S*X^2")
        );
        let cert = verify_step(&phi, &spec).unwrap();
        assert!(cert.pass, "{:?}", cert.witnesses());
    }

    #[test]
    fn danielewski_needs_nonzero_constant() {
        let p = parse_poly("S^2 + X*S", &xs_vars()).unwrap();
        assert!(solve_step(&CylinderStepSpec::danielewski(1, p)).is_err());
        let p = parse_poly("S^2 + S + 1", &xs_vars()).unwrap();
        assert!(solve_step(&CylinderStepSpec::danielewski(1, p)).is_err());
    }

    #[test]
    fn endo_json_round_trip() {
        let phi = solve_step(&CylinderStepSpec::Full { n: 1, e: 1 }).unwrap();
        let json = serde_json::to_string(&phi).unwrap();
        assert!(json.starts_with(r#"{"vars":["X","S","Y","Z","T"],"images":{"S":"X^2*T + S""#));
        let back: PolyEndo = serde_json::from_str(&json).unwrap();
        assert_eq!(back, phi);
        let composed = PolyEndo::identity(&tv()).then(&phi).unwrap();
        assert_eq!(composed, phi);
    }
}
