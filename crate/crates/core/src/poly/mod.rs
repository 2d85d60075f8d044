//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! A [`MultiPoly`] always lives over an explicit [`VarSet`]. Arithmetic
//! between polynomials over different variable sets is rejected rather than
//! coerced; use [`MultiPoly::embed`] to move a polynomial into a larger set.
//!
//! Terms are stored in a `BTreeMap` keyed by [`Monomial`], whose ordering is
//! graded lexicographic, so iteration and printing are deterministic.

mod parse;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::{int, Rational};

pub use parse::{format_poly, parse_poly};

/// An ordered list of distinct variable names.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VarSet(Arc<[String]>);

impl VarSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        for (i, n) in names.iter().enumerate() {
            let mut chars = n.chars();
            let ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !ok {
                return Err(Error::InvalidVarSet(format!("`{n}` is not an identifier")));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidVarSet(format!("duplicate variable `{n}`")));
            }
        }
        Ok(VarSet(names.into()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.0[idx]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    fn joined(&self) -> String {
        self.0.join(",")
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VarSet[{}]", self.joined())
    }
}

/// Exponent vector, one entry per variable of the owning [`VarSet`].
///
/// Ordered graded-lexicographically: total degree first, then the exponent of
/// the first variable, and so on.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn weight(&self, w: &WeightFunction) -> u64 {
        self.0.iter().zip(&w.weights).map(|(&e, &wt)| e as u64 * wt).sum()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A degree value that may be minus infinity (the degree of zero).
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Degree {
    NegInf,
    Finite(u64),
}

impl Degree {
    pub fn finite(self) -> Option<u64> {
        match self {
            Degree::Finite(d) => Some(d),
            Degree::NegInf => None,
        }
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Degree::NegInf => f.write_str("-inf"),
            Degree::Finite(d) => write!(f, "{d}"),
        }
    }
}

/// Non-negative integer weights, one per variable.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WeightFunction {
    vars: VarSet,
    weights: Vec<u64>,
}

impl WeightFunction {
    pub fn new(vars: &VarSet, weights: Vec<u64>) -> Result<Self> {
        if weights.len() != vars.len() {
            return Err(Error::WeightLength { expected: vars.len(), got: weights.len() });
        }
        Ok(WeightFunction { vars: vars.clone(), weights })
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyOp {
    Add,
    Sub,
    Mul,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MultiPoly {
    vars: VarSet,
    terms: BTreeMap<Monomial, Rational>,
}

impl MultiPoly {
    pub fn zero(vars: &VarSet) -> Self {
        MultiPoly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &VarSet, c: Rational) -> Self {
        let mut p = Self::zero(vars);
        p.add_term(Monomial::one(vars.len()), c);
        p
    }

    pub fn one(vars: &VarSet) -> Self {
        Self::constant(vars, Rational::one())
    }

    pub fn var(vars: &VarSet, name: &str) -> Result<Self> {
        let idx = vars.index_of(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        Ok(Self::var_at(vars, idx))
    }

    pub fn var_at(vars: &VarSet, idx: usize) -> Self {
        let mut exps = vec![0; vars.len()];
        exps[idx] = 1;
        Self::monomial(vars, exps, Rational::one())
    }

    /// `c * prod vars[i]^exps[i]`.
    pub fn monomial(vars: &VarSet, exps: Vec<u32>, c: Rational) -> Self {
        assert_eq!(exps.len(), vars.len(), "exponent vector length");
        let mut p = Self::zero(vars);
        p.add_term(Monomial(exps), c);
        p
    }

    /// Builds a polynomial from raw terms, merging duplicates and dropping zeros.
    pub fn from_terms<I>(vars: &VarSet, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.0.len(), vars.len(), "exponent vector length");
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &VarSet {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.total_degree() == 0)
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one(self.vars.len()))
    }

    pub(crate) fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_same(&self, other: &MultiPoly) -> Result<()> {
        if self.vars != other.vars {
            return Err(Error::VarSetMismatch { left: self.vars.joined(), right: other.vars.joined() });
        }
        Ok(())
    }

    pub fn arith(&self, other: &MultiPoly, op: PolyOp) -> Result<MultiPoly> {
        self.check_same(other)?;
        Ok(match op {
            PolyOp::Add => self.add_unchecked(other),
            PolyOp::Sub => self.add_unchecked(&-other),
            PolyOp::Mul => self.mul_unchecked(other),
        })
    }

    fn add_unchecked(&self, other: &MultiPoly) -> MultiPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    fn mul_unchecked(&self, other: &MultiPoly) -> MultiPoly {
        let mut acc: std::collections::HashMap<Monomial, Rational> = std::collections::HashMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                *acc.entry(ma.mul(mb)).or_insert_with(Rational::zero) += ca * cb;
            }
        }
        MultiPoly::from_terms(&self.vars, acc)
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.vars);
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> MultiPoly {
        let mut acc = MultiPoly::one(&self.vars);
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

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(Monomial::total_degree).max()
    }

    pub fn degree_in(&self, idx: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[idx]).max()
    }

    /// True if the variable at `idx` occurs in some term.
    pub fn involves(&self, idx: usize) -> bool {
        self.terms.keys().any(|m| m.0[idx] > 0)
    }

    /// Simultaneous substitution `v -> images[v]`. `None` entries are only
    /// allowed for variables that do not occur in `self`.
    pub fn substitute_indexed(&self, images: &[Option<MultiPoly>]) -> Result<MultiPoly> {
        assert_eq!(images.len(), self.vars.len());
        let target = match images.iter().flatten().next() {
            Some(p) => p.vars.clone(),
            None => {
                if self.is_constant() {
                    return Ok(self.clone());
                }
                let idx = (0..self.vars.len()).find(|&i| self.involves(i)).unwrap();
                return Err(Error::MissingImage(self.vars.name(idx).to_string()));
            }
        };
        for img in images.iter().flatten() {
            if img.vars != target {
                return Err(Error::VarSetMismatch { left: target.joined(), right: img.vars.joined() });
            }
        }
        for (i, img) in images.iter().enumerate() {
            if img.is_none() && self.involves(i) {
                return Err(Error::MissingImage(self.vars.name(i).to_string()));
            }
        }
        let mut cache: BTreeMap<(usize, u32), MultiPoly> = BTreeMap::new();
        let mut out = MultiPoly::zero(&target);
        for (m, c) in &self.terms {
            let mut term = MultiPoly::constant(&target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = cache
                    .entry((i, e))
                    .or_insert_with(|| images[i].as_ref().unwrap().pow(e))
                    .clone();
                term = &term * &pw;
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Substitution keyed by variable name; unmapped variables must not occur.
    pub fn substitute(&self, images: &BTreeMap<String, MultiPoly>) -> Result<MultiPoly> {
        let imgs: Vec<Option<MultiPoly>> =
            self.vars.names().iter().map(|n| images.get(n).cloned()).collect();
        self.substitute_indexed(&imgs)
    }

    /// Re-expresses `self` over `target`, matching variables by name.
    pub fn embed(&self, target: &VarSet) -> Result<MultiPoly> {
        let map: Vec<usize> = self
            .vars
            .names()
            .iter()
            .enumerate()
            .map(|(i, n)| match target.index_of(n) {
                Some(j) => Ok(j),
                None if !self.involves(i) => Ok(usize::MAX),
                None => Err(Error::UnknownVariable(n.clone())),
            })
            .collect::<Result<_>>()?;
        let mut out = MultiPoly::zero(target);
        for (m, c) in &self.terms {
            let mut exps = vec![0; target.len()];
            for (i, &e) in m.0.iter().enumerate() {
                if e > 0 {
                    exps[map[i]] = e;
                }
            }
            out.add_term(Monomial(exps), c.clone());
        }
        Ok(out)
    }

    pub fn partial_derivative(&self, name: &str) -> Result<MultiPoly> {
        let idx = self.vars.index_of(name).ok_or_else(|| Error::UnknownVariable(name.to_string()))?;
        Ok(self.partial_derivative_at(idx))
    }

    pub fn partial_derivative_at(&self, idx: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.0[idx];
            if e == 0 {
                continue;
            }
            let mut exps = m.0.clone();
            exps[idx] -= 1;
            out.add_term(Monomial(exps), c * int(e as i64));
        }
        out
    }

    pub fn weight_degree(&self, w: &WeightFunction) -> Degree {
        debug_assert_eq!(w.vars, self.vars);
        self.terms.keys().map(|m| Degree::Finite(m.weight(w))).max().unwrap_or(Degree::NegInf)
    }

    /// Sum of the terms attaining the maximal weight.
    pub fn top_homogeneous_component(&self, w: &WeightFunction) -> Result<MultiPoly> {
        if w.vars != self.vars {
            return Err(Error::VarSetMismatch { left: self.vars.joined(), right: w.vars.joined() });
        }
        let top = self.weight_degree(w).finite().ok_or(Error::ZeroPolynomial)?;
        Ok(MultiPoly::from_terms(
            &self.vars,
            self.terms
                .iter()
                .filter(|(m, _)| m.weight(w) == top)
                .map(|(m, c)| (m.clone(), c.clone())),
        ))
    }

    /// Exact division by `vars[idx]^k`; `None` if some term is not divisible.
    pub fn div_var_power(&self, idx: usize, k: u32) -> Option<MultiPoly> {
        let mut out = MultiPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            if m.0[idx] < k {
                return None;
            }
            let mut exps = m.0.clone();
            exps[idx] -= k;
            out.terms.insert(Monomial(exps), c.clone());
        }
        Some(out)
    }

    /// Removes the term with the given monomial, returning its coefficient.
    pub fn remove_term(&mut self, m: &Monomial) -> Option<Rational> {
        self.terms.remove(m)
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(self))
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiPoly({})", format_poly(self))
    }
}

impl Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        -&self
    }
}

// Operator forms panic on variable-set mismatch; use `MultiPoly::arith` for a
// checked version.
macro_rules! binop {
    ($tr:ident, $method:ident, $op:expr) => {
        impl $tr<&MultiPoly> for &MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                self.arith(rhs, $op).expect("polynomial arithmetic across variable sets")
            }
        }
        impl $tr<MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&MultiPoly> for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: &MultiPoly) -> MultiPoly {
                (&self).$method(rhs)
            }
        }
    };
}

binop!(Add, add, PolyOp::Add);
binop!(Sub, sub, PolyOp::Sub);
binop!(Mul, mul, PolyOp::Mul);
