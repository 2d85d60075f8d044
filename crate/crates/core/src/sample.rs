//! Seeded random elements for randomized checks.

use rand::Rng;

use crate::poly::{Monomial, MultiPoly, VarSet};
use crate::quotient::{BasisKey, QuotElem, Ring};
use crate::rational::{frac, Rational};

fn coeff<R: Rng>(rng: &mut R) -> Rational {
    let mut n = rng.gen_range(1..=6);
    if rng.gen_bool(0.5) {
        n = -n;
    }
    let d = if rng.gen_bool(0.2) { rng.gen_range(2..=3) } else { 1 };
    frac(n, d)
}

/// A nonzero normal-form element built from basis monomials of degree at
/// most `max_degree` and `x`-exponent at most `max_x`.
pub fn random_elem<R: Rng>(ring: &Ring, rng: &mut R, max_degree: u64, max_x: u32, max_terms: usize) -> QuotElem {
    let basis = ring.basis_monomials(max_degree);
    loop {
        let k = rng.gen_range(1..=max_terms.max(1));
        let terms: Vec<(BasisKey, Rational)> = (0..k)
            .map(|_| {
                let (b, _) = basis[rng.gen_range(0..basis.len())];
                (BasisKey { x: rng.gen_range(0..=max_x), ..b }, coeff(rng))
            })
            .collect();
        let a = ring.reduce_terms(terms);
        if !a.is_zero() {
            return a;
        }
    }
}

/// A random polynomial with `max_exps[i]` bounding the exponent of variable `i`.
pub fn random_poly<R: Rng>(vars: &VarSet, rng: &mut R, max_exps: &[u32], max_terms: usize) -> MultiPoly {
    let k = rng.gen_range(1..=max_terms.max(1));
    MultiPoly::from_terms(
        vars,
        (0..k).map(|_| {
            let exps = max_exps.iter().map(|&m| rng.gen_range(0..=m)).collect();
            (Monomial(exps), coeff(rng))
        }),
    )
}
