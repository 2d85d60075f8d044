//! Exact computations in the rings `R_{n,e,P,Q}` and `B_{n,P}`: normal forms,
//! the canonical locally nilpotent derivation, automorphisms and explicit
//! cylinder isomorphisms.

pub mod auto;
pub mod cyliso;
pub mod error;
pub mod linalg;
pub mod lnd;
pub mod poly;
pub mod quotient;
pub mod rational;
pub mod report;
pub mod sample;

pub use error::{Error, Result};
pub use poly::{format_poly, parse_poly, Degree, Monomial, MultiPoly, VarSet, WeightFunction};
pub use quotient::{BasisKey, Family, QuotElem, Ring, RingPresentation, RingSpec, Strategy};
pub use rational::Rational;
pub use lnd::{gr_leading, Derivation, GradedElem};
pub use report::Report;
