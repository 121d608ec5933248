//! Multiplicative-weights machinery for truthful-in-expectation auctions.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! core:
//!
//! * [`covering`]: MWU solver for covering LPs driven by a column oracle,
//!   including the unit-cost variant used by the decomposition.
//! * [`packing`]: width-independent MWU packing solver and the demand oracle
//!   for combinatorial auctions.
//! * [`decomposition`]: dominating convex combinations from an
//!   integrality-gap verifier and their conversion into exact convex
//!   decompositions.
//! * [`auction`]: the combinatorial-auction packing domain, greedy and exact
//!   verifiers, exact fractional welfare solvers and instance generators.
//! * [`mechanism`]: fractional VCG, the randomized fractional mechanism with
//!   active-player gating, integral conversion and exact truthfulness audits.
//!
//! File formats, the command-line harness and reports live in the `mwumech`
//! crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod auction;
pub mod covering;
pub mod decomposition;
mod error;
pub mod lp;
pub mod mechanism;
pub mod model;
pub mod numeric;
pub mod packing;
pub mod rng;

pub use error::{Error, Result};
pub use model::{
    verify_membership, zero_out, ConvexDecomposition, FractionalPoint, IntegralPoint, IntegralityGapVerifier,
    PackingDomain,
};
pub use rng::SeededRng;
