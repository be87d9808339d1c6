//! foamcalc: exact evaluation of closed unoriented SL(3) pre-foams over
//! the two-element field, state spaces of planar trivalent graphs via the
//! universal construction, and the Kronheimer-Mrowka flat evaluation
//! algorithm.

pub mod eval;
pub mod foamspace;
pub mod jflat;
pub mod json;
pub mod prefoam;
pub mod ring;
pub mod web;
