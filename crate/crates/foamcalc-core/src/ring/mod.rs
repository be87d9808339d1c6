//! Exact arithmetic in the rings the evaluation lives in: symmetric
//! polynomials over F2, their square-root and discriminant localizations,
//! one-variable PID targets, and integer Laurent polynomials.

pub mod base_change;
pub mod laurent;
pub mod loc;
pub mod parse;
pub mod poly;
pub mod rd;

pub use base_change::{apply_to_poly, apply_to_rd, BaseChange, BcElem};
pub use laurent::{ELaurent, LaurentInt};
pub use loc::{linear_form, LocElem, PAIRS};
pub use poly::{deglex, discriminant_e, elementary, Alphabet, Mono, Poly, RingError};
pub use rd::RDElem;
