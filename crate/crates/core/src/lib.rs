//! Arithmetic of the curves E_m: y² = (x − (m⁴−1))(x + (m⁴−1))(x − 4m²).
//!
//! Torsion, canonical heights and a full 2-descent with exact local
//! solvability tests.

pub mod numtheory;
pub mod family;
pub mod curve;
pub mod heights;
pub mod descent;

/// Engine version, part of every cached result's key.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
