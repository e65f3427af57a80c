//! Exact Hasse-Herbrand functions for finite Galois extensions of local fields.
//!
//! A ramification filtration is described by the orders of its lower-numbering
//! groups `G_{-1} ⊇ G_0 ⊇ G_1 ⊇ …`. From it this crate builds the Hasse-Herbrand
//! function `φ_{L/K}` as an exact piecewise-linear map, the depth transform
//! `r ↦ φ_{L/K}(e·r)` for the induced torus `R_{L/K} G_m`, and the invariant
//! `a(L/K) = φ_{L/K}(b) − b/e` that controls how far depth fails to be preserved.
//!
//! All arithmetic is over arbitrary-precision rationals; nothing is rounded.

pub mod arith;
pub mod catalog;
pub mod depth;
pub mod extspec;
pub mod filtration;
pub mod herbrand;

pub use arith::Rational;
pub use catalog::{CatalogEntry, CatalogError, Family, VerificationReport};
pub use depth::{Depth, DepthError, DepthReport, DepthTransform};
pub use extspec::{ExtSpecError, ExtensionSpecDocument, OutputFormat as DocFormat};
pub use filtration::{Classification, FiltrationError, RamificationFiltration, ValidationMode};
pub use herbrand::{HerbrandError, PiecewiseLinear};
