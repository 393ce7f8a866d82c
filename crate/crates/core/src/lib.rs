//! Numerical tools for smooth strictly convex curves: affine arc length and
//! curvature, symplectic and outer billiard maps, best approximating
//! inscribed and circumscribed polygons, and the asymptotic coefficients of
//! their area deficits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod affine;
pub mod areas;
pub mod billiard;
pub mod curve;
pub mod error;
pub mod expansions;
pub mod extraction;
pub mod polygon;
pub mod roots;
pub mod series;
pub mod spectral;

pub use affine::{build_affine, check_omega_relations, curvature_integrals, AffineCurve, OmegaReport};
pub use curve::{enclosed_area, evaluate_jet, omega, ordinary_curvature, Curve, CurveSpec, Jet, Vec2};
pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
