//! Discrete isothermic and constant mean curvature nets in the quaternionic
//! light-cone model of Minkowski 5-space.
//!
//! The crate builds up from quaternion and 2x2 quaternionic matrix arithmetic
//! ([`quat`]), through the R^{4,1} matrix model with its space-form quadrics
//! and sphere vectors ([`mink`]), to quad lattices with real cross ratios
//! ([`net`]), their Christoffel/Calapso/Darboux transforms ([`transforms`]),
//! and the conserved-quantity machinery that characterizes discrete CMC nets
//! ([`conserved`]). [`generators`] constructs explicit nets (minimal, Bryant,
//! surfaces of revolution, spacelike nets in R^{2,1}) and samples smooth
//! maximal surfaces.
//!
//! All verification is residual based: every structural claim (isothermicity,
//! Moutard edge identities, flatness of the isothermic connection, conserved
//! quantity equations) is checked numerically against explicit tolerances.
//!
//! The crate is `no_std` compatible (requires `alloc`); enable the `libm`
//! feature when building without `std`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod conserved;
pub mod dhf;
pub mod error;
pub(crate) mod fmath;
pub mod generators;
pub mod grid;
pub mod linalg;
pub mod mink;
pub mod net;
pub mod quat;
pub mod r21;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::Grid;
pub use mink::{MinkVec, SpaceForm, SphereVec};
pub use net::QuadNet;
pub use quat::{QuatMat2, Quaternion};

/// Default relative tolerance for algebraic identities.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Default tolerance for on-manifold validation of imported data.
pub const DEFAULT_GEOM_TOL: f64 = 1e-8;
