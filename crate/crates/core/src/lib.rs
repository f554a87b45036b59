//! Numerical toolkit for the reduced two-body problem on the sphere with the
//! cotangent potential `V(q) = -cot q`.
//!
//! The crate covers four areas:
//!
//! * [`model`]: the reduced Hamiltonian, the Casimir, the Poisson structure and
//!   the Hamiltonian vector field in the coordinates `(xi, p, m1, m2, m3)`.
//! * [`level_sets`]: fibers of the projection to the Casimir sphere, hole
//!   counting (quartic root isolation cross-checked against a flood fill),
//!   topology classification, compactification and level-set sampling.
//! * [`bifurcation`]: the bifurcation locus in the `(C, h)` plane and its
//!   coincidence with the relative-equilibrium curves.
//! * [`contact`]: the Liouville field, fiber geometry, boundary transversality
//!   and the `F(theta)` certificate.
//!
//! [`dynamics`] integrates the reduced flow with conservation monitoring.
//!
//! Grid sweeps and Monte Carlo loops run on rayon when the `parallel` feature
//! is enabled (the default). Every such entry point takes an [`Execution`]
//! so both paths stay callable and comparable.

pub mod bifurcation;
pub mod contact;
pub mod dynamics;
pub mod error;
pub mod level_sets;
pub mod model;
pub mod par;
pub mod roots;
pub mod tolerances;

pub use error::{Error, Result};
pub use model::{ParamPair, ReducedState, SphericalPoint};
pub use par::Execution;
pub use tolerances::Tolerances;
