//! Gravitational potential, force field and particle dynamics of massive
//! circular wires, solid disks, annular disks and stacks of concentric
//! annuli.
//!
//! The closed-form potentials are written in elliptic integrals arranged so
//! they stay finite everywhere the potential itself is finite, including the
//! cylinder over each plate edge where the textbook third-kind form blows
//! up. Everything here is validated against a brute-force quadrature oracle
//! of the defining Newtonian integral ([`oracle`]).
//!
//! Modules:
//! - [`elliptic`]: complete/incomplete elliptic integrals, Heuman's lambda;
//!   every public function takes the parameter `m = k^2`.
//! - [`bodies`]: wire, disk, annulus and stack geometries.
//! - [`potential`]: closed-form potentials and gradients.
//! - [`oracle`]: adaptive quadrature of the defining integrals.
//! - [`dynamics`]: equations of motion, trajectory integration with event
//!   detection, axial oscillations, effective potential, phase portraits.
//! - [`equilibria`]: critical-point census, origin spectrum, bifurcation
//!   threshold, circular-orbit monodromy.
//! - [`ode`] / [`quad`] / [`roots`]: the numerical kernels backing the rest.
//!
//! All operations are pure functions of their arguments; nothing in this
//! crate holds shared mutable state, so everything is safe to call from any
//! number of threads.

pub mod bodies;
pub mod dynamics;
pub mod elliptic;
pub mod equilibria;
mod error;
pub mod ode;
pub mod oracle;
pub mod potential;
pub mod quad;
pub mod roots;

pub use bodies::{AnnulusBody, BodyStack, DiskBody, FieldPoint, FieldSample, WireBody};
pub use error::Error;
