//! Numerical laboratory for polynomial-in-momenta first integrals of
//! magnetic geodesic flows on the 2-torus.
//!
//! On the energy level `H = 1/2`, in conformal coordinates with metric
//! `Λ(dx² + dy²)`, a degree-`N` integral restricted to the circle fibre is a
//! real trigonometric polynomial `F(φ) = Σ a_k e^{ikφ}`. Its coefficients
//! satisfy a quasi-linear first-order system on `2N` unknowns. This crate
//! builds that system and checks its structure numerically:
//!
//! * [`trigpoly`]: the fibre polynomial and its critical points;
//! * [`fields`]: field points, jets, Fourier specs, grids and file formats;
//! * [`system`]: the quasi-linear system, its matrices and the magnetic field;
//! * [`chars`]: Riemann invariants, characteristic speeds and Jacobian identities;
//! * [`claws`]: conservation laws and a pointwise validity oracle;
//! * [`semiham`]: diagonal-form diagnostics in Riemann coordinates;
//! * [`flow`]: the magnetic geodesic flow and first-integral drift;
//! * [`cli`]: the `magflow` command-line front end.

pub mod chars;
pub mod claws;
pub mod cli;
pub mod error;
pub mod fields;
pub mod flow;
pub mod linalg;
pub mod sampling;
pub mod semiham;
pub mod system;
pub mod trigpoly;

pub use error::{MagflowError, Result};
pub use fields::{FieldPoint, FieldSource, FourierFieldSpec, Jet};
pub use trigpoly::TrigPoly;
