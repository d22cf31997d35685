//! Randomized mesh generation and certification for hierarchical function
//! spaces.
//!
//! The crate builds discrete point sets ("meshes") on compact box domains by
//! seeded i.i.d. sampling — from a base measure, from the Christoffel-induced
//! measure of a function space, and from a gradient-weighted measure — and
//! then certifies, empirically, how well the discrete sup norm on the mesh
//! controls the continuum sup norm over the whole space.
//!
//! The main pieces:
//!
//! * [`spaces`] — orthonormal hierarchical bases (tensor Jacobi / Chebyshev
//!   polynomials, complex exponentials, quadrature-orthonormalized custom
//!   functions) with pointwise values, gradients, kernel diagonal and
//!   Christoffel function.
//! * [`measures`] — seeded samplers for the base, induced, and
//!   gradient-weighted measures, with rejection diagnostics.
//! * [`meshgen`] — turns sample-count rules into concrete meshes with full
//!   provenance (rule constants, seed).
//! * [`verify`] — Gramian near-isometry, discrete/continuum norm
//!   equivalences, LP-based sup-ratio constants, alternant conditioning.
//! * [`covering`] — weighted epsilon-coverings with fixed-point local radii,
//!   greedy cover construction, and oscillation factors.
//! * [`asymptotics`] — log–log exponent fits and the experiment sweep driver.
//! * [`config`] / [`io`] — the text config format, dump formats, and
//!   reproducibility plumbing shared with the CLI.

pub mod asymptotics;
pub mod config;
pub mod covering;
pub mod io;
pub mod linalg;
pub mod measures;
pub mod meshgen;
pub mod rng;
pub mod spaces;
pub mod verify;
