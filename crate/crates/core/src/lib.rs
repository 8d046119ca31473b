//! Isotropic Gaussian random fields on compact two-point homogeneous spaces.
//!
//! The five families (spheres, real/complex/quaternionic projective spaces and
//! the Cayley plane) share a common spectral theory: every isotropic covariance
//! is a nonnegative combination of normalized Jacobi polynomials
//! `p_n^{(α,β)}(cos ρ)` in the geodesic distance `ρ ∈ [0, π]`, with parameters
//! `(α, β)` fixed by the space. This crate provides
//!
//! * the space catalog with distances, point sampling and eigenstructure
//!   ([`spaces`]),
//! * Jacobi/Legendre evaluation, Gauss–Jacobi quadrature and the coefficient
//!   analysis functional ([`jacobi`]),
//! * angular power spectra with certified truncation tails ([`spectra`]),
//! * zonal covariance synthesis, variograms, Gram matrices and two-sided
//!   variogram bound fitting ([`covariance`]),
//! * conditional variances, the strong-local-nondeterminism experiment and
//!   the spherical bump-function construction ([`slnd`]),
//! * Gaussian field samplers (Cholesky, Karhunen–Loève on the 2-sphere) and
//!   the modulus-of-continuity experiment ([`fieldsim`]),
//! * the deterministic experiment runner behind the CLI ([`experiment`]).
//!
//! All randomized routines take a 64-bit master seed and derive one
//! counter-indexed ChaCha substream per task, so results are reproducible
//! bit-for-bit regardless of thread count.

pub mod covariance;
mod error;
pub mod experiment;
pub mod fieldsim;
pub mod jacobi;
pub mod rng;
pub mod slnd;
pub mod spaces;
pub mod special;
pub mod spectra;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
