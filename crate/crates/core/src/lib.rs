//! Generalized Cramer's rule for batched replaced-column determinants, and
//! its use in angular-momentum projection of Slater determinants.
//!
//! Modules, bottom-up:
//!
//! - [`lalg`]: dense LU, multi right-hand-side solves and the replaced-column
//!   determinant identity.
//! - [`angmom`]: Wigner small-d, ladder operators, Clebsch-Gordan, Jacobi and
//!   terminating hypergeometric functions, Gauss-Legendre rules.
//! - [`projector`]: series (infinitesimal) projectors for the oscillator and
//!   for angular momentum, plus the disk-integral representation.
//! - [`manybody`]: rotation kernels of Slater determinants, particle-hole
//!   amplitudes, one- and two-body kernels, Thouless expansion and a
//!   brute-force Fock-space oracle.
//! - [`spectrum`]: projected energies by quadrature over the polar angle.

pub mod angmom;
pub mod config;
pub mod fixtures;
pub mod lalg;
pub mod manybody;
pub mod projector;
pub mod spectrum;
