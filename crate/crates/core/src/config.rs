//! Default numerical thresholds, collected in one place.
//!
//! The CLI exposes the user-facing ones as flags; everything else reads the
//! constants directly.

/// Pivot magnitudes below this fraction of `max|A|` flag the factorization singular.
pub const SINGULAR_PIVOT_RELATIVE: f64 = 1e-13;

/// Largest order accepted by the cofactor-expansion oracle.
pub const BRUTE_FORCE_MAX_ORDER: usize = 10;

/// Largest doubled angular momentum covered by the log-factorial table.
pub const MAX_TWO_J: u32 = 300;

/// Newton iteration stops once the Legendre root update is below this.
pub const LEGENDRE_NEWTON_TOL: f64 = 1e-15;

/// A model is called stable when every Brillouin residual is below this.
pub const BRILLOUIN_TOL: f64 = 1e-10;

/// `E_J` is only reported when `n_J > NORM_THRESHOLD_RELATIVE * max_J n_J`.
pub const NORM_THRESHOLD_RELATIVE: f64 = 1e-8;

/// Default number of Gauss-Legendre nodes on `[0, pi]`.
pub const DEFAULT_QUADRATURE_POINTS: usize = 48;

/// Smallest node count the CLI accepts.
pub const MIN_QUADRATURE_POINTS: usize = 8;

/// Largest basis the Fock-space oracle will enumerate.
pub const FOCK_MAX_MODES: usize = 12;

/// Disk quadrature defaults for the integral projector.
pub const DEFAULT_RADIAL_POINTS: usize = 40;
pub const DEFAULT_ANGULAR_POINTS: usize = 64;

/// Imaginary / off-axial leakage tolerated in the disk integral.
pub const DISK_LEAK_TOL: f64 = 1e-10;

/// Integral-vs-series agreement required of the normalized disk projector.
pub const INTEGRAL_PROJECTOR_TOL: f64 = 1e-6;

/// Series projector checks (idempotence, annihilation, completeness).
pub const SERIES_PROJECTOR_TOL: f64 = 1e-9;

/// Relative tolerance of the radial integral identity.
pub const RADIAL_IDENTITY_TOL: f64 = 1e-10;
