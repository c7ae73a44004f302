//! Eigenangle analysis of geodesic segments `t ↦ e^{itx}·e^{iy}` in U(n) and SU(n).
//!
//! The crate tracks the arguments of the eigenvalues of such a path smoothly in
//! `t`, evaluates the analytic first and second variation of the angles, and
//! certifies convexity of partial angle sums, singular-value sums and
//! invariant-norm distances inside the optimal ball `‖u(t) − 1‖_∞ < √2`.
//! Failure of strict convexity is used to detect commutation of the two
//! generators.
//!
//! Module map:
//!
//! * [`linalg`] — dense complex primitives: Hermitian/unitary validation,
//!   matrix exponential and principal logarithm, spectral decomposition of
//!   normal matrices.
//! * [`flow`] — smooth spectral data along a path: Riesz projectors by contour
//!   quadrature, direct-rotation eigenvector transport, angle tracking, and
//!   the closed-form variation formulas.
//! * [`convexity`] — discrete convexity certificates, spectrum doubling,
//!   perturbation to distinct eigenvalues, the commutation detector and the
//!   √2 radius scanner.
//! * [`norms`] — Ky-Fan, α-weighted, Schatten and orbit norms together with
//!   the Cartan/Weyl machinery (majorization, rearrangement, polar duals).
//! * [`distance`] — geodesic distance profiles `t ↦ d(1, u(t))` for any
//!   supported norm, with convexity certificates on the inside-ball segment.

pub mod config;
pub mod convexity;
pub mod distance;
mod error;
pub mod flow;
pub mod linalg;
pub mod norms;
pub mod sampling;

pub use config::Tolerances;
pub use error::{Error, Result};

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex<f64>;

/// Dense complex matrix storage.
pub type CMat = nalgebra::DMatrix<C64>;

/// Dense complex column vector.
pub type CVec = nalgebra::DVector<C64>;

pub(crate) const SQRT_2: f64 = std::f64::consts::SQRT_2;
