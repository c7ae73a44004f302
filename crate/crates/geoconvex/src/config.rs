//! The single record of numeric tolerances used across the crate.
//!
//! Every threshold has a stated default and can be overridden globally by
//! passing a modified record; there is no other shared state.

use serde::{Deserialize, Serialize};

/// Named tolerances with their defaults.
///
/// Deserializes from a flat JSON object; absent fields keep their defaults,
/// so a config file only needs the values it changes.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Hermiticity check: ‖A − A*‖_∞ ≤ hermiticity_rel × ‖A‖_∞ (entrywise max).
    pub hermiticity_rel: f64,
    /// Unitarity check: ‖U*U − 1‖_∞ ≤ unitarity.
    pub unitarity: f64,
    /// Minimal admissible distance between distinct spectral points, and the
    /// exclusion zone around the logarithm branch cut at −1.
    pub gap: f64,
    /// Residual bound ‖U v − λ v‖ accepted from the eigensolver.
    pub eig_residual: f64,
    /// Orthonormality bound on eigenvector bases.
    pub orthonormality: f64,
    /// Convexity verdicts: second differences within ±convexity count as zero
    /// (units of the Δt²-normalized second difference).
    pub convexity: f64,
    /// Accepted distance of polar-dual samples from ∂B°.
    pub dual_boundary: f64,
    /// Safety margin below √2 required before perturbing a path.
    pub perturb_margin: f64,
    /// Distance computations require ‖log u‖_∞ ≤ π − injectivity_margin.
    pub injectivity_margin: f64,
    /// Initial trapezoidal node count on spectral contours.
    pub contour_nodes: usize,
    /// Projector idempotency target; node count doubles until it is met.
    pub contour_idempotency: f64,
    /// Maximal recursive bisection depth for eigenvector transport.
    pub bisection_depth: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermiticity_rel: 1e-12,
            unitarity: 1e-10,
            gap: 1e-8,
            eig_residual: 1e-9,
            orthonormality: 1e-10,
            convexity: 1e-7,
            dual_boundary: 1e-6,
            perturb_margin: 1e-3,
            injectivity_margin: 1e-6,
            contour_nodes: 64,
            contour_idempotency: 1e-10,
            bisection_depth: 20,
        }
    }
}

impl Tolerances {
    /// A shared instance with all defaults.
    pub fn shared() -> &'static Tolerances {
        static DEFAULTS: std::sync::OnceLock<Tolerances> = std::sync::OnceLock::new();
        DEFAULTS.get_or_init(Tolerances::default)
    }
}
