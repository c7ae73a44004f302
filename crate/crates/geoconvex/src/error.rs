use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by the library.
///
/// [`Error::is_numeric`] separates input-validation failures from numeric
/// failures discovered mid-computation; the CLI maps the two classes to
/// different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (deviation {deviation:.3e} exceeds {tol:.3e})")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("matrix is not unitary (deviation {deviation:.3e} exceeds {tol:.3e})")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("eigenvalue at angle {angle:.9} rad lies within {dist:.3e} of the branch cut at -1")]
    BranchCut { angle: f64, dist: f64 },

    #[error("eigensolver did not converge (residual {residual:.3e})")]
    EigenConvergence { residual: f64 },

    #[error("parameter t = {t} outside [{t_min}, {t_max}]")]
    OutOfRange { t: f64, t_min: f64, t_max: f64 },

    #[error("contour at angle {angle:.6}, radius {radius:.3e} passes within {dist:.3e} of the spectrum")]
    ContourNearSpectrum { angle: f64, radius: f64, dist: f64 },

    #[error("contour at angle {angle:.6}, radius {radius:.3e} encloses no eigenvalue")]
    EmptyEnclosure { angle: f64, radius: f64 },

    #[error("contour quadrature stalled at idempotency residual {residual:.3e} (target {target:.1e})")]
    ContourConditioning { residual: f64, target: f64 },

    #[error("spectral gap {gap:.3e} below tolerance {tol:.3e} at t = {t}")]
    DegenerateSpectrum { t: f64, gap: f64, tol: f64 },

    #[error("eigenvector transport broke down on [{t_from}, {t_to}]; refine the grid by a factor of 2")]
    TransportBreakdown { t_from: f64, t_to: f64 },

    #[error("frame eigenvectors corrupt: diagonal form value has imaginary part {imag:.3e}")]
    FrameCorruption { imag: f64 },

    #[error("grid is not uniform (relative deviation {deviation:.3e})")]
    NonUniformGrid { deviation: f64 },

    #[error("grid too short: {len} points (need at least {min})")]
    GridTooShort { len: usize, min: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("perturbation failed after {attempts} attempts (best gap seen {best_gap:.3e})")]
    PerturbationFailed { attempts: usize, best_gap: f64 },

    #[error("path leaves the ball ‖u(t)-1‖ < √2 at t = {t} (distance {dist:.6})")]
    BallViolation { t: f64, dist: f64 },

    #[error("‖log u‖_∞ = {norm:.6} exceeds the injectivity radius π − {margin:.1e}")]
    OutsideInjectivity { norm: f64, margin: f64 },

    #[error("no grid point lies inside the convexity ball")]
    EmptyDomain,
}

impl Error {
    /// True for failures of the numeric machinery (as opposed to invalid
    /// input that never entered a computation).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::BranchCut { .. }
                | Error::EigenConvergence { .. }
                | Error::ContourNearSpectrum { .. }
                | Error::ContourConditioning { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::TransportBreakdown { .. }
                | Error::FrameCorruption { .. }
                | Error::PerturbationFailed { .. }
                | Error::BallViolation { .. }
                | Error::OutsideInjectivity { .. }
                | Error::EmptyDomain
        )
    }
}
