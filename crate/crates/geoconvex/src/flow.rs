//! Smooth spectral data along a geodesic path `u(t) = e^{itx}·e^{iy}`.
//!
//! Eigenprojections are Riesz contour integrals of the resolvent evaluated by
//! trapezoidal quadrature; eigenvectors move between parameter values by the
//! direct rotation built from two projections; eigenangles are lifted
//! continuously instead of being re-wrapped per point. On top of the tracked
//! frame sit the closed-form first and second variation formulas
//!
//! ```text
//! θ_k'(t)  = ⟨x v_k, v_k⟩
//! θ_k''(t) = 2 Σ_{j≠k} sin(θ_k − θ_j)/|e^{iθ_k} − e^{iθ_j}|² · |⟨x v_k, v_j⟩|²
//! ```
//!
//! and the boundary form of the partial sums Σ_{k≤m} θ_k''.

use serde::{Deserialize, Serialize};

use crate::linalg::{
    self, ComplexMatrix, HermitianEigen, HermitianMatrix, UnitaryMatrix, chord, eig_normal,
    fix_column_phase, min_gap_of_angles, wrap_angle,
};
use crate::{C64, CMat, Error, Result, SQRT_2, Tolerances};

const TAU: f64 = 2.0 * std::f64::consts::PI;
const MAX_CONTOUR_NODES: usize = 4096;

// ---------------------------------------------------------------------------
// GeodesicPath

/// The pair of Hermitian generators of `u(t) = e^{itx}·e^{iy}` together with
/// the parameter interval. Spectral data of both generators is cached so that
/// evaluation at many `t` is cheap.
#[derive(Debug, Clone)]
pub struct GeodesicPath {
    x: HermitianMatrix,
    y: HermitianMatrix,
    t_min: f64,
    t_max: f64,
    x_eig: HermitianEigen,
    base: UnitaryMatrix,
}

#[derive(Serialize, Deserialize)]
struct PathJson {
    x: HermitianMatrix,
    y: HermitianMatrix,
    t_min: f64,
    t_max: f64,
}

impl GeodesicPath {
    pub fn new(x: HermitianMatrix, y: HermitianMatrix, t_min: f64, t_max: f64) -> Result<Self> {
        if x.dim() != y.dim() {
            return Err(Error::DimensionMismatch(x.dim(), y.dim()));
        }
        if !(t_min < t_max) || !t_min.is_finite() || !t_max.is_finite() {
            return Err(Error::InvalidInput(format!(
                "interval [{t_min}, {t_max}] must satisfy t_min < t_max"
            )));
        }
        let x_eig = HermitianEigen::new(&x);
        let base = linalg::expm_i(&y, 1.0);
        Ok(GeodesicPath { x, y, t_min, t_max, x_eig, base })
    }

    pub fn x(&self) -> &HermitianMatrix {
        &self.x
    }

    pub fn y(&self) -> &HermitianMatrix {
        &self.y
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn dim(&self) -> usize {
        self.x.dim()
    }

    /// Uniform grid with `g ≥ 2` points spanning the parameter interval.
    pub fn grid(&self, g: usize) -> Vec<f64> {
        let dt = (self.t_max - self.t_min) / (g - 1) as f64;
        (0..g).map(|i| self.t_min + dt * i as f64).collect()
    }

    /// u(t) = e^{itx}·e^{iy}; `t` must lie in the parameter interval.
    pub fn evaluate(&self, t: f64) -> Result<UnitaryMatrix> {
        if !(self.t_min..=self.t_max).contains(&t) {
            return Err(Error::OutOfRange { t, t_min: self.t_min, t_max: self.t_max });
        }
        Ok(self.evaluate_unchecked(t))
    }

    pub(crate) fn evaluate_unchecked(&self, t: f64) -> UnitaryMatrix {
        UnitaryMatrix::trusted(self.x_eig.exp_i(t).matrix() * self.base.matrix())
    }

    /// The same interval and velocity generator with the base point replaced.
    pub fn with_base(&self, y: HermitianMatrix) -> Result<GeodesicPath> {
        GeodesicPath::new(self.x.clone(), y, self.t_min, self.t_max)
    }
}

impl Serialize for GeodesicPath {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PathJson {
            x: self.x.clone(),
            y: self.y.clone(),
            t_min: self.t_min,
            t_max: self.t_max,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GeodesicPath {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = PathJson::deserialize(d)?;
        GeodesicPath::new(raw.x, raw.y, raw.t_min, raw.t_max).map_err(serde::de::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// SpectralProjector

/// Riesz projection onto the spectral subspace enclosed by a circle centered
/// on the unit circle.
#[derive(Debug, Clone)]
pub struct SpectralProjector {
    p: CMat,
    center: C64,
    radius: f64,
    multiplicity: usize,
}

impl SpectralProjector {
    pub fn matrix(&self) -> &CMat {
        &self.p
    }

    pub fn center(&self) -> C64 {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Number of enclosed eigenvalues (the trace of the projection).
    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }
}

/// Riesz projection p = (2πi)^{-1} ∮ (λ − u)^{-1} dλ over the circle of
/// center e^{i·angle} and the given radius, by trapezoidal quadrature with
/// node doubling until the idempotency residual meets the configured target.
pub fn spectral_projector(
    u: &UnitaryMatrix,
    angle: f64,
    radius: f64,
    cfg: &Tolerances,
) -> Result<SpectralProjector> {
    let spectrum = linalg::eig_unitary(u, cfg)?.angles().to_vec();
    projector_with_spectrum(u, angle, radius, cfg, &spectrum)
}

/// Same as [`spectral_projector`] with the spectrum of `u` already known, so
/// the precondition gate costs nothing extra.
fn projector_with_spectrum(
    u: &UnitaryMatrix,
    angle: f64,
    radius: f64,
    cfg: &Tolerances,
    spectrum: &[f64],
) -> Result<SpectralProjector> {
    let n = u.dim();
    let center = C64::new(0.0, angle).exp();
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidInput(format!("contour radius {radius} must be positive")));
    }

    // The boundary must stay gap-clear of the spectrum and the disk must
    // actually enclose something; the projector value itself still comes
    // from the quadrature below.
    let mut enclosed = 0usize;
    let mut boundary_dist = f64::INFINITY;
    for &theta in spectrum {
        let d = (C64::new(0.0, theta).exp() - center).norm();
        if d < radius {
            enclosed += 1;
        }
        boundary_dist = boundary_dist.min((d - radius).abs());
    }
    if enclosed == 0 {
        return Err(Error::EmptyEnclosure { angle, radius });
    }
    if boundary_dist < cfg.gap {
        return Err(Error::ContourNearSpectrum { angle, radius, dist: boundary_dist });
    }

    let mut nodes = cfg.contour_nodes.max(4);
    loop {
        let mut p = CMat::zeros(n, n);
        let weight = C64::new(radius / nodes as f64, 0.0);
        for j in 0..nodes {
            let phi = TAU * j as f64 / nodes as f64;
            let e = C64::new(0.0, phi).exp();
            let lam = center + e * radius;
            let shifted = CMat::identity(n, n) * lam - u.matrix();
            let inv = shifted
                .lu()
                .solve(&CMat::identity(n, n))
                .ok_or(Error::ContourNearSpectrum { angle, radius, dist: 0.0 })?;
            p += inv * (e * weight);
        }
        p = (&p + p.adjoint()).map(|z| z * 0.5);
        let residual = linalg::op_norm(&(&p * &p - &p));
        if residual <= cfg.contour_idempotency {
            let trace: f64 = (0..n).map(|i| p[(i, i)].re).sum();
            let mult = trace.round();
            if (trace - mult).abs() > 1e-6 || mult < 1.0 {
                return Err(Error::ContourConditioning {
                    residual: (trace - mult).abs(),
                    target: 1e-6,
                });
            }
            return Ok(SpectralProjector { p, center, radius, multiplicity: mult as usize });
        }
        if nodes >= MAX_CONTOUR_NODES {
            return Err(Error::ContourConditioning { residual, target: cfg.contour_idempotency });
        }
        nodes *= 2;
    }
}

/// The direct rotation w = e^{½ ln(ε₁ε₀)} with ε_i = 2p_i − 1, a unitary
/// mapping ran(p0) onto ran(p1). Requires ‖p1 − p0‖_∞ < 1.
pub fn direct_rotation(p0: &SpectralProjector, p1: &SpectralProjector) -> Result<ComplexMatrix> {
    let n = p0.p.nrows();
    if n != p1.p.nrows() {
        return Err(Error::DimensionMismatch(n, p1.p.nrows()));
    }
    let sep = linalg::op_norm(&(&p1.p - &p0.p));
    if sep >= 1.0 {
        return Err(Error::TransportBreakdown { t_from: f64::NAN, t_to: f64::NAN });
    }
    let id = CMat::identity(n, n);
    let eps0 = p0.p.map(|z| z * 2.0) - &id;
    let eps1 = p1.p.map(|z| z * 2.0) - &id;
    let m = eps1 * eps0;

    // w = m^{1/2} via the principal square root of each eigenvalue; m is a
    // product of two Hermitian involutions, hence unitary with spectrum away
    // from −1 under the separation condition.
    let e = eig_normal(&m)?;
    let mut scaled = e.vectors.clone();
    for (k, lam) in e.values.iter().enumerate() {
        let root = lam.sqrt();
        for i in 0..n {
            scaled[(i, k)] *= root;
        }
    }
    let w = scaled * e.vectors.adjoint();
    // One Newton–Schulz step absorbs the quadrature-level unitarity error.
    let polished = &w * (&id * C64::new(1.5, 0.0) - w.adjoint() * &w * C64::new(0.5, 0.0));
    ComplexMatrix::new(polished)
}

// ---------------------------------------------------------------------------
// EigenFrame

/// Smoothly labeled eigenangles and transported eigenvector bases on a grid.
///
/// Labels are continuous lifts, not per-point sorted wraps; per point the set
/// `{e^{iθ_k}}` still equals the spectrum of `u(t)`.
#[derive(Debug, Clone)]
pub struct EigenFrame {
    grid: Vec<f64>,
    angles: Vec<Vec<f64>>,
    vectors: Vec<CMat>,
    ball_ok: Vec<bool>,
    min_gap: Vec<f64>,
}

impl EigenFrame {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.angles.first().map_or(0, Vec::len)
    }

    /// Smooth labels at grid point `i`.
    pub fn angles_at(&self, i: usize) -> &[f64] {
        &self.angles[i]
    }

    /// Orthonormal eigenvector basis at grid point `i`, columns aligned with
    /// the labels.
    pub fn vectors_at(&self, i: usize) -> &CMat {
        &self.vectors[i]
    }

    pub fn ball_ok(&self) -> &[bool] {
        &self.ball_ok
    }

    pub fn min_gap(&self) -> &[f64] {
        &self.min_gap
    }

    /// JSON form `{"grid", "angles", "ball_ok", "min_gap"}`, optionally with
    /// the per-point bases under `"vectors"`.
    pub fn to_json(&self, include_vectors: bool) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "grid": self.grid,
            "angles": self.angles,
            "ball_ok": self.ball_ok,
            "min_gap": self.min_gap,
        });
        if include_vectors {
            let vecs: Vec<serde_json::Value> = self
                .vectors
                .iter()
                .map(|v| {
                    let cm = ComplexMatrix::new(v.clone()).expect("square basis");
                    serde_json::to_value(cm).expect("matrix json")
                })
                .collect();
            obj["vectors"] = serde_json::Value::Array(vecs);
        }
        obj
    }
}

struct PointState {
    u: UnitaryMatrix,
    angles: Vec<f64>,
    vectors: CMat,
    min_gap: f64,
}

impl PointState {
    fn wrapped_angles(&self) -> Vec<f64> {
        self.angles.iter().map(|&t| wrap_angle(t)).collect()
    }
}

/// Track eigenangles and eigenvectors over a `g`-point grid.
///
/// Labels start from the sorted decomposition at `t_min` and continue by
/// direct-rotation transport with contour radius `min(min_gap/3, 0.1)`; a
/// step that cannot be transported is bisected recursively up to the
/// configured depth. Spectra must stay distinct (min_gap above `cfg.gap`)
/// everywhere the tracker looks.
pub fn track_frame(path: &GeodesicPath, g: usize, cfg: &Tolerances) -> Result<EigenFrame> {
    if g < 2 {
        return Err(Error::GridTooShort { len: g, min: 2 });
    }
    let grid = path.grid(g);
    let n = path.dim();

    let u0 = path.evaluate_unchecked(grid[0]);
    let dec0 = linalg::eig_unitary(&u0, cfg)?;
    let gap0 = dec0.min_gap();
    if n > 1 && gap0 <= cfg.gap {
        return Err(Error::DegenerateSpectrum { t: grid[0], gap: gap0, tol: cfg.gap });
    }
    let mut state = PointState {
        u: u0,
        angles: dec0.angles().to_vec(),
        vectors: dec0.vectors().clone(),
        min_gap: gap0,
    };

    let mut angles = Vec::with_capacity(g);
    let mut vectors = Vec::with_capacity(g);
    let mut ball_ok = Vec::with_capacity(g);
    let mut min_gap = Vec::with_capacity(g);
    push_point(&state, &mut angles, &mut vectors, &mut ball_ok, &mut min_gap);

    for w in grid.windows(2) {
        state = transport_segment(path, cfg, w[0], &state, w[1], cfg.bisection_depth)?;
        push_point(&state, &mut angles, &mut vectors, &mut ball_ok, &mut min_gap);
    }

    Ok(EigenFrame { grid, angles, vectors, ball_ok, min_gap })
}

fn push_point(
    state: &PointState,
    angles: &mut Vec<Vec<f64>>,
    vectors: &mut Vec<CMat>,
    ball_ok: &mut Vec<bool>,
    min_gap: &mut Vec<f64>,
) {
    let dist = state.angles.iter().map(|&t| chord(t, 0.0)).fold(0.0, f64::max);
    ball_ok.push(dist < SQRT_2);
    min_gap.push(state.min_gap);
    angles.push(state.angles.clone());
    vectors.push(state.vectors.clone());
}

fn transport_segment(
    path: &GeodesicPath,
    cfg: &Tolerances,
    t_a: f64,
    a: &PointState,
    t_b: f64,
    depth: usize,
) -> Result<PointState> {
    let n = path.dim();
    let u_b = path.evaluate_unchecked(t_b);
    let dec_b = linalg::eig_unitary(&u_b, cfg)?;
    let gap_b = dec_b.min_gap();
    if n > 1 && gap_b <= cfg.gap {
        return Err(Error::DegenerateSpectrum { t: t_b, gap: gap_b, tol: cfg.gap });
    }

    match transport_once(cfg, a, &u_b, dec_b.angles(), gap_b) {
        Ok(state) => Ok(state),
        Err(e) if is_soft_transport_failure(&e) => {
            if depth == 0 {
                return Err(Error::TransportBreakdown { t_from: t_a, t_to: t_b });
            }
            let t_mid = 0.5 * (t_a + t_b);
            let mid = transport_segment(path, cfg, t_a, a, t_mid, depth - 1)?;
            transport_segment(path, cfg, t_mid, &mid, t_b, depth - 1)
        }
        Err(e) => Err(e),
    }
}

fn is_soft_transport_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::EmptyEnclosure { .. }
            | Error::ContourNearSpectrum { .. }
            | Error::ContourConditioning { .. }
            | Error::TransportBreakdown { .. }
            | Error::EigenConvergence { .. }
    )
}

fn transport_once(
    cfg: &Tolerances,
    a: &PointState,
    u_b: &UnitaryMatrix,
    spectrum_b: &[f64],
    gap_b: f64,
) -> Result<PointState> {
    let n = u_b.dim();
    if n == 1 {
        // One angle, one line bundle: only the lift moves.
        let lam = u_b.matrix()[(0, 0)];
        let raw = lam.arg();
        let lifted = raw + TAU * ((a.angles[0] - raw) / TAU).round();
        return Ok(PointState {
            u: u_b.clone(),
            angles: vec![lifted],
            vectors: a.vectors.clone(),
            min_gap: gap_b,
        });
    }

    let radius = (a.min_gap.min(gap_b) / 3.0).min(0.1);
    let spectrum_a = a.wrapped_angles();
    let mut new_angles = Vec::with_capacity(n);
    let mut new_vectors = CMat::zeros(n, n);

    for k in 0..n {
        let theta_a = a.angles[k];
        let p0 = projector_with_spectrum(&a.u, theta_a, radius, cfg, &spectrum_a)?;
        let p1 = projector_with_spectrum(u_b, theta_a, radius, cfg, spectrum_b)?;
        if p0.multiplicity() != 1 || p1.multiplicity() != 1 {
            return Err(Error::TransportBreakdown { t_from: f64::NAN, t_to: f64::NAN });
        }
        let w = direct_rotation(&p0, &p1)?;
        let mut v = w.matrix() * a.vectors.column(k);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::TransportBreakdown { t_from: f64::NAN, t_to: f64::NAN });
        }
        v /= C64::new(norm, 0.0);

        let lam = v.dotc(&(u_b.matrix() * &v));
        let residual = (u_b.matrix() * &v - &v * lam).norm();
        if residual > 100.0 * cfg.eig_residual {
            return Err(Error::EigenConvergence { residual });
        }
        let raw = lam.arg();
        let lifted = raw + TAU * ((theta_a - raw) / TAU).round();
        new_angles.push(lifted);
        new_vectors.set_column(k, &v);
    }

    Ok(PointState { u: u_b.clone(), angles: new_angles, vectors: new_vectors, min_gap: gap_b })
}

// ---------------------------------------------------------------------------
// variation formulas

fn frame_inner_products(frame: &EigenFrame, x: &HermitianMatrix, i: usize) -> Result<CMat> {
    if x.dim() != frame.dim() {
        return Err(Error::DimensionMismatch(x.dim(), frame.dim()));
    }
    if i >= frame.len() {
        return Err(Error::OutOfRange {
            t: i as f64,
            t_min: 0.0,
            t_max: (frame.len() - 1) as f64,
        });
    }
    let v = frame.vectors_at(i);
    // entry (j, k) holds ⟨x v_k, v_j⟩
    Ok(v.adjoint() * x.matrix() * v)
}

/// First variation θ_k' = ⟨x v_k, v_k⟩ at grid point `i`. The values are real
/// for Hermitian x; a residual imaginary part above 1e-8 marks a corrupt
/// frame.
pub fn first_variation(frame: &EigenFrame, x: &HermitianMatrix, i: usize) -> Result<Vec<f64>> {
    let m = frame_inner_products(frame, x, i)?;
    let mut out = Vec::with_capacity(frame.dim());
    for k in 0..frame.dim() {
        let z = m[(k, k)];
        if z.im.abs() > 1e-8 {
            return Err(Error::FrameCorruption { imag: z.im });
        }
        out.push(z.re);
    }
    Ok(out)
}

/// The angular second-variation kernel sin(θ_k − θ_j)/|e^{iθ_k} − e^{iθ_j}|²,
/// algebraically equal to cot((θ_k − θ_j)/2)/2.
pub fn variation_kernel(theta_k: f64, theta_j: f64) -> f64 {
    let c = chord(theta_k, theta_j);
    (theta_k - theta_j).sin() / (c * c)
}

/// Second variation θ_k'' by the closed formula, at grid point `i`.
pub fn second_variation(
    frame: &EigenFrame,
    x: &HermitianMatrix,
    i: usize,
    cfg: &Tolerances,
) -> Result<Vec<f64>> {
    if frame.min_gap()[i] <= cfg.gap {
        return Err(Error::DegenerateSpectrum {
            t: frame.grid()[i],
            gap: frame.min_gap()[i],
            tol: cfg.gap,
        });
    }
    let m = frame_inner_products(frame, x, i)?;
    let th = frame.angles_at(i);
    let n = frame.dim();
    let mut out = vec![0.0; n];
    for k in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            if j != k {
                acc += variation_kernel(th[k], th[j]) * m[(j, k)].norm_sqr();
            }
        }
        out[k] = 2.0 * acc;
    }
    Ok(out)
}

/// Boundary form of the partial sum: Σ_{k≤m} θ_k'' collapses to the pairs
/// k ≤ m < j once the antisymmetric within-block terms cancel.
pub fn partial_sum_second_variation(
    frame: &EigenFrame,
    x: &HermitianMatrix,
    i: usize,
    m: usize,
    cfg: &Tolerances,
) -> Result<f64> {
    let n = frame.dim();
    if m == 0 || m > n {
        return Err(Error::InvalidInput(format!("m = {m} must lie in 1..={n}")));
    }
    if frame.min_gap()[i] <= cfg.gap {
        return Err(Error::DegenerateSpectrum {
            t: frame.grid()[i],
            gap: frame.min_gap()[i],
            tol: cfg.gap,
        });
    }
    let prods = frame_inner_products(frame, x, i)?;
    let th = frame.angles_at(i);
    let mut acc = 0.0;
    for k in 0..m {
        for j in m..n {
            acc += variation_kernel(th[k], th[j]) * prods[(j, k)].norm_sqr();
        }
    }
    Ok(2.0 * acc)
}

/// Re-sort the smooth labels of one frame point into the wrapped,
/// non-increasing order-statistics convention of the partial-sum theorems.
pub fn sorted_wrapped_angles(frame: &EigenFrame, i: usize) -> Vec<f64> {
    let mut th: Vec<f64> = frame.angles_at(i).iter().map(|&t| wrap_angle(t)).collect();
    th.sort_by(|a, b| b.partial_cmp(a).unwrap());
    th
}

/// Sorted wrapped angles of a single unitary from a per-point eigensolve.
pub fn point_angles(u: &UnitaryMatrix, cfg: &Tolerances) -> Result<Vec<f64>> {
    Ok(linalg::eig_unitary(u, cfg)?.angles().to_vec())
}

/// Minimal pairwise chordal gap of an angle set.
pub fn angles_min_gap(angles: &[f64]) -> f64 {
    min_gap_of_angles(angles)
}

/// Deterministic re-phasing for a basis assembled outside the tracker
/// (largest-modulus component made real positive).
pub fn canonical_phases(vectors: &mut CMat) {
    for k in 0..vectors.ncols() {
        fix_column_phase(vectors, k);
    }
}
