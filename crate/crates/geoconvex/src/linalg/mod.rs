//! Dense complex matrix primitives at small fixed dimension: validated
//! Hermitian/unitary wrappers, the matrix exponential `e^{itx}`, the principal
//! logarithm of a unitary, spectral decomposition with a deterministic
//! ordering and phase convention, and a couple of matrix norms.
//!
//! Everything is a pure function of immutable inputs; tolerances come from an
//! explicitly passed [`Tolerances`] record.

mod eig;

use std::f64::consts::PI;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::{C64, CMat, Error, Result, Tolerances};
pub(crate) use eig::eig_normal;

// ---------------------------------------------------------------------------
// scalar and matrix helpers

/// Wrap an angle into (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Chordal distance |e^{ia} − e^{ib}| = 2|sin((a−b)/2)|.
pub fn chord(a: f64, b: f64) -> f64 {
    2.0 * ((a - b) * 0.5).sin().abs()
}

pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Operator (spectral) norm via the top eigenvalue of m*m.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let gram = m.adjoint() * m;
    let se = gram.symmetric_eigen();
    se.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b)).max(0.0).sqrt()
}

/// Operator norm of a Hermitian matrix: max |eigenvalue|.
pub(crate) fn herm_op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let se = m.clone().symmetric_eigen();
    se.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
}

/// Frobenius norm √(Σ |entries|²).
pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn check_finite(m: &CMat) -> Result<()> {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// JSON wire format

/// Matrix JSON used repo-wide: `{"n": int, "re": [[...]], "im": [[...]]}`,
/// row-major IEEE-754 doubles. Hermitian inputs may give `im` as ragged
/// upper-triangle rows (row i holding columns i..n−1) or omit it entirely;
/// output is always the full canonical form.
#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    im: Option<Vec<Vec<f64>>>,
}

impl MatrixJson {
    fn full(m: &CMat) -> Self {
        let n = m.nrows();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        MatrixJson { n, re, im: Some(im) }
    }

    fn require_square(rows: &[Vec<f64>], n: usize, what: &str) -> Result<()> {
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!("\"{what}\" must be a full {n}x{n} array")));
        }
        Ok(())
    }

    /// Interpret as a general complex matrix; `im` must be full if present.
    fn into_matrix(self) -> Result<CMat> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInput("matrix dimension must be positive".into()));
        }
        Self::require_square(&self.re, n, "re")?;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)].re = self.re[i][j];
            }
        }
        if let Some(im) = self.im {
            Self::require_square(&im, n, "im")?;
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)].im = im[i][j];
                }
            }
        }
        Ok(m)
    }

    /// Interpret as Hermitian input: `im` may be absent, full, or ragged
    /// upper-triangle rows completed by antisymmetry.
    fn into_hermitian_matrix(self) -> Result<CMat> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInput("matrix dimension must be positive".into()));
        }
        Self::require_square(&self.re, n, "re")?;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)].re = self.re[i][j];
            }
        }
        match self.im {
            None => {}
            Some(im) if im.iter().enumerate().all(|(i, r)| r.len() == n - i) && im.len() == n => {
                for i in 0..n {
                    for (offset, &v) in im[i].iter().enumerate() {
                        let j = i + offset;
                        m[(i, j)].im = v;
                        if j != i {
                            m[(j, i)].im = -v;
                        }
                    }
                }
            }
            Some(im) => {
                Self::require_square(&im, n, "im")?;
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)].im = im[i][j];
                    }
                }
            }
        }
        Ok(m)
    }
}

// ---------------------------------------------------------------------------
// domain types

/// A square complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    m: CMat,
}

impl ComplexMatrix {
    pub fn new(m: CMat) -> Result<Self> {
        if m.nrows() != m.ncols() || m.nrows() == 0 {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        check_finite(&m)?;
        Ok(ComplexMatrix { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn into_matrix(self) -> CMat {
        self.m
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::full(&self.m).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let m = raw.into_matrix().map_err(serde::de::Error::custom)?;
        ComplexMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

/// A Hermitian matrix; construction validates ‖A − A*‖_∞ against the
/// configured relative tolerance and stores the symmetrized part.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    base: ComplexMatrix,
}

impl HermitianMatrix {
    pub fn new(m: CMat, cfg: &Tolerances) -> Result<Self> {
        let base = ComplexMatrix::new(m)?;
        let m = base.matrix();
        let deviation = op_norm(&(m - m.adjoint()));
        let tol = cfg.hermiticity_rel * op_norm(m);
        if deviation > tol {
            return Err(Error::NotHermitian { deviation, tol });
        }
        let sym = (m + m.adjoint()).map(|z| z * 0.5);
        Ok(HermitianMatrix { base: ComplexMatrix { m: sym } })
    }

    /// Wrap a matrix known Hermitian by construction.
    pub(crate) fn trusted(m: CMat) -> Self {
        debug_assert!(op_norm(&(&m - m.adjoint())) <= 1e-10 * op_norm(&m).max(1.0));
        let sym = (&m + m.adjoint()).map(|z| z * 0.5);
        HermitianMatrix { base: ComplexMatrix { m: sym } }
    }

    /// Real diagonal matrix.
    pub fn from_diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = CMat::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        HermitianMatrix { base: ComplexMatrix { m } }
    }

    pub fn zero(n: usize) -> Self {
        HermitianMatrix { base: ComplexMatrix { m: CMat::zeros(n, n) } }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.base.matrix()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.matrix()[(i, i)].re).sum()
    }

    /// Operator norm (largest |eigenvalue|).
    pub fn op_norm(&self) -> f64 {
        herm_op_norm(self.matrix())
    }

    /// Real eigenvalues sorted non-increasing.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let se = self.matrix().clone().symmetric_eigen();
        let mut v: Vec<f64> = se.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        v
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::full(self.matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let m = raw.into_hermitian_matrix().map_err(serde::de::Error::custom)?;
        HermitianMatrix::new(m, Tolerances::shared()).map_err(serde::de::Error::custom)
    }
}

/// A unitary matrix; construction validates ‖U*U − 1‖_∞.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    base: ComplexMatrix,
}

impl UnitaryMatrix {
    pub fn new(m: CMat, cfg: &Tolerances) -> Result<Self> {
        let base = ComplexMatrix::new(m)?;
        let m = base.matrix();
        let dev = herm_op_norm(&(m.adjoint() * m - CMat::identity(m.nrows(), m.nrows())));
        if dev > cfg.unitarity {
            return Err(Error::NotUnitary { deviation: dev, tol: cfg.unitarity });
        }
        Ok(UnitaryMatrix { base })
    }

    pub(crate) fn trusted(m: CMat) -> Self {
        debug_assert!({
            let dev = herm_op_norm(&(m.adjoint() * &m - CMat::identity(m.nrows(), m.nrows())));
            dev <= 1e-9
        });
        UnitaryMatrix { base: ComplexMatrix { m } }
    }

    pub fn identity(n: usize) -> Self {
        UnitaryMatrix { base: ComplexMatrix { m: CMat::identity(n, n) } }
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn matrix(&self) -> &CMat {
        self.base.matrix()
    }

    /// Product of two unitaries.
    pub fn compose(&self, rhs: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch(self.dim(), rhs.dim()));
        }
        Ok(UnitaryMatrix::trusted(self.matrix() * rhs.matrix()))
    }
}

impl Serialize for UnitaryMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::full(self.matrix()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for UnitaryMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        let m = raw.into_matrix().map_err(serde::de::Error::custom)?;
        UnitaryMatrix::new(m, Tolerances::shared()).map_err(serde::de::Error::custom)
    }
}

/// Spectral decomposition of a unitary: eigenangles in (−π, π] sorted
/// non-increasing, with the matching orthonormal eigenvector columns under
/// the deterministic phase convention (largest-modulus component made real
/// positive).
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    angles: Vec<f64>,
    vectors: CMat,
}

impl SpectralDecomposition {
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn vectors(&self) -> &CMat {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn eigenvalue(&self, k: usize) -> C64 {
        C64::new(0.0, self.angles[k]).exp()
    }

    /// Minimal pairwise chordal distance |e^{iθ_j} − e^{iθ_k}|, j ≠ k.
    pub fn min_gap(&self) -> f64 {
        min_gap_of_angles(&self.angles)
    }
}

pub(crate) fn min_gap_of_angles(angles: &[f64]) -> f64 {
    let n = angles.len();
    let mut best = f64::INFINITY;
    for j in 0..n {
        for k in (j + 1)..n {
            best = best.min(chord(angles[j], angles[k]));
        }
    }
    best
}

// ---------------------------------------------------------------------------
// operations

/// Cached eigendecomposition of a Hermitian matrix, for evaluating
/// `exp(itx)` at many values of `t` without repeating the eigensolve.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    values: Vec<f64>,
    vectors: CMat,
}

impl HermitianEigen {
    pub fn new(x: &HermitianMatrix) -> Self {
        let se = x.matrix().clone().symmetric_eigen();
        HermitianEigen {
            values: se.eigenvalues.iter().copied().collect(),
            vectors: se.eigenvectors,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// e^{itx} assembled from the cached eigendata.
    pub fn exp_i(&self, t: f64) -> UnitaryMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &a) in self.values.iter().enumerate() {
            let phase = C64::new(0.0, t * a).exp();
            for i in 0..n {
                scaled[(i, k)] *= phase;
            }
        }
        UnitaryMatrix::trusted(scaled * self.vectors.adjoint())
    }
}

/// e^{itx} for Hermitian x, computed spectrally. The result is unitary to
/// roundoff because the eigenbasis is orthonormal.
pub fn expm_i(x: &HermitianMatrix, t: f64) -> UnitaryMatrix {
    HermitianEigen::new(x).exp_i(t)
}

/// Principal logarithm of a unitary: the Hermitian z with e^{iz} = u and all
/// eigenvalues in (−π, π). Fails if any eigenvalue of u lies within `cfg.gap`
/// of the branch cut at −1.
pub fn principal_log_unitary(u: &UnitaryMatrix, cfg: &Tolerances) -> Result<HermitianMatrix> {
    let dec = eig_unitary(u, cfg)?;
    for &theta in dec.angles() {
        let dist = chord(theta, PI);
        if dist < cfg.gap {
            return Err(Error::BranchCut { angle: theta, dist });
        }
    }
    let n = dec.dim();
    let mut scaled = dec.vectors().clone();
    for (k, &theta) in dec.angles().iter().enumerate() {
        for i in 0..n {
            scaled[(i, k)] *= C64::new(theta, 0.0);
        }
    }
    Ok(HermitianMatrix::trusted(scaled * dec.vectors().adjoint()))
}

/// Spectral decomposition of a unitary with deterministic ordering: angles
/// sorted non-increasing in (−π, π], ties broken by descending imaginary part
/// of the first nonzero eigenvector component after phase fixing.
pub fn eig_unitary(u: &UnitaryMatrix, cfg: &Tolerances) -> Result<SpectralDecomposition> {
    let e = eig_normal(u.matrix())?;
    let n = u.dim();
    let mut angles: Vec<f64> = e.values.iter().map(|z| wrap_angle(z.arg())).collect();
    let mut vectors = e.vectors;

    for k in 0..n {
        fix_column_phase(&mut vectors, k);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| angles[b].partial_cmp(&angles[a]).unwrap());
    // Deterministic tie-break within runs of equal angles.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (angles[order[start]] - angles[order[end]]).abs() <= 1e-12 {
            end += 1;
        }
        if end - start > 1 {
            let vec_ref = &vectors;
            order[start..end].sort_by(|&a, &b| {
                let ia = first_nonzero_imag(vec_ref, a);
                let ib = first_nonzero_imag(vec_ref, b);
                ib.partial_cmp(&ia).unwrap()
            });
        }
        start = end;
    }

    let mut sorted_angles = Vec::with_capacity(n);
    let mut sorted_vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_angles.push(angles[src]);
        sorted_vectors.set_column(dst, &vectors.column(src));
    }
    angles = sorted_angles;
    vectors = sorted_vectors;

    // Residual and orthonormality gates.
    let mut worst = 0.0f64;
    for k in 0..n {
        let col = vectors.column(k);
        let lam = C64::new(0.0, angles[k]).exp();
        let r = (u.matrix() * col) - col * lam;
        worst = worst.max(r.norm());
    }
    if worst > cfg.eig_residual {
        return Err(Error::EigenConvergence { residual: worst });
    }
    let gram = vectors.adjoint() * &vectors - CMat::identity(n, n);
    let ortho = max_abs(&gram);
    if ortho > cfg.orthonormality {
        return Err(Error::EigenConvergence { residual: ortho });
    }

    Ok(SpectralDecomposition { angles, vectors })
}

pub(crate) fn fix_column_phase(vectors: &mut CMat, k: usize) {
    let n = vectors.nrows();
    let mut best = 0usize;
    let mut best_norm = 0.0f64;
    for i in 0..n {
        let nm = vectors[(i, k)].norm();
        if nm > best_norm {
            best_norm = nm;
            best = i;
        }
    }
    if best_norm > 0.0 {
        let phase = vectors[(best, k)] / best_norm;
        let correction = phase.conj();
        for i in 0..n {
            vectors[(i, k)] *= correction;
        }
    }
}

fn first_nonzero_imag(vectors: &CMat, k: usize) -> f64 {
    for i in 0..vectors.nrows() {
        if vectors[(i, k)].norm() > 1e-12 {
            return vectors[(i, k)].im;
        }
    }
    0.0
}

/// ‖u − 1‖_∞ = max_k |e^{iθ_k} − 1| = 2 max_k |sin(θ_k/2)|, computed from the
/// Hermitian form 2·1 − u − u* without a full eigensolve.
pub fn dist_to_identity(u: &UnitaryMatrix) -> f64 {
    let n = u.dim();
    let m = u.matrix();
    let h = CMat::identity(n, n) * C64::new(2.0, 0.0) - m - m.adjoint();
    let se = h.symmetric_eigen();
    se.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b)).max(0.0).sqrt()
}

/// Frobenius norm of the commutator xy − yx.
pub fn commutator_norm(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    let c = x.matrix() * y.matrix() - y.matrix() * x.matrix();
    Ok(frobenius_norm(&c))
}

#[cfg(test)]
pub(crate) mod tests;
