//! Seeded random matrices and geodesic paths with a prescribed ball radius.
//!
//! All sampling is deterministic under a fixed seed; parallel drivers derive
//! one child seed per trial so results do not depend on the worker count.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::flow::GeodesicPath;
use crate::linalg::HermitianMatrix;
use crate::{C64, CMat, Result};

/// Mix a base seed with a trial index into an independent child seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(base: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, index))
}

/// GUE-convention Hermitian matrix: N(0,1) diagonal, (a+ib)/√2 off-diagonal.
pub(crate) fn gue_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let mut m = CMat::zeros(n, n);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        let d: f64 = StandardNormal.sample(rng);
        m[(i, i)] = C64::new(d, 0.0);
        for j in (i + 1)..n {
            let a: f64 = StandardNormal.sample(rng);
            let b: f64 = StandardNormal.sample(rng);
            let z = C64::new(a * inv_sqrt2, b * inv_sqrt2);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Random Hermitian matrix with GUE entries.
pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    HermitianMatrix::trusted(gue_hermitian(n, rng))
}

/// Random traceless Hermitian matrix.
pub fn random_traceless_hermitian<R: Rng>(n: usize, rng: &mut R) -> HermitianMatrix {
    let mut m = gue_hermitian(n, rng);
    let tr: C64 = (0..n).map(|i| m[(i, i)]).sum();
    let shift = tr / (n as f64);
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    HermitianMatrix::trusted(m)
}

/// Random unitary e^{ih} for GUE h (deterministic under the rng; not Haar,
/// which no test here needs).
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> crate::linalg::UnitaryMatrix {
    let h = random_hermitian(n, rng);
    crate::linalg::expm_i(&h, 1.0)
}

/// A pair of Hermitian matrices diagonal in one common random basis.
pub fn random_commuting_pair<R: Rng>(n: usize, rng: &mut R) -> (HermitianMatrix, HermitianMatrix) {
    let basis = gue_hermitian(n, rng).symmetric_eigen().eigenvectors;
    let mut d1 = CMat::zeros(n, n);
    let mut d2 = CMat::zeros(n, n);
    for i in 0..n {
        let a: f64 = StandardNormal.sample(rng);
        let b: f64 = StandardNormal.sample(rng);
        d1[(i, i)] = C64::new(a, 0.0);
        d2[(i, i)] = C64::new(b, 0.0);
    }
    let x = &basis * d1 * basis.adjoint();
    let y = &basis * d2 * basis.adjoint();
    (HermitianMatrix::trusted(x), HermitianMatrix::trusted(y))
}

/// ‖u − 1‖_∞ by power iteration on the Hermitian form 2·1 − u − u*; accurate
/// enough to steer the radius bisection, which is re-verified exactly.
fn dist_to_identity_fast(u: &CMat) -> f64 {
    let n = u.nrows();
    let h = CMat::identity(n, n) * C64::new(2.0, 0.0) - u - u.adjoint();
    let mut v = crate::CVec::from_fn(n, |i, _| C64::new(1.0, 0.1 + i as f64 * 0.3));
    let mut rho = 0.0f64;
    for _ in 0..60 {
        let w = &h * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next: f64 = v.dotc(&w).re / v.norm_squared();
        v = w / C64::new(norm, 0.0);
        if (next - rho).abs() <= 1e-13 * next.abs().max(1.0) {
            rho = next;
            break;
        }
        rho = next;
    }
    rho.max(0.0).sqrt()
}

/// Maximum of ‖u(t) − 1‖_∞ over the grid, for the scaled pair (s·x, s·y).
fn scaled_max_dist(
    x: &CMat,
    y: &CMat,
    s: f64,
    grid: &[f64],
) -> f64 {
    let xs = HermitianMatrix::trusted(x.map(|z| z * s));
    let ys = HermitianMatrix::trusted(y.map(|z| z * s));
    let xe = crate::linalg::HermitianEigen::new(&xs);
    let base = crate::linalg::expm_i(&ys, 1.0);
    grid.iter()
        .map(|&t| {
            let u = xe.exp_i(t).matrix() * base.matrix();
            dist_to_identity_fast(&u)
        })
        .fold(0.0, f64::max)
}

/// Draw a random pair (x, y) and rescale both by a common factor so that
/// max_t ‖e^{itx}e^{iy} − 1‖_∞ over the G-point grid on [0, 1] hits `target`.
pub fn random_path_with_radius<R: Rng>(
    n: usize,
    target: f64,
    grid_points: usize,
    rng: &mut R,
) -> Result<GeodesicPath> {
    assert!(target > 0.0 && target < 2.0, "target radius must be in (0, 2)");
    let x0 = gue_hermitian(n, rng);
    let y0 = gue_hermitian(n, rng);
    let grid: Vec<f64> = (0..grid_points)
        .map(|i| i as f64 / (grid_points - 1) as f64)
        .collect();

    // Grow until the target is bracketed, then bisect the common scale.
    let mut hi = 0.5f64;
    let mut guard = 0;
    while scaled_max_dist(&x0, &y0, hi, &grid) < target {
        hi *= 2.0;
        guard += 1;
        if guard > 60 {
            break;
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..55 {
        let mid = 0.5 * (lo + hi);
        if scaled_max_dist(&x0, &y0, mid, &grid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let x = HermitianMatrix::trusted(x0.map(|z| z * s));
    let y = HermitianMatrix::trusted(y0.map(|z| z * s));
    GeodesicPath::new(x, y, 0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dist_to_identity;

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, 0);
        let b = derive_seed(7, 1);
        let c = derive_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn path_radius_hits_target() {
        let mut rng = trial_rng(123, 0);
        let target = 1.1;
        let path = random_path_with_radius(3, target, 101, &mut rng).unwrap();
        let max = (0..101)
            .map(|i| {
                let t = i as f64 / 100.0;
                dist_to_identity(&path.evaluate(t).unwrap())
            })
            .fold(0.0f64, f64::max);
        assert!((max - target).abs() < 1e-6, "max dist {max} vs target {target}");
    }

    #[test]
    fn commuting_pair_commutes() {
        let mut rng = trial_rng(5, 5);
        let (x, y) = random_commuting_pair(4, &mut rng);
        let c = crate::linalg::commutator_norm(&x, &y).unwrap();
        assert!(c < 1e-12, "commutator {c}");
    }
}
