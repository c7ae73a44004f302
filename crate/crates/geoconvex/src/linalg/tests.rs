use std::f64::consts::{FRAC_PI_2, PI};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::sampling::random_hermitian;

/// Independent exponential oracle: scaling-and-squaring with a 64-term
/// Taylor series, no spectral decomposition anywhere.
pub(crate) fn expm_taylor(m: &CMat) -> CMat {
    let n = m.nrows();
    let norm = frobenius_norm(m);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = m.map(|z| z / 2f64.powi(squarings));
    let mut result = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=64u64 {
        term = (&term * &scaled).map(|z| z / k as f64);
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

fn scale_i(m: &CMat, t: f64) -> CMat {
    m.map(|z| z * C64::new(0.0, t))
}

fn cmat(n: usize, entries: &[(f64, f64)]) -> CMat {
    CMat::from_row_slice(n, n, &entries.iter().map(|&(r, i)| C64::new(r, i)).collect::<Vec<_>>())
}

fn pauli_x() -> CMat {
    cmat(2, &[(0.0, 0.0), (1.0, 0.0), (1.0, 0.0), (0.0, 0.0)])
}

fn pauli_z() -> CMat {
    cmat(2, &[(1.0, 0.0), (0.0, 0.0), (0.0, 0.0), (-1.0, 0.0)])
}

fn scaled_to_op_norm(h: &HermitianMatrix, target: f64) -> HermitianMatrix {
    let norm = h.op_norm();
    HermitianMatrix::trusted(h.matrix().map(|z| z * (target / norm)))
}

fn cfg() -> &'static Tolerances {
    Tolerances::shared()
}

// -- expm_i ------------------------------------------------------------------

#[test]
fn expm_diagonal_at_pi_is_minus_identity() {
    let x = HermitianMatrix::from_diagonal(&[1.0, -1.0]);
    let u = expm_i(&x, PI);
    let expect = CMat::identity(2, 2) * C64::new(-1.0, 0.0);
    assert!(max_abs(&(u.matrix() - expect)) < 1e-14);
}

#[test]
fn expm_zero_is_identity() {
    let x = HermitianMatrix::zero(3);
    for t in [-2.0, 0.0, 5.5] {
        let u = expm_i(&x, t);
        assert!(max_abs(&(u.matrix() - CMat::identity(3, 3))) < 1e-15);
    }
}

#[test]
fn expm_pauli_x_quarter_turn_matches_taylor_oracle() {
    let x = HermitianMatrix::new(pauli_x(), cfg()).unwrap();
    let u = expm_i(&x, FRAC_PI_2);
    let oracle = expm_taylor(&scale_i(&pauli_x(), FRAC_PI_2));
    assert!(max_abs(&(u.matrix() - &oracle)) < 1e-13);
    // closed form e^{iπX/2} = iX
    let i_x = pauli_x().map(|z| z * C64::new(0.0, 1.0));
    assert!(max_abs(&(u.matrix() - i_x)) < 1e-13);
}

#[test]
fn expm_random_matches_taylor_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in [2usize, 3, 5] {
        let x = random_hermitian(n, &mut rng);
        let t = 0.73;
        let u = expm_i(&x, t);
        let oracle = expm_taylor(&scale_i(x.matrix(), t));
        assert!(max_abs(&(u.matrix() - oracle)) < 1e-11, "n = {n}");
    }
}

// -- principal_log_unitary ----------------------------------------------------

#[test]
fn log_identity_is_zero() {
    let u = UnitaryMatrix::identity(4);
    let z = principal_log_unitary(&u, cfg()).unwrap();
    assert!(max_abs(z.matrix()) < 1e-12);
}

#[test]
fn log_diagonal_case() {
    let angles = [PI / 4.0, -PI / 3.0];
    let u = expm_i(&HermitianMatrix::from_diagonal(&angles), 1.0);
    let z = principal_log_unitary(&u, cfg()).unwrap();
    let expect = HermitianMatrix::from_diagonal(&angles);
    assert!(max_abs(&(z.matrix() - expect.matrix())) < 1e-13);
}

#[test]
fn log_reduces_large_generator_into_principal_branch() {
    // ‖z0‖_∞ = 5 > π forces genuine branch reduction; the eigenvalues of the
    // returned z are those of z0 wrapped into (−π, π).
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let z0 = scaled_to_op_norm(&random_hermitian(4, &mut rng), 5.0);
    let u = expm_i(&z0, 1.0);
    let z = principal_log_unitary(&u, cfg()).unwrap();
    assert!(max_abs(&(z.matrix() - z0.matrix())) > 1e-3, "branch must differ");
    // e^{iz} reproduces u
    let back = expm_i(&z, 1.0);
    assert!(max_abs(&(back.matrix() - u.matrix())) < 1e-10);
    // wrapped-eigenvalue oracle
    let mut wrapped: Vec<f64> = z0.eigenvalues().iter().map(|&a| wrap_angle(a)).collect();
    wrapped.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let got = z.eigenvalues();
    for (g, w) in got.iter().zip(&wrapped) {
        assert!((g - w).abs() < 1e-10, "{g} vs {w}");
    }
}

#[test]
fn log_norm_three_stays_inside_principal_branch() {
    // op-norm 3 < π: wrapping is the identity, so the log returns z0 itself.
    let mut rng = ChaCha8Rng::seed_from_u64(78);
    let z0 = scaled_to_op_norm(&random_hermitian(3, &mut rng), 3.0);
    let u = expm_i(&z0, 1.0);
    let z = principal_log_unitary(&u, cfg()).unwrap();
    assert!(max_abs(&(z.matrix() - z0.matrix())) < 1e-10);
}

#[test]
fn log_rejects_spectrum_at_branch_cut() {
    let u = expm_i(&HermitianMatrix::from_diagonal(&[PI, 0.0]), 1.0);
    match principal_log_unitary(&u, cfg()) {
        Err(Error::BranchCut { dist, .. }) => assert!(dist < cfg().gap),
        other => panic!("expected branch-cut error, got {other:?}"),
    }
}

// -- eig_unitary ---------------------------------------------------------------

#[test]
fn eig_diagonal_example() {
    let m = cmat(
        3,
        &[
            (0.0, 1.0), (0.0, 0.0), (0.0, 0.0),
            (0.0, 0.0), (1.0, 0.0), (0.0, 0.0),
            (0.0, 0.0), (0.0, 0.0), (0.0, -1.0),
        ],
    );
    let u = UnitaryMatrix::new(m, cfg()).unwrap();
    let dec = eig_unitary(&u, cfg()).unwrap();
    let expect = [FRAC_PI_2, 0.0, -FRAC_PI_2];
    for (a, e) in dec.angles().iter().zip(&expect) {
        assert!((a - e).abs() < 1e-14);
    }
}

#[test]
fn eig_matches_2x2_closed_form() {
    // angles of e^{iy} are the eigenvalues of y when ‖y‖_∞ < π
    let y = cmat(2, &[(0.3, 0.0), (0.1, 0.0), (0.1, 0.0), (-0.2, 0.0)]);
    let u = expm_i(&HermitianMatrix::new(y, cfg()).unwrap(), 1.0);
    let dec = eig_unitary(&u, cfg()).unwrap();
    let mean = 0.05;
    let disc = (0.25f64 * 0.25 + 0.01).sqrt();
    let expect = [mean + disc, mean - disc];
    for (a, e) in dec.angles().iter().zip(&expect) {
        assert!((a - e).abs() < 1e-12, "{a} vs {e}");
    }
}

#[test]
fn eig_product_of_eigenvalues_is_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for n in [2usize, 3, 4] {
        let u = crate::sampling::random_unitary(n, &mut rng);
        let dec = eig_unitary(&u, cfg()).unwrap();
        let prod: C64 = (0..n).map(|k| dec.eigenvalue(k)).product();
        let det = u.matrix().clone().lu().determinant();
        assert!((prod - det).norm() < 1e-10, "n = {n}");
    }
}

#[test]
fn eig_orders_angles_non_increasing_and_vectors_are_eigenvectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let u = crate::sampling::random_unitary(5, &mut rng);
    let dec = eig_unitary(&u, cfg()).unwrap();
    for w in dec.angles().windows(2) {
        assert!(w[0] >= w[1]);
    }
    for k in 0..5 {
        let v = dec.vectors().column(k);
        let r = (u.matrix() * v) - v * dec.eigenvalue(k);
        assert!(r.norm() < 1e-9);
    }
}

// -- dist_to_identity ----------------------------------------------------------

#[test]
fn dist_examples() {
    assert!(dist_to_identity(&UnitaryMatrix::identity(3)) < 1e-12);
    let u = expm_i(&HermitianMatrix::from_diagonal(&[FRAC_PI_2, -FRAC_PI_2]), 1.0);
    assert!((dist_to_identity(&u) - crate::SQRT_2).abs() < 1e-12);
    let minus = expm_i(&HermitianMatrix::from_diagonal(&[PI, PI]), 1.0);
    assert!((dist_to_identity(&minus) - 2.0).abs() < 1e-12);
}

// -- commutator_norm -----------------------------------------------------------

#[test]
fn commutator_of_diagonals_vanishes() {
    let x = HermitianMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
    let y = HermitianMatrix::from_diagonal(&[-1.0, 0.5, 9.0]);
    assert!(commutator_norm(&x, &y).unwrap() < 1e-15);
}

#[test]
fn commutator_of_pauli_pair() {
    // direct multiplication oracle: [X, Z] = [[0, -2], [2, 0]], ‖·‖_F = 2√2
    let x = HermitianMatrix::new(pauli_x(), cfg()).unwrap();
    let z = HermitianMatrix::new(pauli_z(), cfg()).unwrap();
    let direct = pauli_x() * pauli_z() - pauli_z() * pauli_x();
    let oracle = frobenius_norm(&direct);
    assert!((oracle - 2.0 * crate::SQRT_2).abs() < 1e-15);
    assert!((commutator_norm(&x, &z).unwrap() - oracle).abs() < 1e-15);
}

#[test]
fn matrix_commutes_with_its_square() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let x = random_hermitian(4, &mut rng);
    let sq = HermitianMatrix::trusted(x.matrix() * x.matrix());
    assert!(commutator_norm(&x, &sq).unwrap() < 1e-12);
}

#[test]
fn commutator_dimension_mismatch() {
    let x = HermitianMatrix::zero(2);
    let y = HermitianMatrix::zero(3);
    assert!(matches!(commutator_norm(&x, &y), Err(Error::DimensionMismatch(2, 3))));
}

// -- validation ----------------------------------------------------------------

#[test]
fn hermitian_validation_rejects_asymmetric() {
    let m = cmat(2, &[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0), (0.0, 0.0)]);
    assert!(matches!(HermitianMatrix::new(m, cfg()), Err(Error::NotHermitian { .. })));
}

#[test]
fn unitary_validation_rejects_scaled_identity() {
    let m = CMat::identity(2, 2) * C64::new(2.0, 0.0);
    assert!(matches!(UnitaryMatrix::new(m, cfg()), Err(Error::NotUnitary { .. })));
}

#[test]
fn complex_matrix_must_be_square_and_finite() {
    assert!(matches!(
        ComplexMatrix::new(CMat::zeros(2, 3)),
        Err(Error::NotSquare { rows: 2, cols: 3 })
    ));
    let mut m = CMat::zeros(2, 2);
    m[(0, 1)] = C64::new(f64::NAN, 0.0);
    assert!(matches!(ComplexMatrix::new(m), Err(Error::NonFinite { row: 0, col: 1 })));
}

// -- JSON wire format ------------------------------------------------------------

#[test]
fn matrix_json_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = crate::sampling::random_unitary(3, &mut rng);
    let text = serde_json::to_string(&u).unwrap();
    let back: UnitaryMatrix = serde_json::from_str(&text).unwrap();
    assert!(max_abs(&(u.matrix() - back.matrix())) < 1e-15);
}

#[test]
fn hermitian_json_accepts_ragged_upper_triangle_im() {
    let text = r#"{"n": 2, "re": [[1.0, 0.5], [0.5, -1.0]], "im": [[0.0, 0.25], [0.0]]}"#;
    let h: HermitianMatrix = serde_json::from_str(text).unwrap();
    assert_eq!(h.matrix()[(0, 1)], C64::new(0.5, 0.25));
    assert_eq!(h.matrix()[(1, 0)], C64::new(0.5, -0.25));
}

#[test]
fn hermitian_json_omitted_im_means_real_symmetric() {
    let text = r#"{"n": 2, "re": [[1.0, 0.5], [0.5, -1.0]]}"#;
    let h: HermitianMatrix = serde_json::from_str(text).unwrap();
    assert_eq!(h.matrix()[(1, 0)], C64::new(0.5, 0.0));
}

#[test]
fn hermitian_json_rejects_non_hermitian() {
    let text = r#"{"n": 2, "re": [[1.0, 0.5], [0.7, -1.0]]}"#;
    assert!(serde_json::from_str::<HermitianMatrix>(text).is_err());
}

// -- properties -------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn round_trip_log_exp(seed in any::<u64>(), n in 2usize..=4, norm in 0.05f64..3.1) {
        // ‖z‖_∞ < π − 1e-6 ⇒ principal_log(expm_i(z, 1)) = z entrywise to 1e-8
        let norm = norm.min(std::f64::consts::PI - 1e-3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = scaled_to_op_norm(&random_hermitian(n, &mut rng), norm);
        let u = expm_i(&z, 1.0);
        let back = principal_log_unitary(&u, cfg()).unwrap();
        prop_assert!(max_abs(&(back.matrix() - z.matrix())) < 1e-8);
    }

    #[test]
    fn one_parameter_group_law(seed in any::<u64>(), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_hermitian(3, &mut rng);
        let lhs = expm_i(&x, s + t);
        let rhs = expm_i(&x, s).compose(&expm_i(&x, t)).unwrap();
        prop_assert!(max_abs(&(lhs.matrix() - rhs.matrix())) < 1e-10);
    }

    #[test]
    fn ball_membership_iff_half_pi_angles(seed in any::<u64>(), norm in 0.1f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z = scaled_to_op_norm(&random_hermitian(3, &mut rng), norm.min(3.1));
        let u = expm_i(&z, 1.0);
        let dec = eig_unitary(&u, cfg()).unwrap();
        let inside = dist_to_identity(&u) < crate::SQRT_2;
        let all_half = dec.angles().iter().all(|a| a.abs() < FRAC_PI_2 + 1e-10);
        let all_half_strict = dec.angles().iter().all(|a| a.abs() < FRAC_PI_2 - 1e-10);
        // equivalence up to the 1e-10 angle band around ±π/2
        if inside {
            prop_assert!(all_half);
        } else {
            prop_assert!(!all_half_strict);
        }
    }

    #[test]
    fn eig_residual_invariant(seed in any::<u64>(), n in 2usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = crate::sampling::random_unitary(n, &mut rng);
        let dec = eig_unitary(&u, cfg()).unwrap();
        for k in 0..n {
            let v = dec.vectors().column(k);
            let r = (u.matrix() * v) - v * dec.eigenvalue(k);
            prop_assert!(r.norm() <= 1e-9);
        }
    }
}
