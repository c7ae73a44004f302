use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::convexity::Verdict;
use crate::linalg::{HermitianMatrix, expm_i};
use crate::norms::{CartanVector, SchattenP};
use crate::sampling::{random_path_with_radius, random_unitary, trial_rng};

fn cfg() -> &'static Tolerances {
    Tolerances::shared()
}

fn schatten(p: f64) -> NormSpec {
    NormSpec::Schatten { p: SchattenP::new(p).unwrap() }
}

#[test]
fn distance_to_identity_is_zero_at_identity() {
    let d = distance_to_identity(&UnitaryMatrix::identity(3), &schatten(2.0), cfg()).unwrap();
    assert!(d.abs() < 1e-12);
}

#[test]
fn distance_diagonal_frobenius_case() {
    let u = expm_i(&HermitianMatrix::from_diagonal(&[0.4, -0.4]), 1.0);
    let d = distance_to_identity(&u, &schatten(2.0), cfg()).unwrap();
    assert!((d - 0.32f64.sqrt()).abs() < 1e-12);
}

#[test]
fn distance_is_conjugation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let z = {
        let h = crate::sampling::random_hermitian(3, &mut rng);
        HermitianMatrix::trusted(h.matrix().map(|v| v * (1.2 / h.op_norm())))
    };
    let u = expm_i(&z, 1.0);
    for spec in [
        schatten(1.0),
        schatten(2.0),
        NormSpec::KyFan { k: 2 },
        NormSpec::Orbit { mu: CartanVector::new(vec![1.0, 0.0, -1.0]).unwrap() },
    ] {
        let base = distance_to_identity(&u, &spec, cfg()).unwrap();
        for _ in 0..3 {
            let w = random_unitary(3, &mut rng);
            let conj = UnitaryMatrix::new(
                w.matrix() * u.matrix() * w.matrix().adjoint(),
                cfg(),
            )
            .unwrap();
            let d = distance_to_identity(&conj, &spec, cfg()).unwrap();
            assert!((d - base).abs() < 1e-10, "{}", spec.label());
        }
    }
}

#[test]
fn distance_refuses_outside_injectivity_radius() {
    let u = expm_i(
        &HermitianMatrix::from_diagonal(&[std::f64::consts::PI - 2e-7, 0.0]),
        1.0,
    );
    match distance_to_identity(&u, &schatten(2.0), cfg()) {
        Err(Error::OutsideInjectivity { .. }) | Err(Error::BranchCut { .. }) => {}
        other => panic!("expected injectivity refusal, got {other:?}"),
    }
}

#[test]
fn profile_under_sup_norm_is_max_angle() {
    let mut rng = trial_rng(300, 0);
    let path = random_path_with_radius(3, 1.1, 65, &mut rng).unwrap();
    let profile = distance_profile(&path, &schatten(f64::INFINITY), 101, cfg()).unwrap();
    for (i, &t) in profile.grid.iter().enumerate() {
        let angles = crate::flow::point_angles(&path.evaluate(t).unwrap(), cfg()).unwrap();
        let sup = angles.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let d = profile.distances[i].expect("inside-ball path");
        assert!((d - sup).abs() < 1e-10);
    }
}

#[test]
fn profile_certifies_convex_inside_ball() {
    let mut rng = trial_rng(301, 1);
    let path = random_path_with_radius(3, 1.25, 65, &mut rng).unwrap();
    for spec in [
        schatten(1.0),
        schatten(2.0),
        schatten(4.0),
        schatten(f64::INFINITY),
        NormSpec::KyFan { k: 2 },
        NormSpec::Orbit { mu: CartanVector::new(vec![1.2, 0.1, -1.3]).unwrap() },
    ] {
        let profile = distance_profile(&path, &spec, 201, cfg()).unwrap();
        assert!(profile.inside_ball.iter().all(|&b| b));
        assert!(
            matches!(profile.certificate.verdict, Verdict::Convex | Verdict::Linear),
            "{}: {:?}",
            spec.label(),
            profile.certificate.verdict
        );
    }
}

#[test]
fn profile_on_commuting_pair_is_piecewise_linear() {
    let path = GeodesicPath::new(
        HermitianMatrix::from_diagonal(&[0.8, -0.8]),
        HermitianMatrix::from_diagonal(&[0.05, -0.05]),
        0.0,
        1.0,
    )
    .unwrap();
    let mu = CartanVector::new(vec![1.0, -1.0]).unwrap();
    let profile = distance_profile(&path, &NormSpec::Orbit { mu }, 201, cfg()).unwrap();
    // d(t) = 2·|0.8t ± 0.05| has a kink where the angle passes zero
    assert!(
        profile.certificate.verdict == Verdict::Linear || profile.piecewise_linear,
        "{:?}",
        profile.certificate.verdict
    );
}

#[test]
fn profile_strictly_convex_for_noncommuting_orbit_case() {
    let x = HermitianMatrix::new(
        crate::CMat::from_row_slice(2, 2, &[
            crate::C64::new(0.0, 0.0), crate::C64::new(0.4, 0.0),
            crate::C64::new(0.4, 0.0), crate::C64::new(0.0, 0.0),
        ]),
        cfg(),
    )
    .unwrap();
    let y = HermitianMatrix::from_diagonal(&[0.4, -0.4]);
    let path = GeodesicPath::new(x, y, 0.0, 1.0).unwrap();
    let mu = CartanVector::new(vec![1.0, -1.0]).unwrap();
    let profile = distance_profile(&path, &NormSpec::Orbit { mu }, 201, cfg()).unwrap();
    assert_eq!(profile.certificate.verdict, Verdict::Convex);
    assert!(profile.certificate.min_second_difference > 0.0);
    assert!(!profile.finsler_only);
}

#[test]
fn profile_restricts_certificate_to_inside_ball_run() {
    // ‖y‖ keeps t = 0 outside the ball (angles ±1.8 > π/2); the path moves
    // inside once 1.8 − 1.1t < π/2
    let path = GeodesicPath::new(
        HermitianMatrix::from_diagonal(&[-1.1, 1.1]),
        HermitianMatrix::from_diagonal(&[1.8, -1.8]),
        0.0,
        1.0,
    )
    .unwrap();
    let profile = distance_profile(&path, &schatten(2.0), 101, cfg()).unwrap();
    assert!(!profile.inside_ball[0]);
    assert!(profile.inside_ball.iter().any(|&b| b));
    let cert_len = profile.certificate.grid.len();
    assert!(cert_len < 101);
    assert_eq!(
        profile.certificate.grid.len(),
        profile.inside_ball.iter().filter(|&&b| b).count(),
        "certificate covers exactly the contiguous inside-ball run here"
    );
}

#[test]
fn profile_with_no_inside_points_is_empty_domain() {
    let path = GeodesicPath::new(
        HermitianMatrix::from_diagonal(&[0.01, -0.01]),
        HermitianMatrix::from_diagonal(&[2.0, -2.0]),
        0.0,
        1.0,
    )
    .unwrap();
    assert!(matches!(
        distance_profile(&path, &schatten(2.0), 51, cfg()),
        Err(Error::EmptyDomain)
    ));
}

#[test]
fn finsler_norms_are_flagged() {
    let mut rng = trial_rng(302, 2);
    let path = random_path_with_radius(3, 1.0, 65, &mut rng).unwrap();
    let mu = CartanVector::new(vec![2.0, -0.5, -1.5]).unwrap();
    let profile = distance_profile(&path, &NormSpec::Orbit { mu }, 101, cfg()).unwrap();
    assert!(profile.finsler_only);
}
