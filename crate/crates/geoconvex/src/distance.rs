//! Geodesic distance to the identity, d(1, u) = ‖−i·log u‖ for a selected
//! invariant norm, valid inside the injectivity radius ‖log u‖_∞ ≤ π; plus
//! distance profiles along a path with a convexity certificate on the
//! contiguous inside-ball segment.
//!
//! Outside the injectivity radius the principal log no longer measures
//! distance, so the evaluation refuses rather than returning a non-distance.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::convexity::{self, ConvexityCertificate};
use crate::flow::{self, GeodesicPath};
use crate::linalg::{UnitaryMatrix, chord};
use crate::norms::NormSpec;
use crate::{Error, Result, Tolerances};

/// Distances d(1, u(t_i)) along a path under one norm, with ball flags and a
/// convexity certificate over the contiguous inside-ball sub-grid.
#[derive(Debug, Clone, Serialize)]
pub struct DistanceProfile {
    pub path: GeodesicPath,
    pub norm: NormSpec,
    pub grid: Vec<f64>,
    /// None where ‖log u(t)‖_∞ exceeds the injectivity radius.
    pub distances: Vec<Option<f64>>,
    pub inside_ball: Vec<bool>,
    pub certificate: ConvexityCertificate,
    /// Set when the certificate shape is linear-with-isolated-kinks, the
    /// commuting-generators signature.
    pub piecewise_linear: bool,
    /// The selected norm is positively homogeneous only.
    pub finsler_only: bool,
}

fn angles_checked(u: &UnitaryMatrix, cfg: &Tolerances) -> Result<Vec<f64>> {
    let angles = flow::point_angles(u, cfg)?;
    for &theta in &angles {
        let dist = chord(theta, PI);
        if dist < cfg.gap {
            return Err(Error::BranchCut { angle: theta, dist });
        }
    }
    Ok(angles)
}

/// d(1, u) = norm(−i·log u), defined for ‖log u‖_∞ ≤ π − injectivity margin.
pub fn distance_to_identity(u: &UnitaryMatrix, norm: &NormSpec, cfg: &Tolerances) -> Result<f64> {
    let angles = angles_checked(u, cfg)?;
    let sup = angles.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if sup > PI - cfg.injectivity_margin {
        return Err(Error::OutsideInjectivity { norm: sup, margin: cfg.injectivity_margin });
    }
    norm.eval_sorted_eigenvalues(&angles)
}

/// Per-point distances with inside-ball flags (‖log u‖_∞ < π/2, equivalently
/// ‖u − 1‖_∞ < √2) and a certificate over the longest contiguous inside-ball
/// run of grid points.
pub fn distance_profile(
    path: &GeodesicPath,
    norm: &NormSpec,
    g: usize,
    cfg: &Tolerances,
) -> Result<DistanceProfile> {
    if g < 3 {
        return Err(Error::GridTooShort { len: g, min: 3 });
    }
    norm.validate(path.dim())?;
    let grid = path.grid(g);

    let mut distances = Vec::with_capacity(g);
    let mut inside_ball = Vec::with_capacity(g);
    for &t in &grid {
        let u = path.evaluate_unchecked(t);
        let angles = flow::point_angles(&u, cfg)?;
        let sup = angles.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        inside_ball.push(sup < FRAC_PI_2);
        if sup <= PI - cfg.injectivity_margin && chord(sup, PI) >= cfg.gap {
            distances.push(Some(norm.eval_sorted_eigenvalues(&angles)?));
        } else {
            distances.push(None);
        }
    }

    let (start, len) = longest_true_run(&inside_ball);
    if len == 0 {
        return Err(Error::EmptyDomain);
    }
    if len < 3 {
        return Err(Error::GridTooShort { len, min: 3 });
    }
    let sub_grid = &grid[start..start + len];
    let sub_values: Vec<f64> = distances[start..start + len]
        .iter()
        .map(|d| d.expect("inside-ball point has a distance"))
        .collect();
    let certificate = convexity::certify(
        &sub_values,
        sub_grid,
        &format!("d(1,u(t)) [{}]", norm.label()),
        cfg,
    )?;
    let piecewise_linear = convexity::is_piecewise_linear(&certificate, path.dim(), cfg);

    Ok(DistanceProfile {
        path: path.clone(),
        norm: norm.clone(),
        grid,
        distances,
        inside_ball,
        certificate,
        piecewise_linear,
        finsler_only: norm.finsler_only(),
    })
}

fn longest_true_run(flags: &[bool]) -> (usize, usize) {
    let mut best = (0usize, 0usize);
    let mut start = 0usize;
    let mut len = 0usize;
    for (i, &ok) in flags.iter().enumerate() {
        if ok {
            if len == 0 {
                start = i;
            }
            len += 1;
            if len > best.1 {
                best = (start, len);
            }
        } else {
            len = 0;
        }
    }
    best
}

#[cfg(test)]
mod tests;
