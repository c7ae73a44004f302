//! Eigendecomposition of normal matrices via simultaneous diagonalization of
//! the Hermitian and skew-Hermitian parts.
//!
//! A normal matrix `m` commutes with its adjoint, so `h = (m + m*)/2` and
//! `k = (m − m*)/(2i)` commute and are simultaneously diagonalizable. We
//! diagonalize `h`, split near-degenerate eigenvalue clusters with the
//! compression of `k`, and finish with Jacobi-style 2×2 Schur sweeps on
//! `V* m V` to push the off-diagonal mass down to roundoff. The sweeps act on
//! `m` itself, so cluster-threshold choices cannot leak into the residual.

use crate::{C64, CMat, Error, Result};

/// Cluster width (relative to scale) below which stage-one eigenvectors are
/// treated as one invariant subspace and re-split by the skew part.
const CLUSTER_REL: f64 = 1e-6;
/// Off-diagonal target of the polish sweeps, relative to scale.
const POLISH_REL: f64 = 5e-15;
const MAX_SWEEPS: usize = 60;

pub(crate) struct NormalEigen {
    /// Eigenvalues, unordered; callers sort by their own convention.
    pub values: Vec<C64>,
    /// Orthonormal eigenvector columns, aligned with `values`.
    pub vectors: CMat,
}

pub(crate) fn eig_normal(m: &CMat) -> Result<NormalEigen> {
    let n = m.nrows();
    if n == 0 {
        return Ok(NormalEigen { values: vec![], vectors: CMat::zeros(0, 0) });
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0f64, f64::max);

    let adj = m.adjoint();
    let herm = (m + &adj).map(|z| z * 0.5);
    let skew = (m - &adj).map(|z| z * C64::new(0.0, -0.5));

    // Stage one: eigenbasis of the Hermitian part, sorted by eigenvalue.
    let se = herm.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[b].partial_cmp(&se.eigenvalues[a]).unwrap());
    let mut vectors = CMat::zeros(n, n);
    let mut hvals = vec![0.0f64; n];
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &se.eigenvectors.column(src));
        hvals[dst] = se.eigenvalues[src];
    }

    // Stage two: within each near-degenerate cluster of `h`, diagonalize the
    // compression of `k` to separate eigenvalues that share a real part.
    let ctol = CLUSTER_REL * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && hvals[end - 1] - hvals[end] <= ctol {
            end += 1;
        }
        if end - start > 1 {
            let sub = vectors.columns(start, end - start).into_owned();
            let comp = sub.adjoint() * &skew * &sub;
            let comp = symmetrize(&comp);
            let se2 = comp.symmetric_eigen();
            let mut ord2: Vec<usize> = (0..(end - start)).collect();
            ord2.sort_by(|&a, &b| se2.eigenvalues[b].partial_cmp(&se2.eigenvalues[a]).unwrap());
            let mut w = CMat::zeros(end - start, end - start);
            for (dst, &src) in ord2.iter().enumerate() {
                w.set_column(dst, &se2.eigenvectors.column(src));
            }
            let fixed = &sub * &w;
            for (offset, col) in fixed.column_iter().enumerate() {
                vectors.set_column(start + offset, &col);
            }
        }
        start = end;
    }

    // Polish: Jacobi sweeps of exact 2×2 Schur rotations on V* m V.
    let mut diag_form = vectors.adjoint() * m * &vectors;
    let target = POLISH_REL * scale * (n as f64);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_max(&diag_form) <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let b = diag_form[(p, q)];
                let c = diag_form[(q, p)];
                if b.norm() <= target / (n as f64) && c.norm() <= target / (n as f64) {
                    continue;
                }
                let rot = schur_2x2(
                    diag_form[(p, p)],
                    diag_form[(p, q)],
                    diag_form[(q, p)],
                    diag_form[(q, q)],
                );
                apply_rotation(&mut diag_form, &mut vectors, p, q, &rot);
            }
        }
    }
    if !converged && off_diagonal_max(&diag_form) > 1e3 * target {
        return Err(Error::EigenConvergence { residual: off_diagonal_max(&diag_form) });
    }

    let values = (0..n).map(|i| diag_form[(i, i)]).collect();
    Ok(NormalEigen { values, vectors })
}

fn symmetrize(m: &CMat) -> CMat {
    (m + m.adjoint()).map(|z| z * 0.5)
}

fn off_diagonal_max(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    worst
}

/// Unitary 2×2 rotation whose adjoint conjugation triangularizes
/// [[a, b], [c, d]]; for a normal block this diagonalizes it.
struct Rotation {
    r00: C64,
    r01: C64,
    r10: C64,
    r11: C64,
}

fn schur_2x2(a: C64, b: C64, c: C64, d: C64) -> Rotation {
    let tr = a + d;
    let disc = ((a - d) * (a - d) + b * c * 4.0).sqrt();
    let lam1 = (tr + disc) * 0.5;
    let lam2 = (tr - disc) * 0.5;

    // Candidate eigenvectors for both eigenvalues from both matrix rows;
    // pick the best-conditioned one.
    let mut best: Option<(f64, C64, C64)> = None;
    for lam in [lam1, lam2] {
        for (v0, v1) in [(b, lam - a), (lam - d, c)] {
            let nrm = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
            if best.as_ref().map_or(true, |(bn, _, _)| nrm > *bn) {
                best = Some((nrm, v0, v1));
            }
        }
    }
    let (nrm, v0, v1) = best.unwrap();
    if nrm == 0.0 {
        // Already diagonal to machine precision.
        return Rotation {
            r00: C64::new(1.0, 0.0),
            r01: C64::new(0.0, 0.0),
            r10: C64::new(0.0, 0.0),
            r11: C64::new(1.0, 0.0),
        };
    }
    let v0 = v0 / nrm;
    let v1 = v1 / nrm;
    Rotation { r00: v0, r10: v1, r01: -v1.conj(), r11: v0.conj() }
}

fn apply_rotation(w: &mut CMat, v: &mut CMat, p: usize, q: usize, r: &Rotation) {
    let n = w.nrows();
    // W ← R* W (rows p, q)
    for j in 0..n {
        let wp = w[(p, j)];
        let wq = w[(q, j)];
        w[(p, j)] = r.r00.conj() * wp + r.r10.conj() * wq;
        w[(q, j)] = r.r01.conj() * wp + r.r11.conj() * wq;
    }
    // W ← W R (columns p, q)
    for i in 0..n {
        let wp = w[(i, p)];
        let wq = w[(i, q)];
        w[(i, p)] = wp * r.r00 + wq * r.r10;
        w[(i, q)] = wp * r.r01 + wq * r.r11;
    }
    // V ← V R
    for i in 0..v.nrows() {
        let vp = v[(i, p)];
        let vq = v[(i, q)];
        v[(i, p)] = vp * r.r00 + vq * r.r10;
        v[(i, q)] = vp * r.r01 + vq * r.r11;
    }
}
