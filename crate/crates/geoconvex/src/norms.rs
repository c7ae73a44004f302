//! The invariant-norm zoo on Hermitian matrices — Ky-Fan, α-weighted,
//! Schatten-p and orbit norms — plus the Cartan/Weyl machinery: majorization
//! membership, the rearrangement supremum, and sampled polar-dual boundaries
//! for the sup-of-orbit-norms reconstruction.
//!
//! The su(n) Cartan subalgebra is modeled as traceless real sorted vectors
//! with coordinate permutations as the Weyl group; the Killing form is
//! replaced by the trace pairing, which rescales every μ by a positive
//! constant and leaves all convexity and argmax statements unchanged.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{HermitianMatrix, UnitaryMatrix};
use crate::{Error, Result, Tolerances};

// ---------------------------------------------------------------------------
// domain types

/// Non-increasing nonnegative weights with α₁ > 0 (membership in ℝⁿ₊,↓).
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaWeights {
    alpha: Vec<f64>,
}

impl AlphaWeights {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() || alpha[0] <= 0.0 {
            return Err(Error::InvalidInput("α must be non-empty with α₁ > 0".into()));
        }
        if alpha.iter().any(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::InvalidInput("α entries must be finite and ≥ 0".into()));
        }
        if alpha.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("α must be sorted non-increasing".into()));
        }
        Ok(AlphaWeights { alpha })
    }

    pub fn dim(&self) -> usize {
        self.alpha.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }
}

impl Serialize for AlphaWeights {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.alpha.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AlphaWeights {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        AlphaWeights::new(Vec::<f64>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// A point of the positive Weyl chamber: a real vector sorted non-increasing,
/// traceless when it models su(n) Cartan data.
#[derive(Debug, Clone, PartialEq)]
pub struct CartanVector {
    v: Vec<f64>,
    traceless: bool,
}

impl CartanVector {
    /// Accepts a sorted (non-increasing) vector; tracelessness is detected.
    pub fn new(v: Vec<f64>) -> Result<Self> {
        if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("Cartan vector must be non-empty and finite".into()));
        }
        if v.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidInput("Cartan vector must be sorted non-increasing".into()));
        }
        let scale = v.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        let traceless = v.iter().sum::<f64>().abs() <= 1e-12 * scale;
        Ok(CartanVector { v, traceless })
    }

    /// Weyl-projects an arbitrary vector into the chamber by sorting.
    pub fn from_unsorted(mut v: Vec<f64>) -> Result<Self> {
        v.sort_by(|a, b| b.partial_cmp(a).unwrap());
        CartanVector::new(v)
    }

    /// As [`CartanVector::new`] but requires Σv = 0 (to 1e-12, scaled).
    pub fn new_traceless(v: Vec<f64>) -> Result<Self> {
        let c = CartanVector::new(v)?;
        if !c.traceless {
            return Err(Error::InvalidInput("Cartan vector must be traceless".into()));
        }
        Ok(c)
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.v
    }

    pub fn traceless(&self) -> bool {
        self.traceless
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.v.windows(2).all(|w| w[0] > w[1])
    }

    /// μ is symmetric when its Weyl orbit contains −μ, i.e. μ_i = −μ_{n+1−i};
    /// only then is the orbit functional a genuine norm rather than a Finsler
    /// one.
    pub fn is_symmetric(&self) -> bool {
        let n = self.v.len();
        let scale = self.v.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
        (0..n).all(|i| (self.v[i] + self.v[n - 1 - i]).abs() <= 1e-12 * scale)
    }
}

impl Serialize for CartanVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CartanVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CartanVector::new(Vec::<f64>::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Schatten exponent: a real p ≥ 1 or ∞ (an explicit branch, not a limit).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SchattenP {
    Finite(f64),
    Infinity,
}

impl SchattenP {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(SchattenP::Infinity);
        }
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidInput(format!("Schatten exponent p = {p} must be ≥ 1")));
        }
        Ok(SchattenP::Finite(p))
    }
}

impl Serialize for SchattenP {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            SchattenP::Finite(p) => s.serialize_f64(*p),
            SchattenP::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for SchattenP {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(p) => SchattenP::new(p).map_err(serde::de::Error::custom),
            Raw::Text(t) if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") => {
                Ok(SchattenP::Infinity)
            }
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid Schatten p: {t:?}"))),
        }
    }
}

/// Tagged selection of one invariant norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum NormSpec {
    KyFan { k: usize },
    Alpha { alpha: AlphaWeights },
    Schatten { p: SchattenP },
    Orbit { mu: CartanVector },
    SupFamily { family: Vec<CartanVector> },
}

impl NormSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        match self {
            NormSpec::KyFan { k } => {
                if *k < 1 || *k > n {
                    return Err(Error::InvalidInput(format!("Ky-Fan k = {k} outside 1..={n}")));
                }
            }
            NormSpec::Alpha { alpha } => {
                if alpha.dim() != n {
                    return Err(Error::DimensionMismatch(alpha.dim(), n));
                }
            }
            NormSpec::Schatten { .. } => {}
            NormSpec::Orbit { mu } => {
                if mu.dim() != n {
                    return Err(Error::DimensionMismatch(mu.dim(), n));
                }
            }
            NormSpec::SupFamily { family } => {
                if family.is_empty() {
                    return Err(Error::InvalidInput("sup family must be non-empty".into()));
                }
                for mu in family {
                    if mu.dim() != n {
                        return Err(Error::DimensionMismatch(mu.dim(), n));
                    }
                }
            }
        }
        Ok(())
    }

    /// Evaluate on eigenvalues already sorted non-increasing.
    pub fn eval_sorted_eigenvalues(&self, eigs: &[f64]) -> Result<f64> {
        self.validate(eigs.len())?;
        Ok(match self {
            NormSpec::KyFan { k } => {
                let s = abs_sorted(eigs);
                s[..*k].iter().sum()
            }
            NormSpec::Alpha { alpha } => {
                let s = abs_sorted(eigs);
                s.iter().zip(alpha.as_slice()).map(|(v, a)| v * a).sum()
            }
            NormSpec::Schatten { p } => {
                let s = abs_sorted(eigs);
                match p {
                    SchattenP::Infinity => s[0],
                    SchattenP::Finite(p) => {
                        s.iter().map(|v| v.powf(*p)).sum::<f64>().powf(1.0 / *p)
                    }
                }
            }
            NormSpec::Orbit { mu } => sorted_pairing(eigs, mu.as_slice()),
            NormSpec::SupFamily { family } => family
                .iter()
                .map(|mu| sorted_pairing(eigs, mu.as_slice()))
                .fold(f64::NEG_INFINITY, f64::max),
        })
    }

    /// Evaluate on a Hermitian matrix through its spectrum.
    pub fn eval(&self, x: &HermitianMatrix) -> Result<f64> {
        self.eval_sorted_eigenvalues(&x.eigenvalues())
    }

    /// Orbit functionals with non-symmetric weights are positively
    /// homogeneous only; outputs label them `Finsler`.
    pub fn finsler_only(&self) -> bool {
        match self {
            NormSpec::Orbit { mu } => !mu.is_symmetric(),
            NormSpec::SupFamily { family } => !family_is_symmetric(family),
            _ => false,
        }
    }

    /// Short human-readable tag used in output labels.
    pub fn label(&self) -> String {
        match self {
            NormSpec::KyFan { k } => format!("kyfan({k})"),
            NormSpec::Alpha { .. } => "alpha".into(),
            NormSpec::Schatten { p } => match p {
                SchattenP::Infinity => "schatten(inf)".into(),
                SchattenP::Finite(p) => format!("schatten({p})"),
            },
            NormSpec::Orbit { mu } => {
                if mu.is_symmetric() {
                    "orbit".into()
                } else {
                    "orbit[Finsler]".into()
                }
            }
            NormSpec::SupFamily { family } => {
                if family_is_symmetric(family) {
                    format!("supfamily({})", family.len())
                } else {
                    format!("supfamily[Finsler]({})", family.len())
                }
            }
        }
    }
}

/// A family is symmetric as a set when it is closed under μ ↦ −reverse(μ).
fn family_is_symmetric(family: &[CartanVector]) -> bool {
    family.iter().all(|mu| {
        let neg: Vec<f64> = mu.as_slice().iter().rev().map(|v| -v).collect();
        family.iter().any(|other| {
            other
                .as_slice()
                .iter()
                .zip(&neg)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0))
        })
    })
}

fn abs_sorted(v: &[f64]) -> Vec<f64> {
    let mut s: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

fn sorted_pairing(sorted_desc: &[f64], mu: &[f64]) -> f64 {
    sorted_desc.iter().zip(mu).map(|(a, b)| a * b).sum()
}

// ---------------------------------------------------------------------------
// operations

/// Absolute eigenvalues sorted non-increasing — the singular values of a
/// Hermitian matrix.
pub fn singular_values(x: &HermitianMatrix) -> Vec<f64> {
    abs_sorted(&x.eigenvalues())
}

/// Ky-Fan norm: sum of the k largest singular values.
pub fn ky_fan(x: &HermitianMatrix, k: usize) -> Result<f64> {
    NormSpec::KyFan { k }.eval(x)
}

/// Σ α_i σ_i(x); the telescoping identity over Ky-Fan norms holds exactly.
pub fn alpha_norm(x: &HermitianMatrix, alpha: &AlphaWeights) -> Result<f64> {
    NormSpec::Alpha { alpha: alpha.clone() }.eval(x)
}

/// Schatten norm (Σ σ_i^p)^{1/p}, with p = ∞ the spectral norm.
pub fn schatten(x: &HermitianMatrix, p: SchattenP) -> Result<f64> {
    NormSpec::Schatten { p }.eval(x)
}

/// Orbit functional Σ x_{(i)} μ_i over the sorted eigenvalues of x; a norm
/// precisely when μ is symmetric, a Finsler norm otherwise.
pub fn orbit_norm(x: &HermitianMatrix, mu: &CartanVector) -> Result<f64> {
    NormSpec::Orbit { mu: mu.clone() }.eval(x)
}

/// Pointwise supremum of orbit functionals over a non-empty family.
pub fn sup_family_norm(x: &HermitianMatrix, family: &[CartanVector]) -> Result<f64> {
    NormSpec::SupFamily { family: family.to_vec() }.eval(x)
}

/// Result of the rearrangement supremum sup_w ⟨x, w.y⟩.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RearrangementSup {
    pub value: f64,
    /// False when n > 8 forced the sorted-pairing shortcut instead of the
    /// exhaustive maximum.
    pub exhaustive: bool,
}

/// Maximum of Σ x_i y_{σ(i)} over permutations σ, exhaustively for n ≤ 8;
/// equals the sorted pairing when both inputs sit in the same chamber.
pub fn rearrangement_sup(x: &CartanVector, y: &CartanVector) -> Result<RearrangementSup> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch(x.dim(), y.dim()));
    }
    let n = x.dim();
    if n > 8 {
        return Ok(RearrangementSup {
            value: sorted_pairing(x.as_slice(), y.as_slice()),
            exhaustive: false,
        });
    }
    use itertools::Itertools;
    let xs = x.as_slice();
    let ys = y.as_slice();
    let value = (0..n)
        .permutations(n)
        .map(|perm| perm.iter().enumerate().map(|(i, &j)| xs[i] * ys[j]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RearrangementSup { value, exhaustive: true })
}

/// Majorization membership of Kostant's theorem: the diagonal of u·x·u* lies
/// in the convex hull of the permuted spectrum of x, tested as dominance of
/// sorted partial sums with equality at n (tolerance 1e-9).
pub fn kostant_membership(x: &HermitianMatrix, u: &UnitaryMatrix) -> Result<bool> {
    if x.dim() != u.dim() {
        return Err(Error::DimensionMismatch(x.dim(), u.dim()));
    }
    const TOL: f64 = 1e-9;
    let n = x.dim();
    let conj = u.matrix() * x.matrix() * u.matrix().adjoint();
    let mut diag: Vec<f64> = (0..n).map(|i| conj[(i, i)].re).collect();
    diag.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let spec = x.eigenvalues();

    let mut run_diag = 0.0;
    let mut run_spec = 0.0;
    for k in 0..n {
        run_diag += diag[k];
        run_spec += spec[k];
        if k + 1 < n {
            if run_diag > run_spec + TOL {
                return Ok(false);
            }
        } else if (run_diag - run_spec).abs() > TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// polar-dual boundary sampling

/// Boundary samples of the polar dual, one per chamber direction that did not
/// degenerate.
#[derive(Debug, Clone, Serialize)]
pub struct PolarDualBoundary {
    pub points: Vec<CartanVector>,
    /// Directions dropped because the norm degenerated on them.
    pub skipped: usize,
}

/// Sample ∂B° ∩ 𝔥⁺ for the unit ball B of the given norm: each traceless
/// sorted unit direction d maps to d/h(d), h being the support function of
/// B ∩ Cartan. Ky-Fan, α and Schatten norms use their exact dual gauges; the
/// orbit families use a chamber search (exact via a unimodal line search for
/// n ≤ 3, sampled with local refinement above).
pub fn polar_dual_boundary(
    norm: &NormSpec,
    n: usize,
    resolution: usize,
    cfg: &Tolerances,
) -> Result<PolarDualBoundary> {
    if n < 2 {
        return Err(Error::InvalidInput("polar dual sampling needs n ≥ 2".into()));
    }
    if resolution == 0 {
        return Err(Error::InvalidInput("resolution must be positive".into()));
    }
    norm.validate(n)?;

    let mut points = Vec::new();
    let mut skipped = 0usize;
    for d in chamber_directions(n, resolution) {
        let h = support_function(norm, &d, resolution);
        if !(h.is_finite() && h > cfg.dual_boundary) {
            skipped += 1;
            continue;
        }
        let point: Vec<f64> = d.iter().map(|v| v / h).collect();
        points.push(CartanVector::new(point)?);
    }
    Ok(PolarDualBoundary { points, skipped })
}

/// Unit directions in the positive chamber (traceless, sorted, ‖·‖₂ = 1).
fn chamber_directions(n: usize, resolution: usize) -> Vec<Vec<f64>> {
    match n {
        2 => vec![vec![std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2]],
        3 => {
            // The traceless plane is spanned by b1, b2; the chamber is the
            // arc φ ∈ (−π/6, π/6).
            let b1 = [1.0 / 2f64.sqrt(), 0.0, -1.0 / 2f64.sqrt()];
            let b2 = [1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt()];
            let span = std::f64::consts::PI / 3.0;
            (0..resolution)
                .map(|j| {
                    let phi = -span / 2.0 + span * (j as f64 + 0.5) / resolution as f64;
                    (0..3).map(|i| phi.cos() * b1[i] + phi.sin() * b2[i]).collect()
                })
                .collect()
        }
        _ => {
            use rand::SeedableRng;
            use rand_distr::{Distribution, StandardNormal};
            let mut rng =
                rand_chacha::ChaCha8Rng::seed_from_u64(0x6f2a_9c4d ^ (n as u64).rotate_left(17));
            let mut out = Vec::with_capacity(resolution);
            while out.len() < resolution {
                let mut v: Vec<f64> =
                    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
                let mean = v.iter().sum::<f64>() / n as f64;
                for x in &mut v {
                    *x -= mean;
                }
                v.sort_by(|a, b| b.partial_cmp(a).unwrap());
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-9 {
                    for x in &mut v {
                        *x /= norm;
                    }
                    out.push(v);
                }
            }
            out
        }
    }
}

/// h(d) = max{⟨c, d⟩ : N(c) ≤ 1, c ∈ Cartan}.
fn support_function(norm: &NormSpec, d: &[f64], resolution: usize) -> f64 {
    match norm {
        NormSpec::KyFan { k } => {
            let alpha: Vec<f64> =
                (0..d.len()).map(|i| if i < *k { 1.0 } else { 0.0 }).collect();
            dual_gauge_alpha(&alpha, d)
        }
        NormSpec::Alpha { alpha } => dual_gauge_alpha(alpha.as_slice(), d),
        NormSpec::Schatten { p } => dual_gauge_schatten(*p, d),
        NormSpec::Orbit { .. } | NormSpec::SupFamily { .. } => {
            let eval = |c: &[f64]| norm.eval_sorted_eigenvalues(c).unwrap_or(f64::NAN);
            chamber_ratio_max(&eval, d, resolution)
        }
    }
}

/// Dual of Σ α_i σ_i as a symmetric gauge on ℝⁿ: max_k S_k(|d|↓)/A_k.
fn dual_gauge_alpha(alpha: &[f64], d: &[f64]) -> f64 {
    let s = abs_sorted(d);
    let mut best = 0.0f64;
    let mut run_s = 0.0;
    let mut run_a = 0.0;
    for k in 0..alpha.len() {
        run_s += s[k];
        run_a += alpha[k];
        if run_a > 0.0 {
            best = best.max(run_s / run_a);
        }
    }
    best
}

fn dual_gauge_schatten(p: SchattenP, d: &[f64]) -> f64 {
    match p {
        SchattenP::Infinity => d.iter().map(|v| v.abs()).sum(),
        SchattenP::Finite(p) if p == 1.0 => d.iter().fold(0.0f64, |a, &b| a.max(b.abs())),
        SchattenP::Finite(p) => {
            let q = p / (p - 1.0);
            d.iter().map(|v| v.abs().powf(q)).sum::<f64>().powf(1.0 / q)
        }
    }
}

/// max over chamber directions c of ⟨c, d⟩/N(c). The ratio has convex-cone
/// superlevel sets, so along the n = 3 chamber arc it is unimodal and a
/// bracketed line search around the best coarse sample is exact; for n ≥ 4 a
/// pattern search refines the best of `resolution` random chamber samples.
fn chamber_ratio_max(eval: &dyn Fn(&[f64]) -> f64, d: &[f64], resolution: usize) -> f64 {
    let n = d.len();
    let ratio = |c: &[f64]| {
        let denom = eval(c);
        if !(denom.is_finite() && denom > 1e-14) {
            return f64::NEG_INFINITY;
        }
        c.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() / denom
    };

    match n {
        2 => ratio(&[std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2]),
        3 => {
            let b1 = [1.0 / 2f64.sqrt(), 0.0, -1.0 / 2f64.sqrt()];
            let b2 = [1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt()];
            let at = |phi: f64| -> [f64; 3] {
                [
                    phi.cos() * b1[0] + phi.sin() * b2[0],
                    phi.cos() * b1[1] + phi.sin() * b2[1],
                    phi.cos() * b1[2] + phi.sin() * b2[2],
                ]
            };
            let span = std::f64::consts::PI / 3.0;
            let coarse = resolution.max(64);
            let mut best_phi = 0.0;
            let mut best = f64::NEG_INFINITY;
            for j in 0..coarse {
                let phi = -span / 2.0 + span * (j as f64 + 0.5) / coarse as f64;
                let r = ratio(&at(phi));
                if r > best {
                    best = r;
                    best_phi = phi;
                }
            }
            let step = span / coarse as f64;
            let (mut lo, mut hi) =
                ((best_phi - step).max(-span / 2.0), (best_phi + step).min(span / 2.0));
            for _ in 0..120 {
                let m1 = lo + (hi - lo) / 3.0;
                let m2 = hi - (hi - lo) / 3.0;
                let r1 = ratio(&at(m1));
                let r2 = ratio(&at(m2));
                best = best.max(r1).max(r2);
                if r1 < r2 {
                    lo = m1;
                } else {
                    hi = m2;
                }
            }
            best
        }
        _ => {
            let samples = chamber_directions(n, resolution.max(256));
            let mut best_c = samples[0].clone();
            let mut best = f64::NEG_INFINITY;
            for c in &samples {
                let r = ratio(c);
                if r > best {
                    best = r;
                    best_c = c.clone();
                }
            }
            // pattern search along pair directions e_i − e_j, re-sorted into
            // the chamber after each move
            let mut step = 0.25;
            for _ in 0..80 {
                let mut improved = false;
                for i in 0..n {
                    for j in 0..n {
                        if i == j {
                            continue;
                        }
                        let mut c = best_c.clone();
                        c[i] += step;
                        c[j] -= step;
                        c.sort_by(|a, b| b.partial_cmp(a).unwrap());
                        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if norm < 1e-12 {
                            continue;
                        }
                        for x in &mut c {
                            *x /= norm;
                        }
                        let r = ratio(&c);
                        if r > best {
                            best = r;
                            best_c = c;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                    if step < 1e-12 {
                        break;
                    }
                }
            }
            best
        }
    }
}
