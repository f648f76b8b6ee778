//! Mean-value weights for direction sets.
//!
//! Three constructions live here: the closed-form weights of a polygon
//! circumscribed about the unit circle, the general linear solve on Veronese
//! images (any dimension, any degree), and the equal weights of the regular
//! midpoint lattices `M_m`.

use crate::veronese::{
    evaluate_basis, full_basis, harmonic_basis, BasisKind, RealPolynomial, VeroneseError,
};
use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("need at least 3 directions, got {0}")]
    TooFewDirections(usize),
    #[error("angular gap {gap} after direction {index} is not below pi/2")]
    GapTooLarge { index: usize, gap: f64 },
    #[error("invalid angle list: {0}")]
    InvalidAngles(String),
    #[error("no weights exist: stacked system rank {rank} of {rows} rows, residual {residual:.3e}")]
    RankDeficient {
        rank: usize,
        rows: usize,
        residual: f64,
    },
    #[error("direction {index} is not a unit vector (norm {norm})")]
    NotUnit { index: usize, norm: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("weights do not sum to one (sum {0})")]
    NotNormalized(f64),
    #[error("lattice order m={m} outside 1..={ambient_dim}")]
    LatticeOrder { m: usize, ambient_dim: usize },
    #[error("polynomial has degree {0}, expected a constant plus a homogeneous quadratic")]
    DegreeMismatch(u32),
    #[error("frame Gram matrix is singular")]
    SingularFrame,
    #[error(transparent)]
    Veronese(#[from] VeroneseError),
}

const UNIT_TOL: f64 = 1e-9;
const SUM_TOL: f64 = 1e-12;
/// Rank cutoff relative to the largest singular value.
pub const RANK_TOL: f64 = 1e-10;
/// Largest residual `|A w − b|` accepted from the least-norm solve.
pub const RESIDUAL_TOL: f64 = 1e-8;
const FRAME_OFFDIAG_TOL: f64 = 1e-10;

/// Unit directions in `R^{n+1}` with optional normalized weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    pub ambient_dim: usize,
    pub dirs: Vec<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
}

impl DirectionSet {
    pub fn new(dirs: Vec<Vec<f64>>) -> Result<Self, WeightError> {
        let ambient_dim = dirs.first().map_or(0, |d| d.len());
        for (index, d) in dirs.iter().enumerate() {
            if d.len() != ambient_dim {
                return Err(WeightError::DimensionMismatch {
                    expected: ambient_dim,
                    got: d.len(),
                });
            }
            let norm = norm(d);
            if (norm - 1.0).abs() > UNIT_TOL {
                return Err(WeightError::NotUnit { index, norm });
            }
        }
        Ok(Self {
            ambient_dim,
            dirs,
            weights: None,
        })
    }

    pub fn with_weights(dirs: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self, WeightError> {
        let mut set = Self::new(dirs)?;
        if weights.len() != set.dirs.len() {
            return Err(WeightError::DimensionMismatch {
                expected: set.dirs.len(),
                got: weights.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(WeightError::NotNormalized(sum));
        }
        set.weights = Some(weights);
        Ok(set)
    }

    /// Planar directions `(cos φ, sin φ)`.
    pub fn from_angles(angles: &[f64]) -> Self {
        Self {
            ambient_dim: 2,
            dirs: angles.iter().map(|a| vec![a.cos(), a.sin()]).collect(),
            weights: None,
        }
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// `|Σ w_k e^{2iφ_k}|` for planar sets.
    pub fn circular_residual(&self) -> Option<f64> {
        let w = self.weights.as_ref()?;
        if self.ambient_dim != 2 {
            return None;
        }
        let (mut re, mut im) = (0.0, 0.0);
        for (d, wk) in self.dirs.iter().zip(w) {
            // e^{2iφ} = (cos²φ − sin²φ) + i·2 sinφ cosφ
            re += wk * (d[0] * d[0] - d[1] * d[1]);
            im += wk * 2.0 * d[0] * d[1];
        }
        Some(re.hypot(im))
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Weights from the polygon circumscribed about the unit circle with outward
/// normals `e^{2iφ_k}`:
/// `w_j ∝ tan β_{j−1} + tan β_j`, `β_k = φ_{k+1} − φ_k` taken cyclically on `[0, π)`.
pub fn circular_weights(angles: &[f64]) -> Result<DirectionSet, WeightError> {
    let n = angles.len();
    if n < 3 {
        return Err(WeightError::TooFewDirections(n));
    }
    for (i, a) in angles.iter().enumerate() {
        if !a.is_finite() || *a < 0.0 || *a >= PI {
            return Err(WeightError::InvalidAngles(format!(
                "angle {i} = {a} is outside [0, pi)"
            )));
        }
        if i > 0 && *a <= angles[i - 1] {
            return Err(WeightError::InvalidAngles(format!(
                "angles must be strictly increasing (index {i})"
            )));
        }
    }
    let gaps: Vec<f64> = (0..n)
        .map(|k| {
            if k + 1 < n {
                angles[k + 1] - angles[k]
            } else {
                angles[0] + PI - angles[n - 1]
            }
        })
        .collect();
    if let Some((index, &gap)) = gaps.iter().enumerate().find(|(_, &g)| g >= PI / 2.0) {
        return Err(WeightError::GapTooLarge { index, gap });
    }
    let tans: Vec<f64> = gaps.iter().map(|g| g.tan()).collect();
    let raw: Vec<f64> = (0..n).map(|j| tans[(j + n - 1) % n] + tans[j]).collect();
    let total: f64 = raw.iter().sum();
    let mut set = DirectionSet::from_angles(angles);
    set.weights = Some(raw.into_iter().map(|w| w / total).collect());
    Ok(set)
}

/// Least-norm `w` with `Σ_i w_i v_i = target` and `Σ_i w_i = 1`.
///
/// `columns` are the vectors `v_i`, all of length `target.len()`. Fails with
/// `RankDeficient` when the stacked system has no solution.
pub fn solve_weights(columns: &[Vec<f64>], target: &[f64]) -> Result<Vec<f64>, WeightError> {
    let q = target.len();
    let n = columns.len();
    for c in columns {
        if c.len() != q {
            return Err(WeightError::DimensionMismatch {
                expected: q,
                got: c.len(),
            });
        }
    }
    let rows = q + 1;
    if n == 0 {
        return Err(WeightError::RankDeficient {
            rank: 0,
            rows,
            residual: 1.0,
        });
    }
    let a = DMatrix::from_fn(rows, n, |r, c| if r < q { columns[c][r] } else { 1.0 });
    let b = DVector::from_fn(rows, |r, _| if r < q { target[r] } else { 1.0 });

    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|&&s| s > cutoff).count();
    let w = svd
        .solve(&b, cutoff)
        .expect("u and v were requested from the SVD");
    let residual = (&a * &w - &b).norm();
    if !residual.is_finite() || residual > RESIDUAL_TOL {
        return Err(WeightError::RankDeficient {
            rank,
            rows,
            residual,
        });
    }
    let sum = w.sum();
    Ok(w.iter().map(|x| x / sum).collect())
}

/// Mean-value weights for `points` on `S^n` from the degree-`k` Veronese map.
///
/// * `Harmonic`: `Σ w_i G(P_i) = 0` for every harmonic `G` of degree `k`.
/// * `Full`: `Σ w_i F(P_i)` equals the sphere mean of every homogeneous `F`
///   of degree `k` (for `k = 2` the image sum is `ξ/(n+1)`).
///
/// Weights may be negative. Among all solutions the least-norm one is returned.
pub fn veronese_weights(
    points: &[Vec<f64>],
    degree: u32,
    kind: BasisKind,
) -> Result<DirectionSet, WeightError> {
    let set = DirectionSet::new(points.to_vec())?;
    let basis = match kind {
        BasisKind::Harmonic => harmonic_basis(set.ambient_dim.max(1), degree),
        BasisKind::Full => full_basis(set.ambient_dim.max(1), degree),
    };
    let image = evaluate_basis(&basis, points)?;
    let target: Vec<f64> = match kind {
        BasisKind::Harmonic => vec![0.0; basis.len()],
        BasisKind::Full => basis
            .elements
            .iter()
            .map(|e| e.terms[0].0.sphere_mean())
            .collect(),
    };
    let w = solve_weights(&image.points, &target)?;
    Ok(DirectionSet {
        weights: Some(w),
        ..set
    })
}

/// Regular lattice `M_m`: all vectors with exactly `m` entries `±1/√m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MidpointLattice {
    pub ambient_dim: usize,
    pub m: usize,
    pub points: Vec<Vec<f64>>,
    /// `C_m = #M_1 / #M_m`.
    pub normalizer: f64,
}

impl MidpointLattice {
    pub fn count(&self) -> usize {
        self.points.len()
    }

    /// The lattice as an equally weighted direction set.
    pub fn direction_set(&self) -> DirectionSet {
        let w = 1.0 / self.count() as f64;
        DirectionSet {
            ambient_dim: self.ambient_dim,
            dirs: self.points.clone(),
            weights: Some(vec![w; self.count()]),
        }
    }
}

pub fn midpoint_lattice(ambient_dim: usize, m: usize) -> Result<MidpointLattice, WeightError> {
    if m == 0 || m > ambient_dim {
        return Err(WeightError::LatticeOrder { m, ambient_dim });
    }
    let scale = 1.0 / (m as f64).sqrt();
    let mut points = Vec::new();
    for support in combinations(ambient_dim, m) {
        for signs in 0u32..(1 << m) {
            let mut p = vec![0.0; ambient_dim];
            for (bit, &i) in support.iter().enumerate() {
                p[i] = if signs & (1 << bit) == 0 { scale } else { -scale };
            }
            points.push(p);
        }
    }
    let count_m1 = (2 * ambient_dim) as f64;
    let normalizer = count_m1 / points.len() as f64;
    Ok(MidpointLattice {
        ambient_dim,
        m,
        points,
        normalizer,
    })
}

/// `m`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(m);
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    rec(0, n, m, &mut cur, &mut out);
    out
}

/// `(1/#M_m) Σ_{x∈M_m} F(x)` for `F` = constant + homogeneous quadratic.
pub fn lattice_mean(f: &RealPolynomial, lattice: &MidpointLattice) -> Result<f64, WeightError> {
    if f.ambient_dim != lattice.ambient_dim {
        return Err(WeightError::DimensionMismatch {
            expected: lattice.ambient_dim,
            got: f.ambient_dim,
        });
    }
    if let Some(&d) = f.degrees().iter().find(|&&d| d != 0 && d != 2) {
        return Err(WeightError::DegreeMismatch(d));
    }
    let sum: f64 = lattice.points.iter().map(|p| f.eval(p)).sum();
    Ok(sum / lattice.count() as f64)
}

/// Outcome of the `n+1`-point interpolation test.
#[derive(Debug, Clone, PartialEq)]
pub enum FrameOutcome {
    /// `(AᵀA)^{-1}` is diagonal; its diagonal gives `Σ w_k V̄(P_k) = ξ`.
    Interpolating(Vec<f64>),
    /// No mean-value formula exists on these points.
    NoFormula { off_diagonal_norm: f64 },
}

/// Checks whether `n+1` points on `S^n` admit weights with `Σ w_k V̄(P_k) = ξ`,
/// which holds iff `(AᵀA)^{-1}` is diagonal (`A` has the points as columns).
pub fn frame_weights(points: &[Vec<f64>]) -> Result<FrameOutcome, WeightError> {
    let set = DirectionSet::new(points.to_vec())?;
    let d = set.ambient_dim;
    if points.len() != d {
        return Err(WeightError::DimensionMismatch {
            expected: d,
            got: points.len(),
        });
    }
    let a = DMatrix::from_fn(d, d, |r, c| points[c][r]);
    let gram = a.transpose() * &a;
    let inv = gram.try_inverse().ok_or(WeightError::SingularFrame)?;
    if inv.iter().any(|x| !x.is_finite()) {
        return Err(WeightError::SingularFrame);
    }
    let mut off = 0.0;
    for r in 0..d {
        for c in 0..d {
            if r != c {
                off += inv[(r, c)] * inv[(r, c)];
            }
        }
    }
    let off = off.sqrt();
    if off <= FRAME_OFFDIAG_TOL {
        Ok(FrameOutcome::Interpolating((0..d).map(|i| inv[(i, i)]).collect()))
    } else {
        Ok(FrameOutcome::NoFormula {
            off_diagonal_norm: off,
        })
    }
}
