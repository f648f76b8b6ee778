//! Discrete spherical means of directional derivatives.
//!
//! With weights that integrate every degree-2 polynomial exactly over the
//! unit sphere in `R^d`, the weighted means of directional derivative samples
//! recover rotation-invariant operators:
//!
//! ```text
//! Δf        = d Σ w_k ∂²f/∂e_k²
//! |∇f|²     = d Σ w_k (∂f/∂e_k)²
//! c · ∇f    = d Σ w_k (c · e_k) ∂f/∂e_k
//! ∇·(a∇f)   = d Σ w_k ∂/∂e_k (a ∂f/∂e_k)
//! ```
//!
//! In the plane `d = 2`.

use crate::veronese::BasisKind;
use crate::weights::{veronese_weights, DirectionSet, WeightError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeanOpError {
    #[error("missing {0} samples")]
    MissingSamples(&'static str),
    #[error("direction set carries no weights")]
    MissingWeights,
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("radii must be positive (got {0}, {1})")]
    NonPositiveRadius(f64, f64),
    #[error("spoke direction {0} is not a unit vector")]
    NotUnit(usize),
    #[error("neighbor {index} has no partner beyond 120 degrees (best {best_degrees:.1})")]
    UnpairedNeighbor { index: usize, best_degrees: f64 },
    #[error("neighbor {0} coincides with the center")]
    DegenerateNeighbor(usize),
    #[error(transparent)]
    Weights(#[from] WeightError),
}

/// Directional derivative samples attached to a weighted direction set.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalSamples {
    pub dirs: DirectionSet,
    pub first_derivs: Option<Vec<f64>>,
    pub second_derivs: Option<Vec<f64>>,
}

impl DirectionalSamples {
    pub fn new(
        dirs: DirectionSet,
        first_derivs: Option<Vec<f64>>,
        second_derivs: Option<Vec<f64>>,
    ) -> Result<Self, MeanOpError> {
        for v in [&first_derivs, &second_derivs].into_iter().flatten() {
            if v.len() != dirs.len() {
                return Err(MeanOpError::LengthMismatch {
                    expected: dirs.len(),
                    got: v.len(),
                });
            }
        }
        Ok(Self {
            dirs,
            first_derivs,
            second_derivs,
        })
    }
}

fn weights_of(dirs: &DirectionSet) -> Result<&[f64], MeanOpError> {
    dirs.weights.as_deref().ok_or(MeanOpError::MissingWeights)
}

fn dimension_factor(dirs: &DirectionSet) -> f64 {
    dirs.ambient_dim as f64
}

/// Second derivative along a line from samples at unequal distances:
/// `2/(ρ₁ρ₂) · ( [f(q₁)/ρ₁ + f(q₂)/ρ₂] / [1/ρ₁ + 1/ρ₂] − f(p) )`.
///
/// Exact for quadratics along the line.
pub fn second_diff_unequal(
    f_p: f64,
    f_q1: f64,
    f_q2: f64,
    rho1: f64,
    rho2: f64,
) -> Result<f64, MeanOpError> {
    if !(rho1 > 0.0 && rho2 > 0.0) {
        return Err(MeanOpError::NonPositiveRadius(rho1, rho2));
    }
    let blend = (f_q1 / rho1 + f_q2 / rho2) / (1.0 / rho1 + 1.0 / rho2);
    Ok(2.0 / (rho1 * rho2) * (blend - f_p))
}

pub fn mean_laplacian(samples: &DirectionalSamples) -> Result<f64, MeanOpError> {
    let s = samples
        .second_derivs
        .as_ref()
        .ok_or(MeanOpError::MissingSamples("second-derivative"))?;
    let w = weights_of(&samples.dirs)?;
    let sum: f64 = w.iter().zip(s).map(|(w, s)| w * s).sum();
    Ok(dimension_factor(&samples.dirs) * sum)
}

pub fn mean_grad_sq(samples: &DirectionalSamples) -> Result<f64, MeanOpError> {
    let d = samples
        .first_derivs
        .as_ref()
        .ok_or(MeanOpError::MissingSamples("first-derivative"))?;
    let w = weights_of(&samples.dirs)?;
    let sum: f64 = w.iter().zip(d).map(|(w, d)| w * d * d).sum();
    Ok(dimension_factor(&samples.dirs) * sum)
}

/// `c · ∇f` from first directional derivatives; `c = (1, 0)` gives `∂f/∂x`.
pub fn mean_directional(samples: &DirectionalSamples, coeffs: &[f64]) -> Result<f64, MeanOpError> {
    let d = samples
        .first_derivs
        .as_ref()
        .ok_or(MeanOpError::MissingSamples("first-derivative"))?;
    if coeffs.len() != samples.dirs.ambient_dim {
        return Err(MeanOpError::LengthMismatch {
            expected: samples.dirs.ambient_dim,
            got: coeffs.len(),
        });
    }
    let w = weights_of(&samples.dirs)?;
    let sum: f64 = w
        .iter()
        .zip(&samples.dirs.dirs)
        .zip(d)
        .map(|((w, e), d)| {
            let ce: f64 = coeffs.iter().zip(e).map(|(c, e)| c * e).sum();
            w * ce * d
        })
        .sum();
    Ok(dimension_factor(&samples.dirs) * sum)
}

/// `∇·(a∇f)` from samples of `∂/∂e (a ∂f/∂e)`.
pub fn mean_quasi_laplacian(dirs: &DirectionSet, samples: &[f64]) -> Result<f64, MeanOpError> {
    if samples.len() != dirs.len() {
        return Err(MeanOpError::LengthMismatch {
            expected: dirs.len(),
            got: samples.len(),
        });
    }
    let w = weights_of(dirs)?;
    let sum: f64 = w.iter().zip(samples).map(|(w, t)| w * t).sum();
    Ok(dimension_factor(dirs) * sum)
}

/// One line through the center: a forward sample at `O + ρ₁e` and a backward
/// sample at `O − ρ₂e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spoke {
    pub dir: Vec<f64>,
    pub forward_radius: f64,
    pub forward_value: f64,
    pub backward_radius: f64,
    pub backward_value: f64,
}

/// Irregular neighborhood of a grid vertex, organized as spokes.
#[derive(Debug, Clone, PartialEq)]
pub struct StarStencil {
    pub center: f64,
    pub spokes: Vec<Spoke>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl StarStencil {
    pub fn new(center: f64, spokes: Vec<Spoke>) -> Result<Self, MeanOpError> {
        for (i, s) in spokes.iter().enumerate() {
            if !(s.forward_radius > 0.0 && s.backward_radius > 0.0) {
                return Err(MeanOpError::NonPositiveRadius(
                    s.forward_radius,
                    s.backward_radius,
                ));
            }
            if (dot(&s.dir, &s.dir).sqrt() - 1.0).abs() > 1e-9 {
                return Err(MeanOpError::NotUnit(i));
            }
        }
        Ok(Self { center, spokes })
    }

    /// Pairs scattered neighbors into spokes.
    ///
    /// Each neighbor becomes the forward end of a spoke; its backward partner
    /// is the neighbor at the largest angle from it, which must exceed 120°.
    /// The backward radius is the partner's distance projected on the spoke.
    pub fn from_neighbors(
        center_pos: &[f64],
        center_value: f64,
        neighbors: &[(Vec<f64>, f64)],
    ) -> Result<Self, MeanOpError> {
        let offsets: Vec<Vec<f64>> = neighbors
            .iter()
            .map(|(p, _)| p.iter().zip(center_pos).map(|(a, b)| a - b).collect())
            .collect();
        let mut spokes = Vec::with_capacity(neighbors.len());
        for (i, vi) in offsets.iter().enumerate() {
            let ri = dot(vi, vi).sqrt();
            if ri == 0.0 {
                return Err(MeanOpError::DegenerateNeighbor(i));
            }
            let dir: Vec<f64> = vi.iter().map(|x| x / ri).collect();
            let mut best: Option<(usize, f64)> = None;
            for (j, vj) in offsets.iter().enumerate() {
                let rj = dot(vj, vj).sqrt();
                if j == i || rj == 0.0 {
                    continue;
                }
                let cos = dot(&dir, vj) / rj;
                if best.is_none_or(|(_, c)| cos < c) {
                    best = Some((j, cos));
                }
            }
            let best_degrees = best.map_or(0.0, |(_, c)| c.clamp(-1.0, 1.0).acos().to_degrees());
            match best {
                Some((j, cos)) if cos < -0.5 => {
                    let back = -dot(&dir, &offsets[j]);
                    spokes.push(Spoke {
                        dir,
                        forward_radius: ri,
                        forward_value: neighbors[i].1,
                        backward_radius: back,
                        backward_value: neighbors[j].1,
                    });
                }
                _ => {
                    return Err(MeanOpError::UnpairedNeighbor {
                        index: i,
                        best_degrees,
                    })
                }
            }
        }
        Self::new(center_value, spokes)
    }

    /// Spoke directions weighted by the harmonic quadratic Veronese solve.
    pub fn direction_set(&self) -> Result<DirectionSet, MeanOpError> {
        let dirs: Vec<Vec<f64>> = self.spokes.iter().map(|s| s.dir.clone()).collect();
        Ok(veronese_weights(&dirs, 2, BasisKind::Harmonic)?)
    }

    pub fn second_derivatives(&self) -> Result<Vec<f64>, MeanOpError> {
        self.spokes
            .iter()
            .map(|s| {
                second_diff_unequal(
                    self.center,
                    s.forward_value,
                    s.backward_value,
                    s.forward_radius,
                    s.backward_radius,
                )
            })
            .collect()
    }
}

/// Laplacian at the center of an irregular star.
pub fn irregular_laplacian(star: &StarStencil) -> Result<f64, MeanOpError> {
    let dirs = star.direction_set()?;
    let second = star.second_derivatives()?;
    mean_laplacian(&DirectionalSamples::new(dirs, None, Some(second))?)
}
