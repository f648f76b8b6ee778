//! The one-parameter family of 3×3 gradient and Laplacian stencils.
//!
//! For a weight `w` on the axis neighbors (corners weigh 1):
//!
//! ```text
//!            1       | -1  0  1 |                1        |  1    w     1 |
//! D_x = ---------    | -w  0  w |    L_Δ = ----------    |  w  -4(w+1)  w |
//!       2h (w + 2)   | -1  0  1 |          h² (w + 2)    |  1    w     1 |
//! ```
//!
//! `w = ∞` gives the central difference and the five-point Laplacian `L₊`,
//! `w = 0` the diagonal Laplacian `L×`, `w = 1` Prewitt, `w = 2` Sobel and
//! `w = 4` the rotation-optimal pair. `L_Δ = α L₊ + β L×` with
//! `α = w/(w+2)`, `β = 2/(w+2)`.
//!
//! Coefficient rows are indexed by the y offset (`-1, 0, +1`) and columns by
//! the x offset.

use crate::grid::GridField;
use rayon::prelude::*;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StencilError {
    #[error("stencil weight w = -2 makes the normalization singular")]
    SingularWeight,
    #[error("stencil weight must be finite or infinite, got {0}")]
    BadWeight(f64),
    #[error("alpha + beta must equal 1 (got {0} + {1})")]
    BadMix(f64, f64),
}

/// Axis weight `w`; `Infinite` is the named limit stencil.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StencilWeight {
    Finite(f64),
    Infinite,
}

impl StencilWeight {
    pub fn validate(self) -> Result<Self, StencilError> {
        match self {
            StencilWeight::Finite(w) if w.is_nan() => Err(StencilError::BadWeight(w)),
            StencilWeight::Finite(-2.0) => Err(StencilError::SingularWeight),
            StencilWeight::Finite(w) if w.is_infinite() => Ok(StencilWeight::Infinite),
            other => Ok(other),
        }
    }
}

impl From<f64> for StencilWeight {
    fn from(w: f64) -> Self {
        if w.is_infinite() && w > 0.0 {
            StencilWeight::Infinite
        } else {
            StencilWeight::Finite(w)
        }
    }
}

impl std::str::FromStr for StencilWeight {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(StencilWeight::Infinite),
            _ => {
                if let Some((n, d)) = t.split_once('/') {
                    let n: f64 = n.trim().parse().map_err(|_| format!("bad weight '{s}'"))?;
                    let d: f64 = d.trim().parse().map_err(|_| format!("bad weight '{s}'"))?;
                    return Ok(StencilWeight::Finite(n / d));
                }
                t.parse::<f64>()
                    .map(StencilWeight::from)
                    .map_err(|_| format!("bad weight '{s}'"))
            }
        }
    }
}

impl fmt::Display for StencilWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StencilWeight::Finite(w) => write!(f, "{w}"),
            StencilWeight::Infinite => write!(f, "inf"),
        }
    }
}

/// A 3×3 kernel `scale · coeffs` on a grid of spacing `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil3 {
    pub coeffs: [[f64; 3]; 3],
    pub h: f64,
    pub scale: f64,
}

impl Stencil3 {
    /// Effective coefficients with the prefactor applied.
    pub fn kernel(&self) -> [[f64; 3]; 3] {
        self.coeffs.map(|row| row.map(|c| c * self.scale))
    }

    pub fn apply(&self, field: &GridField) -> GridField {
        apply(self, field)
    }
}

pub fn dx_stencil(w: StencilWeight, h: f64) -> Result<Stencil3, StencilError> {
    Ok(match w.validate()? {
        StencilWeight::Finite(w) => Stencil3 {
            coeffs: [[-1.0, 0.0, 1.0], [-w, 0.0, w], [-1.0, 0.0, 1.0]],
            h,
            scale: 1.0 / (2.0 * h * (w + 2.0)),
        },
        StencilWeight::Infinite => Stencil3 {
            coeffs: [[0.0, 0.0, 0.0], [-1.0, 0.0, 1.0], [0.0, 0.0, 0.0]],
            h,
            scale: 1.0 / (2.0 * h),
        },
    })
}

/// `D_x` rotated by π/2.
pub fn dy_stencil(w: StencilWeight, h: f64) -> Result<Stencil3, StencilError> {
    let dx = dx_stencil(w, h)?;
    let mut coeffs = [[0.0; 3]; 3];
    for (r, row) in coeffs.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = dx.coeffs[c][r];
        }
    }
    Ok(Stencil3 { coeffs, ..dx })
}

pub fn laplacian_stencil(w: StencilWeight, h: f64) -> Result<Stencil3, StencilError> {
    Ok(match w.validate()? {
        StencilWeight::Finite(w) => Stencil3 {
            coeffs: [[1.0, w, 1.0], [w, -4.0 * (w + 1.0), w], [1.0, w, 1.0]],
            h,
            scale: 1.0 / (h * h * (w + 2.0)),
        },
        StencilWeight::Infinite => plus_laplacian(h),
    })
}

/// Five-point Laplacian `L₊`.
pub fn plus_laplacian(h: f64) -> Stencil3 {
    Stencil3 {
        coeffs: [[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]],
        h,
        scale: 1.0 / (h * h),
    }
}

/// Diagonal five-point Laplacian `L×`.
pub fn cross_laplacian(h: f64) -> Stencil3 {
    Stencil3 {
        coeffs: [[1.0, 0.0, 1.0], [0.0, -4.0, 0.0], [1.0, 0.0, 1.0]],
        h,
        scale: 1.0 / (2.0 * h * h),
    }
}

/// `(α, β)` with `L_Δ(w) = α L₊ + β L×`.
pub fn alpha_beta(w: StencilWeight) -> Result<(f64, f64), StencilError> {
    Ok(match w.validate()? {
        StencilWeight::Finite(w) => (w / (w + 2.0), 2.0 / (w + 2.0)),
        StencilWeight::Infinite => (1.0, 0.0),
    })
}

/// Convolves the field with the kernel; out-of-grid samples follow the
/// field's boundary policy.
pub fn apply(stencil: &Stencil3, field: &GridField) -> GridField {
    let k = stencil.kernel();
    let w = field.width;
    let mut out = vec![0.0; field.values.len()];
    out.par_chunks_mut(w).enumerate().for_each(|(j, row)| {
        let j = j as isize;
        for (i, v) in row.iter_mut().enumerate() {
            let i = i as isize;
            let mut acc = 0.0;
            for (r, krow) in k.iter().enumerate() {
                for (c, &kc) in krow.iter().enumerate() {
                    if kc != 0.0 {
                        acc += kc * field.at(i + c as isize - 1, j + r as isize - 1);
                    }
                }
            }
            *v = acc;
        }
    });
    field.with_values(out)
}

/// `(1 − (h²/6) L_Δ|w=4) D_x|w=4`: cancels the `h²` term of the w=4 gradient,
/// leaving a fourth-order approximation of `∂/∂x`.
pub fn apply_corrected_dx(field: &GridField) -> GridField {
    let h = field.h;
    let dx = dx_stencil(StencilWeight::Finite(4.0), h).expect("w=4 is valid");
    let lap = laplacian_stencil(StencilWeight::Finite(4.0), h).expect("w=4 is valid");
    let g = apply(&dx, field);
    let lg = apply(&lap, &g);
    let c = h * h / 6.0;
    field.with_values(
        g.values
            .iter()
            .zip(&lg.values)
            .map(|(a, b)| a - c * b)
            .collect(),
    )
}

/// Diffusivity sampled at staggered positions.
///
/// Positions are given in doubled index units: `(hx, hy)` stands for the
/// point `(hx/2, hy/2)` in grid-index coordinates, so `(2i+1, 2j)` is the
/// midpoint between nodes `(i, j)` and `(i+1, j)`.
pub trait StaggeredDiffusivity: Sync {
    fn value(&self, hx: isize, hy: isize) -> f64;
}

/// `a ≡ c`.
#[derive(Debug, Clone, Copy)]
pub struct ConstantDiffusivity(pub f64);

impl StaggeredDiffusivity for ConstantDiffusivity {
    fn value(&self, _: isize, _: isize) -> f64 {
        self.0
    }
}

/// Analytic diffusivity `a(x, y)` evaluated at physical staggered positions.
pub struct FnDiffusivity<F> {
    pub f: F,
    pub h: f64,
    pub origin: (f64, f64),
}

impl<F: Fn(f64, f64) -> f64 + Sync> StaggeredDiffusivity for FnDiffusivity<F> {
    fn value(&self, hx: isize, hy: isize) -> f64 {
        let x = self.origin.0 + 0.5 * hx as f64 * self.h;
        let y = self.origin.1 + 0.5 * hy as f64 * self.h;
        (self.f)(x, y)
    }
}

/// Result of [`quasi_laplacian_apply`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiLaplacian {
    pub field: GridField,
    /// Number of staggered samples with `a ≤ 0` that were used.
    pub nonpositive_diffusivity: usize,
}

/// `α L^a₊ + β L^a×` in divergence form:
///
/// ```text
/// L^a₊ f = (a₊₀ f_{i+1,j} + a₋₀ f_{i−1,j} + a₀₊ f_{i,j+1} + a₀₋ f_{i,j−1} − Σa · f_{ij}) / h²
/// L^a× f = (a₊₊ f_{i+1,j+1} + a₋₊ f_{i−1,j+1} + a₊₋ f_{i+1,j−1} + a₋₋ f_{i−1,j−1} − Σa · f_{ij}) / 2h²
/// ```
pub fn quasi_laplacian_apply(
    alpha: f64,
    beta: f64,
    a: &dyn StaggeredDiffusivity,
    f: &GridField,
) -> Result<QuasiLaplacian, StencilError> {
    if ((alpha + beta) - 1.0).abs() > 1e-12 {
        return Err(StencilError::BadMix(alpha, beta));
    }
    let inv_h2 = 1.0 / (f.h * f.h);
    let half_inv_h2 = 0.5 * inv_h2;
    let w = f.width;
    let mut out = vec![0.0; f.values.len()];
    let bad: usize = out
        .par_chunks_mut(w)
        .enumerate()
        .map(|(j, row)| {
            let j = j as isize;
            let mut bad = 0;
            for (i, v) in row.iter_mut().enumerate() {
                let i = i as isize;
                let (hx, hy) = (2 * i, 2 * j);
                let fc = f.at(i, j);

                let ae = a.value(hx + 1, hy);
                let aw = a.value(hx - 1, hy);
                let an = a.value(hx, hy + 1);
                let as_ = a.value(hx, hy - 1);
                let plus = ae * f.at(i + 1, j) + aw * f.at(i - 1, j) + an * f.at(i, j + 1)
                    + as_ * f.at(i, j - 1)
                    - (ae + aw + an + as_) * fc;

                let mut cross = 0.0;
                if beta != 0.0 {
                    let app = a.value(hx + 1, hy + 1);
                    let amp = a.value(hx - 1, hy + 1);
                    let apm = a.value(hx + 1, hy - 1);
                    let amm = a.value(hx - 1, hy - 1);
                    cross = app * f.at(i + 1, j + 1)
                        + amp * f.at(i - 1, j + 1)
                        + apm * f.at(i + 1, j - 1)
                        + amm * f.at(i - 1, j - 1)
                        - (app + amp + apm + amm) * fc;
                    bad += [app, amp, apm, amm].iter().filter(|x| **x <= 0.0).count();
                }
                bad += [ae, aw, an, as_].iter().filter(|x| **x <= 0.0).count();
                *v = alpha * plus * inv_h2 + beta * cross * half_inv_h2;
            }
            bad
        })
        .sum();
    Ok(QuasiLaplacian {
        field: f.with_values(out),
        nonpositive_diffusivity: bad,
    })
}
