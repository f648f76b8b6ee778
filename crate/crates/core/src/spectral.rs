//! Frequency responses of the derivative stencils and the implicit
//! (compact) derivative that sharpens them.
//!
//! On the pure tone `exp(i(ω₁x + ω₂y))` sampled at unit spacing, `D_x(w)`
//! acts as multiplication by
//!
//! ```text
//! i sin ω₁ · (w + 2 cos ω₂) / (w + 2)
//! ```
//!
//! and the compact scheme
//! `(f'_{i−1} + w f'_i + f'_{i+1}) / (w + 2) = (f_{i+1} − f_{i−1}) / 2`
//! acts as `i sin ω · (w + 2) / (w + 2 cos ω)`.

use crate::grid::{Boundary, GridField};
use crate::stencils::{apply, dx_stencil, dy_stencil, StencilError, StencilWeight};
use crate::tridiag::{solve_cyclic, TridiagError};
pub use nalgebra::Complex;
use rayon::prelude::*;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("signal length {0} is below 3")]
    TooShort(usize),
    #[error("implicit system is singular: w = {w} annihilates mode {mode} of {len}")]
    SingularMode { w: f64, mode: usize, len: usize },
    #[error("sharpened gradient needs a periodic field")]
    NotPeriodic,
    #[error(transparent)]
    Stencil(#[from] StencilError),
    #[error(transparent)]
    Tridiag(#[from] TridiagError),
}

/// Response of `D_x(w)` at unit spacing.
pub fn explicit_response(w: StencilWeight, omega1: f64, omega2: f64) -> Complex<f64> {
    let smooth = match w {
        StencilWeight::Infinite => 1.0,
        StencilWeight::Finite(w) => (w + 2.0 * omega2.cos()) / (w + 2.0),
    };
    Complex::new(0.0, omega1.sin() * smooth)
}

/// Response of the compact derivative at unit spacing.
pub fn sharpened_response(w: StencilWeight, omega: f64) -> Complex<f64> {
    let gain = match w {
        StencilWeight::Infinite => 1.0,
        StencilWeight::Finite(w) => (w + 2.0) / (w + 2.0 * omega.cos()),
    };
    Complex::new(0.0, omega.sin() * gain)
}

/// Which scheme a response curve describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// `D_x(w)` along `ω₂ = 0`.
    Explicit,
    Sharpened,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyCurve {
    pub label: String,
    pub omegas: Vec<f64>,
    pub response: Vec<Complex<f64>>,
}

impl FrequencyCurve {
    pub fn sample(scheme: Scheme, w: StencilWeight, omegas: &[f64]) -> Self {
        let response = omegas
            .iter()
            .map(|&o| match scheme {
                Scheme::Explicit => explicit_response(w, o, 0.0),
                Scheme::Sharpened => sharpened_response(w, o),
            })
            .collect();
        let name = match scheme {
            Scheme::Explicit => "explicit",
            Scheme::Sharpened => "sharpened",
        };
        Self {
            label: format!("{name} w={w}"),
            omegas: omegas.to_vec(),
            response,
        }
    }

    /// `|H(ω) − iω|` per sample.
    pub fn deviation(&self) -> Vec<f64> {
        self.omegas
            .iter()
            .zip(&self.response)
            .map(|(&o, h)| (h - Complex::new(0.0, o)).norm())
            .collect()
    }

    pub fn max_deviation(&self) -> f64 {
        self.deviation().into_iter().fold(0.0, f64::max)
    }
}

/// `samples` equispaced frequencies on `[0, omega_max]`.
pub fn omega_grid(omega_max: f64, samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| omega_max * i as f64 / (n - 1) as f64).collect(),
    }
}

/// CSV with columns `w,omega,re_h,im_h,abs_err`, one block per weight.
pub fn emit_response_table(scheme: Scheme, ws: &[StencilWeight], omegas: &[f64]) -> String {
    let mut out = String::new();
    let name = match scheme {
        Scheme::Explicit => "explicit",
        Scheme::Sharpened => "sharpened",
    };
    let _ = writeln!(out, "# scheme={name} samples={}", omegas.len());
    out.push_str("w,omega,re_h,im_h,abs_err\n");
    for &w in ws {
        let curve = FrequencyCurve::sample(scheme, w, omegas);
        for ((o, h), e) in omegas.iter().zip(&curve.response).zip(curve.deviation()) {
            let _ = writeln!(out, "{w},{o:.10e},{:.10e},{:.10e},{e:.10e}", h.re, h.im);
        }
    }
    out
}

fn check_modes(w: f64, len: usize) -> Result<(), SpectralError> {
    for k in 0..len {
        let lambda = w + 2.0 * (2.0 * std::f64::consts::PI * k as f64 / len as f64).cos();
        if lambda.abs() < 1e-12 * (w.abs() + 2.0) {
            return Err(SpectralError::SingularMode { w, mode: k, len });
        }
    }
    Ok(())
}

/// Solves `(1, w, 1)/(w+2) · y = rhs` on a periodic line.
fn unsmooth(w: f64, rhs: &[f64]) -> Result<Vec<f64>, SpectralError> {
    let n = rhs.len();
    let s = 1.0 / (w + 2.0);
    Ok(solve_cyclic(&vec![s; n], &vec![w * s; n], &vec![s; n], rhs)?)
}

/// Periodic compact derivative of `signal` sampled at spacing `h`.
pub fn implicit_derivative(
    signal: &[f64],
    w: StencilWeight,
    h: f64,
) -> Result<Vec<f64>, SpectralError> {
    let n = signal.len();
    if n < 3 {
        return Err(SpectralError::TooShort(n));
    }
    let central: Vec<f64> = (0..n)
        .map(|i| (signal[(i + 1) % n] - signal[(i + n - 1) % n]) / (2.0 * h))
        .collect();
    match w.validate()? {
        StencilWeight::Infinite => Ok(central),
        StencilWeight::Finite(w) => {
            check_modes(w, n)?;
            unsmooth(w, &central)
        }
    }
}

fn unsmooth_rows(field: &mut GridField, w: f64) -> Result<(), SpectralError> {
    let width = field.width;
    field
        .values
        .par_chunks_mut(width)
        .try_for_each(|row| -> Result<(), SpectralError> {
            let solved = unsmooth(w, row)?;
            row.copy_from_slice(&solved);
            Ok(())
        })
}

fn unsmooth_cols(field: &mut GridField, w: f64) -> Result<(), SpectralError> {
    let (width, height) = (field.width, field.height);
    let cols: Vec<Vec<f64>> = (0..width)
        .into_par_iter()
        .map(|i| {
            let col: Vec<f64> = (0..height).map(|j| field.values[j * width + i]).collect();
            unsmooth(w, &col)
        })
        .collect::<Result<_, _>>()?;
    for (i, col) in cols.iter().enumerate() {
        for (j, v) in col.iter().enumerate() {
            field.values[j * width + i] = *v;
        }
    }
    Ok(())
}

/// `(∂x, ∂y)` by the sharpened operator: `D(w)` followed by inverting the
/// `[1 w 1]/(w+2)` smoothing along both axes.
pub fn sharpened_gradient_2d(
    field: &GridField,
    w: StencilWeight,
) -> Result<(GridField, GridField), SpectralError> {
    if field.boundary != Boundary::Periodic {
        return Err(SpectralError::NotPeriodic);
    }
    let w = w.validate()?;
    let mut gx = apply(&dx_stencil(w, field.h)?, field);
    let mut gy = apply(&dy_stencil(w, field.h)?, field);
    if let StencilWeight::Finite(wf) = w {
        check_modes(wf, field.width)?;
        check_modes(wf, field.height)?;
        for g in [&mut gx, &mut gy] {
            unsmooth_rows(g, wf)?;
            unsmooth_cols(g, wf)?;
        }
    }
    Ok((gx, gy))
}
