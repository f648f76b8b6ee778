//! Accuracy and isotropy measurements on the Gaussian `g = exp(−(x² + y²))`.

use crate::diffusion::{self, DiffusionConfig, DiffusionError, Staggering};
use crate::grid::{Boundary, GridField};
use crate::stencils::{
    apply, dx_stencil, laplacian_stencil, quasi_laplacian_apply, FnDiffusivity, StencilError,
    StencilWeight,
};

pub fn gaussian(x: f64, y: f64) -> f64 {
    (-(x * x + y * y)).exp()
}

pub fn gaussian_dx(x: f64, y: f64) -> f64 {
    -2.0 * x * gaussian(x, y)
}

pub fn gaussian_laplacian(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    (4.0 * r2 - 4.0) * gaussian(x, y)
}

/// `Δ ∂ₓ g`.
pub fn gaussian_laplacian_dx(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    -2.0 * x * (4.0 * r2 - 8.0) * gaussian(x, y)
}

/// `Δ² g`.
pub fn gaussian_bilaplacian(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    (16.0 * r2 * r2 - 64.0 * r2 + 32.0) * gaussian(x, y)
}

/// Gaussian sampled on `[−2, 2]²` with the node count rounded from `4/h`.
pub fn gaussian_grid(h: f64) -> GridField {
    let n = (4.0 / h).round() as usize + 1;
    GridField::from_fn(n, n, h, (-2.0, -2.0), Boundary::MirrorNeumann, gaussian)
        .expect("spacing is positive")
}

/// Radii and angles used by [`anisotropy`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnisotropyProbe {
    pub r_min: f64,
    pub r_max: f64,
    pub radii: usize,
    pub angles: usize,
}

impl Default for AnisotropyProbe {
    fn default() -> Self {
        Self { r_min: 0.3, r_max: 1.5, radii: 25, angles: 360 }
    }
}

/// `A(w)`: the largest, over circles of radius `r`, of the angular standard
/// deviation of the bilinearly interpolated error `(Δ − L_Δ(w))[g]`.
pub fn anisotropy(w: StencilWeight, h: f64, probe: AnisotropyProbe) -> Result<f64, StencilError> {
    let g = gaussian_grid(h);
    let lap = apply(&laplacian_stencil(w, h)?, &g);
    let err: Vec<f64> = (0..g.height)
        .flat_map(|j| (0..g.width).map(move |i| (i, j)))
        .map(|(i, j)| gaussian_laplacian(g.x(i), g.y(j)) - lap.get(i, j))
        .collect();
    let err = g.with_values(err);
    let mut worst: f64 = 0.0;
    for k in 0..probe.radii {
        let r = if probe.radii == 1 {
            probe.r_min
        } else {
            probe.r_min + (probe.r_max - probe.r_min) * k as f64 / (probe.radii - 1) as f64
        };
        let samples: Vec<f64> = (0..probe.angles)
            .map(|a| {
                let t = 2.0 * std::f64::consts::PI * a as f64 / probe.angles as f64;
                err.bilinear(r * t.cos(), r * t.sin()).expect("circle lies inside the grid")
            })
            .collect();
        worst = worst.max(std_dev(&samples));
    }
    Ok(worst)
}

pub fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// The two w=4 operators whose truncation error is fitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaylorOperator {
    /// `D_x(4) g − ∂ₓg − c h² Δ∂ₓg`.
    Gradient,
    /// `L_Δ(4) g − Δg − c h² Δ²g`.
    Laplacian,
}

/// Largest residual over the nodes in `[−1, 1]²`, after subtracting `c h²`
/// times the leading error term.
pub fn taylor_residual(op: TaylorOperator, c: f64, h: f64) -> f64 {
    let g = gaussian_grid(h);
    let w = StencilWeight::Finite(4.0);
    let (discrete, exact, lead): (GridField, fn(f64, f64) -> f64, fn(f64, f64) -> f64) = match op {
        TaylorOperator::Gradient => (
            apply(&dx_stencil(w, h).expect("w=4 is valid"), &g),
            gaussian_dx,
            gaussian_laplacian_dx,
        ),
        TaylorOperator::Laplacian => (
            apply(&laplacian_stencil(w, h).expect("w=4 is valid"), &g),
            gaussian_laplacian,
            gaussian_bilaplacian,
        ),
    };
    let mut worst: f64 = 0.0;
    for j in 0..g.height {
        for i in 0..g.width {
            let (x, y) = (g.x(i), g.y(j));
            if x.abs() > 1.0 + 1e-9 || y.abs() > 1.0 + 1e-9 {
                continue;
            }
            let r = discrete.get(i, j) - exact(x, y) - c * h * h * lead(x, y);
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// Observed orders `log(E₁/E₂)/log(h₁/h₂)` between consecutive spacings.
pub fn richardson_slopes(hs: &[f64], errors: &[f64]) -> Vec<f64> {
    hs.windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}

/// Smooth non-symmetric test pair for the rotation check.
pub fn rotation_test_diffusivity(x: f64, y: f64) -> f64 {
    1.0 + 0.3 * (x + 0.5 * y).sin() + 0.2 * x * y
}

pub fn rotation_test_function(x: f64, y: f64) -> f64 {
    (0.8 * x - 0.4 * y + 0.3).sin() * (0.6 * y + 0.2 * x).cos() + 0.25 * x * x * y
}

/// `|E(θ, h) − E(0, h)|`: the change of the discrete quasi-Laplacian at the
/// origin when both `a` and `f` are rotated by `θ`. The continuous operator is
/// rotation equivariant, so only discretisation anisotropy remains.
pub fn rotation_residual(alpha: f64, beta: f64, theta: f64, h: f64) -> Result<f64, StencilError> {
    let at = |th: f64| -> Result<f64, StencilError> {
        let (s, c) = th.sin_cos();
        let rot = move |x: f64, y: f64| (c * x + s * y, -s * x + c * y);
        let f = GridField::from_fn(3, 3, h, (-h, -h), Boundary::MirrorNeumann, |x, y| {
            let (u, v) = rot(x, y);
            rotation_test_function(u, v)
        })
        .expect("spacing is positive");
        let a = FnDiffusivity {
            f: |x: f64, y: f64| {
                let (u, v) = rot(x, y);
                rotation_test_diffusivity(u, v)
            },
            h,
            origin: (-h, -h),
        };
        Ok(quasi_laplacian_apply(alpha, beta, &a, &f)?.field.get(1, 1))
    };
    Ok((at(theta)? - at(0.0)?).abs())
}

/// The Gaussian-bump filtering run and its level-set measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpRun {
    pub nodes: usize,
    pub lambda: f64,
    pub dt_over_h2: f64,
    pub steps: usize,
    pub level: f64,
    pub rays: usize,
}

impl Default for BumpRun {
    fn default() -> Self {
        Self { nodes: 256, lambda: 0.1, dt_over_h2: 0.2, steps: 200, level: 0.5, rays: 360 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BumpOutcome {
    pub angular_std: Option<f64>,
    pub relative_mass_drift: f64,
}

/// Filters `g` on `[−2, 2]²` with the `(α, β)` quasi-Laplacian and measures
/// the angular standard deviation of the level-set radius about the origin.
pub fn bump_run(
    run: BumpRun,
    alpha: f64,
    beta: f64,
    staggering: Staggering,
) -> Result<BumpOutcome, DiffusionError> {
    let h = 4.0 / (run.nodes - 1) as f64;
    let u0 = GridField::from_fn(run.nodes, run.nodes, h, (-2.0, -2.0), Boundary::MirrorNeumann, gaussian)
        .expect("spacing is positive");
    let cfg = DiffusionConfig {
        lambda: run.lambda,
        dt: Some(run.dt_over_h2 * h * h),
        steps: run.steps,
        alpha,
        beta,
        staggering,
        ..DiffusionConfig::default()
    };
    let out = diffusion::run(&u0, &cfg)?;
    let m0 = u0.sum();
    let drift = out.log.iter().map(|r| ((r.mass - m0) / m0).abs()).fold(0.0, f64::max);
    Ok(BumpOutcome {
        angular_std: diffusion::level_set_angular_std(&out.field, (0.0, 0.0), run.level, run.rays),
        relative_mass_drift: drift,
    })
}
