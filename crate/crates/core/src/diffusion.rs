//! Perona–Malik diffusion `∂u/∂t = div(exp(−|∇u|/λ) ∇u)` by explicit Euler
//! steps of the staggered quasi-Laplacian.

use crate::grid::{Boundary, GridField};
use crate::stencils::{
    apply, dx_stencil, dy_stencil, quasi_laplacian_apply, StaggeredDiffusivity, StencilError,
    StencilWeight,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiffusionError {
    #[error("time step {dt} exceeds the stability bound {bound}")]
    StabilityViolation { dt: f64, bound: f64 },
    #[error("contrast parameter must be positive, got {0}")]
    BadLambda(f64),
    #[error("time step must be positive and finite, got {0}")]
    BadTimeStep(f64),
    #[error(transparent)]
    Stencil(#[from] StencilError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionConfig {
    /// Contrast parameter; `f64::INFINITY` gives linear heat flow.
    pub lambda: f64,
    /// `None` uses the stability bound for the grid spacing.
    pub dt: Option<f64>,
    pub steps: usize,
    pub alpha: f64,
    pub beta: f64,
    pub gradient_w: StencilWeight,
    pub boundary: Boundary,
    pub staggering: Staggering,
    /// Accept a `dt` above the stability bound.
    pub allow_unstable: bool,
}

impl Default for DiffusionConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            dt: None,
            steps: 100,
            alpha: 2.0 / 3.0,
            beta: 1.0 / 3.0,
            gradient_w: StencilWeight::Finite(4.0),
            boundary: Boundary::MirrorNeumann,
            staggering: Staggering::Average,
            allow_unstable: false,
        }
    }
}

/// Largest admissible step for diffusivity bounded by 1:
/// `0.9 · 2/ρ` with `ρ = 2(4α + 2β)/h²` the Gershgorin bound of the operator.
pub fn stability_bound(alpha: f64, beta: f64, h: f64) -> f64 {
    0.9 * h * h / (4.0 * alpha.abs() + 2.0 * beta.abs())
}

impl DiffusionConfig {
    /// The step actually taken on a grid of spacing `h`, after validation.
    pub fn time_step(&self, h: f64) -> Result<f64, DiffusionError> {
        if !(self.lambda > 0.0) {
            return Err(DiffusionError::BadLambda(self.lambda));
        }
        if ((self.alpha + self.beta) - 1.0).abs() > 1e-12 {
            return Err(StencilError::BadMix(self.alpha, self.beta).into());
        }
        let bound = stability_bound(self.alpha, self.beta, h);
        match self.dt {
            None => Ok(bound),
            Some(dt) if !(dt > 0.0 && dt.is_finite()) => Err(DiffusionError::BadTimeStep(dt)),
            Some(dt) if dt > bound && !self.allow_unstable => {
                Err(DiffusionError::StabilityViolation { dt, bound })
            }
            Some(dt) => Ok(dt),
        }
    }
}

/// How node diffusivities are carried to staggered positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Staggering {
    /// Mean of the two (axis midpoints) or four (diagonal midpoints)
    /// adjacent node values.
    #[default]
    Average,
    /// Axis midpoints additionally receive `(h²/8) ∂²a/∂t²` across the edge
    /// (`t` the transverse axis), so every staggered value carries the same
    /// `(h²/8) Δa` bias as the four-point diagonal mean.
    Isotropic,
}

/// Node diffusivities tabulated at every staggered position.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredField {
    pub centers: GridField,
    pub staggering: Staggering,
    table: Vec<f64>,
    cols: usize,
}

impl StaggeredField {
    pub fn new(centers: GridField, staggering: Staggering) -> Self {
        let cols = 2 * centers.width + 1;
        let rows = 2 * centers.height + 1;
        let mut s = Self { centers, staggering, table: Vec::new(), cols };
        let table = (0..rows as isize)
            .flat_map(|r| (0..cols as isize).map(move |c| (c - 1, r - 1)))
            .map(|(hx, hy)| s.compute(hx, hy))
            .collect();
        s.table = table;
        s
    }

    fn compute(&self, hx: isize, hy: isize) -> f64 {
        let c = &self.centers;
        let half = |v: isize| if v.rem_euclid(2) == 0 { (v / 2, v / 2) } else { ((v - 1) / 2, (v + 1) / 2) };
        let (x0, x1) = half(hx);
        let (y0, y1) = half(hy);
        match (x0 == x1, y0 == y1) {
            (true, true) => c.at(x0, y0),
            (false, true) => {
                let mean = 0.5 * (c.at(x0, y0) + c.at(x1, y0));
                match self.staggering {
                    Staggering::Average => mean,
                    Staggering::Isotropic => {
                        let side = 0.5 * (c.at(x0, y0 + 1) + c.at(x1, y0 + 1) + c.at(x0, y0 - 1) + c.at(x1, y0 - 1));
                        mean + (side - 2.0 * mean) / 8.0
                    }
                }
            }
            (true, false) => {
                let mean = 0.5 * (c.at(x0, y0) + c.at(x0, y1));
                match self.staggering {
                    Staggering::Average => mean,
                    Staggering::Isotropic => {
                        let side = 0.5 * (c.at(x0 + 1, y0) + c.at(x0 + 1, y1) + c.at(x0 - 1, y0) + c.at(x0 - 1, y1));
                        mean + (side - 2.0 * mean) / 8.0
                    }
                }
            }
            (false, false) => 0.25 * (c.at(x0, y0) + c.at(x1, y0) + c.at(x0, y1) + c.at(x1, y1)),
        }
    }
}

impl StaggeredDiffusivity for StaggeredField {
    fn value(&self, hx: isize, hy: isize) -> f64 {
        let (c, r) = (hx + 1, hy + 1);
        if c >= 0 && r >= 0 && (c as usize) < self.cols && (r as usize) < self.table.len() / self.cols {
            self.table[r as usize * self.cols + c as usize]
        } else {
            self.compute(hx, hy)
        }
    }
}

/// `exp(−|∇u|/λ)` at the nodes, with `∇` from `D_x(w)`, `D_y(w)`.
pub fn diffusivity(
    u: &GridField,
    lambda: f64,
    gradient_w: StencilWeight,
    staggering: Staggering,
) -> Result<StaggeredField, DiffusionError> {
    if !(lambda > 0.0) {
        return Err(DiffusionError::BadLambda(lambda));
    }
    if lambda.is_infinite() {
        return Ok(StaggeredField::new(u.with_values(vec![1.0; u.values.len()]), staggering));
    }
    let gx = apply(&dx_stencil(gradient_w, u.h)?, u);
    let gy = apply(&dy_stencil(gradient_w, u.h)?, u);
    let values = gx
        .values
        .iter()
        .zip(&gy.values)
        .map(|(x, y)| (-x.hypot(*y) / lambda).exp())
        .collect();
    Ok(StaggeredField::new(u.with_values(values), staggering))
}

/// One explicit Euler step.
pub fn step(u: &GridField, cfg: &DiffusionConfig) -> Result<GridField, DiffusionError> {
    let dt = cfg.time_step(u.h)?;
    let mut u = u.clone();
    u.boundary = cfg.boundary;
    step_with(&u, cfg, dt)
}

fn step_with(u: &GridField, cfg: &DiffusionConfig, dt: f64) -> Result<GridField, DiffusionError> {
    let a = diffusivity(u, cfg.lambda, cfg.gradient_w, cfg.staggering)?;
    let q = quasi_laplacian_apply(cfg.alpha, cfg.beta, &a, u)?;
    Ok(u.with_values(
        u.values
            .iter()
            .zip(&q.field.values)
            .map(|(v, l)| v + dt * l)
            .collect(),
    ))
}

/// One step of linear heat flow `u + dt (α L₊ + β L×) u`.
pub fn linear_heat_step(u: &GridField, alpha: f64, beta: f64, dt: f64) -> GridField {
    let inv_h2 = 1.0 / (u.h * u.h);
    let half_inv_h2 = 0.5 * inv_h2;
    let mut out = Vec::with_capacity(u.values.len());
    for j in 0..u.height as isize {
        for i in 0..u.width as isize {
            let fc = u.at(i, j);
            let plus = u.at(i + 1, j) + u.at(i - 1, j) + u.at(i, j + 1) + u.at(i, j - 1) - 4.0 * fc;
            let mut cross = 0.0;
            if beta != 0.0 {
                cross = u.at(i + 1, j + 1) + u.at(i - 1, j + 1) + u.at(i + 1, j - 1)
                    + u.at(i - 1, j - 1)
                    - 4.0 * fc;
            }
            out.push(fc + dt * (alpha * plus * inv_h2 + beta * cross * half_inv_h2));
        }
    }
    u.with_values(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MassRecord {
    pub step: usize,
    pub mass: f64,
    pub min: f64,
    pub max: f64,
}

impl MassRecord {
    fn of(step: usize, u: &GridField) -> Self {
        Self { step, mass: u.sum(), min: u.min(), max: u.max() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub field: GridField,
    /// Entry `k` describes the field after `k` steps.
    pub log: Vec<MassRecord>,
    pub dt: f64,
}

pub fn run(u0: &GridField, cfg: &DiffusionConfig) -> Result<RunOutput, DiffusionError> {
    let dt = cfg.time_step(u0.h)?;
    let mut u = u0.clone();
    u.boundary = cfg.boundary;
    let mut log = vec![MassRecord::of(0, &u)];
    for k in 1..=cfg.steps {
        u = step_with(&u, cfg, dt)?;
        log.push(MassRecord::of(k, &u));
    }
    Ok(RunOutput { field: u, log, dt })
}

/// Radius at which `u` crosses `level` along each of `n_angles` rays from
/// `center`, found by marching outwards in steps of `h/4` and bisecting the
/// sixth-order interpolant [`GridField::interpolate6`]. `None` for rays that leave the grid first.
pub fn level_set_radii(
    u: &GridField,
    center: (f64, f64),
    level: f64,
    n_angles: usize,
) -> Vec<Option<f64>> {
    let sample = |r: f64, t: f64| u.interpolate6(center.0 + r * t.cos(), center.1 + r * t.sin());
    let dr = 0.25 * u.h;
    (0..n_angles)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / n_angles as f64;
            let v0 = sample(0.0, t)? - level;
            let mut r0 = 0.0;
            loop {
                let r1 = r0 + dr;
                let v1 = sample(r1, t)? - level;
                if v0.signum() != v1.signum() || v1 == 0.0 {
                    let (mut lo, mut hi) = (r0, r1);
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        let vm = sample(mid, t)? - level;
                        if vm.signum() == v0.signum() {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    return Some(0.5 * (lo + hi));
                }
                r0 = r1;
            }
        })
        .collect()
}

/// Population standard deviation of the level-set radii; `None` if any ray
/// misses the level.
pub fn level_set_angular_std(
    u: &GridField,
    center: (f64, f64),
    level: f64,
    n_angles: usize,
) -> Option<f64> {
    let radii: Option<Vec<f64>> = level_set_radii(u, center, level, n_angles).into_iter().collect();
    let radii = radii?;
    let n = radii.len() as f64;
    let mean = radii.iter().sum::<f64>() / n;
    Some((radii.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / n).sqrt())
}
