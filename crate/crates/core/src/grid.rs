//! Scalar fields on a square grid.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid must be at least 3x3, got {width}x{height}")]
    TooSmall { width: usize, height: usize },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("grid spacing must be positive and finite, got {0}")]
    BadSpacing(f64),
}

/// How samples outside the grid are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Half-sample mirror: index `-1` reads `0`, index `n` reads `n-1`.
    #[default]
    MirrorNeumann,
    Periodic,
}

impl Boundary {
    /// Maps a possibly out-of-range index to `0..n`.
    #[inline]
    pub fn resolve(self, i: isize, n: usize) -> usize {
        if i >= 0 && (i as usize) < n {
            return i as usize;
        }
        let n = n as isize;
        match self {
            Boundary::Periodic => i.rem_euclid(n) as usize,
            Boundary::MirrorNeumann => {
                let period = 2 * n;
                let m = i.rem_euclid(period);
                (if m < n { m } else { period - 1 - m }) as usize
            }
        }
    }
}

/// Row-major field; node `(i, j)` sits at `(x0 + i h, y0 + j h)`, `i` along x.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub width: usize,
    pub height: usize,
    pub h: f64,
    pub origin: (f64, f64),
    pub values: Vec<f64>,
    pub boundary: Boundary,
}

impl GridField {
    pub fn new(
        width: usize,
        height: usize,
        h: f64,
        values: Vec<f64>,
        boundary: Boundary,
    ) -> Result<Self, GridError> {
        if width < 3 || height < 3 {
            return Err(GridError::TooSmall { width, height });
        }
        if values.len() != width * height {
            return Err(GridError::LengthMismatch {
                expected: width * height,
                got: values.len(),
            });
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(GridError::BadSpacing(h));
        }
        Ok(Self {
            width,
            height,
            h,
            origin: (0.0, 0.0),
            values,
            boundary,
        })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(
        width: usize,
        height: usize,
        h: f64,
        origin: (f64, f64),
        boundary: Boundary,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        let mut values = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                values.push(f(origin.0 + i as f64 * h, origin.1 + j as f64 * h));
            }
        }
        let mut g = Self::new(width, height, h, values, boundary)?;
        g.origin = origin;
        Ok(g)
    }

    /// Same geometry, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            values,
            ..self.clone()
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.h
    }

    pub fn y(&self, j: usize) -> f64 {
        self.origin.1 + j as f64 * self.h
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.width + i]
    }

    /// Value at a possibly out-of-range node, per the boundary policy.
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        let ii = self.boundary.resolve(i, self.width);
        let jj = self.boundary.resolve(j, self.height);
        self.values[jj * self.width + ii]
    }

    /// Fixed-order serial sum.
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Bilinear interpolation at physical coordinates; `None` outside the grid.
    pub fn bilinear(&self, x: f64, y: f64) -> Option<f64> {
        let fx = (x - self.origin.0) / self.h;
        let fy = (y - self.origin.1) / self.h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let i = fx.floor() as usize;
        let j = fy.floor() as usize;
        if i + 1 >= self.width || j + 1 >= self.height {
            return None;
        }
        let tx = fx - i as f64;
        let ty = fy - j as f64;
        let v00 = self.get(i, j);
        let v10 = self.get(i + 1, j);
        let v01 = self.get(i, j + 1);
        let v11 = self.get(i + 1, j + 1);
        Some(
            (1.0 - ty) * ((1.0 - tx) * v00 + tx * v10) + ty * ((1.0 - tx) * v01 + tx * v11),
        )
    }
}

/// Weights of the degree-5 Lagrange interpolant through nodes
/// `base-2 ..= base+3` evaluated at `t`.
fn lagrange6_weights(t: f64, base: isize) -> [f64; 6] {
    let mut out = [0.0; 6];
    for (k, o) in out.iter_mut().enumerate() {
        let xk = (base - 2 + k as isize) as f64;
        let mut p = 1.0;
        for m in 0..6 {
            if m != k {
                let xm = (base - 2 + m as isize) as f64;
                p *= (t - xm) / (xk - xm);
            }
        }
        *o = p;
    }
    out
}

impl GridField {
    /// Tensor-product degree-5 Lagrange interpolation on the surrounding
    /// 6×6 nodes (sixth-order accurate). Taps outside the grid follow the
    /// boundary policy; `None` outside the node hull.
    pub fn interpolate6(&self, x: f64, y: f64) -> Option<f64> {
        let fx = (x - self.origin.0) / self.h;
        let fy = (y - self.origin.1) / self.h;
        if !(fx >= 0.0 && fy >= 0.0 && fx <= (self.width - 1) as f64 && fy <= (self.height - 1) as f64) {
            return None;
        }
        let i0 = fx.floor() as isize;
        let j0 = fy.floor() as isize;
        let wx = lagrange6_weights(fx, i0);
        let wy = lagrange6_weights(fy, j0);
        let mut acc = 0.0;
        for (b, wyb) in wy.iter().enumerate() {
            let mut row = 0.0;
            for (a, wxa) in wx.iter().enumerate() {
                row += wxa * self.at(i0 - 2 + a as isize, j0 - 2 + b as isize);
            }
            acc += wyb * row;
        }
        Some(acc)
    }
}
