//! Discrete circular and spherical means of directional derivatives.
//!
//! The crate builds mean-value weights for arbitrary direction sets (through
//! Veronese maps), the parameterized 3×3 gradient and Laplacian stencils, a
//! Perona–Malik diffusion filter on top of the rotation-optimized
//! quasi-Laplacian, a one-ring mesh curvature estimator and frequency-response
//! tools for explicit and implicit derivative schemes.

pub mod analysis;
pub mod curvature;
pub mod diffusion;
pub mod grid;
pub mod io;
pub mod meanops;
pub mod mesh;
pub mod spectral;
pub mod stencils;
pub mod tridiag;
pub mod veronese;
pub mod weights;
