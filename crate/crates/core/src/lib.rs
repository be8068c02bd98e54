//! Anisotropic geometry of closed hypersurfaces.
//!
//! A smooth convex norm `F` on the sphere determines a Wulff shape, a dual
//! norm `F*` and an asymmetric distance `d_F(x, y) = F*(y - x)`. Composing
//! its Cahn–Hoffman map with the Gauss map of a curve or surface gives the
//! anisotropic shape operator, whose eigenvalues are the anisotropic
//! principal curvatures. This crate evaluates all of these on parametric
//! curves in the plane and surfaces in space, and checks the classical
//! integral identities (Minkowski formulas, the Heintze–Karcher inequality,
//! the tube-volume formula) by quadrature.
//!
//! Ambient dimension is a const generic `D` (2 for curves, 3 for surfaces);
//! the hypersurface dimension is `n = D - 1`.

pub mod anisotropy;
pub mod cutlocus;
mod error;
pub mod export;
pub mod integrals;
pub mod linalg;
pub mod surface;

pub use error::{Error, Result};

/// Ambient vector.
pub type Vector<const D: usize> = nalgebra::SVector<f64, D>;
/// Ambient square matrix.
pub type Matrix<const D: usize> = nalgebra::SMatrix<f64, D, D>;

/// Chart parameter. Curves use only the first slot; surfaces use
/// `(polar angle, azimuth)`.
pub type Param = [f64; 2];

pub use anisotropy::{AnisotropyNorm, DerivativeMode, NormFamily, NormSpec, TangentFrame};
pub use integrals::{QuadratureGrid, VerificationReport};
pub use surface::{CurvatureSample, Hypersurface, Orientation, RadialFunction, ShapeBuilder};
