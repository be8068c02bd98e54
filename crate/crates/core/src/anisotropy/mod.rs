//! Convex norms on the sphere, handled through their 1-homogeneous
//! extension `F̄(x) = |x| F(x/|x|)`.
//!
//! On the unit sphere the Cahn–Hoffman map is `∇F̄` and the operator
//! `A_F = D²F + F·I` is `Hess F̄` restricted to the tangent plane, so no
//! sphere charts are needed. Convexity is certified on a quasi-uniform grid
//! at construction.

mod dual;
mod kernel;
pub mod sphere;
mod wulff;

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::linalg::{complement_basis, restrict};
use crate::{Error, Matrix, Result, Vector};

pub use dual::DualSolution;
use kernel::Kernel;
pub use wulff::WulffSamples;

/// How first and second derivatives of `F̄` (and of embeddings) are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    #[default]
    Analytic,
    FiniteDifference,
}

fn unit() -> f64 {
    1.0
}

/// Concrete norm families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum NormFamily {
    /// `F ≡ κ`.
    Constant {
        #[serde(default = "unit")]
        value: f64,
    },
    /// `F̄(x) = √(xᵀQx)` with `Q` symmetric positive definite.
    Quadratic {
        #[serde(rename = "Q")]
        q: Vec<Vec<f64>>,
    },
    /// `F̄(x) = (Σᵢ (xᵢ² + ε²|x|²)^{p/2})^{1/p}`, the homogeneous extension
    /// of the sphere function `(Σᵢ (uᵢ² + ε²)^{p/2})^{1/p}`.
    SmoothedLp {
        p: f64,
        #[serde(alias = "epsilon")]
        eps: f64,
    },
}

/// Serializable description of a norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    #[serde(flatten)]
    pub family: NormFamily,
    #[serde(default)]
    pub derivative_mode: DerivativeMode,
    /// Optional linear term `⟨b, x⟩` added to `F̄`. It translates the Wulff
    /// shape by `b` and leaves `A_F` unchanged; a nonzero drift makes the
    /// norm non-even.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drift: Option<Vec<f64>>,
    /// Ambient dimension, needed only when the family does not imply it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

impl NormSpec {
    pub fn constant(value: f64) -> Self {
        Self::from_family(NormFamily::Constant { value })
    }

    pub fn quadratic(q: Vec<Vec<f64>>) -> Self {
        Self::from_family(NormFamily::Quadratic { q })
    }

    pub fn diagonal<const D: usize>(diag: [f64; D]) -> Self {
        let q = (0..D)
            .map(|i| (0..D).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
            .collect();
        Self::quadratic(q)
    }

    pub fn smoothed_lp(p: f64, eps: f64) -> Self {
        Self::from_family(NormFamily::SmoothedLp { p, eps })
    }

    fn from_family(family: NormFamily) -> Self {
        Self { family, derivative_mode: DerivativeMode::Analytic, drift: None, dim: None }
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.derivative_mode = mode;
        self
    }

    pub fn with_drift(mut self, drift: Vec<f64>) -> Self {
        self.drift = Some(drift);
        self
    }

    /// Ambient dimension implied by the spec, if any.
    pub fn ambient_dim(&self) -> Option<usize> {
        if let Some(d) = self.dim {
            return Some(d);
        }
        if let NormFamily::Quadratic { q } = &self.family {
            return Some(q.len());
        }
        self.drift.as_ref().map(Vec::len)
    }

    /// True when the family is even and there is no drift.
    pub fn is_even(&self) -> bool {
        self.drift.as_ref().map_or(true, |b| b.iter().all(|&v| v == 0.0))
    }
}

/// Default resolution of the convexity certificate grid.
pub const DEFAULT_VALIDATION_RESOLUTION: usize = 16;

/// Orthonormal basis of the tangent plane `T_u S^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentFrame<const D: usize> {
    base: Vector<D>,
    basis: Vec<Vector<D>>,
}

impl<const D: usize> TangentFrame<D> {
    /// Canonical frame at the unit vector `u`.
    pub fn at(u: &Vector<D>) -> Self {
        Self { base: *u, basis: complement_basis(u) }
    }

    /// Frame with a caller-supplied basis; checked to 1e-12.
    pub fn new(base: Vector<D>, basis: Vec<Vector<D>>) -> Result<Self> {
        if basis.len() != D - 1 {
            return Err(Error::InvalidArgument(format!("tangent frame needs {} vectors", D - 1)));
        }
        if (base.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("frame base point is not a unit vector".into()));
        }
        for (i, a) in basis.iter().enumerate() {
            if (a.norm() - 1.0).abs() > 1e-12 || a.dot(&base).abs() > 1e-12 {
                return Err(Error::InvalidArgument("frame vector not unit or not tangent".into()));
            }
            if basis[i + 1..].iter().any(|b| a.dot(b).abs() > 1e-12) {
                return Err(Error::InvalidArgument("frame vectors not orthogonal".into()));
            }
        }
        Ok(Self { base, basis })
    }

    pub fn base(&self) -> &Vector<D> {
        &self.base
    }

    pub fn basis(&self) -> &[Vector<D>] {
        &self.basis
    }

    /// The frame whose vectors are `Σ_j rotation[(j, i)] e_j`.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Result<Self> {
        let basis = (0..D - 1)
            .map(|i| (0..D - 1).fold(Vector::<D>::zeros(), |acc, j| acc + self.basis[j] * rotation[(j, i)]))
            .collect();
        Self::new(self.base, basis)
    }
}

/// A validated anisotropy: evaluators for `F̄`, its gradient and Hessian,
/// plus the convexity certificate.
#[derive(Clone)]
pub struct AnisotropyNorm<const D: usize> {
    spec: NormSpec,
    kernel: Kernel<D>,
    drift: Vector<D>,
    reflected: bool,
    mode: DerivativeMode,
    convexity_margin: f64,
    validation_resolution: usize,
    validation_points: usize,
    /// Coarse seeds for the dual solver: `(z, z / F(z))`.
    seeds: Vec<(Vector<D>, Vector<D>)>,
    /// Upper bound for `max |φ|`, i.e. the circumradius of the Wulff shape.
    max_radius: f64,
    /// Lower bound for `min F`, the inradius of the Wulff shape.
    min_support: f64,
}

impl<const D: usize> fmt::Debug for AnisotropyNorm<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnisotropyNorm")
            .field("spec", &self.spec)
            .field("reflected", &self.reflected)
            .field("convexity_margin", &self.convexity_margin)
            .finish()
    }
}

impl<const D: usize> AnisotropyNorm<D> {
    /// Builds and certifies a norm. `validation_resolution` (≥ 8) controls
    /// the certificate grid: `8·res` points on the circle, `8·res²` on the
    /// 2-sphere.
    pub fn new(spec: NormSpec, validation_resolution: usize) -> Result<Self> {
        if !(2..=3).contains(&D) {
            return Err(Error::BadSpec(format!("ambient dimension {D} is not supported")));
        }
        if validation_resolution < 8 {
            return Err(Error::BadSpec("validation resolution must be at least 8".into()));
        }
        if let Some(dim) = spec.ambient_dim() {
            if dim != D {
                return Err(Error::BadSpec(format!("spec is {dim}-dimensional, expected {D}")));
            }
        }
        let kernel = Kernel::from_family(&spec.family)?;
        let drift = match &spec.drift {
            Some(b) if b.len() != D => {
                return Err(Error::BadSpec(format!("drift has {} entries, expected {D}", b.len())))
            }
            Some(b) if b.iter().any(|v| !v.is_finite()) => {
                return Err(Error::BadSpec("drift is not finite".into()))
            }
            Some(b) => Vector::<D>::from_iterator(b.iter().copied()),
            None => Vector::<D>::zeros(),
        };
        let mut norm = Self {
            mode: spec.derivative_mode,
            spec,
            kernel,
            drift,
            reflected: false,
            convexity_margin: 0.0,
            validation_resolution,
            validation_points: 0,
            seeds: Vec::new(),
            max_radius: 0.0,
            min_support: 0.0,
        };
        norm.certify()?;
        Ok(norm)
    }

    /// Shorthand for `new(spec, DEFAULT_VALIDATION_RESOLUTION)`.
    pub fn from_spec(spec: NormSpec) -> Result<Self> {
        Self::new(spec, DEFAULT_VALIDATION_RESOLUTION)
    }

    fn certify(&mut self) -> Result<()> {
        let grid = sphere::quasi_uniform::<D>(sphere::certificate_count::<D>(self.validation_resolution));
        let mut margin = f64::INFINITY;
        let mut worst = grid[0];
        for u in &grid {
            let f = self.eval(u);
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::BadSpec(format!("F is not positive at {:?} (value {f})", u.as_slice())));
            }
            let a = restrict(&self.hessian(u), &complement_basis(u));
            let min_eig = SymmetricEigen::new(a).eigenvalues.min();
            if min_eig < margin {
                margin = min_eig;
                worst = *u;
            }
        }
        if !(margin > 0.0) {
            return Err(Error::ConvexityViolation { point: worst.as_slice().to_vec(), eigenvalue: margin });
        }
        self.convexity_margin = margin;
        self.validation_points = grid.len();

        let seed_grid = sphere::quasi_uniform::<D>(sphere::dual_seed_count::<D>());
        self.seeds = seed_grid.iter().map(|z| (*z, z / self.eval(z))).collect();

        let exact_round = matches!(self.kernel, Kernel::Constant(_)) && self.drift.iter().all(|&b| b == 0.0);
        if exact_round {
            let kappa = self.eval(&seed_grid[0]);
            self.max_radius = kappa;
            self.min_support = kappa;
        } else {
            let (mut rmax, mut fmin) = (0.0f64, f64::INFINITY);
            for z in seed_grid.iter().chain(grid.iter()) {
                rmax = rmax.max(self.gradient(z).norm());
                fmin = fmin.min(self.eval(z));
            }
            // Grid extrema miss the true ones by O(spacing²); pad generously.
            self.max_radius = rmax * 1.03;
            self.min_support = fmin * 0.97;
        }
        Ok(())
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.mode
    }

    /// The same norm with derivatives taken in `mode`.
    pub fn with_mode(&self, mode: DerivativeMode) -> Self {
        let mut out = self.clone();
        out.mode = mode;
        out.spec.derivative_mode = mode;
        out
    }

    /// Minimum eigenvalue of `A_F` over the certificate grid.
    pub fn convexity_margin(&self) -> f64 {
        self.convexity_margin
    }

    pub fn validation_resolution(&self) -> usize {
        self.validation_resolution
    }

    pub fn validation_points(&self) -> usize {
        self.validation_points
    }

    pub fn is_reflected(&self) -> bool {
        self.reflected
    }

    pub fn is_even(&self) -> bool {
        self.spec.is_even()
    }

    pub(crate) fn max_radius(&self) -> f64 {
        self.max_radius
    }

    pub(crate) fn min_support(&self) -> f64 {
        self.min_support
    }

    pub(crate) fn seeds(&self) -> &[(Vector<D>, Vector<D>)] {
        &self.seeds
    }

    /// `F̄(x)` without argument checks.
    pub(crate) fn eval(&self, x: &Vector<D>) -> f64 {
        let y = if self.reflected { -x } else { *x };
        self.kernel.value(&y) + self.drift.dot(&y)
    }

    /// `F̄(x)`; errors on the zero vector.
    pub fn extension_value(&self, x: &Vector<D>) -> Result<f64> {
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(self.eval(x))
    }

    /// `F(u)` for a unit vector.
    pub fn support(&self, u: &Vector<D>) -> f64 {
        self.eval(u)
    }

    /// `∇F̄(x)`.
    pub fn gradient(&self, x: &Vector<D>) -> Vector<D> {
        match self.mode {
            DerivativeMode::Analytic => self.jet(x).1,
            DerivativeMode::FiniteDifference => {
                let h = f64::EPSILON.cbrt() * x.norm().max(1.0);
                Vector::<D>::from_fn(|i, _| {
                    let mut e = Vector::<D>::zeros();
                    e[i] = h;
                    (self.eval(&(x + e)) - self.eval(&(x - e))) / (2.0 * h)
                })
            }
        }
    }

    /// `Hess F̄(x)`.
    pub fn hessian(&self, x: &Vector<D>) -> Matrix<D> {
        match self.mode {
            DerivativeMode::Analytic => self.jet(x).2,
            DerivativeMode::FiniteDifference => {
                let h = f64::EPSILON.powf(0.25) * x.norm().max(1.0);
                let f0 = self.eval(x);
                let axis = |i: usize| {
                    let mut e = Vector::<D>::zeros();
                    e[i] = h;
                    e
                };
                let mut hess = Matrix::<D>::zeros();
                for i in 0..D {
                    let ei = axis(i);
                    hess[(i, i)] = (self.eval(&(x + ei)) - 2.0 * f0 + self.eval(&(x - ei))) / (h * h);
                    for j in 0..i {
                        let ej = axis(j);
                        let v = (self.eval(&(x + ei + ej)) - self.eval(&(x + ei - ej)) - self.eval(&(x - ei + ej))
                            + self.eval(&(x - ei - ej)))
                            / (4.0 * h * h);
                        hess[(i, j)] = v;
                        hess[(j, i)] = v;
                    }
                }
                hess
            }
        }
    }

    /// Value, gradient and Hessian in one pass (analytic mode), or assembled
    /// from the finite-difference evaluators.
    pub(crate) fn jet(&self, x: &Vector<D>) -> (f64, Vector<D>, Matrix<D>) {
        match self.mode {
            DerivativeMode::Analytic => {
                let y = if self.reflected { -x } else { *x };
                let (f, g, h) = self.kernel.jet(&y);
                let f = f + self.drift.dot(&y);
                let g = g + self.drift;
                if self.reflected {
                    (f, -g, h)
                } else {
                    (f, g, h)
                }
            }
            DerivativeMode::FiniteDifference => (self.eval(x), self.gradient(x), self.hessian(x)),
        }
    }

    /// Cahn–Hoffman map `φ(u) = F(u)u + grad_{S^n}F(u) = ∇F̄(u)`.
    pub fn cahn_hoffman(&self, u: &Vector<D>) -> Vector<D> {
        debug_assert!((u.norm() - 1.0).abs() < 1e-10, "cahn_hoffman needs a unit vector");
        self.gradient(u)
    }

    /// Matrix of `A_F` at the frame's base point, in the frame's basis.
    pub fn af_operator(&self, frame: &TangentFrame<D>) -> Result<DMatrix<f64>> {
        let a = self.af_in_basis(frame.base(), frame.basis());
        let min_eig = SymmetricEigen::new(a.clone()).eigenvalues.min();
        if !(min_eig > 0.0) {
            return Err(Error::ConvexityViolation { point: frame.base().as_slice().to_vec(), eigenvalue: min_eig });
        }
        Ok(a)
    }

    /// `A_F(u)` restricted to `basis` (assumed orthonormal and tangent at `u`).
    pub fn af_in_basis(&self, u: &Vector<D>, basis: &[Vector<D>]) -> DMatrix<f64> {
        let a = restrict(&self.hessian(u), basis);
        (&a + a.transpose()) * 0.5
    }

    /// Anisotropic distance `d_F(x, y) = F*(y − x)`.
    pub fn f_distance(&self, x: &Vector<D>, y: &Vector<D>) -> Result<f64> {
        self.dual_value(&(y - x))
    }

    /// The norm `x ↦ F̄(−x)`, whose Wulff shape is `−W_F`.
    pub fn reflected(&self) -> Self {
        let mut out = self.clone();
        out.reflected = !self.reflected;
        let seeds = sphere::quasi_uniform::<D>(sphere::dual_seed_count::<D>());
        out.seeds = seeds.iter().map(|z| (*z, z / out.eval(z))).collect();
        let grid = sphere::quasi_uniform::<D>(sphere::certificate_count::<D>(self.validation_resolution));
        out.convexity_margin = grid
            .iter()
            .map(|u| SymmetricEigen::new(restrict(&out.hessian(u), &complement_basis(u))).eigenvalues.min())
            .fold(f64::INFINITY, f64::min);
        out
    }
}
