//! Closed parametric curves and surfaces over sphere-type charts, their
//! Gauss maps, and the anisotropic shape operator `S_F = −A_F ∘ dν`.

mod chart;
mod curvature;
mod symmetric;

use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisotropyNorm;
use crate::linalg::complement_frame;
use crate::{DerivativeMode, Error, Param, Result, Vector};

pub(crate) use chart::unit_chart;
pub use curvature::CurvatureSample;
pub use symmetric::{elementary_symmetric, hfr, hfr_all, maclaurin_report, MaclaurinReport, MaclaurinResidual};

/// Which unit normal the Gauss map returns.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Inner,
    Outer,
}

impl Orientation {
    /// Sign relative to the chart's outward normal.
    fn sign(self) -> f64 {
        match self {
            Self::Inner => -1.0,
            Self::Outer => 1.0,
        }
    }
}

fn default_base() -> f64 {
    1.0
}

fn default_power() -> u32 {
    2
}

/// Radius as a function of direction for star-shaped graphs `r(u)·u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RadialFunction {
    Constant {
        radius: f64,
    },
    /// `base + amplitude·u_axis^power`.
    Bump {
        amplitude: f64,
        /// Coordinate index; defaults to the last axis.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        axis: Option<usize>,
        #[serde(default = "default_power")]
        power: u32,
        #[serde(default = "default_base")]
        base: f64,
    },
    /// The ellipsoid `Σ xᵢ²/aᵢ² = 1` written as a radial graph.
    Ellipsoid {
        semi_axes: Vec<f64>,
    },
}

/// Serializable surface description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeBuilder {
    #[serde(alias = "circle")]
    Sphere {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    #[serde(alias = "ellipse")]
    Ellipsoid {
        semi_axes: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    RadialGraph {
        radial: RadialFunction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
    /// `ρ` times the Wulff shape of the norm, translated to `center`.
    ScaledWulff {
        rho: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
    },
}

impl ShapeBuilder {
    pub fn sphere(radius: f64) -> Self {
        Self::Sphere { radius, center: None }
    }

    pub fn ellipsoid(semi_axes: &[f64]) -> Self {
        Self::Ellipsoid { semi_axes: semi_axes.to_vec(), center: None }
    }

    pub fn radial(radial: RadialFunction) -> Self {
        Self::RadialGraph { radial, center: None }
    }

    /// `r(u) = 1 + amplitude·u_last²`.
    pub fn bumpy_sphere(amplitude: f64) -> Self {
        Self::radial(RadialFunction::Bump { amplitude, axis: None, power: 2, base: 1.0 })
    }

    pub fn scaled_wulff(rho: f64) -> Self {
        Self::ScaledWulff { rho, center: None }
    }

    pub fn centered_at(mut self, c: &[f64]) -> Self {
        match &mut self {
            Self::Sphere { center, .. }
            | Self::Ellipsoid { center, .. }
            | Self::RadialGraph { center, .. }
            | Self::ScaledWulff { center, .. } => *center = Some(c.to_vec()),
        }
        self
    }

    fn center(&self) -> Option<&Vec<f64>> {
        match self {
            Self::Sphere { center, .. }
            | Self::Ellipsoid { center, .. }
            | Self::RadialGraph { center, .. }
            | Self::ScaledWulff { center, .. } => center.as_ref(),
        }
    }

    /// Ambient dimension implied by vector-valued parameters, if any.
    pub fn ambient_dim(&self) -> Option<usize> {
        match self {
            Self::Ellipsoid { semi_axes, .. } => Some(semi_axes.len()),
            Self::RadialGraph { radial: RadialFunction::Ellipsoid { semi_axes }, .. } => Some(semi_axes.len()),
            _ => self.center().map(Vec::len),
        }
    }

    pub fn needs_norm(&self) -> bool {
        matches!(self, Self::ScaledWulff { .. })
    }

    /// Builds and validates the surface. `norm` is required for
    /// `scaled_wulff` and ignored otherwise.
    pub fn build<const D: usize>(&self, norm: Option<&AnisotropyNorm<D>>, mode: DerivativeMode) -> Result<Hypersurface<D>> {
        if !(2..=3).contains(&D) {
            return Err(Error::BadSpec(format!("ambient dimension {D} is not supported")));
        }
        let vector = |v: &[f64], what: &str| -> Result<Vector<D>> {
            if v.len() != D || v.iter().any(|x| !x.is_finite()) {
                return Err(Error::BadSpec(format!("{what} must have {D} finite entries")));
            }
            Ok(Vector::<D>::from_iterator(v.iter().copied()))
        };
        let positive = |v: f64, what: &str| -> Result<f64> {
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(Error::BadSpec(format!("{what} must be positive, got {v}")))
            }
        };
        let center = match self.center() {
            Some(c) => vector(c, "center")?,
            None => Vector::<D>::zeros(),
        };
        let mut noise = f64::EPSILON;
        let embedding = match self {
            Self::Sphere { radius, .. } => Embedding::Sphere { radius: positive(*radius, "radius")? },
            Self::Ellipsoid { semi_axes, .. } => {
                let axes = vector(semi_axes, "semi_axes")?;
                for a in axes.iter() {
                    positive(*a, "semi-axis")?;
                }
                Embedding::Ellipsoid { axes }
            }
            Self::RadialGraph { radial, .. } => Embedding::Radial(Radial::resolve(radial)?),
            Self::ScaledWulff { rho, .. } => {
                let norm = norm.ok_or_else(|| Error::BadSpec("scaled_wulff needs a norm".into()))?;
                if norm.derivative_mode() == DerivativeMode::FiniteDifference && mode == DerivativeMode::FiniteDifference {
                    // Positions are themselves difference quotients of F̄.
                    noise = f64::EPSILON.powf(2.0 / 3.0);
                }
                Embedding::Wulff { reflected: Box::new(norm.reflected()), rho: positive(*rho, "rho")? }
            }
        };
        let mut surface = Hypersurface {
            builder: self.clone(),
            embedding,
            center,
            orientation: Orientation::Inner,
            mode,
            scale: 1.0,
            offset: Vector::<D>::zeros(),
            noise,
            min_singular_value: 0.0,
        };
        surface.validate()?;
        Ok(surface)
    }
}

#[derive(Clone, Debug)]
enum Radial<const D: usize> {
    Constant(f64),
    Bump { amplitude: f64, axis: Vector<D>, power: i32, base: f64 },
    Ellipsoid { inv2: Vector<D> },
}

impl<const D: usize> Radial<D> {
    fn resolve(spec: &RadialFunction) -> Result<Self> {
        match spec {
            RadialFunction::Constant { radius } if radius.is_finite() && *radius > 0.0 => Ok(Self::Constant(*radius)),
            RadialFunction::Constant { radius } => Err(Error::BadSpec(format!("radius must be positive, got {radius}"))),
            RadialFunction::Bump { amplitude, axis, power, base } => {
                let axis = axis.unwrap_or(D - 1);
                if axis >= D {
                    return Err(Error::BadSpec(format!("bump axis {axis} out of range")));
                }
                if !(base.is_finite() && amplitude.is_finite() && base - amplitude.abs() > 0.0) {
                    return Err(Error::BadSpec("bump radius must stay positive".into()));
                }
                let mut e = Vector::<D>::zeros();
                e[axis] = 1.0;
                Ok(Self::Bump { amplitude: *amplitude, axis: e, power: *power as i32, base: *base })
            }
            RadialFunction::Ellipsoid { semi_axes } => {
                if semi_axes.len() != D || semi_axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
                    return Err(Error::BadSpec(format!("radial ellipsoid needs {D} positive semi-axes")));
                }
                Ok(Self::Ellipsoid { inv2: Vector::<D>::from_iterator(semi_axes.iter().map(|a| 1.0 / (a * a))) })
            }
        }
    }

    /// `r`, `∇r`, `Hess r` of an ambient extension, evaluated on the sphere.
    fn jet(&self, u: &Vector<D>) -> (f64, Vector<D>, crate::Matrix<D>) {
        match self {
            Self::Constant(r) => (*r, Vector::<D>::zeros(), crate::Matrix::<D>::zeros()),
            Self::Bump { amplitude, axis, power, base } => {
                let s = axis.dot(u);
                let m = *power;
                let r = base + amplitude * s.powi(m);
                let d1 = if m >= 1 { amplitude * m as f64 * s.powi(m - 1) } else { 0.0 };
                let d2 = if m >= 2 { amplitude * (m * (m - 1)) as f64 * s.powi(m - 2) } else { 0.0 };
                (r, axis * d1, axis * axis.transpose() * d2)
            }
            Self::Ellipsoid { inv2 } => {
                // r(x) = (xᵀ A⁻² x)^{-1/2}
                let a = inv2.component_mul(u);
                let r = u.dot(&a).powf(-0.5);
                let grad = -a * r.powi(3);
                let hess = -crate::Matrix::<D>::from_diagonal(inv2) * r.powi(3) + a * a.transpose() * (3.0 * r.powi(5));
                (r, grad, hess)
            }
        }
    }
}

#[derive(Clone, Debug)]
enum Embedding<const D: usize> {
    Sphere { radius: f64 },
    Ellipsoid { axes: Vector<D> },
    Radial(Radial<D>),
    /// `X = ρ φ̃(u)` with `F̃(x) = F̄(−x)`, i.e. `−ρ φ(−u)`. Its inner normal
    /// at `u` is `−u`, which makes every anisotropic curvature `1/ρ`.
    Wulff { reflected: Box<AnisotropyNorm<D>>, rho: f64 },
}

/// Position, tangents, outward chart normal `N` and `hᵢⱼ = ⟨∂ᵢ∂ⱼX, N⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<const D: usize> {
    pub position: Vector<D>,
    pub tangents: [Vector<D>; 2],
    pub normal: Vector<D>,
    pub second_form: [[f64; 2]; 2],
}

/// A validated closed curve (`D = 2`) or surface (`D = 3`).
#[derive(Clone, Debug)]
pub struct Hypersurface<const D: usize> {
    builder: ShapeBuilder,
    embedding: Embedding<D>,
    center: Vector<D>,
    orientation: Orientation,
    mode: DerivativeMode,
    scale: f64,
    offset: Vector<D>,
    noise: f64,
    min_singular_value: f64,
}

/// Unit normal from tangents: clockwise rotation for curves, cross product for surfaces.
fn raw_normal<const D: usize>(t: &[Vector<D>; 2]) -> Option<Vector<D>> {
    let n = if D == 2 {
        Vector::<D>::from_fn(|i, _| if i == 0 { t[0][1] } else { -t[0][0] })
    } else {
        let (a, b) = (&t[0], &t[1]);
        Vector::<D>::from_fn(|i, _| {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            a[j] * b[k] - a[k] * b[j]
        })
    };
    let len = n.norm();
    (len > 0.0).then(|| n / len)
}

/// Smallest singular value of the `D × (D−1)` Jacobian.
pub(crate) fn min_singular<const D: usize>(t: &[Vector<D>; 2]) -> f64 {
    if D == 2 {
        return t[0].norm();
    }
    let (a, b, c) = (t[0].norm_squared(), t[0].dot(&t[1]), t[1].norm_squared());
    let mean = 0.5 * (a + c);
    let det = (a * c - b * b).max(0.0);
    // Smaller Gram eigenvalue as det / larger, avoiding cancellation.
    let big = mean + (0.25 * (a - c) * (a - c) + b * b).sqrt();
    if big == 0.0 {
        0.0
    } else {
        (det / big).sqrt()
    }
}

impl<const D: usize> Hypersurface<D> {
    /// Intrinsic dimension `n`.
    pub fn n(&self) -> usize {
        D - 1
    }

    pub fn builder(&self) -> &ShapeBuilder {
        &self.builder
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn derivative_mode(&self) -> DerivativeMode {
        self.mode
    }

    /// Smallest Jacobian singular value seen during validation.
    pub fn min_singular_value(&self) -> f64 {
        self.min_singular_value
    }

    /// Point the surface is star-shaped about.
    pub fn center(&self) -> Vector<D> {
        self.center * self.scale + self.offset
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    /// The surface moved by `v`.
    pub fn translated(&self, v: &Vector<D>) -> Self {
        let mut out = self.clone();
        out.offset += v;
        out
    }

    /// The surface scaled about the origin by `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Self> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidArgument(format!("scale factor must be positive, got {k}")));
        }
        let mut out = self.clone();
        out.scale *= k;
        out.offset *= k;
        out.min_singular_value *= k;
        Ok(out)
    }

    fn base_position(&self, p: &Param) -> Vector<D> {
        self.at_direction(&unit_chart::<D>(p).u)
    }

    /// Unscaled position over the sphere direction `u`.
    fn at_direction(&self, u: &Vector<D>) -> Vector<D> {
        match &self.embedding {
            Embedding::Sphere { radius } => self.center + u * *radius,
            Embedding::Ellipsoid { axes } => self.center + axes.component_mul(u),
            Embedding::Radial(r) => self.center + u * r.jet(u).0,
            Embedding::Wulff { reflected, rho } => self.center + reflected.gradient(u) * *rho,
        }
    }

    /// `X(p)`.
    pub fn position(&self, p: &Param) -> Vector<D> {
        self.base_position(p) * self.scale + self.offset
    }

    /// First-order data at `p`, in the surface's derivative mode.
    pub fn jet(&self, p: &Param) -> Result<Jet<D>> {
        let mut jet = match self.mode {
            DerivativeMode::Analytic => self.analytic_jet(p),
            DerivativeMode::FiniteDifference => self.difference_jet(p),
        }
        .ok_or(Error::DegenerateJacobian { param: *p, singular_value: 0.0 })?;
        jet.position = jet.position * self.scale + self.offset;
        for i in 0..2 {
            jet.tangents[i] *= self.scale;
            for j in 0..2 {
                jet.second_form[i][j] *= self.scale;
            }
        }
        Ok(jet)
    }

    fn from_second_derivatives(x: Vector<D>, dx: [Vector<D>; 2], ddx: [[Vector<D>; 2]; 2]) -> Option<Jet<D>> {
        let normal = raw_normal(&dx)?;
        let n = D - 1;
        let mut h = [[0.0; 2]; 2];
        for i in 0..n {
            for j in 0..n {
                h[i][j] = ddx[i][j].dot(&normal);
            }
        }
        Some(Jet { position: x, tangents: dx, normal, second_form: h })
    }

    fn analytic_jet(&self, p: &Param) -> Option<Jet<D>> {
        let c = unit_chart::<D>(p);
        let zero = Vector::<D>::zeros();
        let (x, dx, ddx) = match &self.embedding {
            Embedding::Sphere { radius } => {
                let r = *radius;
                (self.center + c.u * r, c.du.map(|v| v * r), c.ddu.map(|row| row.map(|v| v * r)))
            }
            Embedding::Ellipsoid { axes } => (
                self.center + axes.component_mul(&c.u),
                c.du.map(|v| axes.component_mul(&v)),
                c.ddu.map(|row| row.map(|v| axes.component_mul(&v))),
            ),
            Embedding::Radial(radial) => {
                let (r, g, h) = radial.jet(&c.u);
                let dr = [g.dot(&c.du[0]), g.dot(&c.du[1])];
                let dx = [c.u * dr[0] + c.du[0] * r, c.u * dr[1] + c.du[1] * r];
                let mut ddx = [[zero; 2]; 2];
                for i in 0..2 {
                    for j in 0..2 {
                        let drr = c.du[i].dot(&(h * c.du[j])) + g.dot(&c.ddu[i][j]);
                        ddx[i][j] = c.u * drr + c.du[j] * dr[i] + c.du[i] * dr[j] + c.ddu[i][j] * r;
                    }
                }
                (self.center + c.u * r, dx, ddx)
            }
            Embedding::Wulff { reflected, rho } => {
                // ⟨∂ᵢX, u⟩ = 0 by the Euler identity, so ⟨∂ᵢ∂ⱼX, u⟩ = −⟨∂ᵢX, ∂ⱼu⟩:
                // no third derivatives of F̄ are needed.
                let (_, g, h) = reflected.jet(&c.u);
                let dx = [h * c.du[0] * *rho, h * c.du[1] * *rho];
                let mut second = [[0.0; 2]; 2];
                for i in 0..D - 1 {
                    for j in 0..D - 1 {
                        second[i][j] = -dx[i].dot(&c.du[j]);
                    }
                }
                return Some(Jet { position: self.center + g * *rho, tangents: dx, normal: c.u, second_form: second });
            }
        };
        Self::from_second_derivatives(x, dx, ddx)
    }

    /// Differences are taken in the gnomonic chart `w ↦ X((u₀ + Σ wₖeₖ)/|·|)`
    /// around `u₀ = u(p)`, which stays well conditioned at the poles of the
    /// sphere chart, then carried back with the analytic chart jet.
    fn difference_jet(&self, p: &Param) -> Option<Jet<D>> {
        let n = D - 1;
        // fourth-order stencils, steps balanced against the evaluation noise
        let h1 = self.noise.powf(0.2);
        let h2 = self.noise.powf(1.0 / 6.0);
        let c = unit_chart::<D>(p);
        let e = complement_frame(&c.u);
        let at = |shift: &[(usize, f64)]| {
            let mut v = c.u;
            for &(k, d) in shift {
                v += e[k] * d;
            }
            self.at_direction(&v.normalize())
        };
        let x = self.at_direction(&c.u);
        let zero = Vector::<D>::zeros();
        let mut g = [zero; 2];
        let mut gg = [[zero; 2]; 2];
        for k in 0..n {
            let f = |d: f64| at(&[(k, d)]);
            g[k] = (f(-2.0 * h1) - f(-h1) * 8.0 + f(h1) * 8.0 - f(2.0 * h1)) / (12.0 * h1);
            gg[k][k] = (-f(-2.0 * h2) + f(-h2) * 16.0 - x * 30.0 + f(h2) * 16.0 - f(2.0 * h2)) / (12.0 * h2 * h2);
        }
        if n == 2 {
            let mixed = |h: f64| {
                (at(&[(0, h), (1, h)]) - at(&[(0, h), (1, -h)]) - at(&[(0, -h), (1, h)]) + at(&[(0, -h), (1, -h)]))
                    / (4.0 * h * h)
            };
            // Richardson step removes the h² term
            let m = (mixed(h2) * 4.0 - mixed(2.0 * h2)) / 3.0;
            gg[0][1] = m;
            gg[1][0] = m;
        }
        // At p the gnomonic coordinates have ∂ᵢw = ⟨∂ᵢu, e⟩ and ∂ᵢ∂ⱼw = ⟨∂ᵢ∂ⱼu, e⟩.
        let w1 = |k: usize, i: usize| c.du[i].dot(&e[k]);
        let w2 = |k: usize, i: usize, j: usize| c.ddu[i][j].dot(&e[k]);
        let mut dx = [zero; 2];
        let mut ddx = [[zero; 2]; 2];
        for i in 0..n {
            dx[i] = (0..n).fold(zero, |acc, k| acc + g[k] * w1(k, i));
            for j in 0..n {
                let mut v = zero;
                for k in 0..n {
                    v += g[k] * w2(k, i, j);
                    for l in 0..n {
                        v += gg[k][l] * (w1(k, i) * w1(l, j));
                    }
                }
                ddx[i][j] = v;
            }
        }
        Self::from_second_derivatives(x, dx, ddx)
    }

    /// Validation nodes: 256 points on the circle, or a 32 × 64 midpoint grid.
    fn validation_params() -> Vec<Param> {
        let tau = std::f64::consts::TAU;
        if D == 2 {
            (0..256).map(|k| [tau * (k as f64 + 0.5) / 256.0, 0.0]).collect()
        } else {
            let mut out = Vec::with_capacity(32 * 64);
            for i in 0..32 {
                let t = std::f64::consts::PI * (i as f64 + 0.5) / 32.0;
                for j in 0..64 {
                    out.push([t, tau * j as f64 / 64.0]);
                }
            }
            out
        }
    }

    fn validate(&mut self) -> Result<()> {
        let mut smin = f64::INFINITY;
        let mut size: f64 = 0.0;
        for p in Self::validation_params() {
            let jet = self.jet(&p).map_err(|_| Error::ImmersionFailure(format!("no normal at {p:?}")))?;
            let s = min_singular(&jet.tangents);
            if !(s > 1e-8) {
                return Err(Error::ImmersionFailure(format!("Jacobian singular value {s:e} at {p:?}")));
            }
            smin = smin.min(s);
            let radial = jet.position - self.center();
            size = size.max(radial.norm());
            // The outward chart normal must point away from the center, so the
            // inner normal points toward it.
            if !(radial.dot(&jet.normal) > 0.0) {
                return Err(Error::ImmersionFailure(format!("normal points away from the interior at {p:?}")));
            }
        }
        let tol = 1e-10 * size.max(1.0);
        let tau = std::f64::consts::TAU;
        let seam: Vec<f64> = if D == 2 { vec![0.0] } else { (1..8).map(|k| std::f64::consts::PI * k as f64 / 8.0).collect() };
        for t in seam {
            let (a, b) = if D == 2 { ([0.0, 0.0], [tau, 0.0]) } else { ([t, 0.0], [t, tau]) };
            let (ja, jb) = (self.jet(&a)?, self.jet(&b)?);
            let gap = (ja.position - jb.position).norm().max((ja.tangents[0] - jb.tangents[0]).norm());
            let gap = if D == 3 { gap.max((ja.tangents[1] - jb.tangents[1]).norm()) } else { gap };
            if gap > tol {
                return Err(Error::ImmersionFailure(format!("chart seam does not close (gap {gap:e})")));
            }
        }
        if D == 3 {
            for pole in [0.0, std::f64::consts::PI] {
                let x0 = self.position(&[pole, 0.0]);
                for k in 1..8 {
                    let x = self.position(&[pole, tau * k as f64 / 8.0]);
                    if (x - x0).norm() > tol {
                        return Err(Error::ImmersionFailure("chart does not collapse at a pole".into()));
                    }
                }
            }
        }
        self.min_singular_value = smin;
        Ok(())
    }
}
