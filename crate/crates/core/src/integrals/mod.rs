//! Quadrature on parametric hypersurfaces and the integral identities that
//! every closed hypersurface (or every Wulff shape) satisfies.

mod gauss;
mod identities;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::anisotropy::AnisotropyNorm;
use crate::linalg::pairwise_sum;
use crate::surface::{min_singular, CurvatureSample, Hypersurface};
use crate::{Error, Param, Result, Vector};

pub use gauss::gauss_legendre;
pub use identities::{
    enclosed_volume, fit_report, hk_deficit, minkowski_residual, wulff_fit, SampledSurface, WulffFit,
    MINKOWSKI_TOLERANCE, WULFF_RMS_TOLERANCE,
};

/// Smallest coarsest-level resolution: 64 nodes on curves, 32 × 64 on surfaces.
pub const MIN_RESOLUTION: [usize; 2] = [32, 64];
pub const MIN_CURVE_RESOLUTION: usize = 64;

/// Multiple of `ε · Σ|terms|` charged as rounding error in every estimate.
const ROUNDING_FLOOR: f64 = 256.0 * f64::EPSILON;

/// One level of the refinement ladder.
#[derive(Clone, Debug)]
pub struct GridLevel {
    /// `[N]` for curves, `[N_θ, N_φ]` for surfaces.
    pub shape: [usize; 2],
    pub params: Vec<Param>,
    pub weights: Vec<f64>,
    pub area_elements: Vec<f64>,
}

/// Tensor-product quadrature over the chart, with each level doubling the
/// resolution of the previous one.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    n: usize,
    levels: Vec<GridLevel>,
}

/// A quadrature result with its error estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Integral {
    /// Finest-level value.
    pub value: f64,
    /// `max(|I_L − I_{L−1}|, rounding floor)`.
    pub error_estimate: f64,
    pub level_values: Vec<f64>,
}

impl Integral {
    fn combine(levels: Vec<(f64, f64)>) -> Self {
        let values: Vec<f64> = levels.iter().map(|l| l.0).collect();
        let last = values.len() - 1;
        let difference = (values[last] - values[last - 1]).abs();
        let floor = ROUNDING_FLOOR * levels[last].1;
        Self { value: values[last], error_estimate: difference.max(floor), level_values: values }
    }

    /// `a·self + b·other`, with errors added.
    pub fn linear(&self, a: f64, other: &Integral, b: f64) -> Integral {
        Integral {
            value: a * self.value + b * other.value,
            error_estimate: a.abs() * self.error_estimate + b.abs() * other.error_estimate,
            level_values: self.level_values.iter().zip(&other.level_values).map(|(x, y)| a * x + b * y).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> Integral {
        self.linear(a, self, 0.0)
    }
}

fn periodic_nodes(count: usize) -> Vec<f64> {
    (0..count).map(|k| std::f64::consts::TAU * k as f64 / count as f64).collect()
}

impl QuadratureGrid {
    /// Builds `levels ≥ 2` levels starting at `resolution` (`[N, _]` for
    /// curves, `[N_θ, N_φ]` for surfaces).
    pub fn build<const D: usize>(surface: &Hypersurface<D>, resolution: [usize; 2], levels: usize) -> Result<Self> {
        let n = D - 1;
        if levels < 2 {
            return Err(Error::InvalidArgument("at least two levels are needed for an error estimate".into()));
        }
        if n == 1 && resolution[0] < MIN_CURVE_RESOLUTION {
            return Err(Error::InvalidArgument(format!("curve resolution must be at least {MIN_CURVE_RESOLUTION}")));
        }
        if n == 2 && (resolution[0] < MIN_RESOLUTION[0] || resolution[1] < MIN_RESOLUTION[1]) {
            return Err(Error::InvalidArgument("surface resolution must be at least 32x64".into()));
        }
        let mut out = Vec::with_capacity(levels);
        for level in 0..levels {
            let factor = 1usize << level;
            let (shape, params, weights) = if n == 1 {
                let count = resolution[0] * factor;
                let params: Vec<Param> = periodic_nodes(count).into_iter().map(|t| [t, 0.0]).collect();
                ([count, 1], params, vec![std::f64::consts::TAU / count as f64; count])
            } else {
                let (nt, np) = (resolution[0] * factor, resolution[1] * factor);
                let (x, w) = gauss_legendre(nt);
                let phis = periodic_nodes(np);
                let dphi = std::f64::consts::TAU / np as f64;
                let half = std::f64::consts::FRAC_PI_2;
                let mut params = Vec::with_capacity(nt * np);
                let mut weights = Vec::with_capacity(nt * np);
                for (xi, wi) in x.iter().zip(&w) {
                    for &phi in &phis {
                        params.push([half * (xi + 1.0), phi]);
                        weights.push(half * wi * dphi);
                    }
                }
                ([nt, np], params, weights)
            };
            let area_elements = params
                .par_iter()
                .map(|p| {
                    let jet = surface.jet(p).map_err(|_| Error::ImmersionFailure(format!("no tangent plane at {p:?}")))?;
                    if !(min_singular(&jet.tangents) > 1e-8) {
                        return Err(Error::ImmersionFailure(format!("degenerate Jacobian at quadrature node {p:?}")));
                    }
                    Ok(if n == 1 {
                        jet.tangents[0].norm()
                    } else {
                        let (a, b) = (&jet.tangents[0], &jet.tangents[1]);
                        (a.norm_squared() * b.norm_squared() - a.dot(b).powi(2)).max(0.0).sqrt()
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            out.push(GridLevel { shape, params, weights, area_elements });
        }
        Ok(Self { n, levels: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn levels(&self) -> &[GridLevel] {
        &self.levels
    }

    pub fn finest(&self) -> &GridLevel {
        self.levels.last().expect("grids have at least two levels")
    }

    /// Total node count over all levels.
    pub fn node_count(&self) -> usize {
        self.levels.iter().map(|l| l.params.len()).sum()
    }

    /// `Σ field·weight·dA` per level; `field(level, node)`.
    pub fn integrate_with<F>(&self, field: F) -> Result<Integral>
    where
        F: Fn(usize, usize) -> f64 + Sync,
    {
        let mut per_level = Vec::with_capacity(self.levels.len());
        for (l, level) in self.levels.iter().enumerate() {
            let terms: Vec<f64> = (0..level.params.len())
                .into_par_iter()
                .map(|k| field(l, k) * level.weights[k] * level.area_elements[k])
                .collect();
            if let Some(node) = terms.iter().position(|t| !t.is_finite()) {
                return Err(Error::NonFiniteField { level: l, node });
            }
            let abs: Vec<f64> = terms.iter().map(|t| t.abs()).collect();
            per_level.push((pairwise_sum(&terms), pairwise_sum(&abs)));
        }
        Ok(Integral::combine(per_level))
    }

    /// Integrates a field given as one vector of node values per level.
    pub fn integrate(&self, field: &[Vec<f64>]) -> Result<Integral> {
        if field.len() != self.levels.len() || field.iter().zip(&self.levels).any(|(f, l)| f.len() != l.params.len()) {
            return Err(Error::InvalidArgument("field shape does not match the grid".into()));
        }
        self.integrate_with(|l, k| field[l][k])
    }

    /// Surface area (curve length for `n = 1`).
    pub fn area(&self) -> Result<Integral> {
        self.integrate_with(|_, _| 1.0)
    }

    /// Curvature samples at every node of every level.
    pub fn sample<const D: usize>(
        &self,
        surface: &Hypersurface<D>,
        norm: &AnisotropyNorm<D>,
    ) -> Result<Vec<Vec<CurvatureSample<D>>>> {
        self.levels
            .iter()
            .map(|level| level.params.par_iter().map(|p| surface.curvature_sample(norm, p)).collect())
            .collect()
    }

    /// Largest pairwise distance between coarsest-level nodes.
    pub fn diameter<const D: usize>(&self, surface: &Hypersurface<D>) -> f64 {
        let pts: Vec<Vector<D>> = self.levels[0].params.iter().map(|p| surface.position(p)).collect();
        pts.par_iter()
            .enumerate()
            .map(|(i, a)| pts[i + 1..].iter().map(|b| (a - b).norm()).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max)
    }
}

/// Whether a report is two-sided (`|value − target|` small) or one-sided
/// (`value ≥ target` up to the error band).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportKind {
    #[default]
    Equality,
    AtLeast,
}

/// Named residual with its tolerance and verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub abs_err: f64,
    pub rel_err: f64,
    /// Relative to `scale`.
    pub tolerance: f64,
    pub grid_error_estimate: f64,
    pub pass: bool,
    /// Normalization used for `rel_err` and `tolerance`.
    pub scale: f64,
    #[serde(default)]
    pub kind: ReportKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

impl VerificationReport {
    /// Two-sided report: passes iff `|value − target| ≤ max(tolerance·scale, 3·grid error)`.
    pub fn equality(name: &str, value: f64, target: f64, scale: f64, tolerance: f64, grid_error: f64) -> Self {
        let abs_err = (value - target).abs();
        let pass = abs_err <= (tolerance * scale).max(3.0 * grid_error);
        Self {
            name: name.to_string(),
            value,
            target,
            abs_err,
            rel_err: abs_err / scale,
            tolerance,
            grid_error_estimate: grid_error,
            pass,
            scale,
            kind: ReportKind::Equality,
            verdict: None,
        }
    }

    /// One-sided report: passes iff `value − target ≥ −max(tolerance·scale, 3·grid error)`.
    pub fn at_least(name: &str, value: f64, target: f64, scale: f64, tolerance: f64, grid_error: f64) -> Self {
        let mut r = Self::equality(name, value, target, scale, tolerance, grid_error);
        r.kind = ReportKind::AtLeast;
        r.pass = value - target >= -(tolerance * scale).max(3.0 * grid_error);
        r
    }

    pub fn with_verdict(mut self, verdict: &str) -> Self {
        self.verdict = Some(verdict.to_string());
        self
    }

    /// `|value − target| ≤ 3·grid error`.
    pub fn within_grid_error(&self) -> bool {
        self.abs_err <= 3.0 * self.grid_error_estimate
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{DerivativeMode, ShapeBuilder};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn lengths_and_areas() {
        let c = ShapeBuilder::sphere(1.0).build::<2>(None, DerivativeMode::Analytic).unwrap();
        let g = QuadratureGrid::build(&c, [64, 0], 2).unwrap();
        assert_relative_eq!(g.area().unwrap().value, 2.0 * PI, epsilon = 1e-12);
        let s = ShapeBuilder::sphere(1.0).build::<3>(None, DerivativeMode::Analytic).unwrap();
        let g = QuadratureGrid::build(&s, [32, 64], 2).unwrap();
        let area = g.area().unwrap();
        assert_relative_eq!(area.value, 4.0 * PI, epsilon = 1e-10);
        assert!(area.error_estimate < 1e-11);
        assert!(QuadratureGrid::build(&s, [16, 64], 2).is_err());
        assert!(QuadratureGrid::build(&s, [32, 64], 1).is_err());
    }

    #[test]
    fn ellipsoid_area_against_extrapolation() {
        // Oracle: Richardson extrapolation of a midpoint rule for the
        // prolate spheroid as a surface of revolution, cross-checked against
        // the closed form 2πb²(1 + a·asin(e)/(b·e)).
        let (a, b) = (2.0f64, 1.0f64);
        let e = (1.0 - b * b / (a * a)).sqrt();
        let closed = 2.0 * PI * b * b * (1.0 + a / (b * e) * e.asin());
        let mid = |m: usize| {
            let h = PI / m as f64;
            (0..m)
                .map(|k| {
                    let t = (k as f64 + 0.5) * h;
                    // Axis of revolution along x: X = (a cosθ, b sinθ cosφ, b sinθ sinφ).
                    2.0 * PI * b * t.sin() * ((a * t.sin()).powi(2) + (b * t.cos()).powi(2)).sqrt() * h
                })
                .sum::<f64>()
        };
        let rich = (4.0 * mid(4096) - mid(2048)) / 3.0;
        assert_relative_eq!(rich, closed, max_relative = 1e-12);
        let s = ShapeBuilder::ellipsoid(&[2.0, 1.0, 1.0]).build::<3>(None, DerivativeMode::Analytic).unwrap();
        let g = QuadratureGrid::build(&s, [32, 64], 2).unwrap();
        assert_relative_eq!(g.area().unwrap().value, rich, max_relative = 1e-8);
    }

    #[test]
    fn linearity_and_bad_fields() {
        let s = ShapeBuilder::bumpy_sphere(0.2).build::<3>(None, DerivativeMode::Analytic).unwrap();
        let g = QuadratureGrid::build(&s, [32, 64], 2).unwrap();
        let f = |l: usize, k: usize| g.levels()[l].params[k][0].cos().powi(2);
        let h = |l: usize, k: usize| g.levels()[l].params[k][1].sin();
        let lhs = g.integrate_with(|l, k| 2.0 * f(l, k) - 3.0 * h(l, k)).unwrap().value;
        let rhs = 2.0 * g.integrate_with(f).unwrap().value - 3.0 * g.integrate_with(h).unwrap().value;
        assert!((lhs - rhs).abs() < 1e-12);
        let err = g.integrate_with(|l, k| if l == 1 && k == 7 { f64::NAN } else { 1.0 }).unwrap_err();
        assert_eq!(err, Error::NonFiniteField { level: 1, node: 7 });
    }

    #[test]
    fn report_rules() {
        let r = VerificationReport::equality("x", 1.0 + 1e-7, 1.0, 1.0, 1e-6, 0.0);
        assert!(r.pass);
        let r = VerificationReport::equality("x", 1.1, 1.0, 1.0, 0.2, 0.01);
        assert!(r.pass && !r.within_grid_error());
        let r = VerificationReport::at_least("x", -0.5, 0.0, 1.0, 0.0, 0.1);
        assert!(!r.pass);
        let json = serde_json::to_value(&r).unwrap();
        for key in ["name", "value", "target", "rel_err", "tolerance", "grid_error_estimate", "pass"] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }
}
