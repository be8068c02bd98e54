//! Volume, Minkowski formulas, the Heintze–Karcher functional and the
//! Wulff-shape fit.

use serde::Serialize;

use super::{Integral, QuadratureGrid, VerificationReport};
use crate::anisotropy::AnisotropyNorm;
use crate::linalg::pairwise_sum;
use crate::surface::{CurvatureSample, Hypersurface};
use crate::{Error, Result, Vector};

/// Default relative tolerance of the Minkowski check.
pub const MINKOWSKI_TOLERANCE: f64 = 1e-6;
/// A fit is Wulff when its relative rms residual is at most this.
pub const WULFF_RMS_TOLERANCE: f64 = 1e-6;

/// A surface with curvature samples at every quadrature node.
pub struct SampledSurface<'a, const D: usize> {
    pub norm: &'a AnisotropyNorm<D>,
    pub surface: &'a Hypersurface<D>,
    pub grid: &'a QuadratureGrid,
    pub samples: Vec<Vec<CurvatureSample<D>>>,
}

/// Least-squares fit `X ≈ c − s·φ(ν)`, which for even norms reads
/// `X ≈ c + s·φ(−ν)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WulffFit<const D: usize> {
    pub center: Vector<D>,
    pub scale: f64,
    /// Weighted rms of the residual divided by the diameter.
    pub rms_residual: f64,
    pub diameter: f64,
}

impl<'a, const D: usize> SampledSurface<'a, D> {
    pub fn new(norm: &'a AnisotropyNorm<D>, surface: &'a Hypersurface<D>, grid: &'a QuadratureGrid) -> Result<Self> {
        let samples = grid.sample(surface, norm)?;
        Ok(Self { norm, surface, grid, samples })
    }

    pub fn n(&self) -> usize {
        D - 1
    }

    /// `∫ f(sample) dA`.
    pub fn integrate<F>(&self, f: F) -> Result<Integral>
    where
        F: Fn(&CurvatureSample<D>) -> f64 + Sync,
    {
        self.grid.integrate_with(|l, k| f(&self.samples[l][k]))
    }

    /// `∫ F(ν) dA`
    pub fn support_integral(&self) -> Result<Integral> {
        self.integrate(|s| s.support)
    }

    /// `V = −(1/(n+1)) ∫⟨X, ν⟩ dA`.
    pub fn enclosed_volume(&self) -> Result<Integral> {
        let v = self.integrate(|s| s.position.dot(&s.normal))?.scaled(-1.0 / D as f64);
        if !(v.value > 0.0) {
            return Err(Error::NegativeVolume(v.value));
        }
        Ok(v)
    }

    /// `∫(H_r F(ν) + H_{r+1}⟨X, ν⟩) dA`, target 0, relative to `∫F(ν) dA`.
    pub fn minkowski(&self, r: usize, tolerance: f64) -> Result<VerificationReport> {
        if r + 1 > self.n() {
            return Err(Error::InvalidArgument(format!("Minkowski index r = {r} needs r ≤ n − 1 = {}", self.n() - 1)));
        }
        let value = self.integrate(|s| s.hfr[r] * s.support + s.hfr[r + 1] * s.position.dot(&s.normal))?;
        let scale = self.support_integral()?.value;
        Ok(VerificationReport::equality(&format!("minkowski_r{r}"), value.value, 0.0, scale, tolerance, value.error_estimate))
    }

    /// Heintze–Karcher deficit `∫F(ν)/H_1 dA − (n+1)V`; one-sided, with an
    /// `equality` / `strict` verdict.
    pub fn hk(&self, tolerance: f64) -> Result<VerificationReport> {
        let mut worst: Option<&CurvatureSample<D>> = None;
        for s in self.samples.iter().flatten() {
            if worst.map_or(true, |w| s.hfr[1] < w.hfr[1]) {
                worst = Some(s);
            }
        }
        if let Some(w) = worst.filter(|w| !(w.hfr[1] > 0.0)) {
            return Err(Error::NonpositiveAnisotropicMeanCurvature { param: w.param, value: w.hfr[1] });
        }
        let lhs = self.integrate(|s| s.support / s.hfr[1])?;
        let volume = self.enclosed_volume()?;
        let deficit = lhs.linear(1.0, &volume, -(D as f64));
        let scale = D as f64 * volume.value;
        let report = VerificationReport::at_least("hk_deficit", deficit.value, 0.0, scale, tolerance, deficit.error_estimate);
        let verdict = if report.within_grid_error() { "equality" } else { "strict" };
        Ok(report.with_verdict(verdict))
    }

    pub fn diameter(&self) -> f64 {
        self.grid.diameter(self.surface)
    }

    /// Closed-form weighted least squares over center and scale, using the
    /// Gauss-map correspondence `p ↦ ν(p)` on the finest level.
    pub fn wulff_fit(&self) -> Result<WulffFit<D>> {
        let level = self.grid.finest();
        let samples = self.samples.last().expect("grid has levels");
        let w: Vec<f64> = level.weights.iter().zip(&level.area_elements).map(|(a, b)| a * b).collect();
        let total = pairwise_sum(&w);
        let mean = |f: &dyn Fn(&CurvatureSample<D>) -> Vector<D>| {
            Vector::<D>::from_fn(|i, _| {
                let terms: Vec<f64> = samples.iter().zip(&w).map(|(s, wk)| f(s)[i] * wk).collect();
                pairwise_sum(&terms) / total
            })
        };
        let xbar = mean(&|s| s.position);
        let bbar = mean(&|s| -s.cahn_hoffman);
        let num: Vec<f64> =
            samples.iter().zip(&w).map(|(s, wk)| wk * (s.position - xbar).dot(&(-s.cahn_hoffman - bbar))).collect();
        let den: Vec<f64> = samples.iter().zip(&w).map(|(s, wk)| wk * (-s.cahn_hoffman - bbar).norm_squared()).collect();
        let (num, den) = (pairwise_sum(&num), pairwise_sum(&den));
        let bscale: f64 = samples.iter().map(|s| s.cahn_hoffman.norm_squared()).fold(0.0, f64::max);
        if !(den > 1e-14 * bscale * total) {
            return Err(Error::SingularNormalEquations);
        }
        let scale = num / den;
        let center = xbar - bbar * scale;
        let res: Vec<f64> = samples
            .iter()
            .zip(&w)
            .map(|(s, wk)| wk * (s.position - center + s.cahn_hoffman * scale).norm_squared())
            .collect();
        let diameter = self.diameter();
        let rms = (pairwise_sum(&res) / total).max(0.0).sqrt() / diameter;
        Ok(WulffFit { center, scale, rms_residual: rms, diameter })
    }
}

/// `V` from the Gauss map alone; no norm is involved.
pub fn enclosed_volume<const D: usize>(grid: &QuadratureGrid, surface: &Hypersurface<D>) -> Result<Integral> {
    let values = grid
        .levels()
        .iter()
        .map(|level| {
            level
                .params
                .iter()
                .map(|p| Ok(surface.position(p).dot(&surface.gauss_map(p)?)))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let v = grid.integrate(&values)?.scaled(-1.0 / D as f64);
    if !(v.value > 0.0) {
        return Err(Error::NegativeVolume(v.value));
    }
    Ok(v)
}

pub fn minkowski_residual<const D: usize>(
    norm: &AnisotropyNorm<D>,
    surface: &Hypersurface<D>,
    grid: &QuadratureGrid,
    r: usize,
) -> Result<VerificationReport> {
    SampledSurface::new(norm, surface, grid)?.minkowski(r, MINKOWSKI_TOLERANCE)
}

pub fn hk_deficit<const D: usize>(
    norm: &AnisotropyNorm<D>,
    surface: &Hypersurface<D>,
    grid: &QuadratureGrid,
) -> Result<VerificationReport> {
    SampledSurface::new(norm, surface, grid)?.hk(0.0)
}

pub fn wulff_fit<const D: usize>(
    norm: &AnisotropyNorm<D>,
    surface: &Hypersurface<D>,
    grid: &QuadratureGrid,
) -> Result<WulffFit<D>> {
    SampledSurface::new(norm, surface, grid)?.wulff_fit()
}

/// Report for a fit. It passes when the fit's verdict (`wulff` iff
/// rms ≤ 1e-6) agrees with the Heintze–Karcher equality verdict, when given.
pub fn fit_report<const D: usize>(fit: &WulffFit<D>, hk: Option<&VerificationReport>) -> VerificationReport {
    let is_wulff = fit.rms_residual <= WULFF_RMS_TOLERANCE;
    let mut report = VerificationReport::equality("wulff_fit", fit.rms_residual, 0.0, 1.0, WULFF_RMS_TOLERANCE, 0.0);
    report.pass = hk.map_or(true, |h| h.within_grid_error() == is_wulff);
    report.with_verdict(if is_wulff { "wulff" } else { "not Wulff" })
}
