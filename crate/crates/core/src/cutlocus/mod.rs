//! Anisotropic distance to a surface, focal and cut times along the rays
//! `γ_p(t) = X(p) + t·φ(ν(p))`, and the identities built on them.

mod rays;
mod search;

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::anisotropy::AnisotropyNorm;
use crate::integrals::{QuadratureGrid, SampledSurface, VerificationReport};
use crate::linalg::binomial;
use crate::surface::{CurvatureSample, Hypersurface};
use crate::{Error, Param, Result, Vector};

pub use rays::{curve_cut_stationarity, ray_disjointness, RayReport, StationarityReport};
use search::{Scratch, SurfaceSearch, Threshold};

/// `|c·λ_max − 1|` at or below which a node counts as binding.
pub const BINDING_TOLERANCE: f64 = 1e-4;
/// Relative tolerance of the tube-volume check.
pub const TUBE_TOLERANCE: f64 = 1e-3;

/// `1/λ_max`.
pub fn focal_time(lambdas: &[f64]) -> Result<f64> {
    let max = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::NoPositiveCurvature(max));
    }
    Ok(1.0 / max)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutEntry {
    pub param: Param,
    pub focal_time: f64,
    pub cut_time: f64,
    pub binding: bool,
    /// Foot point that ended the ray, when the cut came before the focal time.
    pub witness: Option<Param>,
}

/// Cut times at every node of every quadrature level.
#[derive(Clone, Debug, Serialize)]
pub struct CutProfile {
    pub levels: Vec<Vec<CutEntry>>,
    /// Bisection tolerance, `1e-8 · diameter`.
    pub tolerance: f64,
    pub diameter: f64,
    pub binding_tolerance: f64,
}

impl CutProfile {
    pub fn finest(&self) -> &[CutEntry] {
        self.levels.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// `max(cut − focal)` over all nodes; ≤ 1e-6 is the expected bound.
    pub fn max_focal_excess(&self) -> f64 {
        self.levels.iter().flatten().map(|e| e.cut_time - e.focal_time).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "level,param0,param1,focal_time,cut_time,binding")?;
        for (l, level) in self.levels.iter().enumerate() {
            for e in level {
                writeln!(
                    out,
                    "{l},{:.17e},{:.17e},{:.17e},{:.17e},{}",
                    e.param[0], e.param[1], e.focal_time, e.cut_time, e.binding
                )?;
            }
        }
        Ok(())
    }
}

/// Distance queries against one surface.
pub struct CutLocus<'a, const D: usize> {
    search: SurfaceSearch<'a, D>,
    tolerance: f64,
    binding_tolerance: f64,
}

impl<'a, const D: usize> CutLocus<'a, D> {
    /// The search grid has four times as many nodes as the base level of `grid`.
    pub fn new(norm: &'a AnisotropyNorm<D>, surface: &'a Hypersurface<D>, grid: &QuadratureGrid) -> Result<Self> {
        let diameter = grid.diameter(surface);
        let search = SurfaceSearch::new(norm, surface, grid.levels()[0].shape, diameter)?;
        Ok(Self { search, tolerance: 1e-8 * diameter, binding_tolerance: BINDING_TOLERANCE })
    }

    pub fn with_binding_tolerance(mut self, tol: f64) -> Self {
        self.binding_tolerance = tol;
        self
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn diameter(&self) -> f64 {
        self.search.diameter()
    }

    pub fn search_nodes(&self) -> usize {
        self.search.node_count()
    }

    /// `d_F(M, y)` and a minimizing parameter.
    pub fn distance_to_surface(&self, y: &Vector<D>) -> Result<(f64, Param)> {
        let mut scratch = self.search.scratch();
        self.search.distance(&mut scratch, y)
    }

    pub fn cut_time(&self, p: &Param) -> Result<CutEntry> {
        let sample = self.search.surface.curvature_sample(self.search.norm, p)?;
        self.cut_time_at(&sample, &mut self.search.scratch())
    }

    /// Largest `t ≤ 1/λ_max` with `d_F(M, γ_p(t)) ≥ t − tol`.
    ///
    /// `g_q(t) = F*(γ_p(t) − X(q)) − t` is convex and nonincreasing, so a
    /// foot point `q` that breaks the predicate at some `t` breaks it for
    /// every later `t`, from the root of `g_q + tol` on. That root is
    /// used as the new upper end, and the next probe sits just under it
    /// (or under the extrapolated limit of the shrinking roots), but never
    /// below the bracket midpoint.
    fn cut_time_at(&self, sample: &CurvatureSample<D>, scratch: &mut Scratch<D>) -> Result<CutEntry> {
        let focal = focal_time(&sample.lambdas)?;
        let tol = self.tolerance;
        let origin = sample.position;
        let dir = sample.cahn_hoffman;
        let p = sample.param;
        let mut predicate = |t: f64| self.search.threshold_test(scratch, &(origin + dir * t), t - tol, tol);
        let entry = |cut: f64, witness: Option<Param>| CutEntry {
            param: p,
            focal_time: focal,
            cut_time: cut,
            binding: (cut / focal - 1.0).abs() <= self.binding_tolerance,
            witness,
        };
        let Threshold::Below(mut witness) = predicate(focal)? else {
            return Ok(entry(focal, None));
        };
        let mut lo = 1e-6 * focal;
        if let Threshold::Below(..) = predicate(lo)? {
            return Err(Error::BracketFailure { param: p, time: lo });
        }
        let mut hi = self.witness_root(&origin, &dir, &witness, lo, focal)?;
        // Successive witness roots shrink roughly geometrically; the next
        // probe extrapolates that, never dropping below the midpoint.
        let mut last_jump = focal - hi;
        let mut probe = (hi - 0.5 * tol).max(lo);
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            match predicate(probe)? {
                Threshold::Holds => {
                    lo = probe;
                    probe = (hi - 0.5 * tol).max(lo);
                }
                Threshold::Below(q) => {
                    witness = q;
                    let next = self.witness_root(&origin, &dir, &q, lo, probe)?;
                    let jump = hi - next;
                    hi = next;
                    let ratio = jump / last_jump;
                    last_jump = jump;
                    let ahead = if ratio < 0.9 { 1.5 * jump * ratio / (1.0 - ratio) } else { f64::INFINITY };
                    probe = (hi - ahead.max(0.0) - 0.5 * tol).max(0.5 * (lo + hi)).max(lo);
                }
            }
        }
        Ok(entry(lo, Some(witness)))
    }

    /// Smallest `t ∈ [lo, hi]` (to within 1e-3·tol) where `g_q(t) + tol ≤ 0`,
    /// given that it holds at `hi`. Illinois false position.
    fn witness_root(&self, origin: &Vector<D>, dir: &Vector<D>, q: &Param, lo: f64, hi: f64) -> Result<f64> {
        let xq = self.search.surface.position(q);
        let tol = self.tolerance;
        // Witnesses may sit on a chart pole, where the normal is undefined.
        let mut seed = match self.search.surface.gauss_map(q) {
            Ok(nu) => nu,
            Err(_) => (origin + dir * hi - xq).normalize(),
        };
        let mut g = |t: f64| -> Result<f64> {
            let v = origin + dir * t - xq;
            let sol = match self.search.norm.dual_seeded(&v, &seed) {
                Ok(s) => s,
                Err(_) => self.search.norm.dual_solve(&v)?,
            };
            seed = sol.point;
            Ok(sol.value - t + tol)
        };
        let (mut a, mut b) = (lo, hi);
        let (mut ga, mut gb) = (g(a)?, g(b)?);
        if gb > 0.0 {
            return Ok(hi);
        }
        if ga <= 0.0 {
            return Ok(lo);
        }
        let mut side = 0;
        for _ in 0..100 {
            if b - a <= 1e-3 * tol {
                break;
            }
            let c = (a * gb - b * ga) / (gb - ga);
            let c = if c > a && c < b { c } else { 0.5 * (a + b) };
            let gc = g(c)?;
            if gc <= 0.0 {
                b = c;
                gb = gc;
                if side == -1 {
                    ga *= 0.5;
                }
                side = -1;
            } else {
                a = c;
                ga = gc;
                if side == 1 {
                    gb *= 0.5;
                }
                side = 1;
            }
        }
        Ok(b)
    }

    /// Cut times at every node of every level of `sampled`'s grid.
    pub fn profile(&self, sampled: &SampledSurface<'_, D>) -> Result<CutProfile> {
        let levels = sampled
            .samples
            .iter()
            .map(|level| {
                level
                    .par_iter()
                    .map_init(|| self.search.scratch(), |scratch, s| self.cut_time_at(s, scratch))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(CutProfile {
            levels,
            tolerance: self.tolerance,
            diameter: self.diameter(),
            binding_tolerance: self.binding_tolerance,
        })
    }
}

/// `∫_M ∫_0^{c(p)} Π(1 − tλ_i) F(ν) dt dA` against the enclosed volume. The
/// inner integral is `Σ_r (−1)^r σ_r c^{r+1}/(r+1)`.
pub fn tube_volume<const D: usize>(sampled: &SampledSurface<'_, D>, profile: &CutProfile) -> Result<VerificationReport> {
    let n = D - 1;
    if profile.levels.len() != sampled.samples.len()
        || profile.levels.iter().zip(&sampled.samples).any(|(a, b)| a.len() != b.len())
    {
        return Err(Error::InvalidArgument("profile does not match the quadrature grid".into()));
    }
    let tube = sampled.grid.integrate_with(|l, k| {
        let s = &sampled.samples[l][k];
        let c = profile.levels[l][k].cut_time;
        let inner: f64 = (0..=n)
            .map(|r| {
                let sigma = s.hfr[r] * binomial(n, r);
                let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
                sign * sigma * c.powi(r as i32 + 1) / (r as f64 + 1.0)
            })
            .sum();
        inner * s.support
    })?;
    let volume = sampled.enclosed_volume()?;
    let error = tube.error_estimate + volume.error_estimate;
    Ok(VerificationReport::equality("tube_volume", tube.value, volume.value, volume.value, TUBE_TOLERANCE, error))
}

/// One-off distance query; builds the search structure each call.
pub fn distance_to_surface<const D: usize>(
    norm: &AnisotropyNorm<D>,
    surface: &Hypersurface<D>,
    grid: &QuadratureGrid,
    y: &Vector<D>,
) -> Result<(f64, Param)> {
    CutLocus::new(norm, surface, grid)?.distance_to_surface(y)
}

/// One-off cut time at `p`.
pub fn cut_time<const D: usize>(
    norm: &AnisotropyNorm<D>,
    surface: &Hypersurface<D>,
    grid: &QuadratureGrid,
    p: &Param,
) -> Result<f64> {
    Ok(CutLocus::new(norm, surface, grid)?.cut_time(p)?.cut_time)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{DerivativeMode, NormSpec, ShapeBuilder};
    use approx::assert_relative_eq;

    fn round<const D: usize>() -> AnisotropyNorm<D> {
        AnisotropyNorm::from_spec(NormSpec::constant(1.0)).unwrap()
    }

    #[test]
    fn focal_times() {
        assert_eq!(focal_time(&[2.0, 0.5]).unwrap(), 0.5);
        assert_eq!(focal_time(&[0.5]).unwrap(), 2.0);
        assert!(matches!(focal_time(&[-1.0, -2.0]), Err(Error::NoPositiveCurvature(_))));
    }

    #[test]
    fn sphere_distances() {
        let s = ShapeBuilder::sphere(1.0).build::<3>(None, DerivativeMode::Analytic).unwrap();
        let g = QuadratureGrid::build(&s, [32, 64], 2).unwrap();
        let norm = round::<3>();
        let cl = CutLocus::new(&norm, &s, &g).unwrap();
        let (d, _) = cl.distance_to_surface(&Vector::<3>::zeros()).unwrap();
        assert_relative_eq!(d, 1.0, epsilon = 1e-12);
        let (d, q) = cl.distance_to_surface(&Vector::<3>::new(0.0, 0.0, 0.5)).unwrap();
        assert_relative_eq!(d, 0.5, epsilon = 1e-12);
        assert!((s.position(&q) - Vector::<3>::z()).norm() < 1e-6, "{q:?}");
        let e = cl.cut_time(&[0.7, 1.3]).unwrap();
        assert_relative_eq!(e.cut_time, 1.0, epsilon = 1e-6);
        assert!(e.binding);
    }

    #[test]
    fn ellipse_tip() {
        let e = ShapeBuilder::ellipsoid(&[2.0, 1.0]).build::<2>(None, DerivativeMode::Analytic).unwrap();
        let g = QuadratureGrid::build(&e, [64, 0], 2).unwrap();
        let norm = round::<2>();
        let cl = CutLocus::new(&norm, &e, &g).unwrap();
        let tip = cl.cut_time(&[0.0, 0.0]).unwrap();
        assert_relative_eq!(tip.cut_time, 0.5, epsilon = 1e-4);
        // Off the tip the medial axis cuts the ray before the focal point.
        let side = cl.cut_time(&[1.0, 0.0]).unwrap();
        assert!(side.cut_time < side.focal_time - 1e-3);
        assert!(!side.binding);
    }
}
