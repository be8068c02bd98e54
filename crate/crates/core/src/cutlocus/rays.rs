//! Ray disjointness and, on curves, stationarity of λ where the cut binds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::Serialize;

use super::CutProfile;
use crate::anisotropy::AnisotropyNorm;
use crate::integrals::SampledSurface;
use crate::surface::Hypersurface;
use crate::{Error, Param, Result, Vector};

/// Ray segments are truncated to this fraction of the cut time.
const RAY_FRACTION: f64 = 0.999;

#[derive(Clone, Debug, Serialize)]
pub struct RayReport {
    pub pairs: usize,
    /// Smallest Euclidean distance between two sampled ray segments.
    pub closest_approach: f64,
    /// Smallest distance relative to `min(diameter, |X(p) − X(q)|)`.
    pub closest_relative: f64,
    pub closest_pair: Option<(Param, Param)>,
    pub threshold: f64,
    pub pass: bool,
}

/// Distance between segments `a0 + s·da` and `b0 + t·db`, `s, t ∈ [0, 1]`.
fn segment_distance<const D: usize>(a0: &Vector<D>, da: &Vector<D>, b0: &Vector<D>, db: &Vector<D>) -> f64 {
    let r = a0 - b0;
    let (a, e, f) = (da.norm_squared(), db.norm_squared(), db.dot(&r));
    let (b, c) = (da.dot(db), da.dot(&r));
    let denom = a * e - b * b;
    let mut s = if denom > 1e-300 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
    let mut t = (b * s + f) / e;
    if t < 0.0 {
        t = 0.0;
        s = (-c / a).clamp(0.0, 1.0);
    } else if t > 1.0 {
        t = 1.0;
        s = ((b - c) / a).clamp(0.0, 1.0);
    }
    (a0 + da * s - b0 - db * t).norm()
}

/// Checks, on `sample_count` random node pairs of the finest level, that
/// the segments `{X(p) + tφ(ν(p)) : 0 ≤ t ≤ 0.999·c(p)}` stay apart by more
/// than `1e-6 · min(diameter, |X(p) − X(q)|)`.
pub fn ray_disjointness<const D: usize>(
    norm: &AnisotropyNorm<D>,
    surface: &Hypersurface<D>,
    profile: &CutProfile,
    sample_count: usize,
    seed: u64,
) -> Result<RayReport> {
    let entries = profile.finest();
    if entries.len() < 2 {
        return Err(Error::InvalidArgument("profile has fewer than two nodes".into()));
    }
    let rays = entries
        .iter()
        .map(|e| {
            let x = surface.position(&e.param);
            let dir = norm.cahn_hoffman(&surface.gauss_map(&e.param)?);
            Ok((x, dir * (RAY_FRACTION * e.cut_time)))
        })
        .collect::<Result<Vec<(Vector<D>, Vector<D>)>>>()?;
    let threshold = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = RayReport {
        pairs: 0,
        closest_approach: f64::INFINITY,
        closest_relative: f64::INFINITY,
        closest_pair: None,
        threshold,
        pass: true,
    };
    while report.pairs < sample_count {
        let i = rng.gen_range(0..rays.len());
        let j = rng.gen_range(0..rays.len());
        if i == j {
            continue;
        }
        report.pairs += 1;
        let (a, b) = (&rays[i], &rays[j]);
        let d = segment_distance(&a.0, &a.1, &b.0, &b.1);
        let scale = profile.diameter.min((a.0 - b.0).norm());
        let relative = d / scale;
        report.closest_approach = report.closest_approach.min(d);
        if relative < report.closest_relative {
            report.closest_relative = relative;
            report.closest_pair = Some((entries[i].param, entries[j].param));
        }
    }
    report.pass = report.closest_relative > threshold;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct StationaryNode {
    pub param: Param,
    pub lambda: f64,
    /// Arclength derivative of λ.
    pub lambda_prime: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct StationarityReport {
    pub binding_nodes: Vec<StationaryNode>,
    pub max_lambda_prime: f64,
    /// `max(relative · max|λ'|, 1e-8 · max|λ|²)`
    pub threshold: f64,
    pub relative_threshold: f64,
    pub pass: bool,
}

/// Spectral derivative of periodic samples on `[0, 2π)`.
pub(crate) fn spectral_derivative(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let freq = if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            0.0
        } else {
            k as f64 - n as f64
        };
        *c *= Complex::new(0.0, freq);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// On a curve, `λ' = 0` wherever the cut time equals the focal time.
/// Uses the finest level, which is a uniform periodic grid.
pub fn curve_cut_stationarity(
    sampled: &SampledSurface<'_, 2>,
    profile: &CutProfile,
    relative_threshold: f64,
) -> Result<StationarityReport> {
    let samples = sampled.samples.last().expect("grid has levels");
    let entries = profile.finest();
    if samples.len() != entries.len() {
        return Err(Error::InvalidArgument("profile does not match the quadrature grid".into()));
    }
    let lambda: Vec<f64> = samples.iter().map(|s| s.lambdas[0]).collect();
    let dt = spectral_derivative(&lambda);
    let prime: Vec<f64> = dt.iter().zip(samples).map(|(d, s)| d / s.area_element).collect();
    let max_prime = prime.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let max_lambda = lambda.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let threshold = (relative_threshold * max_prime).max(1e-8 * max_lambda * max_lambda);
    let binding_nodes: Vec<StationaryNode> = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.binding)
        .map(|(k, e)| StationaryNode { param: e.param, lambda: lambda[k], lambda_prime: prime[k] })
        .collect();
    let pass = binding_nodes.iter().all(|b| b.lambda_prime.abs() <= threshold);
    Ok(StationarityReport { binding_nodes, max_lambda_prime: max_prime, threshold, relative_threshold, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_derivative_of_trig() {
        let n = 64;
        let t: Vec<f64> = (0..n).map(|k| std::f64::consts::TAU * k as f64 / n as f64).collect();
        let f: Vec<f64> = t.iter().map(|x| (3.0 * x).sin() + 0.5 * x.cos()).collect();
        let d = spectral_derivative(&f);
        for (x, v) in t.iter().zip(d) {
            assert!((v - (3.0 * (3.0 * x).cos() - 0.5 * x.sin())).abs() < 1e-12);
        }
    }

    #[test]
    fn segments() {
        let o = Vector::<3>::zeros();
        let d = segment_distance(&o, &Vector::<3>::x(), &Vector::<3>::new(0.5, 1.0, 1.0), &Vector::<3>::new(0.0, -2.0, 0.0));
        assert!((d - 1.0).abs() < 1e-15);
        let d = segment_distance(&o, &Vector::<3>::x(), &Vector::<3>::new(2.0, 0.0, 0.0), &Vector::<3>::x());
        assert!((d - 1.0).abs() < 1e-15);
    }
}
