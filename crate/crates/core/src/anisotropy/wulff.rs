//! Sampling `W_F = φ(S^n)`.

use serde::Serialize;

use super::AnisotropyNorm;
use crate::{Error, Result, Vector};

/// Points of the Wulff shape together with the sphere points they came from.
/// On the 2-sphere the UV grid's triangles are included.
#[derive(Clone, Debug, Serialize)]
pub struct WulffSamples<const D: usize> {
    pub sphere_points: Vec<Vector<D>>,
    pub points: Vec<Vector<D>>,
    pub triangles: Vec<[usize; 3]>,
}

impl<const D: usize> WulffSamples<D> {
    /// `max |F*(y) − 1|` over the samples.
    pub fn membership_residual(&self, norm: &AnisotropyNorm<D>) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (y, u) in self.points.iter().zip(&self.sphere_points) {
            let v = match norm.dual_seeded(y, u) {
                Ok(sol) => sol.value,
                Err(_) => norm.dual_value(y)?,
            };
            worst = worst.max((v - 1.0).abs());
        }
        Ok(worst)
    }
}

/// Latitude–longitude grid on the 2-sphere: two poles plus `res − 1` rings
/// of `2·res` points, with outward-facing triangles.
pub(crate) fn uv_sphere(res: usize) -> (Vec<Vector<3>>, Vec<[usize; 3]>) {
    let ring = 2 * res;
    let mut pts = vec![Vector::<3>::z()];
    for i in 1..res {
        let t = std::f64::consts::PI * i as f64 / res as f64;
        for j in 0..ring {
            let p = std::f64::consts::TAU * j as f64 / ring as f64;
            pts.push(Vector::<3>::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos()));
        }
    }
    pts.push(-Vector::<3>::z());
    let south = pts.len() - 1;
    let at = |i: usize, j: usize| 1 + (i - 1) * ring + j % ring;
    let mut tris = Vec::new();
    for j in 0..ring {
        tris.push([0, at(1, j), at(1, j + 1)]);
        tris.push([south, at(res - 1, j + 1), at(res - 1, j)]);
    }
    for i in 1..res - 1 {
        for j in 0..ring {
            tris.push([at(i, j), at(i + 1, j), at(i + 1, j + 1)]);
            tris.push([at(i, j), at(i + 1, j + 1), at(i, j + 1)]);
        }
    }
    (pts, tris)
}

impl<const D: usize> AnisotropyNorm<D> {
    /// `φ` applied to a sphere grid: `4·res` points on the circle, or the
    /// UV grid of [`uv_sphere`] on the 2-sphere.
    pub fn wulff_samples(&self, resolution: usize) -> Result<WulffSamples<D>> {
        if resolution < 8 {
            return Err(Error::InvalidArgument("Wulff sampling resolution must be at least 8".into()));
        }
        let (sphere_points, triangles): (Vec<Vector<D>>, _) = if D == 2 {
            let count = 4 * resolution;
            let pts = (0..count)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / count as f64;
                    Vector::<D>::from_fn(|i, _| if i == 0 { t.cos() } else { t.sin() })
                })
                .collect();
            (pts, Vec::new())
        } else {
            let (pts, tris) = uv_sphere(resolution);
            (pts.iter().map(|p| Vector::<D>::from_fn(|i, _| p[i])).collect(), tris)
        };
        let points = sphere_points.iter().map(|u| self.cahn_hoffman(u)).collect();
        Ok(WulffSamples { sphere_points, points, triangles })
    }
}
