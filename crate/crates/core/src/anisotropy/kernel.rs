//! Closed-form jets of the homogeneous extensions.

use nalgebra::Cholesky;

use super::NormFamily;
use crate::{Error, Matrix, Result, Vector};

#[derive(Clone, Debug)]
pub(crate) enum Kernel<const D: usize> {
    Constant(f64),
    Quadratic(Matrix<D>),
    SmoothedLp { p: f64, eps2: f64 },
}

impl<const D: usize> Kernel<D> {
    pub(crate) fn from_family(family: &NormFamily) -> Result<Self> {
        match family {
            NormFamily::Constant { value } => {
                if !(value.is_finite() && *value > 0.0) {
                    return Err(Error::BadSpec(format!("constant norm needs a positive value, got {value}")));
                }
                Ok(Self::Constant(*value))
            }
            NormFamily::Quadratic { q } => {
                if q.len() != D || q.iter().any(|row| row.len() != D) {
                    return Err(Error::BadSpec(format!("Q must be {D}x{D}")));
                }
                let m = Matrix::<D>::from_fn(|i, j| q[i][j]);
                if m.iter().any(|v| !v.is_finite()) {
                    return Err(Error::BadSpec("Q has non-finite entries".into()));
                }
                let scale = m.amax().max(f64::MIN_POSITIVE);
                if (m - m.transpose()).amax() > 1e-12 * scale {
                    return Err(Error::BadSpec("Q is not symmetric".into()));
                }
                let m = (m + m.transpose()) * 0.5;
                if Cholesky::new(m).is_none() {
                    return Err(Error::BadSpec("Q is not positive definite".into()));
                }
                Ok(Self::Quadratic(m))
            }
            NormFamily::SmoothedLp { p, eps } => {
                // p ≤ 1 is allowed through so the convexity certificate can judge it.
                if !(p.is_finite() && *p > 0.0) {
                    return Err(Error::BadSpec(format!("smoothed-lp exponent must be positive, got {p}")));
                }
                if !(eps.is_finite() && *eps > 0.0) {
                    return Err(Error::BadSpec(format!("smoothed-lp smoothing must be positive, got {eps}")));
                }
                Ok(Self::SmoothedLp { p: *p, eps2: eps * eps })
            }
        }
    }

    pub(crate) fn value(&self, x: &Vector<D>) -> f64 {
        match self {
            Self::Constant(k) => k * x.norm(),
            Self::Quadratic(q) => x.dot(&(q * x)).sqrt(),
            Self::SmoothedLp { p, eps2 } => {
                let r = x.norm();
                if r == 0.0 {
                    return 0.0;
                }
                let u = x / r;
                let s: f64 = u.iter().map(|ui| (ui * ui + eps2).powf(p / 2.0)).sum();
                r * s.powf(1.0 / p)
            }
        }
    }

    /// Value, gradient and Hessian at `x ≠ 0`.
    pub(crate) fn jet(&self, x: &Vector<D>) -> (f64, Vector<D>, Matrix<D>) {
        let r = x.norm();
        let u = x / r;
        let (f, g, h) = match self {
            Self::Constant(k) => (*k, u * *k, (Matrix::<D>::identity() - u * u.transpose()) * *k),
            Self::Quadratic(q) => {
                let qu = q * u;
                let f = u.dot(&qu).sqrt();
                let g = qu / f;
                (f, g, (q - g * g.transpose()) / f)
            }
            Self::SmoothedLp { p, eps2 } => lp_jet(&u, *p, *eps2),
        };
        (r * f, g, h / r)
    }
}

/// Jet of `(Σ gᵢ^{p/2})^{1/p}`, `gᵢ = uᵢ² + ε²|u|²`, at a unit vector.
fn lp_jet<const D: usize>(u: &Vector<D>, p: f64, eps2: f64) -> (f64, Vector<D>, Matrix<D>) {
    let mut s = 0.0;
    let mut grad_sum = Vector::<D>::zeros();
    let mut inner = Matrix::<D>::zeros();
    for i in 0..D {
        let gi = u[i] * u[i] + eps2;
        let mut dgi = u * (2.0 * eps2);
        dgi[i] += 2.0 * u[i];
        let wi = 0.5 * gi.powf(p / 2.0 - 1.0);
        s += gi.powf(p / 2.0);
        grad_sum += dgi * wi;
        let mut d2gi = Matrix::<D>::identity() * (2.0 * eps2);
        d2gi[(i, i)] += 2.0;
        inner += dgi * dgi.transpose() * ((p - 2.0) / 4.0 * gi.powf(p / 2.0 - 2.0)) + d2gi * wi;
    }
    let f = s.powf(1.0 / p);
    let g = grad_sum * s.powf(1.0 / p - 1.0);
    let h = grad_sum * grad_sum.transpose() * ((1.0 - p) * s.powf(1.0 / p - 2.0)) + inner * s.powf(1.0 / p - 1.0);
    (f, g, h)
}
