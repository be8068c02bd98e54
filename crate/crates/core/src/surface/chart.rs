//! Unit-sphere charts and their first and second derivatives.

use crate::{Param, Vector};

/// `u(p)`, `∂ᵢu` and `∂ᵢ∂ⱼu`; only the first `D − 1` slots are meaningful.
#[derive(Clone, Copy, Debug)]
pub(crate) struct ChartJet<const D: usize> {
    pub u: Vector<D>,
    pub du: [Vector<D>; 2],
    pub ddu: [[Vector<D>; 2]; 2],
}

fn vec<const D: usize>(v: [f64; 3]) -> Vector<D> {
    Vector::<D>::from_fn(|i, _| v[i])
}

/// Circle `(cos t, sin t)` for `D = 2`; `(sinθ cosφ, sinθ sinφ, cosθ)` for `D = 3`.
pub(crate) fn unit_chart<const D: usize>(p: &Param) -> ChartJet<D> {
    let zero = Vector::<D>::zeros();
    if D == 2 {
        let (s, c) = p[0].sin_cos();
        let u = vec([c, s, 0.0]);
        ChartJet { u, du: [vec([-s, c, 0.0]), zero], ddu: [[-u, zero], [zero, zero]] }
    } else {
        let (st, ct) = p[0].sin_cos();
        let (sp, cp) = p[1].sin_cos();
        let u = vec([st * cp, st * sp, ct]);
        let ut = vec([ct * cp, ct * sp, -st]);
        let up = vec([-st * sp, st * cp, 0.0]);
        let utp = vec([-ct * sp, ct * cp, 0.0]);
        let upp = vec([-st * cp, -st * sp, 0.0]);
        ChartJet { u, du: [ut, up], ddu: [[-u, utp], [utp, upp]] }
    }
}

/// Chart direction of the unit vector `u`.
#[cfg(test)]
pub(crate) fn chart_param<const D: usize>(u: &Vector<D>) -> Param {
    if D == 2 {
        [u[1].atan2(u[0]).rem_euclid(std::f64::consts::TAU), 0.0]
    } else {
        [u[2].clamp(-1.0, 1.0).acos(), u[1].atan2(u[0]).rem_euclid(std::f64::consts::TAU)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_match_differences() {
        let p = [0.7, 2.1];
        let j = unit_chart::<3>(&p);
        let h = 1e-6;
        for i in 0..2 {
            let mut a = p;
            let mut b = p;
            a[i] += h;
            b[i] -= h;
            let d = (unit_chart::<3>(&a).u - unit_chart::<3>(&b).u) / (2.0 * h);
            assert!((d - j.du[i]).norm() < 1e-9);
            for k in 0..2 {
                let dd = (unit_chart::<3>(&a).du[k] - unit_chart::<3>(&b).du[k]) / (2.0 * h);
                assert!((dd - j.ddu[i][k]).norm() < 1e-9);
            }
        }
        let back = chart_param(&j.u);
        assert!((back[0] - p[0]).abs() < 1e-14 && (back[1] - p[1]).abs() < 1e-14);
    }
}
