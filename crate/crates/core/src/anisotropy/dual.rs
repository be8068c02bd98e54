//! The dual norm `F*(x) = sup_{|z|=1} ⟨x, z⟩ / F(z)` and its maximizer `ψ(x)`.


use super::{AnisotropyNorm, DerivativeMode};
use crate::linalg::{complement_frame, solve_leading};
use crate::{Error, Result, Vector};

const MAX_ITERATIONS: usize = 50;
const MAX_STEP: f64 = 0.5;
const RESTARTS: usize = 4;

/// Converged maximizer of the dual objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualSolution<const D: usize> {
    pub value: f64,
    pub point: Vector<D>,
}

impl<const D: usize> AnisotropyNorm<D> {
    /// `F*(x)`, with `F*(0) = 0`.
    pub fn dual_value(&self, x: &Vector<D>) -> Result<f64> {
        if x.iter().all(|&v| v == 0.0) {
            return Ok(0.0);
        }
        Ok(self.dual_solve(x)?.value)
    }

    /// `ψ(x)`, the unit vector with `x = F*(x) φ(ψ(x))`.
    pub fn dual_point(&self, x: &Vector<D>) -> Result<Vector<D>> {
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroVector);
        }
        Ok(self.dual_solve(x)?.point)
    }

    /// Full solve: coarse scan over the seed lattice, then Newton from the
    /// best few seeds until one converges.
    pub fn dual_solve(&self, x: &Vector<D>) -> Result<DualSolution<D>> {
        let mut ranked: Vec<(f64, usize)> = self.seeds().iter().enumerate().map(|(k, (_, w))| (w.dot(x), k)).collect();
        let top = ranked.len().min(RESTARTS);
        ranked.select_nth_unstable_by(top - 1, |a, b| b.0.total_cmp(&a.0));
        ranked[..top].sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut last = None;
        for &(_, k) in &ranked[..top] {
            match self.dual_seeded(x, &self.seeds()[k].0) {
                Ok(sol) => return Ok(sol),
                Err(e) => last = Some(e),
            }
        }
        Err(last.expect("at least one seed"))
    }

    /// Newton refinement from a caller-supplied unit seed; used in hot loops
    /// where a nearby maximizer is already known.
    pub fn dual_seeded(&self, x: &Vector<D>, seed: &Vector<D>) -> Result<DualSolution<D>> {
        let xn = x.norm();
        if xn == 0.0 {
            return Ok(DualSolution { value: 0.0, point: *seed });
        }
        let gtol = match self.derivative_mode() {
            DerivativeMode::Analytic => 1e-12,
            DerivativeMode::FiniteDifference => 1e-9,
        };
        let floor_tol = 1e-9;
        let objective = |z: &Vector<D>| x.dot(z) / self.eval(z);
        let mut z = seed.normalize();
        let mut f = objective(&z);
        let mut grad_norm = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            let (fz, gf, hf) = self.jet(&z);
            let xz = x.dot(&z);
            // Ambient gradient of the 0-homogeneous objective; tangent at z.
            let g = x / fz - gf * (xz / (fz * fz));
            let scale = xn / fz;
            grad_norm = g.norm() / scale;
            if grad_norm <= gtol {
                return Ok(DualSolution { value: f, point: z });
            }
            let basis = complement_frame(&z);
            let n = D - 1;
            let h = -(x * gf.transpose() + gf * x.transpose()) / (fz * fz) + gf * gf.transpose() * (2.0 * xz / fz.powi(3))
                - hf * (xz / (fz * fz));
            let mut neg = [[0.0; 2]; 2];
            let mut gb = [0.0; 2];
            for i in 0..n {
                gb[i] = basis[i].dot(&g);
                for j in 0..n {
                    neg[i][j] = -basis[i].dot(&(h * basis[j]));
                }
            }
            // Newton direction when the Hessian is negative definite, else gradient ascent.
            let definite = neg[0][0] > 0.0 && (n == 1 || neg[0][0] * neg[1][1] - neg[0][1] * neg[1][0] > 0.0);
            let step = definite.then(|| solve_leading(&neg, &gb, n)).flatten().unwrap_or(gb.map(|v| v / scale));
            let mut v = (0..n).fold(Vector::<D>::zeros(), |acc, i| acc + basis[i] * step[i]);
            if v.norm() > MAX_STEP {
                v *= MAX_STEP / v.norm();
            }
            if v.norm() < 1e-15 {
                break;
            }
            let mut accepted = false;
            for _ in 0..30 {
                let trial = (z + v).normalize();
                let ft = objective(&trial);
                if ft >= f - 4.0 * f64::EPSILON * f.abs() {
                    z = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                v *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        // Stagnation at the rounding floor still counts as converged.
        if grad_norm <= floor_tol {
            let f = objective(&z);
            return Ok(DualSolution { value: f, point: z });
        }
        let (fz, gf, _) = self.jet(&z);
        let g = x / fz - gf * (x.dot(&z) / (fz * fz));
        if g.norm() * fz / xn <= floor_tol {
            return Ok(DualSolution { value: objective(&z), point: z });
        }
        Err(Error::OptimizerStall { best: f, gradient: g.norm() * fz / xn })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{NormSpec, TangentFrame};
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn round_dual() {
        let norm = AnisotropyNorm::<3>::from_spec(NormSpec::constant(1.0)).unwrap();
        assert_relative_eq!(norm.dual_value(&Vector::<3>::new(3.0, 4.0, 0.0)).unwrap(), 5.0, epsilon = 1e-12);
        assert_relative_eq!(norm.dual_point(&Vector::<3>::new(0.0, 0.0, 7.0)).unwrap(), Vector::<3>::z(), epsilon = 1e-10);
        assert_eq!(norm.dual_value(&Vector::<3>::zeros()).unwrap(), 0.0);
        assert_relative_eq!(
            norm.f_distance(&Vector::<3>::zeros(), &Vector::<3>::new(3.0, 4.0, 0.0)).unwrap(),
            5.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn quadratic_dual_against_brute_force() {
        let norm = AnisotropyNorm::<3>::from_spec(NormSpec::diagonal([4.0, 1.0, 1.0])).unwrap();
        let x = Vector::<3>::new(2.0, 0.0, 0.0);
        assert_relative_eq!(norm.dual_value(&x).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(norm.dual_point(&x).unwrap(), Vector::<3>::x(), epsilon = 1e-8);
        // Brute force: a 1000×1000 latitude–longitude scan of ⟨x,z⟩/F(z).
        let y = Vector::<3>::new(0.7, -1.1, 0.4);
        let mut best = f64::NEG_INFINITY;
        for i in 0..1000 {
            let t = std::f64::consts::PI * (i as f64 + 0.5) / 1000.0;
            for j in 0..1000 {
                let p = std::f64::consts::TAU * j as f64 / 1000.0;
                let z = Vector::<3>::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos());
                let fz = (4.0 * z[0] * z[0] + z[1] * z[1] + z[2] * z[2]).sqrt();
                best = best.max(y.dot(&z) / fz);
            }
        }
        let exact = (y[0] * y[0] / 4.0 + y[1] * y[1] + y[2] * y[2]).sqrt();
        assert_relative_eq!(best, exact, max_relative = 1e-4);
        assert_relative_eq!(norm.dual_value(&y).unwrap(), exact, max_relative = 1e-12);
    }

    #[test]
    fn reconstruction_and_membership() {
        for spec in [NormSpec::smoothed_lp(3.0, 0.3), NormSpec::diagonal([4.0, 1.0, 1.0])] {
            let norm = AnisotropyNorm::<3>::from_spec(spec).unwrap();
            for k in 0..50 {
                let t = k as f64;
                let x = Vector::<3>::new((1.3 * t).sin() * 2.0, (0.7 * t + 1.0).cos(), 0.3 + (0.2 * t).sin());
                let sol = norm.dual_solve(&x).unwrap();
                let back = norm.cahn_hoffman(&sol.point) * sol.value;
                assert!((back - x).norm() <= 1e-8 * x.norm());
                let u = x.normalize();
                assert_relative_eq!(norm.dual_value(&norm.cahn_hoffman(&u)).unwrap(), 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn finite_difference_mode_dual() {
        let norm = AnisotropyNorm::<3>::from_spec(NormSpec::smoothed_lp(3.0, 0.3).with_mode(DerivativeMode::FiniteDifference))
            .unwrap();
        let u = Vector::<3>::new(0.3, 0.4, -0.5).normalize();
        let y = norm.cahn_hoffman(&u);
        assert_relative_eq!(norm.dual_value(&y).unwrap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn drifted_norm_is_asymmetric() {
        let norm = AnisotropyNorm::<2>::from_spec(NormSpec::smoothed_lp(3.0, 0.3).with_drift(vec![0.3, 0.1])).unwrap();
        assert!(!norm.is_even());
        // Search for a pair with d(x,y) ≠ d(y,x); the drift direction is the obvious candidate.
        let mut gap: f64 = 0.0;
        for k in 0..64 {
            let t = std::f64::consts::TAU * k as f64 / 64.0;
            let y = Vector::<2>::new(t.cos(), t.sin());
            let fwd = norm.f_distance(&Vector::<2>::zeros(), &y).unwrap();
            let back = norm.f_distance(&y, &Vector::<2>::zeros()).unwrap();
            gap = gap.max((fwd - back).abs());
        }
        assert!(gap > 0.1, "{gap}");
        let frame = TangentFrame::at(&Vector::<2>::x());
        assert!(norm.af_operator(&frame).is_ok());
    }
}
