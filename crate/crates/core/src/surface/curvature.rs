//! Gauss map, its differential, and the anisotropic Weingarten operator.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::{min_singular, Hypersurface, Jet};
use crate::anisotropy::AnisotropyNorm;
use crate::linalg::orthonormalize;
use crate::{Error, Param, Result, Vector};

/// Geometry at one parameter value. Matrices are in the orthonormal
/// tangent frame `frame`, shared by `T_pM` and `T_ν S^n`.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureSample<const D: usize> {
    pub param: Param,
    pub position: Vector<D>,
    pub normal: Vector<D>,
    pub frame: Vec<Vector<D>>,
    pub gauss_differential: DMatrix<f64>,
    pub weingarten_f: DMatrix<f64>,
    /// Descending.
    pub lambdas: Vec<f64>,
    /// `H^F_0, …, H^F_n`.
    pub hfr: Vec<f64>,
    pub area_element: f64,
    /// `F(ν)`
    pub support: f64,
    /// `φ(ν)`
    pub cahn_hoffman: Vector<D>,
    /// Norm of the antisymmetric part of `dν` before symmetrization.
    pub asymmetry: f64,
}

impl<const D: usize> CurvatureSample<D> {
    pub fn lambda_max(&self) -> f64 {
        self.lambdas[0]
    }
}

struct Local<const D: usize> {
    jet: Jet<D>,
    nu: Vector<D>,
}

impl<const D: usize> Hypersurface<D> {
    fn local(&self, p: &Param) -> Result<Local<D>> {
        let jet = self.jet(p)?;
        let s = min_singular(&jet.tangents);
        if !(s > 1e-8) {
            return Err(Error::DegenerateJacobian { param: *p, singular_value: s });
        }
        Ok(Local { nu: jet.normal * self.orientation.sign(), jet })
    }

    /// Canonical frame: Gram–Schmidt of the chart tangents.
    fn canonical_frame(&self, local: &Local<D>, p: &Param) -> Result<Vec<Vector<D>>> {
        orthonormalize(&local.jet.tangents[..D - 1])
            .ok_or(Error::DegenerateJacobian { param: *p, singular_value: 0.0 })
    }

    /// Unit normal with the recorded orientation.
    pub fn gauss_map(&self, p: &Param) -> Result<Vector<D>> {
        Ok(self.local(p)?.nu)
    }

    /// `dν` in `frame`, symmetrized, plus the size of the antisymmetric part.
    fn dnu(&self, local: &Local<D>, frame: &[Vector<D>]) -> Result<(DMatrix<f64>, f64)> {
        let n = D - 1;
        let jf = DMatrix::from_fn(n, n, |a, i| frame[a].dot(&local.jet.tangents[i]));
        let h = DMatrix::from_fn(n, n, |i, j| local.jet.second_form[i][j]);
        let inv = jf.try_inverse().ok_or(Error::DegenerateJacobian { param: [f64::NAN; 2], singular_value: 0.0 })?;
        // dN = −J⁻ᵀ h J⁻¹ in the frame; ν = ±N.
        let k = -(inv.transpose() * h * &inv) * self.orientation.sign();
        let asym = (&k - k.transpose()).norm() * 0.5;
        Ok(((&k + k.transpose()) * 0.5, asym))
    }

    fn check_frame(&self, nu: &Vector<D>, frame: &[Vector<D>]) -> Result<()> {
        if frame.len() != D - 1 {
            return Err(Error::InvalidArgument(format!("frame needs {} vectors", D - 1)));
        }
        for (i, a) in frame.iter().enumerate() {
            if (a.norm() - 1.0).abs() > 1e-10 || a.dot(nu).abs() > 1e-10 {
                return Err(Error::InvalidArgument("frame vector not unit or not tangent".into()));
            }
            if frame[i + 1..].iter().any(|b| a.dot(b).abs() > 1e-10) {
                return Err(Error::InvalidArgument("frame vectors not orthogonal".into()));
            }
        }
        Ok(())
    }

    /// Matrix of `dν` in an orthonormal tangent frame at `p`.
    pub fn gauss_differential(&self, p: &Param, frame: &[Vector<D>]) -> Result<DMatrix<f64>> {
        let local = self.local(p)?;
        self.check_frame(&local.nu, frame)?;
        Ok(self.dnu(&local, frame)?.0)
    }

    /// `S_F = −A_F(ν) ∘ dν` in the canonical frame.
    pub fn anisotropic_weingarten(&self, norm: &AnisotropyNorm<D>, p: &Param) -> Result<DMatrix<f64>> {
        Ok(self.curvature_sample(norm, p)?.weingarten_f)
    }

    /// Anisotropic principal curvatures, descending.
    pub fn anisotropic_curvatures(&self, norm: &AnisotropyNorm<D>, p: &Param) -> Result<Vec<f64>> {
        Ok(self.curvature_sample(norm, p)?.lambdas)
    }

    pub fn curvature_sample(&self, norm: &AnisotropyNorm<D>, p: &Param) -> Result<CurvatureSample<D>> {
        let local = self.local(p)?;
        let frame = self.canonical_frame(&local, p)?;
        self.sample_with(norm, p, local, frame)
    }

    /// As [`Self::curvature_sample`], in a caller-chosen orthonormal frame.
    pub fn curvature_sample_in_frame(
        &self,
        norm: &AnisotropyNorm<D>,
        p: &Param,
        frame: &[Vector<D>],
    ) -> Result<CurvatureSample<D>> {
        let local = self.local(p)?;
        self.check_frame(&local.nu, frame)?;
        self.sample_with(norm, p, local, frame.to_vec())
    }

    fn sample_with(
        &self,
        norm: &AnisotropyNorm<D>,
        p: &Param,
        local: Local<D>,
        frame: Vec<Vector<D>>,
    ) -> Result<CurvatureSample<D>> {
        let n = D - 1;
        let (dnu, asymmetry) = self.dnu(&local, &frame).map_err(|e| match e {
            Error::DegenerateJacobian { singular_value, .. } => Error::DegenerateJacobian { param: *p, singular_value },
            e => e,
        })?;
        let (support, phi, hess) = norm.jet(&local.nu);
        let a = {
            let raw = DMatrix::from_fn(n, n, |i, j| frame[i].dot(&(hess * frame[j])));
            (&raw + raw.transpose()) * 0.5
        };
        let weingarten_f = -(&a * &dnu);
        // S_F ~ Lᵀ(−dν)L with A = LLᵀ, which is symmetric.
        let chol = a.clone().cholesky().ok_or(Error::FactorizationFailure { param: *p })?;
        let l = chol.l();
        let sym = l.transpose() * (-&dnu) * &l;
        let sym = (&sym + sym.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym).eigenvalues;
        let mut lambdas: Vec<f64> = eig.iter().copied().collect();
        lambdas.sort_by(|x, y| y.total_cmp(x));
        let hfr = super::hfr_all(&lambdas);
        let jf = DMatrix::from_fn(n, n, |a, i| frame[a].dot(&local.jet.tangents[i]));
        Ok(CurvatureSample {
            param: *p,
            position: local.jet.position,
            normal: local.nu,
            frame,
            gauss_differential: dnu,
            weingarten_f,
            lambdas,
            hfr,
            area_element: jf.determinant().abs(),
            support,
            cahn_hoffman: phi,
            asymmetry,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{ShapeBuilder, unit_chart};
    use super::*;
    use crate::{DerivativeMode, NormSpec, Orientation};
    use approx::assert_relative_eq;

    fn round<const D: usize>() -> AnisotropyNorm<D> {
        AnisotropyNorm::from_spec(NormSpec::constant(1.0)).unwrap()
    }

    #[test]
    fn sphere_signs() {
        let s = ShapeBuilder::sphere(2.0).build::<3>(None, DerivativeMode::Analytic).unwrap();
        let p = [1.1, 0.3];
        assert_relative_eq!(s.gauss_map(&p).unwrap(), -s.position(&p) / 2.0, epsilon = 1e-14);
        let sample = s.curvature_sample(&round(), &p).unwrap();
        assert_relative_eq!(sample.gauss_differential, DMatrix::identity(2, 2) * -0.5, epsilon = 1e-14);
        assert_relative_eq!(sample.weingarten_f, DMatrix::identity(2, 2) * 0.5, epsilon = 1e-14);
        assert_relative_eq!(sample.hfr[1], 0.5, epsilon = 1e-14);
        assert_relative_eq!(sample.hfr[2], 0.25, epsilon = 1e-14);
        assert_relative_eq!(sample.area_element, 4.0 * p[0].sin(), epsilon = 1e-14);

        let c = ShapeBuilder::sphere(1.0).build::<2>(None, DerivativeMode::Analytic).unwrap();
        assert_relative_eq!(c.gauss_map(&[0.0, 0.0]).unwrap(), Vector::<2>::new(-1.0, 0.0), epsilon = 1e-15);
        let cs = c.curvature_sample(&round(), &[0.0, 0.0]).unwrap();
        assert_relative_eq!(cs.gauss_differential[(0, 0)], -1.0, epsilon = 1e-14);
        assert_relative_eq!(cs.lambdas[0], 1.0, epsilon = 1e-14);

        let outer = s.clone().with_orientation(Orientation::Outer);
        assert_relative_eq!(outer.curvature_sample(&round(), &p).unwrap().lambdas[0], -0.5, epsilon = 1e-14);
    }

    #[test]
    fn ellipsoid_tip() {
        // Closed form: normal curvatures a/b² at the tip of the long axis.
        let e = ShapeBuilder::ellipsoid(&[2.0, 1.0, 1.0]).build::<3>(None, DerivativeMode::Analytic).unwrap();
        let l = e.anisotropic_curvatures(&round(), &[std::f64::consts::FRAC_PI_2, 0.0]).unwrap();
        assert_relative_eq!(l[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(l[1], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn wulff_shape_has_constant_curvature() {
        let norm = AnisotropyNorm::<3>::from_spec(NormSpec::diagonal([4.0, 1.0, 1.0])).unwrap();
        let w = ShapeBuilder::scaled_wulff(2.0).build(Some(&norm), DerivativeMode::Analytic).unwrap();
        for p in [[0.3, 0.1], [1.4, 2.0], [2.8, 5.9]] {
            let u = unit_chart::<3>(&p).u;
            assert_relative_eq!(w.gauss_map(&p).unwrap(), -u, epsilon = 1e-12);
            let l = w.anisotropic_curvatures(&norm, &p).unwrap();
            assert_relative_eq!(l[0], 0.5, epsilon = 1e-12);
            assert_relative_eq!(l[1], 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn frame_checks() {
        let s = ShapeBuilder::sphere(1.0).build::<3>(None, DerivativeMode::Analytic).unwrap();
        let p = [0.5, 0.5];
        assert!(s.gauss_differential(&p, &[Vector::<3>::x()]).is_err());
        let nu = s.gauss_map(&p).unwrap();
        let frame = crate::linalg::complement_basis(&nu);
        assert_relative_eq!(s.gauss_differential(&p, &frame).unwrap(), DMatrix::identity(2, 2) * -1.0, epsilon = 1e-13);
    }
}
