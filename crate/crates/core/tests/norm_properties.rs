use std::sync::OnceLock;

use proptest::prelude::*;
use wulffkit::{AnisotropyNorm, DerivativeMode, NormSpec, Vector};

type V3 = Vector<3>;

fn specs() -> Vec<NormSpec> {
    vec![
        NormSpec::constant(1.0),
        NormSpec::diagonal([4.0, 1.0, 1.0]),
        NormSpec::smoothed_lp(3.0, 0.3),
        NormSpec::quadratic(vec![vec![2.0, 0.3, 0.1], vec![0.3, 1.0, -0.2], vec![0.1, -0.2, 1.5]])
            .with_drift(vec![0.2, -0.1, 0.15]),
    ]
}

fn norms() -> &'static [AnisotropyNorm<3>] {
    static CELL: OnceLock<Vec<AnisotropyNorm<3>>> = OnceLock::new();
    CELL.get_or_init(|| specs().into_iter().map(|s| AnisotropyNorm::from_spec(s).unwrap()).collect())
}

fn fd_norms() -> &'static [AnisotropyNorm<3>] {
    static CELL: OnceLock<Vec<AnisotropyNorm<3>>> = OnceLock::new();
    CELL.get_or_init(|| norms().iter().map(|n| n.with_mode(DerivativeMode::FiniteDifference)).collect())
}

fn vector() -> impl Strategy<Value = V3> {
    prop::array::uniform3(-2.0..2.0f64)
        .prop_map(|a| V3::from_column_slice(&a))
        .prop_filter("away from zero", |v| v.norm() > 0.05)
}

fn unit() -> impl Strategy<Value = V3> {
    vector().prop_map(|v| v.normalize())
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 100, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn homogeneity(x in vector(), t in 1e-3..10.0f64) {
        for f in norms() {
            let ftx = f.extension_value(&(x * t)).unwrap();
            let fx = f.extension_value(&x).unwrap();
            prop_assert!((ftx - t * fx).abs() <= 1e-10 * ftx);
        }
    }

    #[test]
    fn euler_identities(u in unit()) {
        for (f, tol) in norms().iter().map(|f| (f, 1e-8)).chain(fd_norms().iter().map(|f| (f, 1e-5))) {
            let value = f.support(&u);
            prop_assert!((f.gradient(&u).dot(&u) - value).abs() <= tol, "{:?}", f);
            prop_assert!((f.hessian(&u) * u).norm() <= tol, "{:?}", f);
        }
    }

    #[test]
    fn derivatives_match_central_differences(x in vector()) {
        let h = f64::EPSILON.cbrt();
        for f in norms() {
            let g = f.gradient(&x);
            let hess = f.hessian(&x);
            let mut fd_g = V3::zeros();
            let mut fd_h = nalgebra::Matrix3::zeros();
            for i in 0..3 {
                let mut e = V3::zeros();
                e[i] = h;
                fd_g[i] = (f.extension_value(&(x + e)).unwrap() - f.extension_value(&(x - e)).unwrap()) / (2.0 * h);
                fd_h.set_column(i, &((f.gradient(&(x + e)) - f.gradient(&(x - e))) / (2.0 * h)));
            }
            prop_assert!((g - fd_g).norm() <= 1e-6 * g.norm());
            prop_assert!((hess - fd_h).norm() <= 1e-6 * hess.norm().max(g.norm() / x.norm()));
        }
    }

    #[test]
    fn dual_pairing(y in unit(), z in unit()) {
        for f in norms() {
            let pair = f.cahn_hoffman(&y).dot(&z);
            let fz = f.support(&z);
            prop_assert!(pair <= fz + 1e-12);
            if (fz - pair).abs() <= 1e-8 {
                prop_assert!((y - z).norm() <= 1e-4);
            }
        }
    }

    #[test]
    fn fenchel(x in vector(), y in unit()) {
        for f in norms() {
            let dual = f.dual_value(&x).unwrap();
            let lhs = x.dot(&y);
            let rhs = dual * f.support(&y);
            prop_assert!(lhs <= rhs + 1e-12 * rhs.abs());
            // the equality case is realized at ψ(x)
            let psi = f.dual_point(&x).unwrap();
            for z in [y, psi] {
                if (x.dot(&z) - dual * f.support(&z)).abs() <= 1e-8 {
                    prop_assert!((x - f.cahn_hoffman(&z) * dual).norm() <= 1e-6 * x.norm());
                }
            }
            prop_assert!((x.dot(&psi) - dual * f.support(&psi)).abs() <= 1e-8);
        }
    }

    #[test]
    fn dual_triangle(x in vector(), y in vector(), k in 0.01..5.0f64) {
        for f in norms() {
            let (fx, fy) = (f.dual_value(&x).unwrap(), f.dual_value(&y).unwrap());
            let fxy = f.dual_value(&(x + y)).unwrap();
            prop_assert!(fxy <= fx + fy + 1e-12 * (fx + fy));
            if (fx + fy - fxy).abs() <= 1e-10 {
                prop_assert!((x.normalize() - y.normalize()).norm() <= 1e-6);
            }
            let kx = x * k;
            let sum = f.dual_value(&(x + kx)).unwrap();
            prop_assert!((sum - fx - f.dual_value(&kx).unwrap()).abs() <= 1e-9 * sum);
        }
    }

    #[test]
    fn cahn_hoffman_lands_on_the_unit_dual_sphere(u in unit()) {
        for f in norms() {
            prop_assert!((f.dual_value(&f.cahn_hoffman(&u)).unwrap() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn quadratic_dual_closed_form(x in vector()) {
        let f = &norms()[1];
        let closed = (x[0] * x[0] / 4.0 + x[1] * x[1] + x[2] * x[2]).sqrt();
        prop_assert!((f.dual_value(&x).unwrap() - closed).abs() <= 1e-8 * closed.max(1.0));
    }

    #[test]
    fn reflection_chain_rule(u in unit()) {
        for f in norms() {
            let r = f.reflected();
            prop_assert!((r.cahn_hoffman(&u) + f.cahn_hoffman(&(-u))).norm() <= 1e-12);
            prop_assert!((r.support(&u) - f.support(&(-u))).abs() <= 1e-15);
        }
    }
}

#[test]
fn drift_makes_distance_asymmetric() {
    let f = &norms()[3];
    let (x, y) = (V3::new(0.0, 0.0, 0.0), V3::new(1.0, 0.0, 0.0));
    let there = f.f_distance(&x, &y).unwrap();
    let back = f.f_distance(&y, &x).unwrap();
    assert!((there - back).abs() > 1e-3, "{there} vs {back}");
}

#[test]
fn even_norms_have_symmetric_distance() {
    for f in &norms()[..3] {
        let (x, y) = (V3::new(0.3, -1.0, 0.2), V3::new(1.0, 0.5, -0.4));
        let d = f.f_distance(&x, &y).unwrap();
        assert!((d - f.f_distance(&y, &x).unwrap()).abs() <= 1e-12 * d);
    }
}

#[test]
fn planar_norms_behave_alike() {
    let f = AnisotropyNorm::<2>::from_spec(NormSpec::smoothed_lp(3.0, 0.3)).unwrap();
    for k in 0..512 {
        let t = std::f64::consts::TAU * k as f64 / 512.0;
        let u = Vector::<2>::new(t.cos(), t.sin());
        assert!((f.dual_value(&f.cahn_hoffman(&u)).unwrap() - 1.0).abs() <= 1e-8);
        assert!((f.gradient(&u).dot(&u) - f.support(&u)).abs() <= 1e-12);
    }
}
