use std::f64::consts::TAU;
use std::sync::OnceLock;

use proptest::prelude::*;
use wulffkit::cutlocus::CutLocus;
use wulffkit::{AnisotropyNorm, DerivativeMode, Hypersurface, NormSpec, QuadratureGrid, ShapeBuilder, Vector};

struct Curve {
    norm: AnisotropyNorm<2>,
    surface: Hypersurface<2>,
    grid: QuadratureGrid,
}

fn curves() -> &'static [Curve] {
    static CELL: OnceLock<Vec<Curve>> = OnceLock::new();
    CELL.get_or_init(|| {
        let cases = [
            (NormSpec::constant(1.0), ShapeBuilder::ellipsoid(&[2.0, 1.0])),
            (NormSpec::diagonal([4.0, 1.0]), ShapeBuilder::ellipsoid(&[1.0, 1.5])),
            (NormSpec::smoothed_lp(3.0, 0.3), ShapeBuilder::bumpy_sphere(0.3)),
        ];
        cases
            .into_iter()
            .map(|(spec, shape)| {
                let norm = AnisotropyNorm::from_spec(spec).unwrap();
                let surface = shape.build(Some(&norm), DerivativeMode::Analytic).unwrap();
                let grid = QuadratureGrid::build(&surface, [64, 0], 2).unwrap();
                Curve { norm, surface, grid }
            })
            .collect()
    })
}

fn norms3() -> &'static [AnisotropyNorm<3>] {
    static CELL: OnceLock<Vec<AnisotropyNorm<3>>> = OnceLock::new();
    CELL.get_or_init(|| {
        [
            NormSpec::constant(1.0),
            NormSpec::diagonal([4.0, 1.0, 1.0]),
            NormSpec::smoothed_lp(3.0, 0.3),
            NormSpec::constant(1.0).with_drift(vec![0.2, 0.1, -0.3]),
        ]
        .into_iter()
        .map(|s| AnisotropyNorm::from_spec(s).unwrap())
        .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn ray_distance_identity(
        p in prop::array::uniform3(-3.0..3.0f64),
        u in prop::array::uniform3(-1.0..1.0f64),
        t in 1e-3..10.0f64,
    ) {
        let u = Vector::<3>::from_column_slice(&u);
        prop_assume!(u.norm() > 0.1);
        let u = u.normalize();
        let p = Vector::<3>::from_column_slice(&p);
        for f in norms3() {
            let d = f.f_distance(&p, &(p + f.cahn_hoffman(&u) * t)).unwrap();
            prop_assert!((d - t).abs() <= 1e-10, "{:?}: {} vs {}", f, d, t);
        }
    }

    #[test]
    fn distance_is_t_before_the_cut_and_less_after(s in 0.0..TAU, which in 0usize..3) {
        let c = &curves()[which];
        let locus = CutLocus::new(&c.norm, &c.surface, &c.grid).unwrap();
        let sample = c.surface.curvature_sample(&c.norm, &[s, 0.0]).unwrap();
        let entry = locus.cut_time(&[s, 0.0]).unwrap();
        prop_assert!(entry.cut_time <= entry.focal_time + 1e-6);
        let ray = |t: f64| sample.position + sample.cahn_hoffman * t;
        let tol = locus.tolerance();
        let gap = 1e-3 * entry.cut_time;
        for frac in [0.1, 0.5, 0.9] {
            let t = frac * (entry.cut_time - gap);
            let (d, _) = locus.distance_to_surface(&ray(t)).unwrap();
            prop_assert!((d - t).abs() <= tol, "before: t={} d={}", t, d);
        }
        let t = entry.cut_time + gap;
        let (d, _) = locus.distance_to_surface(&ray(t)).unwrap();
        prop_assert!(d < t - tol, "after: t={} d={}", t, d);
    }
}
