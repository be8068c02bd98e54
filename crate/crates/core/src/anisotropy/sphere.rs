//! Quasi-uniform point sets on the unit circle and the unit 2-sphere.

use crate::Vector;

/// Size of the convexity certificate grid at `resolution`.
pub fn certificate_count<const D: usize>(resolution: usize) -> usize {
    if D == 2 {
        8 * resolution
    } else {
        8 * resolution * resolution
    }
}

/// Number of coarse seeds used by the dual-norm solver.
pub fn dual_seed_count<const D: usize>() -> usize {
    if D == 2 {
        512
    } else {
        2048
    }
}

/// `count` points: equally spaced on the circle, a Fibonacci lattice on the
/// 2-sphere.
pub fn quasi_uniform<const D: usize>(count: usize) -> Vec<Vector<D>> {
    let tau = std::f64::consts::TAU;
    match D {
        2 => (0..count)
            .map(|k| {
                let t = tau * (k as f64 + 0.5) / count as f64;
                Vector::<D>::from_fn(|i, _| if i == 0 { t.cos() } else { t.sin() })
            })
            .collect(),
        3 => {
            let golden = (1.0 + 5f64.sqrt()) / 2.0;
            (0..count)
                .map(|k| {
                    let z = 1.0 - (2.0 * k as f64 + 1.0) / count as f64;
                    let rho = (1.0 - z * z).max(0.0).sqrt();
                    let a = tau * (k as f64 / golden).fract();
                    let v = [rho * a.cos(), rho * a.sin(), z];
                    Vector::<D>::from_fn(|i, _| v[i])
                })
                .collect()
        }
        _ => unreachable!("only circles and 2-spheres are sampled"),
    }
}
