//! Small dense helpers shared by the geometry modules.

use nalgebra::DMatrix;

use crate::Vector;

/// Orthonormal basis of the orthogonal complement of the unit vector `u`:
/// the coordinate axis least aligned with `u`, projected, then (in 3D) the
/// cross product.
pub fn complement_basis<const D: usize>(u: &Vector<D>) -> Vec<Vector<D>> {
    complement_frame(u)[..D - 1].to_vec()
}

/// Allocation-free form of [`complement_basis`]; for `D = 2` the second
/// vector is zero.
pub(crate) fn complement_frame<const D: usize>(u: &Vector<D>) -> [Vector<D>; 2] {
    let mut axis = 0;
    for k in 1..D {
        if u[k].abs() < u[axis].abs() {
            axis = k;
        }
    }
    // |u[axis]| ≤ 1/√D, so a single projection loses nothing; a second
    // pass mops up rounding.
    let mut v = Vector::<D>::zeros();
    v[axis] = 1.0;
    for _ in 0..2 {
        v -= u * u.dot(&v);
    }
    let e1 = v.normalize();
    let mut e2 = Vector::<D>::zeros();
    if D == 3 {
        e2[0] = u[1] * e1[2] - u[2] * e1[1];
        e2[1] = u[2] * e1[0] - u[0] * e1[2];
        e2[2] = u[0] * e1[1] - u[1] * e1[0];
        e2 /= e2.norm();
    }
    [e1, e2]
}

/// Orthonormalizes `vectors` in order (modified Gram–Schmidt, two passes).
/// Returns `None` if they are numerically dependent.
pub fn orthonormalize<const D: usize>(vectors: &[Vector<D>]) -> Option<Vec<Vector<D>>> {
    let mut out: Vec<Vector<D>> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let scale = v.norm();
        let mut w = *v;
        for _ in 0..2 {
            for b in &out {
                w -= b * b.dot(&w);
            }
        }
        let norm = w.norm();
        if !(norm > 1e-14 * scale.max(f64::MIN_POSITIVE)) || norm == 0.0 {
            return None;
        }
        out.push(w / norm);
    }
    Some(out)
}

/// `Bᵀ M B` for a symmetric ambient matrix `M` and basis columns `B`.
pub fn restrict<const D: usize>(m: &crate::Matrix<D>, basis: &[Vector<D>]) -> DMatrix<f64> {
    let k = basis.len();
    DMatrix::from_fn(k, k, |i, j| basis[i].dot(&(m * basis[j])))
}

/// Deterministic pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if values.len() <= BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Solves the `n×n` system (`n ≤ 2`) stored in the leading block of `a`.
pub(crate) fn solve_leading(a: &[[f64; 2]; 2], b: &[f64; 2], n: usize) -> Option<[f64; 2]> {
    match n {
        1 => (a[0][0] != 0.0).then(|| [b[0] / a[0][0], 0.0]),
        2 => {
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let scale = a[0][0].abs().max(a[1][1].abs()).max(a[0][1].abs());
            if det.abs() <= 1e-300 || det.abs() <= 1e-15 * scale * scale {
                return None;
            }
            Some([
                (b[0] * a[1][1] - b[1] * a[0][1]) / det,
                (a[0][0] * b[1] - a[1][0] * b[0]) / det,
            ])
        }
        _ => None,
    }
}

/// Binomial coefficient as a float.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_basis_is_orthonormal() {
        let u = Vector::<3>::new(0.3, -0.4, 0.866).normalize();
        let basis = complement_basis(&u);
        assert_eq!(basis.len(), 2);
        for (i, a) in basis.iter().enumerate() {
            assert!(a.dot(&u).abs() < 1e-15);
            assert!((a.norm() - 1.0).abs() < 1e-15);
            for b in &basis[i + 1..] {
                assert!(a.dot(b).abs() < 1e-15);
            }
        }
        let planar = complement_basis(&Vector::<2>::new(0.6, 0.8));
        assert_eq!(planar.len(), 1);
        assert!(planar[0].dot(&Vector::<2>::new(0.6, 0.8)).abs() < 1e-15);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_exact_data() {
        let v: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&v), 500500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(2, 1), 2.0);
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(6, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
    }

    #[test]
    fn small_solves() {
        let x = solve_leading(&[[2.0, 1.0], [1.0, 3.0]], &[3.0, 5.0], 2).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-15 && (x[1] - 1.4).abs() < 1e-15);
        assert_eq!(solve_leading(&[[4.0, 0.0], [0.0, 0.0]], &[2.0, 0.0], 1), Some([0.5, 0.0]));
        assert!(solve_leading(&[[1.0, 2.0], [2.0, 4.0]], &[1.0, 1.0], 2).is_none());
    }
}
