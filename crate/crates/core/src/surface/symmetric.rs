//! Normalized elementary symmetric functions and Maclaurin residuals.

use serde::Serialize;

use crate::linalg::binomial;
use crate::{Error, Result};

/// `σ_0, …, σ_n` of `lambdas`.
pub fn elementary_symmetric(lambdas: &[f64]) -> Vec<f64> {
    let mut sigma = vec![0.0; lambdas.len() + 1];
    sigma[0] = 1.0;
    for (m, &l) in lambdas.iter().enumerate() {
        for r in (1..=m + 1).rev() {
            sigma[r] += l * sigma[r - 1];
        }
    }
    sigma
}

/// `H_r = σ_r / C(n, r)`.
pub fn hfr(lambdas: &[f64], r: usize) -> Result<f64> {
    let n = lambdas.len();
    if r > n {
        return Err(Error::InvalidArgument(format!("r = {r} exceeds n = {n}")));
    }
    Ok(elementary_symmetric(lambdas)[r] / binomial(n, r))
}

/// `H_0, …, H_n`.
pub fn hfr_all(lambdas: &[f64]) -> Vec<f64> {
    let n = lambdas.len();
    elementary_symmetric(lambdas).iter().enumerate().map(|(r, s)| s / binomial(n, r)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaclaurinResidual {
    pub k: usize,
    /// `H_{k−1} − H_k^{(k−1)/k}`
    pub newton: f64,
    /// `H_1 − H_k^{1/k}`
    pub mean: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaclaurinReport {
    pub residuals: Vec<MaclaurinResidual>,
    pub min_residual: f64,
    /// All residuals vanish relative to their scale.
    pub equality: bool,
    /// `(max λ − min λ) / max λ`
    pub spread: f64,
    /// Residuals ≥ −1e-12, and equality only with spread ≤ 1e-6.
    pub pass: bool,
}

/// Residual below which an inequality counts as an equality, relative to the
/// scale of its larger side (`H_{k−1}` or `H_1`).
pub const EQUALITY_TOLERANCE: f64 = 1e-14;

// residuals this close to zero relative to their scale are rounding and are reported as 0
const ROUNDING_FLOOR: f64 = 64.0 * f64::EPSILON;

fn snap(residual: f64, scale: f64) -> f64 {
    if residual.abs() <= ROUNDING_FLOOR * scale {
        0.0
    } else {
        residual
    }
}

/// Residuals of `H_k^{(k−1)/k} ≤ H_{k−1}` and `H_k^{1/k} ≤ H_1` for `k = 1..n`.
pub fn maclaurin_report(lambdas: &[f64]) -> Result<MaclaurinReport> {
    if let Some(&bad) = lambdas.iter().find(|l| !(**l > 0.0) || !l.is_finite()) {
        return Err(Error::NonpositiveCurvature(bad));
    }
    let h = hfr_all(lambdas);
    let n = lambdas.len();
    let residuals: Vec<MaclaurinResidual> = (1..=n)
        .map(|k| {
            let kf = k as f64;
            MaclaurinResidual {
                k,
                newton: snap(h[k - 1] - h[k].powf((kf - 1.0) / kf), h[k - 1]),
                mean: snap(h[1] - h[k].powf(1.0 / kf), h[1]),
            }
        })
        .collect();
    let min_residual = residuals.iter().flat_map(|r| [r.newton, r.mean]).fold(f64::INFINITY, f64::min);
    let equality = residuals
        .iter()
        .all(|r| r.newton <= EQUALITY_TOLERANCE * h[r.k - 1] && r.mean <= EQUALITY_TOLERANCE * h[1]);
    let hi = lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = lambdas.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (hi - lo) / hi;
    let pass = min_residual >= -1e-12 && (!equality || spread <= 1e-6);
    Ok(MaclaurinReport { residuals, min_residual, equality, spread, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normalized_means() {
        assert_eq!(hfr(&[1.0, 3.0], 1).unwrap(), 2.0);
        assert_eq!(hfr(&[1.0, 3.0], 2).unwrap(), 3.0);
        assert_eq!(hfr(&[1.0, 3.0], 0).unwrap(), 1.0);
        assert!(hfr(&[1.0, 3.0], 3).is_err());
        for r in 0..=3 {
            assert_relative_eq!(hfr(&[0.7; 3], r).unwrap(), 0.7f64.powi(r as i32), epsilon = 1e-15);
        }
        assert_eq!(elementary_symmetric(&[1.0, 2.0, 3.0]), vec![1.0, 6.0, 11.0, 6.0]);
    }

    #[test]
    fn maclaurin_examples() {
        let r = maclaurin_report(&[1.0, 3.0]).unwrap();
        assert_relative_eq!(r.residuals[1].mean, 2.0 - 3f64.sqrt(), epsilon = 1e-15);
        assert!(!r.equality && r.pass);
        let eq = maclaurin_report(&[0.4, 0.4]).unwrap();
        assert!(eq.equality && eq.pass);
        assert_eq!(eq.residuals[1].mean, 0.0);
        let one = maclaurin_report(&[2.0]).unwrap();
        assert_eq!(one.residuals, vec![MaclaurinResidual { k: 1, newton: 0.0, mean: 0.0 }]);
        assert!(matches!(maclaurin_report(&[1.0, 0.0]), Err(Error::NonpositiveCurvature(_))));
    }
}
