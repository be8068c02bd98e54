//! Run configuration and its validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use wulffkit::{DerivativeMode, NormSpec, ShapeBuilder};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Minkowski,
    Hk,
    Tube,
    Fit,
    Maclaurin,
    Cut,
    Stationarity,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Self::Minkowski => "minkowski",
            Self::Hk => "hk",
            Self::Tube => "tube",
            Self::Fit => "fit",
            Self::Maclaurin => "maclaurin",
            Self::Cut => "cut",
            Self::Stationarity => "stationarity",
        }
    }

    /// Checks that need cut times.
    pub fn needs_profile(self) -> bool {
        matches!(self, Self::Tube | Self::Cut | Self::Stationarity)
    }
}

/// Optional tolerance overrides; every value that is set is echoed in the report.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minkowski: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hk: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tube: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maclaurin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub focal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binding: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationarity: Option<f64>,
}

/// Tolerances in effect for a run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative to `∫F(ν) dA`.
    pub minkowski: f64,
    /// Relative to `(n+1)V`.
    pub hk: f64,
    /// Relative to `V`.
    pub tube: f64,
    /// Largest relative rms for a Wulff verdict.
    pub fit: f64,
    /// Smallest admissible Maclaurin residual is `−maclaurin`.
    pub maclaurin: f64,
    /// Allowed excess of cut over focal time.
    pub focal: f64,
    pub binding: f64,
    pub stationarity: f64,
}

impl Tolerances {
    pub fn resolve(o: &ToleranceOverrides) -> Result<Self, CliError> {
        let t = Self {
            minkowski: o.minkowski.unwrap_or(wulffkit::integrals::MINKOWSKI_TOLERANCE),
            hk: o.hk.unwrap_or(0.0),
            tube: o.tube.unwrap_or(wulffkit::cutlocus::TUBE_TOLERANCE),
            fit: o.fit.unwrap_or(wulffkit::integrals::WULFF_RMS_TOLERANCE),
            maclaurin: o.maclaurin.unwrap_or(1e-12),
            focal: o.focal.unwrap_or(1e-6),
            binding: o.binding.unwrap_or(wulffkit::cutlocus::BINDING_TOLERANCE),
            stationarity: o.stationarity.unwrap_or(1e-3),
        };
        let all = [t.minkowski, t.hk, t.tube, t.fit, t.maclaurin, t.focal, t.binding, t.stationarity];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(CliError::Config("tolerances must be finite and nonnegative".into()));
        }
        Ok(t)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub norm: NormSpec,
    #[serde(default)]
    pub shape: Option<ShapeBuilder>,
    /// Ambient dimension; inferred from the norm or shape when absent, else 3.
    #[serde(default)]
    pub dim: Option<usize>,
    /// Base grid: `[N]` for curves, `[N_θ, N_φ]` for surfaces.
    #[serde(default)]
    pub resolution: Option<Vec<usize>>,
    #[serde(default)]
    pub levels: Option<usize>,
    /// Derivatives of the embedding.
    #[serde(default)]
    pub derivative_mode: DerivativeMode,
    #[serde(default)]
    pub checks: Vec<Check>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

/// Command-line settings that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub fd: bool,
    pub resolution: Option<Vec<usize>>,
    pub levels: Option<usize>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(out) = &o.out {
            self.output_dir = Some(out.clone());
        }
        if o.fd {
            self.derivative_mode = DerivativeMode::FiniteDifference;
            self.norm.derivative_mode = DerivativeMode::FiniteDifference;
        }
        if let Some(r) = &o.resolution {
            self.resolution = Some(r.clone());
        }
        if let Some(l) = o.levels {
            self.levels = Some(l);
        }
    }

    pub fn dimension(&self) -> Result<usize, CliError> {
        let sources = [
            self.dim,
            self.norm.ambient_dim(),
            self.shape.as_ref().and_then(ShapeBuilder::ambient_dim),
        ];
        let mut found = None;
        for d in sources.into_iter().flatten() {
            match found {
                Some(f) if f != d => {
                    return Err(CliError::Config(format!("conflicting dimensions {f} and {d}")));
                }
                _ => found = Some(d),
            }
        }
        let d = found.unwrap_or(3);
        if !(2..=3).contains(&d) {
            return Err(CliError::Config(format!("ambient dimension {d} is not supported")));
        }
        Ok(d)
    }

    /// `[N, M]` grid resolution, with the curve default 256 and surface default 32×64.
    pub fn grid_resolution(&self, dim: usize) -> Result<[usize; 2], CliError> {
        match (dim, self.resolution.as_deref()) {
            (2, None) => Ok([256, 0]),
            (_, None) => Ok([32, 64]),
            (2, Some([n])) => Ok([*n, 0]),
            (3, Some([n])) => Ok([*n, 2 * n]),
            (3, Some([n, m])) => Ok([*n, *m]),
            (_, Some(r)) => Err(CliError::Config(format!("resolution {r:?} does not fit dimension {dim}"))),
        }
    }

    pub fn grid_levels(&self) -> usize {
        self.levels.unwrap_or(2)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }

    /// Deduplicated checks in a fixed order, validated against the dimension.
    pub fn checked(&self, dim: usize) -> Result<Vec<Check>, CliError> {
        if self.checks.is_empty() {
            return Err(CliError::Config("no checks selected".into()));
        }
        if dim != 2 && self.checks.contains(&Check::Stationarity) {
            return Err(CliError::Config("the stationarity check applies to curves only".into()));
        }
        let mut checks = self.checks.clone();
        checks.sort();
        checks.dedup();
        Ok(checks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> RunConfig {
        serde_json::from_str(text).unwrap()
    }

    #[test]
    fn dimension_inference() {
        let c = parse(r#"{"norm": {"family": "constant"}, "shape": {"kind": "ellipse", "semi_axes": [2, 1]}}"#);
        assert_eq!(c.dimension().unwrap(), 2);
        let c = parse(r#"{"norm": {"family": "quadratic", "Q": [[1,0],[0,1]]}, "shape": {"kind": "sphere", "radius": 1, "center": [0,0,0]}}"#);
        assert!(c.dimension().is_err());
        let c = parse(r#"{"norm": {"family": "smoothed-lp", "p": 3, "eps": 0.3}}"#);
        assert_eq!(c.dimension().unwrap(), 3);
    }

    #[test]
    fn stationarity_needs_a_curve() {
        let c = parse(r#"{"norm": {"family": "constant"}, "shape": {"kind": "sphere", "radius": 1}, "checks": ["stationarity"]}"#);
        assert!(c.checked(3).is_err());
        assert_eq!(c.checked(2).unwrap(), vec![Check::Stationarity]);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"norm": {"family": "constant"}, "chekcs": []}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"norm": {"family": "constant"}, "checks": ["volume"]}"#).is_err());
        let t: ToleranceOverrides = serde_json::from_str(r#"{"tube": 0.01}"#).unwrap();
        assert_eq!(Tolerances::resolve(&t).unwrap().tube, 0.01);
        assert!(Tolerances::resolve(&ToleranceOverrides { hk: Some(-1.0), ..Default::default() }).is_err());
    }

    #[test]
    fn resolutions() {
        let mut c = parse(r#"{"norm": {"family": "constant"}}"#);
        assert_eq!(c.grid_resolution(3).unwrap(), [32, 64]);
        c.apply(&Overrides { resolution: Some(vec![40]), ..Default::default() });
        assert_eq!(c.grid_resolution(3).unwrap(), [40, 80]);
        assert_eq!(c.grid_resolution(2).unwrap(), [40, 0]);
        c.resolution = Some(vec![1, 2, 3]);
        assert!(c.grid_resolution(3).is_err());
    }
}
