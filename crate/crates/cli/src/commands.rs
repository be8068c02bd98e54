//! `wulff`, `verify` and `curvature`.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use wulffkit::cutlocus::{self, CutLocus, CutProfile, StationarityReport};
use wulffkit::export::{write_obj, write_polyline_csv};
use wulffkit::integrals::SampledSurface;
use wulffkit::surface::maclaurin_report;
use wulffkit::{
    AnisotropyNorm, CurvatureSample, DerivativeMode, NormSpec, QuadratureGrid, ShapeBuilder, VerificationReport,
};

use crate::config::{Check, RunConfig, ToleranceOverrides, Tolerances};
use crate::{ensure_dir, json, write_file, CliError, Outcome};

/// Membership bar for Wulff samples.
const MEMBERSHIP_TOLERANCE: f64 = 1e-8;
const RAY_PAIRS: usize = 2048;
const RAY_SEED: u64 = 0x5eed;

pub fn cmd_wulff(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.dimension()? {
        2 => wulff::<2>(cfg),
        _ => wulff::<3>(cfg),
    }
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.dimension()? {
        2 => verify::<2>(cfg, Some(cutlocus::curve_cut_stationarity)),
        _ => verify::<3>(cfg, None),
    }
}

pub fn cmd_curvature(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.dimension()? {
        2 => curvature::<2>(cfg),
        _ => curvature::<3>(cfg),
    }
}

#[derive(Serialize)]
struct WulffSummary<'a> {
    command: &'static str,
    dimension: usize,
    norm: &'a NormSpec,
    resolution: usize,
    vertices: usize,
    triangles: usize,
    convexity_margin: f64,
    certificate_points: usize,
    membership_residual: f64,
    membership_tolerance: f64,
    pass: bool,
    geometry: &'static str,
}

fn wulff<const D: usize>(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let norm = AnisotropyNorm::<D>::from_spec(cfg.norm.clone())?;
    let resolution = cfg.grid_resolution(D)?[0];
    let samples = norm.wulff_samples(resolution)?;
    let residual = samples.membership_residual(&norm)?;
    let mut geometry = Vec::new();
    let name = if D == 3 {
        write_obj(&mut geometry, &samples.points, &samples.triangles).expect("writing to memory");
        "wulff.obj"
    } else {
        write_polyline_csv(&mut geometry, &samples.points).expect("writing to memory");
        "wulff.csv"
    };
    let pass = residual <= MEMBERSHIP_TOLERANCE;
    let summary = WulffSummary {
        command: "wulff",
        dimension: D,
        norm: &cfg.norm,
        resolution,
        vertices: samples.points.len(),
        triangles: samples.triangles.len(),
        convexity_margin: norm.convexity_margin(),
        certificate_points: norm.validation_points(),
        membership_residual: residual,
        membership_tolerance: MEMBERSHIP_TOLERANCE,
        pass,
        geometry: name,
    };
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    write_file(&dir.join(name), &geometry)?;
    write_file(&dir.join("wulff_summary.json"), &json(&summary))?;
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

#[derive(Serialize)]
struct CheckResult {
    check: &'static str,
    pass: bool,
    reports: Vec<VerificationReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    details: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

impl CheckResult {
    fn failed(check: Check, e: impl ToString) -> Self {
        Self { check: check.name(), pass: false, reports: Vec::new(), details: None, error: Some(e.to_string()) }
    }

    fn from_reports(check: Check, reports: Vec<VerificationReport>, details: Option<Value>) -> Self {
        let pass = reports.iter().all(|r| r.pass);
        Self { check: check.name(), pass, reports, details, error: None }
    }
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    command: &'static str,
    dimension: usize,
    norm: &'a NormSpec,
    shape: &'a ShapeBuilder,
    derivative_mode: DerivativeMode,
    resolution: [usize; 2],
    levels: usize,
    tolerances: &'a Tolerances,
    /// Values that replaced a default.
    overrides: &'a ToleranceOverrides,
    checks: Vec<CheckResult>,
    pass: bool,
}

type Stationarity<const D: usize> =
    fn(&SampledSurface<'_, D>, &CutProfile, f64) -> wulffkit::Result<StationarityReport>;

fn shape_of(cfg: &RunConfig) -> Result<&ShapeBuilder, CliError> {
    cfg.shape.as_ref().ok_or_else(|| CliError::Config("a shape is required".into()))
}

fn verify<const D: usize>(cfg: &RunConfig, stationarity: Option<Stationarity<D>>) -> Result<Outcome, CliError> {
    let checks = cfg.checked(D)?;
    let tol = Tolerances::resolve(&cfg.tolerances)?;
    let shape = shape_of(cfg)?;
    let resolution = cfg.grid_resolution(D)?;
    let levels = cfg.grid_levels();
    let norm = AnisotropyNorm::<D>::from_spec(cfg.norm.clone())?;
    let surface = shape.build(Some(&norm), cfg.derivative_mode)?;
    let grid = QuadratureGrid::build(&surface, resolution, levels)?;
    let sampled = SampledSurface::new(&norm, &surface, &grid)?;

    let profile = checks.iter().any(|c| c.needs_profile()).then(|| {
        CutLocus::new(&norm, &surface, &grid).and_then(|l| l.with_binding_tolerance(tol.binding).profile(&sampled))
    });
    let hk = sampled.hk(tol.hk);

    let mut results = Vec::new();
    for &check in &checks {
        let result = match check {
            Check::Minkowski => {
                (0..D - 1).map(|r| sampled.minkowski(r, tol.minkowski)).collect::<wulffkit::Result<Vec<_>>>().map(
                    |reports| CheckResult::from_reports(check, reports, None),
                )
            }
            Check::Hk => hk.clone().map(|r| CheckResult::from_reports(check, vec![r], None)),
            Check::Fit => fit_check(&sampled, hk.as_ref().ok(), &tol),
            Check::Maclaurin => Ok(maclaurin_check(sampled.samples.last().expect("grid has levels"), &tol)),
            Check::Cut => with_profile(&profile, |p| cut_check(&norm, &surface, p, &tol)),
            Check::Tube => with_profile(&profile, |p| {
                let r = cutlocus::tube_volume(&sampled, p)?;
                let r = VerificationReport::equality(&r.name, r.value, r.target, r.scale, tol.tube, r.grid_error_estimate);
                Ok(CheckResult::from_reports(check, vec![r], None))
            }),
            Check::Stationarity => match stationarity {
                Some(f) => with_profile(&profile, |p| stationarity_check(f(&sampled, p, tol.stationarity)?)),
                None => Err(wulffkit::Error::InvalidArgument("stationarity applies to curves only".into())),
            },
        };
        results.push(result.unwrap_or_else(|e| CheckResult::failed(check, e)));
    }
    let pass = results.iter().all(|r| r.pass);
    let report = VerifyReport {
        command: "verify",
        dimension: D,
        norm: &cfg.norm,
        shape,
        derivative_mode: cfg.derivative_mode,
        resolution,
        levels,
        tolerances: &tol,
        overrides: &cfg.tolerances,
        checks: results,
        pass,
    };
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    if let Some(Ok(p)) = &profile {
        let mut csv = Vec::new();
        p.write_csv(&mut csv).expect("writing to memory");
        write_file(&dir.join("cut_profile.csv"), &csv)?;
    }
    write_file(&dir.join("report.json"), &json(&report))?;
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

fn with_profile<F>(profile: &Option<wulffkit::Result<CutProfile>>, f: F) -> wulffkit::Result<CheckResult>
where
    F: FnOnce(&CutProfile) -> wulffkit::Result<CheckResult>,
{
    match profile {
        Some(Ok(p)) => f(p),
        Some(Err(e)) => Err(e.clone()),
        None => unreachable!("profile is computed whenever a check needs it"),
    }
}

fn fit_check<const D: usize>(
    sampled: &SampledSurface<'_, D>,
    hk: Option<&VerificationReport>,
    tol: &Tolerances,
) -> wulffkit::Result<CheckResult> {
    let fit = sampled.wulff_fit()?;
    let is_wulff = fit.rms_residual <= tol.fit;
    let mut report = VerificationReport::equality("wulff_fit", fit.rms_residual, 0.0, 1.0, tol.fit, 0.0)
        .with_verdict(if is_wulff { "wulff" } else { "not Wulff" });
    // the fit is a diagnostic; it fails only when it contradicts the HK verdict
    let consistent = hk.map(|h| h.within_grid_error() == is_wulff);
    report.pass = consistent.unwrap_or(true);
    let details = json!({
        "center": fit.center.as_slice(),
        "scale": fit.scale,
        "rms_residual": fit.rms_residual,
        "diameter": fit.diameter,
        "consistent_with_hk": consistent,
    });
    Ok(CheckResult::from_reports(Check::Fit, vec![report], Some(details)))
}

fn maclaurin_check<const D: usize>(samples: &[CurvatureSample<D>], tol: &Tolerances) -> CheckResult {
    let mut min_residual = f64::INFINITY;
    let (mut evaluated, mut skipped, mut equality, mut bad) = (0usize, 0usize, 0usize, 0usize);
    for s in samples {
        match maclaurin_report(&s.lambdas) {
            Ok(r) => {
                evaluated += 1;
                min_residual = min_residual.min(r.min_residual);
                equality += r.equality as usize;
                // equality must come with coinciding curvatures
                bad += (r.equality && r.spread > 1e-6) as usize;
            }
            Err(_) => skipped += 1,
        }
    }
    let value = if evaluated > 0 { min_residual } else { 0.0 };
    let mut report = VerificationReport::at_least("maclaurin_min_residual", value, 0.0, 1.0, tol.maclaurin, 0.0);
    report.pass &= bad == 0;
    if evaluated == 0 {
        report = report.with_verdict("no node with all curvatures positive");
    }
    let details = json!({
        "nodes": samples.len(),
        "evaluated": evaluated,
        "skipped_nonconvex": skipped,
        "equality_nodes": equality,
        "equality_without_umbilic": bad,
    });
    CheckResult::from_reports(Check::Maclaurin, vec![report], Some(details))
}

fn cut_check<const D: usize>(
    norm: &AnisotropyNorm<D>,
    surface: &wulffkit::Hypersurface<D>,
    profile: &CutProfile,
    tol: &Tolerances,
) -> wulffkit::Result<CheckResult> {
    let excess = profile.max_focal_excess();
    let bound = VerificationReport::at_least("focal_minus_cut", -excess, 0.0, 1.0, tol.focal, 0.0);
    let rays = cutlocus::ray_disjointness(norm, surface, profile, RAY_PAIRS, RAY_SEED)?;
    let mut separation =
        VerificationReport::at_least("ray_separation", rays.closest_relative, rays.threshold, 1.0, 0.0, 0.0);
    separation.pass = rays.pass;
    let finest = profile.finest();
    let details = json!({
        "nodes": finest.len(),
        "binding_nodes": finest.iter().filter(|e| e.binding).count(),
        "max_focal_excess": excess,
        "bisection_tolerance": profile.tolerance,
        "binding_tolerance": profile.binding_tolerance,
        "rays": rays,
    });
    Ok(CheckResult::from_reports(Check::Cut, vec![bound, separation], Some(details)))
}

fn stationarity_check(r: StationarityReport) -> wulffkit::Result<CheckResult> {
    let worst = r.binding_nodes.iter().map(|b| b.lambda_prime.abs()).fold(0.0, f64::max);
    let scale = if r.max_lambda_prime > 0.0 { r.max_lambda_prime } else { 1.0 };
    let mut report =
        VerificationReport::equality("lambda_prime_at_binding", worst, 0.0, scale, r.relative_threshold, 0.0);
    report.pass = r.pass;
    let details = serde_json::to_value(&r).expect("report serializes");
    Ok(CheckResult::from_reports(Check::Stationarity, vec![report], Some(details)))
}

#[derive(Serialize)]
struct Spread {
    r: usize,
    min: f64,
    max: f64,
    mean: f64,
    std: f64,
}

#[derive(Serialize)]
struct CurvatureSummary<'a> {
    command: &'static str,
    dimension: usize,
    norm: &'a NormSpec,
    shape: &'a ShapeBuilder,
    resolution: [usize; 2],
    nodes: usize,
    /// `H^F_r` for `r = 0..n`.
    hfr: Vec<Spread>,
    /// Principal curvatures by rank, largest first.
    lambdas: Vec<Spread>,
}

fn spread(r: usize, values: &[f64]) -> Spread {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    Spread {
        r,
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        std: var.sqrt(),
    }
}

fn curvature<const D: usize>(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let shape = shape_of(cfg)?;
    let resolution = cfg.grid_resolution(D)?;
    let norm = AnisotropyNorm::<D>::from_spec(cfg.norm.clone())?;
    let surface = shape.build(Some(&norm), cfg.derivative_mode)?;
    // two levels only because the grid insists on an error estimate
    let grid = QuadratureGrid::build(&surface, resolution, 2)?;
    let samples = grid.levels()[0]
        .params
        .par_iter()
        .map(|p| surface.curvature_sample(&norm, p))
        .collect::<wulffkit::Result<Vec<_>>>()?;

    let n = D - 1;
    let mut csv = String::new();
    let mut header = vec!["param0".to_string(), "param1".to_string()];
    header.extend((0..D).map(|i| format!("x{i}")));
    header.extend((0..D).map(|i| format!("nu{i}")));
    header.extend((0..n).map(|i| format!("lambda{i}")));
    header.extend((0..=n).map(|r| format!("H{r}")));
    header.extend(["support".to_string(), "area_element".to_string()]);
    csv.push_str(&header.join(","));
    csv.push('\n');
    for s in &samples {
        let row: Vec<String> = s
            .param
            .iter()
            .chain(s.position.iter())
            .chain(s.normal.iter())
            .chain(&s.lambdas)
            .chain(&s.hfr)
            .chain([&s.support, &s.area_element])
            .map(|v| format!("{v:.17e}"))
            .collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let column = |f: &dyn Fn(&CurvatureSample<D>) -> f64| samples.iter().map(f).collect::<Vec<f64>>();
    let summary = CurvatureSummary {
        command: "curvature",
        dimension: D,
        norm: &cfg.norm,
        shape,
        resolution,
        nodes: samples.len(),
        hfr: (0..=n).map(|r| spread(r, &column(&|s| s.hfr[r]))).collect(),
        lambdas: (0..n).map(|i| spread(i, &column(&|s| s.lambdas[i]))).collect(),
    };
    let dir = cfg.out_dir();
    ensure_dir(&dir)?;
    write_file(&dir.join("curvature.csv"), csv.as_bytes())?;
    write_file(&dir.join("curvature_summary.json"), &json(&summary))?;
    Ok(Outcome::Pass)
}
