use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use hillspec_core::hill::{discriminant_with, monodromy};
use hillspec_core::oracles::{check_oracle, oracle_catalog};
use hillspec_core::profile::{
    conservation_defect, default_c_bracket, find_period, in_otsuki_band, integrate_profile, solve_c_with,
    ProfileParams, ProfileSolution, DEFAULT_ODE_TOL,
};
use hillspec_core::spectrum::{
    assemble_spectrum_with, index_bound, level_problem, spectral_floor, OperatorKind, SpectrumOptions, SpectrumReport,
    NEGATIVE_THRESHOLD, SCHEMA_VERSION,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Format, LambdaGrid, ProfileSpec, RangeArgs, RunConfig};
use crate::output::{float, open, write_json, Table};
use crate::CliError;

const CONSERVATION_THRESHOLD: f64 = 1e-9;
const WRONSKIAN_THRESHOLD: f64 = 1e-9;
const RESIDUAL_THRESHOLD: f64 = 1e-4;

pub fn build_profile(cfg: &RunConfig) -> Result<Arc<ProfileSolution>, CliError> {
    let tols = cfg.tolerances;
    let sol = match cfg.profile {
        ProfileSpec::Direct { c } => ProfileSolution::new(ProfileParams::new(cfg.n, cfg.mean_curvature, c)?, tols.ode)?,
        ProfileSpec::Closed { target } => {
            let bracket = default_c_bracket(cfg.n, cfg.mean_curvature)?;
            let params = solve_c_with(cfg.n, cfg.mean_curvature, target, bracket, tols)?;
            ProfileSolution::with_winding(params, target, tols.ode, tols.c_solve.max(1e3 * tols.ode))?
        }
    };
    Ok(Arc::new(sol))
}

fn default_ceiling(kind: OperatorKind, n: u32) -> f64 {
    match kind {
        OperatorKind::Laplace => 2.0 * n as f64,
        OperatorKind::Jacobi => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub schema_version: u32,
    pub n: u32,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub c: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub r_min: f64,
    pub r_max: f64,
    #[serde(rename = "theta_T")]
    pub theta_period: f64,
    pub l: Option<u32>,
    pub m: Option<u32>,
    pub closing_period: Option<f64>,
    pub max_conservation_defect: f64,
}

impl ProfileSummary {
    fn of(sol: &ProfileSolution) -> Self {
        let params = sol.params();
        Self {
            schema_version: SCHEMA_VERSION,
            n: params.n,
            mean_curvature: params.mean_curvature,
            c: params.c,
            period: sol.period(),
            r_min: sol.r_min(),
            r_max: sol.r_max(),
            theta_period: sol.theta_period(),
            l: sol.winding().map(|w| w.l),
            m: sol.winding().map(|w| w.m),
            closing_period: sol.closing_period(),
            max_conservation_defect: sol.max_conservation_defect(),
        }
    }
}

/// Samples over `[0, mT]` (one period when the curve does not close), with the
/// profile curve in the `(x, y)` plane.
fn trajectory_table(sol: &ProfileSolution, samples: usize) -> Table {
    let span = sol.closing_period().unwrap_or(sol.period());
    let samples = samples.max(2);
    let mut table = Table::new(vec!["t", "r", "r_prime", "theta", "x", "y"]);
    for i in 0..samples {
        let t = span * i as f64 / (samples - 1) as f64;
        let s = sol.state(t);
        let rho = (1.0 - s.r * s.r).max(0.0).sqrt();
        table.push(
            [t, s.r, s.r_prime, s.theta, rho * s.theta.cos(), rho * s.theta.sin()].into_iter().map(float).collect(),
        );
    }
    table
}

pub fn profile(cfg: &RunConfig, samples: usize, trajectory: Option<&Path>) -> Result<(), CliError> {
    let sol = build_profile(cfg)?;
    match cfg.format {
        Format::Json => write_json(&ProfileSummary::of(&sol), open(cfg.out.as_deref())?)?,
        Format::Csv => trajectory_table(&sol, samples).write_to(open(cfg.out.as_deref())?)?,
    }
    if let Some(path) = trajectory {
        trajectory_table(&sol, samples).write_to(open(Some(path))?)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantPoint {
    pub lambda: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscriminantReport {
    pub schema_version: u32,
    pub operator: OperatorKind,
    pub n: u32,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub c: f64,
    pub k: u32,
    pub multiplier: u32,
    pub base_period: f64,
    pub points: Vec<DiscriminantPoint>,
}

pub fn discriminant(cfg: &RunConfig, range: &RangeArgs, kind: OperatorKind, k: u32) -> Result<(), CliError> {
    if k == 0 {
        return Err(CliError::Validation("--k must be at least 1".into()));
    }
    let sol = build_profile(cfg)?;
    let problem = level_problem(&sol, kind, k)?;
    let grid = LambdaGrid::new(
        range.lambda_min.unwrap_or_else(|| spectral_floor(&problem)),
        range.lambda_max.unwrap_or_else(|| default_ceiling(kind, cfg.n)),
        range.lambda_step,
    )?;
    let hill_tol = cfg.hill_tol();
    let points = grid
        .points()
        .into_par_iter()
        .map(|lambda| Ok(DiscriminantPoint { lambda, delta: discriminant_with(&problem, lambda, hill_tol)? }))
        .collect::<Result<Vec<_>, hillspec_core::Error>>()?;
    let sink = open(cfg.out.as_deref())?;
    match cfg.format {
        Format::Json => write_json(
            &DiscriminantReport {
                schema_version: SCHEMA_VERSION,
                operator: kind,
                n: cfg.n,
                mean_curvature: cfg.mean_curvature,
                c: sol.params().c,
                k,
                multiplier: problem.multiplier(),
                base_period: problem.base_period(),
                points,
            },
            sink,
        ),
        Format::Csv => {
            let mut table = Table::new(vec!["lambda", "delta"]);
            for p in &points {
                table.push(vec![float(p.lambda), float(p.delta)]);
            }
            table.write_to(sink)
        }
    }
}

fn spectrum_report(
    cfg: &RunConfig,
    sol: &ProfileSolution,
    kind: OperatorKind,
    ceiling: f64,
    range: &RangeArgs,
    k_max: u32,
) -> Result<SpectrumReport, CliError> {
    if range.lambda_step.is_nan() || range.lambda_step <= 0.0 {
        return Err(CliError::Validation(format!("--lambda-step must be positive, got {}", range.lambda_step)));
    }
    let opts = SpectrumOptions {
        ceiling,
        grid_step: range.lambda_step,
        hill_tol: cfg.hill_tol(),
        k_max,
        floor: range.lambda_min,
    };
    Ok(assemble_spectrum_with(sol, kind, &opts)?)
}

pub fn spectrum(
    cfg: &RunConfig,
    range: &RangeArgs,
    kind: OperatorKind,
    ceiling: Option<f64>,
    k_max: u32,
) -> Result<(), CliError> {
    let ceiling = ceiling.or(range.lambda_max).unwrap_or_else(|| default_ceiling(kind, cfg.n));
    let sol = build_profile(cfg)?;
    let report = spectrum_report(cfg, &sol, kind, ceiling, range, k_max)?;
    let sink = open(cfg.out.as_deref())?;
    match cfg.format {
        Format::Json => write_json(&report, sink),
        Format::Csv => {
            let mut table = Table::new(vec![
                "eigenvalue",
                "k",
                "hill_ordinal",
                "hill_multiplicity",
                "sphere_multiplicity",
                "total_multiplicity",
                "zero_count",
                "possibly_double",
            ]);
            for e in &report.entries {
                table.push(vec![
                    float(e.eigenvalue),
                    e.k.to_string(),
                    e.hill_ordinal.to_string(),
                    e.hill_multiplicity.to_string(),
                    e.sphere_multiplicity.to_string(),
                    e.total_multiplicity.to_string(),
                    e.zero_count.to_string(),
                    e.possibly_double.to_string(),
                ]);
            }
            table.write_to(sink)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub category: String,
    pub status: Status,
    pub measured: Option<f64>,
    pub threshold: Option<f64>,
    pub note: String,
}

impl Check {
    fn measured(
        category: &str,
        name: impl Into<String>,
        measured: f64,
        threshold: f64,
        pass: bool,
        note: String,
    ) -> Self {
        Self {
            name: name.into(),
            category: category.into(),
            status: if pass { Status::Pass } else { Status::Fail },
            measured: Some(measured),
            threshold: Some(threshold),
            note,
        }
    }

    fn failed(category: &str, name: impl Into<String>, note: String) -> Self {
        Self {
            name: name.into(),
            category: category.into(),
            status: Status::Fail,
            measured: None,
            threshold: None,
            note,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub n: u32,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    /// Absent when `c` had to be solved for and that failed.
    pub c: Option<f64>,
    pub l: Option<u32>,
    pub m: Option<u32>,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn conservation_check(sol: &ProfileSolution) -> Check {
    let span = 3.0 * sol.period();
    let sampled = (0..=3000)
        .map(|i| {
            let s = sol.state(span * i as f64 / 3000.0);
            conservation_defect(sol.params(), s.r, s.r_prime)
        })
        .fold(0.0, f64::max);
    let worst = sampled.max(sol.max_conservation_defect());
    Check::measured(
        "conservation",
        "first_integral",
        worst,
        CONSERVATION_THRESHOLD,
        worst < CONSERVATION_THRESHOLD,
        "max |r'^2 + r^2 (1 + lambda^2) - 1| over [0, 3T]".into(),
    )
}

fn wronskian_checks(sol: &Arc<ProfileSolution>, hill_tol: f64) -> Vec<Check> {
    // each operator is sampled over the range holding its low spectrum
    let levels = [(OperatorKind::Laplace, 1, -1.0), (OperatorKind::Jacobi, 1, -9.0), (OperatorKind::Jacobi, 2, -9.0)];
    levels
        .into_iter()
        .map(|(kind, k, lo)| {
            let name = format!("{kind}_k{k}");
            let result = level_problem(sol, kind, k).and_then(|problem| {
                (0..12)
                    .map(|i| lo + (10.0 - lo) * i as f64 / 11.0)
                    .map(|lambda| Ok((monodromy(&problem, lambda, hill_tol)?.det() - 1.0).abs()))
                    .try_fold(0.0f64, |acc, d: hillspec_core::Result<f64>| Ok(acc.max(d?)))
            });
            match result {
                Ok(worst) => Check::measured(
                    "wronskian",
                    name,
                    worst,
                    WRONSKIAN_THRESHOLD,
                    worst < WRONSKIAN_THRESHOLD,
                    format!("max |det M - 1| over 12 lambdas in [{lo}, 10]"),
                ),
                Err(e) => Check::failed("wronskian", name, e.to_string()),
            }
        })
        .collect()
}

fn oracle_checks(sol: &ProfileSolution, samples: usize, grid_step: f64) -> Vec<Check> {
    let catalog = oracle_catalog(sol);
    if catalog.is_empty() {
        return vec![Check {
            name: "catalog".into(),
            category: "oracle".into(),
            status: Status::Skip,
            measured: None,
            threshold: None,
            note: "no closed-form eigenfunctions for this (n, H)".into(),
        }];
    }
    catalog
        .iter()
        .map(|case| match check_oracle(case, sol, samples, grid_step) {
            Ok(report) => {
                let matched = report.hill_ordinal.is_some();
                let pass = report.residual < RESIDUAL_THRESHOLD && matched && report.haupt_consistent;
                let note = match (report.hill_ordinal, report.expected_zeros) {
                    (Some(i), Some(z)) => format!(
                        "{} k={} eigenvalue {}: Hill ordinal {i}, {} zeros (expected {z})",
                        report.operator, report.k, report.eigenvalue, report.zero_count
                    ),
                    _ => format!(
                        "{} k={} eigenvalue {}: not found in the Hill spectrum",
                        report.operator, report.k, report.eigenvalue
                    ),
                };
                Check::measured("oracle", case.name, report.residual, RESIDUAL_THRESHOLD, pass, note)
            }
            Err(e) => Check::failed("oracle", case.name, e.to_string()),
        })
        .collect()
}

fn haupt_check(kind: OperatorKind, report: &Result<SpectrumReport, CliError>) -> Check {
    let name = format!("{kind}_levels");
    match report {
        Ok(report) => {
            let bad = report.entries.iter().filter(|e| e.zero_count != 2 * (e.hill_ordinal / 2)).count();
            Check::measured(
                "haupt",
                name,
                bad as f64,
                0.0,
                bad == 0,
                format!("{} eigenvalues checked against 2 floor(i/2) zeros", report.entries.len()),
            )
        }
        Err(e) => Check::failed("haupt", name, e.to_string()),
    }
}

fn otsuki_check(sol: &ProfileSolution) -> Check {
    let ratio = sol.theta_period() / PI;
    if sol.params().mean_curvature != 0.0 {
        return Check {
            name: "theta_band".into(),
            category: "otsuki".into(),
            status: Status::Skip,
            measured: Some(ratio),
            threshold: None,
            note: "the band pi < theta(T) < sqrt(2) pi only applies to minimal profiles (H = 0)".into(),
        };
    }
    Check::measured(
        "otsuki",
        "theta_band",
        ratio,
        std::f64::consts::SQRT_2,
        in_otsuki_band(sol.theta_period()),
        "theta(T)/pi must lie in (1, sqrt 2)".into(),
    )
}

fn index_check(sol: &ProfileSolution, jacobi: &Result<SpectrumReport, CliError>) -> Check {
    let Some(target) = sol.winding() else {
        return Check::failed("index", "bound", "profile does not close; the bound needs (l, m)".into());
    };
    match jacobi {
        Ok(report) => {
            let count = report.count_below(-NEGATIVE_THRESHOLD);
            let bound = index_bound(sol.params().n, target);
            Check::measured(
                "index",
                "bound",
                count as f64,
                bound as f64,
                count >= bound,
                format!("stability index {count} against (2l-1)n + (2m-1) = {bound}"),
            )
        }
        Err(e) => Check::failed("index", "bound", e.to_string()),
    }
}

pub fn run_checks(cfg: &RunConfig, sol: &Arc<ProfileSolution>, range: &RangeArgs, samples: usize) -> VerifyReport {
    let mut checks = vec![conservation_check(sol)];
    checks.extend(wronskian_checks(sol, cfg.hill_tol()));
    checks.extend(oracle_checks(sol, samples, range.lambda_step));
    let n = cfg.n as f64;
    let laplace =
        spectrum_report(cfg, sol, OperatorKind::Laplace, n + 0.05, range, hillspec_core::spectrum::DEFAULT_K_MAX);
    let jacobi = spectrum_report(cfg, sol, OperatorKind::Jacobi, 0.0, range, hillspec_core::spectrum::DEFAULT_K_MAX);
    checks.push(haupt_check(OperatorKind::Laplace, &laplace));
    checks.push(haupt_check(OperatorKind::Jacobi, &jacobi));
    checks.push(otsuki_check(sol));
    checks.push(index_check(sol, &jacobi));
    let params = sol.params();
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        n: params.n,
        mean_curvature: params.mean_curvature,
        c: Some(params.c),
        l: sol.winding().map(|w| w.l),
        m: sol.winding().map(|w| w.m),
        passed: checks.iter().all(|c| c.status != Status::Fail),
        checks,
    }
}

/// Report for a profile that could not be built: the failure itself, plus the
/// conservation defect of a raw forward integration at the requested tolerance.
fn construction_failure(cfg: &RunConfig, error: &CliError) -> VerifyReport {
    let mut checks = vec![Check::failed("profile", "construction", error.to_string())];
    let conservation = match cfg.profile {
        ProfileSpec::Direct { c } => raw_conservation_check(cfg, c),
        ProfileSpec::Closed { .. } => Check::failed("conservation", "first_integral", "c could not be solved".into()),
    };
    checks.push(conservation);
    let (l, m) = match cfg.profile {
        ProfileSpec::Closed { target } => (Some(target.l), Some(target.m)),
        ProfileSpec::Direct { .. } => (None, None),
    };
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        n: cfg.n,
        mean_curvature: cfg.mean_curvature,
        c: match cfg.profile {
            ProfileSpec::Direct { c } => Some(c),
            ProfileSpec::Closed { .. } => None,
        },
        l,
        m,
        passed: false,
        checks,
    }
}

fn raw_conservation_check(cfg: &RunConfig, c: f64) -> Check {
    let measure = || -> hillspec_core::Result<f64> {
        let params = ProfileParams::new(cfg.n, cfg.mean_curvature, c)?;
        // the horizon only needs to be roughly three periods
        let span = 3.0 * find_period(&params, DEFAULT_ODE_TOL)?;
        let trajectory = integrate_profile(&params, span, cfg.tolerances.ode)?;
        Ok((0..=3000)
            .map(|i| {
                let s = trajectory.state(span * i as f64 / 3000.0);
                conservation_defect(&params, s.r, s.r_prime)
            })
            .fold(0.0, f64::max))
    };
    match measure() {
        Ok(worst) => Check::measured(
            "conservation",
            "first_integral",
            worst,
            CONSERVATION_THRESHOLD,
            worst < CONSERVATION_THRESHOLD,
            "forward integration over [0, 3T] at the requested tolerance".into(),
        ),
        Err(e) => Check::failed("conservation", "first_integral", e.to_string()),
    }
}

pub fn verify(cfg: &RunConfig, range: &RangeArgs, samples: usize) -> Result<(), CliError> {
    let report = match build_profile(cfg) {
        Ok(sol) => run_checks(cfg, &sol, range, samples),
        Err(e @ CliError::Validation(_)) => return Err(e),
        Err(e) => construction_failure(cfg, &e),
    };
    let sink = open(cfg.out.as_deref())?;
    match cfg.format {
        Format::Json => write_json(&report, sink)?,
        Format::Csv => {
            let mut table = Table::new(vec!["category", "name", "status", "measured", "threshold", "note"]);
            for c in &report.checks {
                let status = serde_json::to_value(c.status)?.as_str().unwrap_or_default().to_owned();
                table.push(vec![
                    c.category.clone(),
                    c.name.clone(),
                    status,
                    c.measured.map(float).unwrap_or_default(),
                    c.threshold.map(float).unwrap_or_default(),
                    c.note.clone(),
                ]);
            }
            table.write_to(sink)?;
        }
    }
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> =
            report.checks.iter().filter(|c| c.status == Status::Fail).map(|c| c.name.as_str()).collect();
        Err(CliError::Verification(format!("failed checks: {}", failed.join(", "))))
    }
}
