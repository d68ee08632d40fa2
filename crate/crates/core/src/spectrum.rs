//! Separated Laplace and Jacobi spectra of a closed rotational hypersurface.
//!
//! Eigenfunctions split as `z(t) Y(sphere)` with `Y` a spherical harmonic of
//! eigenvalue `alpha_k = (k-1)(n+k-3)` on `S^{n-1}`. For each level `k` the
//! profile factor solves a second-order periodic problem which the
//! substitution `u = r^{(n-1)/2} z` turns into Hill's equation. Both operators
//! use the convention `K[z] + lambda z = 0`, so negative Jacobi eigenvalues
//! are unstable directions.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hill::{
    find_periodic_eigenvalues_with, EigenvalueRecord, HillProblem, PeriodicPotential, ScanOptions, DEFAULT_GRID_STEP,
    DEFAULT_HILL_TOL,
};
use crate::profile::{principal_curvatures, ProfileParams, ProfileSolution, WindingTarget};

/// Version tag written into every serialized report.
pub const SCHEMA_VERSION: u32 = 1;
/// Safety cap on the number of sphere levels visited.
pub const DEFAULT_K_MAX: u32 = 64;
/// Eigenvalues below `-NEGATIVE_THRESHOLD` count towards the index.
pub const NEGATIVE_THRESHOLD: f64 = 1e-7;
/// Eigenvalues within this distance are merged in `SpectrumReport::distinct`.
pub const DISTINCT_TOL: f64 = 1e-6;
/// Samples of `Q` used to bound the spectrum from below.
const POTENTIAL_SAMPLES: usize = 4096;
const MAX_GRID_REFINEMENTS: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Laplace,
    Jacobi,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::Laplace => "laplace",
            OperatorKind::Jacobi => "jacobi",
        })
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "laplace" => Ok(OperatorKind::Laplace),
            "jacobi" => Ok(OperatorKind::Jacobi),
            other => Err(Error::InvalidParameter(format!("unknown operator {other:?} (expected laplace or jacobi)"))),
        }
    }
}

/// Eigenvalue `alpha_k` of the round `(n-1)`-sphere together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereMode {
    pub k: u32,
    pub alpha: f64,
    pub multiplicity: u64,
}

pub fn sphere_eigenvalue(n: u32, k: u32) -> f64 {
    assert!(k >= 1, "sphere levels start at k = 1");
    ((k - 1) as f64) * ((n + k) as f64 - 3.0)
}

fn binomial(top: i64, bottom: i64) -> u64 {
    if bottom < 0 || top < bottom {
        return 0;
    }
    let bottom = bottom.min(top - bottom) as u64;
    let mut acc: u64 = 1;
    for i in 0..bottom {
        acc = acc * (top as u64 - i) / (i + 1);
    }
    acc
}

/// Dimension of the space of degree-`(k-1)` spherical harmonics on `S^{n-1}`.
pub fn sphere_multiplicity(n: u32, k: u32) -> u64 {
    assert!(n >= 2 && k >= 1, "need n >= 2 and k >= 1");
    let (n, k) = (n as i64, k as i64);
    binomial(n + k - 2, k - 1) - binomial(n + k - 4, k - 3)
}

pub fn sphere_mode(n: u32, k: u32) -> SphereMode {
    SphereMode { k, alpha: sphere_eigenvalue(n, k), multiplicity: sphere_multiplicity(n, k) }
}

/// Hill potential of the level-`alpha` Laplace problem at radius `r`.
pub fn laplace_q(params: &ProfileParams, alpha: f64, r: f64) -> f64 {
    let n = params.n as f64;
    let pc = principal_curvatures(params, r).expect("radius inside (0, 1)");
    let (l, mu) = (pc.lambda, pc.mu);
    0.25 * l * l * (n - 1.0) * (n - 3.0) + 0.5 * l * mu * (n - 1.0)
        - (4.0 * alpha + (n - 3.0) * (n - 1.0)) / (4.0 * r * r)
        + 0.25 * (n - 1.0) * (n - 1.0)
}

/// Hill potential of the level-`alpha` Jacobi problem at radius `r`.
pub fn jacobi_q(params: &ProfileParams, alpha: f64, r: f64) -> f64 {
    let n = params.n as f64;
    let pc = principal_curvatures(params, r).expect("radius inside (0, 1)");
    let (l, mu) = (pc.lambda, pc.mu);
    0.25 * (l * l * (n * n - 1.0) + 2.0 * l * mu * (n - 1.0) + 4.0 * mu * mu + (n + 1.0).powi(2)
        - (4.0 * alpha + (n - 3.0) * (n - 1.0)) / (r * r))
}

/// Level-`k` potential along a profile, driven by `(r, r')`.
pub struct ProfilePotential {
    solution: Arc<ProfileSolution>,
    kind: OperatorKind,
    alpha: f64,
}

impl ProfilePotential {
    pub fn new(solution: Arc<ProfileSolution>, kind: OperatorKind, k: u32) -> Self {
        let alpha = sphere_eigenvalue(solution.params().n, k);
        Self { solution, kind, alpha }
    }

    pub fn at_radius(&self, r: f64) -> f64 {
        match self.kind {
            OperatorKind::Laplace => laplace_q(self.solution.params(), self.alpha, r),
            OperatorKind::Jacobi => jacobi_q(self.solution.params(), self.alpha, r),
        }
    }
}

impl PeriodicPotential for ProfilePotential {
    fn value(&self, _t: f64, driver: &[f64; 2]) -> f64 {
        self.at_radius(driver[0])
    }

    fn driver_initial(&self) -> [f64; 2] {
        [self.solution.r_max(), 0.0]
    }

    fn driver_rhs(&self, driver: &[f64; 2]) -> [f64; 2] {
        [driver[1], self.solution.system().acceleration(driver[0])]
    }

    fn eval(&self, t: f64) -> f64 {
        self.at_radius(self.solution.state(t).r)
    }

    fn z_weight(&self, driver: &[f64; 2]) -> Option<f64> {
        Some(driver[0].powf(0.5 * (self.solution.params().n as f64 - 1.0)))
    }
}

fn closing_multiplier(sol: &ProfileSolution) -> Result<u32> {
    sol.winding().map(|w| w.m).ok_or(Error::NotClosed { theta: sol.theta_period() })
}

/// Level-`k` Hill problem for either operator, with multiplier `m` from the
/// solution's winding ratio. Fails with `NotClosed` if the winding is unknown.
pub fn level_problem(sol: &Arc<ProfileSolution>, kind: OperatorKind, k: u32) -> Result<HillProblem> {
    if k == 0 {
        return Err(Error::InvalidParameter("sphere levels start at k = 1".into()));
    }
    let m = closing_multiplier(sol)?;
    HillProblem::new(Arc::new(ProfilePotential::new(Arc::clone(sol), kind, k)), sol.period(), m)
}

pub fn laplace_potential(sol: &Arc<ProfileSolution>, k: u32) -> Result<HillProblem> {
    level_problem(sol, OperatorKind::Laplace, k)
}

pub fn jacobi_potential(sol: &Arc<ProfileSolution>, k: u32) -> Result<HillProblem> {
    level_problem(sol, OperatorKind::Jacobi, k)
}

/// Lower end of the eigenvalue search for a Hill problem: `-max Q` less a margin.
pub fn spectral_floor(problem: &HillProblem) -> f64 {
    -problem.potential_max(POTENTIAL_SAMPLES) - 0.5
}

/// Scans `[lo, hi]`, halving the grid step whenever a cell hides several crossings.
pub fn scan_with_refinement(
    problem: &HillProblem,
    lo: f64,
    hi: f64,
    opts: &ScanOptions,
) -> Result<Vec<EigenvalueRecord>> {
    let mut opts = *opts;
    let mut attempt = 0;
    loop {
        match find_periodic_eigenvalues_with(problem, lo, hi, &opts) {
            Err(Error::GridTooCoarse { .. }) if attempt < MAX_GRID_REFINEMENTS => {
                opts.grid_step *= 0.5;
                attempt += 1;
            }
            other => return other,
        }
    }
}

/// Smallest periodic eigenvalue of a Hill problem.
pub fn ground_eigenvalue(problem: &HillProblem, grid_step: f64) -> Result<f64> {
    let mut lo = spectral_floor(problem);
    let opts = ScanOptions { grid_step, ..Default::default() };
    // delta_1 - 2 has a root within one window of width (2 pi / T)^2 past the floor
    let width = (2.0 * std::f64::consts::PI / problem.base_period()).powi(2).max(1.0);
    for _ in 0..64 {
        let hi = lo + width;
        if let Some(first) = scan_with_refinement(problem, lo, hi, &opts)?.first() {
            return Ok(first.value);
        }
        lo = hi;
    }
    Err(Error::InvalidParameter("no periodic eigenvalue found above the spectral floor".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub eigenvalue: f64,
    pub k: u32,
    pub hill_ordinal: usize,
    pub hill_multiplicity: u8,
    pub sphere_multiplicity: u64,
    pub total_multiplicity: u64,
    pub zero_count: usize,
    pub possibly_double: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Highest level examined.
    pub k_max_used: u32,
    pub lambda_ceiling: f64,
    pub grid_step: f64,
    /// False when the level cap was hit before the ground levels passed the ceiling.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub schema_version: u32,
    pub operator: OperatorKind,
    pub n: u32,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub c: f64,
    pub l: u32,
    pub m: u32,
    pub entries: Vec<SpectrumEntry>,
    /// Lowest eigenvalue of each visited level within the scanned window, which
    /// reaches a little past the ceiling; `None` when the level has none there.
    pub level_ground: Vec<Option<f64>>,
    pub truncation: Truncation,
}

/// A group of entries agreeing to within `DISTINCT_TOL`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinctEigenvalue {
    pub value: f64,
    pub multiplicity: u64,
}

impl SpectrumReport {
    /// Entries grouped into distinct values (mean of the group) with summed multiplicities.
    pub fn distinct(&self, tol: f64) -> Vec<DistinctEigenvalue> {
        let mut out: Vec<(f64, f64, u64, usize)> = Vec::new(); // (first, sum, mult, count)
        for e in &self.entries {
            match out.last_mut() {
                Some(g) if (e.eigenvalue - g.0).abs() <= tol => {
                    g.1 += e.eigenvalue;
                    g.2 += e.total_multiplicity;
                    g.3 += 1;
                }
                _ => out.push((e.eigenvalue, e.eigenvalue, e.total_multiplicity, 1)),
            }
        }
        out.into_iter()
            .map(|(_, sum, mult, count)| DistinctEigenvalue { value: sum / count as f64, multiplicity: mult })
            .collect()
    }

    /// Total multiplicity of eigenvalues strictly below `threshold`.
    pub fn count_below(&self, threshold: f64) -> u64 {
        self.entries.iter().filter(|e| e.eigenvalue < threshold).map(|e| e.total_multiplicity).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub ceiling: f64,
    pub grid_step: f64,
    pub hill_tol: f64,
    pub k_max: u32,
    /// Overrides the automatic lower end `-max Q - 0.5` of every level scan.
    pub floor: Option<f64>,
}

impl SpectrumOptions {
    pub fn new(ceiling: f64) -> Self {
        Self { ceiling, grid_step: DEFAULT_GRID_STEP, hill_tol: DEFAULT_HILL_TOL, k_max: DEFAULT_K_MAX, floor: None }
    }
}

pub fn assemble_spectrum(
    sol: &ProfileSolution,
    kind: OperatorKind,
    ceiling: f64,
    grid_step: f64,
) -> Result<SpectrumReport> {
    assemble_spectrum_with(sol, kind, &SpectrumOptions { grid_step, ..SpectrumOptions::new(ceiling) })
}

pub fn assemble_spectrum_with(
    sol: &ProfileSolution,
    kind: OperatorKind,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport> {
    if !opts.ceiling.is_finite() {
        return Err(Error::InvalidParameter(format!("ceiling must be finite, got {}", opts.ceiling)));
    }
    if !(opts.grid_step > 0.0) || opts.k_max == 0 {
        return Err(Error::InvalidParameter("need grid_step > 0 and k_max >= 1".into()));
    }
    let winding = sol.winding().ok_or(Error::NotClosed { theta: sol.theta_period() })?;
    let sol = Arc::new(sol.clone());
    let n = sol.params().n;
    let scan = ScanOptions { grid_step: opts.grid_step, tol: opts.hill_tol, ..Default::default() };
    // look slightly past the ceiling so the ground of the stopping level is reported
    let overshoot = (10.0 * opts.grid_step).max(1e-2);

    let mut entries = Vec::new();
    let mut level_ground = Vec::new();
    let mut complete = false;
    let mut k = 0;
    while k < opts.k_max {
        k += 1;
        let problem = level_problem(&sol, kind, k)?;
        let lo = opts.floor.unwrap_or_else(|| spectral_floor(&problem));
        let hi = opts.ceiling + overshoot;
        let records = if lo < hi { scan_with_refinement(&problem, lo, hi, &scan)? } else { Vec::new() };
        level_ground.push(records.first().map(|r| r.value));
        let d_k = sphere_multiplicity(n, k);
        let below: Vec<&EigenvalueRecord> = records.iter().filter(|r| r.value <= opts.ceiling).collect();
        if below.is_empty() {
            complete = true;
            break;
        }
        entries.extend(below.into_iter().map(|r| SpectrumEntry {
            eigenvalue: r.value,
            k,
            hill_ordinal: r.ordinal,
            hill_multiplicity: r.multiplicity,
            sphere_multiplicity: d_k,
            total_multiplicity: r.multiplicity as u64 * d_k,
            zero_count: r.zero_count,
            possibly_double: r.possibly_double,
        }));
    }
    entries.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue).then(a.k.cmp(&b.k)));

    let params = sol.params();
    Ok(SpectrumReport {
        schema_version: SCHEMA_VERSION,
        operator: kind,
        n,
        mean_curvature: params.mean_curvature,
        c: params.c,
        l: winding.l,
        m: winding.m,
        entries,
        level_ground,
        truncation: Truncation { k_max_used: k, lambda_ceiling: opts.ceiling, grid_step: opts.grid_step, complete },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelIndex {
    pub k: u32,
    pub alpha: f64,
    pub sphere_multiplicity: u64,
    /// Negative Hill eigenvalues counted with Hill multiplicity.
    pub hill_negative: u64,
    pub total: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub schema_version: u32,
    pub n: u32,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub c: f64,
    pub l: u32,
    pub m: u32,
    pub negative_count: u64,
    /// `(2l - 1) n + (2m - 1)`.
    pub bound: u64,
    pub bound_satisfied: bool,
    /// `(2l - 1) n + (2m - 2)`, the weaker count reached in the H > 0 argument.
    pub weak_bound: u64,
    pub weak_bound_satisfied: bool,
    pub per_level: Vec<LevelIndex>,
}

pub fn index_bound(n: u32, target: WindingTarget) -> u64 {
    (2 * target.l as u64 - 1) * n as u64 + (2 * target.m as u64 - 1)
}

pub fn stability_index(sol: &ProfileSolution, target: WindingTarget, grid_step: f64) -> Result<StabilityReport> {
    match sol.winding() {
        Some(w) if w != target => {
            return Err(Error::InvalidParameter(format!(
                "solution winds {}/{}, not {}/{}",
                w.l, w.m, target.l, target.m
            )))
        }
        Some(_) => {}
        None => return Err(Error::NotClosed { theta: sol.theta_period() }),
    }
    let opts = SpectrumOptions { grid_step, ..SpectrumOptions::new(-NEGATIVE_THRESHOLD) };
    let report = assemble_spectrum_with(sol, OperatorKind::Jacobi, &opts)?;
    let n = sol.params().n;
    let per_level: Vec<LevelIndex> = (1..=report.truncation.k_max_used)
        .map(|k| {
            let mode = sphere_mode(n, k);
            let hill_negative: u64 =
                report.entries.iter().filter(|e| e.k == k).map(|e| e.hill_multiplicity as u64).sum();
            LevelIndex {
                k,
                alpha: mode.alpha,
                sphere_multiplicity: mode.multiplicity,
                hill_negative,
                total: hill_negative * mode.multiplicity,
            }
        })
        .filter(|lvl| lvl.total > 0)
        .collect();
    let negative_count = per_level.iter().map(|lvl| lvl.total).sum();
    let bound = index_bound(n, target);
    let weak_bound = bound - 1;
    let params = sol.params();
    Ok(StabilityReport {
        schema_version: SCHEMA_VERSION,
        n,
        mean_curvature: params.mean_curvature,
        c: params.c,
        l: target.l,
        m: target.m,
        negative_count,
        bound,
        bound_satisfied: negative_count >= bound,
        weak_bound,
        weak_bound_satisfied: negative_count >= weak_bound,
        per_level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sphere_multiplicities() {
        let d: Vec<u64> = (1..=4).map(|k| sphere_multiplicity(3, k)).collect();
        assert_eq!(d, vec![1, 3, 5, 7]);
    }

    #[test]
    fn circle_multiplicities() {
        assert_eq!(sphere_multiplicity(2, 1), 1);
        for k in 2..10 {
            assert_eq!(sphere_multiplicity(2, k), 2);
        }
    }

    #[test]
    fn second_level_has_multiplicity_n() {
        for n in 2..12 {
            assert_eq!(sphere_multiplicity(n, 2), n as u64);
            assert_eq!(sphere_eigenvalue(n, 2), (n - 1) as f64);
        }
        assert_eq!(sphere_eigenvalue(5, 1), 0.0);
        // harmonic polynomials of degree 2 in 4 variables: 10 - 1
        assert_eq!(sphere_multiplicity(4, 3), 9);
    }

    #[test]
    fn operator_kind_parsing() {
        assert_eq!("Jacobi".parse::<OperatorKind>().unwrap(), OperatorKind::Jacobi);
        assert_eq!(OperatorKind::Laplace.to_string(), "laplace");
        assert!("hessian".parse::<OperatorKind>().is_err());
    }

    #[test]
    fn bound_formula() {
        assert_eq!(index_bound(3, WindingTarget::new(2, 3).unwrap()), 14);
    }

    #[test]
    fn distinct_grouping() {
        let entry = |eigenvalue, total_multiplicity| SpectrumEntry {
            eigenvalue,
            k: 1,
            hill_ordinal: 1,
            hill_multiplicity: 1,
            sphere_multiplicity: 1,
            total_multiplicity,
            zero_count: 0,
            possibly_double: false,
        };
        let report = SpectrumReport {
            schema_version: SCHEMA_VERSION,
            operator: OperatorKind::Laplace,
            n: 3,
            mean_curvature: 0.0,
            c: 1.0,
            l: 2,
            m: 3,
            entries: vec![entry(0.0, 1), entry(3.0, 2), entry(3.0 + 1e-9, 3)],
            level_ground: vec![],
            truncation: Truncation { k_max_used: 2, lambda_ceiling: 3.1, grid_step: 1e-3, complete: true },
        };
        let d = report.distinct(DISTINCT_TOL);
        assert_eq!(d.len(), 2);
        assert_eq!(d[1].multiplicity, 5);
        assert_eq!(report.count_below(1.0), 1);
    }
}
