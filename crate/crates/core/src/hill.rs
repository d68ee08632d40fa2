//! Periodic eigenvalue problems for Hill's equation `u'' + (lambda + Q(t)) u = 0`.
//!
//! `Q` has base period `T`; eigenfunctions are required to be `mT`-periodic.
//! Eigenvalues are the roots of `delta_m(lambda) = tr(M^m) = 2`, where `M` is
//! the monodromy over one base period. Writing `delta_1 = tr M`,
//!
//! ```text
//! delta_m - 2 = 2 (T_m(delta_1 / 2) - 1)
//! ```
//!
//! with `T_m` the Chebyshev polynomial, so the roots of `delta_m = 2` are the
//! crossings of `delta_1` with the levels `2 cos(2 pi j / m)`. Crossings of an
//! interior level (`0 < j < m/2`) are tangencies of `delta_m - 2` and give
//! double eigenvalues; crossings of `+-2` are simple. The scan works on
//! `delta_1` and reports `|delta_m - 2|` at every polished eigenvalue.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{OdeSystem, Stepper, Trajectory};
use crate::roots::{bisect, golden_max};

/// Default local error target for the monodromy integrations.
pub const DEFAULT_HILL_TOL: f64 = 1e-11;
/// Default spacing of the discriminant scan.
pub const DEFAULT_GRID_STEP: f64 = 1e-3;
/// A polished extremum with `|delta_m - 2|` below this is a double eigenvalue.
pub const TANGENCY_THRESHOLD: f64 = 1e-7;
/// Simple roots closer than this are flagged as possibly double.
pub const NEAR_DOUBLE_GAP: f64 = 1e-5;
/// `|delta_m - 2|` above this means `lambda` is not an eigenvalue.
pub const EIGENVALUE_TOL: f64 = 1e-6;
/// Zero-counting samples per base period.
const ZERO_SAMPLES_PER_PERIOD: usize = 4096;

/// A `T`-periodic potential, optionally driven by a two-dimensional
/// autonomous state integrated alongside the Hill equation. Profile-derived
/// potentials use the driver `(r, r')`, which avoids interpolating `r(t)`.
pub trait PeriodicPotential: Send + Sync {
    /// `Q` at time `t` given the driver state.
    fn value(&self, t: f64, driver: &[f64; 2]) -> f64;

    fn driver_initial(&self) -> [f64; 2] {
        [0.0; 2]
    }

    fn driver_rhs(&self, _driver: &[f64; 2]) -> [f64; 2] {
        [0.0; 2]
    }

    /// Standalone evaluation of `Q(t)`.
    fn eval(&self, t: f64) -> f64;

    /// Factor `w` with `u = w z` relating the normalized variable `u` to the
    /// original one, when the potential comes from a transformed operator.
    fn z_weight(&self, _driver: &[f64; 2]) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ConstantPotential(pub f64);

impl PeriodicPotential for ConstantPotential {
    fn value(&self, _t: f64, _driver: &[f64; 2]) -> f64 {
        self.0
    }

    fn eval(&self, _t: f64) -> f64 {
        self.0
    }
}

/// Potential given by an explicit function of `t`.
pub struct FnPotential<F>(pub F);

impl<F> PeriodicPotential for FnPotential<F>
where
    F: Fn(f64) -> f64 + Send + Sync,
{
    fn value(&self, t: f64, _driver: &[f64; 2]) -> f64 {
        (self.0)(t)
    }

    fn eval(&self, t: f64) -> f64 {
        (self.0)(t)
    }
}

/// `u'' + (lambda + Q(t)) u = 0` with `Q` of period `base_period`, asking for
/// `multiplier * base_period`-periodic solutions.
#[derive(Clone)]
pub struct HillProblem {
    potential: Arc<dyn PeriodicPotential>,
    base_period: f64,
    multiplier: u32,
}

impl fmt::Debug for HillProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HillProblem")
            .field("base_period", &self.base_period)
            .field("multiplier", &self.multiplier)
            .finish_non_exhaustive()
    }
}

impl HillProblem {
    pub fn new(potential: Arc<dyn PeriodicPotential>, base_period: f64, multiplier: u32) -> Result<Self> {
        if !(base_period > 0.0) || multiplier == 0 {
            return Err(Error::InvalidParameter(format!(
                "need base period > 0 and multiplier >= 1 (T={base_period}, m={multiplier})"
            )));
        }
        Ok(Self { potential, base_period, multiplier })
    }

    pub fn constant(q0: f64, base_period: f64, multiplier: u32) -> Result<Self> {
        Self::new(Arc::new(ConstantPotential(q0)), base_period, multiplier)
    }

    pub fn from_fn<F>(f: F, base_period: f64, multiplier: u32) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::new(Arc::new(FnPotential(f)), base_period, multiplier)
    }

    pub fn potential(&self) -> &dyn PeriodicPotential {
        self.potential.as_ref()
    }

    pub fn base_period(&self) -> f64 {
        self.base_period
    }

    pub fn multiplier(&self) -> u32 {
        self.multiplier
    }

    /// Period `mT` of the eigenfunctions.
    pub fn full_period(&self) -> f64 {
        self.multiplier as f64 * self.base_period
    }

    /// Maximum of `Q` over one base period, sampled. No periodic eigenvalue
    /// lies below `-max Q`.
    pub fn potential_max(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| self.potential.eval(self.base_period * i as f64 / samples as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// State `[driver0, driver1, u1, u1', u2, u2']`.
struct HillSystem<'a> {
    potential: &'a dyn PeriodicPotential,
    lambda: f64,
}

impl OdeSystem<6> for HillSystem<'_> {
    #[inline]
    fn rhs(&self, t: f64, y: &[f64; 6], dy: &mut [f64; 6]) {
        let driver = [y[0], y[1]];
        let d = self.potential.driver_rhs(&driver);
        let w = -(self.lambda + self.potential.value(t, &driver));
        dy[0] = d[0];
        dy[1] = d[1];
        dy[2] = y[3];
        dy[3] = w * y[2];
        dy[4] = y[5];
        dy[5] = w * y[4];
    }
}

/// Fundamental matrix `[[z1, z2], [z1', z2']]` at the end of a period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Monodromy {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Monodromy {
    pub const IDENTITY: Self = Self { a11: 1.0, a12: 0.0, a21: 0.0, a22: 1.0 };

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self {
            a11: self.a11 * rhs.a11 + self.a12 * rhs.a21,
            a12: self.a11 * rhs.a12 + self.a12 * rhs.a22,
            a21: self.a21 * rhs.a11 + self.a22 * rhs.a21,
            a22: self.a21 * rhs.a12 + self.a22 * rhs.a22,
        }
    }

    pub fn pow(&self, m: u32) -> Self {
        (0..m).fold(Self::IDENTITY, |acc, _| acc.mul(self))
    }

    /// Largest entry of `self - I` in absolute value.
    pub fn distance_from_identity(&self) -> f64 {
        [self.a11 - 1.0, self.a12, self.a21, self.a22 - 1.0].iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Unit vector spanning the kernel of `self - I` (rank one assumed).
    fn fixed_vector(&self) -> [f64; 2] {
        let rows = [[self.a11 - 1.0, self.a12], [self.a21, self.a22 - 1.0]];
        let norm = |r: &[f64; 2]| r[0].hypot(r[1]);
        let row = if norm(&rows[0]) >= norm(&rows[1]) { rows[0] } else { rows[1] };
        let v = [row[1], -row[0]];
        let len = norm(&v);
        [v[0] / len, v[1] / len]
    }
}

/// Monodromy of the problem over `[0, span]` at spectral parameter `lambda`.
pub fn monodromy_over(problem: &HillProblem, lambda: f64, span: f64, tol: f64) -> Result<Monodromy> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let system = HillSystem { potential: problem.potential(), lambda };
    let d = problem.potential.driver_initial();
    let y = Stepper::new(&system, 0.0, [d[0], d[1], 1.0, 0.0, 0.0, 1.0], tol).run_to(span)?;
    Ok(Monodromy { a11: y[2], a12: y[4], a21: y[3], a22: y[5] })
}

/// Monodromy over one base period.
pub fn monodromy(problem: &HillProblem, lambda: f64, tol: f64) -> Result<Monodromy> {
    monodromy_over(problem, lambda, problem.base_period, tol)
}

/// `delta_m(lambda) = tr(M^m)`.
pub fn discriminant(problem: &HillProblem, lambda: f64) -> Result<f64> {
    discriminant_with(problem, lambda, DEFAULT_HILL_TOL)
}

pub fn discriminant_with(problem: &HillProblem, lambda: f64, tol: f64) -> Result<f64> {
    Ok(monodromy(problem, lambda, tol)?.pow(problem.multiplier).trace())
}

/// One periodic eigenvalue of a Hill problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenvalueRecord {
    pub value: f64,
    /// Position in `lambda_1 < lambda_2 <= lambda_3 <= ...`; a double
    /// eigenvalue occupies `ordinal` and `ordinal + 1`.
    pub ordinal: usize,
    pub multiplicity: u8,
    /// Zeros of the eigenfunction in `[0, mT)`.
    pub zero_count: usize,
    /// Simple root lying within `NEAR_DOUBLE_GAP` of another simple root.
    pub possibly_double: bool,
    /// `|delta_m - 2|` at the polished eigenvalue.
    pub residual: f64,
}

impl EigenvalueRecord {
    pub fn ordinals(&self) -> std::ops::RangeInclusive<usize> {
        self.ordinal..=self.ordinal + self.multiplicity as usize - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub grid_step: f64,
    pub tol: f64,
    /// Number of eigenvalues (with multiplicity) below `lambda_min`.
    pub ordinal_offset: usize,
    pub tangency_threshold: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            grid_step: DEFAULT_GRID_STEP,
            tol: DEFAULT_HILL_TOL,
            ordinal_offset: 0,
            tangency_threshold: TANGENCY_THRESHOLD,
        }
    }
}

/// Periodic eigenvalues in `[lambda_min, lambda_max]` with default options.
pub fn find_periodic_eigenvalues(
    problem: &HillProblem,
    lambda_min: f64,
    lambda_max: f64,
    grid_step: f64,
) -> Result<Vec<EigenvalueRecord>> {
    find_periodic_eigenvalues_with(problem, lambda_min, lambda_max, &ScanOptions { grid_step, ..Default::default() })
}

struct Candidate {
    value: f64,
    multiplicity: u8,
}

pub fn find_periodic_eigenvalues_with(
    problem: &HillProblem,
    lambda_min: f64,
    lambda_max: f64,
    opts: &ScanOptions,
) -> Result<Vec<EigenvalueRecord>> {
    if !(lambda_min < lambda_max) || !(opts.grid_step > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need lambda_min < lambda_max and grid_step > 0 (got [{lambda_min}, {lambda_max}], step {})",
            opts.grid_step
        )));
    }
    let m = problem.multiplier;
    let tol = opts.tol;
    let cells = ((lambda_max - lambda_min) / opts.grid_step).ceil() as usize;
    let grid: Vec<f64> =
        (0..=cells).map(|i| if i == cells { lambda_max } else { lambda_min + i as f64 * opts.grid_step }).collect();
    let traces: Vec<f64> =
        grid.par_iter().map(|&l| monodromy(problem, l, tol).map(|mono| mono.trace())).collect::<Result<_>>()?;

    // (level, multiplicity) pairs: delta_1 = 2 cos(2 pi j / m)
    let levels: Vec<(f64, u8)> = (0..=m / 2)
        .map(|j| {
            if j == 0 {
                (2.0, 1)
            } else if 2 * j == m {
                (-2.0, 1)
            } else {
                (2.0 * (2.0 * PI * j as f64 / m as f64).cos(), 2)
            }
        })
        .collect();

    let delta1 = |l: f64| monodromy(problem, l, tol).map(|mono| mono.trace());
    let delta_m_residual = |l: f64| monodromy(problem, l, tol).map(|mono| (mono.pow(m).trace() - 2.0).abs());

    let mut found: Vec<Candidate> = Vec::new();
    // cells (index i covers [grid[i], grid[i+1]]) already resolved per level
    let mut consumed: Vec<Vec<bool>> = vec![vec![false; cells]; levels.len()];

    // extrema: tangencies and root pairs hidden inside a single cell
    for i in 1..cells {
        let (a, b, c) = (traces[i - 1], traces[i], traces[i + 1]);
        let is_max = b >= a && b >= c && (b > a || b > c);
        let is_min = b <= a && b <= c && (b < a || b < c);
        if !is_max && !is_min {
            continue;
        }
        let second = a - 2.0 * b + c;
        // vertex of the parabola through the three samples
        let vertex = if second != 0.0 { b - (c - a).powi(2) / (8.0 * second) } else { b };
        let reach = second.abs() + 1e-6;
        let (lo_v, hi_v) = (b.min(vertex) - reach, b.max(vertex) + reach);
        let near: Vec<usize> = (0..levels.len()).filter(|&k| levels[k].0 > lo_v && levels[k].0 < hi_v).collect();
        if near.is_empty() {
            continue;
        }
        let sign = if is_max { 1.0 } else { -1.0 };
        let (l_star, v) = golden_max(|l| delta1(l).map(|d| sign * d), grid[i - 1], grid[i + 1], 1e-12)?;
        let v = sign * v;
        for k in near {
            let (level, mult) = levels[k];
            if mult == 1 && delta_m_residual(l_star)? < opts.tangency_threshold {
                found.push(Candidate { value: l_star, multiplicity: 2 });
                consumed[k][i - 1] = true;
                consumed[k][i] = true;
                continue;
            }
            let side = |x: f64| x > level;
            let hidden = side(a) == side(b) && side(b) == side(c) && side(v) != side(b);
            if hidden {
                let f = |l: f64| delta1(l).map(|d| d - level);
                let left = bisect(f, grid[i - 1], l_star, root_tol(l_star))?;
                let right = bisect(f, l_star, grid[i + 1], root_tol(l_star))?;
                found.push(Candidate { value: left, multiplicity: mult });
                found.push(Candidate { value: right, multiplicity: mult });
                consumed[k][i - 1] = true;
                consumed[k][i] = true;
            }
        }
    }

    // plain sign changes
    for (k, &(level, mult)) in levels.iter().enumerate() {
        for i in 0..cells {
            if consumed[k][i] {
                continue;
            }
            let (fa, fb) = (traces[i] - level, traces[i + 1] - level);
            if (fa >= 0.0) == (fb >= 0.0) {
                continue;
            }
            let f = |l: f64| delta1(l).map(|d| d - level);
            let (a, b) = (grid[i], grid[i + 1]);
            // more than one crossing inside the cell means the grid is too coarse
            let mut signs = vec![fa >= 0.0];
            for q in 1..4 {
                signs.push(f(a + (b - a) * q as f64 / 4.0)? >= 0.0);
            }
            signs.push(fb >= 0.0);
            if signs.windows(2).filter(|w| w[0] != w[1]).count() > 1 {
                return Err(Error::GridTooCoarse { lambda: 0.5 * (a + b) });
            }
            let root = bisect(f, a, b, root_tol(a))?;
            found.push(Candidate { value: root, multiplicity: mult });
        }
    }

    found.sort_by(|x, y| x.value.total_cmp(&y.value));
    let mut records = Vec::with_capacity(found.len());
    let mut next = opts.ordinal_offset + 1;
    for (idx, cand) in found.iter().enumerate() {
        let close = |j: Option<usize>| {
            j.and_then(|j| found.get(j))
                .is_some_and(|o| o.multiplicity == 1 && (o.value - cand.value).abs() < NEAR_DOUBLE_GAP)
        };
        let possibly_double = cand.multiplicity == 1 && (close(idx.checked_sub(1)) || close(Some(idx + 1)));
        records.push(EigenvalueRecord {
            value: cand.value,
            ordinal: next,
            multiplicity: cand.multiplicity,
            zero_count: 0,
            possibly_double,
            residual: 0.0,
        });
        next += cand.multiplicity as usize;
    }
    let filled: Vec<(usize, f64)> = records
        .par_iter()
        .map(|rec| -> Result<(usize, f64)> {
            let residual = delta_m_residual(rec.value)?;
            let zeros = eigenfunction_zeros_unchecked(problem, rec.value, tol)?;
            Ok((zeros.len(), residual))
        })
        .collect::<Result<_>>()?;
    for (rec, (zeros, residual)) in records.iter_mut().zip(filled) {
        rec.zero_count = zeros;
        rec.residual = residual;
    }
    Ok(records)
}

fn root_tol(scale: f64) -> f64 {
    1e-13 * scale.abs().max(1.0)
}

/// Integrates a periodic solution over `[0, mT]` starting from the kernel of
/// `M^m - I` (or `(1, 0)` when `M^m` is the identity, i.e. a double eigenvalue).
struct PeriodicSolution<'a> {
    system: HillSystem<'a>,
    trajectory: Trajectory<6>,
    period: f64,
}

impl PeriodicSolution<'_> {
    fn u(&self, t: f64) -> f64 {
        self.trajectory.eval(&self.system, t.rem_euclid(self.period))[2]
    }
}

fn periodic_solution(problem: &HillProblem, lambda: f64, tol: f64) -> Result<PeriodicSolution<'_>> {
    let mono = monodromy(problem, lambda, tol)?;
    let full = mono.pow(problem.multiplier);
    let residual = (full.trace() - 2.0).abs();
    if residual > EIGENVALUE_TOL {
        return Err(Error::NotAnEigenvalue { lambda, residual });
    }
    let v = if full.distance_from_identity() < 1e-6 { [1.0, 0.0] } else { full.fixed_vector() };
    let system = HillSystem { potential: problem.potential(), lambda };
    let d = problem.potential.driver_initial();
    let trajectory =
        Trajectory::integrate(&system, 0.0, [d[0], d[1], v[0], v[1], 0.0, 0.0], problem.full_period(), tol, |_, _| {
            Ok(())
        })?;
    Ok(PeriodicSolution { system, trajectory, period: problem.full_period() })
}

fn eigenfunction_zeros_unchecked(problem: &HillProblem, lambda: f64, tol: f64) -> Result<Vec<f64>> {
    let sol = match periodic_solution(problem, lambda, tol) {
        Ok(sol) => sol,
        Err(Error::NotAnEigenvalue { .. }) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let samples = ZERO_SAMPLES_PER_PERIOD * problem.multiplier as usize;
    Ok(periodic_zeros(|t| sol.u(t), problem.full_period(), samples))
}

/// Zeros in one period of a `period`-periodic function, located by sign
/// changes on a uniform grid offset by half a cell and polished by bisection.
/// Points where `|f|` dips below `1e-9 max|f|` without a sign change count once.
pub fn periodic_zeros<F: Fn(f64) -> f64>(f: F, period: f64, samples: usize) -> Vec<f64> {
    let dt = period / samples as f64;
    let t0 = 0.5 * dt;
    let values: Vec<f64> = (0..=samples).map(|i| f(t0 + i as f64 * dt)).collect();
    let scale = values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let floor = 1e-9 * scale;
    let mut zeros = Vec::new();
    for i in 0..samples {
        let (a, b) = (values[i], values[i + 1]);
        let (ta, tb) = (t0 + i as f64 * dt, t0 + (i + 1) as f64 * dt);
        if (a > 0.0) != (b > 0.0) && a != 0.0 && b != 0.0 {
            let z = bisect(|t| Ok(f(t)), ta, tb, 1e-14 * period).expect("closure is infallible");
            zeros.push(z.rem_euclid(period));
        } else if i > 0 && a.abs() < floor && a.abs() <= values[i - 1].abs() && a.abs() <= b.abs() {
            // tangential zero
            zeros.push(ta.rem_euclid(period));
        }
    }
    zeros.sort_by(f64::total_cmp);
    zeros
}

/// Number of zeros in `[0, mT)` of a periodic eigenfunction at `lambda`.
pub fn zero_count_of(problem: &HillProblem, lambda: f64) -> Result<usize> {
    Ok(eigenfunction_zeros(problem, lambda, DEFAULT_HILL_TOL)?.len())
}

/// Zero locations in `[0, mT)` of a periodic eigenfunction at `lambda`.
pub fn eigenfunction_zeros(problem: &HillProblem, lambda: f64, tol: f64) -> Result<Vec<f64>> {
    let sol = periodic_solution(problem, lambda, tol)?;
    let samples = ZERO_SAMPLES_PER_PERIOD * problem.multiplier as usize;
    Ok(periodic_zeros(|t| sol.u(t), problem.full_period(), samples))
}

/// A periodic eigenfunction sampled uniformly on `[0, mT]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenfunction {
    pub lambda: f64,
    pub times: Vec<f64>,
    /// Normalized so that `max |u| = 1` and the largest entry is positive.
    pub u: Vec<f64>,
    /// `u / w` for potentials derived from a transformed operator.
    pub z: Option<Vec<f64>>,
}

pub fn eigenfunction(problem: &HillProblem, lambda: f64, samples: usize) -> Result<Eigenfunction> {
    if samples < 2 {
        return Err(Error::InvalidParameter(format!("need at least 2 samples, got {samples}")));
    }
    let sol = periodic_solution(problem, lambda, DEFAULT_HILL_TOL)?;
    let period = problem.full_period();
    let times: Vec<f64> = (0..samples).map(|i| period * i as f64 / (samples - 1) as f64).collect();
    let states: Vec<[f64; 6]> = times.iter().map(|&t| sol.trajectory.eval(&sol.system, t)).collect();
    let peak = states.iter().map(|y| y[2]).max_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(1.0);
    let u: Vec<f64> = states.iter().map(|y| y[2] / peak).collect();
    let z = states
        .iter()
        .zip(&u)
        .map(|(y, &ui)| problem.potential.z_weight(&[y[0], y[1]]).map(|w| ui / w))
        .collect::<Option<Vec<f64>>>();
    Ok(Eigenfunction { lambda, times, u, z })
}
