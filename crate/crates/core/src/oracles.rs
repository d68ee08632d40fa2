//! Closed-form eigenfunctions of the separated operators, used to check the
//! numerical spectra independently of the Hill solver.
//!
//! Each case is a function of the profile state `(r, r', theta)`. Time
//! derivatives are propagated exactly with second-order jets, using the
//! profile equations for `r''` and `theta'`. Residuals are measured in the
//! original `z`-form of the operators
//!
//! ```text
//! K_{Laplace,k} z = z'' + (n-1)(r'/r) z' - alpha_k / r^2 z
//! K_{Jacobi,k}  z = K_{Laplace,k} z + (n + |A|^2) z
//! ```
//!
//! for the identity `K z + lambda z = 0`.

use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hill::periodic_zeros;
use crate::hill::ScanOptions;
use crate::profile::{ProfileParams, ProfileSolution, ProfileState};
use crate::spectrum::{level_problem, scan_with_refinement, spectral_floor, sphere_eigenvalue, OperatorKind};

/// Truncated Taylor jet `(f, f', f'')` in the time variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet2 {
    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Self { v, d1, d2 }
    }

    pub const fn constant(v: f64) -> Self {
        Self::new(v, 0.0, 0.0)
    }

    /// Composition with a scalar function given its value and first two derivatives.
    fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        Self::new(f, df * self.d1, ddf * self.d1 * self.d1 + df * self.d2)
    }

    pub fn powf(self, p: f64) -> Self {
        let x = self.v;
        self.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }

    pub fn sqrt(self) -> Self {
        self.powf(0.5)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn recip(self) -> Self {
        self.powf(-1.0)
    }
}

impl Add for Jet2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Neg for Jet2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, -self.d1, -self.d2)
    }
}

impl Mul for Jet2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(self.v * o.v, self.d1 * o.v + self.v * o.d1, self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.v * s, self.d1 * s, self.d2 * s)
    }
}

impl Add<f64> for Jet2 {
    type Output = Self;
    fn add(self, s: f64) -> Self {
        Self::new(self.v + s, self.d1, self.d2)
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl Div for Jet2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

/// Jets of `r` and `theta` at one point of the profile.
#[derive(Debug, Clone, Copy)]
pub struct ProfileJets {
    pub r: Jet2,
    pub theta: Jet2,
    /// `c^{-n/2}`.
    pub scale: f64,
    pub n: f64,
    pub mean_curvature: f64,
}

impl ProfileJets {
    pub fn at(params: &ProfileParams, state: &ProfileState) -> Self {
        let n = params.n as f64;
        let s = params.scale();
        let h = params.mean_curvature;
        let (r, rp) = (state.r, state.r_prime);
        let lam = h + s * r.powf(-n);
        let mu = h - (n - 1.0) * s * r.powf(-n);
        let r_jet = Jet2::new(r, rp, -r - r * lam * mu);
        // theta' = r lambda / (1 - r^2), differentiated through r
        let lam_jet = r_jet.powf(-n) * s + h;
        let omega = r_jet * lam_jet / (Jet2::constant(1.0) - r_jet * r_jet);
        Self { r: r_jet, theta: Jet2::new(state.theta, omega.v, omega.d1), scale: s, n, mean_curvature: h }
    }

    /// `sqrt(1 - r^2)`.
    fn rho(&self) -> Jet2 {
        (Jet2::constant(1.0) - self.r * self.r).sqrt()
    }

    /// `r'` as a jet. Its second derivative needs `r'''`, obtained by
    /// differentiating `r'' = -r - r lambda mu` along the flow.
    fn r_prime(&self) -> Jet2 {
        let (n, s, h) = (self.n, self.scale, self.mean_curvature);
        let accel = |r: Jet2| {
            let lam = r.powf(-n) * s + h;
            let mu = r.powf(-n) * (-(n - 1.0) * s) + h;
            -r - r * lam * mu
        };
        let a = accel(self.r);
        Jet2::new(self.r.d1, self.r.d2, a.d1)
    }
}

/// Which parameter regimes a closed-form identity holds in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Applicability {
    AnyH,
    MinimalOnly,
    CmcOnly,
    MinimalN3,
}

impl Applicability {
    pub fn holds(self, params: &ProfileParams) -> bool {
        let minimal = params.mean_curvature == 0.0;
        match self {
            Applicability::AnyH => true,
            Applicability::MinimalOnly => minimal,
            Applicability::CmcOnly => !minimal,
            Applicability::MinimalN3 => minimal && params.n == 3,
        }
    }
}

/// A closed-form solution of `K_{kind,k} z + eigenvalue z = 0`.
#[derive(Clone)]
pub struct OracleCase {
    pub name: &'static str,
    pub kind: OperatorKind,
    pub k: u32,
    pub eigenvalue: f64,
    pub applicability: Applicability,
    pub function: Arc<dyn Fn(&ProfileJets) -> Jet2 + Send + Sync>,
}

impl std::fmt::Debug for OracleCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OracleCase")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("k", &self.k)
            .field("eigenvalue", &self.eigenvalue)
            .field("applicability", &self.applicability)
            .finish_non_exhaustive()
    }
}

impl OracleCase {
    fn new(
        name: &'static str,
        kind: OperatorKind,
        k: u32,
        eigenvalue: f64,
        applicability: Applicability,
        function: impl Fn(&ProfileJets) -> Jet2 + Send + Sync + 'static,
    ) -> Self {
        Self { name, kind, k, eigenvalue, applicability, function: Arc::new(function) }
    }

    /// The constant function, a Laplace eigenfunction with eigenvalue 0.
    pub fn constant() -> Self {
        Self::new("one", OperatorKind::Laplace, 1, 0.0, Applicability::AnyH, |_| Jet2::constant(1.0))
    }

    pub fn jet_at(&self, sol: &ProfileSolution, t: f64) -> Jet2 {
        (self.function)(&ProfileJets::at(sol.params(), &sol.state(t)))
    }

    pub fn value_at(&self, sol: &ProfileSolution, t: f64) -> f64 {
        self.jet_at(sol, t).v
    }
}

/// All closed-form cases valid for the solution's `(n, H)`.
pub fn oracle_catalog(sol: &ProfileSolution) -> Vec<OracleCase> {
    use Applicability::*;
    use OperatorKind::*;
    let n = sol.params().n as f64;
    let all = vec![
        OracleCase::new("f1", Laplace, 1, n, MinimalOnly, |j| j.rho() * j.theta.cos()),
        OracleCase::new("f2", Laplace, 1, n, MinimalOnly, |j| j.rho() * j.theta.sin()),
        OracleCase::new("r", Laplace, 2, n, MinimalOnly, |j| j.r),
        OracleCase::new("r_prime", Jacobi, 1, 0.0, AnyH, |j| j.r_prime()),
        OracleCase::new("f3", Jacobi, 2, 0.0, MinimalOnly, |j| {
            let a = j.r.powf(1.0 - j.n) * j.scale;
            (-(a * j.theta.cos()) + j.r * j.r_prime() * j.theta.sin()) / j.rho()
        }),
        OracleCase::new("f4", Jacobi, 2, 0.0, MinimalOnly, |j| {
            let a = j.r.powf(1.0 - j.n) * j.scale;
            (a * j.theta.sin() + j.r * j.r_prime() * j.theta.cos()) / j.rho()
        }),
        OracleCase::new("cmc_f1", Jacobi, 2, 0.0, CmcOnly, |j| {
            let h = j.mean_curvature;
            let a = j.r.powf(1.0 - j.n) * j.scale;
            (j.r * (j.theta.cos() * h - j.r_prime() * j.theta.sin()) + a * j.theta.cos()) / j.rho()
        }),
        OracleCase::new("cmc_f2", Jacobi, 2, 0.0, CmcOnly, |j| {
            let h = j.mean_curvature;
            let a = j.r.powf(1.0 - j.n) * j.scale;
            (j.r * (j.r_prime() * j.theta.cos() + j.theta.sin() * h) + a * j.theta.sin()) / j.rho()
        }),
        OracleCase::new("r_inv_sq", Jacobi, 2, -3.0, MinimalN3, |j| j.r.powf(-2.0)),
    ];
    all.into_iter().filter(|case| case.applicability.holds(sol.params())).collect()
}

/// Zeroth-order coefficient of the `z`-form operator at radius `r`.
fn zeroth_order(case: &OracleCase, params: &ProfileParams, r: f64) -> f64 {
    let n = params.n as f64;
    let base = -sphere_eigenvalue(params.n, case.k) / (r * r);
    match case.kind {
        OperatorKind::Laplace => base,
        OperatorKind::Jacobi => base + n + params.second_fundamental_form_sq(r),
    }
}

fn sample_span(sol: &ProfileSolution) -> f64 {
    sol.closing_period().unwrap_or(sol.period())
}

/// Normalized residual `max |K z + eigenvalue z| / max |z|` over `samples`
/// uniform points of one closing period, with exact jet derivatives.
pub fn residual(case: &OracleCase, sol: &ProfileSolution, samples: usize) -> f64 {
    let samples = samples.max(64);
    let span = sample_span(sol);
    let params = sol.params();
    let n = params.n as f64;
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let state = sol.state(span * i as f64 / samples as f64);
        let z = (case.function)(&ProfileJets::at(params, &state));
        let r = state.r;
        let lhs = z.d2 + (n - 1.0) * state.r_prime / r * z.d1 + (zeroth_order(case, params, r) + case.eigenvalue) * z.v;
        worst = worst.max(lhs.abs());
        scale = scale.max(z.v.abs());
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

/// Same residual with `z'` and `z''` from fourth-order central differences of
/// sampled values, independent of the jet arithmetic.
pub fn residual_finite_difference(case: &OracleCase, sol: &ProfileSolution, samples: usize) -> f64 {
    let samples = samples.max(64);
    let span = sample_span(sol);
    let params = sol.params();
    let n = params.n as f64;
    let h = 2e-3 * sol.period();
    let z = |t: f64| case.value_at(sol, t);
    let (mut worst, mut scale) = (0.0f64, 0.0f64);
    for i in 0..samples {
        let t = span * i as f64 / samples as f64;
        let (zm2, zm1, z0, zp1, zp2) = (z(t - 2.0 * h), z(t - h), z(t), z(t + h), z(t + 2.0 * h));
        let d1 = (zm2 - 8.0 * zm1 + 8.0 * zp1 - zp2) / (12.0 * h);
        let d2 = (-zm2 + 16.0 * zm1 - 30.0 * z0 + 16.0 * zp1 - zp2) / (12.0 * h * h);
        let state = sol.state(t);
        let lhs = d2
            + (n - 1.0) * state.r_prime / state.r * d1
            + (zeroth_order(case, params, state.r) + case.eigenvalue) * z0;
        worst = worst.max(lhs.abs());
        scale = scale.max(z0.abs());
    }
    if scale == 0.0 {
        worst
    } else {
        worst / scale
    }
}

/// Zeros of the oracle function in one closing period.
pub fn oracle_zero_count(case: &OracleCase, sol: &ProfileSolution) -> Result<usize> {
    let span = sol.closing_period().ok_or(Error::NotClosed { theta: sol.theta_period() })?;
    let m = sol.winding().map_or(1, |w| w.m) as usize;
    Ok(periodic_zeros(|t| case.value_at(sol, t), span, 4096 * m).len())
}

/// Consistency between an oracle and the Hill spectrum of its level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleReport {
    pub name: String,
    pub operator: OperatorKind,
    pub k: u32,
    pub eigenvalue: f64,
    pub residual: f64,
    pub residual_finite_difference: f64,
    pub zero_count: usize,
    /// Ordinal of the matching Hill eigenvalue, if one was found.
    pub hill_ordinal: Option<usize>,
    pub hill_multiplicity: Option<u8>,
    /// `2 floor(ordinal / 2)`.
    pub expected_zeros: Option<usize>,
    pub haupt_consistent: bool,
}

/// Distance within which a Hill eigenvalue is identified with an oracle eigenvalue.
const MATCH_TOL: f64 = 1e-6;

pub fn check_oracle(case: &OracleCase, sol: &ProfileSolution, samples: usize, grid_step: f64) -> Result<OracleReport> {
    let shared = Arc::new(sol.clone());
    let problem = level_problem(&shared, case.kind, case.k)?;
    let opts = ScanOptions { grid_step, ..Default::default() };
    let records = scan_with_refinement(&problem, spectral_floor(&problem), case.eigenvalue + 0.05, &opts)?;
    let hit = records.iter().find(|rec| (rec.value - case.eigenvalue).abs() < MATCH_TOL);
    let zero_count = oracle_zero_count(case, sol)?;
    let expected_zeros = hit.map(|rec| 2 * (rec.ordinal / 2));
    Ok(OracleReport {
        name: case.name.to_string(),
        operator: case.kind,
        k: case.k,
        eigenvalue: case.eigenvalue,
        residual: residual(case, sol, samples),
        residual_finite_difference: residual_finite_difference(case, sol, samples),
        zero_count,
        hill_ordinal: hit.map(|rec| rec.ordinal),
        hill_multiplicity: hit.map(|rec| rec.multiplicity),
        expected_zeros,
        haupt_consistent: expected_zeros == Some(zero_count),
    })
}
