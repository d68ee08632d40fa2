//! Profile curves of rotational CMC hypersurfaces of the unit sphere.
//!
//! A hypersurface is generated by a periodic radius function `r(t)` and an
//! angle `theta(t)`. With `lambda = H + c^{-n/2} r^{-n}` and
//! `mu = H - (n-1) c^{-n/2} r^{-n}` the profile satisfies
//!
//! ```text
//! r'' = -r - r lambda mu,        theta' = r lambda / (1 - r^2),
//! (r')^2 + r^2 (1 + lambda^2) = 1   (first integral)
//! ```
//!
//! The second-order form is integrated from `r(0) = r_max`, `r'(0) = 0`; the
//! first integral serves as an accuracy monitor. Internally the integrated
//! variable is the gap `1 - r` under relative error control, so that
//! `1 - r^2` (and hence `theta'`) stays accurate when `r_max` is close to 1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{step_to, OdeSystem, Stepper, Trajectory};
use crate::roots::{bisect, illinois};

/// Default local error target for profile integration.
pub const DEFAULT_ODE_TOL: f64 = 1e-10;
/// Default tolerance for root polishing (turning points, period event).
pub const DEFAULT_ROOT_TOL: f64 = 1e-12;
/// Default tolerance on `theta(T) - 2 pi l / m` when solving for `c`.
pub const DEFAULT_C_TOL: f64 = 1e-8;

/// `|min g|` below this is treated as a double root of the constraint.
const DEGENERATE_TOL: f64 = 1e-12;
/// Largest winding denominator tried when inferring `l / m` from `theta(T)`.
const MAX_WINDING_DENOMINATOR: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub ode: f64,
    pub root: f64,
    pub c_solve: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode: DEFAULT_ODE_TOL, root: DEFAULT_ROOT_TOL, c_solve: DEFAULT_C_TOL }
    }
}

/// Defining parameters `(n, H, c)` of a rotational CMC hypersurface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileParams {
    pub n: u32,
    #[serde(rename = "H")]
    pub mean_curvature: f64,
    pub c: f64,
}

impl ProfileParams {
    pub fn new(n: u32, mean_curvature: f64, c: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("dimension n must be >= 2, got {n}")));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("c must be positive, got {c}")));
        }
        if !(mean_curvature >= 0.0) || !mean_curvature.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mean curvature H must be >= 0 (flip the orientation for H < 0), got {mean_curvature}"
            )));
        }
        Ok(Self { n, mean_curvature, c })
    }

    /// `c^{-n/2}`.
    pub fn scale(&self) -> f64 {
        self.c.powf(-(self.n as f64) / 2.0)
    }

    /// `c^{-n/2} r^{-n}`, the non-constant part of both principal curvatures.
    fn excess(&self, r: f64) -> f64 {
        self.scale() * r.powi(-(self.n as i32))
    }

    /// Squared norm of the second fundamental form, `n (H^2 + (n-1) c^{-n} r^{-2n})`.
    pub fn second_fundamental_form_sq(&self, r: f64) -> f64 {
        let n = self.n as f64;
        let s = self.excess(r);
        n * (self.mean_curvature.powi(2) + (n - 1.0) * s * s)
    }
}

/// Coprime winding integers with `theta(T) = 2 pi l / m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindingTarget {
    pub l: u32,
    pub m: u32,
}

impl WindingTarget {
    pub fn new(l: u32, m: u32) -> Result<Self> {
        if l == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!("l and m must be positive, got l={l}, m={m}")));
        }
        if gcd(l, m) != 1 {
            return Err(Error::InvalidParameter(format!("l={l} and m={m} are not relatively prime")));
        }
        Ok(Self { l, m })
    }

    /// Target angle `2 pi l / m`.
    pub fn angle(&self) -> f64 {
        2.0 * PI * self.l as f64 / self.m as f64
    }

    /// Smallest-denominator ratio `l/m` with `|theta/(2 pi) - l/m| < tol`.
    pub fn infer(theta: f64, tol: f64) -> Option<Self> {
        let x = theta / (2.0 * PI);
        (1..=MAX_WINDING_DENOMINATOR).find_map(|m| {
            let l = (x * m as f64).round();
            if l < 1.0 || (x - l / m as f64).abs() >= tol {
                return None;
            }
            Self::new(l as u32, m).ok()
        })
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Principal curvatures: `lambda` (multiplicity n-1) and `mu` (multiplicity 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalCurvatures {
    pub lambda: f64,
    pub mu: f64,
}

pub fn principal_curvatures(params: &ProfileParams, r: f64) -> Result<PrincipalCurvatures> {
    if !(r > 0.0) {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    Ok(curvatures_unchecked(params, r))
}

#[inline]
fn curvatures_unchecked(params: &ProfileParams, r: f64) -> PrincipalCurvatures {
    let s = params.excess(r);
    let h = params.mean_curvature;
    PrincipalCurvatures { lambda: h + s, mu: h - (params.n as f64 - 1.0) * s }
}

/// `g(r) = r^2 (1 + lambda^2) - 1`; turning points of the profile are its roots.
pub fn constraint(params: &ProfileParams, r: f64) -> f64 {
    let lambda = curvatures_unchecked(params, r).lambda;
    r * r * (1.0 + lambda * lambda) - 1.0
}

/// Sign of `g'(r)`: `g'(r) = 2 r (1 + lambda^2 - n lambda (lambda - H))`.
/// `g` is strictly convex on `(0, inf)`, so this factor is increasing in `r`.
fn constraint_slope_factor(params: &ProfileParams, r: f64) -> f64 {
    let lambda = curvatures_unchecked(params, r).lambda;
    let n = params.n as f64;
    1.0 + lambda * lambda - n * lambda * (lambda - params.mean_curvature)
}

/// Minimiser of the constraint on `(0, 1]` and its value.
fn constraint_minimum(params: &ProfileParams) -> (f64, f64) {
    if constraint_slope_factor(params, 1.0) <= 0.0 {
        return (1.0, constraint(params, 1.0));
    }
    let mut lo = 0.5;
    while constraint_slope_factor(params, lo) >= 0.0 {
        lo *= 0.5;
    }
    let r_star = bisect(|r| Ok(constraint_slope_factor(params, r)), lo, 1.0, 1e-16).expect("closure is infallible");
    (r_star, constraint(params, r_star))
}

/// The two turning points `r_min < r_max` of the profile.
pub fn roots_of_constraint(params: &ProfileParams) -> Result<(f64, f64)> {
    let (r_star, g_min) = constraint_minimum(params);
    if g_min.abs() <= DEGENERATE_TOL {
        return Err(Error::DegenerateProfile { radius: r_star, min_value: g_min });
    }
    if g_min > 0.0 || r_star >= 1.0 {
        return Err(Error::NoOscillation { min_value: g_min });
    }
    let g = |r: f64| Ok(constraint(params, r));
    let mut lo = 0.5 * r_star;
    while constraint(params, lo) <= 0.0 {
        lo *= 0.5;
    }
    let r_min = bisect(g, lo, r_star, 1e-16)?;
    Ok((r_min, 1.0 - outer_gap(params, r_star)))
}

/// `1 - r_max` to full relative precision, from the constraint rewritten as
/// `r^2 lambda^2 - v (2 - v)` with `v = 1 - r` (free of cancellation near 1).
fn outer_gap(params: &ProfileParams, r_star: f64) -> f64 {
    let g = |v: f64| {
        let r = 1.0 - v;
        let lambda = curvatures_unchecked(params, r).lambda;
        Ok(r * r * lambda * lambda - v * (2.0 - v))
    };
    bisect(g, 0.0, 1.0 - r_star, 0.0).expect("closure is infallible")
}

fn turning_points(params: &ProfileParams) -> Result<(f64, f64)> {
    let (r_min, _) = roots_of_constraint(params)?;
    let (r_star, _) = constraint_minimum(params);
    Ok((r_min, outer_gap(params, r_star)))
}

/// Value of `c` at which the profile degenerates to a constant radius
/// (the constraint acquires a double root). Oscillating profiles need `c`
/// strictly above it.
pub fn degenerate_c(n: u32, mean_curvature: f64) -> Result<f64> {
    let g_min = |log_c: f64| -> Result<f64> {
        let params = ProfileParams::new(n, mean_curvature, log_c.exp())?;
        Ok(constraint_minimum(&params).1)
    };
    let log_c = bisect(g_min, (1e-3f64).ln(), (1e6f64).ln(), 1e-15)?;
    Ok(log_c.exp())
}

/// `|(r')^2 + r^2 (1 + lambda^2) - 1|`.
pub fn conservation_defect(params: &ProfileParams, r: f64, r_prime: f64) -> f64 {
    (r_prime * r_prime + constraint(params, r)).abs()
}

/// State `(r, r', theta)` of the profile ODE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileState {
    pub r: f64,
    pub r_prime: f64,
    pub theta: f64,
}

/// First-order system for `(1 - r, r', theta)`.
#[derive(Debug, Clone, Copy)]
pub struct ProfileSystem {
    params: ProfileParams,
}

impl ProfileSystem {
    pub fn new(params: ProfileParams) -> Self {
        Self { params }
    }

    /// `r''` as a function of `r`.
    #[inline]
    pub fn acceleration(&self, r: f64) -> f64 {
        let k = curvatures_unchecked(&self.params, r);
        -r - r * k.lambda * k.mu
    }

    /// `theta'` as a function of `r`.
    #[inline]
    pub fn angular_speed(&self, r: f64) -> f64 {
        self.angular_speed_gap(1.0 - r)
    }

    #[inline]
    fn angular_speed_gap(&self, v: f64) -> f64 {
        let r = 1.0 - v;
        r * curvatures_unchecked(&self.params, r).lambda / (v * (2.0 - v))
    }
}

impl OdeSystem<3> for ProfileSystem {
    #[inline]
    fn rhs(&self, _t: f64, y: &[f64; 3], dy: &mut [f64; 3]) {
        dy[0] = -y[1];
        dy[1] = self.acceleration(1.0 - y[0]);
        dy[2] = self.angular_speed_gap(y[0]);
    }

    fn error_floor(&self) -> [f64; 3] {
        [0.0, 1.0, 1.0]
    }
}

fn to_state(y: &[f64; 3]) -> ProfileState {
    ProfileState { r: 1.0 - y[0], r_prime: y[1], theta: y[2] }
}

fn check_domain(t: f64, y: &[f64; 3]) -> Result<()> {
    if y[0] > 0.0 && y[0] < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainExit { t, r: 1.0 - y[0] })
    }
}

/// Raw integrated profile over `[0, t_end]`.
#[derive(Debug, Clone)]
pub struct ProfileTrajectory {
    system: ProfileSystem,
    trajectory: Trajectory<3>,
}

impl ProfileTrajectory {
    pub fn params(&self) -> &ProfileParams {
        &self.system.params
    }

    pub fn t_end(&self) -> f64 {
        self.trajectory.t_end()
    }

    pub fn node_count(&self) -> usize {
        self.trajectory.len()
    }

    /// State at `t` in `[0, t_end]`.
    pub fn state(&self, t: f64) -> ProfileState {
        to_state(&self.trajectory.eval(&self.system, t))
    }
}

/// Integrates `r'' = -r - r lambda mu`, `theta' = r lambda / (1 - r^2)` from
/// `r(0) = r_max`, `r'(0) = 0`, `theta(0) = 0` up to `t_end`.
pub fn integrate_profile(params: &ProfileParams, t_end: f64, tol: f64) -> Result<ProfileTrajectory> {
    if !(t_end >= 0.0) || !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("need t_end >= 0 and tol > 0 (t_end={t_end}, tol={tol})")));
    }
    let (_, gap) = turning_points(params)?;
    let system = ProfileSystem::new(*params);
    let trajectory = Trajectory::integrate(&system, 0.0, [gap, 0.0, 0.0], t_end, tol, check_domain)?;
    Ok(ProfileTrajectory { system, trajectory })
}

/// Half-period event: first `t* > 0` with `r'(t*) = 0`, plus the state there.
fn half_period(params: &ProfileParams, gap: f64, ode_tol: f64, root_tol: f64) -> Result<(f64, ProfileState)> {
    let system = ProfileSystem::new(*params);
    let horizon = 100.0 * 2.0 * PI;
    let mut stepper = Stepper::new(&system, 0.0, [gap, 0.0, 0.0], ode_tol);
    let mut prev_t = 0.0;
    let mut prev_y = [gap, 0.0, 0.0];
    while stepper.t() < horizon {
        stepper.advance(horizon)?;
        let (t, y) = (stepper.t(), *stepper.y());
        check_domain(t, &y)?;
        if prev_t > 0.0 && prev_y[1] < 0.0 && y[1] >= 0.0 {
            let velocity = |s: f64| Ok(step_to(&system, prev_t, &prev_y, s)[1]);
            let t_star = illinois(velocity, prev_t, t, 0.0, root_tol * t.max(1.0))?;
            return Ok((t_star, to_state(&step_to(&system, prev_t, &prev_y, t_star))));
        }
        prev_t = t;
        prev_y = y;
    }
    Err(Error::EventNotFound { horizon })
}

/// Period `T = 2 t*` of `r(t)`, where `t*` is the first positive zero of `r'`.
pub fn find_period(params: &ProfileParams, tol: f64) -> Result<f64> {
    let (r_min, gap) = turning_points(params)?;
    let (t_star, y) = half_period(params, gap, tol, DEFAULT_ROOT_TOL)?;
    if (y.r - r_min).abs() > 1e-6 {
        return Err(Error::IntegrationFailure {
            t: t_star,
            reason: format!("r(T/2) = {} does not match r_min = {r_min}", y.r),
        });
    }
    Ok(2.0 * t_star)
}

/// `theta(T)` computed from the half period; the profile is symmetric about
/// `T/2`, so `theta(T) = 2 theta(T/2)`.
fn theta_of_period_fast(params: &ProfileParams, ode_tol: f64, root_tol: f64) -> Result<f64> {
    let (_, gap) = turning_points(params)?;
    let (_, y) = half_period(params, gap, ode_tol, root_tol)?;
    Ok(2.0 * y.theta)
}

/// A solved periodic profile with periodic extension (`r` is `T`-periodic,
/// `theta(t + T) = theta(t) + theta(T)`).
///
/// Only `[0, T/2]` is integrated. The profile is symmetric about `T/2`, so the
/// second half follows by reflection: `r(T - t) = r(t)`, `r'(T - t) = -r'(t)`,
/// `theta(T - t) = theta(T) - theta(t)`. This matters when `r_max` is close
/// to 1: the angle gained near the returning turning point depends on the gap
/// `1 - r_max` there, which a forward integration only reproduces up to its
/// first-integral drift.
#[derive(Debug, Clone)]
pub struct ProfileSolution {
    system: ProfileSystem,
    period: f64,
    r_min: f64,
    r_max: f64,
    theta_period: f64,
    winding: Option<WindingTarget>,
    ode_tol: f64,
    trajectory: Trajectory<3>,
}

impl ProfileSolution {
    /// Builds the solution for given `(n, H, c)`; the winding ratio is
    /// inferred from `theta(T)` when it is close to a small-denominator rational.
    pub fn new(params: ProfileParams, tol: f64) -> Result<Self> {
        let mut sol = Self::build(params, tol)?;
        sol.winding = WindingTarget::infer(sol.theta_period, 1e-7);
        Ok(sol)
    }

    /// Builds the solution and attaches the winding target, checking that
    /// `theta(T)` matches `2 pi l / m` to within `angle_tol`.
    pub fn with_winding(params: ProfileParams, target: WindingTarget, tol: f64, angle_tol: f64) -> Result<Self> {
        let mut sol = Self::build(params, tol)?;
        if (sol.theta_period - target.angle()).abs() > angle_tol {
            return Err(Error::NotClosed { theta: sol.theta_period });
        }
        sol.winding = Some(target);
        Ok(sol)
    }

    fn build(params: ProfileParams, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        let (r_min, gap) = turning_points(&params)?;
        let r_max = 1.0 - gap;
        let period = find_period(&params, tol)?;
        let system = ProfileSystem::new(params);
        let trajectory = Trajectory::integrate(&system, 0.0, [gap, 0.0, 0.0], 0.5 * period, tol, check_domain)?;
        let theta_period = 2.0 * trajectory.states().last().expect("non-empty")[2];
        Ok(Self { system, period, r_min, r_max, theta_period, winding: None, ode_tol: tol, trajectory })
    }

    pub fn params(&self) -> &ProfileParams {
        &self.system.params
    }

    pub fn system(&self) -> &ProfileSystem {
        &self.system
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn theta_period(&self) -> f64 {
        self.theta_period
    }

    pub fn winding(&self) -> Option<WindingTarget> {
        self.winding
    }

    pub fn ode_tol(&self) -> f64 {
        self.ode_tol
    }

    /// Period `m T` of the closed immersion, if the winding is known.
    pub fn closing_period(&self) -> Option<f64> {
        self.winding.map(|w| w.m as f64 * self.period)
    }

    /// `(r, r', theta)` at any `t`.
    pub fn state(&self, t: f64) -> ProfileState {
        let turns = (t / self.period).floor();
        let s = t - turns * self.period;
        let half = 0.5 * self.period;
        let state = if s <= half {
            to_state(&self.trajectory.eval(&self.system, s))
        } else {
            let mirror = to_state(&self.trajectory.eval(&self.system, self.period - s));
            ProfileState { r: mirror.r, r_prime: -mirror.r_prime, theta: self.theta_period - mirror.theta }
        };
        ProfileState { theta: state.theta + turns * self.theta_period, ..state }
    }

    /// Largest conservation defect over the stored nodes.
    pub fn max_conservation_defect(&self) -> f64 {
        self.trajectory
            .states()
            .iter()
            .map(|y| conservation_defect(self.params(), 1.0 - y[0], y[1]))
            .fold(0.0, f64::max)
    }
}

/// `theta(T)` of a solved profile.
pub fn theta_of_period(sol: &ProfileSolution) -> f64 {
    sol.theta_period()
}

/// Whether `pi < theta < sqrt(2) pi` (the band that contains every minimal profile).
pub fn in_otsuki_band(theta: f64) -> bool {
    theta > PI && theta < 2f64.sqrt() * PI
}

/// Finds `c` in `c_bracket` with `|theta(T)(c) - 2 pi l / m| < tol`.
///
/// The bracket is scanned on a coarse grid first (monotonicity of `theta(T)`
/// in `c` is not assumed); the first sign change is refined by bracketing
/// secant steps. The result is validated by recomputing `theta(T)`.
pub fn solve_c(
    n: u32,
    mean_curvature: f64,
    target: WindingTarget,
    c_bracket: (f64, f64),
    tol: f64,
) -> Result<ProfileParams> {
    solve_c_with(n, mean_curvature, target, c_bracket, Tolerances { c_solve: tol, ..Tolerances::default() })
}

pub fn solve_c_with(
    n: u32,
    mean_curvature: f64,
    target: WindingTarget,
    c_bracket: (f64, f64),
    tols: Tolerances,
) -> Result<ProfileParams> {
    const SCAN_POINTS: usize = 24;
    let (lo, hi) = c_bracket;
    if !(lo > 0.0 && hi > lo) || !(tols.c_solve > 0.0) {
        return Err(Error::InvalidParameter(format!("invalid c bracket ({lo}, {hi}) or tolerance")));
    }
    let goal = target.angle();
    let mismatch = |c: f64| -> Result<f64> {
        let params = ProfileParams::new(n, mean_curvature, c)?;
        Ok(theta_of_period_fast(&params, tols.ode, tols.root)? - goal)
    };

    let mut last: Option<(f64, f64)> = None;
    let mut first_err = None;
    let mut bracket = None;
    for i in 0..=SCAN_POINTS {
        // geometric spacing resolves the fast variation near the degenerate end
        let c = lo * (hi / lo).powf(i as f64 / SCAN_POINTS as f64);
        match mismatch(c) {
            Ok(f) => {
                if f == 0.0 {
                    bracket = Some((c, c));
                    break;
                }
                if let Some((c_prev, f_prev)) = last {
                    if (f > 0.0) != (f_prev > 0.0) {
                        bracket = Some((c_prev, c));
                        break;
                    }
                }
                last = Some((c, f));
            }
            Err(e @ (Error::DegenerateProfile { .. } | Error::NoOscillation { .. })) => {
                first_err.get_or_insert(e);
                last = None;
            }
            Err(e) => return Err(e),
        }
    }
    let (a, b) = match bracket {
        Some(br) => br,
        None => {
            return match (last, first_err) {
                (None, Some(e)) => Err(e),
                _ => Err(Error::NoSignChange { lo, hi }),
            }
        }
    };
    let c = if a == b { a } else { illinois(mismatch, a, b, 1e-3 * tols.c_solve, 4.0 * f64::EPSILON * b)? };
    let params = ProfileParams::new(n, mean_curvature, c)?;
    // the validating integration differs from the fast one by its own error
    let angle_tol = tols.c_solve.max(1e3 * tols.ode);
    ProfileSolution::with_winding(params, target, tols.ode, angle_tol)?;
    Ok(params)
}

/// A reasonable default bracket for `solve_c`: from just above the degenerate
/// value to well into the thin-neck regime.
pub fn default_c_bracket(n: u32, mean_curvature: f64) -> Result<(f64, f64)> {
    let c0 = degenerate_c(n, mean_curvature)?;
    Ok((c0 * (1.0 + 1e-4), c0 * 60.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[allow(clippy::excessive_precision)]
    const EXAMPLE_C: f64 = 2.8284247911397589;

    fn example() -> ProfileParams {
        ProfileParams::new(3, 0.0, EXAMPLE_C).unwrap()
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ProfileParams::new(1, 0.0, 1.0).is_err());
        assert!(ProfileParams::new(3, -0.1, 1.0).is_err());
        assert!(ProfileParams::new(3, 0.0, 0.0).is_err());
        assert!(WindingTarget::new(2, 4).is_err());
        assert!(WindingTarget::new(0, 1).is_err());
    }

    #[test]
    fn curvatures_trivial_cases() {
        let k = principal_curvatures(&ProfileParams::new(3, 0.0, 1.0).unwrap(), 1.0).unwrap();
        assert_eq!((k.lambda, k.mu), (1.0, -2.0));
        let k = principal_curvatures(&ProfileParams::new(2, 1.0, 1.0).unwrap(), 1.0).unwrap();
        assert_eq!((k.lambda, k.mu), (2.0, 0.0));
        assert!(principal_curvatures(&example(), 0.0).is_err());
    }

    #[test]
    fn curvature_ratio_at_r_max_for_minimal_example() {
        let (_, r_max) = roots_of_constraint(&example()).unwrap();
        let k = principal_curvatures(&example(), r_max).unwrap();
        assert!((k.mu / k.lambda + 2.0).abs() < 1e-14);
    }

    #[test]
    fn n2_roots_match_closed_form() {
        let params = ProfileParams::new(2, 0.0, EXAMPLE_C).unwrap();
        let (r_min, r_max) = roots_of_constraint(&params).unwrap();
        let disc = (1.0 - 4.0 / (EXAMPLE_C * EXAMPLE_C)).sqrt();
        assert!((r_min - ((1.0 - disc) / 2.0).sqrt()).abs() < 1e-12);
        assert!((r_max - ((1.0 + disc) / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_c_closed_form_for_minimal_n3() {
        // r^2 + c^-3 r^-4 - 1 has a double root when c^3 = 27/4
        let c0 = degenerate_c(3, 0.0).unwrap();
        assert!((c0 - (27.0f64 / 4.0).cbrt()).abs() < 1e-12, "{c0}");
        let params = ProfileParams::new(3, 0.0, (27.0f64 / 4.0).cbrt()).unwrap();
        assert!(matches!(roots_of_constraint(&params), Err(Error::DegenerateProfile { .. })));
        assert!(matches!(find_period(&params, 1e-10), Err(Error::DegenerateProfile { .. })));
        let params = ProfileParams::new(3, 0.0, 1.5).unwrap();
        assert!(matches!(roots_of_constraint(&params), Err(Error::NoOscillation { .. })));
    }

    #[test]
    fn zero_length_integration() {
        let traj = integrate_profile(&example(), 0.0, 1e-10).unwrap();
        let (_, r_max) = roots_of_constraint(&example()).unwrap();
        assert_eq!(traj.node_count(), 1);
        let s = traj.state(0.0);
        assert_eq!((s.r, s.r_prime, s.theta), (r_max, 0.0, 0.0));
    }

    #[test]
    fn winding_inference() {
        let w = WindingTarget::infer(4.0 * PI / 3.0 + 1e-9, 1e-7).unwrap();
        assert_eq!((w.l, w.m), (2, 3));
        assert!(WindingTarget::infer(2.0 * PI * 0.123456789, 1e-9).is_none());
    }
}
