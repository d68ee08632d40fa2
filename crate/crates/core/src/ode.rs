//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 8(5,3)).
//!
//! The stepper works on fixed-size states `[f64; N]`. Dense output is
//! obtained by re-taking a single step of the same method from the nearest
//! stored node, so interpolated values carry the full order of the method.

// tableau entries keep the digits they were published with
#![allow(clippy::excessive_precision)]

use crate::error::{Error, Result};

/// Right-hand side of `y' = f(t, y)`.
pub trait OdeSystem<const N: usize> {
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]);

    /// Absolute part of the error scale: component `i` is controlled to
    /// `tol * (floor[i] + |y_i|)`. A zero floor gives pure relative control,
    /// suitable for components that stay bounded away from zero.
    fn error_floor(&self) -> [f64; N] {
        [1.0; N]
    }
}

impl<F, const N: usize> OdeSystem<N> for F
where
    F: Fn(f64, &[f64; N], &mut [f64; N]),
{
    fn rhs(&self, t: f64, y: &[f64; N], dy: &mut [f64; N]) {
        self(t, y, dy)
    }
}

// Hairer, Norsett & Wanner coefficients for DOP853 (first 12 stages).
const C: [f64; 12] = [
    0.0,
    0.526001519587677318785587544488E-01,
    0.789002279381515978178381316732E-01,
    0.118350341907227396726757197510E+00,
    0.281649658092772603273242802490E+00,
    0.333333333333333333333333333333E+00,
    0.25E+00,
    0.307692307692307692307692307692E+00,
    0.651282051282051282051282051282E+00,
    0.6E+00,
    0.857142857142857142857142857142E+00,
    1.0,
];

const A: [[f64; 11]; 12] = [
    [0.0; 11],
    [5.26001519587677318785587544488E-2, 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [1.97250569845378994544595329183E-2, 5.91751709536136983633785987549E-2, 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [2.95875854768068491816892993775E-2, 0.0, 8.87627564304205475450678981324E-2, 0., 0., 0., 0., 0., 0., 0., 0.],
    [
        2.41365134159266685502369798665E-1,
        0.0,
        -8.84549479328286085344864962717E-1,
        9.24834003261792003115737966543E-1,
        0.,
        0.,
        0.,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        3.7037037037037037037037037037E-2,
        0.0,
        0.0,
        1.70828608729473871279604482173E-1,
        1.25467687566822425016691814123E-1,
        0.,
        0.,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        3.7109375E-2,
        0.0,
        0.0,
        1.70252211019544039314978060272E-1,
        6.02165389804559606850219397283E-2,
        -1.7578125E-2,
        0.,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        3.70920001185047927108779319836E-2,
        0.0,
        0.0,
        1.70383925712239993810214054705E-1,
        1.07262030446373284651809199168E-1,
        -1.53194377486244017527936158236E-2,
        8.27378916381402288758473766002E-3,
        0.,
        0.,
        0.,
        0.,
    ],
    [
        6.24110958716075717114429577812E-1,
        0.0,
        0.0,
        -3.36089262944694129406857109825E0,
        -8.68219346841726006818189891453E-1,
        2.75920996994467083049415600797E1,
        2.01540675504778934086186788979E1,
        -4.34898841810699588477366255144E1,
        0.,
        0.,
        0.,
    ],
    [
        4.77662536438264365890433908527E-1,
        0.0,
        0.0,
        -2.48811461997166764192642586468E0,
        -5.90290826836842996371446475743E-1,
        2.12300514481811942347288949897E1,
        1.52792336328824235832596922938E1,
        -3.32882109689848629194453265587E1,
        -2.03312017085086261358222928593E-2,
        0.,
        0.,
    ],
    [
        -9.3714243008598732571704021658E-1,
        0.0,
        0.0,
        5.18637242884406370830023853209E0,
        1.09143734899672957818500254654E0,
        -8.14978701074692612513997267357E0,
        -1.85200656599969598641566180701E1,
        2.27394870993505042818970056734E1,
        2.49360555267965238987089396762E0,
        -3.0467644718982195003823669022E0,
        0.,
    ],
    [
        2.27331014751653820792359768449E0,
        0.0,
        0.0,
        -1.05344954667372501984066689879E1,
        -2.00087205822486249909675718444E0,
        -1.79589318631187989172765950534E1,
        2.79488845294199600508499808837E1,
        -2.85899827713502369474065508674E0,
        -8.87285693353062954433549289258E0,
        1.23605671757943030647266201528E1,
        6.43392746015763530355970484046E-1,
    ],
];

const B: [f64; 12] = [
    5.42937341165687622380535766363E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566E0,
    1.89151789931450038304281599044E0,
    -5.8012039600105847814672114227E0,
    3.1116436695781989440891606237E-1,
    -1.52160949662516078556178806805E-1,
    2.01365400804030348374776537501E-1,
    4.47106157277725905176885569043E-2,
];

// 5th-order error weights.
const E5: [f64; 12] = [
    0.1312004499419488073250102996E-01,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753E+01,
    -0.4957589496572501915214079952E+00,
    0.1664377182454986536961530415E+01,
    -0.3503288487499736816886487290E+00,
    0.3341791187130174790297318841E+00,
    0.8192320648511571246570742613E-01,
    -0.2235530786388629525884427845E-01,
];

// 3rd-order error weights on stages 1, 9 and 12.
const BHH: [f64; 3] =
    [0.244094488188976377952755905512E+00, 0.733846688281611857341361741547E+00, 0.220588235294117647058823529412E-01];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;
const MAX_STEPS: usize = 1_000_000;

/// Takes one DOP853 step of size `h` from `(t, y)` with `f0 = f(t, y)`.
/// Returns the new state and the scaled error norm (accept when `<= 1`).
fn dop853_step<S: OdeSystem<N> + ?Sized, const N: usize>(
    sys: &S,
    t: f64,
    y: &[f64; N],
    f0: &[f64; N],
    h: f64,
    tol: f64,
) -> ([f64; N], f64) {
    let mut k = [[0.0; N]; 12];
    k[0] = *f0;
    let mut stage = [0.0; N];
    for s in 1..12 {
        for i in 0..N {
            let mut acc = 0.0;
            for j in 0..s {
                acc += A[s][j] * k[j][i];
            }
            stage[i] = y[i] + h * acc;
        }
        sys.rhs(t + C[s] * h, &stage, &mut k[s]);
    }

    let floor = sys.error_floor();
    let mut y_new = [0.0; N];
    let mut err5 = 0.0;
    let mut err3 = 0.0;
    for i in 0..N {
        let mut slope = 0.0;
        let mut e5 = 0.0;
        for s in 0..12 {
            slope += B[s] * k[s][i];
            e5 += E5[s] * k[s][i];
        }
        y_new[i] = y[i] + h * slope;
        let e3 = slope - BHH[0] * k[0][i] - BHH[1] * k[8][i] - BHH[2] * k[11][i];
        let sc = tol * (floor[i] + y[i].abs().max(y_new[i].abs()));
        err5 += (e5 / sc).powi(2);
        err3 += (e3 / sc).powi(2);
    }
    let mut deno = err5 + 0.01 * err3;
    if deno <= 0.0 {
        deno = 1.0;
    }
    let err = h.abs() * err5 * (1.0 / (deno * N as f64)).sqrt();
    (y_new, err)
}

/// Advances the solution from a node `(t0, y0)` to `t` with a single step.
pub fn step_to<S: OdeSystem<N> + ?Sized, const N: usize>(sys: &S, t0: f64, y0: &[f64; N], t: f64) -> [f64; N] {
    if t == t0 {
        return *y0;
    }
    let mut f0 = [0.0; N];
    sys.rhs(t0, y0, &mut f0);
    dop853_step(sys, t0, y0, &f0, t - t0, 1.0).0
}

/// Adaptive stepper; each call to [`Stepper::advance`] performs one accepted step.
pub struct Stepper<'a, S: ?Sized, const N: usize> {
    sys: &'a S,
    t: f64,
    y: [f64; N],
    f: [f64; N],
    h: f64,
    tol: f64,
    facold: f64,
    steps: usize,
}

impl<'a, S: OdeSystem<N> + ?Sized, const N: usize> Stepper<'a, S, N> {
    pub fn new(sys: &'a S, t0: f64, y0: [f64; N], tol: f64) -> Self {
        let mut f = [0.0; N];
        sys.rhs(t0, &y0, &mut f);
        Self { sys, t: t0, y: y0, f, h: 0.0, tol, facold: 1e-4, steps: 0 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    fn initial_step(&self, direction: f64) -> f64 {
        let floor = self.sys.error_floor();
        let sc = |i: usize| self.tol * (floor[i] + self.y[i].abs());
        let d0 = (0..N).map(|i| (self.y[i] / sc(i)).powi(2)).sum::<f64>().sqrt();
        let d1 = (0..N).map(|i| (self.f[i] / sc(i)).powi(2)).sum::<f64>().sqrt();
        let h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
        let y1: [f64; N] = std::array::from_fn(|i| self.y[i] + direction * h0 * self.f[i]);
        let mut f1 = [0.0; N];
        self.sys.rhs(self.t + direction * h0, &y1, &mut f1);
        let d2 = (0..N).map(|i| ((f1[i] - self.f[i]) / sc(i)).powi(2)).sum::<f64>().sqrt() / h0;
        let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(1.0 / 8.0) };
        direction * (100.0 * h0).min(h1)
    }

    /// Takes one accepted step towards `t_end` without passing it.
    pub fn advance(&mut self, t_end: f64) -> Result<()> {
        let span = t_end - self.t;
        if span == 0.0 {
            return Ok(());
        }
        let direction = span.signum();
        if self.h == 0.0 {
            self.h = self.initial_step(direction);
        }
        let mut rejected = false;
        loop {
            self.steps += 1;
            if self.steps > MAX_STEPS {
                return Err(Error::IntegrationFailure { t: self.t, reason: format!("more than {MAX_STEPS} steps") });
            }
            let mut h = self.h;
            let last = (self.t + 1.01 * h - t_end) * direction >= 0.0;
            if last {
                h = t_end - self.t;
            }
            if h.abs() <= 10.0 * f64::EPSILON * self.t.abs().max(1.0) {
                return Err(Error::IntegrationFailure { t: self.t, reason: "step size underflow".into() });
            }
            let (y_new, err) = dop853_step(self.sys, self.t, &self.y, &self.f, h, self.tol);
            if !err.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                self.h = h * 0.1;
                rejected = true;
                continue;
            }
            let fac11 = err.powf(1.0 / 8.0);
            if err <= 1.0 {
                let fac = (fac11 / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                let mut h_new = h / fac;
                if rejected {
                    h_new = direction * h_new.abs().min(h.abs());
                }
                self.facold = err.max(1e-4);
                self.t = if last { t_end } else { self.t + h };
                self.y = y_new;
                self.sys.rhs(self.t, &self.y, &mut self.f);
                if !last || self.h == 0.0 {
                    self.h = h_new;
                }
                return Ok(());
            }
            self.h = h / (1.0 / FAC_MIN).min(fac11 / SAFETY);
            rejected = true;
        }
    }

    /// Integrates to `t_end`, returning the final state.
    pub fn run_to(&mut self, t_end: f64) -> Result<[f64; N]> {
        while self.t != t_end {
            self.advance(t_end)?;
        }
        Ok(self.y)
    }
}

/// Accepted integration nodes with full-order dense evaluation between them.
#[derive(Debug, Clone)]
pub struct Trajectory<const N: usize> {
    times: Vec<f64>,
    states: Vec<[f64; N]>,
}

impl<const N: usize> Trajectory<N> {
    pub fn single(t0: f64, y0: [f64; N]) -> Self {
        Self { times: vec![t0], states: vec![y0] }
    }

    pub fn push(&mut self, t: f64, y: [f64; N]) {
        self.times.push(t);
        self.states.push(y);
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[[f64; N]] {
        &self.states
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one node")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State at `t`, which must lie within `[t_start, t_end]` (clamped otherwise).
    pub fn eval<S: OdeSystem<N> + ?Sized>(&self, sys: &S, t: f64) -> [f64; N] {
        let t = t.clamp(self.t_start(), self.t_end());
        let idx = match self.times.binary_search_by(|probe| probe.total_cmp(&t)) {
            Ok(i) => return self.states[i],
            Err(i) => i.saturating_sub(1),
        };
        step_to(sys, self.times[idx], &self.states[idx], t)
    }

    /// Integrates `sys` from `(t0, y0)` to `t_end`, recording every accepted node.
    /// `check` is called on each accepted state and may abort the integration.
    pub fn integrate<S, F>(sys: &S, t0: f64, y0: [f64; N], t_end: f64, tol: f64, mut check: F) -> Result<Self>
    where
        S: OdeSystem<N> + ?Sized,
        F: FnMut(f64, &[f64; N]) -> Result<()>,
    {
        let mut traj = Self::single(t0, y0);
        let mut stepper = Stepper::new(sys, t0, y0, tol);
        while stepper.t() != t_end {
            stepper.advance(t_end)?;
            check(stepper.t(), stepper.y())?;
            traj.push(stepper.t(), *stepper.y());
        }
        Ok(traj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_one_period() {
        let sys = |_t: f64, y: &[f64; 2], dy: &mut [f64; 2]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let two_pi = 2.0 * std::f64::consts::PI;
        let y = Stepper::new(&sys, 0.0, [1.0, 0.0], 1e-12).run_to(two_pi).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-11, "{y:?}");
        assert!(y[1].abs() < 1e-11, "{y:?}");
    }

    #[test]
    fn non_autonomous_quadrature() {
        // y' = cos t  =>  y = sin t
        let sys = |t: f64, _y: &[f64; 1], dy: &mut [f64; 1]| dy[0] = t.cos();
        let y = Stepper::new(&sys, 0.0, [0.0], 1e-12).run_to(3.0).unwrap();
        assert!((y[0] - 3.0f64.sin()).abs() < 1e-12);
    }

    #[test]
    fn dense_output_matches_exact_solution() {
        let sys = |_t: f64, y: &[f64; 1], dy: &mut [f64; 1]| dy[0] = -y[0];
        let traj = Trajectory::integrate(&sys, 0.0, [1.0], 5.0, 1e-10, |_, _| Ok(())).unwrap();
        assert!(traj.len() > 2);
        for i in 0..=100 {
            let t = 0.05 * i as f64;
            let y = traj.eval(&sys, t);
            assert!((y[0] - (-t).exp()).abs() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn backward_integration() {
        let sys = |_t: f64, y: &[f64; 1], dy: &mut [f64; 1]| dy[0] = y[0];
        let y = Stepper::new(&sys, 1.0, [1.0], 1e-12).run_to(0.0).unwrap();
        assert!((y[0] - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn check_callback_aborts() {
        let sys = |_t: f64, y: &[f64; 1], dy: &mut [f64; 1]| dy[0] = y[0];
        let res = Trajectory::integrate(&sys, 0.0, [1.0], 10.0, 1e-8, |t, y| {
            if y[0] > 10.0 {
                Err(Error::DomainExit { t, r: y[0] })
            } else {
                Ok(())
            }
        });
        assert!(matches!(res, Err(Error::DomainExit { .. })));
    }
}
