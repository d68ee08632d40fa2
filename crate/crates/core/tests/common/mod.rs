#![allow(dead_code)]

use std::sync::{Arc, OnceLock};

use hillspec_core::profile::{default_c_bracket, solve_c_with, ProfileSolution, Tolerances, WindingTarget};

/// `c` quoted for the minimal (n, l, m) = (3, 2, 3) example.
#[allow(clippy::excessive_precision)]
pub const QUOTED_C: f64 = 2.8284247911397589;
pub const QUOTED_T: f64 = 2.6722005616;

pub const TIGHT: Tolerances = Tolerances { ode: 1e-12, root: 1e-12, c_solve: 1e-10 };

/// Closed profile with winding `l/m`, `c` solved at tight tolerances.
pub fn closed_profile(n: u32, h: f64, l: u32, m: u32) -> ProfileSolution {
    let target = WindingTarget::new(l, m).unwrap();
    let bracket = default_c_bracket(n, h).unwrap();
    let params = solve_c_with(n, h, target, bracket, TIGHT).unwrap();
    ProfileSolution::with_winding(params, target, TIGHT.ode, 1e-8).unwrap()
}

/// The minimal (3, 2, 3) example, shared across tests in one binary.
pub fn example() -> Arc<ProfileSolution> {
    static CELL: OnceLock<Arc<ProfileSolution>> = OnceLock::new();
    Arc::clone(CELL.get_or_init(|| Arc::new(closed_profile(3, 0.0, 2, 3))))
}

/// CMC example with H = 1/2 winding once around in two periods.
pub fn cmc_example() -> Arc<ProfileSolution> {
    static CELL: OnceLock<Arc<ProfileSolution>> = OnceLock::new();
    Arc::clone(CELL.get_or_init(|| Arc::new(closed_profile(3, 0.5, 1, 2))))
}
