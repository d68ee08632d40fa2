use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hillspec_core::profile::{Tolerances, WindingTarget, DEFAULT_C_TOL, DEFAULT_ODE_TOL, DEFAULT_ROOT_TOL};
use hillspec_core::spectrum::OperatorKind;

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "hillspec", version, about = "Spectra of rotational CMC hypersurfaces in spheres via Hill's equation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the profile curve; JSON summary or CSV trajectory.
    Profile {
        #[command(flatten)]
        common: CommonArgs,
        /// Trajectory samples over one closing period.
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        /// Also write the trajectory CSV to this path.
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Tabulate the Hill discriminant of one level on a lambda grid.
    Discriminant {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, value_parser = parse_operator)]
        operator: OperatorKind,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
    /// Assemble the spectrum of an operator up to a ceiling.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        range: RangeArgs,
        #[arg(long, value_parser = parse_operator)]
        operator: OperatorKind,
        /// Largest eigenvalue to report [default: 0 for jacobi, 2n for laplace].
        #[arg(long, allow_negative_numbers = true)]
        ceiling: Option<f64>,
        #[arg(long, default_value_t = hillspec_core::spectrum::DEFAULT_K_MAX)]
        k_max: u32,
    },
    /// Run the oracle, invariant and bound checks.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        range: RangeArgs,
        /// Sample points for oracle residuals.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
    },
}

fn parse_operator(s: &str) -> Result<OperatorKind, String> {
    s.parse().map_err(|e: hillspec_core::Error| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long = "H", default_value_t = 0.0)]
    pub h: f64,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, default_value_t = DEFAULT_ODE_TOL)]
    pub tol_ode: f64,
    #[arg(long, default_value_t = DEFAULT_ROOT_TOL)]
    pub tol_root: f64,
    #[arg(long, default_value_t = DEFAULT_C_TOL)]
    pub tol_c: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RangeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_max: Option<f64>,
    #[arg(long, default_value_t = hillspec_core::hill::DEFAULT_GRID_STEP)]
    pub lambda_step: f64,
}

/// How the profile is pinned down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileSpec {
    Direct { c: f64 },
    Closed { target: WindingTarget },
}

/// Validated settings shared by every command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n: u32,
    pub mean_curvature: f64,
    pub profile: ProfileSpec,
    pub tolerances: Tolerances,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs, default_format: Format) -> Result<Self, CliError> {
        let profile = match (args.c, args.l, args.m) {
            (Some(c), None, None) => {
                if !(c.is_finite() && c > 0.0) {
                    return Err(CliError::Validation(format!("--c must be a positive number, got {c}")));
                }
                ProfileSpec::Direct { c }
            }
            (None, Some(l), Some(m)) => ProfileSpec::Closed { target: WindingTarget::new(l, m)? },
            _ => return Err(CliError::Validation("give exactly one of --c or the pair --l/--m".into())),
        };
        let tolerances = Tolerances { ode: args.tol_ode, root: args.tol_root, c_solve: args.tol_c };
        for (name, value) in
            [("--tol-ode", tolerances.ode), ("--tol-root", tolerances.root), ("--tol-c", tolerances.c_solve)]
        {
            if !(value.is_finite() && value > 0.0) {
                return Err(CliError::Validation(format!("{name} must be positive, got {value}")));
            }
        }
        if !args.h.is_finite() {
            return Err(CliError::Validation(format!("--H must be finite, got {}", args.h)));
        }
        Ok(Self {
            n: args.n,
            mean_curvature: args.h,
            profile,
            tolerances,
            format: args.format.unwrap_or(default_format),
            out: args.out.clone(),
        })
    }

    /// Tolerance for Hill monodromy integrations, one decade tighter than the profile's.
    pub fn hill_tol(&self) -> f64 {
        0.1 * self.tolerances.ode
    }
}

/// A validated lambda grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaGrid {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl LambdaGrid {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self, CliError> {
        if !(step.is_finite() && step > 0.0) {
            return Err(CliError::Validation(format!("--lambda-step must be positive, got {step}")));
        }
        if !(min.is_finite() && max.is_finite()) || max < min {
            return Err(CliError::Validation(format!("need --lambda-min <= --lambda-max, got [{min}, {max}]")));
        }
        Ok(Self { min, max, step })
    }

    pub fn len(&self) -> usize {
        ((self.max - self.min) / self.step).round() as usize + 1
    }

    /// Grid points; the last one is `max` exactly.
    pub fn points(&self) -> Vec<f64> {
        let count = self.len();
        (0..count).map(|i| if i + 1 == count { self.max } else { self.min + i as f64 * self.step }).collect()
    }
}
