//! Run configuration: a single JSON document, validated into core types.

use std::path::PathBuf;

use dtn_core::dtn::{
    BoundaryData, DecayingProfile, DtnProblem, DtnTolerances, ExpPoly, GaussianPacket, ManufacturedSolution,
    Polynomial,
};
use dtn_core::{BoundaryCurve, TimeGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Smallest accepted grid.
pub const MIN_INTERVALS: usize = 16;

/// A complex number, written either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Pair([f64; 2]),
}

impl Scalar {
    pub fn value(self) -> Complex64 {
        match self {
            Scalar::Real(x) => Complex64::new(x, 0.0),
            Scalar::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

fn complex(v: &[Scalar]) -> Vec<Complex64> {
    v.iter().map(|s| s.value()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CurveSpec {
    /// `l(t) = Σ c_j t^j` with `c_0 = 0`.
    Polynomial { coeffs: Vec<f64> },
    /// Samples `(t_i, l(t_i))`, interpolated by a cubic spline; the last node is `T`.
    Tabulated { nodes: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub intervals: usize,
    /// `t_n = T (n/N)^grading`.
    #[serde(default = "unit")]
    pub grading: f64,
}

fn unit() -> f64 {
    1.0
}

/// Symbolic data families. Each is usable both as Dirichlet data in `t` and as an
/// initial profile in `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DataSpec {
    Polynomial {
        coeffs: Vec<Scalar>,
    },
    /// `p(x) e^{-rate x}`.
    ExpPoly {
        coeffs: Vec<Scalar>,
        rate: Scalar,
    },
    /// `A exp(-(x - c)²/(4σ))`.
    Gaussian {
        amplitude: Scalar,
        center: f64,
        sigma: Scalar,
    },
    /// `A exp(-(x - c)²/(4σ)) e^{ibx}`.
    BoostedGaussian {
        amplitude: Scalar,
        center: f64,
        sigma: Scalar,
        boost: f64,
    },
    /// Exact wave packet with width `t0`; supplies both data sets and the exact trace.
    Manufactured {
        t0: f64,
        shift: f64,
        boost: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Solve,
    Verify,
    KernelDump,
    Residual,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Solve => "solve",
            Mode::Verify => "verify",
            Mode::KernelDump => "kernel-dump",
            Mode::Residual => "residual",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub curve: CurveSpec,
    pub final_time: f64,
    pub grid: GridSpec,
    pub dirichlet: DataSpec,
    pub initial: DataSpec,
    #[serde(default)]
    pub tolerances: Option<TolerancesSpec>,
    /// Spectral points for the global-relation residual; `Im k <= 0`.
    #[serde(default)]
    pub ks: Vec<Scalar>,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolerancesSpec {
    pub quad_tol: f64,
    pub tail_tol: f64,
}

/// Spectral points used when the config lists none.
pub fn default_ks() -> Vec<Complex64> {
    vec![
        Complex64::new(-1.0, 0.0),
        Complex64::new(-3.0, -1.0),
        Complex64::new(2.0, -2.0),
        Complex64::new(5.0, -0.5),
    ]
}

/// A validated configuration.
pub struct Run {
    pub curve: BoundaryCurve,
    pub grid: TimeGrid,
    pub tolerances: DtnTolerances,
    pub problem: DtnProblem,
    pub manufactured: Option<ManufacturedSolution>,
    pub ks: Vec<Complex64>,
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn boundary(spec: &DataSpec) -> Box<dyn BoundaryData> {
    match spec {
        DataSpec::Polynomial { coeffs } => Box::new(Polynomial::new(complex(coeffs))),
        DataSpec::ExpPoly { coeffs, rate } => Box::new(ExpPoly {
            poly: Polynomial::new(complex(coeffs)),
            rate: rate.value(),
        }),
        DataSpec::Gaussian { .. } | DataSpec::BoostedGaussian { .. } => Box::new(packet(spec)),
        DataSpec::Manufactured { .. } => unreachable!("handled by the caller"),
    }
}

fn profile(spec: &DataSpec) -> Box<dyn DecayingProfile> {
    match spec {
        DataSpec::Polynomial { coeffs } => Box::new(Polynomial::new(complex(coeffs))),
        DataSpec::ExpPoly { coeffs, rate } => Box::new(ExpPoly {
            poly: Polynomial::new(complex(coeffs)),
            rate: rate.value(),
        }),
        DataSpec::Gaussian { .. } | DataSpec::BoostedGaussian { .. } => Box::new(packet(spec)),
        DataSpec::Manufactured { .. } => unreachable!("handled by the caller"),
    }
}

fn packet(spec: &DataSpec) -> GaussianPacket {
    match *spec {
        DataSpec::Gaussian {
            amplitude,
            center,
            sigma,
        } => GaussianPacket {
            amplitude: amplitude.value(),
            center,
            sigma: sigma.value(),
            boost: 0.0,
        },
        DataSpec::BoostedGaussian {
            amplitude,
            center,
            sigma,
            boost,
        } => GaussianPacket {
            amplitude: amplitude.value(),
            center,
            sigma: sigma.value(),
            boost,
        },
        _ => unreachable!(),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| bad(format!("invalid config: {e}")))
    }

    pub fn validate(&self) -> Result<Run, CliError> {
        let curve = match &self.curve {
            CurveSpec::Polynomial { coeffs } => BoundaryCurve::polynomial(coeffs.clone(), self.final_time)?,
            CurveSpec::Tabulated { nodes, values } => {
                let c = BoundaryCurve::tabulated(nodes.clone(), values.clone())?;
                if c.final_time() != self.final_time {
                    return Err(bad(format!(
                        "final_time {} differs from the last tabulated node {}",
                        self.final_time,
                        c.final_time()
                    )));
                }
                c
            }
        };
        if self.grid.intervals < MIN_INTERVALS {
            return Err(bad(format!(
                "grid.intervals must be at least {MIN_INTERVALS}, got {}",
                self.grid.intervals
            )));
        }
        let grid = TimeGrid::graded(self.final_time, self.grid.intervals, self.grid.grading)?;
        let tolerances = match self.tolerances {
            Some(t) => DtnTolerances {
                quad_tol: t.quad_tol,
                tail_tol: t.tail_tol,
            },
            None => DtnTolerances::default(),
        };
        if !(tolerances.quad_tol > 0.0 && tolerances.tail_tol > 0.0) {
            return Err(bad("tolerances must be positive"));
        }
        let ks: Vec<Complex64> = if self.ks.is_empty() {
            default_ks()
        } else {
            self.ks.iter().map(|s| s.value()).collect()
        };
        if let Some(k) = ks.iter().find(|k| k.im > 0.0 || k.norm() == 0.0) {
            return Err(bad(format!(
                "spectral point {k} must satisfy Im k <= 0 and k != 0"
            )));
        }
        let (problem, manufactured) = match (&self.dirichlet, &self.initial) {
            (
                DataSpec::Manufactured { t0, shift, boost },
                DataSpec::Manufactured {
                    t0: t1,
                    shift: s1,
                    boost: b1,
                },
            ) => {
                if (t0, shift, boost) != (t1, s1, b1) {
                    return Err(bad(
                        "manufactured dirichlet and initial data must share parameters",
                    ));
                }
                let sol = ManufacturedSolution::new(*t0, *shift, *boost)?;
                (sol.problem(&curve, tolerances)?, Some(sol))
            }
            (DataSpec::Manufactured { .. }, _) | (_, DataSpec::Manufactured { .. }) => {
                return Err(bad(
                    "manufactured data must be used for both dirichlet and initial",
                ));
            }
            (d, i) => (
                DtnProblem::new(curve.clone(), boundary(d), profile(i), tolerances)?,
                None,
            ),
        };
        Ok(Run {
            curve,
            grid,
            tolerances,
            problem,
            manufactured,
            ks,
        })
    }
}
