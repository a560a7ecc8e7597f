//! Second-kind Volterra equations
//! `f(t) = g(t) + λ ∫₀ᵗ j(s,t) w(t-s) f(s) ds` by product-integration marching.
//!
//! The discrete system is lower triangular, so each node costs one division and the
//! whole solve is a single pass. No iteration, no filtering.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{ComplexSignal, TimeGrid};
use crate::kernel::KernelMatrix;
use crate::quad::{weight_table, AbelWeightTable, Singularity};

/// Smallest admissible `|1 - λ w_nn j_nn|`.
pub const MIN_DIAGONAL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct VolterraProblem {
    forcing: ComplexSignal,
    kernel: KernelMatrix,
    scale: Complex64,
    singularity: Singularity,
}

impl VolterraProblem {
    /// Abel-type problem: weight `(t-s)^{-1/2}` and memory scale `λ`.
    pub fn new(forcing: ComplexSignal, kernel: KernelMatrix, scale: Complex64) -> Result<Self> {
        Self::with_singularity(forcing, kernel, scale, Singularity::InverseSqrt)
    }

    pub fn with_singularity(
        forcing: ComplexSignal,
        kernel: KernelMatrix,
        scale: Complex64,
        singularity: Singularity,
    ) -> Result<Self> {
        if forcing.len() != kernel.grid().len() {
            return Err(Error::GridError(format!(
                "forcing has {} samples but the kernel grid has {} nodes",
                forcing.len(),
                kernel.grid().len()
            )));
        }
        if forcing.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::DomainError("forcing contains non-finite values".into()));
        }
        Ok(Self {
            forcing,
            kernel,
            scale,
            singularity,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.kernel.grid()
    }

    pub fn forcing(&self) -> &ComplexSignal {
        &self.forcing
    }

    pub fn kernel(&self) -> &KernelMatrix {
        &self.kernel
    }

    pub fn scale(&self) -> Complex64 {
        self.scale
    }

    pub fn singularity(&self) -> Singularity {
        self.singularity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolterraSolution {
    pub grid: TimeGrid,
    pub values: ComplexSignal,
    /// `max_n |f_n - g_n - λ Σ_m W_nm j_nm f_m|` of the discrete system.
    pub residual_norm: f64,
}

/// Discrete memory term `λ Σ_{m <= upto} W_nm j_nm f_m` for row `n`.
fn memory(
    weights: &AbelWeightTable,
    kernel: &KernelMatrix,
    scale: Complex64,
    n: usize,
    upto: usize,
    f: &[Complex64],
) -> Complex64 {
    let w = weights.row(n);
    let j = kernel.row(n);
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 0..upto {
        acc += j[m] * f[m] * w[m];
    }
    acc * scale
}

pub fn solve_volterra(problem: &VolterraProblem) -> Result<VolterraSolution> {
    let grid = problem.grid();
    let weights = weight_table(grid, problem.singularity);
    let kernel = &problem.kernel;
    let g = &problem.forcing;
    let lam = problem.scale;
    let n_nodes = grid.len();
    let mut f = vec![Complex64::new(0.0, 0.0); n_nodes];
    // The memory integral vanishes at t = 0.
    f[0] = g[0];
    for n in 1..n_nodes {
        let rhs = g[n] + memory(&weights, kernel, lam, n, n, &f);
        let factor = Complex64::new(1.0, 0.0) - lam * kernel.get(n, n) * weights.row(n)[n];
        if factor.norm() < MIN_DIAGONAL {
            return Err(Error::SingularStep {
                step: n,
                factor: factor.norm(),
            });
        }
        f[n] = rhs / factor;
    }
    let residual_norm = (0..n_nodes)
        .map(|n| (f[n] - g[n] - memory(&weights, kernel, lam, n, n + 1, &f)).norm())
        .fold(0.0, f64::max);
    Ok(VolterraSolution {
        grid: grid.clone(),
        values: ComplexSignal::new(f),
        residual_norm,
    })
}

/// Errors of a refinement sequence and the orders they imply.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub intervals: Vec<usize>,
    pub errors: Vec<f64>,
    /// Order between consecutive refinements, `log(e_i/e_{i+1}) / log(N_{i+1}/N_i)`.
    pub pairwise: Vec<f64>,
    /// Least-squares slope of `-log e` against `log N`.
    pub fitted: f64,
    /// All errors sit at roundoff level, so no order is measurable.
    pub saturated: bool,
}

impl ConvergenceStudy {
    /// The fitted order, or infinity for a saturated study.
    pub fn order(&self) -> f64 {
        if self.saturated {
            f64::INFINITY
        } else {
            self.fitted
        }
    }
}

/// Errors at or below this are treated as roundoff.
pub const SATURATION_LEVEL: f64 = 1e-13;

/// Runs `error_at(N)` for each `N` and summarises the observed order.
pub fn estimate_order<F>(intervals: &[usize], mut error_at: F) -> Result<ConvergenceStudy>
where
    F: FnMut(usize) -> Result<f64>,
{
    if intervals.len() < 2 {
        return Err(Error::GridError(
            "an order estimate needs at least two refinements".into(),
        ));
    }
    let errors = intervals
        .iter()
        .map(|&n| error_at(n))
        .collect::<Result<Vec<f64>>>()?;
    let saturated = errors.iter().all(|e| *e <= SATURATION_LEVEL);
    let pairwise = errors
        .windows(2)
        .zip(intervals.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect();
    let xs: Vec<f64> = intervals.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| -e.max(f64::MIN_POSITIVE).ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(ConvergenceStudy {
        intervals: intervals.to_vec(),
        errors,
        pairwise,
        fitted: sxy / sxx,
        saturated,
    })
}
