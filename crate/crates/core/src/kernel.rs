//! Closed-form kernels of the moving-boundary Volterra equation.
//!
//! The memory kernel is
//!
//! ```text
//! J(s,t) = (m/2) { ∫_{l'(s)/2}^∞ e^{ik²(s-t) - ik(l(s)-l(t))} dk
//!                  - i G(s,t) ∫₀^∞ e^{-ik²(s-t) - k(s-t)[l'(s) - m]} dk }
//! ```
//!
//! with `m = (l(t) - l(s))/(t - s)` the chord slope. Both integrals have closed forms
//! through the Faddeeva function, and both scale like `(t - s)^{-1/2}`; the solver works
//! with `j = √(t-s) J`, which is smooth up to and including the diagonal.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::curve::BoundaryCurve;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quad::{damped_oscillatory_integral, DampedOscillatoryRule};
use crate::specfun::{cis, faddeeva, fresnel_tail, sqrt_pi};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Constants of the Volterra equation `f₁ = g + c_J ∫ J f₁`, with forcing
/// `g(t) = c_b ∫₀ᵗ e^{iΦ} f₀'(s) ds/√(t-s) + c_q t^{-1/2} ∫₀^∞ e^{i(l(t)-x)²/(4t)} q₀'(x) dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalisation {
    /// `c_J = 1/π`, `c_b = -e^{-iπ/4}/√π`, `c_q = e^{-iπ/4}/√π`. The point mass that
    /// the contour `∂Ω₂⁻(t)` picks up at `s = t` is `π f(t)`, and the contour runs
    /// opposite to the real line once deformed. These constants reproduce exact
    /// solutions.
    Contour,
    /// `c_J = 2/(3π)`, `c_b = c_q = 2e^{-iπ/4}/(3√π)`: a point mass of `3π/2` and no
    /// orientation sign. Kept so the discrepancy stays measurable; it leaves an O(1)
    /// residual on exact traces.
    TwoThirds,
}

impl Normalisation {
    pub fn memory_weight(self) -> f64 {
        match self {
            Self::Contour => FRAC_1_PI,
            Self::TwoThirds => 2.0 / 3.0 * FRAC_1_PI,
        }
    }

    pub fn boundary_coefficient(self) -> Complex64 {
        match self {
            Self::Contour => -cis(-PI / 4.0) / sqrt_pi(),
            Self::TwoThirds => cis(-PI / 4.0) * (2.0 / (3.0 * sqrt_pi())),
        }
    }

    pub fn initial_coefficient(self) -> Complex64 {
        match self {
            Self::Contour => cis(-PI / 4.0) / sqrt_pi(),
            Self::TwoThirds => cis(-PI / 4.0) * (2.0 / (3.0 * sqrt_pi())),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Contour => "contour",
            Self::TwoThirds => "two-thirds",
        }
    }
}

/// Geometry of the pair `s <= t`, with every sign fixed in one place.
///
/// Writing `a = t - s > 0` and `m` for the chord slope:
/// - first exponent: `ik²(s-t) - ik(l(s)-l(t)) = -iak² + iamk`
/// - second exponent: `-ik²(s-t) - k(s-t)[l'(s) - m] = iak² - bk` with `b = a(m - l'(s)) >= 0`
/// - `λ₀ = √a (l'(s) - m)/2 = -β/2` where `β = b/√a`
/// - `Φ = (l(t)-l(s))²/(4a) = am²/4`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub a: f64,
    pub slope: f64,
    pub lp_s: f64,
    pub lp_t: f64,
}

impl Chord {
    pub fn phi(&self) -> f64 {
        0.25 * self.a * self.slope * self.slope
    }

    /// `β = √a (m - l'(s)) >= 0`.
    pub fn beta(&self) -> f64 {
        self.a.sqrt() * (self.slope - self.lp_s)
    }

    pub fn lambda0(&self) -> f64 {
        0.5 * self.a.sqrt() * (self.lp_s - self.slope)
    }

    /// `√a (l'(t) - m)/2 >= 0`.
    pub fn upper_offset(&self) -> f64 {
        0.5 * self.a.sqrt() * (self.lp_t - self.slope)
    }
}

/// Kernel evaluators bound to one curve.
#[derive(Debug, Clone)]
pub struct KernelContext {
    curve: BoundaryCurve,
    normalisation: Normalisation,
}

impl KernelContext {
    pub fn new(curve: BoundaryCurve) -> Self {
        Self::with_normalisation(curve, Normalisation::Contour)
    }

    pub fn with_normalisation(curve: BoundaryCurve, normalisation: Normalisation) -> Self {
        Self { curve, normalisation }
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn normalisation(&self) -> Normalisation {
        self.normalisation
    }

    pub fn chord(&self, s: f64, t: f64) -> Chord {
        Chord {
            a: t - s,
            slope: self.curve.chord_slope(s, t),
            lp_s: self.curve.l_prime(s),
            lp_t: self.curve.l_prime(t),
        }
    }

    /// `E(k,s,t) = e^{ik²(s-t) - ik(l(s)-l(t))}`.
    pub fn e(&self, k: Complex64, s: f64, t: f64) -> Complex64 {
        let dl = self.curve.l(s) - self.curve.l(t);
        (I * k * k * (s - t) - I * k * dl).exp()
    }

    /// `G(s,t) = e^{i l'(s)²(s-t)/4 - i l'(s)(l(s)-l(t))/2}`, unimodular.
    pub fn g(&self, s: f64, t: f64) -> Complex64 {
        let lp = self.curve.l_prime(s);
        let dl = self.curve.l(s) - self.curve.l(t);
        cis(0.25 * lp * lp * (s - t) - 0.5 * lp * dl)
    }

    /// `λ₀(s,t) = √(t-s)[l'(s)/2 - (l(s)-l(t))/(2(s-t))]`, never positive for convex `l`.
    pub fn lambda0(&self, s: f64, t: f64) -> Result<f64> {
        degenerate_if_equal(s, t)?;
        Ok(self.chord(s, t).lambda0())
    }

    /// `a(t,s) = √(t-s)[l'(t) - (l(t)-l(s))/(t-s)]/2 >= 0`.
    pub fn a_offset(&self, s: f64, t: f64) -> f64 {
        self.chord(s, t).upper_offset()
    }

    /// `b(t,x) = √t[l'(t) - (l(t)-x)/t]/2 >= 0` for `x >= 0`.
    pub fn b_offset(&self, t: f64, x: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::DegenerateScale(format!("b(t,x) needs t > 0, got {t}")));
        }
        Ok(0.5 * t.sqrt() * (self.curve.l_prime(t) - (self.curve.l(t) - x) / t))
    }

    /// Exponent of the second integral in `J`, `-ik²(s-t) - k(s-t)[l'(s) - m]`.
    pub fn second_exponent(&self, k: f64, s: f64, t: f64) -> Complex64 {
        let c = self.chord(s, t);
        Complex64::new(-k * c.a * (c.slope - c.lp_s), k * k * c.a)
    }

    /// `j(t,t) = (l'(t)/2) √π e^{-iπ/4}`.
    pub fn j_diagonal(&self, t: f64) -> Complex64 {
        cis(-PI / 4.0) * (0.5 * self.curve.l_prime(t) * sqrt_pi())
    }

    /// `j(s,t) = √(t-s) J(s,t)`, continuous on `0 <= s <= t`.
    ///
    /// With `β = √(t-s)(m - l'(s))` the two integrals become
    /// `e^{iΦ} FresnelTail(-β/2)` and `(√π/2) e^{iπ/4} w(e^{3πi/4} β/2)`, neither of which
    /// needs `t - s` in a denominator.
    pub fn j_regularised(&self, s: f64, t: f64) -> Complex64 {
        if s >= t {
            return self.j_diagonal(t);
        }
        let c = self.chord(s, t);
        let beta = c.beta();
        let first = cis(c.phi()) * fresnel_tail(-0.5 * beta);
        let rot = Complex64::new(-std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2);
        let second = cis(PI / 4.0) * (0.5 * sqrt_pi()) * faddeeva(rot * (0.5 * beta));
        (first - I * self.g(s, t) * second) * (0.5 * c.slope)
    }

    /// `J(s,t)` in closed form, for `s < t`.
    pub fn j_closed(&self, s: f64, t: f64) -> Result<Complex64> {
        degenerate_if_equal(s, t)?;
        Ok(self.j_regularised(s, t) / (t - s).sqrt())
    }

    /// `J(s,t)` by damped quadrature of both integrals as written. Oracle only.
    ///
    /// Each integral is taken in the variable `u = √(t-s)(k - k₀)`, so that the damping
    /// `e^{-εu²}` acts on the same scale for every pair.
    pub fn j_direct(&self, s: f64, t: f64, rule: &DampedOscillatoryRule) -> Result<Complex64> {
        degenerate_if_equal(s, t)?;
        let c = self.chord(s, t);
        let ra = c.a.sqrt();
        let k0 = 0.5 * c.lp_s;
        let first = damped_oscillatory_integral(
            |_| Complex64::new(1.0, 0.0),
            |u| {
                let k = k0 + u / ra;
                -c.a * k * k + c.a * c.slope * k
            },
            rule,
        )? / ra;
        let beta = c.beta();
        let second =
            damped_oscillatory_integral(|u| Complex64::new((-beta * u).exp(), 0.0), |u| u * u, rule)? / ra;
        Ok((first - I * self.g(s, t) * second) * (0.5 * c.slope))
    }

    /// Kernel multiplying `f₀'(s)` in the forcing, `c_b e^{iΦ}/√(t-s)`.
    pub fn forcing_kernel_boundary(&self, s: f64, t: f64) -> Result<Complex64> {
        degenerate_if_equal(s, t)?;
        Ok(self.forcing_kernel_boundary_regularised(s, t) / (t - s).sqrt())
    }

    /// `√(t-s)` times [`Self::forcing_kernel_boundary`], i.e. `c_b e^{iΦ}`.
    pub fn forcing_kernel_boundary_regularised(&self, s: f64, t: f64) -> Complex64 {
        let phi = if s < t { self.chord(s, t).phi() } else { 0.0 };
        self.normalisation.boundary_coefficient() * cis(phi)
    }

    /// Kernel multiplying `q₀'(x)` in the forcing, `c_q e^{i(l(t)-x)²/(4t)}/√t`.
    pub fn forcing_kernel_initial(&self, t: f64, x: f64) -> Result<Complex64> {
        if !(t > 0.0) {
            return Err(Error::DegenerateScale(format!(
                "initial forcing kernel needs t > 0, got {t}"
            )));
        }
        let d = self.curve.l(t) - x;
        Ok(self.normalisation.initial_coefficient() * cis(d * d / (4.0 * t)) / t.sqrt())
    }
}

fn degenerate_if_equal(s: f64, t: f64) -> Result<()> {
    if s < t {
        Ok(())
    } else {
        Err(Error::DegenerateScale(format!(
            "kernel needs s < t, got s = {s}, t = {t}; use the diagonal limit"
        )))
    }
}

/// Regularised kernel `j(s_m, t_n)` for `m <= n` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    grid: TimeGrid,
    rows: Vec<Vec<Complex64>>,
}

impl KernelMatrix {
    /// Wraps precomputed rows; row `n` must have `n + 1` entries.
    pub fn from_rows(grid: TimeGrid, rows: Vec<Vec<Complex64>>) -> Result<Self> {
        if rows.len() != grid.len() || rows.iter().enumerate().any(|(n, r)| r.len() != n + 1) {
            return Err(Error::GridError(
                "kernel rows must form a lower triangle matching the grid".into(),
            ));
        }
        Ok(Self { grid, rows })
    }

    /// Kernel sampled from an arbitrary function `j(s, t)`.
    pub fn from_fn<F: Fn(f64, f64) -> Complex64>(grid: &TimeGrid, j: F) -> Self {
        let t = grid.nodes();
        let rows = (0..t.len())
            .map(|n| (0..=n).map(|m| j(t[m], t[n])).collect())
            .collect();
        Self {
            grid: grid.clone(),
            rows,
        }
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.rows[n]
    }

    pub fn get(&self, n: usize, m: usize) -> Complex64 {
        self.rows[n][m]
    }

    pub fn diag(&self) -> Vec<Complex64> {
        self.rows.iter().enumerate().map(|(n, r)| r[n]).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.rows.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `(n, m, s, t, j)` for every stored entry, row by row.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64, f64, Complex64)> + '_ {
        let t = self.grid.nodes();
        self.rows
            .iter()
            .enumerate()
            .flat_map(move |(n, r)| r.iter().enumerate().map(move |(m, v)| (n, m, t[m], t[n], *v)))
    }
}

/// Rows are independent and assembled in parallel.
pub fn assemble_kernel_matrix(grid: &TimeGrid, ctx: &KernelContext) -> KernelMatrix {
    let t = grid.nodes();
    let rows = (0..t.len())
        .into_par_iter()
        .map(|n| (0..=n).map(|m| ctx.j_regularised(t[m], t[n])).collect())
        .collect();
    KernelMatrix {
        grid: grid.clone(),
        rows,
    }
}
