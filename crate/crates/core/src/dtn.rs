//! The Dirichlet-to-Neumann map for `iq_t + q_xx = 0` on `x > l(t)`.
//!
//! Given `q(x,0) = q₀(x)` and `q(l(t),t) = f₀(t)`, the Neumann value
//! `f₁(t) = q_x(l(t),t)` solves
//!
//! ```text
//! f₁(t) = g(t) + c_J ∫₀ᵗ J(s,t) f₁(s) ds,
//! g(t)  = c_b ∫₀ᵗ e^{iΦ(s,t)} f₀'(s) ds/√(t-s) + c_q t^{-1/2} ∫₀^∞ e^{i(l(t)-x)²/(4t)} q₀'(x) dx
//! ```
//!
//! with the constants of [`Normalisation`].

use std::f64::consts::PI;

use errorfunctions::RealErrorFunctions;
use num_complex::Complex64;

use crate::curve::BoundaryCurve;
use crate::error::{Error, Result};
use crate::grid::{ComplexSignal, TimeGrid};
use crate::kernel::{assemble_kernel_matrix, KernelContext, Normalisation};
use crate::quad::{
    abel_weights, damped_oscillatory_integral, integrate_adaptive, oscillation_breakpoints,
    truncated_decaying_oscillatory, DampedOscillatoryRule, DecayCertificate,
};
use crate::specfun::{cis, faddeeva, sqrt_pi};
use crate::volterra::{solve_volterra, VolterraProblem};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Dirichlet data `f₀(t)` with its derivative.
pub trait BoundaryData: Send + Sync {
    fn value(&self, t: f64) -> Complex64;
    fn derivative(&self, t: f64) -> Complex64;
}

/// Initial data `q₀(x)` on `x >= 0`, with its derivative and a decay bound on it.
pub trait DecayingProfile: Send + Sync {
    fn value(&self, x: f64) -> Complex64;
    fn derivative(&self, x: f64) -> Complex64;
    /// Pointwise bound on `|derivative|`; `None` when the profile does not decay.
    fn envelope(&self) -> Option<Envelope>;
}

/// Upper bounds for `|q₀'(x)|`.
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    Zero,
    /// `amplitude (constant + linear |x - center|) exp(-(x - center)²/(4 width))`.
    Gaussian {
        amplitude: f64,
        center: f64,
        width: f64,
        constant: f64,
        linear: f64,
    },
    /// `Σ_j coeffs[j] x^j e^{-rate x}` for `x >= 0`.
    Exponential {
        coeffs: Vec<f64>,
        rate: f64,
    },
    Sum(Vec<Envelope>),
}

impl Envelope {
    pub fn bound(&self, x: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Gaussian {
                amplitude,
                center,
                width,
                constant,
                linear,
            } => {
                let u = x - center;
                amplitude * (constant + linear * u.abs()) * (-u * u / (4.0 * width)).exp()
            }
            Self::Exponential { coeffs, rate } => {
                let x = x.max(0.0);
                coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c) * (-rate * x).exp()
            }
            Self::Sum(parts) => parts.iter().map(|e| e.bound(x)).sum(),
        }
    }

    /// Upper bound on `∫_from^∞ bound(x) dx`.
    pub fn tail_mass(&self, from: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Gaussian {
                amplitude,
                center,
                width,
                constant,
                linear,
            } => {
                let rw = width.sqrt();
                let half = |u0: f64| {
                    constant * (PI * width).sqrt() * RealErrorFunctions::erfc(u0 / (2.0 * rw))
                        + linear * 2.0 * width * (-u0 * u0 / (4.0 * width)).exp()
                };
                let u0 = from - center;
                if u0 >= 0.0 {
                    amplitude * half(u0)
                } else {
                    2.0 * amplitude * half(0.0)
                }
            }
            Self::Exponential { coeffs, rate } => {
                let m = from.max(0.0);
                // ∫_m^∞ x^j e^{-αx} dx = e^{-αm} Σ_{i<=j} j!/i! m^i / α^{j-i+1}
                let mut total = 0.0;
                for (j, c) in coeffs.iter().enumerate() {
                    let mut term = 1.0 / rate; // i = j
                    let mut sum = 0.0;
                    for i in (0..=j).rev() {
                        sum += term * m.powi(i as i32);
                        term *= i as f64 / rate;
                    }
                    total += c * sum;
                }
                total * (-rate * m).exp()
            }
            Self::Sum(parts) => parts.iter().map(|e| e.tail_mass(from)).sum(),
        }
    }

    /// A point `M >= from` beyond which the tail mass is at most `tol`.
    pub fn cutoff(&self, from: f64, tol: f64) -> f64 {
        if self.tail_mass(from) <= tol {
            return from;
        }
        let mut step = 1.0;
        let mut hi = from + step;
        while self.tail_mass(hi) > tol {
            step *= 2.0;
            hi = from + step;
            if step > 1e12 {
                return f64::INFINITY;
            }
        }
        let mut lo = from;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.tail_mass(mid) > tol {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// `Σ_j c_j t^j` with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
    }

    pub fn derivative_poly(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, c)| c * j as f64)
                .collect(),
        )
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }
}

impl BoundaryData for Polynomial {
    fn value(&self, t: f64) -> Complex64 {
        self.eval(t)
    }
    fn derivative(&self, t: f64) -> Complex64 {
        self.derivative_poly().eval(t)
    }
}

impl DecayingProfile for Polynomial {
    fn value(&self, x: f64) -> Complex64 {
        self.eval(x)
    }
    fn derivative(&self, x: f64) -> Complex64 {
        self.derivative_poly().eval(x)
    }
    /// Only the zero polynomial decays; a constant has zero derivative but is not
    /// integrable against the global relation either, so it is rejected too.
    fn envelope(&self) -> Option<Envelope> {
        self.is_zero().then_some(Envelope::Zero)
    }
}

/// `p(x) e^{-αx}` with complex `α`, `Re α > 0` for decay.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpPoly {
    pub poly: Polynomial,
    pub rate: Complex64,
}

impl ExpPoly {
    fn eval(&self, x: f64) -> Complex64 {
        self.poly.eval(x) * (-self.rate * x).exp()
    }
    fn deriv(&self, x: f64) -> Complex64 {
        (self.poly.derivative_poly().eval(x) - self.rate * self.poly.eval(x)) * (-self.rate * x).exp()
    }
}

impl BoundaryData for ExpPoly {
    fn value(&self, t: f64) -> Complex64 {
        self.eval(t)
    }
    fn derivative(&self, t: f64) -> Complex64 {
        self.deriv(t)
    }
}

impl DecayingProfile for ExpPoly {
    fn value(&self, x: f64) -> Complex64 {
        self.eval(x)
    }
    fn derivative(&self, x: f64) -> Complex64 {
        self.deriv(x)
    }
    fn envelope(&self) -> Option<Envelope> {
        if self.poly.is_zero() {
            return Some(Envelope::Zero);
        }
        if !(self.rate.re > 0.0) {
            return None;
        }
        // |p' - αp| <= Σ (|p'_j| + |α||p_j|) x^j on x >= 0
        let dp = self.poly.derivative_poly();
        let ra = self.rate.norm();
        let coeffs = (0..self.poly.coeffs.len())
            .map(|j| dp.coeffs.get(j).map_or(0.0, |c| c.norm()) + ra * self.poly.coeffs[j].norm())
            .collect();
        Some(Envelope::Exponential {
            coeffs,
            rate: self.rate.re,
        })
    }
}

/// `A exp(-(x - c)²/(4σ)) e^{ibx}` with complex `σ`, `Re(1/σ) > 0`.
///
/// With real `σ` and `b = 0` this is the plain Gaussian family; the manufactured
/// solution restricted to a fixed time is of this form with `σ = t0 + it`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    pub amplitude: Complex64,
    pub center: f64,
    pub sigma: Complex64,
    pub boost: f64,
}

impl GaussianPacket {
    pub fn eval(&self, x: f64) -> Complex64 {
        let u = x - self.center;
        self.amplitude * (-(u * u) / (4.0 * self.sigma) + I * (self.boost * x)).exp()
    }

    pub fn deriv(&self, x: f64) -> Complex64 {
        let u = x - self.center;
        self.eval(x) * (-u / (2.0 * self.sigma) + I * self.boost)
    }

    /// `∫_L^∞ e^{-ik(x-L)} q(x) dx` in closed form, `Im k <= 0`.
    ///
    /// Completing the square leaves `(√π/(2√α)) e^{ζ²} erfc(ζ)` with `α = 1/(4σ)`,
    /// evaluated through `w` on whichever side keeps its argument in the upper half-plane.
    pub fn half_line_transform(&self, from: f64, k: Complex64) -> Complex64 {
        let alpha = 1.0 / (4.0 * self.sigma);
        let ra = alpha.sqrt();
        let d = from - self.center;
        let kappa = self.boost - k;
        let zeta = ra * (d - I * kappa / (2.0 * alpha));
        let gauss = (-alpha * d * d).exp();
        // e^{ζ²} erfc(ζ) = w(iζ)
        let scaled = if zeta.re >= 0.0 {
            faddeeva(I * zeta) * gauss
        } else {
            // e^{ζ² - αd²} = e^{-iκd - κ²/(4α)}
            2.0 * (-I * kappa * d - kappa * kappa / (4.0 * alpha)).exp() - faddeeva(-I * zeta) * gauss
        };
        self.amplitude * cis(self.boost * from) * sqrt_pi() / (2.0 * ra) * scaled
    }

    pub fn gradient_envelope(&self) -> Envelope {
        if self.amplitude.norm() == 0.0 {
            return Envelope::Zero;
        }
        Envelope::Gaussian {
            amplitude: self.amplitude.norm(),
            center: self.center,
            width: 1.0 / (1.0 / self.sigma).re,
            constant: self.boost.abs(),
            linear: 1.0 / (2.0 * self.sigma.norm()),
        }
    }
}

impl BoundaryData for GaussianPacket {
    fn value(&self, t: f64) -> Complex64 {
        self.eval(t)
    }
    fn derivative(&self, t: f64) -> Complex64 {
        self.deriv(t)
    }
}

impl DecayingProfile for GaussianPacket {
    fn value(&self, x: f64) -> Complex64 {
        self.eval(x)
    }
    fn derivative(&self, x: f64) -> Complex64 {
        self.deriv(x)
    }
    fn envelope(&self) -> Option<Envelope> {
        ((1.0 / self.sigma).re > 0.0).then(|| self.gradient_envelope())
    }
}

/// Sum of boundary data.
pub struct SumBoundary(pub Vec<Box<dyn BoundaryData>>);

impl BoundaryData for SumBoundary {
    fn value(&self, t: f64) -> Complex64 {
        self.0.iter().map(|d| d.value(t)).sum()
    }
    fn derivative(&self, t: f64) -> Complex64 {
        self.0.iter().map(|d| d.derivative(t)).sum()
    }
}

/// Sum of initial profiles; the envelope is the sum of envelopes.
pub struct SumProfile(pub Vec<Box<dyn DecayingProfile>>);

impl DecayingProfile for SumProfile {
    fn value(&self, x: f64) -> Complex64 {
        self.0.iter().map(|d| d.value(x)).sum()
    }
    fn derivative(&self, x: f64) -> Complex64 {
        self.0.iter().map(|d| d.derivative(x)).sum()
    }
    fn envelope(&self) -> Option<Envelope> {
        self.0
            .iter()
            .map(|d| d.envelope())
            .collect::<Option<Vec<_>>>()
            .map(Envelope::Sum)
    }
}

/// Accuracy knobs of the forcing assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtnTolerances {
    /// Absolute tolerance of the adaptive `x`-integral.
    pub quad_tol: f64,
    /// Mass of `|q₀'|` allowed beyond the truncation point.
    pub tail_tol: f64,
}

impl Default for DtnTolerances {
    fn default() -> Self {
        Self {
            quad_tol: 1e-12,
            tail_tol: 1e-10,
        }
    }
}

/// Tolerance of the corner compatibility `q₀(0) = f₀(0)`.
pub const COMPATIBILITY_TOL: f64 = 1e-10;

const ENVELOPE_SAMPLES: usize = 200;

/// One Dirichlet problem on a convex moving domain.
pub struct DtnProblem {
    curve: BoundaryCurve,
    dirichlet: Box<dyn BoundaryData>,
    initial: Box<dyn DecayingProfile>,
    envelope: Envelope,
    cutoff: f64,
    tolerances: DtnTolerances,
}

impl std::fmt::Debug for DtnProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DtnProblem")
            .field("curve", &self.curve)
            .field("envelope", &self.envelope)
            .field("cutoff", &self.cutoff)
            .field("tolerances", &self.tolerances)
            .finish_non_exhaustive()
    }
}

impl DtnProblem {
    pub fn new(
        curve: BoundaryCurve,
        dirichlet: Box<dyn BoundaryData>,
        initial: Box<dyn DecayingProfile>,
        tolerances: DtnTolerances,
    ) -> Result<Self> {
        if !(tolerances.quad_tol > 0.0) || !(tolerances.tail_tol > 0.0) {
            return Err(Error::ConstraintViolation("tolerances must be positive".into()));
        }
        let mismatch = (initial.value(0.0) - dirichlet.value(0.0)).norm();
        if mismatch > COMPATIBILITY_TOL {
            return Err(Error::ConstraintViolation(format!(
                "data incompatible at the corner: |q0(0) - f0(0)| = {mismatch:.3e}"
            )));
        }
        let envelope = initial
            .envelope()
            .ok_or_else(|| Error::BadDecayCertificate("initial profile has no decay envelope".into()))?;
        let cutoff = envelope.cutoff(0.0, tolerances.tail_tol);
        if !cutoff.is_finite() {
            return Err(Error::BadDecayCertificate(
                "envelope tail never drops below the tolerance".into(),
            ));
        }
        let span = cutoff.max(1.0);
        for i in 0..=ENVELOPE_SAMPLES {
            let x = 2.0 * span * i as f64 / ENVELOPE_SAMPLES as f64;
            let d = initial.derivative(x).norm();
            let e = envelope.bound(x);
            if d > e * (1.0 + 1e-9) + 1e-300 {
                return Err(Error::BadDecayCertificate(format!(
                    "|q0'({x})| = {d:.6e} exceeds its envelope {e:.6e}"
                )));
            }
        }
        Ok(Self {
            curve,
            dirichlet,
            initial,
            envelope,
            cutoff,
            tolerances,
        })
    }

    pub fn curve(&self) -> &BoundaryCurve {
        &self.curve
    }

    pub fn final_time(&self) -> f64 {
        self.curve.final_time()
    }

    pub fn dirichlet(&self) -> &dyn BoundaryData {
        self.dirichlet.as_ref()
    }

    pub fn initial(&self) -> &dyn DecayingProfile {
        self.initial.as_ref()
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    /// Truncation point of every `x`-integral over the initial data.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn tolerances(&self) -> DtnTolerances {
        self.tolerances
    }

    fn certificate<'a>(&self, envelope: &'a dyn Fn(f64) -> f64) -> DecayCertificate<'a> {
        DecayCertificate {
            cutoff: self.cutoff,
            envelope,
            tail_bound: self.envelope.tail_mass(self.cutoff),
        }
    }
}

/// The two pieces of the forcing, kept apart for inspection.
#[derive(Debug, Clone, PartialEq)]
pub struct Forcing {
    pub boundary: ComplexSignal,
    pub initial: ComplexSignal,
}

impl Forcing {
    pub fn total(&self) -> ComplexSignal {
        self.boundary
            .iter()
            .zip(self.initial.iter())
            .map(|(a, b)| a + b)
            .collect::<Vec<_>>()
            .into()
    }
}

/// `x`-integral `t^{-1/2} ∫₀^∞ e^{i(l(t)-x)²/(4t)} q₀'(x) dx`, without its constant.
pub fn initial_integral(problem: &DtnProblem, t: f64) -> Result<Complex64> {
    let lt = problem.curve.l(t);
    let bound = |x: f64| problem.envelope.bound(x);
    let cert = problem.certificate(&bound);
    let est = truncated_decaying_oscillatory(
        |x| problem.initial.derivative(x),
        |x| (lt - x) * (lt - x) / (4.0 * t),
        &cert,
        problem.tolerances.quad_tol,
    )?;
    Ok(est.value / t.sqrt())
}

/// Forcing on the grid, split into its boundary and initial parts.
///
/// At `t = 0` the boundary part vanishes and the initial part tends to
/// `c_q √π e^{iπ/4} q₀'(0)`: the `x`-integral concentrates at `x = 0` like a
/// half-line Fresnel integral of width `√t`. That limit is used directly.
pub fn assemble_forcing_parts(
    problem: &DtnProblem,
    grid: &TimeGrid,
    normalisation: Normalisation,
) -> Result<Forcing> {
    if (grid.final_time() - problem.final_time()).abs() > 1e-12 * problem.final_time() {
        return Err(Error::GridError(format!(
            "grid ends at {} but the curve at {}",
            grid.final_time(),
            problem.final_time()
        )));
    }
    let ctx = KernelContext::with_normalisation(problem.curve.clone(), normalisation);
    let t = grid.nodes();
    let weights = abel_weights(grid);
    let df0: Vec<Complex64> = t.iter().map(|&s| problem.dirichlet.derivative(s)).collect();
    let c_q = normalisation.initial_coefficient();
    let mut boundary = Vec::with_capacity(t.len());
    let mut initial = Vec::with_capacity(t.len());
    for (n, &tn) in t.iter().enumerate() {
        let b: Complex64 = weights
            .row(n)
            .iter()
            .enumerate()
            .map(|(m, w)| ctx.forcing_kernel_boundary_regularised(t[m], tn) * df0[m] * *w)
            .sum();
        boundary.push(b);
        let q = if n == 0 {
            c_q * sqrt_pi() * cis(PI / 4.0) * problem.initial.derivative(0.0)
        } else {
            c_q * initial_integral(problem, tn)?
        };
        initial.push(q);
    }
    Ok(Forcing {
        boundary: boundary.into(),
        initial: initial.into(),
    })
}

pub fn assemble_forcing(problem: &DtnProblem, grid: &TimeGrid) -> Result<ComplexSignal> {
    Ok(assemble_forcing_parts(problem, grid, Normalisation::Contour)?.total())
}

/// Computed Neumann values `f₁(t_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeumannTrace {
    pub grid: TimeGrid,
    pub f1: ComplexSignal,
}

impl NeumannTrace {
    pub fn new(grid: TimeGrid, f1: ComplexSignal) -> Result<Self> {
        if f1.len() != grid.len() {
            return Err(Error::GridError("trace length differs from the grid".into()));
        }
        if f1.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::DomainError("Neumann trace is not finite".into()));
        }
        Ok(Self { grid, f1 })
    }

    pub fn at(&self, t: f64) -> Complex64 {
        self.grid.interpolate(&self.f1, t)
    }
}

/// Everything one solve produces.
#[derive(Debug, Clone, PartialEq)]
pub struct DtnSolution {
    pub trace: NeumannTrace,
    pub forcing: Forcing,
    pub volterra_residual: f64,
    pub normalisation: Normalisation,
}

pub fn solve_dtn(problem: &DtnProblem, grid: &TimeGrid) -> Result<NeumannTrace> {
    Ok(solve_dtn_with(problem, grid, Normalisation::Contour)?.trace)
}

pub fn solve_dtn_with(
    problem: &DtnProblem,
    grid: &TimeGrid,
    normalisation: Normalisation,
) -> Result<DtnSolution> {
    let forcing = assemble_forcing_parts(problem, grid, normalisation)?;
    let ctx = KernelContext::with_normalisation(problem.curve.clone(), normalisation);
    let kernel = assemble_kernel_matrix(grid, &ctx);
    let vp = VolterraProblem::new(
        forcing.total(),
        kernel,
        Complex64::new(normalisation.memory_weight(), 0.0),
    )?;
    let sol = solve_volterra(&vp)?;
    Ok(DtnSolution {
        trace: NeumannTrace::new(grid.clone(), sol.values)?,
        forcing,
        volterra_residual: sol.residual_norm,
        normalisation,
    })
}

/// Complex Gaussian wave packet, an exact solution of `iq_t + q_xx = 0`:
/// `q = σ^{-1/2} exp(-(x - shift - 2bt)²/(4σ)) e^{i(bx - b²t)}` with `σ = t0 + it`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub t0: f64,
    pub shift: f64,
    pub boost: f64,
}

impl ManufacturedSolution {
    pub fn new(t0: f64, shift: f64, boost: f64) -> Result<Self> {
        if !(t0 > 0.0) || !shift.is_finite() || !boost.is_finite() {
            return Err(Error::ConstraintViolation(format!(
                "manufactured solution needs t0 > 0 and finite shift/boost, got {t0}, {shift}, {boost}"
            )));
        }
        Ok(Self { t0, shift, boost })
    }

    /// The solution frozen at time `t`, as a function of `x`.
    pub fn profile(&self, t: f64) -> GaussianPacket {
        let sigma = Complex64::new(self.t0, t);
        GaussianPacket {
            amplitude: sigma.sqrt().inv() * cis(-self.boost * self.boost * t),
            center: self.shift + 2.0 * self.boost * t,
            sigma,
            boost: self.boost,
        }
    }

    pub fn q(&self, x: f64, t: f64) -> Complex64 {
        self.profile(t).eval(x)
    }

    pub fn q_x(&self, x: f64, t: f64) -> Complex64 {
        self.profile(t).deriv(x)
    }

    pub fn q_xx(&self, x: f64, t: f64) -> Complex64 {
        let p = self.profile(t);
        let d = -(x - p.center) / (2.0 * p.sigma) + I * self.boost;
        p.eval(x) * (d * d - 1.0 / (2.0 * p.sigma))
    }

    /// `q_t = i q_xx`.
    pub fn q_t(&self, x: f64, t: f64) -> Complex64 {
        I * self.q_xx(x, t)
    }

    pub fn initial(&self) -> GaussianPacket {
        self.profile(0.0)
    }

    pub fn dirichlet(&self, curve: &BoundaryCurve) -> ManufacturedDirichlet {
        ManufacturedDirichlet {
            solution: *self,
            curve: curve.clone(),
        }
    }

    /// `f₁(t) = q_x(l(t), t)`.
    pub fn neumann(&self, curve: &BoundaryCurve, t: f64) -> Complex64 {
        self.q_x(curve.l(t), t)
    }

    pub fn traces(&self, curve: &BoundaryCurve, grid: &TimeGrid) -> ManufacturedTraces {
        let f0 = self.dirichlet(curve);
        ManufacturedTraces {
            q0: self.initial(),
            f0: grid.sample(|t| f0.value(t)),
            f1: grid.sample(|t| self.neumann(curve, t)),
            q_at_final: self.profile(curve.final_time()),
        }
    }

    pub fn problem(&self, curve: &BoundaryCurve, tolerances: DtnTolerances) -> Result<DtnProblem> {
        DtnProblem::new(
            curve.clone(),
            Box::new(self.dirichlet(curve)),
            Box::new(self.initial()),
            tolerances,
        )
    }

    /// `|i q_t + q_xx|` from central differences of `q` alone, step `h`.
    pub fn pde_residual_fd(&self, x: f64, t: f64, h: f64) -> f64 {
        let q_t = (self.q(x, t + h) - self.q(x, t - h)) / (2.0 * h);
        let q_xx = (self.q(x + h, t) - 2.0 * self.q(x, t) + self.q(x - h, t)) / (h * h);
        (I * q_t + q_xx).norm()
    }
}

/// `f₀(t) = q(l(t), t)` for a manufactured solution.
#[derive(Debug, Clone)]
pub struct ManufacturedDirichlet {
    solution: ManufacturedSolution,
    curve: BoundaryCurve,
}

impl BoundaryData for ManufacturedDirichlet {
    fn value(&self, t: f64) -> Complex64 {
        self.solution.q(self.curve.l(t), t)
    }
    fn derivative(&self, t: f64) -> Complex64 {
        let x = self.curve.l(t);
        self.solution.q_x(x, t) * self.curve.l_prime(t) + self.solution.q_t(x, t)
    }
}

/// Exact data and traces of a manufactured solution on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedTraces {
    pub q0: GaussianPacket,
    pub f0: ComplexSignal,
    pub f1: ComplexSignal,
    pub q_at_final: GaussianPacket,
}

/// The four terms of the global relation at one `k` and their combination
/// `neumann - dirichlet - initial + final`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalRelationTerms {
    pub k: Complex64,
    /// `i ∫₀ᵀ e^{ik²s - ikl(s)} f₁(s) ds`
    pub neumann: Complex64,
    /// `∫₀ᵀ e^{ik²s - ikl(s)} (k - l'(s)) f₀(s) ds`
    pub dirichlet: Complex64,
    /// `q̂₀(k) = ∫₀^∞ e^{-ikx} q₀(x) dx`
    pub initial: Complex64,
    /// `e^{ik²T} ∫_{l(T)}^∞ e^{-ikx} q(x,T) dx`
    pub final_: Complex64,
    pub residual: Complex64,
}

impl GlobalRelationTerms {
    pub fn max_term(&self) -> f64 {
        [self.neumann, self.dirichlet, self.initial, self.final_]
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual.norm() / self.max_term().max(f64::MIN_POSITIVE)
    }
}

/// Gauss-Legendre nodes per grid cell for integrals of the interpolated trace.
const TRACE_GAUSS_POINTS: usize = 8;

/// `∫_L^∞ e^{-ik(x-L)} p(x) dx` for `Im k <= 0`, by parts:
/// `(p(L) + ∫_L^∞ e^{-ik(x-L)} p'(x) dx)/(ik)`.
pub fn half_line_transform(
    profile: &dyn DecayingProfile,
    from: f64,
    k: Complex64,
    tolerances: DtnTolerances,
) -> Result<Complex64> {
    if k.im > 0.0 || k.norm() == 0.0 {
        return Err(Error::DomainError(format!(
            "half-line transform needs Im k <= 0, k != 0, got {k}"
        )));
    }
    let envelope = profile
        .envelope()
        .ok_or_else(|| Error::BadDecayCertificate("profile has no decay envelope".into()))?;
    let cutoff = envelope.cutoff(from, tolerances.tail_tol);
    if !cutoff.is_finite() {
        return Err(Error::BadDecayCertificate("envelope tail never vanishes".into()));
    }
    // |e^{-iky}| <= 1 on y >= 0
    let env = |y: f64| envelope.bound(from + y);
    let cert = DecayCertificate {
        cutoff: cutoff - from,
        envelope: &env,
        tail_bound: envelope.tail_mass(cutoff),
    };
    let est = truncated_decaying_oscillatory(
        |y| profile.derivative(from + y) * (k.im * y).exp(),
        |y| -k.re * y,
        &cert,
        tolerances.quad_tol,
    )?;
    Ok((profile.value(from) + est.value) / (I * k))
}

/// Residual of the global relation at `k`, `Im k <= 0`, `k != 0`.
///
/// `q_final` is the solution at `t = T`; only verification runs have it.
pub fn global_relation_residual(
    problem: &DtnProblem,
    trace: &NeumannTrace,
    q_final: &dyn DecayingProfile,
    k: Complex64,
) -> Result<GlobalRelationTerms> {
    if k.im > 0.0 {
        return Err(Error::DomainError(format!(
            "the global relation holds for Im k <= 0, got k = {k}"
        )));
    }
    if k.norm() == 0.0 {
        return Err(Error::DomainError("k = 0 is not supported".into()));
    }
    let curve = &problem.curve;
    let big_t = curve.final_time();
    let kernel = |s: f64| (I * k * k * s - I * k * curve.l(s)).exp();

    let (gx, gw) = crate::quad::gauss_legendre(TRACE_GAUSS_POINTS);
    let mut neumann = Complex64::new(0.0, 0.0);
    for w in trace.grid.nodes().windows(2) {
        let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (x, wt) in gx.iter().zip(&gw) {
            let s = c + h * x;
            neumann += kernel(s) * trace.at(s) * (h * wt);
        }
    }
    neumann *= I;

    let bps: Vec<f64> = (0..=16).map(|i| big_t * i as f64 / 16.0).collect();
    let dirichlet = integrate_adaptive(
        |s| kernel(s) * (k - curve.l_prime(s)) * problem.dirichlet.value(s),
        &bps,
        problem.tolerances.quad_tol,
        0.0,
        100_000,
    )?
    .value;

    let initial = half_line_transform(problem.initial.as_ref(), 0.0, k, problem.tolerances)?;
    let lt = curve.l(big_t);
    let final_ =
        (I * k * k * big_t - I * k * lt).exp() * half_line_transform(q_final, lt, k, problem.tolerances)?;

    Ok(GlobalRelationTerms {
        k,
        neumann,
        dirichlet,
        initial,
        final_,
        residual: neumann - dirichlet - initial + final_,
    })
}

/// The contribution of `q(·,T)` to `f₁(t)`:
///
/// ```text
/// (1/π) ∫_{∂Ω₂⁻(t)} k e^{ik²(T-t) - ik(l(T)-l(t))} ∫_{l(T)}^∞ e^{-ik(x-l(T))} q(x,T) dx dk
/// ```
///
/// over the vertical ray `k = l'(t)/2 - iy` traversed upwards, then the real axis
/// from `l'(t)/2` to `-∞`. Analyticity and decay in `Ω₂⁻(t)` make it zero, so its size
/// measures how well that is reproduced. The real ray is summed by ε-damping.
pub fn future_data_term(
    curve: &BoundaryCurve,
    q_final: &GaussianPacket,
    t: f64,
    rule: &DampedOscillatoryRule,
) -> Result<Complex64> {
    let big_t = curve.final_time();
    if !(t >= 0.0 && t < big_t) {
        return Err(Error::OutOfDomain {
            value: t,
            lo: 0.0,
            hi: big_t,
        });
    }
    let tau = big_t - t;
    let (lt, lb) = (curve.l(t), curve.l(big_t));
    let delta = lb - lt;
    let c = 0.5 * curve.l_prime(t);
    let h = |k: Complex64| k * (I * k * k * tau - I * k * delta).exp() * q_final.half_line_transform(lb, k);

    // vertical leg: the exponent's real part is -y τ (m - l'(t)) with m the chord slope
    let rate = tau * (delta / tau - 2.0 * c);
    if !(rate > 0.0) {
        return Err(Error::DegenerateScale(format!(
            "no decay along the vertical ray, rate {rate}"
        )));
    }
    let reach = ((1.0 / rule.abs_tol).ln() + 10.0) / rate;
    let bps = oscillation_breakpoints(&|y: f64| (c * c - y * y) * tau - c * delta, 0.0, reach, 2.0);
    let vertical = integrate_adaptive(
        |y| h(Complex64::new(c, -y)),
        &bps,
        rule.abs_tol * 1e-2,
        0.0,
        bps.len() * 64 + 10_000,
    )?
    .value;

    // real ray k = c - u, phase k²τ - kΔ
    let real = damped_oscillatory_integral(
        |u| {
            let k = c - u;
            k * q_final.half_line_transform(lb, Complex64::new(k, 0.0))
        },
        |u| {
            let k = c - u;
            k * k * tau - k * delta
        },
        rule,
    )?;
    Ok((I * vertical - real) / PI)
}
