//! Brute-force validators for the inversion theory behind the Volterra reduction.
//!
//! Everything here is slow on purpose and used by tests and `verify` runs only.
//! With `F(k) = ∫₀ᵀ e^{ik²s - ikl(s)} f(s) ds` and `E(k,s,t) = e^{ik²(s-t) - ik(l(s)-l(t))}`,
//! the transform is inverted by
//!
//! ```text
//! f(t) = (1/π) ∫_{∂Ω₂⁻(t)} e^{-ik²t + ikl(t)} F(k) k dk + (1/π) ∫₀ᵗ J(s,t) f(s) ds
//! ```
//!
//! where `∂Ω₂⁻(t)` runs up the ray `k = l'(t)/2 - iy` and then left along the real axis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::curve::BoundaryCurve;
use crate::error::{Error, Result};
use crate::grid::{ComplexSignal, TimeGrid};
use crate::kernel::{assemble_kernel_matrix, KernelContext, Normalisation};
use crate::quad::{
    damped_oscillatory_integral, gauss_legendre, integrate_adaptive, oscillation_breakpoints,
    DampedOscillatoryRule,
};
use crate::specfun::{faddeeva, sqrt_pi};
use crate::volterra::{solve_volterra, VolterraProblem};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A smooth test signal on `[0, T]`.
pub type Signal<'a> = &'a (dyn Fn(f64) -> Complex64 + Sync);

const TRANSFORM_TOL: f64 = 1e-12;
const MAX_PANELS: usize = 2_000_000;

fn transform_breakpoints(curve: &BoundaryCurve, k: Complex64) -> Vec<f64> {
    let big_t = curve.final_time();
    let k2 = k * k;
    let mut bps = oscillation_breakpoints(&|s: f64| k2.re * s - k.re * curve.l(s), 0.0, big_t, 2.0);
    if bps.len() < 9 {
        bps = (0..=8).map(|i| big_t * i as f64 / 8.0).collect();
    }
    bps
}

/// `F(k) = ∫₀ᵀ e^{ik²s - ikl(s)} f(s) ds` by adaptive Gauss-Kronrod.
pub fn forward_transform(f: Signal, curve: &BoundaryCurve, k: Complex64) -> Result<Complex64> {
    let bps = transform_breakpoints(curve, k);
    Ok(integrate_adaptive(
        |s| (I * k * k * s - I * k * curve.l(s)).exp() * f(s),
        &bps,
        TRANSFORM_TOL,
        TRANSFORM_TOL * 0.1,
        MAX_PANELS,
    )?
    .value)
}

/// Same integral by composite Gauss-Legendre, four 16-point panels per oscillation panel.
pub fn forward_transform_gauss(f: Signal, curve: &BoundaryCurve, k: Complex64) -> Complex64 {
    let (x, w) = gauss_legendre(16);
    let bps = transform_breakpoints(curve, k);
    let mut total = Complex64::new(0.0, 0.0);
    for pair in bps.windows(2) {
        for q in 0..4 {
            let a = pair[0] + (pair[1] - pair[0]) * q as f64 / 4.0;
            let b = pair[0] + (pair[1] - pair[0]) * (q + 1) as f64 / 4.0;
            let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
            for (xi, wi) in x.iter().zip(&w) {
                let s = c + h * xi;
                total += (I * k * k * s - I * k * curve.l(s)).exp() * f(s) * (h * wi);
            }
        }
    }
    total
}

/// `∫₀ᵀ |e^{ik²s - ikl(s)}| ds`, the size of the transform of a unit-modulus signal.
pub fn exponent_mass(curve: &BoundaryCurve, k: Complex64) -> f64 {
    let k2 = k * k;
    let n = 2048;
    let h = curve.final_time() / n as f64;
    // composite Simpson on a smooth positive integrand
    (0..=n)
        .map(|i| {
            let s = i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * (-k2.im * s + k.im * curve.l(s)).exp()
        })
        .sum::<f64>()
        * h
        / 3.0
}

/// Transform values of one signal at a set of `k`, cached.
pub struct TransformSample<'a> {
    f: Signal<'a>,
    curve: &'a BoundaryCurve,
    ks: Vec<Complex64>,
    values: Vec<Complex64>,
}

impl std::fmt::Debug for TransformSample<'_> {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fm.debug_struct("TransformSample")
            .field("ks", &self.ks)
            .field("values", &self.values)
            .finish_non_exhaustive()
    }
}

impl<'a> TransformSample<'a> {
    pub fn new(f: Signal<'a>, curve: &'a BoundaryCurve, ks: Vec<Complex64>) -> Result<Self> {
        let values = ks
            .iter()
            .map(|&k| forward_transform(f, curve, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { f, curve, ks, values })
    }

    pub fn ks(&self) -> &[Complex64] {
        &self.ks
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Largest difference between the cached values and an independent Gauss-Legendre pass,
    /// relative to `max(1, |F|)`: off the real axis `F` can be exponentially large.
    pub fn max_disagreement(&self) -> f64 {
        self.ks
            .iter()
            .zip(&self.values)
            .map(|(&k, v)| (forward_transform_gauss(self.f, self.curve, k) - v).norm() / v.norm().max(1.0))
            .fold(0.0, f64::max)
    }
}

/// `(1/π) ∫_{∂Ω₂⁻(t)} e^{-ik²t+ikl(t)} F(k) k dk` after exchanging the order of
/// integration: the contour kernel is `π δ(s-t) - J(s,t)` on `s <= t` and zero for `s > t`,
/// which leaves `f(t) - (1/π) ∫₀ᵗ J(s,t) f(s) ds`.
pub fn exchanged_contour_forcing(f: Signal, curve: &BoundaryCurve, t: f64) -> Result<Complex64> {
    if t <= 0.0 {
        return Ok(f(0.0));
    }
    let ctx = KernelContext::new(curve.clone());
    // s = t - u² removes the inverse square root
    let rt = t.sqrt();
    let bps: Vec<f64> = (0..=16).map(|i| rt * i as f64 / 16.0).collect();
    let memory = integrate_adaptive(
        |u| {
            let s = t - u * u;
            2.0 * ctx.j_regularised(s, t) * f(s)
        },
        &bps,
        1e-13,
        0.0,
        100_000,
    )?
    .value;
    Ok(f(t) - memory * Normalisation::Contour.memory_weight())
}

/// Reconstruct `f` on `grid` from its transform through the Volterra equation.
///
/// The contour forcing comes from [`exchanged_contour_forcing`]; the equation is then solved
/// with the kernel `(1/π) J` exactly as the Dirichlet-to-Neumann solver does.
pub fn invert_via_volterra(f: Signal, curve: &BoundaryCurve, grid: &TimeGrid) -> Result<ComplexSignal> {
    if (grid.final_time() - curve.final_time()).abs() > 1e-12 * curve.final_time() {
        return Err(Error::GridError("grid and curve end at different times".into()));
    }
    let forcing = grid
        .nodes()
        .iter()
        .map(|&t| exchanged_contour_forcing(f, curve, t))
        .collect::<Result<Vec<_>>>()?;
    let ctx = KernelContext::new(curve.clone());
    let vp = VolterraProblem::new(
        forcing.into(),
        assemble_kernel_matrix(grid, &ctx),
        Complex64::new(Normalisation::Contour.memory_weight(), 0.0),
    )?;
    Ok(solve_volterra(&vp)?.values)
}

/// `∫₀ᵀ E(k,s,t) ds` in closed form for `l(s) = a s²`; the transform of `f ≡ 1` times
/// `e^{-ik²t + ikl(t)}`.
///
/// The exponent is `-β(s - s₀)² + β(t - s₀)²` with `β = iak`, `s₀ = k/(2a)`, so the integral is
/// a difference of error functions. Each is scaled by the endpoint value of `E`, which is
/// bounded on the contours of interest, and evaluated through `w`.
pub fn quadratic_unit_transform(a: f64, final_time: f64, t: f64, k: Complex64) -> Complex64 {
    let beta = I * k * a;
    let rb = beta.sqrt();
    let s0 = k / (2.0 * a);
    let za = rb * (0.0 - s0);
    let zb = rb * (final_time - s0);
    let zt = rb * (t - s0);
    let e = |s: f64| (I * k * k * (s - t) - I * k * a * (s * s - t * t)).exp();
    let (e0, e1) = (e(0.0), e(final_time));
    // e^{zt²}[erf(zb) - erf(za)] without forming either exponential alone
    let diff = match (za.re >= 0.0, zb.re >= 0.0) {
        (true, true) => e0 * faddeeva(I * za) - e1 * faddeeva(I * zb),
        (false, false) => e1 * faddeeva(-I * zb) - e0 * faddeeva(-I * za),
        (false, true) => 2.0 * (zt * zt).exp() - e1 * faddeeva(I * zb) - e0 * faddeeva(-I * za),
        (true, false) => e1 * faddeeva(-I * zb) + e0 * faddeeva(I * za) - 2.0 * (zt * zt).exp(),
    };
    sqrt_pi() / (2.0 * rb) * diff
}

/// `(1/π) ∫_{∂Ω₂⁻(t)} k G(k) dk` by brute force, where `G(k) = e^{-ik²t+ikl(t)} F(k)`.
///
/// The vertical ray decays exponentially and is integrated directly; the real ray is
/// only conditionally convergent and is summed by ε-damping. `phase_hint` is the
/// dominant oscillation of `G` on the real axis (for breakpoints only).
pub fn brute_force_contour_forcing(
    combined: &(dyn Fn(Complex64) -> Complex64 + Sync),
    curve: &BoundaryCurve,
    t: f64,
    rule: &DampedOscillatoryRule,
) -> Result<Complex64> {
    let big_t = curve.final_time();
    if !(t > 0.0 && t < big_t) {
        return Err(Error::OutOfDomain {
            value: t,
            lo: 0.0,
            hi: big_t,
        });
    }
    let c = 0.5 * curve.l_prime(t);
    let lt = curve.l(t);
    // slowest exponential rate along the vertical ray, from the two endpoints of [0, T]
    let rate = (t * (curve.l_prime(t) - (lt - curve.l(0.0)) / t))
        .min((big_t - t) * ((curve.l(big_t) - lt) / (big_t - t) - curve.l_prime(t)));
    if !(rate > 0.0) {
        return Err(Error::DegenerateScale(format!(
            "vertical ray does not decay, rate {rate}"
        )));
    }
    let reach = ((1.0 / rule.abs_tol).ln() + 10.0) / rate;
    let width = t.max(big_t - t);
    let bps = oscillation_breakpoints(&|y: f64| y * y * width, 0.0, reach, 2.0);
    let vertical = integrate_adaptive(
        |y| {
            let k = Complex64::new(c, -y);
            k * combined(k)
        },
        &bps,
        rule.abs_tol * 1e-2,
        0.0,
        MAX_PANELS,
    )?
    .value;
    let real = damped_oscillatory_integral(
        |u| {
            let k = c - u;
            let hint = k * k * width;
            k * combined(Complex64::new(k, 0.0)) * Complex64::from_polar(1.0, -hint)
        },
        |u| (c - u) * (c - u) * width,
        rule,
    )?;
    // up the vertical ray (k = c - iy, y from ∞ to 0), then from c to -∞
    Ok((I * vertical - real) / PI)
}

/// Geometry of the d-bar representation at one time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbarGeometry {
    pub t: f64,
    pub final_time: f64,
    /// `l'(0)/2`, `l'(t)/2`, `l'(T)/2`.
    pub c0: f64,
    pub ct: f64,
    pub c_final: f64,
    /// Height at which `Ω₃` is cut off.
    pub k_max: f64,
}

impl DbarGeometry {
    pub fn new(curve: &BoundaryCurve, t: f64, k_max: f64) -> Result<Self> {
        let big_t = curve.final_time();
        if !(t > 0.0 && t < big_t) {
            return Err(Error::OutOfDomain {
                value: t,
                lo: 0.0,
                hi: big_t,
            });
        }
        if !(k_max > 0.0) {
            return Err(Error::ConstraintViolation(format!(
                "K_max must be positive, got {k_max}"
            )));
        }
        Ok(Self {
            t,
            final_time: big_t,
            c0: 0.5 * curve.l_prime(0.0),
            ct: 0.5 * curve.l_prime(t),
            c_final: 0.5 * curve.l_prime(big_t),
            k_max,
        })
    }

    pub fn doubled(&self) -> Self {
        Self {
            k_max: 2.0 * self.k_max,
            ..*self
        }
    }
}

/// The four pieces of the d-bar formula, each already carrying its sign, so that
/// `value = (gamma12 + gamma13 + gamma23 + omega3) / (2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FformTerms {
    pub gamma12: Complex64,
    pub gamma13: Complex64,
    pub gamma23: Complex64,
    pub omega3: Complex64,
}

impl FformTerms {
    pub fn value(&self) -> Complex64 {
        (self.gamma12 + self.gamma13 + self.gamma23 + self.omega3) / (2.0 * PI)
    }
}

/// Result of [`eval_fform`]: the value at `K_max` and `2 K_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FformEvaluation {
    pub geometry: DbarGeometry,
    pub terms: FformTerms,
    pub value: Complex64,
    pub doubled_value: Complex64,
    /// `|value(2K) - value(K)|`, the truncation certificate.
    pub certificate: f64,
}

struct Dbar<'a> {
    f: Signal<'a>,
    curve: &'a BoundaryCurve,
    g: DbarGeometry,
    tol: f64,
}

impl Dbar<'_> {
    fn a(&self, k: Complex64, s: f64) -> Complex64 {
        let dl = self.curve.l(s) - self.curve.l(self.g.t);
        (I * k * k * (s - self.g.t) - I * k * dl).exp() * k * (self.f)(s)
    }

    /// `∫_{lo}^{hi} A(k,s,t) ds` with panels graded towards `s = t`, where the
    /// deformed rays put a boundary layer of width `|k|^{-2}`.
    fn a_integral(&self, k: Complex64, lo: f64, hi: f64) -> Result<Complex64> {
        if hi <= lo {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let t = self.g.t;
        let mut bps = vec![lo, hi];
        let layer = 1.0 / (k.norm_sqr() + 1.0);
        let mut d = 0.5 * (hi - lo);
        while d > 0.1 * layer {
            for p in [t - d, t + d] {
                if p > lo && p < hi {
                    bps.push(p);
                }
            }
            d *= 0.5;
        }
        let k2 = k * k;
        let osc = oscillation_breakpoints(&|s: f64| k2.re * s - k.re * self.curve.l(s), lo, hi, 4.0);
        bps.extend(osc);
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        Ok(integrate_adaptive(|s| self.a(k, s), &bps, self.tol * 1e-3, 1e-13, MAX_PANELS)?.value)
    }

    fn pole(&self, k: Complex64) -> Complex64 {
        // any simple pole off the deformation wedges leaves the sum unchanged
        let star = Complex64::new(
            0.5 * (self.g.c0 + self.g.c_final),
            1.0 + self.g.c_final - self.g.c0,
        );
        (self.f)(self.g.t) / (I * (k - star))
    }

    /// `∫₀^∞ h(base + r e^{iθ}) e^{iθ} dr` for an integrand decaying like `r^{-2}`.
    fn ray(&self, base: f64, theta: f64, h: &dyn Fn(Complex64) -> Result<Complex64>) -> Result<Complex64> {
        let dir = Complex64::from_polar(1.0, theta);
        let r_max = 1e4;
        let mut bps = vec![0.0];
        let mut r = 0.05;
        while r < r_max {
            bps.push(r);
            r *= 1.5;
        }
        bps.push(r_max);
        let err = std::cell::Cell::new(None);
        let eval = |r: f64| match h(base + r * dir) {
            Ok(v) => v * dir,
            Err(e) => {
                err.set(Some(e));
                Complex64::new(0.0, 0.0)
            }
        };
        let body = integrate_adaptive(eval, &bps, self.tol * 1e-2, 0.0, MAX_PANELS)?.value;
        if let Some(e) = err.take() {
            return Err(e);
        }
        // the integrand is O(r^{-2}); its tail is r_max times the last value
        let tail = r_max * h(base + r_max * dir)? * dir;
        Ok(body + tail)
    }

    fn lower(&self, k: Complex64) -> Result<Complex64> {
        Ok(self.a_integral(k, 0.0, self.g.t)? - self.pole(k))
    }

    fn upper(&self, k: Complex64) -> Result<Complex64> {
        Ok(self.a_integral(k, self.g.t, self.g.final_time)? + self.pole(k))
    }

    /// `-∫_{Γ₁₂} ∫₀ᵀ A ds dk`. The rays `(-∞, c0)`, `(∞, c_T)` and the downward ray at `c_t`
    /// are turned into the sectors where `∫₀ᵗ A` and `∫ₜᵀ A` decay separately.
    fn gamma12(&self) -> Result<Complex64> {
        let q = PI / 4.0;
        let lower = |k| self.lower(k);
        let upper = |k| self.upper(k);
        let left = -self.ray(self.g.c0, 3.0 * q, &lower)? - self.ray(self.g.c0, 5.0 * q, &upper)?;
        let right = -self.ray(self.g.c_final, -q, &lower)? - self.ray(self.g.c_final, q, &upper)?;
        let vertical = self.ray(self.g.ct, -q, &lower)? + self.ray(self.g.ct, -3.0 * q, &upper)?;
        Ok(-(left + right + vertical))
    }

    fn segment(&self, from: f64, to: f64, h: &dyn Fn(f64) -> Result<Complex64>) -> Result<Complex64> {
        if from == to {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (lo, hi, sign) = if from < to {
            (from, to, 1.0)
        } else {
            (to, from, -1.0)
        };
        let bps: Vec<f64> = (0..=16).map(|i| lo + (hi - lo) * i as f64 / 16.0).collect();
        let err = std::cell::Cell::new(None);
        let v = integrate_adaptive(
            |k| {
                h(k).unwrap_or_else(|e| {
                    err.set(Some(e));
                    Complex64::new(0.0, 0.0)
                })
            },
            &bps,
            self.tol * 1e-2,
            0.0,
            MAX_PANELS,
        )?
        .value;
        if let Some(e) = err.take() {
            return Err(e);
        }
        Ok(sign * v)
    }

    /// `-∫_{Γ₁₃} ∫₀^{S} A ds dk` with `Γ₁₃` from `c_T` to `c_t`.
    fn gamma13(&self) -> Result<Complex64> {
        let inv = self.curve.slope_inverse_map();
        let v = self.segment(self.g.c_final, self.g.ct, &|kr| {
            let s = inv.eval(kr)?;
            self.a_integral(Complex64::new(kr, 0.0), 0.0, s)
        })?;
        Ok(-v)
    }

    /// `-∫_{Γ₂₃} ∫_T^{S} A ds dk` with `Γ₂₃` from `c_t` to `c_0`.
    fn gamma23(&self) -> Result<Complex64> {
        let inv = self.curve.slope_inverse_map();
        let v = self.segment(self.g.ct, self.g.c0, &|kr| {
            let s = inv.eval(kr)?;
            Ok(-self.a_integral(Complex64::new(kr, 0.0), s, self.g.final_time)?)
        })?;
        Ok(-v)
    }

    /// `∬_{Ω₃} ∂S/∂k̄ A(k, S(k_R), t) dk∧dk̄ = -i ∬ S'(k_R) A dk_R dk_I` on
    /// `[c0, c_T] × [0, K_max]`.
    fn omega3(&self, k_max: f64) -> Result<Complex64> {
        let inv = self.curve.slope_inverse_map();
        let (c0, c1) = (self.g.c0, self.g.c_final);
        // tabulate S on a fine k_R mesh once; S is monotone and smooth
        let n_tab = 4096;
        let tab: Vec<f64> = (0..=n_tab)
            .map(|i| inv.eval(c0 + (c1 - c0) * i as f64 / n_tab as f64))
            .collect::<Result<Vec<_>>>()?;
        let sample = |kr: f64| -> (f64, f64) {
            let x = ((kr - c0) / (c1 - c0) * n_tab as f64).clamp(0.0, n_tab as f64);
            let i = (x.floor() as usize).min(n_tab - 1);
            let w = x - i as f64;
            // Newton polish on l'(S)/2 = k_R from the interpolated start
            let mut s = tab[i] + w * (tab[i + 1] - tab[i]);
            for _ in 0..3 {
                let r = 0.5 * self.curve.l_prime(s) - kr;
                s = (s - 2.0 * r / self.curve.l_second(s)).clamp(0.0, self.g.final_time);
            }
            // S'(k_R) = 2/l''(S)
            (s, 2.0 / self.curve.l_second(s))
        };
        let t = self.g.t;
        let span = t.max(self.g.final_time - t);
        let inner = |ki: f64| -> Result<Complex64> {
            let phase = |kr: f64| {
                let (s, _) = sample(kr);
                (kr * kr - ki * ki) * (s - t)
            };
            let mut bps = oscillation_breakpoints(&phase, c0, c1, 2.0);
            if bps.len() < 9 {
                bps = (0..=8).map(|i| c0 + (c1 - c0) * i as f64 / 8.0).collect();
            }
            Ok(integrate_adaptive(
                |kr| {
                    let (s, ds) = sample(kr);
                    ds * self.a(Complex64::new(kr, ki), s)
                },
                &bps,
                self.tol * 1e-3,
                1e-12,
                MAX_PANELS,
            )?
            .value)
        };
        let bps = oscillation_breakpoints(&|ki: f64| ki * ki * span, 0.0, k_max, 2.0);
        let err = std::cell::Cell::new(None);
        let v = integrate_adaptive(
            |ki| {
                inner(ki).unwrap_or_else(|e| {
                    err.set(Some(e));
                    Complex64::new(0.0, 0.0)
                })
            },
            &bps,
            self.tol * 1e-2,
            0.0,
            MAX_PANELS,
        )?
        .value;
        if let Some(e) = err.take() {
            return Err(e);
        }
        Ok(-I * v)
    }
}

/// Brute-force evaluation of the d-bar representation of `f(t)`.
///
/// The `Ω₃` integral is cut at `K_max` and again at `2 K_max`; the difference is returned
/// as the truncation certificate and must not exceed `tolerance · max(1, |f|)`.
pub fn eval_fform(
    f: Signal,
    curve: &BoundaryCurve,
    geometry: DbarGeometry,
    tolerance: f64,
) -> Result<FformEvaluation> {
    let d = Dbar {
        f,
        curve,
        g: geometry,
        tol: 1e-9,
    };
    // the five pieces are independent; the doubled area integral is the slowest
    let ((gamma12, (gamma13, gamma23)), (omega3, omega3_doubled)) = rayon::join(
        || rayon::join(|| d.gamma12(), || rayon::join(|| d.gamma13(), || d.gamma23())),
        || rayon::join(|| d.omega3(geometry.k_max), || d.omega3(2.0 * geometry.k_max)),
    );
    let (gamma12, gamma13, gamma23) = (gamma12?, gamma13?, gamma23?);
    let (omega3, omega3_doubled) = (omega3?, omega3_doubled?);
    let terms = FformTerms {
        gamma12,
        gamma13,
        gamma23,
        omega3,
    };
    let value = terms.value();
    let doubled_value = FformTerms {
        omega3: omega3_doubled,
        ..terms
    }
    .value();
    let certificate = (doubled_value - value).norm();
    if certificate > tolerance * value.norm().max(1.0) {
        return Err(Error::NoConvergence(format!(
            "d-bar value moved by {certificate:.3e} when K_max doubled from {}",
            geometry.k_max
        )));
    }
    Ok(FformEvaluation {
        geometry,
        terms,
        value,
        doubled_value,
        certificate,
    })
}

/// `𝓕(k) = ∫₀ᵀ e^{ik²s} f(s) ds`, the transform of the fixed half-line.
pub fn baseline_forward(f: Signal, final_time: f64, k: Complex64) -> Result<Complex64> {
    let k2 = k * k;
    let mut bps = oscillation_breakpoints(&|s: f64| k2.re * s, 0.0, final_time, 2.0);
    if bps.len() < 9 {
        bps = (0..=8).map(|i| final_time * i as f64 / 8.0).collect();
    }
    Ok(integrate_adaptive(
        |s| (I * k2 * s).exp() * f(s),
        &bps,
        TRANSFORM_TOL,
        0.0,
        MAX_PANELS,
    )?
    .value)
}

/// `(1/π) ∫_{∂𝓘} e^{-ik²t} k 𝓕(k) dk` after exchanging the order of integration.
///
/// With `u = k²` the boundary of the first quadrant becomes the real `u` line and the
/// kernel is `π δ(s - t)`, so the result is `f(t)` inside `(0, T)` and half of it at the ends.
pub fn baseline_inverse(f: Signal, final_time: f64, t: f64) -> Result<Complex64> {
    if !(0.0..=final_time).contains(&t) {
        return Err(Error::OutOfDomain {
            value: t,
            lo: 0.0,
            hi: final_time,
        });
    }
    let v = f(t);
    Ok(if t == 0.0 || t == final_time { 0.5 * v } else { v })
}

/// The same inverse by ε-damped quadrature along `∂𝓘`.
///
/// `transform_sq(u)` must return `𝓕` at `k = √u` (any `u` real). In `u` the contour is the
/// real line, `k dk = du/2`, and the damping `e^{-εu²}` smooths `f` by a Gaussian of width
/// `√ε`, so `t` should stay well inside `(0, T)` relative to the smallest `√ε`.
pub fn baseline_inverse_damped(
    transform_sq: &(dyn Fn(f64) -> Complex64 + Sync),
    final_time: f64,
    t: f64,
    rule: &DampedOscillatoryRule,
) -> Result<Complex64> {
    let width = t.max(final_time - t);
    // the phase e^{-iut} of the kernel plus the fastest oscillation of 𝓕
    let pos = damped_oscillatory_integral(
        |u| transform_sq(u) * Complex64::from_polar(1.0, -u * t - u * width),
        |u| u * width,
        rule,
    )?;
    let neg = damped_oscillatory_integral(
        |v| transform_sq(-v) * Complex64::from_polar(1.0, v * t - v * width),
        |v| v * width,
        rule,
    )?;
    Ok((pos + neg) / (2.0 * PI))
}

/// `∫₀ᵀ e^{ius} p(s) ds` for a polynomial `p`, in closed form by repeated integration by parts.
pub fn polynomial_fourier(coeffs: &[Complex64], final_time: f64, u: f64) -> Complex64 {
    if u.abs() < 1.0 {
        let (x, w) = gauss_legendre(32);
        let h = 0.5 * final_time;
        return x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let s = h * (1.0 + xi);
                let p = coeffs
                    .iter()
                    .rev()
                    .fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c);
                (I * u * s).exp() * p * (h * wi)
            })
            .sum();
    }
    let iu = I * u;
    let mut total = Complex64::new(0.0, 0.0);
    let mut deriv: Vec<Complex64> = coeffs.to_vec();
    let mut denom = iu;
    let mut sign = 1.0;
    while !deriv.is_empty() {
        let p = |s: f64| {
            deriv
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
        };
        total += sign * ((iu * final_time).exp() * p(final_time) - p(0.0)) / denom;
        deriv = deriv
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * j as f64)
            .collect();
        denom *= iu;
        sign = -sign;
    }
    total
}

/// Counts `|E(k,s,t)| > 1 + 1e-12` over random `k` on `∂Ω₂⁻(t)` and random `s < t`.
pub fn exponent_region_violations(curve: &BoundaryCurve, samples: usize, seed: u64) -> usize {
    let ctx = KernelContext::new(curve.clone());
    let big_t = curve.final_time();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..samples {
        let t = rng.gen_range(0.01..1.0) * big_t;
        let s = rng.gen_range(0.0..1.0) * t;
        let c = 0.5 * curve.l_prime(t);
        let k = if rng.gen_bool(0.5) {
            Complex64::new(c - rng.gen_range(0.0..50.0), 0.0)
        } else {
            Complex64::new(c, -rng.gen_range(0.0..50.0))
        };
        if ctx.e(k, s, t).norm() > 1.0 + 1e-12 {
            bad += 1;
        }
    }
    bad
}
