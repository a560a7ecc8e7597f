//! Complex error functions and the two oscillatory integrals built from them.
//!
//! Everything is routed through the Faddeeva function `w(z) = exp(-z²) erfc(-iz)`
//! with arguments kept in the closed upper half-plane, where `|w| <= 1` and no
//! exponential overflow can occur.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use errorfunctions::ComplexErrorFunctions;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `e^{3πi/4}`.
const ROT_3PI_4: Complex64 = Complex64::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2);

pub fn sqrt_pi() -> f64 {
    PI.sqrt()
}

/// `e^{iθ}`.
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Faddeeva function `w(z)`.
///
/// Accurate to about 1e-13 relative in the upper half-plane and on the real axis.
/// In the lower half-plane `w` grows like `exp(y² - x²)` and overflows to infinity
/// once `Im z` falls below roughly `-26`; callers in this crate never go there.
pub fn faddeeva(z: Complex64) -> Complex64 {
    z.w()
}

pub fn erfc(z: Complex64) -> Complex64 {
    z.erfc()
}

pub fn erfi(z: Complex64) -> Complex64 {
    z.erfi()
}

/// `∫_{λ₀}^∞ e^{-iλ²} dλ`.
///
/// Rotating the contour by `e^{-iπ/4}` gives `e^{-iπ/4}(√π/2) erfc(e^{iπ/4}λ₀)`, and
/// `erfc(z) = e^{-z²} w(iz)`. For `λ₀ < 0` the reflection `erfc(z) = 2 - erfc(-z)`
/// keeps the Faddeeva argument in the upper half-plane.
pub fn fresnel_tail(lambda0: f64) -> Complex64 {
    let pre = cis(-PI / 4.0) * (0.5 * sqrt_pi());
    let tail = cis(-lambda0 * lambda0) * faddeeva(ROT_3PI_4 * lambda0.abs());
    if lambda0 >= 0.0 {
        pre * tail
    } else {
        pre * (Complex64::new(2.0, 0.0) - tail)
    }
}

/// `∫₀^∞ e^{iak² - bk} dk` for `a > 0` and real `b`.
///
/// Equal to `(√π/2)(e^{iπ/4}/√a) w(e^{3πi/4} b / (2√a))`. Negative `b` is not needed by
/// the kernel but is handled through `w(z) = 2e^{-z²} - w(-z)`.
pub fn halfline_quadratic_phase(a: f64, b: f64) -> Result<Complex64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::DegenerateScale(format!(
            "quadratic phase scale a = {a} must be positive"
        )));
    }
    let ra = a.sqrt();
    let pre = cis(PI / 4.0) * (0.5 * sqrt_pi() / ra);
    let z = ROT_3PI_4 * (b.abs() / (2.0 * ra));
    let w = if b >= 0.0 {
        faddeeva(z)
    } else {
        // e^{-z²} with z = e^{3πi/4} |b|/(2√a) is e^{i b²/(4a)}
        cis(b * b / (4.0 * a)) * 2.0 - faddeeva(z)
    };
    Ok(pre * w)
}
