//! Quadrature engines.
//!
//! Production code only touches the product-integration weight tables and the
//! truncated integral against a decaying amplitude. The damped half-line rule is an
//! oracle: it regularises integrals that converge only conditionally.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_745_679_720,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One Gauss-Kronrod panel: (Kronrod value, |Kronrod - Gauss|).
fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kron += s * WGK[j];
        if j % 2 == 1 {
            gauss += s * WG[j / 2];
        }
    }
    (kron * h, ((kron - gauss) * h).norm())
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub evaluations: usize,
}

/// Globally adaptive Gauss-Kronrod integration over `[b_0, b_last]`, starting from the
/// panels delimited by `breakpoints`. The panel with the largest error estimate is
/// bisected until the summed estimate meets `max(abs_tol, rel_tol |I|)`.
pub fn integrate_adaptive<F>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Estimate>
where
    F: Fn(f64) -> Complex64,
{
    if breakpoints.len() < 2 {
        return Err(Error::DomainError("need at least two breakpoints".into()));
    }
    let mut heap = BinaryHeap::with_capacity(breakpoints.len() * 2);
    let mut value = Complex64::new(0.0, 0.0);
    let mut error = 0.0;
    for w in breakpoints.windows(2) {
        if w[1] == w[0] {
            continue;
        }
        let (v, e) = gk21(&f, w[0], w[1]);
        value += v;
        error += e;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value: v,
            error: e,
        });
    }
    let mut evaluations = 21 * heap.len();
    loop {
        let tol = abs_tol.max(rel_tol * value.norm());
        if error <= tol {
            break;
        }
        if heap.len() >= max_panels {
            return Err(Error::NoConvergence(format!(
                "adaptive quadrature stopped at {} panels with error {error:.3e} > {tol:.3e}",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("panel heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // Panel at floating-point resolution; accept what we have.
            heap.push(Panel { error: 0.0, ..worst });
            error -= worst.error;
            continue;
        }
        let (v1, e1) = gk21(&f, worst.a, m);
        let (v2, e2) = gk21(&f, m, worst.b);
        evaluations += 42;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Panel {
            a: worst.a,
            b: m,
            value: v1,
            error: e1,
        });
        heap.push(Panel {
            a: m,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // Re-sum to shed the drift of incremental updates.
    let value = heap.iter().map(|p| p.value).sum();
    let error = heap.iter().map(|p| p.error).sum();
    Ok(Estimate {
        value,
        error,
        evaluations,
    })
}

/// Breakpoints on `[a, b]` such that `phase` changes by at most about `max_step` radians
/// per panel, found by marching with a finite-difference estimate of the local frequency.
pub fn oscillation_breakpoints<P: Fn(f64) -> f64>(phase: &P, a: f64, b: f64, max_step: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let span = b - a;
    if !(span > 0.0) {
        pts.push(b);
        return pts;
    }
    let hmax = span / 4.0;
    let mut x = a;
    while x < b {
        let d = 1e-6 * (1.0 + x.abs());
        let freq = ((phase(x + d) - phase(x)) / d).abs();
        let mut h = max_step / (freq + max_step / hmax);
        // Look ahead so a rising frequency does not overshoot.
        let ahead = ((phase(x + h + d) - phase(x + h)) / d).abs();
        if ahead > freq {
            h = max_step / (ahead + max_step / hmax);
        }
        x = (x + h).min(b);
        if b - x < 1e-3 * h {
            x = b;
        }
        pts.push(x);
    }
    pts
}

/// Fixed composite Kronrod rule with `panels` equal panels. No error control.
pub fn fixed_panels<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, panels: usize) -> Complex64 {
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| gk21(&f, a + i as f64 * h, a + (i + 1) as f64 * h).0)
        .sum()
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Composite Gauss-Legendre with `panels` equal panels of `order` nodes each.
pub fn gauss_legendre_composite<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> Complex64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            acc += f(c + 0.5 * h * xi) * (0.5 * h * wi);
        }
    }
    acc
}

/// Gaussian damping levels and accuracy for the half-line oracle.
#[derive(Debug, Clone, PartialEq)]
pub struct DampedOscillatoryRule {
    /// Strictly decreasing, at least three levels.
    pub epsilons: Vec<f64>,
    /// Hard cap on the integration range; the effective range for each level is
    /// where `e^{-εk²}` drops below the quadrature tolerance.
    pub truncation_radius: f64,
    pub abs_tol: f64,
    pub expansion: DampingExpansion,
}

/// How the damped integral depends on ε near zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingExpansion {
    /// Analytic in ε. True for oscillatory integrands whose amplitude is smooth and of
    /// at most polynomial growth, which covers every oracle in this crate.
    Integer,
    /// Powers of √ε appear, as for slowly decaying non-oscillatory amplitudes such as
    /// `1/(1 + k²)`. Extrapolates in `√ε` and needs more levels.
    HalfInteger,
}

impl Default for DampedOscillatoryRule {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4],
            truncation_radius: 1e4,
            abs_tol: 1e-10,
            expansion: DampingExpansion::Integer,
        }
    }
}

impl DampedOscillatoryRule {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.len() < 3 {
            return Err(Error::ConstraintViolation(
                "damping needs at least three levels".into(),
            ));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) || self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::ConstraintViolation(
                "damping levels must be positive and strictly decreasing".into(),
            ));
        }
        if !(self.truncation_radius > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::ConstraintViolation(
                "truncation radius and tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Neville evaluation at zero of the polynomial through `(xs[i], ys[i])`.
pub fn extrapolate_to_zero(xs: &[f64], ys: &[Complex64]) -> Complex64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (p[i + 1] * xs[i] - p[i] * xs[i + m]) / (xs[i] - xs[i + m]);
        }
    }
    p[0]
}

/// `lim_{ε→0} ∫₀^∞ a(k) e^{iφ(k)} e^{-εk²} dk`, by polynomial extrapolation in ε.
///
/// Each damped integral is computed to `abs_tol / 100`. Convergence is judged by
/// comparing the full extrapolant with the one that drops the largest ε.
pub fn damped_oscillatory_integral<A, P>(
    amplitude: A,
    phase: P,
    rule: &DampedOscillatoryRule,
) -> Result<Complex64>
where
    A: Fn(f64) -> Complex64,
    P: Fn(f64) -> f64,
{
    rule.validate()?;
    let inner_tol = rule.abs_tol * 1e-2;
    let mut values = Vec::with_capacity(rule.epsilons.len());
    for &eps in &rule.epsilons {
        let reach = ((1.0 / inner_tol).ln() + 5.0) / eps;
        let radius = reach.sqrt().min(rule.truncation_radius);
        let bps = oscillation_breakpoints(&phase, 0.0, radius, 2.0);
        let est = integrate_adaptive(
            |k| amplitude(k) * Complex64::from_polar((-eps * k * k).exp(), phase(k)),
            &bps,
            inner_tol,
            0.0,
            bps.len() * 64 + 10_000,
        )?;
        values.push(est.value);
    }
    let xs: Vec<f64> = match rule.expansion {
        DampingExpansion::Integer => rule.epsilons.clone(),
        DampingExpansion::HalfInteger => rule.epsilons.iter().map(|e| e.sqrt()).collect(),
    };
    let full = extrapolate_to_zero(&xs, &values);
    let reduced = extrapolate_to_zero(&xs[1..], &values[1..]);
    let gap = (full - reduced).norm();
    if gap > 10.0 * rule.abs_tol * full.norm().max(1.0) {
        return Err(Error::NoConvergence(format!(
            "damping extrapolation unstable: successive limits differ by {gap:.3e}"
        )));
    }
    Ok(full)
}

/// Caller-supplied decay information for an integrand on `[0, ∞)`.
#[derive(Clone, Copy)]
pub struct DecayCertificate<'a> {
    /// Integration stops here.
    pub cutoff: f64,
    /// Pointwise bound on the amplitude modulus for `x >= cutoff`.
    pub envelope: &'a dyn Fn(f64) -> f64,
    /// Bound on `∫_cutoff^∞ envelope`.
    pub tail_bound: f64,
}

impl std::fmt::Debug for DecayCertificate<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DecayCertificate")
            .field("cutoff", &self.cutoff)
            .field("tail_bound", &self.tail_bound)
            .finish()
    }
}

/// Number of points at which a decay certificate is spot-checked.
const CERTIFICATE_SAMPLES: usize = 64;

/// Largest number of phase panels `truncated_decaying_oscillatory` will lay down.
pub const MAX_OSCILLATION_PANELS: usize = 2_000_000;

/// `∫₀^∞ a(x) e^{iφ(x)} dx` for an amplitude with certified decay.
///
/// Integrates adaptively on `[0, cutoff]` and bounds the rest by the certificate's
/// tail mass. The returned `error` is `quadrature error + tail_bound`. The envelope is
/// spot-checked on `[cutoff, 4 cutoff]`; any violation is reported rather than absorbed.
/// Too many oscillations on the truncated range is `NoConvergence`.
pub fn truncated_decaying_oscillatory<A, P>(
    amplitude: A,
    phase: P,
    cert: &DecayCertificate<'_>,
    abs_tol: f64,
) -> Result<Estimate>
where
    A: Fn(f64) -> Complex64,
    P: Fn(f64) -> f64,
{
    if !(cert.cutoff >= 0.0) || !(cert.tail_bound >= 0.0) {
        return Err(Error::BadDecayCertificate(format!(
            "cutoff {} and tail bound {} must be nonnegative",
            cert.cutoff, cert.tail_bound
        )));
    }
    for i in 0..CERTIFICATE_SAMPLES {
        let x = cert.cutoff * (1.0 + 3.0 * i as f64 / (CERTIFICATE_SAMPLES - 1) as f64);
        let a = amplitude(x).norm();
        let e = (cert.envelope)(x);
        if a > e * (1.0 + 1e-9) + 1e-300 {
            return Err(Error::BadDecayCertificate(format!(
                "|amplitude({x})| = {a:.6e} exceeds envelope {e:.6e}"
            )));
        }
    }
    if cert.cutoff == 0.0 {
        return Ok(Estimate {
            value: Complex64::new(0.0, 0.0),
            error: cert.tail_bound,
            evaluations: 0,
        });
    }
    let variation: f64 = (1..=1000)
        .map(|i| {
            let x = |j: usize| cert.cutoff * j as f64 / 1000.0;
            (phase(x(i)) - phase(x(i - 1))).abs()
        })
        .sum();
    if variation > 2.0 * MAX_OSCILLATION_PANELS as f64 {
        return Err(Error::NoConvergence(format!(
            "phase varies by {variation:.3e} rad over [0, {}], too many oscillations to resolve",
            cert.cutoff
        )));
    }
    let bps = oscillation_breakpoints(&phase, 0.0, cert.cutoff, 2.0);
    let est = integrate_adaptive(
        |x| amplitude(x) * Complex64::from_polar(1.0, phase(x)),
        &bps,
        abs_tol,
        0.0,
        bps.len() * 64 + 10_000,
    )?;
    Ok(Estimate {
        error: est.error + cert.tail_bound,
        ..est
    })
}

/// Which product-integration rule a weight table realises.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Singularity {
    /// Weight `(t - s)^{-1/2}`, integrated exactly against hat functions.
    InverseSqrt,
    /// No weight: the plain trapezoidal rule.
    None,
}

/// Lower-triangular product-integration weights. Row `n` approximates
/// `∫₀^{t_n} w(t_n - s) φ(s) ds` by `Σ_{m≤n} weights[n][m] φ(t_m)` with piecewise-linear `φ`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelWeightTable {
    grid: TimeGrid,
    singularity: Singularity,
    rows: Vec<Vec<f64>>,
}

impl AbelWeightTable {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn singularity(&self) -> Singularity {
        self.singularity
    }

    pub fn row(&self, n: usize) -> &[f64] {
        &self.rows[n]
    }

    pub fn apply(&self, n: usize, values: &[Complex64]) -> Complex64 {
        self.rows[n].iter().zip(values).map(|(w, v)| v * w).sum()
    }
}

/// Exact moments of the hat functions against `(t_n - s)^{-1/2}`.
///
/// On a cell `[a, b]` with `A = t_n - a`, `B = t_n - b`, `h = b - a` and
/// `D = √A - √B = h / (√A + √B)`, the left and right hat moments are
/// `(2/3) D² (√A + 2√B) / h` and `(2/3) D² (2√A + √B) / h`. They sum to `2D` and avoid
/// the cancellation of the textbook `A^{3/2} - B^{3/2}` form.
pub fn abel_weights(grid: &TimeGrid) -> AbelWeightTable {
    let t = grid.nodes();
    let rows = (0..t.len())
        .map(|n| {
            let mut row = vec![0.0; n + 1];
            for m in 0..n {
                let h = t[m + 1] - t[m];
                let ra = (t[n] - t[m]).sqrt();
                let rb = (t[n] - t[m + 1]).sqrt();
                let d = h / (ra + rb);
                let c = 2.0 / 3.0 * d * d / h;
                row[m] += c * (ra + 2.0 * rb);
                row[m + 1] += c * (2.0 * ra + rb);
            }
            row
        })
        .collect();
    AbelWeightTable {
        grid: grid.clone(),
        singularity: Singularity::InverseSqrt,
        rows,
    }
}

/// Trapezoidal weights, the smooth-kernel counterpart of [`abel_weights`].
pub fn trapezoid_weights(grid: &TimeGrid) -> AbelWeightTable {
    let t = grid.nodes();
    let rows = (0..t.len())
        .map(|n| {
            let mut row = vec![0.0; n + 1];
            for m in 0..n {
                let h = 0.5 * (t[m + 1] - t[m]);
                row[m] += h;
                row[m + 1] += h;
            }
            row
        })
        .collect();
    AbelWeightTable {
        grid: grid.clone(),
        singularity: Singularity::None,
        rows,
    }
}

pub fn weight_table(grid: &TimeGrid, singularity: Singularity) -> AbelWeightTable {
    match singularity {
        Singularity::InverseSqrt => abel_weights(grid),
        Singularity::None => trapezoid_weights(grid),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn kronrod_weights_are_consistent() {
        let sk: f64 = 2.0 * WGK[..10].iter().sum::<f64>() + WGK[10];
        let sg: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((sk - 2.0).abs() < 1e-15 && (sg - 2.0).abs() < 1e-15);
        // degree 31 exactness of the Kronrod rule
        let (v, _) = gk21(&|x: f64| c(x.powi(30)), -1.0, 1.0);
        assert!((v.re - 2.0 / 31.0).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_matches_kronrod_gauss_nodes() {
        let (x, w) = gauss_legendre(10);
        for j in 0..5 {
            assert!((x[9 - j] - XGK[2 * j + 1]).abs() < 1e-15);
            assert!((w[9 - j] - WG[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let est = integrate_adaptive(|x| c(1.0 / x.sqrt()), &[0.0, 1.0], 1e-10, 0.0, 10_000).unwrap();
        assert!((est.value.re - 2.0).abs() < 1e-9);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = integrate_adaptive(|x| c(1.0 / x), &[0.0, 1.0], 1e-12, 0.0, 50);
        assert!(matches!(r, Err(Error::NoConvergence(_))));
    }

    #[test]
    fn damped_rule_examples() {
        let rule = DampedOscillatoryRule::default();
        let v = damped_oscillatory_integral(|_| c(1.0), |k| k * k, &rule).unwrap();
        let expect = Complex64::from_polar(0.5 * PI.sqrt(), PI / 4.0);
        assert!((v - expect).norm() < 1e-9);
        // For e^{-k} the ε-series is only asymptotic, with coefficients (2n)!/n!, so the
        // levels must sit closer to zero.
        let decay = DampedOscillatoryRule {
            epsilons: (0..5).map(|j| 1e-3 / 2f64.powi(j)).collect(),
            ..rule.clone()
        };
        let v = damped_oscillatory_integral(|k| c((-k).exp()), |_| 0.0, &decay).unwrap();
        assert!((v - 1.0).norm() < 1e-9);
        // Without oscillation the damping error carries √ε terms.
        assert!(damped_oscillatory_integral(|k| c(1.0 / (1.0 + k * k)), |_| 0.0, &rule).is_err());
        let slow = DampedOscillatoryRule {
            epsilons: (0..8).map(|j| 1e-2 / 4f64.powi(j)).collect(),
            expansion: DampingExpansion::HalfInteger,
            ..rule
        };
        let v = damped_oscillatory_integral(|k| c(1.0 / (1.0 + k * k)), |_| 0.0, &slow).unwrap();
        assert!((v.re - PI / 2.0).abs() < 10.0 * slow.abs_tol, "{v}");
    }

    #[test]
    fn damped_rule_validation() {
        let mut rule = DampedOscillatoryRule {
            epsilons: vec![1e-2, 1e-3],
            ..Default::default()
        };
        assert!(rule.validate().is_err());
        rule.epsilons = vec![1e-3, 1e-2, 1e-4];
        assert!(rule.validate().is_err());
    }

    #[test]
    fn neville_is_exact_on_polynomials() {
        let xs = [0.4, 0.2, 0.1, 0.05];
        let ys: Vec<_> = xs.iter().map(|x| c(3.0 - x + 2.0 * x * x * x)).collect();
        assert!((extrapolate_to_zero(&xs, &ys) - 3.0).norm() < 1e-13);
    }

    #[test]
    fn truncated_integral_trivial_cases() {
        let env = |x: f64| (-x).exp();
        let cert = DecayCertificate {
            cutoff: 40.0,
            envelope: &env,
            tail_bound: (-40.0f64).exp(),
        };
        let v = truncated_decaying_oscillatory(|x| c((-x).exp()), |_| 0.0, &cert, 1e-13).unwrap();
        assert!((v.value - 1.0).norm() < 1e-12);
        let z = truncated_decaying_oscillatory(|_| c(0.0), |x| x * x, &cert, 1e-13).unwrap();
        assert_eq!(z.value, c(0.0));
    }

    #[test]
    fn truncated_integral_rejects_bad_envelope() {
        let env = |x: f64| (-2.0 * x).exp();
        let cert = DecayCertificate {
            cutoff: 5.0,
            envelope: &env,
            tail_bound: 1e-5,
        };
        let r = truncated_decaying_oscillatory(|x| c((-x).exp()), |_| 0.0, &cert, 1e-10);
        assert!(matches!(r, Err(Error::BadDecayCertificate(_))));
    }

    #[test]
    fn truncated_gaussian_example_against_fine_fixed_rule() {
        // q₀(x) = e^{-x²}, amplitude q₀'(x) = -2x e^{-x²}, phase (l(t) - x)²/(4t), t = 1, l = 0.5
        let amp = |x: f64| c(-2.0 * x * (-x * x).exp());
        let phase = |x: f64| (0.5 - x) * (0.5 - x) / 4.0;
        let env = |x: f64| 2.0 * x * (-x * x).exp();
        let mut prev_err = f64::INFINITY;
        let reference = fixed_panels(|x| amp(x) * Complex64::from_polar(1.0, phase(x)), 0.0, 12.0, 400);
        for &cut in &[3.0f64, 4.0, 5.0] {
            let tail = (-cut * cut).exp();
            let cert = DecayCertificate {
                cutoff: cut,
                envelope: &env,
                tail_bound: tail,
            };
            let est = truncated_decaying_oscillatory(amp, phase, &cert, 1e-13).unwrap();
            let err = (est.value - reference).norm();
            assert!(
                err <= est.error + 1e-13,
                "cutoff {cut}: {err:e} > {:e}",
                est.error
            );
            assert!(err < prev_err);
            prev_err = err;
        }
        let fine = fixed_panels(|x| amp(x) * Complex64::from_polar(1.0, phase(x)), 0.0, 12.0, 800);
        assert!((fine - reference).norm() < 1e-14);
    }

    #[test]
    fn abel_rows_integrate_constants_and_lines() {
        for grid in [
            TimeGrid::uniform(1.0, 1).unwrap(),
            TimeGrid::uniform(1.0, 2).unwrap(),
            TimeGrid::graded(2.0, 17, 1.7).unwrap(),
        ] {
            let w = abel_weights(&grid);
            for (n, &t) in grid.nodes().iter().enumerate() {
                let row = w.row(n);
                assert!(row.iter().all(|x| *x >= 0.0));
                let s0: f64 = row.iter().sum();
                assert!((s0 - 2.0 * t.sqrt()).abs() < 1e-12 * (1.0 + t));
                let s1: f64 = row.iter().zip(grid.nodes()).map(|(w, s)| w * s).sum();
                assert!((s1 - 4.0 / 3.0 * t.powf(1.5)).abs() < 1e-12 * (1.0 + t));
            }
        }
        let w = abel_weights(&TimeGrid::uniform(1.0, 2).unwrap());
        assert!((w.row(1).iter().sum::<f64>() - 2.0 * 0.5f64.sqrt()).abs() < 1e-15);
        assert!((w.row(2).iter().sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn trapezoid_rows_sum_to_node() {
        let grid = TimeGrid::graded(1.0, 9, 1.3).unwrap();
        let w = trapezoid_weights(&grid);
        for (n, &t) in grid.nodes().iter().enumerate() {
            assert!((w.row(n).iter().sum::<f64>() - t).abs() < 1e-15);
        }
    }

    #[test]
    fn breakpoints_follow_the_frequency() {
        let bps = oscillation_breakpoints(&|k: f64| k * k, 0.0, 50.0, 2.0);
        for w in bps.windows(2) {
            let dphi = w[1] * w[1] - w[0] * w[0];
            assert!(dphi <= 2.5, "{w:?}");
        }
        assert_eq!(*bps.last().unwrap(), 50.0);
    }
}
