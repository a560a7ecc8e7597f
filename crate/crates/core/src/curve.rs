//! The moving boundary `x = l(t)`.
//!
//! Every kernel formula downstream relies on strict convexity, `l'' > 0`, and on
//! `l(0) = 0`. Both are validated at construction; a curve that exists is admissible.
//! Monotonicity of `l` itself is not required, so `l'(0) < 0` is accepted and
//! reported through [`BoundaryCurve::initially_decreasing`].

use crate::error::{Error, Result};

/// Number of interior samples used to validate `l'' > 0`.
pub const CONVEXITY_SAMPLES: usize = 1000;

const ORIGIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    /// `l(t) = sum_j c_j t^j`.
    Polynomial { coeffs: Vec<f64> },
    /// Not-a-knot cubic spline through `(nodes, values)`.
    Tabulated(CubicSpline),
}

/// An admissible boundary curve on `[0, T]`. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCurve {
    final_time: f64,
    kind: CurveKind,
}

impl BoundaryCurve {
    pub fn polynomial(coeffs: Vec<f64>, final_time: f64) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::ConstraintViolation(
                "polynomial coefficients must be finite".into(),
            ));
        }
        let mut coeffs = coeffs;
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self::validated(final_time, CurveKind::Polynomial { coeffs })
    }

    /// Interpolates tabulated samples with a C² cubic spline. The spline's second
    /// derivative is piecewise linear in its nodal values, so positivity at the nodes
    /// is equivalent to positivity everywhere; it is checked there and never repaired.
    pub fn tabulated(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let spline = CubicSpline::not_a_knot(nodes, values)?;
        if spline.nodes[0] != 0.0 {
            return Err(Error::ConstraintViolation(format!(
                "tabulated curve must start at t = 0, got {}",
                spline.nodes[0]
            )));
        }
        if let Some((i, m)) = spline.second.iter().enumerate().find(|(_, m)| !(**m > 0.0)) {
            return Err(Error::ConstraintViolation(format!(
                "spline second derivative {m} <= 0 at node {i} (t = {})",
                spline.nodes[i]
            )));
        }
        let final_time = *spline.nodes.last().unwrap();
        Self::validated(final_time, CurveKind::Tabulated(spline))
    }

    fn validated(final_time: f64, kind: CurveKind) -> Result<Self> {
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(Error::ConstraintViolation(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        let curve = Self { final_time, kind };
        let origin = curve.l(0.0);
        if origin.abs() > ORIGIN_TOL {
            return Err(Error::ConstraintViolation(format!("l(0) = {origin}, expected 0")));
        }
        for i in 0..=CONVEXITY_SAMPLES {
            let t = final_time * i as f64 / CONVEXITY_SAMPLES as f64;
            let c = curve.l_second(t);
            if !(c > 0.0) {
                return Err(Error::ConstraintViolation(format!(
                    "l''({t}) = {c} is not positive; the boundary must be strictly convex"
                )));
            }
        }
        Ok(curve)
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            CurveKind::Polynomial { .. } => "polynomial",
            CurveKind::Tabulated(_) => "tabulated",
        }
    }

    /// Convex but initially moving left, `l'(0) < 0`.
    pub fn initially_decreasing(&self) -> bool {
        self.l_prime(0.0) < 0.0
    }

    pub fn l(&self, t: f64) -> f64 {
        match &self.kind {
            CurveKind::Polynomial { coeffs } => coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c),
            CurveKind::Tabulated(s) => s.value(t),
        }
    }

    pub fn l_prime(&self, t: f64) -> f64 {
        match &self.kind {
            CurveKind::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (j, c)| acc * t + j as f64 * c),
            CurveKind::Tabulated(s) => s.derivative(t),
        }
    }

    pub fn l_second(&self, t: f64) -> f64 {
        match &self.kind {
            CurveKind::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(2)
                .rev()
                .fold(0.0, |acc, (j, c)| acc * t + (j * (j - 1)) as f64 * c),
            CurveKind::Tabulated(s) => s.second_derivative(t),
        }
    }

    /// Chord slope `(l(t) - l(s)) / (t - s)`, equal to `l'(s)` when `s == t`.
    ///
    /// Polynomials use the exact divided difference, so there is no cancellation
    /// for nearby arguments.
    pub fn chord_slope(&self, s: f64, t: f64) -> f64 {
        if s == t {
            return self.l_prime(s);
        }
        match &self.kind {
            CurveKind::Polynomial { coeffs } => {
                // (t^j - s^j)/(t - s) = sum_{i<j} t^i s^{j-1-i}, built by the recurrence
                // d_j = t d_{j-1} + s^{j-1}.
                let mut d = 0.0;
                let mut s_pow = 1.0;
                let mut acc = 0.0;
                for c in coeffs.iter().skip(1) {
                    d = t * d + s_pow;
                    s_pow *= s;
                    acc += c * d;
                }
                acc
            }
            CurveKind::Tabulated(_) => (self.l(t) - self.l(s)) / (t - s),
        }
    }

    /// `[l'(0)/2, l'(T)/2]`, the domain of the slope inverse.
    pub fn slope_interval(&self) -> (f64, f64) {
        (0.5 * self.l_prime(0.0), 0.5 * self.l_prime(self.final_time))
    }

    pub fn slope_inverse_map(&self) -> SlopeInverse<'_> {
        let (lo, hi) = self.slope_interval();
        SlopeInverse { curve: self, lo, hi }
    }

    /// `S(k_R)`: the unique `s` in `[0, T]` with `l'(s)/2 = k_R`.
    pub fn slope_inverse(&self, k_r: f64) -> Result<f64> {
        self.slope_inverse_map().eval(k_r)
    }
}

/// Inverse of the half-slope map `s -> l'(s)/2`.
#[derive(Debug, Clone, Copy)]
pub struct SlopeInverse<'a> {
    curve: &'a BoundaryCurve,
    lo: f64,
    hi: f64,
}

impl SlopeInverse<'_> {
    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Bisection on the increasing function `l'(s)/2 - k_R`. Terminates when the
    /// residual meets `1e-12 (1 + |k_R|)` or the bracket collapses to adjacent floats.
    pub fn eval(&self, k_r: f64) -> Result<f64> {
        if !(k_r >= self.lo && k_r <= self.hi) {
            return Err(Error::OutOfDomain {
                value: k_r,
                lo: self.lo,
                hi: self.hi,
            });
        }
        let tol = 1e-12 * (1.0 + k_r.abs());
        let g = |s: f64| 0.5 * self.curve.l_prime(s) - k_r;
        let (mut a, mut b) = (0.0, self.curve.final_time);
        let (ga, gb) = (g(a), g(b));
        if ga.abs() <= tol && ga.abs() <= gb.abs() {
            return Ok(a);
        }
        if gb.abs() <= tol {
            return Ok(b);
        }
        let mut best = (f64::INFINITY, a);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let gm = g(m);
            if gm.abs() < best.0 {
                best = (gm.abs(), m);
            }
            if gm == 0.0 {
                return Ok(m);
            }
            if gm < 0.0 {
                a = m;
            } else {
                b = m;
            }
            if gm.abs() <= tol && (b - a) <= 1e-15 * (1.0 + b.abs()) {
                break;
            }
        }
        Ok(best.1)
    }

    /// `dS/dk_R = 2 / l''(S(k_R))`.
    pub fn derivative(&self, k_r: f64) -> Result<f64> {
        let s = self.eval(k_r)?;
        Ok(2.0 / self.curve.l_second(s))
    }
}

/// C² cubic spline with not-a-knot end conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    nodes: Vec<f64>,
    values: Vec<f64>,
    /// Second derivative at each node.
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn not_a_knot(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = nodes.len();
        if n != values.len() {
            return Err(Error::ConstraintViolation(format!(
                "{} nodes but {} values",
                n,
                values.len()
            )));
        }
        if n < 4 {
            return Err(Error::ConstraintViolation(format!(
                "a not-a-knot spline needs at least 4 nodes, got {n}"
            )));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::ConstraintViolation(
                "spline nodes must be strictly increasing with finite values".into(),
            ));
        }
        let h: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        let last = n - 1;
        // Unknowns M_1..M_{n-2}; M_0 and M_{n-1} are eliminated through the
        // not-a-knot conditions (third derivative continuous at nodes 1 and n-2).
        let m = n - 2;
        let mut sub = vec![0.0; m];
        let mut diag = vec![0.0; m];
        let mut sup = vec![0.0; m];
        let mut rhs = vec![0.0; m];
        for r in 0..m {
            let i = r + 1;
            sub[r] = h[i - 1];
            diag[r] = 2.0 * (h[i - 1] + h[i]);
            sup[r] = h[i];
            rhs[r] = 6.0 * ((values[i + 1] - values[i]) / h[i] - (values[i] - values[i - 1]) / h[i - 1]);
        }
        // n >= 4 guarantees at least two unknowns.
        // M_0 = ((h0 + h1) M_1 - h0 M_2) / h1
        let (h0, h1) = (h[0], h[1]);
        diag[0] += h0 * (h0 + h1) / h1;
        sup[0] -= h0 * h0 / h1;
        // M_last = ((h_{l-2} + h_{l-1}) M_{l-1} - h_{l-1} M_{l-2}) / h_{l-2}
        let (ha, hb) = (h[last - 2], h[last - 1]);
        diag[m - 1] += hb * (ha + hb) / ha;
        sub[m - 1] -= hb * hb / ha;
        let inner = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;
        let mut second = Vec::with_capacity(n);
        let m0 = ((h0 + h1) * inner[0] - h0 * inner[1]) / h1;
        second.push(m0);
        second.extend_from_slice(&inner);
        let ml = ((ha + hb) * inner[m - 1] - hb * inner[m - 2]) / ha;
        second.push(ml);
        Ok(Self {
            nodes,
            values,
            second,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn second_derivatives(&self) -> &[f64] {
        &self.second
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.nodes.len();
        match self
            .nodes
            .binary_search_by(|x| x.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    fn pieces(&self, t: f64) -> (f64, f64, f64, f64, f64, f64, f64) {
        let i = self.locate(t);
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        (
            x1 - t,
            t - x0,
            h,
            self.second[i],
            self.second[i + 1],
            self.values[i],
            self.values[i + 1],
        )
    }

    pub fn value(&self, t: f64) -> f64 {
        let (a, b, h, m0, m1, y0, y1) = self.pieces(t);
        m0 * a * a * a / (6.0 * h)
            + m1 * b * b * b / (6.0 * h)
            + (y0 / h - m0 * h / 6.0) * a
            + (y1 / h - m1 * h / 6.0) * b
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let (a, b, h, m0, m1, y0, y1) = self.pieces(t);
        -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - (y0 / h - m0 * h / 6.0) + (y1 / h - m1 * h / 6.0)
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        let (a, b, h, m0, m1, _, _) = self.pieces(t);
        (m0 * a + m1 * b) / h
    }
}

fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(Error::ConstraintViolation("singular spline system".into()));
    }
    c[0] = sup[0] / denom;
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - sub[i] * c[i - 1];
        if denom == 0.0 {
            return Err(Error::ConstraintViolation("singular spline system".into()));
        }
        c[i] = sup[i] / denom;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parabola() -> BoundaryCurve {
        BoundaryCurve::polynomial(vec![0.0, 0.0, 0.5], 1.0).unwrap()
    }

    fn shifted() -> BoundaryCurve {
        BoundaryCurve::polynomial(vec![0.0, 1.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn polynomial_derivatives() {
        let c = parabola();
        for &t in &[0.0, 0.3, 1.0] {
            assert_eq!(c.l_prime(t), t);
            assert_eq!(c.l_second(t), 1.0);
        }
        let c = shifted();
        assert_eq!(c.l_prime(0.0), 1.0);
        assert_eq!(c.l_second(0.7), 2.0);
    }

    #[test]
    fn concave_curve_is_rejected() {
        let err = BoundaryCurve::polynomial(vec![0.0, 0.0, -1.0], 1.0).unwrap_err();
        assert!(matches!(err, Error::ConstraintViolation(_)));
    }

    #[test]
    fn nonzero_origin_is_rejected() {
        assert!(matches!(
            BoundaryCurve::polynomial(vec![0.1, 0.0, 1.0], 1.0),
            Err(Error::ConstraintViolation(_))
        ));
    }

    #[test]
    fn linear_curve_is_not_strictly_convex() {
        assert!(BoundaryCurve::polynomial(vec![0.0, 2.0], 1.0).is_err());
    }

    #[test]
    fn initially_decreasing_curves_are_flagged_not_rejected() {
        let c = BoundaryCurve::polynomial(vec![0.0, -0.5, 1.0], 1.0).unwrap();
        assert!(c.initially_decreasing());
        assert!(!parabola().initially_decreasing());
    }

    #[test]
    fn slope_inverse_examples() {
        assert_eq!(parabola().slope_inverse(0.25).unwrap(), 0.5);
        assert_eq!(parabola().slope_inverse(0.0).unwrap(), 0.0);
        // 1 + 2s = 1.5, bisection oracle
        let (mut a, mut b) = (0.0f64, 1.0f64);
        for _ in 0..100 {
            let m = 0.5 * (a + b);
            if 1.0 + 2.0 * m < 1.5 {
                a = m
            } else {
                b = m
            }
        }
        let s = shifted().slope_inverse(0.75).unwrap();
        assert!((s - a).abs() < 1e-14 && (s - 0.25).abs() < 1e-14);
    }

    #[test]
    fn slope_inverse_outside_interval() {
        assert!(matches!(
            parabola().slope_inverse(0.6),
            Err(Error::OutOfDomain { .. })
        ));
        assert!(matches!(
            shifted().slope_inverse(0.4),
            Err(Error::OutOfDomain { .. })
        ));
    }

    #[test]
    fn slope_inverse_round_trip_on_200_points() {
        for c in [
            parabola(),
            shifted(),
            BoundaryCurve::polynomial(vec![0.0, -0.3, 0.2, 0.4], 1.0).unwrap(),
        ] {
            let map = c.slope_inverse_map();
            for i in 0..200 {
                let s = i as f64 / 199.0;
                let back = map.eval(0.5 * c.l_prime(s)).unwrap();
                assert!((back - s).abs() < 1e-10, "s = {s}, got {back}");
            }
        }
    }

    #[test]
    fn slope_inverse_derivative_matches_curvature() {
        let c = shifted();
        let d = c.slope_inverse_map().derivative(1.2).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chord_slope_is_exact_for_polynomials() {
        let c = BoundaryCurve::polynomial(vec![0.0, 0.1, 0.5, 0.25], 1.0).unwrap();
        let (s, t) = (0.3, 0.3 + 1e-9);
        let exact = 0.1 + 0.5 * (s + t) + 0.25 * (t * t + t * s + s * s);
        assert!((c.chord_slope(s, t) - exact).abs() < 1e-15);
        assert_eq!(c.chord_slope(0.4, 0.4), c.l_prime(0.4));
    }

    #[test]
    fn spline_reproduces_a_cubic() {
        let f = |t: f64| 0.2 * t + t * t + 0.3 * t * t * t;
        let nodes: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let values = nodes.iter().map(|&t| f(t)).collect();
        let c = BoundaryCurve::tabulated(nodes, values).unwrap();
        for &t in &[0.0, 0.05, 0.33, 0.5, 0.91, 1.0] {
            assert!((c.l(t) - f(t)).abs() < 1e-12);
            assert!((c.l_prime(t) - (0.2 + 2.0 * t + 0.9 * t * t)).abs() < 1e-11);
            assert!((c.l_second(t) - (2.0 + 1.8 * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn spline_is_c2_across_nodes() {
        let nodes: Vec<f64> = (0..=8).map(|i| (i as f64 / 8.0).powf(1.3)).collect();
        let values: Vec<f64> = nodes.iter().map(|&t| t.exp() - 1.0 - 0.5 * t).collect();
        let c = BoundaryCurve::tabulated(nodes.clone(), values).unwrap();
        let eps = 1e-9;
        for &x in &nodes[1..nodes.len() - 1] {
            let CurveKind::Tabulated(s) = c.kind() else {
                unreachable!()
            };
            assert!((s.value(x - eps) - s.value(x + eps)).abs() < 1e-8);
            assert!((s.derivative(x - eps) - s.derivative(x + eps)).abs() < 1e-7);
            assert!((s.second_derivative(x - eps) - s.second_derivative(x + eps)).abs() < 1e-6);
        }
    }

    #[test]
    fn tabulated_rejects_nonconvex_data() {
        let nodes: Vec<f64> = (0..=6).map(|i| i as f64 / 6.0).collect();
        let values = nodes.iter().map(|&t| t.sin()).collect();
        assert!(matches!(
            BoundaryCurve::tabulated(nodes, values),
            Err(Error::ConstraintViolation(_))
        ));
        assert!(BoundaryCurve::tabulated(vec![0.0, 0.5, 1.0], vec![0.0, 0.1, 0.5]).is_err());
    }

    #[test]
    fn four_node_spline_is_a_single_cubic() {
        let f = |t: f64| t * t + t * t * t;
        let nodes = vec![0.0, 0.3, 0.6, 1.0];
        let values = nodes.iter().map(|&t| f(t)).collect();
        let c = BoundaryCurve::tabulated(nodes, values).unwrap();
        assert!((c.l(0.45) - f(0.45)).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn chord_slope_lies_between_endpoint_slopes(
            s in 0.0f64..1.0, gap in 1e-6f64..1.0,
            c1 in -1.0f64..1.0, c2 in 0.05f64..2.0, c3 in 0.0f64..1.0
        ) {
            let curve = BoundaryCurve::polynomial(vec![0.0, c1, c2, c3], 1.0).unwrap();
            let t = (s + gap).min(1.0);
            prop_assume!(t > s);
            let m = curve.chord_slope(s, t);
            prop_assert!(m >= curve.l_prime(s) - 1e-12 && m <= curve.l_prime(t) + 1e-12);
        }

        #[test]
        fn derivatives_match_central_differences(t in 0.05f64..0.95, c3 in 0.0f64..1.0) {
            let curve = BoundaryCurve::polynomial(vec![0.0, 0.2, 0.7, c3], 1.0).unwrap();
            let h = 1e-4;
            let d1 = (curve.l(t + h) - curve.l(t - h)) / (2.0 * h);
            let d2 = (curve.l(t + h) - 2.0 * curve.l(t) + curve.l(t - h)) / (h * h);
            prop_assert!((d1 - curve.l_prime(t)).abs() < 10.0 * h * h);
            prop_assert!((d2 - curve.l_second(t)).abs() < 1e-5);
        }
    }
}
