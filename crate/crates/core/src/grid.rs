//! Time discretisation and complex samples living on it.

use std::ops::{Deref, DerefMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Strictly increasing time nodes `0 = t_0 < t_1 < ... < t_N = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::GridError(format!(
                "need at least two nodes, got {}",
                nodes.len()
            )));
        }
        if nodes[0] != 0.0 {
            return Err(Error::GridError(format!(
                "first node must be 0, got {}",
                nodes[0]
            )));
        }
        if let Some(i) = nodes.windows(2).position(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::GridError(format!(
                "nodes not strictly increasing at index {}: {} -> {}",
                i + 1,
                nodes[i],
                nodes[i + 1]
            )));
        }
        Ok(Self { nodes })
    }

    /// `intervals` equal steps on `[0, final_time]`.
    pub fn uniform(final_time: f64, intervals: usize) -> Result<Self> {
        Self::graded(final_time, intervals, 1.0)
    }

    /// Graded nodes `t_n = T (n/N)^gamma`; `gamma = 1` is uniform.
    pub fn graded(final_time: f64, intervals: usize, gamma: f64) -> Result<Self> {
        if !(final_time > 0.0) || !final_time.is_finite() {
            return Err(Error::GridError(format!(
                "final time must be positive, got {final_time}"
            )));
        }
        if intervals == 0 {
            return Err(Error::GridError("need at least one interval".into()));
        }
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::GridError(format!(
                "grading exponent must be >= 1, got {gamma}"
            )));
        }
        let n = intervals as f64;
        let nodes = (0..=intervals)
            .map(|k| {
                if k == intervals {
                    final_time
                } else {
                    final_time * (k as f64 / n).powf(gamma)
                }
            })
            .collect();
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Number of nodes (intervals + 1).
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn final_time(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn sample<F: Fn(f64) -> Complex64>(&self, f: F) -> ComplexSignal {
        ComplexSignal::new(self.nodes.iter().map(|&t| f(t)).collect())
    }

    /// Cubic (four-point Lagrange) interpolation of grid samples at `t`.
    pub fn interpolate(&self, values: &[Complex64], t: f64) -> Complex64 {
        debug_assert_eq!(values.len(), self.nodes.len());
        let n = self.nodes.len();
        if n < 4 {
            let i = self.cell(t).min(n - 2);
            let (a, b) = (self.nodes[i], self.nodes[i + 1]);
            let w = (t - a) / (b - a);
            return values[i] * (1.0 - w) + values[i + 1] * w;
        }
        let i = self.cell(t);
        let start = i.saturating_sub(1).min(n - 4);
        let xs = &self.nodes[start..start + 4];
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..4 {
            let mut basis = 1.0;
            for m in 0..4 {
                if m != j {
                    basis *= (t - xs[m]) / (xs[j] - xs[m]);
                }
            }
            acc += values[start + j] * basis;
        }
        acc
    }

    fn cell(&self, t: f64) -> usize {
        match self
            .nodes
            .binary_search_by(|x| x.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(self.nodes.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.nodes.len() - 2),
        }
    }
}

/// Complex samples, one per grid node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexSignal(Vec<Complex64>);

impl ComplexSignal {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |self - reference| / max |reference|`; absolute when the reference vanishes.
    pub fn rel_linf_error(&self, reference: &[Complex64]) -> f64 {
        assert_eq!(self.0.len(), reference.len(), "signal length mismatch");
        let err = self
            .0
            .iter()
            .zip(reference)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let scale = reference.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            err / scale
        } else {
            err
        }
    }
}

impl Deref for ComplexSignal {
    type Target = [Complex64];
    fn deref(&self) -> &[Complex64] {
        &self.0
    }
}

impl DerefMut for ComplexSignal {
    fn deref_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }
}

impl From<Vec<Complex64>> for ComplexSignal {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_has_exact_endpoints() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(g.intervals(), 4);
    }

    #[test]
    fn graded_grid_clusters_at_origin() {
        let g = TimeGrid::graded(2.0, 4, 2.0).unwrap();
        assert_eq!(g.nodes(), &[0.0, 0.125, 0.5, 1.125, 2.0]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(
            TimeGrid::new(vec![0.0, 0.5, 0.5]),
            Err(Error::GridError(_))
        ));
        assert!(matches!(TimeGrid::new(vec![0.1, 0.5]), Err(Error::GridError(_))));
        assert!(TimeGrid::uniform(-1.0, 3).is_err());
        assert!(TimeGrid::graded(1.0, 3, 0.5).is_err());
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let g = TimeGrid::graded(1.0, 9, 1.5).unwrap();
        let f = |t: f64| Complex64::new(t * t * t - t, 2.0 * t * t);
        let v = g.sample(f);
        for &t in &[0.0, 0.013, 0.4, 0.77, 0.999, 1.0] {
            assert!((g.interpolate(&v, t) - f(t)).norm() < 1e-12);
        }
    }

    #[test]
    fn relative_error_against_zero_reference_is_absolute() {
        let a = ComplexSignal::new(vec![Complex64::new(1e-3, 0.0)]);
        assert_eq!(a.rel_linf_error(&[Complex64::new(0.0, 0.0)]), 1e-3);
    }
}
