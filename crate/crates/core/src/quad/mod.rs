//! Integration engine for integrands with origin, diagonal and logarithmic
//! singularities.

mod adaptive;
mod mc;
mod rule;

use serde::{Deserialize, Serialize};

pub use adaptive::{integrate_1d, integrate_1d_singular, integrate_radial, QuadOptions};
pub use mc::{mc_double_integral, mc_integral, McConfig};
pub(crate) use mc::{
    check_exponent, mean_var, sample_ball, sample_exterior, sample_pair, stream_rng, variance_warnings,
    MAX_DIM,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Adaptive1d,
    PolarRadial,
    McPairs,
    McPoints,
    Nested,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub method: Method,
    pub evaluations: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl QuadratureResult {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            error_estimate: 0.0,
            method: Method::ClosedForm,
            evaluations: 1,
            seed: None,
            warnings: Vec::new(),
        }
    }

    pub fn relative_error(&self) -> f64 {
        if self.value == 0.0 {
            if self.error_estimate == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.error_estimate / self.value.abs()
        }
    }

    pub fn is_converged(&self) -> bool {
        self.warnings.is_empty() && self.value.is_finite() && self.error_estimate.is_finite()
    }

    /// Multiplies value and error by `c`.
    pub fn scale(mut self, c: f64) -> Self {
        self.value *= c;
        self.error_estimate *= c.abs();
        self
    }

    /// `value^(1/k)` with first-order error propagation.
    pub fn root(mut self, k: f64) -> Self {
        let v = self.value.max(0.0);
        let out = v.powf(1.0 / k);
        self.error_estimate = if v > 0.0 {
            out * self.error_estimate / (k * v)
        } else if self.error_estimate > 0.0 {
            self.error_estimate.powf(1.0 / k)
        } else {
            0.0
        };
        self.value = out;
        self
    }

    /// Sum of two independent estimates.
    pub fn add(mut self, other: QuadratureResult) -> Self {
        self.value += other.value;
        self.error_estimate += other.error_estimate;
        self.evaluations += other.evaluations;
        if self.method != other.method {
            self.method = Method::Nested;
        }
        self.seed = self.seed.or(other.seed);
        self.warnings.extend(other.warnings);
        self
    }
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Surface area of the unit sphere in `R^d`.
pub fn unit_sphere_area(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / libm::tgamma(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(1) - 2.0).abs() < 1e-15);
        assert!((unit_sphere_area(2) - 2.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_sphere_area(3) - 4.0 * std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let s: CompensatedSum = [1e16, 1.0, -1e16, 1.0].into_iter().collect();
        assert_eq!(s.total(), 2.0);
    }

    #[test]
    fn root_propagates_error() {
        let r = QuadratureResult { error_estimate: 0.04, ..QuadratureResult::exact(4.0) }.root(2.0);
        assert_eq!(r.value, 2.0);
        assert!((r.error_estimate - 0.01).abs() < 1e-15);
    }
}
