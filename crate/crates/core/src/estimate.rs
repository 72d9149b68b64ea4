//! Numerical values with error bars and an explicit divergence sentinel.

/// A scalar computed by quadrature. `diverged` marks the `+inf` sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub error: f64,
    pub diverged: bool,
}

impl Quantity {
    pub const fn finite(value: f64, error: f64) -> Self {
        Quantity { value, error, diverged: false }
    }

    pub const fn divergent() -> Self {
        Quantity { value: f64::INFINITY, error: 0.0, diverged: true }
    }
}

/// An integral of a nonnegative function against a measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stat_error: f64,
    pub quad_error: f64,
    pub diverged: bool,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, stat_error: 0.0, quad_error: 0.0, diverged: false };

    pub const fn exact(value: f64) -> Self {
        Estimate { value, stat_error: 0.0, quad_error: 0.0, diverged: false }
    }

    pub const fn divergent() -> Self {
        Estimate { value: f64::INFINITY, stat_error: 0.0, quad_error: 0.0, diverged: true }
    }

    pub fn total_error(&self) -> f64 {
        self.stat_error + self.quad_error
    }

    /// Sum of two independent estimates; divergence is absorbing.
    pub fn add(self, other: Estimate) -> Estimate {
        if self.diverged || other.diverged {
            return Estimate::divergent();
        }
        Estimate {
            value: self.value + other.value,
            stat_error: libm::hypot(self.stat_error, other.stat_error),
            quad_error: self.quad_error + other.quad_error,
            diverged: false,
        }
    }
}
