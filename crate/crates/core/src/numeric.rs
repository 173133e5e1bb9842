//! Small numeric helpers: stable log-sum-exp accumulation, soft-minimum and
//! exact factorials.

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};

/// Streaming `log Σ exp(a_i)` with a running maximum.
///
/// Terms equal to `-inf` are accepted and contribute zero.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, log_value: f64) {
        if log_value == f64::NEG_INFINITY {
            return;
        }
        if log_value <= self.max {
            self.scaled += (log_value - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - log_value).exp() + 1.0;
            self.max = log_value;
        }
    }

    /// `log Σ exp(a_i)`; `-inf` when nothing (finite) was pushed.
    pub fn log_sum(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `-log Σ exp(-u_i)`, shifted by `min(u_i)` before exponentiation.
pub fn softmin(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("softmin of an empty family"));
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    if lo == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let s: f64 = values.iter().map(|&u| (lo - u).exp()).sum();
    Ok(lo - s.ln())
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `Π factorial(x)` over the given values.
pub fn factorial_product(values: &[u64]) -> BigUint {
    values
        .iter()
        .fold(BigUint::one(), |acc, &x| acc * factorial(x))
}
