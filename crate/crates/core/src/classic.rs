//! Two-parameter Birnbaum–Saunders reference, written directly from its
//! textbook cdf and pdf with no shared code paths. Used to cross-check the
//! ν = 1/2 case of the general family.

use std::f64::consts::PI;

use crate::normal::std_normal_cdf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicBs {
    pub alpha: f64,
    pub beta: f64,
}

impl ClassicBs {
    pub fn new(alpha: f64, beta: f64) -> Self {
        Self { alpha, beta }
    }

    /// Φ[(√(t/β) − √(β/t)) / α]
    pub fn cdf(&self, t: f64) -> f64 {
        let a = (t / self.beta).sqrt() - (self.beta / t).sqrt();
        std_normal_cdf(a / self.alpha)
    }

    /// [(β/t)^½ + (β/t)^{3/2}] / (2√(2π)αβ) · exp[−(t/β + β/t − 2)/(2α²)]
    pub fn pdf(&self, t: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let bracket = (b / t).powf(0.5) + (b / t).powf(1.5);
        let expo = -(t / b + b / t - 2.0) / (2.0 * a * a);
        bracket * expo.exp() / (2.0 * (2.0 * PI).sqrt() * a * b)
    }
}
