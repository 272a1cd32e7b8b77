use core::f64::consts::LN_2;

#[allow(unused_imports)]
use num_traits::Float;

use crate::numerics::{ln_gamma_unchecked, regularized_gamma_p, regularized_gamma_q};
use crate::{Error, Result};

/// Generalized Gaussian with location `μ`, scale `s > 0` and shape `β > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GgdComponent {
    location: f64,
    scale: f64,
    shape: f64,
}

impl GgdComponent {
    pub fn new(location: f64, scale: f64, shape: f64) -> Result<Self> {
        if !location.is_finite() {
            return Err(Error::InvalidComponent("location must be finite"));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidComponent("scale must be positive and finite"));
        }
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::InvalidComponent("shape must be positive and finite"));
        }
        Ok(Self { location, scale, shape })
    }

    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// `ln(β / (2 s Γ(1/β)))`.
    pub fn ln_normalizer(&self) -> f64 {
        self.shape.ln() - LN_2 - self.scale.ln() - ln_gamma_unchecked(1.0 / self.shape)
    }

    pub fn ln_pdf(&self, y: f64) -> f64 {
        self.ln_normalizer() - ((y - self.location).abs() / self.scale).powf(self.shape)
    }

    pub fn pdf(&self, y: f64) -> f64 {
        self.ln_pdf(y).exp()
    }

    /// `1/2 ± P(1/β, (|y - μ|/s)^β) / 2`, using the upper tail below `μ`.
    pub fn cdf(&self, y: f64) -> f64 {
        if y.is_nan() {
            return f64::NAN;
        }
        let z = ((y - self.location).abs() / self.scale).powf(self.shape);
        let a = 1.0 / self.shape;
        if y >= self.location {
            0.5 + 0.5 * regularized_gamma_p(a, z).expect("valid incomplete gamma arguments")
        } else {
            0.5 * regularized_gamma_q(a, z).expect("valid incomplete gamma arguments")
        }
    }

    pub fn variance(&self) -> f64 {
        let a = 1.0 / self.shape;
        self.scale * self.scale * (ln_gamma_unchecked(3.0 * a) - ln_gamma_unchecked(a)).exp()
    }
}
