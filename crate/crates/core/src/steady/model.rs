use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the competition system: intrinsic rates `a`, `c`,
/// competition coefficients `b`, `d` and saturation constants `alpha`,
/// `beta` of the Bazykin response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = Self {
            a,
            b,
            c,
            d,
            alpha,
            beta,
        };
        p.validate()?;
        Ok(p)
    }

    /// `a, b, c, d > 0` and `alpha, beta ≥ 0`, all finite.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Precondition(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Precondition(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Parameters of the system with the roles of the species exchanged:
    /// `(a, b, c, d, α, β) -> (c, d, a, b, β, α)`.
    pub fn swapped(&self) -> Self {
        Self {
            a: self.c,
            b: self.d,
            c: self.a,
            d: self.b,
            alpha: self.beta,
            beta: self.alpha,
        }
    }

    pub fn with_a(self, a: f64) -> Self {
        Self { a, ..self }
    }

    pub fn with_c(self, c: f64) -> Self {
        Self { c, ..self }
    }

    pub fn with_alpha(self, alpha: f64) -> Self {
        Self { alpha, ..self }
    }

    pub fn with_beta(self, beta: f64) -> Self {
        Self { beta, ..self }
    }

    /// Saturating interaction factor without input checks.
    #[inline]
    pub(crate) fn response(&self, u: f64, v: f64) -> f64 {
        1.0 / ((1.0 + self.alpha * u) * (1.0 + self.beta * v))
    }
}

/// Bazykin response `f(u, v) = 1 / ((1 + αu)(1 + βv))` for non-negative
/// densities.
pub fn bazykin_response(u: f64, v: f64, params: &ModelParams) -> Result<f64> {
    if !(u >= 0.0 && v >= 0.0) {
        return Err(Error::Precondition(format!(
            "densities must be non-negative, got ({u}, {v})"
        )));
    }
    Ok(params.response(u, v))
}
