//! The truncated coefficient `a(t)` that replaces the mean-curvature weight
//! `1/sqrt(1+t)` by a C¹ function which is constant (`K0`) for large `t`.
//!
//! ```text
//!        ⎧ 1/sqrt(1+t)        0 ≤ t ≤ r
//! a(t) = ⎨ η(t)               r ≤ t ≤ r+δ     (cubic Hermite bridge)
//!        ⎩ K0 = 1/sqrt(1+r+δ) t ≥ r+δ
//! ```
//!
//! `A(t) = ∫₀ᵗ a(s) ds` is evaluated in closed form on every branch so the
//! discrete energy is exactly differentiable.

use crate::error::{Error, Result};
use crate::grid::DomainSpec;

/// Critical Sobolev exponent `2* = 2N/(N-2)`.
pub fn critical_exponent(dim: usize) -> f64 {
    2.0 * dim as f64 / (dim as f64 - 2.0)
}

/// Untruncated mean-curvature weight `1/sqrt(1+t)`.
#[inline]
pub fn mean_curvature_coefficient(t: f64) -> f64 {
    1.0 / (1.0 + t).sqrt()
}

/// `2(sqrt(1+t) - 1)`, written without cancellation for small `t`.
#[inline]
pub fn mean_curvature_primitive(t: f64) -> f64 {
    2.0 * t / ((1.0 + t).sqrt() + 1.0)
}

/// C¹ truncation of the mean-curvature weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedCoefficient {
    r: f64,
    delta: f64,
    k0: f64,
    /// Coefficients of η in powers of `s = t - r`.
    bridge: [f64; 4],
    primitive_at_r: f64,
    primitive_at_end: f64,
}

impl TruncatedCoefficient {
    /// Builds the coefficient for onset `r`, bridge width `delta` and space
    /// dimension `dim`.
    pub fn new(r: f64, delta: f64, dim: usize) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "r must be finite and >= 0, got {r}"
            )));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be finite and > 0, got {delta}"
            )));
        }
        if dim < 3 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be >= 3, got {dim}"
            )));
        }
        let k0 = 1.0 / (1.0 + r + delta).sqrt();
        let lower = 2.0 / critical_exponent(dim);
        if !(k0 > lower && k0 < 1.0) {
            return Err(Error::PlateauOutOfRange { k0, lower });
        }

        // η(s) = c0 + c1 s + c2 s² + c3 s³ with η(0), η'(0) from the left
        // branch and η(δ) = K0, η'(δ) = 0.
        let c0 = mean_curvature_coefficient(r);
        let c1 = -0.5 / (1.0 + r).powf(1.5);
        let gap = k0 - c0 - c1 * delta;
        let slope_gap = -c1;
        let c3 = (slope_gap * delta - 2.0 * gap) / delta.powi(3);
        let c2 = (3.0 * gap - slope_gap * delta) / (delta * delta);
        let bridge = [c0, c1, c2, c3];

        // η' is a quadratic that is negative at s = 0 and zero at s = δ; it can
        // only turn positive at an interior vertex.
        let max_slope = if c3 != 0.0 {
            let vertex = -c2 / (3.0 * c3);
            if c3 < 0.0 && vertex > 0.0 && vertex < delta {
                c1 + 2.0 * c2 * vertex + 3.0 * c3 * vertex * vertex
            } else {
                c1.max(0.0)
            }
        } else {
            c1.max(c1 + 2.0 * c2 * delta)
        };
        if max_slope > 0.0 {
            return Err(Error::NonMonotoneBridge { max_slope });
        }

        let primitive_at_r = mean_curvature_primitive(r);
        let primitive_at_end = primitive_at_r + bridge_integral(&bridge, delta);
        Ok(Self {
            r,
            delta,
            k0,
            bridge,
            primitive_at_r,
            primitive_at_end,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn k0(&self) -> f64 {
        self.k0
    }

    /// Coefficients of the bridge cubic in powers of `t - r`.
    pub fn bridge_coeffs(&self) -> [f64; 4] {
        self.bridge
    }

    /// `a(t)`; fails for negative `t`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::NegativeArgument(t));
        }
        Ok(self.value(t))
    }

    /// `A(t)`; fails for negative `t`.
    pub fn eval_primitive(&self, t: f64) -> Result<f64> {
        if t < 0.0 {
            return Err(Error::NegativeArgument(t));
        }
        Ok(self.primitive(t))
    }

    /// `a(t)` for `t >= 0` without the domain check.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        if t <= self.r {
            mean_curvature_coefficient(t)
        } else if t < self.r + self.delta {
            let s = t - self.r;
            let [c0, c1, c2, c3] = self.bridge;
            c0 + s * (c1 + s * (c2 + s * c3))
        } else {
            self.k0
        }
    }

    /// `a'(t)`; one-sided from the right at the knots.
    pub fn derivative(&self, t: f64) -> f64 {
        if t < self.r {
            -0.5 / (1.0 + t).powf(1.5)
        } else if t < self.r + self.delta {
            let s = t - self.r;
            let [_, c1, c2, c3] = self.bridge;
            c1 + s * (2.0 * c2 + 3.0 * c3 * s)
        } else {
            0.0
        }
    }

    /// Left-sided `a'(t)`; differs from [`Self::derivative`] only in which
    /// branch is used at the knots.
    pub fn derivative_left(&self, t: f64) -> f64 {
        if t <= self.r {
            -0.5 / (1.0 + t).powf(1.5)
        } else if t <= self.r + self.delta {
            let s = t - self.r;
            let [_, c1, c2, c3] = self.bridge;
            c1 + s * (2.0 * c2 + 3.0 * c3 * s)
        } else {
            0.0
        }
    }

    /// Bridge cubic evaluated at any `t` (not restricted to its interval).
    pub fn bridge_value(&self, t: f64) -> f64 {
        let s = t - self.r;
        let [c0, c1, c2, c3] = self.bridge;
        c0 + s * (c1 + s * (c2 + s * c3))
    }

    /// `A(t)` for `t >= 0` without the domain check.
    #[inline]
    pub fn primitive(&self, t: f64) -> f64 {
        if t <= self.r {
            mean_curvature_primitive(t)
        } else if t < self.r + self.delta {
            self.primitive_at_r + bridge_integral(&self.bridge, t - self.r)
        } else {
            self.primitive_at_end + self.k0 * (t - self.r - self.delta)
        }
    }
}

fn bridge_integral(c: &[f64; 4], s: f64) -> f64 {
    s * (c[0] + s * (c[1] / 2.0 + s * (c[2] / 3.0 + s * c[3] / 4.0)))
}

/// A full problem instance: dimension, exponents, parameter λ, truncation and grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParams {
    pub q: f64,
    pub lambda: f64,
    pub coeff: TruncatedCoefficient,
    pub domain: DomainSpec,
}

impl ProblemParams {
    pub fn new(
        q: f64,
        lambda: f64,
        coeff: TruncatedCoefficient,
        domain: DomainSpec,
    ) -> Result<Self> {
        if !(q > 1.0 && q < 2.0) {
            return Err(Error::InvalidParameter(format!(
                "q must lie in (1, 2), got {q}"
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        let lower = 2.0 / critical_exponent(domain.dim());
        if !(coeff.k0() > lower) {
            return Err(Error::PlateauOutOfRange {
                k0: coeff.k0(),
                lower,
            });
        }
        Ok(Self {
            q,
            lambda,
            coeff,
            domain,
        })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn two_star(&self) -> f64 {
        critical_exponent(self.dim())
    }

    /// Same instance at a different λ.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self {
            lambda,
            ..self.clone()
        }
    }

    /// Same instance on a different grid.
    pub fn with_domain(&self, domain: DomainSpec) -> Self {
        Self {
            domain,
            ..self.clone()
        }
    }
}
