//! The constant pipeline that bounds the admissible λ range.
//!
//! The energy is bounded below by `g(‖u‖²)` with
//!
//! ```text
//! g(t) = (K0/2) t - λ/(q Sq^{q/2}) t^{q/2} - 1/(2* S^{2*/2}) t^{2*/2}
//! ```
//!
//! `R0 < R1` are its positive roots, `τ1` is the largest λ for which `g` has
//! a positive maximum with `R0 ≤ r`, `τ2` is the root in λ of the
//! Palais–Smale level bound, and `λ* = min(τ1, τ2)`.
//!
//! Every root is found by bisection.

mod sobolev;

pub use sobolev::{
    estimate_sobolev_constants, rayleigh_minimize, rayleigh_quotient, RayleighOutcome,
    SobolevOptions,
};

use crate::energy::Cutoff;
use crate::error::{Error, Result};
use crate::truncation::{critical_exponent, ProblemParams};

/// Best-constant estimates of `H¹₀ ↪ L^{2*}` and `H¹₀ ↪ L^q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevConstants {
    pub s: f64,
    pub sq: f64,
}

/// Everything `g` and the level bound depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundConstants {
    pub k0: f64,
    pub s: f64,
    pub sq: f64,
    pub q: f64,
    pub dim: usize,
}

impl LowerBoundConstants {
    pub fn new(p: &ProblemParams, sobolev: SobolevConstants) -> Self {
        Self {
            k0: p.coeff.k0(),
            s: sobolev.s,
            sq: sobolev.sq,
            q: p.q,
            dim: p.dim(),
        }
    }

    pub fn two_star(&self) -> f64 {
        critical_exponent(self.dim)
    }

    fn sublinear_coeff(&self, lambda: f64) -> f64 {
        lambda / (self.q * self.sq.powf(self.q / 2.0))
    }

    fn critical_coeff(&self) -> f64 {
        let p = self.two_star();
        1.0 / (p * self.s.powf(p / 2.0))
    }

    fn g(&self, t: f64, lambda: f64) -> f64 {
        let p = self.two_star();
        0.5 * self.k0 * t
            - self.sublinear_coeff(lambda) * t.powf(self.q / 2.0)
            - self.critical_coeff() * t.powf(p / 2.0)
    }

    fn g_prime(&self, t: f64, lambda: f64) -> f64 {
        let p = self.two_star();
        let q = self.q;
        let sub = if lambda == 0.0 {
            0.0
        } else {
            self.sublinear_coeff(lambda) * 0.5 * q * t.powf(q / 2.0 - 1.0)
        };
        0.5 * self.k0 - sub - self.critical_coeff() * 0.5 * p * t.powf(p / 2.0 - 1.0)
    }

    /// Larger root of `g` at `λ = 0`: `(K0 2* S^{2*/2} / 2)^{2/(2*-2)}`.
    pub fn r1_at_zero(&self) -> f64 {
        let p = self.two_star();
        (0.5 * self.k0 / self.critical_coeff()).powf(2.0 / (p - 2.0))
    }
}

/// `g(t)` for `t, λ ≥ 0`.
pub fn eval_g(t: f64, lambda: f64, k: &LowerBoundConstants) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::NegativeArgument(t));
    }
    if lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    Ok(k.g(t, lambda))
}

/// `g` with its critical term multiplied by the cutoff.
pub fn eval_g_bar(t: f64, lambda: f64, k: &LowerBoundConstants, cutoff: &Cutoff) -> f64 {
    let p = k.two_star();
    0.5 * k.k0 * t
        - k.sublinear_coeff(lambda) * t.powf(k.q / 2.0)
        - cutoff.value(t) * k.critical_coeff() * t.powf(p / 2.0)
}

/// Bisection on a sign change of `f` over `[lo, hi]`; returns the final
/// bracket. Midpoints are geometric while the bracket spans more than a
/// factor of four on the positive axis.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64, rel_tol: f64) -> (f64, f64) {
    let lo_sign = f(lo) > 0.0;
    for _ in 0..2000 {
        if hi - lo <= rel_tol * hi.abs() {
            break;
        }
        let mid = if lo > 0.0 && hi > 4.0 * lo {
            (lo * hi).sqrt()
        } else {
            0.5 * (lo + hi)
        };
        if mid <= lo || mid >= hi {
            break;
        }
        if (f(mid) > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

const BISECTION_TOL: f64 = 1e-15;

/// Location and value of the interior maximum of `g`. `value ≤ 0` means `g`
/// has no positive maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GMaximum {
    pub t_max: f64,
    pub value: f64,
}

pub fn g_maximum(lambda: f64, k: &LowerBoundConstants) -> GMaximum {
    let p = k.two_star();
    let q = k.q;
    // g'' vanishes once, at t_infl; g' increases before and decreases after.
    let t_infl = if lambda == 0.0 {
        0.0
    } else {
        let num = k.sublinear_coeff(lambda) * 0.5 * q * (1.0 - 0.5 * q);
        let den = k.critical_coeff() * 0.5 * p * (0.5 * p - 1.0);
        (num / den).powf(2.0 / (p - q))
    };
    if lambda > 0.0 && k.g_prime(t_infl, lambda) <= 0.0 {
        return GMaximum {
            t_max: t_infl,
            value: k.g(t_infl, lambda).min(0.0),
        };
    }
    let mut hi = (10.0 * k.r1_at_zero()).max(2.0 * t_infl);
    while k.g_prime(hi, lambda) >= 0.0 {
        hi *= 2.0;
    }
    let (lo, hi) = bisect(t_infl, hi, |t| k.g_prime(t, lambda), BISECTION_TOL);
    let t_max = 0.5 * (lo + hi);
    GMaximum {
        t_max,
        value: k.g(t_max, lambda),
    }
}

/// Roots `R0 < R1` of `g`. At `λ = 0`, `R0 = 0` exactly.
pub fn find_roots(lambda: f64, k: &LowerBoundConstants) -> Result<(f64, f64)> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be >= 0, got {lambda}"
        )));
    }
    let max = g_maximum(lambda, k);
    if !(max.value > 0.0) {
        return Err(Error::NoPositiveMaximum {
            lambda,
            max_value: max.value,
        });
    }
    let estimate = k.r1_at_zero();
    let r0 = if lambda == 0.0 {
        0.0
    } else {
        let mut small = (1e-14 * estimate).min(0.5 * max.t_max);
        while k.g(small, lambda) >= 0.0 {
            small *= 1e-3;
            if small == 0.0 {
                return Err(Error::NoPositiveMaximum {
                    lambda,
                    max_value: max.value,
                });
            }
        }
        let (lo, hi) = bisect(small, max.t_max, |t| k.g(t, lambda), BISECTION_TOL);
        0.5 * (lo + hi)
    };
    let mut big = (10.0 * estimate).max(2.0 * max.t_max);
    while k.g(big, lambda) >= 0.0 {
        big *= 10.0;
    }
    let (lo, hi) = bisect(max.t_max, big, |t| k.g(t, lambda), BISECTION_TOL);
    Ok((r0, 0.5 * (lo + hi)))
}

/// `τ1 = min(λ_crit, λ_r)`: `λ_crit` is where the maximum of `g` reaches zero,
/// `λ_r` where `R0(λ) = r` (infinite if `R0` stays below `r`).
pub fn compute_tau1(k: &LowerBoundConstants, r: f64) -> f64 {
    let positive = |lambda: f64| g_maximum(lambda, k).value;
    let mut hi = 1.0;
    while positive(hi) > 0.0 {
        hi *= 2.0;
    }
    let (crit, _) = bisect(0.0, hi, positive, 1e-15);
    let r0_at = |lambda: f64| {
        find_roots(lambda, k)
            .map(|(r0, _)| r0)
            .unwrap_or(f64::INFINITY)
    };
    if r0_at(crit) <= r {
        return crit;
    }
    let (lambda_r, _) = bisect(0.0, crit, |lambda| r - r0_at(lambda), 1e-15);
    lambda_r.min(crit)
}

/// Right-hand side of the Palais–Smale level bound, exponents as printed:
///
/// ```text
/// (K0/2 - 1/2*) K0^{(N-2)/2} S^{N/2}
///   - λ (1/q - 1/2*) |Ω|^{(2*-q)/2}
///     [ (q/2*) λ (1/q - 1/2*) |Ω|^{(2*-q)/2*} ((K0/2 - 1/2*) / S^{2*/2})^{-1} ]^{q/(2*-q)}
/// ```
pub fn ps_level_bound(lambda: f64, k: &LowerBoundConstants, omega_measure: f64) -> f64 {
    let p = k.two_star();
    let q = k.q;
    let n = k.dim as f64;
    let gap = 0.5 * k.k0 - 1.0 / p;
    let lead = gap * k.k0.powf((n - 2.0) / 2.0) * k.s.powf(n / 2.0);
    let mix = 1.0 / q - 1.0 / p;
    let bracket =
        (q / p) * lambda * mix * omega_measure.powf((p - q) / p) / (gap / k.s.powf(p / 2.0));
    lead - lambda * mix * omega_measure.powf((p - q) / 2.0) * bracket.powf(q / (p - q))
}

/// Positive root in λ of [`ps_level_bound`].
pub fn compute_tau2(k: &LowerBoundConstants, omega_measure: f64) -> f64 {
    let f = |lambda: f64| ps_level_bound(lambda, k, omega_measure);
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    let (lo, hi) = bisect(0.0, hi, f, 1e-15);
    0.5 * (lo + hi)
}

pub fn lambda_star(tau1: f64, tau2: f64) -> f64 {
    tau1.min(tau2)
}

/// All thresholds for one instance at one λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub constants: LowerBoundConstants,
    pub r: f64,
    pub omega_measure: f64,
    pub lambda: f64,
    pub s: f64,
    pub sq: f64,
    pub r0: f64,
    pub r1: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub lambda_star: f64,
    pub ps_bound: f64,
}

impl Thresholds {
    pub fn compute(
        k: &LowerBoundConstants,
        lambda: f64,
        r: f64,
        omega_measure: f64,
    ) -> Result<Self> {
        let tau1 = compute_tau1(k, r);
        let tau2 = compute_tau2(k, omega_measure);
        Self::assemble(k, lambda, r, omega_measure, tau1, tau2)
    }

    fn assemble(
        k: &LowerBoundConstants,
        lambda: f64,
        r: f64,
        omega_measure: f64,
        tau1: f64,
        tau2: f64,
    ) -> Result<Self> {
        let (r0, r1) = find_roots(lambda, k)?;
        Ok(Self {
            constants: *k,
            r,
            omega_measure,
            lambda,
            s: k.s,
            sq: k.sq,
            r0,
            r1,
            tau1,
            tau2,
            lambda_star: lambda_star(tau1, tau2),
            ps_bound: ps_level_bound(lambda, k, omega_measure),
        })
    }

    /// Same constants and λ-independent thresholds at a different λ.
    pub fn at_lambda(&self, lambda: f64) -> Result<Self> {
        Self::assemble(
            &self.constants,
            lambda,
            self.r,
            self.omega_measure,
            self.tau1,
            self.tau2,
        )
    }

    pub fn cutoff(&self) -> Cutoff {
        Cutoff::new(self.r0, self.r1).expect("R0 < R1 by construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constants() -> LowerBoundConstants {
        LowerBoundConstants {
            k0: 1.0 / 3f64.sqrt(),
            s: 5.4,
            sq: 36.0,
            q: 1.5,
            dim: 3,
        }
    }

    #[test]
    fn g_at_origin_and_small_t() {
        let k = constants();
        assert_eq!(eval_g(0.0, 0.7, &k).unwrap(), 0.0);
        assert!(eval_g(1e-12, 0.1, &k).unwrap() < 0.0);
        assert!(eval_g(-1.0, 0.1, &k).is_err());
    }

    #[test]
    fn lambda_zero_closed_form() {
        let k = constants();
        let (r0, r1) = find_roots(0.0, &k).unwrap();
        assert_eq!(r0, 0.0);
        let closed = (3.0 * k.k0).sqrt() * k.s.powf(1.5);
        assert!((r1 - closed).abs() <= 1e-8 * closed);
        assert!((k.r1_at_zero() - closed).abs() <= 1e-12 * closed);
    }

    #[test]
    fn roots_have_small_residual_and_bracket_maximum() {
        let k = constants();
        for lambda in [1e-6, 1e-3, 0.1, 1.0, 3.0] {
            let (r0, r1) = find_roots(lambda, &k).unwrap();
            let m = g_maximum(lambda, &k);
            assert!(0.0 < r0 && r0 < m.t_max && m.t_max < r1);
            let scale = 0.5 * k.k0 * r1;
            assert!(k.g(r0, lambda).abs() <= 1e-10 * scale);
            assert!(k.g(r1, lambda).abs() <= 1e-10 * scale);
            for i in 1..50 {
                let t = r0 + (r1 - r0) * i as f64 / 50.0;
                assert!(k.g(t, lambda) > 0.0);
            }
        }
    }

    #[test]
    fn r0_shrinks_with_lambda() {
        let k = constants();
        let r0: Vec<f64> = (0..=10)
            .map(|j| find_roots(0.5 * 0.5f64.powi(j), &k).unwrap().0)
            .collect();
        assert!(r0.windows(2).all(|w| w[1] < w[0]));
        assert!(r0[10] < r0[0] / 10.0);
    }

    #[test]
    fn tau1_brackets() {
        let k = constants();
        for r in [1.0, 1e-4] {
            let tau1 = compute_tau1(&k, r);
            let (r0, _) = find_roots(tau1 * (1.0 - 1e-6), &k).unwrap();
            assert!(r0 <= r);
            match find_roots(tau1 * (1.0 + 1e-3), &k) {
                Err(Error::NoPositiveMaximum { .. }) => {}
                Ok((r0, _)) => assert!(r0 > r),
                Err(e) => panic!("unexpected {e}"),
            }
        }
        let maxima: Vec<f64> = (0..20)
            .map(|i| g_maximum(0.5 * i as f64, &k).value)
            .collect();
        assert!(maxima.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn ps_bound_and_tau2() {
        let k = constants();
        let omega = 1.0;
        let lead = ps_level_bound(0.0, &k, omega);
        let expected = (0.5 * k.k0 - 1.0 / 6.0) * k.k0.sqrt() * k.s.powf(1.5);
        assert!((lead - expected).abs() <= 1e-14 * expected && lead > 0.0);
        assert!((ps_level_bound(1e-12, &k, omega) - lead).abs() < 1e-12);
        let vals: Vec<f64> = (0..30)
            .map(|i| ps_level_bound(0.05 * i as f64, &k, omega))
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]));

        let tau2 = compute_tau2(&k, omega);
        assert!(ps_level_bound(tau2, &k, omega).abs() <= 1e-8 * lead);
        assert!(ps_level_bound(tau2 / 2.0, &k, omega) > 0.0);
        assert!(ps_level_bound(2.0 * tau2, &k, omega) < 0.0);
        assert!(ps_level_bound(tau2 * (1.0 - 1e-8), &k, omega) > 0.0);
        assert!(ps_level_bound(tau2 * (1.0 + 1e-8), &k, omega) < 0.0);

        // closed form: the subtrahend is C λ^{2*/(2*-q)}
        let p = 6.0;
        let c = (lead - ps_level_bound(1.0, &k, omega)) / 1.0;
        let closed = (lead / c).powf((p - k.q) / p);
        assert!((tau2 - closed).abs() <= 1e-10 * closed);

        assert!(compute_tau2(&k, 2.0) < tau2);
    }

    #[test]
    fn lambda_star_is_min() {
        assert_eq!(lambda_star(2.0, 3.0), 2.0);
        assert_eq!(lambda_star(3.0, 2.0), 2.0);
        assert_eq!(lambda_star(1.5, 1.5), 1.5);
    }

    #[test]
    fn thresholds_are_consistent_below_lambda_star() {
        let k = constants();
        let th = Thresholds::compute(&k, 0.01, 1.0, 1.0).unwrap();
        assert_eq!(th.lambda_star, th.tau1.min(th.tau2));
        for i in 1..20 {
            let lambda = th.lambda_star * i as f64 / 20.0;
            let t = th.at_lambda(lambda).unwrap();
            assert!(t.r0 <= 1.0 && t.ps_bound > 0.0);
        }
    }
}
