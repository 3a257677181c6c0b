//! The energy `I_λ`, its truncation `J_λ` and their exact discrete gradients.
//!
//! ```text
//! I(u) = ½ Σ_f w A(|∇u|²_f) - (λ/q) ∫|u|^q - (1/2*) ∫|u|^{2*}
//! J(u) = ½ Σ_f w A(|∇u|²_f) - (λ/q) ∫|u|^q - φ(‖u‖²) (1/2*) ∫|u|^{2*}
//! ```
//!
//! Gradients are L² representatives of the derivative of the *discrete*
//! energy, so `⟨grad J(u), v⟩_{L²}` is the exact directional derivative.

use crate::error::{Error, Result};
use crate::grid::{divergence, FaceGradient, Field};
use crate::thresholds::Thresholds;
use crate::truncation::{
    mean_curvature_coefficient, mean_curvature_primitive, ProblemParams, TruncatedCoefficient,
};

/// `φ(t) = f(x) / (f(x) + f(y))`, `f(s) = exp(-1/s)`, with
/// `x = (R1 - t)/(R1 - R0)` and `y = (t - R0)/(R1 - R0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    r0: f64,
    r1: f64,
}

impl Cutoff {
    pub fn new(r0: f64, r1: f64) -> Result<Self> {
        if !(r1 > r0) {
            return Err(Error::DegenerateWindow { r0, r1 });
        }
        Ok(Self { r0, r1 })
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= self.r0 {
            return 1.0;
        }
        if t >= self.r1 {
            return 0.0;
        }
        let w = self.r1 - self.r0;
        let x = (self.r1 - t) / w;
        let y = (t - self.r0) / w;
        1.0 / (1.0 + (1.0 / x - 1.0 / y).exp())
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t <= self.r0 || t >= self.r1 {
            return 0.0;
        }
        let phi = self.value(t);
        if phi == 0.0 || phi == 1.0 {
            return 0.0;
        }
        let w = self.r1 - self.r0;
        let x = (self.r1 - t) / w;
        let y = (t - self.r0) / w;
        -phi * (1.0 - phi) * (1.0 / (x * x) + 1.0 / (y * y)) / w
    }
}

/// `φ(t)` for the window `[R0, R1]`.
pub fn smooth_cutoff(t: f64, r0: f64, r1: f64) -> Result<f64> {
    Ok(Cutoff::new(r0, r1)?.value(t))
}

/// Which weight multiplies `∇u` in the divergence-form operator.
#[derive(Debug, Clone, Copy)]
pub enum Weight<'a> {
    Truncated(&'a TruncatedCoefficient),
    /// The original `1/sqrt(1+t)`.
    MeanCurvature,
}

impl Weight<'_> {
    #[inline]
    fn value(&self, t: f64) -> f64 {
        match self {
            Weight::Truncated(c) => c.value(t),
            Weight::MeanCurvature => mean_curvature_coefficient(t),
        }
    }

    #[inline]
    fn primitive(&self, t: f64) -> f64 {
        match self {
            Weight::Truncated(c) => c.primitive(t),
            Weight::MeanCurvature => mean_curvature_primitive(t),
        }
    }
}

/// The separately integrated pieces of the energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyTerms {
    /// `½ Σ_f w A(|∇u|²_f)`
    pub gradient: f64,
    /// `∫ |u|^q`
    pub sublinear: f64,
    /// `∫ |u|^{2*}`
    pub critical: f64,
    /// `‖u‖²`
    pub norm_sq: f64,
}

impl EnergyTerms {
    pub fn compute(u: &Field, weight: Weight<'_>, q: f64, two_star: f64) -> Self {
        let faces = FaceGradient::compute(u);
        Self {
            gradient: 0.5 * faces.integrate(|t| weight.primitive(t)),
            sublinear: u.lp_integral(q),
            critical: u.lp_integral(two_star),
            norm_sq: faces.h1_norm_sq(),
        }
    }

    /// Energy with the critical term multiplied by `phi`.
    pub fn combine(&self, lambda: f64, q: f64, two_star: f64, phi: f64) -> f64 {
        self.gradient - lambda / q * self.sublinear - phi * (self.critical / two_star)
    }
}

/// Diagnostics of one field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub i: f64,
    pub j: f64,
    pub norm_sq: f64,
    pub phi: f64,
    /// L² norm of `grad J`.
    pub residual_norm: f64,
}

impl EnergyReport {
    pub fn compute(u: &Field, p: &ProblemParams, th: &Thresholds) -> Self {
        let terms = EnergyTerms::compute(u, Weight::Truncated(&p.coeff), p.q, p.two_star());
        let phi = th.cutoff().value(terms.norm_sq);
        Self {
            i: terms.combine(p.lambda, p.q, p.two_star(), 1.0),
            j: terms.combine(p.lambda, p.q, p.two_star(), phi),
            norm_sq: terms.norm_sq,
            phi,
            residual_norm: grad_j(u, p, th).l2_norm(),
        }
    }
}

pub fn eval_i(u: &Field, p: &ProblemParams) -> f64 {
    EnergyTerms::compute(u, Weight::Truncated(&p.coeff), p.q, p.two_star()).combine(
        p.lambda,
        p.q,
        p.two_star(),
        1.0,
    )
}

pub fn eval_j(u: &Field, p: &ProblemParams, th: &Thresholds) -> f64 {
    let terms = EnergyTerms::compute(u, Weight::Truncated(&p.coeff), p.q, p.two_star());
    let phi = th.cutoff().value(terms.norm_sq);
    terms.combine(p.lambda, p.q, p.two_star(), phi)
}

/// Weak-form residual `a(|∇u|²)`-operator minus right-hand side, plus the
/// cutoff chain term `chain · (-Δ_h u)`.
fn gradient_with(
    u: &Field,
    weight: Weight<'_>,
    lambda: f64,
    q: f64,
    two_star: f64,
    phi: f64,
    chain: f64,
) -> Field {
    let faces = FaceGradient::compute(u);
    let div = divergence(&faces.flux(|t| weight.value(t)));
    let lap = (chain != 0.0).then(|| divergence(&faces));
    let mut out = Vec::with_capacity(u.len());
    for (i, &v) in u.values().iter().enumerate() {
        let a = v.abs();
        let mut g =
            div[i] - lambda * (v.signum() * a.powf(q - 1.0)) - phi * (a.powf(two_star - 2.0) * v);
        if let Some(lap) = &lap {
            g += chain * lap[i];
        }
        out.push(g);
    }
    Field::from_values(u.spec(), out).expect("finite gradient")
}

/// L² gradient of `J_λ`.
pub fn grad_j(u: &Field, p: &ProblemParams, th: &Thresholds) -> Field {
    let cutoff = th.cutoff();
    let norm_sq = u.h1_norm_sq();
    let phi = cutoff.value(norm_sq);
    let dphi = cutoff.derivative(norm_sq);
    let chain = if dphi != 0.0 {
        -2.0 * dphi * (u.lp_integral(p.two_star()) / p.two_star())
    } else {
        0.0
    };
    gradient_with(
        u,
        Weight::Truncated(&p.coeff),
        p.lambda,
        p.q,
        p.two_star(),
        phi,
        chain,
    )
}

/// L² gradient of `I_λ`, the weak residual of the truncated problem.
pub fn grad_i(u: &Field, p: &ProblemParams) -> Field {
    gradient_with(
        u,
        Weight::Truncated(&p.coeff),
        p.lambda,
        p.q,
        p.two_star(),
        1.0,
        0.0,
    )
}

/// L² norm of the weak residual of the truncated problem.
pub fn residual_t(u: &Field, p: &ProblemParams) -> f64 {
    grad_i(u, p).l2_norm()
}

/// L² norm of the weak residual of the original (untruncated) problem.
pub fn residual_p(u: &Field, p: &ProblemParams) -> f64 {
    gradient_with(
        u,
        Weight::MeanCurvature,
        p.lambda,
        p.q,
        p.two_star(),
        1.0,
        0.0,
    )
    .l2_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DomainSpec;
    use crate::thresholds::{LowerBoundConstants, SobolevConstants};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(n: usize, lambda: f64) -> (ProblemParams, Thresholds) {
        let coeff = TruncatedCoefficient::new(1.0, 1.0, 3).unwrap();
        let domain = DomainSpec::unit_cube(3, n).unwrap();
        let p = ProblemParams::new(1.5, lambda, coeff, domain).unwrap();
        // representative constants; the tests below do not depend on their accuracy
        let k = LowerBoundConstants::new(&p, SobolevConstants { s: 5.5, sq: 37.0 });
        let th = Thresholds::compute(&k, lambda, 1.0, 1.0).unwrap();
        (p, th)
    }

    fn random_field(spec: &DomainSpec, seed: u64, amp: f64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vals = (0..spec.num_nodes())
            .map(|_| {
                let m: f64 = rng.random_range(0.1..1.0);
                if rng.random_bool(0.5) {
                    amp * m
                } else {
                    -amp * m
                }
            })
            .collect();
        Field::from_values(spec, vals).unwrap()
    }

    #[test]
    fn cutoff_shape() {
        let c = Cutoff::new(1.0, 3.0).unwrap();
        assert_eq!(c.value(1.0), 1.0);
        assert_eq!(c.value(3.0), 0.0);
        assert_eq!(c.value(2.0), 0.5);
        assert_eq!(c.value(0.2), 1.0);
        let mut prev = 1.0;
        for i in 0..=2000 {
            let t = 0.5 + 3.0 * i as f64 / 2000.0;
            let v = c.value(t);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev);
            assert!(c.derivative(t) <= 0.0);
            prev = v;
        }
        // derivative against central differences inside the window
        for t in [1.3, 2.0, 2.7] {
            let e = 1e-6;
            let fd = (c.value(t + e) - c.value(t - e)) / (2.0 * e);
            assert!((fd - c.derivative(t)).abs() < 1e-7);
        }
        assert!(matches!(
            smooth_cutoff(1.0, 2.0, 2.0),
            Err(Error::DegenerateWindow { .. })
        ));
    }

    #[test]
    fn zero_field() {
        let (p, th) = instance(5, 0.1);
        let z = Field::zeros(&p.domain);
        assert_eq!(eval_i(&z, &p), 0.0);
        assert_eq!(eval_j(&z, &p, &th), 0.0);
        assert!(grad_j(&z, &p, &th).values().iter().all(|&v| v == 0.0));
        assert_eq!(residual_p(&z, &p), 0.0);
    }

    #[test]
    fn small_amplitude_matches_closed_form_branch() {
        let (p, _) = instance(7, 0.2);
        let u = random_field(&p.domain, 2, 1e-3);
        let faces = FaceGradient::compute(&u);
        assert!(faces.sup_norm().powi(2) <= p.coeff.r());
        let direct = 0.5 * faces.integrate(|t| 2.0 * ((1.0 + t).sqrt() - 1.0))
            - p.lambda / p.q * u.lp_integral(p.q)
            - u.lp_integral(6.0) / 6.0;
        let got = eval_i(&u, &p);
        assert!((got - direct).abs() <= 1e-9 * got.abs());
    }

    #[test]
    fn energy_is_affine_in_lambda() {
        let (p, _) = instance(5, 0.3);
        let u = random_field(&p.domain, 5, 0.4);
        let slope = -u.lp_integral(p.q) / p.q;
        let e0 = eval_i(&u, &p.with_lambda(0.0));
        for lam in [0.5, 1.0, 2.0] {
            let e = eval_i(&u, &p.with_lambda(lam));
            assert!((e - (e0 + slope * lam)).abs() <= 1e-12 * e0.abs().max(1.0));
        }
    }

    #[test]
    fn truncated_matches_untruncated_below_window() {
        let (p, th) = instance(7, 0.2);
        let u = random_field(&p.domain, 9, 1e-5);
        assert!(u.h1_norm_sq() <= th.r0);
        assert_eq!(eval_j(&u, &p, &th), eval_i(&u, &p));
        assert_eq!(grad_j(&u, &p, &th), grad_i(&u, &p));
        assert_eq!(residual_p(&u, &p), residual_t(&u, &p));
    }

    #[test]
    fn no_critical_term_above_window() {
        let (p, th) = instance(7, 0.2);
        let u = random_field(&p.domain, 9, 1.0);
        let terms = EnergyTerms::compute(&u, Weight::Truncated(&p.coeff), p.q, 6.0);
        assert!(terms.norm_sq >= th.r1);
        assert_eq!(
            eval_j(&u, &p, &th),
            terms.gradient - p.lambda / p.q * terms.sublinear
        );
    }

    #[test]
    fn steep_field_separates_the_two_residuals() {
        let (p, _) = instance(7, 0.2);
        let u = random_field(&p.domain, 4, 3.0);
        assert!(u.sup_grad().powi(2) > p.coeff.r() + p.coeff.delta());
        assert_ne!(residual_p(&u, &p), residual_t(&u, &p));
    }

    #[test]
    fn evenness_and_oddness() {
        let (p, th) = instance(6, 0.2);
        for (seed, amp) in [(1, 1e-3), (2, 0.05), (3, 0.5)] {
            let u = random_field(&p.domain, seed, amp);
            assert_eq!(eval_j(&u, &p, &th), eval_j(&u.neg(), &p, &th));
            assert_eq!(grad_j(&u.neg(), &p, &th), grad_j(&u, &p, &th).neg());
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let (p, th) = instance(5, 0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for (seed, amp) in [(10, 0.02), (11, 0.3), (12, 1.0)] {
            let u = random_field(&p.domain, seed, amp);
            let g = grad_j(&u, &p, &th);
            for _ in 0..5 {
                let v = Field::from_values(
                    &p.domain,
                    (0..u.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
                )
                .unwrap();
                let eps = 1e-4 * amp;
                let fd = (eval_j(&u.axpy(eps, &v), &p, &th) - eval_j(&u.axpy(-eps, &v), &p, &th))
                    / (2.0 * eps);
                let exact = g.l2_dot(&v);
                assert!(
                    (fd - exact).abs() <= 1e-6 * exact.abs().max(1e-300),
                    "amp {amp}: {fd} vs {exact}"
                );
            }
        }
    }
}
