//! Discrete embedding constants by Rayleigh-quotient minimization.
//!
//! `Q_p(u) = ‖u‖² / ‖u‖²_{L^p}` is minimized over the sphere `‖u‖_{L^p} = 1`
//! by Poisson-preconditioned projected descent from several starts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::SobolevConstants;
use crate::descent::{minimize, DescentStatus, LineSearch, Objective};
use crate::error::{Error, Result};
use crate::grid::{
    divergence, eigenfields, l2_dot, DomainSpec, FaceGradient, Field, PoissonSolver,
};
use crate::truncation::critical_exponent;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevOptions {
    /// Random starts in addition to the first eigenfield.
    pub random_starts: usize,
    pub max_iter: usize,
    /// Stop once the preconditioned gradient norm falls below `tol · Q`.
    pub tol: f64,
    pub seed: u64,
}

impl Default for SobolevOptions {
    fn default() -> Self {
        Self {
            random_starts: 3,
            max_iter: 3000,
            tol: 1e-7,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RayleighOutcome {
    pub quotient: f64,
    /// Minimizer normalized to unit `L^p` norm.
    pub field: Field,
    pub iterations: usize,
    pub converged: bool,
}

/// `‖u‖² / ‖u‖²_{L^p}` for a nonzero field.
pub fn rayleigh_quotient(u: &Field, p: f64) -> f64 {
    u.h1_norm_sq() / u.lp_norm(p).powi(2)
}

struct Rayleigh<'a> {
    spec: &'a DomainSpec,
    p: f64,
    precond: &'a PoissonSolver,
}

impl Rayleigh<'_> {
    fn field(&self, x: &[f64]) -> Field {
        Field::from_values(self.spec, x.to_vec()).expect("finite iterate")
    }
}

impl Objective for Rayleigh<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        rayleigh_quotient(&self.field(x), self.p)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let u = self.field(x);
        let faces = FaceGradient::compute(&u);
        let lap = divergence(&faces);
        let norm = u.lp_norm(self.p);
        let q = faces.h1_norm_sq() / (norm * norm);
        let scale = norm.powf(2.0 - self.p);
        x.iter()
            .zip(&lap)
            .map(|(&v, &l)| {
                (2.0 * l - 2.0 * q * scale * v.signum() * v.abs().powf(self.p - 1.0))
                    / (norm * norm)
            })
            .collect()
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        l2_dot(self.spec, a, b)
    }

    fn direction(&self, g: &[f64]) -> Vec<f64> {
        self.precond.solve(g).into_iter().map(|v| -v).collect()
    }

    fn project(&self, x: &mut [f64]) {
        let norm = self.field(x).lp_norm(self.p);
        if norm > 0.0 {
            x.iter_mut().for_each(|v| *v /= norm);
        }
    }
}

fn descend_from(
    spec: &DomainSpec,
    p: f64,
    precond: &PoissonSolver,
    start: Field,
    opts: &SobolevOptions,
) -> RayleighOutcome {
    let obj = Rayleigh { spec, p, precond };
    let ls = LineSearch {
        max_iter: opts.max_iter,
        ..LineSearch::default()
    };
    let out = minimize(&obj, start.into_values(), &ls, |x, _, g| {
        let pg = precond.solve(g);
        let dual = l2_dot(spec, g, &pg).sqrt();
        dual <= opts.tol * obj.value(x)
    });
    let field = Field::from_values(spec, out.x).expect("finite minimizer");
    RayleighOutcome {
        quotient: out.value,
        field,
        iterations: out.iterations,
        converged: out.status == DescentStatus::Converged,
    }
}

/// Best quotient over the first eigenfield and `random_starts` positive
/// random fields. Starts run concurrently.
pub fn rayleigh_minimize(
    domain: &DomainSpec,
    p: f64,
    opts: &SobolevOptions,
) -> Result<RayleighOutcome> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "exponent must exceed 1, got {p}"
        )));
    }
    let precond = PoissonSolver::new(domain);
    let mut starts = vec![eigenfields(domain, 1).remove(0).1];
    for i in 0..opts.random_starts {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(i as u64));
        let vals = (0..domain.num_nodes())
            .map(|_| rng.random_range(0.0..1.0))
            .collect();
        starts.push(Field::from_values(domain, vals)?);
    }
    let outcomes: Vec<RayleighOutcome> = starts
        .into_par_iter()
        .map(|s| descend_from(domain, p, &precond, s, opts))
        .collect();
    let best_any = outcomes
        .iter()
        .map(|o| o.quotient)
        .fold(f64::INFINITY, f64::min);
    outcomes
        .into_iter()
        .filter(|o| o.converged)
        .min_by(|a, b| a.quotient.total_cmp(&b.quotient))
        .ok_or(Error::NonConvergence {
            best: best_any,
            iterations: opts.max_iter,
        })
}

/// `(S, Sq)` on the working grid.
pub fn estimate_sobolev_constants(
    domain: &DomainSpec,
    q: f64,
    opts: &SobolevOptions,
) -> Result<SobolevConstants> {
    if !(q > 1.0 && q < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "q must lie in (1, 2), got {q}"
        )));
    }
    let s = rayleigh_minimize(domain, critical_exponent(domain.dim()), opts)?.quotient;
    let sq = rayleigh_minimize(domain, q, opts)?.quotient;
    Ok(SobolevConstants { s, sq })
}
