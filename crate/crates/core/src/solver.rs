//! Symmetric multistart descent for sign pairs of critical points of `J_λ`
//! at negative levels, and a warm-started λ-sweep.
//!
//! Seeds are drawn on small spheres of the span of the lowest Dirichlet
//! eigenfields. Descent runs in the H¹₀ metric (Poisson-preconditioned
//! gradient), which leaves the iteration count independent of the grid.
//! All kernels are exactly odd under `u ↦ -u` and exactly equivariant under
//! the box reflections, so a seed with a parity keeps it bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::descent::{minimize, DescentStatus, LineSearch, Objective};
use crate::energy::{eval_j, grad_j, EnergyReport};
use crate::error::{Error, Result};
use crate::grid::{eigenfields, l2_dot, DomainSpec, Field, PoissonSolver};
use crate::thresholds::Thresholds;
use crate::truncation::ProblemParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Absolute bound on `‖grad J‖_{L²}`.
    pub tol: f64,
    /// Bound on `‖grad J‖_{L²}` relative to `‖λ|u|^{q-1}‖_{L²}`; both must hold.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// Points sampled per seed sphere.
    pub samples: usize,
    pub seed: u64,
    /// Two records closer than `dedup_tol · max(‖u‖_{L²}, ‖v‖_{L²})` modulo sign coincide.
    pub dedup_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            rel_tol: 1e-6,
            max_iter: 20_000,
            samples: 8,
            seed: 0,
            dedup_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolutionRecord {
    pub u: Field,
    /// `J(u)`; an upper bound for the corresponding minimax level.
    pub level: f64,
    pub report: EnergyReport,
    pub iterations: usize,
    pub lambda: f64,
    /// `J` after every accepted iterate.
    pub trace: Vec<f64>,
}

impl SolutionRecord {
    fn from_field(
        u: Field,
        p: &ProblemParams,
        th: &Thresholds,
        iterations: usize,
        trace: Vec<f64>,
    ) -> Self {
        let report = EnergyReport::compute(&u, p, th);
        Self {
            level: report.j,
            u,
            report,
            iterations,
            lambda: p.lambda,
            trace,
        }
    }

    /// The sign partner, evaluated afresh.
    pub fn negated(&self, p: &ProblemParams, th: &Thresholds) -> Self {
        Self::from_field(self.u.neg(), p, th, self.iterations, self.trace.clone())
    }
}

#[derive(Debug)]
pub struct SolutionSet {
    /// One member per sign pair, sorted by level.
    pub records: Vec<SolutionRecord>,
    /// Seeds whose descent failed, by seed index.
    pub failures: Vec<(usize, Error)>,
}

/// `X_k`: the `k` lowest eigenfields, each scaled to unit H¹₀ norm.
pub fn eigen_basis(domain: &DomainSpec, k: usize) -> Vec<Field> {
    eigenfields(domain, k)
        .into_iter()
        .map(|(_, f)| {
            let norm = f.h1_norm_sq().sqrt();
            f.scaled(1.0 / norm)
        })
        .collect()
}

/// Sphere points of `X_k` on which `J < 0`.
///
/// The first `min(k, m)` samples are the basis vectors themselves; the rest
/// are Gaussian directions from a stream seeded by `seed`. Every sample is
/// scaled to H¹₀ norm `R`, with `R` halved from `sqrt(R1)` until `J` is
/// negative on all of them. Negatives are implicit.
pub fn symmetric_seeds(
    k: usize,
    p: &ProblemParams,
    th: &Thresholds,
    m: usize,
    seed: u64,
) -> Result<Vec<Field>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let basis = eigen_basis(&p.domain, k);
    let count = if k == 1 { 1 } else { m.max(k) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut directions: Vec<Field> = basis.iter().take(count).cloned().collect();
    while directions.len() < count {
        let mut acc = Field::zeros(&p.domain);
        for b in &basis {
            let c: f64 = StandardNormal.sample(&mut rng);
            acc = acc.axpy(c, b);
        }
        let norm = acc.h1_norm_sq().sqrt();
        if norm > 0.0 {
            directions.push(acc.scaled(1.0 / norm));
        }
    }
    let mut radius = th.r1.sqrt();
    while radius > 1e-10 {
        let points: Vec<Field> = directions.iter().map(|d| d.scaled(radius)).collect();
        if points.iter().all(|u| eval_j(u, p, th) < 0.0) {
            return Ok(points);
        }
        radius *= 0.5;
    }
    Err(Error::RadiusSearchFailed {
        last_radius: radius,
    })
}

/// `J_λ` on the flat node vector, with the H¹₀-metric search direction.
struct TruncatedEnergy<'a> {
    p: &'a ProblemParams,
    th: &'a Thresholds,
    precond: &'a PoissonSolver,
}

impl TruncatedEnergy<'_> {
    fn field(&self, x: &[f64]) -> Field {
        Field::from_values(&self.p.domain, x.to_vec()).expect("finite iterate")
    }
}

impl Objective for TruncatedEnergy<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        eval_j(&self.field(x), self.p, self.th)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        grad_j(&self.field(x), self.p, self.th).into_values()
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        l2_dot(&self.p.domain, a, b)
    }

    fn direction(&self, g: &[f64]) -> Vec<f64> {
        self.precond.solve(g).into_iter().map(|v| -v).collect()
    }
}

/// `‖λ|u|^{q-1}‖_{L²}`, the size of the sublinear forcing.
pub fn forcing_scale(u: &[f64], p: &ProblemParams) -> f64 {
    let spec = &p.domain;
    let f: Vec<f64> = u
        .iter()
        .map(|v| p.lambda * v.abs().powf(p.q - 1.0))
        .collect();
    l2_dot(spec, &f, &f).sqrt()
}

/// Whether a residual meets both the absolute and the relative tolerance.
pub fn residual_converged(
    residual: f64,
    u: &[f64],
    p: &ProblemParams,
    opts: &SolverOptions,
) -> bool {
    residual <= opts.tol && residual <= opts.rel_tol * forcing_scale(u, p)
}

/// Preconditioned backtracking descent on `J_λ` from `seed`.
pub fn descend(
    seed: &Field,
    p: &ProblemParams,
    th: &Thresholds,
    opts: &SolverOptions,
) -> Result<SolutionRecord> {
    let precond = PoissonSolver::new(&p.domain);
    descend_with(seed, p, th, opts, &precond)
}

fn descend_with(
    seed: &Field,
    p: &ProblemParams,
    th: &Thresholds,
    opts: &SolverOptions,
    precond: &PoissonSolver,
) -> Result<SolutionRecord> {
    let obj = TruncatedEnergy { p, th, precond };
    let ls = LineSearch {
        max_iter: opts.max_iter,
        ..LineSearch::default()
    };
    let out = minimize(&obj, seed.values().to_vec(), &ls, |x, r, _| {
        residual_converged(r, x, p, opts)
    });
    match out.status {
        DescentStatus::Converged => {
            let u = Field::from_values(&p.domain, out.x)?;
            Ok(SolutionRecord::from_field(
                u,
                p,
                th,
                out.iterations,
                out.trace,
            ))
        }
        DescentStatus::Stalled => Err(Error::LineSearchStalled {
            iteration: out.iterations,
            residual: out.residual,
        }),
        DescentStatus::MaxIterations => Err(Error::MaxIterations {
            iterations: out.iterations,
            residual: out.residual,
        }),
    }
}

/// Flips `u` so that its first entry of largest magnitude is positive.
fn canonical_sign(u: Field) -> Field {
    let vals = u.values();
    let mut best = 0;
    for (i, v) in vals.iter().enumerate() {
        if v.abs() > vals[best].abs() {
            best = i;
        }
    }
    if vals.get(best).is_some_and(|v| *v < 0.0) {
        u.neg()
    } else {
        u
    }
}

/// L² distance modulo sign.
pub fn pair_distance(u: &Field, v: &Field) -> f64 {
    u.axpy(-1.0, v).l2_norm().min(u.axpy(1.0, v).l2_norm())
}

/// Descends from `symmetric_seeds(j)` for every `j = 1..=k` concurrently and
/// keeps one representative per sign pair at negative level.
pub fn find_multiple(
    k: usize,
    p: &ProblemParams,
    th: &Thresholds,
    opts: &SolverOptions,
) -> Result<SolutionSet> {
    if !(p.lambda > 0.0 && p.lambda < th.lambda_star) {
        return Err(Error::LambdaOutOfRange {
            lambda: p.lambda,
            lambda_star: th.lambda_star,
        });
    }
    let mut seeds = Vec::new();
    for j in 1..=k {
        seeds.extend(symmetric_seeds(
            j,
            p,
            th,
            opts.samples,
            opts.seed.wrapping_add(j as u64),
        )?);
    }
    let precond = PoissonSolver::new(&p.domain);
    let outcomes: Vec<Result<SolutionRecord>> = seeds
        .par_iter()
        .map(|s| descend_with(s, p, th, opts, &precond))
        .collect();

    let mut records: Vec<SolutionRecord> = Vec::new();
    let mut failures = Vec::new();
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(mut rec) if rec.level < 0.0 => {
                let duplicate = records.iter().any(|r| {
                    let scale = r.u.l2_norm().max(rec.u.l2_norm());
                    pair_distance(&r.u, &rec.u) <= opts.dedup_tol * scale
                });
                if !duplicate {
                    let u = canonical_sign(rec.u.clone());
                    if u != rec.u {
                        rec = rec.negated(p, th);
                    }
                    records.push(rec);
                }
            }
            Ok(_) => {}
            Err(e) => failures.push((i, e)),
        }
    }
    if records.is_empty() {
        return Err(Error::EmptySet);
    }
    records.sort_by(|a, b| a.level.total_cmp(&b.level));
    Ok(SolutionSet { records, failures })
}

#[derive(Debug)]
pub struct SweepPoint {
    pub lambda: f64,
    pub thresholds: Thresholds,
    pub outcome: Result<SolutionRecord>,
}

/// Norms tracked along a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormSample {
    pub lambda: f64,
    /// `‖u‖`, the H¹₀ norm.
    pub h1: f64,
    pub linf: f64,
    pub supgrad: f64,
    pub r0: f64,
}

impl NormSample {
    pub fn of(rec: &SolutionRecord, r0: f64) -> Self {
        Self {
            lambda: rec.lambda,
            h1: rec.report.norm_sq.sqrt(),
            linf: rec.u.linf_norm(),
            supgrad: rec.u.sup_grad(),
            r0,
        }
    }

    pub fn ratio(&self) -> f64 {
        self.linf / self.h1
    }
}

/// `λ_j = lambda_max · factor^j` for `j = 0..steps`.
pub fn sweep_lambdas(lambda_max: f64, factor: f64, steps: usize) -> Vec<f64> {
    (0..steps)
        .map(|j| lambda_max * factor.powi(j as i32))
        .collect()
}

/// Follows the ground-state branch over decreasing λ. Each solve starts
/// from the previous solution scaled by `(λ_new/λ_old)^{1/(2-q)}`, or from
/// `symmetric_seeds(1)` when that start is not at negative level. A failed
/// λ is recorded and the sweep goes on.
pub fn lambda_sweep(
    lambdas: &[f64],
    p: &ProblemParams,
    th: &Thresholds,
    opts: &SolverOptions,
) -> Vec<SweepPoint> {
    let precond = PoissonSolver::new(&p.domain);
    let mut previous: Option<(f64, Field)> = None;
    let mut points = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let pl = p.with_lambda(lambda);
        let th_l = match th.at_lambda(lambda) {
            Ok(t) => t,
            Err(e) => {
                points.push(SweepPoint {
                    lambda,
                    thresholds: *th,
                    outcome: Err(e),
                });
                continue;
            }
        };
        let outcome = (|| {
            if !(lambda > 0.0 && lambda < th_l.lambda_star) {
                return Err(Error::LambdaOutOfRange {
                    lambda,
                    lambda_star: th_l.lambda_star,
                });
            }
            let warm = previous
                .as_ref()
                .map(|(l, u)| u.scaled((lambda / l).powf(1.0 / (2.0 - p.q))))
                .filter(|u| eval_j(u, &pl, &th_l) < 0.0);
            let start = match warm {
                Some(u) => u,
                None => symmetric_seeds(1, &pl, &th_l, 1, opts.seed)?.remove(0),
            };
            descend_with(&start, &pl, &th_l, opts, &precond)
        })();
        if let Ok(rec) = &outcome {
            previous = Some((lambda, rec.u.clone()));
        }
        points.push(SweepPoint {
            lambda,
            thresholds: th_l,
            outcome,
        });
    }
    points
}

/// `J_λ` restricted to the span of a fixed basis, in coefficient space.
pub struct SubspaceEnergy<'a> {
    pub basis: &'a [Field],
    pub p: &'a ProblemParams,
    pub th: &'a Thresholds,
}

impl SubspaceEnergy<'_> {
    pub fn field(&self, coeffs: &[f64]) -> Field {
        let mut u = Field::zeros(&self.p.domain);
        for (c, b) in coeffs.iter().zip(self.basis) {
            u = u.axpy(*c, b);
        }
        u
    }
}

impl Objective for SubspaceEnergy<'_> {
    fn value(&self, x: &[f64]) -> f64 {
        eval_j(&self.field(x), self.p, self.th)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let g = grad_j(&self.field(x), self.p, self.th);
        self.basis.iter().map(|b| g.l2_dot(b)).collect()
    }

    fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(a, b)| a * b).sum()
    }
}

/// Coefficient-space descent of the restricted energy from `start`.
pub fn descend_in_subspace(
    basis: &[Field],
    start: &[f64],
    p: &ProblemParams,
    th: &Thresholds,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let obj = SubspaceEnergy { basis, p, th };
    let ls = LineSearch {
        max_iter,
        ..LineSearch::default()
    };
    let out = minimize(&obj, start.to_vec(), &ls, |_, r, _| r <= tol);
    match out.status {
        DescentStatus::Converged => Ok(out.x),
        DescentStatus::Stalled => Err(Error::LineSearchStalled {
            iteration: out.iterations,
            residual: out.residual,
        }),
        DescentStatus::MaxIterations => Err(Error::MaxIterations {
            iterations: out.iterations,
            residual: out.residual,
        }),
    }
}
