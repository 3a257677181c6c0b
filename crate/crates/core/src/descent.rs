//! Backtracking (Armijo) descent on a flat parameter vector.
//!
//! The objective supplies its own inner product and descent direction, so the
//! same driver runs plain gradient descent in coefficient space and
//! H¹₀-preconditioned descent on grid fields.

/// A differentiable objective.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;

    /// Gradient, as the Riesz representative for [`Objective::dot`].
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    fn dot(&self, a: &[f64], b: &[f64]) -> f64;

    /// Search direction for a gradient `g`; must satisfy `dot(g, d) < 0`.
    fn direction(&self, g: &[f64]) -> Vec<f64> {
        g.iter().map(|v| -v).collect()
    }

    /// Retraction applied after every trial step.
    fn project(&self, _x: &mut [f64]) {}
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    /// Sufficient-decrease constant.
    pub armijo: f64,
    /// Smallest step tried before giving up.
    pub min_step: f64,
    pub max_iter: usize,
    pub initial_step: f64,
    /// Step growth after an accepted iterate.
    pub growth: f64,
    pub max_step: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        Self {
            armijo: 1e-4,
            min_step: 1e-16,
            max_iter: 10_000,
            initial_step: 1.0,
            growth: 2.0,
            max_step: 1e6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DescentStatus {
    Converged,
    /// No step above `min_step` gave sufficient decrease.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct Descent {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    /// `sqrt(dot(g, g))` at `x`.
    pub residual: f64,
    pub iterations: usize,
    /// Objective value after every accepted iterate, starting at `x0`.
    pub trace: Vec<f64>,
    pub status: DescentStatus,
}

/// Runs descent from `x0` until `converged(x, residual, g)` holds.
pub fn minimize<O: Objective>(
    obj: &O,
    x0: Vec<f64>,
    ls: &LineSearch,
    mut converged: impl FnMut(&[f64], f64, &[f64]) -> bool,
) -> Descent {
    let mut x = x0;
    obj.project(&mut x);
    let mut f = obj.value(&x);
    let mut g = obj.gradient(&x);
    let mut residual = obj.dot(&g, &g).sqrt();
    let mut trace = vec![f];
    let mut step = ls.initial_step;
    let mut status = DescentStatus::MaxIterations;
    let mut iterations = 0;

    while iterations < ls.max_iter {
        if converged(&x, residual, &g) {
            status = DescentStatus::Converged;
            break;
        }
        let d = obj.direction(&g);
        let slope = obj.dot(&g, &d);
        if !(slope < 0.0) {
            status = DescentStatus::Stalled;
            break;
        }
        let mut alpha = step;
        let accepted = loop {
            let mut trial: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            obj.project(&mut trial);
            let ft = obj.value(&trial);
            // strict decrease as well, so exhausted precision shows up as a stall
            if ft < f && ft <= f + ls.armijo * alpha * slope {
                break Some((trial, ft));
            }
            alpha *= 0.5;
            if alpha < ls.min_step {
                break None;
            }
        };
        let Some((xt, ft)) = accepted else {
            status = DescentStatus::Stalled;
            break;
        };
        x = xt;
        f = ft;
        g = obj.gradient(&x);
        residual = obj.dot(&g, &g).sqrt();
        trace.push(f);
        iterations += 1;
        step = (alpha * ls.growth).min(ls.max_step);
    }
    if status == DescentStatus::MaxIterations && converged(&x, residual, &g) {
        status = DescentStatus::Converged;
    }
    Descent {
        x,
        value: f,
        gradient: g,
        residual,
        iterations,
        trace,
        status,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic {
        diag: Vec<f64>,
        center: Vec<f64>,
    }

    impl Objective for Quadratic {
        fn value(&self, x: &[f64]) -> f64 {
            x.iter()
                .zip(&self.center)
                .zip(&self.diag)
                .map(|((x, c), d)| 0.5 * d * (x - c).powi(2))
                .sum()
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            x.iter()
                .zip(&self.center)
                .zip(&self.diag)
                .map(|((x, c), d)| d * (x - c))
                .collect()
        }
        fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
            a.iter().zip(b).map(|(a, b)| a * b).sum()
        }
    }

    #[test]
    fn converges_on_quadratic_with_monotone_trace() {
        let obj = Quadratic {
            diag: vec![1.0, 10.0, 100.0],
            center: vec![1.0, -2.0, 0.5],
        };
        let out = minimize(&obj, vec![0.0; 3], &LineSearch::default(), |_, r, _| {
            r < 1e-10
        });
        assert_eq!(out.status, DescentStatus::Converged);
        for (a, b) in out.x.iter().zip(&obj.center) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn reports_iteration_cap() {
        let obj = Quadratic {
            diag: vec![1.0, 1e4],
            center: vec![1.0, 1.0],
        };
        let ls = LineSearch {
            max_iter: 3,
            ..LineSearch::default()
        };
        let out = minimize(&obj, vec![0.0; 2], &ls, |_, r, _| r < 1e-14);
        assert_eq!(out.status, DescentStatus::MaxIterations);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn stalls_when_no_decrease_is_possible() {
        struct Flat;
        impl Objective for Flat {
            fn value(&self, _: &[f64]) -> f64 {
                0.0
            }
            fn gradient(&self, _: &[f64]) -> Vec<f64> {
                vec![1.0]
            }
            fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
                a[0] * b[0]
            }
        }
        let out = minimize(&Flat, vec![0.0], &LineSearch::default(), |_, _, _| false);
        assert_eq!(out.status, DescentStatus::Stalled);
    }
}
