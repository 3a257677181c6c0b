//! Discrete sine transforms: Dirichlet Laplacian eigenfields and the fast
//! Poisson solve used as the H¹₀ preconditioner.

use super::{DomainSpec, Field};

/// `sin(π m / (n+1))` for `m ∈ 0..2(n+1)`, with the reflection identities
/// `T[n+1-m] = T[m]` and `T[m+n+1] = -T[m]` holding bit-for-bit.
#[derive(Debug, Clone)]
pub struct SineTable {
    n: usize,
    values: Vec<f64>,
}

impl SineTable {
    pub fn new(n: usize) -> Self {
        let period = n + 1;
        let mut values = vec![0.0; 2 * period];
        for m in 1..=period / 2 {
            values[m] = (std::f64::consts::PI * m as f64 / period as f64).sin();
        }
        for m in period / 2 + 1..=period {
            values[m] = values[period - m];
        }
        for m in period + 1..2 * period {
            values[m] = -values[m - period];
        }
        Self { n, values }
    }

    /// `sin(π (j+1)(k+1) / (n+1))` for zero-based `j, k < n`.
    #[inline]
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.values[((j + 1) * (k + 1)) % (2 * (self.n + 1))]
    }
}

/// Eigenvalue of the standard `2N+1`-point Dirichlet Laplacian for the
/// one-based sine mode `modes`.
pub fn laplacian_eigenvalue(spec: &DomainSpec, modes: &[usize]) -> f64 {
    let n = spec.n();
    let mut terms: Vec<f64> = modes
        .iter()
        .enumerate()
        .map(|(d, &k)| {
            let h = spec.spacing(d);
            let s = (std::f64::consts::PI * k as f64 / (2.0 * (n + 1) as f64)).sin();
            4.0 * s * s / (h * h)
        })
        .collect();
    // summing in sorted order keeps permuted modes of a cube exactly tied
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// The `k` lowest sine-product eigenfields (values in `[-1, 1]`), ordered by
/// eigenvalue and then lexicographically by mode tuple.
pub fn eigenfields(spec: &DomainSpec, k: usize) -> Vec<(Vec<usize>, Field)> {
    let dim = spec.dim();
    let kmax = k.min(spec.n()).max(1);
    let mut modes: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..dim {
        modes = modes
            .into_iter()
            .flat_map(|m| {
                (1..=kmax).map(move |i| {
                    let mut m = m.clone();
                    m.push(i);
                    m
                })
            })
            .collect();
    }
    let mut keyed: Vec<(f64, Vec<usize>)> = modes
        .into_iter()
        .map(|m| (laplacian_eigenvalue(spec, &m), m))
        .collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let table = SineTable::new(spec.n());
    let strides = spec.strides();
    let n = spec.n();
    keyed
        .into_iter()
        .take(k)
        .map(|(_, m)| {
            let values = (0..spec.num_nodes())
                .map(|flat| {
                    let mut v = 1.0;
                    for d in 0..dim {
                        let i = (flat / strides[d]) % n;
                        v *= table.entry(i, m[d] - 1);
                    }
                    v
                })
                .collect();
            (
                m,
                Field::from_values(spec, values).expect("finite eigenfield"),
            )
        })
        .collect()
}

/// Exact inverse of the standard Dirichlet Laplacian `-Δ_h` by separable sine
/// transforms.
#[derive(Debug, Clone)]
pub struct PoissonSolver {
    spec: DomainSpec,
    table: SineTable,
    /// Per-axis one-dimensional eigenvalues `4 sin²(π k / 2(n+1)) / h²`.
    axis_eigs: Vec<Vec<f64>>,
}

impl PoissonSolver {
    pub fn new(spec: &DomainSpec) -> Self {
        let n = spec.n();
        let axis_eigs = (0..spec.dim())
            .map(|d| {
                let h = spec.spacing(d);
                (1..=n)
                    .map(|k| {
                        let s = (std::f64::consts::PI * k as f64 / (2.0 * (n + 1) as f64)).sin();
                        4.0 * s * s / (h * h)
                    })
                    .collect()
            })
            .collect();
        Self {
            spec: spec.clone(),
            table: SineTable::new(n),
            axis_eigs,
        }
    }

    /// Solves `-Δ_h v = g`.
    pub fn solve(&self, g: &[f64]) -> Vec<f64> {
        let dim = self.spec.dim();
        let n = self.spec.n();
        let strides = self.spec.strides();
        let mut work = g.to_vec();
        for axis in 0..dim {
            self.transform_axis(&mut work, axis, true);
        }
        for (flat, w) in work.iter_mut().enumerate() {
            let mut lambda = 0.0;
            for d in 0..dim {
                lambda += self.axis_eigs[d][(flat / strides[d]) % n];
            }
            *w /= lambda;
        }
        for axis in 0..dim {
            self.transform_axis(&mut work, axis, false);
        }
        let scale = (2.0 / (n + 1) as f64).powi(dim as i32);
        work.iter_mut().for_each(|w| *w *= scale);
        work
    }

    pub fn solve_field(&self, g: &Field) -> Field {
        Field::from_values(&self.spec, self.solve(g.values())).expect("finite solve")
    }

    /// Unnormalized DST-I along one axis. The forward pass sums mirror pairs
    /// together so that reflected input gives exactly reflected output.
    fn transform_axis(&self, data: &mut [f64], axis: usize, forward: bool) {
        let n = self.spec.n();
        let stride = self.spec.strides()[axis];
        let mut line = vec![0.0; n];
        let mut out = vec![0.0; n];
        for start in 0..data.len() {
            if !(start / stride).is_multiple_of(n) {
                continue;
            }
            for (j, l) in line.iter_mut().enumerate() {
                *l = data[start + j * stride];
            }
            for (k, o) in out.iter_mut().enumerate() {
                let mut s = 0.0;
                if forward {
                    for j in 0..n / 2 {
                        let jm = n - 1 - j;
                        s += self.table.entry(j, k) * line[j] + self.table.entry(jm, k) * line[jm];
                    }
                    if n % 2 == 1 {
                        let mid = n / 2;
                        s += self.table.entry(mid, k) * line[mid];
                    }
                } else {
                    for (j, l) in line.iter().enumerate() {
                        s += self.table.entry(k, j) * l;
                    }
                }
                *o = s;
            }
            for (j, o) in out.iter().enumerate() {
                data[start + j * stride] = *o;
            }
        }
    }
}
