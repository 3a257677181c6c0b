use super::{CompensatedSum, DomainSpec, Field};

/// Full gradient vector reconstructed at every face of every axis.
///
/// Faces of axis `d` sit between nodes `i_d - 1` and `i_d` for
/// `i_d ∈ 0..=n` (the two outermost ones touch the boundary). The normal
/// component is the forward difference across the face; each tangential
/// component is the mean of the centered differences at the two adjacent
/// nodes, taken as zero on boundary nodes.
///
/// The quadrature weight of every face is `h^N / N`, so that averaging over
/// the `N` staggered face families integrates over the box once.
#[derive(Debug, Clone)]
pub struct FaceGradient {
    spec: DomainSpec,
    /// `axes[d][f * N + c]` is component `c` at face `f` of axis `d`.
    axes: Vec<Vec<f64>>,
}

/// Iterates the multi-indices of a row-major shape.
fn for_each_index(shape: &[usize], mut f: impl FnMut(usize, &[usize])) {
    let dim = shape.len();
    let total: usize = shape.iter().product();
    let mut idx = vec![0usize; dim];
    for flat in 0..total {
        f(flat, &idx);
        for d in (0..dim).rev() {
            idx[d] += 1;
            if idx[d] < shape[d] {
                break;
            }
            idx[d] = 0;
        }
    }
}

fn face_shape(spec: &DomainSpec, axis: usize) -> Vec<usize> {
    (0..spec.dim())
        .map(|e| if e == axis { spec.n() + 1 } else { spec.n() })
        .collect()
}

fn face_strides(spec: &DomainSpec, axis: usize) -> Vec<usize> {
    let shape = face_shape(spec, axis);
    let mut s = vec![1; shape.len()];
    for d in (0..shape.len() - 1).rev() {
        s[d] = s[d + 1] * shape[d + 1];
    }
    s
}

/// Centered differences `(u[x+e] - u[x-e]) / 2h_e` at every node and axis.
fn centered_differences(u: &Field) -> Vec<Vec<f64>> {
    let spec = u.spec();
    let n = spec.n();
    let strides = spec.strides();
    let vals = u.values();
    let shape = vec![n; spec.dim()];
    (0..spec.dim())
        .map(|e| {
            let inv = 1.0 / (2.0 * spec.spacing(e));
            let st = strides[e];
            let mut out = vec![0.0; vals.len()];
            for_each_index(&shape, |flat, idx| {
                let plus = if idx[e] + 1 < n { vals[flat + st] } else { 0.0 };
                let minus = if idx[e] > 0 { vals[flat - st] } else { 0.0 };
                out[flat] = (plus - minus) * inv;
            });
            out
        })
        .collect()
}

impl FaceGradient {
    pub fn compute(u: &Field) -> Self {
        let spec = u.spec().clone();
        let dim = spec.dim();
        let n = spec.n();
        let strides = spec.strides();
        let vals = u.values();
        let centered = centered_differences(u);
        let axes = (0..dim)
            .map(|d| {
                let shape = face_shape(&spec, d);
                let inv_h = 1.0 / spec.spacing(d);
                let mut out = vec![0.0; shape.iter().product::<usize>() * dim];
                for_each_index(&shape, |flat, idx| {
                    let mut node = 0;
                    for e in 0..dim {
                        if e != d {
                            node += idx[e] * strides[e];
                        }
                    }
                    let lower = (idx[d] > 0).then(|| node + (idx[d] - 1) * strides[d]);
                    let upper = (idx[d] < n).then(|| node + idx[d] * strides[d]);
                    let at = |i: Option<usize>, arr: &[f64]| i.map_or(0.0, |i| arr[i]);
                    let base = flat * dim;
                    for c in 0..dim {
                        out[base + c] = if c == d {
                            (at(upper, vals) - at(lower, vals)) * inv_h
                        } else {
                            0.5 * (at(lower, &centered[c]) + at(upper, &centered[c]))
                        };
                    }
                });
                out
            })
            .collect();
        Self { spec, axes }
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn face_count(&self, axis: usize) -> usize {
        self.axes[axis].len() / self.spec.dim()
    }

    /// Gradient vector at face `face` of axis `axis`.
    pub fn vector(&self, axis: usize, face: usize) -> &[f64] {
        let dim = self.spec.dim();
        &self.axes[axis][face * dim..(face + 1) * dim]
    }

    /// Quadrature weight `h^N / N` carried by each face.
    pub fn weight(&self) -> f64 {
        self.spec.cell_volume() / self.spec.dim() as f64
    }

    /// Physical coordinates of a face midpoint.
    pub fn face_coordinates(&self, axis: usize, face: usize) -> Vec<f64> {
        let shape = face_shape(&self.spec, axis);
        let mut rest = face;
        let mut x = vec![0.0; shape.len()];
        for e in (0..shape.len()).rev() {
            let i = rest % shape[e];
            rest /= shape[e];
            let h = self.spec.spacing(e);
            x[e] = if e == axis {
                (i as f64 + 0.5) * h
            } else {
                (i + 1) as f64 * h
            };
        }
        x
    }

    /// Squared Euclidean norm `|∇u|²` at every face, axis by axis.
    pub fn squared_norms(&self) -> Vec<Vec<f64>> {
        let dim = self.spec.dim();
        self.axes
            .iter()
            .map(|a| {
                a.chunks_exact(dim)
                    .map(|g| {
                        let mut t = 0.0;
                        for c in g {
                            t += c * c;
                        }
                        t
                    })
                    .collect()
            })
            .collect()
    }

    /// `Σ_faces w F(|∇u|²)` with compensated summation.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for axis in self.squared_norms() {
            for t in axis {
                acc.add(f(t));
            }
        }
        acc.value() * self.weight()
    }

    pub fn h1_norm_sq(&self) -> f64 {
        self.integrate(|t| t)
    }

    pub fn sup_norm(&self) -> f64 {
        self.squared_norms()
            .iter()
            .flatten()
            .fold(0.0f64, |m, &t| m.max(t))
            .sqrt()
    }

    /// Flux `a(|∇u|²) ∇u` at every face.
    pub fn flux(&self, coefficient: impl Fn(f64) -> f64) -> FaceGradient {
        let dim = self.spec.dim();
        let axes = self
            .axes
            .iter()
            .map(|a| {
                let mut out = Vec::with_capacity(a.len());
                for g in a.chunks_exact(dim) {
                    let mut t = 0.0;
                    for c in g {
                        t += c * c;
                    }
                    let k = coefficient(t);
                    out.extend(g.iter().map(|c| k * c));
                }
                out
            })
            .collect();
        FaceGradient {
            spec: self.spec.clone(),
            axes,
        }
    }
}

/// L²-representative of `v ↦ Σ_faces w F_f · (∇v)_f`, i.e. the discrete
/// `-div F` that is exactly adjoint to [`FaceGradient::compute`].
///
/// Every node value is gathered in a fixed term order, so reflecting the
/// input about any axis reflects the output bit-for-bit.
pub fn divergence(flux: &FaceGradient) -> Vec<f64> {
    let spec = &flux.spec;
    let dim = spec.dim();
    let n = spec.n();
    let strides = spec.strides();
    let total = spec.num_nodes();
    let shape = vec![n; dim];
    let fstrides: Vec<Vec<usize>> = (0..dim).map(|d| face_strides(spec, d)).collect();

    let face_of = |d: usize, idx: &[usize], shift: usize| -> usize {
        let mut f = 0;
        for e in 0..dim {
            let i = if e == d { idx[e] + shift } else { idx[e] };
            f += i * fstrides[d][e];
        }
        f
    };

    // M[d][e][y] = ½ (F_e at the lower d-face of y + F_e at the upper d-face of y)
    let mut m = vec![vec![Vec::new(); dim]; dim];
    for d in 0..dim {
        for e in 0..dim {
            if e == d {
                continue;
            }
            let mut arr = vec![0.0; total];
            for_each_index(&shape, |flat, idx| {
                let lo = flux.axes[d][face_of(d, idx, 0) * dim + e];
                let hi = flux.axes[d][face_of(d, idx, 1) * dim + e];
                arr[flat] = 0.5 * (lo + hi);
            });
            m[d][e] = arr;
        }
    }

    let inv_n = 1.0 / dim as f64;
    let mut out = vec![0.0; total];
    for_each_index(&shape, |flat, idx| {
        let mut s = 0.0;
        for d in 0..dim {
            let lo = flux.axes[d][face_of(d, idx, 0) * dim + d];
            let hi = flux.axes[d][face_of(d, idx, 1) * dim + d];
            s += (lo - hi) / spec.spacing(d);
        }
        for d in 0..dim {
            for e in 0..dim {
                if e == d {
                    continue;
                }
                let st = strides[e];
                let before = if idx[e] > 0 { m[d][e][flat - st] } else { 0.0 };
                let after = if idx[e] + 1 < n {
                    m[d][e][flat + st]
                } else {
                    0.0
                };
                s += (before - after) / (2.0 * spec.spacing(e));
            }
        }
        out[flat] = s * inv_n;
    });
    out
}
