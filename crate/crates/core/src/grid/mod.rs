//! Finite-difference discretization of a box with homogeneous Dirichlet data.
//!
//! Unknowns live on the `n^N` interior nodes `x_i = (i+1) h`, stored row-major
//! (last axis fastest). Boundary values are implicitly zero.

mod faces;
mod io;
mod spectral;

pub use faces::{divergence, FaceGradient};
pub use io::{read_field, write_field};
pub use spectral::{eigenfields, laplacian_eigenvalue, PoissonSolver, SineTable};

use crate::error::{Error, Result};

/// Axis-aligned box `∏ [0, L_i]` with `n` interior points per axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    lengths: Vec<f64>,
    n: usize,
}

impl DomainSpec {
    pub fn new(lengths: Vec<f64>, n: usize) -> Result<Self> {
        if lengths.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "dimension must be >= 3, got {}",
                lengths.len()
            )));
        }
        if n < 3 {
            return Err(Error::InvalidParameter(format!(
                "need at least 3 interior points per axis, got {n}"
            )));
        }
        if lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "box lengths must be positive, got {lengths:?}"
            )));
        }
        Ok(Self { lengths, n })
    }

    pub fn unit_cube(dim: usize, n: usize) -> Result<Self> {
        Self::new(vec![1.0; dim], n)
    }

    pub fn dim(&self) -> usize {
        self.lengths.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / (self.n + 1) as f64
    }

    /// Volume of one grid cell, the midpoint quadrature weight.
    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|d| self.spacing(d)).product()
    }

    /// Exact measure of the box.
    pub fn measure(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn num_nodes(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }

    /// Flat-index stride of each axis.
    pub fn strides(&self) -> Vec<usize> {
        let dim = self.dim();
        let mut s = vec![1; dim];
        for d in (0..dim - 1).rev() {
            s[d] = s[d + 1] * self.n;
        }
        s
    }

    /// Same box at a different resolution.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.lengths.clone(), n)
    }

    /// Physical coordinates of the node with the given flat index.
    pub fn coordinates(&self, flat: usize) -> Vec<f64> {
        let mut idx = flat;
        let mut x = vec![0.0; self.dim()];
        for d in (0..self.dim()).rev() {
            let i = idx % self.n;
            idx /= self.n;
            x[d] = (i + 1) as f64 * self.spacing(d);
        }
        x
    }
}

/// Grid function on the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    spec: DomainSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(spec: &DomainSpec) -> Self {
        Self {
            spec: spec.clone(),
            values: vec![0.0; spec.num_nodes()],
        }
    }

    pub fn from_values(spec: &DomainSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.num_nodes() {
            return Err(Error::InvalidParameter(format!(
                "field has {} values, grid needs {}",
                values.len(),
                spec.num_nodes()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "field contains non-finite values".into(),
            ));
        }
        Ok(Self {
            spec: spec.clone(),
            values,
        })
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn(spec: &DomainSpec, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..spec.num_nodes())
            .map(|i| f(&spec.coordinates(i)))
            .collect();
        Self {
            spec: spec.clone(),
            values,
        }
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            spec: self.spec.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &Field) -> Self {
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + c * b)
            .collect();
        Self {
            spec: self.spec.clone(),
            values,
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            spec: self.spec.clone(),
            values: self.values.iter().map(|v| -v).collect(),
        }
    }

    /// Midpoint-rule L² inner product.
    pub fn l2_dot(&self, other: &Field) -> f64 {
        l2_dot(&self.spec, &self.values, &other.values)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_dot(self).sqrt()
    }

    /// `‖u‖² = Σ_faces |∇u|² w`, the squared H¹₀ norm.
    pub fn h1_norm_sq(&self) -> f64 {
        FaceGradient::compute(self).h1_norm_sq()
    }

    /// `(Σ |u_i|^p h^N)^{1/p}`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.lp_integral(p).powf(1.0 / p)
    }

    /// `Σ |u_i|^p h^N`.
    pub fn lp_integral(&self, p: f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for v in &self.values {
            acc.add(v.abs().powf(p));
        }
        acc.value() * self.spec.cell_volume()
    }

    pub fn linf_norm(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest Euclidean norm of the reconstructed face gradient.
    pub fn sup_grad(&self) -> f64 {
        FaceGradient::compute(self).sup_norm()
    }
}

pub(crate) fn l2_dot(spec: &DomainSpec, a: &[f64], b: &[f64]) -> f64 {
    let mut acc = CompensatedSum::default();
    for (x, y) in a.iter().zip(b) {
        acc.add(x * y);
    }
    acc.value() * spec.cell_volume()
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}
