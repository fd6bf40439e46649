//! Periodic fields on the unit torus [0,1)^n sampled on a uniform grid,
//! with spectral calculus: averages, row-wise divergence, mollification,
//! Lp norms with the pointwise operator norm, the determinant functional,
//! smooth cutoffs and the localized blow-up field.

use crate::fft;
use crate::sym::{SymError, SymMatrix};
use crate::util::pairwise_mean;
use thiserror::Error;

/// Hard cap on total node count (desk scale).
pub const MAX_NODES: usize = 1 << 24;

#[derive(Debug, Error)]
pub enum FieldError {
    #[error("grid dimension {0} unsupported (must be in 2..=8)")]
    GridDimension(usize),
    #[error("grid resolution {0} invalid (must be a power of two >= 8)")]
    GridResolution(usize),
    #[error("grid {m}^{n} exceeds the node cap {MAX_NODES}")]
    NodeCapExceeded { m: usize, n: usize },
    #[error("value length {got} does not match expected {expected}")]
    LengthMismatch { got: usize, expected: usize },
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("field is not positive semidefinite within tolerance")]
    NotPsd,
    #[error("mollifier radius {eps} under-resolved by the grid (needs eps >= 2/m = {min})")]
    UnderResolvedKernel { eps: f64, min: f64 },
    #[error("Lp exponent {0} out of range (needs p >= 1)")]
    InvalidExponent(f64),
    #[error("cutoff margin {0} out of range (needs 0 < margin < 1/4)")]
    MarginOutOfRange(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("cutoff values must lie in [0, 1]")]
    CutoffRange,
    #[error("spectral divergence is not defined for indicator-sampled fields")]
    IndicatorDivergence,
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// How a sampled field should be interpolated off the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Trigonometric interpolation (smooth fields).
    Smooth,
    /// Nearest-node lookup (indicator-type fields, preserves PSD and range).
    Indicator,
}

/// Uniform periodic grid over [0,1)^n with m nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusGrid {
    n: usize,
    m: usize,
}

impl TorusGrid {
    pub fn new(n: usize, m: usize) -> Result<Self, FieldError> {
        if n < 2 || n > crate::sym::MAX_DIM {
            return Err(FieldError::GridDimension(n));
        }
        if m < 8 || !m.is_power_of_two() {
            return Err(FieldError::GridResolution(m));
        }
        let mut total = 1usize;
        for _ in 0..n {
            total = total
                .checked_mul(m)
                .filter(|&t| t <= MAX_NODES)
                .ok_or(FieldError::NodeCapExceeded { m, n })?;
        }
        Ok(Self { n, m })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn node_count(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    /// Coordinates of the node with flat row-major index `flat`.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        let mut rem = flat;
        for axis in (0..self.n).rev() {
            out[axis] = (rem % self.m) as f64 / self.m as f64;
            rem /= self.m;
        }
        out
    }

    /// Flat index from per-axis node indices (wrapped modulo m).
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.m + (i % self.m))
    }
}

/// Scalar field sampled on a torus grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
    sampling: Sampling,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self, FieldError> {
        if values.len() != grid.node_count() {
            return Err(FieldError::LengthMismatch {
                got: values.len(),
                expected: grid.node_count(),
            });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        Ok(Self { grid, values, sampling: Sampling::Smooth })
    }

    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(&[f64]) -> f64) -> Result<Self, FieldError> {
        let values = (0..grid.node_count()).map(|i| f(&grid.coords(i))).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Result<Self, FieldError> {
        Self::new(grid, vec![c; grid.node_count()])
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn mean(&self) -> f64 {
        pairwise_mean(&self.values)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self, FieldError> {
        Self::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Spectral gradient.
    pub fn gradient(&self) -> VectorField {
        let comps = fft::gradient(&self.values, self.grid.n, self.grid.m);
        VectorField::from_components(self.grid, &comps).unwrap()
    }

    /// Spectral Hessian as a (symmetric) matrix field. No PSD assertion.
    pub fn hessian(&self) -> MatrixField {
        let comps = fft::hessian(&self.values, self.grid.n, self.grid.m);
        MatrixField::from_components(self.grid, &comps, false).unwrap()
    }

    /// Trigonometric interpolation at an arbitrary point.
    pub fn eval_at(&self, point: &[f64]) -> f64 {
        fft::eval_point(&self.values, self.grid.n, self.grid.m, point)
    }

    /// Periodic mollification by a compact bump of radius `eps`.
    pub fn mollify(&self, eps: f64) -> Result<Self, FieldError> {
        let kernel = mollifier_kernel(self.grid, eps)?;
        let values = fft::convolve_normalized(&self.values, &kernel, self.grid.n, self.grid.m);
        Self::new(self.grid, values)
    }
}

/// Vector field, stored node-major (n components per node).
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl VectorField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self, FieldError> {
        let expected = grid.node_count() * grid.n;
        if values.len() != expected {
            return Err(FieldError::LengthMismatch { got: values.len(), expected });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        Ok(Self { grid, values })
    }

    pub fn from_components(grid: TorusGrid, comps: &[Vec<f64>]) -> Result<Self, FieldError> {
        let nodes = grid.node_count();
        let mut values = vec![0.0; nodes * grid.n];
        for (c, comp) in comps.iter().enumerate() {
            for (node, &v) in comp.iter().enumerate() {
                values[node * grid.n + c] = v;
            }
        }
        Self::new(grid, values)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn component_at(&self, node: usize, c: usize) -> f64 {
        self.values[node * self.grid.n + c]
    }

    /// Pointwise Euclidean norm as a scalar field.
    pub fn norm_field(&self) -> ScalarField {
        let n = self.grid.n;
        let values = (0..self.grid.node_count())
            .map(|node| {
                (0..n)
                    .map(|c| self.component_at(node, c).powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        ScalarField::new(self.grid, values).unwrap()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }
}

/// Row-wise divergence of a matrix field: the absolutely continuous part and
/// a discrete estimate of the total variation ∫ ||div A||.
#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub abs_part: VectorField,
    pub tv_estimate: f64,
}

/// Symmetric-matrix field, stored node-major (upper triangle per node).
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixField {
    grid: TorusGrid,
    values: Vec<f64>,
    psd: bool,
    sampling: Sampling,
}

fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl MatrixField {
    pub fn new(grid: TorusGrid, values: Vec<f64>, psd: bool) -> Result<Self, FieldError> {
        let expected = grid.node_count() * tri_len(grid.n);
        if values.len() != expected {
            return Err(FieldError::LengthMismatch { got: values.len(), expected });
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(FieldError::NonFinite);
        }
        let field = Self { grid, values, psd, sampling: Sampling::Smooth };
        if psd && !field.verify_psd() {
            return Err(FieldError::NotPsd);
        }
        Ok(field)
    }

    pub fn from_fn(
        grid: TorusGrid,
        psd: bool,
        mut f: impl FnMut(&[f64]) -> SymMatrix,
    ) -> Result<Self, FieldError> {
        let tri = tri_len(grid.n);
        let mut values = Vec::with_capacity(grid.node_count() * tri);
        for i in 0..grid.node_count() {
            let mat = f(&grid.coords(i));
            assert_eq!(mat.n(), grid.n);
            values.extend_from_slice(mat.upper());
        }
        Self::new(grid, values, psd)
    }

    pub fn from_components(
        grid: TorusGrid,
        comps: &[Vec<f64>],
        psd: bool,
    ) -> Result<Self, FieldError> {
        let tri = tri_len(grid.n);
        assert_eq!(comps.len(), tri);
        let nodes = grid.node_count();
        let mut values = vec![0.0; nodes * tri];
        for (c, comp) in comps.iter().enumerate() {
            for (node, &v) in comp.iter().enumerate() {
                values[node * tri + c] = v;
            }
        }
        Self::new(grid, values, psd)
    }

    pub fn constant(grid: TorusGrid, mat: &SymMatrix, psd: bool) -> Result<Self, FieldError> {
        Self::from_fn(grid, psd, |_| mat.clone())
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn psd_flag(&self) -> bool {
        self.psd
    }

    pub fn sampling(&self) -> Sampling {
        self.sampling
    }

    pub fn value_at(&self, node: usize) -> SymMatrix {
        let tri = tri_len(self.grid.n);
        SymMatrix::from_upper(
            self.grid.n,
            self.values[node * tri..(node + 1) * tri].to_vec(),
        )
        .unwrap()
    }

    /// One upper-triangle component as a scalar array.
    pub fn component(&self, c: usize) -> Vec<f64> {
        let tri = tri_len(self.grid.n);
        (0..self.grid.node_count())
            .map(|node| self.values[node * tri + c])
            .collect()
    }

    /// Upper-triangle component index for matrix entry (i, j), i <= j.
    pub fn tri_index(&self, i: usize, j: usize) -> usize {
        let n = self.grid.n;
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        r * n - (r * r - r) / 2 + (c - r)
    }

    fn verify_psd(&self) -> bool {
        let nodes = self.grid.node_count();
        for node in 0..nodes {
            let mat = self.value_at(node);
            if !mat.is_psd() {
                return false;
            }
        }
        true
    }

    /// Grid average, exact for resolved trigonometric polynomials.
    pub fn mean_matrix(&self) -> SymMatrix {
        let tri = tri_len(self.grid.n);
        let mut upper = Vec::with_capacity(tri);
        for c in 0..tri {
            upper.push(pairwise_mean(&self.component(c)));
        }
        SymMatrix::from_upper(self.grid.n, upper).unwrap()
    }

    /// Pointwise determinants.
    pub fn det_field(&self) -> Vec<f64> {
        (0..self.grid.node_count())
            .map(|node| self.value_at(node).determinant())
            .collect()
    }

    /// The functional D(A) = ∫ det(A)^(1/(n-1)) dx by grid quadrature.
    /// Requires the PSD flag; determinants within -tol of zero are clipped.
    pub fn functional_d(&self) -> Result<f64, FieldError> {
        if !self.psd {
            return Err(FieldError::NotPsd);
        }
        let n = self.grid.n;
        let exponent = 1.0 / (n as f64 - 1.0);
        let mut dets = self.det_field();
        for (node, d) in dets.iter_mut().enumerate() {
            if *d < 0.0 {
                let norm = self.value_at(node).operator_norm();
                let tol = 1e-12 * (1.0 + norm.powi(n as i32));
                if *d < -tol {
                    return Err(FieldError::NotPsd);
                }
                *d = 0.0;
            }
            *d = d.powf(exponent);
        }
        Ok(pairwise_mean(&dets))
    }

    /// Row-wise spectral divergence plus the quadrature of its norm.
    pub fn divergence(&self) -> Result<DivergenceReport, FieldError> {
        if self.sampling == Sampling::Indicator {
            return Err(FieldError::IndicatorDivergence);
        }
        let n = self.grid.n;
        let m = self.grid.m;
        let nodes = self.grid.node_count();
        let mut rows: Vec<Vec<f64>> = vec![vec![0.0; nodes]; n];
        for i in 0..n {
            for j in 0..n {
                let comp = self.component(self.tri_index(i, j));
                let d = fft::derivative(&comp, n, m, j);
                for (acc, v) in rows[i].iter_mut().zip(&d) {
                    *acc += v;
                }
            }
        }
        let abs_part = VectorField::from_components(self.grid, &rows)?;
        let tv_estimate = abs_part.norm_field().mean();
        Ok(DivergenceReport { abs_part, tv_estimate })
    }

    /// Lp norm with the pointwise operator norm; p = infinity takes the max.
    pub fn lp_norm(&self, p: f64) -> Result<f64, FieldError> {
        if !(p >= 1.0) {
            return Err(FieldError::InvalidExponent(p));
        }
        let norms: Vec<f64> = (0..self.grid.node_count())
            .map(|node| self.value_at(node).operator_norm())
            .collect();
        if p.is_infinite() {
            return Ok(norms.iter().cloned().fold(0.0, f64::max));
        }
        let powered: Vec<f64> = norms.iter().map(|v| v.powf(p)).collect();
        Ok(pairwise_mean(&powered).powf(1.0 / p))
    }

    pub fn linf_norm(&self) -> f64 {
        self.lp_norm(f64::INFINITY).unwrap()
    }

    /// Periodic mollification componentwise; PSD is preserved because the
    /// kernel weights are nonnegative and sum to one.
    pub fn mollify(&self, eps: f64) -> Result<MatrixField, FieldError> {
        let kernel = mollifier_kernel(self.grid, eps)?;
        let tri = tri_len(self.grid.n);
        let comps: Vec<Vec<f64>> = (0..tri)
            .map(|c| {
                fft::convolve_normalized(&self.component(c), &kernel, self.grid.n, self.grid.m)
            })
            .collect();
        // roundoff can push node minima a hair below the construction check
        let mut out = Self::from_components(self.grid, &comps, false)?;
        out.psd = self.psd;
        Ok(out)
    }

    pub fn add(&self, other: &MatrixField) -> Result<MatrixField, FieldError> {
        if self.grid != other.grid {
            return Err(FieldError::GridMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        MatrixField::new(self.grid, values, false)
    }

    pub fn scale(&self, c: f64) -> MatrixField {
        let values = self.values.iter().map(|v| v * c).collect();
        let mut out = MatrixField::new(self.grid, values, false).unwrap();
        out.psd = self.psd && c >= 0.0;
        out.sampling = self.sampling;
        out
    }

    /// A + eps * Id at every node. Divergence is unchanged.
    pub fn epsilon_shift(&self, eps: f64) -> MatrixField {
        let n = self.grid.n;
        let tri = tri_len(n);
        let mut values = self.values.clone();
        for node in 0..self.grid.node_count() {
            for i in 0..n {
                values[node * tri + self.tri_index(i, i)] += eps;
            }
        }
        let mut out = MatrixField::new(self.grid, values, false).unwrap();
        out.psd = self.psd && eps >= 0.0;
        out.sampling = self.sampling;
        out
    }

    /// Minimum over nodes of the smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        (0..self.grid.node_count())
            .map(|node| self.value_at(node).min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }

    /// Samples A(a + R x) on the same grid: trigonometric interpolation for
    /// smooth fields, nearest-node lookup for indicator fields.
    pub fn resample_affine(&self, a: &[f64], r: f64) -> MatrixField {
        assert_eq!(a.len(), self.grid.n);
        let n = self.grid.n;
        let m = self.grid.m;
        let tri = tri_len(n);
        match self.sampling {
            Sampling::Smooth => {
                let comps: Vec<Vec<f64>> = (0..tri)
                    .map(|c| {
                        let mut cur = self.component(c);
                        for axis in 0..n {
                            cur = fft::resample_axis(&cur, n, m, axis, a[axis], r);
                        }
                        cur
                    })
                    .collect();
                let mut out = Self::from_components(self.grid, &comps, false).unwrap();
                out.psd = self.psd;
                out
            }
            Sampling::Indicator => {
                let nodes = self.grid.node_count();
                let mut values = vec![0.0; nodes * tri];
                let mut idx = vec![0usize; n];
                for node in 0..nodes {
                    let x = self.grid.coords(node);
                    for axis in 0..n {
                        let y = (a[axis] + r * x[axis]).rem_euclid(1.0);
                        idx[axis] = (y * m as f64).round() as usize % m;
                    }
                    let src = self.grid.flat_index(&idx);
                    values[node * tri..(node + 1) * tri]
                        .copy_from_slice(&self.values[src * tri..(src + 1) * tri]);
                }
                let mut out = Self::new(self.grid, values, false).unwrap();
                out.psd = self.psd;
                out.sampling = Sampling::Indicator;
                out
            }
        }
    }
}

/// Compact mollifier bump sampled on the grid (unnormalized).
fn mollifier_kernel(grid: TorusGrid, eps: f64) -> Result<Vec<f64>, FieldError> {
    let min = 2.0 / grid.m as f64;
    if !(eps > 0.0) || eps < min {
        return Err(FieldError::UnderResolvedKernel { eps, min });
    }
    let kernel = (0..grid.node_count())
        .map(|node| {
            let x = grid.coords(node);
            let d2: f64 = x
                .iter()
                .map(|&xi| {
                    let d = xi.min(1.0 - xi);
                    d * d
                })
                .sum();
            let s = d2 / (eps * eps);
            if s < 1.0 {
                (-1.0 / (1.0 - s)).exp()
            } else {
                0.0
            }
        })
        .collect();
    Ok(kernel)
}

/// Smooth cutoff: 0 within `margin` of the cell boundary, 1 on the centered
/// cube of side 1 - 4*margin, values in [0,1].
pub fn bump_cutoff(grid: TorusGrid, margin: f64) -> Result<ScalarField, FieldError> {
    if !(margin > 0.0 && margin < 0.25) {
        return Err(FieldError::MarginOutOfRange(margin));
    }
    let profile = |t: f64| -> f64 {
        let d = t.min(1.0 - t);
        if d <= margin {
            0.0
        } else if d >= 2.0 * margin {
            1.0
        } else {
            let s = (d - margin) / margin;
            let q = |u: f64| (-1.0 / u).exp();
            q(s) / (q(s) + q(1.0 - s))
        }
    };
    ScalarField::from_fn(grid, |x| x.iter().map(|&xi| profile(xi)).product())
}

/// The localized field B(x) = phi(x) Ak(a + R x) + (1 - phi(x)) Aa.
pub fn localized_field(
    ak: &MatrixField,
    aa: &SymMatrix,
    a: &[f64],
    r: f64,
    phi: &ScalarField,
) -> Result<MatrixField, FieldError> {
    if ak.grid() != phi.grid() {
        return Err(FieldError::GridMismatch);
    }
    if !ak.psd_flag() || !aa.is_psd() {
        return Err(FieldError::NotPsd);
    }
    if phi.values().iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v)) {
        return Err(FieldError::CutoffRange);
    }
    let resampled = ak.resample_affine(a, r);
    let grid = ak.grid();
    let tri = tri_len(grid.n());
    let mut values = vec![0.0; grid.node_count() * tri];
    for node in 0..grid.node_count() {
        let w = phi.values()[node];
        for c in 0..tri {
            values[node * tri + c] =
                w * resampled.values()[node * tri + c] + (1.0 - w) * aa.upper()[c];
        }
    }
    let mut out = MatrixField::new(grid, values, false)?;
    out.psd = true;
    Ok(out)
}
