//! Dense symmetric matrix algebra for small dimensions (n <= 8).
//!
//! Everything here is a pure value operation: determinants (closed form for
//! n <= 3, pivoted elimination above), cofactors via signed minors, spectra
//! via cyclic Jacobi rotations, elementary symmetric functions of the
//! eigenvalues and characteristic polynomial coefficients.

use thiserror::Error;

/// Largest supported matrix dimension.
pub const MAX_DIM: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum SymError {
    #[error("dimension {0} unsupported (must be in 1..={MAX_DIM})")]
    Dimension(usize),
    #[error("index {index} out of range for dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("Jacobi eigensolver failed to converge")]
    EigensolverNonConvergence,
}

/// Symmetric n x n matrix, stored as the upper triangle row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

/// Eigenvalues of a symmetric matrix, sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }
}

fn tri_len(n: usize) -> usize {
    n * (n + 1) / 2
}

impl SymMatrix {
    fn check_dim(n: usize) -> Result<(), SymError> {
        if n == 0 || n > MAX_DIM {
            return Err(SymError::Dimension(n));
        }
        Ok(())
    }

    pub fn zeros(n: usize) -> Result<Self, SymError> {
        Self::check_dim(n)?;
        Ok(Self { n, data: vec![0.0; tri_len(n)] })
    }

    pub fn identity(n: usize) -> Result<Self, SymError> {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, c: f64) -> Result<Self, SymError> {
        let mut a = Self::zeros(n)?;
        for i in 0..n {
            a.set(i, i, c);
        }
        Ok(a)
    }

    pub fn diag(values: &[f64]) -> Result<Self, SymError> {
        let mut a = Self::zeros(values.len())?;
        for (i, v) in values.iter().enumerate() {
            a.set(i, i, *v);
        }
        Ok(a)
    }

    /// Builds from the upper triangle stored row by row.
    pub fn from_upper(n: usize, data: Vec<f64>) -> Result<Self, SymError> {
        Self::check_dim(n)?;
        if data.len() != tri_len(n) {
            return Err(SymError::IndexOutOfRange { index: data.len(), n });
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self, SymError> {
        let mut a = Self::zeros(n)?;
        for i in 0..n {
            for j in i..n {
                a.set(i, j, f(i, j));
            }
        }
        Ok(a)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn upper(&self) -> &[f64] {
        &self.data
    }

    fn tri_index(&self, i: usize, j: usize) -> usize {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        r * self.n - (r * r - r) / 2 + (c - r)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[self.tri_index(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.tri_index(i, j);
        self.data[idx] = v;
    }

    pub fn add(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        SymMatrix { n: self.n, data }
    }

    pub fn sub(&self, other: &SymMatrix) -> SymMatrix {
        assert_eq!(self.n, other.n);
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        SymMatrix { n: self.n, data }
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix { n: self.n, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn add_scaled_identity(&self, eps: f64) -> SymMatrix {
        let mut out = self.clone();
        for i in 0..self.n {
            out.set(i, i, out.get(i, i) + eps);
        }
        out
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius inner product sum_ij A_ij B_ij (both triangles).
    pub fn frobenius_inner(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                acc += self.get(i, j) * other.get(i, j);
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_inner(self).sqrt()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Dense product A*B, row-major. Not symmetric in general.
    pub fn mul_dense(&self, other: &SymMatrix) -> Vec<f64> {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out[i * n + j] = acc;
            }
        }
        out
    }

    fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.get(i, j);
            }
        }
        out
    }

    pub fn determinant(&self) -> f64 {
        match self.n {
            1 => self.get(0, 0),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(0, 1),
            3 => {
                let (a, b, c) = (self.get(0, 0), self.get(0, 1), self.get(0, 2));
                let (d, e) = (self.get(1, 1), self.get(1, 2));
                let f = self.get(2, 2);
                a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c)
            }
            _ => dense_det(&self.to_dense(), self.n),
        }
    }

    /// Cofactor matrix: cof(A)_ij = (-1)^(i+j) * minor(i, j).
    /// Symmetric for symmetric input and satisfies A * cof(A) = det(A) * Id.
    pub fn cofactor(&self) -> SymMatrix {
        let n = self.n;
        if n == 1 {
            return SymMatrix::identity(1).unwrap();
        }
        if n == 2 {
            let mut out = SymMatrix::zeros(2).unwrap();
            out.set(0, 0, self.get(1, 1));
            out.set(1, 1, self.get(0, 0));
            out.set(0, 1, -self.get(0, 1));
            return out;
        }
        let dense = self.to_dense();
        let mut minor = vec![0.0; (n - 1) * (n - 1)];
        let mut out = SymMatrix::zeros(n).unwrap();
        for i in 0..n {
            for j in i..n {
                let mut r = 0;
                for p in 0..n {
                    if p == i {
                        continue;
                    }
                    let mut c = 0;
                    for q in 0..n {
                        if q == j {
                            continue;
                        }
                        minor[r * (n - 1) + c] = dense[p * n + q];
                        c += 1;
                    }
                    r += 1;
                }
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                out.set(i, j, sign * dense_det(&minor, n - 1));
            }
        }
        out
    }

    /// Eigenvalues via cyclic Jacobi, sorted ascending.
    pub fn spectrum(&self) -> Result<Spectrum, SymError> {
        let (eigs, _) = self.eigen_decomposition()?;
        Ok(Spectrum { eigenvalues: eigs })
    }

    /// Full decomposition: (ascending eigenvalues, column eigenvectors
    /// flattened row-major as an n x n matrix Q with A = Q diag Q^T).
    pub fn eigen_decomposition(&self) -> Result<(Vec<f64>, Vec<f64>), SymError> {
        let n = self.n;
        let mut a = self.to_dense();
        let mut q = vec![0.0; n * n];
        for i in 0..n {
            q[i * n + i] = 1.0;
        }
        if n == 1 {
            return Ok((vec![a[0]], q));
        }
        let scale = self
            .data
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(1.0);
        let tol = 1e-15 * scale;
        const MAX_SWEEPS: usize = 100;
        for _ in 0..MAX_SWEEPS {
            let mut off = 0.0f64;
            for i in 0..n {
                for j in (i + 1)..n {
                    off = off.max(a[i * n + j].abs());
                }
            }
            if off <= tol {
                let mut pairs: Vec<(f64, usize)> =
                    (0..n).map(|i| (a[i * n + i], i)).collect();
                pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
                let eigs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
                let mut qs = vec![0.0; n * n];
                for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
                    for r in 0..n {
                        qs[r * n + new_col] = q[r * n + old_col];
                    }
                }
                return Ok((eigs, qs));
            }
            for p in 0..n {
                for qi in (p + 1)..n {
                    let apq = a[p * n + qi];
                    if apq.abs() <= tol * 1e-2 {
                        continue;
                    }
                    let app = a[p * n + p];
                    let aqq = a[qi * n + qi];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let akp = a[k * n + p];
                        let akq = a[k * n + qi];
                        a[k * n + p] = c * akp - s * akq;
                        a[k * n + qi] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = a[p * n + k];
                        let aqk = a[qi * n + k];
                        a[p * n + k] = c * apk - s * aqk;
                        a[qi * n + k] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let qkp = q[k * n + p];
                        let qkq = q[k * n + qi];
                        q[k * n + p] = c * qkp - s * qkq;
                        q[k * n + qi] = s * qkp + c * qkq;
                    }
                }
            }
        }
        Err(SymError::EigensolverNonConvergence)
    }

    /// Elementary symmetric function M_i of the eigenvalues; M_0 = 1,
    /// M_n = det(A).
    pub fn elementary_symmetric(&self, i: usize) -> Result<f64, SymError> {
        if i > self.n {
            return Err(SymError::IndexOutOfRange { index: i, n: self.n });
        }
        if i == 0 {
            return Ok(1.0);
        }
        let spec = self.spectrum()?;
        // e-vector update: after processing lambda, e_j += lambda * e_{j-1}.
        let mut e = vec![0.0; self.n + 1];
        e[0] = 1.0;
        for &lam in spec.eigenvalues() {
            for j in (1..=self.n).rev() {
                e[j] += lam * e[j - 1];
            }
        }
        Ok(e[i])
    }

    /// Coefficients c_0..c_n of P_A(t) = det(t*Id - A) = sum c_i t^i,
    /// with c_i = (-1)^(i+n) M_{n-i}(A) and c_n = 1.
    pub fn char_poly_coeffs(&self) -> Result<Vec<f64>, SymError> {
        let n = self.n;
        let mut out = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let sign = if (i + n) % 2 == 0 { 1.0 } else { -1.0 };
            out.push(sign * self.elementary_symmetric(n - i)?);
        }
        Ok(out)
    }

    /// Spectral (operator) norm: max |eigenvalue|.
    pub fn operator_norm(&self) -> f64 {
        if self.n == 1 {
            return self.get(0, 0).abs();
        }
        if self.n == 2 {
            let (lo, hi) = eig2(self.get(0, 0), self.get(0, 1), self.get(1, 1));
            return lo.abs().max(hi.abs());
        }
        let spec = self.spectrum().expect("Jacobi converges for n <= 8");
        spec.min().abs().max(spec.max().abs())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        if self.n == 1 {
            return self.get(0, 0);
        }
        if self.n == 2 {
            return eig2(self.get(0, 0), self.get(0, 1), self.get(1, 1)).0;
        }
        self.spectrum().expect("Jacobi converges for n <= 8").min()
    }

    /// PSD check with relative tolerance 1e-10 * (1 + ||A||_op).
    pub fn is_psd(&self) -> bool {
        self.min_eigenvalue() >= -1e-10 * (1.0 + self.operator_norm())
    }
}

/// Closed-form eigenvalues of [[a, b], [b, c]], returned (min, max).
fn eig2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mean - rad, mean + rad)
}

/// Determinant of a dense row-major matrix by partial-pivot elimination.
fn dense_det(mat: &[f64], n: usize) -> f64 {
    let mut a = mat.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let d = a[col * n + col];
        det *= d;
        for r in (col + 1)..n {
            let factor = a[r * n + col] / d;
            for c in col..n {
                a[r * n + c] -= factor * a[col * n + c];
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn random_sym(rng: &mut impl Rng, n: usize, scale: f64) -> SymMatrix {
        SymMatrix::from_fn(n, |_, _| rng.gen_range(-scale..scale)).unwrap()
    }

    fn random_spd(rng: &mut impl Rng, n: usize) -> SymMatrix {
        // G^T G + small ridge
        let g: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut a = SymMatrix::zeros(n).unwrap();
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for k in 0..n {
                    acc += g[k * n + i] * g[k * n + j];
                }
                a.set(i, j, acc + if i == j { 0.1 } else { 0.0 });
            }
        }
        a
    }

    /// Leibniz expansion over all permutations, independent determinant oracle.
    fn leibniz_det(a: &SymMatrix) -> f64 {
        fn perms(n: usize) -> Vec<(Vec<usize>, f64)> {
            if n == 1 {
                return vec![(vec![0], 1.0)];
            }
            let mut out = Vec::new();
            for (p, sign) in perms(n - 1) {
                for pos in 0..n {
                    let mut q: Vec<usize> = p.iter().map(|&v| v).collect();
                    q.insert(pos, n - 1);
                    // moving element n-1 from the end to `pos` costs n-1-pos swaps
                    let s = if (n - 1 - pos) % 2 == 0 { sign } else { -sign };
                    out.push((q, s));
                }
            }
            out
        }
        let n = a.n();
        perms(n)
            .into_iter()
            .map(|(p, sign)| {
                sign * (0..n).map(|i| a.get(i, p[i])).product::<f64>()
            })
            .sum()
    }

    #[test]
    fn determinant_identity_and_diagonal() {
        assert_eq!(SymMatrix::identity(2).unwrap().determinant(), 1.0);
        assert_eq!(SymMatrix::diag(&[2.0, 3.0]).unwrap().determinant(), 6.0);
    }

    #[test]
    fn determinant_matches_leibniz_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 3, 4, 5] {
            for _ in 0..50 {
                let a = random_sym(&mut rng, n, 2.0);
                let d = a.determinant();
                let oracle = leibniz_det(&a);
                assert!(
                    (d - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()),
                    "n={n}: {d} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn determinant_nonnegative_for_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let a = random_spd(&mut rng, 3);
            let tol = 1e-12 * (1.0 + a.operator_norm().powi(3));
            assert!(a.determinant() >= -tol);
        }
    }

    #[test]
    fn cofactor_identity_cases() {
        for n in 2..=4 {
            let id = SymMatrix::identity(n).unwrap();
            assert_eq!(id.cofactor(), id);
        }
        let d = SymMatrix::diag(&[2.0, 5.0]).unwrap();
        assert_eq!(d.cofactor(), SymMatrix::diag(&[5.0, 2.0]).unwrap());
    }

    #[test]
    fn cofactor_satisfies_adjugate_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in [2usize, 3, 4] {
            for _ in 0..30 {
                let a = random_spd(&mut rng, n);
                let cof = a.cofactor();
                let prod = a.mul_dense(&cof);
                let det = a.determinant();
                for i in 0..n {
                    for j in 0..n {
                        let expect = if i == j { det } else { 0.0 };
                        assert!(
                            (prod[i * n + j] - expect).abs()
                                <= 1e-10 * (1.0 + det.abs()),
                            "n={n} ({i},{j})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn cofactor_defined_for_singular_input() {
        let a = SymMatrix::diag(&[1.0, 0.0, 2.0]).unwrap();
        let cof = a.cofactor();
        assert_eq!(cof.get(1, 1), 2.0);
        assert_eq!(cof.get(0, 0), 0.0);
    }

    #[test]
    fn spectrum_examples() {
        let s = SymMatrix::diag(&[3.0, 1.0, 2.0]).unwrap().spectrum().unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 2.0, 3.0]);
        let s = SymMatrix::identity(2).unwrap().spectrum().unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 1.0]);
        // [[2,1],[1,2]] has eigenvalues 1, 3 by the (a+b) +- |c| pattern
        let a = SymMatrix::from_upper(2, vec![2.0, 1.0, 2.0]).unwrap();
        let s = a.spectrum().unwrap();
        assert!((s.eigenvalues()[0] - 1.0).abs() < 1e-12);
        assert!((s.eigenvalues()[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn eigen_reconstruction_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in 2..=MAX_DIM {
            let a = random_sym(&mut rng, n, 3.0);
            let (eigs, q) = a.eigen_decomposition().unwrap();
            let norm = a.operator_norm();
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += q[i * n + k] * eigs[k] * q[j * n + k];
                    }
                    worst = worst.max((acc - a.get(i, j)).abs());
                }
            }
            assert!(worst <= 1e-12 * (1.0 + norm), "n={n}: residual {worst}");
        }
    }

    #[test]
    fn elementary_symmetric_examples() {
        let a = SymMatrix::diag(&[1.0, 2.0, 3.0]).unwrap();
        assert!((a.elementary_symmetric(2).unwrap() - 11.0).abs() < 1e-12);
        assert_eq!(a.elementary_symmetric(0).unwrap(), 1.0);
        assert!(a.elementary_symmetric(4).is_err());
        // M_n = det
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 3);
            let m3 = a.elementary_symmetric(3).unwrap();
            let det = a.determinant();
            assert!((m3 - det).abs() <= 1e-10 * (1.0 + det.abs()));
        }
    }

    #[test]
    fn char_poly_identity_and_zero() {
        let c = SymMatrix::identity(2).unwrap().char_poly_coeffs().unwrap();
        assert!((c[0] - 1.0).abs() < 1e-12);
        assert!((c[1] + 2.0).abs() < 1e-12);
        assert!((c[2] - 1.0).abs() < 1e-12);
        let c = SymMatrix::zeros(3).unwrap().char_poly_coeffs().unwrap();
        assert_eq!(c, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn char_poly_matches_elementary_symmetric_and_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let a = random_spd(&mut rng, 3);
            let n = a.n();
            let coeffs = a.char_poly_coeffs().unwrap();
            for i in 0..=n {
                let sign = if (i + n) % 2 == 0 { 1.0 } else { -1.0 };
                let mi = a.elementary_symmetric(n - i).unwrap();
                assert!((coeffs[i] - sign * mi).abs() <= 1e-10 * (1.0 + mi.abs()));
            }
            // each eigenvalue is a root
            let norm = a.operator_norm();
            for &lam in a.spectrum().unwrap().eigenvalues() {
                let p: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c * lam.powi(i as i32))
                    .sum();
                assert!(p.abs() <= 1e-8 * (1.0 + norm.powi(3)), "root residual {p}");
            }
        }
    }

    #[test]
    fn monotonicity_of_determinant_on_psd_cone() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let b = random_spd(&mut rng, 3);
            let p = random_spd(&mut rng, 3);
            let a = b.add(&p);
            assert!(a.determinant() >= b.determinant() - 1e-10);
        }
    }

    #[test]
    fn determinant_difference_bound() {
        // |det X - det Y| <= n (||X||^(n-1) + ||Y||^(n-1)) ||X - Y||, operator norm
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for n in [2usize, 3] {
            for _ in 0..2000 {
                let x = random_sym(&mut rng, n, 5.0);
                let y = random_sym(&mut rng, n, 5.0);
                if x.operator_norm() > 10.0 || y.operator_norm() > 10.0 {
                    continue;
                }
                let lhs = (x.determinant() - y.determinant()).abs();
                let rhs = n as f64
                    * (x.operator_norm().powi(n as i32 - 1)
                        + y.operator_norm().powi(n as i32 - 1))
                    * x.sub(&y).operator_norm();
                assert!(lhs <= rhs + 1e-12, "n={n}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn homogeneity_of_elementary_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..50 {
            let a = random_spd(&mut rng, 3);
            let t = rng.gen_range(0.1..3.0);
            for i in 0..=3usize {
                let lhs = a.scale(t).elementary_symmetric(i).unwrap();
                let rhs = t.powi(i as i32) * a.elementary_symmetric(i).unwrap();
                assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
            }
        }
    }

    #[test]
    fn rejects_oversized_dimension() {
        assert_eq!(SymMatrix::zeros(9).unwrap_err(), SymError::Dimension(9));
        assert_eq!(SymMatrix::zeros(0).unwrap_err(), SymError::Dimension(0));
    }

    #[test]
    fn cofactor_of_symmetric_is_symmetric_by_construction() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let a = random_sym(&mut rng, 5, 2.0);
        let cof = a.cofactor();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(cof.get(i, j), cof.get(j, i));
            }
        }
    }
}
