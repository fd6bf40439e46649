//! Families of matrix fields: the concentration counterexample at the
//! critical exponent, divergence-free SPD fields built as cofactors of
//! Hessians of convex potentials, oscillation (homogenization) sequences,
//! and the epsilon shift toward the interior of the PSD cone.

use crate::fields::{FieldError, MatrixField, Sampling, TorusGrid};
use crate::sym::SymMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("scale index k = {0} out of range (needs k >= 1)")]
    BadScaleIndex(u32),
    #[error("ball of radius 2^-{k} not resolved by m = {m} (needs m * 2^-k >= 8)")]
    UnderResolvedBall { k: u32, m: usize },
    #[error("potential is not convex: Hessian eigenvalue {0} < 0 at some node")]
    NotConvexPotential(f64),
    #[error("cofactor-of-Hessian fields support n in 2..=3, got {0}")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Closed-form record of the concentration family
/// `A_k = 2^(k(n-1)) * chi_{B(x0, 2^-k)} * Id`.
///
/// The divergence is a surface measure and is never grid-differentiated; its
/// exact total variation is `n * omega_n` (jump height 2^(k(n-1)) times the
/// sphere area n * omega_n * 2^(-k(n-1))).
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticCounterexample {
    pub n: usize,
    pub x0: Vec<f64>,
    pub k: u32,
}

impl AnalyticCounterexample {
    pub fn support_radius(&self) -> f64 {
        0.5f64.powi(self.k as i32)
    }

    pub fn density(&self) -> f64 {
        2.0f64.powi(self.k as i32 * (self.n as i32 - 1))
    }

    /// D(A_k) = omega_n, independent of k.
    pub fn exact_d(&self) -> f64 {
        unit_ball_volume(self.n)
    }

    /// ||A_k||_{L^p} = (omega_n * 2^(k(n-1)p - kn))^(1/p); the operator norm
    /// of f * Id is f. For p = infinity this is the density itself.
    pub fn exact_lp(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.density();
        }
        let k = self.k as f64;
        let n = self.n as f64;
        (unit_ball_volume(self.n) * 2.0f64.powf(k * (n - 1.0) * p - k * n)).powf(1.0 / p)
    }

    /// Total variation of div(A_k) = D f_k: n * omega_n, independent of k.
    pub fn exact_div_tv(&self) -> f64 {
        self.n as f64 * unit_ball_volume(self.n)
    }
}

/// Samples the counterexample field on a grid (nearest-node indicator) and
/// returns it together with its exact analytic record.
pub fn counterexample_field(
    n: usize,
    x0: &[f64],
    k: u32,
    grid: TorusGrid,
) -> Result<(MatrixField, AnalyticCounterexample), GenError> {
    assert_eq!(grid.n(), n);
    assert_eq!(x0.len(), n);
    if k < 1 {
        return Err(GenError::BadScaleIndex(k));
    }
    let radius = 0.5f64.powi(k as i32);
    if (grid.m() as f64) * radius < 8.0 {
        return Err(GenError::UnderResolvedBall { k, m: grid.m() });
    }
    let record = AnalyticCounterexample { n, x0: x0.to_vec(), k };
    let density = record.density();
    let r2 = radius * radius;
    let field = MatrixField::from_fn(grid, true, |x| {
        let d2: f64 = x
            .iter()
            .zip(x0)
            .map(|(&xi, &ci)| {
                let d = (xi - ci).rem_euclid(1.0);
                let d = d.min(1.0 - d);
                d * d
            })
            .sum();
        let v = if d2 <= r2 { density } else { 0.0 };
        SymMatrix::scaled_identity(n, v).unwrap()
    })?
    .with_sampling(Sampling::Indicator);
    Ok((field, record))
}

/// Divergence-free PSD field A = cof(Hess u) for the convex potential
/// `u(x) = |x|^2/2 + amplitude * sum over modes of prod_j sin(2 pi q_j x_j)`
/// (factors only over the nonzero frequencies of each mode).
pub fn cofactor_hessian_field(
    n: usize,
    amplitude: f64,
    modes: &[Vec<i64>],
    grid: TorusGrid,
) -> Result<MatrixField, GenError> {
    if !(2..=3).contains(&n) {
        return Err(GenError::UnsupportedDimension(n));
    }
    assert_eq!(grid.n(), n);
    let periodic = crate::fields::ScalarField::from_fn(grid, |x| {
        modes
            .iter()
            .map(|q| {
                q.iter()
                    .zip(x)
                    .filter(|(&qj, _)| qj != 0)
                    .map(|(&qj, &xj)| (2.0 * std::f64::consts::PI * qj as f64 * xj).sin())
                    .product::<f64>()
            })
            .sum::<f64>()
            * amplitude
    })?;
    let hess = periodic.hessian();
    let nodes = grid.node_count();
    let tri = n * (n + 1) / 2;
    let mut values = vec![0.0; nodes * tri];
    let mut worst = f64::INFINITY;
    for node in 0..nodes {
        let h = hess.value_at(node).add_scaled_identity(1.0);
        worst = worst.min(h.min_eigenvalue());
        let cof = h.cofactor();
        values[node * tri..(node + 1) * tri].copy_from_slice(cof.upper());
    }
    if worst < -1e-12 {
        return Err(GenError::NotConvexPotential(worst));
    }
    Ok(MatrixField::new(grid, values, true)?)
}

/// The oscillated field A_k(x) = B(k x mod 1). Node values of B(k x) land
/// exactly on grid nodes, so this is an index permutation, no interpolation.
pub fn oscillation_sequence(base: &MatrixField, k: u32) -> Result<MatrixField, GenError> {
    if k < 1 {
        return Err(GenError::BadScaleIndex(k));
    }
    let grid = base.grid();
    let n = grid.n();
    let m = grid.m();
    let tri = n * (n + 1) / 2;
    let nodes = grid.node_count();
    let mut values = vec![0.0; nodes * tri];
    let mut idx = vec![0usize; n];
    for node in 0..nodes {
        let mut rem = node;
        for axis in (0..n).rev() {
            idx[axis] = (rem % m) * k as usize % m;
            rem /= m;
        }
        let src = grid.flat_index(&idx);
        values[node * tri..(node + 1) * tri]
            .copy_from_slice(&base.values()[src * tri..(src + 1) * tri]);
    }
    let out = MatrixField::new(grid, values, base.psd_flag())?;
    Ok(out.with_sampling(base.sampling()))
}

/// A + eps * Id at every node (move into the interior of the PSD cone).
pub fn epsilon_shift(field: &MatrixField, eps: f64) -> MatrixField {
    field.epsilon_shift(eps)
}

/// Names a sequence of matrix fields for the semicontinuity probes.
#[derive(Debug, Clone)]
pub enum SequenceSpec {
    /// The concentration family; the weak limit is the zero field.
    Counterexample { n: usize, x0: Vec<f64>, k_range: Vec<u32> },
    /// B(k x) for k in k_range; the weak limit is the constant mean of B.
    Oscillation { base: MatrixField, k_range: Vec<u32> },
    /// Mollifications of a base field; the limit is the base field itself.
    Mollified { base: MatrixField, eps_schedule: Vec<f64> },
    /// The constant sequence A_k = A.
    Constant { field: MatrixField, count: usize },
}

impl SequenceSpec {
    pub fn family_name(&self) -> &'static str {
        match self {
            SequenceSpec::Counterexample { .. } => "counterexample",
            SequenceSpec::Oscillation { .. } => "oscillation",
            SequenceSpec::Mollified { .. } => "mollified",
            SequenceSpec::Constant { .. } => "constant",
        }
    }
}
