//! Periodic Monge-Ampere solver: det(H(phi) + S) = f on the torus with the
//! solvability constraint det(S) = mean(f), plus the diagnostics used by the
//! proof-term experiments (AM-GM slack, gradient ratio, integration-by-parts
//! defect).

use crate::fft;
use crate::fields::{FieldError, MatrixField, Sampling, ScalarField, TorusGrid};
use crate::sym::{SymError, SymMatrix};
use crate::util::pairwise_mean;
use thiserror::Error;

/// Relative agreement required between det(S) and the mean of f.
const CONSTRAINT_RTOL: f64 = 1e-10;
/// Newton iteration cap; exceeding it reports a stall.
const MAX_NEWTON_STEPS: usize = 50;
/// Step halvings attempted before giving up on a Newton direction.
const MAX_HALVINGS: usize = 30;

#[derive(Debug, Error)]
pub enum MAError {
    #[error("f must be strictly positive (min value {0:.3e})")]
    NegativeF(f64),
    #[error("solvability constraint violated: det(S) = {det_s:.12e}, mean(f) = {mean_f:.12e}")]
    ConstraintViolation { det_s: f64, mean_f: f64 },
    #[error("reference matrix is not positive definite (min eigenvalue {0:.3e})")]
    ReferenceNotPositive(f64),
    #[error("mean matrix of the field is numerically singular")]
    DegenerateMean,
    #[error("f does not match det(B)^(1/(n-1)) pointwise (max deviation {0:.3e})")]
    InconsistentData(f64),
    #[error("dimension mismatch between the data and the reference matrix")]
    DimensionMismatch,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("Newton residual plateaued at {residual_inf:.3e} after {iters} steps")]
    NewtonStall { best: Box<MAResult>, residual_inf: f64, iters: usize },
    #[error("no damping keeps the Hessian positive definite; data too rough for the grid")]
    PositivityLoss,
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Pins down the additive constant in the periodic part.
#[derive(Debug, Clone, PartialEq)]
pub enum Normalization {
    MeanZero,
    VanishAt(Vec<f64>),
}

/// A well-posed periodic problem det(H(phi) + S) = f.
#[derive(Debug, Clone)]
pub struct MAProblem {
    f: ScalarField,
    s: SymMatrix,
    normalization: Normalization,
}

impl MAProblem {
    pub fn new(
        f: ScalarField,
        s: SymMatrix,
        normalization: Normalization,
    ) -> Result<Self, MAError> {
        if s.n() != f.grid().n() {
            return Err(MAError::DimensionMismatch);
        }
        if let Normalization::VanishAt(a) = &normalization {
            if a.len() != f.grid().n() {
                return Err(MAError::DimensionMismatch);
            }
        }
        let min_f = f.min();
        if min_f <= 0.0 {
            return Err(MAError::NegativeF(min_f));
        }
        let min_eig = s.min_eigenvalue();
        if min_eig <= 0.0 {
            return Err(MAError::ReferenceNotPositive(min_eig));
        }
        let det_s = s.determinant();
        let mean_f = f.mean();
        if (det_s - mean_f).abs() > CONSTRAINT_RTOL * mean_f {
            return Err(MAError::ConstraintViolation { det_s, mean_f });
        }
        Ok(Self { f, s, normalization })
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn s(&self) -> &SymMatrix {
        &self.s
    }
}

/// Solution record: periodic part, reference matrix, residual statistics.
#[derive(Debug, Clone)]
pub struct MAResult {
    pub phi: ScalarField,
    pub s: SymMatrix,
    pub lambda: Option<f64>,
    pub residual_inf: f64,
    pub residual_l2: f64,
    pub newton_iters: usize,
    pub min_hessian_eig: f64,
    pub regularized: bool,
}

/// How to build the reference matrix for a given right-hand side.
pub enum ReferenceMode<'a> {
    /// S = mean(f)^(1/n) Id.
    Isotropic,
    /// S = lambda cof(mean(B)) with the multiplier making det(S) = mean(f).
    Multiplier(&'a MatrixField),
}

/// Builds a positive definite S with det(S) = mean(f), returning the
/// multiplier when the cofactor construction is used.
pub fn select_reference_matrix(
    f: &ScalarField,
    mode: ReferenceMode,
) -> Result<(SymMatrix, Option<f64>), MAError> {
    let min_f = f.min();
    if min_f <= 0.0 {
        return Err(MAError::NegativeF(min_f));
    }
    let n = f.grid().n();
    let mean_f = f.mean();
    match mode {
        ReferenceMode::Isotropic => {
            let s = SymMatrix::scaled_identity(n, mean_f.powf(1.0 / n as f64))?;
            Ok((s, None))
        }
        ReferenceMode::Multiplier(b) => {
            if b.grid() != f.grid() {
                return Err(MAError::GridMismatch);
            }
            let exponent = 1.0 / (n as f64 - 1.0);
            let max_f = f.max_abs();
            let deviation = b
                .det_field()
                .iter()
                .zip(f.values())
                .map(|(&d, &fv)| (d.max(0.0).powf(exponent) - fv).abs())
                .fold(0.0_f64, f64::max);
            if deviation > 1e-8 * (1.0 + max_f) {
                return Err(MAError::InconsistentData(deviation));
            }
            let mean_b = b.mean_matrix();
            let det_mean = mean_b.determinant();
            let scale = 1.0 + mean_b.operator_norm().powi(n as i32);
            if det_mean <= 1e-12 * scale {
                return Err(MAError::DegenerateMean);
            }
            let lambda = mean_f.powf(1.0 / n as f64) / det_mean.powf((n as f64 - 1.0) / n as f64);
            let s = mean_b.cofactor().scale(lambda);
            Ok((s, Some(lambda)))
        }
    }
}

/// Per-iterate data: determinants, cofactor components (triangle order) and
/// the minimum eigenvalue of H(phi) + S over the grid.
struct IterateState {
    dets: Vec<f64>,
    cof: Vec<Vec<f64>>,
    min_eig: f64,
}

fn assemble_state(phi: &[f64], grid: TorusGrid, s: &SymMatrix) -> IterateState {
    let n = grid.n();
    let m = grid.m();
    let nodes = grid.node_count();
    let tri = n * (n + 1) / 2;
    let hess = fft::hessian(phi, n, m);
    let mut dets = vec![0.0; nodes];
    let mut cof = vec![vec![0.0; nodes]; tri];
    let mut min_eig = f64::INFINITY;
    let mut upper = vec![0.0; tri];
    for node in 0..nodes {
        for (c, slot) in upper.iter_mut().enumerate() {
            *slot = hess[c][node] + s.upper()[c];
        }
        let mat = SymMatrix::from_upper(n, upper.clone()).expect("triangle length matches n");
        dets[node] = mat.determinant();
        let cmat = mat.cofactor();
        for c in 0..tri {
            cof[c][node] = cmat.upper()[c];
        }
        min_eig = min_eig.min(mat.min_eigenvalue());
    }
    IterateState { dets, cof, min_eig }
}

fn residual_stats(dets: &[f64], f: &[f64], max_f: f64) -> (f64, f64) {
    let mut inf = 0.0_f64;
    let mut sq = Vec::with_capacity(dets.len());
    for (&d, &fv) in dets.iter().zip(f) {
        let r = fv - d;
        inf = inf.max(r.abs());
        sq.push(r * r);
    }
    (inf / max_f, pairwise_mean(&sq).sqrt() / max_f)
}

/// tr(C * H(delta)) assembled from precomputed cofactor components; the
/// off-diagonal triangle entries carry weight two.
fn apply_linearization(delta: &[f64], grid: TorusGrid, cof: &[Vec<f64>]) -> Vec<f64> {
    let n = grid.n();
    let m = grid.m();
    let hess = fft::hessian(delta, n, m);
    let mut out = vec![0.0; delta.len()];
    let mut c = 0;
    for a in 0..n {
        for b in a..n {
            let w = if a == b { 1.0 } else { 2.0 };
            for (o, (h, cf)) in out.iter_mut().zip(hess[c].iter().zip(&cof[c])) {
                *o += w * h * cf;
            }
            c += 1;
        }
    }
    out
}

/// Inverse of the constant-coefficient operator tr(cof(S) H(.)), diagonal in
/// Fourier space with symbol -4 pi^2 k^T cof(S) k; the mean mode is projected
/// out.
struct FourierPreconditioner {
    n: usize,
    m: usize,
    inv_symbol: Vec<f64>,
}

impl FourierPreconditioner {
    fn new(grid: TorusGrid, s: &SymMatrix) -> Self {
        let n = grid.n();
        let m = grid.m();
        let cof_s = s.cofactor();
        let nodes = grid.node_count();
        let mut inv_symbol = vec![0.0; nodes];
        let mut idx = vec![0usize; n];
        for (flat, slot) in inv_symbol.iter_mut().enumerate() {
            let mut rem = flat;
            for a in (0..n).rev() {
                idx[a] = rem % m;
                rem /= m;
            }
            let mut quad = 0.0;
            for a in 0..n {
                let ka = fft::wavenumber(idx[a], m);
                for b in 0..n {
                    let kb = fft::wavenumber(idx[b], m);
                    quad += cof_s.get(a, b) * ka * kb;
                }
            }
            let symbol = -4.0 * std::f64::consts::PI * std::f64::consts::PI * quad;
            *slot = if symbol.abs() > 0.0 { 1.0 / symbol } else { 0.0 };
        }
        Self { n, m, inv_symbol }
    }

    fn apply(&self, values: &[f64]) -> Vec<f64> {
        let mut coeffs = fft::forward(values, self.n, self.m);
        for (c, &w) in coeffs.iter_mut().zip(&self.inv_symbol) {
            *c *= w;
        }
        fft::inverse(&coeffs, self.n, self.m)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Restarted GMRES with zero initial guess; `apply` is the (preconditioned)
/// operator and `rhs` the (preconditioned) right-hand side.
fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    rhs: &[f64],
    rel_tol: f64,
    restart: usize,
    max_cycles: usize,
) -> Vec<f64> {
    let len = rhs.len();
    let mut x = vec![0.0; len];
    let rhs_norm = norm(rhs);
    if rhs_norm == 0.0 {
        return x;
    }
    for _ in 0..max_cycles {
        let ax = apply(&x);
        let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = norm(&r);
        if beta <= rel_tol * rhs_norm {
            break;
        }
        for v in r.iter_mut() {
            *v /= beta;
        }
        let mut basis = vec![r];
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let mut cs = vec![0.0; restart];
        let mut sn = vec![0.0; restart];
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut cols = 0;
        for j in 0..restart {
            let mut w = apply(&basis[j]);
            for (i, v) in basis.iter().enumerate() {
                h[i][j] = dot(&w, v);
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= h[i][j] * vk;
                }
            }
            h[j + 1][j] = norm(&w);
            if h[j + 1][j] > 0.0 {
                for v in w.iter_mut() {
                    *v /= h[j + 1][j];
                }
            }
            basis.push(w);
            for i in 0..j {
                let tmp = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = tmp;
            }
            let denom = (h[j][j] * h[j][j] + h[j + 1][j] * h[j + 1][j]).sqrt();
            if denom > 0.0 {
                cs[j] = h[j][j] / denom;
                sn[j] = h[j + 1][j] / denom;
            } else {
                cs[j] = 1.0;
                sn[j] = 0.0;
            }
            h[j][j] = cs[j] * h[j][j] + sn[j] * h[j + 1][j];
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            cols = j + 1;
            if g[j + 1].abs() <= rel_tol * rhs_norm {
                break;
            }
        }
        let mut y = vec![0.0; cols];
        for j in (0..cols).rev() {
            let mut v = g[j];
            for (kk, yk) in y.iter().enumerate().skip(j + 1) {
                v -= h[j][kk] * yk;
            }
            y[j] = if h[j][j] != 0.0 { v / h[j][j] } else { 0.0 };
        }
        for (j, yj) in y.iter().enumerate() {
            for (xk, vk) in x.iter_mut().zip(&basis[j]) {
                *xk += yj * vk;
            }
        }
        if g[cols].abs() <= rel_tol * rhs_norm {
            break;
        }
    }
    x
}

/// Damped Newton iteration from phi = 0; each step solves the linearized
/// equation tr(cof(H(phi) + S) H(delta)) = f - det(H(phi) + S) with a Krylov
/// solve preconditioned by the constant-coefficient reference operator.
pub fn solve_periodic_ma(problem: &MAProblem) -> Result<MAResult, MAError> {
    let grid = problem.f.grid();
    let n = grid.n();
    let m = grid.m();
    let nodes = grid.node_count();
    let tol = if n == 2 { 1e-9 } else { 1e-7 };

    let (f_field, regularized) = if problem.f.sampling() == Sampling::Indicator {
        (problem.f.mollify(4.0 / m as f64)?, true)
    } else {
        (problem.f.clone(), false)
    };
    let min_f = f_field.min();
    if min_f <= 0.0 {
        return Err(MAError::NegativeF(min_f));
    }
    let f = f_field.values();
    let max_f = f_field.max_abs();
    let s = problem.s.clone();
    let det_s = s.determinant();
    let precond = FourierPreconditioner::new(grid, &s);

    let mut phi = vec![0.0; nodes];
    let mut state = assemble_state(&phi, grid, &s);
    let (mut res_inf, mut res_l2) = residual_stats(&state.dets, f, max_f);
    let mut iters = 0;
    let mut plateau = 0;

    while res_inf > tol {
        if iters >= MAX_NEWTON_STEPS {
            break;
        }
        if n == 2 {
            // exact compatibility at n = 2: det(H(phi) + S) integrates to
            // det(S) for every periodic phi, so a drift flags a solver bug
            let mean_det = pairwise_mean(&state.dets);
            assert!(
                (mean_det - det_s).abs() <= 1e-8 * (1.0 + det_s.abs()),
                "compatibility drift at iterate {iters}: {mean_det} vs {det_s}"
            );
        }
        let rhs: Vec<f64> = f.iter().zip(&state.dets).map(|(fv, d)| fv - d).collect();
        let prec_rhs = precond.apply(&rhs);
        let cof = std::mem::take(&mut state.cof);
        let delta = gmres(
            |v| precond.apply(&apply_linearization(v, grid, &cof)),
            &prec_rhs,
            1e-12,
            40,
            10,
        );
        let mut t = 1.0;
        let mut accepted = None;
        let mut saw_positive = false;
        for _ in 0..=MAX_HALVINGS {
            let cand: Vec<f64> = phi.iter().zip(&delta).map(|(p, d)| p + t * d).collect();
            let cand_state = assemble_state(&cand, grid, &s);
            if cand_state.min_eig > 0.0 {
                saw_positive = true;
                let (cand_inf, cand_l2) = residual_stats(&cand_state.dets, f, max_f);
                if cand_inf < res_inf {
                    accepted = Some((cand, cand_state, cand_inf, cand_l2));
                    break;
                }
            }
            t *= 0.5;
        }
        iters += 1;
        match accepted {
            Some((cand, cand_state, cand_inf, cand_l2)) => {
                plateau = if cand_inf > 0.99 * res_inf { plateau + 1 } else { 0 };
                phi = cand;
                state = cand_state;
                res_inf = cand_inf;
                res_l2 = cand_l2;
                if plateau >= 3 {
                    break;
                }
            }
            None if !saw_positive => return Err(MAError::PositivityLoss),
            None => break,
        }
    }

    let phi_field = normalize(phi, grid, &problem.normalization)?;
    let result = MAResult {
        phi: phi_field,
        s,
        lambda: None,
        residual_inf: res_inf,
        residual_l2: res_l2,
        newton_iters: iters,
        min_hessian_eig: state.min_eig,
        regularized,
    };
    if res_inf > tol {
        return Err(MAError::NewtonStall {
            residual_inf: res_inf,
            iters,
            best: Box::new(result),
        });
    }
    Ok(result)
}

fn normalize(
    mut phi: Vec<f64>,
    grid: TorusGrid,
    normalization: &Normalization,
) -> Result<ScalarField, MAError> {
    let shift = match normalization {
        Normalization::MeanZero => pairwise_mean(&phi),
        Normalization::VanishAt(a) => fft::eval_point(&phi, grid.n(), grid.m(), a),
    };
    for v in phi.iter_mut() {
        *v -= shift;
    }
    Ok(ScalarField::new(grid, phi)?)
}

/// Proof-facing diagnostics of a solve against the generating field B with
/// f = det(B)^(1/(n-1)).
#[derive(Debug, Clone)]
pub struct MADiagnostics {
    /// min over nodes of tr((H(phi) + S) B)/n - f; AM-GM makes this >= 0 up
    /// to solver error.
    pub amgm_min_slack: f64,
    /// sup |grad phi| / ||S||; reported, not bounded a priori.
    pub grad_ratio: f64,
    /// |mean tr(H(phi) B) + mean (div B, grad phi)|; vanishes by parts.
    pub ibp_defect: f64,
}

pub fn ma_diagnostics(result: &MAResult, b: &MatrixField) -> Result<MADiagnostics, MAError> {
    let grid = result.phi.grid();
    if b.grid() != grid {
        return Err(MAError::GridMismatch);
    }
    let n = grid.n();
    let m = grid.m();
    let nodes = grid.node_count();
    let tri = n * (n + 1) / 2;
    let exponent = 1.0 / (n as f64 - 1.0);
    let hess = fft::hessian(result.phi.values(), n, m);

    let mut slack = f64::INFINITY;
    let mut tr_hb = Vec::with_capacity(nodes);
    let mut upper = vec![0.0; tri];
    for node in 0..nodes {
        for (c, slot) in upper.iter_mut().enumerate() {
            *slot = hess[c][node] + result.s.upper()[c];
        }
        let msym = SymMatrix::from_upper(n, upper.clone()).expect("triangle length matches n");
        let bsym = b.value_at(node);
        let f = bsym.determinant().max(0.0).powf(exponent);
        slack = slack.min(msym.frobenius_inner(&bsym) / n as f64 - f);
        let hsym = SymMatrix::from_upper(
            n,
            (0..tri).map(|c| hess[c][node]).collect(),
        )
        .expect("triangle length matches n");
        tr_hb.push(hsym.frobenius_inner(&bsym));
    }

    let grad = result.phi.gradient();
    let grad_ratio = grad.norm_field().max() / result.s.operator_norm();

    let div = b.divergence()?;
    let mut pairing = Vec::with_capacity(nodes);
    for node in 0..nodes {
        let mut acc = 0.0;
        for i in 0..n {
            acc += div.abs_part.component_at(node, i) * grad.component_at(node, i);
        }
        pairing.push(acc);
    }
    let ibp_defect = (pairwise_mean(&tr_hb) + pairwise_mean(&pairing)).abs();

    Ok(MADiagnostics { amgm_min_slack: slack, grad_ratio, ibp_defect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::cofactor_hessian_field;
    use std::f64::consts::PI;

    fn grid2(m: usize) -> TorusGrid {
        TorusGrid::new(2, m).unwrap()
    }

    #[test]
    fn isotropic_reference_for_unit_data_is_identity() {
        let f = ScalarField::constant(grid2(16), 1.0).unwrap();
        let (s, lambda) = select_reference_matrix(&f, ReferenceMode::Isotropic).unwrap();
        assert!(lambda.is_none());
        assert_eq!(s, SymMatrix::identity(2).unwrap());
    }

    #[test]
    fn multiplier_reference_for_constant_field_is_the_field() {
        let g = grid2(16);
        let c = 3.0_f64;
        let b = MatrixField::constant(g, &SymMatrix::scaled_identity(2, c).unwrap(), true).unwrap();
        let f = ScalarField::constant(g, c * c).unwrap();
        let (s, lambda) = select_reference_matrix(&f, ReferenceMode::Multiplier(&b)).unwrap();
        assert!((lambda.unwrap() - 1.0).abs() < 1e-12);
        let expect = SymMatrix::scaled_identity(2, c).unwrap();
        for (a, b) in s.upper().iter().zip(expect.upper()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn isotropic_reference_satisfies_the_constraint() {
        let f = ScalarField::from_fn(grid2(32), |x| {
            2.0 + 0.7 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos()
                + 0.3 * (4.0 * PI * x[1]).sin()
        })
        .unwrap();
        let (s, _) = select_reference_matrix(&f, ReferenceMode::Isotropic).unwrap();
        assert!((s.determinant() - f.mean()).abs() <= 1e-10 * f.mean());
    }

    #[test]
    fn multiplier_mode_rejects_inconsistent_data() {
        let g = grid2(16);
        let b = MatrixField::constant(g, &SymMatrix::identity(2).unwrap(), true).unwrap();
        let f = ScalarField::constant(g, 2.0).unwrap();
        assert!(matches!(
            select_reference_matrix(&f, ReferenceMode::Multiplier(&b)),
            Err(MAError::InconsistentData(_))
        ));
    }

    #[test]
    fn problem_rejects_constraint_violation_and_nonpositive_f() {
        let g = grid2(16);
        let f = ScalarField::constant(g, 2.0).unwrap();
        let id = SymMatrix::identity(2).unwrap();
        assert!(matches!(
            MAProblem::new(f, id.clone(), Normalization::MeanZero),
            Err(MAError::ConstraintViolation { .. })
        ));
        let f = ScalarField::from_fn(g, |x| (2.0 * PI * x[0]).sin()).unwrap();
        assert!(matches!(
            MAProblem::new(f, id, Normalization::MeanZero),
            Err(MAError::NegativeF(_))
        ));
    }

    #[test]
    fn constant_data_solves_immediately() {
        let f = ScalarField::constant(grid2(32), 1.0).unwrap();
        let s = SymMatrix::identity(2).unwrap();
        let problem = MAProblem::new(f, s, Normalization::MeanZero).unwrap();
        let result = solve_periodic_ma(&problem).unwrap();
        assert!(result.residual_inf <= 1e-12);
        assert!(result.newton_iters <= 1);
        assert!(result.phi.max_abs() <= 1e-12);
        assert!(result.min_hessian_eig > 0.0);
    }

    fn manufactured_phi(g: TorusGrid, amplitude: f64) -> ScalarField {
        ScalarField::from_fn(g, |x| {
            amplitude * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin()
        })
        .unwrap()
    }

    fn forward_f(phi: &ScalarField) -> ScalarField {
        let h = phi.hessian();
        let id = SymMatrix::identity(phi.grid().n()).unwrap();
        let vals = (0..phi.grid().node_count())
            .map(|node| h.value_at(node).add(&id).determinant())
            .collect();
        ScalarField::new(phi.grid(), vals).unwrap()
    }

    #[test]
    fn manufactured_solution_is_recovered() {
        let g = grid2(64);
        let phi_star = manufactured_phi(g, 0.01);
        let f = forward_f(&phi_star);
        let s = SymMatrix::identity(2).unwrap();
        let problem = MAProblem::new(f, s, Normalization::MeanZero).unwrap();
        let result = solve_periodic_ma(&problem).unwrap();
        assert!(result.newton_iters <= 10, "iters = {}", result.newton_iters);
        assert!(result.residual_inf <= 1e-9);
        let err = result
            .phi
            .values()
            .iter()
            .zip(phi_star.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(err <= 1e-6, "recovery error {err:.3e}");
    }

    #[test]
    fn vanish_at_normalization_pins_the_value() {
        let g = grid2(32);
        let phi_star = manufactured_phi(g, 0.01);
        let f = forward_f(&phi_star);
        let s = SymMatrix::identity(2).unwrap();
        let a = vec![0.3, 0.7];
        let problem = MAProblem::new(f, s, Normalization::VanishAt(a.clone())).unwrap();
        let result = solve_periodic_ma(&problem).unwrap();
        assert!(result.phi.eval_at(&a).abs() <= 1e-10);
    }

    /// Periodic analytic profile with slowly decaying Fourier modes, so grid
    /// truncation (not the solver) dominates the recovery error.
    fn poisson_profile(t: f64, rho: f64, order: usize) -> f64 {
        let mut acc = 0.0;
        let mut rk = rho;
        for k in 1..=120 {
            let phase = 2.0 * PI * k as f64 * t;
            let factor = match order {
                0 => phase.cos(),
                1 => -(2.0 * PI * k as f64) * phase.sin(),
                _ => -(2.0 * PI * k as f64).powi(2) * phase.cos(),
            };
            acc += 2.0 * rk * factor;
            rk *= rho;
        }
        acc
    }

    #[test]
    fn manufactured_error_drops_at_least_sixteenfold_per_doubling() {
        let rho = 0.6;
        let amp = 2e-4;
        let mut errs = Vec::new();
        for m in [32usize, 64] {
            let g = grid2(m);
            let p = |t: f64| poisson_profile(t, rho, 0);
            let dp = |t: f64| poisson_profile(t, rho, 1);
            let ddp = |t: f64| poisson_profile(t, rho, 2);
            let phi_star =
                ScalarField::from_fn(g, |x| amp * p(x[0]) * p(x[1])).unwrap();
            let f = ScalarField::from_fn(g, |x| {
                let h11 = 1.0 + amp * ddp(x[0]) * p(x[1]);
                let h22 = 1.0 + amp * p(x[0]) * ddp(x[1]);
                let h12 = amp * dp(x[0]) * dp(x[1]);
                h11 * h22 - h12 * h12
            })
            .unwrap();
            // rescale so the constraint holds exactly in grid quadrature
            let f = f.map(|v| v / f.mean()).unwrap();
            let s = SymMatrix::identity(2).unwrap();
            let problem = MAProblem::new(f, s, Normalization::MeanZero).unwrap();
            // the slowly decaying spectrum leaves an aliasing floor in the
            // discrete residual well above the termination tolerance, so the
            // solver reports a stall; the best iterate is the right object
            // for measuring grid convergence
            let result = match solve_periodic_ma(&problem) {
                Ok(r) => r,
                Err(MAError::NewtonStall { best, .. }) => *best,
                Err(e) => panic!("unexpected solver failure: {e}"),
            };
            let err = result
                .phi
                .values()
                .iter()
                .zip(phi_star.values())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            errs.push(err);
        }
        assert!(errs[0] >= 16.0 * errs[1], "errors {errs:?}");
        assert!(errs[1] <= 1e-6, "fine-grid error {:.3e}", errs[1]);
    }

    #[test]
    fn three_dimensional_solve_meets_relaxed_tolerance() {
        let g = TorusGrid::new(3, 16).unwrap();
        let phi_star = ScalarField::from_fn(g, |x| {
            0.005 * (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin() * (2.0 * PI * x[2]).cos()
        })
        .unwrap();
        let h = phi_star.hessian();
        let id = SymMatrix::identity(3).unwrap();
        let vals: Vec<f64> = (0..g.node_count())
            .map(|node| h.value_at(node).add(&id).determinant())
            .collect();
        let f = ScalarField::new(g, vals).unwrap();
        let f = f.map(|v| v / f.mean()).unwrap();
        let problem = MAProblem::new(f, id, Normalization::MeanZero).unwrap();
        let result = solve_periodic_ma(&problem).unwrap();
        assert!(result.residual_inf <= 1e-7);
        let err = result
            .phi
            .values()
            .iter()
            .zip(phi_star.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(err <= 1e-5, "recovery error {err:.3e}");
    }

    #[test]
    fn diagnostics_at_the_trivial_equality_case() {
        let g = grid2(16);
        let f = ScalarField::constant(g, 1.0).unwrap();
        let s = SymMatrix::identity(2).unwrap();
        let problem = MAProblem::new(f, s, Normalization::MeanZero).unwrap();
        let result = solve_periodic_ma(&problem).unwrap();
        let b = MatrixField::constant(g, &SymMatrix::identity(2).unwrap(), true).unwrap();
        let d = ma_diagnostics(&result, &b).unwrap();
        assert!(d.amgm_min_slack.abs() <= 1e-12);
        assert!(d.grad_ratio <= 1e-12);
        assert!(d.ibp_defect <= 1e-12);
    }

    #[test]
    fn diagnostics_on_the_manufactured_problem() {
        let g = grid2(64);
        let phi_star = manufactured_phi(g, 0.01);
        let f = forward_f(&phi_star);
        let s = SymMatrix::identity(2).unwrap();
        let problem = MAProblem::new(f.clone(), s, Normalization::MeanZero).unwrap();
        let result = solve_periodic_ma(&problem).unwrap();
        // with B = H(phi*) + Id the AM-GM chain is an equality up to solver
        // error: H(psi) = B pointwise
        let h = phi_star.hessian();
        let id = SymMatrix::identity(2).unwrap();
        let tri = 3;
        let mut vals = vec![0.0; g.node_count() * tri];
        for node in 0..g.node_count() {
            let msym = h.value_at(node).add(&id);
            for c in 0..tri {
                vals[node * tri + c] = msym.upper()[c];
            }
        }
        let b = MatrixField::new(g, vals, true).unwrap();
        let d = ma_diagnostics(&result, &b).unwrap();
        assert!(d.amgm_min_slack >= -1e-8, "slack {:.3e}", d.amgm_min_slack);
        assert!(d.grad_ratio > 0.0);
    }

    #[test]
    fn diagnostics_on_a_divergence_free_field() {
        let g = grid2(64);
        let b = cofactor_hessian_field(2, 0.01, &[vec![1, 1]], g).unwrap();
        let f_vals: Vec<f64> = b.det_field();
        let f = ScalarField::new(g, f_vals).unwrap();
        let (s, _) = select_reference_matrix(&f, ReferenceMode::Isotropic).unwrap();
        let problem = MAProblem::new(f, s, Normalization::MeanZero).unwrap();
        let result = solve_periodic_ma(&problem).unwrap();
        let d = ma_diagnostics(&result, &b).unwrap();
        // both pairings vanish independently when div B = 0
        assert!(d.ibp_defect <= 1e-8, "ibp defect {:.3e}", d.ibp_defect);
        assert!(d.amgm_min_slack >= -1e-8 * (1.0 + f64::EPSILON));
    }
}


