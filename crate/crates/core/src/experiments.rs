//! Experiment harness: quasiconcavity checks, semicontinuity probes across
//! sequence families, the localized inequality-chain terms, and Young-measure
//! estimates for exactly periodic oscillation sequences.

use crate::fft;
use crate::fields::{
    bump_cutoff, localized_field, FieldError, MatrixField, Sampling, ScalarField,
};
use crate::generators::{
    counterexample_field, oscillation_sequence, AnalyticCounterexample, GenError, SequenceSpec,
};
use crate::ma::{
    ma_diagnostics, select_reference_matrix, solve_periodic_ma, MAError, MAProblem, MAResult,
    Normalization, ReferenceMode,
};
use crate::sym::{SymError, SymMatrix};
use crate::util::pairwise_mean;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("field is not flagged positive semidefinite")]
    NotPsd,
    #[error("data is not uniformly elliptic (min eigenvalue {0:.3e})")]
    NotUniformlyElliptic(f64),
    #[error("the probe grid is required for this family but was not given")]
    MissingGrid,
    #[error("young-measure moment inequality violated: {det_moment:.12e} > {bound:.12e}")]
    MomentViolation { det_moment: f64, bound: f64 },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    MA(#[from] MAError),
    #[error(transparent)]
    Sym(#[from] SymError),
}

/// Quasiconcavity gap together with the recorded divergence mass, so a
/// violation on a non-divergence-free input is attributable.
#[derive(Debug, Clone)]
pub struct QuasiconcavityReport {
    /// det(mean A)^(1/(n-1)) - mean det(A)^(1/(n-1)); nonnegative up to
    /// tolerance for divergence-free fields.
    pub gap: f64,
    /// Spectral estimate of the divergence total variation; absent for
    /// indicator-sampled fields, whose derivatives are not grid-computable.
    pub div_tv: Option<f64>,
}

pub fn check_quasiconcavity(a: &MatrixField) -> Result<QuasiconcavityReport, ExpError> {
    if !a.psd_flag() {
        return Err(ExpError::NotPsd);
    }
    let n = a.grid().n();
    let exponent = 1.0 / (n as f64 - 1.0);
    let gap = a.mean_matrix().determinant().max(0.0).powf(exponent) - a.functional_d()?;
    let div_tv = match a.sampling() {
        Sampling::Smooth => Some(a.divergence()?.tv_estimate),
        Sampling::Indicator => None,
    };
    Ok(QuasiconcavityReport { gap, div_tv })
}

/// One row of a semicontinuity probe.
#[derive(Debug, Clone)]
pub struct ProbeRow {
    pub k: usize,
    pub d_ak: f64,
    /// L^p norm at the critical exponent p = n/(n-1).
    pub lp_critical: f64,
    /// L^p norm at the probe exponent.
    pub lp_chosen: f64,
    pub div_tv: f64,
}

/// Semicontinuity probe across a sequence family: per-k functional values
/// and norms, the identified weak limit, and the limsup-minus-limit gap.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub family: String,
    pub p: f64,
    pub rows: Vec<ProbeRow>,
    pub d_limit: f64,
    pub limit_mean: SymMatrix,
    /// max over recorded rows of D(A_k), minus d_limit; the finite-range
    /// limsup surrogate.
    pub gap: f64,
}

pub fn usc_probe(spec: &SequenceSpec, p: f64) -> Result<ProbeReport, ExpError> {
    let family = spec.family_name().to_string();
    match spec {
        SequenceSpec::Counterexample { n, x0, k_range } => {
            let n = *n;
            let p_crit = n as f64 / (n as f64 - 1.0);
            let rows = k_range
                .iter()
                .map(|&k| {
                    let record = AnalyticCounterexample { n, x0: x0.clone(), k };
                    ProbeRow {
                        k: k as usize,
                        d_ak: record.exact_d(),
                        lp_critical: record.exact_lp(p_crit),
                        lp_chosen: record.exact_lp(p),
                        div_tv: record.exact_div_tv(),
                    }
                })
                .collect::<Vec<_>>();
            // the weak limit of the concentrating sequence is the zero field
            let limit_mean = SymMatrix::zeros(n)?;
            finish_report(family, p, rows, 0.0, limit_mean)
        }
        SequenceSpec::Oscillation { base, k_range } => {
            let n = base.grid().n();
            let p_crit = n as f64 / (n as f64 - 1.0);
            let rows = k_range
                .iter()
                .map(|&k| {
                    let ak = oscillation_sequence(base, k)?;
                    Ok(ProbeRow {
                        k: k as usize,
                        d_ak: ak.functional_d()?,
                        lp_critical: ak.lp_norm(p_crit)?,
                        lp_chosen: ak.lp_norm(p)?,
                        div_tv: ak.divergence()?.tv_estimate,
                    })
                })
                .collect::<Result<Vec<_>, ExpError>>()?;
            // oscillations average out: the weak limit is the constant mean
            let limit_mean = base.mean_matrix();
            let exponent = 1.0 / (n as f64 - 1.0);
            let d_limit = limit_mean.determinant().max(0.0).powf(exponent);
            finish_report(family, p, rows, d_limit, limit_mean)
        }
        SequenceSpec::Mollified { base, eps_schedule } => {
            let n = base.grid().n();
            let p_crit = n as f64 / (n as f64 - 1.0);
            let rows = eps_schedule
                .iter()
                .enumerate()
                .map(|(i, &eps)| {
                    let ak = base.mollify(eps)?;
                    Ok(ProbeRow {
                        k: i + 1,
                        d_ak: ak.functional_d()?,
                        lp_critical: ak.lp_norm(p_crit)?,
                        lp_chosen: ak.lp_norm(p)?,
                        div_tv: ak.divergence()?.tv_estimate,
                    })
                })
                .collect::<Result<Vec<_>, ExpError>>()?;
            // mollified iterates converge to the base field itself
            let d_limit = base.functional_d()?;
            finish_report(family, p, rows, d_limit, base.mean_matrix())
        }
        SequenceSpec::Constant { field, count } => {
            let n = field.grid().n();
            let p_crit = n as f64 / (n as f64 - 1.0);
            let d_ak = field.functional_d()?;
            let lp_critical = field.lp_norm(p_crit)?;
            let lp_chosen = field.lp_norm(p)?;
            let div_tv = match field.sampling() {
                Sampling::Smooth => field.divergence()?.tv_estimate,
                Sampling::Indicator => f64::NAN,
            };
            let rows = (1..=*count)
                .map(|k| ProbeRow { k, d_ak, lp_critical, lp_chosen, div_tv })
                .collect();
            finish_report(family, p, rows, d_ak, field.mean_matrix())
        }
    }
}

fn finish_report(
    family: String,
    p: f64,
    rows: Vec<ProbeRow>,
    d_limit: f64,
    limit_mean: SymMatrix,
) -> Result<ProbeReport, ExpError> {
    let limsup = rows.iter().map(|r| r.d_ak).fold(f64::NEG_INFINITY, f64::max);
    Ok(ProbeReport { family, p, rows, d_limit, limit_mean, gap: limsup - d_limit })
}

/// The localized inequality-chain terms at one (k, R) configuration.
#[derive(Debug, Clone)]
pub struct ProofTermsReport {
    pub k: usize,
    pub r: f64,
    pub i_term: f64,
    pub ii_term: f64,
    pub iii_term: f64,
    pub iii1: f64,
    pub iii2: f64,
    pub iii3: f64,
    pub gamma: f64,
    pub lambda: f64,
    /// Uniform ellipticity constant of the inputs.
    pub epsilon: f64,
    pub slack: f64,
    /// Residual statistics of the underlying periodic solve.
    pub residual_inf: f64,
    pub newton_iters: usize,
}

impl ProofTermsReport {
    /// gamma >= epsilon^(1/(n-1)) - 1e-8, with n recovered from the solve.
    pub fn gamma_bound_ok(&self, n: usize) -> bool {
        self.gamma >= self.epsilon.powf(1.0 / (n as f64 - 1.0)) - 1e-8
    }

    /// slack >= -1e-6 (1 + II): the inequality chain holds up to solver and
    /// quadrature error.
    pub fn slack_ok(&self) -> bool {
        self.slack >= -1e-6 * (1.0 + self.ii_term)
    }
}

/// Trigonometric resampling of a scalar sample array onto x -> a + r x.
fn resample_scalar(values: &[f64], n: usize, m: usize, a: &[f64], r: f64) -> Vec<f64> {
    let mut cur = values.to_vec();
    for axis in 0..n {
        cur = fft::resample_axis(&cur, n, m, axis, a[axis], r);
    }
    cur
}

/// Computes the localized inequality-chain terms for the blow-up of `ak`
/// around `a` at scale `r`, against the constant matrix `aconst`.
///
/// Builds the cutoff, the localized field B, the reference matrix with its
/// multiplier, solves the periodic problem normalized to vanish at `a`, and
/// evaluates every term of the chain plus the three-part decomposition of
/// the pairing term.
pub fn proof_terms(
    ak: &MatrixField,
    aconst: &SymMatrix,
    a: &[f64],
    r: f64,
    margin: f64,
    k_label: usize,
) -> Result<ProofTermsReport, ExpError> {
    if !ak.psd_flag() {
        return Err(ExpError::NotPsd);
    }
    let grid = ak.grid();
    let n = grid.n();
    let m = grid.m();
    let nodes = grid.node_count();
    let tri = n * (n + 1) / 2;
    let exponent = 1.0 / (n as f64 - 1.0);

    let epsilon = ak.min_eigenvalue().min(aconst.min_eigenvalue());
    if epsilon <= 0.0 {
        return Err(ExpError::NotUniformlyElliptic(epsilon));
    }

    let cutoff = bump_cutoff(grid, margin)?;
    let b = localized_field(ak, aconst, a, r, &cutoff)?;
    let f = ScalarField::new(grid, b.det_field().iter().map(|d| d.max(0.0).powf(exponent)).collect())?;
    let (s, lambda) = select_reference_matrix(&f, ReferenceMode::Multiplier(&b))?;
    let lambda = lambda.expect("multiplier mode always returns lambda");
    let problem = MAProblem::new(f.clone(), s, Normalization::VanishAt(a.to_vec()))?;
    // Localized data involves a smooth but non-band-limited cutoff, so the
    // discrete residual has an aliasing floor that can sit above the Newton
    // termination tolerance. Accept the best stalled iterate when its residual
    // is already far below the slack tolerance used by callers.
    let solved = match solve_periodic_ma(&problem) {
        Ok(result) => result,
        Err(MAError::NewtonStall { best, .. }) if best.residual_inf <= 1e-3 => *best,
        Err(err) => return Err(err.into()),
    };

    // I: cutoff-weighted local functional of the resampled field
    let resampled = ak.resample_affine(a, r);
    let cut_pow: Vec<f64> = cutoff
        .values()
        .iter()
        .map(|&v| v.max(0.0).powf(n as f64 / (n as f64 - 1.0)))
        .collect();
    let local_dets = resampled.det_field();
    let i_vals: Vec<f64> = cut_pow
        .iter()
        .zip(&local_dets)
        .map(|(&w, &d)| w * d.max(0.0).powf(exponent))
        .collect();
    let i_term = pairwise_mean(&i_vals);

    let ii_term = b.mean_matrix().determinant();
    let gamma = f.mean().powf(1.0 / n as f64);

    // III: pairing of div B with the gradient of the periodic part
    let grad_ma = solved.phi.gradient();
    let div_b = b.divergence()?;
    let iii_vals: Vec<f64> = (0..nodes)
        .map(|node| {
            (0..n)
                .map(|i| div_b.abs_part.component_at(node, i) * grad_ma.component_at(node, i))
                .sum()
        })
        .collect();
    let iii_term = pairwise_mean(&iii_vals);

    // decomposition of III: the resampled divergence pairs once against the
    // solved gradient (weighted by the cutoff), once against the cutoff
    // gradient (weighted by the solution), plus the Lebesgue-point term
    // against the cutoff Hessian
    let div_ak = ak.divergence()?;
    let div_ak_res: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let comp: Vec<f64> = (0..nodes).map(|node| div_ak.abs_part.component_at(node, i)).collect();
            resample_scalar(&comp, n, m, a, r)
        })
        .collect();
    let grad_cut = cutoff.gradient();
    let hess_cut = cutoff.hessian();
    let phi_ma = solved.phi.values();
    let cut = cutoff.values();

    let mut iii1_vals = Vec::with_capacity(nodes);
    let mut iii2_vals = Vec::with_capacity(nodes);
    let mut iii3_vals = Vec::with_capacity(nodes);
    for node in 0..nodes {
        let mut pair_ma = 0.0;
        let mut pair_cut = 0.0;
        for i in 0..n {
            pair_ma += div_ak_res[i][node] * grad_ma.component_at(node, i);
            pair_cut += div_ak_res[i][node] * grad_cut.component_at(node, i);
        }
        iii1_vals.push(r * cut[node] * pair_ma);
        iii2_vals.push(r * pair_cut * phi_ma[node]);
        let mut frob = 0.0;
        for c in 0..tri {
            let (row, col) = tri_coords(n, c);
            let w = if row == col { 1.0 } else { 2.0 };
            frob += w
                * (resampled.values()[node * tri + c] - aconst.upper()[c])
                * hess_cut.values()[node * tri + c];
        }
        iii3_vals.push(frob * phi_ma[node]);
    }
    let iii1 = pairwise_mean(&iii1_vals);
    let iii2 = pairwise_mean(&iii2_vals);
    let iii3 = pairwise_mean(&iii3_vals);

    let slack =
        ii_term.powf(1.0 / n as f64) - iii_term / (n as f64 * gamma) - i_term.powf((n as f64 - 1.0) / n as f64);

    let _ = ma_diagnostics(&solved, &b)?;

    Ok(ProofTermsReport {
        k: k_label,
        r,
        i_term,
        ii_term,
        iii_term,
        iii1,
        iii2,
        iii3,
        gamma,
        lambda,
        epsilon,
        slack,
        residual_inf: solved.residual_inf,
        newton_iters: solved.newton_iters,
    })
}

fn tri_coords(n: usize, c: usize) -> (usize, usize) {
    let mut idx = 0;
    for row in 0..n {
        for col in row..n {
            if idx == c {
                return (row, col);
            }
            idx += 1;
        }
    }
    unreachable!("triangle index out of range")
}

/// Young-measure estimate for the homogeneous measure generated by the
/// oscillation sequence x -> B(kx): the push-forward of the uniform measure
/// on the cell under B.
#[derive(Debug, Clone)]
pub struct YoungEstimate {
    /// Evaluation point; the measure is homogeneous, so this is nominal.
    pub point: Vec<f64>,
    /// Uniform weight per histogram sample; weights sum to one exactly.
    pub weight: f64,
    pub support: Vec<SymMatrix>,
    /// Averages of M_i^(1/(n-1)) for i = 0..=n when requested.
    pub moments: Option<Vec<f64>>,
    /// Average of det^(1/(n-1)) over the cell.
    pub det_moment: f64,
}

pub fn young_measure_estimate(b: &MatrixField, test_moments: bool) -> Result<YoungEstimate, ExpError> {
    if !b.psd_flag() {
        return Err(ExpError::NotPsd);
    }
    let grid = b.grid();
    let n = grid.n();
    let nodes = grid.node_count();
    let exponent = 1.0 / (n as f64 - 1.0);
    let support: Vec<SymMatrix> = (0..nodes).map(|node| b.value_at(node)).collect();
    let det_moment = b.functional_d()?;
    let moments = if test_moments {
        let mut table = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let vals: Vec<f64> = support
                .iter()
                .map(|mat| Ok(mat.elementary_symmetric(i)?.max(0.0).powf(exponent)))
                .collect::<Result<_, SymError>>()?;
            table.push(pairwise_mean(&vals));
        }
        Some(table)
    } else {
        None
    };
    // for divergence-free generators the moment inequality must hold against
    // the constant weak limit
    if b.sampling() == Sampling::Smooth {
        let tv = b.divergence()?.tv_estimate;
        if tv <= 1e-8 * (1.0 + b.linf_norm()) {
            let bound = b.mean_matrix().determinant().max(0.0).powf(exponent) + 1e-8;
            if det_moment > bound {
                return Err(ExpError::MomentViolation { det_moment, bound });
            }
        }
    }
    Ok(YoungEstimate {
        point: vec![0.0; n],
        weight: 1.0 / nodes as f64,
        support,
        moments,
        det_moment,
    })
}

/// Convenience: solve the periodic problem for f = det(B)^(1/(n-1)) with the
/// multiplier-built reference matrix, attaching lambda to the result.
pub fn solve_for_field(b: &MatrixField, normalization: Normalization) -> Result<MAResult, ExpError> {
    let n = b.grid().n();
    let exponent = 1.0 / (n as f64 - 1.0);
    let f = ScalarField::new(
        b.grid(),
        b.det_field().iter().map(|d| d.max(0.0).powf(exponent)).collect(),
    )?;
    let (s, lambda) = select_reference_matrix(&f, ReferenceMode::Multiplier(b))?;
    let problem = MAProblem::new(f, s, normalization)?;
    let mut result = solve_periodic_ma(&problem)?;
    result.lambda = lambda;
    Ok(result)
}

/// Sampled-quadrature cross-check of the analytic counterexample values on a
/// concrete grid.
pub fn counterexample_cross_check(
    n: usize,
    x0: &[f64],
    k: u32,
    grid: crate::fields::TorusGrid,
) -> Result<(f64, AnalyticCounterexample), ExpError> {
    let (field, record) = counterexample_field(n, x0, k, grid)?;
    Ok((field.functional_d()?, record))
}
