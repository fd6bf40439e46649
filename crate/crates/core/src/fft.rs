//! FFT plumbing for periodic grids: n-dimensional transforms, spectral
//! derivatives with the odd (Nyquist-zeroed) first-derivative symbol, 1-D
//! trigonometric resampling along an axis, and cyclic convolution.
//!
//! All arrays are real scalar fields stored row-major over a cubical grid of
//! `m` points per axis (`m` a power of two). The first-derivative symbol is
//! `i * 2*pi*k` with the Nyquist mode zeroed, which makes every derivative
//! operator exactly skew-adjoint on the grid; second derivatives are
//! compositions of first derivatives, so discrete integration by parts and
//! the n=2 null-Lagrangian identity hold to roundoff.

use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Forward (unnormalized) or inverse (1/m per axis) FFT over all axes.
fn fft_nd(data: &mut [Complex64], n: usize, m: usize, forward: bool) {
    let total = data.len();
    debug_assert_eq!(total, m.pow(n as u32));
    let mut planner = FftPlanner::new();
    let fft = if forward {
        planner.plan_fft_forward(m)
    } else {
        planner.plan_fft_inverse(m)
    };
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for axis in 0..n {
        let stride = m.pow((n - 1 - axis) as u32);
        let block = stride * m;
        for base_block in (0..total).step_by(block) {
            for lane in 0..stride {
                let base = base_block + lane;
                for t in 0..m {
                    line[t] = data[base + t * stride];
                }
                fft.process(&mut line);
                for t in 0..m {
                    data[base + t * stride] = line[t];
                }
            }
        }
    }
    if !forward {
        let scale = 1.0 / total as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

/// Forward transform of a real scalar field (unnormalized coefficients).
pub fn forward(values: &[f64], n: usize, m: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> =
        values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut data, n, m, true);
    data
}

/// Inverse transform back to a real field (imaginary parts discarded).
pub fn inverse(coeffs: &[Complex64], n: usize, m: usize) -> Vec<f64> {
    let mut data = coeffs.to_vec();
    fft_nd(&mut data, n, m, false);
    data.iter().map(|c| c.re).collect()
}

/// Signed wavenumber for component index `idx` on an m-point axis, with the
/// Nyquist mode mapped to 0 so the derivative symbol stays odd.
pub(crate) fn wavenumber(idx: usize, m: usize) -> f64 {
    if idx < m / 2 {
        idx as f64
    } else if idx == m / 2 {
        0.0
    } else {
        idx as f64 - m as f64
    }
}

/// Decomposes a flat row-major index into per-axis components.
fn axis_index(flat: usize, n: usize, m: usize, axis: usize) -> usize {
    let stride = m.pow((n - 1 - axis) as u32);
    (flat / stride) % m
}

/// Multiplies coefficients by the first-derivative symbol along `axis`.
pub fn apply_derivative_symbol(coeffs: &mut [Complex64], n: usize, m: usize, axis: usize) {
    for (flat, c) in coeffs.iter_mut().enumerate() {
        let k = wavenumber(axis_index(flat, n, m, axis), m);
        *c *= Complex64::new(0.0, 2.0 * PI * k);
    }
}

/// First spectral derivative of a real field along `axis`.
pub fn derivative(values: &[f64], n: usize, m: usize, axis: usize) -> Vec<f64> {
    let mut coeffs = forward(values, n, m);
    apply_derivative_symbol(&mut coeffs, n, m, axis);
    inverse(&coeffs, n, m)
}

/// All second derivatives of one field from a single forward transform,
/// returned as the upper triangle (a <= b) row by row.
pub fn hessian(values: &[f64], n: usize, m: usize) -> Vec<Vec<f64>> {
    let base = forward(values, n, m);
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            let mut coeffs = base.clone();
            apply_derivative_symbol(&mut coeffs, n, m, a);
            apply_derivative_symbol(&mut coeffs, n, m, b);
            out.push(inverse(&coeffs, n, m));
        }
    }
    out
}

/// Gradient of one field from a single forward transform.
pub fn gradient(values: &[f64], n: usize, m: usize) -> Vec<Vec<f64>> {
    let base = forward(values, n, m);
    (0..n)
        .map(|axis| {
            let mut coeffs = base.clone();
            apply_derivative_symbol(&mut coeffs, n, m, axis);
            inverse(&coeffs, n, m)
        })
        .collect()
}

/// Evaluates the 1-D trigonometric interpolant of `line` at `t` (periodic
/// coordinate in units of the cell). `coeffs` is the unnormalized DFT of the
/// line; the Nyquist term uses the cosine convention.
fn eval_line(coeffs: &[Complex64], m: usize, t: f64) -> f64 {
    let mut acc = coeffs[0].re;
    for k in 1..m / 2 {
        let phase = 2.0 * PI * k as f64 * t;
        acc += 2.0 * (coeffs[k].re * phase.cos() - coeffs[k].im * phase.sin());
    }
    acc += coeffs[m / 2].re * (PI * m as f64 * t).cos();
    acc / m as f64
}

/// Trigonometric resampling along `axis`: output node i takes the coordinate
/// `offset + scale * i / m` (mod 1) along that axis. Exact for trigonometric
/// polynomials resolved by the grid.
pub fn resample_axis(
    values: &[f64],
    n: usize,
    m: usize,
    axis: usize,
    offset: f64,
    scale: f64,
) -> Vec<f64> {
    let targets: Vec<f64> = (0..m)
        .map(|i| (offset + scale * i as f64 / m as f64).rem_euclid(1.0))
        .collect();
    let total = values.len();
    let stride = m.pow((n - 1 - axis) as u32);
    let block = stride * m;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    let mut out = vec![0.0; total];
    for base_block in (0..total).step_by(block) {
        for lane in 0..stride {
            let base = base_block + lane;
            for t in 0..m {
                line[t] = Complex64::new(values[base + t * stride], 0.0);
            }
            fft.process(&mut line);
            for (t, &target) in targets.iter().enumerate() {
                out[base + t * stride] = eval_line(&line, m, target);
            }
        }
    }
    out
}

/// Point evaluation of the trigonometric interpolant at an arbitrary point,
/// by collapsing one axis at a time.
pub fn eval_point(values: &[f64], n: usize, m: usize, point: &[f64]) -> f64 {
    debug_assert_eq!(point.len(), n);
    let mut current = values.to_vec();
    for axis in 0..n {
        current = resample_axis(&current, n, m, axis, point[axis].rem_euclid(1.0), 0.0);
    }
    current[0]
}

/// Cyclic convolution with normalized weights: `out = sum_y values(x - y) w(y)`
/// where `w = kernel / sum(kernel)`.
pub fn convolve_normalized(values: &[f64], kernel: &[f64], n: usize, m: usize) -> Vec<f64> {
    let ksum: f64 = crate::util::pairwise_sum(kernel);
    let v_hat = forward(values, n, m);
    let k_hat = forward(kernel, n, m);
    let prod: Vec<Complex64> = v_hat
        .iter()
        .zip(&k_hat)
        .map(|(a, b)| a * b / ksum)
        .collect();
    inverse(&prod, n, m)
}
