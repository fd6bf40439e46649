//! Small numeric helpers shared across modules.

/// Pairwise summation. Deterministic for a fixed input order and accurate to
/// O(log n) rounding errors, which keeps grid quadratures near 1e-16 relative.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const BASE: usize = 64;
    if values.len() <= BASE {
        let mut acc = 0.0;
        for v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Mean of a slice via pairwise summation.
pub fn pairwise_mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    pairwise_sum(values) / values.len() as f64
}

/// Formats a float with 17 significant digits, enough to round-trip f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_sum_matches_naive_on_small_input() {
        let v = [1.0, 2.0, 3.5, -0.5];
        assert_eq!(pairwise_sum(&v), 6.0);
    }

    #[test]
    fn pairwise_sum_handles_long_input() {
        let v: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        let expected = 10_000.0 * 9_999.0 / 2.0;
        assert!((pairwise_sum(&v) - expected).abs() < 1e-6);
    }

    #[test]
    fn fmt_round_trips() {
        let x = std::f64::consts::PI / 3.0;
        let s = fmt_f64(x);
        let back: f64 = s.parse().unwrap();
        assert_eq!(x, back);
    }
}
