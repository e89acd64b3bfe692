//! Small sample-statistics helpers shared across modules. All variances use
//! the unbiased (denominator minus one) form.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; zero for fewer than two observations.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_variance() {
        assert_eq!(mean(&[0.0, 2.0]), 1.0);
        assert_eq!(sample_variance(&[0.0, 2.0]), 2.0);
    }

    #[test]
    fn degenerate_inputs_give_zero() {
        assert_eq!(sample_variance(&[]), 0.0);
        assert_eq!(sample_variance(&[3.0]), 0.0);
    }
}
