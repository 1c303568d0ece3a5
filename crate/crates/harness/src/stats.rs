//! Small statistics helpers for the experiment reports.

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `successes` out of `trials`. Fewer than two
/// trials give the uninformative interval `[0, 1]`.
pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials < 2 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Sample variance (n - 1 denominator); zero for fewer than two values.
    pub variance: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Summary { count, mean: f64::NAN, variance: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let variance = if count > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        Summary { count, mean, variance }
    }

    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return f64::NAN;
        }
        (self.variance / self.count as f64).sqrt()
    }
}

/// Welch's t statistic for `a.mean - b.mean`; `None` if either side has
/// fewer than two values or both variances vanish.
pub fn welch_t(a: &Summary, b: &Summary) -> Option<f64> {
    if a.count < 2 || b.count < 2 {
        return None;
    }
    let se2 = a.variance / a.count as f64 + b.variance / b.count as f64;
    if se2 == 0.0 {
        return None;
    }
    Some((a.mean - b.mean) / se2.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // reference values from statsmodels proportion_confint(method="wilson")
        let (lo, hi) = wilson(0, 200, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - 0.018_845).abs() < 1e-5, "{hi}");
        let (lo, hi) = wilson(10, 100, Z95);
        assert!((lo - 0.055_229).abs() < 1e-5 && (hi - 0.174_366).abs() < 1e-5, "{lo} {hi}");
    }

    #[test]
    fn wilson_degenerate() {
        assert_eq!(wilson(0, 1, Z95), (0.0, 1.0));
        assert_eq!(wilson(1, 1, Z95), (0.0, 1.0));
        assert_eq!(wilson(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn summary_and_t() {
        let a = Summary::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(a.mean, 2.5);
        assert!((a.variance - 5.0 / 3.0).abs() < 1e-15);
        let b = Summary::of(&[2.0, 3.0, 4.0, 5.0]);
        let t = welch_t(&a, &b).unwrap();
        assert!((t + 1.0 / (2.0 * 5.0 / 12.0f64).sqrt()).abs() < 1e-12);
        assert!(welch_t(&a, &Summary::of(&[1.0])).is_none());
    }
}
