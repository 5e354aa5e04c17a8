//! Small statistical helpers: empirical CDF distances, ranks, quantiles and
//! least-squares slopes. These back the diagnostics in [`crate::limits`] and
//! [`crate::fit`] as well as the test suites.

/// Kolmogorov–Smirnov statistic of a sample against a continuous CDF.
///
/// `D = sup_z |F_n(z) − F(z)|`, computed at the jump points of the empirical
/// CDF. Ties in the sample are handled by evaluating the empirical CDF once
/// per distinct value.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> f64 {
    ks_statistic_with_left(sample, &cdf, &cdf)
}

/// KS statistic against a CDF that may carry atoms.
///
/// `cdf` must be the right-continuous CDF and `cdf_left` its left limit
/// `z ↦ P(Z < z)`; for a continuous model pass the same function twice.
pub fn ks_statistic_with_left<F, G>(sample: &[f64], cdf: F, cdf_left: G) -> f64
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    assert!(!sample.is_empty(), "KS statistic of an empty sample");
    let mut xs = sample.to_vec();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("non-finite value in KS sample"));
    let n = xs.len() as f64;

    let mut sup = 0.0f64;
    let mut i = 0usize;
    while i < xs.len() {
        let v = xs[i];
        let below = i; // count of observations < v
        let mut j = i;
        while j < xs.len() && xs[j] == v {
            j += 1;
        }
        let upto = j; // count of observations ≤ v
        sup = sup
            .max((below as f64 / n - cdf_left(v)).abs())
            .max((upto as f64 / n - cdf(v)).abs());
        i = j;
    }
    sup
}

/// Two-sample KS statistic.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);

    let mut sup = 0.0f64;
    let (mut i, mut j) = (0usize, 0usize);
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    sup
}

/// 1-based ranks with ties broken by input index.
///
/// The value at position `i` receives rank `r` iff it is the `r`-th smallest
/// under the ordering `(value, index)`.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_unstable_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("non-finite value in rank computation")
            .then(a.cmp(&b))
    });
    let mut out = vec![0.0; values.len()];
    for (r, &i) in idx.iter().enumerate() {
        out[i] = (r + 1) as f64;
    }
    out
}

/// Empirical quantile (linear interpolation between order statistics).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    assert!((0.0..=1.0).contains(&q));
    let h = q * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population variance (divides by n).
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64
}

/// Pearson correlation; 0 when either marginal is degenerate.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Ordinary least squares line fit y ≈ slope·x + intercept.
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn least_squares(x: &[f64], y: &[f64]) -> LineFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let r_squared = if sxx > 0.0 && syy > 0.0 {
        (sxy * sxy) / (sxx * syy)
    } else {
        0.0
    };
    LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_exact_on_tiny_sample() {
        // sample {0.25, 0.75} against U(0,1): F_n jumps 0→0.5 at 0.25, 0.5→1 at 0.75
        let d = ks_statistic(&[0.25, 0.75], |v| v.clamp(0.0, 1.0));
        assert!((d - 0.25).abs() < 1e-12, "d={d}");
    }

    #[test]
    fn ks_handles_atoms() {
        // Model: atom of mass 1/2 at 1, uniform on (1,2) above.
        let cdf = |v: f64| {
            if v < 1.0 {
                0.0
            } else if v < 2.0 {
                v / 2.0
            } else {
                1.0
            }
        };
        let cdf_left = |v: f64| {
            if v <= 1.0 {
                0.0
            } else if v < 2.0 {
                v / 2.0
            } else {
                1.0
            }
        };
        // perfectly matching sample: half the points at the atom
        let sample = [1.0, 1.0, 1.25, 1.75];
        let d = ks_statistic_with_left(&sample, cdf, cdf_left);
        assert!(d <= 0.125 + 1e-12, "d={d}");
    }

    #[test]
    fn two_sample_ks_matches_known_value() {
        let xs = [1.0, 1.0, 4.0, 4.0];
        let ys = [1.0, 1.0, 1.0, 4.0];
        assert!((two_sample_ks(&xs, &ys) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ranks_break_ties_by_index() {
        assert_eq!(ranks(&[2.0, 1.0, 2.0]), vec![2.0, 1.0, 3.0]);
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert!((quantile(&xs, 0.5) - 2.5).abs() < 1e-12);
        assert_eq!(quantile(&xs, 0.0), 1.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
    }

    #[test]
    fn least_squares_recovers_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 / 10.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 2.0).collect();
        let fit = least_squares(&x, &y);
        assert!((fit.slope - 3.0).abs() < 1e-10);
        assert!((fit.intercept + 2.0).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-10);
    }

    #[test]
    fn pearson_degenerate_is_zero() {
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), 0.0);
    }
}
