//! Canonical conditional-tail model fitting on Laplace-scale data:
//! a(x) = αx, b(x) = x^β with (α, β) ∈ [−1,1] × (−∞,1), estimated by a
//! working Gaussian pseudo-likelihood over threshold exceedances.
//!
//! The point of fitting this family to the example distributions is to see
//! where it breaks: [`residual_diagnostics`] reports the signatures that
//! separate power-law scale functions from exponential or logarithmic ones.

pub mod nelder_mead;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CevmError, Result};
use crate::stats;
use nelder_mead::{minimize, NmOptions, NmResult};

/// Configuration for [`fit_canonical`].
#[derive(Debug, Clone, Serialize)]
pub struct FitConfig {
    /// Exceedance threshold as a quantile of the conditioning variable.
    pub threshold_quantile: f64,
    pub alpha_bounds: (f64, f64),
    /// β < 1 truncated to a compact search box.
    pub beta_bounds: (f64, f64),
    pub optimizer_tol: f64,
    pub max_iter: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            threshold_quantile: 0.95,
            alpha_bounds: (-1.0, 1.0),
            beta_bounds: (-5.0, 1.0 - 1e-6),
            optimizer_tol: 1e-8,
            max_iter: 500,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0 < self.threshold_quantile && self.threshold_quantile < 1.0) {
            return Err(CevmError::InvalidArgument(format!(
                "threshold_quantile must lie in (0,1), got {}",
                self.threshold_quantile
            )));
        }
        if self.alpha_bounds.0 < -1.0 || self.alpha_bounds.1 > 1.0
            || self.alpha_bounds.0 >= self.alpha_bounds.1
        {
            return Err(CevmError::InvalidArgument(format!(
                "alpha bounds must be an interval within [-1, 1], got {:?}",
                self.alpha_bounds
            )));
        }
        if self.beta_bounds.1 >= 1.0 || self.beta_bounds.0 >= self.beta_bounds.1 {
            return Err(CevmError::InvalidArgument(format!(
                "beta bounds must be an interval below 1, got {:?}",
                self.beta_bounds
            )));
        }
        Ok(())
    }
}

/// Fitted canonical model.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub sigma: f64,
    /// r_i = (y_i − αx_i)/x_i^β at the fitted parameters, ordered by the
    /// internally sorted exceedances (ascending x, then y).
    pub residuals: Vec<f64>,
    pub neg_log_lik: f64,
    pub converged: bool,
    pub n_exceed: usize,
}

pub const MIN_FIT_EXCEEDANCES: usize = 100;
/// Residual-variance floor: below this the fit is a deterministic relation.
const SIGMA2_FLOOR: f64 = 1e-30;

/// Exceedances of the fit threshold in canonical order (sorted by x then y),
/// making the fit invariant to input permutation.
fn sorted_exceedances(samples: &[(f64, f64)], quantile: f64) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut xs: Vec<f64> = samples.iter().map(|p| p.0).collect();
    xs.sort_unstable_by(|a, b| a.partial_cmp(b).expect("non-finite x"));
    let threshold = stats::quantile(&xs, quantile);
    if threshold <= 0.0 {
        return Err(CevmError::InvalidArgument(format!(
            "fit threshold must be positive on Laplace scale (b(x) = x^\u{3b2}); \
             quantile {quantile} gives {threshold}"
        )));
    }
    let mut exceed: Vec<(f64, f64)> = samples
        .iter()
        .copied()
        .filter(|(x, _)| *x > threshold)
        .collect();
    exceed.sort_unstable_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.partial_cmp(&b.1).unwrap())
    });
    Ok((threshold, exceed))
}

/// Gaussian pseudo-NLL profiled over (μ, σ) at fixed (α, β).
fn profiled_nll(exceed: &[(f64, f64)], sum_log_x: f64, alpha: f64, beta: f64) -> f64 {
    let m = exceed.len() as f64;
    let mut mean = 0.0;
    for &(x, y) in exceed {
        mean += (y - alpha * x) / x.powf(beta);
    }
    mean /= m;
    let mut var = 0.0;
    for &(x, y) in exceed {
        let r = (y - alpha * x) / x.powf(beta) - mean;
        var += r * r;
    }
    var = (var / m).max(SIGMA2_FLOOR);
    0.5 * m * ((2.0 * std::f64::consts::PI * var).ln() + 1.0) + beta * sum_log_x
}

/// Maximize the working Gaussian pseudo-likelihood with mean αx + μx^β and
/// standard deviation σx^β over exceedances, from a 5×5 (α, β) multistart.
///
/// Deterministic given the inputs; sample order does not matter. Ties in the
/// optimum break toward smaller |β|, then smaller |α|.
pub fn fit_canonical(samples: &[(f64, f64)], cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    let (threshold, exceed) = sorted_exceedances(samples, cfg.threshold_quantile)?;
    if exceed.len() < MIN_FIT_EXCEEDANCES {
        return Err(CevmError::InsufficientExceedances {
            threshold,
            required: MIN_FIT_EXCEEDANCES,
            found: exceed.len(),
        });
    }
    let sum_log_x: f64 = exceed.iter().map(|(x, _)| x.ln()).sum();
    let (a_lo, a_hi) = cfg.alpha_bounds;
    let (b_lo, b_hi) = cfg.beta_bounds;

    let objective = |p: &[f64]| profiled_nll(&exceed, sum_log_x, p[0], p[1]);

    let starts: Vec<(f64, f64)> = {
        let span = |lo: f64, hi: f64, k: usize| -> Vec<f64> {
            // interior grid: skip the exact bounds
            (1..=k)
                .map(|i| lo + (hi - lo) * i as f64 / (k + 1) as f64)
                .collect()
        };
        let alphas = span(a_lo, a_hi, 5);
        let betas = span(b_lo.max(-2.5), b_hi.min(0.9), 5);
        alphas
            .iter()
            .flat_map(|&a| betas.iter().map(move |&b| (a, b)))
            .collect()
    };

    let opts = NmOptions {
        f_tol: cfg.optimizer_tol,
        x_tol: cfg.optimizer_tol.sqrt().max(1e-9),
        max_iter: cfg.max_iter,
    };
    let runs: Vec<NmResult> = starts
        .par_iter()
        .map(|&(a, b)| {
            minimize(
                &objective,
                &[a, b],
                &[0.1, 0.1],
                &[a_lo, b_lo],
                &[a_hi, b_hi],
                opts,
            )
        })
        .collect();

    if !runs.iter().any(|r| r.converged) {
        let trace: Vec<String> = runs
            .iter()
            .zip(&starts)
            .map(|(r, s)| format!("start {s:?}: f={:.6} after {} iters", r.fx, r.iterations))
            .collect();
        return Err(CevmError::NonConvergence(trace.join("; ")));
    }

    let f_tie = cfg.optimizer_tol * 10.0;
    let best = runs
        .iter()
        .filter(|r| r.converged)
        .min_by(|p, q| {
            let df = p.fx - q.fx;
            if df.abs() <= f_tie * (1.0 + p.fx.abs()) {
                (p.x[1].abs(), p.x[0].abs())
                    .partial_cmp(&(q.x[1].abs(), q.x[0].abs()))
                    .unwrap()
            } else {
                df.partial_cmp(&0.0).unwrap()
            }
        })
        .expect("at least one converged run");

    let (alpha, beta) = (best.x[0], best.x[1]);
    let raw: Vec<f64> = exceed
        .iter()
        .map(|&(x, y)| (y - alpha * x) / x.powf(beta))
        .collect();
    let mu = stats::mean(&raw);
    let sigma = stats::variance(&raw).max(SIGMA2_FLOOR).sqrt();
    Ok(FitResult {
        alpha,
        beta,
        mu,
        sigma,
        residuals: raw,
        neg_log_lik: best.fx,
        converged: true,
        n_exceed: exceed.len(),
    })
}

/// Misfit signatures of a canonical fit.
///
/// Slopes are computed on centered β=0-reference residuals e = (y − α̂x) −
/// mean(y − α̂x), which keep the scale function's growth visible instead of
/// letting the fitted x^β̂ absorb it: an exponential b(x) shows up as
/// d log|e| / dx ≈ −rate, a logarithmic b(x) as positive growth of |e| in
/// log x.
#[derive(Debug, Clone, Serialize)]
pub struct MisfitReport {
    /// Pearson correlation of fitted residuals with x (≈ 0 when the norming
    /// is correct).
    pub residual_x_correlation: f64,
    /// Slope of log|e| against x.
    pub slope_log_abs_resid_vs_x: f64,
    /// Slope of log|e| against log x.
    pub slope_log_abs_resid_vs_log_x: f64,
    /// Slope of |e| against log x.
    pub slope_abs_resid_vs_log_x: f64,
    /// Two-sample KS between fitted residuals split at the median x.
    pub ks_split_at_median_x: f64,
    /// Residual spread collapsed: the relation is deterministic.
    pub degenerate: bool,
}

/// Diagnostics for a converged fit against the samples it was fitted to.
pub fn residual_diagnostics(fit: &FitResult, samples: &[(f64, f64)]) -> Result<MisfitReport> {
    if !fit.converged {
        return Err(CevmError::InvalidArgument(
            "diagnostics need a converged fit".into(),
        ));
    }
    // recover the fit's exceedance set: the n_exceed largest (x, y) in the
    // canonical sort order
    let mut sorted: Vec<(f64, f64)> = samples.to_vec();
    sorted.sort_unstable_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.partial_cmp(&b.1).unwrap())
    });
    if fit.n_exceed > sorted.len() || fit.n_exceed != fit.residuals.len() {
        return Err(CevmError::InvalidArgument(format!(
            "fit (n_exceed = {}) does not match the provided samples (n = {})",
            fit.n_exceed,
            sorted.len()
        )));
    }
    let exceed = &sorted[sorted.len() - fit.n_exceed..];
    let xs: Vec<f64> = exceed.iter().map(|p| p.0).collect();
    let log_xs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();

    let degenerate = fit.sigma < 1e-8;
    let corr = stats::pearson(&fit.residuals, &xs);

    // β=0-reference residuals, centered
    let e0: Vec<f64> = exceed.iter().map(|&(x, y)| y - fit.alpha * x).collect();
    let e0_mean = stats::mean(&e0);
    let abs_e: Vec<f64> = e0.iter().map(|v| (v - e0_mean).abs().max(1e-300)).collect();
    let log_abs_e: Vec<f64> = abs_e.iter().map(|v| v.ln()).collect();

    let slope_x = stats::least_squares(&xs, &log_abs_e).slope;
    let slope_log_x = stats::least_squares(&log_xs, &log_abs_e).slope;
    let slope_abs_log_x = stats::least_squares(&log_xs, &abs_e).slope;

    let med_x = {
        let mut s = xs.clone();
        s.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        stats::quantile(&s, 0.5)
    };
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (r, x) in fit.residuals.iter().zip(&xs) {
        if *x <= med_x {
            lo.push(*r);
        } else {
            hi.push(*r);
        }
    }
    let ks_split = if lo.is_empty() || hi.is_empty() {
        0.0
    } else {
        stats::two_sample_ks(&lo, &hi)
    };

    Ok(MisfitReport {
        residual_x_correlation: corr,
        slope_log_abs_resid_vs_x: slope_x,
        slope_log_abs_resid_vs_log_x: slope_log_x,
        slope_abs_resid_vs_log_x: slope_abs_log_x,
        ks_split_at_median_x: ks_split,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{sample, to_laplace_pairs, ExampleId};
    use rand::Rng;
    use rand::SeedableRng;

    /// Synthetic canonical-model data: x beyond the Laplace 95% point with
    /// unit-exponential overshoot, Gaussian residual scale.
    fn canonical_data(
        n: usize,
        alpha: f64,
        beta: f64,
        mu: f64,
        sigma: f64,
        seed: u64,
    ) -> Vec<(f64, f64)> {
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let e: f64 = -(1.0 - rng.random::<f64>()).ln();
            let x = 2.0 + e;
            // Box-Muller
            let (u1, u2): (f64, f64) = (rng.random(), rng.random());
            let z = (-2.0 * (1.0 - u1).ln()).sqrt()
                * (2.0 * std::f64::consts::PI * u2).cos();
            let y = alpha * x + x.powf(beta) * (mu + sigma * z);
            out.push((x, y));
        }
        out
    }

    #[test]
    fn recovers_canonical_truth() {
        let truth = (0.6, 0.3, 0.4, 1.1);
        let data = canonical_data(5263, truth.0, truth.1, truth.2, truth.3, 8);
        let cfg = FitConfig {
            threshold_quantile: 0.05, // keep ~5000 exceedances
            ..FitConfig::default()
        };
        let fit = fit_canonical(&data, &cfg).unwrap();
        assert!(fit.converged);
        assert!((fit.alpha - truth.0).abs() < 0.05, "alpha {}", fit.alpha);
        assert!((fit.beta - truth.1).abs() < 0.05, "beta {}", fit.beta);
        assert!((fit.mu - truth.2).abs() < 0.1, "mu {}", fit.mu);
        assert!((fit.sigma - truth.3).abs() < 0.1, "sigma {}", fit.sigma);
        assert_eq!(fit.residuals.len(), fit.n_exceed);
        // bounds respected
        assert!((-1.0..=1.0).contains(&fit.alpha));
        assert!(fit.beta < 1.0);
    }

    #[test]
    fn optimum_beats_every_start() {
        let data = canonical_data(3000, 0.4, 0.2, 0.0, 1.0, 9);
        let cfg = FitConfig {
            threshold_quantile: 0.2,
            ..FitConfig::default()
        };
        let fit = fit_canonical(&data, &cfg).unwrap();
        let (_, exceed) = sorted_exceedances(&data, cfg.threshold_quantile).unwrap();
        let slx: f64 = exceed.iter().map(|(x, _)| x.ln()).sum();
        for a in [-0.9, -0.45, 0.0, 0.45, 0.9] {
            for b in [-2.0, -1.0, 0.0, 0.5, 0.8] {
                assert!(
                    fit.neg_log_lik <= profiled_nll(&exceed, slx, a, b) + 1e-9,
                    "start ({a},{b}) beats optimum"
                );
            }
        }
    }

    #[test]
    fn permuting_input_changes_nothing() {
        let data = canonical_data(2000, -0.3, 0.5, 0.0, 0.7, 10);
        let cfg = FitConfig {
            threshold_quantile: 0.3,
            ..FitConfig::default()
        };
        let fit_a = fit_canonical(&data, &cfg).unwrap();
        let mut shuffled = data.clone();
        shuffled.reverse();
        shuffled.swap(3, 1200);
        let fit_b = fit_canonical(&shuffled, &cfg).unwrap();
        assert_eq!(fit_a.alpha, fit_b.alpha);
        assert_eq!(fit_a.beta, fit_b.beta);
        assert_eq!(fit_a.neg_log_lik, fit_b.neg_log_lik);
    }

    #[test]
    fn exact_linear_relation_is_degenerate_with_alpha_one() {
        let data: Vec<(f64, f64)> = (0..2000)
            .map(|i| {
                let x = 2.0 + i as f64 * 0.002;
                (x, x)
            })
            .collect();
        let cfg = FitConfig {
            threshold_quantile: 0.2,
            ..FitConfig::default()
        };
        let fit = fit_canonical(&data, &cfg).unwrap();
        assert!((fit.alpha - 1.0).abs() < 1e-3, "alpha {}", fit.alpha);
        assert!(fit.sigma < 1e-8, "sigma {}", fit.sigma);
        let report = residual_diagnostics(&fit, &data).unwrap();
        assert!(report.degenerate);
    }

    #[test]
    fn errors_on_too_few_exceedances_and_bad_config() {
        let data = canonical_data(50, 0.5, 0.0, 0.0, 1.0, 11);
        assert!(matches!(
            fit_canonical(&data, &FitConfig::default()),
            Err(CevmError::InsufficientExceedances { .. })
        ));
        let bad = FitConfig {
            threshold_quantile: 1.5,
            ..FitConfig::default()
        };
        assert!(fit_canonical(&data, &bad).is_err());
        let bad = FitConfig {
            beta_bounds: (0.0, 1.2),
            ..FitConfig::default()
        };
        assert!(fit_canonical(&data, &bad).is_err());
    }

    #[test]
    fn ex2_3_residuals_uncorrelated_with_x() {
        let samples = sample(ExampleId::Ex2_3, 40_000, 12).unwrap();
        let lap = to_laplace_pairs(ExampleId::Ex2_3, &samples).unwrap();
        let fit = fit_canonical(&lap, &FitConfig::default()).unwrap();
        let report = residual_diagnostics(&fit, &lap).unwrap();
        assert!(
            report.residual_x_correlation.abs() < 0.12,
            "corr = {}",
            report.residual_x_correlation
        );
    }

    #[test]
    fn ex3_1_exponential_scale_is_flagged() {
        let samples = sample(ExampleId::Ex3_1, 60_000, 13).unwrap();
        let lap = to_laplace_pairs(ExampleId::Ex3_1, &samples).unwrap();
        let fit = fit_canonical(&lap, &FitConfig::default()).unwrap();
        let report = residual_diagnostics(&fit, &lap).unwrap();
        assert!(
            (report.slope_log_abs_resid_vs_x + 1.0).abs() < 0.25,
            "slope = {}",
            report.slope_log_abs_resid_vs_x
        );
    }

    #[test]
    fn ex3_2_log_growth_is_flagged() {
        let samples = sample(ExampleId::Ex3_2, 60_000, 14).unwrap();
        let lap = to_laplace_pairs(ExampleId::Ex3_2, &samples).unwrap();
        let fit = fit_canonical(&lap, &FitConfig::default()).unwrap();
        let report = residual_diagnostics(&fit, &lap).unwrap();
        assert!(
            report.slope_abs_resid_vs_log_x > 0.5,
            "slope = {}",
            report.slope_abs_resid_vs_log_x
        );
    }
}
