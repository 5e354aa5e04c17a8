//! Distribution kernel: standard Laplace / Pareto / Gumbel CDFs and
//! quantiles, probability-integral transforms, and the exact Pareto→Laplace
//! change of variables used throughout the crate.
//!
//! All functions are pure and panic-free; domain violations surface as
//! [`CevmError`].

use serde::{Deserialize, Serialize};

use crate::error::{CevmError, Result};
use crate::stats;

/// Marginal distribution families handled by the probability-integral
/// transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MarginKind {
    /// Standard Laplace (double exponential), support ℝ.
    StandardLaplace,
    /// Standard Pareto with survival 1/x, support (1, ∞).
    StandardPareto,
    /// Standard Gumbel, CDF exp(−exp(−x)), support ℝ.
    Gumbel,
    /// Uniform on (0, 1).
    Uniform01,
}

impl MarginKind {
    /// CDF of the margin at `x`.
    pub fn cdf(self, x: f64) -> Result<f64> {
        check_finite(x)?;
        Ok(match self {
            MarginKind::StandardLaplace => laplace_cdf(x)?,
            MarginKind::StandardPareto => {
                if x <= 1.0 {
                    return Err(CevmError::Domain(format!(
                        "Pareto CDF needs x > 1, got {x}"
                    )));
                }
                1.0 - 1.0 / x
            }
            MarginKind::Gumbel => (-(-x).exp()).exp(),
            MarginKind::Uniform01 => {
                if !(0.0 < x && x < 1.0) {
                    return Err(CevmError::Domain(format!(
                        "Uniform01 support is (0,1), got {x}"
                    )));
                }
                x
            }
        })
    }

    /// Quantile function of the margin at probability `p ∈ (0, 1)`.
    pub fn quantile(self, p: f64) -> Result<f64> {
        check_prob_open(p)?;
        Ok(match self {
            MarginKind::StandardLaplace => laplace_quantile(p)?,
            MarginKind::StandardPareto => 1.0 / (1.0 - p),
            MarginKind::Gumbel => -(-p.ln()).ln(),
            MarginKind::Uniform01 => p,
        })
    }
}

/// One value carried through a margin change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformedValue {
    pub original: f64,
    pub transformed: f64,
    pub margin_from: MarginKind,
    pub margin_to: MarginKind,
}

/// Monotone probability-integral transform between two margins.
pub fn transform_margin(x: f64, from: MarginKind, to: MarginKind) -> Result<TransformedValue> {
    let p = from.cdf(x)?;
    // CDF values of continuous margins land in (0,1) except at the extreme
    // representable tails; clamp one ulp inside so the quantile stays finite.
    let p = p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
    Ok(TransformedValue {
        original: x,
        transformed: to.quantile(p)?,
        margin_from: from,
        margin_to: to,
    })
}

/// Standard Laplace CDF: (1/2)eˣ for x ≤ 0, 1 − (1/2)e⁻ˣ for x > 0.
///
/// ```
/// assert_eq!(cevm::margins::laplace_cdf(0.0).unwrap(), 0.5);
/// ```
pub fn laplace_cdf(x: f64) -> Result<f64> {
    check_finite(x)?;
    Ok(if x <= 0.0 {
        0.5 * x.exp()
    } else {
        1.0 - 0.5 * (-x).exp()
    })
}

/// Standard Laplace quantile; inverse of [`laplace_cdf`] in closed form.
pub fn laplace_quantile(p: f64) -> Result<f64> {
    check_prob_open(p)?;
    Ok(if p <= 0.5 {
        (2.0 * p).ln()
    } else {
        -(2.0 * (1.0 - p)).ln()
    })
}

/// Exact change of variables from standard Pareto to standard Laplace scale.
///
/// Solves 1/x = 1 − (1/2)exp(x_L) on the lower branch (x ≤ 2, x_L ≤ 0) and
/// 1/x = (1/2)exp(−x_L) on the upper branch (x > 2). Both branches agree at
/// x = 2 where x_L = 0.
pub fn pareto_to_laplace(x: f64) -> Result<f64> {
    check_finite(x)?;
    if x <= 1.0 {
        return Err(CevmError::Domain(format!(
            "Pareto support is (1, \u{221e}), got {x}"
        )));
    }
    Ok(if x <= 2.0 {
        (2.0 * (x - 1.0) / x).ln()
    } else {
        (x / 2.0).ln()
    })
}

/// Rank-based transform of an arbitrary sample to Laplace scale.
///
/// Observation `i` with rank `r_i` (ties broken by input index) maps to
/// `laplace_quantile(r_i / (n + 1))`; plotting positions keep every value
/// strictly inside the support. Output order matches input order.
pub fn empirical_to_laplace(sample: &[f64]) -> Result<Vec<f64>> {
    if sample.len() < 2 {
        return Err(CevmError::InsufficientData {
            required: 2,
            found: sample.len(),
        });
    }
    if let Some(bad) = sample.iter().find(|v| !v.is_finite()) {
        return Err(CevmError::InvalidArgument(format!(
            "sample contains non-finite value {bad}"
        )));
    }
    let n1 = (sample.len() + 1) as f64;
    stats::ranks(sample)
        .into_iter()
        .map(|r| laplace_quantile(r / n1))
        .collect()
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CevmError::InvalidArgument(format!("non-finite input {x}")))
    }
}

fn check_prob_open(p: f64) -> Result<()> {
    if p.is_finite() && 0.0 < p && p < 1.0 {
        Ok(())
    } else {
        Err(CevmError::Domain(format!(
            "probability must lie in (0,1), got {p}"
        )))
    }
}
