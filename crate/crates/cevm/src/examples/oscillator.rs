//! Oscillating functions behind the two sinusoid-in-log example families:
//! g(x) = x(2 + sin log x), its compressed relative g_c(u) = u(1 + c sin log u)
//! on (0, 1], and the bounded oscillators h₁, h₂ that appear in the diagonal
//! relation of the four-component mixture.
//!
//! The inverses have no closed form. They are computed by bisection on log u,
//! which keeps full relative precision for arguments as small as the tail
//! draws produce (u ~ 1e−16 and below).

use crate::error::{CevmError, Result};

const LN_2_3: f64 = -0.405_465_108_108_164_4; // ln(2/3)

/// g(x) = x(2 + sin log x) for x ≥ 1; strictly increasing (g' ≥ 2 − √2).
pub fn g(x: f64) -> f64 {
    debug_assert!(x >= 1.0);
    x * (2.0 + x.ln().sin())
}

/// Inverse of [`g`] on [1, ∞), by bisection on log x.
///
/// Since x ≤ g(x) ≤ 3x, the root lies in [v/3, v].
pub fn g_inv(v: f64) -> Result<f64> {
    if !v.is_finite() || v < 2.0 {
        return Err(CevmError::Domain(format!(
            "g_inv needs v ≥ g(1) = 2, got {v}"
        )));
    }
    let lo = (v / 3.0).max(1.0).ln();
    let hi = v.ln();
    let t = bisect_log(|t| t + (2.0 + t.sin()).ln(), v.ln(), lo, hi, "g_inv")?;
    Ok(t.exp())
}

/// g_c(u) = u(1 + c sin log u) for 0 < u ≤ 1; strictly monotone for |c| < 1/√2.
pub fn g_c(u: f64, c: f64) -> f64 {
    debug_assert!(u > 0.0 && u <= 1.0);
    debug_assert!(c.abs() < std::f64::consts::FRAC_1_SQRT_2);
    u * (1.0 + c * u.ln().sin())
}

/// Inverse of [`g_c`] on (0, 1], by bisection on log u.
///
/// u(1 − |c|) ≤ g_c(u) ≤ u(1 + |c|) brackets the root within a constant
/// factor at any magnitude.
pub fn g_c_inv(v: f64, c: f64) -> Result<f64> {
    assert!(c.abs() < std::f64::consts::FRAC_1_SQRT_2);
    if !(v > 0.0) || v > 1.0 {
        return Err(CevmError::Domain(format!(
            "g_c_inv needs v in (0, 1], got {v}"
        )));
    }
    let lv = v.ln();
    let lo = lv - (1.0 + c.abs()).ln();
    let hi = (lv - (1.0 - c.abs()).ln()).min(0.0);
    let t = bisect_log(|t| t + (1.0 + c * t.sin()).ln(), lv, lo, hi, "g_c_inv")?;
    Ok(t.exp())
}

/// ψ_c(z) = g_c⁻¹(1/z) for z ≥ 1.
pub fn psi_c(z: f64, c: f64) -> Result<f64> {
    if !(z >= 1.0) {
        return Err(CevmError::Domain(format!("psi_c needs z ≥ 1, got {z}")));
    }
    g_c_inv(1.0 / z, c)
}

/// h₁(x) = (1/3)[2 + sin(log(2/3) − x)]; bounded in [1/3, 1].
pub fn h1(x: f64) -> f64 {
    (2.0 + (LN_2_3 - x).sin()) / 3.0
}

/// h₂(x) = √((2/3) − (1/3) sin(log(2/3) − x)); bounded in [√(1/3), 1].
pub fn h2(x: f64) -> f64 {
    ((2.0 - (LN_2_3 - x).sin()) / 3.0).sqrt()
}

/// Bisection for a strictly increasing `f` of the log-scale variable `t`,
/// solving f(t) = target on [lo, hi] to |Δt| ≤ 1e−13.
fn bisect_log<F: Fn(f64) -> f64>(
    f: F,
    target: f64,
    mut lo: f64,
    mut hi: f64,
    what: &'static str,
) -> Result<f64> {
    // widen by a few ulps so roundoff in the analytic bracket cannot lose the root
    lo -= 1e-12;
    hi += 1e-12;
    if !(f(lo) <= target && target <= f(hi)) {
        return Err(CevmError::NumericInversion {
            target: what,
            lo,
            hi,
            detail: format!("target {target} not bracketed: f(lo)={}, f(hi)={}", f(lo), f(hi)),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
