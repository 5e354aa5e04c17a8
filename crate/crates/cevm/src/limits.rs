//! Norming-function registry, empirical conditional-limit estimation and the
//! pathology diagnostics: mass escaping to −∞, oscillating conditional label
//! probabilities, the χ tail-dependence estimator and the reverse
//! conditional of the four-component mixture.
//!
//! Norming is always random (by the observed conditioning value X_L, not by
//! the threshold): estimates target
//! P{(Y_L − a(X_L))/b(X_L) ≤ z | X_L > t}.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CevmError, Result};
use crate::examples::oscillator::h1;
use crate::examples::{ExampleId, LabeledSample};
use crate::stats;

const LN2: f64 = std::f64::consts::LN_2;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Location/scale norming pair (a, b) with b > 0 on its domain.
#[derive(Clone)]
pub struct NormingPair {
    a: RealFn,
    b: RealFn,
    pub description: String,
}

impl NormingPair {
    pub fn new<A, B>(a: A, b: B, description: impl Into<String>) -> Self
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        NormingPair {
            a: Arc::new(a),
            b: Arc::new(b),
            description: description.into(),
        }
    }

    /// Canonical family a(x) = αx, b(x) = x^β.
    pub fn canonical(alpha: f64, beta: f64) -> Self {
        NormingPair::new(
            move |x| alpha * x,
            move |x| x.powf(beta),
            format!("a(x) = {alpha}·x, b(x) = x^{beta}"),
        )
    }

    pub fn a(&self, x: f64) -> f64 {
        (self.a)(x)
    }

    pub fn b(&self, x: f64) -> f64 {
        (self.b)(x)
    }

    /// Normalized residual (y − a(x))/b(x).
    pub fn residual(&self, x: f64, y: f64) -> f64 {
        (y - self.a(x)) / self.b(x)
    }
}

impl std::fmt::Debug for NormingPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "NormingPair({})", self.description)
    }
}

/// The norming derived for each example.
pub fn norming_for(id: ExampleId) -> NormingPair {
    match id {
        ExampleId::Ex2_3 => NormingPair::new(|x| x, |_| 1.0, "a(x) = x, b(x) = 1"),
        ExampleId::Ex3_1 => {
            NormingPair::new(|_| 0.0, |x| (-x).exp(), "a(x) = 0, b(x) = exp(-x)")
        }
        ExampleId::Ex3_2 => NormingPair::new(|x| x, |x| x.ln(), "a(x) = x, b(x) = log x"),
        ExampleId::Ex4_2 => NormingPair::new(|x| x, |_| 1.0, "a(x) = x, b(x) = 1"),
        ExampleId::Ex4_4 => NormingPair::new(
            |x| x - (-x).exp() * h1(x),
            |x| -h1(x).ln() + 0.5 * h1(x) * (-x).exp(),
            "a(x) = x - exp(-x) h1(x), b(x) = -log h1(x) + (1/2) h1(x) exp(-x)",
        ),
    }
}

/// Step-function estimate of the normalized conditional CDF above a
/// threshold.
#[derive(Debug, Clone, Serialize)]
pub struct EmpiricalConditional {
    pub threshold_t: f64,
    pub z_grid: Vec<f64>,
    /// ĝ[j] = #{i : x_i > t, residual_i ≤ z_j} / n_exceed (a CDF, so it
    /// includes mass below the grid).
    pub g_hat: Vec<f64>,
    pub n_exceed: usize,
    /// Fraction of exceedance residuals strictly below the grid.
    pub mass_below_grid: f64,
    /// Fraction of exceedance residuals strictly above the grid.
    pub mass_above_grid: f64,
}

pub const MIN_EXCEEDANCES: usize = 50;

fn check_grid(z_grid: &[f64]) -> Result<()> {
    if z_grid.len() < 2 {
        return Err(CevmError::InvalidArgument(
            "z grid needs at least 2 points".into(),
        ));
    }
    if z_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CevmError::InvalidArgument(
            "z grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Residuals (y − a(x))/b(x) over the exceedance set {x > t}.
pub fn exceedance_residuals(
    samples: &[(f64, f64)],
    norming: &NormingPair,
    t: f64,
) -> Vec<f64> {
    samples
        .iter()
        .filter(|(x, _)| *x > t)
        .map(|&(x, y)| norming.residual(x, y))
        .collect()
}

/// Empirical conditional CDF of the normalized residual given X_L > t, on a
/// fixed z grid.
pub fn empirical_conditional(
    samples: &[(f64, f64)],
    norming: &NormingPair,
    t: f64,
    z_grid: &[f64],
) -> Result<EmpiricalConditional> {
    check_grid(z_grid)?;
    let mut resid = exceedance_residuals(samples, norming, t);
    if resid.len() < MIN_EXCEEDANCES {
        return Err(CevmError::InsufficientExceedances {
            threshold: t,
            required: MIN_EXCEEDANCES,
            found: resid.len(),
        });
    }
    resid.sort_unstable_by(|a, b| a.partial_cmp(b).expect("non-finite residual"));
    let m = resid.len() as f64;

    let mut g_hat = Vec::with_capacity(z_grid.len());
    let mut i = 0usize;
    for &z in z_grid {
        while i < resid.len() && resid[i] <= z {
            i += 1;
        }
        g_hat.push(i as f64 / m);
    }
    let below = resid.partition_point(|r| *r < z_grid[0]);
    let above = resid.len() - resid.partition_point(|r| *r <= *z_grid.last().unwrap());
    Ok(EmpiricalConditional {
        threshold_t: t,
        z_grid: z_grid.to_vec(),
        g_hat,
        n_exceed: resid.len(),
        mass_below_grid: below as f64 / m,
        mass_above_grid: above as f64 / m,
    })
}

/// Location of a limit-law atom: −∞ is allowed, +∞ never.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomLocation {
    NegInfinity,
    Finite(f64),
}

/// Purely atomic limit law of the normalized conditional.
#[derive(Debug, Clone, Serialize)]
pub struct LimitLaw {
    pub atoms: Vec<(AtomLocation, f64)>,
    /// None for every example here: the five laws are purely atomic.
    pub continuous_part: Option<String>,
}

impl LimitLaw {
    pub fn cdf(&self, z: f64) -> f64 {
        self.atoms
            .iter()
            .map(|(loc, w)| match loc {
                AtomLocation::NegInfinity => *w,
                AtomLocation::Finite(a) if *a <= z => *w,
                _ => 0.0,
            })
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    pub fn finite_atoms(&self) -> Vec<f64> {
        self.atoms
            .iter()
            .filter_map(|(loc, _)| match loc {
                AtomLocation::Finite(a) => Some(*a),
                AtomLocation::NegInfinity => None,
            })
            .collect()
    }

    /// Weight of the atom at −∞ (0 if none).
    pub fn mass_at_neg_infinity(&self) -> f64 {
        self.atoms
            .iter()
            .filter_map(|(loc, w)| matches!(loc, AtomLocation::NegInfinity).then_some(*w))
            .sum()
    }
}

/// Limit of the normalized conditional under the example's norming, or a
/// non-convergence marker.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionalLimit {
    Converges(LimitLaw),
    /// No limit exists: the conditional mixture weights oscillate forever.
    NonConvergent,
}

pub fn limit_law_for(id: ExampleId) -> ConditionalLimit {
    use AtomLocation::*;
    let atoms = match id {
        ExampleId::Ex2_3 => vec![(NegInfinity, 0.5), (Finite(LN2), 0.5)],
        ExampleId::Ex3_1 => vec![(Finite(-0.5), 0.5), (Finite(0.5), 0.5)],
        ExampleId::Ex3_2 => vec![(NegInfinity, 0.5), (Finite(-1.0), 0.5)],
        ExampleId::Ex4_2 => vec![(NegInfinity, 0.5), (Finite(LN2), 0.5)],
        ExampleId::Ex4_4 => return ConditionalLimit::NonConvergent,
    };
    ConditionalLimit::Converges(LimitLaw {
        atoms,
        continuous_part: None,
    })
}

/// Sup-distance between an empirical conditional and a limit law, skipping
/// grid points within `atom_radius` of a finite atom and everything below
/// `exclude_below` (the finite-threshold neighborhood of a −∞ atom).
pub fn sup_distance_off_atoms(
    ec: &EmpiricalConditional,
    law: &LimitLaw,
    exclude_below: f64,
    atom_radius: f64,
) -> f64 {
    let atoms = law.finite_atoms();
    let mut sup = 0.0f64;
    for (z, g) in ec.z_grid.iter().zip(&ec.g_hat) {
        if *z < exclude_below || atoms.iter().any(|a| (z - a).abs() <= atom_radius) {
            continue;
        }
        sup = sup.max((g - law.cdf(*z)).abs());
    }
    sup
}

/// Trend of ĝ_t(z_low) over increasing thresholds, estimating the weight
/// escaping to −∞.
#[derive(Debug, Clone, Serialize)]
pub struct EscapingMass {
    /// z at which the trend is read: 10th-percentile residual at the
    /// smallest threshold (below the stable atoms, above the escaping
    /// cluster once it has drifted past).
    pub z_low: f64,
    pub per_threshold: Vec<(f64, f64)>,
    /// ĝ at z_low for the largest threshold.
    pub estimate: f64,
}

/// Estimate of the mass escaping to −∞ under the given norming.
pub fn mass_at_minus_infinity(
    samples: &[(f64, f64)],
    norming: &NormingPair,
    t_sequence: &[f64],
) -> Result<EscapingMass> {
    if t_sequence.is_empty() {
        return Err(CevmError::InvalidArgument("empty threshold sequence".into()));
    }
    if t_sequence.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CevmError::InvalidArgument(
            "threshold sequence must be strictly increasing".into(),
        ));
    }
    let mut first = exceedance_residuals(samples, norming, t_sequence[0]);
    if first.len() < MIN_EXCEEDANCES {
        return Err(CevmError::InsufficientExceedances {
            threshold: t_sequence[0],
            required: MIN_EXCEEDANCES,
            found: first.len(),
        });
    }
    first.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let z_low = stats::quantile(&first, 0.10);

    let mut per_threshold = Vec::with_capacity(t_sequence.len());
    for &t in t_sequence {
        let resid = exceedance_residuals(samples, norming, t);
        if resid.len() < MIN_EXCEEDANCES {
            return Err(CevmError::InsufficientExceedances {
                threshold: t,
                required: MIN_EXCEEDANCES,
                found: resid.len(),
            });
        }
        let below = resid.iter().filter(|r| **r <= z_low).count();
        per_threshold.push((t, below as f64 / resid.len() as f64));
    }
    let estimate = per_threshold.last().unwrap().1;
    Ok(EscapingMass {
        z_low,
        per_threshold,
        estimate,
    })
}

/// P(B = 1 | X > t) for the four-component mixture, on the original scale:
/// 1/3 + (1/6)·sin log(2 − t) for 1 < t < 2.
pub fn oscillation_probe(t: f64) -> Result<f64> {
    if !(1.0 < t && t < 2.0) {
        return Err(CevmError::Domain(format!(
            "oscillation probe needs t in (1, 2), got {t}"
        )));
    }
    Ok(1.0 / 3.0 + (2.0 - t).ln().sin() / 6.0)
}

/// One threshold of the oscillation diagnostic.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OscillationPoint {
    /// Laplace-scale threshold.
    pub t: f64,
    /// Empirical P(B = 1 | X_L > t).
    pub empirical: f64,
    /// Exact curve, through the original-scale quantile map.
    pub theoretical: f64,
    pub n_exceed: usize,
}

pub const MIN_OSCILLATION_EXCEEDANCES: usize = 100;

/// Empirical vs exact P(B = 1 | X_L > t) over a grid of Laplace-scale
/// thresholds, for `Ex4_4` samples with labels retained.
///
/// `lap` pairs each Laplace-scale conditioning value with its mixture label.
pub fn oscillation_diagnostic(
    lap: &[(f64, i32)],
    t_grid: &[f64],
) -> Result<Vec<OscillationPoint>> {
    let mut out = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if t <= 0.0 {
            return Err(CevmError::Domain(format!(
                "oscillation thresholds must be positive on Laplace scale, got {t}"
            )));
        }
        let mut n_exceed = 0usize;
        let mut n_b1 = 0usize;
        for &(x_l, b) in lap {
            if x_l > t {
                n_exceed += 1;
                n_b1 += usize::from(b == 1);
            }
        }
        if n_exceed < MIN_OSCILLATION_EXCEEDANCES {
            return Err(CevmError::InsufficientExceedances {
                threshold: t,
                required: MIN_OSCILLATION_EXCEEDANCES,
                found: n_exceed,
            });
        }
        // map the Laplace threshold back to the original scale (upper branch
        // of the Ex4_4 X marginal) and evaluate the exact curve there
        let t_orig = 2.0 - (2.0 / 3.0) * (-t).exp();
        out.push(OscillationPoint {
            t,
            empirical: n_b1 as f64 / n_exceed as f64,
            theoretical: oscillation_probe(t_orig)?,
            n_exceed,
        });
    }
    Ok(out)
}

/// χ(p): empirical P(F_Y(Y) > p | F_X(X) > p) from uniform-scale pairs.
pub fn chi_estimator(uniform_pairs: &[(f64, f64)], p: f64) -> Result<f64> {
    if !(0.5 < p && p < 1.0) {
        return Err(CevmError::Domain(format!(
            "chi estimator needs p in (0.5, 1), got {p}"
        )));
    }
    let mut n_x = 0usize;
    let mut n_joint = 0usize;
    for &(u, v) in uniform_pairs {
        if u > p {
            n_x += 1;
            n_joint += usize::from(v > p);
        }
    }
    if n_x == 0 {
        return Err(CevmError::InsufficientExceedances {
            threshold: p,
            required: 1,
            found: 0,
        });
    }
    Ok(n_joint as f64 / n_x as f64)
}

/// Rank-based uniform-scale pairs (r/(n+1) per coordinate, index ties).
pub fn uniform_scale_ranks(xy: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let xs: Vec<f64> = xy.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = xy.iter().map(|p| p.1).collect();
    let n1 = (xy.len() + 1) as f64;
    let rx = stats::ranks(&xs);
    let ry = stats::ranks(&ys);
    rx.into_iter()
        .zip(ry)
        .map(|(a, b)| (a / n1, b / n1))
        .collect()
}

/// The strictly increasing Laplace-scale diagonal y_L = T(x_L) of the
/// Ex4_4 B = 1 branch.
pub fn ex44_diagonal(x_l: f64) -> f64 {
    let h = h1(x_l);
    x_l - h.ln() - (0.5 * (-x_l).exp() * h).ln_1p()
}

/// Oscillator gap Q(y_L) = y_L − T⁻¹(y_L), by bracketed bisection of the
/// diagonal to 1e−10.
pub fn ex44_oscillator_gap(y_l: f64) -> Result<f64> {
    // T(x) − x ∈ (−log(1 + e^{−x}/2), log 3], so the root lies within log 3
    // of y_L; widen slightly for safety.
    let mut lo = y_l - 3.0f64.ln() - 0.5;
    let mut hi = y_l + 0.5;
    if !(ex44_diagonal(lo) < y_l && y_l < ex44_diagonal(hi)) {
        return Err(CevmError::NumericInversion {
            target: "ex44_diagonal",
            lo,
            hi,
            detail: format!("y_L={y_l} not bracketed"),
        });
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if ex44_diagonal(mid) < y_l {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(y_l - 0.5 * (lo + hi))
}

/// Reverse conditional of the four-component mixture: empirical CDF of
/// (X_L − Y_L)/Q(Y_L) given Y_L > y, with strict `< z` as in the limit
/// statement.
///
/// `lap` carries (x_L, y_L) pairs; the limit has atoms (−∞, 1/2), (−1, 1/2).
pub fn reverse_conditional_ex44(
    lap: &[(f64, f64)],
    y_threshold: f64,
    z_grid: &[f64],
) -> Result<EmpiricalConditional> {
    check_grid(z_grid)?;
    let exceed: Vec<(f64, f64)> = lap
        .iter()
        .copied()
        .filter(|(_, y_l)| *y_l > y_threshold)
        .collect();
    if exceed.len() < MIN_EXCEEDANCES {
        return Err(CevmError::InsufficientExceedances {
            threshold: y_threshold,
            required: MIN_EXCEEDANCES,
            found: exceed.len(),
        });
    }
    let mut resid = exceed
        .par_iter()
        .map(|&(x_l, y_l)| {
            let q = ex44_oscillator_gap(y_l)?;
            Ok((x_l - y_l) / q)
        })
        .collect::<Result<Vec<f64>>>()?;
    resid.sort_unstable_by(|a, b| a.partial_cmp(b).expect("non-finite residual"));
    let m = resid.len() as f64;

    let mut g_hat = Vec::with_capacity(z_grid.len());
    for &z in z_grid {
        let strictly_below = resid.partition_point(|r| *r < z);
        g_hat.push(strictly_below as f64 / m);
    }
    let below = resid.partition_point(|r| *r < z_grid[0]);
    let above = resid.len() - resid.partition_point(|r| *r <= *z_grid.last().unwrap());
    Ok(EmpiricalConditional {
        threshold_t: y_threshold,
        z_grid: z_grid.to_vec(),
        g_hat,
        n_exceed: resid.len(),
        mass_below_grid: below as f64 / m,
        mass_above_grid: above as f64 / m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{sample, to_laplace_pairs, uniform_scale_exact};
    use proptest::prelude::*;

    #[test]
    fn norming_registry_values() {
        let n = norming_for(ExampleId::Ex2_3);
        assert_eq!(n.a(5.0), 5.0);
        assert_eq!(n.b(5.0), 1.0);
        let n = norming_for(ExampleId::Ex3_1);
        assert_eq!(n.a(5.0), 0.0);
        assert!((n.b(5.0) - (-5.0f64).exp()).abs() < 1e-18);
        let n = norming_for(ExampleId::Ex3_2);
        assert_eq!(n.a(5.0), 5.0);
        assert!((n.b(5.0) - 5.0f64.ln()).abs() < 1e-15);
        let n = norming_for(ExampleId::Ex4_4);
        // b > 0 everywhere on the conditioning range
        for i in 0..2000 {
            let x = 0.5 + i as f64 * 0.01;
            assert!(n.b(x) > 0.0, "b({x}) = {}", n.b(x));
        }
    }

    #[test]
    fn empirical_conditional_counts_by_hand() {
        // identity norming: residual = y − x
        let norming = NormingPair::new(|x| x, |_| 1.0, "a=x, b=1");
        let mut samples: Vec<(f64, f64)> = Vec::new();
        // 60 exceedances of t=0 with residuals −1.0 (30×) and +1.0 (30×)
        for i in 0..60 {
            let x = 1.0 + i as f64 * 0.01;
            let r = if i % 2 == 0 { -1.0 } else { 1.0 };
            samples.push((x, x + r));
        }
        // non-exceedances must be ignored
        samples.push((-5.0, 100.0));
        let ec = empirical_conditional(&samples, &norming, 0.0, &[-2.0, 0.0, 1.0, 2.0]).unwrap();
        assert_eq!(ec.n_exceed, 60);
        assert_eq!(ec.g_hat, vec![0.0, 0.5, 1.0, 1.0]);
        assert_eq!(ec.mass_below_grid, 0.0);
        assert_eq!(ec.mass_above_grid, 0.0);

        // g_hat must be a CDF: nondecreasing in [0,1]
        assert!(ec.g_hat.windows(2).all(|w| w[0] <= w[1]));

        let err = empirical_conditional(&samples, &norming, 1.55, &[-2.0, 2.0]);
        assert!(matches!(
            err,
            Err(CevmError::InsufficientExceedances { found, .. }) if found < 50
        ));
        assert!(empirical_conditional(&samples, &norming, 0.0, &[1.0, 1.0]).is_err());
    }

    #[test]
    fn limit_laws_are_the_documented_atom_pairs() {
        use AtomLocation::*;
        match limit_law_for(ExampleId::Ex3_2) {
            ConditionalLimit::Converges(law) => {
                assert_eq!(law.atoms, vec![(NegInfinity, 0.5), (Finite(-1.0), 0.5)]);
                assert_eq!(law.cdf(-2.0), 0.5);
                assert_eq!(law.cdf(-0.5), 1.0);
            }
            ConditionalLimit::NonConvergent => panic!("Ex3_2 converges"),
        }
        match limit_law_for(ExampleId::Ex4_2) {
            ConditionalLimit::Converges(law) => {
                assert_eq!(law.atoms, vec![(NegInfinity, 0.5), (Finite(LN2), 0.5)]);
            }
            ConditionalLimit::NonConvergent => panic!("Ex4_2 converges"),
        }
        assert!(matches!(
            limit_law_for(ExampleId::Ex4_4),
            ConditionalLimit::NonConvergent
        ));
        // every stated law is purely atomic with total weight 1
        for id in [
            ExampleId::Ex2_3,
            ExampleId::Ex3_1,
            ExampleId::Ex3_2,
            ExampleId::Ex4_2,
        ] {
            match limit_law_for(id) {
                ConditionalLimit::Converges(law) => {
                    assert!((law.total_weight() - 1.0).abs() < 1e-15, "{id}");
                    assert!(law.continuous_part.is_none());
                }
                ConditionalLimit::NonConvergent => panic!("{id} converges"),
            }
        }
    }

    #[test]
    fn conditional_plateaus_match_limits_at_moderate_scale() {
        // Ex2_3 at t=6: ĝ(0) ≈ 0.5 (atom at log 2 above, escaping mass below),
        // ĝ(1) ≈ 1.0; Ex3_1 at t=6: ĝ(0) ≈ 0.5.
        let n = 400_000;
        let s23 = sample(ExampleId::Ex2_3, n, 31).unwrap();
        let lap = to_laplace_pairs(ExampleId::Ex2_3, &s23).unwrap();
        let ec = empirical_conditional(
            &lap,
            &norming_for(ExampleId::Ex2_3),
            6.0,
            &[0.0, 1.0],
        )
        .unwrap();
        assert!((ec.g_hat[0] - 0.5).abs() < 0.07, "g(0) = {}", ec.g_hat[0]);
        assert!(ec.g_hat[1] > 0.93, "g(1) = {}", ec.g_hat[1]);

        let s31 = sample(ExampleId::Ex3_1, n, 32).unwrap();
        let lap = to_laplace_pairs(ExampleId::Ex3_1, &s31).unwrap();
        let ec = empirical_conditional(
            &lap,
            &norming_for(ExampleId::Ex3_1),
            6.0,
            &[-0.6, 0.0, 0.6],
        )
        .unwrap();
        assert!((ec.g_hat[1] - 0.5).abs() < 0.07, "g(0) = {}", ec.g_hat[1]);
        assert!(ec.g_hat[0] < 0.05 && ec.g_hat[2] > 0.95);
    }

    #[test]
    fn escaping_mass_matches_documented_values() {
        let n = 400_000;
        let ts = [3.0, 4.5, 6.0];
        for (id, expect) in [
            (ExampleId::Ex2_3, 0.5),
            (ExampleId::Ex3_1, 0.0),
            (ExampleId::Ex4_2, 0.5),
        ] {
            let samples = sample(id, n, 33).unwrap();
            let lap = to_laplace_pairs(id, &samples).unwrap();
            let em = mass_at_minus_infinity(&lap, &norming_for(id), &ts).unwrap();
            assert!(
                (em.estimate - expect).abs() < 0.06,
                "{id}: estimate {} (z_low {})",
                em.estimate,
                em.z_low
            );
        }
        let lap = to_laplace_pairs(
            ExampleId::Ex2_3,
            &sample(ExampleId::Ex2_3, 1000, 3).unwrap(),
        )
        .unwrap();
        assert!(mass_at_minus_infinity(&lap, &norming_for(ExampleId::Ex2_3), &[4.0, 3.0]).is_err());
    }

    #[test]
    fn oscillation_probe_values() {
        let t = 2.0 - (-std::f64::consts::FRAC_PI_2).exp();
        assert!((oscillation_probe(t).unwrap() - 1.0 / 6.0).abs() < 1e-12);
        let t = 2.0 - (-3.0 * std::f64::consts::FRAC_PI_2).exp();
        assert!((oscillation_probe(t).unwrap() - 0.5).abs() < 1e-12);
        // 2 − e^{π/2} < 1: out of domain
        assert!(oscillation_probe(2.0 - std::f64::consts::FRAC_PI_2.exp()).is_err());
        assert!(oscillation_probe(1.0).is_err());
        assert!(oscillation_probe(2.0).is_err());
        // just inside the lower boundary: sin log(2 − t) ≈ sin log 1 = 0
        let v = oscillation_probe(1.0 + 1e-9).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn oscillation_probe_stays_in_band() {
        for i in 0..100_000 {
            let t = 1.0 + (i as f64 + 0.5) / 100_001.0;
            let v = oscillation_probe(t).unwrap();
            assert!((1.0 / 6.0..=0.5).contains(&v), "t={t}: {v}");
        }
    }

    #[test]
    fn oscillation_diagnostic_tracks_theory() {
        let n = 600_000;
        let samples = sample(ExampleId::Ex4_4, n, 34).unwrap();
        let lap = to_laplace_pairs(ExampleId::Ex4_4, &samples).unwrap();
        let labeled: Vec<(f64, i32)> = lap
            .iter()
            .zip(&samples)
            .map(|(p, s)| (p.0, s.b_label))
            .collect();
        let grid: Vec<f64> = (2..=12).map(|k| k as f64 * 0.5).collect();
        let pts = oscillation_diagnostic(&labeled, &grid).unwrap();
        for p in &pts {
            let sigma = (p.theoretical * (1.0 - p.theoretical) / p.n_exceed as f64).sqrt();
            assert!(
                (p.empirical - p.theoretical).abs() <= 3.0 * sigma.max(1e-4),
                "t={}: emp {} theo {} (m={})",
                p.t,
                p.empirical,
                p.theoretical,
                p.n_exceed
            );
        }
        // too-high threshold errors out with the offending t
        let err = oscillation_diagnostic(&labeled, &[25.0]);
        assert!(matches!(
            err,
            Err(CevmError::InsufficientExceedances { threshold, .. }) if threshold == 25.0
        ));
    }

    #[test]
    fn chi_estimator_reference_cases() {
        // comonotone: χ = 1 at any p
        let pairs: Vec<(f64, f64)> = (1..=999).map(|i| (i as f64 / 1000.0, i as f64 / 1000.0)).collect();
        assert_eq!(chi_estimator(&pairs, 0.9).unwrap(), 1.0);

        // independence: χ(p) ≈ 1 − p
        let n = 200_000;
        let s = sample(ExampleId::Ex2_3, n, 35).unwrap(); // reuse the Pareto stream as uniforms
        let pairs: Vec<(f64, f64)> = s
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| (1.0 - 1.0 / c[0].x, 1.0 - 1.0 / c[1].x))
            .collect();
        let chi = chi_estimator(&pairs, 0.9).unwrap();
        assert!((chi - 0.1).abs() < 0.01, "chi = {chi}");

        assert!(chi_estimator(&pairs, 0.4).is_err());
        assert!(chi_estimator(&[(0.1, 0.1)], 0.9).is_err());
    }

    #[test]
    fn chi_on_ex2_3_exact_marginals() {
        let n = 500_000;
        let s = sample(ExampleId::Ex2_3, n, 36).unwrap();
        let uni = uniform_scale_exact(ExampleId::Ex2_3, &s);
        let chi = chi_estimator(&uni, 0.99).unwrap();
        assert!((chi - 0.5).abs() < 0.03, "chi = {chi}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn chi_is_invariant_under_monotone_transforms(seed in 0u64..500) {
            let s = sample(ExampleId::Ex3_1, 4000, seed).unwrap();
            let xy: Vec<(f64, f64)> = s.iter().map(|v| (v.x, v.y)).collect();
            let chi_a = chi_estimator(&uniform_scale_ranks(&xy), 0.9).unwrap();
            let warped: Vec<(f64, f64)> =
                xy.iter().map(|&(x, y)| (x.ln(), y.powi(3))).collect();
            let chi_b = chi_estimator(&uniform_scale_ranks(&warped), 0.9).unwrap();
            prop_assert!((chi_a - chi_b).abs() < 1e-12);
        }
    }

    #[test]
    fn ex44_diagonal_is_increasing_and_gap_inverts_it() {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..4000 {
            let x = 0.5 + i as f64 * 0.005;
            let v = ex44_diagonal(x);
            assert!(v > prev, "diagonal not increasing at x={x}");
            prev = v;
        }
        for x_l in [2.0, 5.0, 9.0, 14.0] {
            let y_l = ex44_diagonal(x_l);
            let q = ex44_oscillator_gap(y_l).unwrap();
            assert!((y_l - q - x_l).abs() < 1e-9, "x_l={x_l}: gap {q}");
        }
    }

    #[test]
    fn reverse_conditional_matches_limit_at_moderate_scale() {
        let n = 600_000;
        let samples = sample(ExampleId::Ex4_4, n, 37).unwrap();
        let lap = to_laplace_pairs(ExampleId::Ex4_4, &samples).unwrap();
        let ec = reverse_conditional_ex44(&lap, 5.5, &[-2.0, 0.0]).unwrap();
        assert!((ec.g_hat[0] - 0.5).abs() < 0.05, "P(r < -2) = {}", ec.g_hat[0]);
        assert!(ec.g_hat[1] > 0.95, "P(r < 0) = {}", ec.g_hat[1]);

        // B=3 subsample under the same normalization drifts to −∞
        let labeled: Vec<((f64, f64), i32)> =
            lap.iter().copied().zip(samples.iter().map(|s| s.b_label)).collect();
        let mut med_by_threshold = Vec::new();
        for y in [3.0, 4.5, 6.0] {
            let mut r3: Vec<f64> = labeled
                .iter()
                .filter(|((_, y_l), b)| *b == 3 && *y_l > y)
                .map(|((x_l, y_l), _)| {
                    (x_l - y_l) / ex44_oscillator_gap(*y_l).unwrap()
                })
                .collect();
            r3.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
            med_by_threshold.push(stats::quantile(&r3, 0.5));
        }
        assert!(
            med_by_threshold[0] > med_by_threshold[1]
                && med_by_threshold[1] > med_by_threshold[2],
            "B=3 medians {med_by_threshold:?} should decrease"
        );
    }
}
