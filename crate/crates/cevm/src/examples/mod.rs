//! Exact samplers, closed-form marginal CDFs and Laplace-scale transforms for
//! the five bivariate mixture families used as conditional-extremes
//! counterexamples.
//!
//! Each family couples a standard Pareto driver with a discrete mixture label:
//!
//! * `Ex2_3` — Y = B + (1−B)(2 − 1/X_P), B ∈ {0,1}: atom at y = 1.
//! * `Ex3_1` — Y = 2 − B/X_P, B ∈ {−1,1}: Y uniform on (1,3).
//! * `Ex3_2` — Y = B(1 − U/X_P), B ∈ {−1,1}, U uniform: log-rate convergence.
//! * `Ex4_2` — Y = B·X_P − (1−B)·g⁻¹(2X_P) with g(x) = x(2 + sin log x).
//! * `Ex4_4` — four-component mixture driven by one Pareto Z_P, with
//!   oscillators that prevent any conditional limit.
//!
//! Samplers are deterministic given a seed: draw index block `i` comes from an
//! independent counter-split RNG stream, so output is identical regardless of
//! thread count and `sample(n)` is a prefix of `sample(m)` for n ≤ m.

pub mod oscillator;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CevmError, Result};
use crate::margins::{laplace_quantile, pareto_to_laplace};
use oscillator::{g, g_inv, h1, h2, psi_c};

const LN2: f64 = std::f64::consts::LN_2;
/// Draw-index block size for the counter-based RNG split.
const STREAM_BLOCK: usize = 1 << 16;
/// Branch boundary of the Ex4_4 Y transform: s = 2 − y at y = 3 − √3.
const SQRT3_M1: f64 = 0.732_050_807_568_877_3;

/// Identifies one of the five example distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleId {
    Ex2_3,
    Ex3_1,
    Ex3_2,
    Ex4_2,
    Ex4_4,
}

impl ExampleId {
    pub const ALL: [ExampleId; 5] = [
        ExampleId::Ex2_3,
        ExampleId::Ex3_1,
        ExampleId::Ex3_2,
        ExampleId::Ex4_2,
        ExampleId::Ex4_4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExampleId::Ex2_3 => "ex2_3",
            ExampleId::Ex3_1 => "ex3_1",
            ExampleId::Ex3_2 => "ex3_2",
            ExampleId::Ex4_2 => "ex4_2",
            ExampleId::Ex4_4 => "ex4_4",
        }
    }

    pub fn parse(s: &str) -> Option<ExampleId> {
        let k = s.trim().to_ascii_lowercase().replace(['.', '-'], "_");
        Self::ALL.into_iter().find(|id| id.name() == k)
    }
}

impl std::fmt::Display for ExampleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One draw on the original scale, with its latent mixture label.
///
/// `u_aux` carries the extra latent variable where one exists: the uniform U
/// for `Ex3_2`, and the Pareto driver Z_P for `Ex4_4` (kept because x = 2 − ψ
/// loses all tail precision once ψ drops below one ulp of 2).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct LabeledSample {
    pub x: f64,
    pub y: f64,
    pub b_label: i32,
    pub u_aux: Option<f64>,
}

fn rng_for_block(seed: u64, block: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Uniform draw strictly inside (0, 1).
fn open01(rng: &mut ChaCha12Rng) -> f64 {
    loop {
        let v: f64 = rng.random();
        if v > 0.0 {
            return v;
        }
    }
}

/// Standard Pareto draw on (1, ∞): X = 1/V with V uniform on (0, 1).
fn pareto(rng: &mut ChaCha12Rng) -> f64 {
    1.0 / open01(rng)
}

fn draw_one(id: ExampleId, rng: &mut ChaCha12Rng) -> LabeledSample {
    match id {
        ExampleId::Ex2_3 => {
            let x = pareto(rng);
            let b = rng.random_range(0..2);
            let y = if b == 1 { 1.0 } else { 2.0 - 1.0 / x };
            LabeledSample { x, y, b_label: b, u_aux: None }
        }
        ExampleId::Ex3_1 => {
            let x = pareto(rng);
            let b = if rng.random_range(0..2) == 0 { -1 } else { 1 };
            let y = 2.0 - f64::from(b) / x;
            LabeledSample { x, y, b_label: b, u_aux: None }
        }
        ExampleId::Ex3_2 => {
            let x = pareto(rng);
            let b = if rng.random_range(0..2) == 0 { -1 } else { 1 };
            let u = open01(rng);
            let y = f64::from(b) * (1.0 - u / x);
            LabeledSample { x, y, b_label: b, u_aux: Some(u) }
        }
        ExampleId::Ex4_2 => {
            let x = pareto(rng);
            let b = rng.random_range(0..2);
            let y = if b == 1 {
                x
            } else {
                -g_inv(2.0 * x).expect("2x > 2 by construction")
            };
            LabeledSample { x, y, b_label: b, u_aux: None }
        }
        ExampleId::Ex4_4 => {
            let z = pareto(rng);
            let b = rng.random_range(1..5);
            let (x, y) = match b {
                1 => (2.0 - psi_c(z, 0.5).expect("z ≥ 1"), 2.0 - 1.0 / z),
                2 => (2.0 - psi_c(z, -0.5).expect("z ≥ 1"), 2.0 - 1.0 / z.sqrt()),
                3 => (1.0 - 1.0 / z, 2.0 - 1.0 / z),
                _ => (2.0 - 1.0 / z, 1.0 - 1.0 / z),
            };
            LabeledSample { x, y, b_label: b, u_aux: Some(z) }
        }
    }
}

/// Draw `n` independent samples from the example, deterministic given `seed`.
pub fn sample(id: ExampleId, n: usize, seed: u64) -> Result<Vec<LabeledSample>> {
    if n == 0 {
        return Err(CevmError::InvalidArgument("sample size must be ≥ 1".into()));
    }
    let mut out = vec![LabeledSample::default(); n];
    out.par_chunks_mut(STREAM_BLOCK)
        .enumerate()
        .for_each(|(block, buf)| {
            let mut rng = rng_for_block(seed, block as u64);
            for slot in buf {
                *slot = draw_one(id, &mut rng);
            }
        });
    Ok(out)
}

/// Marginal CDF of Y, right-continuous; values outside the support clamp to
/// 0 or 1 rather than erroring.
pub fn marginal_cdf_y(id: ExampleId, y: f64) -> f64 {
    match id {
        ExampleId::Ex2_3 => {
            // atom of mass 1/2 at y = 1, then density 1/2 up to 2
            if y < 1.0 {
                0.0
            } else if y < 2.0 {
                y / 2.0
            } else {
                1.0
            }
        }
        ExampleId::Ex3_1 => ((y - 1.0) / 2.0).clamp(0.0, 1.0),
        ExampleId::Ex3_2 => {
            if y <= -1.0 {
                0.0
            } else if y < 0.0 {
                let w = y + 1.0;
                0.5 * w * (1.0 - w.ln())
            } else if y < 1.0 {
                let q = 1.0 - y;
                1.0 - 0.5 * q * (1.0 - q.ln())
            } else {
                1.0
            }
        }
        ExampleId::Ex4_2 => {
            if y < -1.0 {
                1.0 / g(-y)
            } else if y <= 1.0 {
                0.5
            } else {
                1.0 - 0.5 / y
            }
        }
        ExampleId::Ex4_4 => {
            if y <= 0.0 {
                0.0
            } else if y <= 1.0 {
                y / 4.0
            } else if y <= 2.0 {
                y / 2.0 - (2.0 - y) * (2.0 - y) / 4.0
            } else {
                1.0
            }
        }
    }
}

/// Left limit z ↦ P(Y < z); differs from [`marginal_cdf_y`] only at the
/// `Ex2_3` atom.
pub fn marginal_cdf_y_left(id: ExampleId, y: f64) -> f64 {
    match id {
        ExampleId::Ex2_3 if y <= 1.0 => 0.0,
        _ => marginal_cdf_y(id, y),
    }
}

/// Marginal CDF of X (standard Pareto except for `Ex4_4`); clamps outside
/// the support.
pub fn marginal_cdf_x(id: ExampleId, x: f64) -> f64 {
    match id {
        ExampleId::Ex4_4 => {
            if x <= 0.0 {
                0.0
            } else if x <= 1.0 {
                x / 4.0
            } else if x <= 2.0 {
                (3.0 * x - 2.0) / 4.0
            } else {
                1.0
            }
        }
        _ => {
            if x <= 1.0 {
                0.0
            } else {
                1.0 - 1.0 / x
            }
        }
    }
}

/// Laplace-scale pair (x_L, y_L) for one sample, through the example's
/// closed-form branch expressions.
///
/// `Ex4_4` recomputes branch quantities from the stored Pareto driver so the
/// deep tail keeps full precision; samples lacking `u_aux` fall back to the
/// generic quantile route (`Ex3_2` recovers U from (x, y)).
pub fn to_laplace_pair(id: ExampleId, s: &LabeledSample) -> Result<(f64, f64)> {
    match id {
        ExampleId::Ex2_3 => {
            let x_l = pareto_to_laplace(s.x)?;
            let y_l = if s.b_label == 1 { 0.0 } else { s.x.ln() };
            Ok((x_l, y_l))
        }
        ExampleId::Ex3_1 => {
            let x_l = pareto_to_laplace(s.x)?;
            let mag = (-1.0 / s.x).ln_1p(); // log(1 − 1/x) ≤ 0
            let y_l = if s.b_label == 1 { mag } else { -mag };
            Ok((x_l, y_l))
        }
        ExampleId::Ex3_2 => {
            let x_l = pareto_to_laplace(s.x)?;
            let u = match s.u_aux {
                Some(u) => u,
                None => {
                    let u = s.x * (1.0 - s.y.abs());
                    if !(0.0 < u && u < 1.0) {
                        return Err(CevmError::InvalidArgument(format!(
                            "cannot recover latent uniform from (x={}, y={})",
                            s.x, s.y
                        )));
                    }
                    u
                }
            };
            // w = u/x in log space; y_L magnitude = log w + log(1 − log w)
            let log_w = u.ln() - s.x.ln();
            let mag = log_w + (1.0 - log_w).ln();
            let y_l = if s.b_label == -1 { mag } else { -mag };
            Ok((x_l, y_l))
        }
        ExampleId::Ex4_2 => {
            let x_l = pareto_to_laplace(s.x)?;
            // b=1: y = x, F_Y(y) = 1 − 1/(2y) ⇒ y_L = log x.
            // b=0: y = −g⁻¹(2x), F_Y(y) = 1/g(−y) = 1/(2x) ⇒ y_L = −log x.
            let y_l = if s.b_label == 1 { s.x.ln() } else { -s.x.ln() };
            Ok((x_l, y_l))
        }
        ExampleId::Ex4_4 => match s.u_aux {
            Some(z) => ex44_laplace_from_driver(s.b_label, z),
            None => {
                let p_x = marginal_cdf_x(id, s.x).clamp(f64::MIN_POSITIVE, 1.0 - 1e-16);
                let p_y = marginal_cdf_y(id, s.y).clamp(f64::MIN_POSITIVE, 1.0 - 1e-16);
                Ok((laplace_quantile(p_x)?, laplace_quantile(p_y)?))
            }
        },
    }
}

/// Ex4_4 Laplace pair from the latent Pareto driver, full precision.
fn ex44_laplace_from_driver(b: i32, z: f64) -> Result<(f64, f64)> {
    if !(z > 1.0) {
        return Err(CevmError::Domain(format!("Ex4_4 driver must exceed 1, got {z}")));
    }
    let s = 1.0 / z;
    let (x_l, y_l) = match b {
        1 | 2 => {
            let c = if b == 1 { 0.5 } else { -0.5 };
            let psi = psi_c(z, c)?; // 2 − x
            let x_l = if psi >= 2.0 / 3.0 {
                ((4.0 - 3.0 * psi) / 2.0).ln()
            } else {
                -(1.5 * psi).ln()
            };
            let sy = if b == 1 { s } else { s.sqrt() }; // 2 − y
            (x_l, ex44_upper_y_laplace(sy))
        }
        3 => {
            // x = 1 − s on the lower branch, y = 2 − s on the upper branch
            let x_l = (-s).ln_1p() - LN2;
            (x_l, ex44_upper_y_laplace(s))
        }
        4 => {
            let x_l = if s < 2.0 / 3.0 {
                -(1.5 * s).ln()
            } else {
                ((4.0 - 3.0 * s) / 2.0).ln()
            };
            let y_l = (-s).ln_1p() - LN2;
            (x_l, y_l)
        }
        other => {
            return Err(CevmError::Domain(format!(
                "Ex4_4 label must lie in 1..=4, got {other}"
            )))
        }
    };
    Ok((x_l, y_l))
}

/// y_L for an Ex4_4 observation y = 2 − s on (1, 2), from s = 2 − y.
fn ex44_upper_y_laplace(s: f64) -> f64 {
    if s >= SQRT3_M1 {
        (2.0 - s - s * s / 2.0).ln()
    } else {
        // −log(s + s²/2), written to keep precision for s ~ 1e−300
        -s.ln() - (s / 2.0).ln_1p()
    }
}

/// Leading-order approximation of y_L for large x_L on the given branch.
///
/// Documented working range x_L ≥ 3; the caller is responsible for staying in
/// it. For `Ex3_2` the `u_aux` value sharpens the approximation by its
/// log(2/u) offset when available.
pub fn asymptotic_y_laplace(
    id: ExampleId,
    x_l: f64,
    b_label: i32,
    u_aux: Option<f64>,
) -> Result<f64> {
    match (id, b_label) {
        (ExampleId::Ex2_3, 0) => Ok(LN2 + x_l),
        (ExampleId::Ex2_3, 1) => Ok(0.0),
        (ExampleId::Ex3_1, 1) => Ok(-0.5 * (-x_l).exp()),
        (ExampleId::Ex3_1, -1) => Ok(0.5 * (-x_l).exp()),
        (ExampleId::Ex3_2, b @ (1 | -1)) => {
            let mut mag = x_l - x_l.ln();
            if let Some(u) = u_aux {
                if !(0.0 < u && u < 1.0) {
                    return Err(CevmError::Domain(format!(
                        "Ex3_2 auxiliary uniform must lie in (0,1), got {u}"
                    )));
                }
                mag += (2.0 / u).ln();
            }
            Ok(f64::from(b) * mag)
        }
        (ExampleId::Ex4_2, 1) => Ok(LN2 + x_l),
        (ExampleId::Ex4_2, 0) => Ok(-LN2 - x_l),
        (ExampleId::Ex4_4, 1) => {
            let h = h1(x_l);
            Ok(x_l - h.ln() - 0.5 * (-x_l).exp() * h)
        }
        (ExampleId::Ex4_4, 2) => {
            let h = h2(x_l);
            Ok(0.5 * x_l - h.ln() - 0.5 * (-0.5 * x_l).exp() * h)
        }
        (ExampleId::Ex4_4, 4) => Ok(-LN2),
        (id, b) => Err(CevmError::Domain(format!(
            "no asymptotic form for ({id}, b={b})"
        ))),
    }
}

/// Laplace pairs for a whole sample, in input order.
pub fn to_laplace_pairs(id: ExampleId, samples: &[LabeledSample]) -> Result<Vec<(f64, f64)>> {
    samples
        .par_iter()
        .map(|s| to_laplace_pair(id, s))
        .collect()
}

/// (F_X(x), F_Y(y)) pairs through the exact marginals.
pub fn uniform_scale_exact(id: ExampleId, samples: &[LabeledSample]) -> Vec<(f64, f64)> {
    samples
        .iter()
        .map(|s| (marginal_cdf_x(id, s.x), marginal_cdf_y(id, s.y)))
        .collect()
}
