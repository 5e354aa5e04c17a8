//! Minimal bounded Nelder–Mead simplex search.
//!
//! Proposed vertices are clamped into the box, which keeps every iterate
//! feasible; adequate for the smooth low-dimensional objectives used here.

/// Search options.
#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    pub f_tol: f64,
    pub x_tol: f64,
    pub max_iter: usize,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            f_tol: 1e-10,
            x_tol: 1e-8,
            max_iter: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn clamp(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, lo), hi) in x.iter_mut().zip(lower).zip(upper) {
        *v = v.clamp(*lo, *hi);
    }
}

/// Minimize `f` over the box [lower, upper] starting from `x0` with the
/// given initial step per coordinate.
pub fn minimize<F: Fn(&[f64]) -> f64>(
    f: F,
    x0: &[f64],
    step: &[f64],
    lower: &[f64],
    upper: &[f64],
    opts: NmOptions,
) -> NmResult {
    let dim = x0.len();
    assert!(dim >= 1);
    assert_eq!(step.len(), dim);
    assert_eq!(lower.len(), dim);
    assert_eq!(upper.len(), dim);

    // initial simplex: x0 plus one step along each axis (flipped if it
    // would leave the box degenerate against a bound)
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
    let mut p0 = x0.to_vec();
    clamp(&mut p0, lower, upper);
    pts.push(p0.clone());
    for i in 0..dim {
        let mut p = p0.clone();
        let trial = p[i] + step[i];
        p[i] = if trial > upper[i] { p[i] - step[i] } else { trial };
        clamp(&mut p, lower, upper);
        if (p[i] - p0[i]).abs() < 1e-12 {
            p[i] = 0.5 * (lower[i] + upper[i]);
        }
        pts.push(p);
    }
    let mut fs: Vec<f64> = pts.iter().map(|p| f(p)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        iterations += 1;
        // order best → worst
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| fs[a].partial_cmp(&fs[b]).expect("NaN objective"));
        let best = order[0];
        let worst = order[dim];
        let second_worst = order[dim - 1];

        let spread_f = fs[worst] - fs[best];
        let spread_x = (0..dim)
            .map(|i| {
                pts.iter().map(|p| p[i]).fold(f64::NEG_INFINITY, f64::max)
                    - pts.iter().map(|p| p[i]).fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max);
        if spread_f <= opts.f_tol * (1.0 + fs[best].abs()) && spread_x <= opts.x_tol {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; dim];
        for (k, p) in pts.iter().enumerate() {
            if k == worst {
                continue;
            }
            for i in 0..dim {
                centroid[i] += p[i] / dim as f64;
            }
        }

        let mut reflect = vec![0.0; dim];
        for i in 0..dim {
            reflect[i] = centroid[i] + alpha * (centroid[i] - pts[worst][i]);
        }
        clamp(&mut reflect, lower, upper);
        let f_reflect = f(&reflect);

        if f_reflect < fs[best] {
            let mut expand = vec![0.0; dim];
            for i in 0..dim {
                expand[i] = centroid[i] + gamma * (reflect[i] - centroid[i]);
            }
            clamp(&mut expand, lower, upper);
            let f_expand = f(&expand);
            if f_expand < f_reflect {
                pts[worst] = expand;
                fs[worst] = f_expand;
            } else {
                pts[worst] = reflect;
                fs[worst] = f_reflect;
            }
        } else if f_reflect < fs[second_worst] {
            pts[worst] = reflect;
            fs[worst] = f_reflect;
        } else {
            let mut contract = vec![0.0; dim];
            let outside = f_reflect < fs[worst];
            let toward: Vec<f64> = if outside { reflect.clone() } else { pts[worst].clone() };
            let f_toward = if outside { f_reflect } else { fs[worst] };
            for i in 0..dim {
                contract[i] = centroid[i] + rho * (toward[i] - centroid[i]);
            }
            clamp(&mut contract, lower, upper);
            let f_contract = f(&contract);
            if f_contract < f_toward {
                pts[worst] = contract;
                fs[worst] = f_contract;
            } else {
                // shrink toward the best vertex
                let best_pt = pts[best].clone();
                for (k, p) in pts.iter_mut().enumerate() {
                    if k == best {
                        continue;
                    }
                    for i in 0..dim {
                        p[i] = best_pt[i] + sigma * (p[i] - best_pt[i]);
                    }
                    clamp(p, lower, upper);
                    fs[k] = f(p);
                }
            }
        }
    }

    let mut best = 0;
    for k in 1..=dim {
        if fs[k] < fs[best] {
            best = k;
        }
    }
    NmResult {
        x: pts[best].clone(),
        fx: fs[best],
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.7).powi(2);
        let r = minimize(
            f,
            &[0.9, 0.9],
            &[0.5, 0.5],
            &[-1.0, -1.0],
            &[1.0, 1.0],
            NmOptions::default(),
        );
        assert!(r.converged);
        assert!((r.x[0] - 0.3).abs() < 1e-6, "{:?}", r.x);
        assert!((r.x[1] + 0.7).abs() < 1e-6, "{:?}", r.x);
    }

    #[test]
    fn respects_bounds_when_minimum_is_outside() {
        // unconstrained minimum at x = −3; box forces x = 2
        let f = |x: &[f64]| (x[0] + 3.0).powi(2);
        let r = minimize(f, &[4.0], &[1.0], &[2.0], &[5.0], NmOptions::default());
        assert!((r.x[0] - 2.0).abs() < 1e-6, "{:?}", r.x);
        assert!(r.x[0] >= 2.0);
    }

    #[test]
    fn handles_banana_valley() {
        let f = |x: &[f64]| {
            100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
        };
        let r = minimize(
            f,
            &[-1.2, 1.0],
            &[0.5, 0.5],
            &[-5.0, -5.0],
            &[5.0, 5.0],
            NmOptions {
                max_iter: 4000,
                ..NmOptions::default()
            },
        );
        assert!((r.x[0] - 1.0).abs() < 1e-4 && (r.x[1] - 1.0).abs() < 1e-4, "{:?}", r.x);
    }
}
