//! Implementations of the CLI subcommands.

use serde_json::json;

use cevm::examples::{
    self, marginal_cdf_x, marginal_cdf_y, sample, to_laplace_pairs, ExampleId, LabeledSample,
};
use cevm::fit::{fit_canonical, residual_diagnostics, FitConfig};
use cevm::limits::{
    self, chi_estimator, empirical_conditional, limit_law_for, mass_at_minus_infinity,
    norming_for, oscillation_diagnostic, reverse_conditional_ex44, sup_distance_off_atoms,
    uniform_scale_ranks, ConditionalLimit,
};
use cevm::margins::empirical_to_laplace;

use crate::config::{CliError, RunConfig};
use crate::output::{fmt_f64, write_json, OutFile};

const SAMPLES_HEADER: &str = "x,y,b,u,x_laplace,y_laplace";

fn write_samples_csv(
    cfg: &RunConfig,
    name: &str,
    samples: &[LabeledSample],
    lap: &[(f64, f64)],
) -> Result<(), CliError> {
    let mut file = OutFile::create(cfg, name)?;
    file.line(SAMPLES_HEADER)?;
    for (s, (x_l, y_l)) in samples.iter().zip(lap) {
        let u = s.u_aux.map(fmt_f64).unwrap_or_default();
        file.line(&format!(
            "{},{},{},{},{},{}",
            fmt_f64(s.x),
            fmt_f64(s.y),
            s.b_label,
            u,
            fmt_f64(*x_l),
            fmt_f64(*y_l),
        ))?;
    }
    file.finish()?;
    Ok(())
}

pub fn simulate(cfg: &RunConfig) -> Result<(), CliError> {
    let id = cfg.require_example()?;
    let samples = sample(id, cfg.n, cfg.seed)?;
    let lap = to_laplace_pairs(id, &samples)?;
    write_samples_csv(cfg, "samples.csv", &samples, &lap)?;
    println!(
        "simulate: wrote {} rows for {id} to {}/samples.csv",
        cfg.n, cfg.output_dir
    );
    Ok(())
}

pub fn transform(cfg: &RunConfig, input: Option<&str>) -> Result<(), CliError> {
    match input {
        Some(path) => {
            let xy = read_xy_csv(path)?;
            let xs: Vec<f64> = xy.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = xy.iter().map(|p| p.1).collect();
            let xl = empirical_to_laplace(&xs)?;
            let yl = empirical_to_laplace(&ys)?;
            let mut file = OutFile::create(cfg, "transformed.csv")?;
            file.line("x,y,x_laplace,y_laplace")?;
            for i in 0..xy.len() {
                file.line(&format!(
                    "{},{},{},{}",
                    fmt_f64(xs[i]),
                    fmt_f64(ys[i]),
                    fmt_f64(xl[i]),
                    fmt_f64(yl[i]),
                ))?;
            }
            file.finish()?;
            println!(
                "transform: rank-transformed {} rows to {}/transformed.csv",
                xy.len(),
                cfg.output_dir
            );
            Ok(())
        }
        None => {
            // exact transforms of a fresh simulation
            simulate(cfg)
        }
    }
}

pub fn verify(cfg: &RunConfig) -> Result<(), CliError> {
    let id = cfg.require_example()?;
    let samples = sample(id, cfg.n, cfg.seed)?;
    let lap = to_laplace_pairs(id, &samples)?;
    let norming = norming_for(id);
    let grid = cfg.z_grid_points();

    let mut csv = OutFile::create(cfg, "conditional_cdf.csv")?;
    csv.line("t,z,g_hat")?;

    let mut per_threshold = Vec::new();
    for &t in &cfg.thresholds {
        let ec = empirical_conditional(&lap, &norming, t, &grid)?;
        for (z, g) in ec.z_grid.iter().zip(&ec.g_hat) {
            csv.line(&format!("{},{},{}", fmt_f64(t), fmt_f64(*z), fmt_f64(*g)))?;
        }
        per_threshold.push(ec);
    }
    csv.finish()?;

    let escaping = mass_at_minus_infinity(&lap, &norming, &cfg.thresholds)?;
    let summary = match limit_law_for(id) {
        ConditionalLimit::Converges(law) => {
            let comparisons: Vec<_> = per_threshold
                .iter()
                .map(|ec| {
                    // keep clear of the in-transit mass headed to −∞ when the
                    // law has any, and of ±0.05 around finite atoms
                    let floor = if law.mass_at_neg_infinity() > 0.0 {
                        escaping.z_low.max(ec.threshold_t.mul_add(0.0, f64::NEG_INFINITY))
                    } else {
                        f64::NEG_INFINITY
                    };
                    json!({
                        "t": ec.threshold_t,
                        "n_exceed": ec.n_exceed,
                        "mass_below_grid": ec.mass_below_grid,
                        "mass_above_grid": ec.mass_above_grid,
                        "sup_distance_off_atoms": sup_distance_off_atoms(ec, &law, floor, 0.05),
                    })
                })
                .collect();
            json!({
                "example": id.name(),
                "limit": law,
                "non_convergent": false,
                "thresholds": comparisons,
                "mass_at_minus_infinity": escaping,
            })
        }
        ConditionalLimit::NonConvergent => {
            // non-convergence certificate: spread of ĝ at a fixed z across
            // thresholds
            let z_star = 0.0;
            let ghat_at: Vec<f64> = per_threshold
                .iter()
                .map(|ec| {
                    let idx = ec
                        .z_grid
                        .iter()
                        .position(|z| *z >= z_star)
                        .unwrap_or(ec.z_grid.len() - 1);
                    ec.g_hat[idx]
                })
                .collect();
            let min = ghat_at.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = ghat_at.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            json!({
                "example": id.name(),
                "non_convergent": true,
                "g_hat_at_z0_per_threshold": ghat_at,
                "g_hat_range_across_thresholds": max - min,
                "thresholds": per_threshold.iter().map(|ec| json!({
                    "t": ec.threshold_t,
                    "n_exceed": ec.n_exceed,
                    "mass_below_grid": ec.mass_below_grid,
                    "mass_above_grid": ec.mass_above_grid,
                })).collect::<Vec<_>>(),
                "mass_at_minus_infinity": escaping,
            })
        }
    };
    write_json(cfg, "verify_summary.json", &summary)?;
    println!(
        "verify: {} thresholds for {id} -> {}/conditional_cdf.csv, verify_summary.json",
        cfg.thresholds.len(),
        cfg.output_dir
    );
    Ok(())
}

/// Default Laplace-scale oscillation grid: 0.5 to 9 in steps of 0.25.
fn default_oscillation_grid() -> Vec<f64> {
    (2..=36).map(|k| k as f64 * 0.25).collect()
}

pub fn oscillation(cfg: &RunConfig) -> Result<(), CliError> {
    let id = cfg.example.unwrap_or(ExampleId::Ex4_4);
    if id != ExampleId::Ex4_4 {
        return Err(CliError::Config(format!(
            "example: oscillation diagnostics exist only for ex4_4, got {id}"
        )));
    }
    let samples = sample(id, cfg.n, cfg.seed)?;
    let lap = to_laplace_pairs(id, &samples)?;
    let labeled: Vec<(f64, i32)> = lap
        .iter()
        .zip(&samples)
        .map(|(p, s)| (p.0, s.b_label))
        .collect();

    let grid = if cfg.thresholds_explicit {
        cfg.thresholds.clone()
    } else {
        // trim the default grid to thresholds with enough exceedances
        default_oscillation_grid()
            .into_iter()
            .filter(|&t| {
                labeled.iter().filter(|(x_l, _)| *x_l > t).count()
                    >= limits::MIN_OSCILLATION_EXCEEDANCES
            })
            .collect()
    };
    if grid.is_empty() {
        return Err(CliError::Config(format!(
            "n: {} draws leave no threshold with {} exceedances",
            cfg.n,
            limits::MIN_OSCILLATION_EXCEEDANCES
        )));
    }

    let points = oscillation_diagnostic(&labeled, &grid)?;
    let mut file = OutFile::create(cfg, "oscillation.csv")?;
    file.line("t,empirical,theoretical")?;
    for p in &points {
        file.line(&format!(
            "{},{},{}",
            fmt_f64(p.t),
            fmt_f64(p.empirical),
            fmt_f64(p.theoretical),
        ))?;
    }
    file.finish()?;
    println!(
        "oscillation: {} thresholds -> {}/oscillation.csv",
        points.len(),
        cfg.output_dir
    );
    Ok(())
}

pub fn chi(cfg: &RunConfig, p: Option<f64>) -> Result<(), CliError> {
    let id = cfg.require_example()?;
    let p = p.unwrap_or(0.999);
    let samples = sample(id, cfg.n, cfg.seed)?;
    let xy: Vec<(f64, f64)> = samples.iter().map(|s| (s.x, s.y)).collect();
    let chi_rank = chi_estimator(&uniform_scale_ranks(&xy), p)?;
    let chi_exact = chi_estimator(&examples::uniform_scale_exact(id, &samples), p)?;
    let summary = json!({
        "example": id.name(),
        "p": p,
        "n": cfg.n,
        "chi_rank": chi_rank,
        "chi_exact_margins": chi_exact,
    });
    write_json(cfg, "chi.json", &summary)?;
    println!("chi({p}) on {id}: rank  {chi_rank:.6}, exact {chi_exact:.6}");
    Ok(())
}

pub fn fit(cfg: &RunConfig, quantile: Option<f64>, input: Option<&str>) -> Result<(), CliError> {
    let fit_cfg = FitConfig {
        threshold_quantile: quantile.unwrap_or(0.95),
        ..FitConfig::default()
    };
    let (lap, label) = match input {
        Some(path) => {
            let xy = read_xy_csv(path)?;
            let xs: Vec<f64> = xy.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = xy.iter().map(|p| p.1).collect();
            let xl = empirical_to_laplace(&xs)?;
            let yl = empirical_to_laplace(&ys)?;
            let lap: Vec<(f64, f64)> = xl.into_iter().zip(yl).collect();
            (lap, format!("file:{path}"))
        }
        None => {
            let id = cfg.require_example()?;
            let samples = sample(id, cfg.n, cfg.seed)?;
            (to_laplace_pairs(id, &samples)?, id.name().to_string())
        }
    };
    let result = fit_canonical(&lap, &fit_cfg)?;
    let report = residual_diagnostics(&result, &lap)?;

    let mut resid_csv = OutFile::create(cfg, "residuals.csv")?;
    resid_csv.line("residual")?;
    for r in &result.residuals {
        resid_csv.line(&fmt_f64(*r))?;
    }
    resid_csv.finish()?;

    write_json(cfg, "fit.json", &result)?;
    write_json(cfg, "misfit.json", &report)?;
    println!(
        "fit[{label}]: alpha={:.4} beta={:.4} sigma={:.4} n_exceed={} -> {}/fit.json",
        result.alpha, result.beta, result.sigma, result.n_exceed, cfg.output_dir
    );
    Ok(())
}

pub fn report(cfg: &RunConfig) -> Result<(), CliError> {
    let id = cfg.require_example()?;

    // scatter data at the configured n (figure-scale by default)
    let samples = sample(id, cfg.n, cfg.seed)?;
    let lap = to_laplace_pairs(id, &samples)?;
    write_samples_csv(cfg, "samples.csv", &samples, &lap)?;

    // convergence table at diagnostic scale
    let verify_cfg = RunConfig {
        command: cfg.command.clone(),
        n: cfg.n.max(200_000),
        ..cfg.clone()
    };
    verify(&verify_cfg)?;

    let mut artifacts = vec![
        "samples.csv",
        "conditional_cdf.csv",
        "verify_summary.json",
        "fit.json",
        "misfit.json",
        "residuals.csv",
    ];

    // oscillation curves and the reverse conditional exist only for ex4_4
    if id == ExampleId::Ex4_4 {
        let osc_cfg = RunConfig {
            n: cfg.n.max(1_000_000),
            thresholds_explicit: false,
            ..cfg.clone()
        };
        oscillation(&osc_cfg)?;
        artifacts.push("oscillation.csv");

        let big = sample(id, cfg.n.max(1_000_000), cfg.seed)?;
        let big_lap = to_laplace_pairs(id, &big)?;
        let rc = reverse_conditional_ex44(&big_lap, 5.5, &[-2.0, -1.5, -0.5, 0.0, 1.0])?;
        write_json(cfg, "reverse_conditional.json", &rc)?;
        artifacts.push("reverse_conditional.json");
    }

    // canonical fit summary at diagnostic scale
    let fit_cfg = RunConfig {
        n: cfg.n.max(100_000),
        ..cfg.clone()
    };
    fit(&fit_cfg, None, None)?;

    // marginal check table: empirical vs closed form on a grid
    let check = sample(id, cfg.n.max(100_000), cfg.seed.wrapping_add(1))?;
    let mut marg = OutFile::create(cfg, "marginals.csv")?;
    marg.line("coord,value,empirical_cdf,exact_cdf")?;
    for (coord, values, exact) in [
        (
            "x",
            check.iter().map(|s| s.x).collect::<Vec<f64>>(),
            Box::new(move |v: f64| marginal_cdf_x(id, v)) as Box<dyn Fn(f64) -> f64>,
        ),
        (
            "y",
            check.iter().map(|s| s.y).collect::<Vec<f64>>(),
            Box::new(move |v: f64| marginal_cdf_y(id, v)),
        ),
    ] {
        let mut sorted = values.clone();
        sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
        let m = sorted.len();
        for k in 1..=63 {
            let v = sorted[(k * m) / 64];
            let emp = sorted.partition_point(|s| *s <= v) as f64 / m as f64;
            marg.line(&format!(
                "{coord},{},{},{}",
                fmt_f64(v),
                fmt_f64(emp),
                fmt_f64(exact(v)),
            ))?;
        }
    }
    marg.finish()?;
    artifacts.push("marginals.csv");

    write_json(cfg, "index.json", &json!({ "example": id.name(), "artifacts": artifacts }))?;
    println!("report: wrote {} artifacts to {}", artifacts.len() + 1, cfg.output_dir);
    Ok(())
}

/// Two-column numeric CSV (x,y); `#` comments and a header row are skipped.
fn read_xy_csv(path: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("input: cannot read {path}: {e}")))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let a = parts.next().map(str::trim);
        let b = parts.next().map(str::trim);
        match (a, b) {
            (Some(a), Some(b)) => match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(x), Ok(y)) => out.push((x, y)),
                _ if out.is_empty() => continue, // header row
                _ => {
                    return Err(CliError::Config(format!(
                        "input: {path}:{}: not a numeric x,y row: {line:?}",
                        lineno + 1
                    )))
                }
            },
            _ => {
                return Err(CliError::Config(format!(
                    "input: {path}:{}: expected two comma-separated columns",
                    lineno + 1
                )))
            }
        }
    }
    if out.len() < 2 {
        return Err(CliError::Config(format!(
            "input: {path} holds fewer than 2 numeric rows"
        )));
    }
    Ok(out)
}
