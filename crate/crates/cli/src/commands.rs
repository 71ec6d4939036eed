use std::fs::File;
use std::path::Path;

use biharm_core::asymptotics::{check_bounds, default_window, fit_tail, monotonicity_report, TailComponent};
use biharm_core::identities::{energy, pde_residual, pohozaev_check};
use biharm_core::io::{read_profile_csv, write_profile_csv, write_transformed_csv, write_tw_csv};
use biharm_core::radial_ode::{liouville_scan_with_tol, shoot_navier_ball_with, OutcomeKind};
use biharm_core::variational::{minimize_rayleigh_with, DescentOptions};
use biharm_core::{
    bootstrap_sequences, classify_regime, derive_exponents, first_eigenpair, linearization_spectrum,
    pohozaev_coefficient, to_transformed, ChartKind, Grid1D, Origin, ProblemParams, RadialProfile,
};
use serde_json::{json, Value};

use crate::config::{RunConfig, Settings};
use crate::error::CliError;
use crate::output::OutDir;

/// Headline results of one command and a one-line human summary.
pub struct CommandResult {
    pub results: Value,
    pub headline: String,
}

fn to_json<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn io_err(e: biharm_core::Error) -> CliError {
    CliError::from(e)
}

pub fn execute(cfg: &RunConfig, out: &mut OutDir, jobs: Option<usize>) -> Result<CommandResult, CliError> {
    let params = &cfg.params;
    match &cfg.settings {
        Settings::Exponents { k_max } => exponents(cfg, *k_max),
        Settings::Shoot { radius, .. } => {
            let opts = cfg.shoot_options().expect("shoot settings");
            let sol = shoot_navier_ball_with(params, *radius, &opts)?;
            out.write("profile.csv", |w| write_profile_csv(&sol.profile, w).map_err(io_err))?;
            let tp = to_transformed(&sol.profile, ChartKind::Interior)?;
            out.write("transformed.csv", |w| write_transformed_csv(&tp, w).map_err(io_err))?;
            out.write("sweep.csv", |w| {
                writeln!(w, "b,rho_u,rho_v")?;
                for (b, ru, rv) in &sol.sweep {
                    writeln!(w, "{},{},{}", fmt(*b), fmt(*ru), fmt(*rv))?;
                }
                Ok(())
            })?;
            let poh = pohozaev_check(params, &sol.profile, *radius)?;
            let en = energy(params, &sol.profile, *radius)?;
            let res = pde_residual(params, &sol.profile)?;
            Ok(CommandResult {
                headline: format!(
                    "shoot: b* = {:.10e}, u(0) = {:.10e}, Pohozaev relative residual {:.3e}",
                    sol.shooting_parameter, sol.center_values.0, poh.relative_residual
                ),
                results: json!({
                    "shooting_parameter": sol.shooting_parameter,
                    "center_values": [sol.center_values.0, sol.center_values.1],
                    "boundary_residuals": [sol.residuals.0, sol.residuals.1],
                    "rho": sol.rho,
                    "scale": sol.scale,
                    "nodes": sol.profile.len(),
                    "pohozaev": to_json(&poh),
                    "energy": to_json(&en),
                    "pde_residual": res,
                }),
            })
        }
        Settings::Scan {
            p_grid,
            b_grid,
            r_max,
            tol,
        } => {
            let scan = || liouville_scan_with_tol(params, p_grid, b_grid, *r_max, *tol);
            let report = match jobs {
                Some(n) => rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| CliError::Validation(format!("--jobs {n}: {e}")))?
                    .install(scan)?,
                None => scan()?,
            };
            out.write("scan.csv", |w| report.write_csv(w).map_err(io_err))?;
            let count = |k: OutcomeKind| report.entries.iter().filter(|e| e.outcome == k).count();
            let positive = count(OutcomeKind::PositiveOnWindow);
            Ok(CommandResult {
                headline: format!(
                    "scan: {} trajectories, {} positive on window, threshold violation: {}",
                    report.entries.len(),
                    positive,
                    report.threshold_violation
                ),
                results: json!({
                    "trajectories": report.entries.len(),
                    "counts": {
                        "PositiveOnWindow": positive,
                        "UCrossedZero": count(OutcomeKind::UCrossedZero),
                        "VCrossedZero": count(OutcomeKind::VCrossedZero),
                        "BlowUp": count(OutcomeKind::BlowUp),
                    },
                    "fraction_positive": report.fraction_positive,
                    "positive_below_threshold": report.positive_below_threshold,
                    "threshold_violation": report.threshold_violation,
                }),
            })
        }
        Settings::Minimize {
            radius,
            q,
            nodes,
            max_iterations,
            tol,
        } => {
            let grid = Grid1D::for_ball(params, *radius, *nodes)?;
            let opts = DescentOptions {
                max_iterations: *max_iterations,
                rel_decrease: *tol,
                ..DescentOptions::default()
            };
            let res = minimize_rayleigh_with(params, &grid, *q, &opts)?;
            out.write("minimizer.csv", |w| {
                write_tw_csv(&res.minimizer.t, &res.minimizer.w, w).map_err(io_err)
            })?;
            let mut headline = format!("minimize: value {:.10e} after {} iterations", res.value, res.iterations);
            if let Some(warn) = &res.warning {
                headline.push_str(&format!(" (warning: {warn})"));
            }
            Ok(CommandResult {
                headline,
                results: json!({
                    "value": res.value,
                    "q": res.q,
                    "iterations": res.iterations,
                    "grid": to_json(&res.grid),
                    "warning": res.warning,
                }),
            })
        }
        Settings::Eigen { radius, nodes } => {
            let grid = Grid1D::for_ball(params, *radius, *nodes)?;
            let res = first_eigenpair(params, &grid)?;
            out.write("eigenfunction.csv", |w| {
                write_tw_csv(&res.eigenfunction.t, &res.eigenfunction.w, w).map_err(io_err)
            })?;
            Ok(CommandResult {
                headline: format!("eigen: lambda1 = {:.10e}, residual {:.3e}", res.lambda1, res.residual),
                results: json!({
                    "lambda1": res.lambda1,
                    "residual": res.residual,
                    "raw_residual": res.raw_residual,
                    "rayleigh_quotient": res.rayleigh_quotient,
                    "iterations": res.iterations,
                    "grid": to_json(&res.grid),
                }),
            })
        }
        Settings::Pohozaev { profile, radius } => {
            let prof = load_profile(params, profile)?;
            let radius = radius.unwrap_or_else(|| prof.r_max());
            let poh = pohozaev_check(params, &prof, radius)?;
            let en = energy(params, &prof, radius)?;
            let res = pde_residual(params, &prof)?;
            let report = json!({
                "pohozaev": to_json(&poh),
                "energy": to_json(&en),
                "pde_residual": res,
            });
            out.write_json("pohozaev.json", &report)?;
            Ok(CommandResult {
                headline: format!(
                    "pohozaev: relative residual {:.3e} at R = {}",
                    poh.relative_residual, radius
                ),
                results: report,
            })
        }
        Settings::Asymptotics { profile, window } => {
            let prof = load_profile(params, profile)?;
            let tp = to_transformed(&prof, ChartKind::Interior)?;
            let window = window.map_or_else(|| default_window(&tp), |[a, b]| (a, b));
            let fw = fit_tail(&tp, TailComponent::W, window)?;
            let fz = fit_tail(&tp, TailComponent::Z, window)?;
            out.write("transformed.csv", |w| write_transformed_csv(&tp, w).map_err(io_err))?;
            let bounds = check_bounds(params, &prof);
            let mono = monotonicity_report(params, &prof)?;
            Ok(CommandResult {
                headline: format!("asymptotics: w rate {:.6}, z rate {:.6}", fw.rate, fz.rate),
                results: json!({
                    "expected_rates": {
                        "w": params.interior_w_exponent(),
                        "z": params.interior_z_exponent(),
                    },
                    "fit_w": to_json(&fw),
                    "fit_z": to_json(&fz),
                    "bounds": to_json(&bounds),
                    "monotonicity": to_json(&mono),
                }),
            })
        }
    }
}

fn exponents(cfg: &RunConfig, k_max: usize) -> Result<CommandResult, CliError> {
    let params = &cfg.params;
    let spectrum = linearization_spectrum(params)?;
    let mut results = json!({
        "p_s": params.p_s(),
        "linearization_eigenvalues": spectrum.eigenvalues,
    });
    let mut headline = format!("exponents: p_s = {:.16}", params.p_s());
    if cfg.p_given {
        let derived = derive_exponents(params)?;
        results["regime"] = to_json(&classify_regime(params)?);
        results["pohozaev_coefficient"] = pohozaev_coefficient(params)?.into();
        results["bootstrap"] = to_json(&bootstrap_sequences(params, k_max)?);
        headline.push_str(&format!(", p_* = {:.16}", derived.p_star));
    }
    Ok(CommandResult { results, headline })
}

fn load_profile(params: &ProblemParams, path: &Path) -> Result<RadialProfile, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("cannot open {}: {e}", path.display())))?;
    Ok(read_profile_csv(file, *params, Origin::Bvp)?)
}

fn fmt(x: f64) -> String {
    biharm_core::io::fmt_f64(x)
}
