//! The five subcommands, as library functions so tests can call them
//! directly.

use std::path::{Path, PathBuf};

use serde_json::json;

use sturmtrace::basis::Density;
use sturmtrace::forward::{add_noise, solve_forward, CollocationConfig, Provenance, Spectrum};
use sturmtrace::inversion::{condition_study, loglog_slope, multistep, ReconstructionResult};
use sturmtrace::traces::{choose_scale, trace_targets};

use crate::config::ExperimentConfig;
use crate::io::{atomic_write, fmt_f64};
use crate::CliError;

/// Number of sample points in density.csv and the noise-sweep error norm.
const DENSITY_GRID: usize = 512;

fn collocation(cfg: &ExperimentConfig) -> CollocationConfig {
    CollocationConfig {
        intervals: cfg.collocation_points,
        bc: cfg.bc,
        reliable_fraction: cfg.reliable_fraction,
    }
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    atomic_write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// The data spectrum: a file if configured, otherwise a fresh forward solve.
fn resolve_spectrum(
    cfg: &ExperimentConfig,
    spectrum_flag: Option<&Path>,
) -> Result<Spectrum, CliError> {
    let path = spectrum_flag
        .map(Path::to_path_buf)
        .or_else(|| cfg.spectrum_file.clone());
    match path {
        Some(path) => read_spectrum(&path),
        None => {
            let density = cfg.density.density()?;
            Ok(solve_forward(&density, &collocation(cfg))?)
        }
    }
}

/// Parse a spectrum.csv file (header `k,lambda`).
pub fn read_spectrum(path: &Path) -> Result<Spectrum, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut lines = text.lines();
    match lines.next() {
        Some("k,lambda") => {}
        other => {
            return Err(CliError::usage(format!(
                "{}: expected header 'k,lambda', got {:?}",
                path.display(),
                other.unwrap_or("")
            )))
        }
    }
    let mut lambdas = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let Some((_, lambda)) = line.split_once(',') else {
            return Err(CliError::usage(format!(
                "{}: row {} is not 'k,lambda'",
                path.display(),
                idx + 2
            )));
        };
        let value: f64 = lambda.trim().parse().map_err(|_| {
            CliError::usage(format!(
                "{}: row {} has a malformed eigenvalue '{lambda}'",
                path.display(),
                idx + 2
            ))
        })?;
        lambdas.push(value);
    }
    let count = lambdas.len();
    Ok(Spectrum::new(lambdas, Provenance::Collocation, count)?)
}

/// `forward`: generate synthetic eigenvalues and write the reliable portion.
pub fn cmd_forward(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    let density = cfg.density.density()?;
    let spectrum = solve_forward(&density, &collocation(cfg))?;
    let mut csv = String::from("k,lambda\n");
    for (k, lambda) in spectrum.reliable().iter().enumerate() {
        csv.push_str(&format!("{},{}\n", k + 1, fmt_f64(*lambda)));
    }
    let path = out.join("spectrum.csv");
    write(&path, &csv)?;
    println!(
        "wrote {} ({} reliable of {} computed eigenvalues)",
        path.display(),
        spectrum.reliable_count,
        spectrum.len()
    );
    Ok(())
}

/// `traces`: build the Chebyshev trace targets for the final-stage
/// parameters and write them with their summary.
pub fn cmd_traces(
    cfg: &ExperimentConfig,
    out: &Path,
    spectrum_flag: Option<&Path>,
) -> Result<(), CliError> {
    let spectrum = resolve_spectrum(cfg, spectrum_flag)?;
    let target = cfg.target()?;
    let scale = choose_scale(&spectrum, target.theta);
    let degrees = target.degrees();
    let targets = trace_targets(
        &spectrum,
        &degrees,
        target.measured,
        target.tail_total(),
        scale,
    )?;
    let mut csv = String::from("n,r_true\n");
    for (slot, &degree) in targets.degrees.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", degree, fmt_f64(targets.values[slot])));
    }
    write(&out.join("traces.csv"), &csv)?;
    let summary = json!({
        "t": targets.scale,
        "L_tilde": targets.l_tilde,
        "K": targets.measured,
        "K1": targets.tail_total,
        "N": target.degree,
    });
    write(
        &out.join("traces_summary.json"),
        &format!("{:#}\n", summary),
    )?;
    println!(
        "wrote {} and traces_summary.json",
        out.join("traces.csv").display()
    );
    Ok(())
}

/// `invert`: run the (multistep) reconstruction and write result files.
pub fn cmd_invert(
    cfg: &ExperimentConfig,
    out: &Path,
    spectrum_flag: Option<&Path>,
) -> Result<(), CliError> {
    let spectrum = resolve_spectrum(cfg, spectrum_flag)?;
    let result = run_reconstruction(cfg, &spectrum)?;
    if result.density_nonpositive {
        eprintln!("warning: reconstructed density is nonpositive somewhere on the grid");
    }

    write(&out.join("result.json"), &result_json(cfg, &result))?;
    write(
        &out.join("density.csv"),
        &density_csv(cfg, &result.density)?,
    )?;

    let mut residuals = String::from("iter,residual_norm\n");
    for (iter, norm) in result.residual_history.iter().enumerate() {
        residuals.push_str(&format!("{iter},{}\n", fmt_f64(*norm)));
    }
    write(&out.join("residuals.csv"), &residuals)?;

    if cfg.eigenvalue_check {
        let recon_spectrum = solve_forward(&result.density, &collocation(cfg))?;
        let measured = cfg.measured()?;
        let mut csv = String::from("k,lambda_data,lambda_recon,mismatch\n");
        for k in 0..measured.min(recon_spectrum.len()).min(spectrum.len()) {
            let data = spectrum.lambdas()[k];
            let recon = recon_spectrum.lambdas()[k];
            csv.push_str(&format!(
                "{},{},{},{}\n",
                k + 1,
                fmt_f64(data),
                fmt_f64(recon),
                fmt_f64(data - recon)
            ));
        }
        write(&out.join("eigs_compare.csv"), &csv)?;
    }
    println!(
        "wrote {} (converged={}, {} iterations)",
        out.join("result.json").display(),
        result.converged,
        result.iterations
    );
    Ok(())
}

/// `condnum`: condition numbers of the trace Jacobian at the unit density.
pub fn cmd_condnum(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    if cfg.cond_max_basis < 2 {
        return Err(CliError::usage(
            "invalid value for 'cond_max_basis': need at least 2".into(),
        ));
    }
    let degree = cfg.cheb_degree.unwrap_or(1000);
    let truncation = cfg.truncation.unwrap_or(30);
    let scale = cfg.theta * cfg.bc.laplacian_eigenvalue(1);
    let study = condition_study(cfg.cond_max_basis, degree, truncation, scale, cfg.bc)?;
    let mut csv = String::from("M,cond\n");
    for &(m, cond) in &study {
        csv.push_str(&format!("{m},{}\n", fmt_f64(cond)));
    }
    write(&out.join("condnum.csv"), &csv)?;
    let slope = loglog_slope(&study);
    let summary = json!({
        "max_basis": cfg.cond_max_basis,
        "degree": degree,
        "truncation": truncation,
        "loglog_slope": slope,
    });
    write(
        &out.join("condnum_summary.json"),
        &format!("{:#}\n", summary),
    )?;
    println!(
        "wrote {} (log-log slope {slope:.3})",
        out.join("condnum.csv").display()
    );
    Ok(())
}

/// `noise-sweep`: one reconstruction per (sigma, seed) pair against the
/// named preset truth. Individual failures become rows, not exit codes.
pub fn cmd_noise_sweep(cfg: &ExperimentConfig, out: &Path) -> Result<(), CliError> {
    if !cfg.density.is_preset() {
        return Err(CliError::usage(
            "noise-sweep requires 'density' to name a preset (rho1..rho4 or constant)".into(),
        ));
    }
    let truth = cfg.density.density()?;
    let data = resolve_spectrum(cfg, None)?;
    let mut csv = String::from("sigma,seed,linf_error,converged\n");
    for &sigma in &cfg.noise_sigmas {
        for &seed in &cfg.seeds {
            let row = add_noise(&data, sigma, seed)
                .map_err(CliError::Numeric)
                .and_then(|noisy| run_reconstruction(cfg, &noisy));
            match row {
                Ok(result) => {
                    let error = linf_between(&result.density, &truth);
                    csv.push_str(&format!(
                        "{},{seed},{},true\n",
                        fmt_f64(sigma),
                        fmt_f64(error)
                    ));
                }
                Err(_) => {
                    csv.push_str(&format!("{},{seed},nan,false\n", fmt_f64(sigma)));
                }
            }
        }
    }
    let path = out.join("noise_sweep.csv");
    write(&path, &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn run_reconstruction(
    cfg: &ExperimentConfig,
    spectrum: &Spectrum,
) -> Result<ReconstructionResult, CliError> {
    let schedule = cfg.schedule()?;
    let target = cfg.target()?;
    for warning in target.validate()? {
        eprintln!("warning: {warning}");
    }
    // Reconstruction always happens in the cosine basis; the density spec
    // only fixes the truth and the forward solve.
    let basis = sturmtrace::basis::BasisSpec::FourierCosine {
        size: target.basis_size,
    };
    let initial = match &cfg.initial_guess {
        Some(coeffs) => {
            let stage1 = &schedule[0];
            if coeffs.len() > stage1.basis_size {
                return Err(CliError::usage(format!(
                    "invalid value for 'initial_guess': {} coefficients exceed the first \
                     stage's basis size {}",
                    coeffs.len(),
                    stage1.basis_size
                )));
            }
            let mut padded = coeffs.clone();
            padded.resize(stage1.basis_size, 0.0);
            Some(
                Density::new(
                    sturmtrace::basis::BasisSpec::FourierCosine {
                        size: stage1.basis_size,
                    },
                    padded,
                )
                .map_err(CliError::Numeric)?,
            )
        }
        None => None,
    };
    Ok(multistep(
        &schedule,
        spectrum,
        cfg.bc,
        &basis,
        initial.as_ref(),
    )?)
}

fn result_json(cfg: &ExperimentConfig, result: &ReconstructionResult) -> String {
    let stage_log: Vec<_> = result
        .stage_log
        .iter()
        .map(|s| {
            json!({
                "stage": s.stage,
                "K": s.measured,
                "M": s.basis_size,
                "J": s.truncation,
                "N": s.degree,
                "K1": s.tail_total,
                "iterations": s.iterations,
                "converged": s.converged,
                "final_residual_norm": s.final_residual_norm,
            })
        })
        .collect();
    let value = json!({
        "coefficients": result.density.coeffs(),
        "converged": result.converged,
        "iterations": result.iterations,
        "final_residual_norm": result.stage_log.last().map(|s| s.final_residual_norm),
        "L_tilde": result.l_tilde,
        "t": result.scale,
        "density_nonpositive": result.density_nonpositive,
        "stage_log": stage_log,
        "density_spec": format!("{:?}", cfg.density),
    });
    format!("{:#}\n", value)
}

fn density_csv(cfg: &ExperimentConfig, recon: &Density) -> Result<String, CliError> {
    let with_truth = cfg.density.is_preset();
    let truth = if with_truth {
        Some(cfg.density.density()?)
    } else {
        None
    };
    let mut csv = String::from(if with_truth {
        "x,rho_true,rho_recon\n"
    } else {
        "x,rho_recon\n"
    });
    for i in 0..DENSITY_GRID {
        let x = i as f64 / (DENSITY_GRID - 1) as f64;
        match &truth {
            Some(t) => csv.push_str(&format!(
                "{},{},{}\n",
                fmt_f64(x),
                fmt_f64(t.eval(x)),
                fmt_f64(recon.eval(x))
            )),
            None => csv.push_str(&format!("{},{}\n", fmt_f64(x), fmt_f64(recon.eval(x)))),
        }
    }
    Ok(csv)
}

fn linf_between(a: &Density, b: &Density) -> f64 {
    (0..DENSITY_GRID)
        .map(|i| {
            let x = i as f64 / (DENSITY_GRID - 1) as f64;
            (a.eval(x) - b.eval(x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Resolve the output directory: the --out flag wins over the config key.
pub fn output_dir(cfg: &ExperimentConfig, out_flag: Option<&Path>) -> PathBuf {
    out_flag
        .map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.output_dir.clone())
}
