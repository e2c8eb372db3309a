//! Flat key-value experiment configuration with `[stage]` sections.
//!
//! Keys are documented in the README. Unknown keys and malformed values are
//! reported by name.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::Arc;

use sturmtrace::basis::{BasisFn, BasisSpec, BoundaryCondition, Density};
use sturmtrace::inversion::{default_schedule, InversionConfig};
use sturmtrace::presets;

use crate::CliError;

/// How the density is specified in the config file.
#[derive(Debug, Clone)]
pub enum DensitySpec {
    /// rho1..rho4.
    Preset(String),
    Constant(f64),
    /// Cosine coefficients.
    Coeffs(Vec<f64>),
    /// Piecewise-constant table: values between consecutive breakpoints.
    Piecewise {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
}

impl DensitySpec {
    /// Instantiate the density. Every form has a pointwise truth.
    pub fn density(&self) -> Result<Density, CliError> {
        match self {
            DensitySpec::Preset(name) => presets::by_name(name)
                .ok_or_else(|| CliError::usage(format!("density: unknown preset '{name}'"))),
            DensitySpec::Constant(c) => {
                if *c <= 0.0 {
                    return Err(CliError::usage("density: constant must be positive".into()));
                }
                Ok(presets::constant(*c))
            }
            DensitySpec::Coeffs(coeffs) => Density::new(
                BasisSpec::FourierCosine { size: coeffs.len() },
                coeffs.clone(),
            )
            .map_err(CliError::Numeric),
            DensitySpec::Piecewise {
                breakpoints,
                values,
            } => {
                let (bp, vals) = (breakpoints.clone(), values.clone());
                let f: BasisFn = Arc::new(move |x: f64| {
                    let mut idx = 0;
                    // Left limits at the jump locations.
                    while idx < bp.len() && x > bp[idx] {
                        idx += 1;
                    }
                    vals[idx]
                });
                let basis =
                    BasisSpec::custom(vec![f], breakpoints.clone()).map_err(CliError::Numeric)?;
                Density::new(basis, vec![1.0]).map_err(CliError::Numeric)
            }
        }
    }

    /// True when the density is a named preset (including constants); only
    /// those get a rho_true column in density.csv.
    pub fn is_preset(&self) -> bool {
        matches!(self, DensitySpec::Preset(_) | DensitySpec::Constant(_))
    }
}

/// Per-stage overrides of the final-stage parameters.
#[derive(Debug, Clone, Default)]
pub struct StageOverride {
    pub eigenvalues: Option<usize>,
    pub basis_size: Option<usize>,
    pub truncation: Option<usize>,
    pub cheb_degree: Option<usize>,
    pub tail_total: Option<usize>,
}

/// Parsed experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub density: DensitySpec,
    pub bc: BoundaryCondition,
    pub collocation_points: usize,
    pub reliable_fraction: f64,
    pub eigenvalues: Option<usize>,
    pub basis_size: Option<usize>,
    pub truncation: Option<usize>,
    pub cheb_degree: Option<usize>,
    pub tail_total: Option<usize>,
    pub theta: f64,
    pub max_iter: usize,
    pub tol_factor: f64,
    pub svd_cutoff: f64,
    pub max_halvings: usize,
    pub cheb_indices: Option<Vec<usize>>,
    pub multistep_auto: bool,
    pub initial_guess: Option<Vec<f64>>,
    pub spectrum_file: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub noise_sigmas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub cond_max_basis: usize,
    pub eigenvalue_check: bool,
    pub stages: Vec<StageOverride>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            density: DensitySpec::Constant(1.0),
            bc: BoundaryCondition::Dirichlet,
            collocation_points: 200,
            reliable_fraction: 0.4,
            eigenvalues: None,
            basis_size: None,
            truncation: None,
            cheb_degree: None,
            tail_total: None,
            theta: 0.95,
            max_iter: 100,
            tol_factor: 1e-5,
            svd_cutoff: 1e-12,
            max_halvings: 10,
            cheb_indices: None,
            multistep_auto: true,
            initial_guess: None,
            spectrum_file: None,
            output_dir: PathBuf::from("out"),
            noise_sigmas: vec![0.0, 0.05, 0.1],
            seeds: vec![1, 2, 3, 4, 5],
            cond_max_basis: 10,
            eigenvalue_check: false,
            stages: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = ExperimentConfig::default();
        let mut in_stage = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == "[stage]" {
                cfg.stages.push(StageOverride::default());
                in_stage = true;
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "line {}: expected 'key = value', got '{line}'",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if in_stage {
                let stage = cfg.stages.last_mut().expect("inside a stage section");
                match key {
                    "eigenvalues" => stage.eigenvalues = Some(parse_num(key, value)?),
                    "basis_size" => stage.basis_size = Some(parse_num(key, value)?),
                    "truncation" => stage.truncation = Some(parse_num(key, value)?),
                    "cheb_degree" => stage.cheb_degree = Some(parse_num(key, value)?),
                    "tail_total" => stage.tail_total = Some(parse_num(key, value)?),
                    _ => {
                        return Err(CliError::usage(format!(
                            "unknown key '{key}' in [stage] section"
                        )))
                    }
                }
                continue;
            }
            match key {
                "density" => cfg.density = parse_density(value)?,
                "bc" => {
                    cfg.bc = match value {
                        "dirichlet" => BoundaryCondition::Dirichlet,
                        "dirichlet-neumann" => BoundaryCondition::DirichletNeumann,
                        other => {
                            return Err(CliError::usage(format!(
                                "invalid value for 'bc': '{other}' (dirichlet | dirichlet-neumann)"
                            )))
                        }
                    }
                }
                "collocation_points" => cfg.collocation_points = parse_num(key, value)?,
                "reliable_fraction" => cfg.reliable_fraction = parse_float(key, value)?,
                "eigenvalues" => cfg.eigenvalues = Some(parse_num(key, value)?),
                "basis_size" => cfg.basis_size = Some(parse_num(key, value)?),
                "truncation" => cfg.truncation = Some(parse_num(key, value)?),
                "cheb_degree" => cfg.cheb_degree = Some(parse_num(key, value)?),
                "tail_total" => cfg.tail_total = Some(parse_num(key, value)?),
                "theta" => cfg.theta = parse_float(key, value)?,
                "max_iter" => cfg.max_iter = parse_num(key, value)?,
                "tol_factor" => cfg.tol_factor = parse_float(key, value)?,
                "svd_cutoff" => cfg.svd_cutoff = parse_float(key, value)?,
                "max_halvings" => cfg.max_halvings = parse_num(key, value)?,
                "cheb_indices" => cfg.cheb_indices = Some(parse_index_list(key, value)?),
                "multistep" => {
                    cfg.multistep_auto = match value {
                        "auto" => true,
                        "none" => false,
                        other => {
                            return Err(CliError::usage(format!(
                                "invalid value for 'multistep': '{other}' (auto | none)"
                            )))
                        }
                    }
                }
                "initial_guess" => match parse_density(value)? {
                    DensitySpec::Coeffs(coeffs) => cfg.initial_guess = Some(coeffs),
                    _ => {
                        return Err(CliError::usage(
                            "invalid value for 'initial_guess': expected coeffs(...)".into(),
                        ))
                    }
                },
                "spectrum_file" => cfg.spectrum_file = Some(PathBuf::from(value)),
                "output_dir" => cfg.output_dir = PathBuf::from(value),
                "noise_sigmas" => cfg.noise_sigmas = parse_float_list(key, value)?,
                "seeds" => cfg.seeds = parse_u64_list(key, value)?,
                "cond_max_basis" => cfg.cond_max_basis = parse_num(key, value)?,
                "eigenvalue_check" => {
                    cfg.eigenvalue_check = match value {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(CliError::usage(format!(
                                "invalid value for 'eigenvalue_check': '{other}' (true | false)"
                            )))
                        }
                    }
                }
                _ => return Err(CliError::usage(format!("unknown key '{key}'"))),
            }
        }
        Ok(cfg)
    }

    pub fn measured(&self) -> Result<usize, CliError> {
        self.eigenvalues
            .ok_or_else(|| CliError::usage("missing key 'eigenvalues'".into()))
    }

    /// The final-stage inversion parameters, with the documented defaults:
    /// basis_size = K, truncation = max(2K + 1, 15), cheb_degree = max(40, 4K^2).
    pub fn target(&self) -> Result<InversionConfig, CliError> {
        let measured = self.measured()?;
        let basis_size = self.basis_size.unwrap_or(measured);
        let truncation = self.truncation.unwrap_or((2 * measured + 1).max(15));
        let degree = self
            .cheb_degree
            .unwrap_or((4 * measured * measured).max(40));
        let mut target = InversionConfig::new(measured, basis_size, truncation, degree);
        target.tail_total = self.tail_total;
        target.theta = self.theta;
        target.max_iter = self.max_iter;
        target.tol_factor = self.tol_factor;
        target.svd_cutoff = self.svd_cutoff;
        target.line_search_max_halvings = self.max_halvings;
        target.cheb_indices = self.cheb_indices.clone();
        Ok(target)
    }

    /// The full multistep schedule: explicit `[stage]` sections if present,
    /// otherwise the automatic ladder (or the bare target with
    /// `multistep = none`).
    pub fn schedule(&self) -> Result<Vec<InversionConfig>, CliError> {
        let target = self.target()?;
        if !self.stages.is_empty() {
            let mut schedule = Vec::with_capacity(self.stages.len() + 1);
            for stage in &self.stages {
                let mut cfg = target.clone();
                cfg.measured = stage.eigenvalues.unwrap_or(target.measured);
                cfg.basis_size = stage.basis_size.unwrap_or(target.basis_size);
                cfg.truncation = stage.truncation.unwrap_or(target.truncation);
                cfg.degree = stage.cheb_degree.unwrap_or(target.degree);
                cfg.tail_total = stage.tail_total.or(target.tail_total);
                cfg.cheb_indices = None;
                schedule.push(cfg);
            }
            schedule.push(target);
            return Ok(schedule);
        }
        if self.multistep_auto && self.initial_guess.is_none() {
            Ok(default_schedule(&target))
        } else {
            Ok(vec![target])
        }
    }
}

fn parse_num(key: &str, value: &str) -> Result<usize, CliError> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("invalid value for '{key}': '{value}'")))
}

fn parse_float(key: &str, value: &str) -> Result<f64, CliError> {
    value
        .parse()
        .map_err(|_| CliError::usage(format!("invalid value for '{key}': '{value}'")))
}

fn parse_float_list(key: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value
        .split(',')
        .map(|part| parse_float(key, part.trim()))
        .collect()
}

fn parse_u64_list(key: &str, value: &str) -> Result<Vec<u64>, CliError> {
    value
        .split(',')
        .map(|part| {
            part.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("invalid value for '{key}': '{part}'")))
        })
        .collect()
}

fn parse_index_list(key: &str, value: &str) -> Result<Vec<usize>, CliError> {
    let list: Vec<usize> = value
        .split(',')
        .map(|part| parse_num(key, part.trim()))
        .collect::<Result<_, _>>()?;
    let unique: BTreeSet<usize> = list.iter().copied().collect();
    if unique.len() != list.len() || list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::usage(format!(
            "invalid value for '{key}': indices must be strictly increasing"
        )));
    }
    Ok(list)
}

fn parse_density(value: &str) -> Result<DensitySpec, CliError> {
    if let Some(name) = value.strip_prefix("rho") {
        if name.len() == 1 && value.len() == 4 {
            return Ok(DensitySpec::Preset(value.to_string()));
        }
    }
    if let Some(args) = call_args(value, "constant") {
        return Ok(DensitySpec::Constant(parse_float("density", args.trim())?));
    }
    if let Some(args) = call_args(value, "coeffs") {
        return Ok(DensitySpec::Coeffs(parse_float_list("density", args)?));
    }
    if let Some(args) = call_args(value, "piecewise") {
        let Some((breaks, vals)) = args.split_once(';') else {
            return Err(CliError::usage(
                "invalid value for 'density': piecewise needs 'breakpoints; values'".into(),
            ));
        };
        let breakpoints = parse_float_list("density", breaks)?;
        let values = parse_float_list("density", vals)?;
        if values.len() != breakpoints.len() + 1 {
            return Err(CliError::usage(format!(
                "invalid value for 'density': {} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                values.len()
            )));
        }
        return Ok(DensitySpec::Piecewise {
            breakpoints,
            values,
        });
    }
    Err(CliError::usage(format!(
        "invalid value for 'density': '{value}'"
    )))
}

fn call_args<'a>(value: &'a str, name: &str) -> Option<&'a str> {
    value
        .strip_prefix(name)?
        .trim()
        .strip_prefix('(')?
        .strip_suffix(')')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_config() {
        let text = "\
# benchmark
density = rho1
bc = dirichlet
eigenvalues = 7
truncation = 15
cheb_degree = 300
seeds = 1, 2, 3
[stage]
eigenvalues = 3
basis_size = 3
cheb_degree = 20
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.measured().unwrap(), 7);
        assert_eq!(cfg.stages.len(), 1);
        let schedule = cfg.schedule().unwrap();
        assert_eq!(schedule.len(), 2);
        assert_eq!(schedule[0].basis_size, 3);
        assert_eq!(schedule[0].degree, 20);
        assert_eq!(schedule[1].degree, 300);
        assert_eq!(cfg.seeds, [1, 2, 3]);
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = ExperimentConfig::parse("frobnicate = 3").unwrap_err();
        assert!(err.to_string().contains("frobnicate"), "{err}");
    }

    #[test]
    fn densities_parse() {
        assert!(matches!(
            parse_density("rho4").unwrap(),
            DensitySpec::Preset(_)
        ));
        assert!(matches!(
            parse_density("constant(2.5)").unwrap(),
            DensitySpec::Constant(_)
        ));
        let DensitySpec::Piecewise {
            breakpoints,
            values,
        } = parse_density("piecewise(0.3, 0.7; 1, 1.1, 1)").unwrap()
        else {
            panic!("expected piecewise");
        };
        assert_eq!(breakpoints, [0.3, 0.7]);
        assert_eq!(values, [1.0, 1.1, 1.0]);
        assert!(parse_density("piecewise(0.3; 1)").is_err());
        assert!(parse_density("gaussian").is_err());
    }

    #[test]
    fn piecewise_density_uses_left_limits() {
        let spec = parse_density("piecewise(0.3, 0.7; 1, 1.1, 1)").unwrap();
        let d = spec.density().unwrap();
        assert_eq!(d.eval(0.3), 1.0);
        assert_eq!(d.eval(0.5), 1.1);
        assert_eq!(d.eval(0.7), 1.1);
        assert_eq!(d.eval(0.9), 1.0);
    }

    #[test]
    fn defaults_fill_the_target() {
        let cfg = ExperimentConfig::parse("density = rho2\neigenvalues = 10").unwrap();
        let target = cfg.target().unwrap();
        assert_eq!(target.basis_size, 10);
        assert_eq!(target.truncation, 21);
        assert_eq!(target.degree, 400);
    }
}
