//! Gauss-Newton minimization of the trace residual, coarse-to-fine multistep
//! scheduling, initial-guess construction, and the condition-number study.

use nalgebra::DVector;

use crate::basis::{BasisSpec, BoundaryCondition, Density};
use crate::error::{Error, Result};
use crate::forward::Spectrum;
use crate::linalg;
use crate::operator::{assemble_all_basis_matrices, BasisMatrix};
use crate::traces::{
    choose_scale, full_degrees, model_traces, model_traces_and_jacobian, trace_targets,
    TraceJacobian, TraceTargets,
};

/// Parameters of one inversion stage.
#[derive(Debug, Clone)]
pub struct InversionConfig {
    /// Measured eigenvalues used (K).
    pub measured: usize,
    /// Number of basis functions (M).
    pub basis_size: usize,
    /// Truncation size of the model matrix (J).
    pub truncation: usize,
    /// Highest Chebyshev degree (N).
    pub degree: usize,
    /// Total eigenvalue count including tail surrogates; defaults to the
    /// truncation size (but never below `measured`).
    pub tail_total: Option<usize>,
    /// Scale safety factor for t = theta * lambda_1.
    pub theta: f64,
    pub max_iter: usize,
    /// Stop when the residual 2-norm drops to tol_factor * degree.
    pub tol_factor: f64,
    /// Relative singular-value cutoff of the least-squares solve.
    pub svd_cutoff: f64,
    /// Maximum step halvings per Gauss-Newton iteration.
    pub line_search_max_halvings: usize,
    /// Optional sparse subset of Chebyshev degrees; `None` means 1..=degree.
    pub cheb_indices: Option<Vec<usize>>,
}

impl InversionConfig {
    pub fn new(measured: usize, basis_size: usize, truncation: usize, degree: usize) -> Self {
        InversionConfig {
            measured,
            basis_size,
            truncation,
            degree,
            tail_total: None,
            theta: 0.95,
            max_iter: 100,
            tol_factor: 1e-5,
            svd_cutoff: 1e-12,
            line_search_max_halvings: 10,
            cheb_indices: None,
        }
    }

    /// Resolved tail count K1.
    pub fn tail_total(&self) -> usize {
        self.tail_total
            .unwrap_or(self.truncation)
            .max(self.measured)
    }

    /// The Chebyshev degrees this stage evaluates.
    pub fn degrees(&self) -> Vec<usize> {
        self.cheb_indices
            .clone()
            .unwrap_or_else(|| full_degrees(self.degree))
    }

    /// Residual-norm stopping tolerance.
    pub fn tolerance(&self) -> f64 {
        self.tol_factor * self.degree as f64
    }

    /// Hard validation plus soft warnings about atypical parameter choices.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.measured == 0 || self.basis_size == 0 || self.truncation == 0 || self.degree == 0 {
            return Err(Error::InvalidConfig(
                "measured, basis_size, truncation, and degree must all be positive".into(),
            ));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidConfig("theta must lie in (0, 1)".into()));
        }
        if let Some(tail) = self.tail_total {
            if tail < self.measured {
                return Err(Error::InvalidConfig(format!(
                    "tail_total {tail} is below measured {}",
                    self.measured
                )));
            }
        }
        if let Some(degrees) = &self.cheb_indices {
            if degrees.is_empty() || degrees[0] < 1 || !degrees.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidConfig(
                    "cheb_indices must be ascending and start at 1 or above".into(),
                ));
            }
        }
        let mut warnings = Vec::new();
        if self.basis_size > self.measured {
            warnings.push(format!(
                "basis_size {} exceeds measured {}; the reconstruction is underdetermined",
                self.basis_size, self.measured
            ));
        }
        if self.truncation < self.measured {
            warnings.push(format!(
                "truncation {} below measured {}; eigenvalues beyond the truncation are invisible",
                self.truncation, self.measured
            ));
        }
        Ok(warnings)
    }
}

/// Summary of one multistep stage.
#[derive(Debug, Clone)]
pub struct StageSummary {
    pub stage: usize,
    pub measured: usize,
    pub basis_size: usize,
    pub truncation: usize,
    pub degree: usize,
    pub tail_total: usize,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual_norm: f64,
    /// Residual norms along this stage (first entry is pre-iteration).
    pub residual_norms: Vec<f64>,
}

/// Outcome of an inversion run.
#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub density: Density,
    /// Residual norms across all stages, in evaluation order.
    pub residual_history: Vec<f64>,
    /// Final residual vector of the last stage.
    pub final_residual: Vec<f64>,
    /// Accepted Gauss-Newton steps across all stages.
    pub iterations: usize,
    pub converged: bool,
    pub stage_log: Vec<StageSummary>,
    /// Rescale factor used on the data and model traces.
    pub scale: f64,
    /// Asymptotic constant estimated from the data spectrum.
    pub l_tilde: f64,
    /// True if the reconstructed density dips to zero or below on the
    /// monitoring grid (a warning, never an error).
    pub density_nonpositive: bool,
}

/// Constant initial guess derived from the degree-1 trace: for constant c,
/// int x (1 - x) c dx = c / 6, so c = 6 * (sum of reciprocal eigenvalues).
pub fn default_initial_guess(targets: &TraceTargets, basis: &BasisSpec) -> Result<Density> {
    let tau1 = targets.reciprocal_sum()?;
    let a1 = 6.0 * tau1;
    if a1 <= 0.0 {
        return Err(Error::NonPositiveGuess(a1));
    }
    let mut coeffs = vec![0.0; basis.size()];
    coeffs[0] = a1;
    Density::new(basis.clone(), coeffs)
}

/// Minimum-norm least-squares Gauss-Newton step from the Jacobian and the
/// residual, via truncated SVD.
pub fn gauss_newton_step(
    jacobian: &TraceJacobian,
    residual: &DVector<f64>,
    svd_cutoff: f64,
) -> Result<DVector<f64>> {
    linalg::min_norm_least_squares(&jacobian.values, residual, svd_cutoff)
}

/// Gauss-Newton iteration with residual-halving backtracking.
///
/// The basis matrices must be precomputed for the stage's truncation size,
/// and the targets must use the stage's degree set.
pub fn invert(
    cfg: &InversionConfig,
    targets: &TraceTargets,
    initial: &Density,
    mats: &[BasisMatrix],
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    if mats.len() != cfg.basis_size || initial.coeffs().len() != cfg.basis_size {
        return Err(Error::DimensionMismatch(format!(
            "stage expects {} basis functions, got {} matrices and {} coefficients",
            cfg.basis_size,
            mats.len(),
            initial.coeffs().len()
        )));
    }
    let degrees = cfg.degrees();
    if targets.degrees != degrees {
        return Err(Error::InvalidConfig(
            "targets were built with a different Chebyshev degree set".into(),
        ));
    }

    let tolerance = cfg.tolerance();
    let mut coeffs = DVector::from_column_slice(initial.coeffs());
    let (mut traces, mut jacobian) =
        model_traces_and_jacobian(coeffs.as_slice(), mats, &degrees, targets.scale)?;
    let mut residual = &targets.values - &traces;
    let mut norm = residual.norm();
    let initial_norm = norm;

    let mut history = vec![norm];
    let mut iterations = 0;
    let mut converged = norm <= tolerance;

    while !converged && iterations < cfg.max_iter {
        let direction = gauss_newton_step(&jacobian, &residual, cfg.svd_cutoff)?;
        let mut step = direction;
        let mut accepted = None;
        for _ in 0..=cfg.line_search_max_halvings {
            let candidate = &coeffs + &step;
            let cand_traces = model_traces(candidate.as_slice(), mats, &degrees, targets.scale)?;
            let cand_residual = &targets.values - &cand_traces;
            let cand_norm = cand_residual.norm();
            if cand_norm < norm {
                accepted = Some((candidate, cand_norm));
                break;
            }
            step *= 0.5;
        }
        let Some((next_coeffs, next_norm)) = accepted else {
            break; // line search failed; report unconverged
        };
        coeffs = next_coeffs;
        norm = next_norm;
        iterations += 1;
        history.push(norm);
        if !norm.is_finite() || norm > 1e6 * initial_norm {
            return Err(Error::DivergedResidual {
                norm,
                initial: initial_norm,
            });
        }
        if norm <= tolerance {
            converged = true;
            break;
        }
        let refreshed =
            model_traces_and_jacobian(coeffs.as_slice(), mats, &degrees, targets.scale)?;
        traces = refreshed.0;
        jacobian = refreshed.1;
        residual = &targets.values - &traces;
        norm = residual.norm();
    }

    let final_traces = model_traces(coeffs.as_slice(), mats, &degrees, targets.scale)?;
    let final_residual = &targets.values - &final_traces;
    let density = Density::new(initial.basis().clone(), coeffs.as_slice().to_vec())?;
    let density_nonpositive = !density.is_positive_on_grid();
    let summary = StageSummary {
        stage: 1,
        measured: cfg.measured,
        basis_size: cfg.basis_size,
        truncation: cfg.truncation,
        degree: cfg.degree,
        tail_total: cfg.tail_total(),
        iterations,
        converged,
        final_residual_norm: final_residual.norm(),
        residual_norms: history.clone(),
    };
    Ok(ReconstructionResult {
        density,
        residual_history: history,
        final_residual: final_residual.as_slice().to_vec(),
        iterations,
        converged,
        stage_log: vec![summary],
        scale: targets.scale,
        l_tilde: targets.l_tilde,
        density_nonpositive,
    })
}

/// Run a coarse-to-fine schedule of inversion stages against one spectrum.
///
/// The scale t is frozen from the data spectrum before the first stage and
/// shared by every stage; targets are rebuilt per stage. Coefficients are
/// zero-padded whenever the basis grows.
pub fn multistep(
    schedule: &[InversionConfig],
    spectrum: &Spectrum,
    bc: BoundaryCondition,
    basis: &BasisSpec,
    initial: Option<&Density>,
) -> Result<ReconstructionResult> {
    if schedule.is_empty() {
        return Err(Error::InvalidConfig("empty multistep schedule".into()));
    }
    for pair in schedule.windows(2) {
        if pair[1].basis_size < pair[0].basis_size {
            return Err(Error::InvalidConfig(
                "multistep stages must have non-decreasing basis sizes".into(),
            ));
        }
        if pair[1].theta != pair[0].theta {
            return Err(Error::InvalidConfig(
                "all multistep stages must share the scale safety factor".into(),
            ));
        }
    }
    let last = schedule.last().expect("schedule nonempty");
    if basis.size() < last.basis_size {
        return Err(Error::DimensionMismatch(format!(
            "basis of size {} cannot serve a final stage of size {}",
            basis.size(),
            last.basis_size
        )));
    }

    let scale = choose_scale(spectrum, schedule[0].theta);
    let mut coeffs: Option<Vec<f64>> = initial.map(|d| d.coeffs().to_vec());
    let mut stage_log = Vec::with_capacity(schedule.len());
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut outcome: Option<ReconstructionResult> = None;

    for (idx, stage) in schedule.iter().enumerate() {
        let degrees = stage.degrees();
        let targets = trace_targets(
            spectrum,
            &degrees,
            stage.measured,
            stage.tail_total(),
            scale,
        )?;
        let stage_basis = basis.truncated(stage.basis_size)?;
        let mats = assemble_all_basis_matrices(&stage_basis, stage.truncation, bc)?;

        let start = match coeffs.take() {
            Some(mut previous) => {
                if previous.len() > stage.basis_size {
                    return Err(Error::DimensionMismatch(format!(
                        "stage {} shrinks the coefficient vector from {} to {}",
                        idx + 1,
                        previous.len(),
                        stage.basis_size
                    )));
                }
                previous.resize(stage.basis_size, 0.0);
                Density::new(stage_basis.clone(), previous)?
            }
            None => default_initial_guess(&targets, &stage_basis)?,
        };

        let mut result = invert(stage, &targets, &start, &mats)?;
        coeffs = Some(result.density.coeffs().to_vec());
        iterations += result.iterations;
        history.extend(result.residual_history.iter().copied());
        let mut summary = result.stage_log.pop().expect("invert logs one stage");
        summary.stage = idx + 1;
        stage_log.push(summary);
        outcome = Some(result);
    }

    let mut result = outcome.expect("at least one stage ran");
    result.residual_history = history;
    result.iterations = iterations;
    result.stage_log = stage_log;
    Ok(result)
}

/// The default coarse-to-fine schedule.
///
/// Basis sizes climb 3, 7, 15, ... (doubling plus one) below the target with
/// a low Chebyshev degree per stage, then the degree itself is continued at
/// the target basis size (N/6, N/3, N). The gradual degree ladder matters:
/// high-degree traces are so oscillatory near the scaled spectral edge that a
/// cold start lands outside their convergence basin.
pub fn default_schedule(target: &InversionConfig) -> Vec<InversionConfig> {
    let mut schedule = Vec::new();
    let carry = |mut stage: InversionConfig| {
        stage.theta = target.theta;
        stage.tol_factor = target.tol_factor;
        stage.svd_cutoff = target.svd_cutoff;
        stage.line_search_max_halvings = target.line_search_max_halvings;
        stage.max_iter = target.max_iter;
        stage
    };
    let mut m = 3;
    let mut idx = 0;
    let mut last_degree = 0;
    while m < target.basis_size {
        idx += 1;
        let measured = m.min(target.measured);
        let degree = 20 * idx;
        schedule.push(carry(InversionConfig::new(
            measured,
            m,
            target.truncation,
            degree,
        )));
        last_degree = degree;
        m = 2 * m + 1;
    }
    for divisor in [6, 3] {
        let degree = target.degree / divisor;
        if degree >= 20 && degree > last_degree && degree < target.degree {
            schedule.push(carry(InversionConfig::new(
                target.measured,
                target.basis_size,
                target.truncation,
                degree,
            )));
            last_degree = degree;
        }
    }
    schedule.push(target.clone());
    schedule
}

/// Condition numbers of the trace Jacobian at the constant density
/// a = (1, 0, ..., 0) for basis sizes 1..=max_basis.
pub fn condition_study(
    max_basis: usize,
    degree: usize,
    truncation: usize,
    scale: f64,
    bc: BoundaryCondition,
) -> Result<Vec<(usize, f64)>> {
    let basis = BasisSpec::fourier(max_basis)?;
    let mats = assemble_all_basis_matrices(&basis, truncation, bc)?;
    let degrees = full_degrees(degree);
    let mut out = Vec::with_capacity(max_basis);
    for m in 1..=max_basis {
        let mut coeffs = vec![0.0; m];
        coeffs[0] = 1.0;
        let (_, jacobian) = model_traces_and_jacobian(&coeffs, &mats[..m], &degrees, scale)?;
        out.push((m, linalg::condition_number(&jacobian.values)));
    }
    Ok(out)
}

/// Least-squares slope of log(cond) against log(M), skipping M = 1.
pub fn loglog_slope(samples: &[(usize, f64)]) -> f64 {
    let points: Vec<(f64, f64)> = samples
        .iter()
        .filter(|(m, _)| *m >= 2)
        .map(|&(m, c)| ((m as f64).ln(), c.ln()))
        .collect();
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::analytic_spectrum;
    use crate::operator::assemble_model_matrix;
    use crate::presets;
    use crate::traces::trace_targets;
    use nalgebra::DMatrix;
    use std::f64::consts::PI;

    fn fourier(size: usize) -> BasisSpec {
        BasisSpec::FourierCosine { size }
    }

    #[test]
    fn initial_guess_recovers_constants() {
        let s = analytic_spectrum(1.0, 1000);
        let t = choose_scale(&s, 0.95);
        let targets = trace_targets(&s, &full_degrees(3), 1000, 1000, t).unwrap();
        let guess = default_initial_guess(&targets, &fourier(4)).unwrap();
        assert!(
            (guess.coeffs()[0] - 1.0).abs() < 1e-2,
            "{}",
            guess.coeffs()[0]
        );
        assert_eq!(guess.coeffs()[1..], [0.0, 0.0, 0.0]);

        let s3 = analytic_spectrum(3.0, 1000);
        let t3 = choose_scale(&s3, 0.95);
        let targets3 = trace_targets(&s3, &full_degrees(3), 1000, 1000, t3).unwrap();
        let guess3 = default_initial_guess(&targets3, &fourier(1)).unwrap();
        assert!(
            (guess3.coeffs()[0] - 3.0).abs() < 3e-2,
            "{}",
            guess3.coeffs()[0]
        );
    }

    #[test]
    fn gauss_newton_step_examples() {
        let identity = TraceJacobian {
            degrees: vec![1, 2],
            values: DMatrix::identity(2, 2),
        };
        let r = DVector::from_column_slice(&[0.3, -0.7]);
        let step = gauss_newton_step(&identity, &r, 1e-12).unwrap();
        assert!((&step - &r).norm() < 1e-14);

        let tall = TraceJacobian {
            degrees: vec![1, 2],
            values: DMatrix::from_column_slice(2, 1, &[2.0, 0.0]),
        };
        let ones = DVector::from_column_slice(&[1.0, 1.0]);
        let step = gauss_newton_step(&tall, &ones, 1e-12).unwrap();
        assert!((step[0] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn exact_consistency_terminates_immediately() {
        // Data and model are identical truncations, so the initial residual
        // is already at rounding level.
        let truncation = 10;
        let s = analytic_spectrum(1.0, truncation);
        let cfg = InversionConfig::new(truncation, 1, truncation, 20);
        let t = choose_scale(&s, cfg.theta);
        let targets = trace_targets(&s, &cfg.degrees(), truncation, truncation, t).unwrap();
        let mats =
            assemble_all_basis_matrices(&fourier(1), truncation, BoundaryCondition::Dirichlet)
                .unwrap();
        let start = Density::new(fourier(1), vec![1.0]).unwrap();
        let result = invert(&cfg, &targets, &start, &mats).unwrap();
        assert!(result.converged);
        assert_eq!(result.iterations, 0);
        assert!(result.residual_history[0] <= 1e-10);
    }

    #[test]
    fn fixed_point_of_in_basis_spectrum() {
        // Data generated from the model at a*; starting at a* terminates at once.
        let truncation = 9;
        let coeffs = [1.1, 0.07, -0.04];
        let mats =
            assemble_all_basis_matrices(&fourier(3), truncation, BoundaryCondition::Dirichlet)
                .unwrap();
        let model = assemble_model_matrix(&coeffs, &mats).unwrap();
        let kappa = crate::linalg::symmetric_eigenvalues_sorted(&model.entries);
        let lambdas: Vec<f64> = kappa.iter().rev().map(|k| 1.0 / k).collect();
        let s = Spectrum::new(lambdas, crate::forward::Provenance::Analytic, truncation).unwrap();
        let cfg = InversionConfig::new(truncation, 3, truncation, 30);
        let t = choose_scale(&s, cfg.theta);
        let targets = trace_targets(&s, &cfg.degrees(), truncation, truncation, t).unwrap();
        let start = Density::new(fourier(3), coeffs.to_vec()).unwrap();
        let result = invert(&cfg, &targets, &start, &mats).unwrap();
        assert!(result.converged && result.iterations == 0);
        assert!(result.residual_history[0] <= 1e-10);
    }

    #[test]
    fn recovers_small_in_span_perturbation() {
        // Data from a = (1, 0.05); start at (1, 0).
        let truncation = 10;
        let mats =
            assemble_all_basis_matrices(&fourier(2), truncation, BoundaryCondition::Dirichlet)
                .unwrap();
        let truth = [1.0, 0.05];
        let model = assemble_model_matrix(&truth, &mats).unwrap();
        let kappa = crate::linalg::symmetric_eigenvalues_sorted(&model.entries);
        let lambdas: Vec<f64> = kappa.iter().rev().map(|k| 1.0 / k).collect();
        let s = Spectrum::new(lambdas, crate::forward::Provenance::Analytic, truncation).unwrap();
        let mut cfg = InversionConfig::new(truncation, 2, truncation, 50);
        // The data is exactly representable; a tight tolerance lets the
        // quadratic convergence run to the floor. A moderate scale keeps the
        // degree-50 residual surface smooth enough for a cold single-stage
        // start (multistep is the production answer at theta = 0.95).
        cfg.tol_factor = 1e-12;
        cfg.theta = 0.8;
        let t = choose_scale(&s, cfg.theta);
        let targets = trace_targets(&s, &cfg.degrees(), truncation, truncation, t).unwrap();
        let start = Density::new(fourier(2), vec![1.0, 0.0]).unwrap();
        let result = invert(&cfg, &targets, &start, &mats).unwrap();
        assert!(
            (result.density.coeffs()[1] - 0.05).abs() < 1e-6,
            "a2 = {}",
            result.density.coeffs()[1]
        );
    }

    #[test]
    fn sparse_degree_subset_still_inverts() {
        // Only three polynomial degrees carry the whole reconstruction.
        let truncation = 10;
        let mats =
            assemble_all_basis_matrices(&fourier(2), truncation, BoundaryCondition::Dirichlet)
                .unwrap();
        let truth = [1.0, 0.03];
        let model = assemble_model_matrix(&truth, &mats).unwrap();
        let kappa = crate::linalg::symmetric_eigenvalues_sorted(&model.entries);
        let lambdas: Vec<f64> = kappa.iter().rev().map(|k| 1.0 / k).collect();
        let s = Spectrum::new(lambdas, crate::forward::Provenance::Analytic, truncation).unwrap();
        let mut cfg = InversionConfig::new(truncation, 2, truncation, 31);
        cfg.cheb_indices = Some(vec![1, 16, 31]);
        cfg.tol_factor = 1e-12;
        cfg.theta = 0.8;
        let t = choose_scale(&s, cfg.theta);
        let targets = trace_targets(&s, &cfg.degrees(), truncation, truncation, t).unwrap();
        assert_eq!(targets.values.len(), 3);
        let start = Density::new(fourier(2), vec![1.0, 0.0]).unwrap();
        let result = invert(&cfg, &targets, &start, &mats).unwrap();
        assert!(
            (result.density.coeffs()[1] - 0.03).abs() < 1e-6,
            "a2 = {}",
            result.density.coeffs()[1]
        );
    }

    #[test]
    fn accepted_steps_strictly_decrease_the_residual() {
        let truncation = 10;
        let mats =
            assemble_all_basis_matrices(&fourier(2), truncation, BoundaryCondition::Dirichlet)
                .unwrap();
        let truth = [1.0, 0.08];
        let model = assemble_model_matrix(&truth, &mats).unwrap();
        let kappa = crate::linalg::symmetric_eigenvalues_sorted(&model.entries);
        let lambdas: Vec<f64> = kappa.iter().rev().map(|k| 1.0 / k).collect();
        let s = Spectrum::new(lambdas, crate::forward::Provenance::Analytic, truncation).unwrap();
        let cfg = InversionConfig::new(truncation, 2, truncation, 40);
        let t = choose_scale(&s, cfg.theta);
        let targets = trace_targets(&s, &cfg.degrees(), truncation, truncation, t).unwrap();
        let start = Density::new(fourier(2), vec![0.9, 0.0]).unwrap();
        let result = invert(&cfg, &targets, &start, &mats).unwrap();
        for pair in result.residual_history.windows(2) {
            assert!(pair[1] < pair[0]);
        }
        let rerun = invert(&cfg, &targets, &start, &mats).unwrap();
        assert_eq!(result.residual_history, rerun.residual_history);
    }

    #[test]
    fn single_stage_multistep_equals_invert() {
        let truncation = 10;
        let s = analytic_spectrum(1.0, truncation);
        let cfg = InversionConfig::new(truncation, 1, truncation, 20);
        let via_multistep = multistep(
            std::slice::from_ref(&cfg),
            &s,
            BoundaryCondition::Dirichlet,
            &fourier(1),
            None,
        )
        .unwrap();
        let t = choose_scale(&s, cfg.theta);
        let targets = trace_targets(&s, &cfg.degrees(), truncation, truncation, t).unwrap();
        let mats =
            assemble_all_basis_matrices(&fourier(1), truncation, BoundaryCondition::Dirichlet)
                .unwrap();
        let start = default_initial_guess(&targets, &fourier(1)).unwrap();
        let direct = invert(&cfg, &targets, &start, &mats).unwrap();
        assert_eq!(via_multistep.density.coeffs(), direct.density.coeffs());
        assert_eq!(via_multistep.residual_history, direct.residual_history);
    }

    #[test]
    fn zero_padding_preserves_the_residual() {
        // Stage 2 started from the padded stage-1 result evaluates to the
        // same initial residual as a direct evaluation at the padded vector.
        let s = analytic_spectrum(1.0, 12);
        let stage1 = InversionConfig::new(3, 1, 8, 20);
        let stage2 = InversionConfig::new(6, 3, 12, 40);
        let result = multistep(
            &[stage1.clone(), stage2.clone()],
            &s,
            BoundaryCondition::Dirichlet,
            &fourier(3),
            None,
        )
        .unwrap();
        assert_eq!(result.stage_log.len(), 2);
        let stage1_norms = &result.stage_log[0].residual_norms;
        let stage2_norms = &result.stage_log[1].residual_norms;
        assert_eq!(
            result.residual_history.len(),
            stage1_norms.len() + stage2_norms.len()
        );

        // Reproduce stage 2's starting residual by hand.
        let t = choose_scale(&s, stage1.theta);
        let stage1_targets =
            trace_targets(&s, &stage1.degrees(), 3, stage1.tail_total(), t).unwrap();
        let mats1 =
            assemble_all_basis_matrices(&fourier(1), 8, BoundaryCondition::Dirichlet).unwrap();
        let start1 = default_initial_guess(&stage1_targets, &fourier(1)).unwrap();
        let r1 = invert(&stage1, &stage1_targets, &start1, &mats1).unwrap();
        let mut padded = r1.density.coeffs().to_vec();
        padded.resize(3, 0.0);
        let stage2_targets =
            trace_targets(&s, &stage2.degrees(), 6, stage2.tail_total(), t).unwrap();
        let mats2 =
            assemble_all_basis_matrices(&fourier(3), 12, BoundaryCondition::Dirichlet).unwrap();
        let traces = model_traces(&padded, &mats2, &stage2.degrees(), t).unwrap();
        let expected = (&stage2_targets.values - &traces).norm();
        assert!((stage2_norms[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn default_schedule_shape() {
        let target = InversionConfig::new(7, 7, 15, 300);
        let schedule = default_schedule(&target);
        let shape: Vec<(usize, usize)> =
            schedule.iter().map(|s| (s.basis_size, s.degree)).collect();
        assert_eq!(shape, [(3, 20), (7, 50), (7, 100), (7, 300)]);
        assert!(schedule
            .windows(2)
            .all(|w| w[0].basis_size <= w[1].basis_size));
        let small = InversionConfig::new(3, 3, 9, 40);
        assert_eq!(default_schedule(&small).len(), 1);
    }

    #[test]
    fn condition_number_study_basics() {
        let s = analytic_spectrum(1.0, 1);
        let scale = choose_scale(&s, 0.95);
        let study = condition_study(4, 60, 12, scale, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(study[0].0, 1);
        assert!((study[0].1 - 1.0).abs() < 1e-12);
        for pair in study.windows(2) {
            assert!(pair[1].1 > pair[0].1, "condition numbers must increase");
        }
    }

    #[test]
    fn nonpositive_reconstruction_is_flagged_not_fatal() {
        // A density that dips negative still yields a result with the flag set.
        let d = Density::new(fourier(2), vec![0.1, 0.5]).unwrap();
        assert!(!d.is_positive_on_grid());
    }

    #[test]
    fn rho1_preset_guess_is_near_the_mean() {
        // Sanity: the tau1-derived constant sits near the mean of rho1 = 1.
        let s = analytic_spectrum(1.0, 40);
        let t = choose_scale(&s, 0.95);
        let targets = trace_targets(&s, &full_degrees(2), 40, 40, t).unwrap();
        let guess = default_initial_guess(&targets, presets::rho1().basis()).unwrap();
        assert!((guess.coeffs()[0] - 1.0).abs() < 0.1);
        assert_eq!(guess.coeffs().len(), 7);
        let _ = PI;
    }
}
