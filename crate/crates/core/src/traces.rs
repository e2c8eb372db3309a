//! Chebyshev trace targets from spectra and model traces plus Jacobians via
//! the matrix three-term recursion.
//!
//! All polynomial evaluations run the recursion
//!   S_1(x) = x,  S_2(x) = 2x^2 - x,  S_{n+1}(x) = (4x - 2) S_n(x) - S_{n-1}(x)
//! in order. The expanded monomial coefficients are never formed: they vary
//! wildly in magnitude and overflow long before the recursion does.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::forward::Spectrum;
use crate::operator::{assemble_model_matrix, BasisMatrix};

/// Row-sum bound above which the matrix recursion is refused.
pub const ROW_SUM_LIMIT: f64 = 1.5;

/// Trace targets built from a spectrum: the data side of the inversion.
#[derive(Debug, Clone)]
pub struct TraceTargets {
    /// Target values, one per entry of `degrees`.
    pub values: DVector<f64>,
    /// Chebyshev degrees actually used (ascending).
    pub degrees: Vec<usize>,
    /// Rescale factor t applied to reciprocal eigenvalues.
    pub scale: f64,
    /// Number of measured eigenvalues used.
    pub measured: usize,
    /// Total count including asymptotic tail surrogates.
    pub tail_total: usize,
    /// Estimated asymptotic constant: lambda_k ~ k^2 pi^2 / l_tilde^2.
    pub l_tilde: f64,
}

impl TraceTargets {
    /// The unscaled reciprocal-eigenvalue sum, read off the degree-1 trace.
    pub fn reciprocal_sum(&self) -> Result<f64> {
        let pos = self
            .degrees
            .iter()
            .position(|&n| n == 1)
            .ok_or_else(|| Error::InvalidConfig("degree-1 trace is not available".into()))?;
        Ok(self.values[pos] / self.scale)
    }
}

/// Jacobian of the model traces with respect to the basis coefficients.
#[derive(Debug, Clone)]
pub struct TraceJacobian {
    pub degrees: Vec<usize>,
    /// Entry (n, m): d trace(S_n(t M(a))) / d a_m.
    pub values: DMatrix<f64>,
}

/// Evaluate the scaled Chebyshev polynomials S_n(x) = x T_{n-1}(x) for the
/// requested degrees (ascending, 1-based) by the three-term recursion.
pub fn scaled_cheb(x: f64, degrees: &[usize]) -> Vec<f64> {
    debug_assert!(degrees.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(degrees.first().is_none_or(|&n| n >= 1));
    let mut out = Vec::with_capacity(degrees.len());
    let Some(&max_degree) = degrees.last() else {
        return out;
    };
    let mut wanted = degrees.iter().peekable();
    let mut prev = x; // S_1
    let mut cur = 2.0 * x * x - x; // S_2
    for level in 1..=max_degree {
        let value = match level {
            1 => prev,
            2 => cur,
            _ => {
                let next = (4.0 * x - 2.0) * cur - prev;
                prev = cur;
                cur = next;
                next
            }
        };
        if wanted.peek() == Some(&&level) {
            out.push(value);
            wanted.next();
        }
    }
    out
}

/// All degrees 1..=n.
pub fn full_degrees(n: usize) -> Vec<usize> {
    (1..=n).collect()
}

/// Rescale factor t = theta * lambda_1, so the largest scaled reciprocal
/// eigenvalue is theta < 1.
pub fn choose_scale(spectrum: &Spectrum, theta: f64) -> f64 {
    assert!(theta > 0.0 && theta < 1.0);
    theta * spectrum.smallest()
}

/// Estimate the asymptotic constant from the tail of the reliable
/// eigenvalues: lambda_k ~ k^2 pi^2 / L^2, so L ~ k pi / sqrt(lambda_k).
/// Averages over the last three reliable eigenvalues.
pub fn estimate_l(spectrum: &Spectrum) -> f64 {
    let reliable = spectrum.reliable_count;
    assert!(reliable >= 1, "need at least one reliable eigenvalue");
    let take = reliable.min(3);
    let mut sum = 0.0;
    for k in (reliable - take + 1)..=reliable {
        let lambda = spectrum.lambdas()[k - 1];
        sum += k as f64 * std::f64::consts::PI / lambda.sqrt();
    }
    sum / take as f64
}

/// Build trace targets from `measured` eigenvalues of the spectrum plus
/// asymptotic surrogates up to `tail_total`.
pub fn trace_targets(
    spectrum: &Spectrum,
    degrees: &[usize],
    measured: usize,
    tail_total: usize,
    scale: f64,
) -> Result<TraceTargets> {
    if measured == 0 || measured > spectrum.reliable_count {
        return Err(Error::InvalidConfig(format!(
            "measured count {} must lie in 1..={} (reliable eigenvalues)",
            measured, spectrum.reliable_count
        )));
    }
    if tail_total < measured {
        return Err(Error::InvalidConfig(format!(
            "tail total {tail_total} is below measured count {measured}"
        )));
    }
    if scale / spectrum.smallest() >= 1.0 {
        return Err(Error::ScaleTooLarge {
            scale,
            lambda1: spectrum.smallest(),
        });
    }
    let l_tilde = estimate_l(spectrum);
    let mut values = DVector::zeros(degrees.len());
    for k in 1..=measured {
        let x = scale / spectrum.lambdas()[k - 1];
        for (slot, v) in scaled_cheb(x, degrees).into_iter().enumerate() {
            values[slot] += v;
        }
    }
    let pi = std::f64::consts::PI;
    for k in (measured + 1)..=tail_total {
        let x = scale * l_tilde * l_tilde / ((k * k) as f64 * pi * pi);
        for (slot, v) in scaled_cheb(x, degrees).into_iter().enumerate() {
            values[slot] += v;
        }
    }
    Ok(TraceTargets {
        values,
        degrees: degrees.to_vec(),
        scale,
        measured,
        tail_total,
        l_tilde,
    })
}

/// Traces of the scaled Chebyshev polynomials of t * M(a).
pub fn model_traces(
    coeffs: &[f64],
    mats: &[BasisMatrix],
    degrees: &[usize],
    scale: f64,
) -> Result<DVector<f64>> {
    let (traces, _) = recursion(coeffs, mats, degrees, scale, false)?;
    Ok(traces)
}

/// Traces and their Jacobian with respect to the coefficients, both from the
/// matrix recursion with a rolling two-level window.
pub fn model_traces_and_jacobian(
    coeffs: &[f64],
    mats: &[BasisMatrix],
    degrees: &[usize],
    scale: f64,
) -> Result<(DVector<f64>, TraceJacobian)> {
    let (traces, jac) = recursion(coeffs, mats, degrees, scale, true)?;
    Ok((
        traces,
        TraceJacobian {
            degrees: degrees.to_vec(),
            values: jac.expect("jacobian requested"),
        },
    ))
}

/// Diagnostic power traces trace((t M(a))^s) for s = 1..=max_power by
/// repeated multiplication.
pub fn power_traces(
    coeffs: &[f64],
    mats: &[BasisMatrix],
    max_power: usize,
    scale: f64,
) -> Result<Vec<f64>> {
    assert!(max_power >= 1);
    let model = assemble_model_matrix(coeffs, mats)?;
    let scaled = model.entries * scale;
    let mut out = Vec::with_capacity(max_power);
    out.push(scaled.trace());
    let mut power = scaled.clone();
    for _ in 2..=max_power {
        power = &power * &scaled;
        out.push(power.trace());
    }
    Ok(out)
}

fn recursion(
    coeffs: &[f64],
    mats: &[BasisMatrix],
    degrees: &[usize],
    scale: f64,
    with_jacobian: bool,
) -> Result<(DVector<f64>, Option<DMatrix<f64>>)> {
    if degrees.is_empty() {
        return Err(Error::InvalidConfig(
            "no Chebyshev degrees requested".into(),
        ));
    }
    if !degrees.windows(2).all(|w| w[0] < w[1]) || degrees[0] < 1 {
        return Err(Error::InvalidConfig(
            "Chebyshev degrees must be ascending and at least 1".into(),
        ));
    }
    let model = assemble_model_matrix(coeffs, mats)?;
    let size = model.size();
    let scaled = model.entries * scale;

    let row_sum_bound = (0..size)
        .map(|i| (0..size).map(|j| scaled[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if row_sum_bound > ROW_SUM_LIMIT {
        return Err(Error::SpectralRadiusExceeded {
            bound: row_sum_bound,
        });
    }

    let n_coeffs = coeffs.len();
    let max_degree = *degrees.last().expect("degrees nonempty");
    // (4 t M(a) - 2 I), the recursion multiplier.
    let mut multiplier = &scaled * 4.0;
    for i in 0..size {
        multiplier[(i, i)] -= 2.0;
    }
    // d (t M(a)) / d a_m = 2 t M(e_m).
    let derivs: Vec<DMatrix<f64>> = if with_jacobian {
        mats.iter().map(|m| &m.entries * (2.0 * scale)).collect()
    } else {
        Vec::new()
    };

    let mut traces = DVector::zeros(degrees.len());
    let mut jacobian = with_jacobian.then(|| DMatrix::zeros(degrees.len(), n_coeffs));
    let mut wanted = degrees.iter().copied().peekable();

    // Level 1: S_1(B) = B and its derivatives.
    let mut level_prev = scaled.clone();
    let mut deriv_prev = derivs.clone();
    let mut slot = 0;
    if wanted.peek() == Some(&1) {
        traces[slot] = level_prev.trace();
        if let Some(jac) = jacobian.as_mut() {
            for (m, dm) in deriv_prev.iter().enumerate() {
                jac[(slot, m)] = dm.trace();
            }
        }
        slot += 1;
        wanted.next();
    }
    if max_degree == 1 {
        return Ok((traces, jacobian));
    }

    // Level 2: S_2(B) = 2 B^2 - B; d S_2 = 2 (E B + B E) - E.
    let mut level_cur = {
        let mut s2 = &scaled * &scaled * 2.0;
        s2 -= &scaled;
        s2
    };
    let mut deriv_cur: Vec<DMatrix<f64>> = derivs
        .iter()
        .map(|e| {
            let mut d = (e * &scaled + &scaled * e) * 2.0;
            d -= e;
            d
        })
        .collect();
    if wanted.peek() == Some(&2) {
        traces[slot] = level_cur.trace();
        if let Some(jac) = jacobian.as_mut() {
            for (m, dm) in deriv_cur.iter().enumerate() {
                jac[(slot, m)] = dm.trace();
            }
        }
        slot += 1;
        wanted.next();
    }

    for level in 3..=max_degree {
        let level_next = &multiplier * &level_cur - &level_prev;
        if with_jacobian {
            for m in 0..n_coeffs {
                // 4 E_m S_j + (4 B - 2) dS_j - dS_{j-1}
                let next =
                    &derivs[m] * &level_cur * 4.0 + &multiplier * &deriv_cur[m] - &deriv_prev[m];
                deriv_prev[m] = std::mem::replace(&mut deriv_cur[m], next);
            }
        }
        level_prev = std::mem::replace(&mut level_cur, level_next);
        if wanted.peek() == Some(&level) {
            traces[slot] = level_cur.trace();
            if let Some(jac) = jacobian.as_mut() {
                for (m, dm) in deriv_cur.iter().enumerate() {
                    jac[(slot, m)] = dm.trace();
                }
            }
            slot += 1;
            wanted.next();
        }
    }
    debug_assert_eq!(slot, degrees.len());
    Ok((traces, jacobian))
}
