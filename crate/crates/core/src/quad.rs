//! Composite Gauss-Legendre quadrature on [0, 1] honoring interior breakpoints.
//!
//! Each interval between consecutive breakpoints is split into uniform panels
//! and a 10-point Gauss-Legendre rule is applied per panel. Convergence is
//! checked by doubling the panel count.

use crate::error::{Error, Result};

/// Positive abscissae of the 10-point Gauss-Legendre rule on (-1, 1).
/// Tabulated digits exceed f64 resolution so rounding happens in the parser.
#[allow(clippy::excessive_precision)]
const GL_NODES: [f64; 5] = [
    0.148874338981631211,
    0.433395394129247191,
    0.679409568299024406,
    0.865063366688984511,
    0.973906528517171720,
];

/// Weights paired with [`GL_NODES`].
#[allow(clippy::excessive_precision)]
const GL_WEIGHTS: [f64; 5] = [
    0.295524224714752870,
    0.269266719309996355,
    0.219086362515982044,
    0.149451349150580593,
    0.066671344308688138,
];

/// Panels per breakpoint interval at the base refinement level.
pub const DEFAULT_PANELS: usize = 64;

/// Tolerance on the difference between two successive refinement levels.
pub const REFINEMENT_TOL: f64 = 1e-10;

/// 10-point Gauss-Legendre rule on a single panel [a, b].
fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut sum = 0.0;
    for (&x, &w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
        sum += w * (f(mid + half * x) + f(mid - half * x));
    }
    sum * half
}

/// Composite quadrature of `f` over [0, 1] with `panels` uniform panels per
/// interval between consecutive breakpoints.
///
/// Breakpoints must lie strictly inside (0, 1) and be strictly increasing.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, breakpoints: &[f64], panels: usize) -> f64 {
    debug_assert!(panels >= 1);
    let mut edges = Vec::with_capacity(breakpoints.len() + 2);
    edges.push(0.0);
    edges.extend_from_slice(breakpoints);
    edges.push(1.0);

    let mut total = 0.0;
    for pair in edges.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let h = (hi - lo) / panels as f64;
        for p in 0..panels {
            let a = lo + p as f64 * h;
            total += panel(f, a, a + h);
        }
    }
    total
}

/// Integrate with the default panel count and verify the result against one
/// refinement doubling.
pub fn integrate_checked<F: Fn(f64) -> f64>(f: &F, breakpoints: &[f64]) -> Result<f64> {
    let coarse = integrate(f, breakpoints, DEFAULT_PANELS);
    let fine = integrate(f, breakpoints, 2 * DEFAULT_PANELS);
    let difference = (coarse - fine).abs();
    if difference > REFINEMENT_TOL {
        return Err(Error::QuadratureNotConverged {
            difference,
            tolerance: REFINEMENT_TOL,
        });
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn weights_sum_to_two() {
        let s: f64 = GL_WEIGHTS.iter().sum();
        assert!((2.0 * s - 2.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_degree_19() {
        // A single 10-point panel integrates polynomials up to degree 19 exactly.
        let v = integrate(&|x: f64| x.powi(19), &[], 1);
        assert!((v - 0.05).abs() < 1e-15, "got {v}");
    }

    #[test]
    fn oscillatory_integrand() {
        let v = integrate(
            &|x: f64| (30.0 * PI * x).sin() * (29.0 * PI * x).sin(),
            &[],
            64,
        );
        assert!(v.abs() < 1e-13, "got {v}");
        let w = integrate(&|x: f64| (2.0 * PI * x).cos().powi(2), &[], 64);
        assert!((w - 0.5).abs() < 1e-13, "got {w}");
    }

    #[test]
    fn breakpoints_make_step_functions_exact() {
        let step = |x: f64| {
            if x <= 0.3 {
                1.0
            } else if x <= 0.7 {
                1.1
            } else {
                1.0
            }
        };
        let v = integrate_checked(&step, &[0.3, 0.7]).unwrap();
        assert!((v - 1.04).abs() < 1e-14, "got {v}");
    }

    #[test]
    fn jump_without_breakpoint_is_flagged() {
        let step = |x: f64| if x < 0.51 { 0.0 } else { 1.0 };
        // The jump is off the panel grid, so refinement keeps moving the answer.
        let err = integrate_checked(&step, &[]).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }

    #[test]
    fn trace_identity_weight() {
        // Diagonal of the Dirichlet Green kernel integrates to 1/6.
        let v = integrate_checked(&|x: f64| x * (1.0 - x), &[]).unwrap();
        assert!((v - 1.0 / 6.0).abs() < 1e-14);
    }
}
