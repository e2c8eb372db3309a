//! Benchmark densities used by the experiments and the test suite.

use std::sync::Arc;

use crate::basis::{BasisFn, BasisSpec, Density};

/// Cosine coefficients of the oscillatory benchmark density.
pub const RHO1_COEFFS: [f64; 7] = [1.0, 0.3, 0.2, 0.15, -0.1, -0.05, 0.02];

/// Oscillatory density: a combination of the first seven cosine modes.
pub fn rho1() -> Density {
    Density::new(BasisSpec::FourierCosine { size: 7 }, RHO1_COEFFS.to_vec())
        .expect("preset is consistent")
}

/// Smooth quadratic bump: rho(x) = 1 + (x - 1/2)^2.
pub fn rho2() -> Density {
    let f: BasisFn = Arc::new(|x: f64| 1.0 + (x - 0.5) * (x - 0.5));
    custom_density(f, vec![])
}

/// Evaluate rho2 directly.
pub fn rho2_fn(x: f64) -> f64 {
    1.0 + (x - 0.5) * (x - 0.5)
}

/// Gaussian dip: rho(x) = 1 - 0.3 exp(-20 (x - 1/2)^2).
pub fn rho3() -> Density {
    let f: BasisFn = Arc::new(rho3_fn);
    custom_density(f, vec![])
}

/// Evaluate rho3 directly.
pub fn rho3_fn(x: f64) -> f64 {
    1.0 - 0.3 * (-20.0 * (x - 0.5) * (x - 0.5)).exp()
}

/// Piecewise-constant density 1 / 1.1 / 1 with jumps at 0.3 and 0.7.
/// Values at the jump locations take the left limit.
pub fn rho4() -> Density {
    let f: BasisFn = Arc::new(rho4_fn);
    custom_density(f, vec![0.3, 0.7])
}

/// Evaluate rho4 directly (left limits at the jumps).
pub fn rho4_fn(x: f64) -> f64 {
    if x <= 0.3 {
        1.0
    } else if x <= 0.7 {
        1.1
    } else {
        1.0
    }
}

/// The constant density rho(x) = c.
pub fn constant(c: f64) -> Density {
    Density::constant(c)
}

/// Look up a preset by name.
pub fn by_name(name: &str) -> Option<Density> {
    match name {
        "rho1" => Some(rho1()),
        "rho2" => Some(rho2()),
        "rho3" => Some(rho3()),
        "rho4" => Some(rho4()),
        _ => None,
    }
}

fn custom_density(f: BasisFn, breakpoints: Vec<f64>) -> Density {
    let basis = BasisSpec::custom(vec![f], breakpoints).expect("preset is consistent");
    Density::new(basis, vec![1.0]).expect("preset is consistent")
}
