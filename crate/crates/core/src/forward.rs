//! Synthetic eigenvalue data for -u'' = lambda rho u via Chebyshev
//! pseudospectral collocation, plus exact spectra for constant densities and
//! seeded additive noise.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::basis::{BoundaryCondition, Density};
use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance on the imaginary part below which a computed eigenvalue
/// counts as real.
pub const REALITY_TOL: f64 = 1e-8;

/// Collocation discretization parameters.
#[derive(Debug, Clone, Copy)]
pub struct CollocationConfig {
    /// Number of Chebyshev intervals; the grid has `intervals + 1` nodes.
    pub intervals: usize,
    pub bc: BoundaryCondition,
    /// Leading fraction of the discrete eigenvalues trusted as accurate.
    pub reliable_fraction: f64,
}

impl Default for CollocationConfig {
    fn default() -> Self {
        CollocationConfig {
            intervals: 200,
            bc: BoundaryCondition::Dirichlet,
            reliable_fraction: 0.4,
        }
    }
}

impl CollocationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.intervals < 4 {
            return Err(Error::InvalidConfig(
                "collocation needs at least 4 intervals".into(),
            ));
        }
        if !(self.reliable_fraction > 0.0 && self.reliable_fraction <= 1.0) {
            return Err(Error::InvalidConfig(
                "reliable_fraction must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Where a spectrum came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    Analytic,
    Collocation,
    Noisy { sigma: f64, seed: u64 },
}

/// An ordered finite list of generalized eigenvalues.
#[derive(Debug, Clone)]
pub struct Spectrum {
    lambdas: Vec<f64>,
    pub provenance: Provenance,
    /// How many leading eigenvalues are trusted.
    pub reliable_count: usize,
}

impl Spectrum {
    pub fn new(lambdas: Vec<f64>, provenance: Provenance, reliable_count: usize) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidSpectrum("no eigenvalues".into()));
        }
        if lambdas[0] <= 0.0 {
            return Err(Error::InvalidSpectrum(format!(
                "smallest eigenvalue {} is not positive",
                lambdas[0]
            )));
        }
        for (k, pair) in lambdas.windows(2).enumerate() {
            if pair[1] <= pair[0] {
                return Err(Error::InvalidSpectrum(format!(
                    "eigenvalues #{} and #{} are not strictly increasing",
                    k + 1,
                    k + 2
                )));
            }
        }
        if reliable_count > lambdas.len() {
            return Err(Error::InvalidSpectrum(format!(
                "reliable_count {} exceeds {} eigenvalues",
                reliable_count,
                lambdas.len()
            )));
        }
        Ok(Spectrum {
            lambdas,
            provenance,
            reliable_count,
        })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// The trusted leading portion.
    pub fn reliable(&self) -> &[f64] {
        &self.lambdas[..self.reliable_count]
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn smallest(&self) -> f64 {
        self.lambdas[0]
    }
}

/// Chebyshev extreme points x_j = cos(j pi / p) on [-1, 1] and the standard
/// collocation differentiation matrix (diagonal via negative row sums).
pub fn cheb_grid_and_diff(p: usize) -> (Vec<f64>, DMatrix<f64>) {
    assert!(p >= 1, "need at least one interval");
    let n = p + 1;
    let nodes: Vec<f64> = (0..n).map(|j| (j as f64 * PI / p as f64).cos()).collect();
    let corner = |i: usize| -> f64 {
        if i == 0 || i == p {
            2.0
        } else {
            1.0
        }
    };
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = sign * corner(i) / (corner(j) * (nodes[i] - nodes[j]));
            }
        }
    }
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            if i != j {
                sum += d[(i, j)];
            }
        }
        d[(i, i)] = -sum;
    }
    (nodes, d)
}

/// Solve the generalized eigenvalue problem by collocation and keep the real
/// positive part of the discrete spectrum.
pub fn solve_forward(density: &Density, cfg: &CollocationConfig) -> Result<Spectrum> {
    cfg.validate()?;
    let p = cfg.intervals;
    let (xi, d) = cheb_grid_and_diff(p);
    // Map [-1, 1] onto [0, 1]; x runs from 1 down to 0 along the grid.
    let x: Vec<f64> = xi.iter().map(|&v| (v + 1.0) / 2.0).collect();
    let d2 = &d * &d;

    let interior = p - 1;
    let mut rho = Vec::with_capacity(interior);
    for &node in &x[1..p] {
        let value = density.eval(node);
        if value <= 0.0 {
            return Err(Error::NonPositiveDensity { x: node, value });
        }
        rho.push(value);
    }

    // Second derivative on [0, 1] with boundary conditions folded in.
    let reduced = match cfg.bc {
        BoundaryCondition::Dirichlet => {
            // Trim both boundary rows/columns.
            let mut l = DMatrix::zeros(interior, interior);
            for r in 0..interior {
                for c in 0..interior {
                    l[(r, c)] = 4.0 * d2[(r + 1, c + 1)];
                }
            }
            l
        }
        BoundaryCondition::DirichletNeumann => {
            // u(0) = 0 trims node p (x = 0); u'(1) = 0 replaces the equation
            // at node 0 (x = 1) by the first-derivative row, then node 0 is
            // eliminated from the interior block.
            let denom = 2.0 * d[(0, 0)];
            let mut l = DMatrix::zeros(interior, interior);
            for r in 0..interior {
                for c in 0..interior {
                    l[(r, c)] = 4.0 * d2[(r + 1, c + 1)]
                        - 4.0 * d2[(r + 1, 0)] * 2.0 * d[(0, c + 1)] / denom;
                }
            }
            l
        }
    };

    let mut operator = reduced;
    for r in 0..interior {
        for c in 0..interior {
            operator[(r, c)] = -operator[(r, c)] / rho[r];
        }
    }

    let eigenvalues = linalg::general_eigenvalues(&operator)?;
    let mut kept: Vec<f64> = eigenvalues
        .iter()
        .filter(|z| z.im.abs() <= REALITY_TOL * z.norm() && z.re > 0.0)
        .map(|z| z.re)
        .collect();
    kept.sort_by(|a, b| a.partial_cmp(b).expect("filtered values are finite"));

    let reliable_count = (cfg.reliable_fraction * interior as f64).floor() as usize;
    if kept.len() < reliable_count {
        return Err(Error::ComplexSpectrum {
            kept: kept.len(),
            required: reliable_count,
        });
    }
    Spectrum::new(kept, Provenance::Collocation, reliable_count)
}

/// Exact spectrum of the constant density rho = c under Dirichlet conditions:
/// lambda_k = k^2 pi^2 / c.
pub fn analytic_spectrum(c: f64, count: usize) -> Spectrum {
    assert!(c > 0.0 && count >= 1);
    let lambdas = (1..=count).map(|k| (k * k) as f64 * PI * PI / c).collect();
    Spectrum {
        lambdas,
        provenance: Provenance::Analytic,
        reliable_count: count,
    }
}

/// Add i.i.d. Gaussian noise from a seeded generator to every eigenvalue and
/// re-sort ascending.
pub fn add_noise(spectrum: &Spectrum, sigma: f64, seed: u64) -> Result<Spectrum> {
    assert!(sigma >= 0.0);
    if sigma == 0.0 {
        let mut out = spectrum.clone();
        out.provenance = Provenance::Noisy { sigma, seed };
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and nonnegative");
    let mut perturbed = Vec::with_capacity(spectrum.len());
    for (k, &lambda) in spectrum.lambdas().iter().enumerate() {
        let value = lambda + normal.sample(&mut rng);
        if value <= 0.0 {
            return Err(Error::NoiseDestroyedOrdering {
                index: k + 1,
                value,
            });
        }
        perturbed.push(value);
    }
    perturbed.sort_by(|a, b| a.partial_cmp(b).expect("values are finite"));
    Spectrum::new(
        perturbed,
        Provenance::Noisy { sigma, seed },
        spectrum.reliable_count,
    )
}
