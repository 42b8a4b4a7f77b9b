//! Nonnegative cosine polynomials with prescribed spectrum, difference-avoiding
//! densities, and the inequality `δ_H <= γ_H` between them.
//!
//! Floating point is confined to this module.

mod density;
pub mod simplex;

use std::f64::consts::PI;

use num_bigint::BigInt;
use serde::Serialize;

use crate::coloring::{self, ColoringError};
use crate::rational::{self, Rational};
use crate::sequences::LacunarySequence;
use crate::survivor::ThetaCertificate;
use simplex::SimplexError;

pub const COMPARE_TOL: f64 = 1e-6;
pub const NORMALIZATION_TOL: f64 = 1e-9;
pub const MAX_SPECTRUM: usize = 64;
pub const MAX_MASK_WIDTH: u64 = 24;
/// Verification grid is this many times finer than the LP grid.
pub const REFINE: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VdcError {
    #[error("spectrum has {0} frequencies, more than 64")]
    SpectrumTooLarge(usize),
    #[error("frequencies must be positive")]
    ZeroFrequency,
    #[error("grid {grid} is below 8 * max(H) = {needed}")]
    GridTooCoarse { grid: usize, needed: usize },
    #[error("linear program failed: {0}")]
    Lp(#[from] SimplexError),
    #[error("max(H) = {0} exceeds the mask width 24")]
    MaskTooWide(u64),
    #[error("period {period} must exceed 2 * max(H) = {needed}")]
    PeriodTooSmall { period: usize, needed: u64 },
    #[error("truncation is empty")]
    EmptyTruncation,
    #[error("certificate terms do not match the sequence truncation")]
    TruncationMismatch,
    #[error(transparent)]
    Coloring(#[from] ColoringError),
}

fn normalize(h: &[u64]) -> Result<Vec<u64>, VdcError> {
    if h.contains(&0) {
        return Err(VdcError::ZeroFrequency);
    }
    let mut h = h.to_vec();
    h.sort_unstable();
    h.dedup();
    if h.len() > MAX_SPECTRUM {
        return Err(VdcError::SpectrumTooLarge(h.len()));
    }
    Ok(h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrigPolySolution {
    pub spectrum: Vec<u64>,
    pub a0: f64,
    /// `a_h`, aligned with `spectrum`.
    pub coefficients: Vec<f64>,
    pub grid_size: usize,
    pub min_on_grid: f64,
    pub min_on_fine_grid: f64,
    /// Shift that makes `T + eta` nonnegative everywhere.
    pub eta: f64,
    pub gamma_lower: f64,
    pub gamma_upper: f64,
    pub iterations: usize,
}

impl TrigPolySolution {
    pub fn eval(&self, x: f64) -> f64 {
        self.a0
            + self
                .spectrum
                .iter()
                .zip(&self.coefficients)
                .map(|(&h, a)| a * (2.0 * PI * h as f64 * x).cos())
                .sum::<f64>()
    }

    /// `T(0)`.
    pub fn value_at_zero(&self) -> f64 {
        self.a0 + self.coefficients.iter().sum::<f64>()
    }

    pub fn contains(&self, gamma: f64) -> bool {
        self.gamma_lower - COMPARE_TOL <= gamma && gamma <= self.gamma_upper + COMPARE_TOL
    }
}

/// Min of `T` on `g / grid`, `g = 0..=grid/2` (T is even about 0).
fn grid_min(sol: &TrigPolySolution, grid: usize) -> f64 {
    (0..=grid / 2)
        .map(|g| sol.eval(g as f64 / grid as f64))
        .fold(f64::INFINITY, f64::min)
}

/// Brackets `γ_H = inf a_0` over `T >= 0`, `T(0) = 1`, spectrum in `H`.
///
/// The LP is solved in dual form: minimize `Σ z_g` subject to
/// `Σ_g z_g (1 - cos 2πhg/N) = 1` for each `h`. Its multipliers are the
/// `a_h`, and `a_0 = 1 - Σ a_h`. The grid optimum is a lower bound. The
/// upper bound shifts `T` by `η`, the negated minimum on a finer grid less
/// the largest possible dip between grid points, and renormalizes.
pub fn gamma_lp(h: &[u64], grid: usize) -> Result<TrigPolySolution, VdcError> {
    let h = normalize(h)?;
    let Some(&max_h) = h.last() else {
        return Ok(TrigPolySolution {
            spectrum: Vec::new(),
            a0: 1.0,
            coefficients: Vec::new(),
            grid_size: grid,
            min_on_grid: 1.0,
            min_on_fine_grid: 1.0,
            eta: 0.0,
            gamma_lower: 1.0,
            gamma_upper: 1.0,
            iterations: 0,
        });
    };
    let needed = 8 * max_h as usize;
    if grid < needed {
        return Err(VdcError::GridTooCoarse { grid, needed });
    }
    let points: Vec<usize> = (1..=grid / 2).collect();
    let a: Vec<Vec<f64>> = h
        .iter()
        .map(|&freq| {
            points
                .iter()
                .map(|&g| 1.0 - (2.0 * PI * ((freq as usize * g) % grid) as f64 / grid as f64).cos())
                .collect()
        })
        .collect();
    let b = vec![1.0; h.len()];
    let c = vec![1.0; points.len()];
    let lp = simplex::solve(&a, &b, &c, 100_000)?;
    let coefficients = lp.dual;
    let a0 = 1.0 - coefficients.iter().sum::<f64>();
    let mut sol = TrigPolySolution {
        spectrum: h,
        a0,
        coefficients,
        grid_size: grid,
        min_on_grid: 0.0,
        min_on_fine_grid: 0.0,
        eta: 0.0,
        gamma_lower: 1.0 - lp.objective,
        gamma_upper: 1.0,
        iterations: lp.iterations,
    };
    sol.min_on_grid = grid_min(&sol, grid);
    let fine = grid * REFINE;
    sol.min_on_fine_grid = grid_min(&sol, fine);
    let lipschitz: f64 = 2.0
        * PI
        * sol
            .spectrum
            .iter()
            .zip(&sol.coefficients)
            .map(|(&f, a)| f as f64 * a.abs())
            .sum::<f64>();
    sol.eta = (lipschitz / (2.0 * fine as f64) - sol.min_on_fine_grid).max(0.0);
    sol.gamma_upper = (sol.a0 + sol.eta) / (1.0 + sol.eta);
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DensityResult {
    pub spectrum: Vec<u64>,
    pub period: usize,
    pub best_set: Vec<u64>,
    #[serde(with = "rational::serde_pq")]
    pub density: Rational,
}

impl DensityResult {
    /// Direct scan of all pairwise cyclic differences.
    pub fn avoids(&self) -> bool {
        let n = self.period as u64;
        self.best_set.iter().all(|&a| {
            self.best_set.iter().all(|&b| {
                a == b || {
                    let d = (a + n - b) % n;
                    !self.spectrum.contains(&d) && !self.spectrum.contains(&(n - d))
                }
            })
        })
    }
}

/// Densest `N`-periodic set whose differences avoid `H`.
pub fn delta_dp(h: &[u64], period: usize) -> Result<DensityResult, VdcError> {
    let h = normalize(h)?;
    let max_h = h.last().copied().unwrap_or(0);
    if max_h > MAX_MASK_WIDTH {
        return Err(VdcError::MaskTooWide(max_h));
    }
    if period as u64 <= 2 * max_h || period == 0 {
        return Err(VdcError::PeriodTooSmall {
            period,
            needed: 2 * max_h,
        });
    }
    let best_set = if h.is_empty() {
        (0..period as u64).collect()
    } else {
        density::max_avoiding_set(&h, period)
    };
    let density = Rational::new(BigInt::from(best_set.len()), BigInt::from(period));
    Ok(DensityResult {
        spectrum: h,
        period,
        best_set,
        density,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RuzsaReport {
    pub spectrum: Vec<u64>,
    pub period: usize,
    pub grid: usize,
    #[serde(with = "rational::serde_pq")]
    pub density: Rational,
    pub gamma_lower: f64,
    pub gamma_upper: f64,
    pub iterations: usize,
    pub passed: bool,
}

pub fn check_ruzsa(h: &[u64], period: usize, grid: usize) -> Result<RuzsaReport, VdcError> {
    let dens = delta_dp(h, period)?;
    let gamma = gamma_lp(h, grid)?;
    let passed = rational::to_f64(&dens.density) <= gamma.gamma_upper + COMPARE_TOL && dens.avoids();
    Ok(RuzsaReport {
        spectrum: dens.spectrum,
        period,
        grid,
        density: dens.density,
        gamma_lower: gamma.gamma_lower,
        gamma_upper: gamma.gamma_upper,
        iterations: gamma.iterations,
        passed,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CorollaryReport {
    pub truncation: usize,
    pub grid: usize,
    /// Density of the densest Bohr class of the certificate's coloring.
    #[serde(with = "rational::serde_pq")]
    pub class_density: Rational,
    /// `1 / ceil(1/delta)`.
    #[serde(with = "rational::serde_pq")]
    pub color_bound: Rational,
    pub gamma_lower: f64,
    pub gamma_upper: f64,
    pub iterations: usize,
    pub passed: bool,
}

/// Checks class density `<= δ_S <= γ_S` for the truncation `S` of a certificate.
pub fn corollary_check(seq: &LacunarySequence, cert: &ThetaCertificate, grid: usize) -> Result<CorollaryReport, VdcError> {
    if cert.terms.is_empty() {
        return Err(VdcError::EmptyTruncation);
    }
    if seq.terms().get(..cert.n()) != Some(&cert.terms[..]) {
        return Err(VdcError::TruncationMismatch);
    }
    let gamma = gamma_lp(&cert.terms, grid)?;
    let coloring = coloring::color_from_certificate(cert, (0, 0))?;
    let (_, class_density) = coloring::densest_color_class(&coloring)?;
    let color_bound = Rational::new(BigInt::from(1), BigInt::from(coloring.k()));
    let passed = rational::to_f64(&class_density) <= gamma.gamma_upper + COMPARE_TOL;
    Ok(CorollaryReport {
        truncation: cert.n(),
        grid,
        class_density,
        color_bound,
        gamma_lower: gamma.gamma_lower,
        gamma_upper: gamma.gamma_upper,
        iterations: gamma.iterations,
        passed,
    })
}
