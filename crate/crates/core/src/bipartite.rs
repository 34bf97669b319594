//! Analytic treatment of the two-party case in canonical coordinates.
//!
//! In the canonical region three CHSH inequalities decide whether a pair of
//! triads violates:
//!
//! ```text
//! cos²(θ/2) sin(χ₋ + π/4) ≤ 2^{-1/2} γ⁻²
//! |a² - b² + 2ab|         ≤ γ⁻²
//! ```
//!
//! with `a = cos(χ₋/2) cos(θ/2)` and `b = cos(χ₊/2) sin(θ/2)`. The companion
//! `sin(χ₋ - π/4)` inequality can never be violated in the region.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

use rayon::prelude::*;

use crate::correlations::NoiseLevel;
use crate::error::{domain, Result};
use crate::geometry::CanonicalBipartite;

/// Default points per axis for [`violation_probability_integral`].
pub const DEFAULT_RESOLUTION: usize = 256;

/// Smallest quadrature resolution accepted.
pub const MIN_RESOLUTION: usize = 64;

/// `∫ sin θ dθ dχ₋ dχ₊` over the canonical region: `(1/2)(π/4)(π/2)`.
pub const REGION_WEIGHT: f64 = PI * PI / 16.0;

/// Lower end of the noise range where the closed-form bound holds,
/// `2 / 18^{1/4}`.
pub fn bound_validity_floor() -> f64 {
    2.0 / 18f64.powf(0.25)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticIntermediates {
    pub a: f64,
    pub b: f64,
}

/// Monte Carlo estimate of a probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbabilityEstimate {
    pub p_hat: f64,
    pub samples: u64,
    pub std_error: f64,
}

impl ProbabilityEstimate {
    pub fn from_counts(successes: u64, samples: u64) -> Self {
        let p_hat = if samples == 0 {
            0.0
        } else {
            successes as f64 / samples as f64
        };
        let std_error = if samples == 0 {
            0.0
        } else {
            (p_hat * (1.0 - p_hat) / samples as f64).sqrt()
        };
        ProbabilityEstimate {
            p_hat,
            samples,
            std_error,
        }
    }
}

fn check_point(point: &CanonicalBipartite) -> Result<()> {
    CanonicalBipartite::new(point.theta, point.chi_minus, point.chi_plus).map(|_| ())
}

fn check_positive(noise: NoiseLevel) -> Result<f64> {
    let g = noise.gamma();
    if g <= 0.0 {
        return domain("γ must be positive here (γ⁻² is undefined at 0)");
    }
    Ok(g)
}

pub fn analytic_ab(point: &CanonicalBipartite) -> Result<AnalyticIntermediates> {
    check_point(point)?;
    Ok(ab_unchecked(point.theta, point.chi_minus, point.chi_plus))
}

#[inline]
fn ab_unchecked(theta: f64, chi_minus: f64, chi_plus: f64) -> AnalyticIntermediates {
    let (sh, ch) = (0.5 * theta).sin_cos();
    AnalyticIntermediates {
        a: (0.5 * chi_minus).cos() * ch,
        b: (0.5 * chi_plus).cos() * sh,
    }
}

/// Left-hand sides of the two retained inequalities, scaled so that each
/// is violated when it exceeds `γ⁻²`.
#[inline]
fn scaled_sides(theta: f64, chi_minus: f64, chi_plus: f64) -> (f64, f64) {
    let c = (0.5 * theta).cos();
    let first = c * c * (chi_minus + FRAC_PI_4).sin() / FRAC_1_SQRT_2;
    let AnalyticIntermediates { a, b } = ab_unchecked(theta, chi_minus, chi_plus);
    let second = (a * a - b * b + 2.0 * a * b).abs();
    (first, second)
}

#[inline]
fn violates_unchecked(theta: f64, chi_minus: f64, chi_plus: f64, inv_g2: f64) -> bool {
    let (first, second) = scaled_sides(theta, chi_minus, chi_plus);
    first > inv_g2 || second > inv_g2
}

/// Whether either retained inequality is violated at `point`.
pub fn region_violates(point: &CanonicalBipartite, noise: NoiseLevel) -> Result<bool> {
    check_point(point)?;
    let g = check_positive(noise)?;
    Ok(violates_unchecked(
        point.theta,
        point.chi_minus,
        point.chi_plus,
        1.0 / (g * g),
    ))
}

/// Whether the dropped `sin(χ₋ - π/4)` inequality is violated.
pub fn minus_branch_violates(point: &CanonicalBipartite, noise: NoiseLevel) -> Result<bool> {
    check_point(point)?;
    let g = check_positive(noise)?;
    let c = (0.5 * point.theta).cos();
    Ok(c * c * (point.chi_minus - FRAC_PI_4).sin().abs() > FRAC_1_SQRT_2 / (g * g))
}

/// `L(θ, γ) = asin(2^{-1/2} γ⁻² cos⁻²(θ/2)) - π/4`. The first inequality is
/// violated exactly when `χ₋ > L`. When the arcsine argument exceeds one
/// the result saturates at `π/4`: no `χ₋` in the region violates.
pub fn chi_threshold(theta: f64, noise: NoiseLevel) -> Result<f64> {
    if !(0.0..=FRAC_PI_3).contains(&theta) {
        return domain(format!("theta = {theta} outside [0, π/3]"));
    }
    let g = check_positive(noise)?;
    let c = (0.5 * theta).cos();
    let arg = FRAC_1_SQRT_2 / (g * g * c * c);
    if arg > 1.0 {
        return Ok(FRAC_PI_4);
    }
    Ok(arg.asin() - FRAC_PI_4)
}

/// `x(γ) = acos(γ^{1/6})`.
pub fn theta_cut(noise: NoiseLevel) -> Result<f64> {
    let g = check_positive(noise)?;
    Ok(g.powf(1.0 / 6.0).acos())
}

/// Upper bound `(1 - γ^{1/6}) / 4` on the non-violating fraction, valid
/// for `γ ≥ 2/18^{1/4}`.
pub fn nonviolation_bound(noise: NoiseLevel) -> Result<f64> {
    let g = noise.gamma();
    let floor = bound_validity_floor();
    // Allow the rounded floor 0.97097 that callers naturally type.
    if g < floor - 1e-6 {
        return domain(format!("bound only holds for γ ≥ {floor:.6}, got {g}"));
    }
    Ok((1.0 - g.powf(1.0 / 6.0)) / 4.0)
}

/// Midpoint-rule estimate of
/// `p(γ) = (16/π²) ∫ sin θ f(θ, χ₋, χ₊, γ) dθ dχ₋ dχ₊` over the canonical
/// region, with `resolution` points per axis. The grid weights are
/// normalized to sum to one rather than to [`REGION_WEIGHT`].
pub fn violation_probability_integral(noise: NoiseLevel, resolution: usize) -> Result<f64> {
    let g = check_positive(noise)?;
    if resolution < MIN_RESOLUTION {
        return domain(format!("resolution {resolution} below {MIN_RESOLUTION}"));
    }
    let inv_g2 = 1.0 / (g * g);
    let h_theta = FRAC_PI_3 / resolution as f64;
    let h_minus = FRAC_PI_4 / resolution as f64;
    let h_plus = FRAC_PI_2 / resolution as f64;
    let mid = |i: usize, h: f64| (i as f64 + 0.5) * h;

    // Per-θ slices are summed in index order so the result does not depend
    // on how rayon splits the work. Normalizing by the discrete weight keeps
    // the estimate inside [0, 1].
    let slices: Vec<f64> = (0..resolution)
        .into_par_iter()
        .map(|i| {
            let theta = mid(i, h_theta);
            let mut count = 0u64;
            for j in 0..resolution {
                let chi_minus = mid(j, h_minus);
                for k in 0..resolution {
                    if violates_unchecked(theta, chi_minus, mid(k, h_plus), inv_g2) {
                        count += 1;
                    }
                }
            }
            theta.sin() * count as f64
        })
        .collect();
    let total: f64 = slices.iter().sum();
    let weight: f64 = (0..resolution).map(|i| mid(i, h_theta).sin()).sum::<f64>()
        * (resolution * resolution) as f64;
    Ok(total / weight)
}
