//! Seeded Monte Carlo experiments.
//!
//! Sample `i` of a run draws all of its randomness from ChaCha8 stream `i`
//! under the run's seed, so results are bit-identical whatever the number
//! of rayon workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bipartite::{region_violates, ProbabilityEstimate};
use crate::correlations::{
    ghz_tensor, ghz_tensor_weighted, singlet_tensor, CorrelationTensor, NoiseLevel,
    TransverseWeight,
};
use crate::error::{domain, Result};
use crate::geometry::{canonicalize_pair, haar_random_triad, Triad};
use crate::mabk::{MabkSweep, MAX_PARTIES};
use crate::oracle::{build_ghz, build_singlet, exact_tensor, MAX_QUBITS};

/// The stream for sample `index` of a run seeded with `seed`.
pub fn sample_stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Which shared state the parties hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StateKind {
    /// Singlet for two parties, GHZ otherwise.
    #[default]
    Auto,
    Singlet,
    Ghz,
}

impl StateKind {
    fn resolve(self, n: usize) -> Result<StateKind> {
        match (self, n) {
            (StateKind::Auto, 2) | (StateKind::Singlet, 2) => Ok(StateKind::Singlet),
            (StateKind::Singlet, _) => domain(format!("the singlet is a 2-party state, not {n}")),
            _ => Ok(StateKind::Ghz),
        }
    }
}

/// Suggested sample counts for interactive runs.
pub fn default_samples(n: usize) -> u64 {
    match n {
        0..=3 => 1_000_000,
        4 => 100_000,
        5 => 10_000,
        _ => 1_000,
    }
}

fn random_triads(rng: &mut ChaCha8Rng, n: usize) -> Vec<Triad> {
    (0..n).map(|_| haar_random_triad(rng)).collect()
}

fn tensor_for(state: StateKind, triads: &[Triad], noise: NoiseLevel) -> CorrelationTensor {
    match state {
        StateKind::Singlet => singlet_tensor(&triads[0], &triads[1], noise),
        _ => ghz_tensor(triads, noise).expect("at least two parties"),
    }
}

fn check_parties(n: usize) -> Result<()> {
    if !(2..=MAX_PARTIES).contains(&n) {
        return domain(format!("party count {n} outside 2..={MAX_PARTIES}"));
    }
    Ok(())
}

/// Fraction of Haar-random triad configurations that violate some MABK
/// labeling, with the default state for `n`.
pub fn estimate_probability(
    n: usize,
    noise: NoiseLevel,
    samples: u64,
    seed: u64,
) -> Result<ProbabilityEstimate> {
    estimate_probability_with(n, noise, samples, seed, StateKind::Auto)
}

pub fn estimate_probability_with(
    n: usize,
    noise: NoiseLevel,
    samples: u64,
    seed: u64,
    state: StateKind,
) -> Result<ProbabilityEstimate> {
    let violations = count_violations(n, noise, samples, seed, state)?;
    Ok(ProbabilityEstimate::from_counts(violations, samples))
}

fn count_violations(
    n: usize,
    noise: NoiseLevel,
    samples: u64,
    seed: u64,
    state: StateKind,
) -> Result<u64> {
    check_parties(n)?;
    let state = state.resolve(n)?;
    let sweep = MabkSweep::new(n)?;
    let violations: u64 = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_stream(seed, i);
            let triads = random_triads(&mut rng, n);
            let tensor = tensor_for(state, &triads, noise);
            u64::from(sweep.violates(&tensor).expect("party counts match"))
        })
        .sum();
    Ok(violations)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepConfig {
    pub n_parties: usize,
    pub gamma_min: f64,
    pub gamma_max: f64,
    pub steps: usize,
    pub samples_per_point: u64,
    pub seed: u64,
    pub state: StateKind,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        check_parties(self.n_parties)?;
        for g in [self.gamma_min, self.gamma_max] {
            if !(g > 0.0 && g <= 1.0) {
                return domain(format!("γ = {g} outside (0, 1]"));
            }
        }
        if self.gamma_min > self.gamma_max {
            return domain("gamma_min exceeds gamma_max");
        }
        if self.steps == 0 {
            return domain("steps must be at least 1");
        }
        if self.samples_per_point == 0 {
            return domain("samples_per_point must be at least 1");
        }
        Ok(())
    }

    /// Evenly spaced noise levels, endpoints included.
    pub fn gammas(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.gamma_min];
        }
        let span = self.gamma_max - self.gamma_min;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.gamma_max
                } else {
                    self.gamma_min + span * k as f64 / (self.steps - 1) as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub gamma: f64,
    pub n_parties: usize,
    pub samples: u64,
    pub violations: u64,
    pub p_hat: f64,
    pub std_error: f64,
}

/// One row per noise level. Every row reuses the same seed, so the same
/// measurement configurations are scored at each γ.
pub fn gamma_sweep(config: &SweepConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    config
        .gammas()
        .into_iter()
        .map(|gamma| {
            let violations = count_violations(
                config.n_parties,
                NoiseLevel::new(gamma)?,
                config.samples_per_point,
                config.seed,
                config.state,
            )?;
            let est = ProbabilityEstimate::from_counts(violations, config.samples_per_point);
            Ok(SweepRow {
                gamma,
                n_parties: config.n_parties,
                samples: est.samples,
                violations,
                p_hat: est.p_hat,
                std_error: est.std_error,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub n_parties: usize,
    pub trials: usize,
    /// Tensor entries compared.
    pub comparisons: usize,
    pub max_discrepancy: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Noise levels visited by [`oracle_crosscheck`].
pub const CROSSCHECK_GAMMAS: [f64; 3] = [1.0, 0.9, 0.5];

/// Compares the closed-form GHZ tensor (and, for two parties, the singlet
/// tensor) with the dense simulator over `trials` random configurations at
/// each of [`CROSSCHECK_GAMMAS`].
pub fn oracle_crosscheck(
    n: usize,
    trials: usize,
    tolerance: f64,
    seed: u64,
) -> Result<CrosscheckReport> {
    oracle_crosscheck_weighted(n, trials, tolerance, seed, TransverseWeight::Exact)
}

pub fn oracle_crosscheck_weighted(
    n: usize,
    trials: usize,
    tolerance: f64,
    seed: u64,
    weight: TransverseWeight,
) -> Result<CrosscheckReport> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return domain(format!("oracle supports 2..={MAX_QUBITS} parties, got {n}"));
    }
    let ghz = build_ghz(n)?;
    let singlet = build_singlet();
    let mut max_discrepancy = 0.0f64;
    let mut comparisons = 0;
    for (k, &gamma) in CROSSCHECK_GAMMAS.iter().enumerate() {
        let noise = NoiseLevel::new(gamma)?;
        for t in 0..trials {
            let mut rng = sample_stream(seed, (k * trials + t) as u64);
            let triads = random_triads(&mut rng, n);
            let mut pairs = vec![(
                ghz_tensor_weighted(&triads, noise, weight)?,
                exact_tensor(&ghz, &triads, noise)?,
            )];
            if n == 2 {
                pairs.push((
                    singlet_tensor(&triads[0], &triads[1], noise),
                    exact_tensor(&singlet, &triads, noise)?,
                ));
            }
            for (closed, exact) in &pairs {
                for (a, b) in closed.values().iter().zip(exact.values()) {
                    max_discrepancy = max_discrepancy.max((a - b).abs());
                    comparisons += 1;
                }
            }
        }
    }
    Ok(CrosscheckReport {
        n_parties: n,
        trials,
        comparisons,
        max_discrepancy,
        tolerance,
        passed: max_discrepancy <= tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionReport {
    pub gamma: f64,
    pub pairs: u64,
    /// Pairs whose canonical point violates one of the three reduced
    /// inequalities.
    pub region_violations: u64,
    /// Pairs violating some labeling in the full 36-labeling search.
    pub search_violations: u64,
    /// Pairs where the reduced inequalities report a violation that the full
    /// search does not confirm. Must be zero.
    pub counterexamples: u64,
    pub p_hat: f64,
    pub std_error: f64,
}

/// Scores Haar-random singlet pairs both through the canonical region and
/// through the full labeling search.
pub fn region_crosscheck(noise: NoiseLevel, pairs: u64, seed: u64) -> Result<RegionReport> {
    if noise.gamma() <= 0.0 {
        return domain("γ must be positive for the region test");
    }
    let sweep = MabkSweep::new(2)?;
    let (region, search, counter) = (0..pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_stream(seed, i);
            let t1 = haar_random_triad(&mut rng);
            let t2 = haar_random_triad(&mut rng);
            let (point, _) = canonicalize_pair(&t1, &t2);
            let r = region_violates(&point, noise).expect("canonical point in region");
            let s = sweep
                .violates(&singlet_tensor(&t1, &t2, noise))
                .expect("two parties");
            (u64::from(r), u64::from(s), u64::from(r && !s))
        })
        .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
    let est = ProbabilityEstimate::from_counts(search, pairs);
    Ok(RegionReport {
        gamma: noise.gamma(),
        pairs,
        region_violations: region,
        search_violations: search,
        counterexamples: counter,
        p_hat: est.p_hat,
        std_error: est.std_error,
    })
}
