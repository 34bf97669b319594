//! Dense state-vector reference simulator.
//!
//! Everything here is computed the slow, obvious way: explicit amplitudes,
//! Pauli observables applied qubit by qubit, and Born-rule sampling. The
//! closed forms in [`crate::correlations`] are checked against it.
//!
//! Qubit 0 (party 0) is the most significant bit of the amplitude index, so
//! `|0⟩|1⟩` has index 1.

use std::collections::HashMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::correlations::{setting_index, settings_count, CorrelationTensor, NoiseLevel};
use crate::error::{domain, BellError, Result};
use crate::geometry::{BlochVector, Triad};

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 10;

const NORM_TOL: f64 = 1e-12;

type Gate = [[Complex64; 2]; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return domain(format!("qubit count {n_qubits} outside 1..={MAX_QUBITS}"));
        }
        if amplitudes.len() != 1 << n_qubits {
            return Err(BellError::DimensionMismatch {
                expected: 1 << n_qubits,
                found: amplitudes.len(),
            });
        }
        let state = PureState {
            n_qubits,
            amplitudes,
        };
        if (state.norm_sqr() - 1.0).abs() > NORM_TOL {
            return domain("state is not normalized");
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(BellError::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `(|01⟩ - |10⟩)/√2`.
pub fn build_singlet() -> PureState {
    let c = |re: f64| Complex64::new(re, 0.0);
    PureState {
        n_qubits: 2,
        amplitudes: vec![c(0.0), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.0)],
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits.
pub fn build_ghz(n: usize) -> Result<PureState> {
    if !(2..=MAX_QUBITS).contains(&n) {
        return domain(format!("GHZ size {n} outside 2..={MAX_QUBITS}"));
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
    amplitudes[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amplitudes[(1 << n) - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(PureState {
        n_qubits: n,
        amplitudes,
    })
}

/// `Ω·σ⃗`.
fn observable(v: &BlochVector) -> Gate {
    let c = Complex64::new;
    [
        [c(v.z(), 0.0), c(v.x(), -v.y())],
        [c(v.x(), v.y()), c(-v.z(), 0.0)],
    ]
}

/// Rows are `⟨+|` and `⟨-|` of `Ω·σ⃗`, so applying it maps the measurement
/// eigenbasis onto the computational basis (`+1 ↦ 0`, `-1 ↦ 1`).
fn eigenbasis_change(v: &BlochVector) -> Gate {
    let (x, y, z) = (v.x(), v.y(), v.z());
    let (a, b) = if z >= 0.0 {
        let n = (2.0 * (1.0 + z)).sqrt();
        (
            Complex64::new((1.0 + z) / n, 0.0),
            Complex64::new(x / n, y / n),
        )
    } else {
        let n = (2.0 * (1.0 - z)).sqrt();
        (
            Complex64::new(x / n, -y / n),
            Complex64::new((1.0 - z) / n, 0.0),
        )
    };
    [[a.conj(), b.conj()], [-b, a]]
}

fn apply_gate(amplitudes: &mut [Complex64], n_qubits: usize, qubit: usize, gate: &Gate) {
    let stride = 1 << (n_qubits - 1 - qubit);
    for base in 0..amplitudes.len() {
        if base & stride != 0 {
            continue;
        }
        let (lo, hi) = (amplitudes[base], amplitudes[base | stride]);
        amplitudes[base] = gate[0][0] * lo + gate[0][1] * hi;
        amplitudes[base | stride] = gate[1][0] * lo + gate[1][1] * hi;
    }
}

/// `⟨ψ| ⊗ⱼ (Ωⱼ·σ⃗) |ψ⟩` without noise, as a complex number so the caller can
/// inspect the imaginary residue.
pub fn expectation(state: &PureState, directions: &[BlochVector]) -> Result<Complex64> {
    if directions.len() != state.n_qubits {
        return Err(BellError::DimensionMismatch {
            expected: state.n_qubits,
            found: directions.len(),
        });
    }
    let mut image = state.amplitudes.clone();
    for (q, v) in directions.iter().enumerate() {
        apply_gate(&mut image, state.n_qubits, q, &observable(v));
    }
    Ok(inner(&state.amplitudes, &image))
}

/// `γᴺ ⟨ψ| ⊗ⱼ (Ωⱼ·σ⃗) |ψ⟩`.
pub fn exact_correlation(
    state: &PureState,
    directions: &[BlochVector],
    noise: NoiseLevel,
) -> Result<f64> {
    let value = expectation(state, directions)?;
    Ok(noise.gamma().powi(directions.len() as i32) * value.re)
}

/// Every entry of the correlation tensor from the trace.
pub fn exact_tensor(
    state: &PureState,
    triads: &[Triad],
    noise: NoiseLevel,
) -> Result<CorrelationTensor> {
    let n = triads.len();
    if n != state.n_qubits {
        return Err(BellError::DimensionMismatch {
            expected: state.n_qubits,
            found: n,
        });
    }
    let values = (0..settings_count(n))
        .map(|i| {
            let dirs: Vec<BlochVector> = crate::correlations::settings_of(i, n)
                .iter()
                .zip(triads)
                .map(|(&s, t)| *t.axis(usize::from(s)))
                .collect();
            exact_correlation(state, &dirs, noise)
        })
        .collect::<Result<Vec<f64>>>()?;
    CorrelationTensor::new(n, values)
}

/// One round of the protocol: the setting each party chose and the outcome
/// bit it reported.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MeasurementRecord {
    pub settings: Vec<u8>,
    pub outcomes: Vec<u8>,
}

impl MeasurementRecord {
    pub fn new(settings: Vec<u8>, outcomes: Vec<u8>) -> Result<Self> {
        if settings.len() != outcomes.len() {
            return Err(BellError::DimensionMismatch {
                expected: settings.len(),
                found: outcomes.len(),
            });
        }
        if settings.iter().any(|&s| s > 2) || outcomes.iter().any(|&o| o > 1) {
            return domain("settings must be in 0..3 and outcomes in 0..2");
        }
        Ok(MeasurementRecord { settings, outcomes })
    }

    /// XOR of all outcome bits.
    pub fn parity(&self) -> u8 {
        self.outcomes.iter().fold(0, |acc, o| acc ^ o)
    }
}

/// Draws protocol rounds from a state measured with per-party triads.
///
/// Outcome distributions are computed per joint setting on first use and
/// cached.
pub struct Sampler<'a> {
    state: &'a PureState,
    triads: &'a [Triad],
    noise: NoiseLevel,
    cumulative: HashMap<usize, Vec<f64>>,
}

impl<'a> Sampler<'a> {
    pub fn new(state: &'a PureState, triads: &'a [Triad], noise: NoiseLevel) -> Result<Self> {
        if triads.len() != state.n_qubits {
            return Err(BellError::DimensionMismatch {
                expected: state.n_qubits,
                found: triads.len(),
            });
        }
        Ok(Sampler {
            state,
            triads,
            noise,
            cumulative: HashMap::new(),
        })
    }

    fn distribution(&mut self, settings: &[u8]) -> &[f64] {
        let (state, triads) = (self.state, self.triads);
        self.cumulative
            .entry(setting_index(settings))
            .or_insert_with(|| {
                let mut amps = state.amplitudes.clone();
                for (q, (&s, t)) in settings.iter().zip(triads).enumerate() {
                    apply_gate(
                        &mut amps,
                        state.n_qubits,
                        q,
                        &eigenbasis_change(t.axis(s.into())),
                    );
                }
                let mut acc = 0.0;
                amps.iter()
                    .map(|a| {
                        acc += a.norm_sqr();
                        acc
                    })
                    .collect()
            })
    }

    /// Measures with the given settings. Each outcome is then replaced by a
    /// fair coin with probability `1 - γ`.
    pub fn sample_at<R: Rng + ?Sized>(
        &mut self,
        settings: &[u8],
        rng: &mut R,
    ) -> MeasurementRecord {
        let n = self.state.n_qubits;
        let gamma = self.noise.gamma();
        let cumulative = self.distribution(settings);
        let u: f64 = rng.gen::<f64>() * cumulative[cumulative.len() - 1];
        let index = cumulative
            .partition_point(|&c| c <= u)
            .min(cumulative.len() - 1);
        let outcomes = (0..n)
            .map(|q| {
                let ideal = ((index >> (n - 1 - q)) & 1) as u8;
                if rng.gen::<f64>() < gamma {
                    ideal
                } else {
                    rng.gen_range(0..2u8)
                }
            })
            .collect();
        MeasurementRecord {
            settings: settings.to_vec(),
            outcomes,
        }
    }

    /// One round with every party choosing a setting uniformly.
    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> MeasurementRecord {
        let settings: Vec<u8> = (0..self.state.n_qubits)
            .map(|_| rng.gen_range(0..3u8))
            .collect();
        self.sample_at(&settings, rng)
    }
}

pub fn sample_records<R: Rng + ?Sized>(
    state: &PureState,
    triads: &[Triad],
    noise: NoiseLevel,
    shots: usize,
    rng: &mut R,
) -> Result<Vec<MeasurementRecord>> {
    if shots == 0 {
        return domain("at least one shot is required");
    }
    let mut sampler = Sampler::new(state, triads, noise)?;
    Ok((0..shots).map(|_| sampler.sample(rng)).collect())
}

/// Parity counts per joint setting.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyEstimate {
    n_parties: usize,
    counts: Vec<[u64; 2]>,
}

impl FrequencyEstimate {
    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn counts(&self, settings: &[u8]) -> [u64; 2] {
        self.counts[setting_index(settings)]
    }

    pub fn shots(&self, settings: &[u8]) -> u64 {
        let [even, odd] = self.counts(settings);
        even + odd
    }

    /// `p̂(a|s⃗)`, or `None` if the setting was never observed.
    pub fn probability(&self, parity: u8, settings: &[u8]) -> Option<f64> {
        let total = self.shots(settings);
        (total > 0).then(|| self.counts(settings)[usize::from(parity & 1)] as f64 / total as f64)
    }

    /// `Ê(s⃗) = p̂(0|s⃗) - p̂(1|s⃗)`, or `None` if the setting was never
    /// observed.
    pub fn correlation(&self, settings: &[u8]) -> Option<f64> {
        self.correlation_at(setting_index(settings))
    }

    pub fn correlation_at(&self, index: usize) -> Option<f64> {
        let [even, odd] = self.counts[index];
        let total = even + odd;
        (total > 0).then(|| (even as f64 - odd as f64) / total as f64)
    }

    /// Settings with no records.
    pub fn missing(&self) -> Vec<Vec<u8>> {
        (0..self.counts.len())
            .filter(|&i| self.counts[i] == [0, 0])
            .map(|i| crate::correlations::settings_of(i, self.n_parties))
            .collect()
    }

    /// The estimated tensor, if every setting was observed.
    pub fn to_tensor(&self) -> Option<CorrelationTensor> {
        let values = (0..self.counts.len())
            .map(|i| self.correlation_at(i))
            .collect::<Option<Vec<f64>>>()?;
        CorrelationTensor::new(self.n_parties, values).ok()
    }

    /// Largest `|Ê(s⃗) - E(s⃗)|`, or `None` if some setting is missing.
    pub fn max_deviation(&self, exact: &CorrelationTensor) -> Option<f64> {
        if exact.n_parties() != self.n_parties {
            return None;
        }
        (0..self.counts.len())
            .map(|i| self.correlation_at(i).map(|e| (e - exact.at(i)).abs()))
            .try_fold(0.0f64, |m, d| d.map(|d| m.max(d)))
    }
}

pub fn estimate_correlations(records: &[MeasurementRecord], n: usize) -> Result<FrequencyEstimate> {
    let mut counts = vec![[0u64; 2]; settings_count(n)];
    for r in records {
        if r.settings.len() != n || r.outcomes.len() != n {
            return Err(BellError::DimensionMismatch {
                expected: n,
                found: r.settings.len(),
            });
        }
        counts[setting_index(&r.settings)][usize::from(r.parity())] += 1;
    }
    Ok(FrequencyEstimate {
        n_parties: n,
        counts,
    })
}
