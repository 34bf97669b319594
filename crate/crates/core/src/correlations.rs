//! Closed-form correlation functions for the singlet and GHZ states under
//! local depolarizing noise.

use num_complex::Complex64;

use crate::error::{domain, BellError, Result};
use crate::geometry::{BlochVector, Triad};

/// Local depolarizing noise as a visibility `γ ∈ [0, 1]`; `γ = 1` is
/// noiseless.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NoiseLevel(f64);

impl NoiseLevel {
    pub const NOISELESS: NoiseLevel = NoiseLevel(1.0);

    pub fn new(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return domain(format!("noise level γ = {gamma} outside [0, 1]"));
        }
        Ok(NoiseLevel(gamma))
    }

    pub fn gamma(&self) -> f64 {
        self.0
    }
}

/// Number of joint settings for `n` parties.
pub fn settings_count(n: usize) -> usize {
    3usize.pow(n as u32)
}

/// Base-3 index of a setting vector, party 0 least significant.
pub fn setting_index(settings: &[u8]) -> usize {
    settings
        .iter()
        .rev()
        .fold(0, |acc, &s| acc * 3 + usize::from(s))
}

/// Inverse of [`setting_index`].
pub fn settings_of(mut index: usize, n: usize) -> Vec<u8> {
    (0..n)
        .map(|_| {
            let s = (index % 3) as u8;
            index /= 3;
            s
        })
        .collect()
}

/// `E(s⃗)` for all `3ᴺ` joint settings, stored densely by [`setting_index`].
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTensor {
    n_parties: usize,
    values: Vec<f64>,
}

impl CorrelationTensor {
    pub fn new(n_parties: usize, values: Vec<f64>) -> Result<Self> {
        if n_parties == 0 {
            return domain("a correlation tensor needs at least one party");
        }
        let expected = settings_count(n_parties);
        if values.len() != expected {
            return Err(BellError::DimensionMismatch {
                expected,
                found: values.len(),
            });
        }
        Ok(CorrelationTensor { n_parties, values })
    }

    pub fn zeros(n_parties: usize) -> Self {
        CorrelationTensor {
            n_parties,
            values: vec![0.0; settings_count(n_parties)],
        }
    }

    pub fn n_parties(&self) -> usize {
        self.n_parties
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, settings: &[u8]) -> f64 {
        debug_assert_eq!(settings.len(), self.n_parties);
        self.values[setting_index(settings)]
    }

    pub fn at(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        CorrelationTensor {
            n_parties: self.n_parties,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Reorders parties: party `k` of the result is party `order[k]` of
    /// `self`.
    pub fn permute_parties(&self, order: &[usize]) -> Result<Self> {
        self.check_parties(order.len())?;
        let values = (0..self.values.len())
            .map(|i| {
                let s = settings_of(i, self.n_parties);
                let mut src = vec![0u8; self.n_parties];
                for (k, &from) in order.iter().enumerate() {
                    src[from] = s[k];
                }
                self.get(&src)
            })
            .collect();
        Ok(CorrelationTensor {
            n_parties: self.n_parties,
            values,
        })
    }

    /// Renames each party's settings: setting `s` of party `n` in the result
    /// is setting `maps[n][s]` of `self`.
    pub fn relabel_settings(&self, maps: &[[u8; 3]]) -> Result<Self> {
        self.check_parties(maps.len())?;
        let values = (0..self.values.len())
            .map(|i| {
                let s: Vec<u8> = settings_of(i, self.n_parties)
                    .iter()
                    .zip(maps)
                    .map(|(&s, m)| m[usize::from(s)])
                    .collect();
                self.get(&s)
            })
            .collect();
        Ok(CorrelationTensor {
            n_parties: self.n_parties,
            values,
        })
    }

    pub(crate) fn check_parties(&self, n: usize) -> Result<()> {
        if n != self.n_parties {
            return Err(BellError::DimensionMismatch {
                expected: self.n_parties,
                found: n,
            });
        }
        Ok(())
    }
}

/// `E = -γ² v₁·v₂`.
pub fn singlet_correlation(v1: &BlochVector, v2: &BlochVector, noise: NoiseLevel) -> f64 {
    let g = noise.gamma();
    -g * g * v1.dot(v2)
}

pub fn singlet_tensor(t1: &Triad, t2: &Triad, noise: NoiseLevel) -> CorrelationTensor {
    let mut values = vec![0.0; 9];
    for s1 in 0..3u8 {
        for s2 in 0..3u8 {
            values[setting_index(&[s1, s2])] =
                singlet_correlation(t1.axis(s1.into()), t2.axis(s2.into()), noise);
        }
    }
    CorrelationTensor {
        n_parties: 2,
        values,
    }
}

/// Weight of the transverse `Re ∏(x + iy)` term in the GHZ correlation.
///
/// `Exact` is what the trace gives. `Half` reproduces the weight as printed
/// in the original derivation and exists only so the discrepancy can be
/// demonstrated against the dense simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransverseWeight {
    #[default]
    Exact,
    Half,
}

impl TransverseWeight {
    fn factor(self) -> f64 {
        match self {
            TransverseWeight::Exact => 1.0,
            TransverseWeight::Half => 0.5,
        }
    }
}

/// GHZ correlations:
/// `E(s⃗) = γᴺ [δ_N ∏ (Ω_j)_z + Re ∏ ((Ω_j)_x + i (Ω_j)_y)]`,
/// where `δ_N = 1` for even `N` and 0 for odd `N`.
pub fn ghz_tensor(triads: &[Triad], noise: NoiseLevel) -> Result<CorrelationTensor> {
    ghz_tensor_weighted(triads, noise, TransverseWeight::Exact)
}

pub fn ghz_tensor_weighted(
    triads: &[Triad],
    noise: NoiseLevel,
    weight: TransverseWeight,
) -> Result<CorrelationTensor> {
    let n = triads.len();
    if n < 2 {
        return domain(format!("GHZ correlations need at least 2 parties, got {n}"));
    }
    let z_weight = if n.is_multiple_of(2) { 1.0 } else { 0.0 };

    // Party-by-party products; party 0 is the fastest-varying index.
    let mut transverse = vec![Complex64::new(1.0, 0.0)];
    let mut axial = vec![1.0];
    for t in triads {
        let len = transverse.len();
        let mut next_t = Vec::with_capacity(len * 3);
        let mut next_z = Vec::with_capacity(len * 3);
        for axis in t.axes() {
            let c = Complex64::new(axis.x(), axis.y());
            next_t.extend(transverse.iter().map(|p| p * c));
            next_z.extend(axial.iter().map(|p| p * axis.z()));
        }
        transverse = next_t;
        axial = next_z;
    }

    let scale = noise.gamma().powi(n as i32);
    let w = weight.factor();
    let values = transverse
        .iter()
        .zip(&axial)
        .map(|(t, z)| scale * (z_weight * z + w * t.re))
        .collect();
    Ok(CorrelationTensor {
        n_parties: n,
        values,
    })
}
