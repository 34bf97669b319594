//! MABK Bell expressions over all labelings of a party's three settings.
//!
//! A labeling picks, for every party, an ordered pair of distinct settings
//! `(τ(0), τ(1))`; the third setting is discarded. For `r⃗ ∈ Z₂ᴺ` the term
//! `E(τ(r⃗))` enters with weight `cos(Rπ/4)`, `R = N + 1 - 2|r⃗|`, and no
//! local model exceeds `2^{(N-1)/2}` in absolute value.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::correlations::CorrelationTensor;
use crate::error::{domain, Result};

/// Margin above the local bound required before a ratio counts as a
/// violation; aligned triads sit exactly on the bound.
pub const VIOLATION_EPS: f64 = 1e-9;

/// Labelings are only searched for up to this many parties.
pub const MAX_PARTIES: usize = 8;

/// Largest party count for which the full index table is precomputed.
const TABLE_PARTIES: usize = 6;

/// The six ordered pairs of distinct settings, in lexicographic order.
pub const ORDERED_PAIRS: [[u8; 2]; 6] = [[0, 1], [0, 2], [1, 0], [1, 2], [2, 0], [2, 1]];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Labeling {
    pairs: Vec<[u8; 2]>,
}

impl Labeling {
    pub fn new(pairs: Vec<[u8; 2]>) -> Result<Self> {
        for (n, p) in pairs.iter().enumerate() {
            if p[0] > 2 || p[1] > 2 || p[0] == p[1] {
                return domain(format!(
                    "party {n}: {p:?} is not an injective map into 0..3"
                ));
            }
        }
        Ok(Labeling { pairs })
    }

    /// The labeling at position `code` of [`enumerate_labelings`].
    pub fn from_code(mut code: usize, n: usize) -> Self {
        let mut pairs = vec![[0u8; 2]; n];
        for p in pairs.iter_mut().rev() {
            *p = ORDERED_PAIRS[code % 6];
            code /= 6;
        }
        Labeling { pairs }
    }

    pub fn code(&self) -> usize {
        self.pairs.iter().fold(0, |acc, p| {
            acc * 6 + ORDERED_PAIRS.iter().position(|q| q == p).unwrap()
        })
    }

    pub fn n_parties(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[[u8; 2]] {
        &self.pairs
    }

    /// `τ_n(r)`.
    pub fn setting(&self, party: usize, r: u8) -> u8 {
        self.pairs[party][usize::from(r)]
    }

    /// The setting the verifier ignores for this party.
    pub fn discarded(&self, party: usize) -> u8 {
        3 - self.pairs[party][0] - self.pairs[party][1]
    }
}

/// All `6ⁿ` labelings, lexicographic with party 0 most significant.
pub fn enumerate_labelings(n: usize) -> impl Iterator<Item = Labeling> {
    (0..6usize.pow(n as u32)).map(move |code| Labeling::from_code(code, n))
}

/// One summand of the Bell expression.
#[derive(Debug, Clone, PartialEq)]
pub struct MabkTerm {
    /// `r⃗` with bit `n` holding `r_n`.
    pub r: u32,
    pub big_r: i64,
    pub coefficient: f64,
}

/// `cos(Rπ/4)` with exact zeros.
fn cos_quarter_pi(big_r: i64) -> f64 {
    match big_r.rem_euclid(8) {
        0 => 1.0,
        1 | 7 => FRAC_1_SQRT_2,
        2 | 6 => 0.0,
        3 | 5 => -FRAC_1_SQRT_2,
        _ => -1.0,
    }
}

/// Coefficient for each Hamming weight `|r⃗| = 0..=n`.
pub fn coefficient_table(n: usize) -> Vec<f64> {
    (0..=n as i64)
        .map(|k| cos_quarter_pi(n as i64 + 1 - 2 * k))
        .collect()
}

/// All `2ⁿ` terms in order of `r⃗`.
pub fn mabk_terms(n: usize) -> Vec<MabkTerm> {
    (0..1u32 << n)
        .map(|r| {
            let big_r = n as i64 + 1 - 2 * i64::from(r.count_ones());
            MabkTerm {
                r,
                big_r,
                coefficient: cos_quarter_pi(big_r),
            }
        })
        .collect()
}

/// `2^{(n-1)/2}`.
pub fn local_bound(n: usize) -> f64 {
    2f64.powf((n as f64 - 1.0) / 2.0)
}

/// Largest quantum value of the normalized expression, `2^{(n-1)/2}`.
pub fn quantum_ratio_ceiling(n: usize) -> f64 {
    local_bound(n)
}

/// Visibility below which no quantum tensor violates any labeling:
/// `γ_c = 2^{-(n-1)/(2n)}`.
pub fn tsirelson_threshold(n: usize) -> Result<f64> {
    if n < 2 {
        return domain(format!("threshold needs at least 2 parties, got {n}"));
    }
    Ok(2f64.powf(-(n as f64 - 1.0) / (2.0 * n as f64)))
}

fn tensor_index(labeling: &Labeling, r: u32) -> usize {
    labeling
        .pairs
        .iter()
        .enumerate()
        .rev()
        .fold(0, |acc, (n, p)| {
            acc * 3 + usize::from(p[((r >> n) & 1) as usize])
        })
}

/// The signed Bell sum for one labeling; zero-weight terms are skipped.
pub fn mabk_value(tensor: &CorrelationTensor, labeling: &Labeling) -> Result<f64> {
    tensor.check_parties(labeling.n_parties())?;
    Ok(mabk_terms(labeling.n_parties())
        .iter()
        .filter(|t| t.coefficient != 0.0)
        .map(|t| t.coefficient * tensor.at(tensor_index(labeling, t.r)))
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViolationVerdict {
    pub max_abs_value: f64,
    /// `max_abs_value / local_bound(N)`.
    pub ratio: f64,
    pub best_labeling: Labeling,
    pub violated: bool,
}

/// Precomputed sweep over the labelings of an `n`-party tensor.
#[derive(Debug, Clone)]
pub struct MabkSweep {
    n: usize,
    /// Codes of the visited labelings, increasing. Every labeling is
    /// visited: no two labelings share a Bell expression, even up to sign.
    codes: Vec<u32>,
    /// Nonzero coefficients and their `r⃗`.
    coefficients: Vec<f64>,
    rs: Vec<u32>,
    /// `codes.len() × coefficients.len()` tensor indices, when small enough
    /// to tabulate.
    table: Option<Vec<u32>>,
    bound: f64,
}

impl MabkSweep {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_PARTIES {
            return domain(format!(
                "labeling search supports 1..={MAX_PARTIES} parties, got {n}"
            ));
        }
        let (rs, coefficients): (Vec<u32>, Vec<f64>) = mabk_terms(n)
            .into_iter()
            .filter(|t| t.coefficient != 0.0)
            .map(|t| (t.r, t.coefficient))
            .unzip();

        let codes: Vec<u32> = (0..6u32.pow(n as u32)).collect();

        let table = (n <= TABLE_PARTIES).then(|| {
            let mut table = Vec::with_capacity(codes.len() * rs.len());
            for &code in &codes {
                let l = Labeling::from_code(code as usize, n);
                table.extend(rs.iter().map(|&r| tensor_index(&l, r) as u32));
            }
            table
        });

        Ok(MabkSweep {
            n,
            codes,
            coefficients,
            rs,
            table,
            bound: local_bound(n),
        })
    }

    pub fn n_parties(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn labelings(&self) -> impl Iterator<Item = Labeling> + '_ {
        self.codes
            .iter()
            .map(move |&c| Labeling::from_code(c as usize, self.n))
    }

    fn for_each_value(&self, values: &[f64], mut f: impl FnMut(usize, f64) -> bool) {
        let k = self.coefficients.len();
        match &self.table {
            Some(table) => {
                for (i, idx) in table.chunks_exact(k).enumerate() {
                    let v: f64 = idx
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(&j, c)| c * values[j as usize])
                        .sum();
                    if !f(i, v) {
                        return;
                    }
                }
            }
            None => {
                for (i, &code) in self.codes.iter().enumerate() {
                    let l = Labeling::from_code(code as usize, self.n);
                    let v: f64 = self
                        .rs
                        .iter()
                        .zip(&self.coefficients)
                        .map(|(&r, c)| c * values[tensor_index(&l, r)])
                        .sum();
                    if !f(i, v) {
                        return;
                    }
                }
            }
        }
    }

    /// Bell values in sweep order.
    pub fn values(&self, tensor: &CorrelationTensor) -> Result<Vec<f64>> {
        tensor.check_parties(self.n)?;
        let mut out = Vec::with_capacity(self.codes.len());
        self.for_each_value(tensor.values(), |_, v| {
            out.push(v);
            true
        });
        Ok(out)
    }

    /// Maximizes `|value|`; ties go to the earliest labeling.
    pub fn max_violation(&self, tensor: &CorrelationTensor) -> Result<ViolationVerdict> {
        tensor.check_parties(self.n)?;
        let mut best = (0usize, -1.0f64);
        self.for_each_value(tensor.values(), |i, v| {
            if v.abs() > best.1 {
                best = (i, v.abs());
            }
            true
        });
        let ratio = best.1 / self.bound;
        Ok(ViolationVerdict {
            max_abs_value: best.1,
            ratio,
            best_labeling: Labeling::from_code(self.codes[best.0] as usize, self.n),
            violated: ratio > 1.0 + VIOLATION_EPS,
        })
    }

    /// Same decision as `max_violation(..).violated`, stopping at the first
    /// violating labeling.
    pub fn violates(&self, tensor: &CorrelationTensor) -> Result<bool> {
        tensor.check_parties(self.n)?;
        let mut found = false;
        self.for_each_value(tensor.values(), |_, v| {
            found = v.abs() / self.bound > 1.0 + VIOLATION_EPS;
            !found
        });
        Ok(found)
    }
}

/// Full sweep over all `6ᴺ` labelings of `tensor`.
pub fn max_violation(tensor: &CorrelationTensor) -> Result<ViolationVerdict> {
    MabkSweep::new(tensor.n_parties())?.max_violation(tensor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlations::{setting_index, singlet_tensor, NoiseLevel};
    use crate::geometry::{CanonicalBipartite, Triad};

    #[test]
    fn one_party_labelings() {
        let pairs: Vec<[u8; 2]> = enumerate_labelings(1).map(|l| l.pairs()[0]).collect();
        assert_eq!(pairs, ORDERED_PAIRS.to_vec());
    }

    #[test]
    fn labeling_counts_and_injectivity() {
        assert_eq!(enumerate_labelings(2).count(), 36);
        let all: Vec<Labeling> = enumerate_labelings(3).collect();
        assert_eq!(all.len(), 216);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        for l in &all {
            for p in l.pairs() {
                assert_ne!(p[0], p[1]);
            }
            assert_eq!(Labeling::from_code(l.code(), 3), *l);
        }
    }

    #[test]
    fn labeling_rejects_non_injective() {
        assert!(Labeling::new(vec![[1, 1]]).is_err());
        assert!(Labeling::new(vec![[0, 3]]).is_err());
        let l = Labeling::new(vec![[2, 0]]).unwrap();
        assert_eq!(l.discarded(0), 1);
    }

    #[test]
    fn two_party_coefficients() {
        let terms = mabk_terms(2);
        let h = FRAC_1_SQRT_2;
        let got: Vec<(u32, i64, f64)> = terms
            .iter()
            .map(|t| (t.r, t.big_r, t.coefficient))
            .collect();
        // r bit 0 is party 0: r = 1 means (r₁, r₂) = (1, 0).
        assert_eq!(got, vec![(0, 3, -h), (1, 1, h), (2, 1, h), (3, -1, h)]);
    }

    #[test]
    fn term_invariants() {
        for n in 1..7 {
            for t in mabk_terms(n) {
                assert_eq!(t.big_r, n as i64 + 1 - 2 * i64::from(t.r.count_ones()));
                let c = (t.big_r as f64 * std::f64::consts::FRAC_PI_4).cos();
                assert!((c - t.coefficient).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn chsh_optimum_reaches_two() {
        let h = FRAC_1_SQRT_2;
        let l = Labeling::new(vec![[0, 1], [0, 1]]).unwrap();
        let mut values = vec![0.0; 9];
        values[setting_index(&[0, 0])] = -h;
        values[setting_index(&[0, 1])] = h;
        values[setting_index(&[1, 0])] = h;
        values[setting_index(&[1, 1])] = h;
        let t = CorrelationTensor::new(2, values).unwrap();
        assert!((mabk_value(&t, &l).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_tensor_gives_zero() {
        let t = CorrelationTensor::zeros(3);
        for l in enumerate_labelings(3) {
            assert_eq!(mabk_value(&t, &l).unwrap(), 0.0);
        }
        let l = Labeling::new(vec![[0, 1]; 2]).unwrap();
        assert!(mabk_value(&t, &l).is_err());
    }

    #[test]
    fn local_bounds() {
        assert!((local_bound(2) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(local_bound(3), 2.0);
        assert_eq!(local_bound(5), 4.0);
    }

    #[test]
    fn thresholds() {
        assert!((tsirelson_threshold(2).unwrap() - 0.840896415).abs() < 1e-9);
        assert!((tsirelson_threshold(3).unwrap() - 0.793700526).abs() < 1e-9);
        assert!((tsirelson_threshold(400).unwrap() - FRAC_1_SQRT_2).abs() < 1e-3);
        assert!(tsirelson_threshold(1).is_err());
    }

    #[test]
    fn aligned_triads_sit_on_the_bound() {
        let t = Triad::reference();
        let v = max_violation(&singlet_tensor(&t, &t, NoiseLevel::NOISELESS)).unwrap();
        assert!((v.ratio - 1.0).abs() < 1e-12, "{v:?}");
        assert!(!v.violated);
    }

    #[test]
    fn canonical_twist_reaches_tsirelson() {
        let c = CanonicalBipartite::new(0.0, std::f64::consts::FRAC_PI_4, 0.0).unwrap();
        let (a, b) = c.triads();
        let v = max_violation(&singlet_tensor(&a, &b, NoiseLevel::NOISELESS)).unwrap();
        assert!((v.ratio - 2f64.sqrt()).abs() < 1e-9, "{v:?}");
        assert!(v.violated);
    }

    #[test]
    fn violates_agrees_with_verdict() {
        let t = Triad::reference();
        let sweep = MabkSweep::new(2).unwrap();
        let aligned = singlet_tensor(&t, &t, NoiseLevel::NOISELESS);
        assert!(!sweep.violates(&aligned).unwrap());
        let c = CanonicalBipartite::new(0.3, 0.2, 0.4).unwrap();
        let (a, b) = c.triads();
        let tensor = singlet_tensor(&a, &b, NoiseLevel::NOISELESS);
        assert_eq!(
            sweep.violates(&tensor).unwrap(),
            sweep.max_violation(&tensor).unwrap().violated
        );
    }

    #[test]
    fn no_labeling_is_a_sign_flip_of_another() {
        // Reordering party pairs permutes which r⃗ gets which weight; check
        // that no two orderings give the same pattern, even up to sign, so
        // there is nothing to deduplicate.
        for n in 1..=MAX_PARTIES {
            let coeff = coefficient_table(n);
            let patterns: Vec<Vec<f64>> = (0..1u32 << n)
                .map(|o| {
                    (0..1u32 << n)
                        .map(|r| coeff[(r ^ o).count_ones() as usize])
                        .collect()
                })
                .collect();
            for (i, a) in patterns.iter().enumerate() {
                for b in &patterns[..i] {
                    assert_ne!(a, b, "n = {n}");
                    assert!(a.iter().zip(b).any(|(x, y)| *x != -*y), "n = {n}");
                }
            }
        }
    }

    #[test]
    fn unsupported_party_counts() {
        assert!(MabkSweep::new(0).is_err());
        assert!(MabkSweep::new(MAX_PARTIES + 1).is_err());
    }
}
