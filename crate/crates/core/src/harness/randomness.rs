//! Two-test battery for measured bit streams.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::quantum::Bit;

/// Significance level both tests are run at.
pub const SIGNIFICANCE: f64 = 0.001;
/// Two-sided normal critical value at [`SIGNIFICANCE`].
pub const MONOBIT_CRITICAL_Z: f64 = 3.29;
pub const MONOBIT_MIN_LEN: usize = 100;
pub const PAIRS_MIN_LEN: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTest {
    pub n: usize,
    pub ones: usize,
    pub z: f64,
    pub p_value: f64,
    pub passed: bool,
}

/// Monobit test: `z = (2·ones − N)/√N`, passing when `|z| < 3.29`.
pub fn frequency_test(bits: &[Bit]) -> Result<FrequencyTest> {
    let n = bits.len();
    if n < MONOBIT_MIN_LEN {
        return Err(Error::SequenceTooShort {
            len: n,
            min: MONOBIT_MIN_LEN,
        });
    }
    let ones = bits.iter().filter(|b| b.is_one()).count();
    let z = (2.0 * ones as f64 - n as f64) / (n as f64).sqrt();
    Ok(FrequencyTest {
        n,
        ones,
        z,
        p_value: erfc(z.abs() / std::f64::consts::SQRT_2),
        passed: z.abs() < MONOBIT_CRITICAL_Z,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiSquarePairsTest {
    pub pairs: usize,
    /// Counts of `00`, `01`, `10`, `11`.
    pub counts: [usize; 4],
    pub statistic: f64,
    pub p_value: f64,
    pub passed: bool,
}

/// Chi-square goodness of fit of non-overlapping bit pairs against the
/// uniform law, 3 degrees of freedom. A trailing odd bit is ignored.
pub fn chi_square_pairs_test(bits: &[Bit]) -> Result<ChiSquarePairsTest> {
    if bits.len() < PAIRS_MIN_LEN {
        return Err(Error::SequenceTooShort {
            len: bits.len(),
            min: PAIRS_MIN_LEN,
        });
    }
    let mut counts = [0usize; 4];
    for pair in bits.chunks_exact(2) {
        counts[pair[0].index() * 2 + pair[1].index()] += 1;
    }
    let pairs = bits.len() / 2;
    let expected = pairs as f64 / 4.0;
    let statistic = counts
        .iter()
        .map(|&o| (o as f64 - expected).powi(2) / expected)
        .sum::<f64>();
    let p_value = ChiSquared::new(3.0)
        .expect("3 degrees of freedom is valid")
        .sf(statistic);
    Ok(ChiSquarePairsTest {
        pairs,
        counts,
        statistic,
        p_value,
        passed: p_value >= SIGNIFICANCE,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{measure_qubit, Qubit};
    use crate::rng::RandomStream;

    fn source(p0: f64, n: usize, seed: u64) -> Vec<Bit> {
        let q = Qubit::new(p0).unwrap();
        let mut rng = RandomStream::new(seed);
        (0..n).map(|_| measure_qubit(&q, &mut rng)).collect()
    }

    #[test]
    fn fair_source_passes() {
        let bits = source(0.5, 100_000, 7);
        assert!(frequency_test(&bits).unwrap().passed);
        assert!(chi_square_pairs_test(&bits).unwrap().passed);
    }

    #[test]
    fn all_zeros_fail() {
        let bits = vec![Bit::Zero; 10_000];
        let t = frequency_test(&bits).unwrap();
        assert_eq!(t.z, -100.0);
        assert!(!t.passed);
    }

    #[test]
    fn biased_source_detected() {
        let bits = source(0.6, 100_000, 8);
        let t = frequency_test(&bits).unwrap();
        // E[z] = (2·0.4 − 1)·√N ≈ −63.2
        assert!((t.z + 63.2).abs() < 5.0, "{}", t.z);
        assert!(!t.passed);
    }

    #[test]
    fn alternating_and_duplicated_fail() {
        let alternating: Vec<Bit> = (0..10_000).map(|i| Bit::from_bool(i % 2 == 1)).collect();
        let t = chi_square_pairs_test(&alternating).unwrap();
        assert_eq!(t.counts, [0, 5_000, 0, 0]);
        assert!(!t.passed);

        let fair = source(0.5, 5_000, 9);
        let doubled: Vec<Bit> = fair.iter().flat_map(|&b| [b, b]).collect();
        let t = chi_square_pairs_test(&doubled).unwrap();
        assert_eq!(t.counts[1] + t.counts[2], 0);
        assert!(!t.passed);
        // The monobit test cannot see this defect.
        assert!(frequency_test(&doubled).unwrap().passed);
    }

    #[test]
    fn critical_value_matches_significance() {
        let crit = ChiSquared::new(3.0).unwrap().inverse_cdf(1.0 - SIGNIFICANCE);
        assert!((crit - 16.266).abs() < 1e-3);
        assert!((erfc(MONOBIT_CRITICAL_Z / std::f64::consts::SQRT_2) - SIGNIFICANCE).abs() < 2e-5);
    }

    #[test]
    fn short_sequences_rejected() {
        assert!(matches!(
            frequency_test(&[Bit::One; 99]),
            Err(Error::SequenceTooShort { min: 100, .. })
        ));
        assert!(matches!(
            chi_square_pairs_test(&[Bit::One; 999]),
            Err(Error::SequenceTooShort { min: 1000, .. })
        ));
    }
}
