//! Deterministic inclusion sampling.
//!
//! Each index maps through a fixed 64-bit SplitMix-style mix of
//! `seed XOR index`; the high 53 bits form a unit-interval value compared
//! against the probability. The algorithm is pinned so that identical
//! (seed, probability) inputs select identical subsets on every platform
//! and run.

/// Fixed 64-bit avalanche mix.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform value in [0, 1) derived from the high 53 bits of the mix.
pub fn sample_unit(seed: u64, index: u64) -> f64 {
    const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
    (mix(seed ^ index) >> 11) as f64 * SCALE
}

/// True when the index is included at the given probability.
pub fn sample_accept(seed: u64, index: u64, probability: f64) -> bool {
    sample_unit(seed, index) < probability
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn certainty_and_impossibility() {
        for index in 0..1000 {
            assert!(sample_accept(42, index, 1.0));
            assert!(!sample_accept(42, index, 0.0));
        }
    }

    #[test]
    fn pure_function() {
        for index in 0..100 {
            assert_eq!(sample_unit(7, index), sample_unit(7, index));
        }
    }

    #[test]
    fn acceptance_fraction_tracks_probability() {
        // 3 binomial standard deviations over 10,000 draws.
        let n = 10_000u64;
        for &p in &[0.1, 0.5, 0.9] {
            let hits = (0..n).filter(|i| sample_accept(42, *i, p)).count() as f64;
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (hits - n as f64 * p).abs() <= 3.0 * sigma,
                "p={p}: {hits} hits"
            );
        }
    }
}
