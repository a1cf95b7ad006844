//! Deterministic pseudo-random ranking for reproducible sampling.

use crate::error::{Error, Result};

/// The last `digits` decimal digits of `id * seed`, used as a
/// deterministic ordering key. With a seed coprime to 10^digits this is
/// a bijection on [0, 10^digits).
pub fn pseudo_random_rank(id: u64, seed: u64, digits: u32) -> Result<u64> {
    if id == 0 || seed == 0 {
        return Err(Error::Domain("id and seed must be positive".into()));
    }
    if !(1..=9).contains(&digits) {
        return Err(Error::Domain(format!("digits {digits} outside [1, 9]")));
    }
    let modulus = 10u128.pow(digits);
    Ok(((u128::from(id) * u128::from(seed)) % modulus) as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        // 123 * 9973 = 1,226,679; last four digits 6679.
        assert_eq!(pseudo_random_rank(123, 9973, 4).unwrap(), 6679);
    }

    #[test]
    fn identity_with_unit_seed() {
        for id in [1u64, 17, 999_999_999] {
            assert_eq!(pseudo_random_rank(id, 1, 9).unwrap(), id);
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            pseudo_random_rank(987_654, 7919, 6).unwrap(),
            pseudo_random_rank(987_654, 7919, 6).unwrap()
        );
    }

    #[test]
    fn bounds() {
        assert!(pseudo_random_rank(0, 1, 4).is_err());
        assert!(pseudo_random_rank(1, 0, 4).is_err());
        assert!(pseudo_random_rank(1, 1, 0).is_err());
        assert!(pseudo_random_rank(1, 1, 10).is_err());
    }

    #[test]
    fn no_overflow_near_u64_max() {
        assert!(pseudo_random_rank(u64::MAX, u64::MAX, 9).is_ok());
    }
}
