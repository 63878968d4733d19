use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Capacity, OutcomeSet};
use crate::error::{Error, Result};

/// Spaces up to this size are checked over every multiset of `k` events.
const EXHAUSTIVE_MAX_M: usize = 5;
const DEFAULT_SAMPLES: usize = 10_000;
const DEFAULT_SEED: u64 = 0x6b6d_6f6e_6f74_6f6e;
const TOL: f64 = 1e-12;

/// Checks monotonicity of order `k`:
/// `nu(A_1 u ... u A_k) >= sum_{I nonempty} (-1)^{|I|+1} nu(cap_{i in I} A_i)`.
///
/// Exhaustive for `m <= 5`; above that, 10^4 random tuples from a fixed seed.
pub fn check_k_monotone(c: &Capacity, k: usize) -> Result<bool> {
    check_k_monotone_with(c, k, DEFAULT_SAMPLES, DEFAULT_SEED)
}

pub fn check_k_monotone_with(c: &Capacity, k: usize, samples: usize, seed: u64) -> Result<bool> {
    let m = c.cardinality();
    if k < 2 {
        return Err(Error::InvalidArgument(format!("order k must be at least 2, got {k}")));
    }
    if k > m {
        return Err(Error::InvalidArgument(format!("order k = {k} exceeds |Y| = {m}")));
    }
    let n_sets = 1u32 << m;
    let mut tuple = vec![0u32; k];
    if m <= EXHAUSTIVE_MAX_M {
        // The inequality is symmetric in its arguments, so nondecreasing
        // tuples (multisets) cover every case.
        loop {
            if !holds(c, &tuple) {
                return Ok(false);
            }
            let mut i = k;
            loop {
                if i == 0 {
                    return Ok(true);
                }
                i -= 1;
                if tuple[i] + 1 < n_sets {
                    tuple[i] += 1;
                    let v = tuple[i];
                    for t in tuple.iter_mut().skip(i + 1) {
                        *t = v;
                    }
                    break;
                }
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            for t in tuple.iter_mut() {
                *t = rng.gen_range(0..n_sets);
            }
            if !holds(c, &tuple) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn holds(c: &Capacity, sets: &[u32]) -> bool {
    let k = sets.len();
    let union = sets.iter().fold(0, |acc, s| acc | s);
    let mut rhs = 0.0;
    for subset in 1u32..(1 << k) {
        let inter = (0..k)
            .filter(|i| subset & (1 << i) != 0)
            .fold(u32::MAX, |acc, i| acc & sets[i]);
        let sign = if subset.count_ones() % 2 == 1 { 1.0 } else { -1.0 };
        rhs += sign * c.value(OutcomeSet(inter));
    }
    c.value(OutcomeSet(union)) >= rhs - TOL
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::{containment_from_random_set, Density, RandomSetDistribution};

    #[test]
    fn belief_function_is_two_monotone() {
        let d = RandomSetDistribution::new(
            3,
            [
                (OutcomeSet(0b001), 0.2),
                (OutcomeSet(0b110), 0.3),
                (OutcomeSet(0b111), 0.5),
            ],
        )
        .unwrap();
        let c = containment_from_random_set(&d);
        assert!(check_k_monotone(&c, 2).unwrap());
        assert!(check_k_monotone(&c, 3).unwrap());
    }

    #[test]
    fn superadditive_failure_is_detected() {
        let c = Capacity::new(2, vec![0.0, 0.6, 0.6, 1.0]).unwrap();
        assert!(!check_k_monotone(&c, 2).unwrap());
    }

    #[test]
    fn additive_is_monotone_of_every_order() {
        let c = Capacity::additive(&Density::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap());
        for k in 2..=4 {
            assert!(check_k_monotone(&c, k).unwrap());
        }
    }

    #[test]
    fn rejects_bad_order() {
        let c = Capacity::vacuous(3);
        assert!(check_k_monotone(&c, 1).is_err());
        assert!(check_k_monotone(&c, 4).is_err());
    }

    #[test]
    fn two_but_not_three_monotone() {
        // nu = 0, 0.5, 1 on sets of size <= 1, 2, 3: supermodular, but the
        // three pairs give 1 < 3 * 0.5 at order 3.
        let values = (0..8u32)
            .map(|a| match a.count_ones() {
                0 | 1 => 0.0,
                2 => 0.5,
                _ => 1.0,
            })
            .collect();
        let c = Capacity::new(3, values).unwrap();
        assert!(check_k_monotone(&c, 2).unwrap());
        assert!(!check_k_monotone(&c, 3).unwrap());
    }

    #[test]
    fn sampled_branch_runs_above_five_outcomes() {
        let d = RandomSetDistribution::new(
            6,
            [(OutcomeSet(0b000011), 0.5), (OutcomeSet(0b111100), 0.5)],
        )
        .unwrap();
        let c = containment_from_random_set(&d);
        assert!(check_k_monotone_with(&c, 3, 2_000, 7).unwrap());
    }
}
