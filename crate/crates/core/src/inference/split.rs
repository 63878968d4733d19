use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::Dataset;
use crate::rng::{stream, Purpose};

/// Partition of the sample into the likelihood half `d0` and the
/// estimation half `d1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub d0: Vec<usize>,
    pub d1: Vec<usize>,
    pub seed: u64,
}

impl SplitPlan {
    /// Uniformly random partition with `|d0| = ceil(n / 2)`.
    pub fn random<R: Rng + ?Sized>(n: usize, seed: u64, rng: &mut R) -> Result<Self> {
        if n < 2 {
            return Err(Error::Data(format!("need at least two observations to split, got {n}")));
        }
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(rng);
        let d1 = idx.split_off(n.div_ceil(2));
        Ok(Self { d0: idx, d1, seed })
    }

    /// The same partition with the roles of the halves exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            d0: self.d1.clone(),
            d1: self.d0.clone(),
            seed: self.seed,
        }
    }
}

/// Seeded random split of `data`.
pub fn split_sample(data: &Dataset, seed: u64) -> Result<SplitPlan> {
    SplitPlan::random(data.len(), seed, &mut stream(seed, 0, Purpose::Split))
}
