//! Seeded random markets.
//!
//! Randomness comes from xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`). Derived draws use fixed formulas
//! so that ports in other languages reproduce instances bit for bit:
//!
//! * `chance(p)`: `(next_u64() >> 11) * 2^-53 < p`
//! * `below(k)`: `(next_u64() as u128 * k as u128) >> 64`
//!
//! Sampling order: each agent, in index order, draws `chance(endow_prob)`;
//! then each agent that drew `true`, in index order, takes the unowned house
//! at position `below(#unowned)` of the unowned houses in index order (agents
//! left over once every house is owned stay unendowed); finally for each agent
//! and each house, in index order, `chance(accept_prob)` decides
//! acceptability.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Instance, ModelError};

/// Portable pseudo-random stream shared by the generator and seeded
/// permutations.
#[derive(Debug, Clone)]
pub struct Prng(Xoshiro256StarStar);

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }

    /// Uniform in `0..k`; `k` must be positive.
    pub fn below(&mut self, k: usize) -> usize {
        debug_assert!(k > 0);
        ((self.next_u64() as u128 * k as u128) >> 64) as usize
    }

    /// Fisher-Yates shuffle from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("invalid parameter {name} = {value}: must lie in [0, 1]")]
    InvalidParams { name: &'static str, value: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub agents: usize,
    pub houses: usize,
    pub endow_prob: f64,
    pub accept_prob: f64,
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        for (name, value) in [("endow_prob", self.endow_prob), ("accept_prob", self.accept_prob)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenError::InvalidParams { name, value });
            }
        }
        Ok(())
    }
}

pub fn random_instance(params: &GenParams) -> Result<Instance, GenError> {
    params.validate()?;
    let mut rng = Prng::new(params.seed);
    let (n, m) = (params.agents, params.houses);

    let wants_house: Vec<bool> = (0..n).map(|_| rng.chance(params.endow_prob)).collect();
    let mut unowned: Vec<usize> = (0..m).collect();
    let endowment: Vec<Option<usize>> = wants_house
        .iter()
        .map(|&wants| {
            if wants && !unowned.is_empty() {
                let at = rng.below(unowned.len());
                Some(unowned.remove(at))
            } else {
                None
            }
        })
        .collect();
    let acceptable: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..m).filter(|_| rng.chance(params.accept_prob)).collect())
        .collect();

    Ok(Instance::from_indices(m, endowment, acceptable)?)
}
