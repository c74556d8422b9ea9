//! Seeded random instances for property tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::GenError;
use crate::instance::{Instance, Vertex};

#[derive(Clone, Debug, PartialEq)]
pub struct GenParams {
    pub n_a: usize,
    pub n_b: usize,
    /// Upper quotas are drawn uniformly from `1..=max_upper`.
    pub max_upper: usize,
    /// Probability that a vertex gets a positive lower quota.
    pub lq_fraction: f64,
    /// Probability that a pair is acceptable.
    pub edge_density: f64,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_a: 4,
            n_b: 4,
            max_upper: 2,
            lq_fraction: 0.5,
            edge_density: 0.6,
            seed: 0,
        }
    }
}

impl GenParams {
    pub fn check(&self) -> Result<(), GenError> {
        if self.n_a == 0 || self.n_b == 0 {
            return Err(GenError::EmptySide {
                n_a: self.n_a,
                n_b: self.n_b,
            });
        }
        if self.max_upper == 0 {
            return Err(GenError::ZeroUpper);
        }
        if !(0.0..=1.0).contains(&self.lq_fraction) {
            return Err(GenError::LqFraction(self.lq_fraction));
        }
        if !(self.edge_density > 0.0 && self.edge_density <= 1.0) {
            return Err(GenError::Density(self.edge_density));
        }
        Ok(())
    }
}

fn quotas(rng: &mut ChaCha8Rng, p: &GenParams) -> (usize, usize) {
    let upper = rng.gen_range(1..=p.max_upper);
    let lower = if rng.gen_bool(p.lq_fraction) {
        rng.gen_range(1..=upper)
    } else {
        0
    };
    (lower, upper)
}

/// Generates an instance that satisfies every [`Instance`] invariant.
/// Identical parameters always produce identical instances.
pub fn generate_random_instance(p: &GenParams) -> Result<Instance, GenError> {
    p.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let mut a: Vec<Vertex> = (0..p.n_a)
        .map(|i| {
            let (lo, up) = quotas(&mut rng, p);
            Vertex::new(format!("a{}", i + 1), lo, up, Vec::new())
        })
        .collect();
    let mut b: Vec<Vertex> = (0..p.n_b)
        .map(|j| {
            let (lo, up) = quotas(&mut rng, p);
            Vertex::new(format!("b{}", j + 1), lo, up, Vec::new())
        })
        .collect();

    for (i, va) in a.iter_mut().enumerate() {
        for (j, vb) in b.iter_mut().enumerate() {
            if rng.gen_bool(p.edge_density) {
                va.pref.push(j);
                vb.pref.push(i);
            }
        }
    }
    for v in a.iter_mut().chain(b.iter_mut()) {
        v.pref.shuffle(&mut rng);
    }

    Ok(Instance::from_parts_unchecked(a, b))
}
