//! Monte-Carlo estimate of the Diophantine fraction of the frequency ball
//! `Π_j [−⟨j⟩^{−q}ρ, ⟨j⟩^{−q}ρ]`.
//!
//! Samples are drawn in blocks of [`BLOCK`]; block `b` uses its own stream
//! seeded with `seed ^ b`, so the result is independent of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modes::{bracket, for_each_mode, WeightSequence};
use crate::smalldiv::diophantine::DiophantineParams;

pub const BLOCK: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureEstimate {
    pub passed: usize,
    pub samples: usize,
    pub fraction: f64,
}

/// One row per mode `0 < |ν|⋆ ≤ N`: its nonzero `(slot, ν_j)` entries and
/// the product `Π_j(1+⟨j⟩^{μ₁}|ν_j|^{μ₂})`, both in increasing `j`.
struct ModeTable {
    half: u32,
    rows: Vec<(Vec<(usize, i32)>, f64)>,
}

impl ModeTable {
    fn new(w: &WeightSequence, n: f64, mu1: f64, mu2: f64) -> Option<ModeTable> {
        let mut rows = Vec::new();
        let half = for_each_mode(w, n, true, |d, _| {
            let lo = -((d.len() / 2) as i32);
            let mut entries = Vec::new();
            let mut p = 1.0;
            for (i, &v) in d.iter().enumerate() {
                if v != 0 {
                    entries.push((i, v));
                    p *= 1.0
                        + bracket(lo + i as i32).powf(mu1) * (v.unsigned_abs() as f64).powf(mu2);
                }
            }
            rows.push((entries, p));
        })?;
        Some(ModeTable { half, rows })
    }

    fn passes(&self, omega: &[f64], gamma: f64) -> bool {
        self.rows.iter().all(|(entries, p)| {
            let mut x = 0.0;
            for &(i, v) in entries {
                x += omega[i] * v as f64;
            }
            x.abs() >= gamma / p
        })
    }
}

/// One `ω` drawn uniformly from the ball on `[−half, half]`; the first
/// sample of block 0 of [`measure_estimate`] with the same seed.
pub fn sample_frequency(seed: u64, half: u32, q: f64, rho: f64) -> Result<Vec<f64>> {
    if !(rho > 0.0 && rho.is_finite()) || !(q > 0.5) {
        return Err(Error::domain(format!(
            "need ρ > 0 and q > 1/2, got ρ={rho}, q={q}"
        )));
    }
    Ok(sample_block(seed, 0, 1, half, q, rho).remove(0))
}

/// The `ω` samples of block `b`, each over `[−half, half]`.
pub(crate) fn sample_block(
    seed: u64,
    block: usize,
    count: usize,
    half: u32,
    q: f64,
    rho: f64,
) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ block as u64);
    let radii: Vec<f64> = (-(half as i32)..=half as i32)
        .map(|j| bracket(j).powf(-q) * rho)
        .collect();
    (0..count)
        .map(|_| radii.iter().map(|&r| rng.gen_range(-r..=r)).collect())
        .collect()
}

/// Fraction of sampled `ω` passing the Diophantine check over `0 < |ν|⋆ ≤ n`.
pub fn measure_estimate(
    p: &DiophantineParams,
    q: f64,
    rho: f64,
    w: &WeightSequence,
    n: f64,
    samples: usize,
    seed: u64,
) -> Result<MeasureEstimate> {
    if samples == 0 {
        return Err(Error::domain("measure estimate needs at least one sample"));
    }
    if !(rho > 0.0 && rho.is_finite()) || !(q > 0.5) {
        return Err(Error::domain(format!(
            "need ρ > 0 and q > 1/2, got ρ={rho}, q={q}"
        )));
    }
    let table = match ModeTable::new(w, n, p.mu1, p.mu2) {
        Some(t) => t,
        None => {
            return Ok(MeasureEstimate {
                passed: samples,
                samples,
                fraction: 1.0,
            })
        }
    };
    let blocks = samples.div_ceil(BLOCK);
    let passed: usize = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let count = BLOCK.min(samples - b * BLOCK);
            sample_block(seed, b, count, table.half, q, rho)
                .iter()
                .filter(|om| table.passes(om, p.gamma))
                .count()
        })
        .sum();
    Ok(MeasureEstimate {
        passed,
        samples,
        fraction: passed as f64 / samples as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::modes::Frequency;
    use crate::smalldiv::diophantine_check;

    fn params(gamma: f64) -> DiophantineParams {
        DiophantineParams {
            gamma,
            mu1: 2.5,
            mu2: 1.5,
        }
    }

    #[test]
    fn table_agrees_with_pivot_check() {
        let w = fixtures::fix_b_weights();
        let table = ModeTable::new(&w, 4.0, 2.5, 1.5).unwrap();
        assert_eq!(table.rows.len(), 3838);
        for gamma in [1e-3, 1e-2, 0.1] {
            for om in sample_block(11, 0, 40, table.half, 1.0, 1.0) {
                let f = Frequency::new(om.clone(), 1.0).unwrap();
                let a = table.passes(&om, gamma);
                let b = diophantine_check(&f, &params(gamma), &w, 4.0)
                    .unwrap()
                    .passed();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn extremes() {
        let w = fixtures::fix_b_weights();
        let all = measure_estimate(&params(1e-300), 1.0, 1.0, &w, 4.0, 200, 3).unwrap();
        assert_eq!(all.fraction, 1.0);
        let none = measure_estimate(&params(1e3), 1.0, 1.0, &w, 4.0, 200, 3).unwrap();
        assert_eq!(none.fraction, 0.0);
    }

    #[test]
    fn deterministic_and_monotone() {
        let w = fixtures::fix_b_weights();
        let a = measure_estimate(&params(1e-3), 1.0, 1.0, &w, 4.0, 300, 9).unwrap();
        assert_eq!(
            a,
            measure_estimate(&params(1e-3), 1.0, 1.0, &w, 4.0, 300, 9).unwrap()
        );
        let mut last = 1.0;
        for g in [1e-4, 1e-3, 1e-2] {
            let f = measure_estimate(&params(g), 1.0, 1.0, &w, 4.0, 300, 9)
                .unwrap()
                .fraction;
            assert!(f <= last);
            last = f;
        }
    }
}
