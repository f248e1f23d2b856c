//! Standard test configurations.
//!
//! FIX-A: three rotators `j ∈ {−1, 0, 1}` with unit weights (`+∞` outside),
//! `ω = (√2, 1, φ)`, `f = cos θ₀ + cos(θ₀ + θ₁)`, `s = 0.5`, `q = 1`.
//! FIX-B: log-power weights with σ = 2.5 on all of ℤ.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::modes::{parse_potential, Frequency, Mode, ScalarSeries, WeightSequence};

pub const GOLDEN: f64 = 1.618_033_988_749_894_8;

pub const FIX_A_POTENTIAL: &str = "cos: 0 -> 1\ncos: 0 1 -> 1\n";
pub const FIX_A_S: f64 = 0.5;
pub const FIX_A_Q: f64 = 1.0;
pub const FIX_B_SIGMA: f64 = 2.5;

pub fn fix_a_weights() -> WeightSequence {
    WeightSequence::window_constant(1, 1.0).expect("valid")
}

pub fn fix_a_frequency() -> Frequency {
    Frequency::new(vec![2f64.sqrt(), 1.0, GOLDEN], FIX_A_Q).expect("valid")
}

pub fn fix_a_potential() -> ScalarSeries {
    parse_potential(FIX_A_POTENTIAL).expect("valid")
}

pub fn fix_b_weights() -> WeightSequence {
    WeightSequence::log_power(FIX_B_SIGMA).expect("valid")
}

/// Five rotators `j ∈ {−2,…,2}` with unit weights, used with random potentials.
pub fn five_weights() -> WeightSequence {
    WeightSequence::window_constant(2, 1.0).expect("valid")
}

pub fn five_frequency() -> Frequency {
    Frequency::new(
        vec![3f64.sqrt(), 2f64.sqrt(), 1.0, GOLDEN, 7f64.sqrt() - 2.0],
        1.0,
    )
    .expect("valid")
}

/// Random Hermitian potential with `harmonics` distinct ± pairs on `[−half, half]`.
/// Each harmonic has one or two nonzero entries in `{−2,…,2}`.
pub fn random_potential(seed: u64, half: u32, harmonics: usize) -> ScalarSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = half as i32;
    let mut f = ScalarSeries::new();
    while f.len() < 2 * harmonics {
        let entries = rng.gen_range(1..=2);
        let mut pairs = Vec::new();
        for _ in 0..entries {
            let j = rng.gen_range(-h..=h);
            let mut v = rng.gen_range(1..=2);
            if rng.gen_bool(0.5) {
                v = -v;
            }
            pairs.push((j, v));
        }
        let m = Mode::from_pairs(pairs);
        if m.is_zero() || f.get(&m).is_some() {
            continue;
        }
        let r = rng.gen_range(0.2..1.0) / 2.0;
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        let c = Complex64::from_polar(r, a);
        f.insert(-&m, c.conj());
        f.insert(m, c);
    }
    f.set_hermitian(true);
    f
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_potentials_are_hermitian_and_reproducible() {
        let a = random_potential(7, 2, 4);
        assert_eq!(a.len(), 8);
        assert_eq!(a.hermitian_defect(), 0.0);
        assert_eq!(a, random_potential(7, 2, 4));
        assert!(a.modes().all(|m| five_frequency().window().covers(m)));
    }

    #[test]
    fn fix_a_has_four_terms() {
        let f = fix_a_potential();
        assert_eq!(f.len(), 4);
        for m in ["0:1", "0:-1", "0:1;1:1", "0:-1;1:-1"] {
            assert_eq!(f.get(&m.parse().unwrap()), Some(&Complex64::new(0.5, 0.0)));
        }
    }
}
