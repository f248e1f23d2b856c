use crate::error::{Error, Result};
use crate::modes::Mode;

/// `⟨j⟩ = max(1, |j|)`.
pub fn bracket(j: i32) -> f64 {
    (j.unsigned_abs().max(1)) as f64
}

/// Weights `h_j` of the ⋆-norm. `+∞` is `f64::INFINITY`.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightSequence {
    /// `h_j = (log(1 + ⟨j⟩))^σ`
    LogPower { sigma: f64 },
    /// `h_j = ⟨j⟩^α`
    Polynomial { alpha: f64 },
    /// `inner` inside `|j| ≤ j0`, `+∞` outside.
    FiniteWindow { j0: u32, inner: Inner },
    /// `values[|j|]` for `|j| < values.len()`, then `extension`.
    Table {
        values: Vec<f64>,
        extension: Extension,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Inner {
    Constant(f64),
    Weights(Box<WeightSequence>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Extension {
    Infinite,
    Continue(Box<WeightSequence>),
}

impl WeightSequence {
    pub fn log_power(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("log_power needs σ > 0, got {sigma}")));
        }
        Ok(WeightSequence::LogPower { sigma })
    }

    pub fn polynomial(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::domain(format!(
                "polynomial needs α > 0, got {alpha}"
            )));
        }
        Ok(WeightSequence::Polynomial { alpha })
    }

    pub fn window_constant(j0: u32, h: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::domain(format!(
                "window weight must be positive, got {h}"
            )));
        }
        Ok(WeightSequence::FiniteWindow {
            j0,
            inner: Inner::Constant(h),
        })
    }

    pub fn window(j0: u32, inner: WeightSequence) -> Self {
        WeightSequence::FiniteWindow {
            j0,
            inner: Inner::Weights(Box::new(inner)),
        }
    }

    pub fn table(values: Vec<f64>, extension: Extension) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("weight table is empty"));
        }
        if values.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::domain("weight table entries must be positive"));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::domain("weight table must be nondecreasing in |j|"));
        }
        Ok(WeightSequence::Table { values, extension })
    }

    pub fn h(&self, j: i32) -> f64 {
        match self {
            WeightSequence::LogPower { sigma } => (1.0 + bracket(j)).ln().powf(*sigma),
            WeightSequence::Polynomial { alpha } => bracket(j).powf(*alpha),
            WeightSequence::FiniteWindow { j0, inner } => {
                if j.unsigned_abs() > *j0 {
                    f64::INFINITY
                } else {
                    match inner {
                        Inner::Constant(h) => *h,
                        Inner::Weights(w) => w.h(j),
                    }
                }
            }
            WeightSequence::Table { values, extension } => {
                let a = j.unsigned_abs() as usize;
                if a < values.len() {
                    values[a]
                } else {
                    match extension {
                        Extension::Infinite => f64::INFINITY,
                        Extension::Continue(w) => w.h(j).max(values[values.len() - 1]),
                    }
                }
            }
        }
    }

    /// `min_j h_j`, attained at `j = 0` because `h` is nondecreasing in `|j|`.
    pub fn min_weight(&self) -> f64 {
        self.h(0)
    }

    /// `c₁ = 1 / min_j h_j`, the sharp constant in `‖ν‖₁ ≤ c₁|ν|⋆`.
    pub fn c1(&self) -> f64 {
        1.0 / self.min_weight()
    }

    /// Largest `J` with `h_J ≤ n` (so every index carrying a nonzero entry of
    /// a mode with `|ν|⋆ ≤ n` satisfies `|j| ≤ J`), or `None` if even `h_0 > n`.
    pub fn index_bound(&self, n: f64) -> Option<u32> {
        if !(self.h(0) <= n) {
            return None;
        }
        let guess: f64 = match self {
            WeightSequence::LogPower { sigma } => n.powf(1.0 / sigma).exp() - 1.0,
            WeightSequence::Polynomial { alpha } => n.powf(1.0 / alpha),
            _ => 0.0,
        };
        let mut j: u32 = if guess.is_finite() && guess > 1.0 {
            guess.min(u32::MAX as f64 / 2.0) as u32
        } else {
            0
        };
        while j > 0 && !(self.h(j as i32) <= n) {
            j -= 1;
        }
        while j < i32::MAX as u32 && self.h(j as i32 + 1) <= n {
            j += 1;
        }
        Some(j)
    }

    /// σ of a log-power sequence, possibly wrapped in a window.
    pub fn log_power_sigma(&self) -> Option<f64> {
        match self {
            WeightSequence::LogPower { sigma } => Some(*sigma),
            WeightSequence::FiniteWindow {
                inner: Inner::Weights(w),
                ..
            } => w.log_power_sigma(),
            _ => None,
        }
    }
}

/// The ⋆-norm together with the auxiliary ℓ¹ and sup norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeNorms {
    pub star: f64,
    pub l1: u64,
    pub sup: u64,
}

/// `|ν|⋆ = Σ_j h_j|ν_j|`, summed in increasing `j`. Entries with `ν_j = 0`
/// are never stored, so `0·∞` never arises.
pub fn star_norm(nu: &Mode, w: &WeightSequence) -> f64 {
    let mut acc = 0.0;
    for &(j, v) in nu.entries() {
        acc += w.h(j) * v.unsigned_abs() as f64;
    }
    acc
}

pub fn mode_norms(nu: &Mode, w: &WeightSequence) -> ModeNorms {
    ModeNorms {
        star: star_norm(nu, w),
        l1: nu.l1(),
        sup: nu.sup(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_power_values() {
        let w = WeightSequence::log_power(2.5).unwrap();
        assert_eq!(w.h(0), w.h(1));
        assert_eq!(w.h(-1), w.h(1));
        assert!((w.h(2) - 3f64.ln().powf(2.5)).abs() < 1e-15);
        let nu = Mode::from_pairs([(1, 2), (-1, -1)]);
        let expected = 3.0 * 2f64.ln().powf(2.5);
        assert!((star_norm(&nu, &w) - expected).abs() < 1e-14);
        assert!((expected - 1.200_010_116_546_6).abs() < 1e-12);
    }

    #[test]
    fn window_infinite_outside() {
        let w = WeightSequence::window_constant(1, 1.0).unwrap();
        assert_eq!(w.h(1), 1.0);
        assert!(w.h(2).is_infinite());
        assert_eq!(star_norm(&Mode::zero(), &w), 0.0);
        assert_eq!(star_norm(&Mode::from_pairs([(0, 1), (1, 1)]), &w), 2.0);
        assert!(star_norm(&Mode::unit(3), &w).is_infinite());
        assert_eq!(w.index_bound(10.0), Some(1));
        assert_eq!(w.index_bound(0.5), None);
    }

    #[test]
    fn index_bound_is_exact() {
        let w = WeightSequence::log_power(2.5).unwrap();
        for n in [0.5, 1.0, 4.0, 12.0, 256.0] {
            let j = w.index_bound(n).unwrap();
            assert!(w.h(j as i32) <= n);
            assert!(w.h(j as i32 + 1) > n);
        }
        assert_eq!(w.index_bound(4.0), Some(4));
        let p = WeightSequence::polynomial(2.0).unwrap();
        assert_eq!(p.index_bound(16.0), Some(4));
        assert_eq!(p.index_bound(15.9), Some(3));
    }

    #[test]
    fn table_extension() {
        let t = WeightSequence::table(vec![1.0, 1.0, 2.0], Extension::Infinite).unwrap();
        assert_eq!(t.h(-2), 2.0);
        assert!(t.h(3).is_infinite());
        let c = WeightSequence::table(
            vec![1.0, 1.0, 2.0],
            Extension::Continue(Box::new(WeightSequence::polynomial(1.0).unwrap())),
        )
        .unwrap();
        assert_eq!(c.h(5), 5.0);
        assert!(WeightSequence::table(vec![2.0, 1.0], Extension::Infinite).is_err());
    }

    #[test]
    fn c1_is_reciprocal_min() {
        let w = WeightSequence::log_power(2.5).unwrap();
        assert!((w.c1() * 2f64.ln().powf(2.5) - 1.0).abs() < 1e-15);
    }
}
