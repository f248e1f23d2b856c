use crate::error::{Error, Result};
use crate::modes::{bracket, canonical_cmp, Frequency, Mode, WeightSequence};
use crate::smalldiv::scan::Lattice;

/// Constants `γ, μ₁, μ₂` of the Diophantine condition
/// `|ω·ν| ≥ γ Π_j (1 + ⟨j⟩^{μ₁}|ν_j|^{μ₂})^{−1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiophantineParams {
    pub gamma: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl DiophantineParams {
    /// Validates `γ > 0`, `μ₁ > 1 + q`, `μ₂ > 1`.
    pub fn new(gamma: f64, mu1: f64, mu2: f64, q: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!("γ must be positive, got {gamma}")));
        }
        if !(mu1 > 1.0 + q) {
            return Err(Error::domain(format!(
                "μ₁ must exceed 1 + q = {}, got {mu1}",
                1.0 + q
            )));
        }
        if !(mu2 > 1.0) {
            return Err(Error::domain(format!("μ₂ must exceed 1, got {mu2}")));
        }
        Ok(DiophantineParams { gamma, mu1, mu2 })
    }
}

/// `Π_j (1 + ⟨j⟩^{μ₁}|ν_j|^{μ₂})`, multiplied in increasing `j`.
pub fn diophantine_product(nu: &Mode, mu1: f64, mu2: f64) -> f64 {
    let mut p = 1.0;
    for &(j, v) in nu.entries() {
        p *= 1.0 + bracket(j).powf(mu1) * (v.unsigned_abs() as f64).powf(mu2);
    }
    p
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiophantineOutcome {
    Pass,
    /// The canonically first violating mode.
    Fail(Mode),
}

impl DiophantineOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, DiophantineOutcome::Pass)
    }
}

/// Checks the Diophantine condition for every `0 < |ν|⋆ ≤ n`.
///
/// Only pivot values inside the band `|x + ω_c a| < γ/P(ν without c)` can
/// violate it, since the pivot factor of the product is at least 1.
pub fn diophantine_check(
    om: &Frequency,
    p: &DiophantineParams,
    w: &WeightSequence,
    n: f64,
) -> Result<DiophantineOutcome> {
    let lat = match Lattice::new(w, n) {
        Some(l) => l,
        None => return Ok(DiophantineOutcome::Pass),
    };
    if lat.half > om.window().half {
        return Err(Error::domain(format!(
            "frequency window ±{} does not cover indices ±{}",
            om.window().half,
            lat.half
        )));
    }
    let shift = (om.window().half - lat.half) as usize;
    let omega = &om.values()[shift..shift + lat.weights.len()];
    let lo = lat.lo();
    let factors: Vec<f64> = (0..lat.weights.len())
        .map(|i| bracket(lo + i as i32).powf(p.mu1))
        .collect();
    let dot = |d: &[i32]| {
        let mut acc = 0.0;
        for (w, &v) in omega.iter().zip(d) {
            if v != 0 {
                acc += w * v as f64;
            }
        }
        acc
    };
    let product = |d: &[i32]| {
        let mut acc = 1.0;
        for (b, &v) in factors.iter().zip(d) {
            if v != 0 {
                acc *= 1.0 + b * (v.unsigned_abs() as f64).powf(p.mu2);
            }
        }
        acc
    };
    let c = lat.pivot;
    let wc = omega[c];
    let mut worst: Option<(f64, Mode)> = None;
    lat.scan(n, &mut |d, k| {
        let partial_zero = d.iter().all(|&v| v == 0);
        let x = dot(d);
        let r = p.gamma / product(d);
        let (a_lo, a_hi) = if wc != 0.0 {
            let (u, v) = ((-x - r) / wc, (-x + r) / wc);
            let (u, v) = (u.min(v), u.max(v));
            ((u.floor() as i64 - 1).max(-k), (v.ceil() as i64 + 1).min(k))
        } else {
            (-k, k)
        };
        for a in a_lo..=a_hi {
            if partial_zero && a == 0 {
                continue;
            }
            d[c] = a as i32;
            if dot(d).abs() < p.gamma / product(d) {
                let cand = (lat.star(d), Mode::from_dense(lo, d));
                if worst.as_ref().map_or(true, |b| {
                    canonical_cmp((cand.0, &cand.1), (b.0, &b.1)).is_lt()
                }) {
                    worst = Some(cand);
                }
            }
        }
        d[c] = 0;
    });
    Ok(match worst {
        None => DiophantineOutcome::Pass,
        Some((_, m)) => DiophantineOutcome::Fail(m),
    })
}

/// Step function `N ↦ log max{Π_j(1+⟨j⟩^{μ₁}|ν_j|^{μ₂}) : |ν|⋆ ≤ N}`:
/// on `[costs[i], costs[i+1])` the maximum is `exp(logs[i])`.
/// `costs[0] = 0` and `logs[0] = 0` (the empty maximum is 1).
#[derive(Clone, Debug, PartialEq)]
pub struct ProductProfile {
    pub costs: Vec<f64>,
    pub logs: Vec<f64>,
    pub n_max: f64,
}

impl ProductProfile {
    pub fn ln_lhs(&self, n: f64) -> f64 {
        let i = self.costs.partition_point(|&c| c <= n);
        if i == 0 {
            0.0
        } else {
            self.logs[i - 1]
        }
    }
}

/// Pareto frontier over `(|ν|⋆, log product)`, built coordinate by coordinate
/// in increasing `j`; each `|ν_j|` is tried with its best sign-free gain.
/// Fails with a resource error if the frontier exceeds `cap` points.
pub fn product_profile(
    w: &WeightSequence,
    n_max: f64,
    mu1: f64,
    mu2: f64,
    cap: usize,
) -> Result<ProductProfile> {
    let mut front: Vec<(f64, f64)> = vec![(0.0, 0.0)];
    if let Some(half) = w.index_bound(n_max) {
        let lo = -(half as i32);
        for i in 0..=2 * half {
            let j = lo + i as i32;
            let h = w.h(j);
            let b = bracket(j).powf(mu1);
            let mut next: Vec<(f64, f64)> = Vec::with_capacity(front.len() * 2);
            for &(c, l) in &front {
                next.push((c, l));
                let mut a = 1u32;
                loop {
                    let cost = c + h * a as f64;
                    if !(cost <= n_max) {
                        break;
                    }
                    next.push((cost, l + (1.0 + b * (a as f64).powf(mu2)).ln()));
                    a += 1;
                }
            }
            next.sort_by(|x, y| x.0.total_cmp(&y.0).then(y.1.total_cmp(&x.1)));
            front.clear();
            for (c, l) in next {
                if front.last().map_or(true, |&(_, bl)| l > bl) {
                    front.push((c, l));
                }
            }
            if front.len() > cap {
                return Err(Error::Resource {
                    what: "product profile frontier".into(),
                    limit: cap as u64,
                });
            }
        }
    }
    let (costs, logs) = front.into_iter().unzip();
    Ok(ProductProfile { costs, logs, n_max })
}

/// Constants of `max Π ≤ K₁ exp(K₂ N/(log N)^{σ−1})` over `N ∈ [2, n_cal]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    pub k1: f64,
    pub k2: f64,
    pub sigma: f64,
    pub n_cal: f64,
}

impl Calibration {
    pub fn ln_rhs(&self, n: f64) -> f64 {
        self.k1.ln() + self.k2 * growth(n, self.sigma)
    }
}

/// `N/(log N)^{σ−1}`.
fn growth(n: f64, sigma: f64) -> f64 {
    n / n.ln().powf(sigma - 1.0)
}

/// `K₁ = max(1, lhs(2))` and the least `K₂` valid on `[2, n_cal]`.
///
/// On each step `[c_i, c_{i+1})` of the profile the constraint is
/// `K₂ ≥ (L_i − log K₁)/inf g`, and `g(N) = N/(log N)^{σ−1}` is unimodal with
/// its minimum at `e^{σ−1}`, so the infimum is `g` at the clamped minimiser.
pub fn calibrate(profile: &ProductProfile, sigma: f64, n_cal: f64) -> Result<Calibration> {
    if !(sigma > 2.0) {
        return Err(Error::domain(format!(
            "calibration needs σ > 2, got {sigma}"
        )));
    }
    if !(n_cal >= 2.0) || n_cal > profile.n_max {
        return Err(Error::domain(format!(
            "calibration range [2, {n_cal}] must lie within the profile range {}",
            profile.n_max
        )));
    }
    let k1 = profile.ln_lhs(2.0).exp().max(1.0);
    let ln_k1 = k1.ln();
    let n_star = (sigma - 1.0).exp();
    let mut k2: f64 = 0.0;
    let steps = profile.costs.len();
    for i in 0..steps {
        let a = profile.costs[i].max(2.0);
        let b = if i + 1 < steps {
            profile.costs[i + 1].min(n_cal)
        } else {
            n_cal
        };
        if a > b || (i + 1 < steps && a == b) {
            continue;
        }
        let need = profile.logs[i] - ln_k1;
        if need <= 0.0 {
            continue;
        }
        let g = growth(n_star.clamp(a, b), sigma);
        k2 = k2.max(need / g);
    }
    Ok(Calibration {
        k1,
        k2,
        sigma,
        n_cal,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `lhs = max_{0<|ν|⋆≤N} Π_j(1+⟨j⟩^{μ₁}|ν_j|^{μ₂})` (1 if no mode fits) against
/// `rhs = K₁ exp(K₂ N/(log N)^{σ−1})`.
pub fn product_sup_bound(
    w: &WeightSequence,
    n: f64,
    mu1: f64,
    mu2: f64,
    cal: &Calibration,
    cap: usize,
) -> Result<ProductBound> {
    if !(n > 1.0) {
        return Err(Error::domain(format!("product bound needs N > 1, got {n}")));
    }
    let prof = product_profile(w, n, mu1, mu2, cap)?;
    let ln_lhs = prof.ln_lhs(n);
    let ln_rhs = cal.ln_rhs(n);
    Ok(ProductBound {
        lhs: ln_lhs.exp(),
        rhs: ln_rhs.exp(),
        holds: ln_lhs <= ln_rhs,
    })
}
