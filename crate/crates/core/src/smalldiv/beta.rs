use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modes::{canonical_cmp, Frequency, Mode, WeightSequence};
use crate::smalldiv::scan::Lattice;

/// Divisors below this are treated as exact resonances.
pub const RESONANCE_FLOOR: f64 = 1e-300;

/// Parameters of the analytic lower bound
/// `β⋆(m) = (γ/K₁)·exp(−K₂·2^m·(log 2^m)^{−(σ−1)})`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaStar {
    pub gamma: f64,
    pub k1: f64,
    pub k2: f64,
    pub sigma: f64,
}

impl BetaStar {
    pub fn new(gamma: f64, k1: f64, k2: f64, sigma: f64) -> Result<Self> {
        if !(gamma > 0.0 && k1 > 0.0 && k2 >= 0.0 && sigma > 2.0) {
            return Err(Error::domain(format!(
                "β⋆ needs γ, K₁ > 0, K₂ ≥ 0, σ > 2; got γ={gamma}, K₁={k1}, K₂={k2}, σ={sigma}"
            )));
        }
        Ok(BetaStar {
            gamma,
            k1,
            k2,
            sigma,
        })
    }

    /// `K₂·2^m·(m log 2)^{1−σ}`.
    fn exponent(&self, m: u32) -> f64 {
        self.k2 * 2f64.powi(m as i32) * (m as f64 * std::f64::consts::LN_2).powf(1.0 - self.sigma)
    }

    pub fn ln_value(&self, m: u32) -> Result<f64> {
        if m == 0 {
            return Err(Error::domain("β⋆(m) is undefined at m = 0 (log 2⁰ = 0)"));
        }
        Ok((self.gamma / self.k1).ln() - self.exponent(m))
    }

    /// `2^{−m}·log(1/β⋆(m))` without forming `2^m`.
    pub fn weighted_log_inverse(&self, m: u32) -> f64 {
        let lead = (self.k1 / self.gamma).ln() * 0.5f64.powi(m as i32);
        lead + self.k2 * (m as f64 * std::f64::consts::LN_2).powf(1.0 - self.sigma)
    }

    /// Majorant of `Σ_{m>L} 2^{−m}·max(0, log 1/β⋆(m))`, from
    /// `Σ_{m>L} m^{1−σ} ≤ L^{2−σ}/(σ−2)`.
    pub fn tail_majorant(&self, l: u32) -> f64 {
        let lead = (self.k1 / self.gamma).ln().max(0.0) * 0.5f64.powi(l as i32);
        let s = self.sigma;
        let sum = (l.max(1) as f64).powf(2.0 - s) / (s - 2.0);
        lead + self.k2 * std::f64::consts::LN_2.powf(1.0 - s) * sum
    }

    /// Smallest `m ≥ 1` from which `β⋆` is nonincreasing.
    pub fn turning_point(&self) -> u32 {
        let mut m = 1;
        while m < 1000 && self.exponent(m + 1) < self.exponent(m) {
            m += 1;
        }
        m
    }

    /// `log` of the largest nonincreasing minorant-compatible value
    /// `sup_{m' ≥ max(m,1)} β⋆(m')`.
    pub fn ln_envelope(&self, m: u32) -> f64 {
        let m = m.max(self.turning_point());
        self.ln_value(m).expect("m ≥ 1")
    }
}

/// `β⋆(m)`; an error at `m = 0`.
pub fn beta_star_lower_bound(m: u32, gamma: f64, k1: f64, k2: f64, sigma: f64) -> Result<f64> {
    Ok(BetaStar::new(gamma, k1, k2, sigma)?.ln_value(m)?.exp())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    /// Minimum of `|ω·ν|` over enumerated modes.
    Empirical,
    /// Supplied directly.
    Prescribed,
    /// Nonincreasing envelope of `β⋆`.
    AnalyticLowerBound(BetaStar),
}

/// `β(m)` for `m = 0…m_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaSequence {
    values: Vec<f64>,
    ln_values: Vec<f64>,
    witnesses: Vec<Option<Mode>>,
    provenance: Provenance,
    majorant: Option<BetaStar>,
}

impl BetaSequence {
    /// A user-supplied sequence; must be positive and nonincreasing.
    pub fn prescribed(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("β sequence is empty"));
        }
        if values.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(Error::domain("β values must be positive and finite"));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::domain("β sequence must be nonincreasing"));
        }
        let ln_values = values.iter().map(|b| b.ln()).collect();
        let witnesses = vec![None; values.len()];
        Ok(BetaSequence {
            values,
            ln_values,
            witnesses,
            provenance: Provenance::Prescribed,
            majorant: None,
        })
    }

    /// The nonincreasing envelope of `β⋆`, with `β(0) := β(1)`.
    pub fn analytic(star: BetaStar, m_max: u32) -> Self {
        let ln_values: Vec<f64> = (0..=m_max).map(|m| star.ln_envelope(m)).collect();
        let values = ln_values.iter().map(|l| l.exp()).collect();
        BetaSequence {
            values,
            ln_values,
            witnesses: vec![None; m_max as usize + 1],
            provenance: Provenance::AnalyticLowerBound(star),
            majorant: None,
        }
    }

    /// Declares `β⋆` a valid lower bound beyond `m_max` (for tail estimates).
    pub fn with_majorant(mut self, star: BetaStar) -> Self {
        self.majorant = Some(star);
        self
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Lower bound usable beyond the computed range, if any.
    pub fn tail_bound(&self) -> Option<BetaStar> {
        match self.provenance {
            Provenance::AnalyticLowerBound(s) => Some(s),
            _ => self.majorant,
        }
    }

    pub fn m_max(&self) -> u32 {
        (self.values.len() - 1) as u32
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, m: u32) -> f64 {
        self.values[m as usize]
    }

    /// `β(m)`, extended past `m_max` for analytic sequences.
    pub fn value_at(&self, m: u32) -> Option<f64> {
        match self.values.get(m as usize) {
            Some(v) => Some(*v),
            None => self.ln_value(m).map(f64::exp),
        }
    }

    pub fn witness(&self, m: u32) -> Option<&Mode> {
        self.witnesses[m as usize].as_ref()
    }

    /// `log β(m)`; available beyond `m_max` only for analytic sequences.
    pub fn ln_value(&self, m: u32) -> Option<f64> {
        if let Some(l) = self.ln_values.get(m as usize) {
            return Some(*l);
        }
        match self.provenance {
            Provenance::AnalyticLowerBound(s) => Some(s.ln_envelope(m)),
            _ => None,
        }
    }

    /// Whether `2β(m) ≤ β(m_n)`, i.e. `m` ends the block started at `m_n`.
    pub(crate) fn halves(&self, m: u32, mn: u32) -> Option<bool> {
        let (a, b) = (m as usize, mn as usize);
        if a < self.values.len() && self.values[a].is_normal() && self.values[b].is_normal() {
            return Some(2.0 * self.values[a] <= self.values[b]);
        }
        Some(self.ln_value(m)? <= self.ln_value(mn)? - std::f64::consts::LN_2)
    }
}

fn witness_cmp(a: &(f64, f64, Mode), b: &(f64, f64, Mode)) -> std::cmp::Ordering {
    a.0.total_cmp(&b.0)
        .then_with(|| canonical_cmp((a.1, &a.2), (b.1, &b.2)))
}

/// `min |ω·ν|` over `0 < |ν|⋆ ≤ n`, with its canonically first minimiser.
pub fn min_divisor(om: &Frequency, w: &WeightSequence, n: f64) -> Result<Option<(f64, Mode)>> {
    let lat = match Lattice::new(w, n) {
        Some(l) => l,
        None => return Ok(None),
    };
    if lat.half > om.window().half {
        return Err(Error::domain(format!(
            "frequency window ±{} does not cover indices ±{} with h_j ≤ {n}",
            om.window().half,
            lat.half
        )));
    }
    // ω restricted to the lattice window, aligned slot by slot.
    let shift = (om.window().half - lat.half) as usize;
    let omega = &om.values()[shift..shift + lat.weights.len()];
    let dot = |d: &[i32]| {
        let mut acc = 0.0;
        for (w, &v) in omega.iter().zip(d) {
            if v != 0 {
                acc += w * v as f64;
            }
        }
        acc
    };
    let p = lat.pivot;
    let wc = omega[p];
    let mut best: Option<(f64, f64, Mode)> = None;
    let lo = lat.lo();
    lat.scan(n, &mut |d, k| {
        if k == 0 && d.iter().all(|&v| v == 0) {
            return;
        }
        let partial_zero = d.iter().all(|&v| v == 0);
        let x = dot(d);
        let mut cands: [i64; 4] = [0; 4];
        let mut nc = 0;
        if wc != 0.0 && k > 0 {
            let t = -x / wc;
            for c in [t.floor(), t.ceil()] {
                cands[nc] = (c.max(-(k as f64)).min(k as f64)) as i64;
                nc += 1;
            }
        } else {
            cands[nc] = 0;
            nc += 1;
        }
        if partial_zero && k > 0 {
            cands[nc] = 1;
            cands[nc + 1] = -1;
            nc += 2;
        }
        for &a in &cands[..nc] {
            if partial_zero && a == 0 {
                continue;
            }
            d[p] = a as i32;
            let v = dot(d).abs();
            let better = match &best {
                None => true,
                Some(b) => v <= b.0,
            };
            if better {
                let cand = (v, lat.star(d), Mode::from_dense(lo, d));
                if best
                    .as_ref()
                    .map_or(true, |b| witness_cmp(&cand, b).is_lt())
                {
                    best = Some(cand);
                }
            }
        }
        d[p] = 0;
    });
    match best {
        None => Ok(None),
        Some((v, _, m)) if v < RESONANCE_FLOOR => Err(Error::Resonance(m)),
        Some((v, _, m)) => Ok(Some((v, m))),
    }
}

/// `β(m) = min{|ω·ν| : 0 < |ν|⋆ ≤ 2^m}` for `m = 0…m_max`.
pub fn beta_sequence(om: &Frequency, w: &WeightSequence, m_max: u32) -> Result<BetaSequence> {
    let n_top = 2f64.powi(m_max as i32);
    if let Some(j) = w.index_bound(n_top) {
        if j > om.window().half {
            return Err(Error::domain(format!(
                "frequency window ±{} does not cover indices ±{j} with h_j ≤ 2^{m_max}",
                om.window().half
            )));
        }
    }
    let rows: Vec<Result<Option<(f64, Mode)>>> = (0..=m_max)
        .into_par_iter()
        .map(|m| min_divisor(om, w, 2f64.powi(m as i32)))
        .collect();
    let mut values = Vec::new();
    let mut witnesses = Vec::new();
    for (m, r) in rows.into_iter().enumerate() {
        match r? {
            Some((v, wit)) => {
                values.push(v);
                witnesses.push(Some(wit));
            }
            None => return Err(Error::domain(format!("no nonzero mode with |ν|⋆ ≤ 2^{m}"))),
        }
    }
    let ln_values = values.iter().map(|b| b.ln()).collect();
    Ok(BetaSequence {
        values,
        ln_values,
        witnesses,
        provenance: Provenance::Empirical,
        majorant: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BryunoSum {
    pub value: f64,
    pub last_increment: f64,
}

/// `Σ_{m=1}^{M} 2^{−m} log(1/β(m))`.
pub fn bryuno_sum(beta: &BetaSequence, m_top: u32) -> Result<BryunoSum> {
    if m_top > beta.m_max() {
        return Err(Error::Truncation(format!(
            "Bryuno sum to M = {m_top} needs β beyond m_max = {}",
            beta.m_max()
        )));
    }
    let mut value = 0.0;
    let mut last_increment = 0.0;
    for m in 1..=m_top {
        last_increment = -0.5f64.powi(m as i32) * beta.ln_value(m).expect("within range");
        value += last_increment;
    }
    Ok(BryunoSum {
        value,
        last_increment,
    })
}
