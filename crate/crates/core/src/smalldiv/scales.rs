use crate::error::{Error, Result};
use crate::smalldiv::BetaSequence;

/// Indices `m_0 = 0 < m_1 < …` at which β halves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaleSequence {
    pub ms: Vec<u32>,
    /// The next `m_{n+1}` lies beyond the range searched.
    pub truncated: bool,
}

impl ScaleSequence {
    pub fn n_max(&self) -> usize {
        self.ms.len() - 1
    }
}

/// `m_{n+1} = m_n + i_n + 1` with `i_n = max{i : β(m_n) < 2β(m_n + i)}`, i.e.
/// the smallest `m > m_n` with `2β(m) ≤ β(m_n)`; searched up to `m_max`.
pub fn scale_sequence(beta: &BetaSequence) -> ScaleSequence {
    scale_sequence_to(beta, beta.m_max()).expect("within computed range")
}

/// As [`scale_sequence`] but searching to `depth`, which may exceed `m_max`
/// for analytic sequences.
pub fn scale_sequence_to(beta: &BetaSequence, depth: u32) -> Result<ScaleSequence> {
    if beta.ln_value(depth).is_none() {
        return Err(Error::Truncation(format!(
            "β is known only to m = {}, scales requested to m = {depth}",
            beta.m_max()
        )));
    }
    let mut ms = vec![0u32];
    for m in 1..=depth {
        let mn = *ms.last().expect("nonempty");
        if beta.halves(m, mn).expect("in range") {
            ms.push(m);
        }
    }
    Ok(ScaleSequence {
        ms,
        truncated: true,
    })
}

/// Result of locating a divisor in the scale ladder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScaleIndex {
    /// `x = 0`.
    Zero,
    At(usize),
    /// Smaller than `¼β(m_{n_max})`.
    Beyond,
}

/// β sampled along a scale sequence, with the shell boundaries `¼β(m_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Scales {
    ms: Vec<u32>,
    betas: Vec<f64>,
    floors: Vec<f64>,
}

impl Scales {
    pub fn new(beta: &BetaSequence, seq: &ScaleSequence) -> Self {
        let betas: Vec<f64> = seq
            .ms
            .iter()
            .map(|&m| beta.value_at(m).expect("in range"))
            .collect();
        let floors = betas.iter().map(|b| 0.25 * b).collect();
        Scales {
            ms: seq.ms.clone(),
            betas,
            floors,
        }
    }

    pub fn from_beta(beta: &BetaSequence) -> Self {
        Scales::new(beta, &scale_sequence(beta))
    }

    pub fn n_max(&self) -> usize {
        self.ms.len() - 1
    }

    pub fn m(&self, n: usize) -> u32 {
        self.ms[n]
    }

    pub fn beta_at(&self, n: usize) -> f64 {
        self.betas[n]
    }

    /// Smallest divisor magnitude that still has a scale.
    pub fn floor(&self) -> f64 {
        self.floors[self.n_max()]
    }

    /// The `n` with `¼β(m_n) ≤ |x| < ¼β(m_{n−1})`, `β(m_{−1}) = ∞`.
    pub fn scale_of(&self, x: f64) -> ScaleIndex {
        if x == 0.0 {
            return ScaleIndex::Zero;
        }
        let a = x.abs();
        for (n, &fl) in self.floors.iter().enumerate() {
            if a >= fl {
                return ScaleIndex::At(n);
            }
        }
        ScaleIndex::Beyond
    }

    /// `Ψ_n(x)/x²`, and `1` at `x = 0`.
    pub fn propagator(&self, x: f64, n: usize) -> f64 {
        if x == 0.0 {
            return 1.0;
        }
        if self.scale_of(x) == ScaleIndex::At(n) {
            1.0 / (x * x)
        } else {
            0.0
        }
    }
}

pub fn scale_of(x: f64, beta: &BetaSequence, seq: &ScaleSequence) -> ScaleIndex {
    Scales::new(beta, seq).scale_of(x)
}

pub fn propagator(x: f64, n: usize, beta: &BetaSequence, seq: &ScaleSequence) -> f64 {
    Scales::new(beta, seq).propagator(x, n)
}
