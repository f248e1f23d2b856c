//! Torus synthesis from the Lindstedt orders, residual and action
//! diagnostics, the threshold constants `C₀, C₀′, ε̄₁, ε̄₂`, and a root-test
//! estimate of the convergence radius.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lindstedt::{solve, FieldComposer, OrderedCoefficients};
use crate::modes::{
    bracket, series_norm, CVec, Coefficient, Frequency, Mode, ScalarSeries, VectorSeries,
    WeightSequence,
};
use crate::smalldiv::{scale_sequence_to, BetaSequence, BetaStar, Provenance, Scales};
use crate::trees::tree_orders;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which engine produces the coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Recursion,
    Trees,
}

impl Engine {
    pub fn name(&self) -> &'static str {
        match self {
            Engine::Recursion => "recursion",
            Engine::Trees => "trees",
        }
    }
}

impl std::str::FromStr for Engine {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recursion" => Ok(Engine::Recursion),
            "trees" => Ok(Engine::Trees),
            _ => Err(Error::domain(format!(
                "unknown engine `{s}` (recursion or trees)"
            ))),
        }
    }
}

/// The model data a solution is built from.
#[derive(Clone, Debug)]
pub struct Problem {
    pub f: ScalarSeries,
    pub om: Frequency,
    pub w: WeightSequence,
    pub scales: Scales,
    pub s: f64,
    pub s2: f64,
}

impl Problem {
    pub fn new(
        f: ScalarSeries,
        om: Frequency,
        w: WeightSequence,
        scales: Scales,
        s: f64,
        s2: f64,
    ) -> Result<Self> {
        if !(0.0 < s2 && s2 < s) {
            return Err(Error::domain(format!(
                "need 0 < s₂ < s, got s = {s}, s₂ = {s2}"
            )));
        }
        Ok(Problem {
            f,
            om,
            w,
            scales,
            s,
            s2,
        })
    }
}

/// `u = Σ_{k=1}^K ε^k u^(k)` with its per-order norms `‖u^(k)‖_{s,⋆}`.
#[derive(Clone, Debug)]
pub struct SeriesSolution {
    pub problem: Problem,
    pub coefficients: OrderedCoefficients,
    pub epsilon: f64,
    pub engine: Engine,
    pub norms: Vec<f64>,
}

impl SeriesSolution {
    pub fn order(&self) -> usize {
        self.coefficients.max_order()
    }

    /// The same coefficients at another `ε`.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        SeriesSolution {
            epsilon,
            ..self.clone()
        }
    }
}

pub fn synthesize(
    problem: &Problem,
    epsilon: f64,
    k: usize,
    engine: Engine,
    cap: u64,
) -> Result<SeriesSolution> {
    if k < 1 {
        return Err(Error::domain("synthesis needs K ≥ 1"));
    }
    if !epsilon.is_finite() {
        return Err(Error::domain(format!("ε must be finite, got {epsilon}")));
    }
    let coefficients = match engine {
        Engine::Recursion => solve(&problem.f, &problem.om, &problem.scales, k, None)?,
        Engine::Trees => tree_orders(k, &problem.f, &problem.om, &problem.scales, cap)?,
    };
    let norms = coefficients.norms(problem.s, &problem.w)?;
    Ok(SeriesSolution {
        problem: problem.clone(),
        coefficients,
        epsilon,
        engine,
        norms,
    })
}

fn phase(nu: &Mode, om: &Frequency, phi: &[f64]) -> Complex64 {
    let win = om.window();
    let mut a = 0.0;
    for &(j, v) in nu.entries() {
        a += v as f64 * phi[win.slot(j).expect("covered")];
    }
    Complex64::from_polar(1.0, a)
}

fn check_angles(sol: &SeriesSolution, phi: &[f64]) -> Result<()> {
    let n = sol.problem.om.window().len();
    if phi.len() != n {
        return Err(Error::domain(format!(
            "angle vector has {} entries, window has {n}",
            phi.len()
        )));
    }
    Ok(())
}

/// `Σ_k ε^k Σ_ν e^{iν·φ} m(ν) u_ν^(k)` as a complex vector.
fn synthesize_at(
    sol: &SeriesSolution,
    phi: &[f64],
    multiplier: impl Fn(&Mode) -> Complex64,
) -> CVec {
    let p = &sol.problem;
    let mut total = CVec::zeros(p.om.window().len());
    let mut power = 1.0;
    for u in sol.coefficients.orders() {
        power *= sol.epsilon;
        let mut order = CVec::zeros(total.len());
        for (m, c) in u.canonical(&p.w) {
            order.add_assign(&c.scaled(phase(m, &p.om, phi) * multiplier(m)));
        }
        total.add_assign(&order.scaled(Complex64::new(power, 0.0)));
    }
    total
}

/// Real and imaginary parts of `u(φ)`.
pub fn displacement_parts(sol: &SeriesSolution, phi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_angles(sol, phi)?;
    let z = synthesize_at(sol, phi, |_| Complex64::new(1.0, 0.0));
    Ok((
        z.0.iter().map(|c| c.re).collect(),
        z.0.iter().map(|c| c.im).collect(),
    ))
}

/// Tolerance on the imaginary part of quantities that are real for Hermitian data.
pub const REALITY_TOLERANCE: f64 = 1e-12;

fn real_part(re: Vec<f64>, im: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    let scale = re.iter().map(|x| x.abs()).fold(1.0, f64::max);
    let residue = im.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if residue > REALITY_TOLERANCE * scale {
        return Err(Error::Singular(format!(
            "{what} has imaginary part {residue:e}"
        )));
    }
    Ok(re)
}

/// `u(φ) = Σ_k ε^k Σ_ν e^{iν·φ} u_ν^(k)`, real by Hermitian symmetry.
pub fn evaluate_displacement(sol: &SeriesSolution, phi: &[f64]) -> Result<Vec<f64>> {
    let (re, im) = displacement_parts(sol, phi)?;
    real_part(re, im, "u(φ)")
}

/// Coefficients of `(ω·∂_φ)²u + ε∂_θ f(φ+u)` by order in ε.
#[derive(Clone, Debug)]
pub struct Residual {
    /// `orders[k−1]` is the `ε^k` coefficient, `k = 1…K+2`.
    pub orders: Vec<VectorSeries>,
    /// `sup |[∂f]^(k−1)|`, the size of the terms that cancel at order `k`.
    pub scales: Vec<f64>,
    pub k: usize,
}

impl Residual {
    /// The residual series at a given `ε`.
    pub fn at(&self, epsilon: f64) -> VectorSeries {
        let mut out = VectorSeries::new();
        let mut power = 1.0;
        for r in &self.orders {
            power *= epsilon;
            for (m, c) in r.iter() {
                out.accumulate(m.clone(), &c.scaled(Complex64::new(power, 0.0)));
            }
        }
        out
    }

    pub fn sup(&self, epsilon: f64) -> f64 {
        self.at(epsilon).sup()
    }

    /// Largest `sup|r^(k)| / sup|[∂f]^(k−1)|` over the solved orders `k ≤ K`.
    pub fn solved_defect(&self) -> f64 {
        self.orders[..self.k]
            .iter()
            .zip(&self.scales)
            .map(|(r, s)| if *s > 0.0 { r.sup() / s } else { r.sup() })
            .fold(0.0, f64::max)
    }
}

/// `r^(k) = −(ω·ν)² u^(k) + [∂f]^(k−1)`, with `u^(k) = 0` beyond `K`.
pub fn residual_spectrum(sol: &SeriesSolution) -> Result<Residual> {
    let p = &sol.problem;
    let k = sol.order();
    let empty = VectorSeries::new();
    let mut comp = FieldComposer::new(&p.f, p.om.window(), None)?;
    let mut orders = Vec::with_capacity(k + 2);
    let mut scales = Vec::with_capacity(k + 2);
    for order in 1..=k + 2 {
        if order > 1 {
            comp.push_order(if order - 1 <= k {
                sol.coefficients.order(order - 1)
            } else {
                &empty
            });
        }
        let field = comp.field(order - 1)?;
        scales.push(field.sup());
        let mut r = field;
        if order <= k {
            for (m, c) in sol.coefficients.order(order).iter() {
                let x = p.om.dot(m)?;
                r.accumulate(m.clone(), &c.scaled(Complex64::new(-x * x, 0.0)));
            }
        }
        orders.push(r);
    }
    Ok(Residual { orders, scales, k })
}

/// Action along the torus at sample angles, with its two norms.
#[derive(Clone, Debug)]
pub struct ActionCurve {
    pub values: Vec<Vec<f64>>,
    /// `max_φ sup_j |I_j(φ)|⟨j⟩^q`.
    pub lq_norm: f64,
    /// `max_φ sup_j e^{s₂h_j}|I_j(φ) − ω_j|`.
    pub m_norm: f64,
    /// `max_φ sup_j |I_j(φ) − ω_j|`.
    pub deviation: f64,
    /// `Σ_k |ε|^k Σ_ν |ω·ν| ‖u_ν^(k)‖`, a bound on `deviation`.
    pub bound: f64,
}

/// `I(φ) = ω + Σ_k ε^k Σ_ν i(ω·ν) e^{iν·φ} u_ν^(k)`.
pub fn action_at(sol: &SeriesSolution, phi: &[f64]) -> Result<Vec<f64>> {
    check_angles(sol, phi)?;
    let om = &sol.problem.om;
    let z = synthesize_at(sol, phi, |m| I * om.dot(m).expect("covered"));
    let (re, im): (Vec<f64>, Vec<f64>) = z.0.iter().map(|c| (c.re, c.im)).unzip();
    let dev = real_part(re, im, "I(φ)")?;
    Ok(dev.iter().zip(om.values()).map(|(d, w)| w + d).collect())
}

pub fn action_curve(sol: &SeriesSolution, samples: &[Vec<f64>]) -> Result<ActionCurve> {
    let p = &sol.problem;
    let win = p.om.window();
    let mut bound = 0.0;
    let mut power = 1.0;
    for u in sol.coefficients.orders() {
        power *= sol.epsilon.abs();
        let mut order = 0.0;
        for (m, c) in u.canonical(&p.w) {
            order += p.om.dot(m)?.abs() * c.magnitude();
        }
        bound += power * order;
    }
    let mut values = Vec::with_capacity(samples.len());
    let (mut lq_norm, mut m_norm, mut deviation) = (0.0f64, 0.0f64, 0.0f64);
    for phi in samples {
        let action = action_at(sol, phi)?;
        for (slot, (a, w)) in action.iter().zip(p.om.values()).enumerate() {
            let j = win.index(slot);
            let d = (a - w).abs();
            lq_norm = lq_norm.max(a.abs() * bracket(j).powf(p.om.q()));
            m_norm = m_norm.max(if d == 0.0 {
                0.0
            } else {
                (p.s2 * p.w.h(j)).exp() * d
            });
            deviation = deviation.max(d);
        }
        values.push(action);
    }
    Ok(ActionCurve {
        values,
        lq_norm,
        m_norm,
        deviation,
        bound,
    })
}

/// `ε̂ = exp(−slope)` of a least-squares fit of `log‖u^(k)‖` against `k` over
/// `k = ⌈K/2⌉…K`, skipping zero norms; `None` when fewer than two points remain.
pub fn empirical_radius(norms: &[f64]) -> Result<Option<f64>> {
    let k = norms.len();
    if k < 4 {
        return Err(Error::domain(format!(
            "the radius fit needs K ≥ 4, got {k}"
        )));
    }
    let pts: Vec<(f64, f64)> = ((k + 1) / 2..=k)
        .filter(|&i| norms[i - 1] > 0.0)
        .map(|i| (i as f64, norms[i - 1].ln()))
        .collect();
    if pts.len() < 2 {
        return Ok(None);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let r = (-sxy / sxx).exp();
    Ok(r.is_finite().then_some(r))
}

/// Threshold constants; logarithms are kept because `ε̄₁` routinely
/// underflows.
#[derive(Clone, Debug, PartialEq)]
pub struct Thresholds {
    pub n0: usize,
    pub m_n0: u32,
    pub ln_beta_n0: f64,
    /// `8 Σ_{n>n₀} 2^{−m_n} log(1/β(m_n))`, majorized.
    pub tail: f64,
    pub c0: f64,
    pub c1: f64,
    pub f_norm: f64,
    pub ln_c0: f64,
    pub ln_c0_prime: f64,
    pub ln_eps1: f64,
    pub ln_eps2: f64,
    /// `(s − s₂)/(s − s₂ + 2)`.
    pub eps_ratio: f64,
    pub scaled: Option<ScaledThresholds>,
}

impl Thresholds {
    pub fn eps1(&self) -> f64 {
        self.ln_eps1.exp()
    }

    pub fn eps2(&self) -> f64 {
        self.eps1() * self.eps_ratio
    }
}

/// The variant with `β = γβ̄` and the factor `γ²` pulled out of `C₀′`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledThresholds {
    pub gamma: f64,
    pub n0: usize,
    pub m_n0: u32,
    pub ln_c0_prime: f64,
    pub ln_eps1: f64,
    pub ln_eps2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdParams {
    pub s: f64,
    pub s2: f64,
    pub c0: f64,
    pub scaled: bool,
}

/// Largest `m` examined when extending an analytic β.
const DEPTH_CAP: u32 = 960;

/// `2^{−m} log(1/β(m))`, staying finite where `β(m)` underflows.
fn weighted_term(beta: &BetaSequence, m: u32) -> f64 {
    if let Provenance::AnalyticLowerBound(star) = beta.provenance() {
        if m >= star.turning_point() {
            return star.weighted_log_inverse(m);
        }
    }
    -0.5f64.powi(m as i32) * beta.ln_value(m).expect("in range")
}

/// `(n₀, m_{n₀}, ln β(m_{n₀}), tail)` for the first `n` with
/// `8 Σ_{n'>n} 2^{−m_{n'}} log(1/β(m_{n'})) < s/2`.
fn find_n0(beta: &BetaSequence, s: f64) -> Result<(usize, u32, f64, f64)> {
    let star = beta.tail_bound().ok_or_else(|| {
        Error::Truncation(
            "the tail condition needs a β⋆ lower bound beyond the computed range".into(),
        )
    })?;
    let analytic = matches!(beta.provenance(), Provenance::AnalyticLowerBound(_));
    let mut depth = beta.m_max();
    if analytic {
        depth = depth.max(16);
        while star.tail_majorant(depth) >= s / 32.0 && depth < DEPTH_CAP {
            depth = (2 * depth).min(DEPTH_CAP);
        }
    }
    let rest = star.tail_majorant(depth);
    if !(8.0 * rest < s / 2.0) {
        return Err(Error::Truncation(format!(
            "tail beyond m = {depth} is only bounded by {rest:e}; need 8·tail < s/2 = {}",
            s / 2.0
        )));
    }
    let seq = scale_sequence_to(beta, depth)?;
    let ms = &seq.ms;
    let mut suffix = vec![rest; ms.len() + 1];
    for i in (0..ms.len()).rev() {
        suffix[i] = suffix[i + 1] + weighted_term(beta, ms[i]).max(0.0);
    }
    for n in 0..ms.len() {
        let tail = suffix[n + 1];
        if 8.0 * tail < s / 2.0 {
            let ln_beta = beta.ln_value(ms[n]).expect("in range");
            return Ok((n, ms[n], ln_beta, 8.0 * tail));
        }
    }
    unreachable!("the last index meets the condition once the remainder does")
}

/// `C₀ = (16c₁/(sβ(m_{n₀})))²‖f‖_{2s}`, `C₀′ = c₀(16c₁/(sβ(m_{n₀})))⁴‖f‖_{2s}`,
/// `ε̄₁ = 1/C₀′` and `ε̄₂ = ε̄₁(s−s₂)/(s−s₂+2)`.
pub fn threshold_estimates(
    f: &ScalarSeries,
    w: &WeightSequence,
    beta: &BetaSequence,
    p: ThresholdParams,
) -> Result<Thresholds> {
    if !(0.0 < p.s2 && p.s2 < p.s) {
        return Err(Error::domain(format!(
            "need 0 < s₂ < s, got s = {}, s₂ = {}",
            p.s, p.s2
        )));
    }
    if !(p.c0 > 0.0) {
        return Err(Error::domain(format!("c₀ must be positive, got {}", p.c0)));
    }
    let f_norm = series_norm(f, 2.0 * p.s, w)?;
    if !(f_norm > 0.0) {
        return Err(Error::domain("thresholds need a nonzero potential"));
    }
    let c1 = w.c1();
    let ln_k = (16.0 * c1 / p.s).ln();
    let ratio = (p.s - p.s2) / (p.s - p.s2 + 2.0);
    let (n0, m_n0, ln_beta_n0, tail) = find_n0(beta, p.s)?;
    let ln_c0 = 2.0 * (ln_k - ln_beta_n0) + f_norm.ln();
    let ln_c0_prime = p.c0.ln() + 4.0 * (ln_k - ln_beta_n0) + f_norm.ln();
    let ln_eps1 = -ln_c0_prime;
    let scaled = if p.scaled {
        let star = beta.tail_bound().ok_or_else(|| {
            Error::domain("the scaled variant needs a β⋆ lower bound to read γ from")
        })?;
        let unit = BetaStar::new(1.0, star.k1, star.k2, star.sigma)?;
        let bar = BetaSequence::analytic(unit, beta.m_max());
        let (n0, m_n0, ln_bar, _) = find_n0(&bar, p.s)?;
        let ln_c0_prime = p.c0.ln() + 4.0 * (ln_k - ln_bar) + f_norm.ln();
        let ln_eps1 = 2.0 * star.gamma.ln() - ln_c0_prime;
        Some(ScaledThresholds {
            gamma: star.gamma,
            n0,
            m_n0,
            ln_c0_prime,
            ln_eps1,
            ln_eps2: ln_eps1 + ratio.ln(),
        })
    } else {
        None
    };
    Ok(Thresholds {
        n0,
        m_n0,
        ln_beta_n0,
        tail,
        c0: p.c0,
        c1,
        f_norm,
        ln_c0,
        ln_c0_prime,
        ln_eps1,
        ln_eps2: ln_eps1 + ratio.ln(),
        eps_ratio: ratio,
        scaled,
    })
}
