//! Order-by-order Fourier recursion for the Lindstedt coefficients.
//!
//! Substituting `u = Σ_k ε^k u^(k)` into `(ω·∂_φ)² u = −ε ∂_θ f(φ + u)` gives
//! `(ω·ν)² u_ν^(k) = [∂f]_ν^(k−1)`, where `[∂f]^(n)` is the `ε^n` coefficient
//! of `Σ_{ν₀} f_{ν₀} e^{iν₀·(φ+φ₀)} (iν₀) exp(iν₀·u)`. Writing
//! `A_{ν₀} = Σ_j ε^j iν₀·u^(j)`, that coefficient is
//! `Σ_{ν₀} f_{ν₀} e^{iν₀·φ₀} (iν₀) Σ_p (A_{ν₀}^p)^{(n)}/p!`, which expands to
//! the sum over compositions `k₁+…+k_p = n` with weight `1/p!`; the `p = 0`
//! term is the bare `iν f_ν` at `n = 0`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modes::{
    canonical_cmp, convolve, star_norm, CVec, Coefficient, Frequency, Mode, ScalarSeries,
    VectorSeries, WeightSequence, Window,
};
use crate::smalldiv::{ScaleIndex, Scales};

/// Sign convention shared by both engines.
pub const SIGN_CONVENTION: &str = "(ω·ν)² u_ν^(k) = [∂f]_ν^(k−1); u_ν^(1) = iν f_ν/(ω·ν)²";

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `u^(1), …, u^(K)` as vector series over a window.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderedCoefficients {
    window: Window,
    orders: Vec<VectorSeries>,
}

impl OrderedCoefficients {
    pub fn new(window: Window) -> Self {
        OrderedCoefficients {
            window,
            orders: Vec::new(),
        }
    }

    pub fn window(&self) -> Window {
        self.window
    }

    /// Highest order present.
    pub fn max_order(&self) -> usize {
        self.orders.len()
    }

    /// `u^(k)`, `k ≥ 1`.
    pub fn order(&self, k: usize) -> &VectorSeries {
        &self.orders[k - 1]
    }

    pub fn orders(&self) -> &[VectorSeries] {
        &self.orders
    }

    /// Appends the next order. Zero modes are rejected.
    pub fn push(&mut self, u: VectorSeries) -> Result<()> {
        if u.get(&Mode::zero()).is_some() {
            return Err(Error::domain("Lindstedt coefficients carry no zero mode"));
        }
        if u.iter()
            .any(|(m, c)| !self.window.covers(m) || c.len() != self.window.len())
        {
            return Err(Error::domain("coefficient outside the active window"));
        }
        self.orders.push(u);
        Ok(())
    }

    /// `‖u^(k)‖_{s,⋆}` for every order.
    pub fn norms(&self, s: f64, w: &WeightSequence) -> Result<Vec<f64>> {
        self.orders
            .iter()
            .map(|u| crate::modes::series_norm(u, s, w))
            .collect()
    }
}

/// One term `f_{ν₀}` of the potential with its cached powers of `A_{ν₀}`.
#[derive(Clone, Debug)]
struct Label {
    nu: Mode,
    entries: Vec<(usize, f64)>,
    coeff: Complex64,
    gradient: CVec,
    /// `a[j−1] = iν₀·u^(j)`.
    a: Vec<ScalarSeries>,
    /// `powers[p][n] = (A^p)^{(n)}`, empty for `n < p`.
    powers: Vec<Vec<ScalarSeries>>,
}

impl Label {
    fn push(&mut self, u: &VectorSeries) {
        let entries = &self.entries;
        let mut a = u.map(|_, c| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &(slot, v) in entries {
                acc += c.0[slot] * v;
            }
            I * acc
        });
        a.prune_zeros();
        self.a.push(a);
        let j = self.a.len();
        self.powers[0].push(ScalarSeries::new());
        let mut row = Vec::with_capacity(j);
        for p in 1..=j {
            let mut acc = ScalarSeries::new();
            for i in 1..=j + 1 - p {
                let prev = &self.powers[p - 1][j - i];
                if prev.is_empty() || self.a[i - 1].is_empty() {
                    continue;
                }
                for (m, c) in convolve(&self.a[i - 1], prev).iter() {
                    acc.accumulate(m.clone(), c);
                }
            }
            row.push(acc);
        }
        for (p, s) in row.into_iter().enumerate() {
            let p = p + 1;
            if self.powers.len() <= p {
                self.powers.push(vec![ScalarSeries::new(); j]);
            }
            self.powers[p].push(s);
        }
    }

    /// `Σ_p (A^p)^{(n)}/p!`.
    fn exp_order(&self, n: usize) -> ScalarSeries {
        let mut out = ScalarSeries::new();
        let mut fact = 1.0;
        for p in 0..=n {
            if p > 0 {
                fact *= p as f64;
            }
            let w = Complex64::new(1.0 / fact, 0.0);
            for (m, c) in self.powers[p][n].iter() {
                out.accumulate(m.clone(), &(c * w));
            }
        }
        out
    }
}

/// Incremental evaluator of `[∂f(φ+φ₀+u)]^(n)`.
#[derive(Clone, Debug)]
pub struct FieldComposer {
    window: Window,
    labels: Vec<Label>,
}

impl FieldComposer {
    pub fn new(f: &ScalarSeries, window: Window, phi0: Option<&[f64]>) -> Result<Self> {
        if let Some(p) = phi0 {
            if p.len() != window.len() {
                return Err(Error::domain(format!(
                    "φ₀ has {} entries, window has {}",
                    p.len(),
                    window.len()
                )));
            }
        }
        let mut labels = Vec::new();
        for (nu, c) in f.iter() {
            if !window.covers(nu) {
                return Err(Error::domain(format!(
                    "potential mode {nu} leaves the active window"
                )));
            }
            let entries: Vec<(usize, f64)> = nu
                .entries()
                .iter()
                .map(|&(j, v)| (window.slot(j).expect("covered"), v as f64))
                .collect();
            let mut phase = 0.0;
            if let Some(p) = phi0 {
                for &(slot, v) in &entries {
                    phase += v * p[slot];
                }
            }
            let mut gradient = CVec::zeros(window.len());
            for &(slot, v) in &entries {
                gradient.0[slot] = I * v;
            }
            let mut unit = ScalarSeries::new();
            unit.insert(Mode::zero(), Complex64::new(1.0, 0.0));
            labels.push(Label {
                nu: nu.clone(),
                entries,
                coeff: c * Complex64::from_polar(1.0, phase),
                gradient,
                a: Vec::new(),
                powers: vec![vec![unit]],
            });
        }
        Ok(FieldComposer { window, labels })
    }

    /// Number of orders of `u` fed so far.
    pub fn known_orders(&self) -> usize {
        self.labels.first().map_or(usize::MAX, |l| l.a.len())
    }

    /// Feeds `u^(j)` for the next `j`.
    pub fn push_order(&mut self, u: &VectorSeries) {
        self.labels.par_iter_mut().for_each(|l| l.push(u));
    }

    /// `[∂f]^(n)`; needs `u^(1…n)` fed.
    pub fn field(&self, n: usize) -> Result<VectorSeries> {
        if self.known_orders() < n {
            return Err(Error::Truncation(format!(
                "field order {n} needs u up to order {n}, have {}",
                self.known_orders()
            )));
        }
        let parts: Vec<Vec<(Mode, CVec)>> = self
            .labels
            .par_iter()
            .map(|l| {
                l.exp_order(n)
                    .iter()
                    .map(|(m, s)| (&l.nu + m, l.gradient.scaled(l.coeff * s)))
                    .collect()
            })
            .collect();
        let mut out = VectorSeries::new();
        for part in parts {
            for (m, c) in part {
                out.accumulate(m, &c);
            }
        }
        if out.iter().any(|(m, _)| !self.window.covers(m)) {
            return Err(Error::domain("composed field leaves the active window"));
        }
        Ok(out)
    }
}

fn composer_for(
    f: &ScalarSeries,
    u: &OrderedCoefficients,
    upto: usize,
    phi0: Option<&[f64]>,
) -> Result<FieldComposer> {
    if u.max_order() < upto {
        return Err(Error::Truncation(format!(
            "needs u up to order {upto}, have {}",
            u.max_order()
        )));
    }
    let mut c = FieldComposer::new(f, u.window(), phi0)?;
    for k in 1..=upto {
        c.push_order(u.order(k));
    }
    Ok(c)
}

/// `ν ↦ [∂f(φ+φ₀+u)]_ν^(k−1)`.
pub fn vector_field_order(
    f: &ScalarSeries,
    u: &OrderedCoefficients,
    k: usize,
    phi0: Option<&[f64]>,
) -> Result<VectorSeries> {
    if k < 1 {
        return Err(Error::domain("orders start at k = 1"));
    }
    composer_for(f, u, k - 1, phi0)?.field(k - 1)
}

/// Divides a field order by the small divisors; the zero mode is dropped.
fn solve_range(field: &VectorSeries, om: &Frequency, scales: &Scales) -> Result<VectorSeries> {
    let mut out = VectorSeries::new();
    for (nu, c) in field.iter() {
        if nu.is_zero() {
            continue;
        }
        let x = om.dot(nu)?;
        let g = match scales.scale_of(x) {
            ScaleIndex::At(n) => scales.propagator(x, n),
            ScaleIndex::Zero => return Err(Error::Resonance(nu.clone())),
            ScaleIndex::Beyond => {
                return Err(Error::Truncation(format!(
                    "divisor ω·ν = {x:e} at ν = {nu} lies below the computed scales"
                )))
            }
        };
        let v = c.scaled(Complex64::new(g, 0.0));
        if !v.is_zero() {
            out.insert(nu.clone(), v);
        }
    }
    out.set_hermitian(true);
    Ok(out)
}

/// `u^(k)` from `u^(1…k−1)`.
pub fn recursion_order(
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    u: &OrderedCoefficients,
    k: usize,
    phi0: Option<&[f64]>,
) -> Result<VectorSeries> {
    let field = vector_field_order(f, u, k, phi0)?;
    solve_range(&field, om, scales)
}

/// `u^(1…k_max)` with one cached composer.
pub fn solve(
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    k_max: usize,
    phi0: Option<&[f64]>,
) -> Result<OrderedCoefficients> {
    let mut u = OrderedCoefficients::new(om.window());
    let mut comp = FieldComposer::new(f, om.window(), phi0)?;
    for k in 1..=k_max {
        if k > 1 {
            comp.push_order(u.order(k - 1));
        }
        let next = solve_range(&comp.field(k - 1)?, om, scales)?;
        u.push(next)?;
    }
    Ok(u)
}

/// `sup_j |[∂f]_0^(k−1)|`, the defect of the kernel equation.
pub fn kernel_check(
    f: &ScalarSeries,
    u: &OrderedCoefficients,
    k: usize,
    phi0: Option<&[f64]>,
) -> Result<f64> {
    let field = vector_field_order(f, u, k, phi0)?;
    Ok(field.get(&Mode::zero()).map_or(0.0, Coefficient::magnitude))
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientRow {
    pub k: usize,
    pub mode: Mode,
    pub j: i32,
    pub value: Complex64,
}

/// Rows `(k, ν, j, u_ν^(k)[j])` in canonical mode order, nonzero components only.
pub fn coefficient_rows(u: &OrderedCoefficients, w: &WeightSequence) -> Vec<CoefficientRow> {
    let win = u.window();
    let mut rows = Vec::new();
    for (k, series) in u.orders().iter().enumerate() {
        let mut terms: Vec<(f64, &Mode, &CVec)> = series
            .iter()
            .map(|(m, c)| (star_norm(m, w), m, c))
            .collect();
        terms.sort_by(|a, b| canonical_cmp((a.0, a.1), (b.0, b.1)));
        for (_, m, c) in terms {
            for (slot, v) in c.0.iter().enumerate() {
                if v.re != 0.0 || v.im != 0.0 {
                    rows.push(CoefficientRow {
                        k: k + 1,
                        mode: m.clone(),
                        j: win.index(slot),
                        value: *v,
                    });
                }
            }
        }
    }
    rows
}
