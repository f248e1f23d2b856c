use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::modes::{Frequency, Mode, ScalarSeries, Window};
use crate::renorm::{LinearKernel, ResonantCluster};
use crate::smalldiv::{ScaleIndex, Scales};
use crate::trees::{enumerate_trees, factorial, line_momenta, lines, Tree};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Value and first two derivatives of a function of `x`.
#[derive(Clone, Copy, Debug)]
struct Jet([f64; 3]);

impl Jet {
    const ONE: Jet = Jet([1.0, 0.0, 0.0]);

    fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0])
    }

    /// `ξ ↦ 1/ξ²` seen as a function of `x` with `dξ/dx = 1`.
    fn inverse_square(xi: f64) -> Self {
        let g = 1.0 / (xi * xi);
        Jet([g, -2.0 * g / xi, 6.0 * g / (xi * xi)])
    }

    fn mul(self, o: Jet) -> Jet {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Jet([
            a0 * b0,
            a1 * b0 + a0 * b1,
            a2 * b0 + 2.0 * a1 * b1 + a0 * b2,
        ])
    }

    fn get(self, order: usize) -> f64 {
        self.0[order]
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > 2 {
        return Err(Error::domain(format!(
            "derivative order {order} is not 0, 1 or 2"
        )));
    }
    Ok(())
}

fn grad(nu: &Mode, window: Window) -> Result<Vec<Complex64>> {
    let dense = window
        .dense(nu)
        .ok_or_else(|| Error::domain(format!("mode {nu} leaves the window")))?;
    Ok(dense.into_iter().map(|v| I * v as f64).collect())
}

/// Scalar part of a cluster value without propagators: node coefficients
/// over the branching factorials times the contractions `iν_{π(v)}·iν_v`
/// below `top`. The entering line already counts in the host branching.
fn node_scalar(t: &Tree, nodes: &[usize], top: usize, f: &ScalarSeries) -> Complex64 {
    let shape = t.shape();
    let mut c = Complex64::new(1.0, 0.0);
    for &v in nodes {
        c *= f.get(t.label(v)).copied().unwrap_or_default() / factorial(shape.branching(v));
        if v != top {
            let parent = shape.parent(v).expect("below top");
            c *= -(t.label(parent).dot(t.label(v)) as f64);
        }
    }
    c
}

/// `W_T(x)` for a cluster found in a host tree, or its `order`-th derivative
/// in `x`. Each internal line keeps the scale it has in the host tree; only
/// the `1/ξ²` factors are differentiated.
pub fn cluster_operator(
    t: &Tree,
    cluster: &ResonantCluster,
    x: f64,
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    order: usize,
) -> Result<LinearKernel> {
    check_order(order)?;
    let window = om.window();
    let host = lines(t, om, scales)?;
    let mut jet = Jet::ONE;
    for (v, nu0) in &cluster.stripped {
        let base = om.dot(nu0)?;
        let xi = if cluster.on_path(*v) { base + x } else { base };
        if xi == 0.0 {
            return Err(Error::Singular(format!(
                "internal line {v} has ξ = 0 at x = {x:e}"
            )));
        }
        let factor = if scales.scale_of(xi) == host[*v].scale {
            if cluster.on_path(*v) {
                Jet::inverse_square(xi)
            } else {
                Jet::constant(1.0 / (xi * xi))
            }
        } else {
            Jet::constant(0.0)
        };
        jet = jet.mul(factor);
    }
    let entry_node = t.shape().parent(cluster.entry).expect("entry is below top");
    let c = node_scalar(t, &cluster.nodes, cluster.top, f) * jet.get(order);
    Ok(LinearKernel::outer(
        c,
        &grad(t.label(cluster.top), window)?,
        &grad(t.label(entry_node), window)?,
    ))
}

/// One summand of `M_n^(k)(x)`: a tree with zero root momentum, the node the
/// entering line is attached to, and the slot among that node's entering
/// lines.
#[derive(Clone, Debug)]
pub struct SelfEnergyTerm {
    pub tree: Tree,
    pub attach: usize,
    pub position: usize,
    pub kernel: LinearKernel,
}

impl SelfEnergyTerm {
    /// `(shape, attachment node, slot)`, identifying the unlabelled diagram.
    pub fn family(&self) -> (String, usize, usize) {
        (self.tree.shape().to_parens(), self.attach, self.position)
    }
}

/// Trees of order `k`, root momentum zero, all labels in the support of `f`
/// and nonzero (a zero label makes every attachment vanish).
pub fn zero_momentum_trees(k: usize, f: &ScalarSeries, cap: u64) -> Result<Vec<Tree>> {
    let support: Vec<Mode> = f.modes().filter(|m| !m.is_zero()).cloned().collect();
    enumerate_trees(k, Some(&Mode::zero()), &support, cap)
}

/// `[scale_of(ξ) < n]/ξ²` as a jet in `x`.
fn cut_jet(xi: f64, moving: bool, n: usize, scales: &Scales) -> Result<Jet> {
    let inside = match scales.scale_of(xi) {
        ScaleIndex::Zero => return Err(Error::Singular("an internal line has ξ = 0".into())),
        ScaleIndex::At(m) => m < n,
        ScaleIndex::Beyond if n <= scales.n_max() + 1 => false,
        ScaleIndex::Beyond => {
            return Err(Error::Truncation(format!(
                "ξ = {xi:e} lies below the computed scales; cut n = {n} is ambiguous"
            )))
        }
    };
    Ok(match (inside, moving) {
        (false, _) => Jet::constant(0.0),
        (true, true) => Jet::inverse_square(xi),
        (true, false) => Jet::constant(1.0 / (xi * xi)),
    })
}

/// Every attachment of an entering line to one tree: `(w, jet scalar)`.
fn attachments(
    t: &Tree,
    om: &Frequency,
    n: usize,
    x: f64,
    scales: &Scales,
    f: &ScalarSeries,
) -> Result<Vec<(usize, Complex64, Jet)>> {
    let k = t.order();
    let shape = t.shape();
    let mom = line_momenta(t);
    let base: Vec<f64> = mom.iter().map(|m| om.dot(m)).collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(k);
    for w in 0..k {
        let mut jet = Jet::ONE;
        for v in 1..k {
            let moving = shape.is_descendant(w, v);
            let xi = if moving { base[v] + x } else { base[v] };
            if xi == 0.0 {
                return Err(Error::Singular(format!(
                    "tree {} has ξ = 0 on line {v} at x = {x:e}",
                    shape.to_parens()
                )));
            }
            jet = jet.mul(cut_jet(xi, moving, n, scales)?);
            if jet.0 == [0.0; 3] {
                break;
            }
        }
        // The attached line is an extra child of `w`; the per-slot factorial
        // is (p_w + 1)!.
        let mut c = Complex64::new(1.0, 0.0);
        for v in 0..k {
            let p = shape.branching(v) + usize::from(v == w);
            c *= f.get(t.label(v)).copied().unwrap_or_default() / factorial(p);
            if let Some(parent) = shape.parent(v) {
                c *= -(t.label(parent).dot(t.label(v)) as f64);
            }
        }
        out.push((w, c, jet));
    }
    Ok(out)
}

/// All slot-resolved summands of `∂ₓ^order M_n^(k)(x)`, with the cut
/// propagator `[scale_of(ξ) < n]/ξ²` on every line of the underlying tree.
/// No bound on `K(T)` is imposed.
#[allow(clippy::too_many_arguments)]
pub fn self_energy_terms(
    k: usize,
    n: usize,
    x: f64,
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    order: usize,
    cap: u64,
) -> Result<Vec<SelfEnergyTerm>> {
    check_order(order)?;
    let trees = zero_momentum_trees(k, f, cap)?;
    let window = om.window();
    let per_tree: Vec<Vec<SelfEnergyTerm>> = trees
        .par_iter()
        .map(|t| {
            let mut out = Vec::new();
            let root = grad(t.label(0), window)?;
            for (w, c, jet) in attachments(t, om, n, x, scales, f)? {
                let value = c * jet.get(order);
                let kernel = LinearKernel::outer(value, &root, &grad(t.label(w), window)?);
                for position in 0..=t.shape().branching(w) {
                    out.push(SelfEnergyTerm {
                        tree: t.clone(),
                        attach: w,
                        position,
                        kernel: kernel.clone(),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_tree.into_iter().flatten().collect())
}

/// `∂ₓ^order M_n^(k)(x)` and the raw scale `Σ ‖summand‖`.
#[derive(Clone, Debug)]
pub struct SelfEnergy {
    pub kernel: LinearKernel,
    pub raw: f64,
    pub terms: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn self_energy(
    k: usize,
    n: usize,
    x: f64,
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    order: usize,
    cap: u64,
) -> Result<SelfEnergy> {
    let terms = self_energy_terms(k, n, x, f, om, scales, order, cap)?;
    let mut kernel = LinearKernel::zeros(om.window().len());
    let mut raw = 0.0;
    for t in &terms {
        kernel.add_assign(&t.kernel);
        raw += t.kernel.norm();
    }
    Ok(SelfEnergy {
        kernel,
        raw,
        terms: terms.len(),
    })
}

/// One row of the cancellation table.
#[derive(Clone, Debug, PartialEq)]
pub struct CancellationRow {
    pub k: usize,
    pub n: usize,
    pub norm_m0: f64,
    pub norm_dm0: f64,
    /// Raw scale of `M_n^(k)(0)`.
    pub raw_scale: f64,
    /// Raw scale of `∂ₓM_n^(k)(0)`.
    pub raw_scale_d: f64,
    pub ratio0: f64,
    pub ratio1: f64,
    /// Sample point for the remainder, inside shell `n`.
    pub x: f64,
    /// `‖(M(x) − M(0) − x∂ₓM(0))/x²‖`.
    pub norm_r: f64,
}

fn ratio(norm: f64, raw: f64) -> f64 {
    if raw == 0.0 {
        0.0
    } else {
        norm / raw
    }
}

/// Deepest scale carried by a line of a zero-momentum tree at `x = 0`.
fn deepest_scale(trees: &[Tree], om: &Frequency, scales: &Scales) -> Result<usize> {
    let mut top = 0;
    for t in trees {
        for (v, m) in line_momenta(t).iter().enumerate().skip(1) {
            match scales.scale_of(om.dot(m)?) {
                ScaleIndex::At(s) => top = top.max(s),
                ScaleIndex::Zero => {
                    return Err(Error::Singular(format!(
                        "line {v} of {} carries momentum zero",
                        t.shape().to_parens()
                    )))
                }
                ScaleIndex::Beyond => {
                    return Err(Error::Truncation(format!(
                        "momentum {m} lies below the computed scales"
                    )))
                }
            }
        }
    }
    Ok(top)
}

/// `‖M_n^(k)(0)‖` and `‖∂ₓM_n^(k)(0)‖` against their raw scales for every
/// `k ≤ k_max` and every cut `n` from 1 to one past the deepest line scale,
/// plus the second-order Taylor remainder at `x = 0.3 β(m_n)`.
pub fn cancellation_report(
    k_max: usize,
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    cap: u64,
) -> Result<Vec<CancellationRow>> {
    let mut rows = Vec::new();
    for k in 1..=k_max {
        let trees = zero_momentum_trees(k, f, cap)?;
        let top = deepest_scale(&trees, om, scales)?;
        for n in 1..=(top + 1).min(scales.n_max() + 1) {
            let m0 = self_energy(k, n, 0.0, f, om, scales, 0, cap)?;
            let d0 = self_energy(k, n, 0.0, f, om, scales, 1, cap)?;
            let x = 0.3 * scales.beta_at(n.min(scales.n_max()));
            let mx = self_energy(k, n, x, f, om, scales, 0, cap)?;
            let mut r = mx.kernel.clone();
            r.add_assign(&m0.kernel.scaled(Complex64::new(-1.0, 0.0)));
            r.add_assign(&d0.kernel.scaled(Complex64::new(-x, 0.0)));
            let norm_m0 = m0.kernel.norm();
            let norm_dm0 = d0.kernel.norm();
            rows.push(CancellationRow {
                k,
                n,
                norm_m0,
                norm_dm0,
                raw_scale: m0.raw,
                raw_scale_d: d0.raw,
                ratio0: ratio(norm_m0, m0.raw),
                ratio1: ratio(norm_dm0, d0.raw),
                x,
                norm_r: r.norm() / (x * x),
            });
        }
    }
    Ok(rows)
}
