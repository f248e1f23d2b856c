//! Two explicit tree families: a path whose value vanishes identically, and a
//! chain of two-node clusters whose value grows like a power of the small
//! divisor `(ω·ν)⁻²`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{CVec, Frequency, Mode, ScalarSeries};
use crate::trees::{Shape, Tree};

/// Path of `k` nodes, all labelled `0` except the deepest, labelled `ν`.
pub fn zero_mode_path(k: usize, nu: &Mode) -> Result<Tree> {
    if k == 0 {
        return Err(Error::domain("a path has at least one node"));
    }
    let mut labels = vec![Mode::zero(); k];
    labels[k - 1] = nu.clone();
    Tree::path(labels)
}

/// `k = 2c + 1` nodes: top nodes `t_1 … t_c` labelled `ν₀`, each with a leaf
/// `−ν₀` and the next top node below it; the last top node carries the leaf
/// `ν` instead. Every line on the spine has momentum `ν`.
pub fn resonant_chain(k: usize, nu0: &Mode, nu: &Mode) -> Result<Tree> {
    if k < 3 || k % 2 == 0 {
        return Err(Error::domain(format!(
            "chain order must be odd and at least 3, got {k}"
        )));
    }
    let c = (k - 1) / 2;
    let mut parents = vec![0usize];
    let mut labels = vec![nu0.clone()];
    for i in 0..c {
        let top = 2 * i;
        parents.push(top);
        labels.push(-nu0);
        parents.push(top);
        labels.push(if i + 1 == c { nu.clone() } else { nu0.clone() });
    }
    Tree::new(Shape::from_parents(&parents)?, labels)
}

fn euclid2(nu: &Mode) -> f64 {
    nu.dot(nu) as f64
}

fn coefficient(f: &ScalarSeries, nu: &Mode) -> Complex64 {
    f.get(nu).copied().unwrap_or_default()
}

/// Closed-form value of [`resonant_chain`] with bare propagators `1/x²`:
///
/// `i (−1)^c ν₀ (ν₀·ν) (½)^c |f_{ν₀}|^{2c} f_ν |ν₀|^{4c−2} / ((ω·ν₀)^{2c} (ω·ν)^{2(c+1)})`.
///
/// Assumes `f_{−ν₀} = conj(f_{ν₀})`.
pub fn resonant_chain_value(
    k: usize,
    nu0: &Mode,
    nu: &Mode,
    f: &ScalarSeries,
    om: &Frequency,
) -> Result<CVec> {
    let c = chain_links(k)?;
    let x0 = om.dot(nu0)?;
    let x = om.dot(nu)?;
    let scalar = Complex64::new(0.0, 1.0)
        * (-1f64).powi(c)
        * (nu0.dot(nu) as f64)
        * 0.5f64.powi(c)
        * coefficient(f, nu0).norm_sqr().powi(c)
        * coefficient(f, nu)
        * euclid2(nu0).powi(2 * c - 1)
        / (x0.powi(2 * c) * x.powi(2 * (c + 1)));
    along(nu0, scalar, om)
}

/// The same chain value written with `ν` in place of `ν₀(ν₀·ν)`; agrees with
/// [`resonant_chain_value`] only when `ν = ν₀` is a unit vector.
pub fn resonant_chain_value_literal(
    k: usize,
    nu0: &Mode,
    nu: &Mode,
    f: &ScalarSeries,
    om: &Frequency,
) -> Result<CVec> {
    let c = chain_links(k)?;
    let x0 = om.dot(nu0)?;
    let x = om.dot(nu)?;
    let scalar = Complex64::new(0.0, 1.0)
        * (-1f64).powi(c)
        * 0.5f64.powi(c)
        * coefficient(f, nu0).norm_sqr().powi(c)
        * coefficient(f, nu)
        * euclid2(nu0).powi(2 * c - 1)
        / (x0.powi(2 * c) * x.powi(2 * (c + 1)));
    along(nu, scalar, om)
}

fn chain_links(k: usize) -> Result<i32> {
    if k < 3 || k % 2 == 0 {
        return Err(Error::domain(format!(
            "chain order must be odd and at least 3, got {k}"
        )));
    }
    Ok(((k - 1) / 2) as i32)
}

fn along(dir: &Mode, scalar: Complex64, om: &Frequency) -> Result<CVec> {
    let w = om.window();
    let dense = w
        .dense(dir)
        .ok_or_else(|| Error::domain(format!("mode {dir} leaves the window")))?;
    Ok(CVec(dense.into_iter().map(|v| scalar * v as f64).collect()))
}
