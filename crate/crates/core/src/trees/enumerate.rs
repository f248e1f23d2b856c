//! Enumeration of labelled trees and the sum of their values.
//!
//! Labelings are visited in lexicographic order of the label indices in
//! preorder, shapes in the order of [`shapes`]. The sums use a scalar form
//! of the value: with `c = Π_v f_{ν_v}/p_v! · Π_{v≠v_ϑ} (−ν_{π(v)}·ν_v) · Π_ℓ G_ℓ`
//! one has `V(ϑ) = i c ν_{v_ϑ}`.

use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lindstedt::OrderedCoefficients;
use crate::modes::{CVec, Frequency, Mode, ScalarSeries, VectorSeries, Window};
use crate::smalldiv::{ScaleIndex, Scales};
use crate::trees::{factorial, shapes, Shape, Tree};

/// Default bound on the number of labelled trees visited.
pub const DEFAULT_TREE_CAP: u64 = 200_000_000;

/// Smallest window covering every label.
fn label_window(support: &[Mode]) -> Window {
    let half = support
        .iter()
        .flat_map(|m| m.entries().iter().map(|e| e.0.unsigned_abs()))
        .max()
        .unwrap_or(0);
    Window::new(half)
}

/// Visits every labelling of every shape with `k` nodes whose non-root lines
/// carry nonzero momentum. The visitor gets the shape, the label indices and
/// the dense momenta (row `v` is the line exiting `v`).
fn walk_shape(
    shape: &Shape,
    dense: &[Vec<i32>],
    len: usize,
    visit: &mut dyn FnMut(&[usize], &[i32]) -> Result<()>,
) -> Result<u64> {
    let k = shape.len();
    let s = dense.len();
    if s == 0 {
        return Ok(0);
    }
    let mut idx = vec![0usize; k];
    let mut mom = vec![0i32; k * len];
    let mut count = 0u64;
    loop {
        for v in (0..k).rev() {
            let row = v * len;
            mom[row..row + len].copy_from_slice(&dense[idx[v]]);
            for &c in shape.children(v) {
                for i in 0..len {
                    mom[row + i] += mom[c * len + i];
                }
            }
        }
        let nonroot_ok = (1..k).all(|v| mom[v * len..(v + 1) * len].iter().any(|&x| x != 0));
        if nonroot_ok {
            count += 1;
            visit(&idx, &mom)?;
        }
        // Odometer, last node fastest.
        let mut v = k;
        loop {
            if v == 0 {
                return Ok(count);
            }
            v -= 1;
            idx[v] += 1;
            if idx[v] < s {
                break;
            }
            idx[v] = 0;
        }
    }
}

/// All trees with `k` nodes labelled from `support`, root momentum `nu`
/// (any root momentum if `None`), and nonzero momentum on every other line.
pub fn enumerate_trees(
    k: usize,
    nu: Option<&Mode>,
    support: &[Mode],
    cap: u64,
) -> Result<Vec<Tree>> {
    if k < 1 {
        return Err(Error::domain("trees have at least one node"));
    }
    let win = label_window(support);
    let len = win.len();
    let dense: Vec<Vec<i32>> = support
        .iter()
        .map(|m| win.dense(m).expect("window covers labels"))
        .collect();
    let target = nu.map(|m| {
        let mut d = vec![0i32; len];
        (m.write_dense(win.lo(), &mut d), d)
    });
    let mut out = Vec::new();
    for shape in shapes(k) {
        walk_shape(&shape, &dense, len, &mut |idx, mom| {
            if let Some((fits, d)) = &target {
                if !*fits || mom[..len] != d[..] {
                    return Ok(());
                }
            }
            if out.len() as u64 >= cap {
                return Err(Error::Resource {
                    what: format!("tree enumeration ({} trees kept)", out.len()),
                    limit: cap,
                });
            }
            out.push(
                Tree::new(
                    shape.clone(),
                    idx.iter().map(|&i| support[i].clone()).collect(),
                )
                .expect("sizes match"),
            );
            Ok(())
        })?;
    }
    Ok(out)
}

/// Precomputed per-label data for fast evaluation over `om`'s window.
struct Labels {
    modes: Vec<Mode>,
    dense: Vec<Vec<i32>>,
    coeff: Vec<Complex64>,
    /// `dots[a][b] = ν_a·ν_b`.
    dots: Vec<Vec<f64>>,
}

impl Labels {
    fn new(f: &ScalarSeries, win: Window) -> Result<Self> {
        let mut modes = Vec::new();
        let mut dense = Vec::new();
        let mut coeff = Vec::new();
        for (m, c) in f.iter() {
            let d = win
                .dense(m)
                .ok_or_else(|| Error::domain(format!("potential mode {m} leaves the window")))?;
            modes.push(m.clone());
            dense.push(d);
            coeff.push(*c);
        }
        let dots = modes
            .iter()
            .map(|a| modes.iter().map(|b| a.dot(b) as f64).collect())
            .collect();
        Ok(Labels {
            modes,
            dense,
            coeff,
            dots,
        })
    }
}

/// Scalar `c` of one labelled shape (see module docs), or `None` if a line
/// divisor lies beyond the computed scales.
fn scalar_value(
    shape: &Shape,
    labels: &Labels,
    idx: &[usize],
    mom: &[i32],
    om: &Frequency,
    scales: &Scales,
) -> std::result::Result<Complex64, usize> {
    let len = om.window().len();
    let mut c = Complex64::new(1.0, 0.0);
    for v in 0..shape.len() {
        c *= labels.coeff[idx[v]];
        c /= factorial(shape.branching(v));
        if let Some(p) = shape.parent(v) {
            c *= -labels.dots[idx[p]][idx[v]];
        }
        let x = om.dot_dense(&mom[v * len..(v + 1) * len]);
        match scales.scale_of(x) {
            ScaleIndex::Zero => {}
            ScaleIndex::At(n) => c *= scales.propagator(x, n),
            ScaleIndex::Beyond => return Err(v),
        }
    }
    Ok(c)
}

type Buckets = HashMap<(Vec<i32>, usize), Complex64>;

/// Per-shape sums of `c`, keyed by root momentum and root label.
fn bucket_sums(
    k: usize,
    nu: Option<&Mode>,
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    cap: u64,
) -> Result<(Labels, Vec<Buckets>)> {
    if k < 1 {
        return Err(Error::domain("trees have at least one node"));
    }
    let win = om.window();
    let len = win.len();
    let labels = Labels::new(f, win)?;
    let total =
        (labels.modes.len() as f64).powi(k as i32) * crate::trees::catalan(k as u32 - 1) as f64;
    if total > cap as f64 {
        return Err(Error::Resource {
            what: format!("{total:.3e} labelled trees of order {k}"),
            limit: cap,
        });
    }
    let target: Option<Vec<i32>> = match nu {
        Some(m) => match win.dense(m) {
            Some(d) => Some(d),
            None => return Ok((labels, Vec::new())),
        },
        None => None,
    };
    let per_shape: Vec<Result<Buckets>> = shapes(k)
        .par_iter()
        .map(|shape| {
            let mut b = Buckets::new();
            walk_shape(shape, &labels.dense, len, &mut |idx, mom| {
                if let Some(t) = &target {
                    if mom[..len] != t[..] {
                        return Ok(());
                    }
                }
                match scalar_value(shape, &labels, idx, mom, om, scales) {
                    Ok(c) => {
                        *b.entry((mom[..len].to_vec(), idx[0])).or_default() += c;
                        Ok(())
                    }
                    Err(v) => Err(Error::Truncation(format!(
                        "line exiting node {v} of a tree of order {k} has a divisor below the computed scales"
                    ))),
                }
            })?;
            Ok(b)
        })
        .collect();
    let mut out = Vec::with_capacity(per_shape.len());
    for r in per_shape {
        out.push(r?);
    }
    Ok((labels, out))
}

fn assemble(labels: &Labels, buckets: Vec<Buckets>, win: Window) -> BTreeMap<Mode, CVec> {
    // Merge shapes in order, then labels in order, for a fixed reduction order.
    let mut merged: BTreeMap<(Mode, usize), Complex64> = BTreeMap::new();
    for b in buckets {
        let mut keys: Vec<_> = b.into_iter().collect();
        keys.sort_by(|a, b| a.0.cmp(&b.0));
        for ((mom, root), c) in keys {
            *merged
                .entry((Mode::from_dense(win.lo(), &mom), root))
                .or_default() += c;
        }
    }
    let mut out: BTreeMap<Mode, CVec> = BTreeMap::new();
    for ((mom, root), c) in merged {
        let entry = out.entry(mom).or_insert_with(|| CVec::zeros(win.len()));
        for (slot, &v) in labels.dense[root].iter().enumerate() {
            if v != 0 {
                entry.0[slot] += Complex64::new(0.0, 1.0) * c * v as f64;
            }
        }
    }
    out
}

/// `u_ν^(k) = Σ_{ϑ ∈ Θ_ν^(k)} V(ϑ)`.
pub fn sum_tree_values(
    k: usize,
    nu: &Mode,
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    cap: u64,
) -> Result<CVec> {
    let (labels, buckets) = bucket_sums(k, Some(nu), f, om, scales, cap)?;
    let win = om.window();
    Ok(assemble(&labels, buckets, win)
        .remove(nu)
        .unwrap_or_else(|| CVec::zeros(win.len())))
}

/// Every `u_ν^(k)`, `ν ≠ 0`, from the tree sum. Exact zeros are dropped.
pub fn tree_coefficients(
    k: usize,
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    cap: u64,
) -> Result<VectorSeries> {
    let (labels, buckets) = bucket_sums(k, None, f, om, scales, cap)?;
    let mut out = VectorSeries::new();
    for (m, c) in assemble(&labels, buckets, om.window()) {
        if !m.is_zero() && c.0.iter().any(|z| z.re != 0.0 || z.im != 0.0) {
            out.insert(m, c);
        }
    }
    out.set_hermitian(true);
    Ok(out)
}

/// `u^(1…k_max)` from tree sums.
pub fn tree_orders(
    k_max: usize,
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    cap: u64,
) -> Result<OrderedCoefficients> {
    let mut u = OrderedCoefficients::new(om.window());
    for k in 1..=k_max {
        u.push(tree_coefficients(k, f, om, scales, cap)?)?;
    }
    Ok(u)
}

/// Calls `visit` on every tree of order `k` labelled by the support of `f`,
/// together with its scalar `c` (`V = i c ν_{v_ϑ}`). Trees are produced in
/// enumeration order, one shape at a time.
pub fn for_each_tree(
    k: usize,
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
    visit: &mut dyn FnMut(&Tree, Complex64) -> Result<()>,
) -> Result<u64> {
    let win = om.window();
    let len = win.len();
    let labels = Labels::new(f, win)?;
    let mut count = 0;
    for shape in shapes(k) {
        count += walk_shape(&shape, &labels.dense, len, &mut |idx, mom| {
            let c = scalar_value(&shape, &labels, idx, mom, om, scales).map_err(|_| {
                Error::Truncation(format!(
                    "a tree of order {k} has a divisor below the computed scales"
                ))
            })?;
            let t = Tree::new(
                shape.clone(),
                idx.iter().map(|&i| labels.modes[i].clone()).collect(),
            )
            .expect("sizes match");
            visit(&t, c)
        })?;
    }
    Ok(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::lindstedt::solve;
    use crate::smalldiv::beta_sequence;
    use crate::trees::{line_momenta, tree_value};

    fn fix_a() -> (ScalarSeries, Frequency, Scales) {
        let om = fixtures::fix_a_frequency();
        let b = beta_sequence(&om, &fixtures::fix_a_weights(), 10).unwrap();
        (fixtures::fix_a_potential(), om, Scales::from_beta(&b))
    }

    #[test]
    fn single_node_trees() {
        let (f, _, _) = fix_a();
        let support: Vec<Mode> = f.modes().cloned().collect();
        let e0 = Mode::unit(0);
        assert_eq!(
            enumerate_trees(1, Some(&e0), &support, 10).unwrap().len(),
            1
        );
        assert!(enumerate_trees(1, Some(&Mode::unit(1)), &support, 10)
            .unwrap()
            .is_empty());
        assert!(enumerate_trees(0, None, &support, 10).is_err());
    }

    #[test]
    fn enumeration_respects_conservation_and_cap() {
        let (f, _, _) = fix_a();
        let support: Vec<Mode> = f.modes().cloned().collect();
        let nu: Mode = "0:2;1:1".parse().unwrap();
        // Three FIX-A labels always have an odd e₀ entry.
        assert!(enumerate_trees(3, Some(&nu), &support, 1000)
            .unwrap()
            .is_empty());
        let trees = enumerate_trees(4, Some(&nu), &support, 10_000).unwrap();
        assert!(!trees.is_empty());
        for t in &trees {
            let mom = line_momenta(t);
            assert_eq!(mom[0], nu);
            assert!(mom[1..].iter().all(|m| !m.is_zero()));
        }
        assert!(matches!(
            enumerate_trees(3, None, &support, 5),
            Err(Error::Resource { .. })
        ));
    }

    #[test]
    fn scalar_route_matches_tensor_route() {
        let (f, om, sc) = fix_a();
        for k in 1..=4 {
            for_each_tree(k, &f, &om, &sc, &mut |t, c| {
                let v = tree_value(t, &f, &om, &sc).unwrap();
                let root = t.label(0);
                for (slot, z) in v.0.iter().enumerate() {
                    let want =
                        Complex64::new(0.0, 1.0) * c * root.get(om.window().index(slot)) as f64;
                    assert!((z - want).norm() <= 1e-14 * (1.0 + want.norm()));
                }
                Ok(())
            })
            .unwrap();
        }
    }

    #[test]
    fn examples_match_recursion() {
        let (f, om, sc) = fix_a();
        let e0 = Mode::unit(0);
        let v = sum_tree_values(1, &e0, &f, &om, &sc, DEFAULT_TREE_CAP).unwrap();
        assert_eq!(
            v.0,
            vec![
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.5),
                Complex64::new(0.0, 0.0)
            ]
        );
        let nu: Mode = "0:2;1:1".parse().unwrap();
        let v = sum_tree_values(2, &nu, &f, &om, &sc, DEFAULT_TREE_CAP).unwrap();
        let want = [0.0, -0.021_885, -0.019_098];
        for (z, w) in v.0.iter().zip(want) {
            assert!(z.re.abs() < 1e-15 && (z.im - w).abs() < 1e-6);
        }
        let far: Mode = "-1:5".parse().unwrap();
        assert!(sum_tree_values(3, &far, &f, &om, &sc, DEFAULT_TREE_CAP)
            .unwrap()
            .0
            .iter()
            .all(|z| z.norm() == 0.0));
    }

    #[test]
    fn fix_a_orders_match_recursion() {
        let (f, om, sc) = fix_a();
        let rec = solve(&f, &om, &sc, 5, None).unwrap();
        let tre = tree_orders(5, &f, &om, &sc, DEFAULT_TREE_CAP).unwrap();
        for k in 1..=5 {
            let scale = rec.order(k).sup();
            assert!(
                rec.order(k).distance(tre.order(k)) <= 1e-12 * scale,
                "k = {k}"
            );
        }
    }
}
