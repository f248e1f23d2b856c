use num_complex::Complex64;

use crate::error::Result;
use crate::modes::{star_norm, CVec, Frequency, Mode, ScalarSeries, WeightSequence};
use crate::smalldiv::{ScaleIndex, Scales};
use crate::trees::{
    for_each_tree, line_momenta, line_propagator, lines, weighted_value, Line, Tree,
};

/// A resonant cluster inside a host tree.
///
/// The cluster is `subtree(top) \ subtree(entry)`: the line exiting `top` is
/// `ℓ_T`, the line exiting `entry` is `ℓ'_T`. Lines are named by the node
/// they exit.
#[derive(Clone, Debug, PartialEq)]
pub struct ResonantCluster {
    pub nodes: Vec<usize>,
    pub top: usize,
    pub entry: usize,
    /// `P_T`: lines from `ℓ'_T` up to `ℓ_T`, both excluded, bottom first.
    pub path: Vec<usize>,
    /// `K(T) = Σ_{v∈T} |ν_v|⋆`.
    pub weight: f64,
    /// `n̄_T`; `None` when `T` has no internal line.
    pub inner_scale: Option<usize>,
    /// `n_T = min(n_{ℓ_T}, n_{ℓ'_T})`.
    pub outer_scale: usize,
    /// `ν_ℓ⁰` for every internal line, in node order.
    pub stripped: Vec<(usize, Mode)>,
}

impl ResonantCluster {
    /// Internal lines `L(T)`.
    pub fn internal_lines(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().copied().filter(move |&v| v != self.top)
    }

    pub fn on_path(&self, line: usize) -> bool {
        self.path.contains(&line)
    }
}

/// Lines of a tree with the resonant clusters it contains.
#[derive(Clone, Debug)]
pub struct ClusterScan {
    pub lines: Vec<Line>,
    pub clusters: Vec<ResonantCluster>,
    /// `resonant[v]`: the line exiting `v` exits some cluster.
    pub resonant: Vec<bool>,
}

fn scale_number(s: ScaleIndex) -> Option<usize> {
    match s {
        ScaleIndex::At(n) => Some(n),
        _ => None,
    }
}

/// Every subgraph with one entering and one exiting line that satisfies the
/// four cluster conditions: equal external momenta, `K(T) < 2^{m_{n_T}−1}`,
/// and internal scales strictly below `n_T`. Zero-momentum lines carry no
/// scale and never bound a cluster.
pub fn find_resonant_clusters(
    t: &Tree,
    om: &Frequency,
    w: &WeightSequence,
    scales: &Scales,
) -> Result<ClusterScan> {
    let ls = lines(t, om, scales)?;
    let shape = t.shape();
    let k = t.order();
    let mut clusters = Vec::new();
    let mut resonant = vec![false; k];
    for top in 0..k {
        let Some(n_top) = scale_number(ls[top].scale) else {
            continue;
        };
        let sub = shape.subtree(top);
        for entry in sub.clone().skip(1) {
            if ls[entry].momentum != ls[top].momentum {
                continue;
            }
            let Some(n_entry) = scale_number(ls[entry].scale) else {
                continue;
            };
            let outer = n_top.min(n_entry);
            let below = shape.subtree(entry);
            let nodes: Vec<usize> = sub.clone().filter(|v| !below.contains(v)).collect();
            let weight = t.weight_of(nodes.iter().copied(), w);
            if weight >= (2f64).powi(scales.m(outer) as i32 - 1) {
                continue;
            }
            let inner = nodes
                .iter()
                .filter(|&&v| v != top)
                .filter_map(|&v| scale_number(ls[v].scale))
                .max();
            if inner.is_some_and(|n| n >= outer) {
                continue;
            }
            let mut path = Vec::new();
            let mut v = shape.parent(entry).expect("entry is below top");
            while v != top {
                path.push(v);
                v = shape.parent(v).expect("top is an ancestor");
            }
            let stripped = nodes
                .iter()
                .filter(|&&v| v != top)
                .map(|&v| {
                    let m = if path.contains(&v) {
                        &ls[v].momentum - &ls[entry].momentum
                    } else {
                        ls[v].momentum.clone()
                    };
                    (v, m)
                })
                .collect();
            resonant[top] = true;
            clusters.push(ResonantCluster {
                nodes,
                top,
                entry,
                path,
                weight,
                inner_scale: inner,
                outer_scale: outer,
                stripped,
            });
        }
    }
    Ok(ClusterScan {
        lines: ls,
        clusters,
        resonant,
    })
}

/// `𝔑_n(ϑ)`: non-resonant lines on scale `≥ n`.
pub fn nonresonant_count(scan: &ClusterScan, n: usize) -> usize {
    scan.lines
        .iter()
        .zip(&scan.resonant)
        .filter(|(l, &r)| !r && scale_number(l.scale).is_some_and(|m| m >= n))
        .count()
}

/// `max{4K 2^{−m_n} − 1, 0}`.
pub fn nonresonant_bound(weight: f64, m_n: u32) -> f64 {
    (4.0 * weight * (2f64).powi(-(m_n as i32)) - 1.0).max(0.0)
}

/// Node factors with propagators on the non-resonant lines only.
pub fn nonresonant_value(
    t: &Tree,
    scan: &ClusterScan,
    f: &ScalarSeries,
    om: &Frequency,
    scales: &Scales,
) -> Result<CVec> {
    let g: Vec<f64> = scan
        .lines
        .iter()
        .zip(&scan.resonant)
        .map(|(l, &r)| if r { 1.0 } else { line_propagator(l, scales) })
        .collect();
    weighted_value(t, f, om.window(), &g)
}

/// Outcome of the exhaustive counting check at one order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CountingReport {
    pub k: usize,
    /// Trees with nonzero value and nonzero root momentum.
    pub trees: u64,
    pub clusters: u64,
    /// `(tree, n)` pairs compared.
    pub comparisons: u64,
    pub violations: Vec<CountingViolation>,
    /// Smallest `bound − 𝔑_n` seen.
    pub min_slack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountingViolation {
    pub tree: Tree,
    pub n: usize,
    pub count: usize,
    pub bound: f64,
}

/// Checks `𝔑_n(ϑ) ≤ max{4K(ϑ)2^{−m_n} − 1, 0}` for every tree of order `k`
/// with nonzero value and nonzero root momentum, at every `n ≥ 1` up to the
/// deepest scale present.
pub fn check_counting_bound(
    k: usize,
    f: &ScalarSeries,
    om: &Frequency,
    w: &WeightSequence,
    scales: &Scales,
) -> Result<CountingReport> {
    let mut rep = CountingReport {
        k,
        min_slack: f64::INFINITY,
        ..Default::default()
    };
    for_each_tree(k, f, om, scales, &mut |t, c| {
        if c == Complex64::new(0.0, 0.0) || line_momenta(t)[0].is_zero() {
            return Ok(());
        }
        let scan = find_resonant_clusters(t, om, w, scales)?;
        rep.trees += 1;
        rep.clusters += scan.clusters.len() as u64;
        let weight = t.weight_of(0..k, w);
        let deepest = scan
            .lines
            .iter()
            .filter_map(|l| scale_number(l.scale))
            .max()
            .unwrap_or(0);
        for n in 1..=deepest.max(1) {
            let count = nonresonant_count(&scan, n);
            let bound = nonresonant_bound(weight, scales.m(n.min(scales.n_max())));
            rep.comparisons += 1;
            rep.min_slack = rep.min_slack.min(bound - count as f64);
            if count as f64 > bound {
                rep.violations.push(CountingViolation {
                    tree: t.clone(),
                    n,
                    count,
                    bound,
                });
            }
        }
        Ok(())
    })?;
    Ok(rep)
}

/// `Σ_ν e^{s|ν|⋆} Σ_ϑ ‖V_NR(ϑ)‖` over all trees of order `k`, sup norm on
/// the vector values.
pub fn nonresonant_sum(
    k: usize,
    f: &ScalarSeries,
    om: &Frequency,
    w: &WeightSequence,
    scales: &Scales,
    s: f64,
) -> Result<f64> {
    let mut acc = 0.0;
    for_each_tree(k, f, om, scales, &mut |t, _| {
        let root = &line_momenta(t)[0];
        if root.is_zero() {
            return Ok(());
        }
        let scan = find_resonant_clusters(t, om, w, scales)?;
        let v = nonresonant_value(t, &scan, f, om, scales)?;
        let sup = v.0.iter().map(|z| z.norm()).fold(0.0, f64::max);
        acc += (s * star_norm(root, w)).exp() * sup;
        Ok(())
    })?;
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::renorm::resonant_chain;
    use crate::smalldiv::beta_sequence;
    use crate::trees::{tree_value, Shape};

    fn fix_a() -> (ScalarSeries, Frequency, WeightSequence, Scales) {
        let om = fixtures::fix_a_frequency();
        let w = fixtures::fix_a_weights();
        let scales = Scales::from_beta(&beta_sequence(&om, &w, 10).unwrap());
        (fixtures::fix_a_potential(), om, w, scales)
    }

    fn m(s: &str) -> Mode {
        s.parse().unwrap()
    }

    /// Mode in the FIX-A window with the smallest divisor at `|ν|⋆ ≤ 8`.
    fn small_divisor_mode(om: &Frequency) -> Mode {
        let w = fixtures::fix_a_weights();
        crate::modes::enumerate_modes(&w, 8.0, true)
            .into_iter()
            .min_by(|a, b| {
                om.dot(a)
                    .unwrap()
                    .abs()
                    .total_cmp(&om.dot(b).unwrap().abs())
            })
            .unwrap()
    }

    #[test]
    fn single_node_has_no_cluster() {
        let (_, om, w, scales) = fix_a();
        let t = Tree::new(Shape::single(), vec![m("0:1")]).unwrap();
        let scan = find_resonant_clusters(&t, &om, &w, &scales).unwrap();
        assert!(scan.clusters.is_empty());
        assert_eq!(nonresonant_count(&scan, 1), 0);
    }

    #[test]
    fn two_node_cluster_above_a_small_divisor() {
        let (_, om, w, scales) = fix_a();
        let nu = small_divisor_mode(&om);
        let nu0 = m("0:1");
        // Top node ν₀ with children −ν₀ (leaf) and the node carrying ν.
        let t = Tree::new(
            Shape::from_parents(&[0, 0, 0]).unwrap(),
            vec![nu0.clone(), -&nu0, nu.clone()],
        )
        .unwrap();
        let scan = find_resonant_clusters(&t, &om, &w, &scales).unwrap();
        assert_eq!(scan.clusters.len(), 1);
        let c = &scan.clusters[0];
        assert_eq!((c.top, c.entry), (0, 2));
        assert_eq!(c.nodes, vec![0, 1]);
        assert!(c.path.is_empty());
        assert_eq!(c.weight, 2.0);
        assert_eq!(c.stripped, vec![(1, -&nu0)]);
        assert!(scan.resonant[0] && !scan.resonant[1] && !scan.resonant[2]);
    }

    #[test]
    fn chain_has_one_cluster_per_link() {
        let (_, om, w, scales) = fix_a();
        let nu = small_divisor_mode(&om);
        for k in [3, 5, 7] {
            let t = resonant_chain(k, &m("0:1"), &nu).unwrap();
            let scan = find_resonant_clusters(&t, &om, &w, &scales).unwrap();
            assert_eq!(scan.clusters.len(), (k - 1) / 2, "k = {k}");
            assert!(scan
                .clusters
                .iter()
                .all(|c| c.nodes.len() == 2 && c.weight == 2.0));
        }
    }

    #[test]
    fn nonresonant_value_drops_resonant_divisors() {
        let (mut f, om, w, scales) = fix_a();
        let nu = small_divisor_mode(&om);
        f.insert(nu.clone(), Complex64::new(0.5, 0.0));
        f.insert(-&nu, Complex64::new(0.5, 0.0));
        let plain = Tree::new(Shape::single(), vec![m("0:1")]).unwrap();
        let scan = find_resonant_clusters(&plain, &om, &w, &scales).unwrap();
        assert_eq!(
            nonresonant_value(&plain, &scan, &f, &om, &scales).unwrap(),
            tree_value(&plain, &f, &om, &scales).unwrap()
        );
        let t = resonant_chain(5, &m("0:1"), &nu).unwrap();
        let scan = find_resonant_clusters(&t, &om, &w, &scales).unwrap();
        assert_eq!(scan.clusters.len(), 2);
        let full = tree_value(&t, &f, &om, &scales).unwrap();
        let nr = nonresonant_value(&t, &scan, &f, &om, &scales).unwrap();
        let gain: f64 = scan
            .resonant
            .iter()
            .zip(&scan.lines)
            .filter(|(r, _)| **r)
            .map(|(_, l)| l.divisor * l.divisor)
            .product();
        assert!(nr.0.iter().any(|z| z.norm() > 0.0));
        for (a, b) in full.0.iter().zip(&nr.0) {
            assert!((a * gain - b).norm() <= 1e-13 * b.norm());
        }
    }

    #[test]
    fn counting_bound_holds_on_fix_a_small_orders() {
        let (f, om, w, scales) = fix_a();
        for k in 1..=4 {
            let rep = check_counting_bound(k, &f, &om, &w, &scales).unwrap();
            assert!(rep.violations.is_empty(), "{:?}", rep.violations.first());
            assert!(rep.trees > 0);
        }
    }
}
