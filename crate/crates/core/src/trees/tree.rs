use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{CVec, Frequency, Mode, ScalarSeries, Window};
use crate::smalldiv::{ScaleIndex, Scales};
use crate::trees::Shape;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// A shape with one mode label per node.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tree {
    shape: Shape,
    labels: Vec<Mode>,
}

impl Tree {
    pub fn new(shape: Shape, labels: Vec<Mode>) -> Result<Self> {
        if labels.len() != shape.len() {
            return Err(Error::domain(format!(
                "{} labels for {} nodes",
                labels.len(),
                shape.len()
            )));
        }
        Ok(Tree { shape, labels })
    }

    /// A path `v₀ ← v₁ ← … ← v_{k−1}` with the given labels, `v₀` on the root line.
    pub fn path(labels: Vec<Mode>) -> Result<Self> {
        let parents: Vec<usize> = (0..labels.len()).map(|v| v.saturating_sub(1)).collect();
        Tree::new(Shape::from_parents(&parents)?, labels)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn labels(&self) -> &[Mode] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &Mode {
        &self.labels[v]
    }

    /// Number of nodes `k(ϑ)`.
    pub fn order(&self) -> usize {
        self.labels.len()
    }

    /// `K(ϑ) = Σ_v |ν_v|⋆` over a subset of nodes.
    pub fn weight_of(
        &self,
        nodes: impl IntoIterator<Item = usize>,
        w: &crate::modes::WeightSequence,
    ) -> f64 {
        let mut acc = 0.0;
        for v in nodes {
            acc += crate::modes::star_norm(&self.labels[v], w);
        }
        acc
    }
}

/// `ν_ℓ` for the line exiting each node (entry 0 is the root line), from one
/// bottom-up pass.
pub fn line_momenta(t: &Tree) -> Vec<Mode> {
    let k = t.order();
    let mut mom: Vec<Mode> = t.labels.clone();
    for v in (1..k).rev() {
        let p = t.shape.parent(v).expect("non-root");
        let add = mom[v].clone();
        mom[p] = &mom[p] + &add;
    }
    mom
}

/// Momentum, divisor `x_ℓ = ω·ν_ℓ` and scale of one line.
#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub momentum: Mode,
    pub divisor: f64,
    pub scale: ScaleIndex,
}

impl Line {
    /// `n_ℓ` as an integer; `None` for `x = 0`.
    pub fn scale_number(&self) -> Option<usize> {
        match self.scale {
            ScaleIndex::At(n) => Some(n),
            _ => None,
        }
    }
}

/// Line data for every line; errors if a divisor lies below the computed scales.
pub fn lines(t: &Tree, om: &Frequency, scales: &Scales) -> Result<Vec<Line>> {
    line_momenta(t)
        .into_iter()
        .map(|m| {
            let x = om.dot(&m)?;
            let scale = scales.scale_of(x);
            if scale == ScaleIndex::Beyond {
                return Err(Error::Truncation(format!(
                    "line momentum {m} has divisor {x:e} below the computed scales"
                )));
            }
            Ok(Line {
                momentum: m,
                divisor: x,
                scale,
            })
        })
        .collect()
}

/// `G_ℓ = G_{n_ℓ}(x_ℓ)` with `n_ℓ` the scale of `x_ℓ`.
pub(crate) fn line_propagator(line: &Line, scales: &Scales) -> f64 {
    match line.scale {
        ScaleIndex::Zero => 1.0,
        ScaleIndex::At(n) => scales.propagator(line.divisor, n),
        ScaleIndex::Beyond => 0.0,
    }
}

fn grad(nu: &Mode, window: Window) -> Result<CVec> {
    let mut g = CVec::zeros(window.len());
    for &(j, v) in nu.entries() {
        let slot = window
            .slot(j)
            .ok_or_else(|| Error::domain(format!("mode {nu} leaves the window")))?;
        g.0[slot] = I * v as f64;
    }
    Ok(g)
}

fn contract(a: &CVec, b: &CVec) -> Complex64 {
    a.0.iter().zip(&b.0).map(|(x, y)| x * y).sum()
}

/// Ordered application of the node tensors `(1/p_v!) f_{ν_v} (iν_v)^{p_v+1}`,
/// each subtree value multiplied by `weights[v]` before it is contracted.
pub(crate) fn weighted_value(
    t: &Tree,
    f: &ScalarSeries,
    window: Window,
    weights: &[f64],
) -> Result<CVec> {
    fn go(t: &Tree, v: usize, f: &ScalarSeries, window: Window, weights: &[f64]) -> Result<CVec> {
        let g = grad(&t.labels[v], window)?;
        let p = t.shape.branching(v);
        let mut c = f.get(&t.labels[v]).copied().unwrap_or_default() / factorial(p);
        for &w in t.shape.children(v) {
            let sub = go(t, w, f, window, weights)?;
            c *= contract(&g, &sub);
        }
        Ok(CVec(g.0.iter().map(|x| x * c * weights[v]).collect()))
    }
    go(t, 0, f, window, weights)
}

pub(crate) fn factorial(p: usize) -> f64 {
    (1..=p).map(|i| i as f64).product()
}

/// `Π_v F_v` without propagators.
pub fn node_factor_product(t: &Tree, f: &ScalarSeries, window: Window) -> Result<CVec> {
    weighted_value(t, f, window, &vec![1.0; t.order()])
}

/// `V(ϑ) = (Π_v F_v)(Π_ℓ G_ℓ)`, evaluated as nested tensor contractions.
pub fn tree_value(t: &Tree, f: &ScalarSeries, om: &Frequency, scales: &Scales) -> Result<CVec> {
    let ls = lines(t, om, scales)?;
    let g: Vec<f64> = ls.iter().map(|l| line_propagator(l, scales)).collect();
    weighted_value(t, f, om.window(), &g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{self, GOLDEN};
    use crate::smalldiv::beta_sequence;

    fn scales() -> Scales {
        Scales::from_beta(
            &beta_sequence(&fixtures::fix_a_frequency(), &fixtures::fix_a_weights(), 10).unwrap(),
        )
    }

    fn m(s: &str) -> Mode {
        s.parse().unwrap()
    }

    #[test]
    fn momenta_follow_conservation() {
        let single = Tree::new(Shape::single(), vec![m("0:1")]).unwrap();
        assert_eq!(line_momenta(&single), vec![m("0:1")]);
        let cherry = Tree::new(
            Shape::from_parens("(()())").unwrap(),
            vec![m("0:1"), m("1:1"), m("-1:2")],
        )
        .unwrap();
        assert_eq!(line_momenta(&cherry)[0], m("-1:2;0:1;1:1"));
        let nu = m("0:1;1:-1");
        let mut labels = vec![Mode::zero(); 5];
        labels[4] = nu.clone();
        let path = Tree::path(labels).unwrap();
        assert!(line_momenta(&path).iter().all(|x| *x == nu));
    }

    #[test]
    fn single_node_value() {
        let f = fixtures::fix_a_potential();
        let t = Tree::new(Shape::single(), vec![m("0:1;1:1")]).unwrap();
        let v = tree_value(&t, &f, &fixtures::fix_a_frequency(), &scales()).unwrap();
        let g = GOLDEN.powi(-4);
        let want = [0.0, 0.5 * g, 0.5 * g];
        for (a, b) in v.0.iter().zip(want) {
            assert!((a - Complex64::new(0.0, b)).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_modes_on_a_path_kill_the_value() {
        let mut f = fixtures::fix_a_potential();
        f.insert(Mode::zero(), Complex64::new(0.7, 0.0));
        for k in 2..=6 {
            let mut labels = vec![Mode::zero(); k];
            labels[k - 1] = m("0:1");
            let t = Tree::path(labels).unwrap();
            let v = tree_value(&t, &f, &fixtures::fix_a_frequency(), &scales()).unwrap();
            assert!(v.0.iter().all(|z| z.re == 0.0 && z.im == 0.0));
        }
    }

    #[test]
    fn four_node_tensor_formulas() {
        // Random modes on a wide window; values of f are arbitrary.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let window = Window::new(3);
        for _ in 0..50 {
            let nus: Vec<Mode> = (0..4)
                .map(|_| {
                    Mode::from_pairs((0..3).map(|_| (rng.gen_range(-3..=3), rng.gen_range(-3..=3))))
                })
                .collect();
            let mut f = ScalarSeries::new();
            let mut fs = Vec::new();
            for nu in &nus {
                let c = f.get(nu).copied().unwrap_or_else(|| {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                });
                f.insert(nu.clone(), c);
                fs.push(c);
            }
            let d = |a: usize, b: usize| nus[a].dot(&nus[b]) as f64;
            let i7 = I.powi(7);
            let pre = i7 * fs[0] * fs[1] * fs[2] * fs[3];
            // Nodes are numbered ν₁…ν₄ = 0…3; shapes by parent list.
            let cases: [(&[usize], f64, f64); 4] = [
                (&[0, 0, 1, 2], 1.0, d(0, 1) * d(1, 2) * d(2, 3)),
                (&[0, 0, 0, 0], 1.0 / 6.0, d(0, 1) * d(0, 2) * d(0, 3)),
                (&[0, 0, 1, 1], 0.5, d(0, 1) * d(1, 2) * d(1, 3)),
                (&[0, 0, 1, 0], 0.5, d(0, 1) * d(0, 3) * d(1, 2)),
            ];
            for (parents, sym, dots) in cases {
                let t = Tree::new(Shape::from_parents(parents).unwrap(), nus.clone()).unwrap();
                let got = node_factor_product(&t, &f, window).unwrap();
                let scale = pre * sym * dots;
                for j in window.indices() {
                    let want = scale * nus[0].get(j) as f64;
                    let have = got.0[window.slot(j).unwrap()];
                    assert!(
                        (have - want).norm() <= 1e-13 * (1.0 + want.norm()),
                        "{parents:?}"
                    );
                }
            }
        }
    }
}
