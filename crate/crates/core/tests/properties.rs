use std::collections::BTreeSet;
use std::sync::OnceLock;

use kamtree::fixtures;
use kamtree::lindstedt::{kernel_check, solve, OrderedCoefficients};
use kamtree::modes::{
    enumerate_modes, mode_norms, parse_potential, star_norm, Coefficient, Frequency, Mode,
    ScalarSeries, WeightSequence,
};
use kamtree::renorm::{cluster_operator, find_resonant_clusters, self_energy, LinearKernel};
use kamtree::smalldiv::{
    beta_sequence, calibrate, diophantine_check, diophantine_product, product_profile,
    sample_frequency, scale_sequence, BetaSequence, BetaStar, DiophantineParams, ScaleIndex,
    Scales,
};
use kamtree::torus::{
    displacement_parts, synthesize, threshold_estimates, Engine, Problem, SeriesSolution,
    ThresholdParams,
};
use kamtree::trees::{
    catalan, enumerate_trees, shapes, tree_orders, Shape, Tree, DEFAULT_TREE_CAP,
};
use kamtree::Complex64;
use proptest::prelude::*;

fn fix_a_scales() -> &'static Scales {
    static S: OnceLock<Scales> = OnceLock::new();
    S.get_or_init(|| {
        Scales::from_beta(
            &beta_sequence(&fixtures::fix_a_frequency(), &fixtures::fix_a_weights(), 10).unwrap(),
        )
    })
}

fn five_scales() -> &'static Scales {
    static S: OnceLock<Scales> = OnceLock::new();
    S.get_or_init(|| {
        Scales::from_beta(
            &beta_sequence(&fixtures::five_frequency(), &fixtures::five_weights(), 6).unwrap(),
        )
    })
}

fn fix_a_solution() -> &'static SeriesSolution {
    static S: OnceLock<SeriesSolution> = OnceLock::new();
    S.get_or_init(|| {
        let p = Problem::new(
            fixtures::fix_a_potential(),
            fixtures::fix_a_frequency(),
            fixtures::fix_a_weights(),
            fix_a_scales().clone(),
            0.5,
            0.25,
        )
        .unwrap();
        synthesize(&p, 1e-3, 5, Engine::Recursion, DEFAULT_TREE_CAP).unwrap()
    })
}

fn mode_in(half: i32, max: i32) -> impl Strategy<Value = Mode> {
    prop::collection::vec((-half..=half, -max..=max), 0..5).prop_map(Mode::from_pairs)
}

fn sup_rel(a: &kamtree::modes::VectorSeries, b: &kamtree::modes::VectorSeries) -> f64 {
    let scale = a.sup().max(b.sup());
    if scale == 0.0 {
        0.0
    } else {
        a.distance(b) / scale
    }
}

fn factorial(p: u32) -> f64 {
    (1..=p).map(f64::from).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn norm_chain_fix_a(nu in mode_in(1, 6)) {
        let w = fixtures::fix_a_weights();
        let n = mode_norms(&nu, &w);
        prop_assert!(n.sup <= n.l1);
        prop_assert!(n.l1 as f64 <= w.c1() * n.star + 1e-12);
    }

    #[test]
    fn norm_chain_fix_b(nu in mode_in(8, 6)) {
        let w = fixtures::fix_b_weights();
        let n = mode_norms(&nu, &w);
        prop_assert!(n.sup <= n.l1);
        prop_assert!(n.l1 as f64 <= w.c1() * n.star * (1.0 + 1e-12));
    }

    #[test]
    fn polynomial_against_exponential(nu in mode_in(8, 6), p in 0u32..6, delta in 0.05f64..3.0) {
        let w = fixtures::fix_b_weights();
        let n = mode_norms(&nu, &w);
        let lhs = (n.l1 as f64).powi(p as i32) * (-delta * n.star).exp();
        let rhs = factorial(p) * w.c1().powi(p as i32) * delta.powi(-(p as i32));
        prop_assert!(lhs <= rhs * (1.0 + 1e-12), "{lhs} > {rhs}");
    }

    #[test]
    fn mode_arithmetic(a in mode_in(4, 5), b in mode_in(4, 5)) {
        prop_assert_eq!(&(&a + &b) - &b, a.clone());
        prop_assert_eq!(-(-&a), a.clone());
        prop_assert!((&a + &(-&a)).is_zero());
        prop_assert_eq!(a.dot(&b), b.dot(&a));
        prop_assert_eq!(&a + &b, &b + &a);
        let back: Mode = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a.clone());
        prop_assert_eq!(a.scaled(-1), -&a);
    }

    #[test]
    fn parsed_potentials_are_hermitian(
        terms in prop::collection::vec((mode_in(2, 2), -1.0f64..1.0, -1.0f64..1.0), 1..6),
        cosines in prop::collection::vec((prop::collection::vec(-2i32..=2, 1..3), 0.1f64..2.0), 0..4),
    ) {
        let mut text = String::new();
        let mut seen = BTreeSet::new();
        for (nu, re, im) in &terms {
            if nu.is_zero() || !seen.insert(nu.clone()) || !seen.insert(-nu) {
                continue;
            }
            text.push_str(&format!("term: {nu} -> {re},{im}\n"));
        }
        for (js, a) in &cosines {
            let nu = Mode::from_pairs(js.iter().map(|&j| (j, 1)));
            if !seen.insert(nu.clone()) || !seen.insert(-&nu) {
                continue;
            }
            let idx: Vec<String> = js.iter().map(|j| j.to_string()).collect();
            text.push_str(&format!("cos: {} -> {a}\n", idx.join(" ")));
        }
        prop_assume!(!text.is_empty());
        let f = parse_potential(&text).unwrap();
        for (nu, c) in f.iter() {
            let mirror = f.get(&-nu).copied().unwrap_or_default();
            prop_assert_eq!(mirror, c.conj());
        }
        prop_assert_eq!(f.hermitian_defect(), 0.0);
    }

    #[test]
    fn partition_of_unity(x in 0.0f64..2.0, sign in prop::bool::ANY) {
        let scales = fix_a_scales();
        prop_assume!(x >= scales.floor());
        let x = if sign { x } else { -x };
        let hits: Vec<usize> = (0..=scales.n_max()).filter(|&n| scales.propagator(x, n) != 0.0).collect();
        prop_assert_eq!(hits.len(), 1);
        prop_assert_eq!(scales.scale_of(x), ScaleIndex::At(hits[0]));
        let total: f64 = (0..=scales.n_max()).map(|n| scales.propagator(x, n) * x * x).sum();
        prop_assert!((total - 1.0).abs() <= 1e-15, "{total}");
    }

    #[test]
    fn halving_and_minimality(factors in prop::collection::vec(0.3f64..=1.0, 1..24)) {
        let mut values = vec![1.0];
        for f in &factors {
            values.push(values.last().unwrap() * f);
        }
        let beta = BetaSequence::prescribed(values.clone()).unwrap();
        let seq = scale_sequence(&beta);
        prop_assert_eq!(seq.ms[0], 0);
        for pair in seq.ms.windows(2) {
            let (a, b) = (pair[0] as usize, pair[1] as usize);
            prop_assert!(2.0 * values[b] <= values[a]);
            for m in a + 1..b {
                prop_assert!(2.0 * values[m] > values[a]);
            }
        }
        let last = *seq.ms.last().unwrap() as usize;
        for m in last + 1..values.len() {
            prop_assert!(2.0 * values[m] > values[last]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn enumeration_is_symmetric(n in 0.5f64..7.0, fix_b in prop::bool::ANY) {
        let w = if fix_b { fixtures::fix_b_weights() } else { fixtures::fix_a_weights() };
        let modes = enumerate_modes(&w, n, true);
        let set: BTreeSet<Mode> = modes.iter().cloned().collect();
        prop_assert_eq!(set.len(), modes.len());
        for nu in &modes {
            prop_assert!(!nu.is_zero());
            prop_assert!(star_norm(nu, &w) <= n);
            prop_assert!(set.contains(&-nu));
        }
    }

    #[test]
    fn beta_is_monotone_with_witnesses(seed in 0u64..10_000) {
        let om = Frequency::new(sample_frequency(seed, 1, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let w = fixtures::fix_a_weights();
        let beta = beta_sequence(&om, &w, 5).unwrap();
        prop_assert!(beta.values().windows(2).all(|p| p[1] <= p[0]));
        for m in 1..=5u32 {
            let wit = beta.witness(m).unwrap();
            prop_assert!(star_norm(wit, &w) <= 2f64.powi(m as i32));
            prop_assert_eq!(om.dot(wit).unwrap().abs(), beta.value(m));
        }
    }

    #[test]
    fn diophantine_bounds_beta(seed in 0u64..10_000, gamma in 1e-4f64..1e-1) {
        let om = Frequency::new(sample_frequency(seed, 1, 1.0, 1.0).unwrap(), 1.0).unwrap();
        let w = fixtures::fix_a_weights();
        let p = DiophantineParams::new(gamma, 2.5, 1.5, 1.0).unwrap();
        let beta = beta_sequence(&om, &w, 4).unwrap();
        for m in 1..=4u32 {
            let n = 2f64.powi(m as i32);
            if diophantine_check(&om, &p, &w, n).unwrap().passed() {
                let lhs = enumerate_modes(&w, n, true).iter().map(|nu| diophantine_product(nu, 2.5, 1.5)).fold(1.0, f64::max);
                prop_assert!(beta.value(m) >= gamma / lhs);
            }
        }
    }

    #[test]
    fn translation_covariance(phi in prop::collection::vec(-3.2f64..3.2, 3)) {
        let f = fixtures::fix_a_potential();
        let om = fixtures::fix_a_frequency();
        let base = solve(&f, &om, fix_a_scales(), 4, None).unwrap();
        let moved = solve(&f, &om, fix_a_scales(), 4, Some(&phi)).unwrap();
        let win = om.window();
        for k in 1..=4 {
            let rotated = base.order(k).map(|nu, c| {
                let phase: f64 = nu.entries().iter().map(|&(j, v)| v as f64 * phi[win.slot(j).unwrap()]).sum();
                c.scaled(Complex64::from_polar(1.0, phase))
            });
            prop_assert!(sup_rel(&rotated, moved.order(k)) <= 1e-12);
        }
    }

    #[test]
    fn recursion_on_random_potentials(seed in 0u64..500, harmonics in 1usize..4) {
        let f = fixtures::random_potential(seed, 2, harmonics);
        let om = fixtures::five_frequency();
        let u = solve(&f, &om, five_scales(), 4, None).unwrap();
        let support: Vec<Mode> = f.modes().cloned().collect();
        let mut reach: BTreeSet<Mode> = BTreeSet::from([Mode::zero()]);
        for k in 1..=4 {
            reach = reach.iter().flat_map(|a| support.iter().map(move |b| a + b)).collect();
            let order = u.order(k);
            prop_assert!(order.hermitian_defect() <= 1e-14 * order.sup().max(1.0));
            prop_assert!(order.modes().all(|nu| reach.contains(nu)));
            let defect = kernel_check(&f, &u, k, None).unwrap();
        prop_assert!(defect <= 1e-12 * order.sup().max(1.0), "order {k}: {defect:e}, sup {:e}", order.sup());
        }
    }

    #[test]
    fn trees_match_recursion(seed in 0u64..500, harmonics in 1usize..4) {
        let f = fixtures::random_potential(seed, 2, harmonics);
        let om = fixtures::five_frequency();
        let rec: OrderedCoefficients = solve(&f, &om, five_scales(), 4, None).unwrap();
        let trees = tree_orders(4, &f, &om, five_scales(), DEFAULT_TREE_CAP).unwrap();
        for k in 1..=4 {
            prop_assert!(sup_rel(trees.order(k), rec.order(k)) <= 1e-10, "order {k}");
        }
    }

    #[test]
    fn branching_sums_to_order_minus_one(raw in prop::collection::vec(any::<prop::sample::Index>(), 0..12)) {
        // Preorder: each new node hangs off the current rightmost path.
        let mut parents = vec![0usize];
        let mut spine = vec![0usize];
        for (v, ix) in raw.iter().enumerate() {
            spine.truncate(ix.index(spine.len()) + 1);
            parents.push(*spine.last().unwrap());
            spine.push(v + 1);
        }
        let shape = Shape::from_parents(&parents).unwrap();
        let k = shape.len();
        prop_assert_eq!((0..k).map(|v| shape.branching(v)).sum::<usize>(), k - 1);
        prop_assert_eq!(Shape::from_parens(&shape.to_parens()).unwrap(), shape);
    }

    #[test]
    fn enumerated_trees_have_consistent_branching(k in 1usize..5) {
        let support: Vec<Mode> = fixtures::fix_a_potential().modes().cloned().collect();
        for t in enumerate_trees(k, None, &support, DEFAULT_TREE_CAP).unwrap() {
            let s = t.shape();
            prop_assert_eq!((0..k).map(|v| s.branching(v)).sum::<usize>(), k - 1);
        }
    }

    #[test]
    fn shape_counts_are_catalan(k in 1usize..11) {
        let all = shapes(k);
        prop_assert_eq!(all.len() as u64, catalan(k as u32 - 1));
        let distinct: BTreeSet<String> = all.iter().map(|s| s.to_parens()).collect();
        prop_assert_eq!(distinct.len(), all.len());
    }

    #[test]
    fn cluster_operator_is_linear(
        x in -0.05f64..0.05,
        z1 in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
        z2 in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let (t, f, om, w) = left_cluster();
        let scan = find_resonant_clusters(&t, &om, &w, fix_a_scales()).unwrap();
        let c = scan.clusters.iter().find(|c| c.top == 0 && c.entry == 2).unwrap();
        let op = cluster_operator(&t, c, x, &f, &om, fix_a_scales(), 0).unwrap();
        let v = |z: &[(f64, f64)]| kamtree::modes::CVec(z.iter().map(|&(r, i)| Complex64::new(r, i)).collect());
        let (v1, v2) = (v(&z1), v(&z2));
        let mut mix = v1.scaled(Complex64::new(a, 0.0));
        mix.add_assign(&v2.scaled(Complex64::new(b, 0.0)));
        let mut want = op.apply(&v1).scaled(Complex64::new(a, 0.0));
        want.add_assign(&op.apply(&v2).scaled(Complex64::new(b, 0.0)));
        let got = op.apply(&mix);
        prop_assert!(got.distance(&want) <= 1e-14 * op.norm() * 8.0);
    }

    #[test]
    fn cluster_derivative_matches_difference(x in -0.05f64..0.05) {
        let (t, f, om, w) = left_cluster();
        let scan = find_resonant_clusters(&t, &om, &w, fix_a_scales()).unwrap();
        let c = scan.clusters.iter().find(|c| c.top == 0 && c.entry == 2).unwrap();
        let h = 1e-5;
        let at = |x: f64, order: usize| cluster_operator(&t, c, x, &f, &om, fix_a_scales(), order).unwrap();
        let mut diff = at(x + h, 0);
        diff.add_assign(&at(x - h, 0).scaled(Complex64::new(-1.0, 0.0)));
        let diff: LinearKernel = diff.scaled(Complex64::new(0.5 / h, 0.0));
        let exact = at(x, 1);
        prop_assert!(diff.distance(&exact) <= 1e-6 * exact.norm());
    }

    #[test]
    fn first_order_self_energy_vanishes(x in -0.3f64..0.3, n in 0usize..6) {
        let om = fixtures::fix_a_frequency();
        let se = self_energy(1, n, x, &fixtures::fix_a_potential(), &om, fix_a_scales(), 0, DEFAULT_TREE_CAP).unwrap();
        prop_assert_eq!(se.kernel.norm(), 0.0);
    }

    #[test]
    fn displacement_is_real(phi in prop::collection::vec(-10.0f64..10.0, 3)) {
        let (re, im) = displacement_parts(fix_a_solution(), &phi).unwrap();
        let scale = re.iter().map(|x| x.abs()).fold(1.0, f64::max);
        prop_assert!(im.iter().all(|x| x.abs() <= 1e-14 * scale));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn second_threshold_is_smaller(s in 0.2f64..2.0, frac in 0.05f64..0.95, c0 in 0.1f64..10.0) {
        let w = fixtures::fix_a_weights();
        let profile = product_profile(&w, 1024.0, 2.5, 1.5, 1 << 20).unwrap();
        let cal = calibrate(&profile, 6.0, 1024.0).unwrap();
        let star = BetaStar::new(0.1, cal.k1, cal.k2, 6.0).unwrap();
        let beta = BetaSequence::analytic(star, 10);
        let p = ThresholdParams { s, s2: frac * s, c0, scaled: false };
        let t = threshold_estimates(&fixtures::fix_a_potential(), &w, &beta, p).unwrap();
        prop_assert!(t.ln_eps2 < t.ln_eps1);
        prop_assert!(t.eps2() < t.eps1());
    }
}

/// Host tree `ν₀ → −ν₀ → ν` on FIX-A extended by `±ν`, where `ν` has the
/// smallest divisor among `|ν|⋆ ≤ 8`.
fn left_cluster() -> (Tree, ScalarSeries, Frequency, WeightSequence) {
    let om = fixtures::fix_a_frequency();
    let w = fixtures::fix_a_weights();
    let nu = enumerate_modes(&w, 8.0, true)
        .into_iter()
        .min_by(|a, b| {
            om.dot(a)
                .unwrap()
                .abs()
                .total_cmp(&om.dot(b).unwrap().abs())
        })
        .unwrap();
    let mut f = fixtures::fix_a_potential();
    f.insert(nu.clone(), Complex64::new(0.5, 0.0));
    f.insert(-&nu, Complex64::new(0.5, 0.0));
    let nu0 = Mode::unit(0);
    let t = Tree::new(
        Shape::from_parents(&[0, 0, 1]).unwrap(),
        vec![nu0.clone(), -&nu0, nu],
    )
    .unwrap();
    (t, f, om, w)
}
