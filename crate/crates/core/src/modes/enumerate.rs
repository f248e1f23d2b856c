use std::cmp::Ordering;

use crate::modes::{Mode, WeightSequence};

/// Canonical mode order: by `|ν|⋆`, then lexicographically on `(j, ν_j)`.
pub fn canonical_cmp(a: (f64, &Mode), b: (f64, &Mode)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1))
}

/// Visits every mode with `|ν|⋆ ≤ n` as a dense vector over `[−J, J]`,
/// `J = w.index_bound(n)`, together with its ⋆-norm (accumulated in
/// increasing `j`, hence bitwise equal to [`star_norm`](crate::modes::star_norm)).
/// Returns the window half-width, or `None` when no index fits.
pub fn for_each_mode(
    w: &WeightSequence,
    n: f64,
    exclude_zero: bool,
    mut visit: impl FnMut(&[i32], f64),
) -> Option<u32> {
    let half = w.index_bound(n)?;
    let lo = -(half as i32);
    let weights: Vec<f64> = (0..=2 * half).map(|i| w.h(lo + i as i32)).collect();
    let mut dense = vec![0i32; weights.len()];
    fn dfs(
        i: usize,
        acc: f64,
        n: f64,
        weights: &[f64],
        dense: &mut [i32],
        exclude_zero: bool,
        visit: &mut dyn FnMut(&[i32], f64),
    ) {
        if i == weights.len() {
            if !(exclude_zero && dense.iter().all(|&v| v == 0)) {
                visit(dense, acc);
            }
            return;
        }
        dense[i] = 0;
        dfs(i + 1, acc, n, weights, dense, exclude_zero, visit);
        let h = weights[i];
        let mut a = 1i32;
        loop {
            let c = acc + h * a as f64;
            if !(c <= n) {
                break;
            }
            for s in [-1, 1] {
                dense[i] = s * a;
                dfs(i + 1, c, n, weights, dense, exclude_zero, visit);
            }
            a += 1;
        }
        dense[i] = 0;
    }
    dfs(0, 0.0, n, &weights, &mut dense, exclude_zero, &mut visit);
    Some(half)
}

/// All modes with `|ν|⋆ ≤ n` (optionally without `0`), in canonical order.
pub fn enumerate_modes(w: &WeightSequence, n: f64, exclude_zero: bool) -> Vec<Mode> {
    let mut out: Vec<(f64, Mode)> = Vec::new();
    if let Some(half) = w.index_bound(n.max(0.0)) {
        let lo = -(half as i32);
        for_each_mode(w, n, exclude_zero, |d, star| {
            out.push((star, Mode::from_dense(lo, d)))
        });
    } else if !exclude_zero && n >= 0.0 {
        out.push((0.0, Mode::zero()));
    }
    out.sort_by(|a, b| canonical_cmp((a.0, &a.1), (b.0, &b.1)));
    out.into_iter().map(|(_, m)| m).collect()
}
