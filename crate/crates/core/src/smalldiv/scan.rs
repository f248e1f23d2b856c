//! Enumeration of `|ν|⋆ ≤ n` with one coordinate solved in closed form.
//!
//! Every other coordinate is enumerated; for each such partial mode the
//! admissible range `|ν_c| ≤ K` of the pivot coordinate `c` is returned and
//! the caller picks the pivot values it needs. Norms and dot products of the
//! final candidates are re-evaluated in increasing `j`, so they agree
//! bitwise with [`star_norm`](crate::modes::star_norm) and
//! [`Frequency::dot`](crate::modes::Frequency::dot).

use crate::modes::WeightSequence;

pub(crate) struct Lattice {
    pub half: u32,
    pub weights: Vec<f64>,
    pub pivot: usize,
}

impl Lattice {
    pub fn new(w: &WeightSequence, n: f64) -> Option<Lattice> {
        let half = w.index_bound(n)?;
        let lo = -(half as i32);
        let weights: Vec<f64> = (0..=2 * half).map(|i| w.h(lo + i as i32)).collect();
        let mut pivot = 0;
        for (i, &h) in weights.iter().enumerate() {
            if h < weights[pivot] {
                pivot = i;
            }
        }
        Some(Lattice {
            half,
            weights,
            pivot,
        })
    }

    pub fn lo(&self) -> i32 {
        -(self.half as i32)
    }

    /// `|ν|⋆` of a dense mode, summed in increasing `j`.
    pub fn star(&self, dense: &[i32]) -> f64 {
        let mut acc = 0.0;
        for (h, &v) in self.weights.iter().zip(dense) {
            if v != 0 {
                acc += h * v.unsigned_abs() as f64;
            }
        }
        acc
    }

    /// Calls `visit(dense, k)` for every assignment of the non-pivot
    /// coordinates with ⋆-norm `≤ n`; `dense[pivot]` is 0 on entry and `k` is
    /// the largest `|ν_c|` keeping the full mode within `n`. The visitor may
    /// modify `dense[pivot]`; it is reset afterwards.
    pub fn scan(&self, n: f64, visit: &mut dyn FnMut(&mut [i32], i64)) {
        let mut dense = vec![0i32; self.weights.len()];
        self.dfs(0, 0.0, n, &mut dense, visit);
    }

    fn dfs(
        &self,
        i: usize,
        acc: f64,
        n: f64,
        dense: &mut [i32],
        visit: &mut dyn FnMut(&mut [i32], i64),
    ) {
        if i == self.weights.len() {
            let k = self.pivot_range(n, dense);
            visit(dense, k);
            dense[self.pivot] = 0;
            return;
        }
        if i == self.pivot {
            self.dfs(i + 1, acc, n, dense, visit);
            return;
        }
        dense[i] = 0;
        self.dfs(i + 1, acc, n, dense, visit);
        let h = self.weights[i];
        let mut a = 1i32;
        loop {
            let c = acc + h * a as f64;
            if !(c <= n) {
                break;
            }
            for s in [-1, 1] {
                dense[i] = s * a;
                self.dfs(i + 1, c, n, dense, visit);
            }
            a += 1;
        }
        dense[i] = 0;
    }

    fn pivot_range(&self, n: f64, dense: &mut [i32]) -> i64 {
        let h = self.weights[self.pivot];
        let base = self.star(dense);
        if !(base <= n) || !h.is_finite() {
            return 0;
        }
        let mut k = ((n - base) / h).floor().max(0.0) as i64;
        let fits = |k: i64, dense: &mut [i32]| {
            dense[self.pivot] = k as i32;
            let ok = self.star(dense) <= n;
            dense[self.pivot] = 0;
            ok
        };
        while k > 0 && !fits(k, dense) {
            k -= 1;
        }
        while fits(k + 1, dense) {
            k += 1;
        }
        k
    }
}
