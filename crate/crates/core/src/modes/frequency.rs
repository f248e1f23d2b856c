use crate::error::{Error, Result};
use crate::modes::Mode;

/// Symmetric index range `[−J, J]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Window {
    pub half: u32,
}

impl Window {
    pub fn new(half: u32) -> Self {
        Window { half }
    }

    pub fn lo(&self) -> i32 {
        -(self.half as i32)
    }

    pub fn hi(&self) -> i32 {
        self.half as i32
    }

    pub fn len(&self) -> usize {
        2 * self.half as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, j: i32) -> bool {
        j.unsigned_abs() <= self.half
    }

    pub fn slot(&self, j: i32) -> Option<usize> {
        self.contains(j).then(|| (j + self.half as i32) as usize)
    }

    pub fn index(&self, slot: usize) -> i32 {
        slot as i32 - self.half as i32
    }

    pub fn indices(&self) -> impl Iterator<Item = i32> {
        self.lo()..=self.hi()
    }

    pub fn covers(&self, nu: &Mode) -> bool {
        nu.support().all(|j| self.contains(j))
    }

    /// Dense integer image of `nu`; `None` if the support leaves the window.
    pub fn dense(&self, nu: &Mode) -> Option<Vec<i32>> {
        let mut d = vec![0; self.len()];
        nu.write_dense(self.lo(), &mut d).then_some(d)
    }
}

/// Frequency vector `ω` on a window, with its decay class `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Frequency {
    window: Window,
    values: Vec<f64>,
    q: f64,
}

impl Frequency {
    /// `values[i]` is `ω_j` for `j = −J + i`.
    pub fn new(values: Vec<f64>, q: f64) -> Result<Self> {
        if values.len() % 2 == 0 {
            return Err(Error::domain("frequency window must have odd length 2J+1"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("frequency entries must be finite"));
        }
        if !(q > 0.5) {
            return Err(Error::domain(format!(
                "decay class q must exceed 1/2, got {q}"
            )));
        }
        let window = Window::new((values.len() / 2) as u32);
        Ok(Frequency { window, values, q })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, j: i32) -> Option<f64> {
        self.window.slot(j).map(|i| self.values[i])
    }

    /// `ω·ν`, summed in increasing `j`.
    pub fn dot(&self, nu: &Mode) -> Result<f64> {
        let mut acc = 0.0;
        for &(j, v) in nu.entries() {
            let w = self
                .get(j)
                .ok_or_else(|| Error::domain(format!("mode {nu} leaves the frequency window")))?;
            acc += w * v as f64;
        }
        Ok(acc)
    }

    /// `ω·ν` for a dense mode on this window, same summation order as [`dot`](Self::dot).
    pub fn dot_dense(&self, dense: &[i32]) -> f64 {
        let mut acc = 0.0;
        for (w, &v) in self.values.iter().zip(dense) {
            if v != 0 {
                acc += w * v as f64;
            }
        }
        acc
    }
}
