use num_complex::Complex64;

use crate::modes::CVec;

/// Dense linear map on the window, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearKernel {
    n: usize,
    data: Vec<Complex64>,
}

impl LinearKernel {
    pub fn zeros(n: usize) -> Self {
        LinearKernel {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    /// `c · a bᵀ`.
    pub fn outer(c: Complex64, a: &[Complex64], b: &[Complex64]) -> Self {
        let n = a.len();
        assert_eq!(b.len(), n, "outer product of unequal lengths");
        let mut k = LinearKernel::zeros(n);
        for (i, x) in a.iter().enumerate() {
            if *x == Complex64::new(0.0, 0.0) {
                continue;
            }
            let cx = c * x;
            for (j, y) in b.iter().enumerate() {
                k.data[i * n + j] = cx * y;
            }
        }
        k
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn apply(&self, z: &CVec) -> CVec {
        assert_eq!(z.len(), self.n);
        CVec(
            self.data
                .chunks(self.n.max(1))
                .take(self.n)
                .map(|row| row.iter().zip(&z.0).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    pub fn add_assign(&mut self, other: &LinearKernel) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        LinearKernel {
            n: self.n,
            data: self.data.iter().map(|x| x * c).collect(),
        }
    }

    /// Operator norm on `ℓ^∞`: largest absolute row sum.
    pub fn norm(&self) -> f64 {
        if self.n == 0 {
            return 0.0;
        }
        self.data
            .chunks(self.n)
            .map(|row| row.iter().map(|x| x.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn distance(&self, other: &LinearKernel) -> f64 {
        let mut d = self.clone();
        d.add_assign(&other.scaled(Complex64::new(-1.0, 0.0)));
        d.norm()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|x| x.re.is_finite() && x.im.is_finite())
    }
}
