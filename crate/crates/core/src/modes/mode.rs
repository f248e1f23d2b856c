use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use crate::error::Error;

/// Finite-support integer vector, stored as `(index, value)` pairs with
/// strictly increasing indices and no zero values.
///
/// The derived ordering is lexicographic on those pairs, which is the
/// tie-break of the canonical mode order.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mode {
    entries: Vec<(i32, i32)>,
}

impl Mode {
    pub fn zero() -> Self {
        Mode::default()
    }

    pub fn unit(j: i32) -> Self {
        Mode {
            entries: vec![(j, 1)],
        }
    }

    /// Builds a mode from arbitrary pairs; repeated indices are summed and
    /// zeros dropped.
    pub fn from_pairs<I: IntoIterator<Item = (i32, i32)>>(pairs: I) -> Self {
        let mut entries: Vec<(i32, i32)> = pairs.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(i32, i32)> = Vec::with_capacity(entries.len());
        for (j, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => out.push((j, v)),
            }
        }
        out.retain(|e| e.1 != 0);
        Mode { entries: out }
    }

    /// Builds a mode from a dense vector whose slot `i` holds index `lo + i`.
    pub fn from_dense(lo: i32, dense: &[i32]) -> Self {
        let entries = dense
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(i, &v)| (lo + i as i32, v))
            .collect();
        Mode { entries }
    }

    pub fn entries(&self) -> &[(i32, i32)] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, j: i32) -> i32 {
        match self.entries.binary_search_by_key(&j, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => 0,
        }
    }

    pub fn support(&self) -> impl Iterator<Item = i32> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub fn min_index(&self) -> Option<i32> {
        self.entries.first().map(|e| e.0)
    }

    pub fn max_index(&self) -> Option<i32> {
        self.entries.last().map(|e| e.0)
    }

    pub fn l1(&self) -> u64 {
        self.entries.iter().map(|e| e.1.unsigned_abs() as u64).sum()
    }

    pub fn sup(&self) -> u64 {
        self.entries
            .iter()
            .map(|e| e.1.unsigned_abs() as u64)
            .max()
            .unwrap_or(0)
    }

    /// Integer inner product `Σ ν_j μ_j`.
    pub fn dot(&self, other: &Mode) -> i64 {
        let (mut a, mut b) = (
            self.entries.iter().peekable(),
            other.entries.iter().peekable(),
        );
        let mut acc = 0i64;
        while let (Some(x), Some(y)) = (a.peek(), b.peek()) {
            match x.0.cmp(&y.0) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    acc += x.1 as i64 * y.1 as i64;
                    a.next();
                    b.next();
                }
            }
        }
        acc
    }

    pub fn scaled(&self, c: i32) -> Mode {
        if c == 0 {
            return Mode::zero();
        }
        Mode {
            entries: self.entries.iter().map(|&(j, v)| (j, v * c)).collect(),
        }
    }

    /// Writes the mode into a dense slice whose slot `i` holds index `lo + i`.
    /// Returns false if the support does not fit.
    pub fn write_dense(&self, lo: i32, dense: &mut [i32]) -> bool {
        dense.iter_mut().for_each(|x| *x = 0);
        for &(j, v) in &self.entries {
            let i = j - lo;
            if i < 0 || i as usize >= dense.len() {
                return false;
            }
            dense[i as usize] = v;
        }
        true
    }
}

impl Neg for &Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        Mode {
            entries: self.entries.iter().map(|&(j, v)| (j, -v)).collect(),
        }
    }
}

impl Neg for Mode {
    type Output = Mode;
    fn neg(self) -> Mode {
        -&self
    }
}

impl Add for &Mode {
    type Output = Mode;
    fn add(self, rhs: &Mode) -> Mode {
        let mut out = Vec::with_capacity(self.entries.len() + rhs.entries.len());
        let (mut i, mut k) = (0, 0);
        let (a, b) = (&self.entries, &rhs.entries);
        while i < a.len() || k < b.len() {
            if k == b.len() || (i < a.len() && a[i].0 < b[k].0) {
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[k].0 < a[i].0 {
                out.push(b[k]);
                k += 1;
            } else {
                let v = a[i].1 + b[k].1;
                if v != 0 {
                    out.push((a[i].0, v));
                }
                i += 1;
                k += 1;
            }
        }
        Mode { entries: out }
    }
}

impl Add for Mode {
    type Output = Mode;
    fn add(self, rhs: Mode) -> Mode {
        &self + &rhs
    }
}

impl Sub for &Mode {
    type Output = Mode;
    fn sub(self, rhs: &Mode) -> Mode {
        self + &(-rhs)
    }
}

impl Sub for Mode {
    type Output = Mode;
    fn sub(self, rhs: Mode) -> Mode {
        &self - &rhs
    }
}

/// `j:v` pairs joined by `;`, or `0` for the zero mode.
impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        for (i, (j, v)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{j}:{v}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mode({self})")
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(Mode::zero());
        }
        let mut pairs = Vec::new();
        for part in s.split([';', ',']) {
            let (j, v) = part
                .split_once(':')
                .ok_or_else(|| Error::domain(format!("bad mode entry '{part}'")))?;
            let j: i32 = j
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("bad index '{j}'")))?;
            let v: i32 = v
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("bad value '{v}'")))?;
            pairs.push((j, v));
        }
        Ok(Mode::from_pairs(pairs))
    }
}
