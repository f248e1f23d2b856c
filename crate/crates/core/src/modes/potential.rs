//! Text format for potentials.
//!
//! ```text
//! # f(θ) = cos θ₀ + cos(θ₀ + θ₁)
//! cos: 0 -> 1
//! cos: 0 1 -> 1
//! term: -1:1,1:-1 -> 0.1,0.05
//! ```
//!
//! `cos: j1 j2 … -> a` is `a·cos(θ_j1 + θ_j2 + …)`, i.e. `f_{±ν} = a/2` with
//! `ν = Σ e_ji`. `term: j:n,… -> re,im` sets `f_ν = re + i·im` and its
//! conjugate mirror.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modes::{Mode, ScalarSeries};

pub fn parse_potential(text: &str) -> Result<ScalarSeries> {
    // Keyed by the larger of ±ν; the value is the coefficient at that key.
    let mut declared: BTreeMap<Mode, Complex64> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lineno = lineno + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::Parse {
            line: lineno,
            msg: msg.to_string(),
        };
        let (kind, rest) = line
            .split_once(':')
            .ok_or_else(|| err("expected 'cos:' or 'term:'"))?;
        let (lhs, rhs) = rest
            .split_once("->")
            .or_else(|| rest.split_once('→'))
            .ok_or_else(|| err("missing '->'"))?;
        let (mode, value) = match kind.trim() {
            "cos" => {
                let mut pairs = Vec::new();
                for tok in lhs.split_whitespace() {
                    let j: i32 = tok
                        .parse()
                        .map_err(|_| err(&format!("bad index '{tok}'")))?;
                    pairs.push((j, 1));
                }
                let a: f64 = rhs.trim().parse().map_err(|_| err("bad amplitude"))?;
                let mode = Mode::from_pairs(pairs);
                let v = if mode.is_zero() { a } else { a / 2.0 };
                (mode, Complex64::new(v, 0.0))
            }
            "term" => {
                let mode: Mode = lhs.trim().parse().map_err(|e: Error| err(&e.to_string()))?;
                let (re, im) = rhs
                    .trim()
                    .split_once(',')
                    .ok_or_else(|| err("expected 're,im'"))?;
                let re: f64 = re.trim().parse().map_err(|_| err("bad real part"))?;
                let im: f64 = im.trim().parse().map_err(|_| err("bad imaginary part"))?;
                (mode, Complex64::new(re, im))
            }
            other => return Err(err(&format!("unknown term kind '{other}'"))),
        };
        if !(value.re.is_finite() && value.im.is_finite()) {
            return Err(err("non-finite coefficient"));
        }
        if mode.is_zero() && value.im != 0.0 {
            return Err(err("zero mode must have a real coefficient"));
        }
        let neg = -&mode;
        let (key, at_key) = if neg > mode {
            (neg, value.conj())
        } else {
            (mode, value)
        };
        if let Some(prev) = declared.get(&key) {
            if *prev != at_key {
                return Err(err(&format!("conflicting duplicate for mode {key}")));
            }
        }
        declared.insert(key, at_key);
    }
    let mut f = ScalarSeries::new();
    for (m, c) in declared {
        if c.re == 0.0 && c.im == 0.0 {
            continue;
        }
        if !m.is_zero() {
            f.insert(-&m, c.conj());
        }
        f.insert(m, c);
    }
    f.set_hermitian(true);
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cosine() {
        let f = parse_potential("cos: 0 -> 1").unwrap();
        assert_eq!(f.len(), 2);
        assert_eq!(f.get(&Mode::unit(0)), Some(&Complex64::new(0.5, 0.0)));
        assert_eq!(f.get(&-Mode::unit(0)), Some(&Complex64::new(0.5, 0.0)));
        assert!(f.is_hermitian_flagged());
    }

    #[test]
    fn raw_terms_get_mirrors() {
        let f = parse_potential("# c\n\nterm: -1:1,1:-1 -> 0.1,0.05\n").unwrap();
        let m = Mode::from_pairs([(-1, 1), (1, -1)]);
        assert_eq!(f.get(&m), Some(&Complex64::new(0.1, 0.05)));
        assert_eq!(f.get(&-&m), Some(&Complex64::new(0.1, -0.05)));
        assert_eq!(f.hermitian_defect(), 0.0);
    }

    #[test]
    fn empty_is_zero_potential() {
        assert!(parse_potential("").unwrap().is_empty());
        assert!(parse_potential("# nothing\n").unwrap().is_empty());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_potential("cos 0 -> 1"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_potential("cos: 0 -> x").is_err());
        assert!(parse_potential("term: 0 -> 1,0.5").is_err());
        assert!(parse_potential("cos: 0 -> 1\ncos: 0 -> 2").is_err());
        assert!(parse_potential("term: 0:1 -> 1,1\nterm: 0:-1 -> 1,1").is_err());
        // Consistent restatements are accepted.
        assert!(parse_potential("term: 0:1 -> 1,1\nterm: 0:-1 -> 1,-1").is_ok());
        assert!(parse_potential("sin: 0 -> 1").is_err());
    }

    #[test]
    fn constant_term() {
        let f = parse_potential("cos: -> 0.3").unwrap();
        assert_eq!(f.get(&Mode::zero()), Some(&Complex64::new(0.3, 0.0)));
        assert_eq!(f.len(), 1);
    }
}
