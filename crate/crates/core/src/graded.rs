//! Exact scalars, graded bases and the Koszul sign rule.

use num::{BigInt, BigRational, One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational scalar. `BigRational` keeps every value in lowest terms with a positive denominator.
pub type Scalar = BigRational;

/// Builds the scalar `n`.
pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

/// Builds the scalar `p/q`.
pub fn frac(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// `(-1)^k` as a scalar.
pub fn sign_scalar(k: i64) -> Scalar {
    if k.rem_euclid(2) == 0 {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

/// `(-1)^k` as an integer.
pub fn parity_sign(k: i64) -> i32 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Parses an exact rational written as `"p/q"` or `"p"`. Decimal points and exponents are rejected.
pub fn parse_scalar(s: &str) -> Result<Scalar> {
    let t = s.trim();
    if t.is_empty() || t.contains(['.', 'e', 'E']) {
        return Err(Error::Input(format!("not an exact rational: {s:?}")));
    }
    let bad = || Error::Input(format!("not an exact rational: {s:?}"));
    match t.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Input(format!("zero denominator in {s:?}")));
            }
            Ok(Scalar::new(p, q))
        }
        None => Ok(Scalar::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// Renders a scalar as `"p/q"`, or `"p"` for integers.
pub fn format_scalar(x: &Scalar) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Ordered list of labelled basis vectors with ghost numbers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedBasis {
    pub labels: Vec<String>,
    pub ghosts: Vec<i32>,
}

impl GradedBasis {
    pub fn new(labels: Vec<String>, ghosts: Vec<i32>) -> Result<Self> {
        if labels.len() != ghosts.len() {
            return Err(Error::Input("labels and ghosts differ in length".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &labels {
            if !seen.insert(l) {
                return Err(Error::Input(format!("duplicate basis label {l:?}")));
            }
        }
        Ok(Self { labels, ghosts })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Sign of reordering graded symbols: the product over inverted pairs `i<j`, `perm[i]>perm[j]`
/// of `(-1)^{ghosts[i]·ghosts[j]}`.
pub fn koszul_sign(perm: &[usize], ghosts: &[i32]) -> Scalar {
    let mut parity = 0i64;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                parity += (ghosts[i] as i64) * (ghosts[j] as i64);
            }
        }
    }
    sign_scalar(parity)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "3", "-7/2", "4/6"] {
            let x = parse_scalar(s).unwrap();
            assert_eq!(parse_scalar(&format_scalar(&x)).unwrap(), x);
        }
        assert_eq!(format_scalar(&parse_scalar("4/6").unwrap()), "2/3");
    }

    #[test]
    fn floats_are_rejected() {
        assert!(parse_scalar("0.5").is_err());
        assert!(parse_scalar("1e3").is_err());
        assert!(parse_scalar("1/0").is_err());
    }

    #[test]
    fn koszul_examples() {
        assert_eq!(koszul_sign(&[0, 1, 2], &[1, 1, 1]), int(1));
        assert_eq!(koszul_sign(&[1, 0], &[1, 1]), int(-1));
        // Position 0 inverts with positions 1 (ghosts 1·1) and 2 (ghosts 1·0).
        assert_eq!(koszul_sign(&[2, 0, 1], &[1, 1, 0]), int(-1));
    }
}
