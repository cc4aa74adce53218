//! Exact encodings of subsets and multisets of a countable universe.
//!
//! Elements are identified by their index `c(x) ∈ {0, …, U−1}`. Sets map to
//! `Σ 4^(−c(x))` (one base-4 digit per index, each 0 or 1); multisets map to
//! `Π p(c(x))`, the product of the corresponding primes, whose negative
//! logarithm is a sum of per-element terms.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational in lowest terms with a positive denominator.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numerator: BigInt, denominator: BigInt) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        Ok(Self(BigRational::new(numerator, denominator)))
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn numerator(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denominator(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> Option<f64> {
        self.0.to_f64()
    }

    /// Parses `num/den` or a bare integer.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("invalid rational `{text}`"));
        let (n, d) = match text.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (text.trim(), "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        Self::new(n, d)
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        Self(r)
    }
}

impl std::ops::Add for &ExactRational {
    type Output = ExactRational;

    fn add(self, rhs: &ExactRational) -> ExactRational {
        ExactRational(&self.0 + &rhs.0)
    }
}

/// Always prints `num/den`, including `0/1` and `1/1`.
impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

/// Universe of indices `0..max_index`, with its prime table.
#[derive(Debug, Clone)]
pub struct CountableUniverse {
    max_index: u64,
    primes: Vec<u64>,
}

impl CountableUniverse {
    pub fn new(max_index: u64) -> Result<Self> {
        if max_index == 0 {
            return Err(Error::InvalidConfig("universe needs at least one index".into()));
        }
        let primes = first_primes(
            usize::try_from(max_index)
                .map_err(|_| Error::InvalidConfig("universe too large".into()))?,
        );
        Ok(Self { max_index, primes })
    }

    pub fn max_index(&self) -> u64 {
        self.max_index
    }

    /// `p(i)`: the `(i+1)`-th prime.
    pub fn prime(&self, index: u64) -> Result<u64> {
        self.check(index)?;
        Ok(self.primes[index as usize])
    }

    fn check(&self, index: u64) -> Result<()> {
        if index >= self.max_index {
            return Err(Error::IndexOutOfUniverse {
                index,
                universe: self.max_index,
            });
        }
        Ok(())
    }

    /// `Σ_{i ∈ indices} 4^(−i)`, exactly.
    pub fn base4_encode(&self, indices: &[u64]) -> Result<ExactRational> {
        let mut seen = BTreeSet::new();
        for &i in indices {
            self.check(i)?;
            if !seen.insert(i) {
                return Err(Error::DuplicateIndex(i));
            }
        }
        Ok(ExactRational(base4_sum(seen.into_iter())))
    }

    /// Inverse of [`base4_encode`](Self::base4_encode) by base-4 digit
    /// extraction; indices come back sorted.
    pub fn base4_decode(&self, value: &ExactRational) -> Result<Vec<u64>> {
        let mut rest = value.0.clone();
        if rest.is_negative() {
            return Err(Error::NotInImage(format!("{value} is negative")));
        }
        let four = BigRational::from_integer(BigInt::from(4));
        let mut out = Vec::new();
        for i in 0..self.max_index {
            if rest.is_zero() {
                break;
            }
            let digit = rest.floor();
            if digit > BigRational::one() {
                return Err(Error::NotInImage(format!(
                    "base-4 digit {} at position {i}",
                    digit.to_integer()
                )));
            }
            if digit.is_one() {
                out.push(i);
            }
            rest = (rest - digit) * &four;
        }
        if !rest.is_zero() {
            return Err(Error::NotInImage(format!(
                "{value} needs more than {} base-4 digits",
                self.max_index
            )));
        }
        Ok(out)
    }

    /// `Π p(i)` over the multiset of indices; the additive encoding is its
    /// negative logarithm `Σ −log p(i)`.
    pub fn prime_encode(&self, indices: &[u64]) -> Result<BigUint> {
        let mut n = BigUint::one();
        for &i in indices {
            n *= self.prime(i)?;
        }
        Ok(n)
    }

    /// Factorises `n` over the universe's primes; indices come back sorted.
    pub fn prime_decode(&self, n: &BigUint) -> Result<Vec<u64>> {
        if n.is_zero() {
            return Err(Error::NotInImage("0 is not a product of primes".into()));
        }
        let mut rest = n.clone();
        let mut out = Vec::new();
        for (i, &p) in self.primes.iter().enumerate() {
            if rest.is_one() {
                break;
            }
            let p = BigUint::from(p);
            loop {
                let (q, r) = rest.div_rem(&p);
                if !r.is_zero() {
                    break;
                }
                out.push(i as u64);
                rest = q;
            }
        }
        if !rest.is_one() {
            return Err(Error::NotInImage(format!(
                "factor {rest} is not a product of the first {} primes",
                self.max_index
            )));
        }
        Ok(out)
    }

    /// The additive form `Σ −log p(i)` of the prime encoding, in floating
    /// point (for display only; injectivity lives in the integer form).
    pub fn prime_log_encoding(&self, indices: &[u64]) -> Result<f64> {
        indices
            .iter()
            .map(|&i| self.prime(i).map(|p| -(p as f64).ln()))
            .sum()
    }
}

/// `Σ 4^(−i)` over the given indices, duplicates included.
pub fn base4_sum(indices: impl IntoIterator<Item = u64>) -> BigRational {
    indices.into_iter().fold(BigRational::zero(), |acc, i| {
        acc + BigRational::new(BigInt::one(), BigInt::from(4u8).pow(i as u32))
    })
}

/// The first `count` primes by a sieve sized with the prime-counting bound.
fn first_primes(count: usize) -> Vec<u64> {
    let mut limit = 16usize;
    loop {
        let mut composite = vec![false; limit + 1];
        let mut primes = Vec::with_capacity(count);
        for n in 2..=limit {
            if composite[n] {
                continue;
            }
            primes.push(n as u64);
            if primes.len() == count {
                return primes;
            }
            let mut k = n * n;
            while k <= limit {
                composite[k] = true;
                k += n;
            }
        }
        limit *= 2;
    }
}

/// Partial sums `n·a` for `n = 1..=100`: the per-element sum of any
/// non-zero constant diverges on an infinite multiset of one repeated
/// element.
#[derive(Debug, Clone)]
pub struct DivergenceWitness {
    pub term: f64,
    pub partial_sums: Vec<f64>,
    pub unbounded: bool,
}

impl DivergenceWitness {
    /// Smallest `n` with `|n·a| > bound`.
    pub fn first_exceeding(&self, bound: f64) -> u64 {
        (bound.abs() / self.term.abs()).floor() as u64 + 1
    }

    pub fn statement(&self) -> String {
        format!(
            "partial sums n*{} grow by |{}| per term and exceed every bound B once n > |B|/{}",
            self.term,
            self.term,
            self.term.abs()
        )
    }
}

pub fn divergence_witness(a: f64) -> Result<DivergenceWitness> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::ZeroInput);
    }
    let partial_sums: Vec<f64> = (1..=100).map(|n| n as f64 * a).collect();
    // strictly growing magnitude with constant increment |a| > 0
    let unbounded = partial_sums
        .windows(2)
        .all(|w| w[1].abs() - w[0].abs() >= a.abs() * (1.0 - 1e-12));
    Ok(DivergenceWitness {
        term: a,
        partial_sums,
        unbounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> ExactRational {
        ExactRational::new(n.into(), d.into()).unwrap()
    }

    #[test]
    fn base4_examples() {
        let u = CountableUniverse::new(12).unwrap();
        assert_eq!(u.base4_encode(&[]).unwrap(), rat(0, 1));
        assert_eq!(u.base4_encode(&[0, 2]).unwrap(), rat(17, 16));
        assert_eq!(u.base4_encode(&[2, 0]).unwrap().to_string(), "17/16");
        assert_eq!(u.base4_decode(&rat(0, 1)).unwrap(), Vec::<u64>::new());
        assert_eq!(u.base4_decode(&rat(17, 16)).unwrap(), vec![0, 2]);
        assert!(matches!(u.base4_decode(&rat(1, 2)), Err(Error::NotInImage(_))));
    }

    #[test]
    fn base4_multiset_failure() {
        // four copies of index 1 land on the encoding of {0}
        assert_eq!(base4_sum([1, 1, 1, 1]), base4_sum([0]));
        let u = CountableUniverse::new(4).unwrap();
        assert!(matches!(u.base4_encode(&[1, 1]), Err(Error::DuplicateIndex(1))));
    }

    #[test]
    fn base4_errors() {
        let u = CountableUniverse::new(3).unwrap();
        assert!(matches!(
            u.base4_encode(&[3]),
            Err(Error::IndexOutOfUniverse { index: 3, universe: 3 })
        ));
        // 4^-3 needs a fourth digit
        assert!(matches!(u.base4_decode(&rat(1, 64)), Err(Error::NotInImage(_))));
        assert!(matches!(u.base4_decode(&rat(-1, 4)), Err(Error::NotInImage(_))));
        assert!(matches!(u.base4_decode(&rat(1, 3)), Err(Error::NotInImage(_))));
    }

    #[test]
    fn prime_examples() {
        let u = CountableUniverse::new(25).unwrap();
        assert_eq!(u.prime_encode(&[]).unwrap(), BigUint::one());
        assert_eq!(u.prime_encode(&[0, 0, 1]).unwrap(), BigUint::from(12u32));
        assert_eq!(u.prime_decode(&BigUint::one()).unwrap(), Vec::<u64>::new());
        assert_eq!(u.prime_decode(&BigUint::from(12u32)).unwrap(), vec![0, 0, 1]);
        let small = CountableUniverse::new(2).unwrap();
        assert!(matches!(small.prime_decode(&BigUint::from(7u32)), Err(Error::NotInImage(_))));
        assert!(matches!(u.prime_decode(&BigUint::zero()), Err(Error::NotInImage(_))));
        assert!(matches!(u.prime_encode(&[25]), Err(Error::IndexOutOfUniverse { .. })));
    }

    #[test]
    fn prime_table() {
        let u = CountableUniverse::new(1000).unwrap();
        assert_eq!(u.prime(0).unwrap(), 2);
        assert_eq!(u.prime(24).unwrap(), 97);
        assert_eq!(u.prime(999).unwrap(), 7919);
    }

    #[test]
    fn log_encoding_is_additive() {
        let u = CountableUniverse::new(5).unwrap();
        let v = u.prime_log_encoding(&[0, 0, 1]).unwrap();
        assert!((v + 12f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rational_text_form() {
        assert_eq!(ExactRational::parse("34/32").unwrap(), rat(17, 16));
        assert_eq!(ExactRational::parse("0").unwrap().to_string(), "0/1");
        assert!(ExactRational::parse("1/0").is_err());
        assert!(ExactRational::parse("x").is_err());
    }

    #[test]
    fn divergence_examples() {
        let w = divergence_witness(1.0).unwrap();
        assert_eq!(w.partial_sums.len(), 100);
        assert_eq!(w.partial_sums[0], 1.0);
        assert_eq!(w.partial_sums[99], 100.0);
        assert!(w.unbounded);
        assert_eq!(w.first_exceeding(1e6), 1_000_001);

        let w = divergence_witness(-0.5).unwrap();
        assert_eq!(w.partial_sums[0], -0.5);
        assert_eq!(w.partial_sums[99], -50.0);
        assert!(w.unbounded);

        assert!(matches!(divergence_witness(0.0), Err(Error::ZeroInput)));
    }
}
