//! Value types shared by every codec and by the experiment harness.
//!
//! A [`Multiset`] is always stored in canonical (ascending) order, so any
//! function that only looks at the stored elements is permutation-invariant
//! by construction.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A compact interval `[lo, hi]` of admissible element values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainInterval {
    lo: f64,
    hi: f64,
}

impl DomainInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidDomain { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    /// The unit interval `[0, 1]`.
    pub fn unit() -> Self {
        Self { lo: 0.0, hi: 1.0 }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Smallest interval containing both `self` and the point `x`.
    pub fn extended_to(&self, x: f64) -> Self {
        Self {
            lo: self.lo.min(x),
            hi: self.hi.max(x),
        }
    }
}

impl Default for DomainInterval {
    fn default() -> Self {
        Self::unit()
    }
}

/// An unordered finite collection of reals drawn from a [`DomainInterval`].
#[derive(Debug, Clone)]
pub struct Multiset {
    elements: Vec<f64>,
    domain: DomainInterval,
}

impl Multiset {
    /// Validates and sorts `elements`.
    pub fn canonicalize(mut elements: Vec<f64>, domain: DomainInterval) -> Result<Self> {
        for &x in &elements {
            if !x.is_finite() {
                return Err(Error::NonFiniteElement(x));
            }
            if !domain.contains(x) {
                return Err(Error::DomainViolation {
                    value: x,
                    lo: domain.lo,
                    hi: domain.hi,
                });
            }
        }
        elements.sort_by(f64::total_cmp);
        // -0.0 and 0.0 compare equal; store one representation so that
        // bit-level hashing and summation see identical inputs.
        for x in &mut elements {
            if *x == 0.0 {
                *x = 0.0;
            }
        }
        Ok(Self { elements, domain })
    }

    pub fn empty(domain: DomainInterval) -> Self {
        Self {
            elements: Vec::new(),
            domain,
        }
    }

    /// Sorted elements.
    pub fn elements(&self) -> &[f64] {
        &self.elements
    }

    pub fn domain(&self) -> DomainInterval {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Multiset union (`X ⊎ Y`), kept in canonical order.
    pub fn union(&self, other: &Multiset) -> Result<Multiset> {
        let mut all = self.elements.clone();
        all.extend_from_slice(&other.elements);
        Multiset::canonicalize(all, self.domain)
    }

    pub fn into_elements(self) -> Vec<f64> {
        self.elements
    }

    /// Re-labels the domain without touching the elements.
    pub fn with_domain(self, domain: DomainInterval) -> Result<Multiset> {
        Multiset::canonicalize(self.elements, domain)
    }

    /// Parses the text form `{0.2,0.7,0.7}`. Braces are optional.
    pub fn parse(text: &str, domain: DomainInterval) -> Result<Self> {
        let values = parse_reals(strip_braces(text))?;
        Multiset::canonicalize(values, domain)
    }
}

/// Elementwise comparison of the sorted element lists.
pub fn multiset_equal(a: &Multiset, b: &Multiset, tol: f64) -> bool {
    a.len() == b.len()
        && a.elements
            .iter()
            .zip(&b.elements)
            .all(|(x, y)| (x - y).abs() <= tol)
}

/// Largest elementwise gap between two equally sized multisets, `None` on a
/// size mismatch.
pub fn max_elementwise_error(a: &Multiset, b: &Multiset) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    Some(
        a.elements
            .iter()
            .zip(&b.elements)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max),
    )
}

impl PartialEq for Multiset {
    fn eq(&self, other: &Self) -> bool {
        multiset_equal(self, other, 0.0)
    }
}

impl fmt::Display for Multiset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", join_reals(&self.elements))
    }
}

/// A point of the latent space `Z = R^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentVector {
    values: Vec<f64>,
}

impl LatentVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ShapeMismatch(
                "latent vectors need dimension >= 1".into(),
            ));
        }
        if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFiniteElement(bad));
        }
        Ok(Self { values })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            values: vec![0.0; dim.max(1)],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Max-norm distance; `None` if the dimensions differ.
    pub fn max_distance(&self, other: &LatentVector) -> Option<f64> {
        (self.dim() == other.dim()).then(|| {
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        LatentVector::new(parse_reals(strip_braces(text))?)
    }
}

impl std::ops::Add for &LatentVector {
    type Output = LatentVector;

    fn add(self, rhs: &LatentVector) -> LatentVector {
        assert_eq!(self.dim(), rhs.dim(), "latent dimensions differ");
        LatentVector {
            values: self
                .values
                .iter()
                .zip(&rhs.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl fmt::Display for LatentVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&join_reals(&self.values))
    }
}

/// Seed of a deterministic, splittable random stream.
///
/// Streams are ChaCha8 keyed by the seed; [`Seed::stream`] selects one of
/// 2^64 independent counter-based substreams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }

    /// Independent substream `index` of this seed.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = self.rng();
        rng.set_stream(index);
        rng
    }

    /// A new seed derived from this one and `tag` (splitmix64 finalizer).
    pub fn derive(self, tag: u64) -> Seed {
        let mut z = self
            .0
            .wrapping_add(tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        Seed(z ^ (z >> 31))
    }
}

impl FromStr for Seed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .parse()
            .map(Seed)
            .map_err(|_| Error::Parse(format!("invalid seed `{s}`")))
    }
}

/// Formats a real with 12 significant digits, using the shortest text that
/// round-trips the rounded value (`1.0`, `0.625`, `-3.5e-7`).
pub fn format_real(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().unwrap_or(x);
    format!("{rounded:?}")
}

pub fn join_reals(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| format_real(v))
        .collect::<Vec<_>>()
        .join(",")
}

fn strip_braces(text: &str) -> &str {
    let t = text.trim();
    let t = t.strip_prefix('{').unwrap_or(t);
    let t = t.strip_suffix('}').unwrap_or(t);
    t.trim()
}

/// Parses comma-separated decimals; an empty string is an empty list.
pub fn parse_reals(text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid number `{}`", tok.trim())))
        })
        .collect()
}
