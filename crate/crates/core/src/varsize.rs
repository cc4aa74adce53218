//! Sum-decomposition of sets of any size up to `M`.
//!
//! Each element contributes `φ̂_q(x) = x^q − k^q` for a sentinel `k` outside
//! the domain. The sum over a size-`m` set equals the power sums of the set
//! padded with `M − m` copies of `k`, minus the constant `M·k^q`, so the
//! empty set maps to the origin and the padded set is recoverable.

use crate::error::{Error, Result};
use crate::lab::ElementMap;
use crate::multiset::{DomainInterval, LatentVector, Multiset};
use crate::power_sum::{affine_power_sums, power_to_elementary, PowerSumCodec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarSizeCodec {
    max_size: usize,
    domain: DomainInterval,
    sentinel: f64,
    inner: PowerSumCodec,
}

impl VarSizeCodec {
    /// Sentinel defaults to `domain.lo − 1`.
    pub fn new(max_size: usize, domain: DomainInterval) -> Result<Self> {
        Self::with_sentinel(max_size, domain, domain.lo() - 1.0)
    }

    pub fn with_sentinel(max_size: usize, domain: DomainInterval, sentinel: f64) -> Result<Self> {
        if !sentinel.is_finite() || domain.contains(sentinel) {
            return Err(Error::InvalidConfig(format!(
                "sentinel {sentinel} must be finite and outside [{}, {}]",
                domain.lo(),
                domain.hi()
            )));
        }
        Ok(Self {
            max_size,
            domain,
            sentinel,
            inner: PowerSumCodec::new(max_size, domain)?,
        })
    }

    /// Replaces the inner fixed-size codec's tolerances and frame; its
    /// set size and domain are kept.
    pub fn with_inner(mut self, inner: PowerSumCodec) -> Result<Self> {
        if inner.domain() != self.domain {
            return Err(Error::InvalidConfig("inner codec domain differs".into()));
        }
        self.inner = inner.with_set_size(self.max_size)?;
        Ok(self)
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    pub fn sentinel(&self) -> f64 {
        self.sentinel
    }

    pub fn domain(&self) -> DomainInterval {
        self.domain
    }

    pub fn inner(&self) -> &PowerSumCodec {
        &self.inner
    }

    /// `φ̂(x) = (x^q − k^q)_{q=1..M}`.
    pub fn element_terms(&self, x: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.max_size);
        let (mut px, mut pk) = (1.0, 1.0);
        for _ in 0..self.max_size {
            px *= x;
            pk *= self.sentinel;
            out.push(px - pk);
        }
        out
    }

    pub fn element_map(&self) -> ElementMap {
        let codec = *self;
        ElementMap::new(self.max_size, self.domain, move |x| codec.element_terms(x))
    }

    pub fn encode_var(&self, set: &Multiset) -> Result<LatentVector> {
        if set.len() > self.max_size {
            return Err(Error::SizeMismatch {
                expected: self.max_size,
                actual: set.len(),
            });
        }
        let mut z = vec![0.0; self.max_size];
        for &x in set.elements() {
            if !self.domain.contains(x) {
                return Err(Error::DomainViolation {
                    value: x,
                    lo: self.domain.lo(),
                    hi: self.domain.hi(),
                });
            }
            for (acc, t) in z.iter_mut().zip(self.element_terms(x)) {
                *acc += t;
            }
        }
        LatentVector::new(z)
    }

    /// Recovers the set behind `z`.
    ///
    /// The padded power sums `z_q + M·k^q` are re-expressed about `k`; in
    /// those coordinates every sentinel is a root at zero, so the elementary
    /// symmetric polynomials vanish beyond the true size `m` and are bounded
    /// away from zero up to it. The `m` elements are then decoded from their
    /// own power sums `z_q + m·k^q`, `q ≤ m`.
    pub fn decode_var(&self, z: &LatentVector) -> Result<Multiset> {
        let big_m = self.max_size;
        if z.dim() != big_m {
            return Err(Error::SizeMismatch {
                expected: big_m,
                actual: z.dim(),
            });
        }
        let k = self.sentinel;
        let padded: Vec<f64> = z
            .values()
            .iter()
            .enumerate()
            .map(|(i, &zq)| zq + big_m as f64 * k.powi(i as i32 + 1))
            .collect();

        // y = (x − k)/span ∈ [gap, 1] up to sign, sentinels at y = 0
        let span = (self.domain.hi() - k).abs().max((self.domain.lo() - k).abs());
        let gap = (self.domain.lo() - k).abs().min((self.domain.hi() - k).abs()) / span;
        let shifted = affine_power_sums(&padded, big_m as f64, 1.0 / span, -k / span);
        let e = power_to_elementary(&shifted);

        let strip_tol = 10.0 * self.inner.root_tol();
        let m = e
            .iter()
            .rposition(|v| v.abs() > 0.5 * gap.powi(e.len() as i32))
            .map_or(0, |i| i + 1);
        for (j, v) in e.iter().enumerate() {
            let floor = 0.5 * gap.powi(j as i32 + 1);
            if j < m && v.abs() < floor {
                return Err(Error::MalformedLatent(format!(
                    "elementary polynomial e_{} = {v:e} is neither a set element signature nor sentinel padding",
                    j + 1
                )));
            }
            if j >= m && v.abs() > strip_tol {
                return Err(Error::MalformedLatent(format!(
                    "e_{} = {v:e} should vanish for a set of size {m}",
                    j + 1
                )));
            }
        }
        if m == 0 {
            return Ok(Multiset::empty(self.domain));
        }

        let raw: Vec<f64> = z.values()[..m]
            .iter()
            .enumerate()
            .map(|(i, &zq)| zq + m as f64 * k.powi(i as i32 + 1))
            .collect();
        self.inner
            .with_set_size(m)?
            .decode_raw_power_sums(&raw)
            .map_err(|e| match e {
                Error::OutOfImage(msg) => Error::MalformedLatent(msg),
                other => other,
            })
    }

    /// `ρ = f ∘ decode_var`. `f` sees only real elements, never sentinels.
    pub fn build_rho_var<F>(&self, f: F) -> impl Fn(&LatentVector) -> Result<f64>
    where
        F: Fn(&Multiset) -> f64,
    {
        let codec = *self;
        move |z| codec.decode_var(z).map(|set| f(&set))
    }

    /// Raw power sums `(Σ x^q)_{q=1..M}` of `set` padded to size `M` with
    /// the sentinel; the fixed-size encoding the variable one shifts.
    pub fn padded_power_sums(&self, set: &Multiset) -> Result<Vec<f64>> {
        if set.len() > self.max_size {
            return Err(Error::SizeMismatch {
                expected: self.max_size,
                actual: set.len(),
            });
        }
        let pad = self.max_size - set.len();
        let mut sums = vec![0.0; self.max_size];
        let values = set
            .elements()
            .iter()
            .copied()
            .chain(std::iter::repeat(self.sentinel).take(pad));
        for x in values {
            let mut pw = 1.0;
            for s in sums.iter_mut() {
                pw *= x;
                *s += pw;
            }
        }
        Ok(sums)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiset::{max_elementwise_error, multiset_equal, Seed};
    use rand::Rng;

    fn codec(m: usize) -> VarSizeCodec {
        VarSizeCodec::new(m, DomainInterval::unit()).unwrap()
    }

    fn set(xs: &[f64]) -> Multiset {
        Multiset::canonicalize(xs.to_vec(), DomainInterval::unit()).unwrap()
    }

    #[test]
    fn default_sentinel() {
        assert_eq!(codec(3).sentinel(), -1.0);
        assert!(VarSizeCodec::with_sentinel(3, DomainInterval::unit(), 0.5).is_err());
        assert!(VarSizeCodec::with_sentinel(3, DomainInterval::unit(), 2.0).is_ok());
    }

    #[test]
    fn encode_examples() {
        assert_eq!(codec(3).encode_var(&set(&[])).unwrap().values(), &[0.0, 0.0, 0.0]);
        assert_eq!(
            codec(3).encode_var(&set(&[0.5])).unwrap().values(),
            &[1.5, -0.75, 1.125]
        );
        // identical to the padded power sums minus M·k^q
        let padded = codec(3).padded_power_sums(&set(&[0.5])).unwrap();
        let shifted: Vec<f64> = padded
            .iter()
            .enumerate()
            .map(|(i, p)| p - 3.0 * (-1f64).powi(i as i32 + 1))
            .collect();
        assert_eq!(shifted, vec![1.5, -0.75, 1.125]);
        assert!(matches!(
            codec(1).encode_var(&set(&[0.1, 0.2])),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn decode_examples() {
        let z = LatentVector::new(vec![0.0; 3]).unwrap();
        assert!(codec(3).decode_var(&z).unwrap().is_empty());
        let z = LatentVector::new(vec![1.5, -0.75, 1.125]).unwrap();
        let x = codec(3).decode_var(&z).unwrap();
        assert!(multiset_equal(&x, &set(&[0.5]), 1e-12), "{x}");
    }

    #[test]
    fn decode_duplicates_and_boundaries() {
        let c = codec(5);
        for xs in [vec![0.0, 0.0], vec![1.0, 1.0, 1.0], vec![0.0, 0.5, 1.0, 1.0]] {
            let x = set(&xs);
            let back = c.decode_var(&c.encode_var(&x).unwrap()).unwrap();
            assert!(multiset_equal(&back, &x, 1e-5), "{x} -> {back}");
        }
    }

    #[test]
    fn sentinel_above_domain() {
        let c = VarSizeCodec::with_sentinel(4, DomainInterval::unit(), 2.5).unwrap();
        let x = set(&[0.2, 0.9]);
        let back = c.decode_var(&c.encode_var(&x).unwrap()).unwrap();
        assert!(multiset_equal(&back, &x, 1e-9));
    }

    #[test]
    fn malformed_latents() {
        let c = codec(3);
        // a size-1 encoding with its last coordinate disturbed
        let z = LatentVector::new(vec![1.5, -0.75, 1.2]).unwrap();
        assert!(matches!(c.decode_var(&z), Err(Error::MalformedLatent(_))), "{:?}", c.decode_var(&z));
        let z = LatentVector::new(vec![40.0, 3.0, -7.0]).unwrap();
        assert!(c.decode_var(&z).is_err());
        assert!(matches!(
            c.decode_var(&LatentVector::new(vec![0.0; 2]).unwrap()),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn rho_examples() {
        let c = codec(5);
        let size = c.build_rho_var(|s| s.len() as f64);
        assert_eq!(size(&c.encode_var(&set(&[0.3, 0.4])).unwrap()).unwrap(), 2.0);

        let lo = c.domain().lo();
        let max = c.build_rho_var(move |s| s.elements().iter().cloned().fold(lo, f64::max));
        assert_eq!(max(&c.encode_var(&set(&[])).unwrap()).unwrap(), 0.0);

        let c = codec(4);
        let mean = c.build_rho_var(|s| s.elements().iter().sum::<f64>() / s.len() as f64);
        let v = mean(&c.encode_var(&set(&[0.2, 0.4, 0.6])).unwrap()).unwrap();
        assert!((v - 0.4).abs() < 1e-9);
    }

    #[test]
    fn additivity_and_size_recovery() {
        let c = codec(8);
        let mut rng = Seed(21).rng();
        for m in 0..=8 {
            for _ in 0..50 {
                let x = set(&(0..m).map(|_| rng.gen::<f64>()).collect::<Vec<_>>());
                let back = c.decode_var(&c.encode_var(&x).unwrap()).unwrap();
                assert_eq!(back.len(), m);
                assert!(max_elementwise_error(&back, &x).unwrap() < 1e-6);

                let split = m / 2;
                let (a, b) = x.elements().split_at(split);
                let za = c.encode_var(&set(a)).unwrap();
                let zb = c.encode_var(&set(b)).unwrap();
                let zx = c.encode_var(&x).unwrap();
                assert!((&za + &zb).max_distance(&zx).unwrap() <= 1e-12);
            }
        }
    }

    #[test]
    fn element_map_matches_encode() {
        let c = codec(4);
        let x = set(&[0.1, 0.7, 0.3]);
        assert_eq!(c.element_map().sum_over(&x), c.encode_var(&x).unwrap());
    }
}
