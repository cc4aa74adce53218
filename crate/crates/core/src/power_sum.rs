//! Fixed-size sum-decomposition through the first `M` power sums.
//!
//! `encode` maps a size-`M` multiset to `(Σ u, Σ u², …, Σ u^M)` where `u` is
//! the element affinely mapped into the codec's [`Frame`]. Decoding runs
//! Newton's identities to the elementary symmetric polynomials and recovers
//! the elements as the real roots of `Π (t − u_m)`.

use crate::error::{Error, Result};
use crate::lab::ElementMap;
use crate::multiset::{DomainInterval, LatentVector, Multiset};
use crate::roots::{real_roots, MonicPoly};

pub const DEFAULT_ROOT_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_ROOT_ITERS: usize = 200;

/// Decoded elements may leave the domain by this much (relative to its
/// width) before the latent is rejected as outside the image.
pub const IMAGE_TOL: f64 = 1e-6;

/// Coordinates in which power sums are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Frame {
    /// Domain mapped onto `[0, 1]`; on a `[0, 1]` domain the codec is the
    /// literal map `x ↦ (x, x², …, x^M)`.
    Unit,
    /// Domain mapped onto `[-1, 1]`. About two orders of magnitude better
    /// conditioned for `M = 8`.
    #[default]
    Centered,
}

impl Frame {
    pub fn interval(self) -> DomainInterval {
        match self {
            Frame::Unit => DomainInterval::unit(),
            Frame::Centered => DomainInterval::new(-1.0, 1.0).expect("static interval"),
        }
    }
}

impl std::str::FromStr for Frame {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unit" => Ok(Frame::Unit),
            "centered" | "centred" => Ok(Frame::Centered),
            other => Err(Error::Parse(format!("unknown frame `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSumCodec {
    set_size: usize,
    domain: DomainInterval,
    root_tol: f64,
    max_root_iters: usize,
    frame: Frame,
}

impl PowerSumCodec {
    pub fn new(set_size: usize, domain: DomainInterval) -> Result<Self> {
        if set_size == 0 {
            return Err(Error::InvalidConfig("set_size must be >= 1".into()));
        }
        Ok(Self {
            set_size,
            domain,
            root_tol: DEFAULT_ROOT_TOL,
            max_root_iters: DEFAULT_MAX_ROOT_ITERS,
            frame: Frame::default(),
        })
    }

    pub fn with_root_tol(mut self, root_tol: f64) -> Result<Self> {
        if !(root_tol > 0.0 && root_tol.is_finite()) {
            return Err(Error::InvalidConfig("root_tol must be positive".into()));
        }
        self.root_tol = root_tol;
        Ok(self)
    }

    pub fn with_max_root_iters(mut self, iters: usize) -> Result<Self> {
        if iters == 0 {
            return Err(Error::InvalidConfig("max_root_iters must be >= 1".into()));
        }
        self.max_root_iters = iters;
        Ok(self)
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    /// Same configuration for a different set size.
    pub fn with_set_size(mut self, set_size: usize) -> Result<Self> {
        if set_size == 0 {
            return Err(Error::InvalidConfig("set_size must be >= 1".into()));
        }
        self.set_size = set_size;
        Ok(self)
    }

    pub fn set_size(&self) -> usize {
        self.set_size
    }

    pub fn domain(&self) -> DomainInterval {
        self.domain
    }

    pub fn root_tol(&self) -> f64 {
        self.root_tol
    }

    pub fn max_root_iters(&self) -> usize {
        self.max_root_iters
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    /// `u = scale·x + shift` maps the domain onto the frame interval.
    fn affine(&self) -> (f64, f64) {
        let (lo, hi, w) = (self.domain.lo(), self.domain.hi(), self.domain.width());
        match self.frame {
            Frame::Unit => (1.0 / w, -lo / w),
            Frame::Centered => (2.0 / w, -(lo + hi) / w),
        }
    }

    fn to_frame(&self, x: f64) -> f64 {
        match self.frame {
            Frame::Unit => (x - self.domain.lo()) / self.domain.width(),
            Frame::Centered => (2.0 * x - (self.domain.lo() + self.domain.hi())) / self.domain.width(),
        }
    }

    fn from_frame(&self, u: f64) -> f64 {
        match self.frame {
            Frame::Unit => self.domain.lo() + u * self.domain.width(),
            Frame::Centered => (u * self.domain.width() + self.domain.lo() + self.domain.hi()) / 2.0,
        }
    }

    /// The per-element map `φ(x) = (u, u², …, u^M)`.
    pub fn element_powers(&self, x: f64) -> Vec<f64> {
        let u = self.to_frame(x);
        let mut out = Vec::with_capacity(self.set_size);
        let mut pw = 1.0;
        for _ in 0..self.set_size {
            pw *= u;
            out.push(pw);
        }
        out
    }

    /// `φ` as an opaque [`ElementMap`], so that `Σ φ(x)` over a canonical
    /// multiset reproduces [`encode`](Self::encode) bit for bit.
    pub fn element_map(&self) -> ElementMap {
        let codec = *self;
        ElementMap::new(self.set_size, self.domain, move |x| codec.element_powers(x))
    }

    pub fn encode(&self, set: &Multiset) -> Result<LatentVector> {
        if set.len() != self.set_size {
            return Err(Error::SizeMismatch {
                expected: self.set_size,
                actual: set.len(),
            });
        }
        let mut sums = vec![0.0; self.set_size];
        for &x in set.elements() {
            if !self.domain.contains(x) {
                return Err(Error::DomainViolation {
                    value: x,
                    lo: self.domain.lo(),
                    hi: self.domain.hi(),
                });
            }
            for (s, p) in sums.iter_mut().zip(self.element_powers(x)) {
                *s += p;
            }
        }
        LatentVector::new(sums)
    }

    pub fn decode(&self, z: &LatentVector) -> Result<Multiset> {
        if z.dim() != self.set_size {
            return Err(Error::SizeMismatch {
                expected: self.set_size,
                actual: z.dim(),
            });
        }
        let e = power_to_elementary(z.values());
        let frame = self.frame.interval();
        let roots = roots_in_frame(&e, frame, self.root_tol, self.max_root_iters)?;
        let tol = IMAGE_TOL * self.domain.width();
        let mut out = Vec::with_capacity(roots.len());
        for u in roots {
            let x = self.from_frame(u);
            let clamped = x.clamp(self.domain.lo(), self.domain.hi());
            if (x - clamped).abs() > tol {
                return Err(Error::OutOfImage(format!(
                    "recovered element {x} outside [{}, {}]",
                    self.domain.lo(),
                    self.domain.hi()
                )));
            }
            out.push(clamped);
        }
        Multiset::canonicalize(out, self.domain)
    }

    /// Decodes raw power sums `p_q = Σ x_m^q` (domain coordinates, no frame
    /// mapping) of a size-`M` multiset.
    pub fn decode_raw_power_sums(&self, raw: &[f64]) -> Result<Multiset> {
        if raw.len() != self.set_size {
            return Err(Error::SizeMismatch {
                expected: self.set_size,
                actual: raw.len(),
            });
        }
        let (scale, shift) = self.affine();
        let framed = affine_power_sums(raw, self.set_size as f64, scale, shift);
        self.decode(&LatentVector::new(framed)?)
    }

    /// `ρ = f ∘ decode`: the outer function of the sum-decomposition of `f`.
    pub fn build_rho<F>(&self, f: F) -> impl Fn(&LatentVector) -> Result<f64>
    where
        F: Fn(&Multiset) -> f64,
    {
        let codec = *self;
        move |z| codec.decode(z).map(|set| f(&set))
    }
}

/// Power sums of `scale·x + shift` from the power sums of `x`
/// (binomial expansion; `count` is the zeroth power sum).
pub(crate) fn affine_power_sums(raw: &[f64], count: f64, scale: f64, shift: f64) -> Vec<f64> {
    let m = raw.len();
    let p = |j: usize| if j == 0 { count } else { raw[j - 1] };
    let mut out = Vec::with_capacity(m);
    let mut binom = vec![1.0f64];
    for q in 1..=m {
        let mut next = vec![1.0; q + 1];
        for j in 1..q {
            next[j] = binom[j - 1] + binom[j];
        }
        binom = next;
        let total: f64 = (0..=q)
            .map(|j| binom[j] * scale.powi(j as i32) * shift.powi((q - j) as i32) * p(j))
            .sum();
        out.push(total);
    }
    out
}

/// Newton's identities: `k·e_k = Σ_{i=1..k} (−1)^(i−1) e_(k−i) p_i`, `e_0 = 1`.
pub fn power_to_elementary(p: &[f64]) -> Vec<f64> {
    let mut e = Vec::with_capacity(p.len() + 1);
    e.push(1.0);
    for k in 1..=p.len() {
        let mut acc = 0.0;
        for i in 1..=k {
            let term = e[k - i] * p[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / k as f64);
    }
    e.remove(0);
    e
}

fn roots_in_frame(
    e: &[f64],
    domain: DomainInterval,
    root_tol: f64,
    max_root_iters: usize,
) -> Result<Vec<f64>> {
    let poly = MonicPoly::from_elementary(e);
    let roots = real_roots(&poly, root_tol, max_root_iters)?;
    let mut out = Vec::with_capacity(e.len());
    for r in roots {
        let mut v = r.value;
        if v < domain.lo() && domain.lo() - v <= root_tol {
            v = domain.lo();
        } else if v > domain.hi() && v - domain.hi() <= root_tol {
            v = domain.hi();
        }
        out.extend(std::iter::repeat(v).take(r.multiplicity));
    }
    Ok(out)
}

/// The `M` real roots of `t^M − e_1 t^(M−1) + … + (−1)^M e_M`, as a
/// multiset over `domain`. Roots within `root_tol` of a boundary are
/// clamped onto it.
pub fn roots_from_elementary(
    e: &[f64],
    domain: DomainInterval,
    root_tol: f64,
    max_root_iters: usize,
) -> Result<Multiset> {
    let roots = roots_in_frame(e, domain, root_tol, max_root_iters)?;
    if let Some(&bad) = roots.iter().find(|&&r| !domain.contains(r)) {
        return Err(Error::OutOfImage(format!(
            "root {bad} outside [{}, {}]",
            domain.lo(),
            domain.hi()
        )));
    }
    Multiset::canonicalize(roots, domain)
}
