//! Checks around `f(X) = ρ(Σ φ(x))`: verifying candidate decompositions,
//! searching for latent collisions, evaluating max-decompositions and
//! building the adversarial input that defeats any max-decomposition of
//! the sum through a latent space of dimension `N < M`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::multiset::{multiset_equal, DomainInterval, LatentVector, Multiset, Seed};

type EvalFn = dyn Fn(f64) -> Vec<f64> + Send + Sync;

/// The per-element map `φ: domain → R^N`, as an opaque callable.
#[derive(Clone)]
pub struct ElementMap {
    dim_out: usize,
    domain: DomainInterval,
    eval: Arc<EvalFn>,
}

impl fmt::Debug for ElementMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ElementMap")
            .field("dim_out", &self.dim_out)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl ElementMap {
    /// Panics if `dim_out == 0`.
    pub fn new<F>(dim_out: usize, domain: DomainInterval, eval: F) -> Self
    where
        F: Fn(f64) -> Vec<f64> + Send + Sync + 'static,
    {
        assert!(dim_out >= 1, "element maps need dim_out >= 1");
        Self {
            dim_out,
            domain,
            eval: Arc::new(eval),
        }
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn domain(&self) -> DomainInterval {
        self.domain
    }

    pub fn eval(&self, x: f64) -> Vec<f64> {
        let v = (self.eval)(x);
        debug_assert_eq!(v.len(), self.dim_out);
        v
    }

    /// `Σ_{x∈X} φ(x)`, accumulated in canonical element order.
    pub fn sum_over(&self, set: &Multiset) -> LatentVector {
        let mut acc = vec![0.0; self.dim_out];
        for &x in set.elements() {
            for (a, v) in acc.iter_mut().zip(self.eval(x)) {
                *a += v;
            }
        }
        LatentVector::new(acc).unwrap_or_else(|_| LatentVector::zeros(self.dim_out))
    }

    /// Coordinate-wise maximum of `φ` over a non-empty set.
    pub fn max_over(&self, set: &Multiset) -> Result<Vec<f64>> {
        let mut it = set.elements().iter();
        let first = it.next().ok_or(Error::EmptySet)?;
        let mut acc = self.eval(*first);
        for &x in it {
            for (a, v) in acc.iter_mut().zip(self.eval(x)) {
                if v > *a {
                    *a = v;
                }
            }
        }
        Ok(acc)
    }

    /// A random `1 → hidden → dim_out` tanh network; an arbitrary
    /// continuous `φ`.
    pub fn random_mlp(dim_out: usize, hidden: usize, domain: DomainInterval, seed: Seed) -> Self {
        let mut rng = seed.rng();
        let hidden = hidden.max(1);
        let w1: Vec<f64> = (0..hidden).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b1: Vec<f64> = (0..hidden).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let bound = 1.0 / (hidden as f64).sqrt();
        let w2: Vec<f64> = (0..hidden * dim_out)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        let b2: Vec<f64> = (0..dim_out).map(|_| rng.gen_range(-bound..bound)).collect();
        ElementMap::new(dim_out, domain, move |x| {
            let h: Vec<f64> = w1
                .iter()
                .zip(&b1)
                .map(|(w, b)| (w * x + b).tanh())
                .collect();
            (0..dim_out)
                .map(|o| {
                    b2[o] + h
                        .iter()
                        .enumerate()
                        .map(|(j, hj)| w2[o * hidden + j] * hj)
                        .sum::<f64>()
                })
                .collect()
        })
    }
}

/// Outcome of [`check_sum_decomposition`].
#[derive(Debug, Clone)]
pub struct DecompositionReport {
    pub passed: bool,
    pub samples: usize,
    pub worst_residual: f64,
    /// Index into the sample list of the worst residual.
    pub worst_sample: Option<usize>,
    /// Samples on which `ρ` itself failed (decode errors), with messages.
    pub errors: Vec<(usize, String)>,
}

/// Checks `|ρ(Σ φ(x)) − f(X)| ≤ tol` on every sample.
pub fn check_sum_decomposition<R, F>(
    phi: &ElementMap,
    rho: R,
    f: F,
    samples: &[Multiset],
    tol: f64,
) -> DecompositionReport
where
    R: Fn(&LatentVector) -> Result<f64>,
    F: Fn(&Multiset) -> f64,
{
    let mut worst_residual: f64 = 0.0;
    let mut worst_sample = None;
    let mut errors = Vec::new();
    for (i, set) in samples.iter().enumerate() {
        match rho(&phi.sum_over(set)) {
            Ok(value) => {
                let residual = (value - f(set)).abs();
                if worst_sample.is_none() || residual > worst_residual || residual.is_nan() {
                    worst_residual = residual;
                    worst_sample = Some(i);
                }
            }
            Err(e) => errors.push((i, e.to_string())),
        }
    }
    DecompositionReport {
        passed: errors.is_empty() && worst_residual <= tol,
        samples: samples.len(),
        worst_residual,
        worst_sample,
        errors,
    }
}

#[derive(Debug, Clone)]
pub struct CollisionReport {
    pub found: bool,
    pub x: Option<Multiset>,
    pub y: Option<Multiset>,
    /// Max-norm latent distance of the reported pair, or of the closest
    /// pair seen when nothing was found.
    pub latent_distance: f64,
    /// Trial index at which the collision was found.
    pub trial: Option<u64>,
}

/// Tolerance under which two multisets count as the same multiset.
const DISTINCT_TOL: f64 = 1e-9;

/// Compares two explicit multisets under `φ`.
pub fn collision_check(phi: &ElementMap, x: &Multiset, y: &Multiset, latent_eps: f64) -> CollisionReport {
    let distance = phi
        .sum_over(x)
        .max_distance(&phi.sum_over(y))
        .unwrap_or(f64::INFINITY);
    let found = distance <= latent_eps && !multiset_equal(x, y, DISTINCT_TOL);
    CollisionReport {
        found,
        x: Some(x.clone()),
        y: Some(y.clone()),
        latent_distance: distance,
        trial: None,
    }
}

/// Random search for distinct size-`m` multisets with `‖Σφ(X) − Σφ(Y)‖_∞ ≤ latent_eps`.
///
/// Elements are drawn from a lattice of `grid_points` equally spaced values
/// across `φ`'s domain, so that exact coincidences of sums have positive
/// probability. Trial `t` uses random substream `t` of `seed`, which makes
/// the returned (first) collision independent of worker scheduling.
#[derive(Debug, Clone, Copy)]
pub struct CollisionSearch {
    pub set_size: usize,
    pub trials: u64,
    pub latent_eps: f64,
    pub grid_points: usize,
    pub seed: Seed,
}

impl CollisionSearch {
    pub fn new(set_size: usize, trials: u64, latent_eps: f64, seed: Seed) -> Self {
        Self {
            set_size,
            trials,
            latent_eps,
            grid_points: 33,
            seed,
        }
    }

    fn draw(&self, phi: &ElementMap, rng: &mut impl Rng) -> Multiset {
        let d = phi.domain();
        let steps = (self.grid_points.max(2) - 1) as f64;
        let xs = (0..self.set_size)
            .map(|_| {
                let k = rng.gen_range(0..self.grid_points.max(2)) as f64;
                (d.lo() + d.width() * k / steps).min(d.hi())
            })
            .collect();
        Multiset::canonicalize(xs, d).expect("lattice points lie in the domain")
    }

    fn pair(&self, phi: &ElementMap, trial: u64) -> (Multiset, Multiset) {
        let mut rng = self.seed.stream(trial);
        let x = self.draw(phi, &mut rng);
        let y = self.draw(phi, &mut rng);
        (x, y)
    }

    pub fn run(&self, phi: &ElementMap) -> CollisionReport {
        let distances: Vec<f64> = (0..self.trials.max(1))
            .into_par_iter()
            .map(|t| {
                let (x, y) = self.pair(phi, t);
                if multiset_equal(&x, &y, DISTINCT_TOL) {
                    return f64::INFINITY;
                }
                phi.sum_over(&x)
                    .max_distance(&phi.sum_over(&y))
                    .unwrap_or(f64::INFINITY)
            })
            .collect();
        let closest = distances.iter().cloned().fold(f64::INFINITY, f64::min);
        match distances.iter().position(|&d| d <= self.latent_eps) {
            Some(t) => {
                let (x, y) = self.pair(phi, t as u64);
                CollisionReport {
                    found: true,
                    x: Some(x),
                    y: Some(y),
                    latent_distance: distances[t],
                    trial: Some(t as u64),
                }
            }
            None => CollisionReport {
                found: false,
                x: None,
                y: None,
                latent_distance: closest,
                trial: None,
            },
        }
    }
}

/// `ρ(max_i φ(x_i))` with the maximum taken per latent coordinate.
pub fn max_decompose_eval<R>(phi: &ElementMap, rho: R, set: &Multiset) -> Result<f64>
where
    R: Fn(&[f64]) -> f64,
{
    Ok(rho(&phi.max_over(set)?))
}

/// Certificate produced by [`max_collision_adversary`].
#[derive(Debug, Clone)]
pub struct AdversaryReport {
    /// `argmax_i φ(x_i)_q` for each latent coordinate `q` (lowest index wins ties).
    pub argmax: Vec<usize>,
    /// Index that no coordinate maximum depends on; it gets overwritten.
    pub replaced_index: usize,
    pub max_original: Vec<f64>,
    pub max_adversarial: Vec<f64>,
    pub sum_original: f64,
    pub sum_adversarial: f64,
}

impl AdversaryReport {
    pub fn maxima_equal(&self) -> bool {
        self.max_original
            .iter()
            .zip(&self.max_adversarial)
            .all(|(a, b)| a.to_bits() == b.to_bits())
    }

    pub fn sums_differ(&self) -> bool {
        self.sum_original != self.sum_adversarial
    }

    /// Two-column table: original vs adversarial.
    pub fn table(&self) -> String {
        use crate::multiset::format_real;
        let mut out = String::from("quantity\toriginal\tadversarial\n");
        for (q, (a, b)) in self.max_original.iter().zip(&self.max_adversarial).enumerate() {
            out += &format!("max_phi[{}]\t{}\t{}\n", q + 1, format_real(*a), format_real(*b));
        }
        out += &format!(
            "sum\t{}\t{}\n",
            format_real(self.sum_original),
            format_real(self.sum_adversarial)
        );
        out
    }
}

/// Builds `x̃` with the same coordinate-wise `φ`-maxima as `x` but a
/// different element sum.
///
/// Each of the `N` coordinates has its maximum attained at some index
/// `μ(q)`; with `N < M` some index `m` is hit by no `μ(q)`, and replacing
/// `x_m` by `x_μ(1)` leaves every maximum intact. Because elements of `x`
/// are distinct, the sum changes. Indices refer to canonical order.
pub fn max_collision_adversary(phi: &ElementMap, x: &Multiset) -> Result<(Multiset, AdversaryReport)> {
    let n = phi.dim_out();
    let m = x.len();
    if n >= m {
        return Err(Error::Precondition(format!(
            "latent dimension N={n} must be smaller than the set size M={m}"
        )));
    }
    let xs = x.elements();
    if xs.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Precondition("elements of x must be distinct".into()));
    }

    let images: Vec<Vec<f64>> = xs.iter().map(|&v| phi.eval(v)).collect();
    let argmax: Vec<usize> = (0..n)
        .map(|q| {
            let mut best = 0;
            for i in 1..m {
                if images[i][q] > images[best][q] {
                    best = i;
                }
            }
            best
        })
        .collect();
    let replaced_index = (0..m)
        .find(|i| !argmax.contains(i))
        .expect("N < M leaves an index unused");

    let mut tilde = xs.to_vec();
    tilde[replaced_index] = xs[argmax[0]];
    let tilde_set = Multiset::canonicalize(tilde.clone(), x.domain())?;

    let report = AdversaryReport {
        max_original: phi.max_over(x)?,
        max_adversarial: phi.max_over(&tilde_set)?,
        sum_original: xs.iter().sum(),
        sum_adversarial: tilde.iter().sum(),
        argmax,
        replaced_index,
    };
    Ok((tilde_set, report))
}
