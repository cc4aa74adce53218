//! Real-rooted polynomial solver used to invert the power-sum map.
//!
//! Simultaneous (Durand–Kerner) iteration on the monic polynomial with
//! double-double evaluation, followed by cluster detection for repeated
//! roots and a short Newton polish of simple ones.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest distance across which clusters are merged. Roots of
/// multiplicity m spread by about eps^(1/m).
const CLUSTER_LIMIT: f64 = 1e-2;

/// Monic polynomial `t^M + c[1] t^(M-1) + ... + c[M]`, coefficients
/// highest degree first, `c[0] == 1`.
#[derive(Debug, Clone)]
pub(crate) struct MonicPoly {
    coeffs: Vec<f64>,
}

impl MonicPoly {
    /// `Π (t − x_m)` expressed through elementary symmetric polynomials:
    /// coefficient of `t^(M−j)` is `(−1)^j e_j`.
    pub(crate) fn from_elementary(e: &[f64]) -> Self {
        let mut coeffs = Vec::with_capacity(e.len() + 1);
        coeffs.push(1.0);
        for (j, &ej) in e.iter().enumerate() {
            coeffs.push(if j % 2 == 0 { -ej } else { ej });
        }
        Self { coeffs }
    }

    pub(crate) fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn eval_complex(&self, z: Complex64) -> Complex64 {
        let (mut re, mut im) = (Dd::ZERO, Dd::ZERO);
        for &c in &self.coeffs {
            let next_re = re.mul(z.re).add(im.mul(-z.im)).add_f64(c);
            im = re.mul(z.im).add(im.mul(z.re));
            re = next_re;
        }
        Complex64::new(re.value(), im.value())
    }

    pub(crate) fn eval(&self, t: f64) -> f64 {
        horner(&self.coeffs, t)
    }

    /// Sum of absolute term magnitudes at `t`; the scale for relative
    /// residuals.
    pub(crate) fn magnitude(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .fold(0.0, |acc, &c| acc * t.abs() + c.abs())
    }

    /// Coefficients of the `order`-th derivative, highest degree first.
    fn derivative(&self, order: usize) -> Vec<f64> {
        let n = self.degree();
        if order > n {
            return vec![0.0];
        }
        (0..=n - order)
            .map(|j| {
                let power = n - j;
                let factor: f64 = (0..order).map(|r| (power - r) as f64).product();
                self.coeffs[j] * factor
            })
            .collect()
    }
}

/// Horner evaluation carried in double-double, so values near a root
/// cluster are exact to working precision rather than rounding noise.
fn horner(coeffs: &[f64], t: f64) -> f64 {
    coeffs
        .iter()
        .fold(Dd::ZERO, |acc, &c| acc.mul(t).add_f64(c))
        .value()
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn two_sum(a: f64, b: f64) -> Dd {
        let s = a + b;
        let bb = s - a;
        Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn renormalize(hi: f64, lo: f64) -> Dd {
        let s = hi + lo;
        Dd { hi: s, lo: lo - (s - hi) }
    }

    fn add(self, other: Dd) -> Dd {
        let s = Dd::two_sum(self.hi, other.hi);
        Dd::renormalize(s.hi, s.lo + self.lo + other.lo)
    }

    fn add_f64(self, b: f64) -> Dd {
        let s = Dd::two_sum(self.hi, b);
        Dd::renormalize(s.hi, s.lo + self.lo)
    }

    fn mul(self, b: f64) -> Dd {
        let p = self.hi * b;
        let e = self.hi.mul_add(b, -p);
        Dd::renormalize(p, e + self.lo * b)
    }

    fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// A recovered real root and its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct RealRoot {
    pub value: f64,
    pub multiplicity: usize,
}

fn durand_kerner(poly: &MonicPoly, max_iters: usize, step_tol: f64) -> Vec<Complex64> {
    let n = poly.degree();
    let radius = 1.0
        + poly.coeffs[1..]
            .iter()
            .map(|c| c.abs())
            .fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            Complex64::from_polar(radius, angle)
        })
        .collect();

    for _ in 0..max_iters {
        let mut largest_step: f64 = 0.0;
        for i in 0..n {
            let zi = z[i];
            let denom = (0..n)
                .filter(|&j| j != i)
                .fold(Complex64::new(1.0, 0.0), |acc, j| acc * (zi - z[j]));
            if denom.norm() == 0.0 {
                // coincident iterates; nudge apart and keep going
                z[i] += Complex64::new(step_tol.max(1e-12), step_tol.max(1e-12));
                largest_step = f64::INFINITY;
                continue;
            }
            let step = poly.eval_complex(zi) / denom;
            if step.is_finite() {
                z[i] = zi - step;
                largest_step = largest_step.max(step.norm());
            }
        }
        if largest_step <= step_tol {
            break;
        }
    }
    z
}

/// Groups iterates into clusters of a single (possibly repeated) real root.
fn cluster(roots: &[Complex64], root_tol: f64) -> Vec<Vec<Complex64>> {
    let mut groups: Vec<Vec<Complex64>> = Vec::new();
    let mut sorted = roots.to_vec();
    sorted.sort_by(|a, b| a.re.total_cmp(&b.re));
    for z in sorted {
        match groups.last_mut() {
            Some(g) if g.iter().any(|w| (z - w).norm() <= 10.0 * root_tol) => g.push(z),
            _ => groups.push(vec![z]),
        }
    }

    let mean = |g: &[Complex64]| g.iter().sum::<Complex64>() / g.len() as f64;
    let radius = |g: &[Complex64], c: Complex64| g.iter().map(|z| (z - c).norm()).fold(0.0, f64::max);
    // A perturbed m-fold root scatters its iterates on a circle around the
    // true value, so a group that is non-real or visibly spread absorbs the
    // nearest group lying within a few of its radius or imaginary offset.
    loop {
        let mut merge = None;
        for (i, g) in groups.iter().enumerate() {
            let c = mean(g);
            let rad = radius(g, c);
            let non_real = c.im.abs() > root_tol.max(2.0 * rad);
            if !non_real && rad <= 10.0 * root_tol {
                continue;
            }
            let reach = (3.0 * rad.max(c.im.abs()) + 10.0 * root_tol).min(CLUSTER_LIMIT);
            let nearest = groups
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(j, h)| (j, h.iter().map(|z| (z - c).norm()).fold(f64::INFINITY, f64::min)))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((j, dist)) = nearest {
                if dist <= reach {
                    merge = Some((i, j));
                    break;
                }
            }
        }
        let Some((i, j)) = merge else { break };
        let moved = groups.remove(i.max(j));
        groups[i.min(j)].extend(moved);
    }
    groups
}

/// All roots of a real-rooted monic polynomial, with multiplicity.
///
/// Fails if a recovered root keeps an imaginary part above `root_tol`
/// or its relative residual exceeds `root_tol`.
pub(crate) fn real_roots(
    poly: &MonicPoly,
    root_tol: f64,
    max_iters: usize,
) -> Result<Vec<RealRoot>> {
    let n = poly.degree();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![RealRoot {
            value: -poly.coeffs[1],
            multiplicity: 1,
        }]);
    }
    if poly.coeffs[1..].iter().all(|&c| c == 0.0) {
        return Ok(vec![RealRoot {
            value: 0.0,
            multiplicity: n,
        }]);
    }

    let iterates = durand_kerner(poly, max_iters, root_tol * 1e-3);
    let groups = cluster(&iterates, root_tol);

    let mut out = Vec::with_capacity(groups.len());
    for g in groups {
        let multiplicity = g.len();
        let centre = g.iter().sum::<Complex64>() / multiplicity as f64;
        // iterates of a repeated root stall in a noisy cloud whose mean is
        // only as real as the cloud is small; genuinely complex pairs still
        // fail the residual test below
        let spread = g.iter().map(|z| (z - centre).norm()).fold(0.0, f64::max);
        let im_tol = if multiplicity > 1 { root_tol.max(2.0 * spread) } else { root_tol };
        if centre.im.abs() > im_tol {
            return Err(Error::RootRecoveryFailure(format!(
                "root estimate {centre} has imaginary part above {im_tol:e}"
            )));
        }
        // a cluster keeps its centroid, which preserves the iterates' sum
        let value = if multiplicity == 1 { polish(poly, centre.re) } else { centre.re };
        let residual = poly.eval(value).abs();
        let scale = poly.magnitude(value).max(1.0);
        if residual > root_tol * scale {
            return Err(Error::RootRecoveryFailure(format!(
                "residual {residual:e} at root {value} exceeds {root_tol:e} after {max_iters} iterations"
            )));
        }
        out.push(RealRoot {
            value,
            multiplicity,
        });
    }
    out.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(out)
}

/// Newton steps on a simple root, accepted only while the residual shrinks.
fn polish(poly: &MonicPoly, start: f64) -> f64 {
    let f = &poly.coeffs;
    let df = poly.derivative(1);
    let mut t = start;
    let mut best = horner(f, t).abs();
    for _ in 0..4 {
        let slope = horner(&df, t);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = t - horner(f, t) / slope;
        let r = horner(f, next).abs();
        if !(r < best) {
            break;
        }
        t = next;
        best = r;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn expand(roots: &[f64]) -> Vec<f64> {
        // elementary symmetric polynomials by direct expansion
        let mut e = vec![1.0];
        for &r in roots {
            let mut next = e.clone();
            next.push(0.0);
            for j in 1..next.len() {
                next[j] += r * e[j - 1];
            }
            e = next;
        }
        e[1..].to_vec()
    }

    fn flatten(roots: &[RealRoot]) -> Vec<f64> {
        roots
            .iter()
            .flat_map(|r| std::iter::repeat(r.value).take(r.multiplicity))
            .collect()
    }

    #[test]
    fn quadratic() {
        let poly = MonicPoly::from_elementary(&[1.0, 0.1875]);
        let roots = flatten(&real_roots(&poly, 1e-9, 200).unwrap());
        assert!((roots[0] - 0.25).abs() < 1e-12);
        assert!((roots[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn double_root() {
        let poly = MonicPoly::from_elementary(&[1.0, 0.25]);
        let roots = real_roots(&poly, 1e-9, 200).unwrap();
        assert_eq!(roots.len(), 1);
        assert_eq!(roots[0].multiplicity, 2);
        assert!((roots[0].value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn triple_root_among_simple_ones() {
        let xs = [-0.8, 0.1, 0.1, 0.1, 0.6];
        let poly = MonicPoly::from_elementary(&expand(&xs));
        let roots = flatten(&real_roots(&poly, 1e-9, 200).unwrap());
        assert_eq!(roots.len(), 5);
        for (a, b) in roots.iter().zip(xs) {
            assert!((a - b).abs() < 1e-4, "{roots:?}");
        }
    }

    #[test]
    fn all_zero_roots() {
        let poly = MonicPoly::from_elementary(&[0.0; 4]);
        let roots = real_roots(&poly, 1e-9, 200).unwrap();
        assert_eq!(flatten(&roots), vec![0.0; 4]);
    }

    #[test]
    fn complex_roots_are_rejected() {
        // t^2 + 1
        let poly = MonicPoly::from_elementary(&[0.0, 1.0]);
        assert!(matches!(
            real_roots(&poly, 1e-9, 200),
            Err(Error::RootRecoveryFailure(_))
        ));
    }

    #[test]
    fn derivative_coefficients() {
        // t^3 - 2t + 5 -> 3t^2 - 2 -> 6t
        let poly = MonicPoly {
            coeffs: vec![1.0, 0.0, -2.0, 5.0],
        };
        assert_eq!(poly.derivative(1), vec![3.0, 0.0, -2.0]);
        assert_eq!(poly.derivative(2), vec![6.0, 0.0]);
    }

    #[test]
    fn unconverged_pair_does_not_absorb_a_neighbour() {
        // a near-double root whose iterates split into an uneven complex pair
        let iterates = [
            Complex64::new(0.5299235604, 3e-16),
            Complex64::new(0.539905313694, -6.5e-7),
            Complex64::new(0.539905313697, 5.2e-7),
        ];
        let groups = cluster(&iterates, 1e-9);
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[1].len(), 2);
    }

    #[test]
    fn tight_cluster_reexpands_to_its_coefficients() {
        let xs = [
            0.44779955588359965,
            0.5305789710985412,
            0.7532637619110029,
            0.8463897158808636,
            0.862021041080924,
            0.8633957848061237,
            0.8642292358980883,
            0.8726872111993319,
        ];
        let e = expand(&xs);
        let roots = flatten(&real_roots(&MonicPoly::from_elementary(&e), 1e-9, 200).unwrap());
        assert_eq!(roots.len(), 8);
        for (a, b) in e.iter().zip(expand(&roots)) {
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn double_double_horner_resolves_cancellation() {
        // (t − 1)^4 expanded; plain Horner near t = 1 returns rounding noise
        let coeffs = [1.0, -4.0, 6.0, -4.0, 1.0];
        let t = 1.0 + 1e-4;
        let exact = 1e-16;
        assert!((horner(&coeffs, t) - exact).abs() <= 1e-3 * exact);
    }
}
