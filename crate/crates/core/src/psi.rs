//! A function continuous at every rational of `[0, A]` but not on all of
//! `[0, A]`.
//!
//! `Ψ̃` on `(0, 1]` is the limit of the partial sums
//! `Ψ̃_n(x) = x + Σ_{i≤n} (−1)^{c_i(x)} b_i(x) · 2(x − a_i(x))`: at level
//! `i`, every subinterval whose binary digit `b_i` is 1 gets reflected about
//! its midpoint `a_i`. `Ψ̃` jumps only at dyadic rationals, so
//! `Ψ(x) = Ψ̃(x / A)` with irrational `A` jumps only at irrational points.
//!
//! Digits use the non-terminating expansion (intervals `(k·2^−n, (k+1)·2^−n]`).

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::multiset::format_real;
use crate::plot::{LineChart, Series};

/// `2^53`: every f64 at or above it is an even integer.
const TWO_53: f64 = 9_007_199_254_740_992.0;

/// Deepest level with a non-zero contribution in double precision.
const MAX_LEVEL: u32 = 1100;

#[derive(Debug, Clone, PartialEq)]
pub struct PsiConfig {
    pub scale_a: f64,
    pub truncation_n: u32,
    pub probe_radii: Vec<f64>,
}

impl Default for PsiConfig {
    fn default() -> Self {
        Self {
            scale_a: 4f64.ln(),
            truncation_n: 40,
            probe_radii: (1..=6).map(|k| 10f64.powi(-k)).collect(),
        }
    }
}

fn check_unit(x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::DomainViolation {
            value: x,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// Position of `x` at level `n`: the index `k` of the interval
/// `(k·2^−n, (k+1)·2^−n]` holding `x`, as (parity of k, x·2^n − k).
///
/// Exact: scaling by a power of two is exact and `x·2^n − k ∈ (0, 1]`
/// is computed without rounding.
fn cell(x: f64, n: u32) -> (u8, f64) {
    let y = x * 2f64.powi(n as i32);
    if y >= TWO_53 {
        // y is an even integer, k = y − 1 is odd
        return (1, 1.0);
    }
    let k = y.ceil() - 1.0;
    ((k % 2.0) as u8, y - k)
}

/// `b_n(x)`, the n-th binary digit of `x ∈ (0, 1]` in its non-terminating
/// expansion.
pub fn binary_digit(x: f64, n: u32) -> Result<u8> {
    check_unit(x)?;
    if n == 0 {
        return Err(Error::Precondition("digit positions start at 1".into()));
    }
    Ok(cell(x, n.min(MAX_LEVEL)).0)
}

/// `a_n(x)`: midpoint of the level-`n` interval `(k·2^−n, (k+1)·2^−n]`
/// that contains `x`.
pub fn midpoint(x: f64, n: u32) -> Result<f64> {
    check_unit(x)?;
    let y = x * 2f64.powi(n as i32);
    let k = if y >= TWO_53 { y - 1.0 } else { y.ceil() - 1.0 };
    Ok((k + 0.5) / 2f64.powi(n as i32))
}

/// `Ψ̃_n(x)`; `Ψ̃_0(x) = x`.
pub fn psi_tilde(x: f64, n: u32) -> Result<f64> {
    check_unit(x)?;
    Ok(psi_tilde_unchecked(x, n))
}

fn psi_tilde_unchecked(x: f64, n: u32) -> f64 {
    let mut value = x;
    let mut ones = 0u32;
    let mut scale = 1.0;
    for level in 1..=n.min(MAX_LEVEL) {
        scale *= 0.5;
        let (digit, offset) = cell(x, level);
        if digit == 1 {
            ones += 1;
            // 2(x − a_i) = (2·offset − 1)·2^−i
            let term = (2.0 * offset - 1.0) * scale;
            if ones % 2 == 1 {
                value -= term;
            } else {
                value += term;
            }
        }
    }
    value
}

/// Number of terms that guarantees `|Ψ̃_n − Ψ̃| ≤ tol`.
pub fn terms_for_tolerance(tol: f64) -> Result<u32> {
    if !(tol > 0.0) {
        return Err(Error::Precondition("tolerance must be positive".into()));
    }
    Ok(((1.0 / tol).log2().ceil().max(1.0) as u32).min(MAX_LEVEL))
}

impl PsiConfig {
    pub fn with_scale(mut self, scale_a: f64) -> Result<Self> {
        if !(scale_a > 0.0 && scale_a.is_finite()) {
            return Err(Error::InvalidConfig("scale A must be positive".into()));
        }
        self.scale_a = scale_a;
        Ok(self)
    }

    /// `Ψ(x) = Ψ̃(x/A)` to within `tol`, with `Ψ(0) = 0`.
    pub fn psi(&self, x: f64, tol: f64) -> Result<f64> {
        let n = terms_for_tolerance(tol)?;
        self.psi_terms(x, n)
    }

    /// `Ψ` truncated after `n` terms.
    pub fn psi_terms(&self, x: f64, n: u32) -> Result<f64> {
        if !(x >= 0.0 && x <= self.scale_a) {
            return Err(Error::DomainViolation {
                value: x,
                lo: 0.0,
                hi: self.scale_a,
            });
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let u = (x / self.scale_a).min(1.0);
        if u == 0.0 {
            return Ok(0.0);
        }
        Ok(psi_tilde_unchecked(u, n))
    }

    /// For each radius `r`, `max − min` of `Ψ` over `samples_per_radius`
    /// evenly spaced points of `[x0 − r, x0 + r] ∩ [0, A]` plus `x0` itself.
    pub fn oscillation_probe(
        &self,
        x0: f64,
        radii: &[f64],
        samples_per_radius: usize,
        tol: f64,
    ) -> Result<Vec<(f64, f64)>> {
        let n = terms_for_tolerance(tol)?;
        let samples = samples_per_radius.max(2);
        radii
            .iter()
            .map(|&r| {
                let lo = (x0 - r).max(0.0);
                let hi = (x0 + r).min(self.scale_a);
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                let points = (0..samples)
                    .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
                    .chain(std::iter::once(x0.clamp(0.0, self.scale_a)));
                for x in points {
                    let v = self.psi_terms(x.clamp(0.0, self.scale_a), n)?;
                    min = min.min(v);
                    max = max.max(v);
                }
                Ok((r, max - min))
            })
            .collect()
    }

    /// Evenly spaced `(x, Ψ(x))` on `[0, A]`.
    pub fn sample(&self, resolution: usize, tol: f64) -> Result<Vec<(f64, f64)>> {
        if resolution < 2 {
            return Err(Error::Precondition("resolution must be >= 2".into()));
        }
        let n = terms_for_tolerance(tol)?;
        (0..resolution)
            .map(|i| {
                let x = (self.scale_a * i as f64 / (resolution - 1) as f64).min(self.scale_a);
                self.psi_terms(x, n).map(|v| (x, v))
            })
            .collect()
    }

    /// Writes `x,psi` rows to `csv_path` and, optionally, an SVG polyline.
    pub fn emit_plot(
        &self,
        resolution: usize,
        tol: f64,
        csv_path: &Path,
        svg_path: Option<&Path>,
    ) -> Result<()> {
        let points = self.sample(resolution, tol)?;
        let mut csv = String::from("x,psi\n");
        for (x, v) in &points {
            csv += &format!("{},{}\n", format_real(*x), format_real(*v));
        }
        fs::write(csv_path, csv).map_err(|e| Error::io(csv_path, e))?;
        if let Some(svg_path) = svg_path {
            let chart = LineChart {
                title: format!("Psi on [0, {}]", format_real(self.scale_a)),
                x_label: "x".into(),
                y_label: "psi(x)".into(),
                series: vec![Series {
                    label: String::new(),
                    points,
                }],
                log_y: false,
            };
            fs::write(svg_path, chart.to_svg()).map_err(|e| Error::io(svg_path, e))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    /// n-th digit of the non-terminating expansion by exact doubling.
    fn digit_oracle(x: f64, n: u32) -> u8 {
        let mut r = BigRational::from_float(x).unwrap();
        let one = BigRational::from_integer(1.into());
        let mut d = 0;
        for _ in 0..n {
            r *= BigRational::from_integer(2.into());
            if r > one {
                d = 1;
                r -= &one;
            } else {
                d = 0;
            }
        }
        d
    }

    #[test]
    fn digit_examples() {
        assert_eq!(binary_digit(0.75, 1).unwrap(), 1);
        assert_eq!(binary_digit(0.5, 1).unwrap(), 0);
        assert_eq!(binary_digit(0.5, 2).unwrap(), 1);
        // 0.625 = 0.1001111…₂ in the non-terminating expansion
        assert_eq!(binary_digit(0.625, 3).unwrap(), digit_oracle(0.625, 3));
        assert_eq!(binary_digit(0.625, 3).unwrap(), 0);
        assert_eq!(binary_digit(0.625, 4).unwrap(), 1);
        assert!(binary_digit(0.0, 1).is_err());
        assert!(binary_digit(1.5, 1).is_err());
    }

    #[test]
    fn digits_match_exact_doubling() {
        use rand::Rng;
        let mut rng = crate::multiset::Seed(5).rng();
        for _ in 0..300 {
            // short dyadics exercise the expansion convention
            let x = if rng.gen_bool(0.5) {
                rng.gen_range(1..=64) as f64 / 64.0
            } else {
                rng.gen_range(1e-3..1.0)
            };
            for n in 1..=60 {
                assert_eq!(binary_digit(x, n).unwrap(), digit_oracle(x, n), "x={x} n={n}");
            }
        }
    }

    #[test]
    fn midpoint_examples() {
        assert_eq!(midpoint(0.75, 1).unwrap(), 0.75);
        assert_eq!(midpoint(0.3, 1).unwrap(), 0.25);
        assert_eq!(midpoint(0.5, 2).unwrap(), 0.375);
        assert_eq!(midpoint(1.0, 3).unwrap(), 0.9375);
    }

    #[test]
    fn partial_sum_examples() {
        for x in [0.1, 0.5, 0.77, 1.0] {
            assert_eq!(psi_tilde(x, 0).unwrap(), x);
        }
        assert_eq!(psi_tilde(0.75, 1).unwrap(), 0.75);
        assert_eq!(psi_tilde(1.0, 1).unwrap(), 0.5);
        // second reflection on (3/4, 1]: Ψ̃_2(x) = x − 1/4
        assert!((psi_tilde(0.9, 2).unwrap() - 0.65).abs() < 1e-15);
    }

    #[test]
    fn psi_examples() {
        let cfg = PsiConfig::default();
        assert_eq!(cfg.psi(0.0, 1e-6).unwrap(), 0.0);
        let x = 0.75 * cfg.scale_a;
        let limit = psi_tilde(x / cfg.scale_a, 40).unwrap();
        assert!((cfg.psi(x, 1e-6).unwrap() - limit).abs() <= 1e-6);
        assert!(
            (psi_tilde(x / cfg.scale_a, 20).unwrap() - limit).abs() <= 2f64.powi(-20)
        );
        assert!(cfg.psi(cfg.scale_a * 1.01, 1e-6).is_err());
        assert!(cfg.psi(-0.1, 1e-6).is_err());
    }

    #[test]
    fn terms_from_tolerance() {
        assert_eq!(terms_for_tolerance(1e-6).unwrap(), 20);
        assert_eq!(terms_for_tolerance(0.5).unwrap(), 1);
        assert_eq!(terms_for_tolerance(2f64.powi(-30)).unwrap(), 30);
        assert!(terms_for_tolerance(0.0).is_err());
    }

    #[test]
    fn pieces_are_affine_with_unit_slope() {
        use rand::Rng;
        let mut rng = crate::multiset::Seed(8).rng();
        for n in [1u32, 3, 6, 10] {
            let cells = 1u64 << n;
            for _ in 0..200 {
                let k = rng.gen_range(0..cells) as f64;
                let width = 1.0 / cells as f64;
                let h = width / 8.0;
                let mid = (k + 0.5) * width;
                let (a, b, c) = (mid - h, mid, mid + h);
                let fa = psi_tilde(a, n).unwrap();
                let fb = psi_tilde(b, n).unwrap();
                let fc = psi_tilde(c, n).unwrap();
                let s1 = (fb - fa) / h;
                let s2 = (fc - fb) / h;
                assert!((s1 - s2).abs() < 1e-6 && (s1.abs() - 1.0).abs() < 1e-6, "n={n} {s1} {s2}");
            }
        }
    }

    #[test]
    fn values_stay_in_unit_interval() {
        use rand::Rng;
        let mut rng = crate::multiset::Seed(9).rng();
        for _ in 0..2000 {
            let x: f64 = 1.0 - rng.gen::<f64>();
            let v = psi_tilde(x, 45).unwrap();
            assert!((0.0..=1.0).contains(&v), "x={x} v={v}");
        }
    }

    #[test]
    fn plot_files() {
        let dir = std::env::temp_dir().join(format!("psi-plot-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("psi.csv");
        let svg = dir.join("psi.svg");
        let cfg = PsiConfig::default().with_scale(1.0).unwrap();
        cfg.emit_plot(4, 1e-9, &csv, Some(&svg)).unwrap();
        let text = fs::read_to_string(&csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,psi");
        assert_eq!(lines.len(), 5);
        assert!(fs::read_to_string(&svg).unwrap().contains("<polyline"));

        let missing = dir.join("no-such-dir").join("psi.csv");
        assert!(matches!(cfg.emit_plot(4, 1e-9, &missing, None), Err(Error::Io { .. })));
        assert!(cfg.emit_plot(1, 1e-9, &csv, None).is_err());
        fs::remove_dir_all(&dir).ok();
    }
}
