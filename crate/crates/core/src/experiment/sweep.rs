//! Sweeps over (set size, latent dimension), cell statistics, critical
//! latent dimensions and the CSV/SVG outputs for them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::train::{train, TrainConfig};
use crate::error::{Error, Result};
use crate::multiset::{format_real, Seed};
use crate::plot::{LineChart, Series};

/// One completed training run.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub set_size: usize,
    pub latent_dim: usize,
    pub seed: Seed,
    pub rmse_final: f64,
    pub distributions: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub set_size: usize,
    pub latent_dim: usize,
    pub seed: Seed,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<RunFailure>,
}

/// Mean final RMSE of one (M, N) cell with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSummary {
    pub set_size: usize,
    pub latent_dim: usize,
    pub runs: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub set_size: usize,
    pub critical_latent_dim: usize,
    pub min_rmse: f64,
    pub threshold_rmse: f64,
}

/// Parses `M=4,8,16;N=1..24` (lists and inclusive ranges may be mixed,
/// e.g. `N=1..4,8,16`) into the cross product of set sizes and latent
/// dimensions.
pub fn parse_grid(text: &str) -> Result<Vec<(usize, usize)>> {
    let mut ms = None;
    let mut ns = None;
    for part in text.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, values) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("grid part `{part}` lacks `=`")))?;
        let values = parse_index_list(values)?;
        match key.trim() {
            "M" | "m" => ms = Some(values),
            "N" | "n" => ns = Some(values),
            other => return Err(Error::Parse(format!("unknown grid axis `{other}`"))),
        }
    }
    let (ms, ns) = match (ms, ns) {
        (Some(m), Some(n)) => (m, n),
        _ => return Err(Error::Parse("grid needs both M= and N=".into())),
    };
    Ok(ms.iter().flat_map(|&m| ns.iter().map(move |&n| (m, n))).collect())
}

fn parse_index_list(text: &str) -> Result<Vec<usize>> {
    let bad = |t: &str| Error::Parse(format!("invalid grid value `{t}`"));
    let mut out = Vec::new();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, b)) = tok.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad(tok))?;
            let b: usize = b.trim().parse().map_err(|_| bad(tok))?;
            if a > b {
                return Err(bad(tok));
            }
            out.extend(a..=b);
        } else {
            out.push(tok.parse().map_err(|_| bad(tok))?);
        }
    }
    if out.is_empty() || out.contains(&0) {
        return Err(Error::Parse(format!("grid axis `{text}` must list positive integers")));
    }
    Ok(out)
}

/// Seed of repeat `r`; shared by every cell so that cells differ only in
/// (M, N).
pub fn repeat_seed(base: Seed, repeat: usize) -> Seed {
    base.derive(repeat as u64)
}

/// Trains one model per (M, N, repeat). Runs are independent and execute
/// on the rayon pool; failures are collected, not propagated.
pub fn sweep(grid: &[(usize, usize)], repeats: usize, base: &TrainConfig) -> Result<SweepResult> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty grid".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidConfig("repeats must be >= 1".into()));
    }
    base.validate()?;
    let jobs: Vec<(usize, usize, Seed)> = grid
        .iter()
        .flat_map(|&(m, n)| (0..repeats).map(move |r| (m, n, repeat_seed(base.seed, r))))
        .collect();
    let outcomes: Vec<_> = jobs
        .par_iter()
        .map(|&(m, n, seed)| {
            let cfg = TrainConfig {
                set_size: m,
                latent_dim: n,
                seed,
                ..base.clone()
            };
            (m, n, seed, train(&cfg).map(|o| o.final_rmse()))
        })
        .collect();

    let mut result = SweepResult::default();
    for (m, n, seed, outcome) in outcomes {
        match outcome {
            Ok(rmse) => result.rows.push(SweepRow {
                set_size: m,
                latent_dim: n,
                seed,
                rmse_final: rmse,
                distributions: base.distribution_mix(),
            }),
            Err(e) => result.failures.push(RunFailure {
                set_size: m,
                latent_dim: n,
                seed,
                message: e.to_string(),
            }),
        }
    }
    result.sort();
    Ok(result)
}

impl SweepResult {
    fn sort(&mut self) {
        self.rows
            .sort_by_key(|r| (r.set_size, r.latent_dim, r.seed.0));
        self.failures
            .sort_by_key(|r| (r.set_size, r.latent_dim, r.seed.0));
    }

    /// Per-cell mean and standard error, ordered by (M, N).
    pub fn cells(&self) -> Vec<CellSummary> {
        let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for r in &self.rows {
            groups.entry((r.set_size, r.latent_dim)).or_default().push(r.rmse_final);
        }
        groups
            .into_iter()
            .map(|((m, n), v)| {
                let k = v.len() as f64;
                let mean = v.iter().sum::<f64>() / k;
                let stderr = if v.len() > 1 {
                    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
                    (var / k).sqrt()
                } else {
                    0.0
                };
                CellSummary {
                    set_size: m,
                    latent_dim: n,
                    runs: v.len(),
                    mean,
                    stderr,
                }
            })
            .collect()
    }

    /// `M,N,seed,rmse_final`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("M,N,seed,rmse_final\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                r.set_size,
                r.latent_dim,
                r.seed.0,
                format_real(r.rmse_final)
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty sweep file".into()))?;
        if header.trim() != "M,N,seed,rmse_final" {
            return Err(Error::Parse(format!("unexpected header `{header}`")));
        }
        let mut result = SweepResult::default();
        for (i, line) in lines.enumerate() {
            let bad = || Error::Parse(format!("row {}: `{line}`", i + 1));
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 4 {
                return Err(bad());
            }
            let rmse: f64 = f[3].parse().map_err(|_| bad())?;
            if !(rmse >= 0.0) {
                return Err(bad());
            }
            result.rows.push(SweepRow {
                set_size: f[0].parse().map_err(|_| bad())?,
                latent_dim: f[1].parse().map_err(|_| bad())?,
                seed: Seed(f[2].parse().map_err(|_| bad())?),
                rmse_final: rmse,
                distributions: String::new(),
            });
        }
        result.sort();
        Ok(result)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }

    /// Mean RMSE against N, one line per M.
    pub fn rmse_chart(&self) -> LineChart {
        let mut by_m: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
        for c in self.cells() {
            by_m.entry(c.set_size).or_default().push((c.latent_dim as f64, c.mean));
        }
        LineChart {
            title: "Median regression: final RMSE vs latent dimension".into(),
            x_label: "latent dimension N".into(),
            y_label: "smoothed RMSE (log)".into(),
            series: by_m
                .into_iter()
                .map(|(m, points)| Series {
                    label: format!("M={m}"),
                    points,
                })
                .collect(),
            log_y: true,
        }
    }
}

/// Smallest swept N whose mean RMSE is at most 1.1 × the per-M minimum.
pub fn critical_points(result: &SweepResult) -> Result<Vec<CriticalPoint>> {
    let mut by_m: BTreeMap<usize, Vec<CellSummary>> = BTreeMap::new();
    for c in result.cells() {
        by_m.entry(c.set_size).or_default().push(c);
    }
    if by_m.is_empty() {
        return Err(Error::InsufficientGrid("no completed runs".into()));
    }
    by_m.into_iter()
        .map(|(m, cells)| {
            if cells.len() < 2 {
                return Err(Error::InsufficientGrid(format!(
                    "set size {m} has {} latent dimension(s); need at least 2",
                    cells.len()
                )));
            }
            let min = cells.iter().map(|c| c.mean).fold(f64::INFINITY, f64::min);
            let threshold = 1.1 * min;
            let critical = cells
                .iter()
                .find(|c| c.mean <= threshold)
                .expect("the minimum is below its own threshold");
            Ok(CriticalPoint {
                set_size: m,
                critical_latent_dim: critical.latent_dim,
                min_rmse: min,
                threshold_rmse: threshold,
            })
        })
        .collect()
}

/// `M,critical_N,min_rmse,threshold`
pub fn critical_points_csv(points: &[CriticalPoint]) -> String {
    let mut out = String::from("M,critical_N,min_rmse,threshold\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            p.set_size,
            p.critical_latent_dim,
            format_real(p.min_rmse),
            format_real(p.threshold_rmse)
        );
    }
    out
}

pub fn critical_points_chart(points: &[CriticalPoint]) -> LineChart {
    LineChart {
        title: "Minimum latent dimension for near-optimal RMSE".into(),
        x_label: "set size M".into(),
        y_label: "critical N".into(),
        series: vec![Series {
            label: "critical N".into(),
            points: points
                .iter()
                .map(|p| (p.set_size as f64, p.critical_latent_dim as f64))
                .collect(),
        }],
        log_y: false,
    }
}

/// Adjacent latent dimensions where the mean RMSE rises by more than
/// `z` standard errors of the difference: `mean(N') > mean(N) + z·√(se² + se'²)`.
pub fn monotonicity_violations(cells: &[CellSummary], z: f64) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for w in cells.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.set_size != b.set_size {
            continue;
        }
        let se = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        if b.mean > a.mean + z * se {
            out.push((a.set_size, a.latent_dim, b.latent_dim));
        }
    }
    out
}

/// Per set size: whether the RMSE at the largest swept N lies within
/// `rel` of the minimum over N.
pub fn plateau_check(cells: &[CellSummary], rel: f64) -> Vec<(usize, bool)> {
    let mut by_m: BTreeMap<usize, Vec<&CellSummary>> = BTreeMap::new();
    for c in cells {
        by_m.entry(c.set_size).or_default().push(c);
    }
    by_m.into_iter()
        .map(|(m, cs)| {
            let min = cs.iter().map(|c| c.mean).fold(f64::INFINITY, f64::min);
            let last = cs.iter().max_by_key(|c| c.latent_dim).expect("non-empty").mean;
            (m, last <= (1.0 + rel) * min)
        })
        .collect()
}

/// Number of adjacent set sizes whose critical N decreases.
pub fn critical_inversions(points: &[CriticalPoint]) -> usize {
    points
        .windows(2)
        .filter(|w| w[1].critical_latent_dim < w[0].critical_latent_dim)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(m: usize, rmses: &[f64]) -> SweepResult {
        SweepResult {
            rows: rmses
                .iter()
                .enumerate()
                .map(|(i, &r)| SweepRow {
                    set_size: m,
                    latent_dim: i + 1,
                    seed: Seed(0),
                    rmse_final: r,
                    distributions: String::new(),
                })
                .collect(),
            failures: vec![],
        }
    }

    #[test]
    fn critical_point_example() {
        let r = synthetic(4, &[0.20, 0.11, 0.10, 0.10]);
        let cp = critical_points(&r).unwrap();
        assert_eq!(cp.len(), 1);
        assert_eq!(cp[0].critical_latent_dim, 2);
        assert!((cp[0].threshold_rmse - 0.11).abs() < 1e-12);
        assert_eq!(cp[0].min_rmse, 0.10);
    }

    #[test]
    fn constant_rmse_gives_smallest_n() {
        let r = synthetic(8, &[0.3; 5]);
        assert_eq!(critical_points(&r).unwrap()[0].critical_latent_dim, 1);
    }

    #[test]
    fn insufficient_grid() {
        let r = synthetic(8, &[0.3]);
        assert!(matches!(critical_points(&r), Err(Error::InsufficientGrid(_))));
        assert!(matches!(critical_points(&SweepResult::default()), Err(Error::InsufficientGrid(_))));
    }

    #[test]
    fn grid_parsing() {
        let g = parse_grid("M=4,8,16;N=1..24").unwrap();
        assert_eq!(g.len(), 72);
        assert_eq!(g[0], (4, 1));
        assert_eq!(g[71], (16, 24));
        assert_eq!(parse_grid("N=1..2,5; M=3").unwrap(), vec![(3, 1), (3, 2), (3, 5)]);
        assert!(parse_grid("M=4").is_err());
        assert!(parse_grid("M=4;N=3..1").is_err());
        assert!(parse_grid("M=0;N=1").is_err());
        assert!(parse_grid("Q=1;N=1").is_err());
    }

    #[test]
    fn sweep_bookkeeping() {
        let base = TrainConfig {
            hidden_units: 8,
            batches: 5,
            batch_size: 4,
            ..TrainConfig::default()
        };
        let grid: Vec<(usize, usize)> = (1..=8).map(|n| (4, n)).collect();
        let result = sweep(&grid, 3, &base).unwrap();
        assert_eq!(result.rows.len(), 24);
        assert!(result.failures.is_empty());
        let cells = result.cells();
        assert_eq!(cells.len(), 8);
        assert!(cells.iter().all(|c| c.runs == 3 && c.mean >= 0.0));

        let again = SweepResult::from_csv(&result.to_csv()).unwrap();
        assert_eq!(again.rows.len(), 24);
        for (a, b) in again.rows.iter().zip(&result.rows) {
            assert_eq!((a.set_size, a.latent_dim, a.seed), (b.set_size, b.latent_dim, b.seed));
            assert!((a.rmse_final - b.rmse_final).abs() <= 1e-11 * b.rmse_final.max(1.0));
        }
    }

    #[test]
    fn sweep_failures_do_not_abort() {
        let base = TrainConfig {
            hidden_units: 4,
            batches: 3,
            batch_size: 2,
            ..TrainConfig::default()
        };
        // the M=0 runs fail validation; the others complete
        let result = sweep(&[(0, 1), (2, 1)], 2, &base).unwrap();
        assert_eq!(result.rows.len(), 2);
        assert_eq!(result.failures.len(), 2);
    }

    #[test]
    fn csv_errors() {
        assert!(SweepResult::from_csv("").is_err());
        assert!(SweepResult::from_csv("a,b\n").is_err());
        assert!(SweepResult::from_csv("M,N,seed,rmse_final\n1,2,3\n").is_err());
        assert!(SweepResult::from_csv("M,N,seed,rmse_final\n1,2,3,-1\n").is_err());
    }

    #[test]
    fn statistical_helpers() {
        let cells = |means: &[f64], se: f64| -> Vec<CellSummary> {
            means
                .iter()
                .enumerate()
                .map(|(i, &m)| CellSummary { set_size: 4, latent_dim: i + 1, runs: 5, mean: m, stderr: se })
                .collect()
        };
        assert!(monotonicity_violations(&cells(&[0.3, 0.2, 0.21, 0.2], 0.01), 1.96).is_empty());
        assert_eq!(monotonicity_violations(&cells(&[0.3, 0.2, 0.3], 0.01), 1.96), vec![(4, 2, 3)]);
        assert_eq!(plateau_check(&cells(&[0.3, 0.2, 0.205], 0.0), 0.05), vec![(4, true)]);
        assert_eq!(plateau_check(&cells(&[0.3, 0.2, 0.25], 0.0), 0.05), vec![(4, false)]);
        let cp = |m, n| CriticalPoint { set_size: m, critical_latent_dim: n, min_rmse: 0.1, threshold_rmse: 0.11 };
        assert_eq!(critical_inversions(&[cp(4, 2), cp(8, 3), cp(16, 5)]), 0);
        assert_eq!(critical_inversions(&[cp(4, 4), cp(8, 3), cp(16, 5)]), 1);
    }
}
