//! Out-of-distribution probes scaled to a model's set size.

use std::fmt::Write as _;

use super::model::DeepSetsModel;
use super::task::median;
use crate::error::Result;
use crate::multiset::{format_real, DomainInterval, Multiset};

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeResult {
    pub name: &'static str,
    pub prediction: f64,
    pub label: f64,
    pub abs_error: f64,
}

/// The three probe inputs for sets of size `m`:
/// every element 1.0; a 2:3 mix of 1.0s and 0.0s; the grid `1/m, 2/m, …, 1`.
pub fn probe_sets(m: usize) -> Result<Vec<(&'static str, Multiset)>> {
    let d = DomainInterval::unit();
    let ones = (2 * m) / 5;
    Ok(vec![
        ("all_identical", Multiset::canonicalize(vec![1.0; m], d)?),
        (
            "step_mixture",
            Multiset::canonicalize(
                std::iter::repeat(1.0)
                    .take(ones)
                    .chain(std::iter::repeat(0.0).take(m - ones))
                    .collect(),
                d,
            )?,
        ),
        (
            "even_grid",
            Multiset::canonicalize((1..=m).map(|i| i as f64 / m as f64).collect(), d)?,
        ),
    ])
}

pub fn ood_probe(model: &DeepSetsModel, m: usize) -> Result<Vec<ProbeResult>> {
    probe_sets(m)?
        .into_iter()
        .map(|(name, set)| {
            let label = median(&set)?;
            let prediction = model.forward(&set);
            Ok(ProbeResult {
                name,
                prediction,
                label,
                abs_error: (prediction - label).abs(),
            })
        })
        .collect()
}

/// `probe,prediction,label,abs_error`
pub fn probe_csv(results: &[ProbeResult]) -> String {
    let mut out = String::from("probe,prediction,label,abs_error\n");
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            r.name,
            format_real(r.prediction),
            format_real(r.label),
            format_real(r.abs_error)
        );
    }
    out
}
