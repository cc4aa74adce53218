//! Deep Sets median regression: model, optimiser, task, training and the
//! latent-dimension sweep.

pub mod adam;
pub mod model;
pub mod ood;
pub mod sweep;
pub mod task;
pub mod train;

pub use adam::{adam_step, learning_rate, AdamState};
pub use model::{DeepSetsModel, ForwardCache, LayerShape};
pub use ood::{ood_probe, probe_csv, probe_sets, ProbeResult};
pub use sweep::{
    critical_inversions, critical_points, critical_points_chart, critical_points_csv, monotonicity_violations,
    parse_grid, plateau_check, repeat_seed, sweep, CellSummary, CriticalPoint, RunFailure, SweepResult, SweepRow,
};
pub use task::{median, sample_task, Distribution, Task};
pub use train::{smooth, train, TrainConfig, TrainOutcome};
