use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;

use super::adam::{adam_step, learning_rate, AdamState};
use super::model::DeepSetsModel;
use super::task::{sample_task, Distribution};
use crate::error::{Error, Result};
use crate::multiset::Seed;

/// Training protocol. Defaults: 500 batches of 32 sets, Adam from
/// `lr0 = 0.001` decayed by 0.99 per batch, RMSE smoothed with α = 0.95.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub set_size: usize,
    pub latent_dim: usize,
    pub hidden_units: usize,
    pub batches: usize,
    pub batch_size: usize,
    pub lr0: f64,
    pub lr_decay_per_batch: f64,
    pub smoothing_alpha: f64,
    pub distributions: Vec<Distribution>,
    pub seed: Seed,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            set_size: 4,
            latent_dim: 4,
            hidden_units: 64,
            batches: 500,
            batch_size: 32,
            lr0: 0.001,
            lr_decay_per_batch: 0.99,
            smoothing_alpha: 0.95,
            distributions: Distribution::ALL.to_vec(),
            seed: Seed(0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.set_size == 0 {
            return bad("set_size must be >= 1");
        }
        if self.latent_dim == 0 || self.hidden_units == 0 {
            return bad("latent_dim and hidden_units must be >= 1");
        }
        if self.batches == 0 || self.batch_size == 0 {
            return bad("batches and batch_size must be >= 1");
        }
        if !(self.lr0 > 0.0) || !(self.lr_decay_per_batch > 0.0) {
            return bad("lr0 and lr_decay_per_batch must be positive");
        }
        if !(0.0..1.0).contains(&self.smoothing_alpha) {
            return bad("smoothing_alpha must lie in [0, 1)");
        }
        if self.distributions.is_empty() {
            return bad("at least one distribution is required");
        }
        Ok(())
    }

    /// Applies one `key=value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("invalid value `{value}` for `{key}`")))
        }
        match key.trim() {
            "set_size" => self.set_size = num(key, value)?,
            "latent_dim" => self.latent_dim = num(key, value)?,
            "hidden_units" => self.hidden_units = num(key, value)?,
            "batches" => self.batches = num(key, value)?,
            "batch_size" => self.batch_size = num(key, value)?,
            "lr0" => self.lr0 = num(key, value)?,
            "lr_decay_per_batch" => self.lr_decay_per_batch = num(key, value)?,
            "smoothing_alpha" => self.smoothing_alpha = num(key, value)?,
            "seed" => self.seed = value.parse()?,
            "distributions" => {
                self.distributions = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Flat `key=value` file; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "set_size={}", self.set_size);
        let _ = writeln!(out, "latent_dim={}", self.latent_dim);
        let _ = writeln!(out, "hidden_units={}", self.hidden_units);
        let _ = writeln!(out, "batches={}", self.batches);
        let _ = writeln!(out, "batch_size={}", self.batch_size);
        let _ = writeln!(out, "lr0={}", self.lr0);
        let _ = writeln!(out, "lr_decay_per_batch={}", self.lr_decay_per_batch);
        let _ = writeln!(out, "smoothing_alpha={}", self.smoothing_alpha);
        let names: Vec<&str> = self.distributions.iter().map(|d| d.name()).collect();
        let _ = writeln!(out, "distributions={}", names.join(","));
        let _ = writeln!(out, "seed={}", self.seed.0);
        out
    }

    pub fn distribution_mix(&self) -> String {
        let names: Vec<&str> = self.distributions.iter().map(|d| d.name()).collect();
        names.join("+")
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: DeepSetsModel,
    /// Per-batch RMSE on the fresh batch, measured before the update.
    pub raw_rmse: Vec<f64>,
    pub smoothed_rmse: Vec<f64>,
}

impl TrainOutcome {
    pub fn final_rmse(&self) -> f64 {
        *self.smoothed_rmse.last().expect("at least one batch")
    }
}

/// `s_t = (1 − α)·r_t + α·s_(t−1)`, seeded with `s_0 = r_0`.
pub fn smooth(raw: &[f64], alpha: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    for (t, &r) in raw.iter().enumerate() {
        out.push(if t == 0 { r } else { (1.0 - alpha) * r + alpha * out[t - 1] });
    }
    out
}

/// Trains on freshly drawn batches (no train/test split). Each batch draws
/// its distribution uniformly from `config.distributions`.
pub fn train(config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let mut model = DeepSetsModel::new(config.latent_dim, config.hidden_units, config.seed.derive(1))?;
    train_model(config, &mut model, |_, _| None)
}

/// Training loop on an existing model with a label override hook
/// (`relabel(batch, label) -> Some(new)`), used for sanity runs.
pub(crate) fn train_model<F>(config: &TrainConfig, model: &mut DeepSetsModel, relabel: F) -> Result<TrainOutcome>
where
    F: Fn(usize, f64) -> Option<f64>,
{
    config.validate()?;
    let mut data = config.seed.derive(2).rng();
    let mut state = AdamState::new(model.params().len());
    let mut raw = Vec::with_capacity(config.batches);
    for batch in 0..config.batches {
        let dist = config.distributions[data.gen_range(0..config.distributions.len())];
        let mut task = sample_task(dist, config.set_size, config.batch_size, &mut data)?;
        for l in task.labels.iter_mut() {
            if let Some(v) = relabel(batch, *l) {
                *l = v;
            }
        }
        let (mse, grads) = model.mse_and_gradient(&task.inputs, &task.labels)?;
        if !mse.is_finite() || grads.iter().any(|g| !g.is_finite()) {
            return Err(Error::NumericalDivergence { batch, loss: mse });
        }
        raw.push(mse.sqrt());
        let lr = learning_rate(config.lr0, config.lr_decay_per_batch, batch);
        adam_step(model.params_mut(), &grads, &mut state, lr)?;
    }
    let smoothed_rmse = smooth(&raw, config.smoothing_alpha);
    Ok(TrainOutcome {
        model: model.clone(),
        raw_rmse: raw,
        smoothed_rmse,
    })
}
