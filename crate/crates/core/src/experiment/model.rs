//! `ρ(Σ φ(x))` with dense ReLU networks for `φ` and `ρ`, forward and
//! backward passes over whole batches of sets.
//!
//! All parameters live in one flat vector (weights row-major `[in][out]`
//! followed by the bias, layer after layer, `φ` first) so the optimizer and
//! the finite-difference checks can treat them uniformly.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;

use crate::error::{Error, Result};
use crate::multiset::{Multiset, Seed};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShape {
    pub inputs: usize,
    pub outputs: usize,
}

impl LayerShape {
    fn len(&self) -> usize {
        self.inputs * self.outputs + self.outputs
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeepSetsModel {
    phi: Vec<LayerShape>,
    rho: Vec<LayerShape>,
    params: Vec<f64>,
}

/// Intermediate activations kept for the backward pass.
#[derive(Debug)]
pub struct ForwardCache {
    /// Per-set element counts, in batch order.
    sizes: Vec<usize>,
    /// Inputs to each `φ` layer (the first is the raw elements).
    phi_inputs: Vec<Array2<f64>>,
    phi_pre: Vec<Array2<f64>>,
    rho_inputs: Vec<Array2<f64>>,
    rho_pre: Vec<Array2<f64>>,
}

fn chain(widths: &[usize]) -> Vec<LayerShape> {
    widths
        .windows(2)
        .map(|w| LayerShape {
            inputs: w[0],
            outputs: w[1],
        })
        .collect()
}

fn relu(mut a: Array2<f64>) -> Array2<f64> {
    a.mapv_inplace(|v| v.max(0.0));
    a
}

impl DeepSetsModel {
    /// Three `φ` layers `1 → hidden → hidden → latent` and two `ρ` layers
    /// `latent → hidden → 1`.
    pub fn new(latent_dim: usize, hidden: usize, seed: Seed) -> Result<Self> {
        Self::with_widths(&[1, hidden, hidden, latent_dim], &[latent_dim, hidden, 1], seed)
    }

    /// Layer widths of each network, input first. `φ` must start at 1 and
    /// end where `ρ` starts; `ρ` must end at 1. Weights and biases are
    /// uniform in `±1/√fan_in`.
    pub fn with_widths(phi_widths: &[usize], rho_widths: &[usize], seed: Seed) -> Result<Self> {
        let mut model = Self::zeros(phi_widths, rho_widths)?;
        let mut rng = seed.rng();
        let mut offset = 0;
        for shape in model.phi.iter().chain(&model.rho) {
            let bound = 1.0 / (shape.inputs as f64).sqrt();
            for p in &mut model.params[offset..offset + shape.len()] {
                *p = rng.gen_range(-bound..bound);
            }
            offset += shape.len();
        }
        Ok(model)
    }

    pub fn zeros(phi_widths: &[usize], rho_widths: &[usize]) -> Result<Self> {
        if phi_widths.len() < 2 || rho_widths.len() < 2 {
            return Err(Error::ShapeMismatch("each network needs at least one layer".into()));
        }
        if phi_widths[0] != 1 || *rho_widths.last().unwrap() != 1 {
            return Err(Error::ShapeMismatch("phi takes scalars and rho returns a scalar".into()));
        }
        if phi_widths.last() != rho_widths.first() {
            return Err(Error::ShapeMismatch(format!(
                "phi ends at width {} but rho starts at {}",
                phi_widths.last().unwrap(),
                rho_widths[0]
            )));
        }
        if phi_widths.iter().chain(rho_widths).any(|&w| w == 0) {
            return Err(Error::ShapeMismatch("layer widths must be positive".into()));
        }
        let phi = chain(phi_widths);
        let rho = chain(rho_widths);
        let total = phi.iter().chain(&rho).map(LayerShape::len).sum();
        Ok(Self {
            phi,
            rho,
            params: vec![0.0; total],
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.phi.last().map(|s| s.outputs).unwrap_or(0)
    }

    pub fn phi_layers(&self) -> &[LayerShape] {
        &self.phi
    }

    pub fn rho_layers(&self) -> &[LayerShape] {
        &self.rho
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn offset(&self, layer: usize) -> usize {
        self.phi
            .iter()
            .chain(&self.rho)
            .take(layer)
            .map(LayerShape::len)
            .sum()
    }

    fn shape(&self, layer: usize) -> LayerShape {
        *self.phi.iter().chain(&self.rho).nth(layer).expect("layer index")
    }

    /// Weight matrix and bias of layer `layer` (`φ` layers first).
    pub fn layer(&self, layer: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        let s = self.shape(layer);
        let off = self.offset(layer);
        let n_w = s.inputs * s.outputs;
        let w = ArrayView2::from_shape((s.inputs, s.outputs), &self.params[off..off + n_w])
            .expect("layer shape");
        let b = ArrayView1::from(&self.params[off + n_w..off + n_w + s.outputs]);
        (w, b)
    }

    /// Mutable weight matrix and bias of one layer.
    pub fn layer_mut(&mut self, layer: usize) -> (ndarray::ArrayViewMut2<'_, f64>, ndarray::ArrayViewMut1<'_, f64>) {
        let s = self.shape(layer);
        let off = self.offset(layer);
        let n_w = s.inputs * s.outputs;
        let (w, b) = self.params[off..off + s.len()].split_at_mut(n_w);
        (
            ndarray::ArrayViewMut2::from_shape((s.inputs, s.outputs), w).expect("layer shape"),
            ndarray::ArrayViewMut1::from(b),
        )
    }

    /// `ρ(Σ φ(x))` for one set.
    pub fn forward(&self, set: &Multiset) -> f64 {
        self.forward_batch(std::slice::from_ref(set)).0[0]
    }

    pub fn predict(&self, sets: &[Multiset]) -> Vec<f64> {
        self.forward_batch(sets).0
    }

    /// Batched forward pass. Elements of each set are pooled in canonical
    /// order, so outputs are bit-identical under input permutation.
    pub fn forward_batch(&self, sets: &[Multiset]) -> (Vec<f64>, ForwardCache) {
        let sizes: Vec<usize> = sets.iter().map(Multiset::len).collect();
        let elements: Vec<f64> = sets.iter().flat_map(|s| s.elements().iter().copied()).collect();
        let mut act = Array2::from_shape_vec((elements.len(), 1), elements).expect("column");

        let mut phi_inputs = Vec::with_capacity(self.phi.len());
        let mut phi_pre = Vec::with_capacity(self.phi.len());
        for l in 0..self.phi.len() {
            let (w, b) = self.layer(l);
            let z = act.dot(&w) + &b;
            phi_inputs.push(act);
            act = relu(z.clone());
            phi_pre.push(z);
        }

        let latent = self.latent_dim();
        let mut pooled = Array2::<f64>::zeros((sets.len(), latent));
        let mut row = 0;
        for (b, &n) in sizes.iter().enumerate() {
            let mut target = pooled.row_mut(b);
            for r in row..row + n {
                target += &act.row(r);
            }
            row += n;
        }

        let mut act = pooled;
        let mut rho_inputs = Vec::with_capacity(self.rho.len());
        let mut rho_pre = Vec::with_capacity(self.rho.len());
        let n_phi = self.phi.len();
        for l in 0..self.rho.len() {
            let (w, b) = self.layer(n_phi + l);
            let z = act.dot(&w) + &b;
            rho_inputs.push(act);
            act = if l + 1 < self.rho.len() { relu(z.clone()) } else { z.clone() };
            rho_pre.push(z);
        }

        let out = act.column(0).to_vec();
        (
            out,
            ForwardCache {
                sizes,
                phi_inputs,
                phi_pre,
                rho_inputs,
                rho_pre,
            },
        )
    }

    /// Gradient of a loss with respect to all parameters, given
    /// `∂loss/∂output` per set.
    pub fn backward(&self, cache: &ForwardCache, d_out: &[f64]) -> Result<Vec<f64>> {
        if d_out.len() != cache.sizes.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} output gradients for a batch of {}",
                d_out.len(),
                cache.sizes.len()
            )));
        }
        let mut grads = vec![0.0; self.params.len()];
        let n_phi = self.phi.len();

        let mut delta = Array2::from_shape_vec((d_out.len(), 1), d_out.to_vec()).expect("column");
        for l in (0..self.rho.len()).rev() {
            if l + 1 < self.rho.len() {
                delta.zip_mut_with(&cache.rho_pre[l], |d, &z| {
                    if z <= 0.0 {
                        *d = 0.0
                    }
                });
            }
            delta = self.accumulate(n_phi + l, &cache.rho_inputs[l], delta, &mut grads);
        }

        // un-pool: every element of set b receives the gradient of row b
        let latent = self.latent_dim();
        let total: usize = cache.sizes.iter().sum();
        let mut spread = Array2::<f64>::zeros((total, latent));
        let mut row = 0;
        for (b, &n) in cache.sizes.iter().enumerate() {
            for r in row..row + n {
                spread.row_mut(r).assign(&delta.row(b));
            }
            row += n;
        }

        let mut delta = spread;
        for l in (0..n_phi).rev() {
            delta.zip_mut_with(&cache.phi_pre[l], |d, &z| {
                if z <= 0.0 {
                    *d = 0.0
                }
            });
            delta = self.accumulate(l, &cache.phi_inputs[l], delta, &mut grads);
        }
        Ok(grads)
    }

    /// Writes `∂W = inputᵀ·δ` and `∂b = Σ δ` for one layer and returns
    /// `δ·Wᵀ`, the gradient at the layer input.
    fn accumulate(
        &self,
        layer: usize,
        input: &Array2<f64>,
        delta: Array2<f64>,
        grads: &mut [f64],
    ) -> Array2<f64> {
        let s = self.shape(layer);
        let off = self.offset(layer);
        let n_w = s.inputs * s.outputs;
        let d_w = input.t().dot(&delta);
        let d_b: Array1<f64> = delta.sum_axis(Axis(0));
        for (g, v) in grads[off..off + n_w].iter_mut().zip(d_w.iter()) {
            *g += v;
        }
        for (g, v) in grads[off + n_w..off + s.len()].iter_mut().zip(d_b.iter()) {
            *g += v;
        }
        let (w, _) = self.layer(layer);
        delta.dot(&w.t())
    }

    /// Mean squared error over a batch and its parameter gradient.
    pub fn mse_and_gradient(&self, sets: &[Multiset], labels: &[f64]) -> Result<(f64, Vec<f64>)> {
        if sets.len() != labels.len() || sets.is_empty() {
            return Err(Error::ShapeMismatch(format!(
                "{} sets with {} labels",
                sets.len(),
                labels.len()
            )));
        }
        let (out, cache) = self.forward_batch(sets);
        let n = sets.len() as f64;
        let mut loss = 0.0;
        let d_out: Vec<f64> = out
            .iter()
            .zip(labels)
            .map(|(y, t)| {
                loss += (y - t) * (y - t);
                2.0 * (y - t) / n
            })
            .collect();
        Ok((loss / n, self.backward(&cache, &d_out)?))
    }

    /// Mean squared error without gradients.
    pub fn mse(&self, sets: &[Multiset], labels: &[f64]) -> f64 {
        let out = self.predict(sets);
        out.iter().zip(labels).map(|(y, t)| (y - t) * (y - t)).sum::<f64>() / sets.len().max(1) as f64
    }
}
