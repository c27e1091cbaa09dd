//! Learned path descriptors: a fully connected autoencoder trained online
//! on foot paths, whose 4-unit bottleneck places paths in the repertoire.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::descriptors::{GridDim, GridSpec};
use crate::geometry::Point;
use crate::kinematics::PathTrace;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

/// Input, eleven hidden layers, output.
pub const ARCHITECTURE: [usize; 13] = [80, 80, 64, 48, 32, 16, 4, 16, 32, 48, 64, 80, 80];
/// Position of the bottleneck in [`ARCHITECTURE`].
pub const LATENT_LAYER: usize = 6;
pub const LATENT_DIMS: usize = 4;
pub const PATH_POINTS: usize = 40;
/// mm → network units.
pub const PATH_SCALE: f64 = 1.0 / 100.0;

/// A foot path resampled to [`PATH_POINTS`] points, centred and scaled,
/// interleaved as `x0, y0, x1, y1, ...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathVector(pub Vec<f64>);

/// Converts an error-free trace into network input. Returns `None` when
/// the trace has infeasible steps or no points.
pub fn path_to_vector(t: &PathTrace) -> Option<PathVector> {
    if t.error_count > 0 || t.foot_path.is_empty() {
        return None;
    }
    let pts = resample_closed(&t.foot_path, PATH_POINTS);
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p.y).sum::<f64>() / n;
    let v = pts.iter().flat_map(|p| [(p.x - cx) * PATH_SCALE, (p.y - cy) * PATH_SCALE]).collect();
    Some(PathVector(v))
}

/// Samples `count` points at equal arc-length spacing along the closed
/// polygon through `path`, starting at `path[0]`.
pub fn resample_closed(path: &[Point], count: usize) -> Vec<Point> {
    let n = path.len();
    let seg = |i: usize| path[i].distance(path[(i + 1) % n]);
    let total: f64 = (0..n).map(seg).sum();
    if n < 2 || total <= 0.0 {
        return vec![path[0]; count];
    }
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    let mut start = 0.0; // arc length at path[i]
    for j in 0..count {
        let s = total * j as f64 / count as f64;
        while i + 1 < n && start + seg(i) < s {
            start += seg(i);
            i += 1;
        }
        let len = seg(i);
        let t = if len > 0.0 { ((s - start) / len).clamp(0.0, 1.0) } else { 0.0 };
        let (a, b) = (path[i], path[(i + 1) % n]);
        out.push(a + (b - a) * t);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainOptions {
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Adagrad denominator offset.
    pub epsilon: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self { learning_rate: 0.01, batch_size: 256, epsilon: 1e-7 }
    }
}

/// Initial value of the Adagrad squared-gradient accumulators.
pub const INITIAL_ACCUMULATOR: f64 = 0.1;

/// Dense autoencoder, tanh hidden units, linear output, mean absolute
/// error loss, Adagrad updates.
///
/// Parameters are stored flat: for each layer its `out × in` weight matrix
/// (row-major) followed by its biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Autoencoder {
    sizes: Vec<usize>,
    latent_layer: usize,
    params: Vec<f64>,
    accumulators: Vec<f64>,
}

impl Autoencoder {
    /// The full-size network of [`ARCHITECTURE`].
    pub fn new<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::with_sizes(&ARCHITECTURE, LATENT_LAYER, rng)
    }

    /// Glorot-uniform weights, zero biases.
    pub fn with_sizes<R: Rng + ?Sized>(sizes: &[usize], latent_layer: usize, rng: &mut R) -> Self {
        assert!(sizes.len() >= 3 && latent_layer > 0 && latent_layer < sizes.len() - 1);
        let mut params = Vec::with_capacity(parameter_count(sizes));
        for w in sizes.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-limit..limit)));
            params.extend(core::iter::repeat_n(0.0, fan_out));
        }
        let accumulators = vec![INITIAL_ACCUMULATOR; params.len()];
        Self { sizes: sizes.to_vec(), latent_layer, params, accumulators }
    }

    /// Rebuilds a network from stored parameters.
    pub fn from_parts(sizes: Vec<usize>, latent_layer: usize, params: Vec<f64>, accumulators: Vec<f64>) -> Option<Self> {
        let ok = sizes.len() >= 3
            && latent_layer > 0
            && latent_layer < sizes.len() - 1
            && params.len() == parameter_count(&sizes)
            && accumulators.len() == params.len();
        ok.then_some(Self { sizes, latent_layer, params, accumulators })
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn latent_layer(&self) -> usize {
        self.latent_layer
    }

    pub fn latent_dims(&self) -> usize {
        self.sizes[self.latent_layer]
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn accumulators(&self) -> &[f64] {
        &self.accumulators
    }

    fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Forward pass keeping every layer's activations (input included).
    fn forward(&self, input: &[f64]) -> Vec<Vec<f64>> {
        debug_assert_eq!(input.len(), self.sizes[0]);
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(input.to_vec());
        let mut offset = 0;
        for l in 0..self.layer_count() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let x = &acts[l];
            let last = l + 1 == self.layer_count();
            let out: Vec<f64> = w
                .chunks_exact(n_in)
                .zip(b)
                .map(|(row, &bias)| {
                    let z = bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                    if last {
                        z
                    } else {
                        z.tanh()
                    }
                })
                .collect();
            acts.push(out);
            offset += n_in * n_out + n_out;
        }
        acts
    }

    pub fn reconstruct(&self, input: &[f64]) -> Vec<f64> {
        self.forward(input).pop().unwrap()
    }

    /// Bottleneck activations for one input.
    pub fn encode(&self, input: &[f64]) -> Vec<f64> {
        // Only the encoder half is needed.
        let mut x = input.to_vec();
        let mut offset = 0;
        for l in 0..self.latent_layer {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            x = w
                .chunks_exact(n_in)
                .zip(b)
                .map(|(row, &bias)| (bias + row.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>()).tanh())
                .collect();
            offset += n_in * n_out + n_out;
        }
        x
    }

    /// Mean absolute reconstruction error over `data`.
    pub fn mae(&self, data: &[PathVector]) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        let total: f64 = data
            .iter()
            .map(|v| self.reconstruct(&v.0).iter().zip(&v.0).map(|(a, b)| (a - b).abs()).sum::<f64>())
            .sum();
        total / (data.len() * self.sizes[self.sizes.len() - 1]) as f64
    }

    /// Mean absolute error of the batch and its gradient with respect to
    /// every parameter (same layout as [`Autoencoder::parameters`]).
    pub fn loss_and_gradient(&self, batch: &[&[f64]]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.params.len()];
        let n_out = self.sizes[self.sizes.len() - 1];
        let scale = 1.0 / (batch.len() * n_out) as f64;
        let mut loss = 0.0;
        let offsets = self.layer_offsets();
        for sample in batch {
            let acts = self.forward(sample);
            let output = &acts[acts.len() - 1];
            let mut delta: Vec<f64> = output
                .iter()
                .zip(sample.iter())
                .map(|(y, t)| {
                    loss += (y - t).abs();
                    let d = y - t;
                    if d > 0.0 {
                        scale
                    } else if d < 0.0 {
                        -scale
                    } else {
                        0.0
                    }
                })
                .collect();
            for l in (0..self.layer_count()).rev() {
                let (n_in, n_o) = (self.sizes[l], self.sizes[l + 1]);
                let off = offsets[l];
                let x = &acts[l];
                let (gw, gb) = grad[off..off + n_in * n_o + n_o].split_at_mut(n_in * n_o);
                for ((row, gbias), &d) in gw.chunks_exact_mut(n_in).zip(gb.iter_mut()).zip(&delta) {
                    *gbias += d;
                    for (g, xi) in row.iter_mut().zip(x) {
                        *g += d * xi;
                    }
                }
                if l > 0 {
                    let w = &self.params[off..off + n_in * n_o];
                    let mut back = vec![0.0; n_in];
                    for (row, &d) in w.chunks_exact(n_in).zip(&delta) {
                        for (bk, wi) in back.iter_mut().zip(row) {
                            *bk += d * wi;
                        }
                    }
                    // tanh' = 1 - a²
                    for (bk, a) in back.iter_mut().zip(x) {
                        *bk *= 1.0 - a * a;
                    }
                    delta = back;
                }
            }
        }
        (loss * scale, grad)
    }

    fn layer_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.layer_count());
        let mut off = 0;
        for w in self.sizes.windows(2) {
            offsets.push(off);
            off += w[0] * w[1] + w[1];
        }
        offsets
    }

    /// One Adagrad step.
    fn apply(&mut self, grad: &[f64], opts: &TrainOptions) {
        for ((p, acc), g) in self.params.iter_mut().zip(&mut self.accumulators).zip(grad) {
            *acc += g * g;
            *p -= opts.learning_rate * g / (acc.sqrt() + opts.epsilon);
        }
    }

    /// `epochs` passes of shuffled minibatch training. Returns the mean
    /// batch loss of the final epoch (0 when nothing ran).
    pub fn train<R: Rng + ?Sized>(&mut self, data: &[PathVector], epochs: usize, opts: &TrainOptions, rng: &mut R) -> f64 {
        if data.is_empty() || epochs == 0 {
            return 0.0;
        }
        let mut order: Vec<usize> = (0..data.len()).collect();
        let batch_size = opts.batch_size.max(1);
        let mut last = 0.0;
        for _ in 0..epochs {
            order.shuffle(rng);
            let mut sum = 0.0;
            let mut batches = 0;
            for chunk in order.chunks(batch_size) {
                let batch: Vec<&[f64]> = chunk.iter().map(|&i| data[i].0.as_slice()).collect();
                let (loss, grad) = self.loss_and_gradient(&batch);
                self.apply(&grad, opts);
                sum += loss;
                batches += 1;
            }
            last = sum / batches as f64;
        }
        last
    }
}

/// Parameter count of a dense network with the given layer widths.
pub fn parameter_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

/// Grid over latent space spanning the per-dimension min/max of `latents`.
pub fn latent_grid(latents: &[Vec<f64>], dims: usize, bins: usize) -> GridSpec {
    let mut lo = vec![f64::INFINITY; dims];
    let mut hi = vec![f64::NEG_INFINITY; dims];
    for z in latents {
        for d in 0..dims {
            lo[d] = lo[d].min(z[d]);
            hi[d] = hi[d].max(z[d]);
        }
    }
    let dims = (0..dims)
        .map(|d| {
            if !(lo[d].is_finite() && hi[d].is_finite()) {
                GridDim::new(-1.0, 1.0, bins)
            } else if hi[d] - lo[d] < 1e-12 {
                GridDim::new(lo[d] - 1e-6, hi[d] + 1e-6, bins)
            } else {
                GridDim::new(lo[d], hi[d], bins)
            }
        })
        .collect();
    GridSpec { dims }
}

/// Training schedule for the learned descriptor space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AuroraConfig {
    /// Epochs on the bootstrap population's valid paths.
    pub bootstrap_epochs: usize,
    /// Epochs at each periodic retraining.
    pub retrain_epochs: usize,
    /// Retrain every this many iterations.
    pub retrain_interval: usize,
    /// Re-insert all elites into a fresh grid after retraining.
    pub rebin: bool,
    pub bins: usize,
    pub train: TrainOptions,
}

impl Default for AuroraConfig {
    fn default() -> Self {
        Self { bootstrap_epochs: 3000, retrain_epochs: 1000, retrain_interval: 10, rebin: true, bins: 10, train: TrainOptions::default() }
    }
}

impl AuroraConfig {
    /// Whether iteration `iteration` (1-based; 0 is the bootstrap) ends with
    /// a retraining.
    pub fn retrains_at(&self, iteration: usize) -> bool {
        iteration > 0 && self.retrain_interval > 0 && iteration % self.retrain_interval == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::TAU;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn architecture_parameter_count() {
        let ae = Autoencoder::new(&mut ChaCha8Rng::seed_from_u64(0));
        assert_eq!(ae.layer_sizes(), &ARCHITECTURE);
        assert_eq!(ae.latent_dims(), 4);
        let expected: usize = ARCHITECTURE.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        assert_eq!(ae.parameters().len(), expected);
        assert_eq!(expected, 33_972);
    }

    #[test]
    fn circle_normalises_to_unit_radius() {
        let path = (0..720).map(|k| Point::new(37.0, -12.0) + Point::polar(100.0, TAU * k as f64 / 720.0)).collect();
        let v = path_to_vector(&PathTrace::from_foot_path(path)).unwrap();
        assert_eq!(v.0.len(), 80);
        for p in v.0.chunks(2) {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_paths_with_errors() {
        let mut t = PathTrace::from_foot_path(vec![Point::ORIGIN, Point::new(1.0, 0.0), Point::new(0.0, 1.0)]);
        t.error_count = 1;
        assert!(path_to_vector(&t).is_none());
    }

    #[test]
    fn zero_epochs_leave_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut ae = Autoencoder::with_sizes(&[4, 3, 2, 3, 4], 2, &mut rng);
        let before = ae.clone();
        ae.train(&[PathVector(vec![0.1, 0.2, 0.3, 0.4])], 0, &TrainOptions::default(), &mut rng);
        assert_eq!(ae, before);
    }

    #[test]
    fn encode_is_deterministic() {
        let ae = Autoencoder::new(&mut ChaCha8Rng::seed_from_u64(5));
        let x: Vec<f64> = (0..80).map(|i| (i as f64 * 0.1).sin()).collect();
        assert_eq!(ae.encode(&x), ae.encode(&x));
        assert_eq!(ae.encode(&x).len(), 4);
    }

    #[test]
    fn retraining_schedule() {
        let c = AuroraConfig::default();
        assert!(!c.retrains_at(0));
        assert!(!c.retrains_at(7));
        assert!(c.retrains_at(10));
        assert!(c.retrains_at(20));
    }
}
