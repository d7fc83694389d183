//! One-hidden-layer perceptron with sigmoid units, trained by online
//! gradient descent with momentum on squared error.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::MlpParams;

const INIT_RANGE: f64 = 0.05;

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Weights of an inputs → hidden → outputs network.
///
/// Flattened parameter order: hidden weights (row-major, one row per
/// hidden unit), hidden biases, output weights (row-major), output biases.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    w1: Array2<f64>,
    b1: Array1<f64>,
    w2: Array2<f64>,
    b2: Array1<f64>,
}

impl Mlp {
    fn zeros(inputs: usize, hidden: usize, outputs: usize) -> Self {
        Mlp {
            w1: Array2::zeros((hidden, inputs)),
            b1: Array1::zeros(hidden),
            w2: Array2::zeros((outputs, hidden)),
            b2: Array1::zeros(outputs),
        }
    }

    /// Weights drawn uniformly from ±0.05.
    pub fn random<R: Rng>(inputs: usize, hidden: usize, outputs: usize, rng: &mut R) -> Self {
        let mut net = Mlp::zeros(inputs, hidden, outputs);
        net.for_each_param(|w| *w = rng.random_range(-INIT_RANGE..INIT_RANGE));
        net
    }

    pub fn inputs(&self) -> usize {
        self.w1.ncols()
    }

    pub fn hidden(&self) -> usize {
        self.w1.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.w2.nrows()
    }

    pub fn param_count(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    fn for_each_param(&mut self, mut f: impl FnMut(&mut f64)) {
        self.w1.iter_mut().for_each(&mut f);
        self.b1.iter_mut().for_each(&mut f);
        self.w2.iter_mut().for_each(&mut f);
        self.b2.iter_mut().for_each(&mut f);
    }

    pub fn params(&self) -> Vec<f64> {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .copied()
            .collect()
    }

    pub fn set_params(&mut self, params: &[f64]) {
        assert_eq!(params.len(), self.param_count());
        let mut it = params.iter();
        self.for_each_param(|w| *w = *it.next().unwrap());
    }

    fn forward(&self, x: ArrayView1<'_, f64>) -> (Array1<f64>, Array1<f64>) {
        let hidden = (self.w1.dot(&x) + &self.b1).mapv_into(sigmoid);
        let out = (self.w2.dot(&hidden) + &self.b2).mapv_into(sigmoid);
        (hidden, out)
    }

    /// Output activations, one row per input row.
    pub fn output(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let hidden = (x.dot(&self.w1.t()) + &self.b1).mapv_into(sigmoid);
        (hidden.dot(&self.w2.t()) + &self.b2).mapv_into(sigmoid)
    }

    /// Mean over rows of ½·‖output − target‖².
    pub fn loss(&self, x: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> f64 {
        let diff = self.output(x) - targets;
        0.5 * diff.mapv(|v| v * v).sum() / x.nrows() as f64
    }

    /// Gradient of [`Mlp::loss`], flattened in parameter order.
    pub fn gradient(&self, x: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Vec<f64> {
        let mut grad = Mlp::zeros(self.inputs(), self.hidden(), self.outputs());
        for (row, t) in x.outer_iter().zip(targets.outer_iter()) {
            self.accumulate_gradient(row, t, &mut grad);
        }
        let n = x.nrows() as f64;
        grad.params().into_iter().map(|g| g / n).collect()
    }

    fn accumulate_gradient(&self, x: ArrayView1<'_, f64>, t: ArrayView1<'_, f64>, grad: &mut Mlp) {
        let (h, o) = self.forward(x);
        let delta_out: Array1<f64> = (&o - &t) * &o * o.mapv(|v| 1.0 - v);
        let delta_hidden: Array1<f64> = self.w2.t().dot(&delta_out) * &h * h.mapv(|v| 1.0 - v);
        for (mut row, &d) in grad.w2.outer_iter_mut().zip(&delta_out) {
            row.scaled_add(d, &h);
        }
        grad.b2 += &delta_out;
        for (mut row, &d) in grad.w1.outer_iter_mut().zip(&delta_hidden) {
            row.scaled_add(d, &x);
        }
        grad.b1 += &delta_hidden;
    }

    /// One online update: `velocity ← momentum·velocity − rate·∇`, then
    /// `weights += velocity`.
    fn sgd_step(
        &mut self,
        x: ArrayView1<'_, f64>,
        t: ArrayView1<'_, f64>,
        rate: f64,
        momentum: f64,
        velocity: &mut Mlp,
    ) {
        let (h, o) = self.forward(x);
        let delta_out: Array1<f64> = (&o - &t) * &o * o.mapv(|v| 1.0 - v);
        let delta_hidden: Array1<f64> = self.w2.t().dot(&delta_out) * &h * h.mapv(|v| 1.0 - v);

        let step = |w: &mut f64, v: &mut f64, g: f64| {
            *v = momentum * *v - rate * g;
            *w += *v;
        };
        for ((mut w, mut v), &d) in self
            .w2
            .outer_iter_mut()
            .zip(velocity.w2.outer_iter_mut())
            .zip(&delta_out)
        {
            for ((w, v), &hk) in w.iter_mut().zip(v.iter_mut()).zip(&h) {
                step(w, v, d * hk);
            }
        }
        for ((w, v), &d) in self.b2.iter_mut().zip(velocity.b2.iter_mut()).zip(&delta_out) {
            step(w, v, d);
        }
        for ((mut w, mut v), &d) in self
            .w1
            .outer_iter_mut()
            .zip(velocity.w1.outer_iter_mut())
            .zip(&delta_hidden)
        {
            for ((w, v), &xk) in w.iter_mut().zip(v.iter_mut()).zip(&x) {
                step(w, v, d * xk);
            }
        }
        for ((w, v), &d) in self.b1.iter_mut().zip(velocity.b1.iter_mut()).zip(&delta_hidden) {
            step(w, v, d);
        }
    }
}

/// Per-feature centering and scaling with training statistics. Constant
/// features are only centered.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Array1<f64>,
    scale: Array1<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<'_, f64>) -> Self {
        let mean = x.mean_axis(Axis(0)).expect("non-empty");
        let scale = x
            .std_axis(Axis(0), 0.0)
            .mapv_into(|s| if s > 0.0 { s } else { 1.0 });
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        (&x - &self.mean) / &self.scale
    }
}

#[derive(Debug, Clone)]
pub struct MlpModel {
    net: Mlp,
    scaler: Option<Standardizer>,
}

impl MlpModel {
    pub(super) fn fit(x: ArrayView2<'_, f64>, y: &[usize], class_count: usize, p: &MlpParams) -> Self {
        let scaler = p.standardize.then(|| Standardizer::fit(x));
        let inputs = match &scaler {
            Some(s) => s.apply(x),
            None => x.to_owned(),
        };
        let mut targets = Array2::zeros((y.len(), class_count));
        for (i, &c) in y.iter().enumerate() {
            targets[[i, c]] = 1.0;
        }

        let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
        let hidden = p.hidden.resolve(x.ncols(), class_count);
        let mut net = Mlp::random(x.ncols(), hidden, class_count, &mut rng);
        let mut velocity = Mlp::zeros(x.ncols(), hidden, class_count);
        let mut order: Vec<usize> = (0..y.len()).collect();
        for _ in 0..p.epochs {
            order.shuffle(&mut rng);
            for &i in &order {
                net.sgd_step(
                    inputs.row(i),
                    targets.row(i),
                    p.learning_rate,
                    p.momentum,
                    &mut velocity,
                );
            }
        }
        MlpModel { net, scaler }
    }

    pub fn network(&self) -> &Mlp {
        &self.net
    }

    pub fn class_count(&self) -> usize {
        self.net.outputs()
    }

    pub fn input_dim(&self) -> usize {
        self.net.inputs()
    }

    pub(super) fn scores(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = match &self.scaler {
            Some(s) => self.net.output(s.apply(x).view()),
            None => self.net.output(x),
        };
        let uniform = 1.0 / self.class_count() as f64;
        for mut row in out.outer_iter_mut() {
            let sum = row.sum();
            if sum > 0.0 {
                row /= sum;
            } else {
                row.fill(uniform);
            }
        }
        out
    }
}
