//! Reverse-mode gradients for the full training loss, plus a central
//! finite-difference oracle used as in-repo ground truth.
//!
//! Gradients are derived analytically per layer; the constraint penalty
//! differentiates through the smooth embedding `P(s·θ)` (rounding itself has
//! zero derivative almost everywhere), and the adversarial term treats the
//! perturbed inputs as constants of the current parameters.

use crate::constraints::encoding::{diophantine_loss, diophantine_loss_grad};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::network::Network;
use crate::training::{LossConfig, TaskKind};

/// Per-layer parameter gradients, shaped exactly like the layer they mirror.
#[derive(Debug, Clone)]
pub struct LayerGrad {
    pub dw: Matrix,
    pub db: Vector,
}

/// Gradient of the total loss with respect to every parameter, plus the
/// per-sample input gradients of the task loss (used for adversarial
/// perturbations).
#[derive(Debug, Clone)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
    pub dx: Vec<Vector>,
}

impl Gradients {
    /// Flatten to the layout of [`Network::flat_params`].
    pub fn flat(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for lg in &self.layers {
            out.extend_from_slice(lg.dw.data());
            out.extend_from_slice(lg.db.data());
        }
        out
    }

    /// Build from a flat vector laid out like [`Network::flat_params`].
    pub fn from_flat(net: &Network, flat: &[f64]) -> Result<Self> {
        if flat.len() != net.param_count() {
            return Err(Error::Shape(format!(
                "gradient length {} does not match parameter count {}",
                flat.len(),
                net.param_count()
            )));
        }
        let mut layers = Vec::with_capacity(net.layers().len());
        let mut off = 0;
        for layer in net.layers() {
            let (r, c) = (layer.weights.rows(), layer.weights.cols());
            let dw = Matrix::new(r, c, flat[off..off + r * c].to_vec())?;
            off += r * c;
            let db = Vector::new(flat[off..off + layer.bias.len()].to_vec())?;
            off += layer.bias.len();
            layers.push(LayerGrad { dw, db });
        }
        Ok(Self {
            layers,
            dx: Vec::new(),
        })
    }
}

/// Flat per-layer accumulation buffers (weights then bias per layer).
struct Accum {
    dw: Vec<Vec<f64>>,
    db: Vec<Vec<f64>>,
}

impl Accum {
    fn new(net: &Network) -> Self {
        Self {
            dw: net
                .layers()
                .iter()
                .map(|l| vec![0.0; l.weights.data().len()])
                .collect(),
            db: net.layers().iter().map(|l| vec![0.0; l.bias.len()]).collect(),
        }
    }

    /// Add `scale`× a flat gradient vector (flat_params layout).
    fn add_flat(&mut self, flat: &[f64], scale: f64) {
        let mut off = 0;
        for (dw, db) in self.dw.iter_mut().zip(&mut self.db) {
            for v in dw.iter_mut() {
                *v += scale * flat[off];
                off += 1;
            }
            for v in db.iter_mut() {
                *v += scale * flat[off];
                off += 1;
            }
        }
    }

    fn into_gradients(self, net: &Network, dx: Vec<Vector>) -> Result<Gradients> {
        let mut layers = Vec::with_capacity(self.dw.len());
        for ((dw, db), layer) in self.dw.into_iter().zip(self.db).zip(net.layers()) {
            layers.push(LayerGrad {
                dw: Matrix::new(layer.weights.rows(), layer.weights.cols(), dw)?,
                db: Vector::new(db)?,
            });
        }
        Ok(Gradients { layers, dx })
    }
}

/// Per-sample loss and output gradient for the configured task loss.
fn loss_and_output_grad(pred: &[f64], target: &[f64], kind: TaskKind) -> (f64, Vec<f64>) {
    match kind {
        TaskKind::Mse => {
            let m = pred.len() as f64;
            let mut loss = 0.0;
            let mut grad = Vec::with_capacity(pred.len());
            for (p, t) in pred.iter().zip(target) {
                let r = p - t;
                loss += r * r / m;
                grad.push(2.0 * r / m);
            }
            (loss, grad)
        }
        TaskKind::CrossEntropy => {
            // Stabilized log-sum-exp over the logits.
            let max = pred.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let sum_exp: f64 = pred.iter().map(|&v| (v - max).exp()).sum();
            let lse = max + sum_exp.ln();
            let loss = lse - pred.iter().zip(target).map(|(p, t)| p * t).sum::<f64>();
            let grad = pred
                .iter()
                .zip(target)
                .map(|(&p, &t)| (p - lse).exp() - t)
                .collect();
            (loss, grad)
        }
    }
}

/// One traced forward/backward pass for a single sample. Accumulates
/// `w_scale`× the parameter gradient of the per-sample task loss into `acc`
/// and returns the per-sample loss together with the (unscaled) input
/// gradient.
fn sample_pass(
    net: &Network,
    x: &Vector,
    y: &Vector,
    kind: TaskKind,
    w_scale: f64,
    acc: &mut Accum,
) -> Result<(f64, Vector)> {
    // Forward with intermediate values retained.
    let mut acts: Vec<Vector> = Vec::with_capacity(net.layers().len() + 1);
    let mut zs: Vec<Vector> = Vec::with_capacity(net.layers().len());
    acts.push(x.clone());
    for layer in net.layers() {
        let z = layer.affine(acts.last().expect("nonempty"))?;
        let mut a = Vec::with_capacity(z.len());
        for &v in z.data() {
            a.push(layer.activation.eval(v)?);
        }
        zs.push(z);
        acts.push(Vector::new(a)?);
    }
    let pred = acts.last().expect("nonempty");
    if pred.len() != y.len() {
        return Err(Error::Shape(format!(
            "prediction length {} does not match target length {}",
            pred.len(),
            y.len()
        )));
    }
    let (loss, mut grad_a) = loss_and_output_grad(pred.data(), y.data(), kind);

    // Reverse sweep.
    for (l, layer) in net.layers().iter().enumerate().rev() {
        let z = &zs[l];
        let a_in = &acts[l];
        let mut delta = vec![0.0; z.len()];
        for j in 0..z.len() {
            delta[j] = grad_a[j] * layer.activation.derivative(z.get(j))?;
        }
        let dw = &mut acc.dw[l];
        let cols = layer.weights.cols();
        for (j, &dj) in delta.iter().enumerate() {
            let scaled = w_scale * dj;
            for (i, &ai) in a_in.data().iter().enumerate() {
                dw[j * cols + i] += scaled * ai;
            }
            acc.db[l][j] += scaled;
        }
        let mut next = vec![0.0; layer.in_dim()];
        for (j, &dj) in delta.iter().enumerate() {
            for (i, slot) in next.iter_mut().enumerate() {
                *slot += layer.weights.get(j, i) * dj;
            }
        }
        grad_a = next;
    }
    if grad_a.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFinite("input gradient".into()));
    }
    Ok((loss, Vector::new(grad_a)?))
}

/// Sign with `sign(0) = 0`, the convention for adversarial steps.
pub(crate) fn grad_sign(g: f64) -> f64 {
    if g > 0.0 {
        1.0
    } else if g < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn validate_batch(net: &Network, xs: &[Vector], ys: &[Vector]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!(
            "{} inputs vs {} targets",
            xs.len(),
            ys.len()
        )));
    }
    let out = net.output_dim();
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        if x.len() != net.input_dim() || y.len() != out {
            return Err(Error::Shape(format!("sample {i} has mismatched shape")));
        }
    }
    Ok(())
}

/// Total configured loss on a batch together with its exact analytic
/// gradient, averaged over the batch. The returned `dx` holds each sample's
/// task-loss input gradient.
pub fn backward(
    net: &Network,
    xs: &[Vector],
    ys: &[Vector],
    cfg: &LossConfig,
) -> Result<(f64, Gradients)> {
    validate_batch(net, xs, ys)?;
    let n = xs.len() as f64;
    let mut acc = Accum::new(net);
    let mut dxs = Vec::with_capacity(xs.len());
    let mut task_sum = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let (li, dx) = sample_pass(net, x, y, cfg.task, 1.0 / n, &mut acc)?;
        task_sum += li;
        dxs.push(dx);
    }
    let mut loss = task_sum / n;

    if cfg.lambda > 0.0 {
        let con = cfg.constraint.as_ref().ok_or_else(|| {
            Error::Config("constraint penalty enabled without a constraint".into())
        })?;
        let theta = net.flat_params();
        loss += cfg.lambda * diophantine_loss(&con.poly, &theta, &con.map, &con.selector)?;
        let g = diophantine_loss_grad(&con.poly, &theta, &con.map, &con.selector)?;
        acc.add_flat(&g, cfg.lambda);
    }

    if cfg.gamma > 0.0 {
        let mut adv_sum = 0.0;
        for ((x, y), dx) in xs.iter().zip(ys).zip(&dxs) {
            let perturbed: Vec<f64> = x
                .data()
                .iter()
                .zip(dx.data())
                .map(|(&xi, &gi)| xi + cfg.epsilon * grad_sign(gi))
                .collect();
            let xp = Vector::new(perturbed)?;
            let (li, _) = sample_pass(net, &xp, y, cfg.task, cfg.gamma / n, &mut acc)?;
            adv_sum += li;
        }
        loss += cfg.gamma * adv_sum / n;
    }

    if !loss.is_finite() {
        return Err(Error::NonFinite("total loss".into()));
    }
    Ok((loss, acc.into_gradients(net, dxs)?))
}

/// Gradient of the per-sample task loss with respect to the input.
pub fn input_gradient(net: &Network, x: &Vector, y: &Vector, kind: TaskKind) -> Result<Vector> {
    let mut acc = Accum::new(net);
    let (_, dx) = sample_pass(net, x, y, kind, 0.0, &mut acc)?;
    Ok(dx)
}

/// Central-difference approximation of every parameter partial of the total
/// loss: `(L(θ + h·eᵢ) − L(θ − h·eᵢ)) / 2h`.
pub fn finite_diff_grad(
    net: &Network,
    xs: &[Vector],
    ys: &[Vector],
    cfg: &LossConfig,
    h: f64,
) -> Result<Gradients> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::Domain(format!("step size must be positive, got {h}")));
    }
    let theta = net.flat_params();
    let mut work = net.clone();
    let mut flat = vec![0.0; theta.len()];
    let mut probe = theta.clone();
    for i in 0..theta.len() {
        probe[i] = theta[i] + h;
        work.set_flat_params(&probe)?;
        let up = backward(&work, xs, ys, cfg)?.0;
        probe[i] = theta[i] - h;
        work.set_flat_params(&probe)?;
        let down = backward(&work, xs, ys, cfg)?.0;
        probe[i] = theta[i];
        flat[i] = (up - down) / (2.0 * h);
    }
    Gradients::from_flat(net, &flat)
}
