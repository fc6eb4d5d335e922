//! Loss composition, adversarial example generation, and the gradient
//! descent loop in its two modes: `normal` (plain steps) and `diophantine`
//! (every update followed by integer projection of all parameters).
//!
//! Training is plain η-scaled gradient descent — no momentum or adaptivity —
//! so first-step golden values are exact. All randomness (batch shuffling)
//! flows from the seeded generator, making runs bit-reproducible.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::constraints::encoding::{
    constraint_residual, project_network, EncodingMap, ParamSelector,
};
use crate::constraints::lll::lll_init;
use crate::constraints::poly::DiophantinePolynomial;
use crate::error::{Error, Result};
use crate::grad::{backward, grad_sign, input_gradient};
use crate::linalg::{axpy, axpy_vec, Vector};
use crate::network::Network;

/// Which task loss drives training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    Mse,
    CrossEntropy,
}

/// Whether parameter updates are followed by integer projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Normal,
    Diophantine,
}

/// The constraint polynomial, its encoding, and which parameters feed it.
#[derive(Debug, Clone)]
pub struct ConstraintSpec {
    pub poly: DiophantinePolynomial,
    pub map: EncodingMap,
    pub selector: ParamSelector,
}

/// Composition of the training loss
/// `L_task + λ·L_constraint + γ·L_adversarial`.
#[derive(Debug, Clone)]
pub struct LossConfig {
    pub task: TaskKind,
    pub lambda: f64,
    pub gamma: f64,
    /// Adversarial step size; at 0 the adversarial copy degenerates to the
    /// clean batch.
    pub epsilon: f64,
    pub constraint: Option<ConstraintSpec>,
}

impl LossConfig {
    /// Plain mean-squared-error task loss, no penalty or adversarial term.
    pub fn mse() -> Self {
        Self {
            task: TaskKind::Mse,
            lambda: 0.0,
            gamma: 0.0,
            epsilon: 0.0,
            constraint: None,
        }
    }

    pub fn validate(&self, param_count: usize) -> Result<()> {
        for (name, v) in [
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("epsilon", self.epsilon),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if self.lambda > 0.0 && self.constraint.is_none() {
            return Err(Error::Config(
                "lambda > 0 requires a constraint polynomial".into(),
            ));
        }
        if let Some(con) = &self.constraint {
            let selected = con.selector.count(param_count);
            if con.poly.n_vars() != selected {
                return Err(Error::Config(format!(
                    "constraint polynomial has {} variables but {selected} parameters are selected",
                    con.poly.n_vars()
                )));
            }
            if let ParamSelector::Indices(ix) = &con.selector {
                if let Some(&bad) = ix.iter().find(|&&i| i >= param_count) {
                    return Err(Error::Config(format!(
                        "constraint selector index {bad} out of range for {param_count} parameters"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Gradient-descent hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainingConfig {
    pub eta: f64,
    pub epochs: usize,
    /// 0 means full batch.
    pub batch_size: usize,
    pub mode: Mode,
    pub seed: u64,
    /// Initialize parameters through lattice basis reduction before epoch 1.
    pub lll_init: bool,
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.eta.is_finite() || self.eta <= 0.0 {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.eta
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-epoch measurements, one CSV row each.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_acc: f64,
    pub val_loss: f64,
    pub val_acc: f64,
    pub adv_acc: f64,
    /// Exact integer residual `P(Φ(θ))²`; 0 when no constraint is configured.
    pub constraint_residual: f64,
}

/// Paired inputs and targets.
#[derive(Debug, Clone)]
pub struct Dataset {
    inputs: Vec<Vector>,
    targets: Vec<Vector>,
}

impl Dataset {
    pub fn new(inputs: Vec<Vector>, targets: Vec<Vector>) -> Result<Self> {
        if inputs.is_empty() {
            return Err(Error::Shape("empty dataset".into()));
        }
        if inputs.len() != targets.len() {
            return Err(Error::Shape(format!(
                "{} inputs vs {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        Ok(Self { inputs, targets })
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vector] {
        &self.inputs
    }

    pub fn targets(&self) -> &[Vector] {
        &self.targets
    }
}

/// Per-sample task loss: mean squared error over components, or
/// cross-entropy of logits via stabilized log-sum-exp.
pub fn task_loss(pred: &Vector, target: &Vector, kind: TaskKind) -> Result<f64> {
    if pred.len() != target.len() {
        return Err(Error::Shape(format!(
            "prediction length {} vs target length {}",
            pred.len(),
            target.len()
        )));
    }
    let loss = match kind {
        TaskKind::Mse => {
            let m = pred.len() as f64;
            pred.data()
                .iter()
                .zip(target.data())
                .map(|(p, t)| (p - t) * (p - t) / m)
                .sum()
        }
        TaskKind::CrossEntropy => {
            let logits = pred.data();
            let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let lse = max + logits.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
            lse - logits
                .iter()
                .zip(target.data())
                .map(|(p, t)| p * t)
                .sum::<f64>()
        }
    };
    if !loss.is_finite() {
        return Err(Error::NonFinite("task loss".into()));
    }
    Ok(loss)
}

/// Whether a prediction counts as correct: within 0.5 of the target in every
/// component for regression, matching argmax for classification.
pub fn sample_correct(pred: &Vector, target: &Vector, kind: TaskKind) -> bool {
    match kind {
        TaskKind::Mse => pred
            .data()
            .iter()
            .zip(target.data())
            .all(|(p, t)| (p - t).abs() <= 0.5),
        TaskKind::CrossEntropy => argmax(pred.data()) == argmax(target.data()),
    }
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Mean task loss and accuracy of a network over a dataset.
pub fn evaluate(net: &Network, data: &Dataset, kind: TaskKind) -> Result<(f64, f64)> {
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (x, y) in data.inputs.iter().zip(&data.targets) {
        let pred = net.forward(x)?;
        loss += task_loss(&pred, y, kind)?;
        if sample_correct(&pred, y, kind) {
            correct += 1;
        }
    }
    let n = data.len() as f64;
    Ok((loss / n, correct as f64 / n))
}

/// Fast-gradient-sign perturbation `x′ = x + ε·sign(∇ₓ L_task)`, with
/// `sign(0) = 0`, so `‖x′ − x‖_∞ ≤ ε` exactly.
pub fn adversarial_perturb(
    net: &Network,
    x: &Vector,
    y: &Vector,
    epsilon: f64,
    kind: TaskKind,
) -> Result<Vector> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::Domain(format!(
            "adversarial step size must be nonnegative, got {epsilon}"
        )));
    }
    if epsilon == 0.0 {
        return Ok(x.clone());
    }
    let dx = input_gradient(net, x, y, kind)?;
    let data = x
        .data()
        .iter()
        .zip(dx.data())
        .map(|(&xi, &gi)| xi + epsilon * grad_sign(gi))
        .collect();
    Vector::new(data)
}

/// Total configured loss on a batch (the quantity whose gradient drives
/// updates). Single code path with [`backward`], so the two always agree.
pub fn total_loss(net: &Network, xs: &[Vector], ys: &[Vector], cfg: &LossConfig) -> Result<f64> {
    backward(net, xs, ys, cfg).map(|(loss, _)| loss)
}

fn epoch_metrics(
    net: &Network,
    train: &Dataset,
    val: &Dataset,
    epoch: usize,
    l_cfg: &LossConfig,
) -> Result<EpochMetrics> {
    let train_loss = total_loss(net, &train.inputs, &train.targets, l_cfg)?;
    let (_, train_acc) = evaluate(net, train, l_cfg.task)?;
    let (val_loss, val_acc) = evaluate(net, val, l_cfg.task)?;
    let mut adv_correct = 0usize;
    for (x, y) in val.inputs.iter().zip(&val.targets) {
        let xp = adversarial_perturb(net, x, y, l_cfg.epsilon, l_cfg.task)?;
        if sample_correct(&net.forward(&xp)?, y, l_cfg.task) {
            adv_correct += 1;
        }
    }
    let adv_acc = adv_correct as f64 / val.len() as f64;
    let constraint_residual = match &l_cfg.constraint {
        Some(con) => {
            constraint_residual(&con.poly, &net.flat_params(), &con.map, &con.selector)?
        }
        None => 0.0,
    };
    Ok(EpochMetrics {
        epoch,
        train_loss,
        train_acc,
        val_loss,
        val_acc,
        adv_acc,
        constraint_residual,
    })
}

fn apply_update(net: &mut Network, grads: &crate::grad::Gradients, eta: f64) -> Result<()> {
    for (layer, lg) in net.layers_mut().iter_mut().zip(&grads.layers) {
        layer.weights = axpy(-eta, &lg.dw, &layer.weights)?;
        layer.bias = axpy_vec(-eta, &lg.db, &layer.bias)?;
    }
    Ok(())
}

/// One pass over the training data: shuffled mini-batch gradient steps at
/// rate η, integer projection after every update in diophantine mode, then
/// metrics on both datasets.
pub fn train_epoch(
    net: &mut Network,
    train: &Dataset,
    val: &Dataset,
    epoch: usize,
    t_cfg: &TrainingConfig,
    l_cfg: &LossConfig,
    rng: &mut ChaCha8Rng,
) -> Result<EpochMetrics> {
    let n = train.len();
    let batch = if t_cfg.batch_size == 0 || t_cfg.batch_size > n {
        n
    } else {
        t_cfg.batch_size
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for (batch_idx, chunk) in order.chunks(batch).enumerate() {
        let xs: Vec<Vector> = chunk.iter().map(|&i| train.inputs[i].clone()).collect();
        let ys: Vec<Vector> = chunk.iter().map(|&i| train.targets[i].clone()).collect();
        let (loss, grads) = backward(net, &xs, &ys, l_cfg).map_err(|e| {
            Error::NonFinite(format!("epoch {epoch}, batch {batch_idx}: {e}"))
        })?;
        if !loss.is_finite() {
            return Err(Error::NonFinite(format!(
                "epoch {epoch}, batch {batch_idx}: loss diverged"
            )));
        }
        apply_update(net, &grads, t_cfg.eta)?;
        if t_cfg.mode == Mode::Diophantine {
            project_network(net)?;
        }
    }
    epoch_metrics(net, train, val, epoch, l_cfg)
}

/// Full training run: validates configs, optionally applies the
/// reduced-basis initializer, then repeats [`train_epoch`]. Deterministic
/// given the seed.
pub fn train(
    net: Network,
    train_data: &Dataset,
    val_data: &Dataset,
    t_cfg: &TrainingConfig,
    l_cfg: &LossConfig,
) -> Result<(Network, Vec<EpochMetrics>)> {
    t_cfg.validate()?;
    l_cfg.validate(net.param_count())?;
    let mut net = net;
    if t_cfg.lll_init {
        let map = l_cfg
            .constraint
            .as_ref()
            .map(|c| c.map)
            .unwrap_or_else(EncodingMap::identity);
        net = lll_init(&net, &map, 0.75)?.network;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(t_cfg.seed);
    let mut history = Vec::with_capacity(t_cfg.epochs);
    for epoch in 1..=t_cfg.epochs {
        let metrics = train_epoch(&mut net, train_data, val_data, epoch, t_cfg, l_cfg, &mut rng)?;
        history.push(metrics);
    }
    Ok((net, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::network::{Activation, Layer};

    fn scalar_net(w: f64, b: f64) -> Network {
        let layer = Layer::new(
            Matrix::new(1, 1, vec![w]).unwrap(),
            Vector::new(vec![b]).unwrap(),
            Activation::Identity,
        )
        .unwrap();
        Network::new(vec![layer]).unwrap()
    }

    fn line_data() -> Dataset {
        let xs = [1.0, 2.0, 3.0]
            .iter()
            .map(|&v| Vector::new(vec![v]).unwrap())
            .collect();
        let ys = [3.0, 5.0, 7.0]
            .iter()
            .map(|&v| Vector::new(vec![v]).unwrap())
            .collect();
        Dataset::new(xs, ys).unwrap()
    }

    fn full_batch(mode: Mode, eta: f64, epochs: usize) -> TrainingConfig {
        TrainingConfig {
            eta,
            epochs,
            batch_size: 0,
            mode,
            seed: 7,
            lll_init: false,
        }
    }

    #[test]
    fn task_loss_golden_values() {
        let zero = Vector::new(vec![0.0]).unwrap();
        let mut acc = 0.0;
        for t in [3.0, 5.0, 7.0] {
            acc += task_loss(&zero, &Vector::new(vec![t]).unwrap(), TaskKind::Mse).unwrap();
        }
        assert!((acc / 3.0 - 27.67).abs() < 0.01);
        let mut acc2 = 0.0;
        for t in [6.0, 11.0, 18.0] {
            acc2 += task_loss(&zero, &Vector::new(vec![t]).unwrap(), TaskKind::Mse).unwrap();
        }
        assert!((acc2 / 3.0 - 160.33).abs() < 0.01);
        let p = Vector::new(vec![1.5, -2.0]).unwrap();
        assert_eq!(task_loss(&p, &p, TaskKind::Mse).unwrap(), 0.0);
    }

    #[test]
    fn first_epoch_reproduces_the_line_fit() {
        let data = line_data();
        let mut net = scalar_net(0.0, 0.0);
        let t_cfg = full_batch(Mode::Normal, 0.1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(t_cfg.seed);
        train_epoch(&mut net, &data, &data, 1, &t_cfg, &LossConfig::mse(), &mut rng).unwrap();
        let w = net.layers()[0].weights.get(0, 0);
        let b = net.layers()[0].bias.get(0);
        assert!((w - 2.27).abs() < 0.01, "w = {w}");
        assert!((b - 1.0).abs() < 1e-9, "b = {b}");

        let mut dnet = scalar_net(0.0, 0.0);
        let d_cfg = full_batch(Mode::Diophantine, 0.1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(d_cfg.seed);
        train_epoch(&mut dnet, &data, &data, 1, &d_cfg, &LossConfig::mse(), &mut rng).unwrap();
        assert_eq!(dnet.layers()[0].weights.get(0, 0), 2.0);
        assert_eq!(dnet.layers()[0].bias.get(0), 1.0);
    }

    #[test]
    fn matrix_update_and_projection() {
        // One η = 0.01 step on a 2×2 weight with a fixed gradient.
        let grad = Matrix::from_rows(&[vec![0.1, -0.4], vec![0.3, 0.2]]).unwrap();
        let w = Matrix::from_rows(&[vec![2.5, -1.3], vec![0.7, 1.6]]).unwrap();
        let updated = axpy(-0.01, &grad, &w).unwrap();
        let expected = [2.499, -1.296, 0.697, 1.598];
        for (got, want) in updated.data().iter().zip(expected) {
            assert!((got - want).abs() < 1e-9);
        }
        let projected = crate::constraints::project_integers(updated.data());
        assert_eq!(projected, vec![2.0, -1.0, 1.0, 2.0]);
    }

    #[test]
    fn diophantine_mode_keeps_parameters_integral() {
        let data = line_data();
        let t_cfg = full_batch(Mode::Diophantine, 0.05, 5);
        let (net, history) =
            train(scalar_net(0.0, 0.0), &data, &data, &t_cfg, &LossConfig::mse()).unwrap();
        assert_eq!(history.len(), 5);
        for p in net.flat_params() {
            assert_eq!(p, p.trunc(), "non-integer parameter {p}");
        }
    }

    #[test]
    fn normal_mode_converges_to_the_exact_fit() {
        let data = line_data();
        let t_cfg = full_batch(Mode::Normal, 0.05, 2000);
        let (net, _) =
            train(scalar_net(0.0, 0.0), &data, &data, &t_cfg, &LossConfig::mse()).unwrap();
        let w = net.layers()[0].weights.get(0, 0);
        let b = net.layers()[0].bias.get(0);
        assert!((w - 2.0).abs() < 0.05, "w = {w}");
        assert!((b - 1.0).abs() < 0.05, "b = {b}");
    }

    #[test]
    fn perfect_init_stays_at_zero_loss() {
        let data = line_data();
        let t_cfg = full_batch(Mode::Normal, 0.1, 3);
        let (_, history) =
            train(scalar_net(2.0, 1.0), &data, &data, &t_cfg, &LossConfig::mse()).unwrap();
        for m in &history {
            assert_eq!(m.train_loss, 0.0);
            assert_eq!(m.train_acc, 1.0);
        }
    }

    #[test]
    fn loss_decomposes_into_parts() {
        let net = scalar_net(1.3, -0.4);
        let xs: Vec<Vector> = [0.5, -1.0]
            .iter()
            .map(|&v| Vector::new(vec![v]).unwrap())
            .collect();
        let ys: Vec<Vector> = [1.0, 0.0]
            .iter()
            .map(|&v| Vector::new(vec![v]).unwrap())
            .collect();
        let constraint = ConstraintSpec {
            poly: DiophantinePolynomial::parse("x1 + x2 - 1").unwrap(),
            map: EncodingMap::identity(),
            selector: ParamSelector::All,
        };
        let base = total_loss(&net, &xs, &ys, &LossConfig::mse()).unwrap();
        let dio_only = LossConfig {
            lambda: 1.0,
            constraint: Some(constraint.clone()),
            ..LossConfig::mse()
        };
        let l_dio = total_loss(&net, &xs, &ys, &dio_only).unwrap() - base;
        let adv_only = LossConfig {
            gamma: 1.0,
            epsilon: 0.2,
            ..LossConfig::mse()
        };
        let l_adv = total_loss(&net, &xs, &ys, &adv_only).unwrap() - base;
        let combined = LossConfig {
            lambda: 0.3,
            gamma: 0.7,
            epsilon: 0.2,
            constraint: Some(constraint),
            ..LossConfig::mse()
        };
        let got = total_loss(&net, &xs, &ys, &combined).unwrap();
        assert!((got - (base + 0.3 * l_dio + 0.7 * l_adv)).abs() < 1e-10);
    }

    #[test]
    fn degenerate_adversarial_copy_doubles_the_loss() {
        let net = scalar_net(1.3, -0.4);
        let xs = vec![Vector::new(vec![0.5]).unwrap()];
        let ys = vec![Vector::new(vec![1.0]).unwrap()];
        let base = total_loss(&net, &xs, &ys, &LossConfig::mse()).unwrap();
        let cfg = LossConfig {
            gamma: 1.0,
            epsilon: 0.0,
            ..LossConfig::mse()
        };
        let got = total_loss(&net, &xs, &ys, &cfg).unwrap();
        assert!((got - 2.0 * base).abs() < 1e-12);
    }

    #[test]
    fn adversarial_perturbation_examples() {
        let net = scalar_net(2.0, 0.0);
        let x = Vector::new(vec![1.0]).unwrap();
        let y0 = Vector::new(vec![0.0]).unwrap();
        assert_eq!(
            adversarial_perturb(&net, &x, &y0, 0.0, TaskKind::Mse).unwrap(),
            x
        );
        let xp = adversarial_perturb(&net, &x, &y0, 0.1, TaskKind::Mse).unwrap();
        assert!((xp.get(0) - 1.1).abs() < 1e-12);
        // Zero residual → zero gradient → unchanged input.
        let y_fit = Vector::new(vec![2.0]).unwrap();
        let fixed = adversarial_perturb(&net, &x, &y_fit, 0.1, TaskKind::Mse).unwrap();
        assert_eq!(fixed, x);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let data = line_data();
        let t_cfg = TrainingConfig {
            eta: 0.05,
            epochs: 8,
            batch_size: 2,
            mode: Mode::Normal,
            seed: 123,
            lll_init: false,
        };
        let run = || {
            train(scalar_net(0.0, 0.0), &data, &data, &t_cfg, &LossConfig::mse()).unwrap()
        };
        let (net_a, hist_a) = run();
        let (net_b, hist_b) = run();
        assert_eq!(net_a, net_b);
        assert_eq!(hist_a, hist_b);
    }

    #[test]
    fn config_validation() {
        assert!(full_batch(Mode::Normal, 0.0, 1).validate().is_err());
        assert!(full_batch(Mode::Normal, 0.1, 0).validate().is_err());
        let bad = LossConfig {
            lambda: 1.0,
            ..LossConfig::mse()
        };
        assert!(bad.validate(4).is_err());
        let wrong_arity = LossConfig {
            lambda: 1.0,
            constraint: Some(ConstraintSpec {
                poly: DiophantinePolynomial::parse("x1 + x2").unwrap(),
                map: EncodingMap::identity(),
                selector: ParamSelector::All,
            }),
            ..LossConfig::mse()
        };
        assert!(wrong_arity.validate(4).is_err());
    }
}
