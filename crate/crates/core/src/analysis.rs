//! Stability and robustness measurements over trained networks: Monte-Carlo
//! output variance under Gaussian input noise, certified Lipschitz upper
//! bounds with per-layer input ranges propagated forward, adversarial
//! accuracy, and error-propagation traces that compare observed perturbation
//! growth against the certified per-layer bounds.
//!
//! Bounds here are conservative by construction: weight matrices contribute
//! their Frobenius norm (an upper bound on the spectral norm) and activations
//! contribute their Lipschitz constant over a certified pre-activation range,
//! so `within_bounds` failures indicate a real defect, not estimation noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::constraints::encoding::EncodingMap;
use crate::constraints::poly::DiophantinePolynomial;
use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::network::{Activation, Layer, Network};
use crate::training::{adversarial_perturb, sample_correct, Dataset, TaskKind};

/// Monte-Carlo estimate of `E[‖N(x+δ) − N(x)‖²]` with `δ` drawn
/// coordinatewise from a zero-mean Gaussian at scale `sigma`.
/// Deterministic under the seed.
pub fn output_variance(
    net: &Network,
    x: &Vector,
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::Domain(format!(
            "perturbation scale must be finite and nonnegative, got {sigma}"
        )));
    }
    if samples == 0 {
        return Err(Error::Domain("variance estimate needs at least one sample".into()));
    }
    let base = net.forward(x)?;
    if sigma == 0.0 {
        return Ok(0.0);
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::Domain(format!("invalid Gaussian scale: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..samples {
        let perturbed: Vec<f64> = x
            .data()
            .iter()
            .map(|&xi| xi + normal.sample(&mut rng))
            .collect();
        let out = net.forward(&Vector::new(perturbed)?)?;
        let dist_sq: f64 = out
            .data()
            .iter()
            .zip(base.data())
            .map(|(o, b)| (o - b) * (o - b))
            .sum();
        acc += dist_sq;
    }
    Ok(acc / samples as f64)
}

/// Largest row sum of absolute entries: the ℓ∞ operator norm of the weight
/// matrix, used to propagate certified input ranges forward.
fn max_row_abs_sum(layer: &Layer) -> f64 {
    let w = &layer.weights;
    let mut best = 0.0f64;
    for r in 0..w.rows() {
        let s: f64 = (0..w.cols()).map(|c| w.get(r, c).abs()).sum();
        best = best.max(s);
    }
    best
}

/// Activation Lipschitz constant over the certified pre-activation range and
/// the certified output magnitude, for a layer whose inputs lie in
/// `[−radius, radius]` componentwise. An empty activation domain inside the
/// certified range yields infinite values (vacuously valid bounds) rather
/// than an error.
fn layer_gain(layer: &Layer, radius: f64) -> Result<(f64, f64)> {
    if !radius.is_finite() {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let z_rad = max_row_abs_sum(layer) * radius + layer.bias.max_abs();
    let lip = match layer.activation.lipschitz_constant(z_rad) {
        Ok(l) => l,
        Err(Error::Domain(_)) => f64::INFINITY,
        Err(e) => return Err(e),
    };
    let out_rad = match layer.activation {
        Activation::Identity | Activation::Relu => z_rad,
        Activation::Sigmoid => 1.0,
        _ => match layer.activation.bound(z_rad) {
            Ok(b) => b,
            Err(Error::Domain(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        },
    };
    Ok((lip, out_rad))
}

/// Per-layer factor `L_φ · ‖W‖_F`, with a constant layer (zero weights)
/// contributing 0 regardless of the activation's Lipschitz constant.
fn layer_factor(lip: f64, frobenius: f64) -> f64 {
    if frobenius == 0.0 {
        0.0
    } else {
        lip * frobenius
    }
}

/// Certified upper bound on `‖N(x₁) − N(x₂)‖ / ‖x₁ − x₂‖` over inputs with
/// `‖x‖_∞ ≤ m`: the product over layers of the activation Lipschitz constant
/// (on the forward-propagated pre-activation range) times the Frobenius norm
/// of the weights. May be infinite when an activation has unbounded slope on
/// its certified range.
pub fn network_lipschitz_upper(net: &Network, m: f64) -> Result<f64> {
    if !m.is_finite() || m < 0.0 {
        return Err(Error::Domain(format!(
            "input radius must be finite and nonnegative, got {m}"
        )));
    }
    let mut radius = m;
    let mut product = 1.0;
    for layer in net.layers() {
        let (lip, out_rad) = layer_gain(layer, radius)?;
        product *= layer_factor(lip, layer.weights.frobenius_sq().sqrt());
        radius = out_rad;
    }
    Ok(product)
}

/// Accuracy measured on adversarially perturbed inputs at step size `epsilon`
/// (equals clean accuracy at `epsilon = 0`).
pub fn adversarial_accuracy(
    net: &Network,
    data: &Dataset,
    epsilon: f64,
    kind: TaskKind,
) -> Result<f64> {
    let mut correct = 0usize;
    for (x, y) in data.inputs().iter().zip(data.targets()) {
        let xp = adversarial_perturb(net, x, y, epsilon, kind)?;
        if sample_correct(&net.forward(&xp)?, y, kind) {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Forward trace of how an input perturbation grows or shrinks through the
/// layers, against certified per-layer bounds.
#[derive(Debug, Clone)]
pub struct ErrorPropagationReport {
    /// Observed `‖a′_l − a_l‖ / ‖a′_{l−1} − a_{l−1}‖` per layer (0 when the
    /// perturbation has already died out).
    pub ratios: Vec<f64>,
    /// Certified per-layer bound `L_φ · ‖W‖_F`.
    pub layer_bounds: Vec<f64>,
    /// Product of the per-layer bounds: the weight-aware network bound.
    pub product_bound: f64,
    /// Product of the activation constants alone, ignoring weight norms.
    pub activation_product: f64,
    /// Whether every observed ratio respects its certified bound.
    pub within_bounds: bool,
}

/// Runs the clean and perturbed forward passes side by side and records the
/// per-layer amplification of the difference. The activation Lipschitz
/// constant for each layer is taken over the wider of `m` and the observed
/// pre-activation magnitudes, so the certificate covers the segment between
/// both trajectories.
pub fn error_propagation_report(
    net: &Network,
    x: &Vector,
    delta: &Vector,
    m: f64,
) -> Result<ErrorPropagationReport> {
    if delta.len() != x.len() {
        return Err(Error::Shape(format!(
            "perturbation length {} vs input length {}",
            delta.len(),
            x.len()
        )));
    }
    if delta.norm() == 0.0 {
        return Err(Error::Domain(
            "error propagation needs a nonzero perturbation".into(),
        ));
    }
    if !m.is_finite() || m < 0.0 {
        return Err(Error::Domain(format!(
            "input radius must be finite and nonnegative, got {m}"
        )));
    }
    let mut clean = x.clone();
    let mut pert = Vector::new(
        x.data()
            .iter()
            .zip(delta.data())
            .map(|(a, d)| a + d)
            .collect(),
    )?;
    let mut ratios = Vec::with_capacity(net.layers().len());
    let mut layer_bounds = Vec::with_capacity(net.layers().len());
    let mut product_bound = 1.0;
    let mut activation_product = 1.0;
    let mut within_bounds = true;
    for layer in net.layers() {
        let z_clean = layer.affine(&clean)?;
        let z_pert = layer.affine(&pert)?;
        let observed = z_clean.max_abs().max(z_pert.max_abs());
        let lip = match layer.activation.lipschitz_constant(m.max(observed)) {
            Ok(l) => l,
            Err(Error::Domain(_)) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        let activate = |z: &Vector| -> Result<Vector> {
            Vector::new(
                z.data()
                    .iter()
                    .map(|&v| layer.activation.eval(v))
                    .collect::<Result<Vec<f64>>>()?,
            )
        };
        let a_clean = activate(&z_clean)?;
        let a_pert = activate(&z_pert)?;
        let diff_in: f64 = clean
            .data()
            .iter()
            .zip(pert.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let diff_out: f64 = a_clean
            .data()
            .iter()
            .zip(a_pert.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let ratio = if diff_in == 0.0 { 0.0 } else { diff_out / diff_in };
        let bound = layer_factor(lip, layer.weights.frobenius_sq().sqrt());
        within_bounds &= ratio <= bound + 1e-9;
        ratios.push(ratio);
        layer_bounds.push(bound);
        product_bound *= bound;
        activation_product *= lip;
        clean = a_clean;
        pert = a_pert;
    }
    Ok(ErrorPropagationReport {
        ratios,
        layer_bounds,
        product_bound,
        activation_product,
        within_bounds,
    })
}

/// Output variance and certified Lipschitz bound for one network, side by
/// side.
#[derive(Debug, Clone)]
pub struct StabilityReport {
    pub variance: f64,
    pub lipschitz_upper: f64,
    pub samples: usize,
    pub sigma: f64,
}

/// Measures [`output_variance`] and [`network_lipschitz_upper`] (at input
/// radius `m`) for one network.
pub fn stability_report(
    net: &Network,
    x: &Vector,
    sigma: f64,
    samples: usize,
    seed: u64,
    m: f64,
) -> Result<StabilityReport> {
    Ok(StabilityReport {
        variance: output_variance(net, x, sigma, samples, seed)?,
        lipschitz_upper: network_lipschitz_upper(net, m)?,
        samples,
        sigma,
    })
}

/// Fraction of Gaussian parameter perturbations that still satisfy the
/// constraint after integer encoding: samples `θ + δ`, encodes it, and counts
/// how often `P` evaluates to zero. A dimension-count experiment, not a
/// proof.
pub fn restricted_perturbation_fraction(
    poly: &DiophantinePolynomial,
    map: &EncodingMap,
    theta: &[f64],
    sigma: f64,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if theta.len() != poly.n_vars() {
        return Err(Error::Shape(format!(
            "{} parameters vs {} polynomial variables",
            theta.len(),
            poly.n_vars()
        )));
    }
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::Domain(format!(
            "perturbation scale must be finite and nonnegative, got {sigma}"
        )));
    }
    if samples == 0 {
        return Err(Error::Domain("fraction estimate needs at least one sample".into()));
    }
    if sigma == 0.0 {
        let value = poly.eval_int(&map.encode(theta))?;
        return Ok(if value == 0 { 1.0 } else { 0.0 });
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::Domain(format!("invalid Gaussian scale: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut surviving = 0usize;
    for _ in 0..samples {
        let shifted: Vec<f64> = theta
            .iter()
            .map(|&t| t + normal.sample(&mut rng))
            .collect();
        if poly.eval_int(&map.encode(&shifted))? == 0 {
            surviving += 1;
        }
    }
    Ok(surviving as f64 / samples as f64)
}
