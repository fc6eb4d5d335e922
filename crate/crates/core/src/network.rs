//! Feed-forward networks and their activation functions.
//!
//! Besides the standard activations (identity, relu, sigmoid), this module
//! implements the integer-equation activation family: an affine form
//! `(c − ax)/b`, a quadratic form `(c − ax² + bx − z)/d`, and an exponential
//! form `y = (x^a − k)^(1/b)`. Each carries a closed-form output bound and a
//! domain-aware Lipschitz constant, so downstream stability analysis can
//! certify rather than estimate.

use crate::error::{Error, Result};
use crate::linalg::{matvec, Matrix, Vector};

/// Activation function applied elementwise after each affine layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    /// `x ↦ (c − ax)/b`, requires `b ≠ 0`.
    DioLinear { a: f64, b: f64, c: f64 },
    /// `x ↦ (c − ax² + bx − z)/d`, requires `d ≠ 0`.
    DioQuadratic { a: f64, b: f64, c: f64, z: f64, d: f64 },
    /// `x ↦ (x^a − k)^(1/b)` on the domain `x^a ≥ k`; `a, b ≥ 1`.
    DioExponential { a: u32, b: u32, k: f64 },
}

impl Activation {
    /// Check parameter invariants (non-zero denominators, positive integer
    /// exponents, finite constants).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Activation::Identity | Activation::Relu | Activation::Sigmoid => Ok(()),
            Activation::DioLinear { a, b, c } => {
                if !(a.is_finite() && b.is_finite() && c.is_finite()) {
                    return Err(Error::NonFinite("dio_linear parameter".into()));
                }
                if b == 0.0 {
                    return Err(Error::Domain("dio_linear requires b != 0".into()));
                }
                Ok(())
            }
            Activation::DioQuadratic { a, b, c, z, d } => {
                if ![a, b, c, z, d].iter().all(|v| v.is_finite()) {
                    return Err(Error::NonFinite("dio_quadratic parameter".into()));
                }
                if d == 0.0 {
                    return Err(Error::Domain("dio_quadratic requires d != 0".into()));
                }
                Ok(())
            }
            Activation::DioExponential { a, b, k } => {
                if !k.is_finite() {
                    return Err(Error::NonFinite("dio_exponential parameter".into()));
                }
                if a == 0 || b == 0 {
                    return Err(Error::Domain(
                        "dio_exponential requires positive integer exponents".into(),
                    ));
                }
                Ok(())
            }
        }
    }

    /// Evaluate the activation at a scalar input.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let y = match *self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::Sigmoid => sigmoid(x),
            Activation::DioLinear { a, b, c } => (c - a * x) / b,
            Activation::DioQuadratic { a, b, c, z, d } => (c - a * x * x + b * x - z) / d,
            Activation::DioExponential { a, b, k } => {
                let u = x.powi(a as i32) - k;
                if u < 0.0 {
                    return Err(Error::Domain(format!(
                        "dio_exponential undefined at x = {x}: x^{a} < {k}"
                    )));
                }
                u.powf(1.0 / f64::from(b))
            }
        };
        if !y.is_finite() {
            return Err(Error::NonFinite(format!("activation output at x = {x}")));
        }
        Ok(y)
    }

    /// Derivative at a scalar input (relu takes subgradient 0 at the kink).
    pub fn derivative(&self, x: f64) -> Result<f64> {
        let d = match *self {
            Activation::Identity => 1.0,
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            Activation::DioLinear { a, b, .. } => -a / b,
            Activation::DioQuadratic { a, b, d, .. } => (-2.0 * a * x + b) / d,
            Activation::DioExponential { a, b, .. } => {
                let y = self.eval(x)?;
                let af = f64::from(a);
                let bf = f64::from(b);
                af * x.powi(a as i32 - 1) / (bf * y.powf(bf - 1.0))
            }
        };
        if !d.is_finite() {
            return Err(Error::NonFinite(format!(
                "activation derivative at x = {x}"
            )));
        }
        Ok(d)
    }

    /// Certified output bound: a value `B` with `|φ(x)| ≤ B` for every valid
    /// input with `|x| ≤ M`. Exact for the affine form (`(|c| + |a|M)/|b|`);
    /// the closed-form supremum over `[−M, M]` for the other integer-equation
    /// kinds. Only defined for the integer-equation kinds.
    pub fn bound(&self, m: f64) -> Result<f64> {
        check_radius(m)?;
        match *self {
            Activation::DioLinear { a, b, c } => Ok((c.abs() + a.abs() * m) / b.abs()),
            Activation::DioQuadratic { a, b, c, z, d } => {
                // |quadratic| over a closed interval peaks at an endpoint or
                // at the parabola's vertex.
                let phi = |x: f64| (c - a * x * x + b * x - z) / d;
                let mut best = phi(-m).abs().max(phi(m).abs());
                if a != 0.0 {
                    let v = b / (2.0 * a);
                    if v.abs() <= m {
                        best = best.max(phi(v).abs());
                    }
                }
                Ok(best)
            }
            Activation::DioExponential { a, b, k } => {
                // φ = (x^a − k)^(1/b) is nonnegative and increasing in x^a,
                // whose maximum over [−M, M] is M^a.
                let top = m.powi(a as i32) - k;
                if top < 0.0 {
                    return Err(Error::Domain(format!(
                        "dio_exponential has empty domain on [-{m}, {m}]"
                    )));
                }
                Ok(top.powf(1.0 / f64::from(b)))
            }
            _ => Err(Error::Unsupported(
                "output bound is defined for the integer-equation activations only".into(),
            )),
        }
    }

    /// Supremum of `|φ′|` over the valid domain within `[−M, M]`. Constant
    /// `|a|/|b|` for the affine form; `(2|a|M + |b|)/|d|` for the quadratic;
    /// for the exponential form the exact supremum of
    /// `a·x^(a−1) / (b·y^(b−1))`, which is infinite when the domain touches
    /// `y = 0` with `b > 1` (returned as `f64::INFINITY`).
    pub fn lipschitz_constant(&self, m: f64) -> Result<f64> {
        check_radius(m)?;
        match *self {
            Activation::Identity | Activation::Relu => Ok(1.0),
            Activation::Sigmoid => Ok(0.25),
            Activation::DioLinear { a, b, .. } => Ok(a.abs() / b.abs()),
            Activation::DioQuadratic { a, b, d, .. } => {
                Ok((2.0 * a.abs() * m + b.abs()) / d.abs())
            }
            Activation::DioExponential { a, b, k } => exponential_lipschitz(a, b, k, m),
        }
    }

    /// True for the integer-equation activation kinds.
    pub fn is_diophantine(&self) -> bool {
        matches!(
            self,
            Activation::DioLinear { .. }
                | Activation::DioQuadratic { .. }
                | Activation::DioExponential { .. }
        )
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn check_radius(m: f64) -> Result<()> {
    if !m.is_finite() || m < 0.0 {
        return Err(Error::Domain(format!(
            "input radius must be finite and nonnegative, got {m}"
        )));
    }
    Ok(())
}

/// Exact supremum of the exponential activation's derivative magnitude over
/// `{x ∈ [−M, M] : x^a ≥ k}`.
fn exponential_lipschitz(a: u32, b: u32, k: f64, m: f64) -> Result<f64> {
    let af = f64::from(a);
    let bf = f64::from(b);
    let max_u = m.powi(a as i32); // max of x^a over [−M, M]
    if max_u < k {
        return Err(Error::Domain(format!(
            "dio_exponential has empty domain on [-{m}, {m}]"
        )));
    }
    // min of x^a over [−M, M]: 0 for even a, −M^a for odd a.
    let min_u = if a.is_multiple_of(2) { 0.0 } else { -max_u };

    if b == 1 {
        // φ′ = a·x^(a−1); |x| ≤ M attains the sup at the radius.
        return Ok(af * m.powi(a as i32 - 1));
    }
    if k >= min_u {
        // The domain touches y = 0 where x^a = k. With b > 1 the derivative
        // blows up there unless the numerator vanishes simultaneously, which
        // happens only at k = 0 with a ≥ b: then φ′ = (a/b)·|x|^(a/b − 1),
        // maximal at the radius.
        if k == 0.0 && a >= b {
            return Ok(af / bf * m.powf(af / bf - 1.0));
        }
        return Ok(f64::INFINITY);
    }
    // Domain is all of [−M, M] with x^a − k > 0 throughout; maximize
    // g(x) = a·|x|^(a−1) / (b·(x^a − k)^((b−1)/b)). Stationarity of log g
    // gives the single interior candidate x^a = b(a−1)k/(a−b).
    let g = |x: f64| {
        af * x.abs().powi(a as i32 - 1) / (bf * (x.powi(a as i32) - k).powf((bf - 1.0) / bf))
    };
    let mut best = g(-m).max(g(m));
    if a != b && a > 1 {
        let u_star = bf * (af - 1.0) * k / (af - bf);
        let r = u_star.abs().powf(1.0 / af);
        let candidates: &[f64] = if a.is_multiple_of(2) {
            if u_star >= 0.0 {
                &[r]
            } else {
                &[] // x^a = u* has no real solution for even a
            }
        } else {
            &[]
        };
        for &x in candidates {
            if x <= m {
                best = best.max(g(x)).max(g(-x));
            }
        }
        if a % 2 == 1 {
            let x = u_star.signum() * r;
            if x.abs() <= m {
                best = best.max(g(x));
            }
        }
    }
    Ok(best)
}

/// One dense layer: `x ↦ φ(Wx + b)` applied elementwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weights: Matrix,
    pub bias: Vector,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: Matrix, bias: Vector, activation: Activation) -> Result<Self> {
        if bias.len() != weights.rows() {
            return Err(Error::Shape(format!(
                "bias length {} does not match weight rows {}",
                bias.len(),
                weights.rows()
            )));
        }
        activation.validate()?;
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    /// Affine part `Wx + b` (pre-activation).
    pub fn affine(&self, x: &Vector) -> Result<Vector> {
        let wx = matvec(&self.weights, x)?;
        crate::linalg::axpy_vec(1.0, &wx, &self.bias)
    }

    /// Full layer map `φ(Wx + b)`.
    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        let z = self.affine(x)?;
        let mut out = Vec::with_capacity(z.len());
        for &v in z.data() {
            out.push(self.activation.eval(v)?);
        }
        Vector::new(out)
    }
}

/// Feed-forward network: an ordered chain of dense layers.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layers: Vec<Layer>,
}

impl Network {
    /// Build from layers, checking that consecutive dimensions chain.
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Shape("network needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[1].in_dim() != pair[0].out_dim() {
                return Err(Error::Shape(format!(
                    "layer {} outputs {} values but layer {} expects {}",
                    i,
                    pair[0].out_dim(),
                    i + 1,
                    pair[1].in_dim()
                )));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    /// Mutable layer access for optimizers; callers must preserve shapes.
    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Forward pass through all layers.
    pub fn forward(&self, x: &Vector) -> Result<Vector> {
        if x.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input length {} does not match network input dim {}",
                x.len(),
                self.input_dim()
            )));
        }
        let mut a = x.clone();
        for layer in &self.layers {
            a = layer.apply(&a)?;
        }
        Ok(a)
    }

    /// Total number of scalar parameters (weights + biases).
    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.data().len() + l.bias.len())
            .sum()
    }

    /// Flatten all parameters into one vector: per layer, weights in
    /// row-major order followed by the bias.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for layer in &self.layers {
            out.extend_from_slice(layer.weights.data());
            out.extend_from_slice(layer.bias.data());
        }
        out
    }

    /// Write back a parameter vector laid out as by [`Network::flat_params`].
    pub fn set_flat_params(&mut self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.param_count() {
            return Err(Error::Shape(format!(
                "parameter vector length {} does not match network's {}",
                theta.len(),
                self.param_count()
            )));
        }
        let mut off = 0;
        for layer in &mut self.layers {
            let w_len = layer.weights.data().len();
            layer.weights = Matrix::new(
                layer.weights.rows(),
                layer.weights.cols(),
                theta[off..off + w_len].to_vec(),
            )?;
            off += w_len;
            let b_len = layer.bias.len();
            layer.bias = Vector::new(theta[off..off + b_len].to_vec())?;
            off += b_len;
        }
        Ok(())
    }
}
