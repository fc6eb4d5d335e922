//! The fixed-point encoding map, integer projection, and constraint penalty.
//!
//! Real parameters enter integer space through `encode(θ) = round(s·θ)` and
//! come back through `decode(x) = x/s`. Rounding is to the nearest integer
//! with ties resolved toward zero, everywhere (projection and encoding share
//! the rule). The constraint penalty is evaluated on the smooth pre-rounding
//! embedding `P(s·θ)²` so it stays differentiable; exact integrality is the
//! projection step's job.

use crate::constraints::poly::DiophantinePolynomial;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::network::Network;

/// Round to the nearest integer, ties toward zero: 2.27 → 2, 3.5 → 3,
/// 0.697 → 1, −1.5 → −1, −2.7 → −3.
pub fn round_to_int(x: f64) -> f64 {
    let t = x.trunc();
    let frac = x - t;
    if frac.abs() > 0.5 {
        t + frac.signum()
    } else {
        t
    }
}

/// Coordinatewise nearest-integer projection (ties toward zero); idempotent.
pub fn project_integers(theta: &[f64]) -> Vec<f64> {
    theta.iter().map(|&t| round_to_int(t)).collect()
}

/// Apply [`project_integers`] to every weight and bias of a network in place.
pub fn project_network(net: &mut Network) -> Result<()> {
    for layer in net.layers_mut() {
        let w = &layer.weights;
        layer.weights = Matrix::new(w.rows(), w.cols(), project_integers(w.data()))?;
        layer.bias = Vector::new(project_integers(layer.bias.data()))?;
    }
    Ok(())
}

/// Fixed-point encoding `Φ(θ) = round(s·θ)` with decode `x ↦ x/s`.
///
/// The rounding rule is fixed (nearest, ties toward zero), so equal inputs
/// always produce equal integer vectors, and `decode(encode(θ))` deviates
/// from `θ` by at most `1/(2s)` per coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingMap {
    scale: f64,
}

impl EncodingMap {
    pub fn new(scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale <= 0.0 {
            return Err(Error::Domain(format!(
                "encoding scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self { scale })
    }

    /// Scale 1: encoding coincides with plain integer projection.
    pub fn identity() -> Self {
        Self { scale: 1.0 }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn encode(&self, theta: &[f64]) -> Vec<i64> {
        theta
            .iter()
            .map(|&t| round_to_int(self.scale * t) as i64)
            .collect()
    }

    pub fn decode(&self, x: &[i64]) -> Vec<f64> {
        x.iter().map(|&v| v as f64 / self.scale).collect()
    }
}

impl Default for EncodingMap {
    fn default() -> Self {
        Self::identity()
    }
}

/// Which flattened parameters feed the constraint polynomial.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamSelector {
    /// The whole flattened parameter vector, in order.
    All,
    /// An explicit list of flattened-parameter indices.
    Indices(Vec<usize>),
}

impl ParamSelector {
    /// Number of selected coordinates given the full parameter count.
    pub fn count(&self, total: usize) -> usize {
        match self {
            ParamSelector::All => total,
            ParamSelector::Indices(ix) => ix.len(),
        }
    }

    /// Extract the selected coordinates.
    pub fn gather(&self, theta: &[f64]) -> Result<Vec<f64>> {
        match self {
            ParamSelector::All => Ok(theta.to_vec()),
            ParamSelector::Indices(ix) => ix
                .iter()
                .map(|&i| {
                    theta.get(i).copied().ok_or_else(|| {
                        Error::Shape(format!(
                            "selector index {i} out of range for {} parameters",
                            theta.len()
                        ))
                    })
                })
                .collect(),
        }
    }

    /// Add a gradient over the selected coordinates back into a full-length
    /// gradient vector.
    pub fn scatter_add(&self, sub: &[f64], out: &mut [f64]) -> Result<()> {
        match self {
            ParamSelector::All => {
                if sub.len() != out.len() {
                    return Err(Error::Shape(format!(
                        "scatter length {} vs {}",
                        sub.len(),
                        out.len()
                    )));
                }
                for (o, s) in out.iter_mut().zip(sub) {
                    *o += s;
                }
                Ok(())
            }
            ParamSelector::Indices(ix) => {
                if sub.len() != ix.len() {
                    return Err(Error::Shape(format!(
                        "scatter length {} vs selector length {}",
                        sub.len(),
                        ix.len()
                    )));
                }
                for (&i, s) in ix.iter().zip(sub) {
                    let slot = out.get_mut(i).ok_or_else(|| {
                        Error::Shape(format!("selector index {i} out of range"))
                    })?;
                    *slot += s;
                }
                Ok(())
            }
        }
    }
}

/// Constraint penalty on the smooth embedding: `P(s·θ_sel)²`. Vanishes on
/// the real solution variety of `P` under scaling `s` and equals the exact
/// integer residual squared whenever `s·θ` is already integral.
pub fn diophantine_loss(
    poly: &DiophantinePolynomial,
    theta: &[f64],
    map: &EncodingMap,
    selector: &ParamSelector,
) -> Result<f64> {
    let sub = selector.gather(theta)?;
    if poly.n_vars() != sub.len() {
        return Err(Error::Shape(format!(
            "constraint polynomial has {} variables but {} parameters are selected",
            poly.n_vars(),
            sub.len()
        )));
    }
    let scaled: Vec<f64> = sub.iter().map(|t| t * map.scale()).collect();
    let r = poly.eval_real(&scaled)?;
    Ok(r * r)
}

/// Gradient of [`diophantine_loss`] with respect to the full parameter
/// vector: `2·P(s·θ)·s·∇P(s·θ)` scattered onto the selected coordinates.
pub fn diophantine_loss_grad(
    poly: &DiophantinePolynomial,
    theta: &[f64],
    map: &EncodingMap,
    selector: &ParamSelector,
) -> Result<Vec<f64>> {
    let sub = selector.gather(theta)?;
    if poly.n_vars() != sub.len() {
        return Err(Error::Shape(format!(
            "constraint polynomial has {} variables but {} parameters are selected",
            poly.n_vars(),
            sub.len()
        )));
    }
    let s = map.scale();
    let scaled: Vec<f64> = sub.iter().map(|t| t * s).collect();
    let r = poly.eval_real(&scaled)?;
    let g = poly.gradient(&scaled)?;
    let sub_grad: Vec<f64> = g.iter().map(|gi| 2.0 * r * gi * s).collect();
    let mut full = vec![0.0; theta.len()];
    selector.scatter_add(&sub_grad, &mut full)?;
    Ok(full)
}

/// Exact integer constraint residual `P(Φ(θ))²`, the quantity reported per
/// epoch. Uses exact integer arithmetic on the encoded parameters.
pub fn constraint_residual(
    poly: &DiophantinePolynomial,
    theta: &[f64],
    map: &EncodingMap,
    selector: &ParamSelector,
) -> Result<f64> {
    let sub = selector.gather(theta)?;
    if poly.n_vars() != sub.len() {
        return Err(Error::Shape(format!(
            "constraint polynomial has {} variables but {} parameters are selected",
            poly.n_vars(),
            sub.len()
        )));
    }
    let encoded = map.encode(&sub);
    let r = poly.eval_int(&encoded)?;
    let rf = r as f64;
    Ok(rf * rf)
}
