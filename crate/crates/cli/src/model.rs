//! Model persistence: a versioned TOML document storing layer shapes,
//! activation specifications, and parameters as decimal strings. Rust's
//! shortest-roundtrip float formatting guarantees that save → load
//! reproduces every parameter bit for bit without committing binary floats
//! to disk.

use std::path::Path;

use serde::{Deserialize, Serialize};

use dionet_core::linalg::{Matrix, Vector};
use dionet_core::network::{Activation, Layer, Network};
use dionet_core::training::Mode;

use crate::config::ModeName;
use crate::error::{CliError, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActivationSpec {
    Identity,
    Relu,
    Sigmoid,
    DioLinear { a: f64, b: f64, c: f64 },
    DioQuadratic { a: f64, b: f64, c: f64, z: f64, d: f64 },
    DioExponential { a: u32, b: u32, k: f64 },
}

impl From<&Activation> for ActivationSpec {
    fn from(act: &Activation) -> Self {
        match *act {
            Activation::Identity => ActivationSpec::Identity,
            Activation::Relu => ActivationSpec::Relu,
            Activation::Sigmoid => ActivationSpec::Sigmoid,
            Activation::DioLinear { a, b, c } => ActivationSpec::DioLinear { a, b, c },
            Activation::DioQuadratic { a, b, c, z, d } => {
                ActivationSpec::DioQuadratic { a, b, c, z, d }
            }
            Activation::DioExponential { a, b, k } => ActivationSpec::DioExponential { a, b, k },
        }
    }
}

impl From<&ActivationSpec> for Activation {
    fn from(spec: &ActivationSpec) -> Self {
        match *spec {
            ActivationSpec::Identity => Activation::Identity,
            ActivationSpec::Relu => Activation::Relu,
            ActivationSpec::Sigmoid => Activation::Sigmoid,
            ActivationSpec::DioLinear { a, b, c } => Activation::DioLinear { a, b, c },
            ActivationSpec::DioQuadratic { a, b, c, z, d } => {
                Activation::DioQuadratic { a, b, c, z, d }
            }
            ActivationSpec::DioExponential { a, b, k } => Activation::DioExponential { a, b, k },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerFile {
    pub rows: usize,
    pub cols: usize,
    pub activation: ActivationSpec,
    /// Row-major weight entries as decimal strings.
    pub weights: Vec<String>,
    pub bias: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub version: u32,
    pub mode: String,
    pub seed: u64,
    pub layers: Vec<LayerFile>,
}

fn format_params(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| format!("{v}")).collect()
}

fn parse_params(strings: &[String], what: &str) -> Result<Vec<f64>> {
    strings
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Config(format!("bad decimal {what} entry `{s}`")))
        })
        .collect()
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Normal => "normal",
        Mode::Diophantine => "diophantine",
    }
}

fn parse_mode(name: &str) -> Result<ModeName> {
    match name {
        "normal" => Ok(ModeName::Normal),
        "diophantine" => Ok(ModeName::Diophantine),
        other => Err(CliError::Config(format!("unknown mode `{other}` in model file"))),
    }
}

pub fn save_model(net: &Network, mode: Mode, seed: u64, path: &Path) -> Result<()> {
    let layers = net
        .layers()
        .iter()
        .map(|layer| LayerFile {
            rows: layer.weights.rows(),
            cols: layer.weights.cols(),
            activation: (&layer.activation).into(),
            weights: format_params(layer.weights.data()),
            bias: format_params(layer.bias.data()),
        })
        .collect();
    let file = ModelFile {
        version: FORMAT_VERSION,
        mode: mode_name(mode).into(),
        seed,
        layers,
    };
    let text = toml::to_string(&file)
        .map_err(|e| CliError::Config(format!("cannot serialize model: {e}")))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::Io(format!("cannot write model {}: {e}", path.display())))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<(Network, ModeName, u64)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read model {}: {e}", path.display())))?;
    let file: ModelFile =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("malformed model file: {e}")))?;
    if file.version != FORMAT_VERSION {
        return Err(CliError::Config(format!(
            "model format version {} unsupported (expected {FORMAT_VERSION})",
            file.version
        )));
    }
    let mode = parse_mode(&file.mode)?;
    let layers = file
        .layers
        .iter()
        .map(|lf| {
            let weights = Matrix::new(lf.rows, lf.cols, parse_params(&lf.weights, "weight")?)
                .map_err(CliError::from)?;
            let bias = Vector::new(parse_params(&lf.bias, "bias")?).map_err(CliError::from)?;
            Layer::new(weights, bias, (&lf.activation).into()).map_err(CliError::from)
        })
        .collect::<Result<Vec<Layer>>>()?;
    let net = Network::new(layers).map_err(CliError::from)?;
    Ok((net, mode, file.seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_net() -> Network {
        let l1 = Layer::new(
            Matrix::from_rows(&[vec![2.5, -1.3], vec![0.7, 1.6]]).unwrap(),
            Vector::new(vec![0.1, -0.25]).unwrap(),
            Activation::Relu,
        )
        .unwrap();
        let l2 = Layer::new(
            Matrix::from_rows(&[vec![1.0 / 3.0, 0.1 + 0.2]]).unwrap(),
            Vector::new(vec![-1e-17]).unwrap(),
            Activation::DioLinear { a: 2.0, b: 1.0, c: 0.5 },
        )
        .unwrap();
        Network::new(vec![l1, l2]).unwrap()
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.toml");
        let net = sample_net();
        save_model(&net, Mode::Diophantine, 99, &path).unwrap();
        let (loaded, mode, seed) = load_model(&path).unwrap();
        assert_eq!(mode, ModeName::Diophantine);
        assert_eq!(seed, 99);
        let original = net.flat_params();
        let restored = loaded.flat_params();
        assert_eq!(original.len(), restored.len());
        for (a, b) in original.iter().zip(&restored) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn truncated_and_tampered_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.toml");
        save_model(&sample_net(), Mode::Normal, 1, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(load_model(&path).is_err());
        let versioned = text.replace("version = 1", "version = 2");
        std::fs::write(&path, versioned).unwrap();
        assert!(matches!(load_model(&path), Err(CliError::Config(_))));
        let bad_weight = text.replace("\"2.5\"", "\"two-ish\"");
        std::fs::write(&path, bad_weight).unwrap();
        assert!(load_model(&path).is_err());
        assert!(load_model(Path::new("/nonexistent/model.toml")).is_err());
    }

    #[test]
    fn integer_mode_weights_serialize_as_integer_strings() {
        let net = Network::new(vec![Layer::new(
            Matrix::from_rows(&[vec![2.0, -1.0]]).unwrap(),
            Vector::new(vec![3.0]).unwrap(),
            Activation::Identity,
        )
        .unwrap()])
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("int.toml");
        save_model(&net, Mode::Diophantine, 5, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"2\""), "{text}");
        assert!(text.contains("\"-1\""), "{text}");
        assert!(text.contains("\"3\""), "{text}");
    }
}
