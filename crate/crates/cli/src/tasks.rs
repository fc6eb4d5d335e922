//! Built-in tasks: the three worked examples with their exact starting
//! points, plus two seeded synthetic benchmarks (a noisy linear regression
//! and a two-blob classification problem).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use dionet_core::linalg::{Matrix, Vector};
use dionet_core::network::{Activation, Layer, Network};
use dionet_core::training::Dataset;

use crate::config::Task;
use crate::error::Result;

/// Everything an experiment needs before training starts.
pub struct TaskSetup {
    pub network: Network,
    pub train: Dataset,
    pub val: Dataset,
}

pub fn build(task: Task, seed: u64) -> Result<TaskSetup> {
    match task {
        Task::Example1 => example1(),
        Task::Example2 => example2(),
        Task::Example3 => example3(),
        Task::SyntheticRegression => synthetic_regression(seed),
        Task::SyntheticClassification => synthetic_classification(seed),
    }
}

fn vec1(x: f64) -> Vector {
    Vector::new(vec![x]).unwrap()
}

fn dataset(pairs: &[(Vec<f64>, Vec<f64>)]) -> Dataset {
    let inputs = pairs.iter().map(|(x, _)| Vector::new(x.clone()).unwrap()).collect();
    let targets = pairs.iter().map(|(_, y)| Vector::new(y.clone()).unwrap()).collect();
    Dataset::new(inputs, targets).unwrap()
}

/// One-parameter line fit y = Wx + b on three collinear points, started
/// from zero so the first update is fully determined by the data.
fn example1() -> Result<TaskSetup> {
    let layer = Layer::new(
        Matrix::new(1, 1, vec![0.0])?,
        Vector::new(vec![0.0])?,
        Activation::Identity,
    )?;
    let data: Vec<(Vec<f64>, Vec<f64>)> =
        [(1.0, 3.0), (2.0, 5.0), (3.0, 7.0)].iter().map(|&(x, y)| (vec![x], vec![y])).collect();
    Ok(TaskSetup {
        network: Network::new(vec![layer])?,
        train: dataset(&data),
        val: dataset(&data),
    })
}

/// Quadratic fit y = Wx^2 + Vx + b expressed as a linear model over the
/// feature vector (x^2, x).
fn example2() -> Result<TaskSetup> {
    let layer = Layer::new(
        Matrix::new(1, 2, vec![0.0, 0.0])?,
        Vector::new(vec![0.0])?,
        Activation::Identity,
    )?;
    let data: Vec<(Vec<f64>, Vec<f64>)> = [(1.0, 6.0), (2.0, 11.0), (3.0, 18.0)]
        .iter()
        .map(|&(x, y)| (vec![x * x, x], vec![y]))
        .collect();
    Ok(TaskSetup {
        network: Network::new(vec![layer])?,
        train: dataset(&data),
        val: dataset(&data),
    })
}

/// Two-layer network whose first weight matrix starts at the fractional
/// values that round to [[2, -1], [1, 2]] under the tie-toward-zero
/// projection.
fn example3() -> Result<TaskSetup> {
    let l1 = Layer::new(
        Matrix::from_rows(&[vec![2.5, -1.3], vec![0.7, 1.6]])?,
        Vector::new(vec![0.0, 0.0])?,
        Activation::Identity,
    )?;
    let l2 = Layer::new(
        Matrix::from_rows(&[vec![1.0, 1.0]])?,
        Vector::new(vec![0.0])?,
        Activation::Identity,
    )?;
    let data: Vec<(Vec<f64>, Vec<f64>)> = [
        ([0.0, 0.0], 0.0),
        ([1.0, 0.0], 3.0),
        ([0.0, 1.0], 1.0),
        ([1.0, 1.0], 4.0),
        ([2.0, 1.0], 7.0),
        ([1.0, 2.0], 5.0),
    ]
    .iter()
    .map(|&(x, y)| (x.to_vec(), vec![y]))
    .collect();
    Ok(TaskSetup {
        network: Network::new(vec![l1, l2])?,
        train: dataset(&data),
        val: dataset(&data),
    })
}

/// Uniform weight init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] with zero bias.
fn init_layer(rng: &mut ChaCha8Rng, rows: usize, cols: usize, act: Activation) -> Result<Layer> {
    let limit = 1.0 / (cols as f64).sqrt();
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(-limit..limit)).collect();
    Ok(Layer::new(Matrix::new(rows, cols, data)?, Vector::new(vec![0.0; rows])?, act)?)
}

/// y = 2*x1 - x2 + 1 plus Gaussian noise, inputs uniform on [-2, 2]^2.
fn synthetic_regression(seed: u64) -> Result<TaskSetup> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.05).expect("finite sigma");
    let mut draw = |n: usize| -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..n)
            .map(|_| {
                let x1 = rng.gen_range(-2.0..2.0);
                let x2 = rng.gen_range(-2.0..2.0);
                let y = 2.0 * x1 - x2 + 1.0 + noise.sample(&mut rng);
                (vec![x1, x2], vec![y])
            })
            .collect()
    };
    let train = dataset(&draw(64));
    let val = dataset(&draw(16));
    let l1 = init_layer(&mut rng, 4, 2, Activation::Relu)?;
    let l2 = init_layer(&mut rng, 1, 4, Activation::Identity)?;
    Ok(TaskSetup { network: Network::new(vec![l1, l2])?, train, val })
}

/// Two Gaussian blobs centered at (-1.5, -1.5) and (1.5, 1.5) with one-hot
/// labels, for use with the cross-entropy loss.
fn synthetic_classification(seed: u64) -> Result<TaskSetup> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spread = Normal::new(0.0, 0.6).expect("finite sigma");
    let mut draw = |n: usize| -> Vec<(Vec<f64>, Vec<f64>)> {
        (0..n)
            .map(|i| {
                let class = i % 2;
                let center = if class == 0 { -1.5 } else { 1.5 };
                let x1 = center + spread.sample(&mut rng);
                let x2 = center + spread.sample(&mut rng);
                let mut one_hot = vec![0.0, 0.0];
                one_hot[class] = 1.0;
                (vec![x1, x2], one_hot)
            })
            .collect()
    };
    let train = dataset(&draw(64));
    let val = dataset(&draw(16));
    let l1 = init_layer(&mut rng, 8, 2, Activation::Relu)?;
    let l2 = init_layer(&mut rng, 2, 8, Activation::Identity)?;
    Ok(TaskSetup { network: Network::new(vec![l1, l2])?, train, val })
}

/// The encode subcommand needs a tiny default input; reuse example1's
/// first training point.
pub fn probe_input(task: Task) -> Vector {
    match task {
        Task::Example1 | Task::Example2 => vec1(1.0),
        Task::Example3 => Vector::new(vec![1.0, 1.0]).unwrap(),
        Task::SyntheticRegression | Task::SyntheticClassification => {
            Vector::new(vec![0.5, -0.5]).unwrap()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_have_expected_shapes() {
        let e1 = build(Task::Example1, 0).unwrap();
        assert_eq!(e1.network.layers().len(), 1);
        assert_eq!(e1.train.len(), 3);
        let e2 = build(Task::Example2, 0).unwrap();
        assert_eq!(e2.network.layers()[0].weights.cols(), 2);
        let e3 = build(Task::Example3, 0).unwrap();
        assert_eq!(e3.network.layers().len(), 2);
        assert_eq!(e3.network.layers()[0].weights.data(), &[2.5, -1.3, 0.7, 1.6]);
    }

    #[test]
    fn synthetic_tasks_are_seed_deterministic() {
        for task in [Task::SyntheticRegression, Task::SyntheticClassification] {
            let a = build(task, 7).unwrap();
            let b = build(task, 7).unwrap();
            let c = build(task, 8).unwrap();
            assert_eq!(a.network.flat_params(), b.network.flat_params());
            assert_ne!(a.network.flat_params(), c.network.flat_params());
            for (x, y) in a.train.inputs().iter().zip(b.train.inputs()) {
                assert_eq!(x.data(), y.data());
            }
            assert_eq!(a.train.len(), 64);
            assert_eq!(a.val.len(), 16);
        }
    }

    #[test]
    fn classification_targets_are_one_hot() {
        let setup = build(Task::SyntheticClassification, 3).unwrap();
        for t in setup.train.targets() {
            let s: f64 = t.data().iter().sum();
            assert_eq!(s, 1.0);
            assert!(t.data().iter().all(|&v| v == 0.0 || v == 1.0));
        }
    }
}
