//! Built-in reference calculations for the three worked examples. Each
//! check prints one PASS/FAIL line naming the quantity, the expected value
//! with its tolerance, and the value actually computed. Any failure makes
//! the command exit with the golden-mismatch code.

use std::io::Write;

use dionet_core::constraints::{project_network, round_to_int};
use dionet_core::grad::{backward, finite_diff_grad};
use dionet_core::training::{self, LossConfig, Mode, TrainingConfig};

use crate::config::Task;
use crate::error::{CliError, Result};
use crate::tasks;

struct Checker<'a> {
    out: &'a mut dyn Write,
    total: usize,
    failures: usize,
}

impl<'a> Checker<'a> {
    fn new(out: &'a mut dyn Write) -> Self {
        Checker { out, total: 0, failures: 0 }
    }

    fn record(&mut self, name: &str, expected: &str, got: &str, ok: bool) -> Result<()> {
        self.total += 1;
        if !ok {
            self.failures += 1;
        }
        let tag = if ok { "PASS" } else { "FAIL" };
        writeln!(self.out, "{tag}  {name}: expected {expected}, got {got}")
            .map_err(|e| CliError::Io(e.to_string()))
    }

    /// |got - expected| <= tol.
    fn approx(&mut self, name: &str, expected: f64, got: f64, tol: f64) -> Result<()> {
        let ok = (got - expected).abs() <= tol;
        self.record(name, &format!("{expected} (+/- {tol})"), &format!("{got}"), ok)
    }

    /// Bitwise-equal floats, for quantities that must come out exact.
    fn exact(&mut self, name: &str, expected: f64, got: f64) -> Result<()> {
        self.record(name, &format!("{expected} exactly"), &format!("{got}"), got == expected)
    }

    fn note(&mut self, text: &str) -> Result<()> {
        writeln!(self.out, "NOTE  {text}").map_err(|e| CliError::Io(e.to_string()))
    }

    fn finish(self) -> Result<()> {
        if self.failures == 0 {
            writeln!(self.out, "all {} checks passed", self.total)
                .map_err(|e| CliError::Io(e.to_string()))?;
            Ok(())
        } else {
            Err(CliError::Golden(format!(
                "{} of {} checks failed",
                self.failures, self.total
            )))
        }
    }
}

/// Largest relative disagreement between the analytic gradient and a
/// central-difference approximation.
fn gradient_vs_finite_diff(
    net: &dionet_core::network::Network,
    data: &dionet_core::training::Dataset,
    cfg: &LossConfig,
) -> Result<f64> {
    let xs = data.inputs().to_vec();
    let ys = data.targets().to_vec();
    let (_, analytic) = backward(net, &xs, &ys, cfg)?;
    let numeric = finite_diff_grad(net, &xs, &ys, cfg, 1e-6)?;
    let worst = analytic
        .flat()
        .iter()
        .zip(numeric.flat())
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1.0))
        .fold(0.0f64, f64::max);
    Ok(worst)
}

fn example1(c: &mut Checker) -> Result<()> {
    let setup = tasks::build(Task::Example1, 0)?;
    let cfg = LossConfig::mse();
    let xs = setup.train.inputs().to_vec();
    let ys = setup.train.targets().to_vec();
    let (loss, grads) = backward(&setup.network, &xs, &ys, &cfg)?;
    c.approx("line fit: initial loss", 27.67, loss, 0.01)?;
    let g = grads.flat();
    c.approx("line fit: dL/dW at (0, 0)", -22.67, g[0], 0.01)?;
    c.approx("line fit: dL/db at (0, 0)", -10.0, g[1], 0.01)?;
    let fd = gradient_vs_finite_diff(&setup.network, &setup.train, &cfg)?;
    c.record(
        "line fit: analytic gradient vs central differences",
        "relative gap <= 1e-5",
        &format!("{fd:e}"),
        fd <= 1e-5,
    )?;

    let t_cfg = TrainingConfig {
        eta: 0.1,
        epochs: 1,
        batch_size: 0,
        mode: Mode::Normal,
        seed: 0,
        lll_init: false,
    };
    let (net, _) = training::train(setup.network.clone(), &setup.train, &setup.val, &t_cfg, &cfg)?;
    let p = net.flat_params();
    c.approx("line fit: W after one step at rate 0.1", 2.27, p[0], 0.01)?;
    c.approx("line fit: b after one step at rate 0.1", 1.0, p[1], 1e-9)?;

    let t_dio = TrainingConfig { mode: Mode::Diophantine, ..t_cfg };
    let (net, _) = training::train(setup.network, &setup.train, &setup.val, &t_dio, &cfg)?;
    let p = net.flat_params();
    c.exact("line fit: projected W after one integer-mode step", 2.0, p[0])?;
    c.exact("line fit: projected b after one integer-mode step", 1.0, p[1])?;
    c.exact("rounding: nearest integer to 3.45", 3.0, round_to_int(3.45))?;
    Ok(())
}

fn example2(c: &mut Checker) -> Result<()> {
    let setup = tasks::build(Task::Example2, 0)?;
    let cfg = LossConfig::mse();
    let xs = setup.train.inputs().to_vec();
    let ys = setup.train.targets().to_vec();
    let (loss, grads) = backward(&setup.network, &xs, &ys, &cfg)?;
    c.approx("quadratic fit: initial loss", 160.33, loss, 0.01)?;
    c.note(
        "the quadratic-fit walkthrough this check reproduces prints the gradients \
         (-204, -54, -35), which are inconsistent with its own per-point error sums \
         (-212, -82, -35) and prefactor 2/3; the formula values -(2/3)*212 = -141.33, \
         -(2/3)*82 = -54.67, -(2/3)*35 = -23.33 are used below, cross-checked against \
         central differences",
    )?;
    let g = grads.flat();
    c.approx("quadratic fit: dL/dW at zero", -424.0 / 3.0, g[0], 1e-9)?;
    c.approx("quadratic fit: dL/dV at zero", -164.0 / 3.0, g[1], 1e-9)?;
    c.approx("quadratic fit: dL/db at zero", -70.0 / 3.0, g[2], 1e-9)?;
    let fd = gradient_vs_finite_diff(&setup.network, &setup.train, &cfg)?;
    c.record(
        "quadratic fit: analytic gradient vs central differences",
        "relative gap <= 1e-5",
        &format!("{fd:e}"),
        fd <= 1e-5,
    )?;
    c.exact("rounding: nearest integer to 20.4", 20.0, round_to_int(20.4))?;
    c.exact("rounding: nearest integer to 5.4", 5.0, round_to_int(5.4))?;
    c.exact("rounding: 3.5 ties toward zero", 3.0, round_to_int(3.5))?;
    c.exact("rounding: nearest integer to 5.288", 5.0, round_to_int(5.288))?;
    Ok(())
}

fn example3(c: &mut Checker) -> Result<()> {
    let setup = tasks::build(Task::Example3, 0)?;
    let mut net = setup.network;
    // The walkthrough applies one explicit gradient matrix to the first
    // layer at rate 0.01 and leaves everything else untouched.
    let grad_w1 = [0.1, -0.4, 0.3, 0.2];
    let mut params = net.flat_params();
    for (p, g) in params.iter_mut().zip(grad_w1) {
        *p -= 0.01 * g;
    }
    net.set_flat_params(&params)?;
    let updated = net.flat_params();
    let expected = [2.499, -1.296, 0.697, 1.598];
    let names = ["W1[1,1]", "W1[1,2]", "W1[2,1]", "W1[2,2]"];
    for ((name, want), got) in names.iter().zip(expected).zip(&updated) {
        c.approx(&format!("two-layer update: {name} after the step"), want, *got, 1e-9)?;
    }
    project_network(&mut net)?;
    let projected = net.flat_params();
    let want = [2.0, -1.0, 1.0, 2.0];
    for ((name, want), got) in names.iter().zip(want).zip(&projected) {
        c.exact(&format!("two-layer update: projected {name}"), want, *got)?;
    }
    Ok(())
}

/// Run every built-in reference check, writing one line per check.
pub fn reproduce_examples(out: &mut dyn Write) -> Result<()> {
    let mut checker = Checker::new(out);
    example1(&mut checker)?;
    example2(&mut checker)?;
    example3(&mut checker)?;
    checker.finish()
}
