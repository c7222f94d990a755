//! The conjugate-gradient and Adam optimizers on user-defined objectives.

use vasicek_gp::optimize::{minimize_adam, minimize_cg, Objective};
use vasicek_gp::OptimizerConfig;

struct Rosenbrock;

impl Objective for Rosenbrock {
    fn dim(&self) -> usize {
        2
    }

    fn value_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let (a, b) = (x[0], x[1]);
        let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
        (f, vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)])
    }
}

fn main() {
    let cg = minimize_cg(&Rosenbrock, &[-1.2, 1.0], &OptimizerConfig::default());
    println!(
        "cg    x = ({:.6}, {:.6})  f = {:.3e}  iterations {}  evaluations {}",
        cg.x[0], cg.x[1], cg.value, cg.iterations, cg.evaluations
    );
    let cfg = OptimizerConfig {
        learning_rate: 0.01,
        ..OptimizerConfig::adam(5000)
    };
    let adam = minimize_adam(&Rosenbrock, &[-1.2, 1.0], &cfg);
    println!("adam  x = ({:.6}, {:.6})  f = {:.3e}  epochs {}", adam.x[0], adam.x[1], adam.value, adam.iterations);
}
