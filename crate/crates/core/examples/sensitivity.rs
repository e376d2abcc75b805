//! How fast |S(P, y)| grows in y for Gaussian and Laplace forecasts.

use propscore::diagnostics::{estimate_sensitivity, geometric_grid};
use propscore::distributions::PredictiveDistribution;
use propscore::kernels::MonteCarlo;
use propscore::scores::Rule;

fn main() -> propscore::Result<()> {
    let ys = geometric_grid(1, 6, 4);
    let mc = MonteCarlo::default();
    let dists = [
        ("gaussian", PredictiveDistribution::gaussian(0.0, 1.0)?),
        ("laplace", PredictiveDistribution::laplace(0.0, 1.0)?),
    ];
    for (name, p) in &dists {
        for rule in [Rule::Crps, Rule::Scrps, Rule::Logs, Rule::Dss, Rule::Rcrps { c: 2.0 }] {
            match estimate_sensitivity(&rule, p, &ys, &mc) {
                Ok(fit) => println!("{name:<9} {:<10} alpha_hat {:.4}", rule.to_string(), fit.alpha_hat),
                Err(e) => println!("{name:<9} {:<10} {e}", rule.to_string()),
            }
        }
    }
    Ok(())
}
