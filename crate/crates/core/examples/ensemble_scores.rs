//! Scoring ensemble forecasts: exact empirical-measure sums, the unbiased
//! pair estimator, and convergence to the Gaussian closed form.

use propscore::distributions::{Ensemble, PredictiveDistribution};
use propscore::kernels::{KernelSpec, MonteCarlo};
use propscore::numerics::RngStream;
use propscore::scores::{score, Rule};

fn main() -> propscore::Result<()> {
    let truth = PredictiveDistribution::gaussian(1.0, 2.0)?;
    let y = 2.5;
    let mc = MonteCarlo::default();
    let exact = score(&Rule::Crps, &truth, y, &mc)?.value;
    println!("gaussian crps = {exact:.5}");
    let mut rng = RngStream::new(7, 0);
    println!("{:>6} {:>12} {:>12}", "m", "plug-in", "unbiased");
    for m in [10, 100, 1000, 10_000] {
        let members = truth.sample(m, &mut rng);
        let plug = PredictiveDistribution::Ensemble(Ensemble::new(members.clone())?);
        let fair = PredictiveDistribution::Ensemble(Ensemble::new(members)?.with_unbiased_pairs(true));
        println!(
            "{m:>6} {:>12.5} {:>12.5}",
            score(&Rule::Crps, &plug, y, &mc)?.value,
            score(&Rule::Crps, &fair, y, &mc)?.value
        );
    }

    let ens = PredictiveDistribution::ensemble(vec![0.2, 0.9, 1.4, 2.2, 3.0])?;
    for rule in [Rule::Crps, Rule::Scrps, Rule::Rcrps { c: 1.0 }, Rule::Kernel(KernelSpec::power(0.5)?), Rule::Dss] {
        println!("{rule:<14} {:>10.5}", score(&rule, &ens, y, &mc)?.value);
    }
    // the log score needs a density
    match score(&Rule::Logs, &ens, y, &mc) {
        Err(e) => println!("logs: {e}"),
        Ok(v) => println!("logs: {}", v.value),
    }
    Ok(())
}
