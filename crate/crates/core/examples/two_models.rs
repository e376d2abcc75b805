//! Two forecasters, two observations with very different spreads.
//!
//! CRPS and the log score prefer the second model; SCRPS prefers the first.

use propscore::distributions::PredictiveDistribution;
use propscore::kernels::MonteCarlo;
use propscore::scores::{average_score, Rule};

fn main() -> propscore::Result<()> {
    let ys = [0.0, 0.5];
    let models = [("model 1", [(0.0, 0.01), (5.0, 0.8)]), ("model 2", [(0.0, 0.1), (4.9, 0.85)])];
    let mc = MonteCarlo::default();
    println!("{:<8} {:>6} {:>10} {:>10} {:>10}", "", "rule", "y1", "y2", "mean");
    for (name, forecasts) in models {
        let data: Vec<(PredictiveDistribution, f64)> = forecasts
            .iter()
            .zip(ys)
            .map(|((m, s), y)| Ok((PredictiveDistribution::gaussian(*m, *s)?, y)))
            .collect::<propscore::Result<_>>()?;
        for rule in [Rule::Crps, Rule::Logs, Rule::Scrps] {
            let rep = average_score(&rule, &data, &mc)?;
            println!(
                "{name:<8} {:>6} {:>10.4} {:>10.4} {:>10.4}",
                rule.to_string(),
                rep.per_obs[0].score,
                rep.per_obs[1].score,
                rep.average
            );
        }
    }
    Ok(())
}
