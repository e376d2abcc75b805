//! Leave-one-out kriging of a simulated Matern field, scored per location,
//! then a small selection study over the range parameter.

use propscore::distributions::PredictiveDistribution;
use propscore::experiments::{loo_kriging, run_spatial_study, simulate_field, SpatialConfig};
use propscore::kernels::MonteCarlo;
use propscore::numerics::RngStream;
use propscore::scores::{average_score, Rule};

fn main() -> propscore::Result<()> {
    let (kappa, sigma, nu) = (50.0, 1.0, 3.0);
    let mut rng = RngStream::new(11, 0);
    let locs: Vec<(f64, f64)> = (0..150).map(|_| (rng.uniform(), rng.uniform())).collect();
    let field = simulate_field(&locs, kappa, sigma, nu, &mut rng)?;
    let mc = MonteCarlo::default();
    for k in [25.0, 50.0, 100.0] {
        let preds = loo_kriging(&locs, &field, k, sigma, nu)?;
        let data: Vec<(PredictiveDistribution, f64)> =
            preds.into_iter().map(PredictiveDistribution::Gaussian).zip(field.iter().copied()).collect();
        let s: Vec<String> = [Rule::Crps, Rule::Scrps, Rule::Logs]
            .iter()
            .map(|r| average_score(r, &data, &mc).map(|rep| format!("{r} {:.4}", rep.average)))
            .collect::<propscore::Result<_>>()?;
        println!("kappa {k:>5}: {}", s.join("  "));
    }

    let cfg = SpatialConfig { replicates: 60, delta_grid: vec![10.0, 25.0], ..Default::default() };
    let curve = run_spatial_study(&cfg)?;
    for row in &curve.rows {
        println!("{:<8} {:<11} delta {:>4}: {:.3}", row.scenario, row.rule.to_string(), row.delta, row.prob_correct);
    }
    Ok(())
}
