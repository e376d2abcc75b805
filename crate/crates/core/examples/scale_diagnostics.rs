//! Scale function of each rule across predictive scales.
//!
//! A locally scale invariant rule has the same `s_hat` at every sigma;
//! for CRPS it grows linearly with sigma.

use propscore::diagnostics::{local_invariance_check, DEFAULT_T_GRID};
use propscore::distributions::PredictiveDistribution;
use propscore::kernels::MonteCarlo;
use propscore::scores::Rule;

fn main() -> propscore::Result<()> {
    let base = PredictiveDistribution::gaussian(0.0, 1.0)?;
    let sigmas = [0.01, 0.1, 1.0, 10.0, 100.0];
    let mc = MonteCarlo::default();
    for rule in [Rule::Crps, Rule::Scrps, Rule::Logs, Rule::Dss] {
        for (label, r) in [("location", (1.0, 0.0)), ("scale", (0.0, 1.0))] {
            let rep = local_invariance_check(&rule, &base, r, &sigmas, &DEFAULT_T_GRID, &mc)?;
            let s: Vec<String> = rep.fits.iter().map(|(_, f)| format!("{:.4e}", f.s_hat)).collect();
            println!(
                "{:<6} {label:<9} exponent {:+.3}  p_hat {:.3}  s_hat [{}]",
                rule.to_string(),
                rep.sigma_exponent,
                rep.fits[0].1.p_hat,
                s.join(", ")
            );
        }
    }

    // Laplace base: no closed form, so drops come from Monte Carlo
    let laplace = PredictiveDistribution::laplace(0.0, 1.0)?;
    let rep = local_invariance_check(
        &Rule::Scrps,
        &laplace,
        (0.0, 1.0),
        &[0.1, 1.0, 10.0],
        &DEFAULT_T_GRID,
        &MonteCarlo::new(400_000, 1),
    )?;
    println!("scrps on laplace: spread {:.3}, exponent {:+.3}", rep.max_rel_spread, rep.sigma_exponent);
    Ok(())
}
