//! Score = entropy + residual along a volatility path. The CRPS entropy
//! follows the predictive SD; the SCRPS residual does not.

use propscore::experiments::{entropy_decomposition_trace, EntropyConfig};
use propscore::scores::Rule;

fn main() -> propscore::Result<()> {
    let tr = entropy_decomposition_trace(&EntropyConfig::default())?;
    println!("crps entropy vs sd slope      {:.6}", tr.entropy_slope(&Rule::Crps, false));
    println!("scrps entropy vs log sd slope {:.6}", tr.entropy_slope(&Rule::Scrps, true));
    println!("logs entropy vs log sd slope  {:.6}", tr.entropy_slope(&Rule::Logs, true));
    for rule in [Rule::Crps, Rule::Scrps, Rule::Logs] {
        println!("{:<6} residual SD high/low volatility {:.3}", rule.to_string(), tr.residual_sd_ratio(&rule));
    }
    for r in tr.for_rule(&Rule::Scrps).iter().take(5) {
        println!(
            "t={:<3} sd {:.3} y {:+.3} score {:+.3} = {:+.3} {:+.3}",
            r.t, r.sd, r.y, r.score, r.entropy, r.residual
        );
    }
    Ok(())
}
