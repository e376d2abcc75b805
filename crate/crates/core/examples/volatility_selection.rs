//! Model selection under stochastic volatility: how often each rule ranks
//! the true observation scale above a misspecified one.

use propscore::experiments::{run_volatility, VolatilityConfig};

fn main() -> propscore::Result<()> {
    let cfg = VolatilityConfig { replicates: 100, ..Default::default() };
    let curve = run_volatility(&cfg)?;
    println!("{:>6} {:>7} {:>7} {:>7}", "delta", "crps", "scrps", "logs");
    for d in &cfg.delta_grid {
        let p: Vec<String> = cfg
            .rules
            .iter()
            .map(|r| format!("{:>7.3}", curve.get("clean", r, *d).map_or(f64::NAN, |row| row.prob_correct)))
            .collect();
        println!("{d:>6} {}", p.join(" "));
    }
    Ok(())
}
