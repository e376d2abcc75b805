//! Truncated-kernel scores stay bounded as the observation runs away.

use propscore::distributions::PredictiveDistribution;
use propscore::kernels::MonteCarlo;
use propscore::scores::{score, Rule};

fn main() -> propscore::Result<()> {
    let p = PredictiveDistribution::gaussian(0.0, 1.0)?;
    let mc = MonteCarlo::default();
    let rules = [Rule::Crps, Rule::Rcrps { c: 2.0 }, Rule::Scrps, Rule::Rscrps { c: 2.0 }, Rule::Logs];
    print!("{:>8}", "y");
    for r in &rules {
        print!(" {:>12}", r.to_string());
    }
    println!();
    for y in [0.0, 1.0, 3.0, 10.0, 100.0, 1e4] {
        print!("{y:>8}");
        for r in &rules {
            print!(" {:>12.4}", score(r, &p, y, &mc)?.value);
        }
        println!();
    }
    Ok(())
}
