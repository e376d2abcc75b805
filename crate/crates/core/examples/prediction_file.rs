//! Reading a prediction file, scoring it under several rules and writing
//! the per-observation table.

use propscore::io::{parse_records, score_records, scores_table};
use propscore::kernels::MonteCarlo;
use propscore::scores::Rule;

const INPUT: &str = "id,kind,params,y
station-a,gaussian,12.1;1.5,13.0
station-b,laplace,3.0;0.4,2.1
counter-1,negbin,40;3,71
ensemble-x,ensemble,0.4|0.9|1.1|1.6|2.5,1.2
";

fn main() -> propscore::Result<()> {
    let records = parse_records(INPUT.as_bytes())?;
    let rules: Vec<Rule> = ["crps", "scrps", "rscrps:c=3", "kernel:alpha=1.5"]
        .iter()
        .map(|r| r.parse())
        .collect::<propscore::Result<_>>()?;
    let (rows, summaries) = score_records(&records, &rules, &MonteCarlo::new(200_000, 1), false)?;
    scores_table(&rows).write_csv(std::io::stdout().lock())?;
    for s in summaries {
        println!(
            "# {} mean {:.5} (entropy {:.5}, residual {:.5})",
            s.rule, s.average_score, s.average_entropy, s.average_residual
        );
    }
    Ok(())
}
