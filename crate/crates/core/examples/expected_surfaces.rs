//! Expected average score over two Gaussian targets whose scales differ by
//! a factor 10, under errors in either forecast.

use propscore::experiments::{expected_score_surfaces, SurfaceConfig};

fn main() -> propscore::Result<()> {
    let cfg = SurfaceConfig { n_grid: 9, ..Default::default() };
    let s = expected_score_surfaces(&cfg)?;
    for g in &s.grids {
        let last = g.axis.len() - 1;
        println!(
            "{:<6} {:<5} swap asymmetry {:.2e}  drop(first wrong) {:.4}  drop(second wrong) {:.4}",
            g.rule.to_string(),
            g.panel,
            g.max_swap_asymmetry(),
            g.drop(last, g.center),
            g.drop(g.center, last),
        );
    }
    let out = std::env::temp_dir().join("propscore_surfaces");
    std::fs::create_dir_all(&out)?;
    for t in s.tables() {
        println!("wrote {}", t.save_csv(&out)?.display());
    }
    Ok(())
}
