//! Qualitative assertions run by `--check`.

use super::entropy::EntropyTrace;
use super::nbreg::NbRegResult;
use super::selection::{CheckOutcome, SelectionCurve, SelectionRow};
use super::surfaces::Surfaces;
use crate::numerics::SQRT_PI;
use crate::scores::Rule;

fn row<'a>(
    curve: &'a SelectionCurve,
    scenario: &str,
    rule: Rule,
    delta: f64,
) -> Result<&'a SelectionRow, CheckOutcome> {
    curve.get(scenario, &rule, delta).ok_or_else(|| {
        CheckOutcome::new(
            format!("{scenario} {rule} at delta={delta}"),
            false,
            "row missing from the curve (rule or delta not configured)",
        )
    })
}

fn describe(r: &SelectionRow) -> String {
    format!("{} {:.3} [{:.3}, {:.3}]", r.rule, r.prob_correct, r.wilson_low, r.wilson_high)
}

/// At `delta = 0.4`: SCRPS and log score each beat CRPS by at least 0.05
/// with separated intervals, and SCRPS and log score overlap.
pub fn check_volatility(curve: &SelectionCurve) -> Vec<CheckOutcome> {
    let delta = 0.4;
    let (c, s, l) = match (
        row(curve, "clean", Rule::Crps, delta),
        row(curve, "clean", Rule::Scrps, delta),
        row(curve, "clean", Rule::Logs, delta),
    ) {
        (Ok(c), Ok(s), Ok(l)) => (c, s, l),
        (c, s, l) => return [c.err(), s.err(), l.err()].into_iter().flatten().collect(),
    };
    let beats = |a: &SelectionRow| a.prob_correct - c.prob_correct >= 0.05 && a.separated_above(c);
    vec![
        CheckOutcome::new("scrps beats crps at delta=0.4", beats(s), format!("{} vs {}", describe(s), describe(c))),
        CheckOutcome::new("logs beats crps at delta=0.4", beats(l), format!("{} vs {}", describe(l), describe(c))),
        CheckOutcome::new(
            "scrps and logs agree at delta=0.4",
            s.overlaps(l),
            format!("{} vs {}", describe(s), describe(l)),
        ),
    ]
}

/// At `delta = 10`: SCRPS >= CRPS without outliers; the robust rules at
/// least match their plain versions with an outlier. Ordering is by point
/// estimate; overlap is reported in the detail.
pub fn check_spatial(curve: &SelectionCurve) -> Vec<CheckOutcome> {
    let delta = 10.0;
    let pairs = [
        ("clean", Rule::Scrps, Rule::Crps),
        ("outlier", Rule::Rscrps { c: 2.0 }, Rule::Scrps),
        ("outlier", Rule::Rcrps { c: 2.0 }, Rule::Crps),
    ];
    pairs
        .iter()
        .map(|(sc, hi, lo)| match (row(curve, sc, *hi, delta), row(curve, sc, *lo, delta)) {
            (Ok(a), Ok(b)) => {
                let overlap = if a.overlaps(b) { " (intervals overlap)" } else { "" };
                CheckOutcome::new(
                    format!("{sc}: {hi} >= {lo} at delta=10"),
                    a.prob_correct >= b.prob_correct,
                    format!("{} vs {}{overlap}", describe(a), describe(b)),
                )
            }
            (a, b) => a.err().or(b.err()).expect("one row is missing"),
        })
        .collect()
}

/// Top-k departure ratio and residual rank correlations.
pub fn check_nbreg(res: &NbRegResult, topk_fraction: f64) -> Vec<CheckOutcome> {
    let (dc, ds) = res.topk_departure(topk_fraction);
    let [(c_raw, c_scaled), (s_raw, s_scaled)] = res.residual_correlations();
    vec![
        CheckOutcome::new(
            format!("crps top-k departure >= 3x scrps at k={topk_fraction}n"),
            dc >= 3.0 * ds,
            format!("|crps ratio - 1| = {dc:.4}, |scrps ratio - 1| = {ds:.4}"),
        ),
        CheckOutcome::new(
            "|scrps| tracks scaled residuals more than raw",
            s_scaled > s_raw,
            format!("spearman scaled {s_scaled:.4} vs raw {s_raw:.4}"),
        ),
        CheckOutcome::new(
            "|crps| tracks raw residuals more than scaled",
            c_raw > c_scaled,
            format!("spearman raw {c_raw:.4} vs scaled {c_scaled:.4}"),
        ),
    ]
}

/// SCRPS and log-score surfaces symmetric within 2%; CRPS swap ratio
/// `sigma2 / sigma1` within 20% at every matched error.
pub fn check_surfaces(s: &Surfaces, sigma1: f64, sigma2: f64) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for g in &s.grids {
        match g.rule {
            Rule::Scrps | Rule::Logs => {
                let a = g.max_swap_asymmetry();
                out.push(CheckOutcome::new(
                    format!("{} {} surface symmetric", g.rule, g.panel),
                    a <= 0.02,
                    format!("max relative asymmetry {a:.3e}"),
                ));
            }
            Rule::Crps => {
                let want = sigma2 / sigma1;
                let ratios: Vec<f64> = (0..g.axis.len()).filter(|k| *k != g.center).map(|k| g.swap_ratio(k)).collect();
                let worst = ratios.iter().map(|r| (r / want - 1.0).abs()).fold(0.0, f64::max);
                out.push(CheckOutcome::new(
                    format!("crps {} asymmetry ratio ~ {want}", g.panel),
                    worst <= 0.2,
                    format!("max relative deviation {worst:.3e}"),
                ));
            }
            _ => {}
        }
    }
    out
}

/// CRPS entropy linear in the SD with slope `-1/sqrt(pi)`; SCRPS residual
/// spread the same in high- and low-volatility halves.
pub fn check_entropy(tr: &EntropyTrace) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    if !tr.for_rule(&Rule::Crps).is_empty() {
        let slope = tr.entropy_slope(&Rule::Crps, false);
        out.push(CheckOutcome::new(
            "crps entropy slope -1/sqrt(pi)",
            (slope + 1.0 / SQRT_PI).abs() < 1e-9,
            format!("slope {slope:.12}"),
        ));
    }
    if !tr.for_rule(&Rule::Scrps).is_empty() {
        let r = tr.residual_sd_ratio(&Rule::Scrps);
        out.push(CheckOutcome::new(
            "scrps residual spread scale-free",
            (0.8..=1.25).contains(&r),
            format!("high/low volatility residual SD ratio {r:.4}"),
        ));
    }
    out
}
