use serde::Serialize;

use crate::scores::Rule;
use crate::table::Table;

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n_f = n as f64;
    let p = k as f64 / n_f;
    let z2 = z * z;
    let denom = 1.0 + z2 / n_f;
    let center = (p + z2 / (2.0 * n_f)) / denom;
    let half = z / denom * (p * (1.0 - p) / n_f + z2 / (4.0 * n_f * n_f)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// How often the data-generating model had the strictly largest mean score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionRow {
    pub scenario: String,
    pub rule: Rule,
    pub delta: f64,
    pub correct: usize,
    pub replicates: usize,
    pub prob_correct: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
    pub wilson_halfwidth: f64,
}

impl SelectionRow {
    pub fn new(scenario: &str, rule: Rule, delta: f64, correct: usize, replicates: usize) -> Self {
        let (lo, hi) = wilson_interval(correct, replicates, WILSON_Z);
        SelectionRow {
            scenario: scenario.to_string(),
            rule,
            delta,
            correct,
            replicates,
            prob_correct: correct as f64 / replicates.max(1) as f64,
            wilson_low: lo,
            wilson_high: hi,
            wilson_halfwidth: 0.5 * (hi - lo),
        }
    }

    /// Whether this row's interval lies strictly above `other`'s.
    pub fn separated_above(&self, other: &SelectionRow) -> bool {
        self.wilson_low > other.wilson_high
    }

    pub fn overlaps(&self, other: &SelectionRow) -> bool {
        self.wilson_low <= other.wilson_high && other.wilson_low <= self.wilson_high
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct SelectionCurve {
    pub rows: Vec<SelectionRow>,
}

impl SelectionCurve {
    pub fn get(&self, scenario: &str, rule: &Rule, delta: f64) -> Option<&SelectionRow> {
        self.rows.iter().find(|r| r.scenario == scenario && r.rule == *rule && r.delta == delta)
    }

    pub fn table(&self, name: &str) -> Table {
        let mut t = Table::new(
            name,
            &[
                "scenario",
                "rule",
                "delta",
                "correct",
                "replicates",
                "prob_correct",
                "wilson_low",
                "wilson_high",
                "wilson_halfwidth",
            ],
        );
        for r in &self.rows {
            t.push(vec![
                r.scenario.as_str().into(),
                r.rule.to_string().into(),
                r.delta.into(),
                r.correct.into(),
                r.replicates.into(),
                r.prob_correct.into(),
                r.wilson_low.into(),
                r.wilson_high.into(),
                r.wilson_halfwidth.into(),
            ]);
        }
        t
    }
}

/// True model wins only with a strictly larger mean score than every alternative.
pub(crate) fn true_model_wins(truth: f64, alternatives: &[f64]) -> bool {
    alternatives.iter().all(|a| truth > *a)
}

/// Tallies per-replicate outcomes `wins[rep][rule][delta]` into a curve.
pub(crate) fn tally(scenario: &str, rules: &[Rule], deltas: &[f64], wins: &[Vec<Vec<bool>>]) -> SelectionCurve {
    let mut rows = Vec::with_capacity(rules.len() * deltas.len());
    for (ri, rule) in rules.iter().enumerate() {
        for (di, &delta) in deltas.iter().enumerate() {
            let correct = wins.iter().filter(|w| w[ri][di]).count();
            rows.push(SelectionRow::new(scenario, *rule, delta, correct, wins.len()));
        }
    }
    SelectionCurve { rows }
}

/// Result of one `--check` assertion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome { name: name.into(), passed, detail: detail.into() }
    }
}
