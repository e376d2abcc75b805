//! Prediction files and per-observation score output.
//!
//! Input is CSV with header `id,kind,params,y`. `params` holds the
//! distribution parameters separated by `;` (`mu;sigma`, `mu;s`, `mu;b`);
//! ensemble members are separated by `|`.

use std::io::Read;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::PredictiveDistribution;
use crate::error::{Error, Result};
use crate::kernels::MonteCarlo;
use crate::scores::{evaluate, Rule};
use crate::table::Table;

/// One forecast-observation pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRecord {
    pub id: String,
    pub dist: PredictiveDistribution,
    pub y: f64,
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse { line: line as usize, message: message.into() }
}

fn number(line: u64, what: &str, s: &str) -> Result<f64> {
    let s = s.trim();
    s.parse::<f64>().map_err(|_| parse_err(line, format!("{what} `{s}` is not a number")))
}

fn parse_dist(line: u64, kind: &str, params: &str) -> Result<PredictiveDistribution> {
    let kind = kind.trim().to_ascii_lowercase();
    let dist = if kind == "ensemble" {
        let members = params
            .split('|')
            .filter(|m| !m.trim().is_empty())
            .map(|m| number(line, "ensemble member", m))
            .collect::<Result<Vec<_>>>()?;
        PredictiveDistribution::ensemble(members)
    } else {
        let p = params.split(';').map(|v| number(line, "parameter", v)).collect::<Result<Vec<_>>>()?;
        if p.len() != 2 {
            return Err(parse_err(line, format!("kind `{kind}` takes 2 parameters, got {}", p.len())));
        }
        match kind.as_str() {
            "gaussian" => PredictiveDistribution::gaussian(p[0], p[1]),
            "negbin" => PredictiveDistribution::negbin(p[0], p[1]),
            "laplace" => PredictiveDistribution::laplace(p[0], p[1]),
            other => return Err(parse_err(line, format!("unknown kind `{other}`"))),
        }
    };
    dist.map_err(|e| parse_err(line, e.to_string()))
}

/// Parses prediction records. Errors carry the 1-based file line (the
/// header is line 1).
pub fn parse_records<R: Read>(input: R) -> Result<Vec<PredictionRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["id", "kind", "params", "y"] {
        return Err(parse_err(
            1,
            format!("expected header `id,kind,params,y`, got `{}`", header.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(parse_err(line, "empty id"));
        }
        let dist = parse_dist(line, &rec[1], &rec[2])?;
        let y = number(line, "observation", &rec[3])?;
        if !y.is_finite() {
            return Err(parse_err(line, "observation must be finite"));
        }
        out.push(PredictionRecord { id, dist, y });
    }
    if out.is_empty() {
        return Err(parse_err(1, "no records"));
    }
    Ok(out)
}

pub fn read_records(path: &Path) -> Result<Vec<PredictionRecord>> {
    let f = std::fs::File::open(path)?;
    parse_records(f)
}

/// Score of one record under one rule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub id: String,
    pub rule: String,
    pub score: f64,
    pub entropy: f64,
    pub residual: f64,
    pub method: String,
}

/// Per-rule averages over all records.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuleSummary {
    pub rule: String,
    pub average_score: f64,
    pub average_entropy: f64,
    pub average_residual: f64,
    pub n: usize,
}

/// Scores every record under every rule, rule-major. Record `i` uses
/// Monte-Carlo stream `i`. With `negate` all values change sign.
pub fn score_records(
    records: &[PredictionRecord],
    rules: &[Rule],
    mc: &MonteCarlo,
    negate: bool,
) -> Result<(Vec<ScoreRow>, Vec<RuleSummary>)> {
    if rules.is_empty() {
        return Err(Error::Config("no rules given".into()));
    }
    let sign = if negate { -1.0 } else { 1.0 };
    let mut rows = Vec::with_capacity(records.len() * rules.len());
    let mut summaries = Vec::with_capacity(rules.len());
    for rule in rules {
        let evals: Vec<Result<ScoreRow>> = records
            .par_iter()
            .enumerate()
            .map(|(i, r)| {
                let ev = evaluate(rule, &r.dist, r.y, &mc.with_stream(i as u64)).map_err(|e| e.at_record(&r.id))?;
                Ok(ScoreRow {
                    id: r.id.clone(),
                    rule: rule.to_string(),
                    score: sign * ev.score.value,
                    entropy: sign * ev.entropy.value,
                    residual: sign * ev.residual(),
                    method: ev.score.method.combine(ev.entropy.method).to_string(),
                })
            })
            .collect();
        let start = rows.len();
        for e in evals {
            rows.push(e?);
        }
        let block = &rows[start..];
        let n = block.len();
        let mean = |f: fn(&ScoreRow) -> f64| block.iter().map(f).sum::<f64>() / n as f64;
        summaries.push(RuleSummary {
            rule: rule.to_string(),
            average_score: mean(|r| r.score),
            average_entropy: mean(|r| r.entropy),
            average_residual: mean(|r| r.residual),
            n,
        });
    }
    Ok((rows, summaries))
}

pub fn scores_table(rows: &[ScoreRow]) -> Table {
    let mut t = Table::new("scores", &["id", "rule", "score", "entropy", "residual", "method"]);
    for r in rows {
        t.push(vec![
            r.id.as_str().into(),
            r.rule.as_str().into(),
            r.score.into(),
            r.entropy.into(),
            r.residual.into(),
            r.method.as_str().into(),
        ]);
    }
    t
}

/// Reads back a table written by [`scores_table`] as CSV.
pub fn read_score_csv<R: Read>(input: R) -> Result<Vec<ScoreRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 6 {
            return Err(parse_err(line, format!("expected 6 fields, got {}", rec.len())));
        }
        out.push(ScoreRow {
            id: rec[0].to_string(),
            rule: rec[1].to_string(),
            score: number(line, "score", &rec[2])?,
            entropy: number(line, "entropy", &rec[3])?,
            residual: number(line, "residual", &rec[4])?,
            method: rec[5].to_string(),
        });
    }
    Ok(out)
}
