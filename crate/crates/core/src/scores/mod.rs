//! Scoring rules, positively oriented: larger is better and
//! `E_Q S(Q, Y) >= E_Q S(P, Y)`.
//!
//! Every kernel-type rule is written as `h(e_pp) + 2 h'(e_pp) (e_py - e_pp)`
//! plus a constant, where `e_pp = E_{P,P} g(X, Y)` and `e_py = E_P g(X, y)`:
//!
//! | rule     | h                | kernel            | constant |
//! |----------|------------------|-------------------|----------|
//! | crps     | linear           | `|x - y|`         | 0        |
//! | scrps    | log              | `|x - y|`         | -1       |
//! | rcrps    | linear           | `min(|x - y|, c)` | 0        |
//! | rscrps   | log              | `min(|x - y|, c)` | -1       |
//! | kernel   | linear           | any               | 0        |
//! | genkernel| any              | any               | 0        |
//!
//! Gaussian forecasts use the closed forms in [`gaussian`].

pub mod gaussian;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::distributions::PredictiveDistribution;
use crate::error::{Error, Result};
use crate::kernels::{expectations, KernelExpectations, KernelSpec, Method, MonteCarlo};

/// Convex decreasing `h` of a generalized kernel score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HFunction {
    /// `-x / 2`
    Linear,
    /// `-log(x) / 2`
    Log,
    /// `-sqrt(x)`
    Sqrt,
    /// `-log(x + gamma) / 2`
    ShiftedLog { gamma: f64 },
}

impl HFunction {
    pub fn shifted_log(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::domain(format!("shifted_log needs gamma > 0, got {gamma}")));
        }
        Ok(HFunction::ShiftedLog { gamma })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            HFunction::Linear => -0.5 * x,
            HFunction::Log => -0.5 * x.ln(),
            HFunction::Sqrt => -x.sqrt(),
            HFunction::ShiftedLog { gamma } => -0.5 * (x + gamma).ln(),
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        match self {
            HFunction::Linear => -0.5,
            HFunction::Log => -0.5 / x,
            HFunction::Sqrt => -0.5 / x.sqrt(),
            HFunction::ShiftedLog { gamma } => -0.5 / (x + gamma),
        }
    }

    pub fn second_deriv(&self, x: f64) -> f64 {
        match self {
            HFunction::Linear => 0.0,
            HFunction::Log => 0.5 / (x * x),
            HFunction::Sqrt => 0.25 / (x * x.sqrt()),
            HFunction::ShiftedLog { gamma } => 0.5 / ((x + gamma) * (x + gamma)),
        }
    }

    fn needs_positive(&self) -> bool {
        matches!(self, HFunction::Log | HFunction::Sqrt)
    }

    /// `h(e_pp) + 2 h'(e_pp) (e_py - e_pp)`, simplified per tag.
    pub fn score(&self, e_pp: f64, e_py: f64) -> Result<f64> {
        if self.needs_positive() && !(e_pp > 0.0) {
            return Err(Error::Degenerate);
        }
        Ok(match self {
            HFunction::Linear => 0.5 * e_pp - e_py,
            HFunction::Log => -0.5 * e_pp.ln() - e_py / e_pp + 1.0,
            HFunction::Sqrt => -e_py / e_pp.sqrt(),
            HFunction::ShiftedLog { gamma } => -0.5 * (e_pp + gamma).ln() - (e_py - e_pp) / (e_pp + gamma),
        })
    }

    /// `S(P, P) = h(e_pp)`.
    pub fn entropy(&self, e_pp: f64) -> Result<f64> {
        if self.needs_positive() && !(e_pp > 0.0) {
            return Err(Error::Degenerate);
        }
        Ok(self.eval(e_pp))
    }

    /// Gradient of [`HFunction::score`] in `(e_pp, e_py)`.
    pub fn score_gradient(&self, e_pp: f64, e_py: f64) -> (f64, f64) {
        let d1 = self.deriv(e_pp);
        (-d1 + 2.0 * self.second_deriv(e_pp) * (e_py - e_pp), 2.0 * d1)
    }

    pub fn name(&self) -> &'static str {
        match self {
            HFunction::Linear => "linear",
            HFunction::Log => "log",
            HFunction::Sqrt => "sqrt",
            HFunction::ShiftedLog { .. } => "shifted_log",
        }
    }
}

/// A scoring rule with its options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rule {
    Crps,
    Scrps,
    Logs,
    Dss,
    Rcrps { c: f64 },
    Rscrps { c: f64 },
    Kernel(KernelSpec),
    GenKernel { h: HFunction, kernel: KernelSpec },
}

impl Rule {
    /// `(h, kernel, constant)` for kernel-type rules; `None` for logs and dss.
    pub fn kernel_form(&self) -> Option<(HFunction, KernelSpec, f64)> {
        match *self {
            Rule::Crps => Some((HFunction::Linear, KernelSpec::absolute(), 0.0)),
            Rule::Scrps => Some((HFunction::Log, KernelSpec::absolute(), -1.0)),
            Rule::Rcrps { c } => Some((HFunction::Linear, KernelSpec::truncated(c).ok()?, 0.0)),
            Rule::Rscrps { c } => Some((HFunction::Log, KernelSpec::truncated(c).ok()?, -1.0)),
            Rule::Kernel(k) => Some((HFunction::Linear, k, 0.0)),
            Rule::GenKernel { h, kernel } => Some((h, kernel, 0.0)),
            Rule::Logs | Rule::Dss => None,
        }
    }

    /// Checks option ranges (truncation level, kernel exponent, h parameters).
    pub fn validate(self) -> Result<Self> {
        if let Rule::Rcrps { c } | Rule::Rscrps { c } = self {
            if !(c > 0.0) {
                return Err(Error::domain(format!("truncation level c must be positive, got {c}")));
            }
        }
        Ok(self)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kernel_opts = |f: &mut fmt::Formatter<'_>, k: &KernelSpec| -> fmt::Result {
            write!(f, ":alpha={}", k.alpha())?;
            if let Some(c) = k.trunc() {
                write!(f, ":c={c}")?;
            }
            Ok(())
        };
        match self {
            Rule::Crps => f.write_str("crps"),
            Rule::Scrps => f.write_str("scrps"),
            Rule::Logs => f.write_str("logs"),
            Rule::Dss => f.write_str("dss"),
            Rule::Rcrps { c } => write!(f, "rcrps:c={c}"),
            Rule::Rscrps { c } => write!(f, "rscrps:c={c}"),
            Rule::Kernel(k) => {
                f.write_str("kernel")?;
                kernel_opts(f, k)
            }
            Rule::GenKernel { h, kernel } => {
                write!(f, "genkernel:h={}", h.name())?;
                if let HFunction::ShiftedLog { gamma } = h {
                    write!(f, ":gamma={gamma}")?;
                }
                kernel_opts(f, kernel)
            }
        }
    }
}

impl Serialize for Rule {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Rule {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Parses `name[:key=value]*`, e.g. `crps`, `rcrps:c=2`, `kernel:alpha=1.5`,
/// `genkernel:h=shifted_log:gamma=0.1:alpha=1`.
impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default().to_ascii_lowercase();
        let mut opts: Vec<(String, String)> = Vec::new();
        for p in parts {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("rule option `{p}` in `{s}` is not key=value")))?;
            if opts.iter().any(|(seen, _)| seen == k) {
                return Err(Error::Config(format!("rule option `{k}` repeated in `{s}`")));
            }
            opts.push((k.trim().to_ascii_lowercase(), v.trim().to_string()));
        }
        let allowed: &[&str] = match name.as_str() {
            "crps" | "scrps" | "logs" | "dss" => &[],
            "rcrps" | "rscrps" => &["c"],
            "kernel" => &["alpha", "c"],
            "genkernel" => &["h", "gamma", "alpha", "c"],
            _ => return Err(Error::Config(format!("unknown rule `{name}`"))),
        };
        if let Some((k, _)) = opts.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(Error::Config(format!("rule `{name}` takes no option `{k}`")));
        }
        let get = |key: &str| opts.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str| -> Result<Option<f64>> {
            get(key)
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::Config(format!("option {key}={v} in `{s}` is not a number")))
                })
                .transpose()
        };
        let need = |key: &str| -> Result<f64> {
            num(key)?.ok_or_else(|| Error::Config(format!("rule `{name}` needs option `{key}`")))
        };
        let rule = match name.as_str() {
            "crps" => Rule::Crps,
            "scrps" => Rule::Scrps,
            "logs" => Rule::Logs,
            "dss" => Rule::Dss,
            "rcrps" => Rule::Rcrps { c: need("c")? },
            "rscrps" => Rule::Rscrps { c: need("c")? },
            "kernel" => Rule::Kernel(KernelSpec::new(need("alpha")?, num("c")?)?),
            _ => {
                let h = match get("h") {
                    Some("linear") => HFunction::Linear,
                    Some("log") => HFunction::Log,
                    Some("sqrt") => HFunction::Sqrt,
                    Some("shifted_log") => HFunction::shifted_log(need("gamma")?)?,
                    Some(other) => return Err(Error::Config(format!("unknown h-function `{other}`"))),
                    None => return Err(Error::Config("rule `genkernel` needs option `h`".into())),
                };
                if get("gamma").is_some() && !matches!(h, HFunction::ShiftedLog { .. }) {
                    return Err(Error::Config("option `gamma` only applies to h=shifted_log".into()));
                }
                Rule::GenKernel { h, kernel: KernelSpec::new(num("alpha")?.unwrap_or(1.0), num("c")?)? }
            }
        };
        rule.validate()
    }
}

/// One score value with provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreValue {
    pub value: f64,
    pub method: Method,
    /// Monte-Carlo standard error; 0 for exact evaluations.
    pub std_error: f64,
}

impl ScoreValue {
    fn exact(value: f64, method: Method) -> Self {
        ScoreValue { value, method, std_error: 0.0 }
    }
}

/// `S(P, y)` together with the entropy `H(P) = S(P, P)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evaluation {
    pub score: ScoreValue,
    pub entropy: ScoreValue,
}

impl Evaluation {
    /// Calibration residual `S(P, y) - H(P)`.
    pub fn residual(&self) -> f64 {
        self.score.value - self.entropy.value
    }
}

fn unsupported(rule: &Rule, p: &PredictiveDistribution) -> Error {
    Error::Unsupported { rule: rule.to_string(), kind: p.kind().to_string() }
}

/// Negative differential entropy (negative Shannon entropy for counts).
fn log_entropy(rule: &Rule, p: &PredictiveDistribution) -> Result<f64> {
    use std::f64::consts::{E, PI};
    match p {
        PredictiveDistribution::Gaussian(g) => Ok(-0.5 * (2.0 * PI * E * g.sigma * g.sigma).ln()),
        PredictiveDistribution::Laplace(l) => Ok(-1.0 - (2.0 * l.b).ln()),
        PredictiveDistribution::NegBin(nb) => Ok(nb.pmf_table().iter().filter(|q| **q > 0.0).map(|q| q * q.ln()).sum()),
        PredictiveDistribution::LocationScale(ls) if !ls.base.is_discrete() => {
            Ok(log_entropy(rule, &ls.base)? - ls.sigma.ln())
        }
        _ => Err(unsupported(rule, p)),
    }
}

fn kernel_evaluation(h: HFunction, offset: f64, ke: &KernelExpectations) -> Result<Evaluation> {
    let score = h.score(ke.e_pp, ke.e_py)? + offset;
    let entropy = h.entropy(ke.e_pp)? + offset;
    let (d_pp, d_py) = h.score_gradient(ke.e_pp, ke.e_py);
    Ok(Evaluation {
        score: ScoreValue { value: score, method: ke.method, std_error: ke.std_error(d_pp, d_py) },
        entropy: ScoreValue { value: entropy, method: ke.method, std_error: ke.std_error(h.deriv(ke.e_pp), 0.0) },
    })
}

/// Score and entropy of `P` at `y`. Both come from the same kernel
/// expectations, so Monte-Carlo residuals are internally consistent.
pub fn evaluate(rule: &Rule, p: &PredictiveDistribution, y: f64, mc: &MonteCarlo) -> Result<Evaluation> {
    if let PredictiveDistribution::Gaussian(g) = p {
        let closed = match *rule {
            Rule::Crps => Some((gaussian::crps(g, y), -g.sigma / crate::numerics::SQRT_PI)),
            Rule::Scrps => Some((gaussian::scrps(g, y), -1.0 - 0.5 * (2.0 * g.sigma / crate::numerics::SQRT_PI).ln())),
            Rule::Rcrps { c } => {
                let e_pp = crate::kernels::e_function(0.0, std::f64::consts::SQRT_2 * g.sigma, c)?;
                Some((gaussian::rcrps(g, y, c), -0.5 * e_pp))
            }
            Rule::Rscrps { c } => {
                let e_pp = crate::kernels::e_function(0.0, std::f64::consts::SQRT_2 * g.sigma, c)?;
                Some((gaussian::rscrps(g, y, c), -1.0 - 0.5 * e_pp.ln()))
            }
            _ => None,
        };
        if let Some((s, h)) = closed {
            return Ok(Evaluation {
                score: ScoreValue::exact(s, Method::Analytic),
                entropy: ScoreValue::exact(h, Method::Analytic),
            });
        }
    }
    match rule {
        Rule::Logs => {
            let s = p.log_pdf(y)?;
            let method =
                if matches!(p, PredictiveDistribution::NegBin(_)) { Method::ExactSum } else { Method::Analytic };
            Ok(Evaluation {
                score: ScoreValue::exact(s, Method::Analytic),
                entropy: ScoreValue::exact(log_entropy(rule, p)?, method),
            })
        }
        Rule::Dss => {
            let (m, v) = (p.mean(), p.variance());
            if !(v > 0.0) {
                return Err(Error::Degenerate);
            }
            let method =
                if matches!(p, PredictiveDistribution::Ensemble(_)) { Method::Ensemble } else { Method::Analytic };
            Ok(Evaluation {
                score: ScoreValue::exact(-(y - m).powi(2) / (2.0 * v) - 0.5 * v.ln(), method),
                entropy: ScoreValue::exact(-0.5 - 0.5 * v.ln(), method),
            })
        }
        _ => {
            let (h, k, offset) = rule.kernel_form().expect("kernel rule");
            let ke = expectations(&k, p, y, mc)?;
            kernel_evaluation(h, offset, &ke)
        }
    }
}

pub fn score(rule: &Rule, p: &PredictiveDistribution, y: f64, mc: &MonteCarlo) -> Result<ScoreValue> {
    evaluate(rule, p, y, mc).map(|e| e.score)
}

/// Generalized entropy `H(P) = S(P, P)`.
pub fn entropy(rule: &Rule, p: &PredictiveDistribution, mc: &MonteCarlo) -> Result<ScoreValue> {
    evaluate(rule, p, p.mean(), mc).map(|e| e.entropy)
}

pub fn log_score(p: &PredictiveDistribution, y: f64) -> Result<ScoreValue> {
    score(&Rule::Logs, p, y, &MonteCarlo::default())
}

/// `E_{P,P} g / 2 - E_P g(X, y)`.
pub fn kernel_score(k: &KernelSpec, p: &PredictiveDistribution, y: f64, mc: &MonteCarlo) -> Result<ScoreValue> {
    score(&Rule::Kernel(*k), p, y, mc)
}

pub fn generalized_kernel_score(
    h: &HFunction,
    k: &KernelSpec,
    p: &PredictiveDistribution,
    y: f64,
    mc: &MonteCarlo,
) -> Result<ScoreValue> {
    score(&Rule::GenKernel { h: *h, kernel: *k }, p, y, mc)
}

/// `-E_P|X - y| / E_{P,P}|X - Y| - log(E_{P,P}|X - Y|) / 2`.
pub fn scrps(p: &PredictiveDistribution, y: f64, mc: &MonteCarlo) -> Result<ScoreValue> {
    score(&Rule::Scrps, p, y, mc)
}

/// `(rCRPS, rSCRPS)` with truncation level `c`.
pub fn robust_scores(c: f64, p: &PredictiveDistribution, y: f64, mc: &MonteCarlo) -> Result<(ScoreValue, ScoreValue)> {
    let r1 = Rule::Rcrps { c }.validate()?;
    Ok((score(&r1, p, y, mc)?, score(&Rule::Rscrps { c }, p, y, mc)?))
}

pub fn dss(p: &PredictiveDistribution, y: f64) -> Result<ScoreValue> {
    score(&Rule::Dss, p, y, &MonteCarlo::default())
}

/// `S(P, y) / |S(P, P)| - log |S(P, P)|` for a rule whose scores are negative.
pub fn transform_score(rule: &Rule, p: &PredictiveDistribution, y: f64, mc: &MonteCarlo) -> Result<ScoreValue> {
    let ev = evaluate(rule, p, y, mc)?;
    let (a, spp) = (ev.score.value, ev.entropy.value);
    if a >= 0.0 {
        return Err(Error::Sign(a));
    }
    if spp >= 0.0 {
        return Err(Error::Sign(spp));
    }
    let b = -spp;
    let value = a / b - b.ln();
    let method = ev.score.method.combine(ev.entropy.method);
    let mut std_error = 0.0;
    if method == Method::MonteCarlo {
        // chain rule through the kernel form; only kernel rules reach here
        let (h, k, _) = rule.kernel_form().expect("Monte Carlo implies a kernel rule");
        let ke = expectations(&k, p, y, mc)?;
        let (da_pp, da_py) = h.score_gradient(ke.e_pp, ke.e_py);
        let db_pp = -h.deriv(ke.e_pp);
        let g_pp = da_pp / b - (a / (b * b) + 1.0 / b) * db_pp;
        let g_py = da_py / b;
        std_error = ke.std_error(g_pp, g_py);
    }
    Ok(ScoreValue { value, method, std_error })
}

/// Expected score of a Gaussian forecast under a Gaussian truth.
pub use gaussian::expected_score as expected_gaussian_score;

/// Per-observation row of a [`ScoreReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObsScore {
    pub score: f64,
    pub entropy: f64,
    pub residual: f64,
    pub method: Method,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub rule: Rule,
    pub per_obs: Vec<ObsScore>,
    pub average: f64,
    pub average_entropy: f64,
    pub average_residual: f64,
    pub n: usize,
}

/// Average score over `(P_i, y_i)` pairs. Observations are scored in
/// parallel; observation `i` draws Monte-Carlo samples from stream `i`.
pub fn average_score(rule: &Rule, data: &[(PredictiveDistribution, f64)], mc: &MonteCarlo) -> Result<ScoreReport> {
    if data.is_empty() {
        return Err(Error::domain("cannot average over an empty dataset"));
    }
    let results: Vec<Result<Evaluation>> =
        data.par_iter().enumerate().map(|(i, (p, y))| evaluate(rule, p, *y, &mc.with_stream(i as u64))).collect();
    let mut per_obs = Vec::with_capacity(data.len());
    for (i, r) in results.into_iter().enumerate() {
        let ev = r.map_err(|e| e.at_observation(i))?;
        per_obs.push(ObsScore {
            score: ev.score.value,
            entropy: ev.entropy.value,
            residual: ev.residual(),
            method: ev.score.method,
            std_error: ev.score.std_error,
        });
    }
    let n = per_obs.len();
    let mean = |f: fn(&ObsScore) -> f64| per_obs.iter().map(f).sum::<f64>() / n as f64;
    Ok(ScoreReport {
        rule: *rule,
        average: mean(|o| o.score),
        average_entropy: mean(|o| o.entropy),
        average_residual: mean(|o| o.residual),
        per_obs,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::GaussianDist;
    use crate::numerics::SQRT_PI;
    use proptest::prelude::*;

    fn gauss(mu: f64, s: f64) -> PredictiveDistribution {
        PredictiveDistribution::gaussian(mu, s).unwrap()
    }

    fn mc() -> MonteCarlo {
        MonteCarlo::default()
    }

    #[test]
    fn rule_parsing_round_trips() {
        for s in [
            "crps",
            "scrps",
            "logs",
            "dss",
            "rcrps:c=2",
            "rscrps:c=0.5",
            "kernel:alpha=1.5",
            "kernel:alpha=1:c=2",
            "genkernel:h=log:alpha=2",
            "genkernel:h=shifted_log:gamma=0.1:alpha=1",
        ] {
            let r: Rule = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        assert_eq!("genkernel:h=sqrt".parse::<Rule>().unwrap().to_string(), "genkernel:h=sqrt:alpha=1");
        for bad in [
            "",
            "foo",
            "rcrps",
            "rcrps:c=-1",
            "kernel",
            "kernel:alpha=3",
            "crps:c=2",
            "genkernel:h=log:gamma=1",
            "genkernel:h=shifted_log",
            "rcrps:c",
        ] {
            assert!(bad.parse::<Rule>().is_err(), "{bad}");
        }
    }

    #[test]
    fn h_functions_decreasing_and_convex() {
        let hs = [HFunction::Linear, HFunction::Log, HFunction::Sqrt, HFunction::shifted_log(0.1).unwrap()];
        for h in hs {
            for i in 1..2000 {
                let x = 0.01 + 0.005 * i as f64;
                let step = 1e-4 * x;
                let (a, b, c) = (h.eval(x - step), h.eval(x), h.eval(x + step));
                assert!(c < b && b < a, "{h:?} not decreasing at {x}");
                assert!(a + c - 2.0 * b >= -1e-15, "{h:?} not convex at {x}");
                let fd = (c - a) / (2.0 * step);
                assert!((fd - h.deriv(x)).abs() < 1e-5 * h.deriv(x).abs().max(1.0));
                let fd2 = (h.deriv(x + step) - h.deriv(x - step)) / (2.0 * step);
                assert!((fd2 - h.second_deriv(x)).abs() < 1e-4 * h.second_deriv(x).abs().max(1.0));
            }
        }
    }

    #[test]
    fn generalized_linear_is_kernel_score() {
        let k = KernelSpec::absolute();
        let a = generalized_kernel_score(&HFunction::Linear, &k, &gauss(0.0, 1.0), 0.0, &mc()).unwrap();
        assert!((a.value + 0.233_695).abs() < 1e-6);
        assert!((a.value - (1.0 / SQRT_PI - (2.0 / std::f64::consts::PI).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn shifted_log_handles_point_mass() {
        let p = PredictiveDistribution::ensemble(vec![3.0; 10]).unwrap();
        let h = HFunction::shifted_log(0.1).unwrap();
        let s = generalized_kernel_score(&h, &KernelSpec::absolute(), &p, 3.0, &mc()).unwrap();
        assert!((s.value - (-0.5 * 0.1f64.ln())).abs() < 1e-15);
        assert!((s.value - 1.1513).abs() < 1e-4);
        let err = scrps(&p, 3.0, &mc()).unwrap_err();
        assert!(matches!(err, Error::Degenerate));
        assert!(err.to_string().contains("shifted_log"));
        assert!(matches!(
            generalized_kernel_score(&HFunction::Sqrt, &KernelSpec::absolute(), &p, 3.0, &mc()),
            Err(Error::Degenerate)
        ));
    }

    #[test]
    fn crps_point_mass_at_observation_is_zero() {
        let p = PredictiveDistribution::ensemble(vec![1.7]).unwrap();
        assert_eq!(score(&Rule::Crps, &p, 1.7, &mc()).unwrap().value, 0.0);
    }

    #[test]
    fn logs_rejects_ensembles() {
        let p = PredictiveDistribution::ensemble(vec![1.0, 2.0]).unwrap();
        assert!(matches!(log_score(&p, 1.0), Err(Error::Unsupported { .. })));
    }

    #[test]
    fn gaussian_paths_agree_with_kernel_composition() {
        let base = PredictiveDistribution::from(GaussianDist::standard());
        for &(mu, s, y) in &[(0.0, 1.0, 0.0), (1.0, 0.3, -2.0), (-4.0, 7.0, 3.0)] {
            let g = gauss(mu, s);
            // a location-scale wrapper skips the closed forms and goes through
            // the kernel expectations
            let ls = PredictiveDistribution::location_scale(base.clone(), mu, s).unwrap();
            for r in [Rule::Crps, Rule::Scrps, Rule::Rcrps { c: 1.5 }, Rule::Rscrps { c: 1.5 }, Rule::Logs, Rule::Dss] {
                let a = evaluate(&r, &g, y, &mc()).unwrap();
                let b = evaluate(&r, &ls, y, &mc()).unwrap();
                assert!((a.score.value - b.score.value).abs() < 1e-12 * a.score.value.abs().max(1.0), "{r}");
                assert!((a.entropy.value - b.entropy.value).abs() < 1e-12 * a.entropy.value.abs().max(1.0), "{r}");
            }
        }
    }

    #[test]
    fn transform_of_crps_example() {
        let t = transform_score(&Rule::Crps, &gauss(0.0, 1.0), 0.0, &mc()).unwrap();
        // -0.233695 / 0.564190 + 0.572365
        assert!((t.value - 0.158_151).abs() < 1e-6, "{}", t.value);
        let s = scrps(&gauss(0.0, 1.0), 0.0, &mc()).unwrap().value;
        assert!((t.value - 2.0 * s - (1.0 + 2f64.ln())).abs() < 1e-12);
        assert!(matches!(transform_score(&Rule::Logs, &gauss(0.0, 0.01), 0.0, &mc()), Err(Error::Sign(_))));
    }

    #[test]
    fn transform_monte_carlo_carries_error() {
        let k = KernelSpec::power(1.5).unwrap();
        let t = transform_score(&Rule::Kernel(k), &gauss(0.0, 1.0), 0.7, &MonteCarlo::new(20_000, 1)).unwrap();
        assert_eq!(t.method, Method::MonteCarlo);
        assert!(t.std_error > 0.0 && t.std_error < 0.05);
    }

    #[test]
    fn entropies_match_closed_forms() {
        let g = gauss(0.3, 2.0);
        let crps_h = entropy(&Rule::Crps, &g, &mc()).unwrap().value;
        assert!((crps_h + 2.0 / SQRT_PI).abs() < 1e-15);
        let dss_h = entropy(&Rule::Dss, &g, &mc()).unwrap().value;
        assert!((dss_h + 0.5 + 2f64.ln()).abs() < 1e-15);
        // entropy is the expected score under the forecast itself
        for r in [Rule::Crps, Rule::Scrps, Rule::Logs, Rule::Dss, Rule::Rcrps { c: 1.0 }, Rule::Rscrps { c: 1.0 }] {
            let gd = GaussianDist::new(0.3, 2.0).unwrap();
            let e = expected_gaussian_score(&r, &gd, &gd).unwrap();
            let h = entropy(&r, &g, &mc()).unwrap().value;
            assert!((e - h).abs() < 1e-12, "{r}: {e} vs {h}");
        }
    }

    #[test]
    fn negbin_crps_matches_step_identity() {
        let nb = PredictiveDistribution::negbin(3.5, 2.0).unwrap();
        for y in [0.0, 2.0, 7.0, 40.0] {
            let s = score(&Rule::Crps, &nb, y, &mc()).unwrap();
            assert_eq!(s.method, Method::ExactSum);
            let mut step = 0.0;
            for k in 0..2000 {
                let f = nb.cdf(k as f64);
                let ind = if k as f64 >= y { 1.0 } else { 0.0 };
                step += (f - ind).powi(2);
            }
            assert!((s.value + step).abs() < 1e-9, "{y}: {} vs {}", s.value, -step);
        }
    }

    #[test]
    fn average_score_table_one_means() {
        let m1 = vec![(gauss(0.0, 0.01), 0.0), (gauss(5.0, 0.8), 0.5)];
        let m2 = vec![(gauss(0.0, 0.1), 0.0), (gauss(4.9, 0.85), 0.5)];
        let avg = |r: Rule, d: &[(PredictiveDistribution, f64)]| average_score(&r, d, &mc()).unwrap().average;
        assert!((avg(Rule::Crps, &m1) + 2.0255).abs() <= 1e-4);
        assert!((avg(Rule::Logs, &m1) + 6.4149).abs() <= 1e-4);
        assert!((avg(Rule::Scrps, &m1) + 1.6994).abs() <= 1e-4);
        assert!((avg(Rule::Crps, &m2) + 1.9719).abs() <= 1e-4);
        assert!((avg(Rule::Logs, &m2) + 6.3853).abs() <= 1e-4);
        assert!((avg(Rule::Scrps, &m2) + 2.0914).abs() <= 1e-4);
        let single = average_score(&Rule::Crps, &m1[..1], &mc()).unwrap();
        assert_eq!(single.average, single.per_obs[0].score);
    }

    #[test]
    fn average_score_reports_offending_index() {
        let data = vec![(gauss(0.0, 1.0), 0.0), (PredictiveDistribution::ensemble(vec![1.0, 2.0]).unwrap(), 1.0)];
        match average_score(&Rule::Logs, &data, &mc()) {
            Err(Error::AtObservation { index, source }) => {
                assert_eq!(index, 1);
                assert!(matches!(*source, Error::Unsupported { .. }));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn calibrated_residuals_average_near_zero() {
        let mut rng = crate::numerics::RngStream::new(4, 0);
        let data: Vec<(PredictiveDistribution, f64)> = (0..20_000)
            .map(|i| {
                let s = 0.5 + (i % 7) as f64;
                (gauss(0.0, s), s * rng.std_normal())
            })
            .collect();
        for r in [Rule::Crps, Rule::Scrps, Rule::Logs] {
            let rep = average_score(&r, &data, &mc()).unwrap();
            let sd = (rep.per_obs.iter().map(|o| o.residual.powi(2)).sum::<f64>() / rep.n as f64).sqrt();
            assert!(rep.average_residual.abs() < 4.0 * sd / (rep.n as f64).sqrt(), "{r}");
            assert!((rep.average - rep.per_obs.iter().map(|o| o.score).sum::<f64>() / rep.n as f64).abs() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn scrps_crps_bridge(mu in -10.0f64..10.0, s in 0.05f64..20.0, y in -30.0f64..30.0) {
            let g = gauss(mu, s);
            let c = score(&Rule::Crps, &g, y, &mc()).unwrap().value;
            let cpp = entropy(&Rule::Crps, &g, &mc()).unwrap().value;
            let sc = score(&Rule::Scrps, &g, y, &mc()).unwrap().value;
            let bridge = -0.5 * (1.0 + c / cpp + (2.0 * cpp.abs()).ln());
            prop_assert!((sc - bridge).abs() < 1e-12 * sc.abs().max(1.0));
        }

        #[test]
        fn dss_identity(mu in -10.0f64..10.0, s in 0.05f64..20.0, y in -30.0f64..30.0) {
            let g = gauss(mu, s);
            let k2 = KernelSpec::power(2.0).unwrap();
            let gk = generalized_kernel_score(&HFunction::Log, &k2, &g, y, &mc()).unwrap().value;
            let d = dss(&g, y).unwrap().value;
            prop_assert!((gk - d - 0.5 * (1.0 - 2f64.ln())).abs() < 1e-12 * d.abs().max(1.0));
        }

        #[test]
        fn linear_h_is_kernel_score(mu in -5.0f64..5.0, s in 0.1f64..5.0, y in -10.0f64..10.0, alpha in prop::sample::select(vec![1.0, 2.0])) {
            let k = KernelSpec::power(alpha).unwrap();
            for p in [gauss(mu, s), PredictiveDistribution::laplace(mu, s).unwrap(), PredictiveDistribution::ensemble(vec![mu, mu + s, y]).unwrap()] {
                let a = generalized_kernel_score(&HFunction::Linear, &k, &p, y, &mc()).unwrap();
                let b = kernel_score(&k, &p, y, &mc()).unwrap();
                prop_assert_eq!(a.value, b.value);
            }
        }

        #[test]
        fn transform_crps_is_affine_in_scrps(mu in -5.0f64..5.0, s in 0.1f64..5.0, y in -10.0f64..10.0) {
            let g = gauss(mu, s);
            let t = transform_score(&Rule::Crps, &g, y, &mc()).unwrap().value;
            let sc = scrps(&g, y, &mc()).unwrap().value;
            prop_assert!((t - 2.0 * sc - (1.0 + 2f64.ln())).abs() < 1e-10);
        }
    }
}
