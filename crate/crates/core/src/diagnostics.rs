//! Numerical checks of scale behaviour and robustness.
//!
//! * Scale functions: for a location-scale family `Q_theta = mu + sigma Z`, the
//!   drop `D(t) = S(Q_theta, Q_theta) - S(Q_{theta + t sigma r}, Q_theta)`
//!   behaves like `s(Q_theta, r) t^p`. Fits use the symmetrised drop
//!   `(D(t) + D(-t)) / 2`, which has the same leading term. Local scale invariance means `s` does
//!   not depend on `sigma`.
//! * Sensitivity: the growth exponent of `|S(P, y)|` as `|y|` grows.
//! * Propriety sweeps: the expected score over a forecast grid peaks at the truth.

use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{GaussianDist, PredictiveDistribution};
use crate::error::{Error, Result};
use crate::kernels::{Method, MonteCarlo};
use crate::scores::{expected_gaussian_score, score, Rule};

/// `t` values used when none are given.
pub const DEFAULT_T_GRID: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

/// A location-scale family member `Q_theta` and a perturbation direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleProbe {
    /// Law of `Z`.
    pub base: PredictiveDistribution,
    pub mu: f64,
    pub sigma: f64,
    /// `(r_1, r_2)`: location and scale components of the direction.
    pub r: (f64, f64),
    pub t_grid: Vec<f64>,
}

impl ScaleProbe {
    pub fn new(base: PredictiveDistribution, mu: f64, sigma: f64, r: (f64, f64)) -> Self {
        ScaleProbe { base, mu, sigma, r, t_grid: DEFAULT_T_GRID.to_vec() }
    }

    pub fn with_t_grid(mut self, t_grid: Vec<f64>) -> Self {
        self.t_grid = t_grid;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0) {
            return Err(Error::domain(format!("probe sigma must be positive, got {}", self.sigma)));
        }
        if self.t_grid.len() < 2 {
            return Err(Error::domain("the t grid needs at least two points"));
        }
        for &t in &self.t_grid {
            if !(t > 0.0) || !(1.0 - t * self.r.1.abs() > 0.0) {
                return Err(Error::domain(format!("t = {t} leaves the parameter space for r = {:?}", self.r)));
            }
        }
        if self.r == (0.0, 0.0) {
            return Err(Error::domain("direction r must be nonzero"));
        }
        Ok(())
    }

    fn truth(&self) -> Result<PredictiveDistribution> {
        PredictiveDistribution::location_scale(self.base.clone(), self.mu, self.sigma)
    }

    fn perturbed(&self, t: f64) -> Result<PredictiveDistribution> {
        PredictiveDistribution::location_scale(
            self.base.clone(),
            self.mu + t * self.sigma * self.r.0,
            self.sigma * (1.0 + t * self.r.1),
        )
    }
}

/// One grid point of a scale-function fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoreDrop {
    pub t: f64,
    pub drop: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleFit {
    pub s_hat: f64,
    pub p_hat: f64,
    /// Drops sorted by increasing `t`.
    pub drops: Vec<ScoreDrop>,
    pub method: Method,
}

/// Gaussian view of a distribution, when it is one.
pub fn as_gaussian(p: &PredictiveDistribution) -> Option<GaussianDist> {
    match p {
        PredictiveDistribution::Gaussian(g) => Some(*g),
        PredictiveDistribution::LocationScale(ls) => {
            let g = as_gaussian(&ls.base)?;
            GaussianDist::new(ls.mu + ls.sigma * g.mu, ls.sigma * g.sigma).ok()
        }
        _ => None,
    }
}

/// Symmetrised drops for every `t`, sharing truth draws across `t` on the
/// Monte-Carlo path.
fn score_drops(rule: &Rule, probe: &ScaleProbe, mc: &MonteCarlo) -> Result<(Vec<ScoreDrop>, Method)> {
    let truth = probe.truth()?;
    let forecasts: Vec<[PredictiveDistribution; 2]> =
        probe.t_grid.iter().map(|&t| Ok([probe.perturbed(t)?, probe.perturbed(-t)?])).collect::<Result<_>>()?;

    if let Some(q) = as_gaussian(&truth) {
        if let Ok(at_truth) = expected_gaussian_score(rule, &q, &q) {
            let mut out = Vec::with_capacity(forecasts.len());
            for (t, [a, b]) in probe.t_grid.iter().zip(&forecasts) {
                let e = |f: &PredictiveDistribution| {
                    expected_gaussian_score(rule, &as_gaussian(f).expect("same family as the truth"), &q)
                };
                out.push(ScoreDrop { t: *t, drop: at_truth - 0.5 * (e(a)? + e(b)?), std_error: 0.0 });
            }
            return Ok((out, Method::Analytic));
        }
    }

    if mc.draws < 2 {
        return Err(Error::domain("Monte Carlo needs at least 2 draws"));
    }
    let ys = truth.sample(mc.draws, &mut mc.rng());
    // inner score evaluations get their own stream family
    let inner = MonteCarlo { seed: mc.seed ^ 0x9E37_79B9_7F4A_7C15, ..*mc };
    let chunk = 4096;
    let per_chunk: Vec<Result<Vec<Vec<f64>>>> = ys
        .par_chunks(chunk)
        .enumerate()
        .map(|(ci, ys)| {
            let mut diffs = vec![Vec::with_capacity(ys.len()); forecasts.len()];
            for (j, &y) in ys.iter().enumerate() {
                let stream = (ci * chunk + j) as u64;
                let base = score(rule, &truth, y, &inner.with_stream(stream))?.value;
                for (k, [a, b]) in forecasts.iter().enumerate() {
                    let sa = score(rule, a, y, &inner.with_stream(stream))?.value;
                    let sb = score(rule, b, y, &inner.with_stream(stream))?.value;
                    diffs[k].push(base - 0.5 * (sa + sb));
                }
            }
            Ok(diffs)
        })
        .collect();
    let mut diffs = vec![Vec::with_capacity(ys.len()); forecasts.len()];
    for c in per_chunk {
        for (k, d) in c?.into_iter().enumerate() {
            diffs[k].extend(d);
        }
    }
    let n = ys.len() as f64;
    let out = probe
        .t_grid
        .iter()
        .zip(&diffs)
        .map(|(t, d)| {
            let m = d.iter().sum::<f64>() / n;
            let v = d.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
            ScoreDrop { t: *t, drop: m, std_error: (v / n).sqrt() }
        })
        .collect();
    Ok((out, Method::MonteCarlo))
}

/// Polynomial extrapolation to `t = 0` through all `(t_i, v_i)` (Neville).
fn extrapolate_to_zero(t: &[f64], v: &[f64]) -> f64 {
    let mut p = v.to_vec();
    let n = p.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (t[i + m] * p[i] - t[i] * p[i + 1]) / (t[i + m] - t[i]);
        }
    }
    p[0]
}

/// Fits `D(t) ~ s t^p`.
///
/// Local log-log slopes between neighbouring grid points are extrapolated to
/// `t = 0` to give `p`, then `D(t) / t^p` is extrapolated the same way to give
/// `s`. Symmetrisation leaves only even correction terms, so extrapolation
/// runs in `t^2`.
pub fn estimate_scale_function(rule: &Rule, probe: &ScaleProbe, mc: &MonteCarlo) -> Result<ScaleFit> {
    probe.validate()?;
    let (mut drops, method) = score_drops(rule, probe, mc)?;
    drops.sort_by(|a, b| a.t.total_cmp(&b.t));
    if let Some(d) = drops.iter().find(|d| !(d.drop > 0.0) || d.std_error > 0.5 * d.drop) {
        return Err(Error::NoiseDominated { std_error: d.std_error, min_drop: d.drop });
    }
    let ts: Vec<f64> = drops.iter().map(|d| d.t * d.t).collect();
    let slopes: Vec<f64> = drops.windows(2).map(|w| (w[1].drop / w[0].drop).ln() / (w[1].t / w[0].t).ln()).collect();
    let p_hat = extrapolate_to_zero(&ts[..slopes.len()], &slopes);
    let q: Vec<f64> = drops.iter().map(|d| d.drop / d.t.powf(p_hat)).collect();
    let s_hat = extrapolate_to_zero(&ts, &q);
    Ok(ScaleFit { s_hat, p_hat, drops, method })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    /// `(sigma, fit)` per grid value.
    pub fits: Vec<(f64, ScaleFit)>,
    /// `max |s_i / mean(s) - 1|`.
    pub max_rel_spread: f64,
    /// Least-squares slope of `log s_hat` against `log sigma`.
    pub sigma_exponent: f64,
}

/// Scale functions across `sigma_grid`, at `mu = 0`.
pub fn local_invariance_check(
    rule: &Rule,
    base: &PredictiveDistribution,
    r: (f64, f64),
    sigma_grid: &[f64],
    t_grid: &[f64],
    mc: &MonteCarlo,
) -> Result<InvarianceReport> {
    if sigma_grid.len() < 2 {
        return Err(Error::domain("sigma grid needs at least two values"));
    }
    let fits: Vec<(f64, ScaleFit)> = sigma_grid
        .iter()
        .enumerate()
        .map(|(i, &sigma)| {
            let probe = ScaleProbe::new(base.clone(), 0.0, sigma, r).with_t_grid(t_grid.to_vec());
            estimate_scale_function(rule, &probe, &mc.with_stream(i as u64)).map(|f| (sigma, f))
        })
        .collect::<Result<_>>()?;
    let s: Vec<f64> = fits.iter().map(|(_, f)| f.s_hat).collect();
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    let max_rel_spread = s.iter().map(|v| (v / mean - 1.0).abs()).fold(0.0, f64::max);
    let xs: Vec<f64> = sigma_grid.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = s.iter().map(|v| v.ln()).collect();
    Ok(InvarianceReport { fits, max_rel_spread, sigma_exponent: ls_slope(&xs, &ys) })
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SensitivityFit {
    pub alpha_hat: f64,
    /// `(y, S(P, y))` over the whole grid.
    pub points: Vec<(f64, f64)>,
}

/// Geometric grid `10^from, ..., 10^to` with `per_decade` points per decade.
pub fn geometric_grid(from: i32, to: i32, per_decade: usize) -> Vec<f64> {
    let steps = (to - from) as usize * per_decade;
    (0..=steps).map(|i| 10f64.powf(from as f64 + i as f64 / per_decade as f64)).collect()
}

/// Slope of `log |S(P, y)|` against `log y` over the upper half of `y_grid`.
pub fn estimate_sensitivity(
    rule: &Rule,
    p: &PredictiveDistribution,
    y_grid: &[f64],
    mc: &MonteCarlo,
) -> Result<SensitivityFit> {
    if y_grid.len() < 3 {
        return Err(Error::domain("sensitivity grid needs at least three points"));
    }
    if y_grid.windows(2).any(|w| !(w[1] > w[0])) || !(y_grid[0] > 0.0) {
        return Err(Error::domain("sensitivity grid must be positive and strictly increasing"));
    }
    let points: Vec<(f64, f64)> = y_grid
        .iter()
        .enumerate()
        .map(|(i, &y)| score(rule, p, y, &mc.with_stream(i as u64)).map(|s| (y, s.value)))
        .collect::<Result<_>>()?;
    let tail = &points[points.len() / 2..];
    if let Some((y, _)) = tail.iter().find(|(_, s)| *s == 0.0) {
        return Err(Error::domain(format!("score vanishes at y = {y}; sensitivity undefined")));
    }
    let xs: Vec<f64> = tail.iter().map(|(y, _)| y.ln()).collect();
    let ys: Vec<f64> = tail.iter().map(|(_, s)| s.abs().ln()).collect();
    Ok(SensitivityFit { alpha_hat: ls_slope(&xs, &ys), points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProprietyResult {
    pub argmax_mu: f64,
    pub argmax_sigma: f64,
    pub max_expected: f64,
    pub at_truth: bool,
}

/// Grid of `n` means `mu + sigma * [-1, 1]` and `n` scales `sigma * 2^[-1, 1]`,
/// both passing exactly through the truth when `n` is odd.
pub fn forecast_grid(truth: &GaussianDist, n: usize) -> (Vec<f64>, Vec<f64>) {
    let half = (n / 2) as f64;
    let steps: Vec<f64> = (0..n).map(|i| (i as f64 - half) / half.max(1.0)).collect();
    let mus = steps.iter().map(|s| truth.mu + truth.sigma * s).collect();
    let sigmas = steps.iter().map(|s| truth.sigma * 2f64.powf(*s)).collect();
    (mus, sigmas)
}

/// Expected score of every grid forecast under `truth`, and its argmax.
pub fn propriety_sweep(
    rule: &Rule,
    truth: &GaussianDist,
    mu_grid: &[f64],
    sigma_grid: &[f64],
) -> Result<ProprietyResult> {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for &m in mu_grid {
        for &s in sigma_grid {
            let v = expected_gaussian_score(rule, &GaussianDist::new(m, s)?, truth)?;
            if v > best.0 {
                best = (v, m, s);
            }
        }
    }
    let scale = truth.sigma.max(truth.mu.abs()).max(1.0);
    Ok(ProprietyResult {
        argmax_mu: best.1,
        argmax_sigma: best.2,
        max_expected: best.0,
        at_truth: (best.1 - truth.mu).abs() <= 1e-12 * scale && (best.2 - truth.sigma).abs() <= 1e-12 * scale,
    })
}
