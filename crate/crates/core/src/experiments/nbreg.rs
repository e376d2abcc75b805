//! Negative-binomial regression with a log link on synthetic covariates,
//! scored observation by observation with CRPS and SCRPS.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ensure, Validate};
use crate::distributions::{NegBinDist, PredictiveDistribution};
use crate::error::{Error, Result};
use crate::kernels::MonteCarlo;
use crate::numerics::{chol_solve, cholesky, ln_gamma, RngStream, SymMatrix};
use crate::scores::{score, Rule};
use crate::table::Table;

/// Lower clamp on the linear predictor; keeps all-zero responses finite.
pub const ETA_MIN: f64 = -30.0;
const ETA_MAX: f64 = 30.0;
const MAX_OUTER: usize = 200;
const TOL: f64 = 1e-8;
const LOG_S_RANGE: (f64, f64) = (-9.0, 18.0);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NbFit {
    pub theta: Vec<f64>,
    pub s: f64,
    /// From the inverse expected information at the optimum.
    pub std_errors: Vec<f64>,
    pub loglik: f64,
    pub iterations: usize,
}

fn linear_predictor(design: &[Vec<f64>], theta: &[f64]) -> Vec<f64> {
    design.iter().map(|row| row.iter().zip(theta).map(|(x, t)| x * t).sum::<f64>().clamp(ETA_MIN, ETA_MAX)).collect()
}

fn loglik(eta: &[f64], y: &[f64], s: f64) -> f64 {
    let mut ll = 0.0;
    for (e, &yi) in eta.iter().zip(y) {
        let mu = e.exp();
        ll += ln_gamma(yi + s) - ln_gamma(s) - ln_gamma(yi + 1.0) + s * s.ln() + yi * e - (s + yi) * (s + mu).ln();
    }
    ll
}

/// `X^T W X` and `X^T w` for row weights `w_mat` and working vector `w_vec`.
fn normal_equations(design: &[Vec<f64>], w_mat: &[f64], w_vec: &[f64]) -> (SymMatrix, Vec<f64>) {
    let p = design[0].len();
    let mut xtwx = vec![0.0; p * p];
    let mut xtw = vec![0.0; p];
    for ((row, wm), wv) in design.iter().zip(w_mat).zip(w_vec) {
        for a in 0..p {
            xtw[a] += row[a] * wv;
            for b in 0..=a {
                xtwx[a * p + b] += row[a] * row[b] * wm;
            }
        }
    }
    (SymMatrix::from_fn(p, |a, b| xtwx[a * p + b]), xtw)
}

/// Fisher-scoring steps on `theta` with step halving, `s` held fixed.
fn update_theta(design: &[Vec<f64>], y: &[f64], theta: &mut [f64], s: f64) -> Result<f64> {
    let mut eta = linear_predictor(design, theta);
    let mut ll = loglik(&eta, y, s);
    for _ in 0..50 {
        let mu: Vec<f64> = eta.iter().map(|e| e.exp()).collect();
        let w: Vec<f64> = mu.iter().map(|m| m * s / (s + m)).collect();
        let g: Vec<f64> = mu.iter().zip(y).map(|(m, yi)| (yi - m) * s / (s + m)).collect();
        let (info, grad) = normal_equations(design, &w, &g);
        let step = chol_solve(&cholesky(&info)?, &grad)?;
        let mut scale = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let trial: Vec<f64> = theta.iter().zip(&step).map(|(t, d)| t + scale * d).collect();
            let eta_t = linear_predictor(design, &trial);
            let ll_t = loglik(&eta_t, y, s);
            if ll_t > ll {
                let gain = ll_t - ll;
                theta.copy_from_slice(&trial);
                eta = eta_t;
                ll = ll_t;
                improved = gain > TOL * 1e-2;
                break;
            }
            scale *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(ll)
}

/// Golden-section search for the maximizing `log s`, `theta` held fixed.
fn update_s(eta: &[f64], y: &[f64]) -> f64 {
    let f = |ls: f64| loglik(eta, y, ls.exp());
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = LOG_S_RANGE;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-9 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    (0.5 * (a + b)).exp()
}

/// Maximum-likelihood fit of `Y_i ~ NegBin(mu_i, s)`, `log mu_i = x_i^T theta`,
/// by alternating Fisher scoring on `theta` and golden-section search on `log s`.
pub fn fit_negbin(design: &[Vec<f64>], y: &[f64]) -> Result<NbFit> {
    let n = design.len();
    if n == 0 || n != y.len() {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    let p = design[0].len();
    if p == 0 || design.iter().any(|r| r.len() != p) {
        return Err(Error::domain("design rows must share a positive width"));
    }
    if design.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::domain("design matrix has non-finite entries"));
    }
    if y.iter().any(|v| !(*v >= 0.0) || v.fract() != 0.0) {
        return Err(Error::domain("responses must be non-negative integers"));
    }
    // least squares on log(y + 1/2) as a start
    let ones = vec![1.0; n];
    let ly: Vec<f64> = y.iter().map(|v| (v + 0.5).ln()).collect();
    let (xtx, xty) = normal_equations(design, &ones, &ly);
    let mut theta = chol_solve(&cholesky(&xtx).map_err(|_| Error::domain("design matrix is rank deficient"))?, &xty)?;

    let mut s = 1.0;
    let mut ll = loglik(&linear_predictor(design, &theta), y, s);
    for it in 1..=MAX_OUTER {
        update_theta(design, y, &mut theta, s)?;
        let eta = linear_predictor(design, &theta);
        s = update_s(&eta, y);
        let ll_new = loglik(&eta, y, s);
        let gain = ll_new - ll;
        ll = ll_new;
        if gain.abs() < TOL {
            let eta = linear_predictor(design, &theta);
            let w: Vec<f64> = eta.iter().map(|e| e.exp()).map(|m| m * s / (s + m)).collect();
            let (info, _) = normal_equations(design, &w, &vec![0.0; n]);
            let cov = cholesky(&info)?.inverse();
            let std_errors = (0..p).map(|i| cov.get(i, i).sqrt()).collect();
            return Ok(NbFit { theta, s, std_errors, loglik: ll, iterations: it });
        }
    }
    Err(Error::NonConvergence { iterations: MAX_OUTER, loglik: ll })
}

/// Spearman rank correlation, with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|a, b| v[*a].total_cmp(&v[*b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = 0.5 * (i + j) as f64 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NbRegConfig {
    pub seed: u64,
    pub n_obs: usize,
    /// Number of columns of the design, including the intercept when present.
    pub k_covariates: usize,
    pub theta: Vec<f64>,
    pub s: f64,
    /// First design column is constant 1; the rest are standard normal.
    pub intercept: bool,
    /// `k / n` at which top-k curves are compared.
    pub topk_fraction: f64,
}

impl Default for NbRegConfig {
    fn default() -> Self {
        NbRegConfig {
            seed: 20_190_603,
            n_obs: 500,
            k_covariates: 10,
            theta: vec![1.5, 0.8, 0.5, 0.4, 0.3, -0.3, 0.2, -0.2, 0.1, 0.1],
            s: 5.0,
            intercept: true,
            topk_fraction: 0.9,
        }
    }
}

impl Validate for NbRegConfig {
    fn validate(&self) -> Result<()> {
        ensure(self.s > 0.0 && self.s.is_finite(), || format!("s must be positive, got {}", self.s))?;
        ensure(self.theta.len() == self.k_covariates, || {
            format!("theta has {} entries but k_covariates = {}", self.theta.len(), self.k_covariates)
        })?;
        ensure(self.k_covariates >= 1, || "need at least one covariate".into())?;
        ensure(self.n_obs > self.k_covariates, || "n_obs must exceed k_covariates".into())?;
        ensure(self.theta.iter().all(|t| t.is_finite()), || "theta must be finite".into())?;
        ensure(self.topk_fraction > 0.0 && self.topk_fraction <= 1.0, || "topk_fraction must lie in (0, 1]".into())
    }
}

/// Per-observation output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NbRow {
    pub y: f64,
    pub mu_hat: f64,
    pub crps: f64,
    pub scrps: f64,
    /// `|y - mu_hat|`.
    pub residual: f64,
    /// `|y - mu_hat| / sqrt(mu_hat + mu_hat^2 / s_hat)`.
    pub scaled_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NbRegResult {
    pub fit: NbFit,
    pub rows: Vec<NbRow>,
    /// `(k, crps ratio, scrps ratio)`: mean over the `k` smallest `mu_hat`
    /// divided by the overall mean.
    pub topk: Vec<(usize, f64, f64)>,
}

impl NbRegResult {
    /// `|ratio - 1|` for CRPS and SCRPS at `k = round(fraction * n)`.
    pub fn topk_departure(&self, fraction: f64) -> (f64, f64) {
        let k = ((fraction * self.rows.len() as f64).round() as usize).clamp(1, self.rows.len());
        let (_, c, s) = self.topk[k - 1];
        ((c - 1.0).abs(), (s - 1.0).abs())
    }

    /// Spearman correlations of `|score|` with (raw, scaled) residuals, for
    /// CRPS then SCRPS.
    pub fn residual_correlations(&self) -> [(f64, f64); 2] {
        let raw: Vec<f64> = self.rows.iter().map(|r| r.residual).collect();
        let scaled: Vec<f64> = self.rows.iter().map(|r| r.scaled_residual).collect();
        let c: Vec<f64> = self.rows.iter().map(|r| r.crps.abs()).collect();
        let s: Vec<f64> = self.rows.iter().map(|r| r.scrps.abs()).collect();
        [(spearman(&c, &raw), spearman(&c, &scaled)), (spearman(&s, &raw), spearman(&s, &scaled))]
    }

    pub fn tables(&self) -> Vec<Table> {
        let mut obs =
            Table::new("nbreg_observations", &["y", "mu_hat", "crps", "scrps", "residual", "scaled_residual"]);
        for r in &self.rows {
            obs.push(vec![
                r.y.into(),
                r.mu_hat.into(),
                r.crps.into(),
                r.scrps.into(),
                r.residual.into(),
                r.scaled_residual.into(),
            ]);
        }
        let mut topk = Table::new("nbreg_topk", &["k", "crps_ratio", "scrps_ratio"]);
        for (k, c, s) in &self.topk {
            topk.push(vec![(*k).into(), (*c).into(), (*s).into()]);
        }
        let mut fit = Table::new("nbreg_fit", &["parameter", "estimate", "std_error"]);
        for (i, (t, se)) in self.fit.theta.iter().zip(&self.fit.std_errors).enumerate() {
            fit.push(vec![format!("theta_{i}").into(), (*t).into(), (*se).into()]);
        }
        fit.push(vec!["s".into(), self.fit.s.into(), f64::NAN.into()]);
        vec![obs, topk, fit]
    }
}

/// Simulated design (rows) and counts for `cfg`.
pub fn simulate_nbreg(cfg: &NbRegConfig, rng: &mut RngStream) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut design = Vec::with_capacity(cfg.n_obs);
    let mut y = Vec::with_capacity(cfg.n_obs);
    for _ in 0..cfg.n_obs {
        let row: Vec<f64> =
            (0..cfg.k_covariates).map(|k| if cfg.intercept && k == 0 { 1.0 } else { rng.std_normal() }).collect();
        let eta: f64 = row.iter().zip(&cfg.theta).map(|(x, t)| x * t).sum();
        y.push(NegBinDist::new(eta.exp(), cfg.s)?.sample_one(rng));
        design.push(row);
    }
    Ok((design, y))
}

/// Simulate, fit, and score every observation under its fitted predictive.
pub fn run_nbreg(cfg: &NbRegConfig) -> Result<NbRegResult> {
    cfg.validate()?;
    let (design, y) = simulate_nbreg(cfg, &mut RngStream::new(cfg.seed, 0))?;
    let fit = fit_negbin(&design, &y)?;
    let eta = linear_predictor(&design, &fit.theta);
    let mc = MonteCarlo::default();
    let rows: Vec<NbRow> = eta
        .par_iter()
        .zip(&y)
        .enumerate()
        .map(|(i, (e, &yi))| {
            let mu = e.exp();
            let p = PredictiveDistribution::negbin(mu, fit.s)?;
            let crps = score(&Rule::Crps, &p, yi, &mc)?.value;
            let scrps = score(&Rule::Scrps, &p, yi, &mc)?.value;
            let residual = (yi - mu).abs();
            Ok(NbRow {
                y: yi,
                mu_hat: mu,
                crps,
                scrps,
                residual,
                scaled_residual: residual / (mu + mu * mu / fit.s).sqrt(),
            })
            .map_err(|e: Error| e.at_observation(i))
        })
        .collect::<Result<_>>()?;

    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|a, b| rows[*a].mu_hat.total_cmp(&rows[*b].mu_hat));
    let n = rows.len() as f64;
    let total_c = rows.iter().map(|r| r.crps).sum::<f64>() / n;
    let total_s = rows.iter().map(|r| r.scrps).sum::<f64>() / n;
    let (mut acc_c, mut acc_s) = (0.0, 0.0);
    let topk = order
        .iter()
        .enumerate()
        .map(|(j, &i)| {
            acc_c += rows[i].crps;
            acc_s += rows[i].scrps;
            let k = (j + 1) as f64;
            (j + 1, acc_c / k / total_c, acc_s / k / total_s)
        })
        .collect();
    Ok(NbRegResult { fit, rows, topk })
}
