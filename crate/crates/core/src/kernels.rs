//! Negative-definite kernels `g(x, y)` on the real line and the two
//! expectations every kernel score needs: `E_{P,P} g(X, Y)` and `E_P g(X, y)`.

use serde::Serialize;

use crate::distributions::{Ensemble, NegBinDist, PredictiveDistribution};
use crate::error::{Error, Result};
use crate::numerics::{std_normal_cdf, std_normal_pdf, RngStream, SQRT_PI};

/// Power kernel `|x - y|^alpha`, optionally capped at `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelSpec {
    alpha: f64,
    trunc: Option<f64>,
}

impl KernelSpec {
    pub fn new(alpha: f64, trunc: Option<f64>) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::domain(format!("kernel exponent must lie in (0, 2], got {alpha}")));
        }
        if let Some(c) = trunc {
            if !(c > 0.0) || c.is_nan() {
                return Err(Error::domain(format!("truncation level must be positive, got {c}")));
            }
        }
        Ok(KernelSpec { alpha, trunc })
    }

    /// `|x - y|`, the CRPS kernel.
    pub fn absolute() -> Self {
        KernelSpec { alpha: 1.0, trunc: None }
    }

    /// `min(|x - y|, c)`.
    pub fn truncated(c: f64) -> Result<Self> {
        Self::new(1.0, Some(c))
    }

    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(alpha, None)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn trunc(&self) -> Option<f64> {
        self.trunc
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d = (x - y).abs();
        let g = if self.alpha == 1.0 {
            d
        } else if self.alpha == 2.0 {
            d * d
        } else {
            d.powf(self.alpha)
        };
        match self.trunc {
            Some(c) => g.min(c),
            None => g,
        }
    }

    /// Kernel for the standardized variable when the data are scaled by `sigma`:
    /// `g(sigma x, sigma y) = sigma^alpha * g'(x, y)`.
    fn rescaled(&self, sigma: f64) -> (KernelSpec, f64) {
        let factor = sigma.powf(self.alpha);
        let k = KernelSpec { alpha: self.alpha, trunc: self.trunc.map(|c| c / factor) };
        (k, factor)
    }
}

/// How an expectation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Analytic,
    Ensemble,
    MonteCarlo,
    ExactSum,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Analytic => "analytic",
            Method::Ensemble => "ensemble",
            Method::MonteCarlo => "monte_carlo",
            Method::ExactSum => "exact_sum",
        }
    }

    /// The less exact of two methods, for values built from several parts.
    pub fn combine(self, other: Method) -> Method {
        if self == Method::MonteCarlo || other == Method::MonteCarlo {
            Method::MonteCarlo
        } else if self == Method::Analytic {
            other
        } else {
            self
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Monte-Carlo settings. Every estimate draws from
/// `RngStream::new(seed, stream)`, so a caller scoring many observations sets
/// `stream` to the observation index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MonteCarlo {
    pub draws: usize,
    pub seed: u64,
    pub stream: u64,
}

impl Default for MonteCarlo {
    fn default() -> Self {
        MonteCarlo { draws: 100_000, seed: 0, stream: 0 }
    }
}

impl MonteCarlo {
    pub fn new(draws: usize, seed: u64) -> Self {
        MonteCarlo { draws, seed, stream: 0 }
    }

    pub fn with_stream(self, stream: u64) -> Self {
        MonteCarlo { stream, ..self }
    }

    pub fn rng(&self) -> RngStream {
        RngStream::new(self.seed, self.stream)
    }
}

/// Per-unit sample moments behind a Monte-Carlo estimate. Each unit is one
/// independent pair `(X, X')`, contributing `g(X, X')` to `e_pp` and
/// `(g(X, y) + g(X', y)) / 2` to `e_py`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McMoments {
    pub units: usize,
    pub var_pp: f64,
    pub var_py: f64,
    pub cov: f64,
}

impl McMoments {
    /// Delta-method standard error of `f(e_pp, e_py)` given its gradient.
    pub fn std_error(&self, d_pp: f64, d_py: f64) -> f64 {
        let v = d_pp * d_pp * self.var_pp + d_py * d_py * self.var_py + 2.0 * d_pp * d_py * self.cov;
        (v.max(0.0) / self.units as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelExpectations {
    /// `E_{P,P} g(X, Y)`
    pub e_pp: f64,
    /// `E_P g(X, y)`
    pub e_py: f64,
    pub method: Method,
    pub mc: Option<McMoments>,
}

impl KernelExpectations {
    fn exact(e_pp: f64, e_py: f64, method: Method) -> Self {
        KernelExpectations { e_pp, e_py, method, mc: None }
    }

    /// Standard error of `f(e_pp, e_py)`; zero for exact evaluations.
    pub fn std_error(&self, d_pp: f64, d_py: f64) -> f64 {
        self.mc.map_or(0.0, |m| m.std_error(d_pp, d_py))
    }
}

/// `E|X|` for `X ~ N(m, s^2)`.
pub fn gaussian_abs_moment(m: f64, s: f64) -> f64 {
    let z = m / s;
    2.0 * s * std_normal_pdf(z) + m * (1.0 - 2.0 * std_normal_cdf(-z))
}

/// `E min(|X|, c)` for `X ~ N(mu, sigma^2)`.
pub fn e_function(mu: f64, sigma: f64, c: f64) -> Result<f64> {
    if !(sigma > 0.0) || !(c > 0.0) {
        return Err(Error::domain(format!("E(mu, sigma, c) needs sigma > 0 and c > 0 (got {sigma}, {c})")));
    }
    Ok(e_function_unchecked(mu, sigma, c))
}

/// The expectation is even in `mu`, so work with `m = |mu|` and write the
/// CDF terms so that nothing cancels when `c` or `m` is large.
pub(crate) fn e_function_unchecked(mu: f64, sigma: f64, c: f64) -> f64 {
    let m = mu.abs();
    let (a, b, z) = ((c - m) / sigma, (c + m) / sigma, m / sigma);
    let phi_terms = sigma * (2.0 * std_normal_pdf(z) - std_normal_pdf(a) - std_normal_pdf(b));
    let tail = (c + m) * std_normal_cdf(-b) - 2.0 * m * std_normal_cdf(-z);
    // c - (c - m) Phi(a), rewritten on whichever side avoids cancellation
    let head = if m <= c { m + (c - m) * std_normal_cdf(-a) } else { c + (m - c) * std_normal_cdf(a) };
    (head + phi_terms + tail).clamp(0.0, c)
}

/// Quadratic form `sum_ij a_i a_j g(x_i, x_j)`; non-positive for a
/// negative-definite kernel whenever the weights sum to zero.
pub fn negdef_check(k: &KernelSpec, points: &[f64], weights: &[f64]) -> Result<f64> {
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
    }
    let sum: f64 = weights.iter().sum();
    let scale: f64 = weights.iter().map(|w| w.abs()).sum::<f64>().max(1.0);
    if sum.abs() > 1e-12 * scale {
        return Err(Error::WeightSum(sum));
    }
    let mut q = 0.0;
    for (i, (xi, ai)) in points.iter().zip(weights).enumerate() {
        for (xj, aj) in points[..i].iter().zip(weights) {
            q += 2.0 * ai * aj * k.eval(*xi, *xj);
        }
        q += ai * ai * k.eval(*xi, *xi);
    }
    Ok(q)
}

/// Both kernel expectations for `P` at observation `y`.
///
/// Gaussian and Laplace forecasts with `alpha` in {1, 2} (and truncated
/// Gaussian with `alpha = 1`) are closed form; ensembles are exact sums over
/// members; negative binomials with `alpha = 1` are exact sums over the
/// support. Everything else is Monte Carlo with `mc.draws` draws.
pub fn expectations(k: &KernelSpec, p: &PredictiveDistribution, y: f64, mc: &MonteCarlo) -> Result<KernelExpectations> {
    let out = match p {
        PredictiveDistribution::Gaussian(g) => match (k.alpha, k.trunc) {
            (a, None) if a == 1.0 => KernelExpectations::exact(
                2.0 * g.sigma / SQRT_PI,
                gaussian_abs_moment(g.mu - y, g.sigma),
                Method::Analytic,
            ),
            (a, Some(c)) if a == 1.0 => KernelExpectations::exact(
                e_function_unchecked(0.0, std::f64::consts::SQRT_2 * g.sigma, c),
                e_function_unchecked(g.mu - y, g.sigma, c),
                Method::Analytic,
            ),
            (a, None) if a == 2.0 => {
                let v = g.sigma * g.sigma;
                KernelExpectations::exact(2.0 * v, v + (g.mu - y).powi(2), Method::Analytic)
            }
            _ => monte_carlo(k, p, y, mc)?,
        },
        PredictiveDistribution::Laplace(l) => match (k.alpha, k.trunc) {
            (a, None) if a == 1.0 => {
                let d = (y - l.mu).abs();
                KernelExpectations::exact(1.5 * l.b, d + l.b * (-d / l.b).exp(), Method::Analytic)
            }
            (a, None) if a == 2.0 => {
                let v = 2.0 * l.b * l.b;
                KernelExpectations::exact(2.0 * v, v + (y - l.mu).powi(2), Method::Analytic)
            }
            _ => monte_carlo(k, p, y, mc)?,
        },
        PredictiveDistribution::Ensemble(e) => ensemble_expectations(k, e, y),
        PredictiveDistribution::NegBin(nb) if k.alpha == 1.0 => negbin_expectations(k.trunc, nb, y),
        PredictiveDistribution::NegBin(_) => monte_carlo(k, p, y, mc)?,
        PredictiveDistribution::LocationScale(ls) => {
            let (kb, f) = k.rescaled(ls.sigma);
            let base = expectations(&kb, &ls.base, ls.standardize(y), mc)?;
            KernelExpectations {
                e_pp: f * base.e_pp,
                e_py: f * base.e_py,
                method: base.method,
                mc: base.mc.map(|m| McMoments {
                    var_pp: f * f * m.var_pp,
                    var_py: f * f * m.var_py,
                    cov: f * f * m.cov,
                    ..m
                }),
            }
        }
    };
    if !out.e_pp.is_finite() || !out.e_py.is_finite() {
        return Err(Error::NonFiniteExpectation(format!("{} forecast, alpha = {}", p.kind(), k.alpha)));
    }
    Ok(out)
}

fn ensemble_expectations(k: &KernelSpec, e: &Ensemble, y: f64) -> KernelExpectations {
    let x = e.members();
    if k.alpha == 1.0 && k.trunc.is_none() {
        return KernelExpectations::exact(e.pairwise_mean_abs_diff(), e.mean_abs_dev(y), Method::Ensemble);
    }
    let mut pairs = 0.0;
    for (i, xi) in x.iter().enumerate() {
        for xj in &x[..i] {
            pairs += k.eval(*xi, *xj);
        }
    }
    let e_py = x.iter().map(|xi| k.eval(*xi, y)).sum::<f64>() / x.len() as f64;
    KernelExpectations::exact(2.0 * pairs / e.pair_divisor(), e_py, Method::Ensemble)
}

/// Exact sums over the enumerated support, `alpha = 1`.
fn negbin_expectations(trunc: Option<f64>, nb: &NegBinDist, y: f64) -> KernelExpectations {
    let p = nb.pmf_table();
    let e_py: f64 = match trunc {
        None => p.iter().enumerate().map(|(j, pj)| pj * (j as f64 - y).abs()).sum(),
        Some(c) => p.iter().enumerate().map(|(j, pj)| pj * (j as f64 - y).abs().min(c)).sum(),
    };
    let e_pp = match trunc {
        // E|X - X'| = 2 sum_k F(k) (1 - F(k)) on the integer lattice
        None => {
            let mut f = 0.0;
            let mut acc = 0.0;
            for pj in &p {
                f += pj;
                let f1 = f.min(1.0);
                acc += f1 * (1.0 - f1);
            }
            2.0 * acc
        }
        // E min(|D|, c) = c - sum_{d < c} (c - d) P(|D| = d), D = X - X'
        Some(c) => {
            let lags = (c.ceil() as usize).min(p.len());
            let mut deficit = 0.0;
            for d in 0..lags {
                let df = d as f64;
                if df >= c {
                    break;
                }
                let overlap: f64 = p[..p.len() - d].iter().zip(&p[d..]).map(|(a, b)| a * b).sum();
                let prob = if d == 0 { overlap } else { 2.0 * overlap };
                deficit += (c - df) * prob;
            }
            (c - deficit).max(0.0)
        }
    };
    KernelExpectations::exact(e_pp, e_py, Method::ExactSum)
}

fn monte_carlo(k: &KernelSpec, p: &PredictiveDistribution, y: f64, mc: &MonteCarlo) -> Result<KernelExpectations> {
    if mc.draws < 4 {
        return Err(Error::domain(format!("Monte Carlo needs at least 4 draws, got {}", mc.draws)));
    }
    let mut rng = mc.rng();
    let x = p.sample(mc.draws, &mut rng);
    let units = x.len() / 2;
    // disjoint halves as the two independent copies
    let (a, b) = x.split_at(units);
    let mut a_vals = Vec::with_capacity(units);
    let mut b_vals = Vec::with_capacity(units);
    for (u, v) in a.iter().zip(b) {
        a_vals.push(k.eval(*u, *v));
        b_vals.push(0.5 * (k.eval(*u, y) + k.eval(*v, y)));
    }
    let n = units as f64;
    let ma = a_vals.iter().sum::<f64>() / n;
    let mb = b_vals.iter().sum::<f64>() / n;
    let (mut va, mut vb, mut cab) = (0.0, 0.0, 0.0);
    for (u, v) in a_vals.iter().zip(&b_vals) {
        va += (u - ma) * (u - ma);
        vb += (v - mb) * (v - mb);
        cab += (u - ma) * (v - mb);
    }
    let d = n - 1.0;
    Ok(KernelExpectations {
        e_pp: ma,
        e_py: mb,
        method: Method::MonteCarlo,
        mc: Some(McMoments { units, var_pp: va / d, var_py: vb / d, cov: cab / d }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::GaussianDist;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_2_PI, SQRT_2};

    /// Closed form transcribed term by term.
    fn e_literal(mu: f64, s: f64, c: f64) -> f64 {
        let (phi, cdf) = (std_normal_pdf, std_normal_cdf);
        -mu + s * (2.0 * phi(mu / s) - phi((c - mu) / s) - phi((c + mu) / s))
            + (c - mu) * cdf((mu - c) / s)
            + 2.0 * mu * cdf(mu / s)
            + (mu + c) * cdf((-c - mu) / s)
    }

    fn mc_truncated_abs(mu: f64, s: f64, c: f64, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = RngStream::new(seed, 0);
        let v: Vec<f64> = (0..n).map(|_| (mu + s * rng.std_normal()).abs().min(c)).collect();
        let m = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (m, (var / n as f64).sqrt())
    }

    #[test]
    fn kernel_eval_examples() {
        assert_eq!(KernelSpec::absolute().eval(2.0, 5.0), 3.0);
        assert_eq!(KernelSpec::truncated(2.0).unwrap().eval(0.0, 5.0), 2.0);
        assert_eq!(KernelSpec::power(2.0).unwrap().eval(1.0, -1.0), 4.0);
        assert!(KernelSpec::new(0.0, None).is_err());
        assert!(KernelSpec::new(2.5, None).is_err());
        assert!(KernelSpec::new(1.0, Some(0.0)).is_err());
    }

    #[test]
    fn negdef_examples() {
        let k = KernelSpec::absolute();
        assert_eq!(negdef_check(&k, &[0.3, 1.0, 7.0], &[0.0; 3]).unwrap(), 0.0);
        // brute force: 2 (a0 a1 |0-1| + a0 a2 |0-2| + a1 a2 |1-2|) = 2 (-2 + 2 - 2)
        assert_eq!(negdef_check(&k, &[0.0, 1.0, 2.0], &[1.0, -2.0, 1.0]).unwrap(), -4.0);
        assert!(matches!(negdef_check(&k, &[0.0, 1.0], &[1.0, 1.0]), Err(Error::WeightSum(_))));
    }

    #[test]
    fn e_function_limits() {
        assert!((e_function(0.0, 1.0, 1e6).unwrap() - FRAC_2_PI.sqrt()).abs() < 1e-9);
        assert!((e_function(5.0, 0.1, 1.0).unwrap() - 1.0).abs() < 1e-6);
        assert!((e_function(-5.0, 0.1, 1.0).unwrap() - 1.0).abs() < 1e-6);
        assert!(e_function(0.0, 0.0, 1.0).is_err());
        assert!(e_function(0.0, 1.0, -1.0).is_err());
        let (m, se) = mc_truncated_abs(0.0, 1.0, 1.0, 10_000_000, 11);
        assert!((e_function(0.0, 1.0, 1.0).unwrap() - m).abs() < 3.0 * se);
    }

    #[test]
    fn e_function_matches_literal_form() {
        for &mu in &[-3.0, -0.7, 0.0, 0.2, 1.5, 4.0] {
            for &s in &[0.1, 0.5, 1.0, 3.0] {
                for &c in &[0.1, 1.0, 2.0, 10.0] {
                    let a = e_function(mu, s, c).unwrap();
                    assert!((a - e_literal(mu, s, c)).abs() < 1e-12, "{mu} {s} {c}");
                    assert!(a <= c);
                }
            }
        }
    }

    #[test]
    fn gaussian_analytic_values() {
        let p = PredictiveDistribution::from(GaussianDist::standard());
        let e = expectations(&KernelSpec::absolute(), &p, 0.0, &MonteCarlo::default()).unwrap();
        assert!((e.e_pp - 2.0 / SQRT_PI).abs() < 1e-15);
        assert!((e.e_py - FRAC_2_PI.sqrt()).abs() < 1e-15);
        assert_eq!(e.method, Method::Analytic);
        let t = expectations(&KernelSpec::truncated(1.0).unwrap(), &p, 0.0, &MonteCarlo::default()).unwrap();
        assert!((t.e_pp - e_function(0.0, SQRT_2, 1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn gaussian_analytic_vs_monte_carlo_grid() {
        let mc = MonteCarlo::new(400_000, 5);
        for (i, &mu) in [-2.0, -0.5, 0.0, 0.7, 3.0].iter().enumerate() {
            for (j, &s) in [0.2, 0.5, 1.0, 2.0, 4.0].iter().enumerate() {
                let g = PredictiveDistribution::gaussian(mu, s).unwrap();
                for k in [KernelSpec::absolute(), KernelSpec::truncated(1.5).unwrap()] {
                    let exact = expectations(&k, &g, 0.3, &mc).unwrap();
                    // same forecast through the sampling path
                    let est = monte_carlo(&k, &g, 0.3, &mc.with_stream((i * 5 + j) as u64)).unwrap();
                    let m = est.mc.unwrap();
                    // far-away cases saturate at c with zero sample variance
                    assert!((exact.e_pp - est.e_pp).abs() < 4.0 * m.std_error(1.0, 0.0) + 1e-9);
                    assert!((exact.e_py - est.e_py).abs() < 4.0 * m.std_error(0.0, 1.0) + 1e-9, "{mu} {s} {k:?}");
                }
            }
        }
    }

    #[test]
    fn laplace_analytic_vs_monte_carlo() {
        let mc = MonteCarlo::new(1_000_000, 8);
        let l = PredictiveDistribution::laplace(0.5, 1.3).unwrap();
        for k in [KernelSpec::absolute(), KernelSpec::power(2.0).unwrap()] {
            for y in [-2.0, 0.5, 3.0] {
                let exact = expectations(&k, &l, y, &mc).unwrap();
                let est = monte_carlo(&k, &l, y, &mc).unwrap();
                let m = est.mc.unwrap();
                assert!((exact.e_pp - est.e_pp).abs() < 4.0 * m.std_error(1.0, 0.0), "{k:?} {y}");
                assert!((exact.e_py - est.e_py).abs() < 4.0 * m.std_error(0.0, 1.0), "{k:?} {y}");
            }
        }
    }

    #[test]
    fn negbin_exact_sums_vs_monte_carlo() {
        let mc = MonteCarlo::new(1_000_000, 9);
        for &(mu, s) in &[(2.0, 5.0), (30.0, 1.5)] {
            let nb = PredictiveDistribution::negbin(mu, s).unwrap();
            for k in [KernelSpec::absolute(), KernelSpec::truncated(2.0).unwrap(), KernelSpec::truncated(2.5).unwrap()]
            {
                let exact = expectations(&k, &nb, 3.0, &mc).unwrap();
                assert_eq!(exact.method, Method::ExactSum);
                let est = monte_carlo(&k, &nb, 3.0, &mc).unwrap();
                let m = est.mc.unwrap();
                assert!((exact.e_pp - est.e_pp).abs() < 4.0 * m.std_error(1.0, 0.0), "{mu} {k:?}");
                assert!((exact.e_py - est.e_py).abs() < 4.0 * m.std_error(0.0, 1.0), "{mu} {k:?}");
            }
        }
    }

    #[test]
    fn negbin_pair_sum_matches_double_sum() {
        let nb = NegBinDist::new(4.0, 2.0).unwrap();
        let p = nb.pmf_table();
        for c in [None, Some(0.5), Some(1.0), Some(3.2)] {
            let k = KernelSpec::new(1.0, c).unwrap();
            let brute: f64 = p
                .iter()
                .enumerate()
                .flat_map(|(i, a)| p.iter().enumerate().map(move |(j, b)| a * b * k.eval(i as f64, j as f64)))
                .sum();
            let e = negbin_expectations(c, &nb, 0.0);
            // the brute double sum drops the enumerated tail on both axes
            assert!((e.e_pp - brute).abs() < 1e-9 * brute, "{c:?}: {} vs {brute}", e.e_pp);
        }
    }

    #[test]
    fn location_scale_reduces_to_base() {
        let base = PredictiveDistribution::from(GaussianDist::standard());
        let ls = PredictiveDistribution::location_scale(base, 1.2, 3.0).unwrap();
        let g = PredictiveDistribution::gaussian(1.2, 3.0).unwrap();
        for k in [KernelSpec::absolute(), KernelSpec::truncated(2.0).unwrap(), KernelSpec::power(2.0).unwrap()] {
            let a = expectations(&k, &ls, -0.4, &MonteCarlo::default()).unwrap();
            let b = expectations(&k, &g, -0.4, &MonteCarlo::default()).unwrap();
            assert!((a.e_pp - b.e_pp).abs() < 1e-12 * b.e_pp.max(1.0));
            assert!((a.e_py - b.e_py).abs() < 1e-12 * b.e_py.max(1.0));
        }
    }

    #[test]
    fn ensemble_general_kernel_brute_force() {
        let x = vec![0.1, -2.0, 3.5, 0.4, 0.4];
        let e = Ensemble::new(x.clone()).unwrap();
        let k = KernelSpec::new(0.5, Some(1.2)).unwrap();
        let brute: f64 = x.iter().flat_map(|a| x.iter().map(move |b| k.eval(*a, *b))).sum::<f64>() / 25.0;
        let got = expectations(&k, &e.into(), 0.0, &MonteCarlo::default()).unwrap();
        assert!((got.e_pp - brute).abs() < 1e-14);
        assert_eq!(got.method, Method::Ensemble);
    }

    #[test]
    fn monte_carlo_path_is_reproducible() {
        let p = PredictiveDistribution::gaussian(0.0, 1.0).unwrap();
        let k = KernelSpec::power(1.5).unwrap();
        let mc = MonteCarlo::new(10_000, 3);
        let a = expectations(&k, &p, 0.2, &mc).unwrap();
        let b = expectations(&k, &p, 0.2, &mc).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.method, Method::MonteCarlo);
        assert!(expectations(&k, &p, 0.2, &MonteCarlo::new(2, 0)).is_err());
    }

    fn zero_sum(w: Vec<f64>) -> Vec<f64> {
        let m = w.iter().sum::<f64>() / w.len() as f64;
        w.into_iter().map(|v| v - m).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn kernels_are_negative_definite(
            pts in prop::collection::vec(-5.0f64..5.0, 2..20),
            raw in prop::collection::vec(-1.0f64..1.0, 20),
        ) {
            let w = zero_sum(raw[..pts.len()].to_vec());
            for k in [
                KernelSpec::power(0.5).unwrap(),
                KernelSpec::power(1.0).unwrap(),
                KernelSpec::power(2.0).unwrap(),
                KernelSpec::truncated(0.5).unwrap(),
                KernelSpec::truncated(2.0).unwrap(),
            ] {
                prop_assert!(negdef_check(&k, &pts, &w).unwrap() <= 1e-10);
            }
        }

        #[test]
        fn truncated_expectations_bounded(mu in -50.0f64..50.0, s in 0.01f64..20.0, c in 0.01f64..5.0, y in -100.0f64..100.0) {
            let g = PredictiveDistribution::gaussian(mu, s).unwrap();
            let e = expectations(&KernelSpec::truncated(c).unwrap(), &g, y, &MonteCarlo::default()).unwrap();
            prop_assert!(e.e_pp <= c && e.e_py <= c && e.e_pp >= 0.0 && e.e_py >= 0.0);
        }
    }
}
