//! Predictive distributions: the `P` in `S(P, y)`.
//!
//! Every variant supports sampling, CDF evaluation and its first two moments.
//! Densities exist for everything except ensembles, which are scored through
//! their empirical measure.

use rand_distr::{Distribution, Gamma, Poisson};

use crate::error::{Error, Result};
use crate::numerics::{ln_gamma, std_normal_cdf, RngStream, FRAC_1_SQRT_2PI};

/// Tail mass left out when enumerating a negative-binomial support.
pub const NEGBIN_TAIL: f64 = 1e-12;

/// Hard cap on the enumerated negative-binomial support.
const NEGBIN_MAX_SUPPORT: usize = 50_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianDist {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianDist {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("gaussian needs finite mu and sigma > 0 (got {mu}, {sigma})")));
        }
        Ok(GaussianDist { mu, sigma })
    }

    pub fn standard() -> Self {
        GaussianDist { mu: 0.0, sigma: 1.0 }
    }

    pub fn log_pdf(&self, y: f64) -> f64 {
        let z = (y - self.mu) / self.sigma;
        FRAC_1_SQRT_2PI.ln() - self.sigma.ln() - 0.5 * z * z
    }

    pub fn cdf(&self, y: f64) -> f64 {
        std_normal_cdf((y - self.mu) / self.sigma)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaplaceDist {
    pub mu: f64,
    pub b: f64,
}

impl LaplaceDist {
    pub fn new(mu: f64, b: f64) -> Result<Self> {
        if !mu.is_finite() || !(b > 0.0 && b.is_finite()) {
            return Err(Error::domain(format!("laplace needs finite mu and b > 0 (got {mu}, {b})")));
        }
        Ok(LaplaceDist { mu, b })
    }

    pub fn log_pdf(&self, y: f64) -> f64 {
        -(2.0 * self.b).ln() - (y - self.mu).abs() / self.b
    }

    pub fn cdf(&self, y: f64) -> f64 {
        let z = (y - self.mu) / self.b;
        if z < 0.0 {
            0.5 * z.exp()
        } else {
            1.0 - 0.5 * (-z).exp()
        }
    }
}

/// Negative binomial in the mean/dispersion parameterization:
/// `E[Y] = mu`, `Var[Y] = mu + mu^2 / s`.
///
/// In the (r, p) convention of "failures before the r-th success" this is
/// `r = s`, `p = s / (s + mu)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegBinDist {
    pub mu: f64,
    pub s: f64,
}

impl NegBinDist {
    pub fn new(mu: f64, s: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) || !(s > 0.0 && s.is_finite()) {
            return Err(Error::domain(format!("negbin needs mu > 0 and s > 0 (got {mu}, {s})")));
        }
        Ok(NegBinDist { mu, s })
    }

    pub fn variance(&self) -> f64 {
        self.mu + self.mu * self.mu / self.s
    }

    fn check_count(&self, y: f64) -> Result<u64> {
        if y < 0.0 || y.fract() != 0.0 || !y.is_finite() {
            return Err(Error::Support { dist: "negbin", value: y });
        }
        Ok(y as u64)
    }

    pub fn log_pmf(&self, y: f64) -> Result<f64> {
        let k = self.check_count(y)? as f64;
        let (s, mu) = (self.s, self.mu);
        Ok(ln_gamma(k + s) - ln_gamma(s) - ln_gamma(k + 1.0)
            + s * (s / (s + mu)).ln()
            + if k > 0.0 { k * (mu / (s + mu)).ln() } else { 0.0 })
    }

    /// Probability masses `p(0), p(1), ...` up to the first `k` beyond the mean
    /// where the CDF exceeds `1 - NEGBIN_TAIL`.
    pub fn pmf_table(&self) -> Vec<f64> {
        let (s, mu) = (self.s, self.mu);
        let ln_q = (mu / (s + mu)).ln();
        let mut lp = s * (s / (s + mu)).ln();
        let mut out = Vec::new();
        let mut cdf = 0.0;
        let mut k = 0usize;
        loop {
            let p = lp.exp();
            out.push(p);
            cdf += p;
            if (k as f64 > mu && cdf > 1.0 - NEGBIN_TAIL) || k >= NEGBIN_MAX_SUPPORT {
                break;
            }
            lp += ((k as f64 + s) / (k as f64 + 1.0)).ln() + ln_q;
            k += 1;
        }
        out
    }

    pub fn cdf(&self, y: f64) -> f64 {
        if y < 0.0 {
            return 0.0;
        }
        let k = y.floor();
        let table = self.pmf_table();
        if k as usize >= table.len() {
            return 1.0;
        }
        table[..=k as usize].iter().sum::<f64>().min(1.0)
    }

    /// Gamma–Poisson mixture draw.
    pub fn sample_one(&self, rng: &mut RngStream) -> f64 {
        let gamma = Gamma::new(self.s, self.mu / self.s).expect("validated parameters");
        let lambda: f64 = gamma.sample(rng);
        if lambda <= 0.0 {
            return 0.0;
        }
        Poisson::new(lambda).map(|p| p.sample(rng)).unwrap_or(0.0)
    }
}

/// Finite ensemble scored through its empirical measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    sorted: Vec<f64>,
    unbiased_pairs: bool,
}

impl Ensemble {
    pub fn new(members: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::domain("ensemble needs at least one member"));
        }
        if let Some(bad) = members.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("ensemble member {bad} is not finite")));
        }
        let mut sorted = members;
        sorted.sort_by(f64::total_cmp);
        Ok(Ensemble { sorted, unbiased_pairs: false })
    }

    /// Switches pairwise expectations from the plug-in divisor `m^2` to the
    /// unbiased `m(m-1)`.
    pub fn with_unbiased_pairs(mut self, unbiased: bool) -> Self {
        self.unbiased_pairs = unbiased;
        self
    }

    pub fn unbiased_pairs(&self) -> bool {
        self.unbiased_pairs
    }

    /// Members in ascending order.
    pub fn members(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// Divisor applied to sums over ordered pairs.
    pub(crate) fn pair_divisor(&self) -> f64 {
        let m = self.len() as f64;
        if self.unbiased_pairs && self.len() > 1 {
            m * (m - 1.0)
        } else {
            m * m
        }
    }

    /// `E_{P,P}|X - Y|` under the empirical measure, from the sorted identity
    /// `sum_{i<j} |x_i - x_j| = sum_i (2i - m - 1) x_(i)`.
    ///
    /// Members are shifted by the minimum first (the weights sum to zero), so a
    /// degenerate ensemble gives exactly 0.
    pub fn pairwise_mean_abs_diff(&self) -> f64 {
        let m = self.len() as f64;
        let lo = self.sorted[0];
        let half: f64 =
            self.sorted.iter().enumerate().map(|(i, x)| (2.0 * (i as f64 + 1.0) - m - 1.0) * (x - lo)).sum();
        2.0 * half / self.pair_divisor()
    }

    /// `E_P|X - y|`.
    pub fn mean_abs_dev(&self, y: f64) -> f64 {
        self.sorted.iter().map(|x| (x - y).abs()).sum::<f64>() / self.len() as f64
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.sorted.partition_point(|x| *x <= y) as f64 / self.len() as f64
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.len() as f64
    }

    /// Plug-in variance (divisor m).
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.sorted.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / self.len() as f64
    }
}

/// Law of `mu + sigma * Z` with `Z ~ base`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationScale {
    pub base: Box<PredictiveDistribution>,
    pub mu: f64,
    pub sigma: f64,
}

impl LocationScale {
    pub fn new(base: PredictiveDistribution, mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::domain(format!("location-scale needs finite mu and sigma > 0 (got {mu}, {sigma})")));
        }
        Ok(LocationScale { base: Box::new(base), mu, sigma })
    }

    #[inline]
    pub fn standardize(&self, y: f64) -> f64 {
        (y - self.mu) / self.sigma
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PredictiveDistribution {
    Gaussian(GaussianDist),
    Laplace(LaplaceDist),
    NegBin(NegBinDist),
    Ensemble(Ensemble),
    LocationScale(LocationScale),
}

impl From<GaussianDist> for PredictiveDistribution {
    fn from(d: GaussianDist) -> Self {
        PredictiveDistribution::Gaussian(d)
    }
}

impl From<LaplaceDist> for PredictiveDistribution {
    fn from(d: LaplaceDist) -> Self {
        PredictiveDistribution::Laplace(d)
    }
}

impl From<NegBinDist> for PredictiveDistribution {
    fn from(d: NegBinDist) -> Self {
        PredictiveDistribution::NegBin(d)
    }
}

impl From<Ensemble> for PredictiveDistribution {
    fn from(d: Ensemble) -> Self {
        PredictiveDistribution::Ensemble(d)
    }
}

impl From<LocationScale> for PredictiveDistribution {
    fn from(d: LocationScale) -> Self {
        PredictiveDistribution::LocationScale(d)
    }
}

impl PredictiveDistribution {
    pub fn gaussian(mu: f64, sigma: f64) -> Result<Self> {
        GaussianDist::new(mu, sigma).map(Into::into)
    }

    pub fn laplace(mu: f64, b: f64) -> Result<Self> {
        LaplaceDist::new(mu, b).map(Into::into)
    }

    pub fn negbin(mu: f64, s: f64) -> Result<Self> {
        NegBinDist::new(mu, s).map(Into::into)
    }

    pub fn ensemble(members: Vec<f64>) -> Result<Self> {
        Ensemble::new(members).map(Into::into)
    }

    pub fn location_scale(base: PredictiveDistribution, mu: f64, sigma: f64) -> Result<Self> {
        LocationScale::new(base, mu, sigma).map(Into::into)
    }

    /// Short name used in messages and output files.
    pub fn kind(&self) -> &'static str {
        match self {
            PredictiveDistribution::Gaussian(_) => "gaussian",
            PredictiveDistribution::Laplace(_) => "laplace",
            PredictiveDistribution::NegBin(_) => "negbin",
            PredictiveDistribution::Ensemble(_) => "ensemble",
            PredictiveDistribution::LocationScale(_) => "location-scale",
        }
    }

    /// True when the law (after unwrapping location-scale layers) is a
    /// lattice or empirical measure rather than a density.
    pub fn is_discrete(&self) -> bool {
        match self {
            PredictiveDistribution::NegBin(_) | PredictiveDistribution::Ensemble(_) => true,
            PredictiveDistribution::LocationScale(ls) => ls.base.is_discrete(),
            _ => false,
        }
    }

    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Vec<f64> {
        (0..n).map(|_| self.sample_one(rng)).collect()
    }

    pub fn sample_one(&self, rng: &mut RngStream) -> f64 {
        match self {
            PredictiveDistribution::Gaussian(g) => g.mu + g.sigma * rng.std_normal(),
            PredictiveDistribution::Laplace(l) => {
                let u = rng.uniform() - 0.5;
                l.mu - l.b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
            }
            PredictiveDistribution::NegBin(nb) => nb.sample_one(rng),
            PredictiveDistribution::Ensemble(e) => {
                let i = ((rng.uniform() * e.len() as f64) as usize).min(e.len() - 1);
                e.sorted[i]
            }
            PredictiveDistribution::LocationScale(ls) => ls.mu + ls.sigma * ls.base.sample_one(rng),
        }
    }

    /// Log density (log mass for negative binomials).
    pub fn log_pdf(&self, y: f64) -> Result<f64> {
        match self {
            PredictiveDistribution::Gaussian(g) => Ok(g.log_pdf(y)),
            PredictiveDistribution::Laplace(l) => Ok(l.log_pdf(y)),
            PredictiveDistribution::NegBin(nb) => nb.log_pmf(y),
            PredictiveDistribution::Ensemble(_) => {
                Err(Error::Unsupported { rule: "logs".into(), kind: "ensemble".into() })
            }
            PredictiveDistribution::LocationScale(ls) => {
                if ls.base.is_discrete() {
                    return Err(Error::Unsupported {
                        rule: "logs".into(),
                        kind: "location-scale over a discrete base".into(),
                    });
                }
                Ok(ls.base.log_pdf(ls.standardize(y))? - ls.sigma.ln())
            }
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        match self {
            PredictiveDistribution::Gaussian(g) => g.cdf(y),
            PredictiveDistribution::Laplace(l) => l.cdf(y),
            PredictiveDistribution::NegBin(nb) => nb.cdf(y),
            PredictiveDistribution::Ensemble(e) => e.cdf(y),
            PredictiveDistribution::LocationScale(ls) => ls.base.cdf(ls.standardize(y)),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            PredictiveDistribution::Gaussian(g) => g.mu,
            PredictiveDistribution::Laplace(l) => l.mu,
            PredictiveDistribution::NegBin(nb) => nb.mu,
            PredictiveDistribution::Ensemble(e) => e.mean(),
            PredictiveDistribution::LocationScale(ls) => ls.mu + ls.sigma * ls.base.mean(),
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            PredictiveDistribution::Gaussian(g) => g.sigma * g.sigma,
            PredictiveDistribution::Laplace(l) => 2.0 * l.b * l.b,
            PredictiveDistribution::NegBin(nb) => nb.variance(),
            PredictiveDistribution::Ensemble(e) => e.variance(),
            PredictiveDistribution::LocationScale(ls) => ls.sigma * ls.sigma * ls.base.variance(),
        }
    }
}
