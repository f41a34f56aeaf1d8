//! Estimators and accumulators shared by the experiments.
//!
//! Accumulators merge associatively, so replica results can be folded in
//! any grouping; callers fold in replica order to keep output bit-stable.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Two-sided 95% standard-normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
/// Two-sided 99% standard-normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Point estimate with standard error and confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate<S> {
    pub value: S,
    pub std_err: S,
    pub ci_lo: S,
    pub ci_hi: S,
    pub samples: u64,
}

impl<S: Scalar> Estimate<S> {
    pub fn contains(&self, x: S) -> bool {
        self.ci_lo <= x && x <= self.ci_hi
    }

    pub fn excludes_zero(&self) -> bool {
        self.ci_lo > S::zero() || self.ci_hi < S::zero()
    }
}

/// Success count out of a number of Bernoulli trials.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Proportion {
    pub hits: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(hits: u64, trials: u64) -> Self {
        debug_assert!(hits <= trials);
        Self { hits, trials }
    }

    #[inline]
    pub fn record(&mut self, hit: bool) {
        self.trials += 1;
        self.hits += hit as u64;
    }

    pub fn merge(&mut self, other: &Proportion) {
        self.hits += other.hits;
        self.trials += other.trials;
    }

    pub fn value<S: Scalar>(&self) -> S {
        if self.trials == 0 {
            return S::nan();
        }
        S::of(self.hits as f64) / S::of(self.trials as f64)
    }

    /// Binomial standard error `sqrt(p(1-p)/n)` at the point estimate.
    pub fn std_err<S: Scalar>(&self) -> S {
        let p: S = self.value();
        (p * (S::one() - p) / S::of(self.trials as f64)).sqrt()
    }

    /// Wilson score interval.
    pub fn wilson<S: Scalar>(&self, z: f64) -> (S, S) {
        if self.trials == 0 {
            return (S::zero(), S::one());
        }
        let n = self.trials as f64;
        let p = self.hits as f64 / n;
        let z2 = z * z;
        let denom = 1.0 + z2 / n;
        let centre = (p + z2 / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
        let lo = if self.hits == 0 { 0.0 } else { (centre - half).max(0.0) };
        let hi = if self.hits == self.trials { 1.0 } else { (centre + half).min(1.0) };
        (S::of(lo), S::of(hi))
    }

    pub fn estimate<S: Scalar>(&self, z: f64) -> Estimate<S> {
        let (ci_lo, ci_hi) = self.wilson(z);
        Estimate {
            value: self.value(),
            std_err: self.std_err(),
            ci_lo,
            ci_hi,
            samples: self.trials,
        }
    }
}

/// Running mean and variance (Welford), mergeable with Chan's update.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeanVar<S> {
    pub count: u64,
    pub mean: S,
    m2: S,
}

impl<S: Scalar> MeanVar<S> {
    pub fn new() -> Self {
        Self {
            count: 0,
            mean: S::zero(),
            m2: S::zero(),
        }
    }

    pub fn push(&mut self, x: S) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean = self.mean + delta / S::of(self.count as f64);
        self.m2 = self.m2 + delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &MeanVar<S>) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = S::of(self.count as f64);
        let n2 = S::of(other.count as f64);
        let n = n1 + n2;
        let delta = other.mean - self.mean;
        self.mean = self.mean + delta * n2 / n;
        self.m2 = self.m2 + other.m2 + delta * delta * n1 * n2 / n;
        self.count += other.count;
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> S {
        if self.count < 2 {
            return S::zero();
        }
        self.m2 / S::of((self.count - 1) as f64)
    }

    pub fn std_err(&self) -> S {
        if self.count == 0 {
            return S::nan();
        }
        (self.variance() / S::of(self.count as f64)).sqrt()
    }

    pub fn estimate(&self, z: f64) -> Estimate<S> {
        let se = self.std_err();
        let half = se * S::of(z);
        Estimate {
            value: self.mean,
            std_err: se,
            ci_lo: self.mean - half,
            ci_hi: self.mean + half,
            samples: self.count,
        }
    }
}

impl<S: Scalar> FromIterator<S> for MeanVar<S> {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut acc = MeanVar::new();
        for x in iter {
            acc.push(x);
        }
        acc
    }
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit<S> {
    pub slope: S,
    pub intercept: S,
    pub r_squared: S,
    pub slope_std_err: S,
    pub intercept_std_err: S,
    pub points: usize,
}

impl<S: Scalar> LinearFit<S> {
    /// `None` with fewer than two points or no spread in `x`.
    pub fn fit(x: &[S], y: &[S]) -> Option<Self> {
        let n = x.len().min(y.len());
        if n < 2 {
            return None;
        }
        let nf = S::of_usize(n);
        let mx = x[..n].iter().copied().sum::<S>() / nf;
        let my = y[..n].iter().copied().sum::<S>() / nf;
        let mut sxx = S::zero();
        let mut sxy = S::zero();
        let mut syy = S::zero();
        for i in 0..n {
            let dx = x[i] - mx;
            let dy = y[i] - my;
            sxx = sxx + dx * dx;
            sxy = sxy + dx * dy;
            syy = syy + dy * dy;
        }
        if sxx <= S::zero() {
            return None;
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let sse = (syy - slope * sxy).max(S::zero());
        let r_squared = if syy > S::zero() {
            S::one() - sse / syy
        } else {
            S::one()
        };
        let (slope_std_err, intercept_std_err) = if n > 2 {
            let s2 = sse / S::of_usize(n - 2);
            let se_slope = (s2 / sxx).sqrt();
            let se_int = (s2 * (S::one() / nf + mx * mx / sxx)).sqrt();
            (se_slope, se_int)
        } else {
            (S::zero(), S::zero())
        };
        Some(Self {
            slope,
            intercept,
            r_squared,
            slope_std_err,
            intercept_std_err,
            points: n,
        })
    }
}

/// Sample covariance of paired indicators with a delta-method standard error.
pub fn covariance<S: Scalar>(x: &[bool], y: &[bool]) -> (S, S) {
    let n = x.len().min(y.len());
    if n < 2 {
        return (S::nan(), S::nan());
    }
    let nf = n as f64;
    let mx = x[..n].iter().filter(|&&b| b).count() as f64 / nf;
    let my = y[..n].iter().filter(|&&b| b).count() as f64 / nf;
    let mut acc: MeanVar<f64> = MeanVar::new();
    for i in 0..n {
        let dx = x[i] as u8 as f64 - mx;
        let dy = y[i] as u8 as f64 - my;
        acc.push(dx * dy);
    }
    let cov = acc.mean * nf / (nf - 1.0);
    (S::of(cov), S::of(acc.std_err()))
}
