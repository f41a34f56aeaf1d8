//! All-zero curves and rejection-conditioned single-site estimates.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::stats::{Estimate, Proportion};

/// Minimum number of independent rows for an all-zero curve.
pub const MIN_ALLZERO_SAMPLES: usize = 1000;
/// Minimum number of samples satisfying a conditioning event.
pub const MIN_CONDITIONED: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllZeroPoint<S> {
    pub n: usize,
    pub counts: Proportion,
    pub p_hat: S,
    pub ci_lo: S,
    pub ci_hi: S,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalEstimate<S> {
    pub target: usize,
    pub zeros: Vec<usize>,
    pub ones: Vec<usize>,
    /// Samples in the conditioning event.
    pub conditioned: usize,
    pub total: usize,
    pub hits: Proportion,
    pub estimate: Estimate<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport<S> {
    pub samples: usize,
    pub z: f64,
    pub points: Vec<AllZeroPoint<S>>,
    /// `1 - max_n p_n^(1/n)` at the point estimates.
    pub rho_hat: S,
    /// Same with the upper interval ends: a lower confidence bound for rho.
    pub rho_conservative: S,
    /// Same with the lower interval ends.
    pub rho_upper: S,
    pub conditional: Vec<ConditionalEstimate<S>>,
    pub pass: bool,
}

impl<S: Scalar> DominationReport<S> {
    /// `n,p_hat,ci_lo,ci_hi`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p_hat,ci_lo,ci_hi\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.n, p.p_hat, p.ci_lo, p.ci_hi);
        }
        out
    }

    pub fn rho_estimate(&self) -> Estimate<S> {
        Estimate {
            value: self.rho_hat,
            std_err: (self.rho_upper - self.rho_conservative) / S::of(2.0 * self.z),
            ci_lo: self.rho_conservative,
            ci_hi: self.rho_upper,
            samples: self.samples as u64,
        }
    }
}

fn implied_rho<S: Scalar>(values: impl Iterator<Item = (usize, S)>) -> S {
    let worst = values
        .map(|(n, p)| p.max(S::zero()).powf(S::one() / S::of_usize(n)))
        .fold(S::zero(), S::max);
    S::one() - worst
}

/// Estimates `p_n = P(row[0..n] all zero)` for `n = 1..=n_max`.
pub fn allzero_curve<S: Scalar>(rows: &[Vec<bool>], n_max: usize, z: f64) -> Result<DominationReport<S>> {
    if n_max == 0 {
        return Err(invalid("n_max must be >= 1"));
    }
    if rows.len() < MIN_ALLZERO_SAMPLES {
        return Err(Error::InsufficientStatistics {
            what: "all-zero curve samples".into(),
            have: rows.len(),
            need: MIN_ALLZERO_SAMPLES,
        });
    }
    if let Some(r) = rows.iter().find(|r| r.len() < n_max) {
        return Err(invalid(format!("row of length {} shorter than n_max {n_max}", r.len())));
    }
    // run[k] = number of rows whose leading zero run has length exactly k (capped at n_max)
    let mut run = vec![0u64; n_max + 1];
    for r in rows {
        let len = r[..n_max].iter().position(|&b| b).unwrap_or(n_max);
        run[len] += 1;
    }
    let trials = rows.len() as u64;
    let mut hits = trials;
    let mut points = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        hits -= run[n - 1];
        let counts = Proportion::new(hits, trials);
        let (ci_lo, ci_hi) = counts.wilson(z);
        points.push(AllZeroPoint {
            n,
            counts,
            p_hat: counts.value(),
            ci_lo,
            ci_hi,
        });
    }
    let rho_hat = implied_rho(points.iter().map(|p| (p.n, p.p_hat)));
    let rho_conservative = implied_rho(points.iter().map(|p| (p.n, p.ci_hi)));
    let rho_upper = implied_rho(points.iter().map(|p| (p.n, p.ci_lo)));
    let tol = S::of(1e-12);
    let pass = rho_conservative > S::zero()
        && points
            .iter()
            .all(|p| p.ci_hi <= (S::one() - rho_conservative).powi(p.n as i32) + tol);
    Ok(DominationReport {
        samples: rows.len(),
        z,
        points,
        rho_hat,
        rho_conservative,
        rho_upper,
        conditional: Vec::new(),
        pass,
    })
}

/// `P(sample[target] = 1 | zeros on `zeros`, ones on `ones`)` by rejection.
pub fn conditional_criterion<S: Scalar>(
    samples: &[Vec<bool>],
    zeros: &[usize],
    ones: &[usize],
    target: usize,
    z: f64,
) -> Result<ConditionalEstimate<S>> {
    let width = samples.first().map_or(0, Vec::len);
    if samples.iter().any(|s| s.len() != width) {
        return Err(invalid("samples have different lengths"));
    }
    if zeros.iter().chain(ones).chain([&target]).any(|&i| i >= width) {
        return Err(invalid("index outside the sample"));
    }
    if zeros.contains(&target) || ones.contains(&target) || zeros.iter().any(|i| ones.contains(i)) {
        return Err(invalid("target, zero set and one set must be disjoint"));
    }
    let mut hits = Proportion::default();
    for s in samples {
        if zeros.iter().all(|&i| !s[i]) && ones.iter().all(|&i| s[i]) {
            hits.record(s[target]);
        }
    }
    let conditioned = hits.trials as usize;
    if conditioned < MIN_CONDITIONED {
        return Err(Error::InsufficientStatistics {
            what: "conditioning event".into(),
            have: conditioned,
            need: MIN_CONDITIONED,
        });
    }
    Ok(ConditionalEstimate {
        target,
        zeros: zeros.to_vec(),
        ones: ones.to_vec(),
        conditioned,
        total: samples.len(),
        hits,
        estimate: hits.estimate(z),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::Z95;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bernoulli_rows(rho: f64, rows: usize, width: usize, seed: u64) -> Vec<Vec<bool>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..rows)
            .map(|_| (0..width).map(|_| rng.random::<f64>() < rho).collect())
            .collect()
    }

    #[test]
    fn bernoulli_rows_recover_density() {
        let rows = bernoulli_rows(0.3, 10_000, 10, 1);
        let rep: DominationReport<f64> = allzero_curve(&rows, 10, Z95).unwrap();
        assert!((0.25..=0.35).contains(&rep.rho_hat), "{}", rep.rho_hat);
        assert!(rep.rho_conservative <= rep.rho_hat && rep.rho_hat <= rep.rho_upper);
        assert!(rep.pass);
        // p_n = 0.7^n
        for p in &rep.points {
            assert!(p.ci_lo <= 0.7f64.powi(p.n as i32) && 0.7f64.powi(p.n as i32) <= p.ci_hi);
        }
        assert!(rep.points.windows(2).all(|w| w[1].counts.hits <= w[0].counts.hits));
    }

    #[test]
    fn degenerate_inputs() {
        let ones = vec![vec![true; 5]; 1000];
        let rep: DominationReport<f64> = allzero_curve(&ones, 5, Z95).unwrap();
        assert_eq!(rep.rho_hat, 1.0);
        assert!(rep.points.iter().all(|p| p.p_hat == 0.0));
        let zeros = vec![vec![false; 5]; 1000];
        let rep: DominationReport<f64> = allzero_curve(&zeros, 5, Z95).unwrap();
        assert_eq!(rep.rho_hat, 0.0);
        assert!(!rep.pass);
        assert!(allzero_curve::<f64>(&zeros[..10], 5, Z95).is_err());
        assert!(allzero_curve::<f64>(&zeros, 6, Z95).is_err());
        assert!(rep.to_csv().starts_with("n,p_hat,ci_lo,ci_hi\n1,1,"));
    }

    #[test]
    fn conditional_on_product_input_is_density() {
        let rows = bernoulli_rows(0.4, 20_000, 6, 2);
        let est: ConditionalEstimate<f64> = conditional_criterion(&rows, &[0, 1], &[2], 5, 3.29).unwrap();
        assert!(est.estimate.contains(0.4));
        let plain: ConditionalEstimate<f64> = conditional_criterion(&rows, &[], &[], 5, 3.29).unwrap();
        assert_eq!(plain.conditioned, 20_000);
        assert!(plain.estimate.contains(0.4));
    }

    #[test]
    fn rare_conditioning_reports_starvation() {
        let rows = bernoulli_rows(0.9, 1000, 6, 3);
        let r = conditional_criterion::<f64>(&rows, &[0, 1, 2, 3], &[], 5, Z95);
        assert!(matches!(r, Err(Error::InsufficientStatistics { .. })));
        assert!(conditional_criterion::<f64>(&rows, &[0], &[0], 5, Z95).is_err());
    }
}
