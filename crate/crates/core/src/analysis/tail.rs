//! Survival mass and exponential fit of the finite extinction-time tail.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::harris::ExtinctionSample;
use crate::scalar::Scalar;
use crate::stats::{Estimate, LinearFit, Proportion, Z95};

/// Minimum number of finite samples beyond `s0` for a tail fit.
pub const MIN_TAIL_SAMPLES: usize = 50;
/// Number of evaluation points of the empirical tail.
const TAIL_POINTS: usize = 20;
/// The last evaluation point keeps at least this many finite samples above it.
const TAIL_FLOOR: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailParams<S> {
    /// `C` in `P(s < tau < inf) <= C exp(-c s)`.
    pub big_c: S,
    pub c: S,
    pub c_ci: (S, S),
    pub r_squared: S,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit<S> {
    pub samples: usize,
    pub finite: usize,
    pub censored: usize,
    pub s0: S,
    /// Finite samples strictly above `s0`.
    pub above_s0: usize,
    /// Censored fraction.
    pub epsilon: Estimate<S>,
    pub fit: Option<TailParams<S>>,
    /// Why no fit was produced.
    pub flag: Option<Error>,
    pub pass: bool,
}

/// `epsilon` is the censored fraction; the fit regresses
/// `log P(s < tau < inf)` on `s` over finite samples above `s0`.
pub fn tail_fit<S: Scalar>(samples: &[ExtinctionSample<S>], s0: S) -> Result<TailFit<S>> {
    if samples.is_empty() {
        return Err(invalid("no extinction samples"));
    }
    let mut surv = Proportion::default();
    let mut finite: Vec<S> = Vec::new();
    for s in samples {
        surv.record(s.censored);
        if !s.censored {
            finite.push(s.tau);
        }
    }
    finite.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let above: Vec<S> = finite.iter().copied().filter(|&t| t > s0).collect();
    let mut out = TailFit {
        samples: samples.len(),
        finite: finite.len(),
        censored: samples.len() - finite.len(),
        s0,
        above_s0: above.len(),
        epsilon: surv.estimate(Z95),
        fit: None,
        flag: None,
        pass: false,
    };
    if above.len() < MIN_TAIL_SAMPLES {
        out.flag = Some(Error::InsufficientStatistics {
            what: "finite extinction times above s0".into(),
            have: above.len(),
            need: MIN_TAIL_SAMPLES,
        });
        return Ok(out);
    }
    let total = S::of_usize(samples.len());
    let s_max = above[above.len() - TAIL_FLOOR];
    let mut xs = Vec::with_capacity(TAIL_POINTS);
    let mut ys = Vec::with_capacity(TAIL_POINTS);
    for j in 0..TAIL_POINTS {
        let s = s0 + (s_max - s0) * S::of_usize(j) / S::of_usize(TAIL_POINTS - 1);
        let count = above.len() - above.partition_point(|&t| t <= s);
        if count == 0 {
            continue;
        }
        xs.push(s);
        ys.push((S::of_usize(count) / total).ln());
    }
    match LinearFit::fit(&xs, &ys) {
        Some(f) => {
            let c = -f.slope;
            let half = S::of(Z95) * f.slope_std_err;
            let params = TailParams {
                big_c: f.intercept.exp(),
                c,
                c_ci: (c - half, c + half),
                r_squared: f.r_squared,
                points: f.points,
            };
            out.pass = c > S::zero() && params.c_ci.0 > S::zero();
            out.fit = Some(params);
        }
        None => {
            out.flag = Some(invalid("tail has no spread above s0"));
        }
    }
    Ok(out)
}
