//! Bernoulli product measures and the independent spin-flip process.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::harris::{Configuration, Flip, Trajectory};
use crate::rng::{domain, PoissonClock, RngKey};
use crate::scalar::Scalar;
use crate::topology::{GraphTopology, VertexSubset};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductMeasureParams {
    pub rho: f64,
}

impl ProductMeasureParams {
    pub fn new(rho: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(invalid(format!("density must lie in [0, 1], got {rho}")));
        }
        Ok(Self { rho })
    }

    /// `rho^|ones| (1 - rho)^|zeros|`.
    pub fn cylinder<S: Scalar>(&self, ones: usize, zeros: usize) -> S {
        S::of(self.rho).powi(ones as i32) * S::of(1.0 - self.rho).powi(zeros as i32)
    }
}

/// Spin-flip rates: `1 -> 0` at rate 1, `0 -> 1` at rate `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinFlipParams {
    pub alpha: f64,
}

impl SpinFlipParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(invalid(format!("flip rate must be >= 0, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    /// Stationary density `alpha / (alpha + 1)`.
    pub fn rho<S: Scalar>(&self) -> S {
        S::of(self.alpha) / S::of(self.alpha + 1.0)
    }

    pub fn product_measure(&self) -> ProductMeasureParams {
        ProductMeasureParams {
            rho: self.alpha / (self.alpha + 1.0),
        }
    }
}

/// Bit of vertex `v` under the product measure keyed by `key`.
pub fn bernoulli_bit(params: ProductMeasureParams, key: RngKey, v: u32) -> bool {
    let u: f64 = key.entity_rng(domain::BERNOULLI, v as u64).random();
    u < params.rho
}

/// I.i.d. Bernoulli(`rho`) bits on `subset`, 0 elsewhere. Each vertex reads
/// its own stream, so the bit at `v` does not depend on the rest of `subset`.
pub fn bernoulli_sample(
    topology: &GraphTopology,
    params: ProductMeasureParams,
    subset: &VertexSubset,
    key: RngKey,
) -> Result<Configuration> {
    if !subset.belongs_to(topology) {
        return Err(crate::error::Error::TopologyMismatch(
            "subset belongs to another topology".into(),
        ));
    }
    let mut cfg = Configuration::zeros(topology);
    for v in subset.iter() {
        cfg.set(v, bernoulli_bit(params, key, v));
    }
    Ok(cfg)
}

/// Independent two-state chains per site on `window`, each with its own
/// down and up clocks.
pub fn spin_flip_evolve<S: Scalar>(
    params: SpinFlipParams,
    init: &Configuration,
    window: (S, S),
    key: RngKey,
) -> Result<Trajectory<S>> {
    if !(window.0 < window.1) || !window.0.is_finite() || !window.1.is_finite() {
        return Err(invalid("window must be finite and nonempty"));
    }
    let mut flips = Vec::new();
    let mut state = init.clone();
    for v in 0..init.len() as u32 {
        let mut down: PoissonClock<S> =
            PoissonClock::new(key.entity_rng(domain::SPIN_DOWN, v as u64), 1.0, window.0);
        let mut up: PoissonClock<S> =
            PoissonClock::new(key.entity_rng(domain::SPIN_UP, v as u64), params.alpha, window.0);
        let mut bit = init.get(v);
        let mut now = window.0;
        loop {
            // rings of a clock while its transition is unavailable are skipped
            let active = if bit { &mut down } else { &mut up };
            while active.peek() <= now {
                active.pop();
            }
            let t = active.pop();
            if !(t < window.1) {
                break;
            }
            bit = !bit;
            now = t;
            flips.push(Flip {
                time: t,
                vertex: v,
                value: bit,
            });
        }
        state.set(v, bit);
    }
    flips.sort_by(|a, b| {
        a.time
            .partial_cmp(&b.time)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.vertex.cmp(&b.vertex))
    });
    Ok(Trajectory::new(window, init.clone(), flips, state))
}
