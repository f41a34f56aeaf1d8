//! Keyed random streams.
//!
//! Every random entity (a vertex's recovery clock, a directed edge's
//! infection clock, a Bernoulli site, ...) draws from its own ChaCha8
//! stream. The ChaCha key is derived from `(seed, stream, domain)` and the
//! ChaCha stream id is the entity id, so an entity's draws never depend on
//! the order in which other entities are generated.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Domain separators for the different uses of randomness.
pub mod domain {
    pub const CROSS: u64 = 1;
    pub const ARROW: u64 = 2;
    pub const BERNOULLI: u64 = 3;
    pub const SPIN_DOWN: u64 = 4;
    pub const SPIN_UP: u64 = 5;
    pub const MISC: u64 = 6;
}

/// `(seed, stream)` pair identifying one reproducible source of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngKey {
    pub seed: u64,
    pub stream: u64,
}

#[inline]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngKey {
    pub const fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Key for replica `index` of an experiment with master seed `master`.
    /// Depends only on the pair, so adding replicas never shifts earlier ones.
    pub fn for_replica(master: u64, index: u64) -> Self {
        Self {
            seed: splitmix64(master ^ splitmix64(index.wrapping_add(0x5851_F42D_4C95_7F2D))),
            stream: index,
        }
    }

    /// Derived key, e.g. for a retry attempt or a sub-experiment.
    pub fn derive(&self, salt: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(salt ^ 0xD1B5_4A32_D192_ED03)),
            stream: self.stream,
        }
    }

    pub fn entity_rng(&self, domain: u64, entity: u64) -> ChaCha8Rng {
        let mut h = splitmix64(self.seed);
        h = splitmix64(h ^ self.stream);
        h = splitmix64(h ^ domain);
        let mut seed = [0u8; 32];
        for (i, chunk) in seed.chunks_exact_mut(8).enumerate() {
            h = splitmix64(h.wrapping_add(i as u64));
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(entity);
        rng
    }
}

/// Exp(rate) variate; never returns exactly zero.
#[inline]
pub fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    loop {
        let u: f64 = rng.random();
        let e = -(1.0 - u).ln();
        if e > 0.0 {
            return e / rate;
        }
    }
}

/// Homogeneous Poisson clock that yields its event times in increasing order.
#[derive(Debug, Clone)]
pub struct PoissonClock<S> {
    rng: ChaCha8Rng,
    rate: f64,
    next: S,
}

impl<S: Scalar> PoissonClock<S> {
    /// Clock started at `origin`; the first event is strictly after it.
    /// A zero rate never rings.
    pub fn new(rng: ChaCha8Rng, rate: f64, origin: S) -> Self {
        let mut clock = Self {
            rng,
            rate,
            next: origin,
        };
        clock.advance();
        clock
    }

    #[inline]
    pub fn peek(&self) -> S {
        self.next
    }

    /// Returns the current event time and draws the next one.
    #[inline]
    pub fn pop(&mut self) -> S {
        let t = self.next;
        self.advance();
        t
    }

    #[inline]
    fn advance(&mut self) {
        if self.rate <= 0.0 {
            self.next = S::infinity();
            return;
        }
        loop {
            let candidate = self.next + S::of(exponential(&mut self.rng, self.rate));
            if candidate > self.next {
                self.next = candidate;
                return;
            }
        }
    }

    /// Event times in `(origin, end)`, consuming the clock.
    pub fn collect_until(mut self, end: S) -> Vec<S> {
        let mut out = Vec::new();
        while self.next < end {
            out.push(self.pop());
        }
        out
    }
}
