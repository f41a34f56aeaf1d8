//! Extinction times from finite initial sets with lazily drawn clocks.
//!
//! Clocks are keyed exactly like [`EventTimeline::generate`] over `[0, horizon]`,
//! so a lazy run and a materialized run on the same key see the same events.
//!
//! [`EventTimeline::generate`]: super::timeline::EventTimeline::generate

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng::{domain, PoissonClock, RngKey};
use crate::scalar::Scalar;
use crate::topology::GraphTopology;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtinctionSample<S> {
    /// Extinction time, or `horizon` when censored.
    pub tau: S,
    pub censored: bool,
    pub horizon: S,
    /// Largest graph distance from the origin that was ever infected.
    pub reach: u32,
}

impl<S: Scalar> ExtinctionSample<S> {
    /// `tau` as an extended real: infinite when censored.
    pub fn tau_or_inf(&self) -> S {
        if self.censored {
            S::infinity()
        } else {
            self.tau
        }
    }
}

struct Pending<S> {
    time: S,
    entity: u64,
    generation: u32,
}

impl<S: Scalar> PartialEq for Pending<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Pending<S> {}
impl<S: Scalar> PartialOrd for Pending<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Pending<S> {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .partial_cmp(&self.time)
            .unwrap_or(Ordering::Equal)
            .then(other.entity.cmp(&self.entity))
    }
}

struct LazyRun<'a, S: Scalar> {
    topology: &'a GraphTopology,
    key: RngKey,
    rate: f64,
    clocks: HashMap<u64, PoissonClock<S>>,
    heap: BinaryHeap<Pending<S>>,
    infected: Vec<bool>,
    generation: Vec<u32>,
    count: usize,
    reach: u32,
}

impl<'a, S: Scalar> LazyRun<'a, S> {
    fn n(&self) -> u64 {
        self.topology.len() as u64
    }

    fn owner(&self, entity: u64) -> u32 {
        if entity < self.n() {
            entity as u32
        } else {
            self.topology.directed_edge((entity - self.n()) as u32).0
        }
    }

    fn schedule(&mut self, entity: u64, now: S, generation: u32) {
        let n = self.n();
        let (key, rate) = (self.key, self.rate);
        let clock = self.clocks.entry(entity).or_insert_with(|| {
            if entity < n {
                PoissonClock::new(key.entity_rng(domain::CROSS, entity), 1.0, S::zero())
            } else {
                PoissonClock::new(key.entity_rng(domain::ARROW, entity - n), rate, S::zero())
            }
        });
        while clock.peek() <= now {
            clock.pop();
        }
        let time = clock.peek();
        if time.is_finite() {
            self.heap.push(Pending {
                time,
                entity,
                generation,
            });
        }
    }

    fn infect(&mut self, v: u32, now: S) {
        let i = v as usize;
        if self.infected[i] {
            return;
        }
        self.infected[i] = true;
        self.count += 1;
        self.generation[i] += 1;
        self.reach = self.reach.max(self.topology.distance_from_origin(v));
        let g = self.generation[i];
        self.schedule(v as u64, now, g);
        let base = self.n() + self.topology.edge_offset(v) as u64;
        for k in 0..self.topology.degree(v) as u64 {
            self.schedule(base + k, now, g);
        }
    }
}

/// Runs the process from `start` at time 0 until extinction or `horizon`.
pub fn extinction_time<S: Scalar>(
    topology: &GraphTopology,
    lambda: S,
    start: &[u32],
    horizon: S,
    key: RngKey,
) -> Result<ExtinctionSample<S>> {
    if !(lambda >= S::zero()) || !lambda.is_finite() {
        return Err(invalid(format!("infection rate must be >= 0, got {lambda}")));
    }
    if !(horizon > S::zero()) {
        return Err(invalid("horizon must be positive"));
    }
    if start.is_empty() {
        return Err(invalid("initial set is empty"));
    }
    let n = topology.len();
    let mut run = LazyRun {
        topology,
        key,
        rate: lambda.to_f64_lossy(),
        clocks: HashMap::new(),
        heap: BinaryHeap::new(),
        infected: vec![false; n],
        generation: vec![0; n],
        count: 0,
        reach: 0,
    };
    for &v in start {
        if v as usize >= n {
            return Err(invalid(format!("vertex {v} is not in the topology")));
        }
        run.infect(v, S::zero());
    }
    while let Some(p) = run.heap.pop() {
        if p.time >= horizon {
            break;
        }
        let owner = run.owner(p.entity);
        if !run.infected[owner as usize] || run.generation[owner as usize] != p.generation {
            continue;
        }
        let clock = run.clocks.get_mut(&p.entity).expect("scheduled clock");
        clock.pop();
        let next = clock.peek();
        if next.is_finite() {
            run.heap.push(Pending {
                time: next,
                entity: p.entity,
                generation: p.generation,
            });
        }
        if p.entity < n as u64 {
            run.infected[owner as usize] = false;
            run.count -= 1;
            if run.count == 0 {
                return Ok(ExtinctionSample {
                    tau: p.time,
                    censored: false,
                    horizon,
                    reach: run.reach,
                });
            }
        } else {
            let (_, to) = topology.directed_edge((p.entity - n as u64) as u32);
            run.infect(to, p.time);
        }
    }
    Ok(ExtinctionSample {
        tau: horizon,
        censored: true,
        horizon,
        reach: run.reach,
    })
}
