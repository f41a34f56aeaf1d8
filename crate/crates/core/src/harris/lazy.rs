//! A timeline whose per-entity event lists are drawn only when first read,
//! and a backward scan that touches only the vertices it reaches.
//!
//! Entity lists coincide with those of [`EventTimeline::generate`] on the same
//! `(key, window)` whenever that draw is tie-free.
//!
//! [`EventTimeline::generate`]: super::timeline::EventTimeline::generate

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{invalid, Result};
use crate::rng::{domain, PoissonClock, RngKey};
use crate::scalar::Scalar;
use crate::topology::GraphTopology;

pub struct LazyTimeline<'a, S: Scalar> {
    topology: &'a GraphTopology,
    lambda: S,
    window: (S, S),
    key: RngKey,
    crosses: HashMap<u32, Vec<S>>,
    arrows: HashMap<u32, Vec<S>>,
}

impl<'a, S: Scalar> LazyTimeline<'a, S> {
    pub fn new(topology: &'a GraphTopology, lambda: S, window: (S, S), key: RngKey) -> Result<Self> {
        if !(lambda >= S::zero()) || !lambda.is_finite() {
            return Err(invalid(format!("infection rate must be >= 0, got {lambda}")));
        }
        if !(window.0 < window.1) || !window.0.is_finite() || !window.1.is_finite() {
            return Err(invalid("window must be finite and nonempty"));
        }
        Ok(Self {
            topology,
            lambda,
            window,
            key,
            crosses: HashMap::new(),
            arrows: HashMap::new(),
        })
    }

    pub fn topology(&self) -> &GraphTopology {
        self.topology
    }

    pub fn window(&self) -> (S, S) {
        self.window
    }

    pub fn crosses(&mut self, v: u32) -> &[S] {
        let (key, window) = (self.key, self.window);
        self.crosses.entry(v).or_insert_with(|| {
            PoissonClock::new(key.entity_rng(domain::CROSS, v as u64), 1.0, window.0)
                .collect_until(window.1)
        })
    }

    pub fn arrows(&mut self, e: u32) -> &[S] {
        let (key, window, rate) = (self.key, self.window, self.lambda.to_f64_lossy());
        self.arrows.entry(e).or_insert_with(|| {
            PoissonClock::new(key.entity_rng(domain::ARROW, e as u64), rate, window.0)
                .collect_until(window.1)
        })
    }

    /// Number of vertices whose crosses have been drawn.
    pub fn touched(&self) -> usize {
        self.crosses.len()
    }
}

#[derive(Clone, Copy)]
enum Mark {
    Cross,
    Arrow { from: u32, edge: u32 },
}

struct Entry<S> {
    time: S,
    vertex: u32,
    mark: Mark,
    index: usize,
    generation: u32,
}

impl<S: Scalar> PartialEq for Entry<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl<S: Scalar> Eq for Entry<S> {}
impl<S: Scalar> PartialOrd for Entry<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<S: Scalar> Ord for Entry<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.partial_cmp(&other.time).unwrap_or(Ordering::Equal)
    }
}

/// Result of a lazy backward scan.
#[derive(Debug, Clone, PartialEq)]
pub struct LazyScan<S> {
    /// Vertices reachable at the floor, increasing.
    pub reachable: Vec<u32>,
    pub died_at: Option<S>,
    /// Largest distance from the origin of any vertex the scan reached.
    pub reach: u32,
}

struct Scanner<'t, 'a, S: Scalar> {
    tl: &'t mut LazyTimeline<'a, S>,
    active: HashMap<u32, u32>,
    generation: HashMap<u32, u32>,
    heap: BinaryHeap<Entry<S>>,
    reach: u32,
}

impl<S: Scalar> Scanner<'_, '_, S> {
    /// Activates `w` at `t`; `inclusive` admits events at exactly `t`.
    fn activate(&mut self, w: u32, t: S, inclusive: bool) {
        let g = {
            let g = self.generation.entry(w).or_insert(0);
            *g += 1;
            *g
        };
        self.active.insert(w, g);
        self.reach = self.reach.max(self.tl.topology.distance_from_origin(w));
        let before = |list: &[S]| {
            if inclusive {
                list.partition_point(|&c| c <= t)
            } else {
                list.partition_point(|&c| c < t)
            }
        };
        let k = before(self.tl.crosses(w));
        if k > 0 {
            let time = self.tl.crosses(w)[k - 1];
            self.heap.push(Entry {
                time,
                vertex: w,
                mark: Mark::Cross,
                index: k - 1,
                generation: g,
            });
        }
        let topo = self.tl.topology;
        for &z in topo.neighbors(w) {
            let pos = topo.neighbors(z).iter().position(|&y| y == w).expect("symmetric adjacency");
            let edge = topo.edge_offset(z) + pos as u32;
            let k = before(self.tl.arrows(edge));
            if k > 0 {
                let time = self.tl.arrows(edge)[k - 1];
                self.heap.push(Entry {
                    time,
                    vertex: w,
                    mark: Mark::Arrow { from: z, edge },
                    index: k - 1,
                    generation: g,
                });
            }
        }
    }
}

/// Backward scan from `(x, t)` down to `floor`, drawing clocks on demand.
pub fn lazy_backward_scan<S: Scalar>(
    timeline: &mut LazyTimeline<'_, S>,
    x: u32,
    t: S,
    floor: S,
) -> Result<LazyScan<S>> {
    let (a, b) = timeline.window;
    if !(floor >= a && t <= b && floor <= t) {
        return Err(invalid("scan times must satisfy start <= floor <= t <= end"));
    }
    if x as usize >= timeline.topology.len() {
        return Err(invalid(format!("vertex {x} not in topology")));
    }
    let mut sc = Scanner {
        tl: timeline,
        active: HashMap::new(),
        generation: HashMap::new(),
        heap: BinaryHeap::new(),
        reach: 0,
    };
    sc.activate(x, t, true);
    while let Some(e) = sc.heap.pop() {
        if e.time <= floor {
            break;
        }
        if sc.active.get(&e.vertex) != Some(&e.generation) {
            continue;
        }
        match e.mark {
            Mark::Cross => {
                sc.active.remove(&e.vertex);
                if sc.active.is_empty() {
                    return Ok(LazyScan {
                        reachable: Vec::new(),
                        died_at: Some(e.time),
                        reach: sc.reach,
                    });
                }
            }
            Mark::Arrow { from, edge } => {
                if !sc.active.contains_key(&from) {
                    sc.activate(from, e.time, false);
                }
                if e.index > 0 {
                    let time = sc.tl.arrows(edge)[e.index - 1];
                    sc.heap.push(Entry {
                        time,
                        index: e.index - 1,
                        ..e
                    });
                }
            }
        }
    }
    let mut reachable: Vec<u32> = sc.active.keys().copied().collect();
    reachable.sort_unstable();
    Ok(LazyScan {
        reachable,
        died_at: None,
        reach: sc.reach,
    })
}
