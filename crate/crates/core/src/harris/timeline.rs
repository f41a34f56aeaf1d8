//! Realized Poisson crosses and arrows on a space-time window.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::rng::{domain, PoissonClock, RngKey};
use crate::scalar::Scalar;
use crate::topology::GraphTopology;

/// Maximum number of regenerations after a floating-point tie.
const MAX_TIE_RETRIES: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Recovery mark on `vertex`.
    Cross { vertex: u32 },
    /// Infection arrow along directed edge `edge = from -> to`.
    Arrow { from: u32, to: u32, edge: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<S> {
    pub time: S,
    pub kind: EventKind,
}

/// Crosses (rate 1 per vertex) and arrows (rate `lambda` per directed edge)
/// inside the open window `(start, end)`. Immutable once built.
#[derive(Debug, Clone)]
pub struct EventTimeline<S: Scalar = f64> {
    topology: u64,
    vertices: usize,
    window: (S, S),
    lambda: S,
    key: RngKey,
    crosses: Vec<Vec<S>>,
    arrows: Vec<Vec<S>>,
    edges: Vec<(u32, u32)>,
    events: Vec<Event<S>>,
}

fn check_window<S: Scalar>(window: (S, S)) -> Result<()> {
    if !(window.0 < window.1) || !window.0.is_finite() || !window.1.is_finite() {
        return Err(invalid(format!(
            "window [{}, {}] must be finite and nonempty",
            window.0, window.1
        )));
    }
    Ok(())
}

/// Draws a timeline; the same `(topology, lambda, window, key)` always yields
/// the same events.
pub fn generate_timeline<S: Scalar>(
    topology: &GraphTopology,
    lambda: S,
    window: (S, S),
    key: RngKey,
) -> Result<EventTimeline<S>> {
    EventTimeline::generate(topology, lambda, window, key)
}

impl<S: Scalar> EventTimeline<S> {
    pub fn generate(
        topology: &GraphTopology,
        lambda: S,
        window: (S, S),
        key: RngKey,
    ) -> Result<Self> {
        if !(lambda >= S::zero()) || !lambda.is_finite() {
            return Err(invalid(format!("infection rate must be >= 0, got {lambda}")));
        }
        check_window(window)?;
        for attempt in 0..MAX_TIE_RETRIES {
            let draw_key = if attempt == 0 { key } else { key.derive(attempt) };
            let crosses: Vec<Vec<S>> = (0..topology.len() as u64)
                .map(|v| {
                    PoissonClock::new(draw_key.entity_rng(domain::CROSS, v), 1.0, window.0)
                        .collect_until(window.1)
                })
                .collect();
            let rate = lambda.to_f64_lossy();
            let arrows: Vec<Vec<S>> = (0..topology.directed_edge_count() as u64)
                .map(|e| {
                    PoissonClock::new(draw_key.entity_rng(domain::ARROW, e), rate, window.0)
                        .collect_until(window.1)
                })
                .collect();
            match Self::assemble(topology, lambda, window, key, crosses, arrows) {
                Ok(t) => return Ok(t),
                Err(Error::InvalidParameter(msg)) if msg.starts_with("tie") => continue,
                Err(e) => return Err(e),
            }
        }
        Err(invalid("could not draw a tie-free timeline"))
    }

    /// Timeline from explicit event lists (`crosses[v]`, `arrows[edge id]`).
    pub fn from_events(
        topology: &GraphTopology,
        lambda: S,
        window: (S, S),
        crosses: Vec<Vec<S>>,
        arrows: Vec<Vec<S>>,
    ) -> Result<Self> {
        check_window(window)?;
        if crosses.len() != topology.len() || arrows.len() != topology.directed_edge_count() {
            return Err(Error::TopologyMismatch(
                "event lists do not match the topology".into(),
            ));
        }
        for list in crosses.iter().chain(&arrows) {
            if list.iter().any(|&t| !(t > window.0 && t < window.1)) {
                return Err(invalid("event time outside the open window"));
            }
            if list.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(invalid("event times must be strictly increasing"));
            }
        }
        Self::assemble(topology, lambda, window, RngKey::new(0, 0), crosses, arrows)
    }

    fn assemble(
        topology: &GraphTopology,
        lambda: S,
        window: (S, S),
        key: RngKey,
        crosses: Vec<Vec<S>>,
        arrows: Vec<Vec<S>>,
    ) -> Result<Self> {
        let edges = topology.directed_edges();
        let total = crosses.iter().map(Vec::len).sum::<usize>()
            + arrows.iter().map(Vec::len).sum::<usize>();
        let mut events = Vec::with_capacity(total);
        for (v, list) in crosses.iter().enumerate() {
            events.extend(list.iter().map(|&time| Event {
                time,
                kind: EventKind::Cross { vertex: v as u32 },
            }));
        }
        for (e, list) in arrows.iter().enumerate() {
            let (from, to) = edges[e];
            events.extend(list.iter().map(|&time| Event {
                time,
                kind: EventKind::Arrow {
                    from,
                    to,
                    edge: e as u32,
                },
            }));
        }
        events.sort_by(|a, b| a.time.partial_cmp(&b.time).unwrap_or(Ordering::Equal));
        if events.windows(2).any(|w| w[0].time == w[1].time) {
            return Err(invalid("tie between event times"));
        }
        Ok(Self {
            topology: topology.id(),
            vertices: topology.len(),
            window,
            lambda,
            key,
            crosses,
            arrows,
            edges,
            events,
        })
    }

    pub fn topology_id(&self) -> u64 {
        self.topology
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn window(&self) -> (S, S) {
        self.window
    }

    pub fn lambda(&self) -> S {
        self.lambda
    }

    pub fn key(&self) -> RngKey {
        self.key
    }

    /// Cross times on `v`, increasing.
    pub fn crosses(&self, v: u32) -> &[S] {
        &self.crosses[v as usize]
    }

    /// Arrow times on directed edge `e`, increasing.
    pub fn arrows(&self, e: u32) -> &[S] {
        &self.arrows[e as usize]
    }

    pub fn edge(&self, e: u32) -> (u32, u32) {
        self.edges[e as usize]
    }

    /// All events in increasing time order.
    pub fn events(&self) -> &[Event<S>] {
        &self.events
    }

    /// Index range of events with `after < time <= upto`.
    pub fn event_range(&self, after: S, upto: S) -> std::ops::Range<usize> {
        let lo = self.events.partition_point(|e| e.time <= after);
        let hi = self.events.partition_point(|e| e.time <= upto);
        lo..hi.max(lo)
    }

    pub fn ensure_on(&self, topology: &GraphTopology) -> Result<()> {
        if self.topology != topology.id() || self.vertices != topology.len() {
            return Err(Error::TopologyMismatch(
                "timeline belongs to another topology".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn check_time(&self, t: S) -> Result<()> {
        if t < self.window.0 || t > self.window.1 || t.is_nan() {
            return Err(Error::OutOfWindow {
                time: t.to_f64_lossy(),
                start: self.window.0.to_f64_lossy(),
                end: self.window.1.to_f64_lossy(),
            });
        }
        Ok(())
    }

    /// Text event log: a `#` header, then `X <vertex> <time>` and
    /// `A <from> <to> <time>` lines in time order.
    pub fn to_event_log(&self) -> String {
        let mut out = String::with_capacity(self.events.len() * 24 + 128);
        let _ = writeln!(
            out,
            "# topology {:016x} lambda {} window {} {} seed {} stream {}",
            self.topology, self.lambda, self.window.0, self.window.1, self.key.seed, self.key.stream
        );
        for e in &self.events {
            let _ = match e.kind {
                EventKind::Cross { vertex } => writeln!(out, "X {vertex} {}", e.time),
                EventKind::Arrow { from, to, .. } => writeln!(out, "A {from} {to} {}", e.time),
            };
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{MeanVar, Z99};
    use crate::topology::{BoundaryPolicy, TopologyKind};

    fn topo(kind: TopologyKind) -> GraphTopology {
        GraphTopology::build(&kind, &BoundaryPolicy::Free).unwrap()
    }

    #[test]
    fn zero_rate_has_no_arrows() {
        let t = topo(TopologyKind::lattice(1, 5));
        let tl = EventTimeline::<f64>::generate(&t, 0.0, (0.0, 10.0), RngKey::new(1, 0)).unwrap();
        assert!(tl
            .events()
            .iter()
            .all(|e| matches!(e.kind, EventKind::Cross { .. })));
        assert!(!tl.events().is_empty());
    }

    #[test]
    fn negative_rate_and_empty_window_rejected() {
        let t = topo(TopologyKind::half_line(2));
        assert!(EventTimeline::<f64>::generate(&t, -1.0, (0.0, 1.0), RngKey::new(1, 0)).is_err());
        assert!(EventTimeline::<f64>::generate(&t, 1.0, (1.0, 1.0), RngKey::new(1, 0)).is_err());
    }

    #[test]
    fn regeneration_is_identical() {
        let t = topo(TopologyKind::lattice(2, 3));
        let k = RngKey::new(42, 7);
        let a = EventTimeline::<f64>::generate(&t, 1.3, (-2.0, 5.0), k).unwrap();
        let b = EventTimeline::<f64>::generate(&t, 1.3, (-2.0, 5.0), k).unwrap();
        assert_eq!(a.to_event_log(), b.to_event_log());
        let c = EventTimeline::<f64>::generate(&t, 1.3, (-2.0, 5.0), RngKey::new(42, 8)).unwrap();
        assert_ne!(a.to_event_log(), c.to_event_log());
    }

    #[test]
    fn events_sorted_and_inside_window() {
        let t = topo(TopologyKind::tree(2, 3));
        let tl = EventTimeline::<f32>::generate(&t, 2.0, (0.0, 3.0), RngKey::new(5, 0)).unwrap();
        assert!(tl.events().windows(2).all(|w| w[0].time < w[1].time));
        assert!(tl.events().iter().all(|e| e.time > 0.0 && e.time < 3.0));
        for e in 0..t.directed_edge_count() as u32 {
            assert_eq!(tl.edge(e), t.directed_edge(e));
        }
    }

    #[test]
    fn cross_counts_are_poisson_with_mean_window_length() {
        // 10^4 vertices on a window of length 100: each count ~ Poisson(100).
        let line = topo(TopologyKind::half_line(10_000));
        let tl = EventTimeline::<f64>::generate(&line, 0.0, (0.0, 100.0), RngKey::new(3, 0)).unwrap();
        let counts: MeanVar<f64> = (0..line.len() as u32).map(|v| tl.crosses(v).len() as f64).collect();
        let half = Z99 * (100.0f64 / 1e4).sqrt();
        assert!((counts.mean - 100.0).abs() < half, "mean {}", counts.mean);
        assert!((counts.variance() - 100.0).abs() < 10.0, "var {}", counts.variance());
    }

    #[test]
    fn arrow_counts_scale_with_lambda() {
        let line = topo(TopologyKind::half_line(2000));
        let tl = EventTimeline::<f64>::generate(&line, 1.5, (0.0, 4.0), RngKey::new(8, 0)).unwrap();
        let m: MeanVar<f64> = (0..line.directed_edge_count() as u32)
            .map(|e| tl.arrows(e).len() as f64)
            .collect();
        let half = Z99 * (6.0f64 / line.directed_edge_count() as f64).sqrt();
        assert!((m.mean - 6.0).abs() < half, "{}", m.mean);
    }

    #[test]
    fn from_events_validates() {
        let t = topo(TopologyKind::half_line(2));
        assert!(EventTimeline::<f64>::from_events(&t, 1.0, (0.0, 1.0), vec![vec![0.5], vec![]], vec![vec![], vec![]]).is_ok());
        assert!(EventTimeline::<f64>::from_events(&t, 1.0, (0.0, 1.0), vec![vec![1.5], vec![]], vec![vec![], vec![]]).is_err());
        assert!(EventTimeline::<f64>::from_events(&t, 1.0, (0.0, 1.0), vec![vec![0.5], vec![]], vec![vec![0.5], vec![]]).is_err());
        assert!(EventTimeline::<f64>::from_events(&t, 1.0, (0.0, 1.0), vec![vec![]], vec![]).is_err());
    }

    #[test]
    fn event_log_format() {
        let t = topo(TopologyKind::half_line(2));
        let tl = EventTimeline::<f64>::from_events(&t, 2.0, (0.0, 1.0), vec![vec![0.25], vec![]], vec![vec![0.5], vec![]]).unwrap();
        let log = tl.to_event_log();
        let lines: Vec<&str> = log.lines().collect();
        assert!(lines[0].starts_with("# topology "));
        assert!(lines[0].contains("lambda 2 window 0 1"));
        assert_eq!(&lines[1..], &["X 0 0.25", "A 0 1 0.5"]);
    }
}
